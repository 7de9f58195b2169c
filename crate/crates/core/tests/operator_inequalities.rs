use cosetlab_core::bounds::{hn_inequality_check, random_hn_pair};
use cosetlab_core::linop::{self, random, HermitianOperator};
use cosetlab_core::measurements::{binary_success, helstrom_operators, random_binary_povm};
use cosetlab_core::Settings;
use faer::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn commutator_size(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let ab = a.product(b);
    let ba = b.product(a);
    let d: Mat<cosetlab_core::c64> = ab - ba;
    d.norm_max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inequality_holds_for_noncommuting_pairs(seed in any::<u64>(), dim in 2usize..12) {
        let st = Settings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, t) = random_hn_pair(&mut rng, dim).unwrap();
        let w = hn_inequality_check(&s, &t, 1e-9, &st).unwrap();
        prop_assert!(w.holds, "min eigenvalue {}", w.min_eigenvalue);
        prop_assert!(w.min_eigenvalue >= -1e-9);
    }

    #[test]
    fn inequality_with_full_rank_operators(seed in any::<u64>(), dim in 2usize..10) {
        let st = Settings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random::psd(&mut rng, dim, dim);
        let s = s.scale(0.999 / linop::operator_norm(&s).unwrap());
        let t = random::psd(&mut rng, dim, dim);
        prop_assume!(commutator_size(&s, &t) > 1e-6);
        let w = hn_inequality_check(&s, &t, 1e-9, &st).unwrap();
        prop_assert!(w.holds, "min eigenvalue {}", w.min_eigenvalue);
    }

    #[test]
    fn helstrom_is_optimal(seed in any::<u64>(), dim in 1usize..9) {
        let st = Settings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::state(&mut rng, dim);
        let b = random::state(&mut rng, dim);
        let (povm, value) = helstrom_operators(&a, &b, &st).unwrap();
        let norm = linop::trace_norm(&a.sub(&b).unwrap()).unwrap();
        prop_assert!((value - (0.5 + 0.25 * norm)).abs() < 1e-10);
        prop_assert!((binary_success(&povm, &a, &b).unwrap() - value).abs() < 1e-10);
        for _ in 0..10 {
            let other = random_binary_povm(&mut rng, dim).unwrap();
            prop_assert!(binary_success(&other, &a, &b).unwrap() <= value + 1e-10);
        }
    }
}

#[test]
fn random_pairs_do_not_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut noncommuting = 0;
    for _ in 0..20 {
        let (s, t) = random_hn_pair(&mut rng, 6).unwrap();
        if commutator_size(&s, &t) > 1e-6 {
            noncommuting += 1;
        }
    }
    assert!(noncommuting >= 15, "{noncommuting}");
}

#[test]
fn inequality_rejects_out_of_range_inputs() {
    let st = Settings::default();
    let big = HermitianOperator::scaled_identity(3, 1.5);
    let zero = HermitianOperator::zeros(3);
    assert!(hn_inequality_check(&big, &zero, 1e-9, &st).is_err());
    assert!(hn_inequality_check(&zero, &HermitianOperator::scaled_identity(3, -1.0), 1e-9, &st).is_err());
    assert!(hn_inequality_check(&zero, &HermitianOperator::zeros(2), 1e-9, &st).is_err());
}
