//! Dense, factored and block-diagonal evaluations must agree, and the caps
//! must move monotonically in the number of samples.

use std::sync::Arc;

use cosetlab_core::bounds::{self, SweepOptions};
use cosetlab_core::group::{candidate_family, make_group, Action, CandidateFamily, FamilySpec, GroupRecipe};
use cosetlab_core::linop::symmetry::RegularDecomposition;
use cosetlab_core::measurements::{self, PgmWeighting};
use cosetlab_core::states;
use cosetlab_core::Settings;
use proptest::prelude::*;

fn family(recipe: GroupRecipe, spec: FamilySpec) -> CandidateFamily {
    let g = Arc::new(make_group(&recipe, 4096).unwrap());
    candidate_family(&g, &spec).unwrap()
}

fn families() -> Vec<(&'static str, CandidateFamily)> {
    let s3 = Arc::new(make_group(&GroupRecipe::Symmetric { n: 3 }, 64).unwrap());
    let transposition = s3.parse_element("(1 2)").unwrap();
    vec![
        ("D_4 order-2", family(GroupRecipe::Dihedral { n: 4 }, FamilySpec::PrimeOrderAll { p: 2 })),
        ("S_3 transpositions", candidate_family(&s3, &FamilySpec::Conjugates { generators: vec![transposition] }).unwrap()),
        ("D_6 order-2", family(GroupRecipe::Dihedral { n: 6 }, FamilySpec::PrimeOrderAll { p: 2 })),
        (
            "Z_7⋊Z_3",
            family(
                GroupRecipe::Semidirect {
                    base: vec![7],
                    twist: 3,
                    action: Action::Multiply(2),
                },
                FamilySpec::Sdp,
            ),
        ),
        ("S_4 involutions", family(GroupRecipe::Symmetric { n: 4 }, FamilySpec::SymInvolution)),
    ]
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn advantage_routes_agree() {
    let st = Settings::default();
    for (name, fam) in families() {
        let dec = RegularDecomposition::new(fam.parent(), 1).unwrap();
        for k in 1..=2 {
            let dense = bounds::measured_tcs_advantage_dense(&fam, k, &st).unwrap();
            let factored = bounds::measured_tcs_advantage_factored(&fam, k, &st).unwrap();
            let blocks = bounds::measured_tcs_advantage_blockwise(&dec, &fam, k, &st).unwrap();
            assert!((dense - factored).abs() < 1e-9, "{name} k={k}: {dense} vs {factored}");
            assert!((dense - blocks).abs() < 1e-9, "{name} k={k}: {dense} vs {blocks}");
        }
    }
}

#[test]
fn pgm_routes_agree() {
    let st = Settings::default();
    for (name, fam) in families() {
        let dec = RegularDecomposition::new(fam.parent(), 2).unwrap();
        for k in 0..=2 {
            if fam.parent().order().pow(k) > 600 {
                continue;
            }
            for (weighting, povm) in [
                (PgmWeighting::Projective, measurements::pgm_projective(&fam, k, &st).unwrap()),
                (PgmWeighting::States, measurements::pgm_states(&fam, k, &st).unwrap()),
            ] {
                let dense = measurements::member_success(&povm, &fam, k, &st).unwrap();
                let blocks = measurements::pgm_member_success_blockwise(&dec, &fam, k, weighting, &st).unwrap();
                assert!(max_gap(&dense, &blocks) < 1e-9, "{name} k={k} {weighting:?}");
            }
        }
    }
}

#[test]
fn support_union_test_routes_agree() {
    let st = Settings::default();
    for (name, fam) in families() {
        let dec = RegularDecomposition::new(fam.parent(), 3).unwrap();
        for k in 1..=2 {
            let blocks = measurements::tcs_blockwise(&dec, &fam, k, &st).unwrap();
            let povm = measurements::tcs_projector_povm(&fam, k, &st).unwrap();
            let mixed = states::maximally_mixed(fam.parent(), k, &st).unwrap();
            let fp = measurements::measure(&povm, &mixed).unwrap();
            let fp = fp.probability(measurements::NONTRIVIAL_LABEL).unwrap();
            assert!((fp - blocks.false_positive).abs() < 1e-9, "{name} k={k}");
            for (i, h) in fam.subgroups().iter().enumerate() {
                let rho = states::tensor_power(&states::coset_state(h, &st).unwrap(), k, &st).unwrap();
                let p = measurements::measure(&povm, &rho).unwrap().probability(measurements::NONTRIVIAL_LABEL).unwrap();
                assert!((p - 1.0).abs() < 1e-9, "{name} k={k}: member {i} accepted with {p}");
                assert!((blocks.acceptance[i] - 1.0).abs() < 1e-9);
            }
            assert!(blocks.false_positive <= bounds::tcs_error_cap(&fam, k) + 1e-9);
        }
    }
}

#[test]
fn sweeps_report_no_violations() {
    for (name, fam) in families() {
        let rows = bounds::sweep(&fam, &SweepOptions::new(1, 3)).unwrap();
        assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![1, 2, 3]);
        for row in &rows {
            assert!(row.violations().is_empty(), "{name} k={}: {:?}", row.k, row.violations());
            assert!(row.measured_tcs_advantage.is_some(), "{name} k={}", row.k);
        }
        let succ: Vec<f64> = rows.iter().filter_map(|r| r.measured_pgm_success).collect();
        assert!(succ.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{name}: {succ:?}");
    }
}

proptest! {
    #[test]
    fn caps_move_monotonically(which in 0usize..5, k in 0u32..12) {
        let (_, fam) = &families()[which];
        prop_assert!(bounds::csi_success_cap(fam, k + 1) >= bounds::csi_success_cap(fam, k));
        prop_assert!(bounds::tcs_error_cap(fam, k + 1) <= bounds::tcs_error_cap(fam, k));
        let (a, b) = (bounds::pgm_error_cap(fam, k).unwrap(), bounds::pgm_error_cap(fam, k + 1).unwrap());
        for (x, y) in a.per_member.iter().zip(&b.per_member) {
            prop_assert!(y <= x);
        }
        prop_assert!(b.uniform <= a.uniform);
        prop_assert!(a.max_per_member() <= a.uniform + 1e-12);
        if let (Some(x), Some(y)) = (bounds::tcs_tracenorm_cap(fam, k), bounds::tcs_tracenorm_cap(fam, k + 1)) {
            prop_assert!(y >= x);
            prop_assert!(bounds::tracenorm_chain(fam, k) <= x + 1e-12);
        }
    }
}
