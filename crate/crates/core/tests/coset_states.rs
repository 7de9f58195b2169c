use std::sync::Arc;

use cosetlab_core::group::{make_group, subgroup_closure, Action, FiniteGroup, GroupRecipe, Subgroup};
use cosetlab_core::linop::{self, HermitianOperator};
use cosetlab_core::states::{
    coset_projector, coset_state, coset_state_from_outer_products, oracle_from_subgroup, overlap, standard_method_state,
};
use cosetlab_core::Settings;
use proptest::prelude::*;

fn groups() -> Vec<Arc<FiniteGroup>> {
    [
        GroupRecipe::Symmetric { n: 3 },
        GroupRecipe::Symmetric { n: 4 },
        GroupRecipe::Dihedral { n: 4 },
        GroupRecipe::Dihedral { n: 6 },
        GroupRecipe::Cyclic { n: 12 },
        GroupRecipe::Semidirect {
            base: vec![7],
            twist: 3,
            action: Action::Multiply(2),
        },
    ]
    .iter()
    .map(|r| Arc::new(make_group(r, 4096).unwrap()))
    .collect()
}

fn subgroup(g: &Arc<FiniteGroup>, picks: &[usize]) -> Subgroup {
    let gens: Vec<usize> = picks.iter().map(|p| p % g.order()).collect();
    subgroup_closure(g, &gens).unwrap()
}

/// `|H ∩ H'|` by membership scan.
fn gamma(g: &FiniteGroup, a: &Subgroup, b: &Subgroup) -> usize {
    (0..g.order()).filter(|&x| a.contains(x) && b.contains(x)).count()
}

/// `ρ_H[x][y] = [x⁻¹y ∈ H]/|G|` written out entrywise.
fn reference_state(g: &FiniteGroup, h: &Subgroup) -> HermitianOperator {
    let n = g.order();
    HermitianOperator::from_fn(n, |x, y| {
        let inside = h.contains(g.mul(g.inv(x), y));
        cosetlab_core::c64::new(if inside { 1.0 / n as f64 } else { 0.0 }, 0.0)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_state_laws(which in 0usize..6, picks in prop::collection::vec(0usize..1000, 0..3)) {
        let st = Settings::default();
        let g = &groups()[which];
        let h = subgroup(g, &picks);
        prop_assert_eq!(g.order() % h.order(), 0);
        let rho = coset_state(&h, &st).unwrap();
        let reference = reference_state(g, &h);
        prop_assert!(rho.operator().max_deviation(&reference) < 1e-14);
        prop_assert!((rho.operator().trace() - 1.0).abs() < 1e-12);
        prop_assert!(linop::psd_check(rho.operator(), 1e-12).unwrap().is_psd);
        prop_assert_eq!(linop::numeric_rank(rho.operator(), 1e-9).unwrap(), h.index());
        let norm = linop::operator_norm(rho.operator()).unwrap();
        prop_assert!((norm - h.order() as f64 / g.order() as f64).abs() < 1e-10);

        let outer = coset_state_from_outer_products(&h, &st).unwrap();
        prop_assert!(outer.operator().max_deviation(rho.operator()) < 1e-12);
        let via_oracle = standard_method_state(&oracle_from_subgroup(&h), &st).unwrap();
        prop_assert!(via_oracle.operator().max_deviation(rho.operator()) < 1e-12);

        let p = coset_projector(&h).unwrap();
        prop_assert_eq!(p.rank(), h.index());
        let scaled = rho.operator().scale(g.order() as f64 / h.order() as f64);
        prop_assert!(p.to_operator().max_deviation(&scaled) < 1e-10);
    }

    #[test]
    fn pairwise_overlaps(which in 0usize..6, a in prop::collection::vec(0usize..1000, 0..3), b in prop::collection::vec(0usize..1000, 0..3)) {
        let st = Settings::default();
        let g = &groups()[which];
        let (h1, h2) = (subgroup(g, &a), subgroup(g, &b));
        let c = gamma(g, &h1, &h2) as f64;
        let (r1, r2) = (coset_state(&h1, &st).unwrap(), coset_state(&h2, &st).unwrap());
        prop_assert!((overlap(&r1, &r2).unwrap() - c / g.order() as f64).abs() < 1e-10);
        // The projector's own subgroup order is the denominator.
        let p1 = coset_projector(&h1).unwrap();
        prop_assert!((p1.expectation(r2.operator()) - c / h1.order() as f64).abs() < 1e-10);
        let p2 = coset_projector(&h2).unwrap();
        prop_assert!((p2.expectation(r1.operator()) - c / h2.order() as f64).abs() < 1e-10);
    }
}

#[test]
fn projector_overlap_depends_on_the_projector_subgroup() {
    let st = Settings::default();
    let g = Arc::new(make_group(&GroupRecipe::Symmetric { n: 3 }, 64).unwrap());
    let trivial = Subgroup::trivial(&g);
    let whole = Subgroup::whole(&g);
    // tr(P_G ρ_{e}) = 1/6 and tr(P_{e} ρ_G) = 1.
    let p_whole = coset_projector(&whole).unwrap();
    let p_trivial = coset_projector(&trivial).unwrap();
    let rho_trivial = coset_state(&trivial, &st).unwrap();
    let rho_whole = coset_state(&whole, &st).unwrap();
    assert!((p_whole.expectation(rho_trivial.operator()) - 1.0 / 6.0).abs() < 1e-12);
    assert!((p_trivial.expectation(rho_whole.operator()) - 1.0).abs() < 1e-12);
}
