use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::subgroup::{intersection_size, subgroup_closure, Subgroup};
use super::{Element, FiniteGroup, GroupRecipe, EXHAUSTIVE_SEARCH_CAP};
use crate::error::{Error, Result};

/// How a candidate family was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Sdp,
    SymInvolution,
    Conjugates,
    PrimeOrderAll,
    Explicit,
}

/// Family construction request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    /// `{⟨(a,1)⟩ : a ∈ A}` in a semidirect product `A ⋊ Z_p`.
    Sdp,
    /// `{⟨h⟩ : h a fixed-point-free involution}` in `S_n`, `n` even.
    SymInvolution,
    /// All conjugates `g⁻¹Hg` of the subgroup generated by `generators`.
    Conjugates { generators: Vec<usize> },
    /// Every subgroup of prime order `p`.
    PrimeOrderAll { p: usize },
    /// Subgroups generated by each listed generator set.
    Explicit { generator_sets: Vec<Vec<usize>> },
}

impl FamilySpec {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilySpec::Sdp => FamilyKind::Sdp,
            FamilySpec::SymInvolution => FamilyKind::SymInvolution,
            FamilySpec::Conjugates { .. } => FamilyKind::Conjugates,
            FamilySpec::PrimeOrderAll { .. } => FamilyKind::PrimeOrderAll,
            FamilySpec::Explicit { .. } => FamilyKind::Explicit,
        }
    }
}

/// An ordered list of distinct candidate subgroups together with their
/// pairwise intersection sizes `γ[i][j] = |H_i ∩ H_j|`.
#[derive(Clone, Debug)]
pub struct CandidateFamily {
    parent: Arc<FiniteGroup>,
    subgroups: Vec<Subgroup>,
    kind: FamilyKind,
    gamma: Vec<usize>,
}

pub fn candidate_family(group: &Arc<FiniteGroup>, spec: &FamilySpec) -> Result<CandidateFamily> {
    let subgroups = match spec {
        FamilySpec::Sdp => sdp_family(group)?,
        FamilySpec::SymInvolution => involution_family(group)?,
        FamilySpec::Conjugates { generators } => {
            let base = subgroup_closure(group, generators)?;
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for g in 0..group.order() {
                let c = base.conjugate(g);
                if seen.insert(c.members().to_vec()) {
                    out.push(c);
                }
            }
            out
        }
        FamilySpec::PrimeOrderAll { p } => prime_order_family(group, *p)?,
        FamilySpec::Explicit { generator_sets } => generator_sets
            .iter()
            .map(|gens| subgroup_closure(group, gens))
            .collect::<Result<Vec<_>>>()?,
    };
    CandidateFamily::new(group.clone(), subgroups, spec.kind())
}

fn sdp_family(group: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>> {
    let (moduli, q, _) = group
        .recipe()
        .semidirect_parts()
        .ok_or_else(|| Error::usage(format!("sdp family needs a semidirect group, got {}", group.recipe())))?;
    let mut out = Vec::new();
    for (idx, el) in group.elements().iter().enumerate() {
        let Element::Pair(a, b) = el else { unreachable!() };
        if *b != 1 % q {
            continue;
        }
        let h = subgroup_closure(group, &[idx])?;
        if h.order() != q {
            return Err(Error::usage(format!(
                "⟨({a:?},1)⟩ has order {} ≠ {q}; the action does not give an sdp family",
                h.order()
            )));
        }
        out.push(h);
    }
    debug_assert_eq!(out.len(), moduli.iter().product::<usize>());
    Ok(out)
}

fn involution_family(group: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>> {
    let GroupRecipe::Symmetric { n } = group.recipe() else {
        return Err(Error::usage(format!(
            "sym_involution family needs a symmetric group, got {}",
            group.recipe()
        )));
    };
    if *n % 2 != 0 || *n < 2 {
        return Err(Error::usage(format!("sym_involution family needs even n, got {n}")));
    }
    let mut out = Vec::new();
    for (idx, el) in group.elements().iter().enumerate() {
        let Element::Perm(p) = el else { unreachable!() };
        if p.is_uniform_cycle_product(2) {
            out.push(subgroup_closure(group, &[idx])?);
        }
    }
    Ok(out)
}

fn prime_order_family(group: &Arc<FiniteGroup>, p: usize) -> Result<Vec<Subgroup>> {
    if !is_prime(p) {
        return Err(Error::usage(format!("prime_order_all needs a prime, got {p}")));
    }
    if group.order() > EXHAUSTIVE_SEARCH_CAP {
        return Err(Error::capacity(
            "exhaustive prime-order subgroup search",
            group.order() as u128,
            EXHAUSTIVE_SEARCH_CAP as u128,
        ));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for g in 0..group.order() {
        if group.element_order(g) == p {
            let h = subgroup_closure(group, &[g])?;
            if seen.insert(h.members().to_vec()) {
                out.push(h);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::usage(format!("{} has no subgroup of order {p}", group.recipe())));
    }
    Ok(out)
}

pub(crate) fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl CandidateFamily {
    /// Validates distinctness and fills in the intersection matrix.
    pub fn new(parent: Arc<FiniteGroup>, subgroups: Vec<Subgroup>, kind: FamilyKind) -> Result<Self> {
        if subgroups.is_empty() {
            return Err(Error::usage("candidate family is empty"));
        }
        let mut seen = BTreeSet::new();
        for h in &subgroups {
            if !Arc::ptr_eq(h.parent(), &parent) {
                return Err(Error::usage("family member belongs to another group"));
            }
            if !seen.insert(h.members().to_vec()) {
                return Err(Error::usage(format!("duplicate candidate subgroup {}", h.describe())));
            }
        }
        let n = subgroups.len();
        let mut gamma = alloc::vec![0usize; n * n];
        for i in 0..n {
            for j in i..n {
                let s = intersection_size(&subgroups[i], &subgroups[j])?;
                gamma[i * n + j] = s;
                gamma[j * n + i] = s;
            }
        }
        Ok(CandidateFamily {
            parent,
            subgroups,
            kind,
            gamma,
        })
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    pub fn subgroups(&self) -> &[Subgroup] {
        &self.subgroups
    }

    pub fn member(&self, i: usize) -> &Subgroup {
        &self.subgroups[i]
    }

    /// `γ_{ij} = |H_i ∩ H_j|`.
    pub fn gamma(&self, i: usize, j: usize) -> usize {
        self.gamma[i * self.len() + j]
    }

    /// Outcome label used for member `i` in measurements.
    pub fn label(&self, i: usize) -> String {
        format!("H{i}")
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    pub fn max_order(&self) -> usize {
        self.subgroups.iter().map(Subgroup::order).max().unwrap_or(1)
    }

    pub fn min_order(&self) -> usize {
        self.subgroups.iter().map(Subgroup::order).min().unwrap_or(1)
    }

    /// All distinct pairs intersect in the identity only.
    pub fn pairwise_trivial(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.gamma(i, j) == 1))
    }

    pub fn all_prime_orders(&self) -> bool {
        self.subgroups.iter().all(|h| is_prime(h.order()))
    }

    /// Some member is contained in another, which makes
    /// `min |H|/|H∩H'|` equal to 1.
    pub fn has_nested_pair(&self) -> bool {
        let n = self.len();
        (0..n).any(|i| (0..n).any(|j| i != j && self.gamma(i, j) == self.member(i).order()))
    }

    pub fn contains_trivial(&self) -> bool {
        self.subgroups.iter().any(Subgroup::is_trivial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, Action};

    fn grp(recipe: GroupRecipe) -> Arc<FiniteGroup> {
        Arc::new(make_group(&recipe, 4096).unwrap())
    }

    fn z5z2() -> Arc<FiniteGroup> {
        grp(GroupRecipe::Semidirect {
            base: alloc::vec![5],
            twist: 2,
            action: Action::Inversion,
        })
    }

    #[test]
    fn sdp_family_on_z5_by_z2() {
        let fam = candidate_family(&z5z2(), &FamilySpec::Sdp).unwrap();
        assert_eq!(fam.len(), 5);
        for i in 0..5 {
            assert_eq!(fam.member(i).order(), 2);
            for j in 0..5 {
                assert_eq!(fam.gamma(i, j), if i == j { 2 } else { 1 });
            }
        }
        assert!(fam.pairwise_trivial());
        assert!(fam.all_prime_orders());
    }

    #[test]
    fn sym_involution_family_on_s4() {
        let g = grp(GroupRecipe::Symmetric { n: 4 });
        let fam = candidate_family(&g, &FamilySpec::SymInvolution).unwrap();
        let gens: Vec<String> = fam.subgroups().iter().map(Subgroup::describe).collect();
        assert_eq!(gens, ["⟨(1 2)(3 4)⟩", "⟨(1 3)(2 4)⟩", "⟨(1 4)(2 3)⟩"]);
    }

    #[test]
    fn inapplicable_kinds_are_usage_errors() {
        let s3 = grp(GroupRecipe::Symmetric { n: 3 });
        assert!(matches!(candidate_family(&s3, &FamilySpec::Sdp), Err(Error::Usage(_))));
        assert!(matches!(
            candidate_family(&s3, &FamilySpec::SymInvolution),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            candidate_family(&z5z2(), &FamilySpec::SymInvolution),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            candidate_family(&s3, &FamilySpec::PrimeOrderAll { p: 4 }),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn prime_order_all_in_s4() {
        let g = grp(GroupRecipe::Symmetric { n: 4 });
        // 6 transpositions + 3 double transpositions; 4 subgroups of order 3
        assert_eq!(candidate_family(&g, &FamilySpec::PrimeOrderAll { p: 2 }).unwrap().len(), 9);
        let three = candidate_family(&g, &FamilySpec::PrimeOrderAll { p: 3 }).unwrap();
        assert_eq!(three.len(), 4);
        assert!(three.pairwise_trivial());
    }

    #[test]
    fn conjugates_are_deduplicated() {
        let g = grp(GroupRecipe::Symmetric { n: 4 });
        let t = g.parse_element("(1 2)").unwrap();
        let fam = candidate_family(&g, &FamilySpec::Conjugates { generators: alloc::vec![t] }).unwrap();
        assert_eq!(fam.len(), 6);
    }

    #[test]
    fn explicit_duplicates_rejected() {
        let g = grp(GroupRecipe::Symmetric { n: 3 });
        let a = g.parse_element("(1 2 3)").unwrap();
        let b = g.parse_element("(1 3 2)").unwrap();
        let err = candidate_family(
            &g,
            &FamilySpec::Explicit {
                generator_sets: alloc::vec![alloc::vec![a], alloc::vec![b]],
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn nested_pairs_are_detected() {
        let g = grp(GroupRecipe::Cyclic { n: 4 });
        let fam = candidate_family(
            &g,
            &FamilySpec::Explicit {
                generator_sets: alloc::vec![alloc::vec![2], alloc::vec![1]],
            },
        )
        .unwrap();
        assert!(fam.has_nested_pair());
        assert!(!fam.pairwise_trivial());
    }
}
