use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{FiniteGroup, EXHAUSTIVE_SEARCH_CAP};
use crate::error::{Error, Result};

/// A subgroup of a shared parent group, stored as a sorted member list.
#[derive(Clone, Debug)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    generators: Vec<usize>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members == other.members
    }
}

impl Eq for Subgroup {}

/// Smallest subgroup of `group` containing `gens`.
pub fn subgroup_closure(group: &Arc<FiniteGroup>, gens: &[usize]) -> Result<Subgroup> {
    let n = group.order();
    if let Some(&bad) = gens.iter().find(|&&g| g >= n) {
        return Err(Error::usage(format!("generator index {bad} outside group of order {n}")));
    }
    let mut inside = alloc::vec![false; n];
    let id = group.identity();
    inside[id] = true;
    let mut frontier = alloc::vec![id];
    // right-multiplying by generators until nothing new appears; in a finite
    // group this yields the generated subgroup since inverses are powers
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = group.mul(x, g);
            if !inside[y] {
                inside[y] = true;
                frontier.push(y);
            }
        }
    }
    let members: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
    let mut generators = gens.to_vec();
    generators.sort_unstable();
    generators.dedup();
    Ok(Subgroup {
        parent: group.clone(),
        members,
        generators,
    })
}

impl Subgroup {
    pub fn trivial(group: &Arc<FiniteGroup>) -> Self {
        Subgroup {
            parent: group.clone(),
            members: alloc::vec![group.identity()],
            generators: Vec::new(),
        }
    }

    pub fn whole(group: &Arc<FiniteGroup>) -> Self {
        Subgroup {
            parent: group.clone(),
            members: (0..group.order()).collect(),
            generators: (0..group.order()).collect(),
        }
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Index `|G|/|H|`.
    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn same_parent(&self, other: &Subgroup) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent)
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&g| other.contains(g))
    }

    /// Checks closure, identity membership, inverses and Lagrange.
    pub fn check_invariants(&self) -> Result<()> {
        let g = &self.parent;
        if !self.contains(g.identity()) {
            return Err(Error::numeric("subgroup lacks the identity"));
        }
        for &a in &self.members {
            if !self.contains(g.inv(a)) {
                return Err(Error::numeric("subgroup not closed under inverses"));
            }
            for &b in &self.members {
                if !self.contains(g.mul(a, b)) {
                    return Err(Error::numeric("subgroup not closed under multiplication"));
                }
            }
        }
        if g.order() % self.order() != 0 {
            return Err(Error::numeric("subgroup order does not divide group order"));
        }
        Ok(())
    }

    /// `g⁻¹ H g`.
    pub fn conjugate(&self, g: usize) -> Subgroup {
        let grp = &self.parent;
        let gi = grp.inv(g);
        let mut members: Vec<usize> = self.members.iter().map(|&h| grp.mul(grp.mul(gi, h), g)).collect();
        members.sort_unstable();
        let mut generators: Vec<usize> = self.generators.iter().map(|&h| grp.mul(grp.mul(gi, h), g)).collect();
        generators.sort_unstable();
        Subgroup {
            parent: self.parent.clone(),
            members,
            generators,
        }
    }

    /// `⟨g1, g2, …⟩` with elements printed in the parent's notation.
    pub fn describe(&self) -> String {
        if self.is_trivial() {
            return String::from("{id}");
        }
        let gens = if self.generators.is_empty() {
            &self.members
        } else {
            &self.generators
        };
        let parts: Vec<String> = gens.iter().map(|&g| self.parent.format_element(g)).collect();
        format!("⟨{}⟩", parts.join(", "))
    }
}

/// Left cosets `gH` as blocks of sorted element indices, ordered by their
/// smallest element (so the block holding the identity, `H` itself, is first
/// whenever the identity is index 0).
pub fn left_cosets(h: &Subgroup) -> Vec<Vec<usize>> {
    let g = h.parent();
    let n = g.order();
    let mut assigned = alloc::vec![false; n];
    let mut blocks = Vec::with_capacity(h.index());
    for x in 0..n {
        if assigned[x] {
            continue;
        }
        let mut block: Vec<usize> = h.members().iter().map(|&m| g.mul(x, m)).collect();
        block.sort_unstable();
        for &y in &block {
            assigned[y] = true;
        }
        blocks.push(block);
    }
    blocks
}

/// `|H1 ∩ H2|`, computed both by set intersection and by counting pairs
/// `(h, h')` with `h·h' = id`; the two counts must agree.
pub fn intersection_size(h1: &Subgroup, h2: &Subgroup) -> Result<usize> {
    if !h1.same_parent(h2) {
        return Err(Error::usage("subgroups belong to different groups"));
    }
    let by_set = h1.members().iter().filter(|&&x| h2.contains(x)).count();
    let g = h1.parent();
    let id = g.identity();
    let by_pairs = h1
        .members()
        .iter()
        .map(|&a| h2.members().iter().filter(|&&b| g.mul(a, b) == id).count())
        .sum::<usize>();
    assert_eq!(by_set, by_pairs, "intersection count mismatch");
    Ok(by_set)
}

/// Every subgroup of `group` (capped at order [`EXHAUSTIVE_SEARCH_CAP`]),
/// sorted by order then member list.
pub fn all_subgroups(group: &Arc<FiniteGroup>) -> Result<Vec<Subgroup>> {
    let n = group.order();
    if n > EXHAUSTIVE_SEARCH_CAP {
        return Err(Error::capacity(
            "exhaustive subgroup search",
            n as u128,
            EXHAUSTIVE_SEARCH_CAP as u128,
        ));
    }
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut list: Vec<Subgroup> = Vec::new();
    for g in 0..n {
        let s = subgroup_closure(group, &[g])?;
        if found.insert(s.members.clone()) {
            list.push(s);
        }
    }
    // every subgroup is a join of cyclic ones; join pairs to a fixpoint
    let mut start = 0;
    loop {
        let before = list.len();
        let mut fresh = Vec::new();
        for i in 0..before {
            for j in start.max(i + 1)..before {
                let mut gens = list[i].generators.clone();
                gens.extend_from_slice(&list[j].generators);
                let s = subgroup_closure(group, &gens)?;
                if found.insert(s.members.clone()) {
                    fresh.push(s);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        start = before;
        list.extend(fresh);
    }
    list.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupRecipe};

    fn grp(recipe: GroupRecipe) -> Arc<FiniteGroup> {
        Arc::new(make_group(&recipe, 4096).unwrap())
    }

    fn s3() -> Arc<FiniteGroup> {
        grp(GroupRecipe::Symmetric { n: 3 })
    }

    fn el(g: &FiniteGroup, s: &str) -> usize {
        g.parse_element(s).unwrap()
    }

    #[test]
    fn closure_examples_in_s3() {
        let g = s3();
        assert_eq!(subgroup_closure(&g, &[el(&g, "(1 2)")]).unwrap().order(), 2);
        assert_eq!(subgroup_closure(&g, &[el(&g, "(1 2 3)")]).unwrap().order(), 3);
        assert_eq!(
            subgroup_closure(&g, &[el(&g, "(1 2)"), el(&g, "(1 2 3)")]).unwrap().order(),
            6
        );
        assert!(subgroup_closure(&g, &[6]).is_err());
    }

    #[test]
    fn cosets_partition_the_group() {
        let g = s3();
        let h = subgroup_closure(&g, &[el(&g, "(1 2)")]).unwrap();
        let blocks = left_cosets(&h);
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().all(|b| b.len() == 2));
        assert_eq!(blocks[0], h.members());
        assert_eq!(left_cosets(&Subgroup::trivial(&g)).len(), 6);
        assert_eq!(left_cosets(&Subgroup::whole(&g)), [Vec::from_iter(0..6)]);
    }

    #[test]
    fn intersections_in_s3() {
        let g = s3();
        let a = subgroup_closure(&g, &[el(&g, "(1 2)")]).unwrap();
        let b = subgroup_closure(&g, &[el(&g, "(1 3)")]).unwrap();
        let c = subgroup_closure(&g, &[el(&g, "(1 2 3)")]).unwrap();
        let d = subgroup_closure(&g, &[el(&g, "(1 3 2)")]).unwrap();
        assert_eq!(intersection_size(&a, &b).unwrap(), 1);
        assert_eq!(intersection_size(&a, &a).unwrap(), 2);
        assert_eq!(intersection_size(&c, &d).unwrap(), 3);
        assert_eq!(c, d);
    }

    #[test]
    fn subgroup_counts_of_small_groups() {
        // known counts: S_3 has 6, S_4 has 30, D_4 has 10, D_6 has 16, Z_12 has 6
        for (recipe, count) in [
            (GroupRecipe::Symmetric { n: 3 }, 6),
            (GroupRecipe::Symmetric { n: 4 }, 30),
            (GroupRecipe::Dihedral { n: 4 }, 10),
            (GroupRecipe::Dihedral { n: 6 }, 16),
            (GroupRecipe::Cyclic { n: 12 }, 6),
        ] {
            let g = grp(recipe);
            let subs = all_subgroups(&g).unwrap();
            assert_eq!(subs.len(), count);
            for s in &subs {
                s.check_invariants().unwrap();
            }
        }
    }

    #[test]
    fn exhaustive_search_is_capped() {
        let g = grp(GroupRecipe::Symmetric { n: 5 });
        assert!(matches!(all_subgroups(&g), Err(Error::Capacity { .. })));
    }

    #[test]
    fn conjugation_preserves_order() {
        let g = grp(GroupRecipe::Symmetric { n: 4 });
        let h = subgroup_closure(&g, &[el(&g, "(1 2)")]).unwrap();
        for x in 0..g.order() {
            let c = h.conjugate(x);
            assert_eq!(c.order(), 2);
            c.check_invariants().unwrap();
        }
    }
}
