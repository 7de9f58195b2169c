//! Finite groups backed by multiplication tables.
//!
//! Elements are indexed `0..order` in lexicographic order of their canonical
//! representation, so every matrix basis built on top of a group is
//! reproducible. The identity is always index 0 for the recipes here.

mod family;
mod keys;
mod perm;
mod subgroup;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use family::{candidate_family, CandidateFamily, FamilyKind, FamilySpec};
pub use keys::{key_count, key_set, DEFAULT_KEY_ENUMERATION_CAP};
pub use perm::{all_permutations, Permutation};
pub use subgroup::{all_subgroups, intersection_size, left_cosets, subgroup_closure, Subgroup};

use crate::error::{Error, Result};
use perm::gcd_u;

/// Largest group for which exhaustive searches (all subgroups, all
/// subgroups of a prime order) are attempted.
pub const EXHAUSTIVE_SEARCH_CAP: usize = 64;

/// Automorphism of an abelian group `Z_{n1} × … × Z_{nr}` by which the
/// generator of the complement acts.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Action {
    /// Trivial action (direct product).
    Identity,
    /// `a ↦ -a`.
    Inversion,
    /// `a ↦ r·a` componentwise.
    Multiply(u64),
}

impl Action {
    fn apply(&self, moduli: &[usize], a: &[usize]) -> Vec<usize> {
        a.iter()
            .zip(moduli)
            .map(|(&x, &n)| match self {
                Action::Identity => x,
                Action::Inversion => (n - x) % n,
                Action::Multiply(r) => ((x as u128 * *r as u128) % n as u128) as usize,
            })
            .collect()
    }
}

/// Construction recipe for a [`FiniteGroup`].
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum GroupRecipe {
    Cyclic { n: usize },
    Symmetric { n: usize },
    /// `(Z_{n1} × … × Z_{nr}) ⋊ Z_q` where the generator of `Z_q` acts by `action`.
    Semidirect {
        base: Vec<usize>,
        twist: usize,
        action: Action,
    },
    /// `Z_n ⋊ Z_2` with the inversion action.
    Dihedral { n: usize },
}

impl GroupRecipe {
    /// Group order, or `None` when it overflows `u128`.
    pub fn order(&self) -> Option<u128> {
        match self {
            GroupRecipe::Cyclic { n } => Some(*n as u128),
            GroupRecipe::Symmetric { n } => (1..=*n as u128).try_fold(1u128, |acc, i| acc.checked_mul(i)),
            GroupRecipe::Semidirect { base, twist, .. } => base
                .iter()
                .try_fold(*twist as u128, |acc, &n| acc.checked_mul(n as u128)),
            GroupRecipe::Dihedral { n } => (*n as u128).checked_mul(2),
        }
    }

    /// The semidirect data `(base moduli, q, action)` if this recipe is one.
    pub fn semidirect_parts(&self) -> Option<(Vec<usize>, usize, Action)> {
        match self {
            GroupRecipe::Semidirect { base, twist, action } => Some((base.clone(), *twist, action.clone())),
            GroupRecipe::Dihedral { n } => Some((alloc::vec![*n], 2, Action::Inversion)),
            _ => None,
        }
    }
}

impl fmt::Display for GroupRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupRecipe::Cyclic { n } => write!(f, "Z_{n}"),
            GroupRecipe::Symmetric { n } => write!(f, "S_{n}"),
            GroupRecipe::Dihedral { n } => write!(f, "D_{n}"),
            GroupRecipe::Semidirect { base, twist, action } => {
                for (i, n) in base.iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "Z_{n}")?;
                }
                write!(f, "⋊Z_{twist}")?;
                match action {
                    Action::Identity => f.write_str("[identity]"),
                    Action::Inversion => f.write_str("[inversion]"),
                    Action::Multiply(r) => write!(f, "[multiply {r}]"),
                }
            }
        }
    }
}

/// Canonical representation of a group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Residue(usize),
    Perm(Permutation),
    /// `(a, b)` with `a` in the abelian base and `b` in the twisting cyclic group.
    Pair(Vec<usize>, usize),
}

/// A finite group given by its full multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    recipe: GroupRecipe,
    elements: Vec<Element>,
    table: Vec<u32>,
    inverses: Vec<u32>,
    identity: usize,
}

/// Builds a group from its recipe; `cap` bounds the order (the dense
/// matrix dimension every coset state of the group will need).
pub fn make_group(recipe: &GroupRecipe, cap: usize) -> Result<FiniteGroup> {
    let order = recipe
        .order()
        .ok_or_else(|| Error::capacity("group order", u128::MAX, cap as u128))?;
    if order > cap as u128 {
        return Err(Error::capacity(format!("order of {recipe}"), order, cap as u128));
    }
    match recipe {
        GroupRecipe::Cyclic { n } => {
            if *n == 0 {
                return Err(Error::Construction("cyclic group needs n ≥ 1".into()));
            }
            let n = *n;
            let elements = (0..n).map(Element::Residue).collect();
            Ok(FiniteGroup::from_fn(recipe.clone(), elements, |a, b| (a + b) % n))
        }
        GroupRecipe::Symmetric { n } => {
            if *n == 0 || *n > u8::MAX as usize {
                return Err(Error::Construction(format!("symmetric group degree {n} unsupported")));
            }
            let perms = all_permutations(*n);
            let elements: Vec<Element> = perms.iter().cloned().map(Element::Perm).collect();
            Ok(FiniteGroup::from_fn(recipe.clone(), elements, |a, b| {
                let prod = perms[a].compose(&perms[b]);
                perms.binary_search(&prod).expect("closed under composition")
            }))
        }
        GroupRecipe::Dihedral { n } => {
            if *n == 0 {
                return Err(Error::Construction("dihedral group needs n ≥ 1".into()));
            }
            build_semidirect(recipe.clone(), &[*n], 2, &Action::Inversion)
        }
        GroupRecipe::Semidirect { base, twist, action } => build_semidirect(recipe.clone(), base, *twist, action),
    }
}

fn build_semidirect(recipe: GroupRecipe, moduli: &[usize], q: usize, action: &Action) -> Result<FiniteGroup> {
    if q == 0 || moduli.is_empty() || moduli.contains(&0) {
        return Err(Error::Construction("semidirect factors need positive orders".into()));
    }
    validate_action(moduli, q, action)?;
    // powers[j] = the automorphism φ^j applied to each base element, precomputed
    let base: Vec<Vec<usize>> = product_space(moduli);
    let index_of_base = |a: &[usize]| a.iter().zip(moduli).fold(0usize, |acc, (&x, &n)| acc * n + x);
    let mut twisted: Vec<Vec<usize>> = Vec::with_capacity(q);
    for j in 0..q {
        let row = base
            .iter()
            .map(|a| {
                let mut image = a.clone();
                for _ in 0..j {
                    image = action.apply(moduli, &image);
                }
                index_of_base(&image)
            })
            .collect();
        twisted.push(row);
    }
    let base_len = base.len();
    // canonical order is lexicographic on (a_1, …, a_r, b): index = a_index * q + b
    let mut elements = Vec::with_capacity(base_len * q);
    for a in &base {
        for b in 0..q {
            elements.push(Element::Pair(a.clone(), b));
        }
    }
    let add = |x: usize, y: usize| -> usize {
        let (xa, ya) = (&base[x], &base[y]);
        let sum: Vec<usize> = xa.iter().zip(ya).zip(moduli).map(|((&u, &v), &n)| (u + v) % n).collect();
        index_of_base(&sum)
    };
    Ok(FiniteGroup::from_fn(recipe, elements, |x, y| {
        let (a1, b1) = (x / q, x % q);
        let (a2, b2) = (y / q, y % q);
        let a = add(a1, twisted[b1][a2]);
        a * q + (b1 + b2) % q
    }))
}

fn validate_action(moduli: &[usize], q: usize, action: &Action) -> Result<()> {
    if let Action::Multiply(r) = action {
        for &n in moduli {
            if gcd_u((*r % n as u64) as usize, n) != 1 && n > 1 {
                return Err(Error::Construction(format!(
                    "multiplication by {r} is not an automorphism of Z_{n}"
                )));
            }
        }
    }
    // φ^q must be the identity so that b ↦ φ^b is a homomorphism Z_q → Aut(A)
    for (i, &n) in moduli.iter().enumerate() {
        let mut unit = alloc::vec![0usize; moduli.len()];
        unit[i] = 1 % n;
        let mut image = unit.clone();
        for _ in 0..q {
            image = action.apply(moduli, &image);
        }
        if image != unit {
            return Err(Error::Construction(format!(
                "action {action:?} has order not dividing {q}; not a homomorphism into Aut(A)"
            )));
        }
    }
    Ok(())
}

fn product_space(moduli: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = alloc::vec![Vec::new()];
    for &n in moduli {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

impl FiniteGroup {
    fn from_fn(recipe: GroupRecipe, elements: Vec<Element>, mul: impl Fn(usize, usize) -> usize) -> Self {
        let n = elements.len();
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]), "elements must be canonically sorted");
        let mut table = alloc::vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = mul(a, b) as u32;
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e * n + g] as usize == g && table[g * n + e] as usize == g))
            .expect("group has an identity");
        let inverses = (0..n)
            .map(|g| {
                (0..n)
                    .find(|&h| table[g * n + h] as usize == identity)
                    .expect("every element has an inverse") as u32
            })
            .collect();
        FiniteGroup {
            recipe,
            elements,
            table,
            inverses,
            identity,
        }
    }

    pub fn recipe(&self) -> &GroupRecipe {
        &self.recipe
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a] as usize
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Index of a canonical representation; `None` if it is not an element.
    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.elements.binary_search(e).ok()
    }

    /// Order of the element `g`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut cur = g;
        while cur != self.identity {
            cur = self.mul(cur, g);
            k += 1;
        }
        k
    }

    /// `g^k`.
    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Conjugacy classes, each sorted, ordered by their smallest element.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut class_of = alloc::vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let mut class: Vec<usize> = (0..n).map(|g| self.mul(self.mul(g, x), self.inv(g))).collect();
            class.sort_unstable();
            class.dedup();
            for &y in &class {
                class_of[y] = classes.len();
            }
            classes.push(class);
        }
        classes
    }

    /// Verifies the group axioms on the table. Associativity is checked on
    /// every triple when `order ≤ exhaustive_limit`, otherwise on a
    /// deterministic stride sample of roughly `exhaustive_limit³` triples.
    pub fn check_axioms(&self, exhaustive_limit: usize) -> Result<()> {
        let n = self.order();
        let e = self.identity;
        for g in 0..n {
            if self.mul(e, g) != g || self.mul(g, e) != g {
                return Err(Error::numeric(format!("identity law fails at element {g}")));
            }
            if self.mul(g, self.inv(g)) != e || self.mul(self.inv(g), g) != e {
                return Err(Error::numeric(format!("inverse law fails at element {g}")));
            }
        }
        let stride = if n <= exhaustive_limit { 1 } else { n / exhaustive_limit.max(1) + 1 };
        let picks: Vec<usize> = (0..n).step_by(stride).collect();
        for &a in &picks {
            for &b in &picks {
                let ab = self.mul(a, b);
                for &c in &picks {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::numeric(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        // the index must round-trip through the canonical representation
        for (i, el) in self.elements.iter().enumerate() {
            if self.index_of(el) != Some(i) {
                return Err(Error::numeric(format!("index {i} does not round-trip")));
            }
        }
        Ok(())
    }

    /// Human-readable element: residues as integers, permutations in
    /// 1-based cycle notation, semidirect pairs as `(a,b)` tuples.
    pub fn format_element(&self, g: usize) -> String {
        match &self.elements[g] {
            Element::Residue(x) => format!("{x}"),
            Element::Perm(p) => format!("{p}"),
            Element::Pair(a, b) => {
                let mut s = String::from("(");
                for x in a {
                    s.push_str(&format!("{x},"));
                }
                s.push_str(&format!("{b})"));
                s
            }
        }
    }

    /// Inverse of [`format_element`](Self::format_element).
    pub fn parse_element(&self, text: &str) -> Result<usize> {
        let text = text.trim();
        let element = match &self.recipe {
            GroupRecipe::Cyclic { n } => {
                let x: usize = text
                    .parse()
                    .map_err(|_| Error::usage(format!("bad residue {text:?}")))?;
                Element::Residue(x % n)
            }
            GroupRecipe::Symmetric { n } => Element::Perm(Permutation::parse(*n, text)?),
            GroupRecipe::Semidirect { .. } | GroupRecipe::Dihedral { .. } => {
                let (moduli, q, _) = self.recipe.semidirect_parts().unwrap();
                let inner = text
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| Error::usage(format!("expected (a,…,b) tuple, got {text:?}")))?;
                let values: Vec<usize> = inner
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| Error::usage(format!("bad tuple entry {t:?}"))))
                    .collect::<Result<_>>()?;
                if values.len() != moduli.len() + 1 {
                    return Err(Error::usage(format!(
                        "expected {} tuple entries in {text:?}",
                        moduli.len() + 1
                    )));
                }
                let a = values[..moduli.len()].iter().zip(&moduli).map(|(&x, &n)| x % n).collect();
                Element::Pair(a, values[moduli.len()] % q)
            }
        };
        self.index_of(&element)
            .ok_or_else(|| Error::usage(format!("{text:?} is not an element of {}", self.recipe)))
    }
}
