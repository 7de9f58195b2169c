use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A permutation of `{0, …, n-1}` stored as its image list.
///
/// Products compose right to left: `(a * b)(i) = a(b(i))`. Cycle notation is
/// printed and parsed 1-based, matching the usual textbook convention.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u8).collect())
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let n = images.len();
        let mut seen = alloc::vec![false; n];
        for &i in &images {
            let i = i as usize;
            if i >= n || seen[i] {
                return Err(Error::usage("image list is not a permutation"));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    /// Builds a permutation of degree `n` from 0-based cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<u8> = (0..n as u8).collect();
        let mut touched = alloc::vec![false; n];
        for cycle in cycles {
            for (pos, &from) in cycle.iter().enumerate() {
                if from >= n || touched[from] {
                    return Err(Error::usage("cycles are not disjoint or out of range"));
                }
                touched[from] = true;
                images[from] = cycle[(pos + 1) % cycle.len()] as u8;
            }
        }
        Ok(Permutation(images))
    }

    /// Parses 1-based cycle notation such as `(1 2)(3 4)` or `(1,2,3)`.
    /// The empty string and `()` both denote the identity.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::usage(alloc::format!("expected '(' in cycle notation {text:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::usage(alloc::format!("unclosed cycle in {text:?}")))?;
            let body = &open[..close];
            let mut cycle = Vec::new();
            for tok in body.split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                let point: usize = tok
                    .parse()
                    .map_err(|_| Error::usage(alloc::format!("bad point {tok:?} in {text:?}")))?;
                if point == 0 || point > n {
                    return Err(Error::usage(alloc::format!("point {point} outside 1..={n}")));
                }
                cycle.push(point - 1);
            }
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        let refs: Vec<&[usize]> = cycles.iter().map(Vec::as_slice).collect();
        Self::from_cycles(n, &refs)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u8] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = alloc::vec![0u8; self.degree()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Permutation(inv)
    }

    pub fn pow(&self, k: usize) -> Permutation {
        let mut out = Permutation::identity(self.degree());
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// Disjoint cycles of length ≥ 2, each starting at its smallest point,
    /// ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = alloc::vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = alloc::vec![start];
            seen[start] = true;
            let mut cur = self.apply(start);
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.apply(cur);
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Cycle lengths including fixed points (length 1), sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        let moved: usize = lens.iter().sum();
        lens.extend(core::iter::repeat_n(1, self.degree() - moved));
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Order of the permutation as a group element.
    pub fn order(&self) -> usize {
        self.cycles().iter().map(Vec::len).fold(1, lcm)
    }

    /// True when the permutation is a product of `degree / m` disjoint
    /// `m`-cycles with no fixed points.
    pub fn is_uniform_cycle_product(&self, m: usize) -> bool {
        m >= 2 && self.degree() % m == 0 && self.cycle_type().iter().all(|&l| l == m)
    }

    pub fn to_cycle_string(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", p + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub(crate) fn gcd_u(a: usize, b: usize) -> usize {
    gcd(a, b)
}

/// All permutations of `{0, …, n-1}` in lexicographic order of image lists.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation(current.clone()));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let pivot = i - 1;
        let j = (i..n).rev().find(|&j| current[j] > current[pivot]).unwrap();
        current.swap(pivot, j);
        current[i..].reverse();
    }
    out
}
