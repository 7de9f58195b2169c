use alloc::format;
use alloc::vec::Vec;

use super::perm::{all_permutations, Permutation};
use crate::error::{Error, Result};

/// Largest `n` for which `S_n` is enumerated to build a key set.
pub const DEFAULT_KEY_ENUMERATION_CAP: usize = 8;

/// Closed-form size `n!/((n/m)!·m^{n/m})` of the key set, or 0 when `m`
/// does not divide `n`.
pub fn key_count(n: usize, m: usize) -> u128 {
    if m < 2 || m > n || n % m != 0 {
        return 0;
    }
    let c = (n / m) as u32;
    let fact = |x: usize| (1..=x as u128).product::<u128>();
    fact(n) / (fact(n / m) * (m as u128).pow(c))
}

/// All permutations of degree `n` made of `n/m` disjoint `m`-cycles, in
/// lexicographic order of their image lists.
pub fn key_set(n: usize, m: usize, cap: usize) -> Result<Vec<Permutation>> {
    if m < 2 || m > n || n % m != 0 {
        return Err(Error::usage(format!("key set needs 2 ≤ m ≤ n and m | n, got n={n}, m={m}")));
    }
    if n > cap {
        return Err(Error::capacity("key-set enumeration degree", n as u128, cap as u128));
    }
    let keys: Vec<Permutation> = all_permutations(n)
        .into_iter()
        .filter(|p| p.is_uniform_cycle_product(m))
        .collect();
    assert_eq!(keys.len() as u128, key_count(n, m), "key enumeration disagrees with closed form");
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};

    fn names(keys: &[Permutation]) -> Vec<String> {
        keys.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn small_key_sets() {
        assert_eq!(names(&key_set(4, 2, 8).unwrap()), ["(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"]);
        assert_eq!(names(&key_set(3, 3, 8).unwrap()), ["(1 2 3)", "(1 3 2)"]);
        assert_eq!(names(&key_set(2, 2, 8).unwrap()), ["(1 2)"]);
    }

    #[test]
    fn counts_match_closed_form() {
        for (n, m) in [(2, 2), (3, 3), (4, 2), (4, 4), (6, 2), (6, 3), (6, 6), (8, 2), (8, 4)] {
            assert_eq!(key_set(n, m, 8).unwrap().len() as u128, key_count(n, m));
        }
        assert_eq!(key_count(6, 2), 15);
        assert_eq!(key_count(4, 2), 3);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(key_set(5, 2, 8), Err(Error::Usage(_))));
        assert!(matches!(key_set(4, 1, 8), Err(Error::Usage(_))));
        assert!(matches!(key_set(10, 2, 8), Err(Error::Capacity { .. })));
    }
}
