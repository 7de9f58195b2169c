//! Block diagonalization of convolution operators.
//!
//! Every operator built from coset states has entries that depend only on
//! `x⁻¹y`: it is `X_a[x][y] = a(x⁻¹y)` for a function `a` on the group.
//! These operators form an algebra isomorphic to the group algebra, so a
//! basis adapted to the irreducible representations turns each of them
//! into `⊕_π I_{d_π} ⊗ X̂_a(π)` with `d_π × d_π` blocks. Tensor products of
//! such operators on `G^k` decompose over irrep tuples with Kronecker
//! blocks and multiplicity `∏ d_{π_i}`.
//!
//! The irreducible subspaces are found numerically: a random Hermitian
//! central element separates the isotypic components, and a random
//! Hermitian element of the commutant splits each component into `d`
//! irreducible copies. Both steps are validated (perfect-square cluster
//! sizes, one cluster per conjugacy class, invariance, unit character
//! norm) and retried with a fresh seed on failure.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cx, HermitianOperator};
use crate::c64;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::math;

const ATTEMPTS: u64 = 8;
const CLUSTER_GAP: f64 = 1e-7;
const VALIDATION_TOL: f64 = 1e-8;

/// An orthonormal basis `V_π` (`|G| × d_π`) of one irreducible subspace per
/// irrep, invariant under every convolution operator.
#[derive(Clone, Debug)]
pub struct RegularDecomposition {
    group: Arc<FiniteGroup>,
    bases: Vec<Mat<c64>>,
}

/// Compressions `V_π† X_a V_π` of one convolution operator, one per irrep.
pub type Compressed = Vec<Mat<c64>>;

impl RegularDecomposition {
    pub fn new(group: &Arc<FiniteGroup>, seed: u64) -> Result<Self> {
        let mut last = None;
        for attempt in 0..ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
            match Self::attempt(group, &mut rng) {
                Ok(bases) => {
                    return Ok(RegularDecomposition {
                        group: group.clone(),
                        bases,
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::numeric("irrep decomposition failed")))
    }

    fn attempt(group: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng) -> Result<Vec<Mat<c64>>> {
        let n = group.order();
        let classes = group.conjugacy_classes();
        let mut class_of = alloc::vec![0usize; n];
        for (c, members) in classes.iter().enumerate() {
            for &g in members {
                class_of[g] = c;
            }
        }
        // class function with f(z⁻¹) = conj f(z), so the operator is Hermitian
        let mut f = alloc::vec![None::<c64>; classes.len()];
        for c in 0..classes.len() {
            if f[c].is_some() {
                continue;
            }
            let inv = class_of[group.inv(classes[c][0])];
            if inv == c {
                f[c] = Some(cx(rng.random_range(-1.0..1.0)));
            } else {
                let z = super::random::entry(rng);
                f[c] = Some(z);
                f[inv] = Some(z.conj());
            }
        }
        let central = HermitianOperator::hermitian_part(Mat::from_fn(n, n, |x, y| {
            f[class_of[group.mul(group.inv(x), y)]].unwrap()
        }));
        let spec = central.eigen()?;
        let clusters = cluster(&spec.values);
        if clusters.len() != classes.len() {
            return Err(Error::numeric(format!(
                "central element split into {} clusters, expected {} irreps",
                clusters.len(),
                classes.len()
            )));
        }
        // random Hermitian element of the commutant: B[x][y] = b(x y⁻¹)
        let mut b = alloc::vec![cx(0.0); n];
        for g in 0..n {
            let gi = group.inv(g);
            if gi == g {
                b[g] = cx(rng.random_range(-1.0..1.0));
            } else if gi > g {
                let z = super::random::entry(rng);
                b[g] = z;
                b[gi] = z.conj();
            }
        }
        let commutant = Mat::from_fn(n, n, |x, y| b[group.mul(x, group.inv(y))]);
        let mut bases = Vec::with_capacity(clusters.len());
        for range in clusters {
            let size = range.len();
            let d = isqrt(size);
            if d * d != size {
                return Err(Error::numeric(format!("isotypic cluster of size {size} is not a square")));
            }
            let q = Mat::from_fn(n, size, |r, c| spec.vectors[(r, range.start + c)]);
            let inner = HermitianOperator::hermitian_part(q.adjoint() * (&commutant * q.as_ref()));
            let sub = inner.eigen()?;
            let groups = cluster(&sub.values);
            if groups.len() != d || groups.iter().any(|g| g.len() != d) {
                return Err(Error::numeric("commutant element did not split an isotypic cluster evenly"));
            }
            let first = Mat::from_fn(size, d, |r, c| sub.vectors[(r, c)]);
            let v = &q * first.as_ref();
            validate_irreducible(group, &v)?;
            bases.push(v);
        }
        bases.sort_by_key(|v| v.ncols());
        Ok(bases)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn irrep_dims(&self) -> Vec<usize> {
        self.bases.iter().map(|v| v.ncols()).collect()
    }

    /// `V_π† X_a V_π` for every irrep, where `X_a[x][y] = a(x⁻¹y)`.
    pub fn compress(&self, a: &[c64]) -> Compressed {
        let g = &self.group;
        let n = g.order();
        assert_eq!(a.len(), n, "function length must equal the group order");
        let support: Vec<usize> = (0..n).filter(|&z| a[z] != cx(0.0)).collect();
        self.bases
            .iter()
            .map(|v| {
                let d = v.ncols();
                // (X_a V)[x] = Σ_z a(z) V[xz]
                let xv = Mat::from_fn(n, d, |x, j| {
                    support.iter().map(|&z| a[z] * v[(g.mul(x, z), j)]).sum::<c64>()
                });
                v.adjoint() * xv.as_ref()
            })
            .collect()
    }

    /// `Σ_π d_π tr X̂(π)`, the trace of a single-copy operator.
    pub fn trace(&self, blocks: &Compressed) -> f64 {
        blocks
            .iter()
            .map(|b| (0..b.nrows()).map(|i| b[(i, i)].re).sum::<f64>() * b.nrows() as f64)
            .sum()
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = math::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Splits sorted eigenvalues into runs separated by gaps above the threshold.
fn cluster(values: &[f64]) -> Vec<core::ops::Range<usize>> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > CLUSTER_GAP * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Checks that the span of `v` is invariant under right translations and
/// carries a character of unit norm.
fn validate_irreducible(group: &FiniteGroup, v: &Mat<c64>) -> Result<()> {
    let n = group.order();
    let d = v.ncols();
    let mut norm = 0.0;
    for z in 0..n {
        let shifted = Mat::from_fn(n, d, |x, j| v[(group.mul(x, z), j)]);
        let rep = v.adjoint() * shifted.as_ref();
        let chi: c64 = (0..d).map(|i| rep[(i, i)]).sum();
        norm += chi.norm_sqr();
        let back = v * rep.as_ref();
        let mut dev = 0.0f64;
        for j in 0..d {
            for x in 0..n {
                dev = dev.max(math::abs(back[(x, j)] - shifted[(x, j)]));
            }
        }
        if dev > VALIDATION_TOL {
            return Err(Error::numeric(format!("irreducible subspace not invariant (deviation {dev:.3e})")));
        }
    }
    let ratio = norm / n as f64;
    if (ratio - 1.0).abs() > 1e-6 {
        return Err(Error::numeric(format!("character norm {ratio:.6} ≠ 1; subspace is reducible")));
    }
    Ok(())
}

/// Irrep tuples of length `k` in lexicographic order, with their block
/// dimension (which equals their multiplicity).
pub fn irrep_tuples(dims: &[usize], k: u32) -> Vec<(Vec<usize>, usize)> {
    let mut out = alloc::vec![(Vec::new(), 1usize)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * dims.len());
        for (prefix, d) in &out {
            for (i, &di) in dims.iter().enumerate() {
                let mut t = prefix.clone();
                t.push(i);
                next.push((t, d * di));
            }
        }
        out = next;
    }
    out
}

/// `X̂_1(π_1) ⊗ … ⊗ X̂_k(π_k)`; the empty product is `[[1]]`.
pub fn kron_blocks(factors: &[&Mat<c64>]) -> Mat<c64> {
    let mut out = Mat::from_fn(1, 1, |_, _| cx(1.0));
    for f in factors {
        let mut next = Mat::zeros(out.nrows() * f.nrows(), out.ncols() * f.ncols());
        faer::linalg::kron::kron(next.as_mut(), out.as_ref(), f.as_ref());
        out = next;
    }
    out
}

/// Refuses block evaluations whose total size `|G|^k` exceeds `cap`.
pub fn check_capacity(order: usize, k: u32, cap: usize) -> Result<()> {
    let required = (order as u128).checked_pow(k).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::capacity(format!("block-diagonal route for |G|^{k}"), required, cap as u128));
    }
    Ok(())
}

/// One term `c · X_1 ⊗ … ⊗ X_k` of a tensor sum, each factor given by its
/// compressions.
pub struct TensorTerm<'a> {
    pub coeff: f64,
    pub factors: Vec<&'a Compressed>,
}

/// `‖Σ_terms c · ⊗_i X_i‖₁`, evaluated block by block.
pub fn tensor_sum_trace_norm(dims: &[usize], terms: &[TensorTerm<'_>], cap: usize) -> Result<f64> {
    let k = terms.first().map_or(0, |t| t.factors.len());
    if terms.iter().any(|t| t.factors.len() != k) {
        return Err(Error::usage("tensor terms differ in the number of factors"));
    }
    let order: usize = dims.iter().map(|d| d * d).sum();
    check_capacity(order, k as u32, cap)?;
    let mut total = 0.0;
    for (tuple, mult) in irrep_tuples(dims, k as u32) {
        let block = tuple_block(&tuple, terms);
        let op = HermitianOperator::hermitian_part(block);
        total += mult as f64 * super::trace_norm(&op)?;
    }
    Ok(total)
}

/// The block of a tensor sum at one irrep tuple.
pub fn tuple_block(tuple: &[usize], terms: &[TensorTerm<'_>]) -> Mat<c64> {
    let mut acc: Option<Mat<c64>> = None;
    for t in terms {
        let parts: Vec<&Mat<c64>> = t.factors.iter().zip(tuple).map(|(f, &i)| &f[i]).collect();
        let b = kron_blocks(&parts);
        match acc.as_mut() {
            None => acc = Some(Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * t.coeff)),
            Some(a) => {
                for j in 0..b.ncols() {
                    for i in 0..b.nrows() {
                        a[(i, j)] += b[(i, j)] * t.coeff;
                    }
                }
            }
        }
    }
    acc.unwrap_or_else(|| Mat::zeros(1, 1))
}
