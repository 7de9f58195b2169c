//! Dense complex Hermitian operators and spectral functions of them.
//!
//! Eigenvalues are always returned in nondecreasing order. Every cutoff is
//! relative to the largest eigenvalue so that support projectors and
//! generalized inverse square roots agree on the rank of the same operator.

mod factored;
pub mod interchange;
pub mod random;
pub mod symmetry;

use alloc::format;
use alloc::vec::Vec;

use faer::{Mat, MatRef, Side};

pub use factored::{mixture_spectrum, shifted_trace_norm, signed_mixture_trace_norm, PureStateFamily};

use crate::c64;
use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance of the Hermiticity check, `|A − A†| ≤ tol · max|A|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance of the projector checks (idempotence and 0/1 spectrum).
pub const PROJECTOR_TOL: f64 = 1e-9;

pub(crate) fn cx(re: f64) -> c64 {
    c64::new(re, 0.0)
}

/// A dense complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<c64>,
}

/// Eigendecomposition `Σ λ_i |u_i⟩⟨u_i|` with `λ` nondecreasing.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl HermitianOperator {
    /// Wraps `mat` after checking squareness and Hermiticity.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::usage(format!("operator is {}x{}, not square", mat.nrows(), mat.ncols())));
        }
        let n = mat.nrows();
        let mut dev = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let a = mat[(i, j)];
                scale = scale.max(math::abs(a));
                dev = dev.max(math::abs(a - mat[(j, i)].conj()));
            }
        }
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::domain(format!(
                "matrix is not Hermitian: max |A - A†| = {dev:.3e}, max |A| = {scale:.3e}"
            )));
        }
        Ok(HermitianOperator { mat })
    }

    /// Hermitian part `(A + A†)/2` of a matrix that is Hermitian up to
    /// rounding by construction.
    pub(crate) fn hermitian_part(mut mat: Mat<c64>) -> Self {
        let n = mat.nrows();
        debug_assert_eq!(n, mat.ncols());
        for j in 0..n {
            for i in 0..j {
                let v = (mat[(i, j)] + mat[(j, i)].conj()) * 0.5;
                mat[(i, j)] = v;
                mat[(j, i)] = v.conj();
            }
            let d = mat[(j, j)].re;
            mat[(j, j)] = cx(d);
        }
        HermitianOperator { mat }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        Self::diagonal(&alloc::vec![c; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        HermitianOperator {
            mat: Mat::from_fn(n, n, |i, j| if i == j { cx(values[i]) } else { cx(0.0) }),
        }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &[c64]) -> Self {
        let n = psi.len();
        HermitianOperator {
            mat: Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.mat
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(math::abs(self.mat[(i, j)]));
            }
        }
        m
    }

    /// Largest entrywise deviation `max |A_ij − B_ij|`.
    pub fn max_deviation(&self, other: &HermitianOperator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(math::abs(self.mat[(i, j)] - other.mat[(i, j)]));
            }
        }
        m
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &HermitianOperator, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::usage(format!(
                "cannot combine operators of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        Ok(HermitianOperator {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * a + other.mat[(i, j)] * b),
        })
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianOperator {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * c),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &HermitianOperator, c: f64) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                self.mat[(i, j)] += other.mat[(i, j)] * c;
            }
        }
    }

    /// `self ⊗ other` in the row-major (first factor most significant) basis.
    pub fn kron(&self, other: &HermitianOperator) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut out = Mat::zeros(a * b, a * b);
        faer::linalg::kron::kron(out.as_mut(), self.mat.as_ref(), other.mat.as_ref());
        HermitianOperator { mat: out }
    }

    /// `A · self · A†`.
    pub fn conjugate_by(&self, a: MatRef<'_, c64>) -> Self {
        let tmp = a * self.mat.as_ref();
        Self::hermitian_part(&tmp * a.adjoint())
    }

    /// Matrix product, which is Hermitian only when the factors commute.
    pub fn product(&self, other: &HermitianOperator) -> Mat<c64> {
        self.mat.as_ref() * other.mat.as_ref()
    }

    pub fn eigen(&self) -> Result<Spectrum> {
        let n = self.dim();
        if n == 0 {
            return Ok(Spectrum {
                values: Vec::new(),
                vectors: Mat::zeros(0, 0),
            });
        }
        let evd = self
            .mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| self.eig_failure(e))?;
        let s = evd.S().column_vector();
        let values = (0..n).map(|i| s[i].re).collect();
        Ok(Spectrum {
            values,
            vectors: evd.U().to_owned(),
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        self.mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| self.eig_failure(e))
    }

    fn eig_failure(&self, e: impl core::fmt::Debug) -> Error {
        Error::numeric(format!(
            "Hermitian eigensolver failed on a {0}x{0} operator (max |entry| {1:.3e}): {e:?}",
            self.dim(),
            self.max_abs_entry()
        ))
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Absolute eigenvalue cutoff `tol · λ_max`.
    pub fn cutoff(&self, tol: f64) -> f64 {
        tol * self.max().max(0.0)
    }

    /// `Σ f(λ_i) |u_i⟩⟨u_i|` over eigenpairs selected by `keep`.
    pub fn reconstruct(&self, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let n = self.dim();
        let idx: Vec<usize> = (0..n).filter(|&i| keep(self.values[i])).collect();
        let scaled = Mat::from_fn(n, idx.len(), |r, c| self.vectors[(r, idx[c])] * f(self.values[idx[c]]));
        let picked = Mat::from_fn(n, idx.len(), |r, c| self.vectors[(r, idx[c])]);
        HermitianOperator::hermitian_part(&scaled * picked.adjoint())
    }

    /// Columns of the eigenvectors whose eigenvalues pass `keep`.
    pub fn columns(&self, keep: impl Fn(f64) -> bool) -> Mat<c64> {
        let n = self.dim();
        let idx: Vec<usize> = (0..n).filter(|&i| keep(self.values[i])).collect();
        Mat::from_fn(n, idx.len(), |r, c| self.vectors[(r, idx[c])])
    }
}

/// Orthogonal projector, stored through an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct Projector {
    basis: Mat<c64>,
}

impl Projector {
    /// Checks that `op` is a projector: `‖P² − P‖ ≤ 1e−9` and every
    /// eigenvalue lies within `1e−9` of 0 or 1.
    pub fn new(op: &HermitianOperator) -> Result<Self> {
        let sq = op.product(op);
        let diff = HermitianOperator::hermitian_part(Mat::from_fn(op.dim(), op.dim(), |i, j| sq[(i, j)] - op.entry(i, j)));
        let idem = operator_norm(&diff)?;
        if idem > PROJECTOR_TOL {
            return Err(Error::domain(format!("operator is not idempotent: ‖P² − P‖ = {idem:.3e}")));
        }
        let spec = op.eigen()?;
        if let Some(bad) = spec
            .values
            .iter()
            .find(|&&l| l.abs() > PROJECTOR_TOL && (l - 1.0).abs() > PROJECTOR_TOL)
        {
            return Err(Error::domain(format!("projector eigenvalue {bad:.3e} is neither 0 nor 1")));
        }
        Ok(Projector {
            basis: spec.columns(|l| l > 0.5),
        })
    }

    /// Projector onto the span of orthonormal columns, verified through
    /// `V†V = I`; this implies idempotence of `VV†` with defect at most
    /// `r · max|V†V − I|`.
    pub fn from_isometry(basis: Mat<c64>) -> Result<Self> {
        let r = basis.ncols();
        let gram = basis.adjoint() * basis.as_ref();
        let mut dev = 0.0f64;
        for j in 0..r {
            for i in 0..r {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max(math::abs(gram[(i, j)] - cx(target)));
            }
        }
        if dev * (r.max(1) as f64) > PROJECTOR_TOL {
            return Err(Error::numeric(format!("basis is not orthonormal: max |V†V − I| = {dev:.3e}")));
        }
        Ok(Projector { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> MatRef<'_, c64> {
        self.basis.as_ref()
    }

    pub fn to_operator(&self) -> HermitianOperator {
        HermitianOperator::hermitian_part(self.basis.as_ref() * self.basis.adjoint())
    }

    /// `tr(P ρ) = Σ_i ⟨v_i|ρ|v_i⟩`.
    pub fn expectation(&self, rho: &HermitianOperator) -> f64 {
        let rv = rho.matrix() * self.basis.as_ref();
        let mut acc = 0.0;
        for c in 0..self.rank() {
            for r in 0..self.dim() {
                acc += (self.basis[(r, c)].conj() * rv[(r, c)]).re;
            }
        }
        acc
    }
}

/// Result of a PSD test together with the smallest eigenvalue found.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PsdWitness {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// `‖X‖₁ = Σ |λ_i|`.
pub fn trace_norm(x: &HermitianOperator) -> Result<f64> {
    Ok(x.eigenvalues()?.iter().map(|l| l.abs()).sum())
}

/// `‖X‖ = max |λ_i|`.
pub fn operator_norm(x: &HermitianOperator) -> Result<f64> {
    let v = x.eigenvalues()?;
    Ok(v.iter().fold(0.0f64, |m, l| m.max(l.abs())))
}

/// Count of eigenvalues with `|λ| > tol · max|λ|`.
pub fn numeric_rank(x: &HermitianOperator, tol: f64) -> Result<usize> {
    let v = x.eigenvalues()?;
    let top = v.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(v.iter().filter(|l| l.abs() > tol * top && top > 0.0).count())
}

pub fn psd_check(x: &HermitianOperator, tol: f64) -> Result<PsdWitness> {
    let v = x.eigenvalues()?;
    let min = v.first().copied().unwrap_or(0.0);
    Ok(PsdWitness {
        is_psd: min >= -tol,
        min_eigenvalue: min,
    })
}

fn psd_spectrum(x: &HermitianOperator, tol: f64) -> Result<(Spectrum, f64)> {
    let spec = x.eigen()?;
    let cut = spec.cutoff(tol);
    if spec.min() < -cut {
        return Err(Error::domain(format!(
            "operator is not PSD: eigenvalue {:.3e} below −{tol:.1e}·λ_max",
            spec.min()
        )));
    }
    Ok((spec, cut))
}

/// Projector onto the eigenspaces with `λ > tol · λ_max`.
pub fn support_projector(x: &HermitianOperator, tol: f64) -> Result<Projector> {
    let (spec, cut) = psd_spectrum(x, tol)?;
    Ok(Projector {
        basis: spec.columns(|l| l > cut),
    })
}

/// Generalized inverse square root: `λ ↦ λ^{-1/2}` above the cutoff of
/// [`support_projector`], `0` on the rest.
pub fn inv_sqrt_on_support(x: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let (spec, cut) = psd_spectrum(x, tol)?;
    Ok(spec.reconstruct(|l| l > cut, |l| 1.0 / math::sqrt(l)))
}

/// `x^{⊗k}`; `k = 0` gives the 1×1 identity.
pub fn tensor_power(x: &HermitianOperator, k: u32, cap: usize) -> Result<HermitianOperator> {
    let required = (x.dim() as u128).checked_pow(k).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::capacity(
            format!("dense tensor power ({}-dim)^{k}; use the factored or symmetry route", x.dim()),
            required,
            cap as u128,
        ));
    }
    let mut out = HermitianOperator::identity(1);
    for _ in 0..k {
        out = out.kron(x);
    }
    Ok(out)
}

/// `tr(A B)` computed entrywise in `O(d²)`.
pub fn trace_of_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<c64> {
    if a.dim() != b.dim() {
        return Err(Error::usage(format!("dimension mismatch {} vs {}", a.dim(), b.dim())));
    }
    let mut acc = cx(0.0);
    for j in 0..a.dim() {
        for i in 0..a.dim() {
            acc += a.entry(i, j) * b.entry(j, i);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> HermitianOperator {
        HermitianOperator::diagonal(v)
    }

    #[test]
    fn norms_of_simple_operators() {
        assert!((trace_norm(&HermitianOperator::identity(5)).unwrap() - 5.0).abs() < 1e-12);
        assert!((trace_norm(&diag(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!((operator_norm(&HermitianOperator::scaled_identity(4, 0.25)).unwrap() - 0.25).abs() < 1e-12);
        let psi = [cx(0.6), c64::new(0.0, 0.8)];
        assert!((operator_norm(&HermitianOperator::outer(&psi)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Mat::from_fn(2, 2, |i, j| cx((i * 2 + j) as f64));
        assert!(matches!(HermitianOperator::new(m), Err(Error::Domain(_))));
    }

    #[test]
    fn support_and_inverse_sqrt() {
        let x = diag(&[4.0, 0.0]);
        let r = inv_sqrt_on_support(&x, 1e-9).unwrap();
        assert!(r.max_deviation(&diag(&[0.5, 0.0])) < 1e-14);
        let p = support_projector(&x, 1e-9).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.to_operator().max_deviation(&diag(&[1.0, 0.0])) < 1e-14);
        assert!(matches!(support_projector(&diag(&[1.0, -0.5]), 1e-9), Err(Error::Domain(_))));
        assert_eq!(support_projector(&HermitianOperator::zeros(3), 1e-9).unwrap().rank(), 0);
    }

    #[test]
    fn psd_witness() {
        let w = psd_check(&HermitianOperator::identity(3), 1e-9).unwrap();
        assert!(w.is_psd && (w.min_eigenvalue - 1.0).abs() < 1e-12);
        let w = psd_check(&diag(&[1.0, -0.5]), 1e-9).unwrap();
        assert!(!w.is_psd && (w.min_eigenvalue + 0.5).abs() < 1e-12);
    }

    #[test]
    fn tensor_power_edges() {
        let x = diag(&[0.5, 0.25, 0.25]);
        assert_eq!(tensor_power(&x, 0, 16).unwrap().dim(), 1);
        assert!(tensor_power(&x, 1, 16).unwrap().max_deviation(&x) == 0.0);
        let t = tensor_power(&x, 2, 16).unwrap();
        assert!((t.trace() - 1.0).abs() < 1e-12);
        assert!(matches!(tensor_power(&x, 3, 16), Err(Error::Capacity { required: 27, .. })));
    }

    #[test]
    fn projector_checks() {
        assert!(Projector::new(&diag(&[1.0, 0.0, 1.0])).is_ok());
        assert!(Projector::new(&diag(&[1.0, 0.5])).is_err());
    }

    #[test]
    fn numeric_rank_of_zero_is_zero() {
        assert_eq!(numeric_rank(&HermitianOperator::zeros(4), 1e-9).unwrap(), 0);
        assert_eq!(numeric_rank(&HermitianOperator::identity(4), 1e-9).unwrap(), 4);
    }
}
