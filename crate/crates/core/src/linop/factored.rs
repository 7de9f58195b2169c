//! Mixtures of pure states handled through their weighted Gram matrix.
//!
//! For `A = Σ w_i |ψ_i⟩⟨ψ_i|` the nonzero spectrum of `A` equals that of
//! `G_ij = √(w_i w_j) ⟨ψ_i|ψ_j⟩`, whose size is the number of components
//! rather than the ambient dimension.

use alloc::format;
use alloc::vec::Vec;

use faer::{Mat, Side};

use super::cx;
use crate::c64;
use crate::error::{Error, Result};
use crate::math;
use crate::Settings;

/// Unit-norm tolerance for component vectors.
const UNIT_TOL: f64 = 1e-12;

/// A nonnegatively weighted family of pure states whose vectors are
/// tensor products `|d_{s,1}⟩ ⊗ … ⊗ |d_{s,L}⟩` of entries drawn from one
/// dictionary per tensor slot. A single slot gives an explicit family.
#[derive(Clone, Debug)]
pub struct PureStateFamily {
    dictionaries: Vec<Vec<Vec<c64>>>,
    weights: Vec<f64>,
    components: Vec<Vec<u32>>,
}

impl PureStateFamily {
    /// Explicit family `Σ w_i |ψ_i⟩⟨ψ_i|`.
    pub fn explicit(weights: Vec<f64>, vectors: Vec<Vec<c64>>) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(Error::usage("weight and vector counts differ"));
        }
        let components = (0..vectors.len() as u32).map(|i| alloc::vec![i]).collect();
        Self::product(alloc::vec![vectors], weights, components)
    }

    /// Product family: component `c` is `⊗_slot dictionaries[slot][components[c][slot]]`.
    pub fn product(dictionaries: Vec<Vec<Vec<c64>>>, weights: Vec<f64>, components: Vec<Vec<u32>>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::usage("weight and component counts differ"));
        }
        if components.is_empty() {
            return Err(Error::usage("pure-state family is empty"));
        }
        for dict in &dictionaries {
            let dim = dict.first().map_or(0, Vec::len);
            for v in dict {
                if v.len() != dim {
                    return Err(Error::usage("dictionary vectors differ in dimension"));
                }
                let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                if (math::sqrt(norm2) - 1.0).abs() > UNIT_TOL {
                    return Err(Error::usage(format!("component vector has norm {:.15}", math::sqrt(norm2))));
                }
            }
        }
        for comp in &components {
            if comp.len() != dictionaries.len() {
                return Err(Error::usage("component slot count differs from dictionary count"));
            }
            for (slot, &i) in comp.iter().enumerate() {
                if i as usize >= dictionaries[slot].len() {
                    return Err(Error::usage("component references a missing dictionary entry"));
                }
            }
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::usage(format!("negative or NaN weight {w}")));
        }
        Ok(PureStateFamily {
            dictionaries,
            weights,
            components,
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Ambient dimension, the product of the slot dimensions.
    pub fn dim(&self) -> u128 {
        self.dictionaries
            .iter()
            .map(|d| d.first().map_or(1, Vec::len) as u128)
            .product()
    }

    fn is_real(&self) -> bool {
        self.dictionaries.iter().flatten().flatten().all(|z| z.im == 0.0)
    }

    /// Materialized component vector; only sensible for small dimensions.
    pub fn vector(&self, c: usize) -> Vec<c64> {
        let mut out = alloc::vec![cx(1.0)];
        for (slot, &i) in self.components[c].iter().enumerate() {
            let v = &self.dictionaries[slot][i as usize];
            out = out.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
        }
        out
    }

    /// Dense mixture `Σ w_i |ψ_i⟩⟨ψ_i|`, used as an oracle for the Gram path.
    pub fn to_dense(&self) -> Mat<c64> {
        let d = self.dim() as usize;
        let mut out = Mat::<c64>::zeros(d, d);
        for c in 0..self.len() {
            let v = self.vector(c);
            let w = self.weights[c];
            for j in 0..d {
                let vj = v[j].conj() * w;
                for i in 0..d {
                    out[(i, j)] += v[i] * vj;
                }
            }
        }
        out
    }

    /// Inner products between dictionary entries of each slot.
    fn slot_grams(&self) -> Vec<Mat<c64>> {
        self.dictionaries
            .iter()
            .map(|dict| {
                Mat::from_fn(dict.len(), dict.len(), |i, j| {
                    dict[i].iter().zip(&dict[j]).map(|(a, b)| a.conj() * b).sum::<c64>()
                })
            })
            .collect()
    }

    fn check_cap(&self, settings: &Settings) -> Result<()> {
        if self.len() > settings.gram_cap {
            return Err(Error::capacity("weighted Gram matrix size", self.len() as u128, settings.gram_cap as u128));
        }
        Ok(())
    }

    /// `√(w_i w_j) ⟨ψ_i|ψ_j⟩ · s_i s_j` with optional signs.
    fn gram_entry(&self, grams: &[Mat<c64>], i: usize, j: usize) -> c64 {
        let (ci, cj) = (&self.components[i], &self.components[j]);
        let mut acc = cx(math::sqrt(self.weights[i] * self.weights[j]));
        for (slot, g) in grams.iter().enumerate() {
            acc *= g[(ci[slot] as usize, cj[slot] as usize)];
        }
        acc
    }

    fn gram_eigenvalues(&self, settings: &Settings) -> Result<Vec<f64>> {
        self.check_cap(settings)?;
        let n = self.len();
        let grams = self.slot_grams();
        let solve_err = |e: faer::linalg::evd::EvdError| Error::numeric(format!("Gram eigensolver failed at size {n}: {e:?}"));
        if self.is_real() {
            let g = Mat::<f64>::from_fn(n, n, |i, j| self.gram_entry(&grams, i, j).re);
            g.self_adjoint_eigenvalues(Side::Lower).map_err(solve_err)
        } else {
            let g = Mat::<c64>::from_fn(n, n, |i, j| self.gram_entry(&grams, i, j));
            g.self_adjoint_eigenvalues(Side::Lower).map_err(solve_err)
        }
    }
}

/// Nonzero eigenvalues (above `rank_tol · λ_max`) of the mixture, nondecreasing.
pub fn mixture_spectrum(fam: &PureStateFamily, settings: &Settings) -> Result<Vec<f64>> {
    let values = fam.gram_eigenvalues(settings)?;
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = settings.rank_tol * top;
    if let Some(&low) = values.first() {
        if low < -1e-8 * top.max(1.0) {
            return Err(Error::numeric(format!("weighted Gram matrix is not PSD: eigenvalue {low:.3e}")));
        }
    }
    Ok(values.into_iter().filter(|&l| l > cut).collect())
}

/// `‖A − c·I‖₁` for the mixture `A` living in dimension `dim_total`:
/// `Σ_{λ ≠ 0} |λ − c| + (dim_total − r)·c`.
pub fn shifted_trace_norm(fam: &PureStateFamily, c: f64, dim_total: u128, settings: &Settings) -> Result<f64> {
    let spec = mixture_spectrum(fam, settings)?;
    let r = spec.len() as u128;
    if r > dim_total {
        return Err(Error::usage(format!("mixture rank {r} exceeds the stated dimension {dim_total}")));
    }
    let nonzero: f64 = spec.iter().map(|l| (l - c).abs()).sum();
    Ok(nonzero + (dim_total - r) as f64 * c.abs())
}

/// `‖Σ s_i w_i |ψ_i⟩⟨ψ_i|‖₁` for signs `s_i = ±1`.
///
/// With `W = L L†` the weighted Gram matrix, the nonzero spectrum equals
/// that of `L† S L`, so this needs one full Gram eigendecomposition.
pub fn signed_mixture_trace_norm(fam: &PureStateFamily, signs: &[i8], settings: &Settings) -> Result<f64> {
    fam.check_cap(settings)?;
    if signs.len() != fam.len() {
        return Err(Error::usage("sign count differs from component count"));
    }
    let n = fam.len();
    let grams = fam.slot_grams();
    let g = Mat::<c64>::from_fn(n, n, |i, j| fam.gram_entry(&grams, i, j));
    let evd = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("Gram eigensolver failed at size {n}: {e:?}")))?;
    let vals = evd.S().column_vector();
    let top = vals[n - 1].re.max(0.0);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i].re > settings.rank_tol * top).collect();
    // L = U_+ √Λ_+ restricted to the support
    let l = Mat::from_fn(n, keep.len(), |r, c| evd.U()[(r, keep[c])] * math::sqrt(vals[keep[c]].re));
    let sl = Mat::from_fn(n, keep.len(), |r, c| l[(r, c)] * f64::from(signs[r]));
    let core = l.adjoint() * sl.as_ref();
    let core = super::HermitianOperator::hermitian_part(core);
    super::trace_norm(&core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::{random, trace_norm, HermitianOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(d: usize, i: usize) -> Vec<c64> {
        (0..d).map(|j| cx(if i == j { 1.0 } else { 0.0 })).collect()
    }

    #[test]
    fn trivial_spectra() {
        let s = Settings::default();
        let one = PureStateFamily::explicit(alloc::vec![1.0], alloc::vec![e(3, 0)]).unwrap();
        assert_eq!(mixture_spectrum(&one, &s).unwrap(), [1.0]);
        assert!((shifted_trace_norm(&one, 0.0, 3, &s).unwrap() - 1.0).abs() < 1e-14);
        let two = PureStateFamily::explicit(alloc::vec![0.5, 0.5], alloc::vec![e(2, 0), e(2, 1)]).unwrap();
        let spec = mixture_spectrum(&two, &s).unwrap();
        assert!(spec.iter().all(|l| (l - 0.5).abs() < 1e-15));
        assert!(shifted_trace_norm(&two, 0.5, 2, &s).unwrap().abs() < 1e-14);
    }

    #[test]
    fn gram_matches_dense_on_random_families() {
        let s = Settings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fam = random::pure_family(&mut rng, 20, 64);
        let dense = HermitianOperator::new(fam.to_dense()).unwrap();
        let mut want: Vec<f64> = dense.eigenvalues().unwrap().into_iter().filter(|l| *l > 1e-9).collect();
        want.sort_by(f64::total_cmp);
        let got = mixture_spectrum(&fam, &s).unwrap();
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn signed_norm_matches_dense() {
        let s = Settings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam = random::pure_family(&mut rng, 9, 6);
        let signs: Vec<i8> = (0..9).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let mut dense = Mat::<c64>::zeros(6, 6);
        for (c, &sign) in signs.iter().enumerate() {
            let v = fam.vector(c);
            let w = fam.weights()[c] * f64::from(sign);
            for j in 0..6 {
                for i in 0..6 {
                    dense[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        let want = trace_norm(&HermitianOperator::hermitian_part(dense)).unwrap();
        let got = signed_mixture_trace_norm(&fam, &signs, &s).unwrap();
        assert!((want - got).abs() < 1e-10, "{want} vs {got}");
    }

    #[test]
    fn product_vectors_expand_in_slot_order() {
        let fam = PureStateFamily::product(
            alloc::vec![alloc::vec![e(2, 1)], alloc::vec![e(3, 2)]],
            alloc::vec![1.0],
            alloc::vec![alloc::vec![0, 0]],
        )
        .unwrap();
        assert_eq!(fam.dim(), 6);
        assert_eq!(fam.vector(0), e(6, 5));
    }

    #[test]
    fn capacity_and_validation() {
        let s = Settings {
            gram_cap: 1,
            ..Settings::default()
        };
        let two = PureStateFamily::explicit(alloc::vec![0.5, 0.5], alloc::vec![e(2, 0), e(2, 1)]).unwrap();
        assert!(matches!(mixture_spectrum(&two, &s), Err(Error::Capacity { .. })));
        assert!(PureStateFamily::explicit(alloc::vec![1.0], alloc::vec![alloc::vec![cx(2.0)]]).is_err());
        assert!(PureStateFamily::explicit(alloc::vec![-1.0], alloc::vec![e(1, 0)]).is_err());
    }
}
