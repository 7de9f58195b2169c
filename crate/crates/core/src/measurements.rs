//! POVMs, outcome statistics and the three discriminating measurements:
//! the projective pretty good measurement, the support-union test and the
//! Helstrom binary test.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::c64;
use crate::error::{Error, Result};
use crate::group::CandidateFamily;
use crate::linop::symmetry::{check_capacity, irrep_tuples, kron_blocks, Compressed, RegularDecomposition};
use crate::linop::{self, cx, HermitianOperator, Spectrum};
use crate::math;
use crate::states::{self, DensityOperator};
use crate::Settings;

/// Tolerance of the POVM checks (element PSD, completeness).
pub const POVM_TOL: f64 = 1e-8;
/// Probabilities in `[−1e−10, 0)` are rounding noise and clamp to zero.
pub const PROBABILITY_CLAMP: f64 = 1e-10;
/// Outcome label of the residual PGM element.
pub const FAIL_LABEL: &str = "fail";
pub const NONTRIVIAL_LABEL: &str = "nontrivial";
pub const TRIVIAL_LABEL: &str = "trivial";

/// A labeled list of PSD operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    labels: Vec<String>,
    elements: Vec<HermitianOperator>,
}

impl Povm {
    /// Checks every element for PSD and the sum for completeness, both at `1e−8`.
    pub fn new(labels: Vec<String>, elements: Vec<HermitianOperator>) -> Result<Self> {
        Self::check_shape(&labels, &elements)?;
        for (l, e) in labels.iter().zip(&elements) {
            let w = linop::psd_check(e, POVM_TOL)?;
            if !w.is_psd {
                return Err(Error::domain(format!(
                    "POVM element {l:?} has eigenvalue {:.3e}",
                    w.min_eigenvalue
                )));
            }
        }
        Self::check_completeness(&elements)?;
        Ok(Povm { labels, elements })
    }

    /// Elements `F_i F_i†`, PSD by construction; only completeness is checked.
    pub fn from_factors(labels: Vec<String>, factors: &[Mat<c64>]) -> Result<Self> {
        let elements: Vec<HermitianOperator> = factors
            .iter()
            .map(|f| HermitianOperator::hermitian_part(f.as_ref() * f.adjoint()))
            .collect();
        Self::check_shape(&labels, &elements)?;
        Self::check_completeness(&elements)?;
        Ok(Povm { labels, elements })
    }

    fn check_shape(labels: &[String], elements: &[HermitianOperator]) -> Result<()> {
        if labels.len() != elements.len() || elements.is_empty() {
            return Err(Error::usage("POVM needs one label per element and at least one element"));
        }
        let d = elements[0].dim();
        if elements.iter().any(|e| e.dim() != d) {
            return Err(Error::usage("POVM elements differ in dimension"));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("POVM labels must be distinct"));
        }
        Ok(())
    }

    fn check_completeness(elements: &[HermitianOperator]) -> Result<()> {
        let d = elements[0].dim();
        let mut sum = HermitianOperator::zeros(d);
        for e in elements {
            sum.add_assign_scaled(e, 1.0);
        }
        let dev = sum.max_deviation(&HermitianOperator::identity(d));
        if dev > POVM_TOL {
            return Err(Error::domain(format!("POVM elements sum to I only within {dev:.3e}")));
        }
        Ok(())
    }

    /// The trivial one-outcome measurement `{I}`.
    pub fn identity(dim: usize) -> Self {
        Povm {
            labels: alloc::vec![String::from("id")],
            elements: alloc::vec![HermitianOperator::identity(dim)],
        }
    }

    /// `{|i⟩⟨i|}` labeled by the basis index.
    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| {
                let mut v = alloc::vec![0.0; dim];
                v[i] = 1.0;
                HermitianOperator::diagonal(&v)
            })
            .collect();
        Povm {
            labels: (0..dim).map(|i| i.to_string()).collect(),
            elements,
        }
    }

    /// Random guessing: every label gets `I/n`.
    pub fn uniform_guess(labels: Vec<String>, dim: usize) -> Result<Self> {
        let n = labels.len();
        let elements: Vec<HermitianOperator> = (0..n).map(|_| HermitianOperator::scaled_identity(dim, 1.0 / n as f64)).collect();
        Self::check_shape(&labels, &elements)?;
        Ok(Povm { labels, elements })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn element(&self, label: &str) -> Option<&HermitianOperator> {
        self.labels.iter().position(|l| l == label).map(|i| &self.elements[i])
    }

    /// One labeled interchange block per element.
    pub fn to_interchange(&self) -> Result<String> {
        let items: Vec<(&str, &HermitianOperator)> = self.labels.iter().map(String::as_str).zip(&self.elements).collect();
        let mut out = String::new();
        linop::interchange::write_collection(&mut out, &items)?;
        Ok(out)
    }

    /// Parses labeled blocks and runs the full checks of [`Povm::new`].
    pub fn from_interchange(text: &str) -> Result<Self> {
        let (labels, elements) = linop::interchange::read_collection(text)?.into_iter().unzip();
        Self::new(labels, elements)
    }
}

/// Outcome probabilities of a measurement, in POVM order.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct OutcomeDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probabilities[i])
    }

    /// Most likely outcome among `candidates`, ties going to the earliest.
    pub fn argmax_among(&self, candidates: &[&str]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in candidates.iter().enumerate() {
            let p = self.probability(c)?;
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// `tr(M_k ρ)` for every outcome.
pub fn measure(povm: &Povm, state: &DensityOperator) -> Result<OutcomeDistribution> {
    measure_operator(povm, state.operator())
}

pub(crate) fn measure_operator(povm: &Povm, rho: &HermitianOperator) -> Result<OutcomeDistribution> {
    if povm.dim() != rho.dim() {
        return Err(Error::usage(format!(
            "POVM dimension {} does not match state dimension {}",
            povm.dim(),
            rho.dim()
        )));
    }
    let mut probabilities = Vec::with_capacity(povm.len());
    for (l, m) in povm.labels.iter().zip(&povm.elements) {
        let p = linop::trace_of_product(m, rho)?.re;
        if p < -PROBABILITY_CLAMP {
            return Err(Error::numeric(format!("outcome {l:?} has probability {p:.3e}")));
        }
        probabilities.push(p.max(0.0));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::numeric(format!("outcome probabilities sum to {total}")));
    }
    Ok(OutcomeDistribution {
        labels: povm.labels.clone(),
        probabilities,
    })
}

/// Draws one outcome by inverting the cumulative distribution in POVM order.
pub fn sample_outcome(povm: &Povm, state: &DensityOperator, seed: u64) -> Result<String> {
    let dist = measure(povm, state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_from(&dist, &mut rng))
}

pub fn sample_from<R: Rng + ?Sized>(dist: &OutcomeDistribution, rng: &mut R) -> String {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (l, p) in dist.labels.iter().zip(&dist.probabilities) {
        acc += p;
        if u < acc {
            return l.clone();
        }
    }
    // rounding left u beyond the total; take the last outcome with mass
    let last = dist.probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    dist.labels[last].clone()
}

/// Orthonormal basis of the support of `P_H^{⊗k}`: tensor products of coset vectors.
pub fn coset_support_basis(h: &crate::group::Subgroup, k: u32) -> Mat<c64> {
    let vs = states::coset_vectors(h);
    let n = h.parent().order();
    let single = Mat::from_fn(n, vs.len(), |r, c| vs[c][r]);
    let mut out = Mat::from_fn(1, 1, |_, _| cx(1.0));
    for _ in 0..k {
        let mut next = Mat::zeros(out.nrows() * n, out.ncols() * vs.len());
        faer::linalg::kron::kron(next.as_mut(), out.as_ref(), single.as_ref());
        out = next;
    }
    out
}

fn check_family_dense(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<usize> {
    let n = family.parent().order() as u128;
    let d = n.checked_pow(k).unwrap_or(u128::MAX);
    if d > settings.dense_cap as u128 {
        return Err(Error::capacity(
            format!("dense operators on |G|^{k} for {}", family.parent().recipe()),
            d,
            settings.dense_cap as u128,
        ));
    }
    Ok(d as usize)
}

/// Eigendecomposition of `Σ = Σ_i F_i F_i†` for column-stacked factors.
fn factor_sum_spectrum(factors: &[Mat<c64>], dim: usize) -> Result<Spectrum> {
    let mut sigma = Mat::<c64>::zeros(dim, dim);
    for f in factors {
        sigma += f.as_ref() * f.adjoint();
    }
    HermitianOperator::hermitian_part(sigma).eigen()
}

/// PGM `{Σ^{-1/2} F_i F_i† Σ^{-1/2}} ∪ {I − Π_supp(Σ)}` with `Σ = Σ_i F_i F_i†`.
fn pgm_from_factors(labels: Vec<String>, factors: &[Mat<c64>], dim: usize, tol: f64) -> Result<Povm> {
    let spec = factor_sum_spectrum(factors, dim)?;
    let cut = spec.cutoff(tol);
    let support = spec.columns(|l| l > cut);
    let inv_sqrt: Vec<f64> = spec.values.iter().filter(|&&l| l > cut).map(|&l| 1.0 / math::sqrt(l)).collect();
    let mut povm_factors = Vec::with_capacity(factors.len() + 1);
    for f in factors {
        // Σ^{-1/2} F = U_+ Λ_+^{-1/2} U_+† F
        let mut coords = support.adjoint() * f.as_ref();
        for (r, s) in inv_sqrt.iter().enumerate() {
            for c in 0..coords.ncols() {
                coords[(r, c)] *= *s;
            }
        }
        povm_factors.push(&support * coords.as_ref());
    }
    povm_factors.push(spec.columns(|l| l <= cut));
    let mut labels = labels;
    labels.push(String::from(FAIL_LABEL));
    Povm::from_factors(labels, &povm_factors)
}

/// Projective PGM built from the support projectors `P_H^{⊗k}`.
pub fn pgm_projective(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<Povm> {
    let dim = check_family_dense(family, k, settings)?;
    let factors: Vec<Mat<c64>> = family.subgroups().iter().map(|h| coset_support_basis(h, k)).collect();
    pgm_from_factors(family.labels(), &factors, dim, settings.rank_tol)
}

/// Conventional PGM built from the states `ρ_H^{⊗k}` themselves.
pub fn pgm_states(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<Povm> {
    let dim = check_family_dense(family, k, settings)?;
    let n = family.parent().order() as f64;
    let factors: Vec<Mat<c64>> = family
        .subgroups()
        .iter()
        .map(|h| {
            // ρ_H^{⊗k} = (|H|/|G|)^k V V†
            let s = math::sqrt(math::pow_u(h.order() as f64 / n, k));
            let v = coset_support_basis(h, k);
            Mat::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * s)
        })
        .collect();
    pgm_from_factors(family.labels(), &factors, dim, settings.rank_tol)
}

/// `tr(M_H ρ_H^{⊗k})` for every member, the outcome labeled `H{i}`.
pub fn member_success(povm: &Povm, family: &CandidateFamily, k: u32, settings: &Settings) -> Result<Vec<f64>> {
    check_family_dense(family, k, settings)?;
    let labels = family.labels();
    if let Some(missing) = labels.iter().find(|l| povm.element(l).is_none()) {
        return Err(Error::usage(format!("POVM has no outcome {missing:?}")));
    }
    let mut out = Vec::with_capacity(family.len());
    for (i, h) in family.subgroups().iter().enumerate() {
        let rho = states::tensor_power(&states::coset_state(h, settings)?, k, settings)?;
        let dist = measure(povm, &rho)?;
        out.push(dist.probability(&labels[i]).unwrap());
    }
    Ok(out)
}

/// Uniform-prior success `(1/|𝓗|) Σ_H tr(M_H ρ_H^{⊗k})`.
pub fn average_success(povm: &Povm, family: &CandidateFamily, k: u32, settings: &Settings) -> Result<f64> {
    let s = member_success(povm, family, k, settings)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Binary test `{T, I − T}` with `T` the projector onto the union of the
/// supports of `ρ_H^{⊗k}`.
pub fn tcs_projector_povm(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<Povm> {
    let dim = check_family_dense(family, k, settings)?;
    let factors: Vec<Mat<c64>> = family.subgroups().iter().map(|h| coset_support_basis(h, k)).collect();
    let spec = factor_sum_spectrum(&factors, dim)?;
    let cut = spec.cutoff(settings.rank_tol);
    Povm::from_factors(
        alloc::vec![String::from(NONTRIVIAL_LABEL), String::from(TRIVIAL_LABEL)],
        &[spec.columns(|l| l > cut), spec.columns(|l| l <= cut)],
    )
}

/// Optimal two-state test: `Π₊` projects onto the strictly positive
/// eigenspace of `a − b` (eigenvalues above `rank_tol · max|λ|`), the rest
/// goes to the complement. Returns the POVM and `½ + ¼‖a − b‖₁`.
pub fn helstrom(a: &DensityOperator, b: &DensityOperator, settings: &Settings) -> Result<(Povm, f64)> {
    if !a.basis().same_as(b.basis()) {
        return Err(Error::usage("Helstrom test needs states on the same basis"));
    }
    helstrom_operators(a.operator(), b.operator(), settings)
}

/// [`helstrom`] on bare operators.
pub fn helstrom_operators(a: &HermitianOperator, b: &HermitianOperator, settings: &Settings) -> Result<(Povm, f64)> {
    let diff = a.sub(b)?;
    let spec = diff.eigen()?;
    let scale = spec.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cut = settings.rank_tol * scale;
    let norm: f64 = spec.values.iter().map(|l| l.abs()).sum();
    let povm = Povm::from_factors(
        alloc::vec![String::from("first"), String::from("second")],
        &[spec.columns(|l| l > cut), spec.columns(|l| l <= cut)],
    )?;
    Ok((povm, 0.5 + 0.25 * norm))
}

/// `½ tr(M_0 a) + ½ tr(M_1 b)` for a two-outcome POVM.
pub fn binary_success(povm: &Povm, a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if povm.len() != 2 {
        return Err(Error::usage("binary success needs a two-outcome POVM"));
    }
    let pa = linop::trace_of_product(&povm.elements[0], a)?.re;
    let pb = linop::trace_of_product(&povm.elements[1], b)?.re;
    Ok(0.5 * pa + 0.5 * pb)
}

/// Random `{M, I − M}` with `M = U diag(u) U†`, `u_i` uniform in `[0, 1]`.
pub fn random_binary_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Povm> {
    let u = linop::random::hermitian(rng, dim).eigen()?.vectors;
    let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..=1.0)).collect();
    let m0 = Mat::from_fn(dim, dim, |r, c| u[(r, c)] * math::sqrt(weights[c]));
    let m1 = Mat::from_fn(dim, dim, |r, c| u[(r, c)] * math::sqrt(1.0 - weights[c]));
    Povm::from_factors(alloc::vec![String::from("first"), String::from("second")], &[m0, m1])
}

/// Weighting of the PGM in the block-diagonal evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmWeighting {
    /// Elements built from the support projectors `P_H^{⊗k}`.
    Projective,
    /// Elements built from the states `ρ_H^{⊗k}`.
    States,
}

/// Per-member compressions of `ρ_H` and `P_H`.
pub(crate) struct CompressedFamily {
    pub dims: Vec<usize>,
    pub states: Vec<Compressed>,
    pub projectors: Vec<Compressed>,
}

impl CompressedFamily {
    pub fn new(dec: &RegularDecomposition, family: &CandidateFamily) -> Self {
        CompressedFamily {
            dims: dec.irrep_dims(),
            states: family
                .subgroups()
                .iter()
                .map(|h| dec.compress(&states::coset_state_function(h)))
                .collect(),
            projectors: family
                .subgroups()
                .iter()
                .map(|h| dec.compress(&states::coset_projector_function(h)))
                .collect(),
        }
    }
}

fn tuple_kron(c: &Compressed, tuple: &[usize]) -> Mat<c64> {
    let parts: Vec<&Mat<c64>> = tuple.iter().map(|&i| &c[i]).collect();
    kron_blocks(&parts)
}

fn trace_product(a: faer::MatRef<'_, c64>, b: faer::MatRef<'_, c64>) -> f64 {
    let mut acc = cx(0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// Per-member PGM success `tr(M_H ρ_H^{⊗k})` evaluated irrep block by irrep
/// block, without forming any `|G|^k`-dimensional operator.
pub fn pgm_member_success_blockwise(
    dec: &RegularDecomposition,
    family: &CandidateFamily,
    k: u32,
    weighting: PgmWeighting,
    settings: &Settings,
) -> Result<Vec<f64>> {
    check_capacity(family.parent().order(), k, settings.symmetry_cap)?;
    let cf = CompressedFamily::new(dec, family);
    let elems = match weighting {
        PgmWeighting::Projective => &cf.projectors,
        PgmWeighting::States => &cf.states,
    };
    let tuples = irrep_tuples(&cf.dims, k);
    let mut spectra = Vec::with_capacity(tuples.len());
    let mut top = 0.0f64;
    for (tuple, _) in &tuples {
        let mut sigma: Option<Mat<c64>> = None;
        for e in elems {
            let b = tuple_kron(e, tuple);
            sigma = Some(match sigma {
                None => b,
                Some(s) => s + b,
            });
        }
        let spec = HermitianOperator::hermitian_part(sigma.unwrap()).eigen()?;
        top = top.max(spec.max());
        spectra.push(spec);
    }
    let cut = settings.rank_tol * top;
    let mut success = alloc::vec![0.0; family.len()];
    for ((tuple, mult), spec) in tuples.iter().zip(&spectra) {
        let r = spec.reconstruct(|l| l > cut, |l| 1.0 / math::sqrt(l));
        for (i, s) in success.iter_mut().enumerate() {
            let a = tuple_kron(&elems[i], tuple);
            let rho = tuple_kron(&cf.states[i], tuple);
            let m = r.matrix() * (a.as_ref() * r.matrix());
            *s += *mult as f64 * trace_product(m.as_ref(), rho.as_ref());
        }
    }
    Ok(success)
}

/// Quantities of the support-union test, evaluated block by block.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TcsBlockValues {
    /// `rank(T)`.
    pub rank: u128,
    /// `tr(T (I/|G|)^{⊗k}) = rank(T)/|G|^k`.
    pub false_positive: f64,
    /// `tr(T ρ_H^{⊗k})` per member.
    pub acceptance: Vec<f64>,
    /// `¼ ‖(1/|𝓗|) Σ ρ_H^{⊗k} − (I/|G|)^{⊗k}‖₁`.
    pub advantage: f64,
}

pub fn tcs_blockwise(dec: &RegularDecomposition, family: &CandidateFamily, k: u32, settings: &Settings) -> Result<TcsBlockValues> {
    let n = family.parent().order();
    check_capacity(n, k, settings.symmetry_cap)?;
    let cf = CompressedFamily::new(dec, family);
    let tuples = irrep_tuples(&cf.dims, k);
    let total_dim = math::pow_u(n as f64, k);
    let weight = 1.0 / family.len() as f64;
    let mut spectra = Vec::with_capacity(tuples.len());
    let mut top = 0.0f64;
    let mut norm = 0.0;
    for (tuple, mult) in &tuples {
        let mut sigma: Option<Mat<c64>> = None;
        let mut mix: Option<Mat<c64>> = None;
        for i in 0..family.len() {
            let p = tuple_kron(&cf.projectors[i], tuple);
            let r = tuple_kron(&cf.states[i], tuple);
            sigma = Some(match sigma {
                None => p,
                Some(s) => s + p,
            });
            mix = Some(match mix {
                None => r,
                Some(s) => s + r,
            });
        }
        let mix = mix.unwrap();
        let d = mix.nrows();
        let x = Mat::from_fn(d, d, |i, j| mix[(i, j)] * weight - if i == j { cx(1.0 / total_dim) } else { cx(0.0) });
        norm += *mult as f64 * linop::trace_norm(&HermitianOperator::hermitian_part(x))?;
        let spec = HermitianOperator::hermitian_part(sigma.unwrap()).eigen()?;
        top = top.max(spec.max());
        spectra.push(spec);
    }
    let cut = settings.rank_tol * top;
    let mut rank = 0u128;
    let mut acceptance = alloc::vec![0.0; family.len()];
    for ((tuple, mult), spec) in tuples.iter().zip(&spectra) {
        let r = spec.values.iter().filter(|&&l| l > cut).count();
        rank += (*mult * r) as u128;
        let t = spec.reconstruct(|l| l > cut, |_| 1.0);
        for (i, acc) in acceptance.iter_mut().enumerate() {
            let rho = tuple_kron(&cf.states[i], tuple);
            *acc += *mult as f64 * trace_product(t.matrix(), rho.as_ref());
        }
    }
    Ok(TcsBlockValues {
        rank,
        false_positive: rank as f64 / total_dim,
        acceptance,
        advantage: 0.25 * norm,
    })
}
