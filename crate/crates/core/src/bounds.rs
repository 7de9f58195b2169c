//! Closed-form sample-complexity caps, the measured quantities they
//! constrain, and a per-`k` sweep comparing the two.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{CandidateFamily, FamilyKind};
use crate::linop::symmetry::RegularDecomposition;
use crate::linop::{self, HermitianOperator, PureStateFamily};
use crate::math;
use crate::measurements::{self, PgmWeighting};
use crate::states;
use crate::Settings;

/// Slack allowed when comparing a measured quantity against its cap.
pub const CAP_SLACK: f64 = 1e-8;
/// Slack for the support-union false-positive rate.
pub const FALSE_POSITIVE_SLACK: f64 = 1e-9;
/// PGM error level defining "constant success" in the sample-count check.
pub const CONSTANT_ERROR: f64 = 0.75;

/// `(max|H|)^k / |𝓗|`, the success cap of any identification measurement.
/// Values above one are returned unclamped.
pub fn csi_success_cap(family: &CandidateFamily, k: u32) -> f64 {
    math::pow_u(family.max_order() as f64, k) / family.len() as f64
}

/// Error caps of the projective PGM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PgmErrorCap {
    /// `4 Σ_{H'≠H} (γ_{H,H'}/|H'|)^k` per member.
    pub per_member: Vec<f64>,
    /// `4|𝓗| max_{H≠H'} (|H∩H'|/|H|)^k`, over ordered pairs.
    pub uniform: f64,
}

impl PgmErrorCap {
    pub fn max_per_member(&self) -> f64 {
        self.per_member.iter().fold(0.0, |m, &c| m.max(c))
    }
}

pub fn pgm_error_cap(family: &CandidateFamily, k: u32) -> Result<PgmErrorCap> {
    let n = family.len();
    if n < 2 {
        return Err(Error::usage("PGM error cap needs at least two candidates"));
    }
    let subs = family.subgroups();
    let mut per_member = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            let g = family.gamma(i, j) as f64;
            acc += math::pow_u(g / subs[j].order() as f64, k);
            worst = worst.max(math::pow_u(g / subs[i].order() as f64, k));
        }
        per_member.push(4.0 * acc);
    }
    Ok(PgmErrorCap {
        per_member,
        uniform: 4.0 * n as f64 * worst,
    })
}

/// `√(max|H|^k / |𝓗|)`, present only when every order is prime and every
/// pairwise intersection trivial.
pub fn tcs_tracenorm_cap(family: &CandidateFamily, k: u32) -> Option<f64> {
    (family.all_prime_orders() && family.pairwise_trivial())
        .then(|| math::sqrt(math::pow_u(family.max_order() as f64, k) / family.len() as f64))
}

/// `(1/|𝓗|) √(Σ_{H,H'} |H∩H'|^k − |𝓗|²)`: the Cauchy–Schwarz estimate of
/// `‖(1/|𝓗|)Σ ρ_H^{⊗k} − (I/|G|)^{⊗k}‖₁` through its Hilbert–Schmidt norm,
/// valid for any family. It is at most the prime-order cap when that applies.
pub fn tracenorm_chain(family: &CandidateFamily, k: u32) -> f64 {
    let n = family.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += math::pow_u(family.gamma(i, j) as f64, k);
        }
    }
    math::sqrt((sum - (n * n) as f64).max(0.0)) / n as f64
}

/// `|𝓗| / (min|H|)^k`, the false-positive cap of the support-union test.
pub fn tcs_error_cap(family: &CandidateFamily, k: u32) -> f64 {
    family.len() as f64 / math::pow_u(family.min_order() as f64, k)
}

fn dense_dim(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<usize> {
    let d = (family.parent().order() as u128).checked_pow(k).unwrap_or(u128::MAX);
    if d > settings.dense_cap as u128 {
        return Err(Error::capacity("dense |G|^k operators", d, settings.dense_cap as u128));
    }
    Ok(d as usize)
}

/// Dense `(1/|𝓗|) Σ ρ_H^{⊗k}`.
fn dense_mixture(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<HermitianOperator> {
    let d = dense_dim(family, k, settings)?;
    let mut mix = HermitianOperator::zeros(d);
    for h in family.subgroups() {
        let rho = states::tensor_power(&states::coset_state(h, settings)?, k, settings)?;
        mix.add_assign_scaled(rho.operator(), 1.0 / family.len() as f64);
    }
    Ok(mix)
}

/// `¼‖(1/|𝓗|) Σ ρ_H^{⊗k} − (I/|G|)^{⊗k}‖₁` from a dense eigendecomposition.
pub fn measured_tcs_advantage_dense(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<f64> {
    let mix = dense_mixture(family, k, settings)?;
    let d = mix.dim();
    let x = mix.combine(1.0, &HermitianOperator::identity(d), -1.0 / d as f64)?;
    Ok(0.25 * linop::trace_norm(&x)?)
}

/// `(1/|𝓗|) Σ ρ_H^{⊗k}` as tensor products of coset vectors, one component
/// per member and coset tuple. With `members` given, only those members
/// contribute, each with weight `1/|members|`.
pub fn family_product_decomposition(family: &CandidateFamily, k: u32, members: Option<&[usize]>) -> Result<PureStateFamily> {
    let chosen: Vec<usize> = members.map_or_else(|| (0..family.len()).collect(), <[usize]>::to_vec);
    let n = family.parent().order() as f64;
    let mut dictionary = Vec::new();
    let mut offsets = Vec::new();
    for &i in &chosen {
        offsets.push(dictionary.len() as u32);
        dictionary.extend(states::coset_vectors(family.member(i)));
    }
    let mut weights = Vec::new();
    let mut components = Vec::new();
    for (slot, &i) in chosen.iter().enumerate() {
        let h = family.member(i);
        let r = h.index();
        let w = math::pow_u(h.order() as f64 / n, k) / chosen.len() as f64;
        let count = (r as u128).checked_pow(k).unwrap_or(u128::MAX);
        if count > u32::MAX as u128 {
            return Err(Error::capacity("pure components of ρ_H^{⊗k}", count, u32::MAX as u128));
        }
        for mut t in 0..count as usize {
            let mut comp = Vec::with_capacity(k as usize);
            for _ in 0..k {
                comp.push(offsets[slot] + (t % r) as u32);
                t /= r;
            }
            components.push(comp);
            weights.push(w);
        }
    }
    PureStateFamily::product(alloc::vec![dictionary; k as usize], weights, components)
}

/// Same quantity as [`measured_tcs_advantage_dense`] from the weighted Gram
/// spectrum of the coset-vector components.
pub fn measured_tcs_advantage_factored(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<f64> {
    let fam = family_product_decomposition(family, k, None)?;
    let d = (family.parent().order() as u128).pow(k);
    Ok(0.25 * linop::shifted_trace_norm(&fam, 1.0 / d as f64, d, settings)?)
}

/// Same quantity from the irrep block decomposition of the group algebra.
pub fn measured_tcs_advantage_blockwise(
    dec: &RegularDecomposition,
    family: &CandidateFamily,
    k: u32,
    settings: &Settings,
) -> Result<f64> {
    Ok(measurements::tcs_blockwise(dec, family, k, settings)?.advantage)
}

/// Dense when `|G|^k` fits, factored otherwise.
pub fn measured_tcs_advantage(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<f64> {
    match dense_dim(family, k, settings) {
        Ok(_) => measured_tcs_advantage_dense(family, k, settings),
        Err(Error::Capacity { .. }) => measured_tcs_advantage_factored(family, k, settings),
        Err(e) => Err(e),
    }
}

/// `min_H ¼‖ρ_H^{⊗k} − (I/|G|)^{⊗k}‖₁`, the advantage against the hardest
/// single member.
pub fn worst_member_tcs_advantage(family: &CandidateFamily, k: u32, settings: &Settings) -> Result<f64> {
    let d = (family.parent().order() as u128).checked_pow(k).unwrap_or(u128::MAX);
    let mut worst = f64::INFINITY;
    for i in 0..family.len() {
        let fam = family_product_decomposition(family, k, Some(&[i]))?;
        worst = worst.min(0.25 * linop::shifted_trace_norm(&fam, 1.0 / d as f64, d, settings)?);
    }
    Ok(worst)
}

/// Outcome of the operator inequality `I − R S R ⪯ 2(I − S) + 4T` with
/// `R = (S + T)^{-1/2}` on its support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HnWitness {
    pub holds: bool,
    /// Smallest eigenvalue of `RHS − LHS`.
    pub min_eigenvalue: f64,
}

pub fn hn_inequality_check(s: &HermitianOperator, t: &HermitianOperator, tol: f64, settings: &Settings) -> Result<HnWitness> {
    let d = s.dim();
    if t.dim() != d {
        return Err(Error::usage("S and T differ in dimension"));
    }
    let id = HermitianOperator::identity(d);
    let complement = id.sub(s)?;
    for (name, op) in [("S", s), ("I − S", &complement), ("T", t)] {
        let w = linop::psd_check(op, tol)?;
        if !w.is_psd {
            return Err(Error::domain(format!("{name} has eigenvalue {:.3e}", w.min_eigenvalue)));
        }
    }
    let r = linop::inv_sqrt_on_support(&s.add(t)?, settings.rank_tol)?;
    let lhs = id.sub(&s.conjugate_by(r.matrix()))?;
    let rhs = complement.combine(2.0, t, 4.0)?;
    let min = rhs.sub(&lhs)?.eigen()?.min();
    Ok(HnWitness {
        holds: min >= -tol,
        min_eigenvalue: min,
    })
}

/// `S = AA†` rescaled to `‖S‖ = u`, `u ~ U[0,1]`, and `T = BB†` rescaled to
/// `‖T‖ = v`, `v ~ U[0,4]`, with `A`, `B` of independent random ranks.
pub fn random_hn_pair<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    let draw = |rng: &mut R, scale: f64| -> Result<HermitianOperator> {
        let rank = rng.random_range(1..=dim);
        let p = linop::random::psd(rng, dim, rank);
        let top = linop::operator_norm(&p)?;
        Ok(p.scale(scale / top))
    };
    let u = rng.random_range(0.0..=1.0);
    let s = draw(rng, u)?;
    let v = rng.random_range(0.0..=4.0);
    let t = draw(rng, v)?;
    Ok((s, t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HnSummary {
    pub trials: usize,
    pub passed: usize,
    pub min_witness: f64,
    pub dim_min: usize,
    pub dim_max: usize,
    pub seed: u64,
}

impl HnSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Seeded randomized check of the inequality; dimensions uniform in `dim_min..=dim_max`.
pub fn hn_trials(seed: u64, trials: usize, dim_min: usize, dim_max: usize, tol: f64, settings: &Settings) -> Result<HnSummary> {
    if dim_min == 0 || dim_min > dim_max {
        return Err(Error::usage(format!("invalid dimension range {dim_min}..={dim_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut min_witness = f64::INFINITY;
    for _ in 0..trials {
        let dim = rng.random_range(dim_min..=dim_max);
        let (s, t) = random_hn_pair(&mut rng, dim)?;
        let w = hn_inequality_check(&s, &t, tol, settings)?;
        passed += usize::from(w.holds);
        min_witness = min_witness.min(w.min_eigenvalue);
    }
    Ok(HnSummary {
        trials,
        passed,
        min_witness,
        dim_min,
        dim_max,
        seed,
    })
}

/// Sample count at which the PGM error cap reaches constant error, against
/// the closed-form `⌈ln(16|𝓗|/3) / ln p⌉` for families of one prime order
/// `p` with trivial pairwise intersections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleCountCheck {
    pub p: usize,
    /// Smallest `k` with every per-member cap below `3/4`.
    pub k_star: u32,
    pub limit: u32,
    pub holds: bool,
}

pub fn sample_count_check(family: &CandidateFamily) -> Result<Option<SampleCountCheck>> {
    let p = family.max_order();
    if family.len() < 2 || p != family.min_order() || !family.all_prime_orders() || !family.pairwise_trivial() {
        return Ok(None);
    }
    let limit = math::ceil(math::ln(16.0 * family.len() as f64 / 3.0) / math::ln(p as f64)) as u32;
    let mut k = 0;
    while pgm_error_cap(family, k)?.max_per_member() >= CONSTANT_ERROR {
        k += 1;
    }
    Ok(Some(SampleCountCheck {
        p,
        k_star: k,
        limit,
        holds: k <= limit,
    }))
}

/// Route used for the measured columns of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Irrep blocks where `|G|^k` fits the symmetry cap, Gram spectra beyond.
    Auto,
    /// Dense `|G|^k` operators only.
    Dense,
    /// Irrep blocks only.
    Symmetry,
    /// Gram spectra only; PGM success is not available on this route.
    Factored,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub k_min: u32,
    pub k_max: u32,
    pub route: Route,
    /// Fill the measured PGM column.
    pub measure_pgm: bool,
    /// Fill the measured support-union columns.
    pub measure_tcs: bool,
    /// Seed of the randomized irrep decomposition.
    pub seed: u64,
    pub settings: Settings,
}

impl SweepOptions {
    pub fn new(k_min: u32, k_max: u32) -> Self {
        SweepOptions {
            k_min,
            k_max,
            route: Route::Auto,
            measure_pgm: true,
            measure_tcs: true,
            seed: 0,
            settings: Settings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min > self.k_max {
            return Err(Error::usage(format!("empty k range {}..={}", self.k_min, self.k_max)));
        }
        Ok(())
    }
}

/// Conditions attached to a sweep row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Some cap exceeds the trivial maximum at this `k`.
    Vacuous,
    /// The trace-norm cap is suppressed (non-prime order or nontrivial intersection).
    HypothesisUnmet,
    /// Some pair satisfies `H ⊆ H'`, so `min |H|/|H∩H'| = 1`.
    NestedPair,
    /// A measured value exceeds its cap beyond the slack.
    CapViolation,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::Vacuous => "vacuous",
            Flag::HypothesisUnmet => "hypothesis_unmet",
            Flag::NestedPair => "nested_pair",
            Flag::CapViolation => "cap_violation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyDescriptor {
    pub group: String,
    pub group_order: usize,
    pub kind: FamilyKind,
    pub size: usize,
    pub orders: Vec<usize>,
}

impl FamilyDescriptor {
    pub fn of(family: &CandidateFamily) -> Self {
        FamilyDescriptor {
            group: format!("{}", family.parent().recipe()),
            group_order: family.parent().order(),
            kind: family.kind(),
            size: family.len(),
            orders: family.subgroups().iter().map(|h| h.order()).collect(),
        }
    }
}

/// Caps and measured values for one family at one `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: u32,
    pub csi_success_cap: f64,
    /// Largest per-member PGM error cap (zero for a single candidate).
    pub pgm_error_bound: f64,
    pub tcs_tracenorm_bound: Option<f64>,
    pub tcs_error_bound: f64,
    /// Uniform-prior success of the projective PGM.
    pub measured_pgm_success: Option<f64>,
    /// Optimal advantage against the averaged nontrivial state.
    pub measured_tcs_advantage: Option<f64>,
    /// False-positive rate of the support-union test.
    pub measured_tcs_error: Option<f64>,
    /// Advantage against the hardest single member, when dense-feasible.
    pub measured_tcs_worst_member_advantage: Option<f64>,
    pub flags: Vec<Flag>,
}

/// A row is a [`BoundReport`]; its fields are already flat.
pub type SweepRow = BoundReport;

impl BoundReport {
    /// Checks every measured value against its cap.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if let Some(s) = self.measured_pgm_success {
            if 1.0 - s > self.pgm_error_bound + CAP_SLACK {
                out.push("pgm_error");
            }
            if self.csi_success_cap <= 1.0 && s > self.csi_success_cap + CAP_SLACK {
                out.push("csi_success");
            }
        }
        if let (Some(a), Some(c)) = (self.measured_tcs_advantage, self.tcs_tracenorm_bound) {
            if a > 0.25 * c + CAP_SLACK {
                out.push("tcs_advantage");
            }
        }
        if let Some(e) = self.measured_tcs_error {
            if e > self.tcs_error_bound + FALSE_POSITIVE_SLACK {
                out.push("tcs_error");
            }
        }
        out
    }

    pub fn flag_string(&self) -> String {
        let names: Vec<&str> = self.flags.iter().map(|f| f.name()).collect();
        names.join(";")
    }
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Capacity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn symmetry_fits(family: &CandidateFamily, k: u32, settings: &Settings) -> bool {
    (family.parent().order() as u128).checked_pow(k).is_some_and(|d| d <= settings.symmetry_cap as u128)
}

/// One sweep row. `dec` is required by the symmetry-based routes.
pub fn bound_report(family: &CandidateFamily, k: u32, options: &SweepOptions, dec: Option<&RegularDecomposition>) -> Result<BoundReport> {
    let st = &options.settings;
    let pgm_error_bound = if family.len() < 2 {
        0.0
    } else {
        pgm_error_cap(family, k)?.max_per_member()
    };
    let tcs_tracenorm_bound = tcs_tracenorm_cap(family, k);
    let mut report = BoundReport {
        k,
        csi_success_cap: csi_success_cap(family, k),
        pgm_error_bound,
        tcs_tracenorm_bound,
        tcs_error_bound: tcs_error_cap(family, k),
        measured_pgm_success: None,
        measured_tcs_advantage: None,
        measured_tcs_error: None,
        measured_tcs_worst_member_advantage: None,
        flags: Vec::new(),
    };
    let use_blocks = match options.route {
        Route::Symmetry => true,
        Route::Auto => symmetry_fits(family, k, st),
        Route::Dense | Route::Factored => false,
    };
    let (pgm, tcs) = (options.measure_pgm, options.measure_tcs);
    if use_blocks {
        let dec = dec.ok_or_else(|| Error::usage("symmetry route needs an irrep decomposition"))?;
        if pgm {
            report.measured_pgm_success = optional(
                measurements::pgm_member_success_blockwise(dec, family, k, PgmWeighting::Projective, st)
                    .map(|s| s.iter().sum::<f64>() / s.len() as f64),
            )?;
        }
        if tcs {
            if let Some(v) = optional(measurements::tcs_blockwise(dec, family, k, st))? {
                report.measured_tcs_advantage = Some(v.advantage);
                report.measured_tcs_error = Some(v.false_positive);
            }
        }
    } else if options.route == Route::Dense {
        if pgm {
            report.measured_pgm_success = optional(
                measurements::pgm_projective(family, k, st).and_then(|p| measurements::average_success(&p, family, k, st)),
            )?;
        }
        if tcs {
            report.measured_tcs_advantage = optional(measured_tcs_advantage_dense(family, k, st))?;
            report.measured_tcs_error = optional(dense_false_positive(family, k, st))?;
        }
    } else if tcs {
        report.measured_tcs_advantage = optional(measured_tcs_advantage_factored(family, k, st))?;
        report.measured_tcs_error = optional(factored_false_positive(family, k, st))?;
    }
    if tcs && dense_dim(family, k, st).is_ok() {
        report.measured_tcs_worst_member_advantage = optional(worst_member_tcs_advantage(family, k, st))?;
    }

    let vacuous = report.csi_success_cap > 1.0
        || report.pgm_error_bound > 1.0
        || report.tcs_error_bound > 1.0
        || tcs_tracenorm_bound.is_some_and(|c| c > 2.0);
    if vacuous {
        report.flags.push(Flag::Vacuous);
    }
    if tcs_tracenorm_bound.is_none() {
        report.flags.push(Flag::HypothesisUnmet);
    }
    if family.has_nested_pair() {
        report.flags.push(Flag::NestedPair);
    }
    if !report.violations().is_empty() {
        report.flags.push(Flag::CapViolation);
    }
    Ok(report)
}

fn dense_false_positive(family: &CandidateFamily, k: u32, st: &Settings) -> Result<f64> {
    let povm = measurements::tcs_projector_povm(family, k, st)?;
    let mixed = states::maximally_mixed(family.parent(), k, st)?;
    let dist = measurements::measure(&povm, &mixed)?;
    Ok(dist.probability(measurements::NONTRIVIAL_LABEL).unwrap_or(0.0))
}

/// `rank(T)/|G|^k` with the rank read off the Gram spectrum of all coset-vector tuples.
fn factored_false_positive(family: &CandidateFamily, k: u32, st: &Settings) -> Result<f64> {
    let fam = family_product_decomposition(family, k, None)?;
    let rank = linop::mixture_spectrum(&fam, st)?.len();
    Ok(rank as f64 / math::pow_u(family.parent().order() as f64, k))
}

/// Sequential sweep over `k_min..=k_max`.
pub fn sweep(family: &CandidateFamily, options: &SweepOptions) -> Result<Vec<SweepRow>> {
    options.validate()?;
    let dec = sweep_decomposition(family, options)?;
    (options.k_min..=options.k_max)
        .map(|k| bound_report(family, k, options, dec.as_ref()))
        .collect()
}

/// The irrep decomposition a sweep needs, if its route uses one.
pub fn sweep_decomposition(family: &CandidateFamily, options: &SweepOptions) -> Result<Option<RegularDecomposition>> {
    match options.route {
        Route::Auto | Route::Symmetry => RegularDecomposition::new(family.parent(), options.seed).map(Some),
        Route::Dense | Route::Factored => Ok(None),
    }
}
