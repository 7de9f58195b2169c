//! Command execution. Every command returns its artifact as text so that
//! identical configurations give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use cosetlab_core::bounds::{self, BoundReport, FamilyDescriptor, Flag, HnSummary, SampleCountCheck, SweepOptions};
use cosetlab_core::group::{all_subgroups, candidate_family, CandidateFamily, FamilyKind, FiniteGroup, Subgroup};
use cosetlab_core::linop::{self, HermitianOperator};
use cosetlab_core::measurements::{self, Povm};
use cosetlab_core::qes::{self, QesParams, SecurityReport};
use cosetlab_core::states::{self, DensityOperator};
use cosetlab_core::{Error, Result, Settings};
use serde::Serialize;

use crate::config::{Command, Format, RunConfig};
use crate::recipes;

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub artifact: String,
    /// One human-readable status line.
    pub summary: String,
    /// Every asserted inequality held.
    pub success: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Construction(_) => EXIT_USAGE,
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_ASSERTION,
    }
}

/// Twelve significant digits, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.command {
        Command::Verify => verify(cfg),
        Command::CsiSweep | Command::TcsSweep => sweep(cfg),
        Command::QesSecurity => qes_security(cfg),
        Command::HnCheck => hn_check(cfg),
    }
}

/// Worst deviation of one law over all its cases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawResult {
    pub law: &'static str,
    pub cases: usize,
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

struct Law {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
}

impl Law {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Law {
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.cases += 1;
        // NaN must register as the worst deviation
        if deviation.is_nan() || deviation > self.worst {
            self.worst = deviation;
        }
    }

    fn finish(self) -> LawResult {
        LawResult {
            law: self.name,
            cases: self.cases,
            worst_deviation: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub group: String,
    pub group_order: usize,
    pub subgroups: usize,
    pub family: Option<String>,
    pub laws: Vec<LawResult>,
    pub passed: bool,
}

/// Runs the state, operator and measurement laws on every subgroup of the group.
pub fn verify_report(group: &Arc<FiniteGroup>, family: Option<(&str, &CandidateFamily)>, st: &Settings) -> Result<VerifyReport> {
    let n = group.order() as f64;
    let subs = all_subgroups(group)?;
    let rhos: Vec<DensityOperator> = subs.iter().map(|h| states::coset_state(h, st)).collect::<Result<_>>()?;
    let projectors: Vec<HermitianOperator> = subs
        .iter()
        .map(|h| states::coset_projector(h).map(|p| p.to_operator()))
        .collect::<Result<_>>()?;

    let mut rank = Law::new("rank", 0.0);
    let mut norm = Law::new("operator_norm", 1e-8);
    let mut trace = Law::new("trace", 1e-9);
    let mut psd = Law::new("psd", 1e-9);
    let mut outer = Law::new("outer_product_form", 1e-12);
    let mut standard = Law::new("standard_method", 1e-12);
    let mut support = Law::new("projector_support", 1e-9);
    for ((h, rho), p) in subs.iter().zip(&rhos).zip(&projectors) {
        let op = rho.operator();
        let r = linop::numeric_rank(op, st.rank_tol)?;
        rank.record((r as f64 - h.index() as f64).abs());
        norm.record((linop::operator_norm(op)? - h.order() as f64 / n).abs());
        trace.record((op.trace() - 1.0).abs());
        psd.record((-linop::psd_check(op, 1e-9)?.min_eigenvalue).max(0.0));
        outer.record(states::coset_state_from_outer_products(h, st)?.operator().max_deviation(op));
        let oracle = states::oracle_from_subgroup(h);
        standard.record(states::standard_method_state(&oracle, st)?.operator().max_deviation(op));
        support.record((linop::trace_of_product(p, op)?.re - 1.0).abs());
    }

    let mut overlap = Law::new("overlap_states", 1e-8);
    let mut overlap_p = Law::new("overlap_projector", 1e-8);
    for (i, hi) in subs.iter().enumerate() {
        for (j, hj) in subs.iter().enumerate() {
            let gamma = cosetlab_core::group::intersection_size(hi, hj)? as f64;
            overlap.record((states::overlap(&rhos[i], &rhos[j])? - gamma / n).abs());
            // tr(P_H ρ_H') = (|G|/|H|) tr(ρ_H ρ_H') = γ/|H|
            overlap_p.record((linop::trace_of_product(&projectors[i], rhos[j].operator())?.re - gamma / hi.order() as f64).abs());
        }
    }

    // measurement laws run on the configured family, else on all nontrivial subgroups
    let fallback;
    let fam = match family {
        Some((_, f)) => f,
        None => {
            let nontrivial: Vec<Subgroup> = subs.iter().filter(|h| !h.is_trivial()).cloned().collect();
            fallback = if nontrivial.is_empty() {
                None
            } else {
                Some(CandidateFamily::new(group.clone(), nontrivial, FamilyKind::Explicit)?)
            };
            match &fallback {
                Some(f) => f,
                None => {
                    return Ok(finish_verify(group, subs.len(), None, vec![rank, norm, trace, psd, outer, standard, support, overlap, overlap_p]));
                }
            }
        }
    };
    let mut completeness = Law::new("pgm_completeness", 1e-8);
    let mut acceptance = Law::new("tcs_acceptance", 1e-8);
    let mut helstrom = Law::new("helstrom_identity", 1e-8);
    for povm in [measurements::pgm_projective(fam, 1, st)?, measurements::tcs_projector_povm(fam, 1, st)?] {
        completeness.record(povm_completeness(&povm));
    }
    let tcs = measurements::tcs_projector_povm(fam, 1, st)?;
    let mixed = states::maximally_mixed(group, 1, st)?;
    for h in fam.subgroups() {
        let rho = states::coset_state(h, st)?;
        let p = measurements::measure(&tcs, &rho)?.probability(measurements::NONTRIVIAL_LABEL).unwrap_or(0.0);
        acceptance.record((p - 1.0).abs());
        let (povm, value) = measurements::helstrom(&rho, &mixed, st)?;
        let achieved = measurements::binary_success(&povm, rho.operator(), mixed.operator())?;
        helstrom.record((achieved - value).abs());
    }
    let label = family.map(|(text, _)| text.to_string());
    Ok(finish_verify(
        group,
        subs.len(),
        label,
        vec![rank, norm, trace, psd, outer, standard, support, overlap, overlap_p, completeness, acceptance, helstrom],
    ))
}

fn povm_completeness(povm: &Povm) -> f64 {
    let mut sum = HermitianOperator::zeros(povm.dim());
    for e in povm.elements() {
        sum.add_assign_scaled(e, 1.0);
    }
    sum.max_deviation(&HermitianOperator::identity(povm.dim()))
}

fn finish_verify(group: &FiniteGroup, subgroups: usize, family: Option<String>, laws: Vec<Law>) -> VerifyReport {
    let laws: Vec<LawResult> = laws.into_iter().map(Law::finish).collect();
    VerifyReport {
        group: group.recipe().to_string(),
        group_order: group.order(),
        subgroups,
        family,
        passed: laws.iter().all(|l| l.passed),
        laws,
    }
}

fn verify(cfg: &RunConfig) -> Result<RunOutput> {
    let group = recipes::build_group(cfg.group.as_deref().unwrap_or_default(), cfg.settings.dense_cap)?;
    let family = match &cfg.family {
        Some(text) => Some((text.as_str(), recipes::build_family(&group, text)?)),
        None => None,
    };
    let report = verify_report(&group, family.as_ref().map(|(t, f)| (*t, f)), &cfg.settings)?;
    let artifact = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("law,cases,worst_deviation,tolerance,status\n");
            for l in &report.laws {
                let status = if l.passed { "pass" } else { "fail" };
                let _ = writeln!(s, "{},{},{},{},{status}", l.law, l.cases, num(l.worst_deviation), num(l.tolerance));
            }
            s
        }
    };
    let passed = report.laws.iter().filter(|l| l.passed).count();
    Ok(RunOutput {
        artifact,
        summary: format!(
            "verify {}: {} subgroups, {passed}/{} laws pass",
            report.group,
            report.subgroups,
            report.laws.len()
        ),
        success: report.passed,
    })
}

/// Sweep rows computed on `workers` threads and returned in `k` order.
pub fn parallel_sweep(family: &CandidateFamily, options: &SweepOptions, workers: usize) -> Result<Vec<BoundReport>> {
    options.validate()?;
    let dec = bounds::sweep_decomposition(family, options)?;
    let ks: Vec<u32> = (options.k_min..=options.k_max).collect();
    let workers = workers.clamp(1, ks.len());
    let mut results: BTreeMap<u32, Result<BoundReport>> = BTreeMap::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ks: Vec<u32> = ks.iter().copied().skip(w).step_by(workers).collect();
                let dec = dec.as_ref();
                scope.spawn(move || {
                    ks.into_iter()
                        .map(|k| (k, bounds::bound_report(family, k, options, dec)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            results.extend(h.join().expect("sweep worker panicked"));
        }
    });
    results.into_values().collect()
}

pub const SWEEP_HEADER: &str = "k,csi_success_cap,pgm_error_bound,tcs_tracenorm_bound,tcs_error_bound,measured_pgm_success,measured_tcs_advantage,measured_tcs_error,flags";

pub fn sweep_csv(rows: &[BoundReport]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            num(r.csi_success_cap),
            num(r.pgm_error_bound),
            opt_num(r.tcs_tracenorm_bound),
            num(r.tcs_error_bound),
            opt_num(r.measured_pgm_success),
            opt_num(r.measured_tcs_advantage),
            opt_num(r.measured_tcs_error),
            r.flag_string()
        );
    }
    s
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    command: &'static str,
    family: FamilyDescriptor,
    sample_count_check: Option<SampleCountCheck>,
    rows: &'a [BoundReport],
}

fn sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let group = recipes::build_group(cfg.group.as_deref().unwrap_or_default(), cfg.settings.dense_cap)?;
    let spec = recipes::parse_family(&group, cfg.family.as_deref().unwrap_or_default())?;
    let family = candidate_family(&group, &spec)?;
    let csi = cfg.command == Command::CsiSweep;
    let mut options = SweepOptions::new(cfg.k_min, cfg.k_max);
    options.route = cfg.route;
    options.seed = cfg.seed;
    options.settings = cfg.settings;
    options.measure_pgm = csi;
    options.measure_tcs = !csi;
    let rows = parallel_sweep(&family, &options, cfg.workers)?;
    let check = bounds::sample_count_check(&family)?;
    let violations = rows.iter().filter(|r| r.flags.contains(&Flag::CapViolation)).count();
    let success = violations == 0 && check.is_none_or(|c| c.holds);
    let name = if csi { "csi-sweep" } else { "tcs-sweep" };
    let artifact = match cfg.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&SweepDocument {
            command: name,
            family: FamilyDescriptor::of(&family),
            sample_count_check: check,
            rows: &rows,
        }),
    };
    Ok(RunOutput {
        artifact,
        summary: format!(
            "{name} on {} ({} candidates): {} rows, {violations} cap violations",
            group.recipe(),
            family.len(),
            rows.len()
        ),
        success,
    })
}

fn qes_security(cfg: &RunConfig) -> Result<RunOutput> {
    let params = QesParams::new(cfg.n, cfg.m)?;
    let reports: Vec<SecurityReport> = (cfg.k_min..=cfg.k_max)
        .map(|k| qes::indistinguishability_norms(params, k, cfg.seed, &cfg.settings))
        .collect::<Result<_>>()?;
    let success = reports.iter().all(SecurityReport::all_hold);
    let artifact = match cfg.format {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = String::from("n,m,k,l_0,l_max_deviation,pairwise_max,bound,bound_vacuous,key_count,stirling_estimate,status\n");
            for r in &reports {
                let pairwise = r.pairwise.iter().map(|p| p.norm).fold(0.0f64, f64::max);
                let status = if r.all_hold() { "pass" } else { "fail" };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{status}",
                    r.params.n,
                    r.params.m,
                    r.k,
                    num(r.l_0),
                    num(r.symmetry_deviation),
                    num(pairwise),
                    num(r.bound),
                    r.bound_vacuous,
                    r.key_count,
                    num(r.stirling_estimate)
                );
            }
            s
        }
    };
    Ok(RunOutput {
        artifact,
        summary: format!(
            "qes-security (n={}, m={}) k={}..={}: {}",
            params.n,
            params.m,
            cfg.k_min,
            cfg.k_max,
            if success { "all checks hold" } else { "a check failed" }
        ),
        success,
    })
}

/// Witness tolerance of the randomized operator-inequality check.
pub const HN_TOL: f64 = 1e-9;

fn hn_check(cfg: &RunConfig) -> Result<RunOutput> {
    let summary: HnSummary = bounds::hn_trials(cfg.seed, cfg.trials, cfg.dim_min, cfg.dim_max, HN_TOL, &cfg.settings)?;
    let artifact = match cfg.format {
        Format::Json => to_json(&summary),
        Format::Csv => format!(
            "trials,passed,min_witness,dim_min,dim_max,seed\n{},{},{},{},{},{}\n",
            summary.trials,
            summary.passed,
            num(summary.min_witness),
            summary.dim_min,
            summary.dim_max,
            summary.seed
        ),
    };
    Ok(RunOutput {
        artifact,
        summary: format!(
            "{}/{} passed, min witness {} (threshold -{HN_TOL:e})",
            summary.passed,
            summary.trials,
            num(summary.min_witness)
        ),
        success: summary.all_passed(),
    })
}
