//! Run configuration: a TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cosetlab_core::bounds::Route;
use cosetlab_core::{Error, Result, Settings};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    CsiSweep,
    TcsSweep,
    QesSecurity,
    HnCheck,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    Auto,
    Dense,
    Symmetry,
    Factored,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => Route::Auto,
            RouteArg::Dense => Route::Dense,
            RouteArg::Symmetry => Route::Symmetry,
            RouteArg::Factored => Route::Factored,
        }
    }
}

/// Every configurable value; unset entries fall back to the file, then to defaults.
#[derive(Clone, Debug, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Group recipe, e.g. "kind=dihedral n=6".
    #[arg(long)]
    pub group: Option<String>,
    /// Candidate family: sdp, sym, prime:<p>, conjugates:<g>;…, explicit:<g>;…|<g>….
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub k_min: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Shorthand for --k-min K --k-max K.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Largest dense operator dimension.
    #[arg(long)]
    pub dense_cap: Option<usize>,
    /// Relative eigenvalue cutoff for ranks and supports.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    /// Scheme security parameter.
    #[arg(long)]
    pub n: Option<usize>,
    /// Scheme message length parameter.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub dim_min: Option<usize>,
    #[arg(long)]
    pub dim_max: Option<usize>,
}

impl Options {
    /// Fills every unset field from `base`.
    pub fn or(self, base: Options) -> Options {
        Options {
            group: self.group.or(base.group),
            family: self.family.or(base.family),
            k_min: self.k_min.or(base.k_min),
            k_max: self.k_max.or(base.k_max),
            k: self.k.or(base.k),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            dense_cap: self.dense_cap.or(base.dense_cap),
            tol: self.tol.or(base.tol),
            workers: self.workers.or(base.workers),
            route: self.route.or(base.route),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            trials: self.trials.or(base.trials),
            dim_min: self.dim_min.or(base.dim_min),
            dim_max: self.dim_max.or(base.dim_max),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cosetlab", version, about = "Coset-state discrimination bounds, measured and checked")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check the state, operator and measurement laws on every subgroup of a group.
    Verify(Invocation),
    /// Identification caps against the measured PGM, one row per k.
    CsiSweep(Invocation),
    /// Triviality-test caps against the measured support-union test, one row per k.
    TcsSweep(Invocation),
    /// Exact security quantities of the encryption scheme.
    QesSecurity(Invocation),
    /// Randomized check of the operator inequality `I − RSR ⪯ 2(I − S) + 4T`.
    HnCheck(Invocation),
}

#[derive(Debug, Args)]
pub struct Invocation {
    /// TOML file with the same keys as the flags (snake_case); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

impl CliCommand {
    pub fn split(self) -> (Command, Invocation) {
        match self {
            CliCommand::Verify(i) => (Command::Verify, i),
            CliCommand::CsiSweep(i) => (Command::CsiSweep, i),
            CliCommand::TcsSweep(i) => (Command::TcsSweep, i),
            CliCommand::QesSecurity(i) => (Command::QesSecurity, i),
            CliCommand::HnCheck(i) => (Command::HnCheck, i),
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub group: Option<String>,
    pub family: Option<String>,
    pub k_min: u32,
    pub k_max: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub settings: Settings,
    pub workers: usize,
    pub route: Route,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub dim_min: usize,
    pub dim_max: usize,
}

pub fn read_config_file(path: &Path) -> Result<Options> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Usage(format!("bad config file {}: {e}", path.display())))
}

impl RunConfig {
    pub fn from_invocation(command: Command, inv: Invocation) -> Result<Self> {
        let file = match &inv.config {
            Some(p) => read_config_file(p)?,
            None => Options::default(),
        };
        Self::resolve(command, inv.options.or(file))
    }

    pub fn resolve(command: Command, o: Options) -> Result<Self> {
        let usage = |m: String| Err(Error::Usage(m));
        let (default_min, default_max) = match command {
            Command::QesSecurity => (0, 0),
            _ => (1, 3),
        };
        let (k_min, k_max) = match o.k {
            Some(k) => {
                if o.k_min.is_some_and(|v| v != k) || o.k_max.is_some_and(|v| v != k) {
                    return usage("--k conflicts with --k-min/--k-max".into());
                }
                (k, k)
            }
            None => (o.k_min.unwrap_or(default_min), o.k_max.unwrap_or(default_max)),
        };
        if k_min > k_max {
            return usage(format!("k range {k_min}..={k_max} is empty"));
        }
        let mut settings = Settings::default();
        if let Some(c) = o.dense_cap {
            if c == 0 {
                return usage("--dense-cap must be positive".into());
            }
            settings.dense_cap = c;
        }
        if let Some(t) = o.tol {
            if !(t > 0.0 && t < 1.0) {
                return usage(format!("--tol must lie in (0, 1), got {t}"));
            }
            settings.rank_tol = t;
        }
        let workers = o.workers.unwrap_or(1);
        if workers == 0 {
            return usage("--workers must be at least 1".into());
        }
        let cfg = RunConfig {
            command,
            group: o.group,
            family: o.family,
            k_min,
            k_max,
            seed: o.seed.unwrap_or(0),
            out: o.out,
            format: o.format.unwrap_or_default(),
            settings,
            workers,
            route: o.route.map_or(Route::Auto, Route::from),
            n: o.n.unwrap_or(4),
            m: o.m.unwrap_or(2),
            trials: o.trials.unwrap_or(200),
            dim_min: o.dim_min.unwrap_or(2),
            dim_max: o.dim_max.unwrap_or(16),
        };
        match command {
            Command::Verify if cfg.group.is_none() => usage("verify needs --group".into()),
            Command::CsiSweep | Command::TcsSweep if cfg.group.is_none() || cfg.family.is_none() => {
                usage("sweeps need --group and --family".into())
            }
            Command::HnCheck if cfg.dim_min == 0 || cfg.dim_min > cfg.dim_max => {
                usage(format!("dimension range {}..={} is invalid", cfg.dim_min, cfg.dim_max))
            }
            _ => Ok(cfg),
        }
    }
}
