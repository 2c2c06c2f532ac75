//! Configuration loading and command execution for the `calabi` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use calabi_core::arithmetic::{best_approx_check, classify, continued_fraction, from_quotients, power_rule, ContinuedFraction};
use calabi_core::calabi::{compute_report, Budgets, CalabiReport, Computation};
use calabi_core::experiments::{
    exp_c0_discontinuity, exp_c1_continuity, exp_rigidity, C0Config, C1Config, ExperimentResult, RigidityConfig,
};
use calabi_core::mapzoo::FamilySpec;
use calabi_core::{CalabiError, Execution};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {}", .0.name(), .0)]
    Numerical(#[from] CalabiError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Config(_) | CliError::Io { .. } => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for report files; standard output when absent.
    pub dir: Option<PathBuf>,
    pub format: Format,
    /// File name stem; defaults to the command name.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfigs {
    pub c1_continuity: C1Config,
    pub c0_discontinuity: C0Config,
    pub rigidity: RigidityConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Required for any Monte Carlo computation.
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub map: Option<FamilySpec>,
    pub computations: Vec<Computation>,
    pub budgets: Budgets,
    pub output: OutputConfig,
    pub experiments: ExperimentConfigs,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn require_seed(&self, what: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("{what} draws random samples and needs a seed")))
    }

    fn validate_budgets(&self) -> CliResult<()> {
        let b = &self.budgets;
        let counts = [
            ("pairs", b.pairs),
            ("grid.radial", b.grid.radial),
            ("grid.angular", b.grid.angular),
            ("radial_nodes", b.radial_nodes),
            ("time_nodes", b.time_nodes),
            ("rho_iterates", b.rho_iterates),
            ("measure_samples", b.measure_samples),
            ("c_mu_points", b.c_mu_points),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::Config(format!("budget {name} must be positive")));
        }
        if b.tol_area.is_nan() || b.tol_area <= 0.0 {
            return Err(CliError::Config("budget tol_area must be positive".into()));
        }
        Ok(())
    }
}

/// Runs the selected computations on the configured map.
pub fn run_compute(config: &RunConfig, exec: Execution) -> CliResult<CalabiReport> {
    let spec = config
        .map
        .as_ref()
        .ok_or_else(|| CliError::Config("compute needs a [map] table".into()))?;
    config.validate_budgets()?;
    let selection = if config.computations.is_empty() {
        Computation::ALL.to_vec()
    } else {
        config.computations.clone()
    };
    let random = [Computation::Cal2, Computation::VerifyLink, Computation::CMu];
    let mut budgets = config.budgets;
    if selection.iter().any(|c| random.contains(c)) {
        budgets.seed = config.require_seed("the selected computation")?;
    } else if let Some(seed) = config.seed {
        budgets.seed = seed;
    }
    budgets.exec = exec;
    let bundle = spec.build().map_err(|e| CliError::Config(format!("map: {}: {e}", e.name())))?;
    Ok(compute_report(&bundle, &selection, &budgets)?)
}

pub const EXPERIMENTS: [&str; 3] = ["c1-continuity", "c0-discontinuity", "rigidity"];

pub fn run_experiment(name: &str, config: &RunConfig, exec: Execution) -> CliResult<ExperimentResult> {
    let ex = &config.experiments;
    match name {
        "c1-continuity" => {
            let cfg = C1Config {
                seed: config.require_seed(name)?,
                ..ex.c1_continuity.clone()
            };
            cfg.base
                .field()
                .map_err(|e| CliError::Config(format!("base: {}: {e}", e.name())))?;
            Ok(exp_c1_continuity(&cfg, exec)?)
        }
        "c0-discontinuity" => {
            if let Some(n) = ex.c0_discontinuity.ns.iter().find(|&&n| n < 2) {
                return Err(CliError::Config(format!("bump index {n} is below 2")));
            }
            Ok(exp_c0_discontinuity(&ex.c0_discontinuity, exec)?)
        }
        "rigidity" => {
            let cfg = RigidityConfig {
                seed: config.require_seed(name)?,
                ..ex.rigidity.clone()
            };
            cfg.conjugator
                .field()
                .map_err(|e| CliError::Config(format!("conjugator: {}: {e}", e.name())))?;
            Ok(exp_rigidity(&cfg, exec)?)
        }
        other => Err(CliError::Config(format!(
            "unknown experiment {other:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

/// Source of a continued-fraction table.
#[derive(Debug, Clone, PartialEq)]
pub enum CfInput {
    Alpha(f64),
    Quotients(Vec<i128>),
    /// `a_{n+1} = base^{q_n}`.
    PowerRule(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfRow {
    pub n: usize,
    pub a: String,
    pub p: String,
    pub q: String,
    /// `ln q_{n+1} / q_n`.
    pub growth: Option<f64>,
    pub running_sum: Option<f64>,
    pub lower: Option<f64>,
    pub signed_error: Option<f64>,
    pub upper: Option<f64>,
    pub holds: Option<bool>,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfTable {
    pub alpha: Option<f64>,
    pub rows: Vec<CfRow>,
    pub terminated: bool,
    pub truncated: bool,
    pub labels: Vec<String>,
    pub caveat: Option<String>,
}

impl CfTable {
    pub const CSV_COLUMNS: [&'static str; 11] = [
        "n", "a", "p", "q", "growth", "running_sum", "lower", "signed_error", "upper", "holds", "reliable",
    ];

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        let mut out = Self::CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.a,
                r.p,
                r.q,
                opt(r.growth),
                opt(r.running_sum),
                opt(r.lower),
                opt(r.signed_error),
                opt(r.upper),
                r.holds.map_or(String::new(), |b| b.to_string()),
                r.reliable
            );
        }
        out
    }

    pub fn label(&self) -> &str {
        self.labels.last().map_or("inconclusive", String::as_str)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn run_cf(input: &CfInput, depth: usize) -> CliResult<CfTable> {
    let bad = |e: CalabiError| CliError::Config(format!("{}: {e}", e.name()));
    let (cf, alpha): (ContinuedFraction, Option<f64>) = match input {
        CfInput::Alpha(a) => (continued_fraction(*a, depth).map_err(bad)?, Some(*a)),
        CfInput::Quotients(q) => (from_quotients(q).map_err(bad)?, None),
        CfInput::PowerRule(b) => (power_rule(*b, depth).map_err(bad)?, None),
    };
    let checks = alpha.map(|a| best_approx_check(&cf, a));
    let class = classify(&cf).ok();
    let rows = (0..cf.depth())
        .map(|n| {
            let check = checks.as_ref().map(|c| c[n]);
            CfRow {
                n,
                a: cf.a[n].to_string(),
                p: cf.p.get(n).map_or(String::new(), |v| v.to_string()),
                q: cf.q.get(n).map_or(String::new(), |v| v.to_string()),
                growth: class.as_ref().and_then(|c| c.ratios.get(n).copied()),
                running_sum: class.as_ref().and_then(|c| c.running_sum.get(n).copied()),
                lower: check.and_then(|c| finite(c.lower)),
                signed_error: check.map(|c| c.signed_error),
                upper: check.and_then(|c| finite(c.upper)),
                holds: check.and_then(|c| c.holds),
                reliable: cf.reliable.get(n).copied().unwrap_or(false),
            }
        })
        .collect();
    Ok(CfTable {
        alpha,
        rows,
        terminated: cf.terminated,
        truncated: cf.truncated,
        labels: class
            .as_ref()
            .map(|c| c.labels.iter().map(|l| l.as_str().to_string()).collect())
            .unwrap_or_default(),
        caveat: class.map(|c| c.caveat),
    })
}

/// Writes `<stem>.json` and/or `<stem>.csv` into `dir`, or prints to stdout when `dir` is `None`.
pub fn emit(output: &OutputConfig, stem: &str, json: &str, csv: &str) -> CliResult<Vec<PathBuf>> {
    let stem = output.stem.as_deref().unwrap_or(stem);
    let parts: Vec<(&str, &str)> = match output.format {
        Format::Json => vec![("json", json)],
        Format::Csv => vec![("csv", csv)],
        Format::Both => vec![("json", json), ("csv", csv)],
    };
    let Some(dir) = &output.dir else {
        for (_, text) in parts {
            print!("{text}");
        }
        return Ok(Vec::new());
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for (ext, text) in parts {
        let path = dir.join(format!("{stem}.{ext}"));
        fs::write(&path, text).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn report_csv(report: &CalabiReport) -> String {
    format!("{}\n{}\n", CalabiReport::csv_header(), report.csv_row())
}
