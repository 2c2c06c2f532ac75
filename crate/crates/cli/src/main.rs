use std::path::PathBuf;
use std::process::ExitCode;

use calabi_cli::{
    emit, report_csv, run_cf, run_compute, run_experiment, to_json, CfInput, CliError, CliResult, Format, RunConfig,
};
use calabi_core::Execution;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "calabi", version, about = "Calabi invariant computations on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; reports go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute invariants for the configured map.
    Compute(Common),
    /// Run a named experiment: c1-continuity, c0-discontinuity or rigidity.
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Continued-fraction table.
    Cf {
        /// Expand this real number.
        #[arg(long, conflicts_with_all = ["quotients", "power_rule"])]
        alpha: Option<f64>,
        /// Comma-separated partial quotients.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        quotients: Option<Vec<i128>>,
        /// Synthetic quotients a_{n+1} = BASE^{q_n}.
        #[arg(long, value_name = "BASE")]
        power_rule: Option<u32>,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn prepare(common: &Common) -> CliResult<(RunConfig, Execution)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.output.dir = common.out.clone();
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    let exec = configure_workers(cfg.workers)?;
    Ok((cfg, exec))
}

#[cfg(feature = "parallel")]
fn configure_workers(workers: Option<usize>) -> CliResult<Execution> {
    match workers {
        Some(0) => Err(CliError::Config("workers must be positive".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_workers(workers: Option<usize>) -> CliResult<Execution> {
    match workers {
        Some(0) => Err(CliError::Config("workers must be positive".into())),
        _ => Ok(Execution::Sequential),
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Compute(common) => {
            let (cfg, exec) = prepare(&common)?;
            let report = run_compute(&cfg, exec)?;
            emit(&cfg.output, "report", &to_json(&report), &report_csv(&report))?;
            Ok(report.passed())
        }
        Command::Experiment { name, common } => {
            let (cfg, exec) = prepare(&common)?;
            let result = run_experiment(&name, &cfg, exec)?;
            emit(&cfg.output, &name, &to_json(&result), &result.to_csv())?;
            eprintln!("{}: {}", result.name, if result.pass { "PASS" } else { "FAIL" });
            Ok(true)
        }
        Command::Cf {
            alpha,
            quotients,
            power_rule,
            depth,
            out,
            format,
        } => {
            let input = match (alpha, quotients, power_rule) {
                (Some(a), None, None) => CfInput::Alpha(a),
                (None, Some(q), None) => CfInput::Quotients(q),
                (None, None, Some(b)) => CfInput::PowerRule(b),
                _ => return Err(CliError::Config("give exactly one of --alpha, --quotients, --power-rule".into())),
            };
            let table = run_cf(&input, depth)?;
            let output = calabi_cli::OutputConfig {
                dir: out,
                format: format.unwrap_or(Format::Csv),
                stem: None,
            };
            emit(&output, "cf", &to_json(&table), &table.to_csv())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
