//! `cjsim`: Monte-Carlo sweeps, MM convergence traces, plot data and the
//! oracle check for the cooperative-jamming secrecy-rate solvers.
//!
//! Exit codes: 0 on success, 2 on a configuration or usage error (including
//! an unwritable output directory, detected before any solving), 3 when a
//! solver fails or the oracle check does not pass.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cj_ofdm::experiment::{
    emit_plotdata, parse_schemes, prepare_output_dir, read_results, run_convergence_trace, run_oracle_check, run_sweep,
    summarize, write_oracle_rows, write_results, write_summary, write_traces, ExperimentConfig, Metric, PlotSpec,
};
use cj_ofdm::{Error, Execution, ReceiverType};

#[derive(Parser)]
#[command(name = "cjsim", version, about = "Secrecy-rate experiments for wireless-powered cooperative jamming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep; writes results.csv and summary.csv.
    Sweep(Common),
    /// MM objective per iteration; writes trace.csv.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Fixed time split (defaults to trace_alpha2 from the config).
        #[arg(long)]
        alpha2: Option<f64>,
        /// Jammer distance in metres (defaults to trace_d_sj).
        #[arg(long)]
        d_sj: Option<f64>,
    },
    /// Mean and standard-error series from a results table.
    Plotdata {
        /// results.csv written by `sweep`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "secrecy_rate")]
        metric: String,
        /// Comma-separated schemes to keep (default: all in the table).
        #[arg(long)]
        schemes: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Optimal inner solver against brute force on small instances; writes
    /// oracle.csv.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// type1 or type2.
    #[arg(long)]
    receiver: Option<String>,
    /// Comma-separated schemes, e.g. joint-mm,no-cj.
    #[arg(long)]
    schemes: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
}

enum Failure {
    Config(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::EmptySelection(_) => Failure::Config(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

impl Common {
    /// Loads the config, applies the flag overrides, validates, and checks
    /// that the output directory is writable.
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = &self.receiver {
            cfg.receiver = r.parse::<ReceiverType>().map_err(|e| Failure::Config(e.to_string()))?;
        }
        if let Some(s) = &self.schemes {
            cfg.schemes = parse_schemes(s)?;
        }
        if let Some(j) = self.jobs {
            configure_jobs(&mut cfg, j)?;
        }
        cfg.validate()?;
        prepare_output_dir(&self.out)?;
        Ok(cfg)
    }
}

fn configure_jobs(cfg: &mut ExperimentConfig, jobs: usize) -> Result<(), Failure> {
    if jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    if jobs == 1 {
        cfg.execution = Execution::Sequential;
        return Ok(());
    }
    cfg.execution = Execution::Parallel;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot start {jobs} threads: {e}")))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep(common) => {
            let cfg = common.resolve()?;
            let rows = run_sweep(&cfg)?;
            write_results(create(&common.out.join("results.csv"))?, &rows)?;
            let mut summary = summarize(&rows, Metric::SecrecyRate);
            summary.extend(summarize(&rows, Metric::Alpha2));
            write_summary(create(&common.out.join("summary.csv"))?, &summary)?;
            eprintln!("{} rows written to {}", rows.len(), common.out.display());
        }
        Command::Trace { common, alpha2, d_sj } => {
            let cfg = common.resolve()?;
            let series =
                run_convergence_trace(&cfg, alpha2.unwrap_or(cfg.trace_alpha2), d_sj.unwrap_or(cfg.trace_d_sj))?;
            write_traces(create(&common.out.join("trace.csv"))?, &series)?;
        }
        Command::Plotdata { input, metric, schemes, out } => {
            let metric: Metric = metric.parse()?;
            let schemes = schemes.as_deref().map(parse_schemes).transpose()?;
            let file =
                File::open(&input).map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
            let rows = read_results(file).map_err(|e| Failure::Config(e.to_string()))?;
            prepare_output_dir(&out)?;
            for p in emit_plotdata(&rows, &PlotSpec { metric, schemes, out_dir: out })? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::OracleCheck(common) => {
            let cfg = common.resolve()?;
            let rows = run_oracle_check(&cfg)?;
            write_oracle_rows(create(&common.out.join("oracle.csv"))?, &rows)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
            eprintln!(
                "oracle check: {}/{} within {:e} bits, worst {worst:.3e}",
                rows.len() - failed,
                rows.len(),
                cfg.oracle_tol
            );
            if failed > 0 {
                return Err(Failure::Solver(format!("{failed} instance(s) outside tolerance")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
    }
}
