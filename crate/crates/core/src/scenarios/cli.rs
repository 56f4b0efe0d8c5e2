//! `gcsieve` command line.
//!
//! Exit codes: 0 when the verdict passes (or a plain computation succeeds),
//! 2 when a verdict fails, 1 on usage, configuration or I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use super::config::ScenarioConfig;
use super::model_file::{load_model, load_state};
use super::output::{round_floats, write_atomic};
use super::{run_scenario, SCENARIO_IDS};
use crate::error::{Error, Result};
use crate::gcs::GcsManifold;
use crate::liealg::{fock_isometry, RepKind, RepSpec};
use crate::lindblad::purity_trace;
use crate::policy::NumericPolicy;
use crate::sieve::{sieve_search_with, Objective, SieveConfig};
use crate::structure::{decompose, dfs_extract};
use crate::uncertainty::verify_theorem1;

/// Output directory override.
pub const OUT_DIR_ENV: &str = "GCSPS_OUT_DIR";
/// Worker thread override.
pub const THREADS_ENV: &str = "GCSPS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gcsieve", version, about = "Pointer states, coherent states and purity loss in Lindblad dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Rate,
    Average,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a configured scenario and write its verdict and tables.
    Scenario {
        /// One of theorem2, squeezing, theorem3, qome, dfs_ns.
        id: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: $GCSPS_OUT_DIR/<id> or out/<id>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize purity loss over pure states of a model.
    Sieve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Rate)]
        objective: ObjectiveArg,
        /// Averaging time for the average objective.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 64)]
        n_steps: usize,
        #[arg(long, default_value_t = NumericPolicy::STANDARD.sieve_default_starts)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bosonic models: starts use occupations up to this value.
        #[arg(long, default_value_t = 3)]
        start_max_occupation: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a pure state and tabulate its purity.
    Evolve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the invariant-uncertainty bound on random states.
    Uncertainty {
        /// Representation, e.g. spin:3/2, boson:10, squeeze:30, collective:4.
        #[arg(long)]
        rep: String,
        #[arg(long, default_value_t = 10_000)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decoherence-free subspace of a model.
    Dfs {
        #[arg(long)]
        model: PathBuf,
    },
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
    }
}

fn out_dir(explicit: Option<PathBuf>, leaf: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
        base.join(leaf)
    })
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    round_floats(&mut v, NumericPolicy::STANDARD.output_significant_digits);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
            let p = write_atomic(&dir.join(file), text.as_bytes())?;
            println!("wrote {}", p.display());
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Scenario { id, config, out } => {
            let id = id.replace('-', "_");
            if !SCENARIO_IDS.contains(&id.as_str()) {
                return Err(Error::Config(format!("unknown scenario `{id}` (expected one of {})", SCENARIO_IDS.join(", "))));
            }
            let mut cfg = ScenarioConfig::load(&config)?;
            if cfg.id() != id {
                return Err(Error::Config(format!(
                    "{} configures scenario `{}`, not `{id}`",
                    config.display(),
                    cfg.id()
                )));
            }
            if let Some(t) = env_threads()? {
                cfg.set_threads(t);
            }
            let output = run_scenario(&cfg)?;
            let dir = out_dir(out, &id);
            for p in output.write(&dir)? {
                println!("wrote {}", p.display());
            }
            for c in &output.verdict.checks {
                let mark = if c.passed { "ok  " } else if c.informational { "info" } else { "FAIL" };
                let measured = c.measured.map(|m| format!("{m:.6e}")).unwrap_or_default();
                let threshold = c.threshold.map(|t| format!("{t:.3e}")).unwrap_or_default();
                println!("[{mark}] {} {measured} {} {threshold}", c.name, c.relation);
            }
            println!("verdict: {:?}", output.verdict.verdict);
            Ok(if output.verdict.passed() { 0 } else { 2 })
        }
        Command::Sieve { model, objective, tau, n_steps, starts, seed, start_max_occupation, out } => {
            let (model, rep) = load_model(&model)?;
            let objective = match (objective, tau) {
                (ObjectiveArg::Rate, _) => Objective::Rate,
                (ObjectiveArg::Average, Some(tau)) => Objective::Average { tau, n_steps },
                (ObjectiveArg::Average, None) => return Err(Error::Config("--objective average needs --tau".into())),
            };
            let mut sc = SieveConfig::new(starts, seed).with_threads(env_threads()?.unwrap_or(1));
            if let RepKind::Boson { cutoff, modes } = rep.kind() {
                sc = sc
                    .with_search_space(fock_isometry(cutoff, modes, cutoff - 1))
                    .with_start_space(fock_isometry(cutoff, modes, start_max_occupation.min(cutoff - 1)));
            }
            let manifold = GcsManifold::new(&rep).ok();
            let report = sieve_search_with(&model, objective, &sc, manifold.as_ref())?;
            emit(out.as_deref(), "sieve_report.json", &pretty(&report))?;
            if let Some(dir) = out.as_deref() {
                emit(Some(dir), "minimizers.csv", &report.summary_csv(NumericPolicy::STANDARD.output_significant_digits))?;
            }
            Ok(0)
        }
        Command::Evolve { model, state, tmax, steps, out } => {
            if !(tmax >= 0.0 && tmax.is_finite()) || steps == 0 {
                return Err(Error::Config("--tmax must be finite and non-negative and --steps positive".into()));
            }
            let (model, _) = load_model(&model)?;
            let psi = load_state(&state, model.dim())?;
            let times: Vec<f64> = (0..=steps).map(|k| tmax * k as f64 / steps as f64).collect();
            let trace = purity_trace(&model, &psi, &times)?;
            emit(out.as_deref(), "purity_trace.csv", &trace.to_csv(NumericPolicy::STANDARD.output_significant_digits))?;
            Ok(0)
        }
        Command::Uncertainty { rep, random, seed } => {
            let rep = RepSpec::parse_short(&rep)?.build()?;
            let report = verify_theorem1(&rep, random, seed)?;
            emit(None, "", &pretty(&report))?;
            Ok(if report.consistent() { 0 } else { 2 })
        }
        Command::Dfs { model } => {
            let (model, rep) = load_model(&model)?;
            let dfs = dfs_extract(&model)?;
            let basis: Vec<Vec<[f64; 2]>> =
                dfs.vectors().iter().map(|v| v.amplitudes().iter().map(|z| [z.re, z.im]).collect()).collect();
            let blocks = match rep.kind() {
                RepKind::CollectiveSpin { .. } => Some(decompose(&rep)?.blocks),
                _ => None,
            };
            let doc = json!({"model": model.id, "dfs_dim": dfs.dim(), "basis": basis, "blocks": blocks});
            emit(None, "", &pretty(&doc))?;
            Ok(0)
        }
    }
}
