//! Configured experiments, their verdict records and the command-line
//! front end.

pub mod cli;
mod config;
mod dfs_ns;
pub mod model_file;
mod output;
mod qome;
mod squeezing;
mod theorem2;
mod theorem3;

pub use config::*;
pub use dfs_ns::scenario_dfs_ns;
pub use output::{round_floats, write_atomic, Check, ScenarioOutput, Status, Table, Verdict};
pub use qome::scenario_qome;
pub use squeezing::scenario_squeezing;
pub use theorem2::scenario_theorem2;
pub use theorem3::scenario_theorem3;

use crate::error::Result;
use crate::liealg::fock_isometry;
use crate::opsalg::{CMatrix, PureState};
use crate::policy::NumericPolicy;
use crate::sieve::{SieveConfig, SieveReport};
use crate::SeededRng;

/// Scenario identifiers accepted on the command line.
pub const SCENARIO_IDS: [&str; 5] = ["theorem2", "squeezing", "theorem3", "qome", "dfs_ns"];

/// Runs whichever scenario the configuration selects.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    match config {
        ScenarioConfig::Theorem2(c) => scenario_theorem2(c),
        ScenarioConfig::Squeezing(c) => scenario_squeezing(c),
        ScenarioConfig::Theorem3(c) => scenario_theorem3(c),
        ScenarioConfig::Qome(c) => scenario_qome(c),
        ScenarioConfig::DfsNs(c) => scenario_dfs_ns(c),
    }
}

fn digits() -> usize {
    NumericPolicy::STANDARD.output_significant_digits
}

/// Sieve settings confined to Fock states with every occupation at most
/// `cutoff − 1` (where the truncated `a†` is exact), starting from
/// occupations at most `start_max`.
fn guarded_sieve(cutoff: usize, modes: usize, start_max: usize, n_starts: usize, seed: u64, threads: usize) -> SieveConfig {
    SieveConfig::new(n_starts, seed)
        .with_search_space(fock_isometry(cutoff, modes, cutoff - 1))
        .with_start_space(fock_isometry(cutoff, modes, start_max.min(cutoff - 1)))
        .with_threads(threads)
}

/// Haar-random state on the span of an isometry's columns.
fn random_in(isometry: &CMatrix, rng: &mut SeededRng) -> PureState {
    let u = PureState::haar_random(isometry.ncols(), rng);
    PureState::embed(isometry, &u)
}

/// `(max − min) / mean` of a sample.
fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean.abs()
}

/// Largest manifold distance among all minimizers (0 when none was computed).
fn max_gcs_infidelity(report: &SieveReport) -> f64 {
    report.minimizers.iter().filter_map(|m| m.gcs_infidelity).fold(0.0, f64::max)
}

/// `case,rank,value,gcs_infidelity` rows for a minimizer table.
fn minimizer_rows(case: &str, report: &SieveReport, out: &mut String) {
    for (k, m) in report.minimizers.iter().enumerate() {
        let inf = m.gcs_infidelity.map(|x| crate::lindblad::fmt_sig(x, digits())).unwrap_or_default();
        out.push_str(&format!("{case},{k},{},{inf}\n", crate::lindblad::fmt_sig(m.value, digits())));
    }
}

const MINIMIZER_HEADER: &str = "case,rank,value,gcs_infidelity\n";
