//! Scenario configuration files.
//!
//! Every scenario is configured by a JSON object whose `scenario` field picks
//! the experiment. The seed is mandatory; all PASS/FAIL thresholds live in the
//! `thresholds` object. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::opsalg::C64;

/// Real number or `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    pub fn value(self) -> C64 {
        match self {
            Coefficient::Real(x) => C64::new(x, 0.0),
            Coefficient::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Theorem2(Theorem2Config),
    Squeezing(SqueezingConfig),
    Theorem3(Theorem3Config),
    Qome(QomeConfig),
    DfsNs(DfsNsConfig),
}

impl ScenarioConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ScenarioConfig::Theorem2(_) => "theorem2",
            ScenarioConfig::Squeezing(_) => "squeezing",
            ScenarioConfig::Theorem3(_) => "theorem3",
            ScenarioConfig::Qome(_) => "qome",
            ScenarioConfig::DfsNs(_) => "dfs_ns",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ScenarioConfig::Theorem2(c) => c.seed,
            ScenarioConfig::Squeezing(c) => c.seed,
            ScenarioConfig::Theorem3(c) => c.seed,
            ScenarioConfig::Qome(c) => c.seed,
            ScenarioConfig::DfsNs(c) => c.seed,
        }
    }

    pub fn threads(&self) -> usize {
        match self {
            ScenarioConfig::Theorem2(c) => c.threads,
            ScenarioConfig::Squeezing(c) => c.threads,
            ScenarioConfig::Theorem3(c) => c.threads,
            ScenarioConfig::Qome(c) => c.threads,
            ScenarioConfig::DfsNs(c) => c.threads,
        }
    }

    pub fn set_threads(&mut self, threads: usize) {
        let t = threads.max(1);
        match self {
            ScenarioConfig::Theorem2(c) => c.threads = t,
            ScenarioConfig::Squeezing(c) => c.threads = t,
            ScenarioConfig::Theorem3(c) => c.threads = t,
            ScenarioConfig::Qome(c) => c.threads = t,
            ScenarioConfig::DfsNs(c) => c.threads = t,
        }
    }

    /// Parses and validates a configuration document.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| json_error(origin, text, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    ///
    /// The thread count is excluded: it does not change any result.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.set_threads(1);
        let value = serde_json::to_value(&canonical).expect("config serializes");
        let digest = Sha256::digest(value.to_string().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let nonneg = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be a finite non-negative number, got {x}")))
            }
        };
        let starts = |n: usize| -> Result<()> {
            if n < 8 {
                Err(Error::Config(format!("n_starts must be at least 8, got {n}")))
            } else {
                Ok(())
            }
        };
        match self {
            ScenarioConfig::Theorem2(c) => {
                nonneg("gamma", c.gamma)?;
                starts(c.n_starts)?;
                for m in &c.nondegenerate_modes {
                    if !(m.omega > 0.0) {
                        return bad(format!("mode frequency must be positive, got {}", m.omega));
                    }
                }
                if c.nondegenerate_modes.len() != 2 {
                    return bad("nondegenerate_modes must list exactly two modes".into());
                }
                if (c.nondegenerate_modes[0].omega - c.nondegenerate_modes[1].omega).abs() < 1e-12 {
                    return bad("nondegenerate_modes must have distinct frequencies".into());
                }
                let guard = (c.two_mode_cutoff as f64).sqrt() / 3.0;
                if !(c.ccs_probe_amplitude >= 0.0 && c.ccs_probe_amplitude <= guard) {
                    return bad(format!("ccs_probe_amplitude must lie in [0, {guard}], got {}", c.ccs_probe_amplitude));
                }
            }
            ScenarioConfig::Squeezing(c) => {
                nonneg("gamma", c.gamma)?;
                starts(c.n_starts)?;
                if !(c.brownian.omega > 0.0) {
                    return bad(format!("omega must be positive, got {}", c.brownian.omega));
                }
                if c.brownian.t_grid.is_empty() {
                    return bad("t_grid must not be empty".into());
                }
            }
            ScenarioConfig::Theorem3(c) => {
                starts(c.n_starts)?;
                for (k, &g) in c.unbalanced_rates.iter().enumerate() {
                    nonneg(&format!("unbalanced_rates[{k}]"), g)?;
                }
            }
            ScenarioConfig::Qome(c) => {
                nonneg("gamma1", c.gamma1)?;
                nonneg("balance", c.balance)?;
                starts(c.n_starts)?;
                for p in &c.sweep {
                    nonneg("nbar", p.nbar)?;
                    if c.gamma1 == 0.0 && p.nbar > 0.0 {
                        return bad(format!("gamma1 = 0 is inconsistent with nbar = {}", p.nbar));
                    }
                }
                nonneg("trajectory.nbar", c.trajectory.nbar)?;
                if !(c.trajectory.t_max > 0.0) || c.trajectory.steps == 0 {
                    return bad("trajectory needs t_max > 0 and steps > 0".into());
                }
            }
            ScenarioConfig::DfsNs(c) => {
                nonneg("gamma", c.gamma)?;
                if !(1..=4).contains(&c.sites) {
                    return bad(format!("sites must be between 1 and 4, got {}", c.sites));
                }
                if c.evolve_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return bad("evolve_times must be finite and non-negative".into());
                }
            }
        }
        Ok(())
    }
}

/// Maps a serde error to [`Error::Json`], quoting the offending line.
pub(crate) fn json_error(origin: &str, text: &str, e: &serde_json::Error) -> Error {
    // Tagged enums deserialize from a buffer and lose positions; recover the
    // line from the first quoted name in the message.
    let (line, column) = match e.line() {
        0 => locate_quoted(text, &e.to_string()).unwrap_or((0, 0)),
        l => (l, e.column()),
    };
    let snippet = text.lines().nth(line.saturating_sub(1)).unwrap_or("").trim_end();
    Error::Json { path: origin.into(), line, column, message: format!("{e}\n  {line:>4} | {snippet}") }
}

/// 1-based position of the key named between backticks in `message`.
fn locate_quoted(text: &str, message: &str) -> Option<(usize, usize)> {
    let name = message.split('`').nth(1)?;
    let key = format!("\"{name}\"");
    text.lines().enumerate().find_map(|(i, l)| l.find(&key).map(|c| (i + 1, c + 1)))
}

fn one() -> f64 {
    1.0
}

fn default_threads() -> usize {
    1
}

fn default_ccs_probe_amplitude() -> f64 {
    0.5
}

fn default_grad_tol() -> f64 {
    crate::policy::NumericPolicy::STANDARD.sieve_grad_tol
}

fn default_starts() -> usize {
    crate::policy::NumericPolicy::STANDARD.sieve_default_starts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub omega: f64,
    /// Coefficient of `a_i` in the mode's damping operator.
    pub c: Coefficient,
    /// Coefficient of `a_i†` in the mode's excitation operator.
    pub d: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Thresholds {
    /// Largest acceptable global minimum for models with a dark CCS.
    pub min_value: f64,
    pub gcs_infidelity: f64,
    /// Pointwise tolerance of the single-mode decomposition of the objective.
    pub identity: f64,
    /// The squeezed probe must beat the CCS by more than this.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Config {
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    pub single_mode_cutoff: usize,
    pub two_mode_cutoff: usize,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    /// Starts are drawn on Fock states with every occupation at most this.
    pub start_max_occupation: usize,
    pub two_mode_start_max_occupation: usize,
    pub nondegenerate_modes: Vec<ModeSpec>,
    #[serde(default = "one")]
    pub degenerate_omega: f64,
    /// Squeezing parameter `r` of the two-mode squeezed probe.
    pub probe_squeezing: f64,
    /// Per-mode |η| of the coherent state compared against the squeezed probe.
    #[serde(default = "default_ccs_probe_amplitude")]
    pub ccs_probe_amplitude: f64,
    pub n_random: usize,
    pub thresholds: Theorem2Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianSpec {
    pub cutoff: usize,
    pub omega: f64,
    pub c: Coefficient,
    pub d: Coefficient,
    pub t_grid: Vec<f64>,
    /// Quadrature nodes for the average over one period `2π/ω`.
    pub period_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingThresholds {
    pub min_value: f64,
    /// Agreement of the matrix quasivariance with the series oracle.
    pub series: f64,
    pub vacuum_infidelity: f64,
    pub quasivariance: f64,
    pub tanh_r: f64,
    pub phase: f64,
    pub ccs_infidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingConfig {
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    pub cutoff: usize,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    pub start_max_occupation: usize,
    /// Coherent amplitudes probed against the series oracle in part (a).
    pub eta_probes: Vec<f64>,
    pub brownian: BrownianSpec,
    pub thresholds: SqueezingThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem3Thresholds {
    /// Relative deviation of the ratio from `2|λ|²`.
    pub ratio: f64,
    pub min_value: f64,
    pub gcs_infidelity: f64,
    /// The counterexample must exhibit a zero-rate minimizer at least this far
    /// from the coherent-state manifold.
    pub counterexample_infidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem3Config {
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub j: f64,
    pub lambda: Coefficient,
    pub n_random: usize,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    /// Rates `(γ_x, γ_y, γ_z)` of the unbalanced model `L_a = √γ_a J_a`.
    pub unbalanced_rates: [f64; 3],
    pub thresholds: Theorem3Thresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QomePoint {
    pub nbar: f64,
    pub expect_proportional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QomeTrajectory {
    /// Thermal occupation of the high-temperature (unital) model.
    pub nbar: f64,
    pub t_max: f64,
    pub steps: usize,
    pub n_initial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QomeThresholds {
    /// Largest `(max − min)/mean` of the ratio counted as proportional.
    pub ratio_spread: f64,
    /// Minimizers within this of the global minimum count as global.
    pub value_slack: f64,
    pub ground_infidelity: f64,
    pub gcs_infidelity: f64,
    /// Distance of the final purity from `1/2`.
    pub final_purity: f64,
    /// Allowed increase between consecutive purity samples.
    pub monotone: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QomeConfig {
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub gamma1: f64,
    /// `γ₂ = balance · n̄ γ₁` at every sweep point.
    pub balance: f64,
    pub sweep: Vec<QomePoint>,
    pub n_random: usize,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    /// Projected-gradient stopping tolerance of the sieve. The zero-temperature
    /// minimum is quartic, so locating it to a given infidelity needs a
    /// tighter gradient than the default.
    #[serde(default = "default_grad_tol")]
    pub sieve_grad_tol: f64,
    pub trajectory: QomeTrajectory,
    pub thresholds: QomeThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfsNsExpected {
    /// `(j label, multiplicity)` pairs, descending in `j`.
    pub multiplicities: Vec<(String, usize)>,
    pub dfs_dim: usize,
    pub ns_j: f64,
    pub ns_dim: usize,
    pub noisy_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfsNsThresholds {
    pub zero: f64,
    pub min_uncertainty: f64,
    pub stationarity: f64,
    pub factorization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfsNsConfig {
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub sites: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    /// Times (in units of `1/γ`) at which DFS states are checked for drift.
    pub evolve_times: Vec<f64>,
    pub expected: Option<DfsNsExpected>,
    pub thresholds: DfsNsThresholds,
}
