//! Predictability sieve: minimization of purity loss over pure states.
//!
//! Objectives are smooth, phase-invariant functions of the state vector.
//! Minimization is projected gradient descent on the unit sphere with a
//! Barzilai–Borwein trial step and Armijo backtracking; the global phase is
//! fixed after every step by making the largest amplitude real and positive.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gcs::{gcs_distance, GcsManifold};
use crate::lindblad::{average_purity_loss, first_order_lindblad_t, liouvillian, LindbladModel};
use crate::opsalg::{CMatrix, CVector, OperatorMatrix, PureState, C64};
use crate::policy::NumericPolicy;
use crate::seeded_rng;

/// Functional minimized by the sieve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Instantaneous first-order rate `2 Σ_ℓ (ΔL_ℓ)²`.
    Rate,
    /// First-order rate with the Heisenberg-evolved operators `L_ℓ(t)`.
    RateAt { t: f64 },
    /// Mean of [`Objective::RateAt`] over `nodes` equispaced times in `[0, τ)`.
    PeriodAverage { tau: f64, nodes: usize },
    /// Average purity loss `[Π(τ) − Π(0)]/τ` from the full evolution.
    Average { tau: f64, n_steps: usize },
}

/// A smooth phase-invariant function on unit vectors.
pub(crate) trait SphereObjective: Sync {
    fn value(&self, psi: &CVector) -> f64;
    /// Value and gradient with respect to the real embedding of `psi`, so that
    /// the directional derivative along `v` is `Re⟨G, v⟩`.
    fn value_and_gradient(&self, psi: &CVector) -> (f64, CVector);
}

/// `Σ_k w_k (ΔO_k)²`.
pub(crate) struct QuasivarianceSum {
    ops: Vec<OperatorMatrix>,
    weights: Vec<f64>,
}

impl QuasivarianceSum {
    pub(crate) fn new(ops: Vec<OperatorMatrix>, weight: f64) -> Self {
        let weights = vec![weight; ops.len()];
        Self { ops, weights }
    }
}

impl SphereObjective for QuasivarianceSum {
    fn value(&self, psi: &CVector) -> f64 {
        self.ops
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| {
                let ov = o.apply(psi);
                let mean = psi.dotc(&ov);
                w * (ov.norm_squared() - mean.norm_sqr())
            })
            .sum()
    }

    fn value_and_gradient(&self, psi: &CVector) -> (f64, CVector) {
        let mut value = 0.0;
        let mut grad = CVector::zeros(psi.len());
        for (o, &w) in self.ops.iter().zip(&self.weights) {
            let m = o.matrix();
            let ov = m * psi;
            let mean = psi.dotc(&ov);
            let odov = m.ad_mul(&ov);
            let odpsi = m.ad_mul(psi);
            value += w * (ov.norm_squared() - mean.norm_sqr());
            // 2 ∂/∂ψ* of ⟨O†O⟩ − |⟨O⟩|².
            grad += (odov - ov * mean.conj() - odpsi * mean) * C64::new(2.0 * w, 0.0);
        }
        (value, grad)
    }
}

/// `(1 − Tr[Φ(ψψ†)²]) / τ` for a fixed propagator `Φ`.
struct PropagatedPurity {
    propagator: CMatrix,
    tau: f64,
    dim: usize,
}

impl PropagatedPurity {
    fn evolved(&self, psi: &CVector) -> CMatrix {
        let p = psi * psi.adjoint();
        let v = CVector::from_iterator(p.len(), p.iter().cloned());
        CMatrix::from_column_slice(self.dim, self.dim, (&self.propagator * v).as_slice())
    }
}

impl SphereObjective for PropagatedPurity {
    fn value(&self, psi: &CVector) -> f64 {
        let rho = self.evolved(psi);
        (1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>()) / self.tau
    }

    fn value_and_gradient(&self, psi: &CVector) -> (f64, CVector) {
        let rho = self.evolved(psi);
        let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
        let v = CVector::from_iterator(rho.len(), rho.iter().cloned());
        let back = self.propagator.ad_mul(&v);
        let m = CMatrix::from_column_slice(self.dim, self.dim, back.as_slice());
        let grad = (m * psi) * C64::new(-4.0 / self.tau, 0.0);
        ((1.0 - purity) / self.tau, grad)
    }
}

/// Objective pulled back through an isometry `ψ = V u`.
pub(crate) struct Restricted<'a, O: SphereObjective + ?Sized> {
    pub inner: &'a O,
    pub isometry: &'a CMatrix,
}

impl<O: SphereObjective + ?Sized> SphereObjective for Restricted<'_, O> {
    fn value(&self, u: &CVector) -> f64 {
        self.inner.value(&(self.isometry * u))
    }

    fn value_and_gradient(&self, u: &CVector) -> (f64, CVector) {
        let (f, g) = self.inner.value_and_gradient(&(self.isometry * u));
        (f, self.isometry.ad_mul(&g))
    }
}

fn compile(model: &LindbladModel, objective: Objective) -> Result<Box<dyn SphereObjective>> {
    Ok(match objective {
        Objective::Rate => Box::new(QuasivarianceSum::new(model.lindblads().to_vec(), 2.0)),
        Objective::RateAt { t } => Box::new(QuasivarianceSum::new(first_order_lindblad_t(model, t), 2.0)),
        Objective::PeriodAverage { tau, nodes } => {
            if !(tau > 0.0) {
                return Err(Error::NonPositiveTau(tau));
            }
            let nodes = nodes.max(1);
            let ops: Vec<OperatorMatrix> = (0..nodes)
                .flat_map(|k| first_order_lindblad_t(model, tau * k as f64 / nodes as f64))
                .collect();
            Box::new(QuasivarianceSum::new(ops, 2.0 / nodes as f64))
        }
        Objective::Average { tau, .. } => {
            if !(tau > 0.0) {
                return Err(Error::NonPositiveTau(tau));
            }
            Box::new(PropagatedPurity { propagator: liouvillian(model).propagator(tau), tau, dim: model.dim() })
        }
    })
}

/// Objective value at a state.
pub fn evaluate_objective(state: &PureState, model: &LindbladModel, objective: Objective) -> Result<f64> {
    check_dim(state, model)?;
    if let Objective::Average { tau, n_steps } = objective {
        return average_purity_loss(state, model, tau, n_steps);
    }
    Ok(compile(model, objective)?.value(state.amplitudes()))
}

fn check_dim(state: &PureState, model: &LindbladModel) -> Result<()> {
    if state.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: state.dim() });
    }
    Ok(())
}

fn project_tangent(psi: &CVector, g: &CVector) -> CVector {
    g - psi * psi.dotc(g)
}

/// Riemannian gradient of the objective at `state`: the real-embedding
/// gradient projected orthogonally to both `ψ` and `iψ`.
pub fn gradient_of_objective(state: &PureState, model: &LindbladModel, objective: Objective) -> Result<CVector> {
    check_dim(state, model)?;
    let (_, g) = compile(model, objective)?.value_and_gradient(state.amplitudes());
    Ok(project_tangent(state.amplitudes(), &g))
}

/// Outcome of one local minimization.
#[derive(Debug, Clone)]
pub(crate) struct LocalMin {
    pub state: CVector,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

fn normalize(v: CVector) -> CVector {
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn gauge_fix(v: CVector) -> CVector {
    let Some(z) = v.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) else {
        return v;
    };
    if z.norm() == 0.0 {
        return v;
    }
    v * (z.conj() / z.norm())
}

/// Projected gradient descent on the unit sphere from `start`.
pub(crate) fn minimize_on_sphere(obj: &dyn SphereObjective, start: CVector, grad_tol: f64, max_iter: usize) -> LocalMin {
    let mut x = gauge_fix(normalize(start));
    let (mut fx, g) = obj.value_and_gradient(&x);
    let mut gt = project_tangent(&x, &g);
    let mut step = 1.0 / (gt.norm() + 1.0);
    let mut prev: Option<(CVector, CVector)> = None;
    let mut iterations = 0;
    while iterations < max_iter {
        let gnorm = gt.norm();
        if gnorm <= grad_tol {
            return LocalMin { state: x, value: fx, iterations, grad_norm: gnorm, converged: true };
        }
        if let Some((dx, dg)) = &prev {
            // Barzilai–Borwein step from the last displacement and gradient change.
            let sy = dx.dotc(dg).re;
            if sy > 0.0 {
                step = dx.norm_squared() / sy;
            }
        }
        let slope = gnorm * gnorm;
        // Below this change the computed value is dominated by cancellation.
        let f_noise = 1e-14 * (1.0 + fx.abs());
        let mut accepted = None;
        for _ in 0..60 {
            let trial = gauge_fix(normalize(&x - &gt * C64::new(step, 0.0)));
            let (ft, g) = obj.value_and_gradient(&trial);
            let decrease = ft <= fx - 1e-4 * step * slope;
            let gtt = project_tangent(&trial, &g);
            if decrease || (ft <= fx + f_noise && gtt.norm() < gnorm) {
                accepted = Some((trial, ft, gtt));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((xn, fn_, gtn)) = accepted else {
            // No descent at machine precision: stationary up to roundoff.
            return LocalMin { state: x, value: fx, iterations, grad_norm: gnorm, converged: gnorm <= 1e3 * grad_tol };
        };
        prev = Some((&xn - &x, &gtn - &gt));
        x = xn;
        fx = fn_;
        gt = gtn;
    }
    let gnorm = gt.norm();
    LocalMin { state: x, value: fx, iterations, grad_norm: gnorm, converged: gnorm <= grad_tol }
}

/// Search settings; defaults come from [`NumericPolicy::STANDARD`].
#[derive(Debug, Clone, PartialEq)]
pub struct SieveConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub distinct_infidelity: f64,
    /// Isometry onto the subspace searched (for example a guarded Fock
    /// subspace); the full space when `None`.
    pub search_space: Option<CMatrix>,
    /// Isometry onto the span the starts are drawn from (Haar-random, then
    /// projected into the search space); the search space when `None`.
    pub start_space: Option<CMatrix>,
    /// Worker threads for independent starts.
    pub threads: usize,
}

impl SieveConfig {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        let p = NumericPolicy::STANDARD;
        Self {
            n_starts,
            seed,
            grad_tol: p.sieve_grad_tol,
            max_iter: p.sieve_max_iter,
            distinct_infidelity: p.sieve_distinct_infidelity,
            search_space: None,
            start_space: None,
            threads: 1,
        }
    }

    pub fn with_search_space(mut self, isometry: CMatrix) -> Self {
        self.search_space = Some(isometry);
        self
    }

    pub fn with_start_space(mut self, isometry: CMatrix) -> Self {
        self.start_space = Some(isometry);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self::new(NumericPolicy::STANDARD.sieve_default_starts, 0)
    }
}

fn serialize_state<S: Serializer>(state: &PureState, s: S) -> std::result::Result<S::Ok, S::Error> {
    let amps: Vec<[f64; 2]> = state.amplitudes().iter().map(|z| [z.re, z.im]).collect();
    amps.serialize(s)
}

/// One distinct local minimum.
#[derive(Debug, Clone, Serialize)]
pub struct Minimizer {
    #[serde(serialize_with = "serialize_state")]
    pub state: PureState,
    pub value: f64,
    /// Distance to the coherent-state manifold, when one was supplied.
    pub gcs_infidelity: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Per-start diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveReport {
    pub model_id: String,
    pub objective: Objective,
    /// Ascending by value.
    pub minimizers: Vec<Minimizer>,
    pub global_min_value: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub starts: Vec<StartOutcome>,
}

impl SieveReport {
    /// `value,gcs_infidelity` rows.
    pub fn summary_csv(&self, digits: usize) -> String {
        let mut s = String::from("value,gcs_infidelity\n");
        for m in &self.minimizers {
            let inf = m.gcs_infidelity.map(|x| crate::lindblad::fmt_sig(x, digits)).unwrap_or_default();
            s.push_str(&format!("{},{}\n", crate::lindblad::fmt_sig(m.value, digits), inf));
        }
        s
    }

    /// Largest distance to the manifold among minimizers within `slack` of the
    /// global minimum.
    pub fn max_gcs_infidelity_at_minimum(&self, slack: f64) -> Option<f64> {
        self.minimizers
            .iter()
            .filter(|m| m.value <= self.global_min_value + slack)
            .filter_map(|m| m.gcs_infidelity)
            .reduce(f64::max)
    }
}

/// Multistart sieve with default settings and no manifold comparison.
pub fn sieve_search(model: &LindbladModel, objective: Objective, n_starts: usize, seed: u64) -> Result<SieveReport> {
    sieve_search_with(model, objective, &SieveConfig::new(n_starts, seed), None)
}

/// Multistart sieve. Every start is an independent projected-gradient run;
/// the end points are sorted, deduplicated by infidelity and, when a manifold
/// is given, classified by their distance to it.
pub fn sieve_search_with(
    model: &LindbladModel,
    objective: Objective,
    config: &SieveConfig,
    manifold: Option<&GcsManifold>,
) -> Result<SieveReport> {
    if config.n_starts < 8 {
        return Err(Error::Config(format!("sieve needs at least 8 starts, got {}", config.n_starts)));
    }
    let full = compile(model, objective)?;
    let runs = multistart(full.as_ref(), model.dim(), config);
    let mut starts = Vec::with_capacity(runs.len());
    let mut candidates = Vec::with_capacity(runs.len());
    for run in runs {
        starts.push(StartOutcome {
            value: run.value,
            iterations: run.iterations,
            grad_norm: run.grad_norm,
            converged: run.converged,
        });
        let state = PureState::from_normalized(run.state);
        let value = evaluate_objective(&state, model, objective)?;
        candidates.push((state, value, run.converged, run.iterations));
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut minimizers: Vec<Minimizer> = Vec::new();
    for (state, value, converged, iterations) in candidates {
        if minimizers.iter().any(|m| m.state.infidelity(&state) <= config.distinct_infidelity) {
            continue;
        }
        let gcs_infidelity = match manifold {
            Some(m) => Some(gcs_distance(&state, m)?.infidelity),
            None => None,
        };
        minimizers.push(Minimizer { state, value, gcs_infidelity, converged, iterations });
    }
    Ok(SieveReport {
        model_id: model.id.clone(),
        objective,
        global_min_value: minimizers.first().map(|m| m.value).unwrap_or(f64::NAN),
        minimizers,
        n_starts: config.n_starts,
        seed: config.seed,
        starts,
    })
}

/// Runs `config.n_starts` local minimizations and returns the end points in
/// the ambient space, in start order. Starts are drawn up front so the result
/// does not depend on the thread count.
pub(crate) fn multistart(obj: &dyn SphereObjective, dim: usize, config: &SieveConfig) -> Vec<LocalMin> {
    let mut rng = seeded_rng(config.seed);
    let starts: Vec<CVector> = (0..config.n_starts)
        .map(|_| {
            let psi0 = config
                .start_space
                .as_ref()
                .map(|w| w * PureState::haar_random(w.ncols(), &mut rng).into_amplitudes());
            match (&config.search_space, psi0) {
                (None, Some(p)) => p,
                (None, None) => PureState::haar_random(dim, &mut rng).into_amplitudes(),
                (Some(v), Some(p)) => v.adjoint() * p,
                (Some(v), None) => PureState::haar_random(v.ncols(), &mut rng).into_amplitudes(),
            }
        })
        .collect();
    let run = |u0: &CVector| match &config.search_space {
        None => minimize_on_sphere(obj, u0.clone(), config.grad_tol, config.max_iter),
        Some(v) => {
            let restricted = Restricted { inner: obj, isometry: v };
            let mut r = minimize_on_sphere(&restricted, u0.clone(), config.grad_tol, config.max_iter);
            r.state = gauge_fix(v * &r.state);
            r
        }
    };
    let threads = config.threads.clamp(1, starts.len().max(1));
    if threads == 1 {
        return starts.iter().map(run).collect();
    }
    let mut out: Vec<Option<LocalMin>> = vec![None; starts.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let starts = &starts;
                let run = &run;
                scope.spawn(move || {
                    (t..starts.len()).step_by(threads).map(|k| (k, run(&starts[k]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("sieve worker panicked") {
                out[k] = Some(r);
            }
        }
    });
    out.into_iter().map(|r| r.expect("every start ran")).collect()
}

/// Minimum of `Σ_k (ΔO_k)²` over unit vectors of a subspace, by multistart
/// descent. Returns the best state and value.
pub fn minimize_uncertainty_in(
    ops: &[OperatorMatrix],
    subspace: &CMatrix,
    n_starts: usize,
    seed: u64,
) -> (PureState, f64) {
    let obj = QuasivarianceSum::new(ops.to_vec(), 1.0);
    let dim = subspace.nrows();
    let config = SieveConfig::new(n_starts.max(1), seed).with_search_space(subspace.clone());
    let best = multistart(&obj, dim, &config)
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    let state = PureState::from_normalized(best.state);
    let value = obj.value(state.amplitudes());
    (state, value)
}

/// Sieve of the instantaneous first-order rate at each time of `t_grid`.
///
/// Fails with [`Error::DegenerateQuadrature`] when some Lindblad operator is
/// a combination `c a + d a†` with `|c| = |d|`.
pub fn time_resolved_sieve(
    model: &LindbladModel,
    t_grid: &[f64],
    config: &SieveConfig,
    manifold: Option<&GcsManifold>,
) -> Result<Vec<SieveReport>> {
    for l in model.lindblads() {
        if let Some((c, d)) = quadrature_components(l) {
            if (c.norm() - d.norm()).abs() <= 1e-12 * (c.norm() + d.norm()) {
                return Err(Error::DegenerateQuadrature);
            }
        }
    }
    t_grid
        .iter()
        .map(|&t| sieve_search_with(model, Objective::RateAt { t }, config, manifold))
        .collect()
}

/// Coefficients `(c, d)` when `l = c a + d a†` on a single truncated mode.
pub fn quadrature_components(l: &OperatorMatrix) -> Option<(C64, C64)> {
    let cutoff = l.dim().checked_sub(1)?;
    if cutoff < 1 {
        return None;
    }
    let a = crate::liealg::annihilation(cutoff);
    let ad = a.adjoint();
    let c = a.inner(l) / a.inner(&a);
    let d = ad.inner(l) / ad.inner(&ad);
    let residual = (l - &(&a.scale(c) + &ad.scale(d))).norm();
    (residual <= 1e-10 * l.norm().max(1e-300)).then_some((c, d))
}

/// Squeezing of a single-mode state from its second moments:
/// `tanh r = |⟨ΔaΔa⟩| / (⟨Δa†Δa⟩ + 1)` and the phase `arg⟨ΔaΔa⟩`.
pub fn quadrature_squeezing(state: &PureState, a: &OperatorMatrix) -> (f64, f64) {
    let psi = state.amplitudes();
    let mean = state.expectation(a);
    let centred = a.apply(psi) - psi * mean;
    let n = centred.norm_squared();
    let m = a.apply(psi);
    let aa = psi.dotc(&a.apply(&m)) - mean * mean;
    (aa.norm() / (n + 1.0), aa.arg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::spin_rep;

    #[test]
    fn too_few_starts() {
        let rep = spin_rep(1.0).unwrap();
        let m = LindbladModel::dissipative(vec![rep.operator("jz").unwrap().clone()]).unwrap();
        assert!(matches!(sieve_search(&m, Objective::Rate, 4, 0), Err(Error::Config(_))));
    }

    #[test]
    fn jz_eigenstates_are_found() {
        let rep = spin_rep(1.0).unwrap();
        let m = LindbladModel::dissipative(vec![rep.operator("jz").unwrap().clone()]).unwrap();
        let r = sieve_search(&m, Objective::Rate, 16, 3).unwrap();
        assert!(r.global_min_value <= 1e-12);
        for w in r.minimizers.windows(2) {
            assert!(w[0].value <= w[1].value);
        }
        let jz = rep.operator("jz").unwrap();
        let zero_valued: Vec<_> = r.minimizers.iter().filter(|m| m.value <= 1e-10).collect();
        assert!(zero_valued.iter().all(|m| m.state.quasivariance(jz) <= 1e-10));
    }

    #[test]
    fn gradient_is_tangent() {
        let rep = spin_rep(1.5).unwrap();
        let m = LindbladModel::dissipative(vec![rep.operator("jm").unwrap().clone(), rep.operator("jx").unwrap().clone()])
            .unwrap();
        let mut rng = seeded_rng(2);
        let psi = PureState::haar_random(4, &mut rng);
        let g = gradient_of_objective(&psi, &m, Objective::Rate).unwrap();
        assert!(psi.amplitudes().dotc(&g).norm() <= 1e-10);
    }

    #[test]
    fn degenerate_quadrature_flagged() {
        let a = crate::liealg::annihilation(8);
        let l = &a + &a.adjoint();
        let m = LindbladModel::new(OperatorMatrix::zeros(9), vec![l]).unwrap();
        let cfg = SieveConfig::new(8, 0);
        assert!(matches!(time_resolved_sieve(&m, &[0.0], &cfg, None), Err(Error::DegenerateQuadrature)));
    }
}
