//! Markovian evolution: dissipator, Liouvillian superoperator, dense
//! propagation and the purity-loss functionals.
//!
//! Density matrices are vectorized by stacking columns, so
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{wcl_check, WclCertificate};
use crate::opsalg::{
    mat_exp_matrix, unitary_from_hermitian, CMatrix, CVector, DensityMatrix, OperatorMatrix, PureState, C64, I,
};

/// Hamiltonian plus Lindblad operators, with rates absorbed into the
/// operators (`L_ℓ = √γ_ℓ L̃_ℓ`).
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub id: String,
    hamiltonian: OperatorMatrix,
    lindblads: Vec<OperatorMatrix>,
    labels: Vec<String>,
    wcl: Option<WclCertificate>,
}

impl LindbladModel {
    pub fn new(hamiltonian: OperatorMatrix, lindblads: Vec<OperatorMatrix>) -> Result<Self> {
        hamiltonian.verify_hermitian()?;
        if lindblads.is_empty() {
            return Err(Error::EmptyOperatorList);
        }
        for l in &lindblads {
            l.check_dim(hamiltonian.dim())?;
        }
        let labels = (0..lindblads.len()).map(|k| format!("L{k}")).collect();
        Ok(Self { id: String::from("model"), hamiltonian, lindblads, labels, wcl: None })
    }

    /// Model without Hamiltonian.
    pub fn dissipative(lindblads: Vec<OperatorMatrix>) -> Result<Self> {
        let d = lindblads.first().ok_or(Error::EmptyOperatorList)?.dim();
        Self::new(OperatorMatrix::zeros(d), lindblads)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.lindblads.len());
        self.labels = labels;
        self
    }

    /// Attaches an eigenoperator certificate, failing if any operator
    /// violates `[H, L_ℓ] = λ_ℓ L_ℓ`.
    pub fn certify_wcl(mut self) -> Result<Self> {
        let cert = wcl_check(&self.hamiltonian, &self.lindblads)?;
        if !cert.passed() {
            let worst = cert.residuals.iter().cloned().fold(0.0, f64::max);
            return Err(Error::Config(format!("Lindblad operators are not eigenoperators of H (residual {worst:.3e})")));
        }
        self.wcl = Some(cert);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[OperatorMatrix] {
        &self.lindblads
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn wcl(&self) -> Option<&WclCertificate> {
        self.wcl.as_ref()
    }

    /// `‖Σ_ℓ [L_ℓ, L_ℓ†]‖`, zero for unital generators.
    pub fn unitality_defect(&self) -> f64 {
        self.lindblads
            .iter()
            .fold(OperatorMatrix::zeros(self.dim()), |acc, l| &acc + &l.commutator(&l.adjoint()))
            .norm()
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_defect() <= 1e-10
    }
}

/// `Σ_ℓ (L_ℓ ρ L_ℓ† − ½{L_ℓ†L_ℓ, ρ})`.
pub fn dissipator(model: &LindbladModel, rho: &DensityMatrix) -> Result<OperatorMatrix> {
    if rho.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho.dim() });
    }
    Ok(dissipator_raw(model, rho.matrix()))
}

fn dissipator_raw(model: &LindbladModel, rho: &CMatrix) -> OperatorMatrix {
    let d = model.dim();
    let mut out = CMatrix::zeros(d, d);
    for l in model.lindblads() {
        let lm = l.matrix();
        let ldl = lm.adjoint() * lm;
        out += lm * rho * lm.adjoint() - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0);
    }
    OperatorMatrix::from_square(out)
}

/// Action of the full generator `−i[H, ρ] + D[ρ]` on a matrix.
pub fn generator_action(model: &LindbladModel, rho: &CMatrix) -> CMatrix {
    let h = model.hamiltonian().matrix();
    (h * rho - rho * h) * -I + dissipator_raw(model, rho).into_matrix()
}

/// Column-stacking vectorization.
pub fn vec_matrix(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().cloned())
}

pub fn unvec(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Dense `d² × d²` matrix of the Lindblad generator.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec_matrix(rho)), self.dim)
    }

    /// `exp(t 𝓛)`; any real `t` (negative values give the formal inverse map).
    pub fn propagator(&self, t: f64) -> CMatrix {
        mat_exp_matrix(&(&self.matrix * C64::new(t, 0.0)))
    }
}

/// Builds `𝓛 = −i(I⊗H − Hᵀ⊗I) + Σ_ℓ (L̄_ℓ⊗L_ℓ − ½ I⊗L_ℓ†L_ℓ − ½ (L_ℓ†L_ℓ)ᵀ⊗I)`.
pub fn liouvillian(model: &LindbladModel) -> Superoperator {
    let d = model.dim();
    let id = CMatrix::identity(d, d);
    let h = model.hamiltonian().matrix();
    let mut s = (id.kronecker(h) - h.transpose().kronecker(&id)) * -I;
    for l in model.lindblads() {
        let lm = l.matrix();
        let ldl = lm.adjoint() * lm;
        s += lm.conjugate().kronecker(lm);
        s -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * C64::new(0.5, 0.0);
    }
    Superoperator { dim: d, matrix: s }
}

/// Propagates density matrices with cached step propagators.
#[derive(Debug)]
pub struct Evolver {
    generator: Superoperator,
    cache: HashMap<u64, CMatrix>,
}

impl Evolver {
    pub fn new(model: &LindbladModel) -> Self {
        Self { generator: liouvillian(model), cache: HashMap::new() }
    }

    pub fn generator(&self) -> &Superoperator {
        &self.generator
    }

    fn step(&mut self, dt: f64) -> &CMatrix {
        let gen = &self.generator;
        self.cache.entry(dt.to_bits()).or_insert_with(|| gen.propagator(dt))
    }

    /// `ρ(t_k)` for each requested time, chaining steps between samples.
    pub fn evolve(&mut self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        let d = self.generator.dim;
        if rho0.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
        }
        let mut out = Vec::with_capacity(times.len());
        let mut now = 0.0;
        let mut v = vec_matrix(rho0.matrix());
        for &t in times {
            if !(t >= now) || !t.is_finite() {
                return Err(Error::InvalidTime(t));
            }
            let dt = t - now;
            if dt > 0.0 {
                let step = self.step(dt);
                let next = step * &v;
                let rho = DensityMatrix::from_propagated(unvec(&next, d));
                v = vec_matrix(rho.matrix());
            }
            now = t;
            out.push(DensityMatrix::from_propagated(unvec(&v, d)));
        }
        Ok(out)
    }
}

/// `ρ(t) = unvec(exp(t𝓛) vec ρ₀)` at each of the ascending `times`.
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    Evolver::new(model).evolve(rho0, times)
}

/// Stationary state from the kernel of the generator, when it is unique.
pub fn steady_state(model: &LindbladModel) -> Option<DensityMatrix> {
    let gen = liouvillian(model);
    let (_, kernel) = crate::opsalg::null_space(gen.matrix(), 1e-10);
    if kernel.ncols() != 1 {
        return None;
    }
    let m = unvec(&kernel.column(0).into_owned(), model.dim());
    let tr = m.trace();
    Some(DensityMatrix::from_propagated(m / tr))
}

/// `Π̇ = 2 Σ_ℓ (ΔL_ℓ)²` at a pure state.
pub fn purity_rate(state: &PureState, model: &LindbladModel) -> f64 {
    purity_rate_with(state, model.lindblads())
}

pub(crate) fn purity_rate_with(state: &PureState, lindblads: &[OperatorMatrix]) -> f64 {
    2.0 * lindblads.iter().map(|l| state.quasivariance(l)).sum::<f64>()
}

/// `[Π(τ) − Π(0)]/τ` with `Π = 1 − Tr ρ²`, propagating in `n_steps` equal steps.
pub fn average_purity_loss(state: &PureState, model: &LindbladModel, tau: f64, n_steps: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    let n = n_steps.max(1);
    let times: Vec<f64> = (1..=n).map(|k| tau * k as f64 / n as f64).collect();
    let rho0 = state.projector();
    let traj = evolve(model, &rho0, &times)?;
    let end = traj.last().expect("at least one step");
    Ok((rho0.purity() - end.purity()) / tau)
}

/// `L_ℓ(t) ≈ e^{itH} L_ℓ e^{−itH}`.
pub fn first_order_lindblad_t(model: &LindbladModel, t: f64) -> Vec<OperatorMatrix> {
    let u = unitary_from_hermitian(model.hamiltonian(), -t);
    let ud = u.adjoint();
    model.lindblads().iter().map(|l| &(&u * l) * &ud).collect()
}

/// Purity along a trajectory together with the first-order rate formula
/// `2 Σ_ℓ (ΔL_ℓ(t))²` evaluated on the initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityTrace {
    pub times: Vec<f64>,
    pub purity: Vec<f64>,
    pub rate_formula: Vec<f64>,
}

impl PurityTrace {
    /// True when every sample is no larger than its predecessor plus `tol`.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.purity.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// `t,purity,rate_formula` rows with a header line.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut s = String::from("t,purity,rate_formula\n");
        for k in 0..self.times.len() {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_sig(self.times[k], digits),
                fmt_sig(self.purity[k], digits),
                fmt_sig(self.rate_formula[k], digits)
            ));
        }
        s
    }
}

pub(crate) fn fmt_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

pub fn purity_trace(model: &LindbladModel, psi0: &PureState, times: &[f64]) -> Result<PurityTrace> {
    let traj = evolve(model, &psi0.projector(), times)?;
    let rate_formula = times
        .iter()
        .map(|&t| purity_rate_with(psi0, &first_order_lindblad_t(model, t)))
        .collect();
    Ok(PurityTrace { times: times.to_vec(), purity: traj.iter().map(|r| r.purity()).collect(), rate_formula })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::spin_rep;

    fn sigma_minus() -> OperatorMatrix {
        // |g⟩ = index 1, |e⟩ = index 0.
        OperatorMatrix::unit(2, 1, 0)
    }

    #[test]
    fn dark_state_and_decay() {
        let m = LindbladModel::dissipative(vec![sigma_minus()]).unwrap();
        let g = PureState::basis(2, 1).projector();
        assert_eq!(dissipator(&m, &g).unwrap().norm(), 0.0);
        let e = PureState::basis(2, 0).projector();
        let d = dissipator(&m, &e).unwrap();
        let expect = OperatorMatrix::from_real_diagonal(&[-1.0, 1.0]);
        assert!((&d - &expect).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(matches!(LindbladModel::dissipative(vec![]), Err(Error::EmptyOperatorList)));
        let h = OperatorMatrix::unit(2, 0, 1);
        assert!(LindbladModel::new(h, vec![sigma_minus()]).is_err());
        assert!(LindbladModel::new(OperatorMatrix::zeros(3), vec![sigma_minus()]).is_err());
    }

    #[test]
    fn negative_or_unsorted_times() {
        let m = LindbladModel::dissipative(vec![sigma_minus()]).unwrap();
        let rho = PureState::basis(2, 0).projector();
        assert!(matches!(evolve(&m, &rho, &[-0.1]), Err(Error::InvalidTime(_))));
        assert!(matches!(evolve(&m, &rho, &[0.5, 0.2]), Err(Error::InvalidTime(_))));
        let out = evolve(&m, &rho, &[0.0]).unwrap();
        assert_eq!(out[0], rho);
    }

    #[test]
    fn amplitude_damping_closed_form() {
        let gamma: f64 = 0.7;
        let m = LindbladModel::dissipative(vec![sigma_minus().scale_real(gamma.sqrt())]).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| 0.3 * k as f64).collect();
        let traj = evolve(&m, &PureState::basis(2, 0).projector(), &times).unwrap();
        for (t, rho) in times.iter().zip(&traj) {
            assert!((rho.matrix()[(0, 0)].re - (-gamma * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn first_order_at_zero_is_identity_map() {
        let rep = spin_rep(1.0).unwrap();
        let m = LindbladModel::new(
            rep.operator("jz").unwrap().clone(),
            vec![rep.operator("jm").unwrap().clone()],
        )
        .unwrap();
        let l0 = first_order_lindblad_t(&m, 0.0);
        assert!((&l0[0] - &m.lindblads()[0]).norm() < 1e-14);
    }

    #[test]
    fn unitality() {
        let rep = spin_rep(1.0).unwrap();
        let balanced = LindbladModel::dissipative(rep.hermitian_operators()).unwrap();
        assert!(balanced.is_unital());
        let damped = LindbladModel::dissipative(vec![rep.operator("jm").unwrap().clone()]).unwrap();
        assert!(!damped.is_unital());
    }

    #[test]
    fn average_rejects_nonpositive_tau() {
        let m = LindbladModel::dissipative(vec![sigma_minus()]).unwrap();
        let psi = PureState::basis(2, 0);
        assert!(matches!(average_purity_loss(&psi, &m, 0.0, 4), Err(Error::NonPositiveTau(_))));
    }

    #[test]
    fn csv_layout() {
        let trace = PurityTrace { times: vec![0.0, 0.5], purity: vec![1.0, 0.75], rate_formula: vec![2.0, 2.0] };
        let csv = trace.to_csv(12);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,purity,rate_formula"));
        assert_eq!(lines.next(), Some("0.00000000000e0,1.00000000000e0,2.00000000000e0"));
    }
}
