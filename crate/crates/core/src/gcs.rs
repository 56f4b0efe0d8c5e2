//! Generalized coherent-state manifolds: displacements of a reference state by
//! the group generated from a representation's Hermitian basis, and the
//! distance from an arbitrary state to such a manifold.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::liealg::{LieRepresentation, RepKind};
use crate::opsalg::{hermitian_eigen_unchecked, CMatrix, HermitianEigen, OperatorMatrix, PureState, C64};
use crate::policy::NumericPolicy;
use crate::seeded_rng;

/// Seed for the internal multistart sequence of [`gcs_distance`].
const DISTANCE_SEED: u64 = 0x6c5_d157;

/// Admissible region for displacement parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamGuard {
    /// Compact group: each parameter in `[−bound, bound]`.
    Box { bound: f64 },
    /// Truncated bosons: per mode, parameters `(u, v)` of `x` and `p` give
    /// `|η| = √((u² + v²)/2)`, bounded by `max_amplitude`; optional squeezing
    /// pair `(s, t)` with `r = √(s² + t²) ≤ max_squeezing`.
    Bosonic { modes: usize, max_amplitude: f64, max_squeezing: Option<f64> },
}

/// The orbit `{exp(−i Σ_k c_k X_k)|Λ⟩}` of a reference state.
#[derive(Debug, Clone)]
pub struct GcsManifold {
    rep: LieRepresentation,
    reference: PureState,
    generators: Vec<OperatorMatrix>,
    guard: ParamGuard,
    /// Single-mode blocks of each generator for multimode bosons, where the
    /// generator sum is a Kronecker sum and diagonalizes mode by mode.
    mode_blocks: Option<Vec<CMatrix>>,
}

impl GcsManifold {
    /// Manifold through the representation's highest-weight vector.
    pub fn new(rep: &LieRepresentation) -> Result<Self> {
        let reference = rep.highest_weight_vector().ok_or(Error::MissingReference)?.clone();
        Self::with_reference(rep, reference)
    }

    /// Manifold through an explicitly chosen reference state (used for
    /// reducible representations, where any unit vector of the minimum
    /// highest-weight subspace qualifies).
    pub fn with_reference(rep: &LieRepresentation, reference: PureState) -> Result<Self> {
        if reference.dim() != rep.dim() {
            return Err(Error::DimensionMismatch { expected: rep.dim(), found: reference.dim() });
        }
        let pick = |labels: &[&str]| -> Vec<OperatorMatrix> {
            rep.hermitian_basis()
                .iter()
                .filter(|l| labels.iter().any(|p| l.label.starts_with(p)))
                .map(|l| l.op.clone())
                .collect()
        };
        let (generators, guard) = match rep.kind() {
            RepKind::Spin { .. } | RepKind::CollectiveSpin { .. } => {
                (rep.hermitian_operators(), ParamGuard::Box { bound: std::f64::consts::PI })
            }
            RepKind::Boson { cutoff, modes } => (
                // x_i, p_i interleaved per mode, in the basis order.
                pick(&["x", "p"]),
                ParamGuard::Bosonic { modes, max_amplitude: (cutoff as f64).sqrt() / 3.0, max_squeezing: None },
            ),
            RepKind::Squeeze { cutoff } => {
                let amp = (cutoff as f64).sqrt() / 3.0;
                (
                    pick(&["x", "p", "k1", "k2"]),
                    ParamGuard::Bosonic { modes: 1, max_amplitude: amp, max_squeezing: Some(amp.asinh()) },
                )
            }
        };
        let mode_blocks = match rep.kind() {
            RepKind::Boson { cutoff, modes } if modes > 1 => Some(single_mode_blocks(&generators, cutoff + 1, modes)),
            _ => None,
        };
        Ok(Self { rep: rep.clone(), reference, generators, guard, mode_blocks })
    }

    pub fn rep(&self) -> &LieRepresentation {
        &self.rep
    }

    pub fn reference(&self) -> &PureState {
        &self.reference
    }

    pub fn generators(&self) -> &[OperatorMatrix] {
        &self.generators
    }

    pub fn param_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn guard(&self) -> ParamGuard {
        self.guard
    }

    /// Checks that parameters lie inside the truncation guard.
    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_dim() {
            return Err(Error::WrongParamLength { expected: self.param_dim(), found: params.len() });
        }
        if let ParamGuard::Bosonic { modes, max_amplitude, max_squeezing } = self.guard {
            for m in 0..modes {
                let amp = ((params[2 * m].powi(2) + params[2 * m + 1].powi(2)) / 2.0).sqrt();
                if amp > max_amplitude * (1.0 + 1e-12) {
                    return Err(Error::TruncationGuard { amplitude: amp, guard: max_amplitude });
                }
            }
            if let Some(max_r) = max_squeezing {
                let r = params[2].hypot(params[3]);
                if r > max_r * (1.0 + 1e-12) {
                    return Err(Error::TruncationGuard { amplitude: r, guard: max_r });
                }
            }
        }
        Ok(())
    }

    /// Pulls parameters back into the guard region.
    fn clamp(&self, params: &mut [f64]) {
        match self.guard {
            ParamGuard::Box { .. } => {}
            ParamGuard::Bosonic { modes, max_amplitude, max_squeezing } => {
                for m in 0..modes {
                    let amp = ((params[2 * m].powi(2) + params[2 * m + 1].powi(2)) / 2.0).sqrt();
                    if amp > max_amplitude {
                        let s = max_amplitude / amp;
                        params[2 * m] *= s;
                        params[2 * m + 1] *= s;
                    }
                }
                if let Some(max_r) = max_squeezing {
                    let r = params[2].hypot(params[3]);
                    if r > max_r {
                        params[2] *= max_r / r;
                        params[3] *= max_r / r;
                    }
                }
            }
        }
    }

    /// Draws parameters uniformly within the guard region.
    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.guard {
            ParamGuard::Box { bound } => (0..self.param_dim()).map(|_| rng.gen_range(-bound..=bound)).collect(),
            ParamGuard::Bosonic { modes, max_amplitude, max_squeezing } => {
                let mut p = Vec::with_capacity(self.param_dim());
                let disk = |rng: &mut R, radius: f64| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    (r * phi.cos(), r * phi.sin())
                };
                for _ in 0..modes {
                    // |η| = √((u² + v²)/2) ≤ A  ⇔  (u, v) in the disk of radius √2 A.
                    let (u, v) = disk(rng, std::f64::consts::SQRT_2 * max_amplitude);
                    p.push(u);
                    p.push(v);
                }
                if let Some(max_r) = max_squeezing {
                    let (s, t) = disk(rng, max_r);
                    p.push(s);
                    p.push(t);
                }
                p
            }
        }
    }

    fn hamiltonian(&self, params: &[f64]) -> CMatrix {
        let d = self.dim();
        let mut h = CMatrix::zeros(d, d);
        for (c, x) in params.iter().zip(&self.generators) {
            h += x.matrix() * C64::new(*c, 0.0);
        }
        h
    }

    fn eigen(&self, params: &[f64]) -> HermitianEigen {
        self.eigen_with_modes(params).0
    }

    /// Eigensystem of `H(c)`, plus the per-mode eigenvectors when it is a
    /// Kronecker sum.
    fn eigen_with_modes(&self, params: &[f64]) -> (HermitianEigen, Option<Vec<CMatrix>>) {
        let Some(blocks) = &self.mode_blocks else {
            return (hermitian_eigen_unchecked(&self.hamiltonian(params)), None);
        };
        // Mode 0 is the leading Kronecker factor; generators come as (x, p) per mode.
        let mut values = vec![0.0];
        let mut vectors = CMatrix::identity(1, 1);
        let mut per_mode = Vec::with_capacity(blocks.len() / 2);
        for (m, pair) in blocks.chunks(2).enumerate() {
            let h = &pair[0] * C64::new(params[2 * m], 0.0) + &pair[1] * C64::new(params[2 * m + 1], 0.0);
            let e = hermitian_eigen_unchecked(&h);
            values = values.iter().flat_map(|a| e.eigenvalues.iter().map(move |b| a + b)).collect();
            vectors = vectors.kronecker(&e.eigenvectors);
            per_mode.push(e.eigenvectors);
        }
        (HermitianEigen { eigenvalues: values, eigenvectors: vectors }, Some(per_mode))
    }

    /// `exp(−i Σ_k c_k X_k)|Λ⟩`, skipping the guard check.
    fn displace_unchecked(&self, params: &[f64]) -> PureState {
        let eig = self.eigen(params);
        let coeffs = eig.eigenvectors.adjoint() * self.reference.amplitudes();
        let phased = nalgebra::DVector::from_fn(coeffs.len(), |k, _| {
            coeffs[k] * C64::from_polar(1.0, -eig.eigenvalues[k])
        });
        PureState::from_normalized(&eig.eigenvectors * phased)
    }

    /// Overlap `|⟨ψ|U(c)|Λ⟩|²` and its gradient in `c`.
    ///
    /// The derivative of the exponential uses the divided-difference form in
    /// the eigenbasis of `H(c)`.
    fn overlap_and_gradient(&self, target: &PureState, params: &[f64]) -> (f64, Vec<f64>) {
        let (eig, per_mode) = self.eigen_with_modes(params);
        let v = &eig.eigenvectors;
        let lam = &eig.eigenvalues;
        let psi = v.ad_mul(target.amplitudes());
        let refc = v.ad_mul(self.reference.amplitudes());
        let d = lam.len();
        let phase: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, -l)).collect();
        let amp: C64 = (0..d).map(|k| psi[k].conj() * phase[k] * refc[k]).sum();
        let w = |a: usize, b: usize| {
            let gamma = if (lam[a] - lam[b]).abs() > 1e-9 {
                (phase[a] - phase[b]) / (lam[a] - lam[b])
            } else {
                C64::new(0.0, -1.0) * (phase[a] + phase[b]) * 0.5
            };
            psi[a].conj() * gamma * refc[b]
        };
        let grad = match (per_mode, &self.mode_blocks) {
            (Some(vm), Some(blocks)) => {
                // V†XV acts on a single mode, so only index pairs differing in
                // that mode's digit contribute.
                let base = vm[0].nrows();
                let modes = vm.len();
                blocks
                    .iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let m = k / 2;
                        let small = vm[m].adjoint() * x * &vm[m];
                        let stride = base.pow((modes - 1 - m) as u32);
                        let mut s = C64::new(0.0, 0.0);
                        for a in 0..d {
                            let da = (a / stride) % base;
                            let root = a - da * stride;
                            for db in 0..base {
                                s += w(a, root + db * stride) * small[(da, db)];
                            }
                        }
                        2.0 * (amp.conj() * s).re
                    })
                    .collect()
            }
            _ => {
                // Σ_ab W_ab (V†XV)_ab = tr(X B) with B = V Wᵀ V†.
                let wm = CMatrix::from_fn(d, d, w);
                let b = v * wm.transpose() * v.adjoint();
                self.generators
                    .iter()
                    .map(|x| {
                        let s: C64 = x.matrix().iter().zip(b.transpose().iter()).map(|(a, b)| a * b).sum();
                        2.0 * (amp.conj() * s).re
                    })
                    .collect()
            }
        };
        (amp.norm_sqr(), grad)
    }
}

/// Reads `x` off `I ⊗ … ⊗ x ⊗ … ⊗ I` by fixing every other site at index 0.
fn single_mode_blocks(generators: &[OperatorMatrix], base: usize, modes: usize) -> Vec<CMatrix> {
    generators
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let stride = base.pow((modes - 1 - k / 2) as u32);
            CMatrix::from_fn(base, base, |i, j| g.matrix()[(i * stride, j * stride)])
        })
        .collect()
}

/// `exp(−i Σ_k c_k X_k)|Λ⟩`.
pub fn displace(manifold: &GcsManifold, params: &[f64]) -> Result<PureState> {
    manifold.check_params(params)?;
    Ok(manifold.displace_unchecked(params))
}

/// Deterministic sample of `count` manifold points with parameters drawn
/// uniformly inside the guard region.
pub fn sample_gcs(manifold: &GcsManifold, count: usize, seed: u64) -> Vec<PureState> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| {
            let p = manifold.sample_params(&mut rng);
            manifold.displace_unchecked(&p)
        })
        .collect()
}

/// Result of a multistart overlap maximization.
#[derive(Debug, Clone)]
pub struct GcsDistance {
    /// `1 − max |⟨ψ|U(c)|Λ⟩|²`; an upper bound on the true infidelity.
    pub infidelity: f64,
    pub params: Vec<f64>,
    pub closest: PureState,
    pub starts: usize,
    /// The best two starts agree within the policy tolerance.
    pub agreed: bool,
}

/// Infidelity of `state` to the closest point of the manifold.
///
/// Runs at least `gcs_min_starts` local optimizations (the first from the
/// reference itself, the rest from guard-uniform random parameters) and keeps
/// adding batches until the best two agree, up to four times the minimum.
pub fn gcs_distance(state: &PureState, manifold: &GcsManifold) -> Result<GcsDistance> {
    if state.dim() != manifold.dim() {
        return Err(Error::DimensionMismatch { expected: manifold.dim(), found: state.dim() });
    }
    let policy = NumericPolicy::STANDARD;
    let mut rng = seeded_rng(DISTANCE_SEED);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut starts = 0;
    let max_starts = 4 * policy.gcs_min_starts;
    loop {
        let p0 = if starts == 0 { vec![0.0; manifold.param_dim()] } else { manifold.sample_params(&mut rng) };
        let (inf, p) = maximize_overlap(manifold, state, p0, policy.gcs_max_iter);
        best.push((inf, p));
        starts += 1;
        if starts >= policy.gcs_min_starts {
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(2);
            let agreed = best.len() == 2 && (best[1].0 - best[0].0).abs() <= policy.gcs_agree_tol;
            if agreed || starts >= max_starts {
                let (infidelity, params) = best.swap_remove(0);
                let closest = manifold.displace_unchecked(&params);
                return Ok(GcsDistance { infidelity: infidelity.max(0.0), params, closest, starts, agreed });
            }
        }
    }
}

/// Quasi-Newton (BFGS) minimization of `1 − |⟨ψ|U(c)|Λ⟩|²` from `p0`.
fn maximize_overlap(manifold: &GcsManifold, target: &PureState, p0: Vec<f64>, max_iter: usize) -> (f64, Vec<f64>) {
    let n = p0.len();
    let eval = |p: &[f64]| {
        let (f, g) = manifold.overlap_and_gradient(target, p);
        (1.0 - f, DVector::from_iterator(n, g.into_iter().map(|x| -x)))
    };
    let mut x = DVector::from_vec(p0);
    manifold.clamp(x.as_mut_slice());
    let (mut fx, mut gx) = eval(x.as_slice());
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut stalls = 0;
    for _ in 0..max_iter {
        if gx.norm() <= 1e-10 || fx <= 1e-15 || stalls >= 3 {
            break;
        }
        let mut dir = -(&hinv * &gx);
        if dir.dot(&gx) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            dir = -gx.clone();
        }
        let slope = dir.dot(&gx);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut xn = &x + &dir * step;
            manifold.clamp(xn.as_mut_slice());
            let (fnew, gnew) = eval(xn.as_slice());
            if fnew <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else { break };
        let s = &xn - &x;
        let y = &gnew - &gx;
        let sy = s.dot(&y);
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        gx = gnew;
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(n, n);
            let left = &id - &s * y.transpose() * rho;
            let right = &id - &y * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }
        if improvement <= 1e-15 {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
    (fx, x.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{boson_rep, spin_rep};

    #[test]
    fn zero_params_give_reference() {
        let m = GcsManifold::new(&spin_rep(1.5).unwrap()).unwrap();
        let s = displace(&m, &[0.0; 3]).unwrap();
        assert!(s.same_ray(m.reference()));
    }

    #[test]
    fn wrong_length_and_guard() {
        let m = GcsManifold::new(&boson_rep(9, 1).unwrap()).unwrap();
        assert!(matches!(displace(&m, &[0.1]), Err(Error::WrongParamLength { expected: 2, found: 1 })));
        // Guard √9/3 = 1 on |η|; (u, v) = (0, 2) gives |η| = √2.
        assert!(matches!(displace(&m, &[0.0, 2.0]), Err(Error::TruncationGuard { .. })));
    }

    #[test]
    fn pi_rotation_about_y_flips_spin() {
        let m = GcsManifold::new(&spin_rep(0.5).unwrap()).unwrap();
        let s = displace(&m, &[0.0, std::f64::consts::PI, 0.0]).unwrap();
        assert!(s.same_ray(&PureState::basis(2, 1)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = GcsManifold::new(&spin_rep(1.0).unwrap()).unwrap();
        let mut rng = seeded_rng(11);
        let target = PureState::haar_random(3, &mut rng);
        let p = [0.4, -1.1, 0.7];
        let (_, g) = m.overlap_and_gradient(&target, &p);
        let h = 1e-6;
        for k in 0..3 {
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let fd = (m.overlap_and_gradient(&target, &a).0 - m.overlap_and_gradient(&target, &b).0) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8, "k={k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn multimode_gradient_matches_finite_differences() {
        let rep = crate::liealg::boson_rep(6, 2).unwrap();
        let man = GcsManifold::new(&rep).unwrap();
        let mut rng = seeded_rng(9);
        let target = displace(&man, &man.sample_params(&mut rng)).unwrap();
        let p: Vec<f64> = man.sample_params(&mut rng).iter().map(|x| 0.5 * x).collect();
        let (_, g) = man.overlap_and_gradient(&target, &p);
        let h = 1e-6;
        for k in 0..p.len() {
            let mut up = p.clone();
            let mut dn = p.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (man.overlap_and_gradient(&target, &up).0 - man.overlap_and_gradient(&target, &dn).0) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-7, "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn multimode_eigen_matches_dense() {
        let rep = crate::liealg::boson_rep(5, 2).unwrap();
        let man = GcsManifold::new(&rep).unwrap();
        let p = man.sample_params(&mut seeded_rng(4));
        let fast = man.eigen(&p);
        let dense = hermitian_eigen_unchecked(&man.hamiltonian(&p));
        let mut a = fast.eigenvalues.clone();
        a.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&dense.eigenvalues) {
            assert!((x - y).abs() < 1e-10);
        }
        let h = man.hamiltonian(&p);
        let lam = CMatrix::from_diagonal(&DVector::from_iterator(
            fast.eigenvalues.len(),
            fast.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        ));
        let back = &fast.eigenvectors * lam * fast.eigenvectors.adjoint();
        assert!((back - h).norm() < 1e-10);
    }

    #[test]
    fn distance_of_member_vanishes() {
        let m = GcsManifold::new(&spin_rep(1.0).unwrap()).unwrap();
        let s = displace(&m, &[0.3, -2.0, 1.2]).unwrap();
        let d = gcs_distance(&s, &m).unwrap();
        assert!(d.infidelity <= 1e-8 && d.agreed);
        assert!(matches!(gcs_distance(&PureState::basis(2, 0), &m), Err(Error::DimensionMismatch { .. })));
    }
}
