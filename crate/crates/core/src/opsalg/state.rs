use rand::Rng;
use rand_distr::StandardNormal;

use super::{hermitian_eigen_unchecked, CMatrix, CVector, OperatorMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

/// A unit vector. The global phase is not fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Accepts a vector that is already normalized within the policy tolerance.
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > NumericPolicy::STANDARD.norm_tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0) })
    }

    pub(crate) fn from_normalized(amps: CVector) -> Self {
        Self { amps }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = CVector::zeros(dim);
        amps[k] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Unitarily invariant (Haar) random state.
    pub fn haar_random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::haar_random_in(dim, dim, rng)
    }

    /// Haar-random state supported on the first `support` basis vectors.
    pub fn haar_random_in<R: Rng + ?Sized>(dim: usize, support: usize, rng: &mut R) -> Self {
        loop {
            let v = CVector::from_fn(dim, |k, _| {
                if k < support {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                } else {
                    ZERO
                }
            });
            if let Ok(s) = Self::normalized(v) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn infidelity(&self, other: &PureState) -> f64 {
        (1.0 - self.fidelity(other)).max(0.0)
    }

    /// Equality of rays: `|⟨φ|ψ⟩| = 1` within the policy tolerance.
    pub fn same_ray(&self, other: &PureState) -> bool {
        1.0 - self.overlap(other).norm() <= NumericPolicy::STANDARD.phase_equal_tol
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self { amps: &self.amps * C64::from_polar(1.0, phase) }
    }

    /// Rotates the global phase so the largest-magnitude amplitude is real
    /// and positive.
    pub fn gauge_fixed(&self) -> Self {
        let (k, _) = self
            .amps
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, z)| if z.norm() > best.1 { (k, z.norm()) } else { best });
        let z = self.amps[k];
        Self { amps: &self.amps * (z.conj() / z.norm()) }
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        self.amps.dotc(&(op.matrix() * &self.amps))
    }

    /// `‖(O − ⟨O⟩)|ψ⟩‖²`.
    pub fn quasivariance(&self, op: &OperatorMatrix) -> f64 {
        let ov = op.matrix() * &self.amps;
        let mean = self.amps.dotc(&ov);
        (ov - &self.amps * mean).norm_squared()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { m: &self.amps * self.amps.adjoint() }
    }

    /// Embeds `u` through the columns of an isometry: `ψ = V u`.
    pub fn embed(isometry: &CMatrix, u: &PureState) -> PureState {
        Self { amps: isometry * &u.amps }
    }
}

/// A Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity against the policy.
    pub fn new(m: CMatrix) -> Result<Self> {
        let p = NumericPolicy::STANDARD;
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let herm = (&m - m.adjoint()).norm();
        if herm > p.density_hermitian_tol {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > p.density_trace_tol {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let rho = Self { m };
        let min = rho.min_eigenvalue();
        if min < -p.density_eig_tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// Wraps a propagated matrix, re-Hermitizing it.
    pub(crate) fn from_propagated(m: CMatrix) -> Self {
        Self { m: (&m + m.adjoint()) * C64::new(0.5, 0.0) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        hermitian_eigen_unchecked(&h).eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        psi.amplitudes().dotc(&(&self.m * psi.amplitudes())).re
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        (&self.m * op.matrix()).trace()
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.m - &other.m).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_unnormalized() {
        let v = CVector::from_element(2, C64::new(1.0, 0.0));
        assert!(PureState::new(v.clone()).is_err());
        assert!(PureState::normalized(v).is_ok());
        assert!(PureState::normalized(CVector::zeros(3)).is_err());
    }

    #[test]
    fn phase_does_not_change_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PureState::haar_random(5, &mut rng);
        assert!(psi.same_ray(&psi.with_phase(1.3)));
        let g = psi.with_phase(2.1).gauge_fixed();
        assert!(g.same_ray(&psi));
        let big = g.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(g.amplitudes().iter().any(|z| (z.re - big).abs() < 1e-15 && z.im == 0.0));
    }

    #[test]
    fn density_validation() {
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.2, 0.0), C64::new(-0.2, 0.0)]));
        assert!(DensityMatrix::new(bad).is_err());
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
        assert!(DensityMatrix::new(mixed.matrix().clone()).is_ok());
    }

    #[test]
    fn quasivariance_of_eigenstate_vanishes() {
        let z = OperatorMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(PureState::basis(2, 1).quasivariance(&z), 0.0);
    }
}
