//! Quantum Fisher information of pure states and the invariant uncertainty
//! `(ΔI)² = tr I / 4` over a normalized Hermitian basis of the algebra.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gcs::{gcs_distance, GcsManifold};
use crate::liealg::LieRepresentation;
use crate::opsalg::{CMatrix, CVector, OperatorMatrix, PureState, C64};
use crate::seeded_rng;

/// QFI matrix of a pure state for a list of Hermitian generators.
#[derive(Debug, Clone)]
pub struct QfiMatrix {
    pub generators: Vec<OperatorMatrix>,
    /// `4⟨(K_j − ⟨K_j⟩)(K_k − ⟨K_k⟩)⟩`, complex and non-symmetric in general.
    pub entries: CMatrix,
    /// Entrywise real part of `entries`.
    pub symmetrized: DMatrix<f64>,
}

impl QfiMatrix {
    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }
}

/// `[I]_jk = 4⟨(K_j − ⟨K_j⟩)(K_k − ⟨K_k⟩)⟩`.
pub fn qfi_matrix(state: &PureState, generators: &[OperatorMatrix]) -> Result<QfiMatrix> {
    for k in generators {
        k.check_dim(state.dim())?;
        k.verify_hermitian()?;
    }
    let psi = state.amplitudes();
    let centred: Vec<CVector> = generators
        .iter()
        .map(|k| {
            let kv = k.apply(psi);
            let mean = psi.dotc(&kv);
            kv - psi * mean
        })
        .collect();
    let n = generators.len();
    let entries = CMatrix::from_fn(n, n, |j, k| centred[j].dotc(&centred[k]) * 4.0);
    let symmetrized = entries.map(|z| z.re);
    Ok(QfiMatrix { generators: generators.to_vec(), entries, symmetrized })
}

/// `Σ_j (ΔX_j)²` over the representation's Hermitian basis.
pub fn invariant_uncertainty(state: &PureState, rep: &LieRepresentation) -> Result<f64> {
    if state.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: state.dim() });
    }
    Ok(rep.hermitian_basis().iter().map(|x| state.quasivariance(&x.op)).sum())
}

/// Invariant uncertainty of the highest-weight state, which is the minimum
/// over all states for an irreducible representation.
pub fn theorem1_bound(rep: &LieRepresentation) -> Result<f64> {
    let hw = rep.highest_weight_vector().ok_or(Error::MissingReference)?;
    invariant_uncertainty(hw, rep)
}

/// Attainment statistics for states within `epsilon` of the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainmentCheck {
    pub epsilon: f64,
    pub n_states: usize,
    /// Largest distance to the coherent-state manifold among those states
    /// (zero when there are none).
    pub max_gcs_infidelity: f64,
}

/// Sweep of the invariant uncertainty over Haar-random pure states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub rep: String,
    pub bound: f64,
    pub min_random: f64,
    pub n_random: usize,
    pub seed: u64,
    /// `min_random − bound`.
    pub attainment_gap: f64,
    /// Random states below `bound − 1e-9`.
    pub violations: usize,
    pub attainment: Vec<AttainmentCheck>,
}

impl Theorem1Report {
    /// No violation, and near-bound states are closer to the manifold for the
    /// tighter window.
    pub fn consistent(&self) -> bool {
        self.violations == 0
            && self
                .attainment
                .windows(2)
                .all(|w| w[0].max_gcs_infidelity <= w[1].max_gcs_infidelity + 1e-12)
    }
}

/// Windows used by [`verify_theorem1`], ascending.
pub const ATTAINMENT_WINDOWS: [f64; 2] = [1e-3, 1e-2];

/// Samples `n_random` Haar-random states, checks `(ΔI)² ≥ bound − 1e-9` and
/// measures how close near-bound states are to the coherent-state manifold.
pub fn verify_theorem1(rep: &LieRepresentation, n_random: usize, seed: u64) -> Result<Theorem1Report> {
    let bound = theorem1_bound(rep)?;
    let manifold = GcsManifold::new(rep)?;
    let mut rng = seeded_rng(seed);
    let mut min_random = f64::INFINITY;
    let mut violations = 0;
    let widest = ATTAINMENT_WINDOWS[ATTAINMENT_WINDOWS.len() - 1];
    let mut near: Vec<(f64, f64)> = Vec::new();
    for _ in 0..n_random {
        let psi = PureState::haar_random(rep.dim(), &mut rng);
        let value = invariant_uncertainty(&psi, rep)?;
        min_random = min_random.min(value);
        if value < bound - 1e-9 {
            violations += 1;
        }
        if value <= bound + widest {
            let d = gcs_distance(&psi, &manifold)?;
            near.push((value - bound, d.infidelity));
        }
    }
    let attainment = ATTAINMENT_WINDOWS
        .iter()
        .map(|&eps| {
            let inside: Vec<f64> = near.iter().filter(|(gap, _)| *gap <= eps).map(|(_, d)| *d).collect();
            AttainmentCheck {
                epsilon: eps,
                n_states: inside.len(),
                max_gcs_infidelity: inside.iter().cloned().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(Theorem1Report {
        rep: rep.name().to_string(),
        bound,
        min_random,
        n_random,
        seed,
        attainment_gap: min_random - bound,
        violations,
        attainment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{boson_rep, orthonormalize_basis, spin_rep};

    #[test]
    fn qfi_of_spin_up() {
        let rep = spin_rep(0.5).unwrap();
        let paulis: Vec<_> = rep.hermitian_operators().iter().map(|j| j.scale_real(2.0)).collect();
        let q = qfi_matrix(&PureState::basis(2, 0), &paulis).unwrap();
        let diag: Vec<f64> = (0..3).map(|k| q.entries[(k, k)].re).collect();
        assert!((diag[0] - 4.0).abs() < 1e-14 && (diag[1] - 4.0).abs() < 1e-14 && diag[2].abs() < 1e-14);
        // Off-diagonal x–y entry is 4⟨σ_xσ_y⟩ = 4i⟨σ_z⟩.
        assert!((q.entries[(0, 1)] - C64::new(0.0, 4.0)).norm() < 1e-14);
        assert!(q.symmetrized[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn single_generator_is_four_variance() {
        let rep = spin_rep(1.0).unwrap();
        let mut rng = seeded_rng(5);
        let psi = PureState::haar_random(3, &mut rng);
        let k = rep.operator("jx").unwrap().clone();
        let q = qfi_matrix(&psi, &[k.clone()]).unwrap();
        assert!((q.entries[(0, 0)].re - 4.0 * psi.quasivariance(&k)).abs() < 1e-13);
    }

    #[test]
    fn qfi_rejects_non_hermitian() {
        let rep = spin_rep(1.0).unwrap();
        let jp = rep.operator("jp").unwrap().clone();
        assert!(qfi_matrix(&PureState::basis(3, 0), &[jp]).is_err());
    }

    #[test]
    fn spin_values() {
        let rep = spin_rep(1.0).unwrap();
        assert!((theorem1_bound(&rep).unwrap() - 1.0).abs() < 1e-12);
        assert!((invariant_uncertainty(&PureState::basis(3, 1), &rep).unwrap() - 2.0).abs() < 1e-12);
        let rep = spin_rep(2.0).unwrap();
        assert!((theorem1_bound(&rep).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_quadratures() {
        let rep = orthonormalize_basis(&boson_rep(20, 1).unwrap()).unwrap();
        assert_eq!(rep.hermitian_basis().len(), 2);
        assert!((theorem1_bound(&rep).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let rep = spin_rep(1.0).unwrap();
        assert!(invariant_uncertainty(&PureState::basis(2, 0), &rep).is_err());
    }
}
