//! Numeric tolerances shared by every operation and by the test-suite.

use serde::Serialize;

/// Centralized tolerances and budgets. Operations read from
/// [`NumericPolicy::STANDARD`]; verdict records embed a copy of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericPolicy {
    /// ‖A − A†‖ ≤ tol·‖A‖ for a Hermitian flag.
    pub hermitian_tol: f64,
    /// ‖U†U − I‖ ≤ tol for a unitary flag.
    pub unitary_tol: f64,
    /// |‖ψ‖ − 1| for a pure state.
    pub norm_tol: f64,
    /// States are equal when 1 − |⟨φ|ψ⟩| ≤ tol.
    pub phase_equal_tol: f64,
    pub density_hermitian_tol: f64,
    pub density_trace_tol: f64,
    /// Smallest eigenvalue allowed in a density matrix.
    pub density_eig_tol: f64,
    /// Relative singular-value threshold for numerical kernels.
    pub kernel_rel_threshold: f64,
    /// Commutator closure residual for shipped representations.
    pub closure_tol: f64,
    /// Residual threshold for the eigenoperator (weak-coupling) condition.
    pub wcl_tol: f64,
    /// Minimum number of starts for the distance to a coherent-state manifold.
    pub gcs_min_starts: usize,
    /// Best two starts must agree within this infidelity.
    pub gcs_agree_tol: f64,
    pub gcs_max_iter: usize,
    pub sieve_grad_tol: f64,
    pub sieve_max_iter: usize,
    pub sieve_default_starts: usize,
    /// Two minimizers are distinct when their infidelity exceeds this.
    pub sieve_distinct_infidelity: f64,
    /// Rank tolerance for commutant dimensions.
    pub commutant_rank_tol: f64,
    /// Finite-difference step is `fd_step_scale / ‖L‖`.
    pub fd_step_scale: f64,
    /// Significant digits used when serializing floating-point output.
    pub output_significant_digits: usize,
}

impl NumericPolicy {
    pub const STANDARD: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-12,
        unitary_tol: 1e-10,
        norm_tol: 1e-12,
        phase_equal_tol: 1e-10,
        density_hermitian_tol: 1e-12,
        density_trace_tol: 1e-12,
        density_eig_tol: 1e-10,
        kernel_rel_threshold: 1e-9,
        closure_tol: 1e-9,
        wcl_tol: 1e-9,
        gcs_min_starts: 20,
        gcs_agree_tol: 1e-6,
        gcs_max_iter: 500,
        sieve_grad_tol: 1e-8,
        sieve_max_iter: 10_000,
        sieve_default_starts: 32,
        sieve_distinct_infidelity: 1e-4,
        commutant_rank_tol: 1e-8,
        fd_step_scale: 1e-5,
        output_significant_digits: 12,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::STANDARD
    }
}
