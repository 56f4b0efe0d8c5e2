mod common;

use gcsieve::liealg::spin_rep;
use gcsieve::lindblad::{evolve, purity_rate, LindbladModel};
use gcsieve::opsalg::{kron, mat_exp, OperatorMatrix, PureState, C64};
use gcsieve::seeded_rng;
use gcsieve::uncertainty::{invariant_uncertainty, theorem1_bound};
use proptest::prelude::*;

fn two_j() -> impl Strategy<Value = u32> {
    1u32..=6
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn quasivariance_is_nonnegative_and_phase_blind(seed in any::<u64>(), dim in 2usize..7, phase in -10.0f64..10.0) {
        let mut rng = seeded_rng(seed);
        let op = common::random_operator(dim, &mut rng);
        let psi = PureState::haar_random(dim, &mut rng);
        let q = psi.quasivariance(&op);
        prop_assert!(q >= -1e-12);
        prop_assert!((psi.with_phase(phase).quasivariance(&op) - q).abs() <= 1e-12 * (1.0 + q));
    }

    #[test]
    fn invariant_uncertainty_respects_the_bound(seed in any::<u64>(), tj in two_j()) {
        let rep = spin_rep(tj as f64 / 2.0).unwrap();
        let psi = PureState::haar_random(rep.dim(), &mut seeded_rng(seed));
        let bound = theorem1_bound(&rep).unwrap();
        prop_assert!((bound - tj as f64 / 2.0).abs() < 1e-10);
        prop_assert!(invariant_uncertainty(&psi, &rep).unwrap() >= bound - 1e-9);
    }

    #[test]
    fn purity_rate_is_nonnegative_and_zero_on_eigenvectors(seed in any::<u64>(), dim in 2usize..6) {
        let mut rng = seeded_rng(seed);
        let model = common::random_model(dim, &mut rng);
        prop_assert!(purity_rate(&PureState::haar_random(dim, &mut rng), &model) >= -1e-12);
        // An eigenvector of a single Hermitian jump is not decohered.
        let h = common::random_hermitian(dim, &mut rng);
        let eig = gcsieve::opsalg::hermitian_eigen(&h).unwrap();
        let v = PureState::normalized(eig.eigenvectors.column(0).into_owned()).unwrap();
        let single = LindbladModel::dissipative(vec![h]).unwrap();
        prop_assert!(purity_rate(&v, &single) < 1e-10);
    }

    #[test]
    fn evolution_preserves_trace_and_hermiticity(seed in any::<u64>(), t in 0.0f64..3.0) {
        let mut rng = seeded_rng(seed);
        let model = common::random_model(3, &mut rng);
        let psi = PureState::haar_random(3, &mut rng);
        let rho = &evolve(&model, &psi.projector(), &[t]).unwrap()[0];
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(rho.min_eigenvalue() > -1e-9);
        prop_assert!(rho.purity() <= 1.0 + 1e-10);
    }

    #[test]
    fn exponential_of_commuting_sum_factorizes(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = common::random_hermitian(2, &mut rng).scale(C64::new(0.0, -1.0));
        let b = common::random_hermitian(3, &mut rng).scale(C64::new(0.0, -1.0));
        let sum = &kron(&a, &OperatorMatrix::identity(3)) + &kron(&OperatorMatrix::identity(2), &b);
        let lhs = mat_exp(&sum).unwrap();
        let rhs = kron(&mat_exp(&a).unwrap(), &mat_exp(&b).unwrap());
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-11);
    }

    #[test]
    fn gauge_fixing_keeps_the_ray(seed in any::<u64>(), dim in 1usize..8) {
        let psi = PureState::haar_random(dim, &mut seeded_rng(seed));
        let g = psi.gauge_fixed();
        prop_assert!(g.same_ray(&psi));
        prop_assert!(g.gauge_fixed().infidelity(&g) < 1e-14);
    }
}
