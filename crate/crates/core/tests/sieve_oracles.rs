mod common;

use common::{random_hermitian, random_model, random_operator};
use gcsieve::liealg::{annihilation, spin_rep};
use gcsieve::lindblad::{purity_rate, LindbladModel};
use gcsieve::opsalg::{CVector, OperatorMatrix, PureState, C64};
use gcsieve::seeded_rng;
use gcsieve::sieve::{
    evaluate_objective, gradient_of_objective, quadrature_squeezing, sieve_search, sieve_search_with, Objective,
    SieveConfig,
};
use gcsieve::uncertainty::invariant_uncertainty;
use rand::Rng;

fn retract(psi: &PureState, v: &CVector, h: f64) -> PureState {
    PureState::normalized(psi.amplitudes() + v * C64::new(h, 0.0)).unwrap()
}

/// Random direction orthogonal to `ψ` in the complex sense.
fn tangent(psi: &PureState, rng: &mut gcsieve::SeededRng) -> CVector {
    let r = PureState::haar_random(psi.dim(), rng).into_amplitudes();
    let p = psi.amplitudes();
    let t = &r - p * p.dotc(&r);
    &t / C64::new(t.norm(), 0.0)
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = seeded_rng(41);
    let objectives = [
        Objective::Rate,
        Objective::RateAt { t: 0.7 },
        Objective::PeriodAverage { tau: 1.5, nodes: 5 },
        Objective::Average { tau: 0.4, n_steps: 1 },
    ];
    for dim in [2, 3, 5] {
        let model = random_model(dim, &mut rng);
        for obj in objectives {
            for _ in 0..3 {
                let psi = PureState::haar_random(dim, &mut rng);
                let g = gradient_of_objective(&psi, &model, obj).unwrap();
                let v = tangent(&psi, &mut rng);
                let h = 1e-5;
                let fp = evaluate_objective(&retract(&psi, &v, h), &model, obj).unwrap();
                let fm = evaluate_objective(&retract(&psi, &v, -h), &model, obj).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let analytic = g.dotc(&v).re;
                let scale = g.norm().max(1e-3);
                assert!((fd - analytic).abs() <= 1e-6 * scale, "{obj:?} dim {dim}: {fd} vs {analytic}");
            }
        }
    }
}

#[test]
fn objective_is_phase_invariant() {
    let mut rng = seeded_rng(42);
    let model = random_model(4, &mut rng);
    for obj in [Objective::Rate, Objective::PeriodAverage { tau: 1.0, nodes: 4 }, Objective::Average { tau: 0.5, n_steps: 4 }] {
        let psi = PureState::haar_random(4, &mut rng);
        let a = evaluate_objective(&psi, &model, obj).unwrap();
        let b = evaluate_objective(&psi.with_phase(rng.gen_range(0.0..6.0)), &model, obj).unwrap();
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn minimizers_are_stationary_and_reevaluate() {
    let mut rng = seeded_rng(43);
    for dim in [2, 3, 4] {
        let model = random_model(dim, &mut rng);
        let report = sieve_search(&model, Objective::Rate, 16, 7).unwrap();
        assert!(!report.minimizers.is_empty());
        for m in &report.minimizers {
            if m.converged {
                let g = gradient_of_objective(&m.state, &model, Objective::Rate).unwrap();
                assert!(g.norm() <= 1e-6, "gradient {}", g.norm());
            }
            let again = evaluate_objective(&m.state, &model, Objective::Rate).unwrap();
            assert!((again - m.value).abs() <= 1e-8);
        }
        let sorted = report.minimizers.windows(2).all(|w| w[0].value <= w[1].value);
        assert!(sorted);
        assert_eq!(report.global_min_value, report.minimizers[0].value);
    }
}

#[test]
fn qubit_minimum_matches_bloch_grid() {
    let mut rng = seeded_rng(44);
    for _ in 0..3 {
        let model = random_model(2, &mut rng);
        let report = sieve_search(&model, Objective::Rate, 16, 1).unwrap();
        let n = 400;
        let mut grid_min = f64::INFINITY;
        for i in 0..=n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            for k in 0..n {
                let phi = std::f64::consts::TAU * k as f64 / n as f64;
                let v = CVector::from_vec(vec![
                    C64::new((theta / 2.0).cos(), 0.0),
                    C64::from_polar((theta / 2.0).sin(), phi),
                ]);
                grid_min = grid_min.min(purity_rate(&PureState::new(v).unwrap(), &model));
            }
        }
        assert!(report.global_min_value <= grid_min + 1e-12);
        assert!(grid_min - report.global_min_value <= 1e-3 * grid_min.max(1.0));
    }
}

#[test]
fn sampled_minimum_never_beats_sieve() {
    let mut rng = seeded_rng(45);
    for dim in [3, 4] {
        let model = random_model(dim, &mut rng);
        let report = sieve_search(&model, Objective::Rate, 24, 2).unwrap();
        let sampled = (0..100_000)
            .map(|_| purity_rate(&PureState::haar_random(dim, &mut rng), &model))
            .fold(f64::INFINITY, f64::min);
        assert!(report.global_min_value <= sampled + 1e-10, "{} > {sampled}", report.global_min_value);
    }
}

#[test]
fn balanced_spin_rate_is_proportional_to_invariant_uncertainty() {
    let mut rng = seeded_rng(46);
    let lambda = C64::new(0.6, 0.3);
    let rep = spin_rep(1.0).unwrap();
    let ls: Vec<OperatorMatrix> = ["jx", "jy", "jz"].iter().map(|l| rep.operator(l).unwrap().scale(lambda)).collect();
    let model = LindbladModel::new(random_hermitian(3, &mut rng), ls).unwrap();
    for _ in 0..100 {
        let psi = PureState::haar_random(3, &mut rng);
        let want = 2.0 * lambda.norm_sqr() * invariant_uncertainty(&psi, &rep).unwrap();
        assert!((purity_rate(&psi, &model) - want).abs() < 1e-10);
    }
}

#[test]
fn squeezed_vacuum_annihilated_by_bogoliubov_jump() {
    // S(ξ)|0⟩ is annihilated by a cosh r + e^{iθ} sinh r a†; its Fock series is
    // ψ_{2n} = (−e^{iθ} tanh r)^n √(2n)! / (2ⁿ n! √cosh r).
    let (c, d) = (1.0, 0.5);
    let (r, theta) = ((d / c as f64).atanh(), 0.0);
    let cutoff = 60;
    let mut v = CVector::zeros(cutoff + 1);
    for n in 0..=cutoff / 2 {
        let coeff = C64::from_polar(-r.tanh(), 0.0).powu(n as u32) * C64::from_polar(1.0, theta * n as f64);
        let f2n: f64 = (1..=2 * n).map(|k| (k as f64).sqrt()).product();
        let nf: f64 = (1..=n).map(|k| k as f64).product();
        v[2 * n] = coeff * f2n / (2f64.powi(n as i32) * nf * r.cosh().sqrt());
    }
    let psi = PureState::normalized(v).unwrap();
    let a = annihilation(cutoff);
    let l = &a.scale_real(c) + &a.adjoint().scale_real(d);
    assert!(psi.quasivariance(&l) < 1e-10, "{}", psi.quasivariance(&l));
    let (tanh_r, phase) = quadrature_squeezing(&psi, &a);
    assert!((tanh_r - 0.5).abs() < 1e-10);
    assert!((phase.abs() - std::f64::consts::PI).abs() < 1e-10);
    // The sieve recovers it up to a displacement, which leaves the squeezing
    // parameters unchanged.
    let h = (&a.adjoint() * &a).scale_real(1.0);
    let model = LindbladModel::new(h, vec![l]).unwrap();
    let cfg = SieveConfig::new(8, 3)
        .with_search_space(gcsieve::liealg::fock_isometry(cutoff, 1, cutoff - 1))
        .with_start_space(gcsieve::liealg::fock_isometry(cutoff, 1, 3));
    let report = sieve_search_with(&model, Objective::Rate, &cfg, None).unwrap();
    let best = &report.minimizers[0].state;
    assert!(report.global_min_value < 1e-8);
    let (tr, ph) = quadrature_squeezing(best, &a);
    assert!((tr - 0.5).abs() < 1e-6 && (ph.abs() - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn random_operator_models_have_positive_rates() {
    let mut rng = seeded_rng(47);
    for _ in 0..20 {
        let l = random_operator(3, &mut rng);
        let model = LindbladModel::dissipative(vec![l]).unwrap();
        assert!(purity_rate(&PureState::haar_random(3, &mut rng), &model) >= 0.0);
    }
}
