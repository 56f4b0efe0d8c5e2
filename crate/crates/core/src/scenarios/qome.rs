//! Damped two-level atom with non-radiative dephasing at finite temperature.

use serde_json::json;

use super::config::{QomeConfig, ScenarioConfig};
use super::output::{Check, ScenarioOutput, Table, Verdict};
use super::{digits, max_gcs_infidelity, minimizer_rows, relative_spread, MINIMIZER_HEADER};
use crate::error::Result;
use crate::gcs::GcsManifold;
use crate::liealg::spin_rep;
use crate::lindblad::{purity_rate, steady_state, Evolver, LindbladModel};
use crate::opsalg::{OperatorMatrix, PureState};
use crate::seeded_rng;
use crate::sieve::{sieve_search_with, Objective, SieveConfig};
use crate::uncertainty::invariant_uncertainty;

/// Qubit ladder operators normalized like the Pauli matrices in the trace
/// form, `σ_± = (σ_x ± iσ_y)/√2`, with `|e⟩` at index 0.
fn ladder() -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let s = std::f64::consts::SQRT_2;
    let sp = OperatorMatrix::unit(2, 0, 1).scale_real(s);
    let sm = OperatorMatrix::unit(2, 1, 0).scale_real(s);
    let sz = OperatorMatrix::from_real_diagonal(&[1.0, -1.0]);
    (sp, sm, sz)
}

/// Lindblad operators `√(2γ₁(n̄+1)) σ₋`, `√(2γ₁n̄) σ₊`, `√(2γ₂) σ_z` (zero
/// rates dropped). `high_temperature` replaces `n̄ + 1` by `n̄`.
pub(crate) fn qome_model(gamma1: f64, gamma2: f64, nbar: f64, high_temperature: bool) -> Result<LindbladModel> {
    let (sp, sm, sz) = ladder();
    let down = if high_temperature { nbar } else { nbar + 1.0 };
    let rates = [(2.0 * gamma1 * down, sm), (2.0 * gamma1 * nbar, sp), (2.0 * gamma2, sz)];
    let lindblads: Vec<OperatorMatrix> =
        rates.into_iter().filter(|(g, _)| *g > 0.0).map(|(g, l)| l.scale_real(g.sqrt())).collect();
    LindbladModel::dissipative(lindblads)
}

pub fn scenario_qome(cfg: &QomeConfig) -> Result<ScenarioOutput> {
    let mut v = Verdict::new(&ScenarioConfig::Qome(cfg.clone()));
    let th = &cfg.thresholds;
    let rep = spin_rep(0.5)?;
    let manifold = GcsManifold::new(&rep)?;
    let ground = PureState::basis(2, 1);
    let mut minimizers = String::from(MINIMIZER_HEADER);
    let mut sweep_rows = Vec::new();
    let mut steady = Vec::new();

    for (k, point) in cfg.sweep.iter().enumerate() {
        let nbar = point.nbar;
        let gamma2 = cfg.balance * nbar * cfg.gamma1;
        let model = qome_model(cfg.gamma1, gamma2, nbar, false)?.with_id(format!("qome-nbar{nbar}"));
        let tag = format!("nbar_{nbar}");
        let mut rng = seeded_rng(cfg.seed.wrapping_add(k as u64));
        let mut ratios = Vec::with_capacity(cfg.n_random);
        for _ in 0..cfg.n_random {
            let psi = PureState::haar_random(2, &mut rng);
            ratios.push(purity_rate(&psi, &model) / invariant_uncertainty(&psi, &rep)?);
        }
        let spread = relative_spread(&ratios);
        let proportional = spread <= th.ratio_spread;
        let mut c = Check::le(&format!("{tag}_ratio_spread"), spread, th.ratio_spread);
        c.passed = proportional == point.expect_proportional;
        c.relation = if point.expect_proportional { "<=" } else { ">" };
        v.check(c);

        let mut sc = SieveConfig::new(cfg.n_starts, cfg.seed.wrapping_add(100 + k as u64)).with_threads(cfg.threads);
        sc.grad_tol = cfg.sieve_grad_tol;
        let report = sieve_search_with(&model, Objective::Rate, &sc, Some(&manifold))?;
        v.check(Check::le(&format!("{tag}_minimizers_are_coherent"), max_gcs_infidelity(&report), th.gcs_infidelity));
        let global: Vec<_> =
            report.minimizers.iter().filter(|m| m.value <= report.global_min_value + th.value_slack).collect();
        let ground_inf = global.iter().map(|m| m.state.infidelity(&ground)).fold(0.0, f64::max);
        if nbar == 0.0 {
            v.check(Check::eq_count(&format!("{tag}_global_minimizers"), global.len(), 1));
            v.check(Check::le(&format!("{tag}_minimizer_ground_infidelity"), ground_inf, th.ground_infidelity));
        }
        minimizer_rows(&tag, &report, &mut minimizers);

        let purity = steady_state(&model).map(|r| r.purity()).unwrap_or(f64::NAN);
        steady.push((nbar, purity));
        sweep_rows.push(vec![
            nbar,
            gamma2,
            spread,
            if proportional { 1.0 } else { 0.0 },
            report.global_min_value,
            ground_inf,
            purity,
        ]);
    }
    steady.sort_by(|a, b| a.0.total_cmp(&b.0));
    let approaching = steady.windows(2).all(|w| w[1].1 <= w[0].1 + th.monotone);
    v.check(Check::flag("steady_state_purity_decreases_with_nbar", approaching));
    v.metric("steady_state_purity", steady.iter().map(|(n, p)| json!({"nbar": n, "purity": p})).collect::<Vec<_>>());

    // Balanced high-temperature trajectories: a unital generator.
    let tr = cfg.trajectory;
    let model = qome_model(cfg.gamma1, cfg.balance * tr.nbar * cfg.gamma1, tr.nbar, true)?.with_id("qome-high-temperature");
    v.metric("trajectory_unitality_defect", model.unitality_defect());
    let times: Vec<f64> = (0..=tr.steps).map(|k| tr.t_max * k as f64 / tr.steps as f64).collect();
    let mut evolver = Evolver::new(&model);
    let mut rng = seeded_rng(cfg.seed ^ 0x7a11);
    let mut initial = vec![PureState::basis(2, 0)];
    initial.extend((1..tr.n_initial.max(1)).map(|_| PureState::haar_random(2, &mut rng)));
    let mut traj = String::from("initial,t,purity\n");
    let mut monotone = true;
    let mut worst_final: f64 = 0.0;
    for (k, psi) in initial.iter().enumerate() {
        let rhos = evolver.evolve(&psi.projector(), &times)?;
        let purity: Vec<f64> = rhos.iter().map(|r| r.purity()).collect();
        monotone &= purity.windows(2).all(|w| w[1] <= w[0] + th.monotone);
        worst_final = worst_final.max((purity.last().copied().unwrap_or(f64::NAN) - 0.5).abs());
        for (t, p) in times.iter().zip(&purity) {
            traj.push_str(&format!(
                "{k},{},{}\n",
                crate::lindblad::fmt_sig(*t, digits()),
                crate::lindblad::fmt_sig(*p, digits())
            ));
        }
    }
    v.check(Check::flag("trajectory_purity_monotone", monotone));
    v.check(Check::le("trajectory_final_purity_deviation", worst_final, th.final_purity));

    Ok(ScenarioOutput {
        verdict: v,
        tables: vec![
            Table::numeric(
                "sweep.csv",
                &["nbar", "gamma2", "ratio_spread", "proportional", "global_min", "ground_infidelity", "steady_purity"],
                &sweep_rows,
                digits(),
            ),
            Table::raw("minimizers.csv", minimizers),
            Table::raw("trajectories.csv", traj),
        ],
    })
}
