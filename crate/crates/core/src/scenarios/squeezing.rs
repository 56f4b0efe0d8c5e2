//! Quadratic dissipation and the quantum Brownian setting.

use std::f64::consts::{PI, TAU};

use serde_json::json;

use super::config::{ScenarioConfig, SqueezingConfig};
use super::output::{Check, ScenarioOutput, Table, Verdict};
use super::{digits, guarded_sieve, max_gcs_infidelity, minimizer_rows, MINIMIZER_HEADER};
use crate::error::{Error, Result};
use crate::gcs::{displace, GcsManifold};
use crate::liealg::{boson_rep, fock_isometry};
use crate::lindblad::{first_order_lindblad_t, LindbladModel};
use crate::opsalg::{OperatorMatrix, PureState};
use crate::sieve::{quadrature_squeezing, sieve_search_with, time_resolved_sieve, Objective, SieveConfig};

/// Wraps an angle difference into `(−π, π]`.
fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

pub fn scenario_squeezing(cfg: &SqueezingConfig) -> Result<ScenarioOutput> {
    let mut v = Verdict::new(&ScenarioConfig::Squeezing(cfg.clone()));
    let th = &cfg.thresholds;
    let mut minimizers = String::from(MINIMIZER_HEADER);
    let sg = cfg.gamma.sqrt();

    let nc = cfg.cutoff;
    let rep = boson_rep(nc, 1)?;
    let ccs_manifold = GcsManifold::new(&rep)?;
    let a = rep.operator("a").expect("boson rep has a").clone();
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let n = &ad * &a;

    // (a) L ∝ a²: coherent states are dark, and so are their cat superpositions.
    let model_a = LindbladModel::dissipative(vec![a2.scale_real(sg)])?.with_id("squeezing-a2");
    let sc = guarded_sieve(nc, 1, cfg.start_max_occupation, cfg.n_starts, cfg.seed, cfg.threads);
    let report_a = sieve_search_with(&model_a, Objective::Rate, &sc, Some(&ccs_manifold))?;
    let mut series_err: f64 = 0.0;
    let mut ccs_min = f64::INFINITY;
    let mut probe_rows = Vec::new();
    for &eta in &cfg.eta_probes {
        // Parameters (u, w) on (x, p) displace by η = (w − iu)/√2.
        let mut params = vec![0.0; ccs_manifold.param_dim()];
        params[1] = eta * std::f64::consts::SQRT_2;
        let ccs = displace(&ccs_manifold, &params)?;
        let q_a2 = ccs.quasivariance(&a2);
        let q_ad2 = ccs.quasivariance(&ad2);
        let oracle_ad2 = 4.0 * eta * eta + 2.0;
        series_err = series_err.max(q_a2.abs()).max((q_ad2 - oracle_ad2).abs());
        ccs_min = ccs_min.min(2.0 * cfg.gamma * q_a2);
        probe_rows.push(vec![eta, ccs.expectation(&a).re, q_a2, q_ad2, oracle_ad2]);
    }
    v.check(Check::le("a2_ccs_series_oracle_error", series_err, th.series));
    v.check(Check::le("a2_global_min", report_a.global_min_value, th.min_value));
    v.check(Check::le("a2_sieve_min_vs_ccs_min", (report_a.global_min_value - ccs_min).abs(), th.min_value));
    let best_ccs = report_a.minimizers.iter().filter_map(|m| m.gcs_infidelity).fold(f64::INFINITY, f64::min);
    v.metric("a2_closest_minimizer_ccs_infidelity", best_ccs);
    v.metric("a2_farthest_minimizer_ccs_infidelity", max_gcs_infidelity(&report_a));
    minimizer_rows("a2", &report_a, &mut minimizers);

    // (b) {a², a†², a†a}: only the vacuum survives.
    let model_b = LindbladModel::dissipative(vec![a2.scale_real(sg), ad2.scale_real(sg), n.scale_real(sg)])?
        .with_id("squeezing-a2-ad2-n");
    // a†² is exact only below occupation cutoff − 1.
    let sc = SieveConfig::new(cfg.n_starts, cfg.seed.wrapping_add(1))
        .with_search_space(fock_isometry(nc, 1, nc - 2))
        .with_start_space(fock_isometry(nc, 1, cfg.start_max_occupation.min(nc - 2)))
        .with_threads(cfg.threads);
    let report_b = sieve_search_with(&model_b, Objective::Rate, &sc, None)?;
    let vacuum = PureState::basis(nc + 1, 0);
    let global: Vec<_> = report_b.minimizers.iter().filter(|m| m.value <= report_b.global_min_value + th.min_value).collect();
    let vac_inf = global.iter().map(|m| m.state.infidelity(&vacuum)).fold(0.0, f64::max);
    v.check(Check::eq_count("vacuum_only_global_minimizers", global.len(), 1));
    v.check(Check::le("vacuum_only_minimizer_infidelity", vac_inf, th.vacuum_infidelity));
    v.metric("vacuum_only_global_min", report_b.global_min_value);
    minimizer_rows("a2_ad2_n", &report_b, &mut minimizers);

    // (c) L = c a + d a† with H = ω(a†a + 1/2).
    let b = &cfg.brownian;
    let (c, d) = (b.c.value(), b.d.value());
    if (c.norm() - d.norm()).abs() <= 1e-12 * (c.norm() + d.norm()) {
        return Err(Error::DegenerateQuadrature);
    }
    if d.norm() > c.norm() {
        return Err(Error::Config(format!("Brownian model needs |c| > |d|, got |c| = {}, |d| = {}", c.norm(), d.norm())));
    }
    let repb = boson_rep(b.cutoff, 1)?;
    let manb = GcsManifold::new(&repb)?;
    let ab = repb.operator("a").expect("boson rep has a").clone();
    let hb = &(&ab.adjoint() * &ab).scale_real(b.omega) + &OperatorMatrix::identity(ab.dim()).scale_real(0.5 * b.omega);
    let model_c = LindbladModel::new(hb, vec![&ab.scale(c) + &ab.adjoint().scale(d)])?.with_id("brownian");
    let sc = guarded_sieve(b.cutoff, 1, cfg.start_max_occupation, cfg.n_starts, cfg.seed.wrapping_add(2), cfg.threads);
    let reports = time_resolved_sieve(&model_c, &b.t_grid, &sc, None)?;
    let ratio = d / c;
    let mut rows = Vec::new();
    let (mut worst_q, mut worst_r, mut worst_phase) = (0.0f64, 0.0f64, 0.0f64);
    for (&t, rep_t) in b.t_grid.iter().zip(&reports) {
        let best = &rep_t.minimizers[0];
        let lt = first_order_lindblad_t(&model_c, t);
        let q = best.state.quasivariance(&lt[0]);
        let (tanh_r, arg_m) = quadrature_squeezing(&best.state, &ab);
        // ⟨ΔaΔa⟩ = −e^{iθ} sinh r cosh r for squeezing phase θ.
        let theta = arg_m + PI;
        let expected = 2.0 * b.omega * t + ratio.arg();
        let phase_err = if ratio.norm() > 1e-12 { wrap(theta - expected).abs() } else { 0.0 };
        worst_q = worst_q.max(q);
        worst_r = worst_r.max((tanh_r - ratio.norm()).abs());
        worst_phase = worst_phase.max(phase_err);
        rows.push(vec![t, rep_t.global_min_value, q, tanh_r, theta.rem_euclid(TAU), expected.rem_euclid(TAU)]);
    }
    v.check(Check::le("brownian_max_quasivariance", worst_q, th.quasivariance));
    v.check(Check::le("brownian_max_tanh_r_error", worst_r, th.tanh_r));
    v.check(Check::le("brownian_max_phase_error", worst_phase, th.phase));
    v.metric("brownian_expected_tanh_r", ratio.norm());

    let period = TAU / b.omega;
    let sc = guarded_sieve(b.cutoff, 1, cfg.start_max_occupation, cfg.n_starts, cfg.seed.wrapping_add(3), cfg.threads);
    let avg = sieve_search_with(&model_c, Objective::PeriodAverage { tau: period, nodes: b.period_nodes }, &sc, Some(&manb))?;
    let avg_inf = avg.max_gcs_infidelity_at_minimum(th.min_value).unwrap_or(f64::INFINITY);
    v.check(Check::le("brownian_period_average_ccs_infidelity", avg_inf, th.ccs_infidelity));
    v.metric("brownian_period_average", json!({"tau": period, "global_min": avg.global_min_value}));
    minimizer_rows("brownian_average", &avg, &mut minimizers);

    Ok(ScenarioOutput {
        verdict: v,
        tables: vec![
            Table::raw("minimizers.csv", minimizers),
            Table::numeric("a2_ccs_probes.csv", &["eta", "re_mean_a", "q_a2", "q_ad2", "series_q_ad2"], &probe_rows, digits()),
            Table::numeric(
                "brownian.csv",
                &["t", "min_value", "quasivariance", "tanh_r", "phase", "expected_phase"],
                &rows,
                digits(),
            ),
        ],
    })
}
