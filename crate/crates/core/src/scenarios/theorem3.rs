//! Coherent spin states as pointer states of symmetric dissipation.

use serde_json::json;

use super::config::{ScenarioConfig, Theorem3Config};
use super::output::{Check, ScenarioOutput, Table, Verdict};
use super::{digits, max_gcs_infidelity, minimizer_rows, relative_spread, MINIMIZER_HEADER};
use crate::error::Result;
use crate::gcs::GcsManifold;
use crate::liealg::spin_rep;
use crate::lindblad::{purity_rate, LindbladModel};
use crate::opsalg::PureState;
use crate::seeded_rng;
use crate::sieve::{sieve_search_with, Objective, SieveConfig};
use crate::uncertainty::invariant_uncertainty;

pub fn scenario_theorem3(cfg: &Theorem3Config) -> Result<ScenarioOutput> {
    let mut v = Verdict::new(&ScenarioConfig::Theorem3(cfg.clone()));
    let th = &cfg.thresholds;
    let rep = spin_rep(cfg.j)?;
    let manifold = GcsManifold::new(&rep)?;
    let lambda = cfg.lambda.value();
    let expected_ratio = 2.0 * lambda.norm_sqr();
    let mut minimizers = String::from(MINIMIZER_HEADER);

    // (a) L_a = λ J_a over the Hermitian basis.
    let balanced =
        LindbladModel::dissipative(rep.hermitian_operators().iter().map(|x| x.scale(lambda)).collect())?.with_id("theorem3-balanced");
    let mut rng = seeded_rng(cfg.seed);
    let mut ratios = Vec::with_capacity(cfg.n_random);
    let mut rows = Vec::with_capacity(cfg.n_random);
    for _ in 0..cfg.n_random {
        let psi = PureState::haar_random(rep.dim(), &mut rng);
        let rate = purity_rate(&psi, &balanced);
        let unc = invariant_uncertainty(&psi, &rep)?;
        ratios.push(rate / unc);
        rows.push(vec![unc, rate, rate / unc]);
    }
    let worst = ratios.iter().map(|r| (r - expected_ratio).abs() / expected_ratio).fold(0.0, f64::max);
    v.check(Check::le("balanced_ratio_relative_deviation", worst, th.ratio));
    v.metric("balanced_ratio_expected", expected_ratio);
    v.metric("balanced_ratio_spread", relative_spread(&ratios));
    // su(2) is simple, so the per-summand ratio coincides with the global one.
    v.metric("per_summand_ratios", json!([{"summand": rep.name(), "ratio_mean": ratios.iter().sum::<f64>() / ratios.len() as f64}]));

    let sc = SieveConfig::new(cfg.n_starts, cfg.seed.wrapping_add(1)).with_threads(cfg.threads);
    let report = sieve_search_with(&balanced, Objective::Rate, &sc, Some(&manifold))?;
    let predicted_min = expected_ratio * cfg.j;
    v.check(Check::le("balanced_global_min_deviation", (report.global_min_value - predicted_min).abs(), th.min_value));
    let at_min = report.max_gcs_infidelity_at_minimum(th.min_value).unwrap_or(f64::INFINITY);
    v.check(Check::le("balanced_minimizer_gcs_infidelity", at_min, th.gcs_infidelity));
    v.metric("balanced_global_min", report.global_min_value);
    minimizer_rows("balanced", &report, &mut minimizers);

    // (b) unbalanced rates break the symmetry.
    let ops = rep.hermitian_operators();
    let lindblads: Vec<_> = ops
        .iter()
        .zip(cfg.unbalanced_rates)
        .filter(|(_, g)| *g > 0.0)
        .map(|(x, g)| x.scale_real(g.sqrt()))
        .collect();
    let unbalanced = LindbladModel::dissipative(lindblads)?.with_id("theorem3-unbalanced");
    let sc = SieveConfig::new(cfg.n_starts, cfg.seed.wrapping_add(2)).with_threads(cfg.threads);
    let report_b = sieve_search_with(&unbalanced, Objective::Rate, &sc, Some(&manifold))?;
    let witness = report_b
        .minimizers
        .iter()
        .filter(|m| m.value <= report_b.global_min_value + th.min_value)
        .filter_map(|m| m.gcs_infidelity.map(|x| (x, m.value)))
        .fold((0.0, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc });
    v.check(Check::ge("counterexample_witness_gcs_infidelity", witness.0, th.counterexample_infidelity));
    v.check(Check::le("counterexample_witness_value", witness.1, th.min_value));
    v.metric("counterexample_max_gcs_infidelity", max_gcs_infidelity(&report_b));
    minimizer_rows("unbalanced", &report_b, &mut minimizers);

    Ok(ScenarioOutput {
        verdict: v,
        tables: vec![
            Table::raw("minimizers.csv", minimizers),
            Table::numeric("balanced_ratio.csv", &["invariant_uncertainty", "purity_rate", "ratio"], &rows, digits()),
        ],
    })
}
