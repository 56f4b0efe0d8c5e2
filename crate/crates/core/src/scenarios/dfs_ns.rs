//! Decoherence-free subspace and noiseless subsystem of collective spins.

use serde_json::json;

use super::config::{DfsNsConfig, ScenarioConfig};
use super::output::{Check, ScenarioOutput, Table, Verdict};
use super::{digits, random_in};
use crate::error::Result;
use crate::liealg::collective_spin_rep;
use crate::lindblad::{dissipator, Evolver, LindbladModel};
use crate::seeded_rng;
use crate::structure::{decompose, dfs_extract, ns_identify, verify_theorem4};

pub fn scenario_dfs_ns(cfg: &DfsNsConfig) -> Result<ScenarioOutput> {
    let mut v = Verdict::new(&ScenarioConfig::DfsNs(cfg.clone()));
    let th = &cfg.thresholds;
    let rep = collective_spin_rep(cfg.sites)?;
    let sg = cfg.gamma.sqrt();
    let model = LindbladModel::dissipative(rep.hermitian_operators().iter().map(|x| x.scale_real(sg)).collect())?
        .with_id(format!("collective-{}", cfg.sites));

    let dec = decompose(&rep)?;
    let block_err = dec.blocks.iter().map(|b| dec.block_error(b)).fold(0.0, f64::max);
    v.check(Check::le("decomposition_reconstruction_error", dec.reconstruction_error(), th.factorization));
    v.check(Check::le("decomposition_block_factorization_error", block_err, th.factorization));
    let found: Vec<(String, usize)> = dec.blocks.iter().map(|b| (b.j_label.clone(), b.multiplicity)).collect();
    v.metric("multiplicities", &found);

    let dfs = dfs_extract(&model)?;
    let t4 = verify_theorem4(&model, &rep, cfg.n_starts, cfg.seed)?;
    v.check(Check::le("dfs_max_invariant_uncertainty", t4.max_dfs_uncertainty, th.zero));
    v.check(Check::le("dfs_max_purity_rate", t4.max_dfs_purity_rate, th.zero));
    v.check(Check::ge(
        "complement_min_uncertainty_minus_bound",
        t4.complement_min_uncertainty - t4.smallest_nonzero_bound,
        -th.min_uncertainty,
    ));
    v.metric("theorem4", &t4);

    // DFS states do not move under the full evolution.
    let mut rng = seeded_rng(cfg.seed ^ 0xdf5);
    let mut probes = dfs.vectors();
    if dfs.dim() > 0 {
        probes.push(random_in(dfs.basis(), &mut rng));
    }
    let times: Vec<f64> = cfg.evolve_times.iter().map(|t| t / cfg.gamma.max(f64::MIN_POSITIVE)).collect();
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let mut evolver = Evolver::new(&model);
    let (mut drift, mut dnorm) = (0.0f64, 0.0f64);
    for p in &probes {
        let rho0 = p.projector();
        dnorm = dnorm.max(dissipator(&model, &rho0)?.norm());
        for rho in evolver.evolve(&rho0, &sorted)? {
            drift = drift.max(1.0 - rho.fidelity_with(p));
        }
    }
    if dfs.dim() > 0 {
        v.check(Check::le("dfs_dissipator_norm", dnorm, th.zero));
        v.check(Check::le("dfs_max_infidelity_under_evolution", drift, th.stationarity));
    }

    let mut ns_summary = serde_json::Value::Null;
    if let Some(exp) = &cfg.expected {
        v.check(Check::flag("multiplicities_match", found == exp.multiplicities));
        v.check(Check::eq_count("dfs_dimension", dfs.dim(), exp.dfs_dim));
        let ns = ns_identify(&dec, exp.ns_j)?;
        v.check(Check::eq_count("ns_dimension", ns.ns_dim, exp.ns_dim));
        v.check(Check::eq_count("noisy_dimension", ns.noisy_dim, exp.noisy_dim));
        v.check(Check::eq_count("ns_commutant_dimension", ns.commutant_dim, ns.ns_dim * ns.ns_dim));
        v.check(Check::le("ns_factorization_error", ns.factorization_error, th.factorization));
        if let Some(b) = t4.blocks.iter().find(|b| (b.j - exp.ns_j).abs() < 1e-9) {
            v.check(Check::le("ns_block_min_uncertainty_deviation", (b.min_uncertainty - b.bound).abs(), th.min_uncertainty));
            v.check(Check::gt("ns_block_min_purity_rate", b.min_purity_rate, 0.0));
        }
        ns_summary = json!(ns);
    }
    v.metric("noiseless_subsystem", ns_summary);

    let mut comparison = vec![vec![-1.0, dfs.dim() as f64, t4.max_dfs_uncertainty, t4.max_dfs_purity_rate]];
    for b in &t4.blocks {
        let dim = dec.block(b.j).map(|x| x.isometry.ncols()).unwrap_or(0);
        comparison.push(vec![b.j, dim as f64, b.min_uncertainty, b.min_purity_rate]);
    }
    Ok(ScenarioOutput {
        verdict: v,
        tables: vec![
            Table::raw("decomposition.csv", dec.to_csv()),
            // j = −1 marks the DFS row, whose columns hold maxima rather than minima.
            Table::numeric("comparison.csv", &["j", "dim", "uncertainty", "purity_rate"], &comparison, digits()),
        ],
    })
}
