//! `estimate-constants` and `sweep`: inequality-lab campaigns.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde_json::json;

use thinns::kv::KvConfig;
use thinns::lab::{
    estimate_at_resolutions, estimates_csv, fit_eps_scaling, planar_torus, thin_torus, ConstantEstimate, EstimateConfig, LabInequality,
};
use thinns::spectral::Torus;

use crate::artifacts::Artifacts;
use crate::config::{ConfigError, ExperimentConfig};
use crate::outcome::{Outcome, RunError};

const DEFAULT_EPS: &[f64] = &[0.25, 0.125, 0.0625, 0.03125, 0.015625];

fn estimate_config(cfg: &ExperimentConfig, canonical: &mut KvConfig) -> Result<EstimateConfig, ConfigError> {
    let kv = &cfg.kv;
    let d = EstimateConfig::default();
    let trials = kv.get_or("trials", d.trials).map_err(|e| cfg.err(e))?;
    let ascent_evals = kv.get_or("ascent", d.ascent_evals).map_err(|e| cfg.err(e))?;
    let seed = kv.get_or("seed", d.seed).map_err(|e| cfg.err(e))?;
    if trials == 0 {
        return Err(cfg.err(kv.error_at("trials", "trials must be positive")));
    }
    canonical.set("trials", &trials.to_string());
    canonical.set("ascent", &ascent_evals.to_string());
    canonical.set("seed", &seed.to_string());
    Ok(EstimateConfig { trials, ascent_evals, seed })
}

fn inequality(cfg: &ExperimentConfig, default: Option<LabInequality>) -> Result<LabInequality, ConfigError> {
    match cfg.kv.get::<String>("inequality").map_err(|e| cfg.err(e))? {
        Some(s) => s.parse().map_err(|e: thinns::Error| cfg.err(cfg.kv.error_at("inequality", e.to_string()))),
        None => default.ok_or_else(|| cfg.err(cfg.kv.error_at("inequality", "missing key 'inequality'"))),
    }
}

pub struct EstimatePlan {
    pub inequality: LabInequality,
    pub tori: Vec<Torus>,
    pub cfg: EstimateConfig,
    pub canonical: KvConfig,
}

pub fn plan_estimate(cfg: &ExperimentConfig) -> Result<EstimatePlan, ConfigError> {
    let kv = &cfg.kv;
    let ineq = inequality(cfg, None)?;
    let mut canonical = KvConfig::default();
    canonical.set("inequality", &ineq.id());
    let l1 = kv.get_or("l1", 1.0f64).map_err(|e| cfg.err(e))?;
    let l2 = kv.get_or("l2", 1.0f64).map_err(|e| cfg.err(e))?;
    canonical.set("l1", &l1.to_string());
    canonical.set("l2", &l2.to_string());
    let planar = matches!(ineq, LabInequality::Lemma6);
    let tori = match kv.get_list::<usize>("grids").map_err(|e| cfg.err(e))? {
        Some(grids) => {
            if !planar {
                return Err(cfg.err(kv.error_at("grids", "grids applies to the planar lemma6 estimate only")));
            }
            canonical.set("grids", &grids.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", "));
            grids
                .iter()
                .map(|&n| planar_torus(l1, l2, n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| cfg.err(kv.error_at("grids", e.to_string())))?
        }
        None => {
            let eps = kv.get_or("eps", 0.125f64).map_err(|e| cfg.err(e))?;
            let n1 = kv.get_or("n1", 8usize).map_err(|e| cfg.err(e))?;
            let n2 = kv.get_or("n2", 8usize).map_err(|e| cfg.err(e))?;
            let n3 = kv.get_or("n3", if planar { 0 } else { 1 }).map_err(|e| cfg.err(e))?;
            for (k, v) in [("eps", eps.to_string()), ("n1", n1.to_string()), ("n2", n2.to_string()), ("n3", n3.to_string())] {
                canonical.set(k, &v);
            }
            let t = Torus::new([l1, l2, eps], [n1, n2, n3]).map_err(|e| cfg.err(kv.error_at("eps", e.to_string())))?;
            vec![t]
        }
    };
    let ecfg = estimate_config(cfg, &mut canonical)?;
    // surface degenerate combinations as config errors before any work
    for t in &tori {
        thinns::lab::Evaluator::new(ineq, *t).map_err(|e| cfg.err(kv.error_at("inequality", e.to_string())))?;
    }
    Ok(EstimatePlan { inequality: ineq, tori, cfg: ecfg, canonical })
}

pub fn estimate(p: &EstimatePlan, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let est = estimate_at_resolutions(p.inequality, &p.tori, &p.cfg)?;
    out.write_csv("estimates.csv", &estimates_csv(&est), json!({ "estimates": est }))?;
    let best = est.iter().map(|e| e.max_ratio).fold(0.0f64, f64::max);
    Ok(Outcome::Done(format!("{}: largest ratio {best:.6}", p.inequality)))
}

pub struct SweepPlan {
    pub inequality: LabInequality,
    pub eps: Vec<f64>,
    pub tori: Vec<Torus>,
    pub cfg: EstimateConfig,
    pub parallelism: usize,
    pub canonical: KvConfig,
}

pub fn plan_sweep(cfg: &ExperimentConfig) -> Result<SweepPlan, ConfigError> {
    let kv = &cfg.kv;
    let ineq = inequality(cfg, Some(LabInequality::Lemma4Inf))?;
    if ineq.eps_power().is_none() {
        return Err(cfg.err(kv.error_at("inequality", format!("{ineq} has no thickness scaling (use lemma4-inf or lemma4-4)"))));
    }
    let mut canonical = KvConfig::default();
    canonical.set("inequality", &ineq.id());
    let eps = kv.get_list::<f64>("eps").map_err(|e| cfg.err(e))?.unwrap_or_else(|| DEFAULT_EPS.to_vec());
    if eps.len() < 3 {
        return Err(cfg.err(kv.error_at("eps", "a sweep needs at least 3 thickness values")));
    }
    let l1 = kv.get_or("l1", 1.0f64).map_err(|e| cfg.err(e))?;
    let l2 = kv.get_or("l2", 1.0f64).map_err(|e| cfg.err(e))?;
    let k_factor = kv.get_or("k_factor", 1.0f64).map_err(|e| cfg.err(e))?;
    let n3 = kv.get_or("n3", 1usize).map_err(|e| cfg.err(e))?;
    let tori = eps
        .iter()
        .map(|&e| thin_torus(l1, l2, e, k_factor, n3))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| cfg.err(kv.error_at("eps", e.to_string())))?;
    for t in &tori {
        thinns::lab::Evaluator::new(ineq, *t).map_err(|e| cfg.err(kv.error_at("n3", e.to_string())))?;
    }
    let default_par = thread::available_parallelism().map_or(1, |n| n.get());
    let parallelism = kv.get_or("parallelism", default_par).map_err(|e| cfg.err(e))?.max(1);
    canonical.set("eps", &eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
    for (k, v) in [("l1", l1.to_string()), ("l2", l2.to_string()), ("k_factor", k_factor.to_string()), ("n3", n3.to_string())] {
        canonical.set(k, &v);
    }
    let ecfg = estimate_config(cfg, &mut canonical)?;
    // parallelism changes scheduling only, so it stays out of the canonical config
    Ok(SweepPlan { inequality: ineq, eps, tori, cfg: ecfg, parallelism, canonical })
}

pub fn sweep(p: &SweepPlan, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<thinns::Result<ConstantEstimate>>>> = Mutex::new((0..p.tori.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..p.parallelism.min(p.tori.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= p.tori.len() {
                    break;
                }
                let r = thinns::lab::estimate_constant(p.inequality, p.tori[i], &p.cfg);
                results.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let mut estimates = Vec::with_capacity(p.tori.len());
    for r in results.into_inner().expect("workers joined") {
        estimates.push(r.expect("every element ran")?);
    }
    for (e, est) in p.eps.iter().zip(&estimates) {
        let one = std::slice::from_ref(est);
        out.write_csv(&format!("eps-{e}/estimate.csv"), &estimates_csv(one), json!({ "eps": e, "estimate": est }))?;
    }
    let fit = fit_eps_scaling(p.inequality, &estimates)?;
    out.write_csv("scaling.csv", &estimates_csv(&estimates), json!({ "fit": fit }))?;
    Ok(Outcome::Done(format!(
        "{}: slope {:.4} +- {:.4} (predicted {})",
        p.inequality,
        fit.slope,
        fit.slope_stderr,
        fit.predicted.map_or("none".to_string(), |v| v.to_string())
    )))
}
