//! `rescale-check` and `thresholds`.

use serde_json::json;

use thinns::gronwall::rescale::check_identities;
use thinns::gronwall::thresholds::{default_alpha, ThresholdParams, ThresholdRow};
use thinns::gronwall::{inverse_rescale, literature_thresholds, rescale};
use thinns::kv::KvConfig;
use thinns::solver::{make_initial, InitialKind, InitialParams};
use thinns::spectral::{DomainSpec, SpectralField};

use crate::artifacts::Artifacts;
use crate::config::{ConfigError, ExperimentConfig};
use crate::outcome::{Outcome, RunError};

pub struct RescalePlan {
    pub domain: DomainSpec,
    pub params: InitialParams,
    pub tolerance: f64,
    pub canonical: KvConfig,
}

pub fn plan_rescale(cfg: &ExperimentConfig) -> Result<RescalePlan, ConfigError> {
    let kv = &cfg.kv;
    let get = |k: &str, d: f64| kv.get_or(k, d).map_err(|e| cfg.err(e));
    let getn = |k: &str, d: usize| kv.get_or(k, d).map_err(|e| cfg.err(e));
    let (l1, l2, eps, nu) = (get("l1", 2.0)?, get("l2", 1.0)?, get("eps", 0.125)?, get("nu", 0.5)?);
    let modes = [getn("n1", 6)?, getn("n2", 6)?, getn("n3", 2)?];
    let domain = DomainSpec::new(l1, l2, eps, nu, modes).map_err(|e| cfg.err(kv.error_at("l1", e.to_string())))?;
    if l2 > l1 {
        return Err(cfg.err(kv.error_at("l2", format!("rescaling needs l1 >= l2, got l1 = {l1}, l2 = {l2}"))));
    }
    let params = InitialParams {
        amplitude: get("amplitude", 1.0)?,
        seed: kv.get_or("seed", 0u64).map_err(|e| cfg.err(e))?,
        ..Default::default()
    };
    let tolerance = get("tolerance", 1e-12)?;
    let mut canonical = KvConfig::default();
    for (k, v) in [
        ("l1", l1.to_string()),
        ("l2", l2.to_string()),
        ("eps", eps.to_string()),
        ("nu", nu.to_string()),
        ("n1", modes[0].to_string()),
        ("n2", modes[1].to_string()),
        ("n3", modes[2].to_string()),
        ("amplitude", params.amplitude.to_string()),
        ("seed", params.seed.to_string()),
        ("tolerance", tolerance.to_string()),
    ] {
        canonical.set(k, &v);
    }
    Ok(RescalePlan { domain, params, tolerance, canonical })
}

fn rel(a: &SpectralField, b: &SpectralField) -> thinns::Result<f64> {
    Ok(a.sub(b)?.norm_l2() / b.norm_l2().max(f64::MIN_POSITIVE))
}

pub fn rescale_check(p: &RescalePlan, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let t = p.domain.torus();
    let nu = p.domain.nu;
    let u = make_initial(InitialKind::RandomDivfree, t, &p.params)?;
    let f_params = InitialParams { seed: p.params.seed.wrapping_add(1), ..p.params };
    let f = make_initial(InitialKind::RandomDivfree, t, &f_params)?;
    let ids = check_identities(&u, &f, nu)?;
    let r = rescale(&u, &f, nu)?;
    let (u_back, f_back) = inverse_rescale(&r, t, nu)?;
    let inverse = rel(&u_back, &u)?.max(rel(&f_back, &f)?);
    let identity = ids.max_relative_error();
    out.write_json(
        "rescale.json",
        &json!({
            "identities": ids,
            "identity_error": identity,
            "inverse_error": inverse,
            "unit_lengths": r.torus.lengths,
            "unit_modes": r.torus.modes,
            "periods": r.n,
            "time_factor": r.time_factor,
            "tolerance": p.tolerance,
        }),
    )?;
    let msg = format!("identity error {identity:.3e}, inverse error {inverse:.3e}");
    Ok(if identity <= p.tolerance && inverse <= p.tolerance {
        Outcome::Done(msg)
    } else {
        Outcome::Failed(format!("{msg} above tolerance {:e}", p.tolerance))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// `1 / ln(1/eps)`.
    InverseLog,
    Constant(f64),
}

impl Alpha {
    fn eval(self, eps: f64) -> f64 {
        match self {
            Alpha::InverseLog => default_alpha(eps),
            Alpha::Constant(a) => a,
        }
    }

    fn describe(self) -> String {
        match self {
            Alpha::InverseLog => "1/ln(1/eps); default for plotting only, not a value from the literature".into(),
            Alpha::Constant(a) => format!("constant {a}, user supplied"),
        }
    }
}

pub struct ThresholdPlan {
    pub eps: Vec<f64>,
    pub params: ThresholdParams,
    pub alpha: Alpha,
    pub canonical: KvConfig,
}

pub fn plan_thresholds(cfg: &ExperimentConfig) -> Result<ThresholdPlan, ConfigError> {
    let kv = &cfg.kv;
    let eps = kv
        .get_list::<f64>("eps")
        .map_err(|e| cfg.err(e))?
        .unwrap_or_else(|| (1..=10).map(|k| 2f64.powi(-k)).collect());
    if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(cfg.err(kv.error_at("eps", format!("eps must lie in (0, 1), got {bad}"))));
    }
    let delta = kv.get_or("delta", 0.0f64).map_err(|e| cfg.err(e))?;
    let c = kv.get_or("c", 1.0f64).map_err(|e| cfg.err(e))?;
    if !(c > 0.0) {
        return Err(cfg.err(kv.error_at("c", "c must be positive")));
    }
    let alpha_text = kv.get_or("alpha", "log".to_string()).map_err(|e| cfg.err(e))?;
    let alpha = match alpha_text.as_str() {
        "log" => Alpha::InverseLog,
        s => Alpha::Constant(
            s.parse()
                .map_err(|_| cfg.err(kv.error_at("alpha", format!("alpha must be 'log' or a number, got '{s}'"))))?,
        ),
    };
    let mut canonical = KvConfig::default();
    canonical.set("eps", &eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
    canonical.set("delta", &delta.to_string());
    canonical.set("c", &c.to_string());
    canonical.set("alpha", &alpha_text);
    Ok(ThresholdPlan { eps, params: ThresholdParams::uniform(delta, c), alpha, canonical })
}

pub fn thresholds(p: &ThresholdPlan, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let alpha = p.alpha;
    let rows = literature_thresholds(&p.eps, &p.params, &move |e| alpha.eval(e))?;
    let mut csv = String::from(ThresholdRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    out.write_csv("thresholds.csv", &csv, json!({ "alpha": alpha.describe(), "params": p.params, "rows": rows }))?;
    Ok(Outcome::Done(format!("{} rows", rows.len())))
}
