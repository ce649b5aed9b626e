//! `simulate` and `verify-inequalities`: one configured run, its
//! diagnostics and, for verification, fitted inequalities and envelopes.

use serde_json::{json, Value};

use thinns::diagnostics::bounds::{evaluate_theorem_bounds, vacuous_report, BoundInputs, VACUOUS_MESSAGE};
use thinns::diagnostics::fit::{check_diff_inequalities, DEFAULT_SLACK};
use thinns::diagnostics::{DiagnosticSeries, Regime};
use thinns::gronwall::{check_trajectory, solve_envelope, InequalitySystem, SystemRegime};
use thinns::kv::KvConfig;
use thinns::solver::{FailureKind, InitialKind, RunConfig, RunFailure, RUN_KEYS};
use thinns::spectral::checkpoint::Checkpoint;
use thinns::spectral::SpectralField;

use crate::artifacts::Artifacts;
use crate::config::{ConfigError, ExperimentConfig};
use crate::outcome::{Outcome, RunError};

/// Validated run plus its fully spelled-out configuration.
pub struct Prepared {
    pub run: RunConfig,
    pub label: String,
    pub u0: SpectralField,
    pub canonical: KvConfig,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, ConfigError> {
    let kv = cfg.kv.subset(RUN_KEYS);
    let run = RunConfig::from_kv(&kv).map_err(|e| cfg.err(e))?;
    let label = cfg.kv.get_or("label", "run".to_string()).map_err(|e| cfg.err(e))?;
    let u0 = run.initial_field().map_err(|e| cfg.err(cfg.kv.error_at("initial", e.to_string())))?;
    let solver = run.solver().map_err(|e| cfg.err(e))?;
    let bound = solver.cfl_estimate(&u0).map_err(|e| cfg.err(e))?;
    if run.solver.dt > bound {
        let msg = format!("dt = {} exceeds the CFL bound {bound:.3e} for this initial field", run.solver.dt);
        return Err(cfg.err(cfg.kv.error_at("dt", msg)));
    }
    let mut canonical = run.to_kv();
    canonical.set("label", &label);
    Ok(Prepared { run, label, u0, canonical })
}

fn forms(s: &thinns::diagnostics::Sample, r: Regime) -> Value {
    json!({
        "phi": s.phi(r),
        "psi": s.psi(r),
        "phi_tilde": s.phi_tilde(r),
        "psi_tilde": s.psi_tilde(r),
    })
}

/// Per-sample records with both the planar and the full functionals.
pub fn sample_records(series: &DiagnosticSeries) -> Value {
    Value::Array(
        series
            .samples
            .iter()
            .map(|s| {
                json!({
                    "t": s.t,
                    "theta": s.theta,
                    "planar": forms(s, Regime::Planar),
                    "full": forms(s, Regime::Full),
                    "chi": s.chi(),
                    "h1": s.h1,
                    "h2": s.h2,
                    "q_h1": s.q_h1,
                    "forcing": s.forcing,
                    "forcing_work": s.forcing_work,
                    "divergence": s.divergence,
                })
            })
            .collect(),
    )
}

fn write_series(out: &mut Artifacts, series: &DiagnosticSeries) -> Result<(), RunError> {
    let meta = serde_json::to_value(&series.meta).map_err(std::io::Error::other)?;
    out.write_csv(
        "diagnostics.csv",
        &series.to_csv(),
        json!({
            "columns": "functionals in the full form; both forms are listed under samples",
            "meta": meta,
            "samples": sample_records(series),
        }),
    )?;
    Ok(())
}

fn checkpoint_bytes(c: &Checkpoint) -> Result<Vec<u8>, RunError> {
    let mut buf = Vec::new();
    c.write_to(&mut buf)?;
    Ok(buf)
}

/// Runs the solver, writing periodic checkpoints. On blow-up the partial
/// series, the report and the last finite state are written instead.
fn integrate(p: &Prepared, out: &mut Artifacts) -> Result<Result<DiagnosticSeries, Outcome>, RunError> {
    let solver = p.run.solver()?;
    let domain = p.run.domain;
    let mut hook_err: Option<RunError> = None;
    let result = solver.run_with(&p.u0, &p.label, |st| {
        let c = Checkpoint::new(st.u.clone(), Some(domain), st.t, st.step);
        let res = checkpoint_bytes(&c).and_then(|b| Ok(out.write(&format!("checkpoints/step-{:08}.ckpt", st.step), &b)?));
        res.map_err(|e| {
            let m = e.to_string();
            hook_err = Some(e);
            m
        })
    });
    match result {
        Ok((series, end)) => {
            let c = Checkpoint::new(end.u, Some(domain), end.t, end.step);
            out.write("final.ckpt", &checkpoint_bytes(&c)?)?;
            Ok(Ok(series))
        }
        Err(RunFailure { kind: FailureKind::Hook(_), .. }) => Err(hook_err.unwrap_or_else(|| RunError::Io(std::io::Error::other("checkpoint failed")))),
        Err(RunFailure { kind: FailureKind::Step(e), .. }) => Err(RunError::Core(e)),
        Err(RunFailure { kind: FailureKind::BlowUp(report), partial, last_state }) => {
            write_series(out, &partial)?;
            let c = Checkpoint::new(last_state.u.clone(), Some(domain), last_state.t, last_state.step);
            out.write("last_finite_state.ckpt", &checkpoint_bytes(&c)?)?;
            let bounds = vacuous_report(BoundInputs::from_series(&partial));
            out.write_json(
                "blowup.json",
                &json!({
                    "report": report,
                    "message": VACUOUS_MESSAGE,
                    "bounds": bounds,
                    "samples_kept": partial.len(),
                    "last_state": {
                        "t": last_state.t,
                        "step": last_state.step,
                        "h1": last_state.u.norm_h1(),
                        "theta": last_state.u.norm_l2(),
                        "max_coeff": last_state.u.max_abs_coeff(),
                    },
                }),
            )?;
            let msg = format!("{}; {VACUOUS_MESSAGE}", FailureKind::BlowUp(report));
            Ok(Err(Outcome::BlowUp(msg)))
        }
    }
}

pub fn simulate(p: &Prepared, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let series = match integrate(p, out)? {
        Ok(s) => s,
        Err(o) => return Ok(o),
    };
    write_series(out, &series)?;
    let bounds = evaluate_theorem_bounds(&series, BoundInputs::from_series(&series))?;
    out.write_json("bounds.json", &json!({ "bounds": bounds }))?;
    let chi = series.samples.iter().map(|s| s.chi()).fold(0.0f64, f64::max);
    Ok(Outcome::Done(format!("{} samples to t = {}, max chi {chi:.3e}", series.len(), p.run.solver.t_end)))
}

pub struct VerifySettings {
    pub slack: f64,
    pub regime: SystemRegime,
    pub envelope_samples: usize,
}

fn planar_data(run: &RunConfig) -> bool {
    run.initial == InitialKind::ZIndependent && run.forcing.as_ref().is_none_or(|f| f.planar)
}

pub fn verify_settings(cfg: &ExperimentConfig, p: &mut Prepared) -> Result<VerifySettings, ConfigError> {
    let kv = &cfg.kv;
    let slack = kv.get_or("slack", DEFAULT_SLACK).map_err(|e| cfg.err(e))?;
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(cfg.err(kv.error_at("slack", "slack must be finite and nonnegative")));
    }
    let regime = match kv.get::<String>("regime").map_err(|e| cfg.err(e))?.as_deref() {
        None if planar_data(&p.run) => SystemRegime::Lemma3,
        None => SystemRegime::Lemma5,
        Some("lemma3") if planar_data(&p.run) => SystemRegime::Lemma3,
        Some("lemma3") => {
            return Err(cfg.err(kv.error_at("regime", "lemma3 needs z-independent initial data and planar forcing")));
        }
        Some("lemma5") => SystemRegime::Lemma5,
        Some(other) => return Err(cfg.err(kv.error_at("regime", format!("unknown regime '{other}' (lemma3, lemma5)")))),
    };
    let envelope_samples = kv.get_or("envelope_samples", 200usize).map_err(|e| cfg.err(e))?;
    if envelope_samples == 0 {
        return Err(cfg.err(kv.error_at("envelope_samples", "envelope_samples must be positive")));
    }
    p.canonical.set("slack", &slack.to_string());
    p.canonical.set("regime", if regime == SystemRegime::Lemma3 { "lemma3" } else { "lemma5" });
    p.canonical.set("envelope_samples", &envelope_samples.to_string());
    Ok(VerifySettings { slack, regime, envelope_samples })
}

fn file_stem(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

pub fn verify(p: &Prepared, v: &VerifySettings, out: &mut Artifacts) -> Result<Outcome, RunError> {
    let series = match integrate(p, out)? {
        Ok(s) => s,
        Err(o) => return Ok(o),
    };
    write_series(out, &series)?;
    let reports = check_diff_inequalities(&series, v.regime.series_regime(), v.slack)?;
    for r in &reports {
        out.write(&format!("residuals/{}.csv", file_stem(&r.name)), r.residual_csv().as_bytes())?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    out.write_json("inequalities.json", &json!({ "regime": v.regime, "reports": reports }))?;

    let meta = &series.meta;
    let sys = InequalitySystem::from_reports(&reports, meta.u0_h1, meta.f_bound, meta.eps(), v.regime)?;
    let env = solve_envelope(&sys, p.run.solver.t_end, v.envelope_samples)?;
    out.write_csv(
        "envelope.csv",
        &env.to_csv(),
        json!({
            "system": sys,
            "constants": env.constants,
            "psi_bound": env.psi_bound,
            "psi_asymptotic": env.psi_asymptotic,
            "integrability": env.integrability,
            "blow_up_time": env.blow_up_time,
        }),
    )?;
    let c = check_trajectory(&series, &sys, v.slack)?;
    let mut guard = String::from("t,guard,threshold\n");
    for (t, g) in &c.guard {
        guard.push_str(&format!("{t:.17e},{g:.17e},{:.17e}\n", c.threshold));
    }
    if v.regime == SystemRegime::Lemma5 {
        out.write("guard.csv", guard.as_bytes())?;
    }
    let crossing = match (v.regime, c.guard_crossing) {
        (SystemRegime::Lemma3, _) => Value::Null,
        (_, None) => json!("never"),
        (_, Some(t)) => json!(t),
    };
    out.write_json("containment.json", &json!({ "containment": c, "guard_first_crossing": crossing }))?;

    let mut problems = Vec::new();
    if !failed.is_empty() {
        problems.push(format!("inequalities not satisfied: {}", failed.join(", ")));
    }
    if let Some(vio) = &c.first_violation {
        problems.push(format!("{} leaves its envelope at t = {}", vio.quantity, vio.t));
    }
    if v.regime == SystemRegime::Lemma5 {
        if let Some(t) = c.guard_crossing {
            problems.push(format!("guard crosses c18^-1 at t = {t}"));
        }
    }
    Ok(if problems.is_empty() {
        Outcome::Done(format!("{} inequalities hold; trajectory contained", reports.len()))
    } else {
        Outcome::Failed(problems.join("; "))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("full-phi rate"), "full_phi_rate");
    }
}
