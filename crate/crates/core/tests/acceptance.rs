//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use thinns::diagnostics::bounds::{evaluate_theorem_bounds, BoundInputs};
use thinns::diagnostics::fit::{check_diff_inequalities, energy_budget_residuals, DEFAULT_SLACK};
use thinns::diagnostics::{check_enstrophy_miracle, s_term_counterexample, s_term_residual, DiagnosticSeries, Regime};
use thinns::error::Result;
use thinns::gronwall::rescale::check_identities;
use thinns::gronwall::{check_trajectory, inverse_rescale, rescale, InequalitySystem, SystemRegime};
use thinns::lab::{
    estimate_at_resolutions, estimate_constant, fit_eps_scaling, planar_torus, thin_torus, EstimateConfig,
    LabInequality,
};
use thinns::solver::{ForcingSpec, InitialKind, InitialParams, Modulation, RunConfig, Scheme, Solver, SolverConfig};
use thinns::spectral::{SpectralField, Torus, Transformer};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn random_field(t: Torus, rng: &mut ChaCha8Rng) -> SpectralField {
    SpectralField::from_fn(t, |_| {
        [(); 3].map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    })
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).map(|d| d.norm_l2()).unwrap_or(f64::INFINITY) / b.norm_l2().max(f64::MIN_POSITIVE)
}

// 1
fn operator_algebra() -> Result<Outcome> {
    let t = Torus::new([1.0, 1.0, 0.125], [16, 16, 4])?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let f = random_field(t, &mut rng);
        let lf = f.leray();
        let n = f.norm_l2();
        worst[0] = worst[0].max(rel(&lf.leray(), &lf));
        worst[1] = worst[1].max(f.proj_p().add(&f.proj_q())?.sub(&f)?.norm_l2() / n);
        worst[2] = worst[2].max(f.proj_q().proj_p().norm_l2() / n);
        worst[3] = worst[3].max(lf.max_relative_divergence());
    }
    outcome(
        worst.iter().all(|w| *w <= 1e-12),
        format!(
            "|L^2f-Lf| {:.1e}, |(P+Q)f-f| {:.1e}, |PQf| {:.1e}, div Lf {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

// 2
fn parseval_round_trip() -> Result<Outcome> {
    let t = Torus::new([2.0, 1.0, 0.125], [16, 16, 4])?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tr = Transformer::new(t.padded_grid());
    let (mut parseval, mut round) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let f = random_field(t, &mut rng);
        let f = f.leray();
        let p = tr.to_physical_vec(&f)?;
        let quad: f64 = p.iter().map(|c| c.norm_l2().powi(2)).sum::<f64>().sqrt();
        parseval = parseval.max((quad - f.norm_l2()).abs() / f.norm_l2());
        round = round.max(rel(&tr.to_spectral_vec(&p, t)?, &f));
    }
    outcome(parseval <= 1e-12 && round <= 1e-12, format!("Parseval {parseval:.1e}, round trip {round:.1e}"))
}

fn shear(t: Torus, amp: f64) -> SpectralField {
    let z = Complex64::new(0.0, 0.0);
    let mut u = SpectralField::zeros(t);
    u.set_pair([1, 0, 0], [z, Complex64::new(amp, 0.0), z]);
    u
}

fn end_state(t: Torus, nu: f64, forcing: ForcingSpec, cfg: SolverConfig, u0: &SpectralField) -> Result<SpectralField> {
    let s = Solver::new(t, nu, forcing, cfg)?;
    s.run_with(u0, "probe", |_| Ok(()))
        .map(|(_, st)| st.u)
        .map_err(|e| thinns::error::Error::InvalidArgument(e.to_string()))
}

// 3
fn single_mode_decay() -> Result<Outcome> {
    let t = Torus::new([1.0, 1.0, 0.125], [4, 4, 1])?;
    let nu = 0.05;
    let lam = -nu * 4.0 * PI * PI;
    let a0 = 0.5;
    let mut notes = Vec::new();
    let mut pass = true;

    // pure decay at dt = 1e-3
    for scheme in [Scheme::EtdRk2, Scheme::EtdRk4, Scheme::ImexCn] {
        let cfg = SolverConfig { dt: 1e-3, t_end: 1.0, scheme, diag_stride: 1000, ..Default::default() };
        let u = end_state(t, nu, ForcingSpec::none(t), cfg, &shear(t, a0))?;
        let exact = a0 * lam.exp();
        let err = ((u.get([1, 0, 0])[1].re - exact) / exact).abs();
        pass &= err <= 1e-6;
        notes.push(format!("{scheme} err {err:.1e}"));
    }

    // order: Crank-Nicolson on the decay itself, the exponential schemes on
    // a sinusoidally forced mode (they integrate the decay exactly)
    // small amplitude keeps the coarse steps inside the CFL limit
    let a0 = 0.01;
    let omega = 2.0 * PI;
    let g = 0.03;
    let forcing = ForcingSpec::new(&shear(t, g), Modulation::Sinusoidal { a: 0.0, b: 1.0, omega, phase: 0.0 });
    let forced_exact = a0 * lam.exp() + g * (omega * lam.exp() - lam * omega.sin() - omega * omega.cos()) / (lam * lam + omega * omega);
    for (scheme, forced) in [(Scheme::ImexCn, false), (Scheme::EtdRk2, true), (Scheme::EtdRk4, true)] {
        let (f, exact) = if forced { (forcing.clone(), forced_exact) } else { (ForcingSpec::none(t), a0 * lam.exp()) };
        let mut errs = Vec::new();
        for dt in [0.05, 0.025, 0.0125] {
            let cfg = SolverConfig { dt, t_end: 1.0, scheme, diag_stride: 1000, ..Default::default() };
            let u = end_state(t, nu, f.clone(), cfg, &shear(t, a0))?;
            errs.push((u.get([1, 0, 0])[1].re - exact).abs());
        }
        let p1 = (errs[0] / errs[1]).log2();
        let p2 = (errs[1] / errs[2]).log2();
        let want = scheme.order() as f64;
        pass &= (p1 - want).abs() <= 0.2 && (p2 - want).abs() <= 0.2;
        notes.push(format!("{scheme} order {p1:.2}/{p2:.2}"));
    }
    outcome(pass, notes.join(", "))
}

fn run_text(text: &str, label: &str) -> Result<DiagnosticSeries> {
    let cfg = RunConfig::parse(text)?;
    let u0 = cfg.initial_field()?;
    cfg.solver()?
        .run_with(&u0, label, |_| Ok(()))
        .map(|(s, _)| s)
        .map_err(|e| thinns::error::Error::InvalidArgument(format!("{label}: {e}")))
}

const ENERGY_RUN: &str = "l1 = 1\nl2 = 1\neps = 0.2\nnu = 0.02\nn1 = 8\nn2 = 8\nn3 = 2\n\
    initial = random-divfree\namplitude = 1\nkmax = 4\nseed = 11\n\
    scheme = etd-rk4\ndt = 1e-3\nt_end = 0.5\ndiag_stride = 1\ndealias = true\n";

// 4
fn energy_identity() -> Result<Outcome> {
    let s = run_text(ENERGY_RUN, "energy")?;
    let res = energy_budget_residuals(&s)?;
    // residuals are relative to 2 nu |Du|^2
    let worst = res.iter().map(|(_, r)| 2.0 * r).fold(0.0f64, f64::max);
    outcome(worst <= 1e-6, format!("{} intervals, max |residual| / (nu |Du|^2) = {worst:.2e}", res.len()))
}

// 5
fn enstrophy_miracle() -> Result<Outcome> {
    let t = Torus::new([1.0, 1.0, 0.125], [12, 12, 0])?;
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let params = InitialParams { amplitude: 1.0, slope: -1.0, kmax: 8, q_fraction: 0.0, seed };
        let r = thinns::solver::make_initial(InitialKind::ZIndependent, t, &params)?.proj_r().leray();
        worst = worst.max(check_enstrophy_miracle(&r)?.abs());
    }
    let (r, s) = s_term_counterexample(t)?;
    let counter = s_term_residual(&r, &s)?.abs();
    outcome(worst <= 1e-10 && counter >= 1e-2, format!("max miracle residual {worst:.1e}, s-term counterexample {counter:.3}"))
}

const CLOSURE_RUN: &str = "preset = planar\nl1 = 1\nl2 = 1\neps = 0.125\nnu = 0.05\nn1 = 8\nn2 = 8\nn3 = 2\n\
    amplitude = 1\nkmax = 4\nseed = 6\nforcing = random\nforcing_amplitude = 0.5\n\
    scheme = etd-rk2\ndt = 2e-3\nt_end = 5\ndiag_stride = 10\n";

// 6
fn planar_closure() -> Result<Outcome> {
    let s = run_text(CLOSURE_RUN, "closure")?;
    let worst = s.samples.iter().map(|x| if x.h1 > 0.0 { x.q_h1 / x.h1 } else { 0.0 }).fold(0.0f64, f64::max);
    let t_end = s.samples.last().map_or(0.0, |x| x.t);
    outcome(worst <= 1e-10 && t_end >= 5.0 - 1e-9, format!("max |Qu|_H1 / |u|_H1 = {worst:.1e} on [0, {t_end}]"))
}

// 7
fn thin_scaling() -> Result<Outcome> {
    let cfg = EstimateConfig { trials: 32, ascent_evals: 32, seed: 7 };
    let mut notes = Vec::new();
    let mut pass = true;
    for ineq in [LabInequality::Lemma4Inf, LabInequality::Lemma4Four] {
        let est = (2..=6)
            .map(|k| {
                let eps = 2f64.powi(-k);
                estimate_constant(ineq, thin_torus(1.0, 1.0, eps, 1.0, 1)?, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        let fit = fit_eps_scaling(ineq, &est)?;
        let want = ineq.eps_power().unwrap_or(f64::NAN);
        pass &= (fit.slope - want).abs() <= 0.1;
        notes.push(format!("{ineq} slope {:.3} (target {want})", fit.slope));
    }
    outcome(pass, notes.join(", "))
}

// 8
fn lemma6_constant() -> Result<Outcome> {
    let cfg = EstimateConfig { trials: 1000, ascent_evals: 200, seed: 8 };
    let tori = [planar_torus(1.0, 1.0, 64)?, planar_torus(1.0, 1.0, 128)?];
    let est = estimate_at_resolutions(LabInequality::Lemma6, &tori, &cfg)?;
    let (a, b) = (est[0].max_ratio, est[1].max_ratio);
    let drift = est[1].convergence.unwrap_or(f64::INFINITY);
    let floor = 0.4415;
    outcome(
        a.is_finite() && b.is_finite() && a >= floor && b >= floor && drift <= 0.05,
        format!("max ratio {a:.4} (64^2), {b:.4} (128^2), change {:.2}%", 100.0 * drift),
    )
}

struct Trajectory {
    text: String,
    regime: Regime,
}

/// Small-data runs with nu = l1 = l2 = 1 and M <= 0.1.
fn small_data_runs() -> Vec<Trajectory> {
    let base = "l1 = 1\nl2 = 1\neps = 0.125\nnu = 1\nn1 = 6\nn2 = 6\nn3 = 2\nkmax = 3\n\
        scheme = etd-rk4\ndt = 5e-4\nt_end = 0.5\ndiag_stride = 1\n";
    let planar = [
        "amplitude = 0.1\nseed = 1\n",
        "amplitude = 0.08\nseed = 2\nforcing = random\nforcing_amplitude = 0.05\n",
        "amplitude = 0.1\nseed = 3\nforcing = random\nforcing_amplitude = 0.03\nmodulation = sinusoidal\nforcing_b = 0.02\nforcing_omega = 6\n",
        "amplitude = 0.05\nseed = 4\nforcing = random\nforcing_amplitude = 0.1\n",
        "amplitude = 0.1\nslope = -1\nseed = 5\n",
    ];
    let full = [
        "amplitude = 0.1\nq_fraction = 0.3\nseed = 11\n",
        "amplitude = 0.1\nq_fraction = 0.5\nseed = 12\nforcing = random\nforcing_amplitude = 0.05\nforcing_planar = false\n",
        "amplitude = 0.08\nq_fraction = 1\nseed = 13\nforcing = random\nforcing_amplitude = 0.03\n",
        "amplitude = 0.1\nq_fraction = 0.2\nslope = -1\nseed = 14\n",
        "amplitude = 0.06\nq_fraction = 0.7\nseed = 15\nforcing = random\nforcing_amplitude = 0.08\nforcing_planar = false\nmodulation = sinusoidal\nforcing_b = 0.02\n",
    ];
    let mut out = Vec::new();
    for p in planar {
        out.push(Trajectory { text: format!("{base}preset = planar\n{p}"), regime: Regime::Planar });
    }
    for f in full {
        out.push(Trajectory { text: format!("{base}preset = full\n{f}"), regime: Regime::Full });
    }
    out
}

fn small_data_series() -> &'static [std::result::Result<DiagnosticSeries, String>] {
    static RUNS: OnceLock<Vec<std::result::Result<DiagnosticSeries, String>>> = OnceLock::new();
    RUNS.get_or_init(|| {
        small_data_runs()
            .iter()
            .enumerate()
            .map(|(i, tr)| run_text(&tr.text, &format!("small-{i}")).map_err(|e| e.to_string()))
            .collect()
    })
}

// 9
fn inequality_verdicts() -> Result<Outcome> {
    let runs = small_data_runs();
    let mut failures = Vec::new();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut count = 0;
    for (tr, s) in runs.iter().zip(small_data_series()) {
        let s = match s {
            Ok(s) => s,
            Err(e) => return outcome(false, e.clone()),
        };
        let m = BoundInputs::from_series(s).m();
        if m > 0.1 + 1e-12 {
            failures.push(format!("{}: M = {m}", s.meta.label));
        }
        let reports = check_diff_inequalities(s, tr.regime, DEFAULT_SLACK)?;
        for r in &reports {
            count += 1;
            worst = worst.max(r.residual_max / r.scale.max(f64::MIN_POSITIVE));
            let negative = r.constants.iter().any(|c| c.value < 0.0);
            if !r.pass || negative {
                failures.push(format!("{} {} residual/scale {:.1e}", s.meta.label, r.name, r.residual_max / r.scale));
            }
        }
    }
    let detail = format!("{count} fits over {} runs, worst residual/scale {worst:.1e}", runs.len());
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; failed: {}", failures.join("; ")))
    }
}

// 10
fn gronwall_containment() -> Result<Outcome> {
    let runs = small_data_runs();
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_guard: f64 = 0.0;
    for (tr, s) in runs.iter().zip(small_data_series()) {
        let s = match s {
            Ok(s) => s,
            Err(e) => return outcome(false, e.clone()),
        };
        let regime = match tr.regime {
            Regime::Planar => SystemRegime::Lemma3,
            Regime::Full => SystemRegime::Lemma5,
        };
        let reports = check_diff_inequalities(s, tr.regime, DEFAULT_SLACK)?;
        let sys = InequalitySystem::from_reports(&reports, s.meta.u0_h1, s.meta.f_bound, s.meta.eps(), regime)?;
        let c = check_trajectory(s, &sys, DEFAULT_SLACK)?;
        worst_ratio = worst_ratio.max(c.max_ratio.iter().cloned().fold(0.0, f64::max));
        if let Some(v) = &c.first_violation {
            failures.push(format!("{} {} at t={:.4}: {:.3e} > {:.3e}", s.meta.label, v.quantity, v.t, v.value, v.bound));
        }
        if regime == SystemRegime::Lemma5 {
            worst_guard = worst_guard.max(c.guard_max / c.threshold);
            if let Some(t) = c.guard_crossing {
                failures.push(format!("{} guard crossed at t={t}", s.meta.label));
            }
        }
    }
    // unforced tail
    let mut tail: f64 = 0.0;
    for (tr, s) in runs.iter().zip(small_data_series()) {
        if let (Ok(s), false) = (s, tr.text.contains("forcing = random")) {
            let b = evaluate_theorem_bounds(s, BoundInputs::from_series(s))?;
            tail = tail.max(b.tail_sup_h1.unwrap_or(f64::INFINITY));
        }
    }
    if tail > 1e-3 {
        failures.push(format!("unforced tail sup {tail:.2e}"));
    }
    let detail = format!(
        "max value/envelope {worst_ratio:.3}, max guard/threshold {worst_guard:.2e}, unforced tail sup H1 {tail:.1e}"
    );
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", failures.join("; ")))
    }
}

// 11
fn rescaling_identities() -> Result<Outcome> {
    let t = Torus::new([2.0, 1.0, 0.125], [8, 8, 2])?;
    let nu = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut ident, mut back) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let u = random_field(t, &mut rng).leray();
        let f = random_field(t, &mut rng).leray();
        ident = ident.max(check_identities(&u, &f, nu)?.max_relative_error());
        let r = rescale(&u, &f, nu)?;
        let (u2, f2) = inverse_rescale(&r, t, nu)?;
        back = back.max(rel(&u2, &u)).max(rel(&f2, &f));
    }
    outcome(ident <= 1e-12 && back <= 1e-12, format!("identity error {ident:.1e}, inverse error {back:.1e}"))
}

fn halve_dt(text: &str) -> Result<String> {
    let cfg = RunConfig::parse(text)?;
    let mut kv = cfg.to_kv();
    kv.set("dt", &(cfg.solver.dt / 2.0).to_string());
    kv.set("diag_stride", &(2 * cfg.solver.diag_stride).to_string());
    Ok(kv.to_canonical())
}

// 12
fn h2_integral_stability() -> Result<Outcome> {
    let mut texts: Vec<(String, String)> = vec![("energy".into(), ENERGY_RUN.into()), ("closure".into(), CLOSURE_RUN.into())];
    for (i, tr) in small_data_runs().into_iter().enumerate() {
        texts.push((format!("small-{i}"), tr.text));
    }
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (label, text) in &texts {
        let a = run_text(text, label)?;
        let b = run_text(&halve_dt(text)?, label)?;
        let ia = evaluate_theorem_bounds(&a, BoundInputs::from_series(&a))?.int_h2_sq.unwrap_or(f64::NAN);
        let ib = evaluate_theorem_bounds(&b, BoundInputs::from_series(&b))?.int_h2_sq.unwrap_or(f64::NAN);
        let change = (ia - ib).abs() / ia.abs().max(ib.abs());
        if !(ia.is_finite() && ib.is_finite() && change <= 0.02) {
            failures.push(format!("{label}: {ia:.4e} vs {ib:.4e}"));
        }
        worst = worst.max(change);
    }
    let detail = format!("{} runs, max relative change {:.2e}", texts.len(), worst);
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", failures.join("; ")))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("operator algebra", operator_algebra),
        ("Parseval and round trip", parseval_round_trip),
        ("single-mode decay and order", single_mode_decay),
        ("energy identity", energy_identity),
        ("enstrophy cancellation", enstrophy_miracle),
        ("planar closure", planar_closure),
        ("thin-domain scaling", thin_scaling),
        ("planar L4 constant", lemma6_constant),
        ("differential-inequality fits", inequality_verdicts),
        ("Gronwall containment", gronwall_containment),
        ("rescaling identities", rescaling_identities),
        ("H2 integral stability", h2_integral_stability),
    ];
    let results: Vec<(bool, String, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let r = match f() {
                        Ok(o) => (o.pass, o.detail),
                        Err(e) => (false, format!("error: {e}")),
                    };
                    (r.0, r.1, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or((false, "panicked".into(), 0.0)))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (pass, detail, secs))) in criteria.iter().zip(&results).enumerate() {
        let verdict = if *pass { "PASS" } else { "FAIL" };
        failed += usize::from(!pass);
        println!("{verdict} [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
