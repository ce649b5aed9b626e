//! Comparison envelopes for the coupled differential inequalities, the
//! guard of the full three-dimensional system, the unit rescaling of the
//! box and literature thresholds.
//!
//! With `phi~ >= phi / c2`, `psi~ >= psi / c3` and
//! `phi^2 + psi^2 >= theta^2 / c1`, the inequalities become
//!
//! ```text
//! Phi'   = -Phi / (c4 c2^2) + c5 F^2
//! Psi'   = -Psi / (c6 c3^2) + c7 eps^-1 Phi Psi + c8 F^2
//! Theta' = -Theta / (c9 c1) + c10 F^2
//! ```
//!
//! started from `U^2`, whose solutions dominate `phi^2`, `psi^2`,
//! `theta^2`. In the full system the extra `chi^2` term is dissipative as
//! long as `c19 eps^{1/2} (phi + psi) < c18^-1`.

pub mod rescale;
pub mod thresholds;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::fit::InequalityReport;
use crate::diagnostics::series::{DiagnosticSeries, Regime};
use crate::error::{Error, Result};
pub use rescale::{inverse_rescale, rescale, Rescaled};
pub use thresholds::{literature_thresholds, ThresholdParams, ThresholdRow};

/// Fitted constants of zero are raised to this floor so every constant is
/// positive; this only loosens the envelopes.
pub const CONSTANT_FLOOR: f64 = 1e-12;
pub const DEFAULT_STEPS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemRegime {
    /// z-independent flows; ten constants.
    Lemma3,
    /// Full flows; adds the `chi^2` guard constants.
    Lemma5,
}

impl SystemRegime {
    pub fn series_regime(self) -> Regime {
        match self {
            SystemRegime::Lemma3 => Regime::Planar,
            SystemRegime::Lemma5 => Regime::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalitySystem {
    /// `c[0] = c1, ..., c[9] = c10`.
    pub c: [f64; 10],
    pub c18: f64,
    pub c19: f64,
    pub u: f64,
    pub f: f64,
    pub eps: f64,
    pub regime: SystemRegime,
}

impl InequalitySystem {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if let Some(i) = self.c.iter().position(|v| !ok(*v)) {
            return Err(Error::InvalidArgument(format!("c{} must be positive, got {}", i + 1, self.c[i])));
        }
        if self.regime == SystemRegime::Lemma5 && !(ok(self.c18) && ok(self.c19)) {
            return Err(Error::InvalidArgument("c18 and c19 must be positive".into()));
        }
        if !(self.u >= 0.0 && self.f >= 0.0 && self.u.is_finite() && self.f.is_finite()) {
            return Err(Error::InvalidArgument("U and F must be finite and nonnegative".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("eps must be positive".into()));
        }
        Ok(())
    }

    pub fn m(&self) -> f64 {
        self.u.max(self.f)
    }

    pub fn ci(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    fn rates(&self) -> Rates {
        Rates {
            a_phi: 1.0 / (self.ci(4) * self.ci(2).powi(2)),
            s_phi: self.ci(5) * self.f * self.f,
            a_psi: 1.0 / (self.ci(6) * self.ci(3).powi(2)),
            b_psi: self.ci(7) / self.eps,
            s_psi: self.ci(8) * self.f * self.f,
            a_theta: 1.0 / (self.ci(9) * self.ci(1)),
            s_theta: self.ci(10) * self.f * self.f,
        }
    }

    /// Collects constants from fitted reports: the largest value of each
    /// source constant and the smallest of each reciprocal, floored at
    /// [`CONSTANT_FLOOR`]. `c19` is set so that the guard ratio
    /// `c18^-1 / c19` is the smallest over the reports fitting both.
    pub fn from_reports(reports: &[InequalityReport], u: f64, f: f64, eps: f64, regime: SystemRegime) -> Result<Self> {
        let mut seen: BTreeMap<String, f64> = BTreeMap::new();
        for r in reports {
            for c in &r.constants {
                let reciprocal = c.name.ends_with("^-1");
                seen.entry(c.name.clone())
                    .and_modify(|v| *v = if reciprocal { v.min(c.value) } else { v.max(c.value) })
                    .or_insert(c.value);
            }
        }
        let get = |name: &str| -> Result<f64> {
            seen.get(name)
                .map(|v| v.max(CONSTANT_FLOOR))
                .ok_or_else(|| Error::InvalidArgument(format!("no fitted value for {name}")))
        };
        let mut c = [0.0; 10];
        for (i, slot) in c.iter_mut().enumerate() {
            let k = i + 1;
            *slot = if matches!(k, 4 | 6 | 9) {
                1.0 / get(&format!("c{k}^-1"))?
            } else {
                get(&format!("c{k}"))?
            };
        }
        let (c18, c19) = match regime {
            SystemRegime::Lemma3 => (1.0, 1.0),
            SystemRegime::Lemma5 => {
                // Each inequality carries its own pair; the guard holds for
                // all of them iff eps^{1/2} (phi + psi) < min c18_j^-1 / c19_j.
                let c18_inv = get("c18^-1")?;
                let ratio = reports
                    .iter()
                    .filter_map(|r| {
                        let d = r.constant("c18^-1")?.max(CONSTANT_FLOOR);
                        let s = r.constant("c19")?.max(CONSTANT_FLOOR);
                        Some(d / s)
                    })
                    .fold(f64::INFINITY, f64::min);
                if !ratio.is_finite() {
                    return Err(Error::InvalidArgument("no report fits c18^-1 and c19 together".into()));
                }
                (1.0 / c18_inv, c18_inv / ratio)
            }
        };
        let sys = InequalitySystem { c, c18, c19, u, f, eps, regime };
        sys.validate()?;
        Ok(sys)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rates {
    a_phi: f64,
    s_phi: f64,
    a_psi: f64,
    b_psi: f64,
    s_psi: f64,
    a_theta: f64,
    s_theta: f64,
}

impl Rates {
    /// State `(Theta, Phi, Psi, I)` with `I' = c7 eps^-1 Phi Psi + c8 F^2`.
    fn rhs(&self, y: [f64; 4]) -> [f64; 4] {
        let coupling = self.b_psi * y[1] * y[2];
        [
            -self.a_theta * y[0] + self.s_theta,
            -self.a_phi * y[1] + self.s_phi,
            -self.a_psi * y[2] + coupling + self.s_psi,
            coupling + self.s_psi,
        ]
    }

    fn rk4(&self, y: [f64; 4], h: f64) -> [f64; 4] {
        let add = |a: [f64; 4], b: [f64; 4], s: f64| [0, 1, 2, 3].map(|i| a[i] + s * b[i]);
        let k1 = self.rhs(y);
        let k2 = self.rhs(add(y, k1, h / 2.0));
        let k3 = self.rhs(add(y, k2, h / 2.0));
        let k4 = self.rhs(add(y, k3, h));
        [0, 1, 2, 3].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c14: f64,
    /// Smallest `c` with `psi <= c max{eps^{-1/2} M^2, M}` on the horizon.
    pub c15: f64,
    /// `psi(T) / max{eps^{-1/2} F^2, F}`; `None` when `F = 0`.
    pub c17: Option<f64>,
    /// `1 / M*`, where `M*` is the largest `M = U = F` keeping the guard
    /// below threshold on the horizon; `None` when no `M` crosses.
    pub c20: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallEnvelope {
    pub times: Vec<f64>,
    pub theta2: Vec<f64>,
    pub phi2: Vec<f64>,
    pub psi2: Vec<f64>,
    /// `c11 (F^2 + (U^2 - F^2) e^{-t/c12})`.
    pub closed_theta2: Vec<f64>,
    /// `c13 (F^2 + (U^2 - F^2) e^{-t/c14})`.
    pub closed_phi2: Vec<f64>,
    /// `c15 max{eps^{-1/2} M^2, M}`.
    pub psi_bound: f64,
    /// `c17 max{eps^{-1/2} F^2, F}`, zero without forcing.
    pub psi_asymptotic: f64,
    /// Bound on `int_0^T psi~^2 dt`.
    pub integrability: f64,
    pub constants: DerivedConstants,
    /// First time an envelope overflowed.
    pub blow_up_time: Option<f64>,
}

impl GronwallEnvelope {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,theta2,phi2,psi2,closed_theta2,closed_phi2\n");
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.times[i], self.theta2[i], self.phi2[i], self.psi2[i], self.closed_theta2[i], self.closed_phi2[i]
            ));
        }
        s
    }
}

/// Integrates the comparison system through the given increasing times
/// (starting at 0) with steps no longer than `max_step`.
fn integrate(sys: &InequalitySystem, times: &[f64], max_step: f64) -> (Vec<[f64; 4]>, Option<f64>) {
    let r = sys.rates();
    let u2 = sys.u * sys.u;
    let mut y = [u2, u2, u2, 0.0];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut blow = None;
    for &target in times {
        let span = target - t;
        if span > 0.0 && blow.is_none() {
            let n = (span / max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for k in 0..n {
                y = r.rk4(y, h);
                if y.iter().any(|v| !v.is_finite() || *v > 1e200) {
                    blow = Some(t + (k + 1) as f64 * h);
                    y = [f64::INFINITY; 4];
                    break;
                }
            }
        }
        t = target;
        out.push(y);
    }
    (out, blow)
}

fn closed_forms(sys: &InequalitySystem) -> (f64, f64, f64, f64) {
    let c = |i: usize| sys.ci(i);
    let c11 = 1f64.max(c(1) * c(9) * c(10));
    let c12 = c(1) * c(9);
    let c13 = 1f64.max(c(2).powi(2) * c(4) * c(5));
    let c14 = c(2).powi(2) * c(4);
    (c11, c12, c13, c14)
}

fn shape(eps: f64, x: f64) -> f64 {
    (x * x / eps.sqrt()).max(x)
}

fn envelope_at(sys: &InequalitySystem, times: &[f64], max_step: f64) -> Result<GronwallEnvelope> {
    sys.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("envelope times must be increasing and nonnegative".into()));
    }
    let (ys, blow) = integrate(sys, times, max_step);
    let (c11, c12, c13, c14) = closed_forms(sys);
    let (u2, f2) = (sys.u * sys.u, sys.f * sys.f);
    let m = sys.m();
    let psi_max = ys.iter().map(|y| y[2].sqrt()).fold(0.0f64, f64::max);
    let c15 = if m > 0.0 { psi_max / shape(sys.eps, m) } else { 0.0 };
    let psi_end = ys.last().map_or(0.0, |y| y[2].sqrt());
    let c17 = (sys.f > 0.0).then(|| psi_end / shape(sys.eps, sys.f));
    let c20 = match sys.regime {
        SystemRegime::Lemma5 => critical_m(sys, times.last().copied().unwrap_or(0.0), max_step).map(|m| 1.0 / m),
        SystemRegime::Lemma3 => None,
    };
    Ok(GronwallEnvelope {
        times: times.to_vec(),
        theta2: ys.iter().map(|y| y[0]).collect(),
        phi2: ys.iter().map(|y| y[1]).collect(),
        psi2: ys.iter().map(|y| y[2]).collect(),
        closed_theta2: times.iter().map(|t| c11 * (f2 + (u2 - f2) * (-t / c12).exp())).collect(),
        closed_phi2: times.iter().map(|t| c13 * (f2 + (u2 - f2) * (-t / c14).exp())).collect(),
        psi_bound: c15 * shape(sys.eps, m),
        psi_asymptotic: c17.map_or(0.0, |c| c * shape(sys.eps, sys.f)),
        integrability: sys.ci(6) * (u2 + ys.last().map_or(0.0, |y| y[3])),
        constants: DerivedConstants { c11, c12, c13, c14, c15, c17, c20 },
        blow_up_time: blow,
    })
}

pub fn solve_envelope(sys: &InequalitySystem, horizon: f64, samples: usize) -> Result<GronwallEnvelope> {
    if !(horizon >= 0.0 && horizon.is_finite()) || samples == 0 {
        return Err(Error::InvalidArgument("horizon must be finite and samples positive".into()));
    }
    let times: Vec<f64> = (0..=samples).map(|i| horizon * i as f64 / samples as f64).collect();
    envelope_at(sys, &times, (horizon / DEFAULT_STEPS as f64).max(1e-300))
}

/// Largest guard value `c19 eps^{1/2} (sqrt Phi + sqrt Psi)` on the horizon.
fn guard_peak(sys: &InequalitySystem, horizon: f64, max_step: f64) -> f64 {
    let n = 200;
    let times: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let (ys, _) = integrate(sys, &times, max_step);
    ys.iter()
        .map(|y| sys.c19 * sys.eps.sqrt() * (y[1].sqrt() + y[2].sqrt()))
        .fold(0.0f64, |a, v| if v.is_nan() { f64::INFINITY } else { a.max(v) })
}

/// Bisection for the largest `M = U = F` whose envelopes keep the guard
/// strictly below `c18^-1`.
fn critical_m(sys: &InequalitySystem, horizon: f64, max_step: f64) -> Option<f64> {
    let threshold = 1.0 / sys.c18;
    let at = |m: f64| guard_peak(&InequalitySystem { u: m, f: m, ..*sys }, horizon, max_step);
    let mut hi = 1e-6;
    while at(hi) < threshold {
        hi *= 10.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub contained: bool,
    pub first_violation: Option<Violation>,
    /// Largest `value / envelope` for `theta^2`, `phi^2`, `psi^2`.
    pub max_ratio: [f64; 3],
    pub slack: f64,
    /// `c18^-1`.
    pub threshold: f64,
    pub guard_max: f64,
    /// First sample with `c19 eps^{1/2} (phi + psi) > c18^-1`; `None`
    /// means never.
    pub guard_crossing: Option<f64>,
    #[serde(skip)]
    pub guard: Vec<(f64, f64)>,
}

/// Containment of a trajectory in the envelopes of `sys`, with relative
/// `slack`, plus the guard trace.
pub fn check_trajectory(series: &DiagnosticSeries, sys: &InequalitySystem, slack: f64) -> Result<ContainmentReport> {
    sys.validate()?;
    let meta = &series.meta;
    let tol = 1e-12;
    if (meta.eps() - sys.eps).abs() > tol * sys.eps {
        return Err(Error::InvalidArgument(format!("eps mismatch: series {} vs system {}", meta.eps(), sys.eps)));
    }
    if meta.u0_h1 > sys.u * (1.0 + tol) {
        return Err(Error::InvalidArgument(format!("U mismatch: series {} exceeds system {}", meta.u0_h1, sys.u)));
    }
    if meta.f_bound > sys.f * (1.0 + tol) {
        return Err(Error::InvalidArgument(format!("F mismatch: series {} exceeds system {}", meta.f_bound, sys.f)));
    }
    let times = series.times();
    if times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("series starts before t = 0".into()));
    }
    let min_gap = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let horizon = times.last().copied().unwrap_or(0.0);
    let max_step = (horizon / DEFAULT_STEPS as f64).min(min_gap).max(1e-300);
    let (ys, _) = integrate(sys, &times, max_step);
    let regime = sys.regime.series_regime();
    let names = ["theta^2", "phi^2", "psi^2"];
    let mut first = None;
    let mut max_ratio = [0.0f64; 3];
    let mut guard = Vec::with_capacity(series.len());
    let threshold = 1.0 / sys.c18;
    let mut crossing = None;
    let mut guard_max: f64 = 0.0;
    for (s, y) in series.samples.iter().zip(&ys) {
        let vals = [s.theta.powi(2), s.phi(regime).powi(2), s.psi(regime).powi(2)];
        let bounds = [y[0], y[1], y[2]];
        for q in 0..3 {
            if vals[q] > 0.0 {
                max_ratio[q] = max_ratio[q].max(vals[q] / bounds[q]);
            }
            if first.is_none() && vals[q] > bounds[q] * (1.0 + slack) {
                first = Some(Violation {
                    t: s.t,
                    quantity: names[q].to_string(),
                    value: vals[q],
                    bound: bounds[q],
                });
            }
        }
        let g = sys.c19 * sys.eps.sqrt() * (s.phi(regime) + s.psi(regime));
        guard_max = guard_max.max(g);
        if crossing.is_none() && g > threshold {
            crossing = Some(s.t);
        }
        guard.push((s.t, g));
    }
    Ok(ContainmentReport {
        contained: first.is_none(),
        first_violation: first,
        max_ratio,
        slack,
        threshold,
        guard_max,
        guard_crossing: crossing,
        guard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_system(u: f64, f: f64) -> InequalitySystem {
        InequalitySystem {
            c: [1.0; 10],
            c18: 1.0,
            c19: 1.0,
            u,
            f,
            eps: 0.25,
            regime: SystemRegime::Lemma3,
        }
    }

    #[test]
    fn scalar_model_matches_closed_form() {
        // Phi' = -a Phi + b with a = 1/(c4 c2^2), b = c5 F^2
        let mut sys = unit_system(0.7, 0.3);
        sys.c[3] = 0.5;
        sys.c[1] = 1.2;
        sys.c[4] = 2.0;
        let env = solve_envelope(&sys, 3.0, 30).unwrap();
        let a = 1.0 / (0.5 * 1.44);
        let b = 2.0 * 0.09;
        for (t, v) in env.times.iter().zip(&env.phi2) {
            let want = (0.49 - b / a) * (-a * t).exp() + b / a;
            assert!((v - want).abs() < 1e-8, "{t}: {v} vs {want}");
        }
    }

    fn report(consts: &[(&str, f64)]) -> InequalityReport {
        use crate::diagnostics::fit::{FittedConstant, Sign};
        InequalityReport {
            name: "x".into(),
            trajectory: "t".into(),
            constants: consts
                .iter()
                .map(|(n, v)| FittedConstant { name: n.to_string(), value: *v, sign: Sign::Source, magnitude: 0.0 })
                .collect(),
            residual_max: 0.0,
            scale: 1.0,
            slack: 1e-6,
            pass: true,
            lhs_magnitude: 0.0,
            residuals: vec![],
        }
    }

    #[test]
    fn guard_pair_is_taken_per_inequality() {
        let mut reports = vec![report(&[
            ("c1", 1.0),
            ("c2", 1.0),
            ("c3", 1.0),
            ("c4^-1", 2.0),
            ("c5", 0.0),
            ("c6^-1", 1.0),
            ("c7", 1.0),
            ("c8", 0.0),
            ("c9^-1", 4.0),
            ("c10", 0.5),
        ])];
        reports.push(report(&[("c18^-1", 1.0), ("c19", 4.0)]));
        reports.push(report(&[("c18^-1", 0.1), ("c19", 0.0)]));
        let sys = InequalitySystem::from_reports(&reports, 0.1, 0.0, 0.25, SystemRegime::Lemma5).unwrap();
        assert_eq!(sys.ci(4), 0.5);
        assert_eq!(sys.ci(9), 0.25);
        assert_eq!(sys.ci(5), CONSTANT_FLOOR);
        // threshold from the smallest c18^-1, ratio from the first pair
        assert!((1.0 / sys.c18 - 0.1).abs() < 1e-15);
        assert!((1.0 / sys.c18 / sys.c19 - 0.25).abs() < 1e-15);
        assert!(InequalitySystem::from_reports(&reports[..1], 0.1, 0.0, 0.25, SystemRegime::Lemma5).is_err());
    }

    #[test]
    fn equal_data_gives_flat_theta_bound() {
        let sys = unit_system(0.4, 0.4);
        let env = solve_envelope(&sys, 2.0, 10).unwrap();
        let c11 = env.constants.c11;
        assert!(env.closed_theta2.iter().all(|v| (v - c11 * 0.16).abs() < 1e-15));
    }

    #[test]
    fn unforced_envelopes_decay() {
        let sys = unit_system(0.2, 0.0);
        let env = solve_envelope(&sys, 40.0, 40).unwrap();
        assert!(*env.theta2.last().unwrap() < 1e-10);
        assert!(*env.phi2.last().unwrap() < 1e-10);
        assert!(*env.psi2.last().unwrap() < 1e-10);
        assert_eq!(env.psi_asymptotic, 0.0);
        assert!(env.constants.c17.is_none());
    }

    #[test]
    fn nonpositive_constants_rejected() {
        let mut sys = unit_system(0.1, 0.1);
        sys.c[6] = 0.0;
        assert!(solve_envelope(&sys, 1.0, 10).is_err());
    }

    #[test]
    fn envelopes_monotone_in_data() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut base = unit_system(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
            for c in base.c.iter_mut() {
                *c = rng.random_range(0.2..3.0);
            }
            let mut more = base;
            more.u += rng.random_range(0.0..0.2);
            more.f += rng.random_range(0.0..0.2);
            let a = solve_envelope(&base, 1.0, 20).unwrap();
            let b = solve_envelope(&more, 1.0, 20).unwrap();
            for i in 0..a.times.len() {
                assert!(b.theta2[i] >= a.theta2[i] && b.phi2[i] >= a.phi2[i]);
                assert!(b.psi2[i] >= a.psi2[i] || b.psi2[i].is_infinite());
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let mut sys = unit_system(3.0, 0.0);
        sys.c[6] = 50.0;
        let env = solve_envelope(&sys, 5.0, 50).unwrap();
        assert!(env.blow_up_time.is_some());
    }
}
