//! Fitting the constants of differential inequalities to trajectories.
//!
//! An inequality is `lhs(t) <= bound(t) + sum_j sign_j c_j term_j(t)` with
//! unknown `c_j >= 0`. Residuals `lhs - rhs` are linear in the `c_j`, so
//! the fit is a pair of linear programs in Chebyshev form: first the
//! smallest achievable worst violation `v*`, then, among constants with
//! violation at most `v*` (plus a hair), those that keep the bound tightest.

use serde::{Deserialize, Serialize};

use super::lp;
use super::series::{time_derivative, DiagnosticSeries, Regime};
use crate::error::{Error, Result};

pub const DEFAULT_SLACK: f64 = 1e-6;
pub const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    /// Enters as `-c term`.
    Dissipative,
    /// Enters as `+c term`.
    Source,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Dissipative => -1.0,
            Sign::Source => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// Name of the fitted constant (for dissipative terms this is the
    /// reciprocal, e.g. `c4^-1`).
    pub constant: String,
    pub sign: Sign,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityData {
    pub name: String,
    pub trajectory: String,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    /// Known part of the right-hand side (e.g. `U` in `phi(0) <= U`).
    pub bound: Vec<f64>,
    pub terms: Vec<Term>,
    /// Side constraints between the fitted constants.
    #[serde(default)]
    pub links: Vec<Link>,
}

/// `dominant >= factor * source` imposed on the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub dominant: String,
    pub source: String,
    pub factor: f64,
}

/// Margin in the guard link `c18^-1 >= GUARD_MARGIN * c19 * max eps^{1/2} (phi + psi)`.
pub const GUARD_MARGIN: f64 = 2.0;

impl InequalityData {
    pub fn len(&self) -> usize {
        self.lhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lhs.is_empty()
    }

    /// Concatenates samples of the same inequality from several runs.
    pub fn pool(parts: &[InequalityData]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("nothing to pool".into()))?;
        let names: Vec<&str> = first.terms.iter().map(|t| t.constant.as_str()).collect();
        let mut out = InequalityData {
            name: first.name.clone(),
            trajectory: "pooled".into(),
            times: Vec::new(),
            lhs: Vec::new(),
            bound: Vec::new(),
            terms: first
                .terms
                .iter()
                .map(|t| Term { constant: t.constant.clone(), sign: t.sign, values: Vec::new() })
                .collect(),
            links: first.links.clone(),
        };
        for p in parts {
            let pn: Vec<&str> = p.terms.iter().map(|t| t.constant.as_str()).collect();
            if p.name != first.name || pn != names {
                return Err(Error::InvalidArgument(format!("cannot pool {} with {}", p.name, first.name)));
            }
            out.times.extend(&p.times);
            out.lhs.extend(&p.lhs);
            out.bound.extend(&p.bound);
            for (o, t) in out.terms.iter_mut().zip(&p.terms) {
                o.values.extend(&t.values);
            }
            for l in &p.links {
                match out.links.iter_mut().find(|o| o.dominant == l.dominant && o.source == l.source) {
                    Some(o) => o.factor = o.factor.max(l.factor),
                    None => out.links.push(l.clone()),
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub sign: Sign,
    /// `max_t c |term(t)|`.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub trajectory: String,
    pub constants: Vec<FittedConstant>,
    /// Worst signed `lhs - rhs`; positive values are violations.
    pub residual_max: f64,
    /// Dominant-term scale used to normalise residuals and the slack.
    pub scale: f64,
    pub slack: f64,
    pub pass: bool,
    pub lhs_magnitude: f64,
    #[serde(skip)]
    pub residuals: Vec<(f64, f64)>,
}

impl InequalityReport {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn residual_csv(&self) -> String {
        let mut s = String::from("t,residual\n");
        for (t, r) in &self.residuals {
            s.push_str(&format!("{t:.17e},{r:.17e}\n"));
        }
        s
    }
}

/// Fits nonnegative constants; `slack` is relative to the dominant term.
pub fn fit(data: &InequalityData, slack: f64) -> Result<InequalityReport> {
    let m = data.len();
    if m < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{}: need at least {MIN_SAMPLES} samples, got {m}",
            data.name
        )));
    }
    if data.bound.len() != m || data.times.len() != m || data.terms.iter().any(|t| t.values.len() != m) {
        return Err(Error::InvalidArgument(format!("{}: ragged inequality data", data.name)));
    }
    let n = data.terms.len();
    let target: Vec<f64> = data.lhs.iter().zip(&data.bound).map(|(l, b)| l - b).collect();
    let col_max: Vec<f64> = data
        .terms
        .iter()
        .map(|t| t.values.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .collect();
    let find = |name: &str| data.terms.iter().position(|t| t.constant == name);
    let links: Vec<(usize, usize, f64)> = data
        .links
        .iter()
        .map(|l| match (find(&l.dominant), find(&l.source)) {
            (Some(d), Some(s)) if l.factor >= 0.0 && l.factor.is_finite() => Ok((d, s, l.factor)),
            _ => Err(Error::InvalidArgument(format!("{}: bad link {} >= {} {}", data.name, l.dominant, l.factor, l.source))),
        })
        .collect::<Result<_>>()?;
    let mut scale = data
        .lhs
        .iter()
        .chain(&data.bound)
        .fold(0.0f64, |a, v| a.max(v.abs()));

    let solve = |scale: f64| -> Result<Vec<f64>> {
        let tn: Vec<f64> = target.iter().map(|v| v / scale).collect();
        let cols: Vec<Vec<f64>> = data
            .terms
            .iter()
            .zip(&col_max)
            .map(|(t, cm)| {
                t.values
                    .iter()
                    .map(|v| if *cm > 0.0 { t.sign.factor() * v / cm } else { 0.0 })
                    .collect()
            })
            .collect();
        // x_d - factor (cm_d / cm_s) x_s >= 0 in normalised unknowns
        let link_rows: Vec<Vec<f64>> = links
            .iter()
            .map(|&(d, s, k)| {
                let mut r = vec![0.0; n + 1];
                r[d] = 1.0;
                if col_max[s] > 0.0 {
                    r[s] -= k * col_max[d] / col_max[s];
                }
                r
            })
            .collect();
        // LP1: minimise v with  sum a x + v >= target
        let mut rows1 = Vec::with_capacity(m + link_rows.len());
        let mut b1 = tn.clone();
        for i in 0..m {
            let mut r: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            r.push(1.0);
            rows1.push(r);
        }
        rows1.extend(link_rows.iter().cloned());
        b1.extend(std::iter::repeat_n(0.0, link_rows.len()));
        let mut c1 = vec![0.0; n + 1];
        c1[n] = 1.0;
        let s1 = lp::minimize(&c1, &rows1, &b1)?;
        let vstar = s1.objective + 1e-10;
        // LP2: minimise g with  sum a x >= target - v*,  -sum a x + g >= -target
        let mut rows2 = Vec::with_capacity(2 * m);
        let mut b2 = Vec::with_capacity(2 * m);
        for i in 0..m {
            let mut r: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            r.push(0.0);
            rows2.push(r);
            b2.push(tn[i] - vstar);
            let mut r: Vec<f64> = cols.iter().map(|c| -c[i]).collect();
            r.push(1.0);
            rows2.push(r);
            b2.push(-tn[i]);
        }
        for r in &link_rows {
            rows2.push(r.clone());
            b2.push(0.0);
        }
        let x = match lp::minimize(&c1, &rows2, &b2) {
            Ok(s2) => s2.x,
            Err(_) => s1.x,
        };
        Ok((0..n)
            .map(|j| if col_max[j] > 0.0 { x[j] * scale / col_max[j] } else { 0.0 })
            .collect())
    };

    let mut consts = vec![0.0; n];
    if scale > 0.0 || col_max.iter().any(|v| *v > 0.0) {
        if scale == 0.0 {
            scale = 1.0;
        }
        consts = solve(scale)?;
    }
    Ok(evaluate(data, &consts, scale, slack))
}

/// Residuals and verdict of `data` under fixed constants. `base_scale` is
/// the size of the left-hand side; the fitted terms may enlarge it.
pub fn evaluate(data: &InequalityData, consts: &[f64], base_scale: f64, slack: f64) -> InequalityReport {
    let magnitude = |t: &Term, c: f64| c * t.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let term_scale = data
        .terms
        .iter()
        .zip(consts)
        .map(|(t, c)| magnitude(t, *c))
        .fold(0.0f64, f64::max);
    let scale = base_scale.max(term_scale);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let m = data.len();
    let mut residuals = Vec::with_capacity(m);
    let mut residual_max = f64::NEG_INFINITY;
    for i in 0..m {
        let rhs: f64 = data.bound[i]
            + data
                .terms
                .iter()
                .zip(consts)
                .map(|(t, c)| t.sign.factor() * c * t.values[i])
                .sum::<f64>();
        let r = data.lhs[i] - rhs;
        residual_max = residual_max.max(r);
        residuals.push((data.times[i], r));
    }
    let constants = data
        .terms
        .iter()
        .zip(consts)
        .map(|(t, c)| FittedConstant {
            name: t.constant.clone(),
            value: *c,
            sign: t.sign,
            magnitude: magnitude(t, *c),
        })
        .collect();
    InequalityReport {
        name: data.name.clone(),
        trajectory: data.trajectory.clone(),
        constants,
        residual_max,
        scale,
        slack,
        pass: residual_max <= slack * scale,
        lhs_magnitude: data.lhs.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        residuals,
    }
}

/// Moves half of the `from` dissipation onto the `to` column. Valid when
/// `to <= from` sample-wise (here `chi^2 <= phi~^2`), because the right-hand
/// side can only grow, so no residual gets worse. Keeps the guard threshold
/// `c18^-1` positive whenever any dissipation was detected.
fn transfer_dissipation(data: &InequalityData, report: &InequalityReport, from: &str, to: &str) -> Option<InequalityReport> {
    let fi = data.terms.iter().position(|t| t.constant == from)?;
    let ti = data.terms.iter().position(|t| t.constant == to)?;
    let dominated = data.terms[ti]
        .values
        .iter()
        .zip(&data.terms[fi].values)
        .all(|(a, b)| *a <= *b * (1.0 + 1e-12));
    if !dominated {
        return None;
    }
    let mut consts: Vec<f64> = report.constants.iter().map(|c| c.value).collect();
    let moved = 0.5 * consts[fi];
    consts[fi] -= moved;
    consts[ti] += moved;
    let base = data.lhs.iter().chain(&data.bound).fold(0.0f64, |a, v| a.max(v.abs()));
    Some(evaluate(data, &consts, base, report.slack))
}

fn term(constant: &str, sign: Sign, values: Vec<f64>) -> Term {
    Term {
        constant: constant.to_string(),
        sign,
        values,
    }
}

/// Builds every inequality of the chosen family from a sampled trajectory.
///
/// `Planar` yields the ten-constant system for z-independent flows. `Full`
/// yields the three raw energy estimates for `r`, `s`, `w` and the combined
/// system with the extra `(-c18^-1 + c19 eps^{1/2} (phi + psi)) chi^2` term.
pub fn build_system(series: &DiagnosticSeries, regime: Regime) -> Result<Vec<InequalityData>> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "series too short: need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let eps = series.meta.eps();
    let u = series.meta.u0_h1;
    let f2 = series.meta.f_bound.powi(2);
    let times = series.times();
    let phi = series.map(|s| s.phi(regime));
    let psi = series.map(|s| s.psi(regime));
    let phit = series.map(|s| s.phi_tilde(regime));
    let psit = series.map(|s| s.psi_tilde(regime));
    let theta = series.map(|s| s.theta);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    let (phi2, psi2, theta2) = (sq(&phi), sq(&psi), sq(&theta));
    let dphi2 = time_derivative(&times, &phi2)?;
    let dpsi2 = time_derivative(&times, &psi2)?;
    let dtheta2 = time_derivative(&times, &theta2)?;
    let label = |k: &str| match regime {
        Regime::Planar => format!("planar-{k}"),
        Regime::Full => format!("full-{k}"),
    };
    let traj = series.meta.label.clone();
    let zeros = vec![0.0; n];
    let fconst = vec![f2; n];
    let make = |name: String, lhs: Vec<f64>, bound: Vec<f64>, terms: Vec<Term>| InequalityData {
        name,
        trajectory: traj.clone(),
        times: times.clone(),
        lhs,
        bound,
        terms,
        links: vec![],
    };
    let energy: Vec<f64> = phi2.iter().zip(&psi2).map(|(a, b)| a + b).collect();
    let mut out = vec![
        make(label("phi-initial"), vec![phi[0]; n], vec![u; n], vec![]),
        make(label("psi-initial"), vec![psi[0]; n], vec![u; n], vec![]),
        make(label("theta-split"), theta2.clone(), zeros.clone(), vec![term("c1", Sign::Source, energy.clone())]),
        make(label("phi-poincare"), phi.clone(), zeros.clone(), vec![term("c2", Sign::Source, phit.clone())]),
        make(label("psi-poincare"), psi.clone(), zeros.clone(), vec![term("c3", Sign::Source, psit.clone())]),
    ];
    let coupling: Vec<f64> = phi2.iter().zip(&psi2).map(|(a, b)| a * b / eps).collect();
    match regime {
        Regime::Planar => {
            out.push(make(
                label("phi-rate"),
                dphi2,
                zeros.clone(),
                vec![term("c4^-1", Sign::Dissipative, sq(&phit)), term("c5", Sign::Source, fconst.clone())],
            ));
            out.push(make(
                label("psi-rate"),
                dpsi2,
                zeros.clone(),
                vec![
                    term("c6^-1", Sign::Dissipative, sq(&psit)),
                    term("c7", Sign::Source, coupling),
                    term("c8", Sign::Source, fconst.clone()),
                ],
            ));
        }
        Regime::Full => {
            let chi2: Vec<f64> = series.map(|s| s.chi().powi(2));
            let guard: Vec<f64> = (0..n).map(|i| eps.sqrt() * (phi[i] + psi[i]) * chi2[i]).collect();
            out.push(make(
                label("phi-rate"),
                dphi2,
                zeros.clone(),
                vec![
                    term("c4^-1", Sign::Dissipative, sq(&phit)),
                    term("c18^-1", Sign::Dissipative, chi2.clone()),
                    term("c19", Sign::Source, guard.clone()),
                    term("c5", Sign::Source, fconst.clone()),
                ],
            ));
            out.push(make(
                label("psi-rate"),
                dpsi2,
                zeros.clone(),
                vec![
                    term("c6^-1", Sign::Dissipative, sq(&psit)),
                    term("c18^-1", Sign::Dissipative, chi2),
                    term("c19", Sign::Source, guard),
                    term("c7", Sign::Source, coupling),
                    term("c8", Sign::Source, fconst.clone()),
                ],
            ));
            // fit inside the regime where the chi^2 term stays dissipative
            let g_max = (0..n).map(|i| eps.sqrt() * (phi[i] + psi[i])).fold(0.0f64, f64::max);
            let k = out.len();
            for d in &mut out[k - 2..] {
                d.links = vec![Link {
                    dominant: "c18^-1".into(),
                    source: "c19".into(),
                    factor: GUARD_MARGIN * g_max,
                }];
            }
        }
    }
    out.push(make(
        label("theta-rate"),
        dtheta2,
        zeros.clone(),
        vec![term("c9^-1", Sign::Dissipative, energy), term("c10", Sign::Source, fconst.clone())],
    ));
    if regime == Regime::Full {
        out.extend(component_estimates(series)?);
    }
    Ok(out)
}

/// The separate energy estimates for `r`, `s` and `w`, before they are
/// combined.
pub fn component_estimates(series: &DiagnosticSeries) -> Result<Vec<InequalityData>> {
    let n = series.len();
    let eps = series.meta.eps();
    let f2 = vec![series.meta.f_bound.powi(2); n];
    let times = series.times();
    let d = |g: &dyn Fn(&super::series::Sample) -> f64| time_derivative(&times, &series.map(|s| g(s).powi(2)));
    let dv = series.map(|s| s.dv());
    let dw = series.map(|s| s.dw);
    let chi2 = series.map(|s| s.chi().powi(2));
    let cross_v: Vec<f64> = (0..n).map(|i| eps.sqrt() * dv[i] * chi2[i]).collect();
    let cross_w: Vec<f64> = (0..n).map(|i| eps.sqrt() * dw[i] * chi2[i]).collect();
    let coupling: Vec<f64> = series.map(|s| (s.dr * s.ds).powi(2) / eps);
    let zeros = vec![0.0; n];
    let traj = series.meta.label.clone();
    let make = |name: &str, lhs: Vec<f64>, terms: Vec<Term>| InequalityData {
        name: name.to_string(),
        trajectory: traj.clone(),
        times: times.clone(),
        lhs,
        bound: zeros.clone(),
        terms,
        links: vec![],
    };
    Ok(vec![
        make(
            "r-energy",
            d(&|s| s.dr)?,
            vec![
                term("c^-1", Sign::Dissipative, series.map(|s| s.d2r.powi(2))),
                term("c_cross", Sign::Source, cross_v.clone()),
                term("c_f", Sign::Source, f2.clone()),
            ],
        ),
        make(
            "s-energy",
            d(&|s| s.ds)?,
            vec![
                term("c^-1", Sign::Dissipative, series.map(|s| s.d2s.powi(2))),
                term("c_couple", Sign::Source, coupling),
                term("c_cross", Sign::Source, cross_v.clone()),
                term("c_f", Sign::Source, f2.clone()),
            ],
        ),
        make(
            "w-energy",
            d(&|s| s.dw)?,
            vec![
                term("c^-1", Sign::Dissipative, chi2.clone()),
                term("c_cross_v", Sign::Source, cross_v),
                term("c_cross_w", Sign::Source, cross_w),
                term("c_f", Sign::Source, f2),
            ],
        ),
    ])
}

/// Fits every inequality of the family on one trajectory.
pub fn check_diff_inequalities(series: &DiagnosticSeries, regime: Regime, slack: f64) -> Result<Vec<InequalityReport>> {
    build_system(series, regime)?.iter().map(|d| fit_one(d, slack)).collect()
}

fn fit_one(data: &InequalityData, slack: f64) -> Result<InequalityReport> {
    let r = fit(data, slack)?;
    for from in ["c4^-1", "c6^-1"] {
        if let Some(t) = transfer_dissipation(data, &r, from, "c18^-1") {
            return Ok(t);
        }
    }
    Ok(r)
}

/// One constant set for several trajectories at once.
pub fn check_pooled(series: &[DiagnosticSeries], regime: Regime, slack: f64) -> Result<Vec<InequalityReport>> {
    let systems: Vec<Vec<InequalityData>> = series.iter().map(|s| build_system(s, regime)).collect::<Result<_>>()?;
    let first = systems.first().ok_or_else(|| Error::InvalidArgument("no trajectories".into()))?;
    (0..first.len())
        .map(|k| {
            let parts: Vec<InequalityData> = systems.iter().map(|s| s[k].clone()).collect();
            fit_one(&InequalityData::pool(&parts)?, slack)
        })
        .collect()
}

/// Worst relative gap between the finite-difference `d theta^2 / dt` and
/// the exact budget `-2 nu ||Du||^2 + 2 <u, f>` over the series.
pub fn derivative_vs_budget(series: &DiagnosticSeries) -> Result<f64> {
    let nu = series.meta.nu;
    let times = series.times();
    let d = time_derivative(&times, &series.map(|s| s.theta * s.theta))?;
    let mut worst: f64 = 0.0;
    for (s, dv) in series.samples.iter().zip(d) {
        let rate = -2.0 * nu * s.du * s.du + 2.0 * s.forcing_work;
        let scale = 2.0 * nu * s.du * s.du + 2.0 * s.forcing_work.abs();
        if scale > 0.0 {
            worst = worst.max((dv - rate).abs() / scale);
        }
    }
    Ok(worst)
}

/// Per-interval energy residuals over consecutive sample pairs
/// `[t_i, t_{i+2}]` with equal spacing:
/// `|Delta theta^2 / Delta t - avg(rate)| / avg(2 nu ||Du||^2)`, where
/// the average of the rate uses Simpson's rule on the three samples.
pub fn energy_budget_residuals(series: &DiagnosticSeries) -> Result<Vec<(f64, f64)>> {
    let nu = series.meta.nu;
    let s = &series.samples;
    if s.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples".into()));
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i + 2 < s.len() {
        let (a, b, c) = (&s[i], &s[i + 1], &s[i + 2]);
        let h1 = b.t - a.t;
        let h2 = c.t - b.t;
        if (h1 - h2).abs() > 1e-9 * h1 {
            i += 1;
            continue;
        }
        let rate = |x: &super::series::Sample| -2.0 * nu * x.du * x.du + 2.0 * x.forcing_work;
        let diss = |x: &super::series::Sample| 2.0 * nu * x.du * x.du;
        let avg_rate = (rate(a) + 4.0 * rate(b) + rate(c)) / 6.0;
        let avg_diss = (diss(a) + 4.0 * diss(b) + diss(c)) / 6.0;
        let lhs = (c.theta * c.theta - a.theta * a.theta) / (c.t - a.t);
        let r = if avg_diss > 0.0 { (lhs - avg_rate).abs() / avg_diss } else { (lhs - avg_rate).abs() };
        out.push((b.t, r));
        i += 2;
    }
    Ok(out)
}
