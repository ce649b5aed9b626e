//! Empirical best constants for the functional inequalities behind the
//! estimates: thin-domain bounds for the oscillating part, the planar
//! `L^4` bound, Poincaré, Hausdorff–Young and interpolation.
//!
//! Every reported ratio is attained by a stored field, so estimates are
//! lower bounds on the true constants.

pub mod dyadic;
pub mod ensemble;
pub mod scaling;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ScalarField, Torus, Transformer};
pub use dyadic::{dyadic_decompose, DyadicProfile};
pub use ensemble::{trial_field, Support, TrialKind};
pub use scaling::{fit_eps_scaling, ScalingFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LabInequality {
    /// `||w||_inf <= c eps^{1/2} ||D^2 w||_2` for `w = Qw`.
    Lemma4Inf,
    /// `||w||_4 <= c eps^{1/4} ||D w||_2` for `w = Qw`.
    Lemma4Four,
    /// `||f||_4 <= c ||D^{1/2} f||_2` for planar mean-zero `f`.
    Lemma6,
    /// `||f||_2 <= c ||D^alpha f||_2`.
    Poincare { alpha: f64 },
    /// `||f||_{p'} <= c V^{1/p'} ||f^||_{l^p}`, `1 <= p <= 2`.
    HausdorffYoung { p: f64 },
}

impl LabInequality {
    pub fn id(&self) -> String {
        match self {
            LabInequality::Lemma4Inf => "lemma4-inf".into(),
            LabInequality::Lemma4Four => "lemma4-4".into(),
            LabInequality::Lemma6 => "lemma6".into(),
            LabInequality::Poincare { alpha } => format!("poincare:{alpha}"),
            LabInequality::HausdorffYoung { p } => format!("hausdorff-young:{p}"),
        }
    }

    pub fn support(&self) -> Support {
        match self {
            LabInequality::Lemma4Inf | LabInequality::Lemma4Four => Support::Oscillating,
            _ => Support::All,
        }
    }

    /// Predicted power of `eps` in the constant, where there is one.
    pub fn eps_power(&self) -> Option<f64> {
        match self {
            LabInequality::Lemma4Inf => Some(0.5),
            LabInequality::Lemma4Four => Some(0.25),
            _ => None,
        }
    }

    /// Quadrature grid for the left-hand norm.
    pub fn grid(&self, t: &Torus) -> Option<[usize; 3]> {
        match self {
            LabInequality::Lemma4Inf | LabInequality::HausdorffYoung { .. } => Some(t.oversampled_grid(4)),
            LabInequality::Lemma4Four | LabInequality::Lemma6 => Some(t.oversampled_grid(2)),
            LabInequality::Poincare { .. } => None,
        }
    }

    fn validate(&self, t: &Torus) -> Result<()> {
        let deg = |m: &str| Err(Error::InvalidDomain(format!("{}: {m}", self.id())));
        match self {
            LabInequality::Lemma4Inf | LabInequality::Lemma4Four if t.modes[2] == 0 => deg("needs modes with p != 0"),
            LabInequality::Lemma6 if t.modes[2] != 0 => deg("needs a planar mode box"),
            LabInequality::Lemma6 if t.modes[0] == 0 && t.modes[1] == 0 => deg("empty mode box"),
            LabInequality::Poincare { alpha } if !(*alpha > 0.0) => deg("alpha must be positive"),
            LabInequality::HausdorffYoung { p } if !(1.0..=2.0).contains(p) => deg("p must lie in [1, 2]"),
            _ if t.modes == [0, 0, 0] => deg("empty mode box"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LabInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for LabInequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |a| {
                a.trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad parameter in {s:?}")))
            })
        };
        match head.trim() {
            "lemma4-inf" => Ok(LabInequality::Lemma4Inf),
            "lemma4-4" => Ok(LabInequality::Lemma4Four),
            "lemma6" => Ok(LabInequality::Lemma6),
            "poincare" => Ok(LabInequality::Poincare { alpha: num(1.0)? }),
            "hausdorff-young" => Ok(LabInequality::HausdorffYoung { p: num(2.0)? }),
            _ => Err(Error::InvalidArgument(format!("unknown inequality {s:?}"))),
        }
    }
}

/// Thin box `[0,l1] x [0,l2] x [0,eps]` whose horizontal cutoff scales like
/// `1/eps`, so the retained band resolves structures of size `eps`.
pub fn thin_torus(l1: f64, l2: f64, eps: f64, k_factor: f64, n3: usize) -> Result<Torus> {
    if !(eps > 0.0 && k_factor > 0.0) {
        return Err(Error::InvalidDomain("eps and k_factor must be positive".into()));
    }
    let n1 = (k_factor * l1 / eps).ceil() as usize;
    let n2 = (k_factor * l2 / eps).ceil() as usize;
    Torus::new([l1, l2, eps], [n1, n2, n3])
}

/// Planar torus whose grid of `n` points per axis integrates quartic
/// expressions exactly.
pub fn planar_torus(l1: f64, l2: f64, n: usize) -> Result<Torus> {
    if n < 5 {
        return Err(Error::InvalidDomain("grid needs at least 5 points".into()));
    }
    let m = (n - 1) / 4;
    Torus::planar(l1, l2, m, m)
}

/// Ratio evaluator with its transform cached.
#[derive(Debug, Clone)]
pub struct Evaluator {
    inequality: LabInequality,
    torus: Torus,
    transformer: Option<Transformer>,
}

impl Evaluator {
    pub fn new(inequality: LabInequality, torus: Torus) -> Result<Self> {
        inequality.validate(&torus)?;
        Ok(Self {
            inequality,
            torus,
            transformer: inequality.grid(&torus).map(Transformer::new),
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// `(lhs, rhs)` of the inequality with unit constant.
    pub fn sides(&self, f: &ScalarField) -> Result<(f64, f64)> {
        if *f.torus() != self.torus {
            return Err(Error::TorusMismatch);
        }
        let phys = || self.transformer.as_ref().expect("grid").to_physical(f);
        Ok(match self.inequality {
            LabInequality::Lemma4Inf => (phys()?.max_abs(), f.norm_ds(2.0)),
            LabInequality::Lemma4Four => (phys()?.norm_l4(), f.norm_ds(1.0)),
            LabInequality::Lemma6 => (phys()?.norm_l4(), f.norm_ds(0.5)),
            LabInequality::Poincare { alpha } => (f.norm_l2(), f.norm_ds(alpha)),
            LabInequality::HausdorffYoung { p } => {
                let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
                let v = self.torus.volume();
                let lp: f64 = f.coeffs().iter().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p);
                let vol = if q.is_infinite() { 1.0 } else { v.powf(1.0 / q) };
                (phys()?.norm_lp(q), vol * lp)
            }
        })
    }

    pub fn ratio(&self, f: &ScalarField) -> Result<f64> {
        let (a, b) = self.sides(f)?;
        Ok(if b > 0.0 { a / b } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub trials: usize,
    /// Ratio evaluations spent on coordinate ascent.
    pub ascent_evals: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            trials: 64,
            ascent_evals: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub inequality: String,
    pub lengths: [f64; 3],
    pub modes: [usize; 3],
    pub grid: Option<[usize; 3]>,
    pub trials: usize,
    pub evaluations: usize,
    pub max_ratio: f64,
    /// `max_ratio / eps^power` when a power is predicted.
    pub normalized: Option<f64>,
    pub best_kind: String,
    pub trial_ratios: Vec<f64>,
    /// Relative change against the next coarser resolution.
    pub convergence: Option<f64>,
    #[serde(skip)]
    pub maximizer: ScalarField,
}

#[derive(Debug, Clone)]
struct Best {
    ratio: f64,
    index: usize,
    field: ScalarField,
}

impl Best {
    /// Associative and commutative, ties broken by trial index.
    fn merge(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if b.ratio > a.ratio || (b.ratio == a.ratio && b.index < a.index) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    }
}

fn run_trials(ev: &Evaluator, cfg: &EstimateConfig) -> Result<(Vec<f64>, Option<Best>)> {
    let support = ev.inequality.support();
    let one = |i: usize| -> Result<(f64, Best)> {
        let (_, f) = trial_field(ev.torus, support, cfg.seed, i);
        let r = ev.ratio(&f)?;
        Ok((r, Best { ratio: r, index: i, field: f }))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, Best)>> = {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, Best)>> = (0..cfg.trials).map(one).collect();
    let mut ratios = Vec::with_capacity(cfg.trials);
    let mut best = None;
    for r in results {
        let (v, b) = r?;
        ratios.push(v);
        best = Best::merge(best, Some(b));
    }
    Ok((ratios, best))
}

/// Cyclic coordinate ascent over the largest coefficients with a shrinking
/// step. Returns the improved field, its ratio and the evaluations used.
fn ascend(ev: &Evaluator, start: ScalarField, ratio: f64, budget: usize) -> Result<(ScalarField, f64, usize)> {
    let t = ev.torus;
    let support = ev.inequality.support();
    let mut order: Vec<usize> = (0..t.zero_index())
        .filter(|&i| support.allows(t.mode_at(i)))
        .collect();
    if order.is_empty() || budget == 0 {
        return Ok((start, ratio, 0));
    }
    order.sort_by(|&a, &b| start.coeffs()[b].norm().total_cmp(&start.coeffs()[a].norm()).then(a.cmp(&b)));
    let mut best = start;
    let mut best_r = ratio;
    let mut step = 0.5 * best.max_abs_coeff().max(1e-300);
    let mut used = 0;
    let moves = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    'outer: while used < budget {
        let mut improved = false;
        for &i in &order {
            for d in moves {
                if used >= budget {
                    break 'outer;
                }
                let mut trial = best.clone();
                let m = t.mode_at(i);
                let c = trial.coeffs()[i] + d * step;
                trial.set_pair(m, c);
                let r = ev.ratio(&trial)?;
                used += 1;
                if r > best_r {
                    best = trial;
                    best_r = r;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 * best.max_abs_coeff() {
                break;
            }
        }
    }
    Ok((best, best_r, used))
}

pub fn estimate_constant(inequality: LabInequality, torus: Torus, cfg: &EstimateConfig) -> Result<ConstantEstimate> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trial budget must be positive".into()));
    }
    let ev = Evaluator::new(inequality, torus)?;
    let (ratios, best) = run_trials(&ev, cfg)?;
    let best = best.expect("at least one trial");
    let kind = TrialKind::for_trial(best.index);
    let (field, ratio, used) = ascend(&ev, best.field, best.ratio, cfg.ascent_evals)?;
    let best_kind = if ratio > best.ratio {
        format!("{}+ascent", kind.name())
    } else {
        kind.name().to_string()
    };
    Ok(ConstantEstimate {
        inequality: inequality.id(),
        lengths: torus.lengths,
        modes: torus.modes,
        grid: inequality.grid(&torus),
        trials: cfg.trials,
        evaluations: cfg.trials + used,
        max_ratio: ratio,
        normalized: inequality.eps_power().map(|p| ratio / torus.lengths[2].powf(p)),
        best_kind,
        trial_ratios: ratios,
        convergence: None,
        maximizer: field,
    })
}

/// Estimates on a sequence of tori (typically doubling resolution), with
/// the relative change against the previous entry recorded.
pub fn estimate_at_resolutions(inequality: LabInequality, tori: &[Torus], cfg: &EstimateConfig) -> Result<Vec<ConstantEstimate>> {
    let mut out: Vec<ConstantEstimate> = Vec::with_capacity(tori.len());
    for t in tori {
        let mut e = estimate_constant(inequality, *t, cfg)?;
        if let Some(prev) = out.last() {
            e.convergence = Some((e.max_ratio - prev.max_ratio).abs() / prev.max_ratio);
        }
        out.push(e);
    }
    Ok(out)
}

/// `||D^{theta a + (1-theta) b} f|| / (||D^a f||^theta ||D^b f||^{1-theta})`,
/// at most one by Hölder on the Parseval weights.
pub fn interpolation_ratio(f: &ScalarField, a: f64, b: f64, theta: f64) -> f64 {
    let num = f.norm_ds(theta * a + (1.0 - theta) * b);
    let den = f.norm_ds(a).powf(theta) * f.norm_ds(b).powf(1.0 - theta);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn estimates_csv(estimates: &[ConstantEstimate]) -> String {
    let mut s = String::from("inequality,eps,n1,n2,n3,max_ratio,normalized\n");
    for e in estimates {
        s.push_str(&format!(
            "{},{:.17e},{},{},{},{:.17e},{}\n",
            e.inequality,
            e.lengths[2],
            e.modes[0],
            e.modes[1],
            e.modes[2],
            e.max_ratio,
            e.normalized.map_or(String::new(), |v| format!("{v:.17e}"))
        ));
    }
    s
}
