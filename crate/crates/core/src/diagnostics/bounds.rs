//! Conclusion bounds for a finished run.

use serde::{Deserialize, Serialize};

use super::series::{trapezoid, DiagnosticSeries};
use crate::error::{Error, Result};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;
pub const VACUOUS_MESSAGE: &str = "bound vacuous — hypothesis M ≤ c⁻¹νl2^{1/2}/l1 presumably violated";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `||u(0)||_{H^1}`.
    pub u: f64,
    /// `sup_t ||f(t)||_2`.
    pub f: f64,
    pub l1: f64,
    pub l2: f64,
    pub nu: f64,
    pub eps: f64,
    /// Fraction of the run window used for the tail supremum.
    pub tail_fraction: f64,
}

impl BoundInputs {
    pub fn from_series(series: &DiagnosticSeries) -> Self {
        let l = series.meta.torus.lengths;
        BoundInputs {
            u: series.meta.u0_h1,
            f: series.meta.f_bound,
            l1: l[0],
            l2: l[1],
            nu: series.meta.nu,
            eps: l[2],
            tail_fraction: DEFAULT_TAIL_FRACTION,
        }
    }

    /// `M = max{U, (l1/nu) F}`.
    pub fn m(&self) -> f64 {
        self.u.max(self.l1 / self.nu * self.f)
    }

    /// `max{X, (l1^{3/2} / (nu l2^{1/2})) eps^{-1/2} X^2}`.
    pub fn shape(&self, x: f64) -> f64 {
        let k = self.l1.powf(1.5) / (self.nu * self.l2.sqrt()) / self.eps.sqrt();
        x.max(k * x * x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: BoundInputs,
    pub m: f64,
    pub vacuous: bool,
    pub message: Option<String>,
    pub sup_h1: Option<f64>,
    pub tail_sup_h1: Option<f64>,
    pub int_h2_sq: Option<f64>,
    /// Smallest `c` with `sup ||u||_{H^1} <= c shape(M)`.
    pub c_h1: Option<f64>,
    /// Smallest `c` with `tail sup ||u||_{H^1} <= c shape((l1/nu) F)`;
    /// `None` when the forcing vanishes and the right side is 0.
    pub c_limsup: Option<f64>,
}

pub fn evaluate_theorem_bounds(series: &DiagnosticSeries, inputs: BoundInputs) -> Result<BoundsReport> {
    if !(inputs.l1 > 0.0 && inputs.l2 > 0.0 && inputs.nu > 0.0 && inputs.eps > 0.0) {
        return Err(Error::InvalidArgument("lengths, nu and eps must be positive".into()));
    }
    if !(inputs.tail_fraction > 0.0 && inputs.tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument("tail fraction must lie in (0, 1]".into()));
    }
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let times = series.times();
    let h1 = series.map(|s| s.h1);
    let sup_h1 = h1.iter().cloned().fold(0.0f64, f64::max);
    let t_end = *times.last().unwrap();
    let t_start = times[0];
    let cut = t_end - inputs.tail_fraction * (t_end - t_start);
    let tail_sup = times
        .iter()
        .zip(&h1)
        .filter(|(t, _)| **t >= cut - 1e-12)
        .map(|(_, v)| *v)
        .fold(0.0f64, f64::max);
    let h2sq = series.map(|s| s.h2 * s.h2);
    let int_h2 = trapezoid(&times, &h2sq);
    let m = inputs.m();
    let rhs = inputs.shape(m);
    let c_h1 = if rhs > 0.0 { Some(sup_h1 / rhs) } else if sup_h1 == 0.0 { Some(0.0) } else { None };
    let rhs_tail = inputs.shape(inputs.l1 / inputs.nu * inputs.f);
    let c_limsup = if rhs_tail > 0.0 { Some(tail_sup / rhs_tail) } else { None };
    Ok(BoundsReport {
        inputs,
        m,
        vacuous: false,
        message: None,
        sup_h1: Some(sup_h1),
        tail_sup_h1: Some(tail_sup),
        int_h2_sq: Some(int_h2),
        c_h1,
        c_limsup,
    })
}

/// Report for a run that blew up.
pub fn vacuous_report(inputs: BoundInputs) -> BoundsReport {
    BoundsReport {
        inputs,
        m: inputs.m(),
        vacuous: true,
        message: Some(VACUOUS_MESSAGE.to_string()),
        sup_h1: None,
        tail_sup_h1: None,
        int_h2_sq: None,
        c_h1: None,
        c_limsup: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::series::{Sample, SeriesMeta};
    use crate::spectral::Torus;

    fn series(h1: &[f64]) -> DiagnosticSeries {
        let torus = Torus::new([1.0, 1.0, 0.25], [1, 1, 1]).unwrap();
        let mut s = DiagnosticSeries::new(SeriesMeta {
            label: "x".into(),
            torus,
            domain: None,
            nu: 1.0,
            u0_h1: h1[0],
            f_bound: 0.0,
            dt: 0.1,
            scheme: "etd-rk2".into(),
            dealias: true,
        });
        for (i, v) in h1.iter().enumerate() {
            s.push(Sample { t: i as f64, h1: *v, h2: 2.0 * v, ..Default::default() });
        }
        s
    }

    #[test]
    fn tail_window_and_integral() {
        let s = series(&[1.0, 0.5, 0.25, 0.125, 0.0625]);
        let r = evaluate_theorem_bounds(&s, BoundInputs::from_series(&s)).unwrap();
        assert_eq!(r.sup_h1, Some(1.0));
        // last 25% of [0, 4] is [3, 4]
        assert_eq!(r.tail_sup_h1, Some(0.125));
        let want = trapezoid(&s.times(), &s.map(|x| 4.0 * x.h1 * x.h1));
        assert!((r.int_h2_sq.unwrap() - want).abs() < 1e-15);
        assert!(r.c_limsup.is_none());
        // M = U = 1, shape = max(1, 2 * 1) at eps = 1/4
        assert!((r.c_h1.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vacuous_on_blow_up() {
        let s = series(&[1.0; 5]);
        let r = vacuous_report(BoundInputs::from_series(&s));
        assert!(r.vacuous && r.c_h1.is_none());
        assert!(r.message.unwrap().contains("vacuous"));
    }
}
