use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{DomainSpec, SpectralField, Torus};

/// Which family of norm functionals feeds the inequality checks.
///
/// `Planar` uses `phi = ||Dr||`, `psi = ||Ds||` (z-independent flows);
/// `Full` folds `w = Qu` into both, `phi = sqrt(||Dr||^2 + ||Dw||^2)` and
/// so on, and adds `chi = ||D^2 w||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Planar,
    Full,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "planar" | "thm2" | "lemma3" => Ok(Regime::Planar),
            "full" | "thm1" | "lemma5" => Ok(Regime::Full),
            other => Err(Error::InvalidArgument(format!("unknown regime '{other}'"))),
        }
    }
}

/// Norms of one velocity snapshot, split as `u = r + s + w` with
/// `v = Pu`, `w = Qu`, `r = Rv`, `s = Sv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Sample {
    pub t: f64,
    pub theta: f64,
    pub du: f64,
    pub dr: f64,
    pub ds: f64,
    pub dw: f64,
    pub d2r: f64,
    pub d2s: f64,
    pub d2w: f64,
    pub h1: f64,
    pub h2: f64,
    /// `||Qu||_{H^1}`.
    pub q_h1: f64,
    /// `||f(t)||_2`.
    pub forcing: f64,
    /// `<u, f(t)>`.
    pub forcing_work: f64,
    pub divergence: f64,
}

impl Sample {
    pub fn compute(u: &SpectralField, t: f64, forcing: Option<&SpectralField>) -> Self {
        let v = u.proj_p();
        let w = u.proj_q();
        let r = v.proj_r();
        let s = v.proj_s();
        let theta = u.norm_l2();
        let du = u.norm_ds(1.0);
        let d2u = u.norm_ds(2.0);
        let (forcing_norm, work) = match forcing {
            Some(f) => (f.norm_l2(), u.inner(f).unwrap_or(f64::NAN)),
            None => (0.0, 0.0),
        };
        Self {
            t,
            theta,
            du,
            dr: r.norm_ds(1.0),
            ds: s.norm_ds(1.0),
            dw: w.norm_ds(1.0),
            d2r: r.norm_ds(2.0),
            d2s: s.norm_ds(2.0),
            d2w: w.norm_ds(2.0),
            h1: (theta * theta + du * du).sqrt(),
            h2: (theta * theta + du * du + d2u * d2u).sqrt(),
            q_h1: w.norm_h1(),
            forcing: forcing_norm,
            forcing_work: work,
            divergence: u.max_relative_divergence(),
        }
    }

    pub fn phi(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Planar => self.dr,
            Regime::Full => self.dr.hypot(self.dw),
        }
    }

    pub fn psi(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Planar => self.ds,
            Regime::Full => self.ds.hypot(self.dw),
        }
    }

    pub fn phi_tilde(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Planar => self.d2r,
            Regime::Full => self.d2r.hypot(self.d2w),
        }
    }

    pub fn psi_tilde(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Planar => self.d2s,
            Regime::Full => self.d2s.hypot(self.d2w),
        }
    }

    pub fn chi(&self) -> f64 {
        self.d2w
    }

    /// `||Dv||_2 = sqrt(||Dr||^2 + ||Ds||^2)`.
    pub fn dv(&self) -> f64 {
        self.dr.hypot(self.ds)
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            t: self.t,
            theta: self.theta * s,
            du: self.du * s,
            dr: self.dr * s,
            ds: self.ds * s,
            dw: self.dw * s,
            d2r: self.d2r * s,
            d2s: self.d2s * s,
            d2w: self.d2w * s,
            h1: self.h1 * s,
            h2: self.h2 * s,
            q_h1: self.q_h1 * s,
            forcing: self.forcing,
            forcing_work: self.forcing_work * s,
            divergence: self.divergence,
        }
    }
}

/// Run-level data attached to a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub label: String,
    pub torus: Torus,
    pub domain: Option<DomainSpec>,
    pub nu: f64,
    /// `||u(0)||_{H^1}`.
    pub u0_h1: f64,
    /// `sup_t ||f(t)||_2`.
    pub f_bound: f64,
    pub dt: f64,
    pub scheme: String,
    pub dealias: bool,
}

impl SeriesMeta {
    pub fn eps(&self) -> f64 {
        self.torus.lengths[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub meta: SeriesMeta,
    pub samples: Vec<Sample>,
}

pub const CSV_HEADER: &str = "t,theta,phi,psi,phi_tilde,psi_tilde,chi,h1,h2,F";

impl DiagnosticSeries {
    pub fn new(meta: SeriesMeta) -> Self {
        Self {
            meta,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Sample) {
        self.samples.push(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn map(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Copy with every velocity norm multiplied by `s`; used to build
    /// deliberately violating trajectories.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            meta: SeriesMeta {
                u0_h1: self.meta.u0_h1 * s,
                ..self.meta.clone()
            },
            samples: self.samples.iter().map(|x| x.scaled(s)).collect(),
        }
    }

    /// Columns `t,theta,phi,psi,phi_tilde,psi_tilde,chi,h1,h2,F`, with the
    /// `Full` forms of the functionals (they reduce to the planar ones
    /// when `w = 0`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let r = Regime::Full;
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                s.t,
                s.theta,
                s.phi(r),
                s.psi(r),
                s.phi_tilde(r),
                s.psi_tilde(r),
                s.chi(),
                s.h1,
                s.h2,
                s.forcing
            ));
        }
        out
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("metadata serialises")
    }
}

/// Derivative of sampled data at every sample. Interior points use the
/// three-point formula for nonuniform spacing (second order); the ends use
/// the matching one-sided three-point formulas.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n != y.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {n}")));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let three = |x: [f64; 3], v: [f64; 3], at: f64| {
        // derivative of the interpolating quadratic at `at`
        let l0 = (2.0 * at - x[1] - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
        let l1 = (2.0 * at - x[0] - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
        let l2 = (2.0 * at - x[0] - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
        v[0] * l0 + v[1] * l1 + v[2] * l2
    };
    let mut d = vec![0.0; n];
    d[0] = three([t[0], t[1], t[2]], [y[0], y[1], y[2]], t[0]);
    for i in 1..n - 1 {
        d[i] = three([t[i - 1], t[i], t[i + 1]], [y[i - 1], y[i], y[i + 1]], t[i]);
    }
    d[n - 1] = three([t[n - 3], t[n - 2], t[n - 1]], [y[n - 3], y[n - 2], y[n - 1]], t[n - 1]);
    Ok(d)
}

/// Trapezoid rule.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_functionals_closed_form() {
        let t = Torus::new([1.0, 1.0, 0.25], [2, 2, 1]).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let a = Complex64::new(0.5, 0.0);
        // r = (0, cos 2 pi x, 0), w = (cos(2 pi (y + 4z)) , 0, 0)
        let mut u = SpectralField::zeros(t);
        u.set_pair([1, 0, 0], [z, a, z]);
        u.set_pair([0, 1, 1], [a, z, z]);
        let s = Sample::compute(&u, 0.0, None);
        let vol: f64 = 0.25;
        let kr = 2.0 * PI;
        let kw = 2.0 * PI * (1.0 + 16.0_f64).sqrt();
        let l2 = (vol * 0.5).sqrt();
        assert!((s.theta - (2.0 * vol * 0.5).sqrt()).abs() < 1e-14);
        assert!((s.dr - kr * l2).abs() < 1e-12);
        assert!((s.dw - kw * l2).abs() < 1e-12);
        assert!((s.d2w - kw * kw * l2).abs() < 1e-11);
        assert_eq!(s.ds, 0.0);
        assert!((s.phi(Regime::Full) - (kr * kr + kw * kw).sqrt() * l2).abs() < 1e-12);
        assert!(s.phi(Regime::Full) >= s.phi(Regime::Planar));
    }

    #[test]
    fn planar_field_has_no_chi() {
        let t = Torus::new([1.0, 1.0, 0.25], [2, 2, 1]).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let mut u = SpectralField::zeros(t);
        u.set_pair([1, 1, 0], [z, z, Complex64::new(0.2, 0.1)]);
        let s = Sample::compute(&u, 0.0, None);
        assert_eq!(s.chi(), 0.0);
        assert_eq!(s.phi(Regime::Full), s.phi(Regime::Planar));
        let zero = Sample::compute(&SpectralField::zeros(t), 0.0, None);
        assert_eq!(zero.h2, 0.0);
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.7];
        let y: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let d = time_derivative(&t, &y).unwrap();
        for (x, dv) in t.iter().zip(d) {
            assert!((dv - (6.0 * x - 1.0)).abs() < 1e-12);
        }
        assert!(time_derivative(&t[..2], &y[..2]).is_err());
    }

    #[test]
    fn csv_has_expected_header() {
        let t = Torus::new([1.0, 1.0, 0.25], [1, 1, 1]).unwrap();
        let meta = SeriesMeta {
            label: "x".into(),
            torus: t,
            domain: None,
            nu: 1.0,
            u0_h1: 0.0,
            f_bound: 0.0,
            dt: 0.1,
            scheme: "etd-rk2".into(),
            dealias: true,
        };
        let mut s = DiagnosticSeries::new(meta);
        s.push(Sample::default());
        let csv = s.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }
}
