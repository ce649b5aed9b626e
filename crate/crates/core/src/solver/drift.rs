//! Removal of spatial means from data and forcing.
//!
//! With `u_bar(t) = u_bar(0) + f_bar int_0^t m`, the field
//! `v(y, t) = u(y + xi_t, t) - u_bar(t)` with `xi_t = int_0^t u_bar(s) ds`
//! solves the same equation with the mean-free forcing
//! `f_fluct(y + xi_t, t)`.

use serde::{Deserialize, Serialize};

use super::forcing::{ForcingSpec, Modulation};
use super::nonlinear::Advection;
use crate::error::Result;
use crate::spectral::SpectralField;

/// A field with its spatial mean carried separately (the spectral
/// representation pins the zero mode to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    pub fluct: SpectralField,
    pub mean: [f64; 3],
}

/// Raw forcing `f(x, t) = m(t) (g(x) + f_bar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawForcing {
    pub fluct: ForcingSpec,
    pub mean: [f64; 3],
}

impl RawForcing {
    pub fn modulation(&self) -> Modulation {
        self.fluct.modulation()
    }
}

/// Translation path `xi_t` and mean velocity `u_bar(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub u_bar0: [f64; 3],
    pub f_bar: [f64; 3],
    pub modulation: Modulation,
}

impl Drift {
    pub fn mean_velocity(&self, t: f64) -> [f64; 3] {
        let m = self.modulation.integral(t);
        [0, 1, 2].map(|j| self.u_bar0[j] + self.f_bar[j] * m)
    }

    /// `(xi_t, eta_t, zeta_t)`.
    pub fn shift(&self, t: f64) -> [f64; 3] {
        let m2 = self.modulation.double_integral(t);
        [0, 1, 2].map(|j| self.u_bar0[j] * t + self.f_bar[j] * m2)
    }

    pub fn is_identity(&self) -> bool {
        self.u_bar0 == [0.0; 3] && (self.f_bar == [0.0; 3] || matches!(self.modulation, Modulation::Off))
    }
}

/// Mean-free reduction of raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub u0: SpectralField,
    pub forcing: ForcingSpec,
    pub drift: Drift,
}

impl Reduction {
    /// Mean-free forcing in the moving frame at time `t`.
    pub fn forcing_at(&self, t: f64) -> SpectralField {
        let xi = self.drift.shift(t);
        self.forcing.at(t).translate([-xi[0], -xi[1], -xi[2]])
    }

    /// Undo the reduction: `u(x, t) = v(x - xi_t, t) + u_bar(t)`.
    pub fn reconstruct(&self, v: &SpectralField, t: f64) -> RawField {
        RawField {
            fluct: v.translate(self.drift.shift(t)),
            mean: self.drift.mean_velocity(t),
        }
    }
}

pub fn mean_drift_reduce(u0_raw: &RawField, f_raw: &RawForcing) -> Reduction {
    Reduction {
        u0: u0_raw.fluct.clone(),
        forcing: f_raw.fluct.clone(),
        drift: Drift {
            u_bar0: u0_raw.mean,
            f_bar: f_raw.mean,
            modulation: f_raw.modulation(),
        },
    }
}

/// Right-hand side of the raw equation for the fluctuating part,
/// `nu Lap u' - L((u' + u_bar) . grad u') + L f_fluct(t)`.
pub fn raw_rhs(
    u: &RawField,
    forcing: &ForcingSpec,
    t: f64,
    nu: f64,
    advection: &Advection,
) -> Result<SpectralField> {
    let torus = *u.fluct.torus();
    let lap = u.fluct.deriv(2.0).scale(-nu);
    let adv = advection.term(&u.fluct)?;
    let mut transport = SpectralField::zeros(torus);
    for j in 0..3 {
        if u.mean[j] != 0.0 {
            transport = transport.axpy(-u.mean[j], &u.fluct.partial(j))?;
        }
    }
    lap.add(&adv)?.add(&transport)?.add(&forcing.at(t))
}
