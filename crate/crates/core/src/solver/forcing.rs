use serde::{Deserialize, Serialize};

use crate::spectral::SpectralField;

/// Scalar time profile multiplying the forcing template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Modulation {
    Off,
    Constant { c: f64 },
    /// `a + b sin(omega t + phase)`.
    Sinusoidal { a: f64, b: f64, omega: f64, phase: f64 },
}

impl Modulation {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Modulation::Off => 0.0,
            Modulation::Constant { c } => c,
            Modulation::Sinusoidal { a, b, omega, phase } => a + b * (omega * t + phase).sin(),
        }
    }

    /// `sup_t |m(t)|` (an upper bound for the sinusoid).
    pub fn sup_abs(&self) -> f64 {
        match *self {
            Modulation::Off => 0.0,
            Modulation::Constant { c } => c.abs(),
            Modulation::Sinusoidal { a, b, .. } => a.abs() + b.abs(),
        }
    }

    /// `int_0^t m(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            Modulation::Off => 0.0,
            Modulation::Constant { c } => c * t,
            Modulation::Sinusoidal { a, b, omega, phase } => {
                if omega == 0.0 {
                    (a + b * phase.sin()) * t
                } else {
                    a * t + b * (phase.cos() - (omega * t + phase).cos()) / omega
                }
            }
        }
    }

    /// `int_0^t int_0^s m(r) dr ds`.
    pub fn double_integral(&self, t: f64) -> f64 {
        match *self {
            Modulation::Off => 0.0,
            Modulation::Constant { c } => 0.5 * c * t * t,
            Modulation::Sinusoidal { a, b, omega, phase } => {
                if omega == 0.0 {
                    0.5 * (a + b * phase.sin()) * t * t
                } else {
                    0.5 * a * t * t + b * t * phase.cos() / omega
                        - b * ((omega * t + phase).sin() - phase.sin()) / (omega * omega)
                }
            }
        }
    }
}

/// Body force `f(x, t) = m(t) g(x)` with a solenoidal, mean-zero template `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    profile: SpectralField,
    modulation: Modulation,
    f_bound: f64,
}

impl ForcingSpec {
    pub fn new(profile: &SpectralField, modulation: Modulation) -> Self {
        let profile = profile.leray();
        let f_bound = modulation.sup_abs() * profile.norm_l2();
        Self {
            profile,
            modulation,
            f_bound,
        }
    }

    pub fn none(torus: crate::spectral::Torus) -> Self {
        Self::new(&SpectralField::zeros(torus), Modulation::Off)
    }

    pub fn profile(&self) -> &SpectralField {
        &self.profile
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// `sup_t ||f(t)||_2`.
    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    pub fn is_off(&self) -> bool {
        matches!(self.modulation, Modulation::Off) || self.profile.is_zero()
    }

    /// `L(m(t) g)`; the projection is reapplied on every evaluation.
    pub fn at(&self, t: f64) -> SpectralField {
        self.profile.scale(self.modulation.at(t)).leray()
    }

    pub fn norm_at(&self, t: f64) -> f64 {
        self.modulation.at(t).abs() * self.profile.norm_l2()
    }

    /// Same forcing on a different mode box.
    pub fn resized(&self, modes: [usize; 3]) -> Self {
        Self::new(&self.profile.resize(modes), self.modulation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Torus;
    use num_complex::Complex64;

    #[test]
    fn integrals_match_quadrature() {
        let m = Modulation::Sinusoidal { a: 0.3, b: -1.2, omega: 2.5, phase: 0.4 };
        let t = 1.7;
        let n = 20_000;
        let h = t / n as f64;
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for k in 0..n {
            let s = (k as f64 + 0.5) * h;
            i1 += m.at(s) * h;
            i2 += m.integral(s) * h;
        }
        assert!((i1 - m.integral(t)).abs() < 1e-8);
        assert!((i2 - m.double_integral(t)).abs() < 1e-8);
        let c = Modulation::Constant { c: 2.0 };
        assert_eq!(c.double_integral(3.0), 9.0);
    }

    #[test]
    fn bound_dominates_evaluations() {
        let t = Torus::new([1.0, 1.0, 0.2], [2, 2, 1]).unwrap();
        let g = SpectralField::from_fn(t, |m| [Complex64::new(m[1] as f64, 0.0), Complex64::new(0.0, 0.0), Complex64::new(m[0] as f64, 1.0)]);
        let f = ForcingSpec::new(&g, Modulation::Sinusoidal { a: 0.5, b: 0.5, omega: 3.0, phase: 0.0 });
        assert!(f.profile().max_relative_divergence() < 1e-14);
        for i in 0..50 {
            let s = i as f64 * 0.1;
            assert!(f.at(s).norm_l2() <= f.f_bound() * (1.0 + 1e-14));
        }
        assert!(ForcingSpec::none(t).is_off());
    }
}
