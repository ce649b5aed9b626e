use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, Torus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    RandomDivfree,
    ZIndependent,
    QPerturbed,
    TaylorGreenLike,
}

impl std::str::FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random-divfree" => Ok(Self::RandomDivfree),
            "z-independent" => Ok(Self::ZIndependent),
            "q-perturbed" => Ok(Self::QPerturbed),
            "taylor-green-like" => Ok(Self::TaylorGreenLike),
            other => Err(Error::InvalidArgument(format!("unknown initial kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialParams {
    /// Target `||u||_{H^1}`.
    pub amplitude: f64,
    /// Coefficient magnitudes scale like `(2 pi |k|)^slope`.
    pub slope: f64,
    /// Largest `max(|m|, |n|, |p|)` excited.
    pub kmax: usize,
    /// For `q-perturbed`: `||Qu||_{H^1} / ||Pu||_{H^1}` before normalisation.
    pub q_fraction: f64,
    pub seed: u64,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            slope: -2.0,
            kmax: 3,
            q_fraction: 0.1,
            seed: 0,
        }
    }
}

fn random_band(torus: Torus, p: &InitialParams, rng: &mut ChaCha8Rng, keep: impl Fn([i64; 3]) -> bool) -> SpectralField {
    let tpi = 2.0 * std::f64::consts::PI;
    let u = SpectralField::from_fn(torus, |mode| {
        let mut g = || -> f64 { StandardNormal.sample(rng) };
        let draws = [(); 3].map(|_| Complex64::new(g(), g()));
        let top = mode.iter().map(|v| v.unsigned_abs() as usize).max().unwrap();
        if top == 0 || top > p.kmax || !keep(mode) {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let w = (tpi * torus.k2(mode).sqrt()).powf(p.slope);
        draws.map(|z| z * w)
    });
    u.leray()
}

fn normalise(u: SpectralField, amplitude: f64) -> Result<SpectralField> {
    let h1 = u.norm_h1();
    if h1 == 0.0 {
        return Err(Error::InvalidArgument("requested spectrum is empty".into()));
    }
    Ok(u.scale(amplitude / h1))
}

/// Divergence-free, mean-zero initial data with `||u||_{H^1} = amplitude`.
pub fn make_initial(kind: InitialKind, torus: Torus, params: &InitialParams) -> Result<SpectralField> {
    if !(params.amplitude >= 0.0 && params.amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!("amplitude must be >= 0, got {}", params.amplitude)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let u = match kind {
        InitialKind::RandomDivfree => random_band(torus, params, &mut rng, |_| true),
        InitialKind::ZIndependent => random_band(torus, params, &mut rng, |m| m[2] == 0),
        InitialKind::QPerturbed => {
            let v = random_band(torus, params, &mut rng, |m| m[2] == 0);
            let w = random_band(torus, params, &mut rng, |m| m[2] != 0);
            let (nv, nw) = (v.norm_h1(), w.norm_h1());
            if nv == 0.0 || nw == 0.0 {
                return Err(Error::InvalidArgument("requested spectrum is empty".into()));
            }
            v.axpy(params.q_fraction * nv / nw, &w)?
        }
        InitialKind::TaylorGreenLike => {
            if torus.modes[0] == 0 || torus.modes[1] == 0 {
                return Err(Error::InvalidArgument("requested spectrum is empty".into()));
            }
            let [l1, l2, _] = torus.lengths;
            let z = Complex64::new(0.0, 0.0);
            let q = Complex64::new(0.25, 0.0);
            // u1 = sin(2 pi x/l1) cos(2 pi y/l2), u2 = -(l2/l1) cos(2 pi x/l1) sin(2 pi y/l2)
            let a = Complex64::new(0.0, -0.25);
            let b = Complex64::new(0.0, 0.25 * l2 / l1);
            let mut u = SpectralField::zeros(torus);
            u.set_pair([1, 1, 0], [a, b, z]);
            u.set_pair([1, -1, 0], [a, -b, z]);
            if params.q_fraction > 0.0 && torus.modes[2] > 0 {
                let mut w = SpectralField::zeros(torus);
                w.set_pair([1, 0, 1], [z, q, z]);
                w.set_pair([0, 1, 1], [q, z, z]);
                let (nv, nw) = (u.norm_h1(), w.norm_h1());
                u = u.axpy(params.q_fraction * nv / nw, &w)?;
            }
            u.leray()
        }
    };
    if params.amplitude == 0.0 {
        return Ok(SpectralField::zeros(torus));
    }
    normalise(u, params.amplitude)
}
