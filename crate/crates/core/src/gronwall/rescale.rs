//! Map of a box `[0,l1] x [0,l2] x [0,eps]` with viscosity `nu` onto a box
//! of unit length and unit viscosity.
//!
//! `u~(x, t) = (l1/nu) u(l1 x1, l1 x2 mod l2, l1 x3, (l1^2/nu) t)` and
//! `f~ = (l1^3/nu^2) f(...)` live on `[0,1] x [0, n l2/l1] x [0, eps/l1]`
//! with `n = floor(l1/l2)`. The box holds `n` periods of the original in
//! the second direction, so mode `(m, j, p)` moves to `(m, n j, p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::transform::quadrature_norm_l2;
use crate::spectral::{SpectralField, Torus};

#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub u: SpectralField,
    pub f: SpectralField,
    pub torus: Torus,
    pub n: usize,
    /// `t~ = time_factor * t`.
    pub time_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `|| f ||_2` and `nu^2 / (n^{1/2} l1^{3/2}) || f~ ||_2`.
    pub f_sides: (f64, f64),
    /// `|| D u ||_2` and `nu / (n^{1/2} l1^{1/2}) || D u~ ||_2`.
    pub u_sides: (f64, f64),
}

impl IdentityCheck {
    pub fn max_relative_error(&self) -> f64 {
        let rel = |(a, b): (f64, f64)| if a == 0.0 && b == 0.0 { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        rel(self.f_sides).max(rel(self.u_sides))
    }
}

fn unit_torus(t: &Torus) -> Result<(Torus, usize)> {
    let [l1, l2, eps] = t.lengths;
    if l2 > l1 {
        return Err(Error::InvalidDomain(format!("need l1 >= l2, got l1 = {l1}, l2 = {l2}")));
    }
    let n = (l1 / l2).floor() as usize;
    let torus = Torus::new([1.0, n as f64 * l2 / l1, eps / l1], [t.modes[0], n * t.modes[1], t.modes[2]])?;
    Ok((torus, n))
}

fn spread(field: &SpectralField, target: Torus, n: usize, scale: f64) -> SpectralField {
    let src = field.torus();
    let mut out = SpectralField::zeros(target);
    {
        let raw = out.raw_mut();
        let inp = field.raw();
        for (i, m) in src.iter_modes() {
            let j = target.index([m[0], m[1] * n as i64, m[2]]);
            for c in 0..3 {
                raw[c][j] = inp[c][i] * scale;
            }
        }
    }
    out
}

pub fn rescale(u: &SpectralField, f: &SpectralField, nu: f64) -> Result<Rescaled> {
    if u.torus() != f.torus() {
        return Err(Error::TorusMismatch);
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    let (torus, n) = unit_torus(u.torus())?;
    let l1 = u.torus().lengths[0];
    Ok(Rescaled {
        u: spread(u, torus, n, l1 / nu),
        f: spread(f, torus, n, l1.powi(3) / (nu * nu)),
        torus,
        n,
        time_factor: nu / (l1 * l1),
    })
}

/// Undo [`rescale`] onto the original torus `original`. Modes of the unit
/// box whose second index is not a multiple of `n` must vanish.
pub fn inverse_rescale(r: &Rescaled, original: Torus, nu: f64) -> Result<(SpectralField, SpectralField)> {
    let (torus, n) = unit_torus(&original)?;
    if torus != r.torus || n != r.n {
        return Err(Error::TorusMismatch);
    }
    let l1 = original.lengths[0];
    let back = |g: &SpectralField, scale: f64| -> Result<SpectralField> {
        let mut out = SpectralField::zeros(original);
        let inp = g.raw();
        for (j, m) in torus.iter_modes() {
            let off = m[1].rem_euclid(n as i64) != 0;
            if off {
                if (0..3).any(|c| inp[c][j].norm() > 0.0) {
                    return Err(Error::InvalidArgument("field is not n-periodic in the second direction".into()));
                }
                continue;
            }
            let i = original.index([m[0], m[1] / n as i64, m[2]]);
            let raw = out.raw_mut();
            for c in 0..3 {
                raw[c][i] = inp[c][j] * scale;
            }
        }
        Ok(out)
    };
    Ok((back(&r.u, nu / l1)?, back(&r.f, nu * nu / l1.powi(3))?))
}

fn gradient_norm(u: &SpectralField) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..3 {
        s += quadrature_norm_l2(&u.partial(j))?.powi(2);
    }
    Ok(s.sqrt())
}

/// Both norm identities, every norm by quadrature on its own box. The
/// velocity identity holds for the gradient seminorm; the `L^2` part of the
/// inhomogeneous norm scales with `l1` differently.
pub fn check_identities(u: &SpectralField, f: &SpectralField, nu: f64) -> Result<IdentityCheck> {
    let r = rescale(u, f, nu)?;
    let l1 = u.torus().lengths[0];
    let n = r.n as f64;
    Ok(IdentityCheck {
        f_sides: (
            quadrature_norm_l2(f)?,
            nu * nu / (n.sqrt() * l1.powf(1.5)) * quadrature_norm_l2(&r.f)?,
        ),
        u_sides: (gradient_norm(u)?, nu / (n.sqrt() * l1.sqrt()) * gradient_norm(&r.u)?),
    })
}
