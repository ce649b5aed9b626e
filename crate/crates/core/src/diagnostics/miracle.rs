use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::transform::dot_integral;
use crate::spectral::{PhysicalField, SpectralField, Torus, Transformer};

/// `int a . (b . grad c) dV` by quadrature. Every factor is band limited to
/// the mode box, so the padded grid integrates the cubic exactly.
pub fn transport_integral(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> Result<f64> {
    let t = *a.torus();
    if *b.torus() != t || *c.torus() != t {
        return Err(Error::TorusMismatch);
    }
    let tr = Transformer::new(t.padded_grid());
    let pa = tr.to_physical_vec(a)?;
    let pb = tr.to_physical_vec(b)?;
    let grad: Vec<[PhysicalField; 3]> = (0..3).map(|j| tr.to_physical_vec(&c.partial(j))).collect::<Result<_>>()?;
    let mut adv = [pa[0].clone(), pa[1].clone(), pa[2].clone()];
    for (i, out) in adv.iter_mut().enumerate() {
        out.data.iter_mut().for_each(|v| *v = 0.0);
        for (j, gj) in grad.iter().enumerate() {
            for ((o, bj), g) in out.data.iter_mut().zip(&pb[j].data).zip(&gj[i].data) {
                *o += bj * g;
            }
        }
    }
    Ok(dot_integral(&pa, &adv))
}

fn check_planar(r: &SpectralField) -> Result<()> {
    if !r.proj_q().is_zero() {
        return Err(Error::NotPlanar("field depends on z".into()));
    }
    if !r.comp(2).is_zero() {
        return Err(Error::NotPlanar("third component is nonzero".into()));
    }
    let div = r.max_relative_divergence();
    if div > 1e-10 {
        return Err(Error::NotDivergenceFree(div));
    }
    Ok(())
}

/// `int Lap r . (r . grad r) dA / (||D^2 r|| ||Dr||^2)` for a planar,
/// solenoidal `r = (r1, r2, 0)`; vanishes identically in exact arithmetic.
pub fn check_enstrophy_miracle(r: &SpectralField) -> Result<f64> {
    check_planar(r)?;
    if r.is_zero() {
        return Ok(0.0);
    }
    let lap = r.deriv(2.0).scale(-1.0);
    let val = transport_integral(&lap, r, r)?;
    Ok(val / (r.norm_ds(2.0) * r.norm_ds(1.0).powi(2)))
}

/// `int Lap s . (r . grad s) dV / (||D^2 s|| ||Dr|| ||Ds||)`: the term the
/// vertical component contributes, which has no cancellation.
pub fn s_term_residual(r: &SpectralField, s: &SpectralField) -> Result<f64> {
    check_planar(r)?;
    if !s.proj_q().is_zero() || !s.comp(0).is_zero() || !s.comp(1).is_zero() {
        return Err(Error::NotPlanar("s must be (0, 0, s3(x, y))".into()));
    }
    let den = s.norm_ds(2.0) * r.norm_ds(1.0) * s.norm_ds(1.0);
    if den == 0.0 {
        return Ok(0.0);
    }
    let lap = s.deriv(2.0).scale(-1.0);
    Ok(transport_integral(&lap, r, s)? / den)
}

/// `r = (sin(2 pi y/l2), 0, 0)` and `s3 = cos(2 pi x/l1) + cos(2 pi (x/l1 + y/l2))`.
pub fn s_term_counterexample(torus: Torus) -> Result<(SpectralField, SpectralField)> {
    if torus.modes[0] < 1 || torus.modes[1] < 1 {
        return Err(Error::InvalidArgument("need at least one mode in x and y".into()));
    }
    let z = Complex64::new(0.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let mut r = SpectralField::zeros(torus);
    r.set_pair([0, 1, 0], [Complex64::new(0.0, -0.5), z, z]);
    let mut s = SpectralField::zeros(torus);
    s.set_pair([1, 0, 0], [z, z, half]);
    s.set_pair([1, 1, 0], [z, z, half]);
    Ok((r, s))
}
