//! Dyadic shells of a planar field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// `A_m = (sum_{2^m <= |r| < 2^{m+1}} |f_r|^2)^{1/2}` with
/// `|r| = sqrt(r1^2/l1^2 + r2^2/l2^2)`, both members of each conjugate pair
/// counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicProfile {
    pub blocks: Vec<f64>,
    /// Norm of the modes with `0 < |r| < 1` (present when `l1 > 1` or
    /// `l2 > 1`), which no block with `m >= 0` holds.
    pub below_unit: f64,
    /// `sum |f_r|^2` over all modes.
    pub total_sq: f64,
    /// `sum_m 2^m A_m^2`.
    pub weighted_sq: f64,
    /// `||D^{1/2} f||_2^2`.
    pub half_derivative_sq: f64,
    /// `1 / (2 pi l1 l2)`, the constant in
    /// `sum_m 2^m A_m^2 <= c ||D^{1/2} f||_2^2`.
    pub constant: f64,
}

impl DyadicProfile {
    pub fn blocks_sq_sum(&self) -> f64 {
        self.blocks.iter().map(|a| a * a).sum::<f64>() + self.below_unit * self.below_unit
    }

    pub fn bound_holds(&self) -> bool {
        self.weighted_sq <= self.constant * self.half_derivative_sq * (1.0 + 1e-12)
    }
}

pub fn dyadic_decompose(f: &ScalarField) -> Result<DyadicProfile> {
    let t = *f.torus();
    if t.modes[2] != 0 {
        return Err(Error::NotPlanar("dyadic blocks need a planar field".into()));
    }
    let mut blocks: Vec<f64> = Vec::new();
    let mut below = 0.0;
    let mut total = 0.0;
    for (i, m) in t.iter_modes() {
        let c2 = f.coeffs()[i].norm_sqr();
        if c2 == 0.0 {
            continue;
        }
        total += c2;
        let r = t.k2(m).sqrt();
        if r < 1.0 {
            below += c2;
            continue;
        }
        let mut b = r.log2().floor() as usize;
        // guard the floor against rounding at exact powers of two
        if 2f64.powi(b as i32 + 1) <= r {
            b += 1;
        } else if 2f64.powi(b as i32) > r {
            b -= 1;
        }
        if blocks.len() <= b {
            blocks.resize(b + 1, 0.0);
        }
        blocks[b] += c2;
    }
    let weighted = blocks.iter().enumerate().map(|(m, a)| 2f64.powi(m as i32) * a).sum();
    let blocks: Vec<f64> = blocks.into_iter().map(f64::sqrt).collect();
    let half = f.norm_ds(0.5);
    Ok(DyadicProfile {
        blocks,
        below_unit: below.sqrt(),
        total_sq: total,
        weighted_sq: weighted,
        half_derivative_sq: half * half,
        constant: 1.0 / (2.0 * std::f64::consts::PI * t.lengths[0] * t.lengths[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Torus;
    use num_complex::Complex64;

    #[test]
    fn single_unit_mode() {
        let t = Torus::planar(1.0, 1.0, 4, 4).unwrap();
        let mut f = ScalarField::zeros(t);
        let c = Complex64::new(0.3, -0.4);
        f.set_pair([0, 1, 0], c);
        let p = dyadic_decompose(&f).unwrap();
        assert_eq!(p.blocks.len(), 1);
        assert!((p.blocks[0] - c.norm() * 2f64.sqrt()).abs() < 1e-15);
        assert!(p.bound_holds());
    }

    #[test]
    fn shell_two_to_four() {
        let t = Torus::planar(1.0, 1.0, 4, 4).unwrap();
        let mut f = ScalarField::zeros(t);
        f.set_pair([2, 0, 0], Complex64::new(1.0, 0.0));
        f.set_pair([2, 2, 0], Complex64::new(0.0, 1.0));
        f.set_pair([3, -1, 0], Complex64::new(0.5, 0.5));
        let p = dyadic_decompose(&f).unwrap();
        assert_eq!(p.blocks.len(), 2);
        assert_eq!(p.blocks[0], 0.0);
        assert!(p.blocks[1] > 0.0);
    }

    #[test]
    fn rejects_thick_fields() {
        let t = Torus::new([1.0, 1.0, 0.1], [2, 2, 1]).unwrap();
        assert!(dyadic_decompose(&ScalarField::zeros(t)).is_err());
    }
}
