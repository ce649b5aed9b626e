use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ScalarField, SpectralField, Torus, Transformer};

/// Divergence beyond this (relative, per mode) is a contract violation.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

/// Evaluates `-L(u . grad u)` restricted to the mode box.
///
/// Uses the flux form `div(u u)`, which equals the convective form for
/// solenoidal `u`. With `dealias` the six products are formed on the
/// 3/2-padded grid, so the projection back onto the box is alias free and
/// advection exchanges no energy with the retained band.
#[derive(Debug, Clone)]
pub struct Advection {
    torus: Torus,
    transformer: Transformer,
    dealias: bool,
}

impl Advection {
    pub fn new(torus: Torus, dealias: bool) -> Self {
        let grid = if dealias { torus.padded_grid() } else { torus.tight_grid() };
        Self {
            torus,
            transformer: Transformer::new(grid),
            dealias,
        }
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn grid(&self) -> [usize; 3] {
        self.transformer.grid()
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// `-L(u . grad u)`; rejects fields that are not solenoidal.
    pub fn term(&self, u: &SpectralField) -> Result<SpectralField> {
        if *u.torus() != self.torus {
            return Err(Error::TorusMismatch);
        }
        let div = u.max_relative_divergence();
        if div > DIVERGENCE_TOLERANCE {
            return Err(Error::NotDivergenceFree(div));
        }
        self.term_unchecked(u)
    }

    pub(crate) fn term_unchecked(&self, u: &SpectralField) -> Result<SpectralField> {
        if u.is_zero() {
            return Ok(SpectralField::zeros(self.torus));
        }
        let p = self.transformer.to_physical_vec(u)?;
        let mut flux: [[Option<ScalarField>; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in i..3 {
                let prod = p[i].mul(&p[j]);
                let s = self.transformer.to_spectral(&prod, self.torus)?;
                flux[i][j] = Some(s);
            }
        }
        let t = self.torus;
        let tpi = 2.0 * std::f64::consts::PI;
        let mut out = SpectralField::zeros(t);
        {
            let mut outs = out.raw_mut();
            for (idx, mode) in t.iter_modes() {
                let k = t.wavevector(mode);
                for (i, o) in outs.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate() {
                        let (a, b) = if i <= j { (i, j) } else { (j, i) };
                        let c = flux[a][b].as_ref().unwrap().coeffs()[idx];
                        acc += c * Complex64::new(0.0, tpi * kj);
                    }
                    o[idx] = -acc;
                }
            }
        }
        let mut out = out.leray();
        out.symmetrize();
        Ok(out)
    }
}
