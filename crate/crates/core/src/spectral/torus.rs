use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer mode index `(m, n, p)`.
pub type Mode = [i64; 3];

/// A periodic box `[0,l1] x [0,l2] x [0,l3]` together with the retained
/// Fourier index box `|m| <= n1, |n| <= n2, |p| <= n3`.
///
/// Planar (z-independent) scalar problems use `n3 = 0`; the third length
/// then only enters the volume factor, so a planar torus with `l3 = 1`
/// carries exactly the two-dimensional measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Torus {
    pub lengths: [f64; 3],
    pub modes: [usize; 3],
}

impl Torus {
    pub fn new(lengths: [f64; 3], modes: [usize; 3]) -> Result<Self> {
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "box lengths must be positive, got {lengths:?}"
            )));
        }
        Ok(Self { lengths, modes })
    }

    /// Two-dimensional torus `[0,l1] x [0,l2]` with unit thickness.
    pub fn planar(l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        Self::new([l1, l2, 1.0], [n1, n2, 0])
    }

    pub fn shape(&self) -> [usize; 3] {
        [
            2 * self.modes[0] + 1,
            2 * self.modes[1] + 1,
            2 * self.modes[2] + 1,
        ]
    }

    pub fn len(&self) -> usize {
        let s = self.shape();
        s[0] * s[1] * s[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn contains(&self, mode: Mode) -> bool {
        (0..3).all(|a| mode[a].unsigned_abs() as usize <= self.modes[a])
    }

    /// Dense storage index; the layout is row-major over `(m, n, p)` with
    /// each index running from `-n_i` to `n_i`.
    #[inline]
    pub fn index(&self, mode: Mode) -> usize {
        let s = self.shape();
        let i = (mode[0] + self.modes[0] as i64) as usize;
        let j = (mode[1] + self.modes[1] as i64) as usize;
        let k = (mode[2] + self.modes[2] as i64) as usize;
        (i * s[1] + j) * s[2] + k
    }

    #[inline]
    pub fn mode_at(&self, index: usize) -> Mode {
        let s = self.shape();
        let k = index % s[2];
        let j = (index / s[2]) % s[1];
        let i = index / (s[1] * s[2]);
        [
            i as i64 - self.modes[0] as i64,
            j as i64 - self.modes[1] as i64,
            k as i64 - self.modes[2] as i64,
        ]
    }

    /// Index of `-mode`. The box is symmetric, so this is the reversed index.
    #[inline]
    pub fn mirror(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }

    /// Physical frequency `(m/l1, n/l2, p/l3)`.
    #[inline]
    pub fn wavevector(&self, mode: Mode) -> [f64; 3] {
        [
            mode[0] as f64 / self.lengths[0],
            mode[1] as f64 / self.lengths[1],
            mode[2] as f64 / self.lengths[2],
        ]
    }

    #[inline]
    pub fn k2(&self, mode: Mode) -> f64 {
        let k = self.wavevector(mode);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Smallest positive `|k|` among modes of the box, `None` for the
    /// degenerate box that holds only the zero mode.
    pub fn min_wavenumber(&self) -> Option<f64> {
        (0..3)
            .filter(|&a| self.modes[a] > 0)
            .map(|a| 1.0 / self.lengths[a])
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }

    /// Smallest positive `|k|` among modes with `p != 0`.
    pub fn min_wavenumber_q(&self) -> Option<f64> {
        (self.modes[2] > 0).then(|| 1.0 / self.lengths[2])
    }

    pub fn with_modes(&self, modes: [usize; 3]) -> Self {
        Self {
            lengths: self.lengths,
            modes,
        }
    }

    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, Mode)> + '_ {
        (0..self.len()).map(move |i| (i, self.mode_at(i)))
    }

    /// Grid with `ceil(3(2n+1)/2)` points per axis. Products of three
    /// band-limited fields integrate exactly on it, and quadratic products
    /// project back onto the box without aliasing.
    pub fn padded_grid(&self) -> [usize; 3] {
        let s = self.shape();
        [
            (3 * s[0]).div_ceil(2),
            (3 * s[1]).div_ceil(2),
            (3 * s[2]).div_ceil(2),
        ]
    }

    /// Minimal grid, `2n+1` per axis.
    pub fn tight_grid(&self) -> [usize; 3] {
        self.shape()
    }

    /// Grid of `factor * (2n+1)` points per axis.
    pub fn oversampled_grid(&self, factor: usize) -> [usize; 3] {
        let s = self.shape();
        [factor * s[0], factor * s[1], factor * s[2]]
    }
}

/// Physical description of the thin domain and its Galerkin cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub l1: f64,
    pub l2: f64,
    pub eps: f64,
    pub nu: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl DomainSpec {
    pub fn new(l1: f64, l2: f64, eps: f64, nu: f64, modes: [usize; 3]) -> Result<Self> {
        let spec = Self {
            l1,
            l2,
            eps,
            nu,
            n1: modes[0],
            n2: modes[1],
            n3: modes[2],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        if !(self.l2 > 0.0 && self.l1 >= self.l2 && self.l1.is_finite()) {
            return bad(format!(
                "need l1 >= l2 > 0, got l1={}, l2={}",
                self.l1, self.l2
            ));
        }
        if !(self.eps > 0.0 && self.eps < self.l2 / 4.0) {
            return bad(format!(
                "need 0 < eps < l2/4, got eps={} with l2={}",
                self.eps, self.l2
            ));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("need nu > 0, got {}", self.nu));
        }
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return bad(format!(
                "mode counts must be >= 1, got ({}, {}, {})",
                self.n1, self.n2, self.n3
            ));
        }
        Ok(())
    }

    pub fn modes(&self) -> [usize; 3] {
        [self.n1, self.n2, self.n3]
    }

    pub fn torus(&self) -> Torus {
        Torus {
            lengths: [self.l1, self.l2, self.eps],
            modes: self.modes(),
        }
    }

    pub fn with_modes(&self, modes: [usize; 3]) -> Self {
        Self {
            n1: modes[0],
            n2: modes[1],
            n3: modes[2],
            ..*self
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }
}
