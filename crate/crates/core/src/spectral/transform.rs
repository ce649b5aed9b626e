use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{ScalarField, SpectralField};
use super::torus::Torus;
use crate::error::{Error, Result};

/// Real samples of a scalar function on a uniform grid over the torus.
///
/// Sample `(i, j, k)` sits at `(i l1/N1, j l2/N2, k l3/N3)`; storage is
/// row-major with `k` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: [usize; 3],
    pub lengths: [f64; 3],
    pub data: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: [usize; 3], lengths: [f64; 3]) -> Self {
        Self {
            grid,
            lengths,
            data: vec![0.0; grid[0] * grid[1] * grid[2]],
        }
    }

    pub fn from_fn(grid: [usize; 3], lengths: [f64; 3], f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut out = Self::zeros(grid, lengths);
        for i in 0..grid[0] {
            for j in 0..grid[1] {
                for k in 0..grid[2] {
                    let x = [
                        i as f64 * lengths[0] / grid[0] as f64,
                        j as f64 * lengths[1] / grid[1] as f64,
                        k as f64 * lengths[2] / grid[2] as f64,
                    ];
                    out.data[(i * grid[1] + j) * grid[2] + k] = f(x);
                }
            }
        }
        out
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.grid[1] + j) * self.grid[2] + k]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.lengths[0] / self.grid[0] as f64,
            self.lengths[1] / self.grid[1] as f64,
            self.lengths[2] / self.grid[2] as f64,
        ]
    }

    fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    /// Rectangle-rule integral; exact for trigonometric polynomials whose
    /// frequencies stay below the grid Nyquist bound.
    pub fn integral(&self) -> f64 {
        self.cell_volume() * self.data.iter().sum::<f64>()
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.cell_volume() * self.data.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn norm_l2(&self) -> f64 {
        (self.cell_volume() * self.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn norm_l4(&self) -> f64 {
        (self.cell_volume() * self.data.iter().map(|v| (v * v) * (v * v)).sum::<f64>()).powf(0.25)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid,
            lengths: self.lengths,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Integral of the dot product of two sampled vector fields.
pub fn dot_integral(a: &[PhysicalField; 3], b: &[PhysicalField; 3]) -> f64 {
    let h = a[0].cell_volume();
    let mut s = 0.0;
    for j in 0..3 {
        s += a[j].data.iter().zip(&b[j].data).map(|(x, y)| x * y).sum::<f64>();
    }
    h * s
}

/// FFT plans for one grid, reusable across fields on any torus whose mode
/// box fits the grid.
#[derive(Clone)]
pub struct Transformer {
    grid: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Transformer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transformer").field("grid", &self.grid).finish()
    }
}

impl Transformer {
    pub fn new(grid: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = grid.map(|n| planner.plan_fft_forward(n));
        let inv = grid.map(|n| planner.plan_fft_inverse(n));
        Self { grid, fwd, inv }
    }

    pub fn grid(&self) -> [usize; 3] {
        self.grid
    }

    fn check(&self, torus: &Torus) -> Result<()> {
        let need = torus.shape();
        if (0..3).any(|a| self.grid[a] < need[a]) {
            return Err(Error::GridTooSmall {
                grid: self.grid,
                modes: torus.modes,
            });
        }
        Ok(())
    }

    /// Runs the 1-D transform along `axis` for the lines selected by `keep`,
    /// where `keep` receives the two other grid indices in increasing axis
    /// order. Lines known to be zero are skipped.
    fn axis_pass(
        &self,
        buf: &mut [Complex64],
        axis: usize,
        forward: bool,
        keep: &dyn Fn(usize, usize) -> bool,
    ) {
        let [n0, n1, n2] = self.grid;
        let plan = if forward { &self.fwd[axis] } else { &self.inv[axis] };
        let len = self.grid[axis];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        match axis {
            2 => {
                for i in 0..n0 {
                    for j in 0..n1 {
                        if keep(i, j) {
                            let s = (i * n1 + j) * n2;
                            plan.process_with_scratch(&mut buf[s..s + n2], &mut scratch);
                        }
                    }
                }
            }
            1 => {
                let mut line = vec![Complex64::new(0.0, 0.0); len];
                for i in 0..n0 {
                    for k in 0..n2 {
                        if !keep(i, k) {
                            continue;
                        }
                        for j in 0..n1 {
                            line[j] = buf[(i * n1 + j) * n2 + k];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for j in 0..n1 {
                            buf[(i * n1 + j) * n2 + k] = line[j];
                        }
                    }
                }
            }
            _ => {
                let mut line = vec![Complex64::new(0.0, 0.0); len];
                for j in 0..n1 {
                    for k in 0..n2 {
                        if !keep(j, k) {
                            continue;
                        }
                        for i in 0..n0 {
                            line[i] = buf[(i * n1 + j) * n2 + k];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for i in 0..n0 {
                            buf[(i * n1 + j) * n2 + k] = line[i];
                        }
                    }
                }
            }
        }
    }

    fn wrap(idx: i64, n: usize) -> usize {
        idx.rem_euclid(n as i64) as usize
    }

    /// Inverse transform of a coefficient array to real samples.
    pub fn to_physical(&self, f: &ScalarField) -> Result<PhysicalField> {
        let t = *f.torus();
        self.check(&t)?;
        let [n0, n1, n2] = self.grid;
        let mut buf = vec![Complex64::new(0.0, 0.0); n0 * n1 * n2];
        for (idx, mode) in t.iter_modes() {
            let c = f.coeffs()[idx];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let i = Self::wrap(mode[0], n0);
            let j = Self::wrap(mode[1], n1);
            let k = Self::wrap(mode[2], n2);
            buf[(i * n1 + j) * n2 + k] = c;
        }
        let [m0, m1, _] = t.modes;
        let in_box = |idx: usize, n: usize, m: usize| idx <= m || idx + m >= n;
        self.axis_pass(&mut buf, 2, false, &|i, j| in_box(i, n0, m0) && in_box(j, n1, m1));
        self.axis_pass(&mut buf, 1, false, &|i, _| in_box(i, n0, m0));
        self.axis_pass(&mut buf, 0, false, &|_, _| true);
        Ok(PhysicalField {
            grid: self.grid,
            lengths: t.lengths,
            data: buf.into_iter().map(|z| z.re).collect(),
        })
    }

    pub fn to_physical_vec(&self, u: &SpectralField) -> Result<[PhysicalField; 3]> {
        Ok([
            self.to_physical(u.comp(0))?,
            self.to_physical(u.comp(1))?,
            self.to_physical(u.comp(2))?,
        ])
    }

    /// Forward transform onto the mode box of `torus`. The mean is dropped
    /// and modes outside the box are discarded.
    pub fn to_spectral(&self, phys: &PhysicalField, torus: Torus) -> Result<ScalarField> {
        self.check(&torus)?;
        if phys.grid != self.grid {
            return Err(Error::InvalidArgument(format!(
                "physical grid {:?} does not match transformer grid {:?}",
                phys.grid, self.grid
            )));
        }
        let [n0, n1, n2] = self.grid;
        let mut buf: Vec<Complex64> = phys.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let [m0, m1, _] = torus.modes;
        let in_box = |idx: usize, n: usize, m: usize| idx <= m || idx + m >= n;
        self.axis_pass(&mut buf, 0, true, &|_, _| true);
        self.axis_pass(&mut buf, 1, true, &|i, _| in_box(i, n0, m0));
        self.axis_pass(&mut buf, 2, true, &|i, j| in_box(i, n0, m0) && in_box(j, n1, m1));
        let norm = 1.0 / (n0 * n1 * n2) as f64;
        let mut out = ScalarField::zeros(torus);
        for (idx, mode) in torus.iter_modes() {
            let i = Self::wrap(mode[0], n0);
            let j = Self::wrap(mode[1], n1);
            let k = Self::wrap(mode[2], n2);
            out.coeffs_mut()[idx] = buf[(i * n1 + j) * n2 + k] * norm;
        }
        out.symmetrize();
        Ok(out)
    }

    pub fn to_spectral_vec(&self, phys: &[PhysicalField; 3], torus: Torus) -> Result<SpectralField> {
        SpectralField::from_components([
            self.to_spectral(&phys[0], torus)?,
            self.to_spectral(&phys[1], torus)?,
            self.to_spectral(&phys[2], torus)?,
        ])
    }
}

/// One-shot inverse transform.
pub fn to_physical(f: &ScalarField, grid: [usize; 3]) -> Result<PhysicalField> {
    Transformer::new(grid).to_physical(f)
}

/// One-shot forward transform.
pub fn to_spectral(phys: &PhysicalField, torus: Torus) -> Result<ScalarField> {
    Transformer::new(phys.grid).to_spectral(phys, torus)
}

/// `||f||_2` by grid quadrature on the padded grid.
pub fn quadrature_norm_l2(u: &SpectralField) -> Result<f64> {
    let tr = Transformer::new(u.torus().padded_grid());
    let p = tr.to_physical_vec(u)?;
    Ok(dot_integral(&p, &p).sqrt())
}
