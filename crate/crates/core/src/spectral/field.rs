use num_complex::Complex64;

use super::torus::{Mode, Torus};
use crate::error::{Error, Result};

/// Fourier coefficients of a real, mean-zero scalar function on a torus.
///
/// `f(x) = sum_k c_k exp(2 pi i k.x)` with `k = (m/l1, n/l2, p/l3)`.
/// Coefficients satisfy `c_{-k} = conj(c_k)` and `c_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    torus: Torus,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(torus: Torus) -> Self {
        Self {
            torus,
            coeffs: vec![Complex64::new(0.0, 0.0); torus.len()],
        }
    }

    /// Builds a field from arbitrary coefficients, then symmetrizes and pins
    /// the zero mode.
    pub fn from_coeffs(torus: Torus, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != torus.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                torus.len(),
                coeffs.len()
            )));
        }
        let mut f = Self { torus, coeffs };
        f.symmetrize();
        Ok(f)
    }

    pub fn from_fn(torus: Torus, mut g: impl FnMut(Mode) -> Complex64) -> Self {
        let coeffs = torus.iter_modes().map(|(_, mode)| g(mode)).collect();
        let mut f = Self { torus, coeffs };
        f.symmetrize();
        f
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Raw mutable access; callers must keep the Hermitian invariant (or
    /// call [`ScalarField::symmetrize`] afterwards).
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, mode: Mode) -> Complex64 {
        if self.torus.contains(mode) {
            self.coeffs[self.torus.index(mode)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Sets `c_k` and `c_{-k} = conj(c_k)`.
    pub fn set_pair(&mut self, mode: Mode, value: Complex64) {
        let i = self.torus.index(mode);
        let j = self.torus.mirror(i);
        if i == j {
            return;
        }
        self.coeffs[i] = value;
        self.coeffs[j] = value.conj();
    }

    /// `c_k <- (c_k + conj(c_{-k})) / 2`, zero mode set to zero.
    pub fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        self.coeffs[n / 2] = Complex64::new(0.0, 0.0);
    }

    /// Largest `|c_k - conj(c_{-k})|`, plus `|c_0|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.coeffs.len();
        let mut worst = self.coeffs[n / 2].norm();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
        }
        worst
    }

    /// Multiplies every coefficient by a real, even function of the mode.
    pub fn map_multiplier(&self, mut mult: impl FnMut(Mode) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * mult(self.torus.mode_at(i)))
            .collect();
        Self {
            torus: self.torus,
            coeffs,
        }
    }

    /// `D^alpha`: multiplier `(2 pi |k|)^alpha`.
    pub fn deriv(&self, alpha: f64) -> Self {
        if alpha == 0.0 {
            return self.clone();
        }
        let t = self.torus;
        self.map_multiplier(|mode| {
            let k2 = t.k2(mode);
            if k2 == 0.0 {
                0.0
            } else {
                (4.0 * std::f64::consts::PI.powi(2) * k2).powf(0.5 * alpha)
            }
        })
    }

    /// Partial derivative along `axis`: multiplier `2 pi i k_axis`.
    pub fn partial(&self, axis: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.torus.wavevector(self.torus.mode_at(i))[axis];
                c * Complex64::new(0.0, 2.0 * std::f64::consts::PI * k)
            })
            .collect();
        Self {
            torus: self.torus,
            coeffs,
        }
    }

    /// `sum |c_k|^2 (2 pi |k|)^{2 alpha}` without the volume factor.
    pub fn weighted_energy(&self, alpha: f64) -> f64 {
        let t = self.torus;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = c.norm_sqr();
                if alpha == 0.0 || e == 0.0 {
                    e
                } else {
                    e * (4.0 * std::f64::consts::PI.powi(2) * t.k2(t.mode_at(i))).powf(alpha)
                }
            })
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.torus.volume() * self.weighted_energy(0.0)).sqrt()
    }

    /// `||D^alpha f||_2` by Parseval.
    pub fn norm_ds(&self, alpha: f64) -> f64 {
        (self.torus.volume() * self.weighted_energy(alpha)).sqrt()
    }

    /// Keeps modes with `keep(mode)`, zeroes the rest.
    pub fn filter(&self, mut keep: impl FnMut(Mode) -> bool) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if !keep(self.torus.mode_at(i)) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Vertical average: keeps `p = 0`.
    pub fn proj_p(&self) -> Self {
        self.filter(|m| m[2] == 0)
    }

    /// Complement of the vertical average: keeps `p != 0`.
    pub fn proj_q(&self) -> Self {
        self.filter(|m| m[2] != 0)
    }

    /// Galerkin cutoff onto `|m_i| <= cutoff_i`; storage shape unchanged.
    pub fn truncate(&self, cutoff: [usize; 3]) -> Self {
        self.filter(|m| (0..3).all(|a| m[a].unsigned_abs() as usize <= cutoff[a]))
    }

    /// Re-stores the field on a different mode box of the same geometry,
    /// dropping modes that do not fit and zero-filling new ones.
    pub fn resize(&self, modes: [usize; 3]) -> Self {
        let torus = self.torus.with_modes(modes);
        let mut out = Self::zeros(torus);
        for (i, mode) in torus.iter_modes() {
            out.coeffs[i] = self.get(mode);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            torus: self.torus,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if self.torus != other.torus {
            return Err(Error::TorusMismatch);
        }
        Ok(Self {
            torus: self.torus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
        })
    }

    /// `<f, g>_{L2}` (real, since both fields are real).
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.torus != other.torus {
            return Err(Error::TorusMismatch);
        }
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.torus.volume() * s)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }
}

/// Real, mean-zero vector field on a torus: three scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    comps: [ScalarField; 3],
}

impl SpectralField {
    pub fn zeros(torus: Torus) -> Self {
        Self {
            comps: [
                ScalarField::zeros(torus),
                ScalarField::zeros(torus),
                ScalarField::zeros(torus),
            ],
        }
    }

    pub fn from_components(comps: [ScalarField; 3]) -> Result<Self> {
        let t = *comps[0].torus();
        if comps.iter().any(|c| *c.torus() != t) {
            return Err(Error::TorusMismatch);
        }
        Ok(Self { comps })
    }

    pub fn from_fn(torus: Torus, mut g: impl FnMut(Mode) -> [Complex64; 3]) -> Self {
        let values: Vec<[Complex64; 3]> = torus.iter_modes().map(|(_, m)| g(m)).collect();
        let comps = [0, 1, 2].map(|j| {
            let mut f = ScalarField {
                torus,
                coeffs: values.iter().map(|v| v[j]).collect(),
            };
            f.symmetrize();
            f
        });
        Self { comps }
    }

    pub fn torus(&self) -> &Torus {
        self.comps[0].torus()
    }

    pub fn comp(&self, j: usize) -> &ScalarField {
        &self.comps[j]
    }

    pub fn comp_mut(&mut self, j: usize) -> &mut ScalarField {
        &mut self.comps[j]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.comps
    }

    pub fn get(&self, mode: Mode) -> [Complex64; 3] {
        [
            self.comps[0].get(mode),
            self.comps[1].get(mode),
            self.comps[2].get(mode),
        ]
    }

    pub fn set_pair(&mut self, mode: Mode, value: [Complex64; 3]) {
        for (j, v) in value.into_iter().enumerate() {
            self.comps[j].set_pair(mode, v);
        }
    }

    pub fn symmetrize(&mut self) {
        self.comps.iter_mut().for_each(ScalarField::symmetrize);
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(ScalarField::hermitian_defect)
            .fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>) -> Result<Self> {
        Ok(Self {
            comps: [
                f(&self.comps[0], &other.comps[0])?,
                f(&self.comps[1], &other.comps[1])?,
                f(&self.comps[2], &other.comps[2])?,
            ],
        })
    }

    pub fn deriv(&self, alpha: f64) -> Self {
        self.map(|c| c.deriv(alpha))
    }

    pub fn partial(&self, axis: usize) -> Self {
        self.map(|c| c.partial(axis))
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_ds(0.0)
    }

    pub fn norm_ds(&self, alpha: f64) -> f64 {
        let e: f64 = self.comps.iter().map(|c| c.weighted_energy(alpha)).sum();
        (self.torus().volume() * e).sqrt()
    }

    /// `sqrt(||u||^2 + ||Du||^2)`.
    pub fn norm_h1(&self) -> f64 {
        (self.norm_ds(0.0).powi(2) + self.norm_ds(1.0).powi(2)).sqrt()
    }

    /// `sqrt(||u||^2 + ||Du||^2 + ||D^2 u||^2)`.
    pub fn norm_h2(&self) -> f64 {
        (self.norm_ds(0.0).powi(2) + self.norm_ds(1.0).powi(2) + self.norm_ds(2.0).powi(2)).sqrt()
    }

    pub fn proj_p(&self) -> Self {
        self.map(ScalarField::proj_p)
    }

    pub fn proj_q(&self) -> Self {
        self.map(ScalarField::proj_q)
    }

    /// `(u1, u2, 0)`.
    pub fn proj_r(&self) -> Self {
        let mut out = self.clone();
        out.comps[2] = ScalarField::zeros(*self.torus());
        out
    }

    /// `(0, 0, u3)`.
    pub fn proj_s(&self) -> Self {
        let mut out = self.clone();
        out.comps[0] = ScalarField::zeros(*self.torus());
        out.comps[1] = ScalarField::zeros(*self.torus());
        out
    }

    pub fn truncate(&self, cutoff: [usize; 3]) -> Self {
        self.map(|c| c.truncate(cutoff))
    }

    pub fn resize(&self, modes: [usize; 3]) -> Self {
        self.map(|c| c.resize(modes))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.axpy(s, b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        let mut s = 0.0;
        for j in 0..3 {
            s += self.comps[j].inner(&other.comps[j])?;
        }
        Ok(s)
    }

    /// Leray projection: removes the component of each mode parallel to `k`.
    pub fn leray(&self) -> Self {
        let t = *self.torus();
        let mut out = self.clone();
        for (i, mode) in t.iter_modes() {
            let k = t.wavevector(mode);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let c = [
                self.comps[0].coeffs[i],
                self.comps[1].coeffs[i],
                self.comps[2].coeffs[i],
            ];
            let kdot = (c[0] * k[0] + c[1] * k[1] + c[2] * k[2]) / k2;
            for j in 0..3 {
                out.comps[j].coeffs[i] = c[j] - kdot * k[j];
            }
        }
        out
    }

    /// `max |k.u_k| / (|k| |u_k|)` over modes whose amplitude exceeds
    /// `1e-14` of the largest one (roundoff-level modes carry no direction).
    pub fn max_relative_divergence(&self) -> f64 {
        let t = *self.torus();
        let amp = |i: usize| {
            (self.comps[0].coeffs[i].norm_sqr()
                + self.comps[1].coeffs[i].norm_sqr()
                + self.comps[2].coeffs[i].norm_sqr())
            .sqrt()
        };
        let peak = (0..t.len()).map(amp).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let floor = 1e-14 * peak;
        let mut worst: f64 = 0.0;
        for (i, mode) in t.iter_modes() {
            let a = amp(i);
            if a <= floor {
                continue;
            }
            let k = t.wavevector(mode);
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            if kn == 0.0 {
                continue;
            }
            let div = self.comps[0].coeffs[i] * k[0]
                + self.comps[1].coeffs[i] * k[1]
                + self.comps[2].coeffs[i] * k[2];
            worst = worst.max(div.norm() / (kn * a));
        }
        worst
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.iter().map(ScalarField::max_abs_coeff).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(ScalarField::is_zero)
    }

    /// Multiplies mode `k` of every component by `exp(-2 pi i k.shift)`,
    /// i.e. returns `x -> u(x - shift)`.
    pub fn translate(&self, shift: [f64; 3]) -> Self {
        let t = *self.torus();
        let phases: Vec<Complex64> = t
            .iter_modes()
            .map(|(_, mode)| {
                let k = t.wavevector(mode);
                let arg = -2.0 * std::f64::consts::PI * (k[0] * shift[0] + k[1] * shift[1] + k[2] * shift[2]);
                Complex64::from_polar(1.0, arg)
            })
            .collect();
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (z, ph) in c.coeffs.iter_mut().zip(&phases) {
                *z *= ph;
            }
        }
        out
    }

    /// Raw per-component coefficient slices, for tight loops.
    pub(crate) fn raw_mut(&mut self) -> [&mut Vec<Complex64>; 3] {
        let [a, b, c] = &mut self.comps;
        [&mut a.coeffs, &mut b.coeffs, &mut c.coeffs]
    }

    pub(crate) fn raw(&self) -> [&Vec<Complex64>; 3] {
        [&self.comps[0].coeffs, &self.comps[1].coeffs, &self.comps[2].coeffs]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn torus() -> Torus {
        Torus::new([1.0, 0.5, 0.1], [3, 2, 2]).unwrap()
    }

    #[test]
    fn from_fn_is_hermitian_and_mean_zero() {
        let f = SpectralField::from_fn(torus(), |m| {
            [Complex64::new(m[0] as f64, m[1] as f64 + 1.0); 3]
        });
        assert!(f.hermitian_defect() < 1e-15);
        assert_eq!(f.get([0, 0, 0]), [Complex64::new(0.0, 0.0); 3]);
    }

    #[test]
    fn deriv_single_mode_is_two_pi() {
        let t = Torus::new([1.0, 1.0, 0.1], [2, 2, 1]).unwrap();
        let mut f = ScalarField::zeros(t);
        f.set_pair([1, 0, 0], Complex64::new(0.5, 0.0));
        let d = f.deriv(1.0);
        assert!((d.get([1, 0, 0]).re - PI).abs() < 1e-14);
        let dd = f.deriv(2.0);
        let d1d1 = d.deriv(1.0);
        for (a, b) in dd.coeffs().iter().zip(d1d1.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(f.deriv(0.0), f);
    }

    #[test]
    fn parseval_single_pair() {
        let t = Torus::new([2.0, 1.0, 0.2], [2, 2, 1]).unwrap();
        let mut f = ScalarField::zeros(t);
        f.set_pair([0, 1, 0], Complex64::new(0.0, 0.5));
        let expect = (2.0 * 1.0 * 0.2 * 0.5_f64).sqrt();
        assert!((f.norm_l2() - expect).abs() < 1e-15);
        assert_eq!(ScalarField::zeros(t).norm_l2(), 0.0);
    }

    #[test]
    fn leray_kills_gradients_and_fixes_solenoidal() {
        let t = torus();
        let grad = SpectralField::from_fn(t, |m| {
            let k = t.wavevector(m);
            let phi = Complex64::new(1.0 / (1.0 + m[0].abs() as f64), 0.3 * m[1] as f64);
            [phi * k[0], phi * k[1], phi * k[2]].map(|z| z * Complex64::new(0.0, 1.0))
        });
        assert!(grad.leray().max_abs_coeff() < 1e-14 * grad.max_abs_coeff());

        // u = (0, g(x), 0) is divergence free.
        let sol = SpectralField::from_fn(t, |m| {
            if m[1] == 0 && m[2] == 0 {
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, -0.5), Complex64::new(0.0, 0.0)]
            } else {
                [Complex64::new(0.0, 0.0); 3]
            }
        });
        assert_eq!(sol.leray(), sol);
    }

    #[test]
    fn translate_shifts_a_cosine() {
        let t = Torus::new([1.0, 1.0, 0.1], [2, 1, 1]).unwrap();
        let mut f = SpectralField::zeros(t);
        f.set_pair([1, 0, 0], [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)]);
        // cos(2 pi (x - 1/4)) = sin(2 pi x): coefficient at m=1 becomes -i/2
        let g = f.translate([0.25, 0.0, 0.0]);
        assert!((g.get([1, 0, 0])[1] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn resize_and_truncate() {
        let t = torus();
        let f = SpectralField::from_fn(t, |_| [Complex64::new(1.0, 0.0); 3]);
        let small = f.resize([1, 1, 1]);
        assert_eq!(small.torus().modes, [1, 1, 1]);
        let back = small.resize([3, 2, 2]);
        assert_eq!(back, f.truncate([1, 1, 1]));
        assert!(f.truncate([0, 0, 0]).is_zero());
    }
}
