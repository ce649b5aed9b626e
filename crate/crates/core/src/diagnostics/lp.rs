//! Small dense linear programs of the form
//! `min c.x  subject to  A x >= b, x >= 0` with `c >= 0`.
//!
//! Solved through the dual `max b.y  subject to  A^T y <= c, y >= 0`, for
//! which `y = 0` is feasible, so no phase one is needed. The tableau has
//! one row per primal variable and one column per primal constraint, which
//! suits fitting a handful of constants to many samples. Bland's rule
//! guards against cycling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// `rows[i] . x >= b[i]`, `x >= 0`, minimise `c . x`.
pub fn minimize(c: &[f64], rows: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = rows.len();
    if b.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("LP dimension mismatch".into()));
    }
    if c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument("LP objective must be nonnegative".into()));
    }
    if rows.iter().flatten().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("LP data must be finite".into()));
    }
    // Dual tableau: n rows (dual constraints), columns y_0..y_{m-1}, s_0..s_{n-1}, rhs.
    let width = m + n + 1;
    let mut tab = vec![0.0; (n + 1) * width];
    for j in 0..n {
        let row = &mut tab[j * width..(j + 1) * width];
        for i in 0..m {
            row[i] = rows[i][j];
        }
        row[m + j] = 1.0;
        row[width - 1] = c[j];
    }
    // Objective row holds reduced costs for maximising b.y: z_k - b_k.
    {
        let obj = &mut tab[n * width..];
        for i in 0..m {
            obj[i] = -b[i];
        }
    }
    let mut basis: Vec<usize> = (m..m + n).collect();
    let scale = b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-12 * scale;
    let max_iter = 50 * (m + n) + 1000;
    let mut iterations = 0;
    loop {
        // entering column: smallest index with negative reduced cost (Bland)
        let obj = &tab[n * width..(n + 1) * width];
        let Some(enter) = (0..m + n).find(|&k| obj[k] < -tol) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n {
            let a = tab[r * width + enter];
            if a > 1e-14 {
                let ratio = tab[r * width + width - 1] / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let better = ratio < lratio - 1e-15 * lratio.abs().max(1.0)
                            || ((ratio - lratio).abs() <= 1e-15 * lratio.abs().max(1.0) && basis[r] < basis[lr]);
                        if better {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((pr, _)) = leave else {
            // dual unbounded, so the primal constraints cannot all hold
            return Err(Error::InvalidArgument("LP infeasible".into()));
        };
        pivot(&mut tab, width, n + 1, pr, enter);
        basis[pr] = enter;
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::InvalidArgument("LP iteration limit reached".into()));
        }
    }
    let obj = &tab[n * width..(n + 1) * width];
    let x: Vec<f64> = (0..n).map(|j| obj[m + j].max(0.0)).collect();
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, objective, iterations })
}

fn pivot(tab: &mut [f64], width: usize, nrows: usize, pr: usize, pc: usize) {
    let p = tab[pr * width + pc];
    for k in 0..width {
        tab[pr * width + k] /= p;
    }
    let prow: Vec<f64> = tab[pr * width..(pr + 1) * width].to_vec();
    for r in 0..nrows {
        if r == pr {
            continue;
        }
        let f = tab[r * width + pc];
        if f != 0.0 {
            let row = &mut tab[r * width..(r + 1) * width];
            for k in 0..width {
                row[k] -= f * prow[k];
            }
            row[pc] = 0.0;
        }
    }
}

/// Largest violation of `A x >= b` (0 when feasible).
pub fn max_violation(rows: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    rows.iter()
        .zip(b)
        .map(|(r, bi)| bi - r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
        .fold(0.0, f64::max)
}
