//! Power-law fits of estimated constants against the thickness.

use serde::{Deserialize, Serialize};

use super::{ConstantEstimate, LabInequality};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub inequality: String,
    /// Least-squares slope of `log max_ratio` against `log eps`.
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for an exact fit or two points).
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub predicted: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn deviation(&self) -> Option<f64> {
        self.predicted.map(|p| (self.slope - p).abs())
    }
}

pub fn fit_eps_scaling(inequality: LabInequality, estimates: &[ConstantEstimate]) -> Result<ScalingFit> {
    if estimates.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 thickness values, got {}",
            estimates.len()
        )));
    }
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.lengths[2], e.max_ratio)).collect();
    if points.iter().any(|(e, r)| !(*e > 0.0 && *r > 0.0)) {
        return Err(Error::InvalidArgument("thickness and ratios must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("thickness values must differ".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope_stderr = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(ScalingFit {
        inequality: inequality.id(),
        slope,
        intercept,
        slope_stderr,
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        predicted: inequality.eps_power(),
        points,
    })
}
