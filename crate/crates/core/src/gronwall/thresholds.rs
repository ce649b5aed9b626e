//! Smallness thresholds from earlier thin-domain results, evaluated side by
//! side with the `M <= c^-1` condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    /// `delta_1 .. delta_8` of the Raugel–Sell conditions.
    pub rs2: [f64; 8],
    /// `delta` of the Moise–Temam–Ziane conditions.
    pub mtz: f64,
    /// `delta` of the sufficient form of Iftimie's condition.
    pub iftimie: f64,
    /// Generic constant `c` (and `c_delta`).
    pub c: f64,
}

impl ThresholdParams {
    pub fn uniform(delta: f64, c: f64) -> Self {
        Self {
            rs2: [delta; 8],
            mtz: delta,
            iftimie: delta,
            c,
        }
    }
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self::uniform(0.01, 1.0)
    }
}

/// Default `alpha(eps) = 1 / log(1/eps)`: any function tending to 0
/// qualifies, this one is a plotting convenience only.
pub fn default_alpha(eps: f64) -> f64 {
    1.0 / (1.0 / eps).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub eps: f64,
    pub rs2_pu: f64,
    pub rs2_qu: f64,
    pub rs2_pf: f64,
    pub rs2_qf: f64,
    pub mtz_pu: f64,
    pub mtz_qu: f64,
    pub mtz_pf: f64,
    pub mtz_qf: f64,
    pub iftimie_pu: f64,
    pub iftimie_qu: f64,
    /// `c^-1`, independent of `eps`.
    pub this_m: f64,
}

impl ThresholdRow {
    pub const CSV_HEADER: &'static str =
        "eps,rs2_pu,rs2_qu,rs2_pf,rs2_qf,mtz_pu,mtz_qu,mtz_pf,mtz_qf,iftimie_pu,iftimie_qu,this_m";

    pub fn csv_line(&self) -> String {
        [
            self.eps,
            self.rs2_pu,
            self.rs2_qu,
            self.rs2_pf,
            self.rs2_qf,
            self.mtz_pu,
            self.mtz_qu,
            self.mtz_pf,
            self.mtz_qf,
            self.iftimie_pu,
            self.iftimie_qu,
            self.this_m,
        ]
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn threshold_row(eps: f64, p: &ThresholdParams, alpha: &dyn Fn(f64) -> f64) -> Result<ThresholdRow> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(p.c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    let lg = (1.0 / eps).ln();
    let d = p.rs2;
    let a = alpha(eps);
    Ok(ThresholdRow {
        eps,
        rs2_pu: eps.powf(7.0 / 24.0 + d[0]) * lg.powf(d[1]),
        rs2_qu: eps.powf(-5.0 / 48.0 + d[2]) * lg.powf(d[3]),
        rs2_pf: eps.powf(7.0 / 24.0 + d[4]) * lg.powf(d[5]),
        rs2_qf: eps.powf(-0.5 + d[6]) * lg.powf(d[7]),
        mtz_pu: a * eps.powf(1.0 / 6.0 + p.mtz),
        mtz_qu: a * eps.powf(-1.0 / 6.0 + p.mtz),
        mtz_pf: a * eps.powf(1.0 / 6.0 + p.mtz),
        mtz_qf: a * eps.powf(-1.0 / 6.0 + p.mtz),
        iftimie_pu: eps.sqrt() * lg.sqrt() / p.c,
        iftimie_qu: eps.powf(-0.5 + p.iftimie) / p.c,
        this_m: 1.0 / p.c,
    })
}

pub fn literature_thresholds(eps: &[f64], p: &ThresholdParams, alpha: &dyn Fn(f64) -> f64) -> Result<Vec<ThresholdRow>> {
    eps.iter().map(|e| threshold_row(*e, p, alpha)).collect()
}

/// `||Qu||_{H^{1/2}} exp(c eps^-1 ||Pu||_2^2)` and whether it is at most
/// `c^-1`.
pub fn iftimie_condition(qu_h_half: f64, pu_l2: f64, eps: f64, c: f64) -> (f64, bool) {
    let v = qu_h_half * (c * pu_l2 * pu_l2 / eps).exp();
    (v, v <= 1.0 / c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factor_is_one_at_inverse_e() {
        let eps = (-1.0f64).exp();
        let r = threshold_row(eps, &ThresholdParams::uniform(0.0, 1.0), &default_alpha).unwrap();
        assert!((r.rs2_pu - eps.powf(7.0 / 24.0)).abs() < 1e-15);
        assert!((r.rs2_qf - eps.powf(-0.5)).abs() < 1e-14);
        assert!((r.iftimie_pu - eps.sqrt()).abs() < 1e-15);
        assert!((r.mtz_pu - eps.powf(1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn own_threshold_is_flat() {
        let rows = literature_thresholds(&[0.1, 0.01, 0.001], &ThresholdParams::default(), &default_alpha).unwrap();
        assert!(rows.iter().all(|r| r.this_m == 1.0));
        assert!(rows.windows(2).all(|w| w[1].rs2_pu < w[0].rs2_pu));
    }

    #[test]
    fn eps_out_of_range() {
        assert!(threshold_row(1.0, &ThresholdParams::default(), &default_alpha).is_err());
        assert!(threshold_row(0.0, &ThresholdParams::default(), &default_alpha).is_err());
    }

    #[test]
    fn iftimie_small_data() {
        assert!(iftimie_condition(0.1, 0.01, 0.01, 1.0).1);
        assert!(!iftimie_condition(0.1, 1.0, 0.01, 1.0).1);
    }
}
