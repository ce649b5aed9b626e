//! Random trial fields for constant estimation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::spectral::{Mode, ScalarField, Torus};

/// Which modes a trial may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    All,
    /// `p != 0` only (range of `Q`).
    Oscillating,
}

impl Support {
    pub fn allows(self, mode: Mode) -> bool {
        match self {
            Support::All => mode != [0, 0, 0],
            Support::Oscillating => mode[2] != 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    LowestMode,
    White,
    PowerLawOne,
    PowerLawTwo,
    Block,
    CoherentPower,
    CoherentBump,
}

impl TrialKind {
    const CYCLE: [TrialKind; 6] = [
        TrialKind::CoherentPower,
        TrialKind::CoherentBump,
        TrialKind::White,
        TrialKind::PowerLawOne,
        TrialKind::PowerLawTwo,
        TrialKind::Block,
    ];

    /// Trial 0 is the lowest admissible mode; the rest cycle through the
    /// random ensembles.
    pub fn for_trial(i: usize) -> Self {
        if i == 0 {
            TrialKind::LowestMode
        } else {
            Self::CYCLE[(i - 1) % Self::CYCLE.len()]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrialKind::LowestMode => "lowest-mode",
            TrialKind::White => "white",
            TrialKind::PowerLawOne => "power-law-1",
            TrialKind::PowerLawTwo => "power-law-2",
            TrialKind::Block => "block",
            TrialKind::CoherentPower => "coherent-power",
            TrialKind::CoherentBump => "coherent-bump",
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn kmag(t: &Torus, m: Mode) -> f64 {
    t.k2(m).sqrt()
}

/// Range of `|k|` over admissible modes.
fn k_range(t: &Torus, support: Support) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (_, m) in t.iter_modes() {
        if support.allows(m) {
            let k = kmag(t, m);
            lo = lo.min(k);
            hi = hi.max(k);
        }
    }
    (hi > 0.0).then_some((lo, hi))
}

fn lowest_mode(t: &Torus, support: Support) -> Option<Mode> {
    t.iter_modes()
        .filter(|(i, m)| support.allows(*m) && *i > t.zero_index())
        .min_by(|a, b| kmag(t, a.1).total_cmp(&kmag(t, b.1)))
        .map(|(_, m)| m)
}

/// Deterministic trial `index` of the ensemble seeded by `seed`.
pub fn trial_field(t: Torus, support: Support, seed: u64, index: usize) -> (TrialKind, ScalarField) {
    let kind = TrialKind::for_trial(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let Some((klo, khi)) = k_range(&t, support) else {
        return (kind, ScalarField::zeros(t));
    };
    let field = match kind {
        TrialKind::LowestMode => {
            let mut f = ScalarField::zeros(t);
            if let Some(m) = lowest_mode(&t, support) {
                f.set_pair(m, Complex64::new(0.5, 0.0));
            }
            f
        }
        TrialKind::White => ScalarField::from_fn(t, |m| if support.allows(m) { normal(&mut rng) } else { Complex64::new(0.0, 0.0) }),
        TrialKind::PowerLawOne | TrialKind::PowerLawTwo => {
            let s = if kind == TrialKind::PowerLawOne { -1.0 } else { -2.0 };
            ScalarField::from_fn(t, |m| {
                if support.allows(m) {
                    normal(&mut rng) * (kmag(&t, m) / klo).powf(s)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        TrialKind::Block => {
            let top = (khi / klo).log2().floor().max(0.0) as i32;
            let j = rng.random_range(0..=top);
            let (a, b) = (klo * 2f64.powi(j), klo * 2f64.powi(j + 1));
            ScalarField::from_fn(t, |m| {
                let k = kmag(&t, m);
                if support.allows(m) && k >= a * (1.0 - 1e-12) && k < b {
                    normal(&mut rng)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        TrialKind::CoherentPower => {
            let s: f64 = rng.random_range(0.5..4.0);
            ScalarField::from_fn(t, |m| {
                if support.allows(m) {
                    Complex64::new((kmag(&t, m) / klo).powf(-s), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        TrialKind::CoherentBump => {
            // width log-uniform between the finest and the coarsest scale
            let w = if khi > klo {
                rng.random_range((1.0 / khi).ln()..(1.0 / klo).ln()).exp()
            } else {
                1.0 / klo
            };
            ScalarField::from_fn(t, |m| {
                if support.allows(m) {
                    let x = std::f64::consts::PI * w * kmag(&t, m);
                    Complex64::new((-x * x).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
    };
    (kind, field)
}
