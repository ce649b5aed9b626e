use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time integrator. The diffusion multiplier is always handled exactly
/// (exponential schemes) or implicitly (Crank–Nicolson); advection and
/// forcing are explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    EtdRk2,
    EtdRk4,
    ImexCn,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::EtdRk2 | Scheme::ImexCn => 2,
            Scheme::EtdRk4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::EtdRk2 => "etd-rk2",
            Scheme::EtdRk4 => "etd-rk4",
            Scheme::ImexCn => "imex-cn",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "etd-rk2" | "etdrk2" => Ok(Scheme::EtdRk2),
            "etd-rk4" | "etdrk4" => Ok(Scheme::EtdRk4),
            "imex-cn" | "cn" => Ok(Scheme::ImexCn),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected etd-rk2, etd-rk4 or imex-cn)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `phi_k(z) = sum_{j>=0} z^j / (j+k)!`, so `phi_0 = e^z`,
/// `phi_1 = (e^z - 1)/z`, and `phi_{k+1} = (phi_k - 1/k!)/z`.
pub fn phi(k: u32, z: f64) -> f64 {
    if z.abs() < 1.0 {
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        let mut term = 1.0 / fact;
        let mut sum = term;
        for j in 1..30 {
            term *= z / (j + k) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut p = z.exp();
        let mut fact = 1.0;
        for i in 0..k {
            if i > 0 {
                fact *= i as f64;
            }
            p = (p - 1.0 / fact) / z;
        }
        p
    }
}

/// Per-mode scalar weights for one step of size `h` with linear rate `lam`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ModeWeights {
    pub e: f64,
    pub e2: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl ModeWeights {
    pub fn new(scheme: Scheme, lam: f64, h: f64) -> Self {
        let z = lam * h;
        match scheme {
            Scheme::EtdRk2 => Self {
                e: z.exp(),
                e2: 0.0,
                w1: h * phi(1, z),
                w2: h * phi(2, z),
                w3: 0.0,
                w4: 0.0,
            },
            Scheme::EtdRk4 => {
                let (p1, p2, p3) = (phi(1, z), phi(2, z), phi(3, z));
                Self {
                    e: z.exp(),
                    e2: (0.5 * z).exp(),
                    w1: 0.5 * h * phi(1, 0.5 * z),
                    w2: h * (p1 - 3.0 * p2 + 4.0 * p3),
                    w3: h * (p2 - 2.0 * p3),
                    w4: h * (-p2 + 4.0 * p3),
                }
            }
            Scheme::ImexCn => {
                let den = 1.0 - 0.5 * z;
                Self {
                    e: (1.0 + 0.5 * z) / den,
                    e2: 0.0,
                    w1: h / den,
                    w2: 0.5 * h / den,
                    w3: 0.0,
                    w4: 0.0,
                }
            }
        }
    }
}
