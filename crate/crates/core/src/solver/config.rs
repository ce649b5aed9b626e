//! Run description read from `key = value` text.

use serde::{Deserialize, Serialize};

use super::forcing::{ForcingSpec, Modulation};
use super::initial::{make_initial, InitialKind, InitialParams};
use super::run::{Solver, SolverConfig};
use super::scheme::Scheme;
use crate::error::{Error, Result};
use crate::kv::KvConfig;
use crate::spectral::{DomainSpec, SpectralField};

/// Keys understood by [`RunConfig::from_kv`].
pub const RUN_KEYS: &[&str] = &[
    "preset",
    "l1",
    "l2",
    "eps",
    "nu",
    "n1",
    "n2",
    "n3",
    "dt",
    "t_end",
    "scheme",
    "dealias",
    "diag_stride",
    "checkpoint_stride",
    "cfl_safety",
    "initial",
    "amplitude",
    "slope",
    "kmax",
    "q_fraction",
    "seed",
    "forcing",
    "forcing_amplitude",
    "forcing_kmax",
    "forcing_planar",
    "modulation",
    "forcing_b",
    "forcing_omega",
    "forcing_phase",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationKind {
    Constant,
    Sinusoidal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingConfig {
    /// `sup_t ||f(t)||_2` for constant modulation, the mean level `a` otherwise.
    pub amplitude: f64,
    pub kmax: usize,
    /// Restrict the template to `p = 0` modes.
    pub planar: bool,
    pub modulation: ModulationKind,
    pub b: f64,
    pub omega: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub solver: SolverConfig,
    pub initial: InitialKind,
    pub initial_params: InitialParams,
    pub forcing: Option<ForcingConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec {
                l1: 1.0,
                l2: 1.0,
                eps: 0.125,
                nu: 1.0,
                n1: 8,
                n2: 8,
                n3: 2,
            },
            solver: SolverConfig::default(),
            initial: InitialKind::RandomDivfree,
            initial_params: InitialParams::default(),
            forcing: None,
        }
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("expected a boolean, got '{s}'")),
    }
}

impl RunConfig {
    /// Reads a run from `kv`; missing keys keep their defaults.
    ///
    /// `preset = planar` selects z-independent data and planar forcing,
    /// `preset = full` selects data with a nonzero oscillating part.
    /// Explicit keys override the preset.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.check_known(RUN_KEYS)?;
        let mut c = RunConfig::default();
        let mut planar_forcing = false;
        if let Some(p) = kv.get::<String>("preset")? {
            match p.as_str() {
                "planar" => {
                    c.initial = InitialKind::ZIndependent;
                    planar_forcing = true;
                }
                "full" => c.initial = InitialKind::QPerturbed,
                other => return Err(kv.error_at("preset", format!("unknown preset '{other}' (planar, full)"))),
            }
        }
        let d = &mut c.domain;
        d.l1 = kv.get_or("l1", d.l1)?;
        d.l2 = kv.get_or("l2", d.l2)?;
        d.eps = kv.get_or("eps", d.eps)?;
        d.nu = kv.get_or("nu", d.nu)?;
        d.n1 = kv.get_or("n1", d.n1)?;
        d.n2 = kv.get_or("n2", d.n2)?;
        d.n3 = kv.get_or("n3", d.n3)?;
        if let Err(e) = d.validate() {
            return Err(kv.error_at(first_present(kv, &["l1", "l2", "eps", "nu", "n1", "n2", "n3"]), e.to_string()));
        }

        let s = &mut c.solver;
        s.dt = kv.get_or("dt", s.dt)?;
        s.t_end = kv.get_or("t_end", s.t_end)?;
        if let Some(v) = kv.get::<String>("scheme")? {
            s.scheme = v.parse::<Scheme>().map_err(|e| kv.error_at("scheme", e.to_string()))?;
        }
        if let Some(v) = kv.get::<String>("dealias")? {
            s.dealias = parse_bool(&v).map_err(|e| kv.error_at("dealias", e))?;
        }
        s.diag_stride = kv.get_or("diag_stride", s.diag_stride)?;
        s.checkpoint_stride = kv.get_or("checkpoint_stride", s.checkpoint_stride)?;
        s.cfl_safety = kv.get_or("cfl_safety", s.cfl_safety)?;
        if let Err(e) = s.validate() {
            return Err(kv.error_at(first_present(kv, &["dt", "t_end", "diag_stride", "cfl_safety"]), e.to_string()));
        }

        if let Some(v) = kv.get::<String>("initial")? {
            c.initial = v.parse::<InitialKind>().map_err(|e| kv.error_at("initial", e.to_string()))?;
        }
        let ip = &mut c.initial_params;
        ip.amplitude = kv.get_or("amplitude", ip.amplitude)?;
        ip.slope = kv.get_or("slope", ip.slope)?;
        ip.kmax = kv.get_or("kmax", ip.kmax)?;
        ip.q_fraction = kv.get_or("q_fraction", ip.q_fraction)?;
        ip.seed = kv.get_or("seed", ip.seed)?;
        if !(ip.amplitude >= 0.0 && ip.amplitude.is_finite()) {
            return Err(kv.error_at("amplitude", "amplitude must be >= 0"));
        }

        let forcing = kv.get::<String>("forcing")?.unwrap_or_else(|| "none".into());
        c.forcing = match forcing.as_str() {
            "none" => None,
            "random" => {
                let planar = match kv.get::<String>("forcing_planar")? {
                    Some(v) => parse_bool(&v).map_err(|e| kv.error_at("forcing_planar", e))?,
                    None => planar_forcing,
                };
                let modulation = match kv.get::<String>("modulation")?.as_deref() {
                    None | Some("constant") => ModulationKind::Constant,
                    Some("sinusoidal") => ModulationKind::Sinusoidal,
                    Some(other) => {
                        return Err(kv.error_at("modulation", format!("unknown modulation '{other}' (constant, sinusoidal)")))
                    }
                };
                let f = ForcingConfig {
                    amplitude: kv.get_or("forcing_amplitude", 0.1)?,
                    kmax: kv.get_or("forcing_kmax", 2)?,
                    planar,
                    modulation,
                    b: kv.get_or("forcing_b", 0.0)?,
                    omega: kv.get_or("forcing_omega", 1.0)?,
                    phase: kv.get_or("forcing_phase", 0.0)?,
                };
                if !(f.amplitude >= 0.0 && f.amplitude.is_finite()) {
                    return Err(kv.error_at("forcing_amplitude", "forcing_amplitude must be >= 0"));
                }
                if f.kmax == 0 {
                    return Err(kv.error_at("forcing_kmax", "forcing_kmax must be >= 1"));
                }
                Some(f)
            }
            other => return Err(kv.error_at("forcing", format!("unknown forcing '{other}' (none, random)"))),
        };
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KvConfig::parse(text)?)
    }

    /// Full key list with every value spelled out.
    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::default();
        let d = &self.domain;
        let s = &self.solver;
        let ip = &self.initial_params;
        let initial = serde_json::to_value(self.initial).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let pairs: Vec<(&str, String)> = vec![
            ("l1", d.l1.to_string()),
            ("l2", d.l2.to_string()),
            ("eps", d.eps.to_string()),
            ("nu", d.nu.to_string()),
            ("n1", d.n1.to_string()),
            ("n2", d.n2.to_string()),
            ("n3", d.n3.to_string()),
            ("dt", s.dt.to_string()),
            ("t_end", s.t_end.to_string()),
            ("scheme", s.scheme.name().to_string()),
            ("dealias", s.dealias.to_string()),
            ("diag_stride", s.diag_stride.to_string()),
            ("checkpoint_stride", s.checkpoint_stride.to_string()),
            ("cfl_safety", s.cfl_safety.to_string()),
            ("initial", initial),
            ("amplitude", ip.amplitude.to_string()),
            ("slope", ip.slope.to_string()),
            ("kmax", ip.kmax.to_string()),
            ("q_fraction", ip.q_fraction.to_string()),
            ("seed", ip.seed.to_string()),
        ];
        for (k, v) in pairs {
            kv.set(k, &v);
        }
        match &self.forcing {
            None => kv.set("forcing", "none"),
            Some(f) => {
                kv.set("forcing", "random");
                kv.set("forcing_amplitude", &f.amplitude.to_string());
                kv.set("forcing_kmax", &f.kmax.to_string());
                kv.set("forcing_planar", &f.planar.to_string());
                match f.modulation {
                    ModulationKind::Constant => kv.set("modulation", "constant"),
                    ModulationKind::Sinusoidal => {
                        kv.set("modulation", "sinusoidal");
                        kv.set("forcing_b", &f.b.to_string());
                        kv.set("forcing_omega", &f.omega.to_string());
                        kv.set("forcing_phase", &f.phase.to_string());
                    }
                }
            }
        }
        kv
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        make_initial(self.initial, self.domain.torus(), &self.initial_params)
    }

    /// Forcing template with unit `L2` norm, scaled by the modulation.
    pub fn forcing_spec(&self) -> Result<ForcingSpec> {
        let torus = self.domain.torus();
        let Some(f) = &self.forcing else {
            return Ok(ForcingSpec::none(torus));
        };
        let kind = if f.planar { InitialKind::ZIndependent } else { InitialKind::RandomDivfree };
        let params = InitialParams {
            amplitude: 1.0,
            slope: 0.0,
            kmax: f.kmax,
            q_fraction: 0.0,
            // independent of the initial-data draw
            seed: self.initial_params.seed.wrapping_add(0x9e37_79b9_7f4a_7c15),
        };
        let g = make_initial(kind, torus, &params)?;
        let n = g.norm_l2();
        if n == 0.0 {
            return Err(Error::InvalidArgument("forcing template is empty".into()));
        }
        let g = g.scale(1.0 / n);
        let modulation = match f.modulation {
            ModulationKind::Constant => Modulation::Constant { c: f.amplitude },
            ModulationKind::Sinusoidal => Modulation::Sinusoidal {
                a: f.amplitude,
                b: f.b,
                omega: f.omega,
                phase: f.phase,
            },
        };
        Ok(ForcingSpec::new(&g, modulation))
    }

    pub fn solver(&self) -> Result<Solver> {
        Solver::for_domain(&self.domain, self.forcing_spec()?, self.solver)
    }
}

fn first_present<'a>(kv: &KvConfig, keys: &[&'a str]) -> &'a str {
    keys.iter()
        .copied()
        .filter(|k| kv.entry(k).is_some())
        .max_by_key(|k| kv.entry(k).map_or(0, |e| e.line))
        .unwrap_or(keys[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_text() {
        let c = RunConfig::parse(
            "preset = planar\neps = 0.0625\nscheme = etd-rk4\nforcing = random\nforcing_amplitude = 0.05\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(c.initial, InitialKind::ZIndependent);
        assert!(c.forcing.unwrap().planar);
        assert_eq!(c.solver.scheme, Scheme::EtdRk4);
        let back = RunConfig::from_kv(&c.to_kv()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_point_at_lines() {
        let e = RunConfig::parse("nu = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        let e = RunConfig::parse("l2 = 1\neps = 0.5\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        let e = RunConfig::parse("scheme = euler\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }), "{e}");
    }

    #[test]
    fn forcing_has_requested_size() {
        let c = RunConfig::parse("n1 = 4\nn2 = 4\nn3 = 1\nforcing = random\nforcing_amplitude = 0.3\npreset = planar\n").unwrap();
        let f = c.forcing_spec().unwrap();
        assert!((f.f_bound() - 0.3).abs() < 1e-12);
        assert!(f.profile().proj_q().is_zero());
    }
}
