use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::forcing::ForcingSpec;
use super::nonlinear::Advection;
use super::scheme::{ModeWeights, Scheme};
use crate::diagnostics::series::{DiagnosticSeries, Sample, SeriesMeta};
use crate::error::{Error, Result};
use crate::spectral::{DomainSpec, SpectralField, Torus, Transformer};

/// Coefficients above this magnitude (or any NaN) abort the run.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
/// Relative divergence that triggers a fresh Leray projection.
pub const REPROJECT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub diag_stride: usize,
    /// Steps between checkpoint callbacks; 0 disables them.
    pub checkpoint_stride: usize,
    /// Safety factor `C` in `dt <= C min(dx) / max|u|`.
    pub cfl_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::EtdRk2,
            dealias: true,
            diag_stride: 10,
            checkpoint_stride: 0,
            cfl_safety: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.diag_stride == 0 {
            return Err(Error::InvalidArgument("diag_stride must be >= 1".into()));
        }
        if !(self.cfl_safety > 0.0) {
            return Err(Error::InvalidArgument("cfl_safety must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps; the horizon is rounded to a whole number of steps.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub u: SpectralField,
    pub t: f64,
    pub step: u64,
}

/// What was known when a run aborted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpReport {
    pub t: f64,
    pub step: u64,
    pub max_coeff: f64,
    pub last_good_t: f64,
    pub last_good_h1: f64,
    pub last_good_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureKind {
    BlowUp(BlowUpReport),
    Step(Error),
    Hook(String),
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureKind::BlowUp(r) => write!(
                f,
                "blow-up at t={:.6} (step {}): max |coeff| = {:.3e}; last finite H1 norm {:.6e} at t={:.6}",
                r.t, r.step, r.max_coeff, r.last_good_h1, r.last_good_t
            ),
            FailureKind::Step(e) => write!(f, "{e}"),
            FailureKind::Hook(m) => write!(f, "checkpoint hook failed: {m}"),
        }
    }
}

/// Aborted run: the cause plus everything recorded before it.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub kind: FailureKind,
    pub partial: DiagnosticSeries,
    pub last_state: RunState,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} samples kept)", self.kind, self.partial.len())
    }
}

impl std::error::Error for RunFailure {}

/// Galerkin integrator for `u_t = nu Lap u - L(u . grad u) + L f` on one
/// mode box.
#[derive(Debug, Clone)]
pub struct Solver {
    torus: Torus,
    nu: f64,
    cfg: SolverConfig,
    forcing: ForcingSpec,
    advection: Advection,
    weights: Vec<ModeWeights>,
    domain: Option<DomainSpec>,
}

impl Solver {
    pub fn new(torus: Torus, nu: f64, forcing: ForcingSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        if *forcing.profile().torus() != torus {
            return Err(Error::TorusMismatch);
        }
        let fpi2 = 4.0 * std::f64::consts::PI.powi(2);
        let weights = torus
            .iter_modes()
            .map(|(_, m)| ModeWeights::new(cfg.scheme, -nu * fpi2 * torus.k2(m), cfg.dt))
            .collect();
        Ok(Self {
            torus,
            nu,
            cfg,
            forcing,
            advection: Advection::new(torus, cfg.dealias),
            weights,
            domain: None,
        })
    }

    pub fn for_domain(domain: &DomainSpec, forcing: ForcingSpec, cfg: SolverConfig) -> Result<Self> {
        domain.validate()?;
        let mut s = Self::new(domain.torus(), domain.nu, forcing, cfg)?;
        s.domain = Some(*domain);
        Ok(s)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn advection(&self) -> &Advection {
        &self.advection
    }

    /// Largest step allowed by `dt <= C min(dx) / max|u|` on the product grid.
    pub fn cfl_estimate(&self, u: &SpectralField) -> Result<f64> {
        let tr = Transformer::new(self.advection.grid());
        let p = tr.to_physical_vec(u)?;
        let mut umax: f64 = 0.0;
        for i in 0..p[0].data.len() {
            let s = p[0].data[i].powi(2) + p[1].data[i].powi(2) + p[2].data[i].powi(2);
            umax = umax.max(s.sqrt());
        }
        let h = p[0].spacing();
        let dx = h[0].min(h[1]).min(h[2]);
        Ok(if umax == 0.0 { f64::INFINITY } else { self.cfg.cfl_safety * dx / umax })
    }

    /// `-L(u . grad u) + L f(t)`.
    pub fn rhs(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let n = self.advection.term(u)?;
        if self.forcing.is_off() {
            return Ok(n);
        }
        n.add(&self.forcing.at(t))
    }

    fn rhs_with(&self, u: &SpectralField, t: f64, force: &dyn Fn(f64) -> Option<SpectralField>) -> Result<SpectralField> {
        let n = self.advection.term(u)?;
        match force(t) {
            Some(f) => n.add(&f.leray()),
            None => Ok(n),
        }
    }

    fn combine(&self, fields: &[&SpectralField], f: impl Fn(&ModeWeights, &[Complex64]) -> Complex64) -> SpectralField {
        let mut out = SpectralField::zeros(self.torus);
        let raws: Vec<_> = fields.iter().map(|x| x.raw()).collect();
        let mut vals = vec![Complex64::new(0.0, 0.0); fields.len()];
        for (c, o) in out.raw_mut().into_iter().enumerate() {
            for (idx, w) in self.weights.iter().enumerate() {
                for (v, r) in vals.iter_mut().zip(&raws) {
                    *v = r[c][idx];
                }
                o[idx] = f(w, &vals);
            }
        }
        out
    }

    /// One step of size `dt`.
    pub fn step(&self, state: &RunState) -> Result<RunState> {
        if self.forcing.is_off() {
            self.step_with(state, &|_| None)
        } else {
            self.step_with(state, &|t| Some(self.forcing.at(t)))
        }
    }

    /// One step with an externally supplied forcing history in place of
    /// the stored one.
    pub fn step_with(&self, state: &RunState, force: &dyn Fn(f64) -> Option<SpectralField>) -> Result<RunState> {
        let h = self.cfg.dt;
        let t = state.t;
        let u = &state.u;
        let rhs = |v: &SpectralField, tt: f64| self.rhs_with(v, tt, force);
        let n0 = rhs(u, t)?;
        let mut next = match self.cfg.scheme {
            Scheme::EtdRk2 => {
                let a = self.combine(&[u, &n0], |w, v| v[0] * w.e + v[1] * w.w1);
                let na = rhs(&a, t + h)?;
                self.combine(&[&a, &na, &n0], |w, v| v[0] + (v[1] - v[2]) * w.w2)
            }
            Scheme::EtdRk4 => {
                let a = self.combine(&[u, &n0], |w, v| v[0] * w.e2 + v[1] * w.w1);
                let na = rhs(&a, t + 0.5 * h)?;
                let b = self.combine(&[u, &na], |w, v| v[0] * w.e2 + v[1] * w.w1);
                let nb = rhs(&b, t + 0.5 * h)?;
                let c = self.combine(&[&a, &nb, &n0], |w, v| v[0] * w.e2 + (v[1] * 2.0 - v[2]) * w.w1);
                let nc = rhs(&c, t + h)?;
                self.combine(&[u, &n0, &na, &nb, &nc], |w, v| {
                    v[0] * w.e + v[1] * w.w2 + (v[2] + v[3]) * (2.0 * w.w3) + v[4] * w.w4
                })
            }
            Scheme::ImexCn => {
                let p = self.combine(&[u, &n0], |w, v| v[0] * w.e + v[1] * w.w1);
                let np = rhs(&p, t + h)?;
                self.combine(&[u, &n0, &np], |w, v| v[0] * w.e + (v[1] + v[2]) * w.w2)
            }
        };
        next.symmetrize();
        if next.max_relative_divergence() > REPROJECT_THRESHOLD {
            next = next.leray();
        }
        Ok(RunState {
            u: next,
            t: (state.step + 1) as f64 * h,
            step: state.step + 1,
        })
    }

    fn meta(&self, u0: &SpectralField, label: &str) -> SeriesMeta {
        SeriesMeta {
            label: label.to_string(),
            torus: self.torus,
            domain: self.domain,
            nu: self.nu,
            u0_h1: u0.norm_h1(),
            f_bound: self.forcing.f_bound(),
            dt: self.cfg.dt,
            scheme: self.cfg.scheme.name().to_string(),
            dealias: self.cfg.dealias,
        }
    }

    pub fn sample(&self, state: &RunState) -> Sample {
        let f = (!self.forcing.is_off()).then(|| self.forcing.at(state.t));
        Sample::compute(&state.u, state.t, f.as_ref())
    }

    /// Integrates to `t_end`, sampling every `diag_stride` steps (and at the
    /// final step).
    pub fn run(&self, u0: &SpectralField) -> std::result::Result<DiagnosticSeries, RunFailure> {
        self.run_with(u0, "run", |_| Ok(())).map(|(s, _)| s)
    }

    /// As [`Solver::run`], calling `hook` every `checkpoint_stride` steps.
    /// Returns the series and the final state.
    pub fn run_with(
        &self,
        u0: &SpectralField,
        label: &str,
        mut hook: impl FnMut(&RunState) -> std::result::Result<(), String>,
    ) -> std::result::Result<(DiagnosticSeries, RunState), RunFailure> {
        let mut series = DiagnosticSeries::new(self.meta(u0, label));
        let mut state = RunState {
            u: u0.clone(),
            t: 0.0,
            step: 0,
        };
        let fail = |kind, series: DiagnosticSeries, state: RunState| RunFailure {
            kind,
            partial: series,
            last_state: state,
        };
        if *u0.torus() != self.torus {
            return Err(fail(FailureKind::Step(Error::TorusMismatch), series, state));
        }
        let div = u0.max_relative_divergence();
        if div > super::nonlinear::DIVERGENCE_TOLERANCE {
            return Err(fail(FailureKind::Step(Error::NotDivergenceFree(div)), series, state));
        }
        match self.cfl_estimate(u0) {
            Ok(bound) if self.cfg.dt > bound => {
                let e = Error::InvalidArgument(format!(
                    "dt = {} exceeds the CFL bound {:.3e}",
                    self.cfg.dt, bound
                ));
                return Err(fail(FailureKind::Step(e), series, state));
            }
            Err(e) => return Err(fail(FailureKind::Step(e), series, state)),
            _ => {}
        }
        series.push(self.sample(&state));
        let n = self.cfg.n_steps();
        for k in 1..=n {
            let next = match self.step(&state) {
                Ok(s) => s,
                Err(e) => return Err(fail(FailureKind::Step(e), series, state)),
            };
            let peak = next.u.max_abs_coeff();
            if !next.u.is_finite() || peak > BLOWUP_THRESHOLD {
                let last = series.last().copied().unwrap_or_default();
                let report = BlowUpReport {
                    t: next.t,
                    step: next.step,
                    max_coeff: peak,
                    last_good_t: state.t,
                    last_good_h1: state.u.norm_h1(),
                    last_good_theta: last.theta,
                };
                return Err(fail(FailureKind::BlowUp(report), series, state));
            }
            state = next;
            if k % self.cfg.diag_stride == 0 || k == n {
                series.push(self.sample(&state));
            }
            if self.cfg.checkpoint_stride > 0 && k % self.cfg.checkpoint_stride == 0 {
                if let Err(m) = hook(&state) {
                    return Err(fail(FailureKind::Hook(m), series, state));
                }
            }
        }
        Ok((series, state))
    }
}
