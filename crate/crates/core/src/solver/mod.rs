//! Time integration of the Galerkin-truncated Navier–Stokes system.

pub mod config;
pub mod drift;
pub mod forcing;
pub mod initial;
pub mod nonlinear;
pub mod run;
pub mod scheme;

pub use drift::{mean_drift_reduce, Drift, RawField, RawForcing, Reduction};
pub use forcing::{ForcingSpec, Modulation};
pub use initial::{make_initial, InitialKind, InitialParams};
pub use nonlinear::Advection;
pub use config::{ForcingConfig, ModulationKind, RunConfig, RUN_KEYS};
pub use run::{BlowUpReport, FailureKind, RunFailure, RunState, Solver, SolverConfig};
pub use scheme::Scheme;
