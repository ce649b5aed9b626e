//! Norm functionals along trajectories and numerical checks of the
//! estimates built on them.

pub mod bounds;
pub mod fit;
pub mod lp;
pub mod miracle;
pub mod series;

pub use bounds::{evaluate_theorem_bounds, BoundInputs, BoundsReport};
pub use fit::{check_diff_inequalities, check_pooled, InequalityData, InequalityReport, Link};
pub use miracle::{check_enstrophy_miracle, s_term_counterexample, s_term_residual};
pub use series::{DiagnosticSeries, Regime, Sample, SeriesMeta};
