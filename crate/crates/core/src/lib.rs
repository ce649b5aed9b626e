//! Pseudo-spectral Navier–Stokes on thin periodic boxes, with tools to
//! measure the norm functionals, differential inequalities and embedding
//! constants that govern global regularity there.

pub mod diagnostics;
pub mod error;
pub mod gronwall;
pub mod kv;
pub mod lab;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
