//! Fourier representation of mean-zero periodic fields on a box.

pub mod checkpoint;
pub mod field;
pub mod torus;
pub mod transform;

pub use field::{ScalarField, SpectralField};
pub use torus::{DomainSpec, Mode, Torus};
pub use transform::{PhysicalField, Transformer};
