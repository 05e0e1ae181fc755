//! Grids, fields, discrete calculus, potentials and snapshot I/O on the
//! periodic torus `[-L, L)^dim`.

mod field;
mod grid;
pub mod ops;
pub mod potential;
pub mod snapshot;
pub mod spectral;

pub use field::{ScalarField, VectorField};
pub use grid::PeriodicGrid;
pub use ops::{convolve, divergence, gradient, integrate, KernelOperator};
pub use potential::{PotentialSpec, Potentials};
pub use spectral::SpectralPlan;
