//! The slice Σ as a periodic spectral grid.

pub mod functional;
mod grid;
pub mod random;
pub mod snapshot;
pub mod spectral;

pub use functional::{functional_derivative, functional_eval, DiscreteFunctional, Gradient, Op, Slot, Term, Weight};
pub use grid::{Grid3, ScalarField, VectorField3};
pub use spectral::{
    curl, divergence, gradient, helmholtz_decompose, integrate, inverse_laplacian, laplacian, spectral_derivative,
    transverse_part,
};
