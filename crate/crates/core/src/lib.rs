//! Presymplectic constraint analysis, spectral slice calculus and Poincaré
//! momentum maps for the free Klein-Gordon and Maxwell fields.

pub mod em;
pub mod error;
pub mod field;
pub mod kg;
pub mod presym;

pub use error::{Error, Result};
pub use field::{DiscreteFunctional, Grid3, ScalarField, VectorField3};
pub use kg::{KgParams, KgState, PoincareGenerator, TangentPair};
pub use presym::{AffineSubspace, AntisymmetricForm, ExtendedSymplecticSpace, PcaResult, QuadraticHamiltonian};
