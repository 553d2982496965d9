//! Bound states of two spinless particles in a static potential, with the
//! relativistic kinetic energy expanded to order (v/c)².
//!
//! * [`slet`]: shifted-l expansion of the reduced radial equation.
//! * [`perturbation`]: anharmonic-oscillator series used by the expansion.
//! * [`oracle`]: finite-difference solution of the same radial equation.
//! * [`potentials`]: power-law potential models and their derivatives.

pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod pair;
pub mod perturbation;
pub mod potentials;
pub mod roots;
pub mod slet;

pub use error::{Error, ErrorKind, Result, Stage};
pub use pair::ParticlePair;
pub use potentials::{PotentialModel, PowerTerm};
pub use slet::{QuantumNumbers, SletSolution, SolverSettings};
