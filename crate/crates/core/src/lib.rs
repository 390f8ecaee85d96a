//! Facilitated Rydberg chains coupled to trap phonons.
//!
//! Builders for the position-space and single-domain Hamiltonians, the
//! momentum-sector blocks with their closed-form scattering coefficients,
//! the Schrieffer-Wolff effective model, and propagation with the density,
//! variance and asymmetry observables.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod momentum;
pub mod operator;
pub mod params;
pub mod phonon;
pub mod position;
pub mod propagate;
pub mod sw;

pub use error::{Error, Result};
pub use operator::{HermitianOperator, SparseHermitian, SparseMatrix, TripletBuilder};
pub use params::{kappa_from_microscopic, MicroscopicParams, ModelParams};

pub type C64 = num_complex::Complex64;
