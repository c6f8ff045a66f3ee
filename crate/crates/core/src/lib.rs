//! Minimum joint time-delay / sum-frequency uncertainty of multimode light.
//!
//! Fixed photon-number states are handled exactly in a truncated
//! Hermite-Gauss mode basis ([`minimizer`]); Gaussian families, photon-number
//! mixtures and squeezed vacuum have closed-form or moment-based treatments.

pub mod eigensolver;
pub mod error;
pub mod extrapolation;
pub mod fock_enr;
pub mod gaussian_family;
pub mod gaussian_field;
pub mod hg_modes;
pub mod minimizer;
pub mod number_mixtures;
pub mod operators;
pub mod optimize;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
