//! Absolute-rate simulation of spontaneous parametric down-conversion and
//! thermally seeded up-conversion in periodically poled uniaxial crystals,
//! with paraxial propagation onto a pixelated spectrometer camera.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detector;
pub mod dispersion;
pub mod error;
pub mod interaction;
pub mod mcint;
pub mod nonlinearity;
pub mod optics;
pub mod optim;
pub mod quantities;

pub use error::{Result, SimError};
