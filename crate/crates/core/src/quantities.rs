//! Physical constants and spectral unit conversions.
//!
//! Everything inside the engine is SI: metres, seconds, radians, kelvin.
//! Angular frequency (rad/s) is the canonical spectral coordinate; nm, THz
//! and degrees only appear at I/O boundaries through the helpers below.

use std::f64::consts::PI;

use crate::error::{Result, SimError};

/// CODATA 2018 exact/recommended values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum, m/s.
    pub c: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    c: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
    eps0: 8.854_187_812_8e-12,
};

pub const C: f64 = CONSTANTS.c;
pub const HBAR: f64 = CONSTANTS.hbar;
pub const K_B: f64 = CONSTANTS.k_b;
pub const EPS0: f64 = CONSTANTS.eps0;

/// ω = 2πc/λ for a vacuum wavelength in metres.
pub fn wavelength_to_angular_frequency(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(SimError::domain(format!(
            "wavelength must be positive and finite, got {lambda}"
        )));
    }
    Ok(2.0 * PI * C / lambda)
}

/// λ = 2πc/ω; inverse of [`wavelength_to_angular_frequency`].
pub fn angular_frequency_to_wavelength(omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(SimError::domain(format!(
            "angular frequency must be positive and finite, got {omega}"
        )));
    }
    Ok(2.0 * PI * C / omega)
}

/// Idler angular frequency ω_p − ω_s. Negative values are returned as-is;
/// callers pick the up- or down-conversion branch from the sign.
pub fn frequency_difference(omega_p: f64, omega_s: f64) -> Result<f64> {
    if !(omega_p > 0.0) || !(omega_s > 0.0) {
        return Err(SimError::domain(format!(
            "frequencies must be positive, got ω_p={omega_p}, ω_s={omega_s}"
        )));
    }
    Ok(omega_p - omega_s)
}

pub fn thz_to_angular(nu_thz: f64) -> f64 {
    2.0 * PI * nu_thz * 1e12
}

pub fn angular_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e12)
}

pub fn nm(lambda_nm: f64) -> f64 {
    lambda_nm * 1e-9
}

pub fn to_nm(lambda: f64) -> f64 {
    lambda * 1e9
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}
