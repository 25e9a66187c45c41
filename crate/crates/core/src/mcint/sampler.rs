//! Idler importance sampler for one (signal mode, channel) pair.
//!
//! The idler is parameterized by (ω_i, φ_i, u = cos θ_i) about +z. Each
//! coordinate is drawn from a density shaped after the factor of |A|² that
//! dominates it:
//!
//! - ω_i from the sinc² proposal in x₁ = Δω T_I / 2,
//! - φ_i from a wrapped normal about transverse momentum balance,
//! - u from the sinc² proposal in x₂ = Δk_z L / 2, linearized about the root
//!   of Δk_z(u) = 0 at the drawn (ω_i, φ_i).

use std::f64::consts::PI;

use rand::Rng;

use crate::dispersion::{Polarization, PrincipalIndices};
use crate::interaction::{Channel, PhysicsModel, ProcessKind, SignalMode};
use crate::mcint::mixture::{wrap_angle, WrappedNormalProposal};

/// Uniform share of the azimuthal proposal.
pub const AZIMUTH_UNIFORM_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdlerSample {
    pub omega_i: f64,
    pub theta_i: f64,
    pub phi_i: f64,
    pub u: f64,
    /// Joint density in (ω_i, u, φ_i).
    pub density: f64,
    pub order: i32,
    pub pol_i: Polarization,
    pub indices: PrincipalIndices,
}

/// Draw one idler point, or `None` when the channel has no probability mass
/// inside the admissible frequency range (the term is then zero).
pub fn sample_idler<R: Rng + ?Sized>(
    model: &PhysicsModel,
    signal: &SignalMode,
    process: ProcessKind,
    channel: Channel,
    rng: &mut R,
) -> Option<IdlerSample> {
    let q = process.idler_sign();
    let proposal = model.proposal();
    let t = model.interaction_time();
    let (floor, ceiling) = (model.settings.omega_floor, model.settings.omega_ceiling);

    let omega_0 = q * (model.omega_pump() - signal.omega);
    let half_t = 0.5 * t;
    let (x1, p1) = proposal.sample_truncated(rng, (floor - omega_0) * half_t, (ceiling - omega_0) * half_t)?;
    let omega_i = (omega_0 + x1 / half_t).clamp(floor, ceiling);
    let indices = model.crystal.dispersion.principal_indices(omega_i).ok()?;

    let phi_s = signal.k.y.atan2(signal.k.x);
    let kperp = signal.k.x.hypot(signal.k.y);
    let mean = match process {
        ProcessKind::DownConversion => phi_s + PI,
        ProcessKind::UpConversion => phi_s,
    };
    let sigma = if kperp > 0.0 {
        1.0 / (model.pump.waist * kperp)
    } else {
        WrappedNormalProposal::MAX_SIGMA
    };
    let azimuth = WrappedNormalProposal::new(wrap_angle(mean), sigma, AZIMUTH_UNIFORM_FRACTION);
    let (phi, p_phi) = azimuth.sample(rng);

    let target = model.k_pump().z - signal.k.z + model.k_lambda(channel.order);
    let kz = |u: f64| model.idler_kz(omega_i, u, phi, channel.pol_i, &indices);
    let dkz = |u: f64| target - q * kz(u);
    let u_star = root_or_nearest_end(dkz);
    let h = 1e-6;
    let (ua, ub) = ((u_star - h).max(-1.0), (u_star + h).min(1.0));
    let k_i = indices.get(channel.pol_i) * omega_i / crate::quantities::C;
    let slope = ((kz(ub) - kz(ua)) / (ub - ua)).abs().max(1e-3 * k_i);
    let scale = 0.5 * slope * model.crystal.length;
    let (x2, p2) = proposal.sample_truncated(rng, (-1.0 - u_star) * scale, (1.0 - u_star) * scale)?;
    let u = (u_star + x2 / scale).clamp(-1.0, 1.0);

    let density = p1 * half_t * p2 * scale * p_phi;
    if !(density > 0.0) || !density.is_finite() {
        return None;
    }
    Some(IdlerSample {
        omega_i,
        theta_i: u.acos(),
        phi_i: phi,
        u,
        density,
        order: channel.order,
        pol_i: channel.pol_i,
        indices,
    })
}

/// Root of `g` on [−1, 1] by bisection; when `g` does not change sign the
/// endpoint with the smaller |g| is returned.
pub fn root_or_nearest_end<G: Fn(f64) -> f64>(g: G) -> f64 {
    let (mut a, mut b) = (-1.0, 1.0);
    let (mut ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    if ga.signum() == gb.signum() {
        return if ga.abs() < gb.abs() { a } else { b };
    }
    for _ in 0..64 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}
