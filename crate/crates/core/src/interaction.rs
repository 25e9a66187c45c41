//! Down- and up-conversion kernel: mismatches, pair amplitude, rate
//! prefactor, thermal occupation and the Monte Carlo rate density.
//!
//! Lab frame: the pump travels along +z. Wave vectors are inside the
//! crystal. For up-conversion the idler frequency and wave vector enter the
//! mismatches with flipped sign; a signed factor `q` (+1 down, −1 up) is used
//! throughout:
//!
//! ```text
//! Δk_z = k_pz − k_sz − q k_iz + k_Λ
//! Δk_⊥ = k_s⊥ + q k_i⊥
//! Δω   = ω_p − ω_s − q ω_i
//! ```

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionModel, Polarization, PrincipalIndices};
use crate::error::{Result, SimError};
use crate::mcint::estimator::{McEstimate, MomentAccumulator};
use crate::mcint::mixture::{sinc, SincSqProposal};
use crate::mcint::sampler::{sample_idler, IdlerSample};
use crate::nonlinearity::{effective_chi2_about, CrystalFrame, MillerScaler, NonlinearTensor};
use crate::quantities::{wavelength_to_angular_frequency, C, EPS0, HBAR, K_B};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    #[serde(rename = "down")]
    DownConversion,
    #[serde(rename = "up")]
    UpConversion,
}

impl ProcessKind {
    /// +1 for down-conversion, −1 for up-conversion.
    pub fn idler_sign(self) -> f64 {
        match self {
            ProcessKind::DownConversion => 1.0,
            ProcessKind::UpConversion => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProcessKind::DownConversion => "down",
            ProcessKind::UpConversion => "up",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    /// Length along the pump axis, m.
    pub length: f64,
    pub height: f64,
    pub width: f64,
    pub poling_period: f64,
    /// Crystal temperature, K. Sets both the index model and N_th.
    pub temperature_k: f64,
    /// Optic axis in lab coordinates.
    pub optic_axis: Vector3<f64>,
    pub tensor: NonlinearTensor,
    pub dispersion: DispersionModel,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("height", self.height),
            ("width", self.width),
            ("poling_period", self.poling_period),
            ("temperature", self.temperature_k),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::domain(format!("crystal {name} must be positive, got {v}")));
            }
        }
        CrystalFrame::from_optic_axis(self.optic_axis)?;
        Ok(())
    }

    pub fn frame(&self) -> Result<CrystalFrame> {
        CrystalFrame::from_optic_axis(self.optic_axis)
    }
}

/// Classical, undepleted, collimated Gaussian pump along +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    pub wavelength: f64,
    pub power: f64,
    pub waist: f64,
    pub polarization: Polarization,
}

impl PumpSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("power", self.power),
            ("waist", self.waist),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::domain(format!("pump {name} must be positive, got {v}")));
            }
        }
        if self.waist < 10.0 * self.wavelength {
            return Err(SimError::domain("pump waist must be much larger than the wavelength"));
        }
        Ok(())
    }
}

/// One summand of the rate density: polarizations and QPM order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channel {
    pub pol_s: Polarization,
    pub pol_i: Polarization,
    pub order: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTriple {
    pub k_p: Vector3<f64>,
    pub k_s: Vector3<f64>,
    pub k_i: Vector3<f64>,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_i: f64,
    pub pol_s: Polarization,
    pub pol_i: Polarization,
    pub order: i32,
    pub process: ProcessKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub dkx: f64,
    pub dky: f64,
    pub dkz: f64,
    pub domega: f64,
}

/// Bose–Einstein occupation 1/(exp(ħω/k_B T) − 1).
pub fn thermal_occupation(omega_i: f64, temperature_k: f64) -> Result<f64> {
    if !(omega_i > 0.0) {
        return Err(SimError::domain(format!(
            "idler frequency must be positive, got {omega_i}"
        )));
    }
    if !(temperature_k > 0.0) {
        return Err(SimError::domain(format!(
            "temperature must be positive, got {temperature_k}"
        )));
    }
    Ok(1.0 / (HBAR * omega_i / (K_B * temperature_k)).exp_m1())
}

/// Per-sample thermal factor: 1 + N_th for down-, N_th for up-conversion.
pub fn thermal_factor(process: ProcessKind, omega_i: f64, temperature_k: f64) -> Result<f64> {
    let n = thermal_occupation(omega_i, temperature_k)?;
    Ok(match process {
        ProcessKind::DownConversion => 1.0 + n,
        ProcessKind::UpConversion => n,
    })
}

/// Poling wave number k_Λ = 2πm/Λ for odd m.
pub fn quasi_phase_offset(order: i32, period: f64) -> Result<f64> {
    if order % 2 == 0 {
        return Err(SimError::domain(format!("QPM order must be odd, got {order}")));
    }
    if !(period > 0.0) {
        return Err(SimError::domain(format!(
            "poling period must be positive, got {period}"
        )));
    }
    Ok(2.0 * PI * order as f64 / period)
}

pub fn mismatch(triple: &ModeTriple, crystal: &CrystalSpec) -> Result<Mismatch> {
    let k_lambda = quasi_phase_offset(triple.order, crystal.poling_period)?;
    Ok(mismatch_with_offset(triple, k_lambda))
}

fn mismatch_with_offset(t: &ModeTriple, k_lambda: f64) -> Mismatch {
    let q = t.process.idler_sign();
    Mismatch {
        dkx: t.k_s.x + q * t.k_i.x,
        dky: t.k_s.y + q * t.k_i.y,
        dkz: t.k_p.z - t.k_s.z - q * t.k_i.z + k_lambda,
        domega: t.omega_p - t.omega_s - q * t.omega_i,
    }
}

/// Pair amplitude
/// A = (χ_eff/m)·√(ω_s ω_i)/(n_s n_i)·sinc(Δk_z L/2)·exp(−(Δk_x² + Δk_y²)w²/4)·sinc(Δω T_I/2)
/// with χ_eff in m/V.
#[allow(clippy::too_many_arguments)]
pub fn pair_amplitude(
    chi_eff: f64,
    order: i32,
    omega_s: f64,
    omega_i: f64,
    n_s: f64,
    n_i: f64,
    mm: &Mismatch,
    length: f64,
    waist: f64,
    interaction_time: f64,
) -> f64 {
    let transverse = (-(mm.dkx * mm.dkx + mm.dky * mm.dky) * waist * waist / 4.0).exp();
    chi_eff / order as f64 * (omega_s * omega_i).sqrt() / (n_s * n_i)
        * sinc(0.5 * mm.dkz * length)
        * transverse
        * sinc(0.5 * mm.domega * interaction_time)
}

/// Pump index along +z for its polarization.
pub fn pump_index(pump: &PumpSpec, crystal: &CrystalSpec) -> Result<f64> {
    let omega = wavelength_to_angular_frequency(pump.wavelength)?;
    crystal
        .dispersion
        .index_along(omega, pump.polarization, crystal.optic_axis.z)
}

/// Phase-index transit time n_p L / c.
pub fn interaction_time(pump: &PumpSpec, crystal: &CrystalSpec) -> Result<f64> {
    Ok(pump_index(pump, crystal)? * crystal.length / C)
}

/// Z = 16 P w² L² T_I / ((2π)⁷ ε₀ n_p c).
pub fn rate_prefactor(pump: &PumpSpec, crystal: &CrystalSpec, t_i: f64) -> Result<f64> {
    pump.validate()?;
    if !(t_i > 0.0) {
        return Err(SimError::domain("interaction time must be positive"));
    }
    let n_p = pump_index(pump, crystal)?;
    let l = crystal.length;
    Ok(16.0 * pump.power * pump.waist.powi(2) * l * l * t_i / ((2.0 * PI).powi(7) * EPS0 * n_p * C))
}

/// Test seam for the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelMode {
    #[default]
    Physical,
    /// Γ ≡ 1 per signal mode with a single idler frequency.
    UnitStub { omega_i: f64 },
    /// Physical kernel with χ_eff fixed (pm/V), independent of field
    /// directions. With an on-axis signal and ordinary idler the integrand
    /// no longer depends on the idler azimuth.
    ConstantChi { pm_per_v: f64 },
}

/// Which summands enter the rate density and over which idler range.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSettings {
    /// Signed odd QPM orders.
    pub orders: Vec<i32>,
    /// Enabled (signal, idler) polarization pairs; pump polarization is
    /// fixed by [`PumpSpec`].
    pub pol_pairs: Vec<(Polarization, Polarization)>,
    pub omega_floor: f64,
    pub omega_ceiling: f64,
    /// Overrides n_p L / c when set.
    pub interaction_time: Option<f64>,
    pub kernel: KernelMode,
    /// Idler draws per (signal mode, channel) in detector rendering.
    pub idler_draws: usize,
}

/// ±1, ±3, … up to `max_order`.
pub fn signed_orders(max_order: i32) -> Vec<i32> {
    (1..=max_order).step_by(2).flat_map(|m| [m, -m]).collect()
}

impl KernelSettings {
    pub fn new(max_order: i32) -> Self {
        use Polarization::{Extraordinary as E, Ordinary as O};
        KernelSettings {
            orders: signed_orders(max_order),
            pol_pairs: vec![(E, E), (O, O), (O, E), (E, O)],
            omega_floor: 2.0 * PI * 0.05e12,
            omega_ceiling: 2.0 * PI * 6.0e12,
            interaction_time: None,
            kernel: KernelMode::Physical,
            idler_draws: 1,
        }
    }
}

/// A signal plane-wave mode inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalMode {
    pub omega: f64,
    pub k: Vector3<f64>,
    pub pol: Polarization,
    pub n: f64,
    pub n_group: f64,
    pub indices: PrincipalIndices,
    pub d_field: Vector3<f64>,
}

impl SignalMode {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI * C / self.omega
    }

    /// External paraxial angles (θ_x, θ_y), from tangential k conservation.
    pub fn external_angles(&self) -> (f64, f64) {
        let k0 = self.omega / C;
        (self.k.x / k0, self.k.y / k0)
    }

    /// d³k / (dλ dθ_x dθ_y) for the external parameterization used by
    /// [`PhysicsModel::signal_from_external`].
    pub fn external_jacobian(&self) -> f64 {
        let k0 = self.omega / C;
        let kmag = self.k.norm();
        k0 * k0 * (kmag / self.k.z) * (self.n_group / C) * (self.omega / self.wavelength())
    }
}

/// Idler quantities at one sample point.
#[derive(Debug, Clone, Copy)]
struct IdlerState {
    k: Vector3<f64>,
    n: f64,
    n_group: f64,
    indices: PrincipalIndices,
    d_field: Vector3<f64>,
}

/// Rate-density estimate with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub zero_terms: u64,
    /// No channel had an admissible idler region.
    pub no_admissible_region: bool,
}

/// Immutable model with everything that does not depend on the signal mode
/// precomputed.
#[derive(Debug, Clone)]
pub struct PhysicsModel {
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub settings: KernelSettings,
    frame: CrystalFrame,
    omega_p: f64,
    k_p: Vector3<f64>,
    pump_indices: PrincipalIndices,
    pump_d: Vector3<f64>,
    t_i: f64,
    prefactor: f64,
    miller: MillerScaler,
    proposal: SincSqProposal,
}

impl PhysicsModel {
    pub fn new(crystal: CrystalSpec, pump: PumpSpec, settings: KernelSettings) -> Result<Self> {
        crystal.validate()?;
        pump.validate()?;
        for &m in &settings.orders {
            quasi_phase_offset(m, crystal.poling_period)?;
        }
        if !(settings.omega_floor > 0.0 && settings.omega_ceiling > settings.omega_floor) {
            return Err(SimError::domain(
                "idler frequency floor must be positive and below the ceiling",
            ));
        }
        let frame = crystal.frame()?;
        let omega_p = wavelength_to_angular_frequency(pump.wavelength)?;
        let pump_indices = crystal.dispersion.principal_indices(omega_p)?;
        let zhat = Vector3::z();
        let n_p = pump_indices.along(pump.polarization, zhat.dot(&frame.e3));
        let k_p = zhat * (n_p * omega_p / C);
        let pump_d = frame.displacement_direction(&zhat, pump.polarization);
        let t_i = match settings.interaction_time {
            Some(t) if t > 0.0 => t,
            Some(t) => return Err(SimError::domain(format!("interaction time must be positive, got {t}"))),
            None => n_p * crystal.length / C,
        };
        let prefactor = rate_prefactor(&pump, &crystal, t_i)?;
        let miller = crystal.tensor.prepare(&crystal.dispersion)?;
        Ok(PhysicsModel {
            crystal,
            pump,
            settings,
            frame,
            omega_p,
            k_p,
            pump_indices,
            pump_d,
            t_i,
            prefactor,
            miller,
            proposal: SincSqProposal::from_default_fit(),
        })
    }

    pub fn omega_pump(&self) -> f64 {
        self.omega_p
    }

    pub fn k_pump(&self) -> Vector3<f64> {
        self.k_p
    }

    pub fn interaction_time(&self) -> f64 {
        self.t_i
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn frame(&self) -> &CrystalFrame {
        &self.frame
    }

    pub(crate) fn proposal(&self) -> &SincSqProposal {
        &self.proposal
    }

    pub fn channels(&self, pol_s: Polarization) -> Vec<Channel> {
        let mut out = Vec::new();
        for &(ps, pi) in &self.settings.pol_pairs {
            if ps != pol_s {
                continue;
            }
            for &order in &self.settings.orders {
                out.push(Channel {
                    pol_s: ps,
                    pol_i: pi,
                    order,
                });
            }
        }
        out
    }

    /// Signal polarizations that appear in at least one enabled pair.
    pub fn signal_polarizations(&self) -> Vec<Polarization> {
        Polarization::ALL
            .into_iter()
            .filter(|p| self.settings.pol_pairs.iter().any(|(s, _)| s == p))
            .collect()
    }

    pub fn k_lambda(&self, order: i32) -> f64 {
        2.0 * PI * order as f64 / self.crystal.poling_period
    }

    /// Signal mode travelling along the lab unit vector `dir`.
    pub fn signal_along(&self, omega: f64, dir: &Vector3<f64>, pol: Polarization) -> Result<SignalMode> {
        crate::dispersion::check_unit(dir, "signal direction")?;
        let cos_axis = dir.dot(&self.frame.e3);
        let indices = self.crystal.dispersion.principal_indices(omega)?;
        let n = indices.along(pol, cos_axis);
        let n_group = self.crystal.dispersion.group_index_along(omega, pol, cos_axis)?;
        Ok(SignalMode {
            omega,
            k: dir * (n * omega / C),
            pol,
            n,
            n_group,
            indices,
            d_field: self.frame.displacement_direction(dir, pol),
        })
    }

    /// Signal mode from its internal wave vector; ω is recovered by solving
    /// |k| = n(ω, k̂) ω / c.
    pub fn signal_from_wavevector(&self, k: &Vector3<f64>, pol: Polarization) -> Result<SignalMode> {
        let kmag = k.norm();
        if !(kmag > 0.0) {
            return Err(SimError::domain("signal wave vector must be nonzero"));
        }
        let dir = k / kmag;
        let cos_axis = dir.dot(&self.frame.e3);
        let d = &self.crystal.dispersion;
        // Newton on g(ω) = n(ω)ω/c − |k|, dg/dω = n_g/c
        let mut omega = kmag * C / d.principal_indices(self.omega_p)?.along(pol, cos_axis);
        for _ in 0..50 {
            let n = d.index_along(omega, pol, cos_axis)?;
            let ng = d.group_index_along(omega, pol, cos_axis)?;
            let step = (n * omega / C - kmag) / (ng / C);
            omega -= step;
            if step.abs() < 1e-14 * omega {
                break;
            }
        }
        self.signal_along(omega, &dir, pol)
    }

    /// Signal mode from vacuum wavelength and external paraxial angles. The
    /// transverse wave vector is (ω/c)(θ_x, θ_y) on both sides of the exit
    /// face.
    pub fn signal_from_external(
        &self,
        wavelength: f64,
        theta_x: f64,
        theta_y: f64,
        pol: Polarization,
    ) -> Result<SignalMode> {
        let omega = wavelength_to_angular_frequency(wavelength)?;
        let k0 = omega / C;
        let (kx, ky) = (k0 * theta_x, k0 * theta_y);
        let indices = self.crystal.dispersion.principal_indices(omega)?;
        let kperp2 = kx * kx + ky * ky;
        let mut n = indices.get(pol);
        let mut kz = 0.0;
        for _ in 0..6 {
            let kk = n * k0;
            let rem = kk * kk - kperp2;
            if rem <= 0.0 {
                return Err(SimError::domain("signal angle beyond total internal reflection"));
            }
            kz = rem.sqrt();
            let dir = Vector3::new(kx, ky, kz) / kk;
            n = indices.along(pol, dir.dot(&self.frame.e3));
        }
        let dir = Vector3::new(kx, ky, kz).normalize();
        self.signal_along(omega, &dir, pol)
    }

    fn idler_direction(u: f64, phi: f64) -> Vector3<f64> {
        let s = (1.0 - u * u).max(0.0).sqrt();
        Vector3::new(s * phi.cos(), s * phi.sin(), u)
    }

    fn idler_state(
        &self,
        omega_i: f64,
        u: f64,
        phi: f64,
        pol: Polarization,
        indices: PrincipalIndices,
    ) -> Result<IdlerState> {
        let dir = Self::idler_direction(u, phi);
        let cos_axis = dir.dot(&self.frame.e3);
        let n = indices.along(pol, cos_axis);
        let n_group = self.crystal.dispersion.group_index_along(omega_i, pol, cos_axis)?;
        Ok(IdlerState {
            k: dir * (n * omega_i / C),
            n,
            n_group,
            indices,
            d_field: self.frame.displacement_direction(&dir, pol),
        })
    }

    /// k_z of an idler with polar cosine `u` about +z and azimuth `phi`.
    pub(crate) fn idler_kz(
        &self,
        omega_i: f64,
        u: f64,
        phi: f64,
        pol: Polarization,
        indices: &PrincipalIndices,
    ) -> f64 {
        let dir = Self::idler_direction(u, phi);
        indices.along(pol, dir.dot(&self.frame.e3)) * omega_i / C * u
    }

    pub fn mode_triple(
        &self,
        signal: &SignalMode,
        channel: Channel,
        process: ProcessKind,
        omega_i: f64,
        k_i: Vector3<f64>,
    ) -> ModeTriple {
        ModeTriple {
            k_p: self.k_p,
            k_s: signal.k,
            k_i,
            omega_p: self.omega_p,
            omega_s: signal.omega,
            omega_i,
            pol_s: signal.pol,
            pol_i: channel.pol_i,
            order: channel.order,
            process,
        }
    }

    /// Effective susceptibility in pm/V for the given fields.
    pub fn effective_chi(&self, signal: &SignalMode, idler_indices: &PrincipalIndices, idler_d: &Vector3<f64>) -> f64 {
        let comps = self
            .miller
            .components(&[self.pump_indices, signal.indices, *idler_indices]);
        effective_chi2_about(&comps, &self.pump_d, &signal.d_field, idler_d, &self.frame.e3)
    }

    /// Pair amplitude for a fully specified triple (idler polarization and
    /// frequency taken from the triple).
    pub fn amplitude(&self, triple: &ModeTriple) -> Result<f64> {
        let signal = self.signal_from_wavevector(&triple.k_s, triple.pol_s)?;
        let kmag = triple.k_i.norm();
        let dir = triple.k_i / kmag;
        let indices = self.crystal.dispersion.principal_indices(triple.omega_i)?;
        let n_i = indices.along(triple.pol_i, dir.dot(&self.frame.e3));
        let idler_d = self.frame.displacement_direction(&dir, triple.pol_i);
        let chi = self.effective_chi(&signal, &indices, &idler_d) * 1e-12;
        let mm = mismatch_with_offset(triple, self.k_lambda(triple.order));
        Ok(pair_amplitude(
            chi,
            triple.order,
            triple.omega_s,
            triple.omega_i,
            signal.n,
            n_i,
            &mm,
            self.crystal.length,
            self.pump.waist,
            self.t_i,
        ))
    }

    /// Z·J·|A|² at an idler point (ω_i, u = cos θ_i, φ_i), where
    /// J = |k_i|² n_g,i / c is the volume element in (ω_i, u, φ_i).
    pub fn integrand(
        &self,
        signal: &SignalMode,
        channel: Channel,
        process: ProcessKind,
        omega_i: f64,
        u: f64,
        phi: f64,
    ) -> Result<f64> {
        let indices = self.crystal.dispersion.principal_indices(omega_i)?;
        self.integrand_with(signal, channel, process, omega_i, u, phi, indices)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn integrand_with(
        &self,
        signal: &SignalMode,
        channel: Channel,
        process: ProcessKind,
        omega_i: f64,
        u: f64,
        phi: f64,
        indices: PrincipalIndices,
    ) -> Result<f64> {
        let idler = self.idler_state(omega_i, u, phi, channel.pol_i, indices)?;
        let chi = match self.settings.kernel {
            KernelMode::ConstantChi { pm_per_v } => pm_per_v,
            _ => self.effective_chi(signal, &idler.indices, &idler.d_field),
        } * 1e-12;
        let triple = self.mode_triple(signal, channel, process, omega_i, idler.k);
        let mm = mismatch_with_offset(&triple, self.k_lambda(channel.order));
        let a = pair_amplitude(
            chi,
            channel.order,
            signal.omega,
            omega_i,
            signal.n,
            idler.n,
            &mm,
            self.crystal.length,
            self.pump.waist,
            self.t_i,
        );
        let kmag2 = idler.k.norm_squared();
        Ok(self.prefactor * kmag2 * idler.n_group / C * a * a)
    }

    /// f/p for one idler draw, or 0 when the draw has no support.
    pub(crate) fn sample_term<R: Rng + ?Sized>(
        &self,
        signal: &SignalMode,
        channel: Channel,
        process: ProcessKind,
        rng: &mut R,
    ) -> Result<Option<(IdlerSample, f64)>> {
        match sample_idler(self, signal, process, channel, rng) {
            Some(s) => {
                let f = self.integrand_with(signal, channel, process, s.omega_i, s.u, s.phi_i, s.indices)?;
                Ok(Some((s, f / s.density)))
            }
            None => Ok(None),
        }
    }

    /// Rate density Γ for one channel.
    pub fn rate_density_channel<R: Rng + ?Sized>(
        &self,
        signal: &SignalMode,
        channel: Channel,
        process: ProcessKind,
        samples: usize,
        rng: &mut R,
    ) -> Result<McEstimate> {
        if samples < 1 {
            return Err(SimError::domain("need at least one sample"));
        }
        let mut acc = MomentAccumulator::default();
        for _ in 0..samples {
            let term = self
                .sample_term(signal, channel, process, rng)?
                .map(|(_, t)| t)
                .unwrap_or(0.0);
            acc.push(term);
        }
        Ok(acc.estimate())
    }

    /// Γ(k_s) = Z Σ_{σ_i} Σ_m ∫ d³k_i |A|² for the signal's polarization,
    /// `samples` idler draws per channel.
    pub fn rate_density<R: Rng + ?Sized>(
        &self,
        signal: &SignalMode,
        process: ProcessKind,
        samples: usize,
        rng: &mut R,
    ) -> Result<RateEstimate> {
        if let KernelMode::UnitStub { .. } = self.settings.kernel {
            return Ok(RateEstimate {
                value: 1.0,
                samples: 1,
                ..Default::default()
            });
        }
        let mut out = RateEstimate::default();
        let mut var = 0.0;
        let channels = self.channels(signal.pol);
        for ch in &channels {
            let est = self.rate_density_channel(signal, *ch, process, samples, rng)?;
            out.value += est.value;
            var += est.stderr * est.stderr;
            out.samples += est.samples;
            out.zero_terms += est.zero_terms;
        }
        out.stderr = var.sqrt();
        out.no_admissible_region = out.samples > 0 && out.zero_terms == out.samples;
        Ok(out)
    }

    /// One Monte Carlo term of the thermally weighted rate density at a
    /// signal mode: Σ over channels of (1 + N_th) f/p (down) or N_th f/p
    /// (up), with N_th evaluated at each sample's idler frequency.
    pub fn weighted_signal_term<R: Rng + ?Sized>(
        &self,
        signal: &SignalMode,
        process: ProcessKind,
        rng: &mut R,
    ) -> Result<f64> {
        let t_c = self.crystal.temperature_k;
        if let KernelMode::UnitStub { omega_i } = self.settings.kernel {
            return thermal_factor(process, omega_i, t_c);
        }
        let draws = self.settings.idler_draws.max(1);
        let mut total = 0.0;
        for ch in self.channels(signal.pol) {
            for _ in 0..draws {
                if let Some((s, term)) = self.sample_term(signal, ch, process, rng)? {
                    if term > 0.0 {
                        total += term * thermal_factor(process, s.omega_i, t_c)?;
                    }
                }
            }
        }
        Ok(total / draws as f64)
    }
}
