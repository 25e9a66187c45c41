//! Second-order susceptibility: Miller's-rule frequency scaling and the
//! contraction to an effective scalar for given field directions.
//!
//! Only the 333 and 311-family components are populated. The 311 family is
//! distributed with full index-permutation symmetry (311 = 322, 131 = 232,
//! 113 = 223) and equal values at the reference frequencies; each component
//! is then Miller-scaled with its own pattern of principal indices.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dispersion::{check_unit, DispersionModel, Polarization, PrincipalIndices};
use crate::error::{Result, SimError};
use crate::quantities::{thz_to_angular, wavelength_to_angular_frequency};

/// Angular frequencies (rad/s) of pump, signal and idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTriple {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

impl FrequencyTriple {
    /// Triple from signal wavelength and idler frequency, pump fixed by
    /// energy conservation.
    pub fn from_signal_and_idler(signal_wavelength: f64, idler_thz: f64) -> Result<Self> {
        let signal = wavelength_to_angular_frequency(signal_wavelength)?;
        let idler = thz_to_angular(idler_thz);
        Ok(FrequencyTriple {
            pump: signal + idler,
            signal,
            idler,
        })
    }

    fn as_array(&self) -> [f64; 3] {
        [self.pump, self.signal, self.idler]
    }
}

/// Reference values of the two independent tensor components.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTensor {
    /// χ₃₃₃ at `reference`, pm/V.
    pub chi333_ref: f64,
    /// χ₃₁₁ at `reference`, pm/V.
    pub chi311_ref: f64,
    pub reference: FrequencyTriple,
    pub point_group: String,
}

impl NonlinearTensor {
    pub fn new(chi333_ref: f64, chi311_ref: f64, reference: FrequencyTriple) -> Result<Self> {
        if !(chi333_ref > 0.0) || !(chi311_ref > 0.0) {
            return Err(SimError::domain("reference susceptibilities must be positive"));
        }
        Ok(NonlinearTensor {
            chi333_ref,
            chi311_ref,
            reference,
            point_group: "3m".into(),
        })
    }

    /// Tensor components at the target frequencies.
    pub fn at(&self, target: FrequencyTriple, dispersion: &DispersionModel) -> Result<TensorComponents> {
        let ref_idx = principal_triple(self.reference, dispersion)?;
        let tgt_idx = principal_triple(target, dispersion)?;
        Ok(self.components_from_indices(&ref_idx, &tgt_idx))
    }

    pub(crate) fn prepare(&self, dispersion: &DispersionModel) -> Result<MillerScaler> {
        Ok(MillerScaler {
            tensor: self.clone(),
            reference: principal_triple(self.reference, dispersion)?,
        })
    }

    fn components_from_indices(
        &self,
        reference: &[PrincipalIndices; 3],
        target: &[PrincipalIndices; 3],
    ) -> TensorComponents {
        use Polarization::{Extraordinary as E, Ordinary as O};
        let ratio = |pols: [Polarization; 3]| -> f64 {
            (0..3)
                .map(|j| susceptibility(target[j].get(pols[j])) / susceptibility(reference[j].get(pols[j])))
                .product()
        };
        TensorComponents {
            chi333: self.chi333_ref * ratio([E, E, E]),
            chi311: self.chi311_ref * ratio([E, O, O]),
            chi131: self.chi311_ref * ratio([O, E, O]),
            chi113: self.chi311_ref * ratio([O, O, E]),
        }
    }
}

/// Cached reference indices for repeated Miller scaling in the kernel.
#[derive(Debug, Clone)]
pub(crate) struct MillerScaler {
    tensor: NonlinearTensor,
    reference: [PrincipalIndices; 3],
}

impl MillerScaler {
    pub(crate) fn components(&self, target: &[PrincipalIndices; 3]) -> TensorComponents {
        self.tensor.components_from_indices(&self.reference, target)
    }
}

fn principal_triple(t: FrequencyTriple, d: &DispersionModel) -> Result<[PrincipalIndices; 3]> {
    let w = t.as_array();
    Ok([
        d.principal_indices(w[0])?,
        d.principal_indices(w[1])?,
        d.principal_indices(w[2])?,
    ])
}

fn susceptibility(n: f64) -> f64 {
    n * n - 1.0
}

/// Nonzero tensor entries (pm/V), first index belonging to the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorComponents {
    pub chi333: f64,
    /// 311 = 322
    pub chi311: f64,
    /// 131 = 232
    pub chi131: f64,
    /// 113 = 223
    pub chi113: f64,
}

impl TensorComponents {
    /// Entry χ_{jkl} in the crystal frame (0-based indices, 2 = optic axis).
    pub fn entry(&self, j: usize, k: usize, l: usize) -> f64 {
        match (j, k, l) {
            (2, 2, 2) => self.chi333,
            (2, 0, 0) | (2, 1, 1) => self.chi311,
            (0, 2, 0) | (1, 2, 1) => self.chi131,
            (0, 0, 2) | (1, 1, 2) => self.chi113,
            _ => 0.0,
        }
    }
}

/// Miller's rule: χ_target = χ_ref · Π_j χ⁽¹⁾(ω_j,target)/χ⁽¹⁾(ω_j,ref) with
/// χ⁽¹⁾ = n² − 1 of the principal index selected by each field's
/// polarization (pump, signal, idler order).
pub fn miller_scale(
    chi_ref: f64,
    reference: FrequencyTriple,
    target: FrequencyTriple,
    dispersion: &DispersionModel,
    pols: [Polarization; 3],
) -> Result<f64> {
    let r = principal_triple(reference, dispersion)?;
    let t = principal_triple(target, dispersion)?;
    let mut scale = 1.0;
    for j in 0..3 {
        let nr = r[j].get(pols[j]);
        let nt = t[j].get(pols[j]);
        if nr <= 1.0 || nt <= 1.0 {
            return Err(SimError::domain(format!(
                "Miller scaling needs n > 1, got n_ref = {nr}, n_target = {nt}"
            )));
        }
        scale *= susceptibility(nt) / susceptibility(nr);
    }
    Ok(chi_ref * scale)
}

/// Displacement-field directions of pump, signal and idler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDirections {
    pub pump: Vector3<f64>,
    pub signal: Vector3<f64>,
    pub idler: Vector3<f64>,
}

impl FieldDirections {
    pub fn new(pump: Vector3<f64>, signal: Vector3<f64>, idler: Vector3<f64>) -> Result<Self> {
        check_unit(&pump, "pump direction")?;
        check_unit(&signal, "signal direction")?;
        check_unit(&idler, "idler direction")?;
        Ok(FieldDirections { pump, signal, idler })
    }
}

/// χ_eff = Σ χ_{jkl} ε_p,j ε_s,k ε_i,l for directions in the crystal frame.
pub fn effective_chi2(tensor: &TensorComponents, dirs: &FieldDirections) -> f64 {
    effective_chi2_about(tensor, &dirs.pump, &dirs.signal, &dirs.idler, &Vector3::z())
}

/// Same contraction with the optic axis given explicitly (lab frame). With
/// only the 333/311 families populated the tensor is symmetric about the
/// optic axis, so no further frame information is needed.
pub fn effective_chi2_about(
    tensor: &TensorComponents,
    p: &Vector3<f64>,
    s: &Vector3<f64>,
    i: &Vector3<f64>,
    axis: &Vector3<f64>,
) -> f64 {
    let (p3, s3, i3) = (p.dot(axis), s.dot(axis), i.dot(axis));
    let perp = |a: &Vector3<f64>, a3: f64, b: &Vector3<f64>, b3: f64| a.dot(b) - a3 * b3;
    tensor.chi333 * p3 * s3 * i3
        + tensor.chi311 * p3 * perp(s, s3, i, i3)
        + tensor.chi131 * s3 * perp(p, p3, i, i3)
        + tensor.chi113 * i3 * perp(p, p3, s, s3)
}

/// Orthonormal crystal frame; `e3` is the optic axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalFrame {
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub e3: Vector3<f64>,
}

impl CrystalFrame {
    pub fn identity() -> Self {
        CrystalFrame {
            e1: Vector3::x(),
            e2: Vector3::y(),
            e3: Vector3::z(),
        }
    }

    /// Frame with e3 along `optic_axis` (lab coordinates). e1 is ẑ × e3 when
    /// that is well defined, otherwise lab x̂.
    pub fn from_optic_axis(optic_axis: Vector3<f64>) -> Result<Self> {
        check_unit(&optic_axis, "optic axis")?;
        let e3 = optic_axis;
        let c = Vector3::z().cross(&e3);
        let e1 = if c.norm() > 1e-9 { c.normalize() } else { Vector3::x() };
        let e2 = e3.cross(&e1);
        Ok(CrystalFrame { e1, e2, e3 })
    }

    pub fn to_crystal(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(v.dot(&self.e1), v.dot(&self.e2), v.dot(&self.e3))
    }

    pub fn to_lab(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.e1 * v.x + self.e2 * v.y + self.e3 * v.z
    }

    /// D-field direction for a wave along `k_hat` (lab frame). Ordinary is
    /// ∝ axis × k̂; extraordinary is the part of the axis transverse to k̂.
    /// For k̂ along the axis the pair (e1, e2) is used.
    pub fn displacement_direction(&self, k_hat: &Vector3<f64>, pol: Polarization) -> Vector3<f64> {
        let axis = &self.e3;
        match pol {
            Polarization::Ordinary => {
                let o = axis.cross(k_hat);
                let n = o.norm();
                if n < 1e-12 {
                    self.e1
                } else {
                    o / n
                }
            }
            Polarization::Extraordinary => {
                let e = axis - k_hat * axis.dot(k_hat);
                let n = e.norm();
                if n < 1e-12 {
                    self.e2
                } else {
                    e / n
                }
            }
        }
    }
}

/// D-field direction in the crystal frame (optic axis ẑ).
pub fn displacement_direction(k_hat: &Vector3<f64>, pol: Polarization) -> Result<Vector3<f64>> {
    check_unit(k_hat, "k_hat")?;
    Ok(CrystalFrame::identity().displacement_direction(k_hat, pol))
}
