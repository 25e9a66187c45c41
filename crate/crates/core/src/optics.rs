//! Paraxial ray optics from the crystal exit face to the camera, and the
//! layout fit against measured imaging characteristics.
//!
//! Rays start on axis at the exit face (z = 0) with slopes (θ_x, θ_y) and a
//! vacuum wavelength. Elements sit at increasing z; free-space gaps between
//! them are implied. The grating acts in the x plane with the exact grating
//! equation; everything else is the usual ABCD algebra.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::detector::DetectorGeometry;
use crate::error::{Result, SimError};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Slopes above this are flagged as outside paraxial validity.
pub const PARAXIAL_LIMIT: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpticalElement {
    FreeSpace {
        d: f64,
    },
    ThinLens {
        f: f64,
    },
    /// Clips in x only.
    Slit {
        full_width: f64,
    },
    /// Normal-incidence transmission grating dispersing in x. Positive
    /// orders deflect longer wavelengths towards +x.
    TransmissionGrating {
        groove_period: f64,
        order: i32,
        design_wavelength: f64,
    },
    /// Fold mirror; no effect on the unfolded paraxial ray.
    Mirror,
}

impl OpticalElement {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(SimError::domain(format!("{what} must be positive, got {v}")));
        match *self {
            OpticalElement::FreeSpace { d } if !(d >= 0.0) => bad("free-space distance", d),
            OpticalElement::ThinLens { f } if !(f.abs() > 0.0 && f.is_finite()) => bad("focal length", f),
            OpticalElement::Slit { full_width } if !(full_width > 0.0) => bad("slit width", full_width),
            OpticalElement::TransmissionGrating {
                groove_period,
                order,
                design_wavelength,
            } => {
                if !(groove_period > 0.0) {
                    return bad("groove period", groove_period);
                }
                if !(design_wavelength > 0.0) {
                    return bad("design wavelength", design_wavelength);
                }
                if order == 0 || (order as f64 * design_wavelength / groove_period).abs() >= 1.0 {
                    return Err(SimError::domain(format!(
                        "grating order {order} does not propagate at the design wavelength"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Apply to a ray in place; sets `alive = false` when clipped.
    pub fn apply(&self, ray: &mut Ray) {
        if !ray.alive {
            return;
        }
        match *self {
            OpticalElement::FreeSpace { d } => {
                ray.x += d * ray.theta_x;
                ray.y += d * ray.theta_y;
            }
            OpticalElement::ThinLens { f } => {
                ray.theta_x -= ray.x / f;
                ray.theta_y -= ray.y / f;
            }
            OpticalElement::Slit { full_width } => {
                if ray.x.abs() > 0.5 * full_width {
                    ray.alive = false;
                }
            }
            OpticalElement::TransmissionGrating {
                groove_period,
                order,
                design_wavelength,
            } => match grating_exact(ray.theta_x, ray.lambda, groove_period, order, design_wavelength) {
                Some((theta, scale)) => {
                    ray.theta_x = theta;
                    ray.x *= scale;
                }
                None => ray.alive = false,
            },
            OpticalElement::Mirror => {}
        }
    }

    fn label(&self) -> &'static str {
        match self {
            OpticalElement::FreeSpace { .. } => "free space",
            OpticalElement::ThinLens { .. } => "lens",
            OpticalElement::Slit { .. } => "slit",
            OpticalElement::TransmissionGrating { .. } => "grating",
            OpticalElement::Mirror => "mirror",
        }
    }
}

/// Diffraction angle β of the design wavelength.
pub fn grating_design_angle(groove_period: f64, order: i32, design_wavelength: f64) -> f64 {
    (order as f64 * design_wavelength / groove_period).asin()
}

/// Exact grating equation sin β = sin θ_in + mλ/d. Returns the outgoing
/// slope relative to the design diffraction direction and the transverse
/// beam scale cos β / cos θ_in, or `None` for an evanescent order.
pub fn grating_exact(
    theta_in: f64,
    lambda: f64,
    groove_period: f64,
    order: i32,
    design_wavelength: f64,
) -> Option<(f64, f64)> {
    let s = theta_in.sin() + order as f64 * lambda / groove_period;
    if s.abs() >= 1.0 {
        return None;
    }
    let beta = s.asin();
    let beta0 = grating_design_angle(groove_period, order, design_wavelength);
    Some((beta - beta0, beta.cos() / theta_in.cos()))
}

/// Angular dispersion G = m / (d cos β₀) of the linearized grating.
pub fn grating_dispersion(groove_period: f64, order: i32, design_wavelength: f64) -> f64 {
    order as f64 / (groove_period * grating_design_angle(groove_period, order, design_wavelength).cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub x: f64,
    pub y: f64,
    pub theta_x: f64,
    pub theta_y: f64,
    /// Vacuum wavelength, m.
    pub lambda: f64,
    pub alive: bool,
}

impl Ray {
    /// Ray leaving the crystal exit face on axis.
    pub fn launch(lambda: f64, theta_x: f64, theta_y: f64) -> Self {
        Ray {
            x: 0.0,
            y: 0.0,
            theta_x,
            theta_y,
            lambda,
            alive: true,
        }
    }

    pub fn is_paraxial(&self) -> bool {
        self.theta_x.abs() <= PARAXIAL_LIMIT && self.theta_y.abs() <= PARAXIAL_LIMIT
    }
}

/// Refraction at the planar exit face. Tangential wave-vector conservation
/// gives the external slopes θ = k_⊥ c / ω, i.e. sin θ_ext = n sin θ_int,
/// which reduces to θ_ext = n θ_int for small angles.
pub fn exit_refraction(k_internal: &Vector3<f64>, omega: f64) -> Result<Ray> {
    if !(k_internal.z > 0.0) {
        return Err(SimError::domain(
            "internal wave vector must point towards the exit face",
        ));
    }
    if !(omega > 0.0) {
        return Err(SimError::domain("angular frequency must be positive"));
    }
    let k0 = omega / crate::quantities::C;
    let (tx, ty) = (k_internal.x / k0, k_internal.y / k0);
    if tx * tx + ty * ty >= 1.0 {
        return Err(SimError::domain("total internal reflection at the exit face"));
    }
    Ok(Ray::launch(2.0 * std::f64::consts::PI / k0, tx, ty))
}

/// Inverse of [`exit_refraction`] for a medium of index `n`.
pub fn internal_wavevector(ray: &Ray, n: f64) -> Result<Vector3<f64>> {
    let k0 = 2.0 * std::f64::consts::PI / ray.lambda;
    let (kx, ky) = (k0 * ray.theta_x, k0 * ray.theta_y);
    let rem = (n * k0).powi(2) - kx * kx - ky * ky;
    if rem <= 0.0 {
        return Err(SimError::domain("ray cannot enter the crystal at this angle"));
    }
    Ok(Vector3::new(kx, ky, rem.sqrt()))
}

/// An element at an axial position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedElement {
    pub z: f64,
    pub element: OpticalElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalLayout {
    pub elements: Vec<PlacedElement>,
    pub detector_z: f64,
    pub detector: DetectorGeometry,
}

impl OpticalLayout {
    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for (i, p) in self.elements.iter().enumerate() {
            p.element.validate()?;
            if let OpticalElement::FreeSpace { .. } = p.element {
                return Err(SimError::domain(
                    "free space is implied by positions and cannot be placed",
                ));
            }
            if !(p.z > prev) {
                return Err(SimError::domain(format!(
                    "element {i} ({}) at z = {} m is not after the previous one",
                    p.element.label(),
                    p.z
                )));
            }
            prev = p.z;
        }
        if !(self.detector_z > prev) {
            return Err(SimError::domain("detector must come after the last element"));
        }
        self.detector.validate()
    }

    /// The element chain with free-space gaps made explicit.
    pub fn sequence(&self) -> Vec<OpticalElement> {
        let mut out = Vec::with_capacity(2 * self.elements.len() + 1);
        let mut z = 0.0;
        for p in &self.elements {
            out.push(OpticalElement::FreeSpace { d: p.z - z });
            out.push(p.element);
            z = p.z;
        }
        out.push(OpticalElement::FreeSpace { d: self.detector_z - z });
        out
    }

    /// Positions of all placed elements followed by the detector.
    pub fn positions(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.elements.iter().map(|p| p.z).collect();
        v.push(self.detector_z);
        v
    }

    /// Copy with position `index` replaced (`elements.len()` is the
    /// detector).
    pub fn with_position(&self, index: usize, z: f64) -> Self {
        let mut out = self.clone();
        if index == out.elements.len() {
            out.detector_z = z;
        } else {
            out.elements[index].z = z;
        }
        out
    }

    /// Wavelength at which the grating deflection vanishes, if any.
    pub fn design_wavelength(&self) -> Option<f64> {
        self.elements.iter().find_map(|p| match p.element {
            OpticalElement::TransmissionGrating { design_wavelength, .. } => Some(design_wavelength),
            _ => None,
        })
    }

    pub fn lens_indices(&self) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p.element, OpticalElement::ThinLens { .. }))
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn trace_elements(mut ray: Ray, elements: &[OpticalElement]) -> Ray {
    for e in elements {
        e.apply(&mut ray);
        if !ray.alive {
            break;
        }
    }
    ray
}

/// Ray at the detector plane; `alive == false` means clipped.
pub fn trace_ray(ray: Ray, layout: &OpticalLayout) -> Ray {
    trace_elements(ray, &layout.sequence())
}

/// Transverse plane for matrix optics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    X,
    Y,
}

/// 2×2 ray-transfer matrix of an element chain, linearized about the chief
/// ray at `lambda`.
pub fn transfer_matrix(elements: &[OpticalElement], plane: Plane, lambda: f64) -> Matrix2<f64> {
    let mut m = Matrix2::identity();
    for e in elements {
        let step = match *e {
            OpticalElement::FreeSpace { d } => Matrix2::new(1.0, d, 0.0, 1.0),
            OpticalElement::ThinLens { f } => Matrix2::new(1.0, 0.0, -1.0 / f, 1.0),
            OpticalElement::TransmissionGrating {
                groove_period, order, ..
            } if plane == Plane::X => {
                let beta = (order as f64 * lambda / groove_period).asin();
                Matrix2::new(beta.cos(), 0.0, 0.0, 1.0 / beta.cos())
            }
            _ => Matrix2::identity(),
        };
        m = step * m;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagingCharacteristics {
    /// Detector x per vacuum wavelength, m/m.
    pub dx_dlambda: f64,
    /// Detector y per external emission angle, m/rad.
    pub dy_dtheta: f64,
    /// x-extent over y-extent of the image of a monochromatic cone.
    pub squeeze_ratio: f64,
}

/// Probe rays used by [`imaging_characteristics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicsProbe {
    pub wavelength: f64,
    pub wavelength_step: f64,
    pub angle_step: f64,
    /// Half-angle of the monochromatic cone for the squeeze ratio.
    pub cone_half_angle: f64,
    pub cone_rays: usize,
}

impl CharacteristicsProbe {
    pub fn for_layout(layout: &OpticalLayout) -> Self {
        CharacteristicsProbe {
            wavelength: layout.design_wavelength().unwrap_or(660e-9),
            wavelength_step: 0.1e-9,
            angle_step: 1e-4,
            cone_half_angle: 1f64.to_radians(),
            cone_rays: 720,
        }
    }
}

pub fn imaging_characteristics(layout: &OpticalLayout, probe: &CharacteristicsProbe) -> Result<ImagingCharacteristics> {
    layout.validate()?;
    let seq = layout.sequence();
    let at = |lambda: f64, tx: f64, ty: f64| -> Result<Ray> {
        let r = trace_elements(Ray::launch(lambda, tx, ty), &seq);
        if !r.alive {
            return Err(SimError::domain("chief probe ray is clipped"));
        }
        if !r.is_paraxial() {
            return Err(SimError::Numeric("probe ray leaves the paraxial regime".into()));
        }
        Ok(r)
    };
    let (l0, dl, dt) = (probe.wavelength, probe.wavelength_step, probe.angle_step);
    let dx_dlambda = (at(l0 + dl, 0.0, 0.0)?.x - at(l0 - dl, 0.0, 0.0)?.x) / (2.0 * dl);
    let dy_dtheta = (at(l0, 0.0, dt)?.y - at(l0, 0.0, -dt)?.y) / (2.0 * dt);

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    let mut survivors = 0;
    for k in 0..probe.cone_rays {
        let psi = 2.0 * std::f64::consts::PI * k as f64 / probe.cone_rays as f64;
        let a = probe.cone_half_angle;
        let r = trace_elements(Ray::launch(l0, a * psi.cos(), a * psi.sin()), &seq);
        if !r.alive {
            continue;
        }
        if !r.is_paraxial() {
            return Err(SimError::Numeric("cone ray leaves the paraxial regime".into()));
        }
        survivors += 1;
        xmin = xmin.min(r.x);
        xmax = xmax.max(r.x);
        ymin = ymin.min(r.y);
        ymax = ymax.max(r.y);
    }
    if survivors < 2 || !(ymax > ymin) {
        return Err(SimError::domain("degenerate layout: cone image has no vertical extent"));
    }
    let out = ImagingCharacteristics {
        dx_dlambda,
        dy_dtheta,
        squeeze_ratio: (xmax - xmin) / (ymax - ymin),
    };
    if ![out.dx_dlambda, out.dy_dtheta, out.squeeze_ratio]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(SimError::Numeric("non-finite imaging characteristics".into()));
    }
    Ok(out)
}

/// Which positions move during the layout fit and how strongly deviations
/// from nominal are penalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutFitSettings {
    /// Indices into the position vector (`elements.len()` is the detector).
    pub free: Vec<usize>,
    /// Penalty weight per free position, 1/m².
    pub penalty_weights: Vec<f64>,
    pub optimizer: NelderMeadOptions,
}

impl LayoutFitSettings {
    /// Lenses free, no penalties.
    pub fn lenses(layout: &OpticalLayout) -> Self {
        let free = layout.lens_indices();
        LayoutFitSettings {
            penalty_weights: vec![0.0; free.len()],
            free,
            optimizer: NelderMeadOptions {
                max_iterations: 4000,
                f_tolerance: 1e-22,
                x_tolerance: 1e-7,
                // in millimetres
                initial_step: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayoutFit {
    pub layout: OpticalLayout,
    pub characteristics: ImagingCharacteristics,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize Σ ((c − c_target)/c_target)² + Σ w (z − z_nominal)² over the
/// free positions, starting at nominal. Positions are varied in
/// millimetres.
pub fn optimize_layout(
    nominal: &OpticalLayout,
    targets: &ImagingCharacteristics,
    settings: &LayoutFitSettings,
    probe: &CharacteristicsProbe,
) -> Result<LayoutFit> {
    nominal.validate()?;
    let t = [targets.dx_dlambda, targets.dy_dtheta, targets.squeeze_ratio];
    if !t.iter().all(|v| v.is_finite() && *v != 0.0) {
        return Err(SimError::domain("layout targets must be finite and nonzero"));
    }
    if settings.penalty_weights.len() != settings.free.len() {
        return Err(SimError::domain("one penalty weight per free position is required"));
    }
    let n_pos = nominal.elements.len() + 1;
    if settings.free.iter().any(|&i| i >= n_pos) {
        return Err(SimError::domain("free position index out of range"));
    }
    let z0 = nominal.positions();
    let build = |p: &[f64]| -> OpticalLayout {
        let mut l = nominal.clone();
        for (k, &i) in settings.free.iter().enumerate() {
            l = l.with_position(i, z0[i] + 1e-3 * p[k]);
        }
        l
    };
    let objective = |p: &[f64]| -> f64 {
        let l = build(p);
        let c = match imaging_characteristics(&l, probe) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        let c = [c.dx_dlambda, c.dy_dtheta, c.squeeze_ratio];
        let fit: f64 = (0..3).map(|i| ((c[i] - t[i]) / t[i]).powi(2)).sum();
        let pen: f64 = p
            .iter()
            .zip(&settings.penalty_weights)
            .map(|(d, w)| w * (1e-3 * d).powi(2))
            .sum();
        fit + pen
    };
    let start = vec![0.0; settings.free.len()];
    let mut best = nelder_mead(objective, &start, &settings.optimizer);
    for _ in 0..3 {
        let again = nelder_mead(objective, &best.x, &settings.optimizer);
        let improved = again.value < best.value;
        if improved {
            best.x = again.x;
            best.value = again.value;
        }
        best.iterations += again.iterations;
        best.converged = again.converged;
        if !improved {
            break;
        }
    }
    let layout = build(&best.x);
    let characteristics = imaging_characteristics(&layout, probe)?;
    Ok(LayoutFit {
        layout,
        characteristics,
        objective: best.value,
        iterations: best.iterations,
        converged: best.converged,
    })
}

/// Detector pixel hit by a ray leaving the crystal with external slopes
/// (θ_x, θ_y), or `None` if it is clipped or misses the sensor.
pub fn pixel_map(lambda: f64, theta_x: f64, theta_y: f64, layout: &OpticalLayout) -> Option<(usize, usize)> {
    let r = trace_ray(Ray::launch(lambda, theta_x, theta_y), layout);
    if !r.alive {
        return None;
    }
    layout.detector.pixel_of(r.x, r.y)
}
