//! Pixel-resolved expected counts, spectrum images, cuts, comparisons and
//! file formats.
//!
//! Each pixel is integrated separately over its preimage in external signal
//! coordinates (λ, θ_x, θ_y): a box sheared along the optics' λ–θ_x
//! degeneracy and padded so it contains every ray that lands on the pixel.
//! Samples are traced exactly and only those hitting the pixel contribute.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::Polarization;
use crate::error::{Result, SimError};
use crate::interaction::{PhysicsModel, ProcessKind};
use crate::mcint::estimator::{stream_rng, MomentAccumulator};
use crate::optics::{trace_elements, OpticalLayout, Ray};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry {
    pub n_x: usize,
    pub n_y: usize,
    /// Square pixel pitch, m.
    pub pitch: f64,
    /// Detector-plane position of the sensor centre, m.
    pub center_offset: [f64; 2],
    /// Illumination time T, s.
    pub illumination_time: f64,
    /// Lumped efficiency η.
    pub efficiency: f64,
}

impl DetectorGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_y == 0 {
            return Err(SimError::domain("detector needs at least one pixel per axis"));
        }
        if !(self.pitch > 0.0) {
            return Err(SimError::domain("pixel pitch must be positive"));
        }
        if !(self.illumination_time > 0.0) {
            return Err(SimError::domain("illumination time must be positive"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(SimError::domain(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }

    /// Pixel (i, j) containing detector-plane point (x, y). Column i grows
    /// with x; row j grows with −y (so with emission angle for an inverting
    /// system).
    pub fn pixel_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let u = (x - self.center_offset[0]) / self.pitch + 0.5 * self.n_x as f64;
        let v = 0.5 * self.n_y as f64 - (y - self.center_offset[1]) / self.pitch;
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let (i, j) = (u.floor() as usize, v.floor() as usize);
        (i < self.n_x && j < self.n_y).then_some((i, j))
    }

    /// Detector-plane x range of column i.
    pub fn column_bounds(&self, i: usize) -> (f64, f64) {
        let x0 = self.center_offset[0] + (i as f64 - 0.5 * self.n_x as f64) * self.pitch;
        (x0, x0 + self.pitch)
    }

    /// Detector-plane y range of row j (low, high).
    pub fn row_bounds(&self, j: usize) -> (f64, f64) {
        let y_hi = self.center_offset[1] + (0.5 * self.n_y as f64 - j as f64) * self.pitch;
        (y_hi - self.pitch, y_hi)
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        let (a, b) = self.column_bounds(i);
        let (c, d) = self.row_bounds(j);
        (0.5 * (a + b), 0.5 * (c + d))
    }
}

/// Linearized map between external signal coordinates and the detector,
/// built from the exact trace.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub design_wavelength: f64,
    /// dx/dλ along the chief ray.
    pub dx_dlambda: f64,
    /// dx/dθ_x at the design wavelength.
    pub dx_dtheta_x: f64,
    /// dy/dθ_y.
    pub dy_dtheta_y: f64,
    /// Column-centre wavelengths, m.
    pub wavelengths: Vec<f64>,
    /// Column-edge wavelengths (n_x + 1), m.
    pub wavelength_edges: Vec<f64>,
    /// Row-centre angles, rad.
    pub angles: Vec<f64>,
    /// Row-edge angles (n_y + 1), rad.
    pub angle_edges: Vec<f64>,
    /// Slit acceptance in θ_x at the design wavelength (−, +), or the cone
    /// limit when nothing clips.
    pub theta_x_acceptance: (f64, f64),
}

impl Calibration {
    pub fn new(layout: &OpticalLayout, max_angle: f64) -> Result<Self> {
        layout.validate()?;
        let seq = layout.sequence();
        let l0 = layout.design_wavelength().unwrap_or(660e-9);
        let trace = |l: f64, tx: f64, ty: f64| trace_elements(Ray::launch(l, tx, ty), &seq);
        let chief_x = |l: f64| {
            let r = trace(l, 0.0, 0.0);
            if r.alive {
                Ok(r.x)
            } else {
                Err(SimError::domain("chief ray is clipped"))
            }
        };
        let dl = 0.05e-9;
        let dx_dlambda = (chief_x(l0 + dl)? - chief_x(l0 - dl)?) / (2.0 * dl);
        let dt = 1e-6;
        let dx_dtheta_x = (trace(l0, dt, 0.0).x - trace(l0, -dt, 0.0).x) / (2.0 * dt);
        let dy_dtheta_y = (trace(l0, 0.0, dt).y - trace(l0, 0.0, -dt).y) / (2.0 * dt);
        if !(dx_dlambda.abs() > 0.0) {
            return Err(SimError::domain("layout has no wavelength dispersion along x"));
        }
        if !(dy_dtheta_y.abs() > 0.0) {
            return Err(SimError::domain("layout does not map emission angle onto y"));
        }
        let det = &layout.detector;

        // x → λ along the chief ray by bracketed bisection
        let invert = |x: f64| -> Result<f64> {
            let guess = l0 + (x - chief_x(l0)?) / dx_dlambda;
            let span = 0.05 * l0;
            let (mut a, mut b) = (guess - span, guess + span);
            let fa = chief_x(a)? - x;
            if fa * (chief_x(b)? - x) > 0.0 {
                return Err(SimError::Numeric("wavelength calibration bracket failed".into()));
            }
            let sa = fa.signum();
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if (chief_x(m)? - x).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            Ok(0.5 * (a + b))
        };
        let mut wavelength_edges = Vec::with_capacity(det.n_x + 1);
        for i in 0..=det.n_x {
            let x = if i < det.n_x {
                det.column_bounds(i).0
            } else {
                det.column_bounds(det.n_x - 1).1
            };
            wavelength_edges.push(invert(x)?);
        }
        let mut wavelengths = Vec::with_capacity(det.n_x);
        for i in 0..det.n_x {
            let (a, b) = det.column_bounds(i);
            wavelengths.push(invert(0.5 * (a + b))?);
        }
        let angle_of = |y: f64| y / dy_dtheta_y;
        let mut angle_edges: Vec<f64> = (0..det.n_y).map(|j| angle_of(row_edge(det, j, dy_dtheta_y))).collect();
        angle_edges.push(angle_of(row_edge(det, det.n_y, dy_dtheta_y)));
        let angles = (0..det.n_y)
            .map(|j| {
                let (a, b) = det.row_bounds(j);
                angle_of(0.5 * (a + b))
            })
            .collect();

        let survives = |tx: f64| trace(l0, tx, 0.0).alive;
        let accept = |sign: f64| -> f64 {
            if survives(sign * max_angle) {
                return max_angle;
            }
            let (mut a, mut b) = (0.0, max_angle);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if survives(sign * m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            b
        };
        if !survives(0.0) {
            return Err(SimError::domain("on-axis ray is clipped at the design wavelength"));
        }
        Ok(Calibration {
            design_wavelength: l0,
            dx_dlambda,
            dx_dtheta_x,
            dy_dtheta_y,
            wavelengths,
            wavelength_edges,
            angles,
            angle_edges,
            theta_x_acceptance: (accept(-1.0), accept(1.0)),
        })
    }
}

/// Row edges ordered so angles come out increasing.
fn row_edge(det: &DetectorGeometry, j: usize, dy_dtheta: f64) -> f64 {
    let top = det.center_offset[1] + 0.5 * det.n_y as f64 * det.pitch;
    let y = top - j as f64 * det.pitch;
    if dy_dtheta < 0.0 {
        y
    } else {
        // non-inverting system: mirror so that row 0 still has the lowest angle
        2.0 * det.center_offset[1] - y
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImageMetadata {
    pub process: String,
    pub seed: u64,
    pub samples_per_pixel: usize,
    pub config_hash: String,
    pub runtime_s: f64,
    pub extrapolation_notes: Vec<String>,
    pub diagnostics: Vec<String>,
}

/// Expected counts on the pixel grid, row-major with row j = angle index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumImage {
    pub n_x: usize,
    pub n_y: usize,
    pub counts: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Column-centre vacuum wavelengths, m.
    pub wavelengths: Vec<f64>,
    /// Row-centre external angles, rad.
    pub angles: Vec<f64>,
    pub metadata: ImageMetadata,
}

impl SpectrumImage {
    pub fn zeros(wavelengths: Vec<f64>, angles: Vec<f64>) -> Self {
        let (n_x, n_y) = (wavelengths.len(), angles.len());
        SpectrumImage {
            n_x,
            n_y,
            counts: vec![0.0; n_x * n_y],
            stderr: vec![0.0; n_x * n_y],
            wavelengths,
            angles,
            metadata: ImageMetadata::default(),
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.counts[self.index(i, j)]
    }

    pub fn total(&self) -> f64 {
        let mut acc = crate::mcint::estimator::CompensatedSum::default();
        for v in &self.counts {
            acc.add(*v);
        }
        acc.value()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.counts[j * self.n_x..(j + 1) * self.n_x]
    }

    /// Scale counts and errors by a constant.
    pub fn scaled(mut self, factor: f64) -> Self {
        for v in self.counts.iter_mut().chain(self.stderr.iter_mut()) {
            *v *= factor;
        }
        self
    }

    /// Replace expected counts with Poisson draws (stderr becomes √counts).
    pub fn poisson_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectrumImage> {
        use rand_distr::{Distribution, Poisson};
        let mut out = self.clone();
        for (c, s) in out.counts.iter_mut().zip(out.stderr.iter_mut()) {
            let draw = if *c > 0.0 {
                Poisson::new(*c)
                    .map_err(|e| SimError::Numeric(format!("Poisson draw: {e}")))?
                    .sample(rng)
            } else {
                0.0
            };
            *c = draw;
            *s = draw.sqrt();
        }
        out.metadata.diagnostics.push("Poisson frame".into());
        Ok(out)
    }
}

/// Which pixels to integrate and how hard.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub samples_per_pixel: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Emission half-angle bound in θ_x when nothing in the layout clips.
    pub max_angle: f64,
    /// Restrict to these rows; others stay zero.
    pub rows: Option<Vec<usize>>,
    /// Restrict to these columns; others stay zero.
    pub columns: Option<Vec<usize>>,
}

impl RenderSettings {
    pub fn new(samples_per_pixel: usize, seed: u64) -> Self {
        RenderSettings {
            samples_per_pixel,
            seed,
            threads: None,
            max_angle: 3f64.to_radians(),
            rows: None,
            columns: None,
        }
    }
}

/// Relative padding of the pixel preimage box in λ and θ_y.
const PREIMAGE_PAD: f64 = 0.1;
/// Relative padding of the slit acceptance in θ_x.
const ACCEPTANCE_PAD: f64 = 0.05;

/// Stream index for a pixel; independent of partitioning and thread count.
/// Both processes share it, so their signal modes coincide pixel by pixel.
fn pixel_stream(i: usize, j: usize, n_x: usize) -> u64 {
    (j * n_x + i) as u64
}

/// Expected counts R = ηT·(1 + N_th or N_th)·∫Γ over each pixel's preimage.
pub fn render_spectrum(
    model: &PhysicsModel,
    layout: &OpticalLayout,
    process: ProcessKind,
    settings: &RenderSettings,
) -> Result<SpectrumImage> {
    if settings.samples_per_pixel < 2 {
        return Err(SimError::domain("need at least two samples per pixel"));
    }
    let start = std::time::Instant::now();
    let cal = Calibration::new(layout, settings.max_angle)?;
    let det = layout.detector;
    let seq = layout.sequence();
    let mut image = SpectrumImage::zeros(cal.wavelengths.clone(), cal.angles.clone());
    let rows: Vec<usize> = match &settings.rows {
        Some(r) => r.iter().copied().filter(|&j| j < det.n_y).collect(),
        None => (0..det.n_y).collect(),
    };
    let cols: Vec<usize> = match &settings.columns {
        Some(c) => c.iter().copied().filter(|&i| i < det.n_x).collect(),
        None => (0..det.n_x).collect(),
    };
    let pixels: Vec<(usize, usize)> = rows.iter().flat_map(|&j| cols.iter().map(move |&i| (i, j))).collect();
    let pols = model.signal_polarizations();
    let scale = det.efficiency * det.illumination_time;

    let work = || -> Result<Vec<(usize, f64, f64)>> {
        pixels
            .par_iter()
            .map(|&(i, j)| {
                let est = integrate_pixel(model, &seq, &det, &cal, &pols, process, i, j, settings)?;
                Ok((j * det.n_x + i, est.0 * scale, est.1 * scale))
            })
            .collect()
    };
    let results = match settings.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| SimError::Numeric(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    for (k, v, s) in results {
        image.counts[k] = v;
        image.stderr[k] = s;
    }

    let lo = cal.wavelength_edges.iter().cloned().fold(f64::MAX, f64::min);
    let hi = cal.wavelength_edges.iter().cloned().fold(f64::MIN, f64::max);
    let w_p = model.omega_pump();
    let to_w = |l: f64| 2.0 * std::f64::consts::PI * crate::quantities::C / l;
    let q = process.idler_sign();
    let (wi_a, wi_b) = (q * (w_p - to_w(lo)), q * (w_p - to_w(hi)));
    let (wi_lo, wi_hi) = (
        wi_a.min(wi_b).max(model.settings.omega_floor),
        wi_a.max(wi_b).min(model.settings.omega_ceiling),
    );
    image.metadata = ImageMetadata {
        process: process.label().into(),
        seed: settings.seed,
        samples_per_pixel: settings.samples_per_pixel,
        runtime_s: start.elapsed().as_secs_f64(),
        extrapolation_notes: if wi_hi > wi_lo {
            model.crystal.dispersion.extrapolation_notes(wi_lo, wi_hi)
        } else {
            Vec::new()
        },
        ..Default::default()
    };
    if image.counts.iter().all(|&c| c == 0.0) {
        image
            .metadata
            .diagnostics
            .push("no accepted signal modes: image is all zero".into());
    }
    Ok(image)
}

/// (mean·volume, stderr·volume) for one pixel, before the ηT factor.
#[allow(clippy::too_many_arguments)]
fn integrate_pixel(
    model: &PhysicsModel,
    seq: &[crate::optics::OpticalElement],
    det: &DetectorGeometry,
    cal: &Calibration,
    pols: &[Polarization],
    process: ProcessKind,
    i: usize,
    j: usize,
    settings: &RenderSettings,
) -> Result<(f64, f64)> {
    let (l_a, l_b) = (cal.wavelength_edges[i], cal.wavelength_edges[i + 1]);
    let (l_lo, l_hi) = (l_a.min(l_b), l_a.max(l_b));
    let dl = l_hi - l_lo;
    let (l_lo, l_hi) = (l_lo - PREIMAGE_PAD * dl, l_hi + PREIMAGE_PAD * dl);
    let (t_a, t_b) = (cal.angle_edges[j], cal.angle_edges[j + 1]);
    let (ty_lo, ty_hi) = (t_a.min(t_b), t_a.max(t_b));
    let dty = ty_hi - ty_lo;
    let (ty_lo, ty_hi) = (ty_lo - PREIMAGE_PAD * dty, ty_hi + PREIMAGE_PAD * dty);
    let tx_lo = -(cal.theta_x_acceptance.0 * (1.0 + ACCEPTANCE_PAD)).min(settings.max_angle);
    let tx_hi = (cal.theta_x_acceptance.1 * (1.0 + ACCEPTANCE_PAD)).min(settings.max_angle);
    // λ shift that keeps x fixed as θ_x changes
    let shear = -cal.dx_dtheta_x / cal.dx_dlambda;
    let volume = (l_hi - l_lo) * (ty_hi - ty_lo) * (tx_hi - tx_lo);

    let mut rng = stream_rng(settings.seed, pixel_stream(i, j, det.n_x));
    let mut acc = MomentAccumulator::default();
    for _ in 0..settings.samples_per_pixel {
        let tx = tx_lo + (tx_hi - tx_lo) * rng.random::<f64>();
        let ty = ty_lo + (ty_hi - ty_lo) * rng.random::<f64>();
        let lambda = l_lo + (l_hi - l_lo) * rng.random::<f64>() + shear * tx;
        let ray = trace_elements(Ray::launch(lambda, tx, ty), seq);
        let hit = ray.alive && det.pixel_of(ray.x, ray.y) == Some((i, j));
        let mut value = 0.0;
        for &pol in pols {
            let signal = match model.signal_from_external(lambda, tx, ty, pol) {
                Ok(s) => s,
                Err(_) => continue,
            };
            // consume the idler draws even on a miss so streams stay aligned
            let term = model.weighted_signal_term(&signal, process, &mut rng)?;
            if hit {
                value += term * signal.external_jacobian();
            }
        }
        acc.push(value);
    }
    let est = acc.estimate();
    Ok((est.value * volume, est.stderr * volume))
}

/// Bin weighted rays (λ, θ_x, θ_y, weight) onto the detector. Returns the
/// grid and the summed weight of rays that landed on it.
pub fn bin_rays(layout: &OpticalLayout, rays: &[(f64, f64, f64, f64)]) -> (Vec<f64>, f64) {
    let det = &layout.detector;
    let seq = layout.sequence();
    let mut grid = vec![0.0; det.n_x * det.n_y];
    let mut landed = crate::mcint::estimator::CompensatedSum::default();
    for &(l, tx, ty, w) in rays {
        let r = trace_elements(Ray::launch(l, tx, ty), &seq);
        if !r.alive {
            continue;
        }
        if let Some((i, j)) = det.pixel_of(r.x, r.y) {
            grid[j * det.n_x + i] += w;
            landed.add(w);
        }
    }
    (grid, landed.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutAxis {
    /// Fixed angle, varying wavelength.
    Horizontal,
    /// Fixed wavelength, varying angle.
    Vertical,
}

/// A 1D profile in display units (nm or degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: CutAxis,
    /// Row (horizontal) or column (vertical) index used.
    pub index: usize,
    /// Actual coordinate of that row/column, display units.
    pub at: f64,
    pub coordinates: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn nearest(axis: &[f64], v: f64) -> Result<usize> {
    if axis.is_empty() {
        return Err(SimError::domain("empty axis"));
    }
    let step = if axis.len() > 1 {
        (axis[1] - axis[0]).abs()
    } else {
        f64::INFINITY
    };
    let (lo, hi) = (
        axis.iter().cloned().fold(f64::MAX, f64::min) - 0.5 * step,
        axis.iter().cloned().fold(f64::MIN, f64::max) + 0.5 * step,
    );
    if !(v >= lo && v <= hi) {
        return Err(SimError::domain(format!(
            "coordinate {v} outside calibrated range [{lo}, {hi}]"
        )));
    }
    Ok(axis
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
        .map(|(k, _)| k)
        .unwrap_or(0))
}

/// Nearest-row (horizontal, `coordinate` in rad) or nearest-column
/// (vertical, `coordinate` in m) extraction.
pub fn cut(image: &SpectrumImage, axis: CutAxis, coordinate: f64) -> Result<Profile> {
    match axis {
        CutAxis::Horizontal => {
            let j = nearest(&image.angles, coordinate)?;
            Ok(Profile {
                axis,
                index: j,
                at: image.angles[j].to_degrees(),
                coordinates: image.wavelengths.iter().map(|l| l * 1e9).collect(),
                values: image.row(j).to_vec(),
                stderr: image.stderr[j * image.n_x..(j + 1) * image.n_x].to_vec(),
            })
        }
        CutAxis::Vertical => {
            let i = nearest(&image.wavelengths, coordinate)?;
            Ok(Profile {
                axis,
                index: i,
                at: image.wavelengths[i] * 1e9,
                coordinates: image.angles.iter().map(|a| a.to_degrees()).collect(),
                values: (0..image.n_y).map(|j| image.get(i, j)).collect(),
                stderr: (0..image.n_y).map(|j| image.stderr[image.index(i, j)]).collect(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Sub-sample position from a parabola through the top three points.
    pub position: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima whose topographic prominence exceeds both
/// `min_rel_prominence`·max and `sigma_factor`·stderr at the peak.
pub fn find_peaks(values: &[f64], stderr: &[f64], min_rel_prominence: f64, sigma_factor: f64) -> Vec<Peak> {
    let n = values.len();
    let vmax = values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for k in 0..n {
        let v = values[k];
        let left_ok = k == 0 || values[k - 1] < v;
        let right_ok = k + 1 == n || values[k + 1] <= v;
        if !(left_ok && right_ok) || v <= 0.0 {
            continue;
        }
        // walk outwards until a higher point or the edge; keep the minima
        let mut lmin = v;
        let mut l = k;
        while l > 0 {
            l -= 1;
            if values[l] > v {
                break;
            }
            lmin = lmin.min(values[l]);
        }
        let mut rmin = v;
        let mut r = k;
        while r + 1 < n {
            r += 1;
            if values[r] > v {
                break;
            }
            rmin = rmin.min(values[r]);
        }
        let prominence = v - lmin.max(rmin);
        let noise = stderr.get(k).copied().unwrap_or(0.0);
        if prominence < min_rel_prominence * vmax || prominence < sigma_factor * noise {
            continue;
        }
        let position = if k > 0 && k + 1 < n {
            let (a, b, c) = (values[k - 1], v, values[k + 1]);
            let den = a - 2.0 * b + c;
            if den < 0.0 {
                k as f64 + 0.5 * (a - c) / den
            } else {
                k as f64
            }
        } else {
            k as f64
        };
        out.push(Peak {
            index: k,
            position,
            height: v,
            prominence,
        });
    }
    out
}

/// Linear interpolation of a calibration axis at a fractional index.
pub fn axis_at(axis: &[f64], position: f64) -> f64 {
    let k = (position.floor().max(0.0) as usize).min(axis.len().saturating_sub(2));
    let t = position - k as f64;
    axis[k] + t * (axis[k + 1] - axis[k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDelta {
    pub simulated_nm: f64,
    pub measured_nm: f64,
    pub delta_nm: f64,
    pub height_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMetrics {
    pub pixels: usize,
    pub mean_residual: f64,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
    /// Σ r²/(σ_sim² + σ_meas²) / dof over pixels with nonzero combined error.
    pub chi2_per_dof: Option<f64>,
    pub peaks: Vec<PeakDelta>,
}

/// Bilinear value of `img` at (λ, θ); `None` outside its axes.
fn bilinear(img: &SpectrumImage, data: &[f64], lambda: f64, theta: f64) -> Option<f64> {
    let frac = |axis: &[f64], v: f64| -> Option<f64> {
        if axis.len() == 1 {
            return ((v - axis[0]).abs() <= f64::EPSILON * v.abs().max(1.0)).then_some(0.0);
        }
        let inc = axis[1] > axis[0];
        let (a, b) = (axis[0], axis[axis.len() - 1]);
        let tol = 1e-9 * (b - a).abs();
        if (inc && (v < a - tol || v > b + tol)) || (!inc && (v > a + tol || v < b - tol)) {
            return None;
        }
        let mut k = 0;
        while k + 2 < axis.len() && ((inc && axis[k + 1] <= v) || (!inc && axis[k + 1] >= v)) {
            k += 1;
        }
        Some((k as f64 + (v - axis[k]) / (axis[k + 1] - axis[k])).clamp(0.0, (axis.len() - 1) as f64))
    };
    let u = frac(&img.wavelengths, lambda)?;
    let v = frac(&img.angles, theta)?;
    let (i0, j0) = (u.floor() as usize, v.floor() as usize);
    let (i1, j1) = ((i0 + 1).min(img.n_x - 1), (j0 + 1).min(img.n_y - 1));
    let (tu, tv) = (u - i0 as f64, v - j0 as f64);
    let at = |i: usize, j: usize| data[j * img.n_x + i];
    Some(
        (1.0 - tu) * (1.0 - tv) * at(i0, j0)
            + tu * (1.0 - tv) * at(i1, j0)
            + (1.0 - tu) * tv * at(i0, j1)
            + tu * tv * at(i1, j1),
    )
}

/// Compare a simulated image with a measured grid resampled onto the
/// simulation axes. Refuses differing config hashes unless
/// `allow_hash_mismatch` is set (an empty hash on the measured side is
/// accepted).
pub fn compare_spectra(
    sim: &SpectrumImage,
    measured: &SpectrumImage,
    allow_hash_mismatch: bool,
) -> Result<ComparisonMetrics> {
    let (hs, hm) = (&sim.metadata.config_hash, &measured.metadata.config_hash);
    if !allow_hash_mismatch && !hm.is_empty() && hs != hm {
        return Err(SimError::Config(format!("config hash mismatch: {hs} vs {hm}")));
    }
    let mut residuals = Vec::new();
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    let mut resampled = vec![f64::NAN; sim.counts.len()];
    for j in 0..sim.n_y {
        for i in 0..sim.n_x {
            let (l, t) = (sim.wavelengths[i], sim.angles[j]);
            let (Some(m), Some(ms)) = (
                bilinear(measured, &measured.counts, l, t),
                bilinear(measured, &measured.stderr, l, t),
            ) else {
                continue;
            };
            let k = sim.index(i, j);
            resampled[k] = m;
            let r = sim.counts[k] - m;
            residuals.push(r);
            let var = sim.stderr[k].powi(2) + ms.powi(2);
            if var > 0.0 {
                chi2 += r * r / var;
                dof += 1;
            }
        }
    }
    if residuals.is_empty() {
        return Err(SimError::domain("simulated and measured axes do not overlap"));
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    // peaks of the angle-integrated spectra
    let column_sum = |data: &[f64]| -> Vec<f64> {
        (0..sim.n_x)
            .map(|i| {
                (0..sim.n_y)
                    .map(|j| data[j * sim.n_x + i])
                    .filter(|v| v.is_finite())
                    .sum()
            })
            .collect()
    };
    let s_spec = column_sum(&sim.counts);
    let m_spec = column_sum(&resampled);
    let zeros = vec![0.0; sim.n_x];
    let s_peaks = find_peaks(&s_spec, &zeros, 0.05, 0.0);
    let m_peaks = find_peaks(&m_spec, &zeros, 0.05, 0.0);
    let peaks = s_peaks
        .iter()
        .filter_map(|sp| {
            let mp = m_peaks.iter().min_by(|a, b| {
                (a.position - sp.position)
                    .abs()
                    .total_cmp(&(b.position - sp.position).abs())
            })?;
            let s_nm = axis_at(&sim.wavelengths, sp.position) * 1e9;
            let m_nm = axis_at(&sim.wavelengths, mp.position) * 1e9;
            Some(PeakDelta {
                simulated_nm: s_nm,
                measured_nm: m_nm,
                delta_nm: m_nm - s_nm,
                height_ratio: mp.height / sp.height,
            })
        })
        .collect();
    Ok(ComparisonMetrics {
        pixels: residuals.len(),
        mean_residual: mean,
        rms_residual: rms,
        max_abs_residual: max_abs,
        chi2_per_dof: (dof > 0).then(|| chi2 / dof as f64),
        peaks,
    })
}

/// Write a grid as CSV: comment lines with provenance, a header row of
/// column wavelengths (nm), then one row per angle (degrees first).
pub fn write_csv(path: &Path, image: &SpectrumImage, data: &[f64], quantity: &str) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# quantity,{quantity}");
    let _ = writeln!(s, "# process,{}", image.metadata.process);
    let _ = writeln!(s, "# config_hash,{}", image.metadata.config_hash);
    let _ = writeln!(s, "# seed,{}", image.metadata.seed);
    let _ = writeln!(s, "# samples_per_pixel,{}", image.metadata.samples_per_pixel);
    s.push_str("theta_deg\\lambda_nm");
    for l in &image.wavelengths {
        let _ = write!(s, ",{:.17e}", l * 1e9);
    }
    s.push('\n');
    for j in 0..image.n_y {
        let _ = write!(s, "{:.17e}", image.angles[j].to_degrees());
        for i in 0..image.n_x {
            let _ = write!(s, ",{:.17e}", data[j * image.n_x + i]);
        }
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| SimError::io(path, e))
}

/// Read a CSV grid written by [`write_csv`] (or any file with the same
/// header convention). Returns the image with the grid in `counts`.
pub fn read_csv(path: &Path) -> Result<SpectrumImage> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_csv(&text).map_err(|e| match e {
        SimError::Format(m) => SimError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_csv(text: &str) -> Result<SpectrumImage> {
    let mut hash = String::new();
    let mut process = String::new();
    let mut header: Option<Vec<f64>> = None;
    let mut angles = Vec::new();
    let mut data = Vec::new();
    let num = |s: &str, line: usize| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| SimError::Format(format!("line {line}: cannot parse number {s:?}")))
    };
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.trim().splitn(2, ',');
            match (parts.next(), parts.next()) {
                (Some("config_hash"), Some(v)) => hash = v.trim().to_string(),
                (Some("process"), Some(v)) => process = v.trim().to_string(),
                _ => {}
            }
            continue;
        }
        let mut fields = line.split(',');
        let first = fields.next().unwrap_or_default();
        if header.is_none() {
            if first.trim().parse::<f64>().is_ok() {
                return Err(SimError::Format(format!(
                    "line {line_no}: missing wavelength header row"
                )));
            }
            header = Some(fields.map(|f| num(f, line_no)).collect::<Result<_>>()?);
            continue;
        }
        angles.push(num(first, line_no)?.to_radians());
        let row: Vec<f64> = fields.map(|f| num(f, line_no)).collect::<Result<_>>()?;
        if row.len() != header.as_ref().map_or(0, |h| h.len()) {
            return Err(SimError::Format(format!(
                "line {line_no}: row length does not match header"
            )));
        }
        data.extend(row);
    }
    let wavelengths: Vec<f64> = header
        .ok_or_else(|| SimError::Format("no header row".into()))?
        .iter()
        .map(|l| l * 1e-9)
        .collect();
    if angles.is_empty() || wavelengths.is_empty() {
        return Err(SimError::Format("empty grid".into()));
    }
    let mut img = SpectrumImage::zeros(wavelengths, angles);
    img.counts = data;
    img.metadata.config_hash = hash;
    img.metadata.process = process;
    Ok(img)
}

/// Read counts and their stderr grid into one image.
pub fn read_image(counts: &Path, stderr: Option<&Path>) -> Result<SpectrumImage> {
    let mut img = read_csv(counts)?;
    if let Some(p) = stderr {
        let s = read_csv(p)?;
        if s.n_x != img.n_x || s.n_y != img.n_y {
            return Err(SimError::Format("stderr grid shape differs from counts".into()));
        }
        img.stderr = s.counts;
    }
    Ok(img)
}

/// 16-bit binary PGM scaled to the image maximum, row 0 at the bottom so
/// the angle axis points up.
pub fn write_pgm(path: &Path, image: &SpectrumImage) -> Result<()> {
    let max = image.counts.iter().cloned().fold(0.0, f64::max);
    let mut buf = Vec::with_capacity(image.counts.len() * 2 + 32);
    let _ = write!(buf, "P5\n{} {}\n65535\n", image.n_x, image.n_y);
    for j in (0..image.n_y).rev() {
        for i in 0..image.n_x {
            let v = if max > 0.0 { image.get(i, j) / max } else { 0.0 };
            let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            buf.extend_from_slice(&q.to_be_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| SimError::io(path, e))
}

pub fn write_metadata(path: &Path, meta: &ImageMetadata) -> Result<()> {
    let text = toml::to_string(meta).map_err(|e| SimError::Format(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| SimError::io(path, e))
}
