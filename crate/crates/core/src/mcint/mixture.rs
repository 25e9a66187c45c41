//! Three-Gaussian surrogate of sinc²(x) and the proposal densities built
//! from it.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Result, SimError};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Half-width of the fit domain, in units of x.
pub const FIT_HALF_WIDTH: f64 = 4.0 * PI;
/// Grid points on [0, FIT_HALF_WIDTH] (the target is even).
pub const FIT_GRID_POINTS: usize = 4001;

/// Σ aᵢ exp(−bᵢ x²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture3 {
    pub weights: [f64; 3],
    pub inv_widths: [f64; 3],
}

/// Fit result together with the quality figures that are stored next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureArtifact {
    pub mixture: GaussianMixture3,
    pub domain: [f64; 2],
    pub grid_points: usize,
    pub rms_residual: f64,
    /// max |mixture − sinc²| on [−π, π]
    pub sup_error_central_lobe: f64,
    /// Σ aᵢ√(π/bᵢ) / π
    pub mass_ratio: f64,
    pub iterations: usize,
}

/// Frozen output of [`fit_sinc_sq_mixture`].
pub const BUNDLED_MIXTURE: &str = include_str!("../../data/sinc_sq_mixture.toml");

impl MixtureArtifact {
    pub fn bundled() -> &'static MixtureArtifact {
        static ART: OnceLock<MixtureArtifact> = OnceLock::new();
        ART.get_or_init(|| MixtureArtifact::from_toml(BUNDLED_MIXTURE).expect("bundled mixture artifact parses"))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::Format(format!("mixture artifact: {e}")))
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub fn sinc_sq(x: f64) -> f64 {
    let s = sinc(x);
    s * s
}

impl GaussianMixture3 {
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        (0..3).map(|i| self.weights[i] * (-self.inv_widths[i] * x2).exp()).sum()
    }

    /// ∫ mixture dx = Σ aᵢ√(π/bᵢ).
    pub fn mass(&self) -> f64 {
        (0..3).map(|i| self.weights[i] * (PI / self.inv_widths[i]).sqrt()).sum()
    }

    /// Max |mixture − sinc²| on a uniform grid over [−half, half].
    pub fn sup_error(&self, half: f64, points: usize) -> f64 {
        (0..points)
            .map(|k| {
                let x = -half + 2.0 * half * k as f64 / (points - 1) as f64;
                (self.eval(x) - sinc_sq(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// The bundled fit.
    pub fn default_fit() -> &'static GaussianMixture3 {
        &MixtureArtifact::bundled().mixture
    }
}

fn unpack(p: &[f64]) -> GaussianMixture3 {
    let z = [0.0, p[3], p[4]];
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
    let total: f64 = e.iter().sum();
    GaussianMixture3 {
        weights: [e[0] / total, e[1] / total, e[2] / total],
        inv_widths: [p[0].exp(), p[1].exp(), p[2].exp()],
    }
}

/// Least-squares fit of a non-negative three-Gaussian mixture to sinc²(x)
/// on [−4π, 4π], with the weights constrained to sum to one so the value
/// at the origin is exact. Non-negative weights keep the mixture usable as
/// a sampling density.
pub fn fit_sinc_sq_mixture() -> Result<MixtureArtifact> {
    let grid: Vec<(f64, f64)> = (0..FIT_GRID_POINTS)
        .map(|k| {
            let x = FIT_HALF_WIDTH * k as f64 / (FIT_GRID_POINTS - 1) as f64;
            (x, sinc_sq(x))
        })
        .collect();
    let objective = |p: &[f64]| -> f64 {
        let m = unpack(p);
        grid.iter().map(|&(x, y)| (m.eval(x) - y).powi(2)).sum()
    };
    let opts = NelderMeadOptions {
        max_iterations: 20_000,
        f_tolerance: 1e-15,
        x_tolerance: 1e-11,
        initial_step: 0.5,
    };
    let start = [0.4f64.ln(), 0.05f64.ln(), 0.007f64.ln(), -3.0, -5.0];
    let mut best = nelder_mead(objective, &start, &opts);
    // restart once from the optimum to shake off a collapsed simplex
    let again = nelder_mead(objective, &best.x, &opts);
    if again.value <= best.value {
        best.x = again.x;
        best.value = again.value;
        best.iterations += again.iterations;
    }
    let mut m = unpack(&best.x);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| m.inv_widths[b].total_cmp(&m.inv_widths[a]));
    m = GaussianMixture3 {
        weights: order.map(|i| m.weights[i]),
        inv_widths: order.map(|i| m.inv_widths[i]),
    };

    let artifact = MixtureArtifact {
        mixture: m,
        domain: [-FIT_HALF_WIDTH, FIT_HALF_WIDTH],
        grid_points: 2 * FIT_GRID_POINTS - 1,
        rms_residual: (best.value / FIT_GRID_POINTS as f64).sqrt(),
        sup_error_central_lobe: m.sup_error(PI, 10_001),
        mass_ratio: m.mass() / PI,
        iterations: best.iterations,
    };
    let ok = m.inv_widths.iter().all(|&b| b > 0.0 && b.is_finite())
        && (m.eval(0.0) - 1.0).abs() <= 0.02
        && artifact.sup_error_central_lobe <= 0.05
        && (artifact.mass_ratio - 1.0).abs() <= 0.05;
    if !ok {
        return Err(SimError::Numeric(format!("sinc² mixture fit failed: {artifact:?}")));
    }
    Ok(artifact)
}

/// Standard-normal mass on [lo, hi], computed on the tail side for accuracy.
fn normal_mass(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if lo >= 0.0 {
        0.5 * (erfc(lo / SQRT_2) - erfc(hi / SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (erfc(-hi / SQRT_2) - erfc(-lo / SQRT_2))
    } else {
        1.0 - 0.5 * erfc(-lo / SQRT_2) - 0.5 * erfc(hi / SQRT_2)
    }
}

/// Inverse-CDF draw from a standard normal truncated to [lo, hi].
fn truncated_normal(lo: f64, hi: f64, v: f64) -> f64 {
    let x = if lo >= 0.0 {
        let (qa, qb) = (0.5 * erfc(lo / SQRT_2), 0.5 * erfc(hi / SQRT_2));
        SQRT_2 * erfc_inv(2.0 * (qa - v * (qa - qb)))
    } else if hi <= 0.0 {
        -truncated_normal(-hi, -lo, v)
    } else {
        let (pa, pb) = (0.5 * erfc(-lo / SQRT_2), 0.5 * erfc(-hi / SQRT_2));
        let p = pa + v * (pb - pa);
        -SQRT_2 * erfc_inv(2.0 * p)
    };
    if x.is_finite() {
        x.clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Normalized sampling density in the scaled coordinate x: the sinc²
/// mixture plus a small Cauchy component whose 1/x² tail matches the sinc²
/// envelope, so f/p stays bounded far from the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincSqProposal {
    fractions: [f64; 3],
    sigmas: [f64; 3],
    cauchy_fraction: f64,
    cauchy_scale: f64,
}

pub const DEFENSIVE_FRACTION: f64 = 0.05;

impl SincSqProposal {
    pub fn new(m: &GaussianMixture3, defensive_fraction: f64, cauchy_scale: f64) -> Self {
        let total = m.mass();
        let mut fractions = [0.0; 3];
        let mut sigmas = [0.0; 3];
        for i in 0..3 {
            fractions[i] = (1.0 - defensive_fraction) * m.weights[i] * (PI / m.inv_widths[i]).sqrt() / total;
            sigmas[i] = 1.0 / (2.0 * m.inv_widths[i]).sqrt();
        }
        SincSqProposal {
            fractions,
            sigmas,
            cauchy_fraction: defensive_fraction,
            cauchy_scale,
        }
    }

    pub fn from_default_fit() -> Self {
        Self::new(GaussianMixture3::default_fit(), DEFENSIVE_FRACTION, 1.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let mut p = 0.0;
        for i in 0..3 {
            let z = x / self.sigmas[i];
            p += self.fractions[i] * (-0.5 * z * z).exp() / (self.sigmas[i] * (2.0 * PI).sqrt());
        }
        let g = self.cauchy_scale;
        p + self.cauchy_fraction / (PI * g * (1.0 + (x / g) * (x / g)))
    }

    /// Probability mass on [lo, hi].
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        self.component_masses(lo, hi).iter().sum()
    }

    fn component_masses(&self, lo: f64, hi: f64) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (mi, (f, s)) in m.iter_mut().zip(self.fractions.iter().zip(&self.sigmas)) {
            *mi = f * normal_mass(lo / s, hi / s);
        }
        let g = self.cauchy_scale;
        m[3] = self.cauchy_fraction * ((hi / g).atan() - (lo / g).atan()) / PI;
        m
    }

    /// Draw from the density restricted to [lo, hi]; returns the point and
    /// the truncated density there, or `None` if the interval carries no
    /// mass.
    pub fn sample_truncated<R: Rng + ?Sized>(&self, rng: &mut R, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let masses = self.component_masses(lo, hi);
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let mut pick = rng.random::<f64>() * total;
        let mut comp = 3;
        for (i, m) in masses.iter().enumerate() {
            if pick < *m {
                comp = i;
                break;
            }
            pick -= m;
        }
        let v: f64 = rng.random();
        let x = if comp < 3 {
            let s = self.sigmas[comp];
            s * truncated_normal(lo / s, hi / s, v)
        } else {
            let g = self.cauchy_scale;
            let (a, b) = ((lo / g).atan(), (hi / g).atan());
            (g * (a + v * (b - a)).tan()).clamp(lo, hi)
        };
        Some((x, self.pdf(x) / total))
    }
}

/// Angular proposal on the circle: a wrapped normal about `mean` mixed with
/// a uniform floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedNormalProposal {
    pub mean: f64,
    pub sigma: f64,
    pub uniform_fraction: f64,
}

impl WrappedNormalProposal {
    pub const MAX_SIGMA: f64 = 2.0;

    pub fn new(mean: f64, sigma: f64, uniform_fraction: f64) -> Self {
        WrappedNormalProposal {
            mean,
            sigma: sigma.clamp(1e-9, Self::MAX_SIGMA),
            uniform_fraction,
        }
    }

    pub fn pdf(&self, phi: f64) -> f64 {
        let d = wrap_angle(phi - self.mean);
        let s = self.sigma;
        let norm = 1.0 / (s * (2.0 * PI).sqrt());
        let wrapped: f64 = (-4..=4)
            .map(|k| {
                let z = (d + 2.0 * PI * k as f64) / s;
                norm * (-0.5 * z * z).exp()
            })
            .sum();
        (1.0 - self.uniform_fraction) * wrapped + self.uniform_fraction / (2.0 * PI)
    }

    /// Sample in [−π, π).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let phi = if rng.random::<f64>() < self.uniform_fraction {
            -PI + 2.0 * PI * rng.random::<f64>()
        } else {
            let v: f64 = rng.random::<f64>().clamp(1e-300, 1.0 - 1e-16);
            let z = -SQRT_2 * erfc_inv(2.0 * v);
            wrap_angle(self.mean + self.sigma * z)
        };
        (phi, self.pdf(phi))
    }
}

/// Map to [−π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}
