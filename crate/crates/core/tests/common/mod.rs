#![allow(dead_code)]

use std::f64::consts::PI;

use pdcsim::dispersion::{DispersionModel, Polarization};
use pdcsim::interaction::ProcessKind;

pub const C: f64 = 299_792_458.0;

/// Δk_z = 0 loci for a signal leaving the crystal at external angle `theta`
/// in the y–z plane, pump along z, optic axis along x. Every wave then
/// travels perpendicular to the axis, so principal indices are exact.
pub struct PhasematchOracle<'a> {
    pub dispersion: &'a DispersionModel,
    pub pump_wavelength: f64,
    pub poling_period: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Locus {
    pub wavelength: f64,
    pub forward_idler: bool,
    pub idler_thz: f64,
}

impl PhasematchOracle<'_> {
    fn index(&self, omega: f64, pol: Polarization) -> f64 {
        let p = self.dispersion.principal_indices(omega).unwrap();
        match pol {
            Polarization::Ordinary => p.n_o,
            Polarization::Extraordinary => p.n_e,
        }
    }

    /// Δk_z for the forward (`true`) or backward idler branch.
    #[allow(clippy::too_many_arguments)]
    pub fn mismatch(
        &self,
        lambda_s: f64,
        theta: f64,
        order: i32,
        process: ProcessKind,
        pol_s: Polarization,
        pol_i: Polarization,
        forward: bool,
    ) -> Option<f64> {
        let q = match process {
            ProcessKind::DownConversion => 1.0,
            ProcessKind::UpConversion => -1.0,
        };
        let w_p = 2.0 * PI * C / self.pump_wavelength;
        let w_s = 2.0 * PI * C / lambda_s;
        let w_i = q * (w_p - w_s);
        if w_i <= 0.0 {
            return None;
        }
        let k_p = self.index(w_p, Polarization::Extraordinary) * w_p / C;
        let k_perp = w_s / C * theta.sin();
        let k_s = self.index(w_s, pol_s) * w_s / C;
        let k_i = self.index(w_i, pol_i) * w_i / C;
        if k_i < k_perp {
            return None;
        }
        let k_sz = (k_s * k_s - k_perp * k_perp).sqrt();
        let k_iz = (k_i * k_i - k_perp * k_perp).sqrt() * if forward { 1.0 } else { -1.0 };
        Some(k_p - k_sz - q * k_iz + 2.0 * PI * order as f64 / self.poling_period)
    }

    /// All roots in [lo, hi] by a fine scan and bisection.
    #[allow(clippy::too_many_arguments)]
    pub fn loci(
        &self,
        theta: f64,
        order: i32,
        process: ProcessKind,
        pol_s: Polarization,
        pol_i: Polarization,
        lo: f64,
        hi: f64,
    ) -> Vec<Locus> {
        let steps = 16_000;
        let mut out = Vec::new();
        for forward in [true, false] {
            let g = |l: f64| self.mismatch(l, theta, order, process, pol_s, pol_i, forward);
            let mut prev: Option<(f64, f64)> = None;
            for k in 0..=steps {
                let l = lo + (hi - lo) * k as f64 / steps as f64;
                match g(l) {
                    Some(v) => {
                        if let Some((pl, pv)) = prev {
                            if pv * v < 0.0 {
                                let (mut a, mut b, mut ga) = (pl, l, pv);
                                for _ in 0..200 {
                                    let m = 0.5 * (a + b);
                                    let gm = g(m).unwrap();
                                    if gm * ga <= 0.0 {
                                        b = m;
                                    } else {
                                        a = m;
                                        ga = gm;
                                    }
                                    if b - a < 1e-18 {
                                        break;
                                    }
                                }
                                let wl = 0.5 * (a + b);
                                let nu = (C / wl - C / self.pump_wavelength).abs() * 1e-12;
                                out.push(Locus {
                                    wavelength: wl,
                                    forward_idler: forward,
                                    idler_thz: nu,
                                });
                            }
                        }
                        prev = Some((l, v));
                    }
                    None => prev = None,
                }
            }
        }
        out.sort_by(|a, b| a.wavelength.total_cmp(&b.wavelength));
        out
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod over [a, b] with interior breakpoints.
/// Bisects the worst interval until the summed error estimate is below
/// `rel_tol`·|I| or `max_intervals` is reached.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut parts: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || parts.len() >= max_intervals {
            return (total, err);
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}
