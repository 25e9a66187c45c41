//! Refractive-index models for a uniaxial crystal.
//!
//! Two coefficient branches are kept side by side: a temperature-dependent
//! Sellmeier form for the visible/near-infrared and low-order polynomials for
//! the terahertz range. The branch is chosen from the optical frequency.
//! Directional dependence of the extraordinary index follows the uniaxial
//! index ellipsoid.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::quantities::C;

/// Coefficient file shipped with the crate.
pub const BUNDLED_MGO_LN: &str = include_str!("../data/mgo_ln.toml");

/// Frequencies below this (Hz) use the terahertz branch.
pub const BRANCH_SPLIT_HZ: f64 = 50e12;

/// Relative step for the centered difference in [`DispersionModel::group_index`].
pub const GROUP_INDEX_REL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[serde(alias = "o")]
    Ordinary,
    #[serde(alias = "e")]
    Extraordinary,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::Extraordinary, Polarization::Ordinary];

    pub fn short(self) -> &'static str {
        match self {
            Polarization::Ordinary => "o",
            Polarization::Extraordinary => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Visible,
    Thz,
}

/// One record of the coefficient file, as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSet {
    pub branch: Branch,
    pub polarization: Polarization,
    pub form: String,
    pub validity: [f64; 2],
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub version: u32,
    #[serde(default)]
    pub material: String,
    pub set: Vec<CoefficientSet>,
}

impl CoefficientFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::Format(format!("coefficient file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Format(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum IndexFormula {
    /// Temperature-dependent extended Sellmeier form, λ in µm and T in °C.
    GayerSellmeier {
        a: [f64; 6],
        b: [f64; 4],
    },
    /// n = Σ c_k ν^k with ν in THz.
    Polynomial(Vec<f64>),
    Constant(f64),
}

impl IndexFormula {
    fn from_set(set: &CoefficientSet) -> Result<Self> {
        let c = &set.coefficients;
        match set.form.as_str() {
            "gayer-sellmeier" => {
                if c.len() != 10 {
                    return Err(SimError::Format(format!(
                        "gayer-sellmeier needs 10 coefficients, got {}",
                        c.len()
                    )));
                }
                let mut a = [0.0; 6];
                let mut b = [0.0; 4];
                a.copy_from_slice(&c[..6]);
                b.copy_from_slice(&c[6..]);
                Ok(IndexFormula::GayerSellmeier { a, b })
            }
            "polynomial" => {
                if c.is_empty() {
                    return Err(SimError::Format("polynomial needs coefficients".into()));
                }
                Ok(IndexFormula::Polynomial(c.clone()))
            }
            "constant" => match c.as_slice() {
                [n] => Ok(IndexFormula::Constant(*n)),
                _ => Err(SimError::Format("constant needs exactly one coefficient".into())),
            },
            other => Err(SimError::Format(format!("unknown index form '{other}'"))),
        }
    }

    fn eval(&self, omega: f64, temperature_c: f64) -> f64 {
        match self {
            IndexFormula::GayerSellmeier { a, b } => {
                let lambda_um = 2.0 * PI * C / omega * 1e6;
                let l2 = lambda_um * lambda_um;
                let f = (temperature_c - 24.5) * (temperature_c + 570.82);
                let pole1 = a[2] + b[2] * f;
                let n2 =
                    a[0] + b[0] * f + (a[1] + b[1] * f) / (l2 - pole1 * pole1) + (a[3] + b[3] * f) / (l2 - a[4] * a[4])
                        - a[5] * l2;
                n2.max(0.0).sqrt()
            }
            IndexFormula::Polynomial(c) => {
                let nu_thz = omega / (2.0 * PI * 1e12);
                c.iter().rev().fold(0.0, |acc, &ck| acc * nu_thz + ck)
            }
            IndexFormula::Constant(n) => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledSet {
    formula: IndexFormula,
    /// Validity interval in rad/s.
    omega_range: [f64; 2],
}

impl CompiledSet {
    fn contains(&self, omega: f64) -> bool {
        omega >= self.omega_range[0] && omega <= self.omega_range[1]
    }
}

/// Principal indices at one frequency, with the extrapolation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalIndices {
    pub n_o: f64,
    pub n_e: f64,
    pub extrapolated: bool,
}

impl PrincipalIndices {
    pub fn get(&self, pol: Polarization) -> f64 {
        match pol {
            Polarization::Ordinary => self.n_o,
            Polarization::Extraordinary => self.n_e,
        }
    }

    /// Index along a direction making cos ψ with the optic axis.
    pub fn along(&self, pol: Polarization, cos_to_axis: f64) -> f64 {
        directional_index(self.n_o, self.n_e, pol, cos_to_axis)
    }
}

/// Index-ellipsoid evaluation: 1/n² = cos²ψ/n_o² + sin²ψ/n_e² for the
/// extraordinary wave, n_o for the ordinary one.
pub fn directional_index(n_o: f64, n_e: f64, pol: Polarization, cos_to_axis: f64) -> f64 {
    match pol {
        Polarization::Ordinary => n_o,
        Polarization::Extraordinary => {
            let c2 = (cos_to_axis * cos_to_axis).min(1.0);
            let s2 = 1.0 - c2;
            1.0 / (c2 / (n_o * n_o) + s2 / (n_e * n_e)).sqrt()
        }
    }
}

/// Ordinary and extraordinary index models over the visible and THz ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    visible: [CompiledSet; 2],
    thz: [CompiledSet; 2],
    temperature_k: f64,
    file: CoefficientFile,
}

fn pol_slot(pol: Polarization) -> usize {
    match pol {
        Polarization::Ordinary => 0,
        Polarization::Extraordinary => 1,
    }
}

impl DispersionModel {
    /// Bundled MgO:LiNbO₃ data at the given crystal temperature.
    pub fn bundled(temperature_k: f64) -> Result<Self> {
        Self::from_toml(BUNDLED_MGO_LN, temperature_k)
    }

    pub fn from_file(path: impl AsRef<Path>, temperature_k: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| SimError::io(path, e))?;
        Self::from_toml(&text, temperature_k)
    }

    pub fn from_toml(text: &str, temperature_k: f64) -> Result<Self> {
        Self::from_coefficients(CoefficientFile::parse(text)?, temperature_k)
    }

    pub fn from_coefficients(file: CoefficientFile, temperature_k: f64) -> Result<Self> {
        if !(temperature_k > 0.0) {
            return Err(SimError::domain(format!(
                "crystal temperature must be positive, got {temperature_k} K"
            )));
        }
        let mut visible: [Option<CompiledSet>; 2] = [None, None];
        let mut thz: [Option<CompiledSet>; 2] = [None, None];
        for set in &file.set {
            let [lo, hi] = set.validity;
            if !(lo > 0.0 && hi > lo) {
                return Err(SimError::Format(format!(
                    "invalid validity interval [{lo}, {hi}] for {:?}/{:?}",
                    set.branch, set.polarization
                )));
            }
            let omega_range = match set.branch {
                // metres → rad/s, the order flips
                Branch::Visible => [2.0 * PI * C / hi, 2.0 * PI * C / lo],
                Branch::Thz => [2.0 * PI * lo, 2.0 * PI * hi],
            };
            let compiled = CompiledSet {
                formula: IndexFormula::from_set(set)?,
                omega_range,
            };
            let slot = match set.branch {
                Branch::Visible => &mut visible[pol_slot(set.polarization)],
                Branch::Thz => &mut thz[pol_slot(set.polarization)],
            };
            if slot.replace(compiled).is_some() {
                return Err(SimError::Format(format!(
                    "duplicate coefficient set {:?}/{:?}",
                    set.branch, set.polarization
                )));
            }
        }
        let take = |s: [Option<CompiledSet>; 2], name: &str| -> Result<[CompiledSet; 2]> {
            match s {
                [Some(o), Some(e)] => Ok([o, e]),
                _ => Err(SimError::Format(format!(
                    "coefficient file lacks an ordinary or extraordinary {name} set"
                ))),
            }
        };
        Ok(DispersionModel {
            visible: take(visible, "visible")?,
            thz: take(thz, "thz")?,
            temperature_k,
            file,
        })
    }

    /// Dispersionless model with fixed principal indices in every branch.
    pub fn constant(n_o: f64, n_e: f64) -> Self {
        let set = |branch, polarization, n: f64| CoefficientSet {
            branch,
            polarization,
            form: "constant".into(),
            validity: match branch {
                Branch::Visible => [1e-9, 1.0],
                Branch::Thz => [1.0, BRANCH_SPLIT_HZ],
            },
            coefficients: vec![n],
            source: "constant stub".into(),
        };
        let file = CoefficientFile {
            version: 1,
            material: "constant".into(),
            set: vec![
                set(Branch::Visible, Polarization::Ordinary, n_o),
                set(Branch::Visible, Polarization::Extraordinary, n_e),
                set(Branch::Thz, Polarization::Ordinary, n_o),
                set(Branch::Thz, Polarization::Extraordinary, n_e),
            ],
        };
        Self::from_coefficients(file, 293.0).expect("constant model is valid")
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn coefficients(&self) -> &CoefficientFile {
        &self.file
    }

    fn branch(&self, omega: f64) -> &[CompiledSet; 2] {
        if omega / (2.0 * PI) < BRANCH_SPLIT_HZ {
            &self.thz
        } else {
            &self.visible
        }
    }

    /// Principal (n_o, n_e) at angular frequency `omega`.
    ///
    /// Frequencies outside the validity window are still evaluated, with
    /// `extrapolated` set.
    pub fn principal_indices(&self, omega: f64) -> Result<PrincipalIndices> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(SimError::domain(format!(
                "angular frequency must be positive, got {omega}"
            )));
        }
        let sets = self.branch(omega);
        let t_c = self.temperature_k - 273.15;
        let n_o = sets[0].formula.eval(omega, t_c);
        let n_e = sets[1].formula.eval(omega, t_c);
        if !(n_o >= 1.0 && n_e >= 1.0) || !n_o.is_finite() || !n_e.is_finite() {
            return Err(SimError::Numeric(format!(
                "refractive index below 1 at ω = {omega:e} rad/s (n_o = {n_o}, n_e = {n_e})"
            )));
        }
        Ok(PrincipalIndices {
            n_o,
            n_e,
            extrapolated: !(sets[0].contains(omega) && sets[1].contains(omega)),
        })
    }

    /// Index for a wave travelling along `k_hat`, given in the crystal frame
    /// (optic axis along ẑ).
    pub fn index_for_direction(&self, omega: f64, pol: Polarization, k_hat: &Vector3<f64>) -> Result<f64> {
        check_unit(k_hat, "k_hat")?;
        let p = self.principal_indices(omega)?;
        Ok(p.along(pol, k_hat.z))
    }

    /// Index along a direction with cos ψ to the optic axis.
    pub fn index_along(&self, omega: f64, pol: Polarization, cos_to_axis: f64) -> Result<f64> {
        Ok(self.principal_indices(omega)?.along(pol, cos_to_axis))
    }

    /// Group index n + ω dn/dω, centered difference with step
    /// [`GROUP_INDEX_REL_STEP`]·ω, at fixed propagation direction.
    pub fn group_index(&self, omega: f64, pol: Polarization, k_hat: &Vector3<f64>) -> Result<f64> {
        check_unit(k_hat, "k_hat")?;
        self.group_index_along(omega, pol, k_hat.z)
    }

    pub fn group_index_along(&self, omega: f64, pol: Polarization, cos_to_axis: f64) -> Result<f64> {
        self.group_index_with_step(omega, pol, cos_to_axis, GROUP_INDEX_REL_STEP)
    }

    pub fn group_index_with_step(&self, omega: f64, pol: Polarization, cos_to_axis: f64, rel_step: f64) -> Result<f64> {
        let h = rel_step * omega;
        let n = self.index_along(omega, pol, cos_to_axis)?;
        let up = self.index_along(omega + h, pol, cos_to_axis)?;
        let down = self.index_along(omega - h, pol, cos_to_axis)?;
        Ok(n + omega * (up - down) / (2.0 * h))
    }

    /// Validity windows (rad/s) of the visible and THz branches.
    pub fn validity(&self, branch: Branch) -> [f64; 2] {
        let sets = match branch {
            Branch::Visible => &self.visible,
            Branch::Thz => &self.thz,
        };
        [
            sets[0].omega_range[0].max(sets[1].omega_range[0]),
            sets[0].omega_range[1].min(sets[1].omega_range[1]),
        ]
    }

    /// Human-readable notes for any part of `[omega_lo, omega_hi]` that falls
    /// outside the validity window of its branch.
    pub fn extrapolation_notes(&self, omega_lo: f64, omega_hi: f64) -> Vec<String> {
        let mut notes = Vec::new();
        for branch in [Branch::Thz, Branch::Visible] {
            let [lo, hi] = self.validity(branch);
            let split = 2.0 * PI * BRANCH_SPLIT_HZ;
            let (blo, bhi) = match branch {
                Branch::Thz => (omega_lo, omega_hi.min(split)),
                Branch::Visible => (omega_lo.max(split), omega_hi),
            };
            if blo >= bhi {
                continue;
            }
            if blo < lo || bhi > hi {
                notes.push(match branch {
                    Branch::Thz => format!(
                        "thz index extrapolated: requested {:.3}-{:.3} THz, valid {:.3}-{:.3} THz",
                        blo / (2.0 * PI * 1e12),
                        bhi / (2.0 * PI * 1e12),
                        lo / (2.0 * PI * 1e12),
                        hi / (2.0 * PI * 1e12)
                    ),
                    Branch::Visible => format!(
                        "visible index extrapolated: requested {:.1}-{:.1} nm, valid {:.1}-{:.1} nm",
                        2.0 * PI * C / bhi * 1e9,
                        2.0 * PI * C / blo * 1e9,
                        2.0 * PI * C / hi * 1e9,
                        2.0 * PI * C / lo * 1e9
                    ),
                });
            }
        }
        notes
    }
}

pub(crate) fn check_unit(v: &Vector3<f64>, what: &str) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-9 || !norm.is_finite() {
        return Err(SimError::domain(format!("{what} must be a unit vector, |v| = {norm}")));
    }
    Ok(())
}
