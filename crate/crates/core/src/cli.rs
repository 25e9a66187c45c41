//! Run configuration, orchestration and output files.
//!
//! Configs are TOML with units in key names. Unknown keys are rejected. The
//! canonical form is the re-serialized parsed config; its SHA-256 is the
//! config hash embedded in every output.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::{
    cut, render_spectrum, write_csv, write_metadata, write_pgm, CutAxis, DetectorGeometry, RenderSettings,
    SpectrumImage,
};
use crate::dispersion::{DispersionModel, Polarization};
use crate::error::{Result, SimError};
use crate::interaction::{CrystalSpec, KernelSettings, PhysicsModel, ProcessKind, PumpSpec};
use crate::mcint::estimator::stream_rng;
use crate::nonlinearity::{FrequencyTriple, NonlinearTensor};
use crate::optics::{
    optimize_layout, CharacteristicsProbe, ImagingCharacteristics, LayoutFitSettings, OpticalElement, OpticalLayout,
    PlacedElement,
};
use crate::quantities::thz_to_angular;

/// The bundled default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    pub samples_per_pixel: usize,
    #[serde(default)]
    pub threads: usize,
    pub processes: Vec<ProcessKind>,
    #[serde(default = "default_order")]
    pub max_qpm_order: i32,
    pub output_dir: PathBuf,
    pub pump: PumpConfig,
    pub crystal: CrystalConfig,
    pub kernel: KernelConfig,
    pub detector: DetectorConfig,
    pub optics: OpticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_order() -> i32 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub wavelength_nm: f64,
    pub power_w: f64,
    pub waist_um: f64,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    pub height_mm: f64,
    pub width_mm: f64,
    pub poling_period_um: f64,
    pub temperature_k: f64,
    pub optic_axis: [f64; 3],
    pub chi333_pm_per_v: f64,
    pub chi311_pm_per_v: f64,
    pub chi_reference_signal_nm: f64,
    pub chi_reference_idler_thz: f64,
    /// Coefficient file replacing the bundled index model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub polarization_pairs: Vec<String>,
    pub idler_floor_thz: f64,
    pub idler_ceiling_thz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_time_ps: Option<f64>,
    #[serde(default = "one")]
    pub idler_draws: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub pitch_um: f64,
    #[serde(default)]
    pub center_offset_um: [f64; 2],
    pub illumination_time_s: f64,
    pub efficiency: f64,
    #[serde(default = "default_max_angle")]
    pub max_angle_deg: f64,
}

fn default_max_angle() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    ThinLens {
        position_mm: f64,
        focal_length_mm: f64,
    },
    Slit {
        position_mm: f64,
        full_width_um: f64,
    },
    TransmissionGrating {
        position_mm: f64,
        lines_per_mm: f64,
        order: i32,
        design_wavelength_nm: f64,
    },
    Mirror {
        position_mm: f64,
    },
}

impl ElementConfig {
    fn placed(&self) -> PlacedElement {
        match *self {
            ElementConfig::ThinLens {
                position_mm,
                focal_length_mm,
            } => PlacedElement {
                z: position_mm * 1e-3,
                element: OpticalElement::ThinLens {
                    f: focal_length_mm * 1e-3,
                },
            },
            ElementConfig::Slit {
                position_mm,
                full_width_um,
            } => PlacedElement {
                z: position_mm * 1e-3,
                element: OpticalElement::Slit {
                    full_width: full_width_um * 1e-6,
                },
            },
            ElementConfig::TransmissionGrating {
                position_mm,
                lines_per_mm,
                order,
                design_wavelength_nm,
            } => PlacedElement {
                z: position_mm * 1e-3,
                element: OpticalElement::TransmissionGrating {
                    groove_period: 1e-3 / lines_per_mm,
                    order,
                    design_wavelength: design_wavelength_nm * 1e-9,
                },
            },
            ElementConfig::Mirror { position_mm } => PlacedElement {
                z: position_mm * 1e-3,
                element: OpticalElement::Mirror,
            },
        }
    }

    fn with_position_mm(&self, z_mm: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ElementConfig::ThinLens { position_mm, .. }
            | ElementConfig::Slit { position_mm, .. }
            | ElementConfig::TransmissionGrating { position_mm, .. }
            | ElementConfig::Mirror { position_mm } => *position_mm = z_mm,
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsConfig {
    pub detector_position_mm: f64,
    pub element: Vec<ElementConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<LayoutFitConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFitConfig {
    pub enabled: bool,
    /// Indices into `element`; `element.len()` is the detector.
    pub free_elements: Vec<usize>,
    pub penalty_per_mm2: Vec<f64>,
    pub target_dx_dlambda_um_per_nm: f64,
    pub target_dy_dtheta_um_per_mrad: f64,
    pub target_squeeze_ratio: f64,
    #[serde(default = "one_degree")]
    pub cone_half_angle_deg: f64,
}

fn one_degree() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "yes")]
    pub pgm: bool,
    #[serde(default)]
    pub poisson_frame: bool,
    #[serde(default)]
    pub cut: Vec<CutConfig>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            pgm: true,
            poisson_frame: false,
            cut: Vec::new(),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutConfig {
    pub axis: CutAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
}

fn parse_pair(s: &str) -> Result<(Polarization, Polarization)> {
    let pol = |c: char| match c {
        'e' => Ok(Polarization::Extraordinary),
        'o' => Ok(Polarization::Ordinary),
        _ => Err(SimError::Config(format!(
            "kernel.polarization_pairs: {s:?} must be two of 'e'/'o' (signal, idler)"
        ))),
    };
    let c: Vec<char> = s.chars().collect();
    if c.len() != 2 {
        return Err(SimError::Config(format!(
            "kernel.polarization_pairs: {s:?} must have two letters"
        )));
    }
    Ok((pol(c[0])?, pol(c[1])?))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl SimulationConfig {
    /// Parse without validating.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    /// Parse and validate. Errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bundled_default() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("bundled default config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_qpm_order < 1 || self.max_qpm_order % 2 == 0 {
            return Err(SimError::Config(format!(
                "max_qpm_order must be odd and at least 1, got {}",
                self.max_qpm_order
            )));
        }
        if self.samples_per_pixel < 2 {
            return Err(SimError::Config("samples_per_pixel must be at least 2".into()));
        }
        if self.processes.is_empty() {
            return Err(SimError::Config("processes must not be empty".into()));
        }
        positive("pump.wavelength_nm", self.pump.wavelength_nm)?;
        positive("pump.power_w", self.pump.power_w)?;
        positive("pump.waist_um", self.pump.waist_um)?;
        let c = &self.crystal;
        for (n, v) in [
            ("crystal.length_mm", c.length_mm),
            ("crystal.height_mm", c.height_mm),
            ("crystal.width_mm", c.width_mm),
            ("crystal.poling_period_um", c.poling_period_um),
            ("crystal.temperature_k", c.temperature_k),
            ("crystal.chi333_pm_per_v", c.chi333_pm_per_v),
            ("crystal.chi311_pm_per_v", c.chi311_pm_per_v),
            ("crystal.chi_reference_signal_nm", c.chi_reference_signal_nm),
            ("crystal.chi_reference_idler_thz", c.chi_reference_idler_thz),
        ] {
            positive(n, v)?;
        }
        let axis = Vector3::from(c.optic_axis);
        if (axis.norm() - 1.0).abs() > 1e-9 {
            return Err(SimError::Config("crystal.optic_axis must be a unit vector".into()));
        }
        let k = &self.kernel;
        if k.polarization_pairs.is_empty() {
            return Err(SimError::Config("kernel.polarization_pairs must not be empty".into()));
        }
        for p in &k.polarization_pairs {
            parse_pair(p)?;
        }
        positive("kernel.idler_floor_thz", k.idler_floor_thz)?;
        if !(k.idler_ceiling_thz > k.idler_floor_thz) {
            return Err(SimError::Config(
                "kernel.idler_floor_thz must be below kernel.idler_ceiling_thz".into(),
            ));
        }
        if let Some(t) = k.interaction_time_ps {
            positive("kernel.interaction_time_ps", t)?;
        }
        if k.idler_draws == 0 {
            return Err(SimError::Config("kernel.idler_draws must be at least 1".into()));
        }
        let d = &self.detector;
        if d.n_x == 0 || d.n_y == 0 {
            return Err(SimError::Config(
                "detector.n_x and detector.n_y must be positive".into(),
            ));
        }
        positive("detector.pitch_um", d.pitch_um)?;
        positive("detector.illumination_time_s", d.illumination_time_s)?;
        positive("detector.max_angle_deg", d.max_angle_deg)?;
        if !(d.efficiency > 0.0 && d.efficiency <= 1.0) {
            return Err(SimError::Config("detector.efficiency must lie in (0, 1]".into()));
        }
        self.layout()
            .and_then(|l| l.validate())
            .map_err(|e| SimError::Config(format!("optics: {e}")))?;
        if let Some(f) = &self.optics.fit {
            if f.free_elements.len() != f.penalty_per_mm2.len() {
                return Err(SimError::Config(
                    "optics.fit.penalty_per_mm2 needs one entry per free element".into(),
                ));
            }
            if f.free_elements.iter().any(|&i| i > self.optics.element.len()) {
                return Err(SimError::Config("optics.fit.free_elements index out of range".into()));
            }
        }
        for c in &self.output.cut {
            match (c.axis, c.angle_deg, c.wavelength_nm) {
                (CutAxis::Horizontal, Some(_), None) | (CutAxis::Vertical, None, Some(_)) => {}
                _ => {
                    return Err(SimError::Config(
                        "output.cut: horizontal cuts take angle_deg, vertical cuts take wavelength_nm".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Canonical serialization (the parsed config written back out).
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Format(e.to_string()))
    }

    /// Hex SHA-256 of the canonical form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn pump_spec(&self) -> PumpSpec {
        PumpSpec {
            wavelength: self.pump.wavelength_nm * 1e-9,
            power: self.pump.power_w,
            waist: self.pump.waist_um * 1e-6,
            polarization: self.pump.polarization,
        }
    }

    pub fn crystal_spec(&self) -> Result<CrystalSpec> {
        let c = &self.crystal;
        let dispersion = match &c.dispersion_file {
            Some(p) => DispersionModel::from_file(p, c.temperature_k)?,
            None => DispersionModel::bundled(c.temperature_k)?,
        };
        let reference =
            FrequencyTriple::from_signal_and_idler(c.chi_reference_signal_nm * 1e-9, c.chi_reference_idler_thz)?;
        Ok(CrystalSpec {
            length: c.length_mm * 1e-3,
            height: c.height_mm * 1e-3,
            width: c.width_mm * 1e-3,
            poling_period: c.poling_period_um * 1e-6,
            temperature_k: c.temperature_k,
            optic_axis: Vector3::from(c.optic_axis),
            tensor: NonlinearTensor::new(c.chi333_pm_per_v, c.chi311_pm_per_v, reference)?,
            dispersion,
        })
    }

    pub fn kernel_settings(&self) -> Result<KernelSettings> {
        let mut k = KernelSettings::new(self.max_qpm_order);
        k.pol_pairs = self
            .kernel
            .polarization_pairs
            .iter()
            .map(|p| parse_pair(p))
            .collect::<Result<Vec<_>>>()?;
        k.omega_floor = thz_to_angular(self.kernel.idler_floor_thz);
        k.omega_ceiling = thz_to_angular(self.kernel.idler_ceiling_thz);
        k.interaction_time = self.kernel.interaction_time_ps.map(|t| t * 1e-12);
        k.idler_draws = self.kernel.idler_draws;
        Ok(k)
    }

    pub fn physics_model(&self) -> Result<PhysicsModel> {
        PhysicsModel::new(self.crystal_spec()?, self.pump_spec(), self.kernel_settings()?)
    }

    pub fn detector_geometry(&self) -> DetectorGeometry {
        let d = &self.detector;
        DetectorGeometry {
            n_x: d.n_x,
            n_y: d.n_y,
            pitch: d.pitch_um * 1e-6,
            center_offset: [d.center_offset_um[0] * 1e-6, d.center_offset_um[1] * 1e-6],
            illumination_time: d.illumination_time_s,
            efficiency: d.efficiency,
        }
    }

    pub fn layout(&self) -> Result<OpticalLayout> {
        Ok(OpticalLayout {
            elements: self.optics.element.iter().map(|e| e.placed()).collect(),
            detector_z: self.optics.detector_position_mm * 1e-3,
            detector: self.detector_geometry(),
        })
    }

    /// Copy with the layout positions replaced (m).
    pub fn with_layout_positions(&self, layout: &OpticalLayout) -> Self {
        let mut out = self.clone();
        for (e, p) in out.optics.element.iter_mut().zip(&layout.elements) {
            *e = e.with_position_mm(p.z * 1e3);
        }
        out.optics.detector_position_mm = layout.detector_z * 1e3;
        out
    }

    pub fn render_settings(&self) -> RenderSettings {
        let mut r = RenderSettings::new(self.samples_per_pixel, self.seed);
        r.threads = (self.threads > 0).then_some(self.threads);
        r.max_angle = self.detector.max_angle_deg.to_radians();
        r
    }
}

/// Read a config file without validating it (overrides may follow).
pub fn read_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    SimulationConfig::parse(&text).map_err(|e| match e {
        SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let cfg = read_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub threads: Option<usize>,
    pub max_order: Option<i32>,
    pub processes: Option<Vec<ProcessKind>>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SimulationConfig) -> Result<()> {
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.samples {
            cfg.samples_per_pixel = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = self.max_order {
            cfg.max_qpm_order = v;
        }
        if let Some(v) = &self.processes {
            let unique: BTreeSet<&str> = v.iter().map(|p| p.label()).collect();
            cfg.processes = ["down", "up"]
                .iter()
                .filter(|l| unique.contains(*l))
                .map(|l| {
                    if *l == "down" {
                        ProcessKind::DownConversion
                    } else {
                        ProcessKind::UpConversion
                    }
                })
                .collect();
        }
        cfg.validate()
    }
}

/// Targets of the configured layout fit.
pub fn fit_targets(fit: &LayoutFitConfig) -> ImagingCharacteristics {
    ImagingCharacteristics {
        // µm/nm = 1e3 m/m; µm/mrad = 1e-3 m/rad
        dx_dlambda: fit.target_dx_dlambda_um_per_nm * 1e3,
        dy_dtheta: fit.target_dy_dtheta_um_per_mrad * 1e-3,
        squeeze_ratio: fit.target_squeeze_ratio,
    }
}

/// Run the configured layout fit. Returns the fitted config and a report.
pub fn fit_layout(cfg: &SimulationConfig) -> Result<(SimulationConfig, String)> {
    let fit = cfg
        .optics
        .fit
        .as_ref()
        .ok_or_else(|| SimError::Config("optics.fit section is missing".into()))?;
    let nominal = cfg.layout()?;
    let mut probe = CharacteristicsProbe::for_layout(&nominal);
    probe.cone_half_angle = fit.cone_half_angle_deg.to_radians();
    let mut settings = LayoutFitSettings::lenses(&nominal);
    settings.free = fit.free_elements.clone();
    settings.penalty_weights = fit.penalty_per_mm2.iter().map(|w| w * 1e6).collect();
    let result = optimize_layout(&nominal, &fit_targets(fit), &settings, &probe)?;
    let fitted = cfg.with_layout_positions(&result.layout);
    let c = result.characteristics;
    let mut report = String::new();
    report.push_str(&format!("objective = {:e}\n", result.objective));
    report.push_str(&format!("converged = {}\n", result.converged));
    report.push_str(&format!("iterations = {}\n", result.iterations));
    report.push_str(&format!("dx_dlambda_um_per_nm = {}\n", c.dx_dlambda * 1e-3));
    report.push_str(&format!("dy_dtheta_um_per_mrad = {}\n", c.dy_dtheta * 1e3));
    report.push_str(&format!("squeeze_ratio = {}\n", c.squeeze_ratio));
    for (i, (a, b)) in nominal.positions().iter().zip(result.layout.positions()).enumerate() {
        report.push_str(&format!("position_{i}_mm = {} # nominal {}\n", b * 1e3, a * 1e3));
    }
    Ok((fitted, report))
}

/// Files written by [`run`].
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub images: Vec<SpectrumImage>,
}

/// Optional layout fit, rendering of each enabled process, and all outputs.
pub fn run(cfg: &SimulationConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let hash = cfg.hash()?;
    let mut cfg = cfg.clone();
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    let mut summary = RunSummary::default();

    if cfg.optics.fit.as_ref().is_some_and(|f| f.enabled) {
        let (fitted, report) = fit_layout(&cfg)?;
        let p = dir.join("layout_fit.toml");
        std::fs::write(&p, format!("config_hash = \"{hash}\"\n{report}")).map_err(|e| SimError::io(&p, e))?;
        summary.files.push(p);
        cfg = fitted;
    }

    let model = cfg.physics_model()?;
    let layout = cfg.layout()?;
    let settings = cfg.render_settings();
    for &process in &cfg.processes {
        let mut image = render_spectrum(&model, &layout, process, &settings)?;
        image.metadata.config_hash = hash.clone();
        let tag = process.label();
        let path = |name: &str| dir.join(format!("{tag}_{name}"));

        let p = path("counts.csv");
        write_csv(&p, &image, &image.counts, "expected_counts")?;
        summary.files.push(p);
        let p = path("stderr.csv");
        write_csv(&p, &image, &image.stderr, "stderr")?;
        summary.files.push(p);
        let p = path("metadata.toml");
        write_metadata(&p, &image.metadata)?;
        summary.files.push(p);
        if cfg.output.pgm {
            let p = dir.join(format!("{tag}.pgm"));
            write_pgm(&p, &image)?;
            summary.files.push(p);
        }
        if cfg.output.poisson_frame {
            let mut rng = stream_rng(cfg.seed, u64::MAX - if tag == "down" { 0 } else { 1 });
            let frame = image.poisson_frame(&mut rng)?;
            let p = path("poisson.csv");
            write_csv(&p, &frame, &frame.counts, "poisson_counts")?;
            summary.files.push(p);
        }
        for c in &cfg.output.cut {
            let (profile, name) = match c.axis {
                CutAxis::Horizontal => {
                    let a = c.angle_deg.unwrap_or(0.0);
                    (cut(&image, c.axis, a.to_radians())?, format!("cut_h_{a:.3}deg.csv"))
                }
                CutAxis::Vertical => {
                    let w = c.wavelength_nm.unwrap_or(0.0);
                    (cut(&image, c.axis, w * 1e-9)?, format!("cut_v_{w:.3}nm.csv"))
                }
            };
            let p = path(&name);
            write_profile(&p, &profile, &hash)?;
            summary.files.push(p);
        }
        summary.images.push(image);
    }
    Ok(summary)
}

pub fn write_profile(path: &Path, p: &crate::detector::Profile, hash: &str) -> Result<()> {
    let (coord, at) = match p.axis {
        CutAxis::Horizontal => ("lambda_nm", "theta_deg"),
        CutAxis::Vertical => ("theta_deg", "lambda_nm"),
    };
    let mut s = format!("# config_hash,{hash}\n# {at},{}\n{coord},counts,stderr\n", p.at);
    for k in 0..p.values.len() {
        s.push_str(&format!(
            "{:.17e},{:.17e},{:.17e}\n",
            p.coordinates[k], p.values[k], p.stderr[k]
        ));
    }
    std::fs::write(path, s).map_err(|e| SimError::io(path, e))
}

/// Process exit code for an error: 2 config, 3 numeric, 4 I/O.
pub fn exit_code(e: &SimError) -> i32 {
    match e {
        SimError::Config(_) | SimError::Domain(_) => 2,
        SimError::Numeric(_) => 3,
        SimError::Io { .. } | SimError::Format(_) => 4,
    }
}
