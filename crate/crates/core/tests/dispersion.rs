use nalgebra::Vector3;
use pdcsim::dispersion::*;
use pdcsim::error::SimError;
use pdcsim::quantities::{thz_to_angular, wavelength_to_angular_frequency};
use proptest::prelude::*;

fn model() -> DispersionModel {
    DispersionModel::bundled(293.0).unwrap()
}

/// Independent evaluation of the Gayer form straight from the published
/// coefficients, with λ in µm and T in °C.
fn gayer_oracle(c: &[f64; 10], lambda_um: f64, t_c: f64) -> f64 {
    let f = (t_c - 24.5) * (t_c + 570.82);
    let l2 = lambda_um.powi(2);
    (c[0] + c[6] * f + (c[1] + c[7] * f) / (l2 - (c[2] + c[8] * f).powi(2)) + (c[3] + c[9] * f) / (l2 - c[4].powi(2))
        - c[5] * l2)
        .sqrt()
}

const NE: [f64; 10] = [
    5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2, 2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4,
];

#[test]
fn extraordinary_index_at_661_nm_matches_golden() {
    let p = model()
        .principal_indices(wavelength_to_angular_frequency(661e-9).unwrap())
        .unwrap();
    let golden = gayer_oracle(&NE, 0.661, 293.0 - 273.15);
    assert!((golden - 2.186_704_338_857).abs() < 1e-9, "golden {golden}");
    assert!((p.n_e - golden).abs() < 1e-12);
    assert!(!p.extrapolated);
    assert!(p.n_o > p.n_e, "LiNbO3 is negative uniaxial in the visible");
}

#[test]
fn thz_index_at_one_terahertz_matches_polynomial() {
    let p = model().principal_indices(thz_to_angular(1.0)).unwrap();
    assert!((p.n_e - (4.96 + 0.025 + 0.022)).abs() < 1e-12);
    assert!((p.n_o - (6.61 + 0.020 + 0.035)).abs() < 1e-12);
    assert!(!p.extrapolated);
    let far = model().principal_indices(thz_to_angular(3.6)).unwrap();
    assert!(far.extrapolated);
}

#[test]
fn normal_dispersion_in_visible_window() {
    let m = model();
    let mut prev = (0.0, 0.0);
    for i in 0..200 {
        let lambda = 4.0e-6 - i as f64 * (3.5e-6 / 199.0);
        let p = m
            .principal_indices(wavelength_to_angular_frequency(lambda).unwrap())
            .unwrap();
        assert!(p.n_o >= prev.0 && p.n_e >= prev.1, "at {lambda}");
        prev = (p.n_o, p.n_e);
    }
}

#[test]
fn ellipsoid_limits() {
    let m = model();
    let w = wavelength_to_angular_frequency(661e-9).unwrap();
    let p = m.principal_indices(w).unwrap();
    let along = m
        .index_for_direction(w, Polarization::Extraordinary, &Vector3::z())
        .unwrap();
    let across = m
        .index_for_direction(w, Polarization::Extraordinary, &Vector3::x())
        .unwrap();
    assert!((along - p.n_o).abs() < 1e-15);
    assert!((across - p.n_e).abs() < 1e-15);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let n45 = m
        .index_for_direction(w, Polarization::Extraordinary, &Vector3::new(s, 0.0, s))
        .unwrap();
    let oracle = 1.0 / (0.5 * (1.0 / p.n_o.powi(2) + 1.0 / p.n_e.powi(2))).sqrt();
    assert!((n45 - oracle).abs() < 1e-12);
}

#[test]
fn non_unit_direction_rejected() {
    let w = wavelength_to_angular_frequency(661e-9).unwrap();
    let err = model().index_for_direction(w, Polarization::Ordinary, &Vector3::new(1.0, 1.0, 0.0));
    assert!(matches!(err, Err(SimError::Domain(_))));
}

#[test]
fn group_index_of_constant_model_is_phase_index() {
    let m = DispersionModel::constant(2.3, 2.2);
    let w = wavelength_to_angular_frequency(661e-9).unwrap();
    let ng = m.group_index(w, Polarization::Extraordinary, &Vector3::x()).unwrap();
    assert!((ng - 2.2).abs() < 1e-12);
}

#[test]
fn group_index_matches_analytic_sellmeier_derivative() {
    let m = model();
    let w = wavelength_to_angular_frequency(661e-9).unwrap();
    let ng = m.group_index(w, Polarization::Extraordinary, &Vector3::x()).unwrap();
    // n_g = n − λ dn/dλ with dn/dλ from the analytic derivative of n².
    let t = 293.0 - 273.15;
    let f = (t - 24.5) * (t + 570.82);
    let c = NE;
    let l = 0.661;
    let l2 = l * l;
    let p1 = c[2] + c[8] * f;
    let dn2_dl = -2.0 * l * (c[1] + c[7] * f) / (l2 - p1 * p1).powi(2)
        - 2.0 * l * (c[3] + c[9] * f) / (l2 - c[4] * c[4]).powi(2)
        - 2.0 * c[5] * l;
    let n = gayer_oracle(&c, l, t);
    let golden = n - l * dn2_dl / (2.0 * n);
    assert!((ng - golden).abs() < 1e-6, "{ng} vs {golden}");
    assert!(ng > n);
}

#[test]
fn group_index_stable_under_step_halving() {
    let m = model();
    let w = wavelength_to_angular_frequency(661e-9).unwrap();
    let a = m.group_index_with_step(w, Polarization::Ordinary, 0.0, 1e-6).unwrap();
    let b = m.group_index_with_step(w, Polarization::Ordinary, 0.0, 5e-7).unwrap();
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn coefficient_file_round_trips() {
    let file = CoefficientFile::parse(BUNDLED_MGO_LN).unwrap();
    let text = file.to_toml().unwrap();
    assert_eq!(CoefficientFile::parse(&text).unwrap(), file);
}

#[test]
fn extrapolation_is_reported() {
    let m = model();
    let notes = m.extrapolation_notes(thz_to_angular(0.05), thz_to_angular(6.0));
    assert_eq!(notes.len(), 1);
    assert!(notes[0].contains("thz"));
    assert!(m
        .extrapolation_notes(thz_to_angular(0.5), thz_to_angular(1.5))
        .is_empty());
}

proptest! {
    #[test]
    fn ordinary_index_is_isotropic(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let v = Vector3::new(x, y, z);
        prop_assume!(v.norm() > 1e-3);
        let k = v.normalize();
        let m = model();
        let w = wavelength_to_angular_frequency(661e-9).unwrap();
        let n = m.index_for_direction(w, Polarization::Ordinary, &k).unwrap();
        prop_assert_eq!(n, m.principal_indices(w).unwrap().n_o);
    }

    #[test]
    fn extraordinary_index_bounded(cos in -1.0f64..1.0, nu in 0.2f64..3.0) {
        let m = model();
        let w = thz_to_angular(nu);
        let p = m.principal_indices(w).unwrap();
        let n = p.along(Polarization::Extraordinary, cos);
        prop_assert!(n >= p.n_o.min(p.n_e) - 1e-12 && n <= p.n_o.max(p.n_e) + 1e-12);
    }
}
