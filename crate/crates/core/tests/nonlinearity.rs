use nalgebra::Vector3;
use pdcsim::dispersion::{DispersionModel, Polarization};
use pdcsim::nonlinearity::*;
use pdcsim::quantities::wavelength_to_angular_frequency;
use proptest::prelude::*;
use Polarization::{Extraordinary as E, Ordinary as O};

fn dispersion() -> DispersionModel {
    DispersionModel::bundled(293.0).unwrap()
}

fn reference() -> FrequencyTriple {
    FrequencyTriple::from_signal_and_idler(661e-9, 0.75).unwrap()
}

fn target() -> FrequencyTriple {
    let pump = wavelength_to_angular_frequency(659.58e-9).unwrap();
    let signal = wavelength_to_angular_frequency(663e-9).unwrap();
    FrequencyTriple {
        pump,
        signal,
        idler: pump - signal,
    }
}

fn components() -> TensorComponents {
    TensorComponents {
        chi333: 327.0,
        chi311: 49.0,
        chi131: 47.0,
        chi113: 51.0,
    }
}

/// Brute-force 3×3×3 contraction.
fn contract(t: &TensorComponents, p: &Vector3<f64>, s: &Vector3<f64>, i: &Vector3<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                acc += t.entry(j, k, l) * p[j] * s[k] * i[l];
            }
        }
    }
    acc
}

#[test]
fn miller_identity_at_reference() {
    let d = dispersion();
    let chi = miller_scale(327.0, reference(), reference(), &d, [E, E, E]).unwrap();
    assert_eq!(chi, 327.0);
}

#[test]
fn miller_delta_is_invariant() {
    let d = dispersion();
    let chi = miller_scale(327.0, reference(), target(), &d, [E, E, E]).unwrap();
    let delta = |t: FrequencyTriple, c: f64| {
        let w = [t.pump, t.signal, t.idler];
        c / w
            .iter()
            .map(|&w| d.principal_indices(w).unwrap().n_e.powi(2) - 1.0)
            .product::<f64>()
    };
    let a = delta(reference(), 327.0);
    let b = delta(target(), chi);
    assert!((a - b).abs() / a < 1e-12);
}

#[test]
fn miller_golden_value_for_chi333() {
    let d = dispersion();
    let chi = miller_scale(327.0, reference(), target(), &d, [E, E, E]).unwrap();
    // One-off evaluation of the same product from the principal indices.
    let r = reference();
    let t = target();
    let n = |w: f64| d.principal_indices(w).unwrap().n_e;
    let oracle = 327.0
        * ((n(t.pump).powi(2) - 1.0) / (n(r.pump).powi(2) - 1.0))
        * ((n(t.signal).powi(2) - 1.0) / (n(r.signal).powi(2) - 1.0))
        * ((n(t.idler).powi(2) - 1.0) / (n(r.idler).powi(2) - 1.0));
    assert!((chi - oracle).abs() < 1e-9);
    // 663 nm signal pairs with a ~2.35 THz idler; higher THz index raises χ.
    assert!(chi > 327.0 && chi < 400.0, "{chi}");
}

#[test]
fn miller_scaling_composes() {
    let d = dispersion();
    let a = target();
    let b = FrequencyTriple::from_signal_and_idler(665e-9, 3.0).unwrap();
    let direct = miller_scale(327.0, reference(), b, &d, [E, O, O]).unwrap();
    let via_a = miller_scale(
        miller_scale(327.0, reference(), a, &d, [E, O, O]).unwrap(),
        a,
        b,
        &d,
        [E, O, O],
    )
    .unwrap();
    assert!((direct - via_a).abs() / direct < 1e-12);
}

#[test]
fn miller_rejects_vacuum_like_index() {
    let d = DispersionModel::constant(1.0, 1.0);
    assert!(miller_scale(1.0, reference(), target(), &d, [E, E, E]).is_err());
}

#[test]
fn single_component_contractions() {
    let t = components();
    let dirs = FieldDirections::new(Vector3::z(), Vector3::z(), Vector3::z()).unwrap();
    assert_eq!(effective_chi2(&t, &dirs), 327.0);
    let dirs = FieldDirections::new(Vector3::z(), Vector3::x(), Vector3::x()).unwrap();
    assert_eq!(effective_chi2(&t, &dirs), 49.0);
}

#[test]
fn rotated_signal_matches_brute_force() {
    let t = components();
    let a = 30f64.to_radians();
    let s = Vector3::new(a.sin(), 0.0, a.cos());
    let dirs = FieldDirections::new(Vector3::z(), s, Vector3::z()).unwrap();
    let chi = effective_chi2(&t, &dirs);
    assert!((chi - contract(&t, &dirs.pump, &dirs.signal, &dirs.idler)).abs() < 1e-12);
    // Only 333 survives: pump and idler have no transverse part.
    assert!((chi - a.cos() * 327.0).abs() < 1e-12);
}

#[test]
fn type_zero_collinear_gives_chi333() {
    let d = dispersion();
    let tensor = NonlinearTensor::new(327.0, 49.0, reference()).unwrap();
    let comps = tensor.at(reference(), &d).unwrap();
    let k = Vector3::x();
    let e = displacement_direction(&k, E).unwrap();
    let dirs = FieldDirections::new(e, e, e).unwrap();
    assert_eq!(effective_chi2(&comps, &dirs), 327.0);
}

#[test]
fn displacement_geometry() {
    assert_eq!(displacement_direction(&Vector3::x(), E).unwrap(), Vector3::z());
    assert_eq!(displacement_direction(&Vector3::x(), O).unwrap(), Vector3::y());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = Vector3::new(s, 0.0, s);
    let e = displacement_direction(&k, E).unwrap();
    assert!(e.dot(&k).abs() < 1e-15);
    assert!((e.norm() - 1.0).abs() < 1e-15);
    assert!(e.y.abs() < 1e-15, "extraordinary stays in the (k, axis) plane");
    // degenerate convention
    assert_eq!(displacement_direction(&Vector3::z(), O).unwrap(), Vector3::x());
    assert_eq!(displacement_direction(&Vector3::z(), E).unwrap(), Vector3::y());
}

#[test]
fn lab_frame_from_optic_axis() {
    let f = CrystalFrame::from_optic_axis(Vector3::x()).unwrap();
    assert_eq!(f.e1, Vector3::y());
    assert_eq!(f.e2, Vector3::z());
    let v = Vector3::new(0.3, -0.2, 0.9);
    assert!((f.to_lab(&f.to_crystal(&v)) - v).norm() < 1e-15);
}

fn unit() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z))
        .prop_filter("non-degenerate", |v| v.norm() > 1e-2)
        .prop_map(|v| v.normalize())
}

proptest! {
    #[test]
    fn contraction_is_trilinear(p in unit(), s in unit(), i in unit(), s2 in unit(), a in -2.0f64..2.0) {
        let t = components();
        let f = |s: &Vector3<f64>| effective_chi2_about(&t, &p, s, &i, &Vector3::z());
        let lhs = f(&(s * a + s2));
        let rhs = a * f(&s) + f(&s2);
        prop_assert!((lhs - rhs).abs() < 1e-9);
        prop_assert!((f(&s) - contract(&t, &p, &s, &i)).abs() < 1e-9);
    }

    #[test]
    fn displacement_is_transverse(k in unit(), axis in unit()) {
        let frame = CrystalFrame::from_optic_axis(axis).unwrap();
        let o = frame.displacement_direction(&k, O);
        let e = frame.displacement_direction(&k, E);
        prop_assert!((o.norm() - 1.0).abs() < 1e-12);
        prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        prop_assert!(o.dot(&k).abs() < 1e-9 && e.dot(&k).abs() < 1e-9);
        prop_assert!(o.dot(&e).abs() < 1e-9);
        prop_assert!(o.dot(&axis).abs() < 1e-9);
    }
}
