use pdcsim::quantities::*;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn pump_wavelength_to_omega() {
    // 2πc/λ evaluated by hand: 2π·299792458/659.58e-9
    let expected = 2.0 * PI * 299_792_458.0 / 659.58e-9;
    let w = wavelength_to_angular_frequency(659.58e-9).unwrap();
    assert!((w - 2.8558e15).abs() / 2.8558e15 < 1e-4);
    assert_eq!(w, expected);
}

#[test]
fn doubling_wavelength_halves_omega() {
    let a = wavelength_to_angular_frequency(500e-9).unwrap();
    let b = wavelength_to_angular_frequency(1000e-9).unwrap();
    assert_eq!(a, 2.0 * b);
}

#[test]
fn rejects_non_positive_wavelength() {
    assert!(wavelength_to_angular_frequency(0.0).is_err());
    assert!(wavelength_to_angular_frequency(-1e-9).is_err());
    assert!(wavelength_to_angular_frequency(f64::NAN).is_err());
}

#[test]
fn idler_frequency_from_pump_and_signal() {
    let wp = wavelength_to_angular_frequency(659.58e-9).unwrap();
    let ws = wavelength_to_angular_frequency(661e-9).unwrap();
    let wi = frequency_difference(wp, ws).unwrap();
    // c/λ_p − c/λ_s in Hz
    let nu = C / 659.58e-9 - C / 661e-9;
    assert!((nu - 0.976e12).abs() / 0.976e12 < 5e-3);
    assert!((wi - 2.0 * PI * nu).abs() / wi < 1e-9);
    assert_eq!(frequency_difference(wp, wp).unwrap(), 0.0);
    assert_eq!(frequency_difference(ws, wp).unwrap(), -wi);
}

proptest! {
    #[test]
    fn wavelength_round_trip(lambda in 1e-7f64..1e-2) {
        let w = wavelength_to_angular_frequency(lambda).unwrap();
        let back = angular_frequency_to_wavelength(w).unwrap();
        prop_assert!((back - lambda).abs() / lambda < 1e-12);
    }

    #[test]
    fn thz_round_trip(nu in 0.01f64..100.0) {
        let back = angular_to_thz(thz_to_angular(nu));
        prop_assert!((back - nu).abs() / nu < 1e-12);
    }
}
