mod common;

use std::f64::consts::PI;

use common::{integrate, PhasematchOracle};
use pdcsim::dispersion::{DispersionModel, Polarization::Extraordinary as E};
use pdcsim::interaction::ProcessKind::{DownConversion, UpConversion};

#[test]
fn gauss_kronrod_reproduces_closed_forms() {
    let (v, _) = integrate(|x| x.sin().powi(2), 0.0, PI, &[], 1e-12, 200);
    assert!((v - PI / 2.0).abs() < 1e-12);
    // narrow Lorentzian found through a breakpoint
    let g = 1e-4;
    let (v, _) = integrate(|x| g / (x * x + g * g), -1.0, 1.0, &[0.0], 1e-10, 2000);
    assert!((v - 2.0 * (1.0 / g).atan()).abs() < 1e-8, "{v}");
    let (v, _) = integrate(|x| (-x).exp(), 0.0, 50.0, &[], 1e-12, 200);
    assert!((v - (1.0 - (-50f64).exp())).abs() < 1e-12);
}

/// Frozen phasematching wavelengths (nm) at 0.2° from an independent
/// scan-and-bisect script with the same index coefficients.
#[test]
fn phasematch_loci_match_frozen_values() {
    let disp = DispersionModel::bundled(293.0).unwrap();
    let o = PhasematchOracle {
        dispersion: &disp,
        pump_wavelength: 659.58e-9,
        poling_period: 170e-6,
    };
    let th = 0.2f64.to_radians();
    let cases = [
        (DownConversion, 1, true, 660.721),
        (DownConversion, -1, false, 660.114),
        (DownConversion, 3, true, 662.424),
        (DownConversion, -3, false, 660.700),
        (DownConversion, 5, true, 664.025),
        (DownConversion, 7, true, 665.442),
        (DownConversion, 9, true, 666.691),
        (UpConversion, -1, true, 658.444),
        (UpConversion, -3, true, 656.759),
        (UpConversion, 1, false, 659.046),
    ];
    for (process, m, fwd, nm) in cases {
        let loci = o.loci(th, m, process, E, E, 652e-9, 668e-9);
        let hit = loci
            .iter()
            .find(|l| l.forward_idler == fwd)
            .unwrap_or_else(|| panic!("no locus for {process:?} m={m}"));
        assert!(
            (hit.wavelength * 1e9 - nm).abs() < 1.5e-3,
            "{process:?} m={m}: {} vs {nm}",
            hit.wavelength * 1e9
        );
    }
}
