use approx::assert_relative_eq;
use nalgebra::Vector3;
use pdcsim::optics::*;

#[test]
fn front_focal_plane_maps_angle_to_position() {
    let f = 0.05;
    let chain = [
        OpticalElement::FreeSpace { d: f },
        OpticalElement::ThinLens { f },
        OpticalElement::FreeSpace { d: f },
    ];
    for theta in [-0.02, 0.003, 0.1] {
        let r = trace_elements(Ray::launch(660e-9, theta, 0.0), &chain);
        assert!((r.x - f * theta).abs() <= 1e-12 * f);
        assert!(r.theta_x.abs() <= 1e-15);
    }
}

#[test]
fn slit_clips_in_x_only() {
    let slit = OpticalElement::Slit { full_width: 100e-6 };
    let mut r = Ray {
        x: 60e-6,
        y: 0.0,
        theta_x: 0.0,
        theta_y: 0.0,
        lambda: 660e-9,
        alive: true,
    };
    slit.apply(&mut r);
    assert!(!r.alive);
    let mut r = Ray {
        x: 40e-6,
        y: 3e-3,
        theta_x: 0.01,
        theta_y: -0.02,
        lambda: 660e-9,
        alive: true,
    };
    let before = r;
    slit.apply(&mut r);
    assert_eq!(r, before);
}

#[test]
fn grating_identity_at_design_wavelength() {
    let g = OpticalElement::TransmissionGrating {
        groove_period: 1e-3 / 600.0,
        order: 1,
        design_wavelength: 660e-9,
    };
    let mut r = Ray {
        x: 0.0,
        y: 2e-3,
        theta_x: 0.0,
        theta_y: 0.01,
        lambda: 660e-9,
        alive: true,
    };
    g.apply(&mut r);
    assert!(r.theta_x.abs() < 1e-15);
    assert_eq!((r.y, r.theta_y), (2e-3, 0.01));
}

#[test]
fn grating_linearization_thousand_lines() {
    // exact oracle: asin(mλ/d) difference at normal incidence
    let d = 1e-6;
    let (l0, l1): (f64, f64) = (660e-9, 661e-9);
    let exact = (l1 / d).asin() - (l0 / d).asin();
    let lin = grating_dispersion(d, 1, l0) * (l1 - l0);
    assert!((exact - lin).abs() < 1e-5, "{exact} {lin}");
    let (th, _) = grating_exact(0.0, l1, d, 1, l0).unwrap();
    assert!((th - exact).abs() < 1e-15);
}

#[test]
fn free_space_composes() {
    let a = transfer_matrix(
        &[
            OpticalElement::FreeSpace { d: 0.1 },
            OpticalElement::FreeSpace { d: 0.25 },
        ],
        Plane::X,
        660e-9,
    );
    let b = transfer_matrix(&[OpticalElement::FreeSpace { d: 0.35 }], Plane::X, 660e-9);
    assert_eq!(a, b);
    let r1 = trace_elements(
        Ray::launch(660e-9, 0.01, -0.02),
        &[
            OpticalElement::FreeSpace { d: 0.1 },
            OpticalElement::FreeSpace { d: 0.25 },
        ],
    );
    let r2 = trace_elements(
        Ray::launch(660e-9, 0.01, -0.02),
        &[OpticalElement::FreeSpace { d: 0.35 }],
    );
    assert_relative_eq!(r1.x, r2.x, max_relative = 1e-15);
}

#[test]
fn exit_refraction_paraxial_snell() {
    let n = 2.2;
    let omega = 2.0 * std::f64::consts::PI * pdcsim::quantities::C / 660e-9;
    let kmag = n * omega / pdcsim::quantities::C;
    let k = Vector3::new(kmag * 0.01f64.sin(), 0.0, kmag * 0.01f64.cos());
    let r = exit_refraction(&k, omega).unwrap();
    assert!((r.theta_x - 0.022).abs() < 2e-6);
    let k0 = Vector3::new(0.0, 0.0, kmag);
    assert_eq!(exit_refraction(&k0, omega).unwrap().theta_x, 0.0);
    let back = internal_wavevector(&r, n).unwrap();
    assert!((back - k).norm() <= 1e-12 * kmag);
    assert!(exit_refraction(&Vector3::new(0.0, 0.0, -1.0), omega).is_err());
}
