use pdcsim::mcint::estimator::{stream_rng, MomentAccumulator};
use pdcsim::mcint::mixture::*;
use std::f64::consts::PI;

fn check_quality(m: &GaussianMixture3) {
    assert!((0.98..=1.02).contains(&m.eval(0.0)));
    // dense-grid oracle, 10⁴ points on [−π, π]
    let sup = (0..10_000)
        .map(|k| {
            let x = -PI + 2.0 * PI * k as f64 / 9_999.0;
            let s = if x == 0.0 { 1.0 } else { (x.sin() / x).powi(2) };
            (m.eval(x) - s).abs()
        })
        .fold(0.0, f64::max);
    assert!(sup <= 0.05, "sup {sup}");
    let closed_form: f64 = (0..3).map(|i| m.weights[i] * (PI / m.inv_widths[i]).sqrt()).sum();
    assert!((closed_form / PI - 1.0).abs() <= 0.05);
    assert!(m.weights.iter().all(|&a| a >= 0.0));
    assert!(m.inv_widths.iter().all(|&b| b > 0.0));
}

#[test]
fn bundled_mixture_meets_quality_bounds() {
    check_quality(GaussianMixture3::default_fit());
}

#[test]
fn refit_reproduces_bundled_artifact() {
    let art = fit_sinc_sq_mixture().unwrap();
    check_quality(&art.mixture);
    assert_eq!(&art, MixtureArtifact::bundled());
    let back = MixtureArtifact::from_toml(&art.to_toml().unwrap()).unwrap();
    assert_eq!(back, art);
}

#[test]
fn proposal_is_normalized() {
    let p = SincSqProposal::from_default_fit();
    // trapezoid on a wide grid plus the analytic Cauchy tail beyond it
    let half = 2000.0;
    let n = 400_000;
    let h = 2.0 * half / n as f64;
    let mut s = 0.0;
    for k in 0..=n {
        let x = -half + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        s += w * p.pdf(x);
    }
    s *= h;
    let tail = DEFENSIVE_FRACTION * (1.0 - 2.0 * half.atan() / PI);
    assert!((s + tail - 1.0).abs() < 1e-6, "{}", s + tail);
    assert!((p.mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-12);
}

#[test]
fn truncated_draws_stay_inside_and_integrate_sinc_sq() {
    let p = SincSqProposal::from_default_fit();
    let mut rng = stream_rng(5, 1);
    for &(lo, hi) in &[(-3.0, 8.0), (5.0, 40.0), (-200.0, -150.0), (-1e3, 1e3)] {
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let exact: f64 = (0..=steps)
            .map(|i| {
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                w * sinc_sq(lo + i as f64 * h)
            })
            .sum::<f64>()
            * h;
        let mut acc = MomentAccumulator::default();
        for _ in 0..20_000 {
            let (x, dens) = p.sample_truncated(&mut rng, lo, hi).unwrap();
            assert!(x >= lo && x <= hi);
            assert!(dens > 0.0 && dens.is_finite());
            acc.push(sinc_sq(x) / dens);
        }
        let est = acc.estimate();
        assert!(
            (est.value - exact).abs() < 4.0 * est.stderr + 1e-6 * exact,
            "[{lo}, {hi}]: {est:?} vs {exact}"
        );
    }
}

#[test]
fn weighted_mixture_integrates_to_its_mass() {
    let m = GaussianMixture3::default_fit();
    let p = SincSqProposal::from_default_fit();
    let mut rng = stream_rng(11, 0);
    let mut acc = MomentAccumulator::default();
    for _ in 0..100_000 {
        let (x, q) = p.sample_truncated(&mut rng, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        acc.push(m.eval(x) / q / m.mass());
    }
    let est = acc.estimate();
    assert!((est.value - 1.0).abs() < 3.0 * est.stderr, "{est:?}");
}

#[test]
fn wrapped_normal_density_integrates_to_one() {
    for &sigma in &[0.01, 0.3, 1.0, 2.0] {
        let w = WrappedNormalProposal::new(2.5, sigma, 0.1);
        let n = 200_000;
        let s: f64 = (0..n)
            .map(|k| w.pdf(-PI + 2.0 * PI * (k as f64 + 0.5) / n as f64))
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64;
        assert!((s - 1.0).abs() < 1e-6, "σ={sigma}: {s}");
    }
}

#[test]
fn wrap_angle_range() {
    for k in -20..20 {
        let a = wrap_angle(0.37 * k as f64);
        assert!((-PI..PI).contains(&a));
    }
    assert_eq!(wrap_angle(PI), -PI);
}
