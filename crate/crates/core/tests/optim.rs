use pdcsim::optim::*;

#[test]
fn rosenbrock() {
    let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
    let m = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions::default());
    assert!(m.converged);
    assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
}

#[test]
fn quadratic_bowl_in_four_dimensions() {
    let f = |x: &[f64]| {
        x.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2))
            .sum()
    };
    let m = nelder_mead(f, &[0.0; 4], &NelderMeadOptions::default());
    for v in &m.x {
        assert!((v - 0.5).abs() < 1e-6);
    }
}

#[test]
fn nan_is_treated_as_worse() {
    let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
    let m = nelder_mead(f, &[0.5], &NelderMeadOptions::default());
    assert!((m.x[0] - 1.0).abs() < 1e-6);
}
