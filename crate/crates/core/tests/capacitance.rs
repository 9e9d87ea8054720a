use std::f64::consts::PI;

use wsquad::capacitance::{
    build_double_layer, capacitance_run, exact_capacitance, iterate_density, single_layer_energy, CapacitanceOptions,
    DensityState, DiagonalClosure,
};
use wsquad::surface::{triangulate, StarBody};
use wsquad::SummationPolicy;

fn run(
    body: &StarBody,
    n: usize,
    m: usize,
    iters: usize,
    opts: &CapacitanceOptions,
) -> wsquad::capacitance::CapacitanceResult {
    capacitance_run(body, n, m, iters, 1.0, opts).unwrap()
}

#[test]
fn table_resolutions_have_expected_panel_counts() {
    let body = StarBody::Sphere(1.0);
    for ((n, m), want) in [((40, 30), 2320), ((50, 40), 3900), ((60, 50), 5880)] {
        assert_eq!(triangulate(&body, n, m).unwrap().len(), want);
    }
}

#[test]
fn ellipsoid_with_equal_axes_is_the_sphere() {
    let a = triangulate(&StarBody::Sphere(1.0), 12, 8).unwrap();
    let b = triangulate(&StarBody::ellipsoid(1.0, 1.0, 1.0).unwrap(), 12, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sphere_identities() {
    let body = StarBody::Sphere(1.0);
    let surf = triangulate(&body, 40, 30).unwrap();
    let policy = SummationPolicy::default();

    let w = build_double_layer(&surf, DiagonalClosure::Row).unwrap();
    for &s in &w.offdiag_row_sums {
        assert!((-1.05..=-0.95).contains(&s), "row sum {s}");
    }
    let ones = vec![1.0; surf.len()];
    for v in w.apply(&ones, policy).unwrap() {
        assert!((v + 1.0).abs() < 1e-14, "{v}");
    }

    let areas = surf.areas();
    let mut state = DensityState::uniform(surf.len());
    for _ in 0..3 {
        state = iterate_density(&w, &state, &areas, policy).unwrap();
        assert!(state.values.iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    let j = single_layer_energy(&surf, &ones, policy).unwrap();
    assert!((j / (16.0 * PI * PI) - 1.0).abs() < 0.01, "J = {j}");
}

#[test]
fn adjoint_closure_conserves_charge() {
    let body = StarBody::ellipsoid(1.0, 1.0, 0.5).unwrap();
    let surf = triangulate(&body, 16, 10).unwrap();
    let w = build_double_layer(&surf, DiagonalClosure::Adjoint).unwrap();
    let areas = surf.areas();
    for k in 0..surf.len() {
        let col: f64 = (0..surf.len()).map(|j| areas[j] * w.get(j, k)).sum();
        assert!((col + areas[k]).abs() < 1e-12 * areas[k].max(1.0), "column {k}: {col}");
    }
}

#[test]
fn sphere_capacitance_at_table_resolution() {
    let body = StarBody::Sphere(1.0);
    let res = run(&body, 40, 30, 0, &CapacitanceOptions::default());
    assert!(res.relative_error().unwrap() < 0.02);
    assert_eq!(res.estimates.len(), 1);
}

#[test]
fn oblate_ellipsoids() {
    let opts = CapacitanceOptions::default();
    let half = StarBody::ellipsoid(1.0, 1.0, 0.5).unwrap();
    let res = run(&half, 40, 30, 4, &opts);
    let exact = res.exact.unwrap();
    assert!(res.relative_error().unwrap() < 0.05);
    assert!(res.estimates[0] <= 1.02 * exact);
    // Geometric decrease of the density updates.
    for w in res.density_changes.windows(2) {
        assert!(w[1] < 0.8 * w[0], "{:?}", res.density_changes);
    }
    // After one step the density is no longer uniform.
    let one = run(&half, 40, 30, 1, &opts);
    let d = &one.final_density;
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64;
    assert!(var.sqrt() / mean > 0.01);

    let near = StarBody::ellipsoid(1.0, 1.0, 0.9).unwrap();
    let res = run(&near, 50, 40, 3, &opts);
    assert!(res.relative_error().unwrap() < 0.04);
    for w in res.density_changes.windows(2) {
        assert!(w[1] < w[0], "{:?}", res.density_changes);
    }
}

#[test]
fn capacitance_scales_linearly() {
    let opts = CapacitanceOptions::default();
    let a = run(&StarBody::ellipsoid(1.0, 1.0, 0.3).unwrap(), 16, 10, 2, &opts);
    let b = run(&StarBody::ellipsoid(2.5, 2.5, 0.75).unwrap(), 16, 10, 2, &opts);
    for (x, y) in a.estimates.iter().zip(&b.estimates) {
        assert!((y / x - 2.5).abs() < 1e-10, "{x} {y}");
    }
    assert!((exact_capacitance(&StarBody::Sphere(2.5), 1.0).unwrap() - 10.0 * PI).abs() < 1e-12);
}

#[test]
fn triaxial_body_has_no_exact_value_but_runs() {
    let body = StarBody::ellipsoid(1.0, 0.8, 0.6).unwrap();
    let res = run(&body, 16, 10, 2, &CapacitanceOptions::default());
    assert!(res.exact.is_none());
    assert!(res.estimates.iter().all(|c| c.is_finite() && *c > 0.0));
}

#[test]
fn results_are_deterministic() {
    let body = StarBody::ellipsoid(1.0, 1.0, 0.2).unwrap();
    let opts = CapacitanceOptions::default();
    let a = run(&body, 20, 14, 2, &opts);
    let b = run(&body, 20, 14, 2, &opts);
    assert_eq!(a.estimates, b.estimates);
    assert_eq!(a.final_density, b.final_density);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(StarBody::ellipsoid(1.0, -1.0, 1.0).is_err());
    assert!(triangulate(&StarBody::Sphere(1.0), 12, 7).is_err());
    assert!(capacitance_run(&StarBody::Sphere(1.0), 12, 8, 0, 0.0, &CapacitanceOptions::default()).is_err());
}
