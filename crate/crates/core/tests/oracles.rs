//! Spectral Green functions against the closed forms, across models and degrees.

use conformal_mass::geometry::ModelGeometry;
use conformal_mass::kernels::model_green;
use conformal_mass::spectral::{solve_regular_part, SolverOptions};

fn options(degree: usize) -> SolverOptions {
    // Low degrees are solved only to watch the error fall.
    SolverOptions { residual_tolerance: 1.0, ..SolverOptions::default() }.with_degree(degree)
}

#[test]
fn sphere_green_error_falls_with_degree() {
    let model = ModelGeometry::sphere(4).unwrap();
    let p = model.default_base_point();
    let x = [0.0, 1.0, 0.0, 0.0, 0.0];
    let exact = model_green(&model, &p, &x).unwrap().value;
    let errors: Vec<f64> = [25, 50, 100, 200]
        .into_iter()
        .map(|d| {
            let sol = solve_regular_part(&model, &p, &options(d)).unwrap();
            (sol.green_value(&x).unwrap().value - exact).abs()
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] < 1e-8, "{errors:?}");
}

#[test]
fn spectral_values_match_closed_forms_away_from_the_pole() {
    let s = 0.5f64.sqrt();
    for (model, points) in [
        (
            ModelGeometry::projective(4).unwrap(),
            vec![vec![s, s, 0.0, 0.0, 0.0], vec![0.0, 0.6, 0.0, 0.8, 0.0]],
        ),
        (
            ModelGeometry::cylinder(4, 2.0).unwrap(),
            vec![vec![0.0, 1.5, 0.0, 0.0], vec![-2.0, 0.3, 1.0, 0.0]],
        ),
        (
            ModelGeometry::projective(6).unwrap(),
            vec![vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]],
        ),
    ] {
        let p = model.default_base_point();
        let sol = solve_regular_part(&model, &p, &SolverOptions::default()).unwrap();
        for x in points {
            let exact = model_green(&model, &p, &x).unwrap().value;
            let value = sol.green_value(&x).unwrap().value;
            assert!((value - exact).abs() < 1e-6 * exact.abs().max(1e-3), "{model} at {x:?}: {value} vs {exact}");
        }
    }
}
