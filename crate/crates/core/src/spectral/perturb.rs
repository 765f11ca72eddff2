//! Masses of conformal perturbations `g' = u^{4/(n-2)} g` of the models.
//!
//! `Γ'` comes from the eigen-summed `Γ` through the covariance law. The
//! perturbed metric is flat near `P` in the gauge `V = u(P) W / u`, which
//! agrees with `g'` at `P`; a second, genuinely different flat gauge is built
//! by composing with a Möbius inversion fixing `P` and a constant rescaling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::solve::{solve_regular_part, RegularPartSolution, SolverOptions};
use crate::geometry::{conformal_coefficient_f64, BasePoint, ConformalFactor, FlatGauge, ModelGeometry};
use crate::kernels::{conformal_covariance_transform, GreenExpansion};
use crate::{Error, Result};

/// Finite-difference step for the curvature check.
const FD_STEP: f64 = 1e-2;

/// Default number of sample points for the positivity check.
pub const CURVATURE_SAMPLES: usize = 64;

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Seeded smooth perturbation `u = exp(ε h)` with `|h| ≤ 1`, built from low
/// eigenmodes damped by their eigenvalues so that `amplitude ≈ 0.25` keeps the
/// scalar curvature well inside the positive range.
pub fn random_perturbation(model: &ModelGeometry, seed: u64, amplitude: f64) -> Result<ConformalFactor> {
    model.require_admissible()?;
    let n = model.dimension().as_usize();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = format!("random perturbation (seed {seed}, amplitude {amplitude})");
    match model {
        ModelGeometry::RoundSphere { .. } | ModelGeometry::ProjectiveSpace { .. } => {
            let m = n + 1;
            let mut q = vec![vec![0.0f64; m]; m];
            for i in 0..m {
                for j in 0..=i {
                    let v = rng.random_range(-1.0..1.0);
                    q[i][j] = v;
                    q[j][i] = v;
                }
            }
            // Scale so that |xᵀQx| ≤ 1 on the unit sphere.
            let bound: f64 = q
                .iter()
                .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let quad = 1.0 / (bound * (1.0 + 2.0 * m as f64));
            let lin = if matches!(model, ModelGeometry::RoundSphere { .. }) {
                let d = random_unit(&mut rng, m);
                d.into_iter().map(|v| v / (1.0 + n as f64)).collect()
            } else {
                vec![0.0; m]
            };
            Ok(ConformalFactor::analytic(label, move |x| {
                let mut h = 0.0;
                for i in 0..m {
                    h += lin[i] * x[i];
                    for j in 0..m {
                        h += quad * q[i][j] * x[i] * x[j];
                    }
                }
                (amplitude * h).exp()
            }))
        }
        ModelGeometry::CylinderQuotient { length, .. } => {
            let length = *length;
            let modes: Vec<(f64, f64, f64)> = (1..=2)
                .map(|k| {
                    let w = 2.0 * PI * k as f64 / length;
                    let a = rng.random_range(-1.0..1.0) / (2.0 * (1.0 + w * w));
                    (w, a, rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            let w1 = 2.0 * PI / length;
            let dir: Vec<f64> = random_unit(&mut rng, n)
                .into_iter()
                .map(|v| v / (2.0 * (n as f64 + w1 * w1)))
                .collect();
            let phase = rng.random_range(0.0..2.0 * PI);
            Ok(ConformalFactor::analytic(label, move |x| {
                let r = norm(x);
                let t = r.ln();
                let mut h: f64 = modes.iter().map(|(w, a, ph)| a * (w * t + ph).cos()).sum();
                let side: f64 = dir.iter().zip(x).map(|(c, v)| c * v / r).sum();
                h += side * (w1 * t + phase).cos();
                (amplitude * h).exp()
            }))
        }
        ModelGeometry::FlatTorus { .. } => unreachable!("rejected as inadmissible"),
    }
}

/// `Σ_i ∂_i² F` by fourth-order central differences at `y`.
fn flat_laplacian<F: Fn(&[f64]) -> f64>(f: F, y: &[f64]) -> f64 {
    let h = FD_STEP;
    let f0 = f(y);
    let mut acc = 0.0;
    let mut z = y.to_vec();
    for i in 0..y.len() {
        let mut at = |s: f64| {
            z[i] = y[i] + s;
            let v = f(&z);
            z[i] = y[i];
            v
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        acc += (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    }
    acc
}

/// Scalar curvature of `u^{4/(n-2)} g` at the model point `x`, from
/// `scal = F^{-(n+2)/(n-2)} c_n (-ΣF_ii)` for the metric `F^{4/(n-2)}|dy|²`.
pub fn perturbed_scalar_curvature(model: &ModelGeometry, u: &ConformalFactor, x: &[f64]) -> Result<f64> {
    let dim = model.dimension();
    let n = dim.as_f64();
    let (f0, lap) = match model {
        ModelGeometry::RoundSphere { .. } | ModelGeometry::ProjectiveSpace { .. } => {
            let chart = FlatGauge::new(model, &BasePoint::on_sphere(x.to_vec())?)?;
            let f = |y: &[f64]| u.value(&chart.to_model(y)) / chart.factor_at(y);
            let origin = vec![0.0; dim.as_usize()];
            (f(&origin), flat_laplacian(f, &origin))
        }
        ModelGeometry::CylinderQuotient { .. } => {
            let f = |y: &[f64]| u.value(y) * norm(y).powf(-0.5 * (n - 2.0));
            (f(x), flat_laplacian(f, x))
        }
        ModelGeometry::FlatTorus { .. } => return Err(Error::NotInvertible(model.to_string())),
    };
    Ok(f0.powf(-(n + 2.0) / (n - 2.0)) * conformal_coefficient_f64(dim) * -lap)
}

fn sample_points(model: &ModelGeometry, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = model.dimension().as_usize();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1_ab1e);
    (0..count)
        .map(|_| match model {
            ModelGeometry::CylinderQuotient { length, .. } => {
                let t = rng.random_range(0.0..*length);
                random_unit(&mut rng, n).into_iter().map(|v| v * t.exp()).collect()
            }
            _ => random_unit(&mut rng, n + 1),
        })
        .collect()
}

/// Smallest perturbed scalar curvature over `count` seeded sample points
/// (plus `P`); errors at the first non-positive value.
pub fn check_scalar_curvature(
    model: &ModelGeometry,
    u: &ConformalFactor,
    p: &BasePoint,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let mut min = f64::INFINITY;
    let points = std::iter::once(p.coords.clone()).chain(sample_points(model, count, seed));
    for x in points {
        let value = perturbed_scalar_curvature(model, u, &x)?;
        if !(value > 0.0) {
            return Err(Error::CurvatureViolation { point: x, value });
        }
        min = min.min(value);
    }
    Ok(min)
}

/// Where the second gauge puts its inversion centre and how much it rescales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondGauge {
    pub scale: f64,
    /// Inversion centre in units of the first gauge's sampling radius.
    pub center: Vec<f64>,
}

impl SecondGauge {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let scale = rng.random_range(0.5..2.0);
        let center = random_unit(&mut rng, n).into_iter().map(|v| 4.0 * v).collect();
        Self { scale, center }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedMass {
    /// Mass of `g'` in the gauge `u(P) W / u`.
    pub mass: f64,
    pub error_estimate: f64,
    /// Mass read in the inverted and rescaled gauge; equals `mass / scale²`.
    pub second_gauge_mass: f64,
    pub second_gauge_error: f64,
    pub second_gauge: SecondGauge,
    pub min_scalar_curvature: f64,
    pub u_at_p: f64,
    pub signs_agree: bool,
}

/// Sign with a dead zone of width `tol`.
fn sign(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

/// Mass of `u^{4/(n-2)} g` at the solution's pole, reusing its eigen-sum.
pub fn perturbed_mass_from(solution: &RegularPartSolution, u: &ConformalFactor, seed: u64) -> Result<PerturbedMass> {
    let model = solution.model();
    let p = solution.base_point();
    let dim = model.dimension();
    let n = dim.as_f64();
    let min_scalar_curvature = check_scalar_curvature(model, u, p, CURVATURE_SAMPLES, seed)?;
    let chart = solution.chart().clone();
    let radius = solution.sampling_radius();
    let u_p = u.value(&p.coords);
    let w = solution.gauge_factor();
    let v = ConformalFactor::analytic(format!("{u_p} W / ({})", u.label()), {
        let (u, w) = (u.clone(), w.clone());
        move |x| u_p * w.value(x) / u.value(x)
    })
    .with_flat_radius(chart.embedding_radius());

    // Γ' in the gauge V, as a function of the first chart's coordinates Y.
    let green_v = |y: &[f64]| -> Result<f64> {
        let x = chart.to_model(y);
        let perturbed = conformal_covariance_transform(&solution.green_value(&x)?, u);
        Ok(conformal_covariance_transform(&perturbed, &v).value)
    };

    // V^{4/(n-2)} g' = u(P)^{4/(n-2)} |dY|², so Z = u(P)^{2/(n-2)} Y is flat.
    let s1 = u_p.powf(2.0 / (n - 2.0));
    let first = GreenExpansion::from_flat_coordinates(
        dim,
        s1 * radius,
        v.clone().with_flat_radius(s1 * radius),
        |z| green_v(&z.iter().map(|c| c / s1).collect::<Vec<_>>()),
        &solution_richardson(solution),
    )?;

    // Inversion ι in the sphere through 0 centred at Y₀, then rescaling by λ.
    let second_gauge = SecondGauge::random(dim.as_usize(), seed);
    let y0: Vec<f64> = second_gauge.center.iter().map(|c| c * radius).collect();
    let r2 = y0.iter().map(|c| c * c).sum::<f64>();
    let lambda = second_gauge.scale;
    let s2 = (lambda * u_p).powf(2.0 / (n - 2.0));
    let second_radius = 0.8 * s2 * radius;
    let second = GreenExpansion::from_flat_coordinates(
        dim,
        second_radius,
        ConformalFactor::analytic("inverted gauge", |_| 1.0).with_flat_radius(second_radius),
        |z| {
            let a: Vec<f64> = z.iter().map(|c| c / s2).collect();
            let d: Vec<f64> = a.iter().zip(&y0).map(|(ai, ci)| ai - ci).collect();
            let d2 = d.iter().map(|c| c * c).sum::<f64>();
            let y: Vec<f64> = y0.iter().zip(&d).map(|(ci, di)| ci + r2 * di / d2).collect();
            let dy = norm(&y.iter().zip(&y0).map(|(a, b)| a - b).collect::<Vec<_>>());
            let phi = (r2.sqrt() / dy).powf(n - 2.0);
            Ok(green_v(&y)? / (lambda * lambda * phi))
        },
        &solution_richardson(solution),
    )?;

    let tol = 1e-6;
    Ok(PerturbedMass {
        mass: first.mass,
        error_estimate: first.error_estimate,
        second_gauge_mass: second.mass,
        second_gauge_error: second.error_estimate,
        second_gauge,
        min_scalar_curvature,
        u_at_p: u_p,
        signs_agree: sign(first.mass, tol) == sign(second.mass, tol),
    })
}

fn solution_richardson(solution: &RegularPartSolution) -> crate::extrapolate::RichardsonOptions {
    solution.richardson()
}

/// Solves on the model and returns the mass of `u^{4/(n-2)} g` at `p`.
pub fn perturbed_mass(
    model: &ModelGeometry,
    p: &BasePoint,
    u: &ConformalFactor,
    options: &SolverOptions,
    seed: u64,
) -> Result<PerturbedMass> {
    // Reject before paying for the solve.
    check_scalar_curvature(model, u, p, CURVATURE_SAMPLES, seed)?;
    let solution = solve_regular_part(model, p, options)?;
    perturbed_mass_from(&solution, u, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::projective_mass;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unperturbed_curvature_is_recovered() {
        for model in [
            ModelGeometry::sphere(4).unwrap(),
            ModelGeometry::projective(6).unwrap(),
            ModelGeometry::cylinder(4, 2.0).unwrap(),
        ] {
            let one = ConformalFactor::identity();
            for x in sample_points(&model, 5, 1) {
                let s = perturbed_scalar_curvature(&model, &one, &x).unwrap();
                assert_abs_diff_eq!(s, model.scalar_curvature(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn mobius_factor_keeps_round_curvature() {
        // Pull-back of the round metric by a conformal automorphism.
        let model = ModelGeometry::sphere(4).unwrap();
        let a = [0.3, -0.2, 0.1, 0.0, 0.4];
        let a2: f64 = a.iter().map(|v| v * v).sum();
        let u = ConformalFactor::analytic("mobius", move |x| {
            let ax: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            ((1.0 - a2).sqrt() / (1.0 - ax)).powf(1.0)
        });
        for x in sample_points(&model, 5, 2) {
            assert_abs_diff_eq!(
                perturbed_scalar_curvature(&model, &u, &x).unwrap(),
                12.0,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn large_perturbation_is_rejected() {
        let model = ModelGeometry::projective(4).unwrap();
        let u = ConformalFactor::analytic("spike", |x: &[f64]| (8.0 * x[1] * x[1]).exp());
        let err = check_scalar_curvature(&model, &u, &model.default_base_point(), 64, 0).unwrap_err();
        assert!(matches!(err, Error::CurvatureViolation { value, .. } if value <= 0.0));
    }

    #[test]
    fn identity_factor_gives_unperturbed_mass() {
        let model = ModelGeometry::projective(4).unwrap();
        let p = model.default_base_point();
        let m = perturbed_mass(&model, &p, &ConformalFactor::identity(), &SolverOptions::default(), 0).unwrap();
        let exact = projective_mass(model.dimension()).unwrap();
        assert_abs_diff_eq!(m.mass, exact, epsilon = 1e-8);
        let scale = m.second_gauge.scale;
        assert_abs_diff_eq!(m.second_gauge_mass, exact / (scale * scale), epsilon = 1e-8);
        assert!(m.signs_agree);
    }

    #[test]
    fn perturbed_mass_scales_with_u_at_p() {
        let model = ModelGeometry::projective(4).unwrap();
        let p = model.default_base_point();
        let sol = solve_regular_part(&model, &p, &SolverOptions::default()).unwrap();
        let exact = projective_mass(model.dimension()).unwrap();
        for seed in 0..3 {
            let u = random_perturbation(&model, seed, 0.25).unwrap();
            let m = perturbed_mass_from(&sol, &u, seed).unwrap();
            assert!(m.min_scalar_curvature > 0.0);
            assert_abs_diff_eq!(m.mass * m.u_at_p * m.u_at_p, exact, epsilon = 1e-7);
            assert!(m.signs_agree && m.mass > 0.0);
        }
    }
}
