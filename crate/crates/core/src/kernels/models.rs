//! Closed forms and image sums on the sphere, `RPⁿ` and the cylinder quotient.

use super::{flat_kernel, leading_normalization, KernelEvaluation, KernelMethod};
use crate::geometry::{BasePoint, Chart, Dimension, FlatGauge, ModelGeometry};
use crate::summation::NeumaierSum;
use crate::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_sphere_points(n: Dimension, p: &BasePoint, x: &[f64]) -> Result<()> {
    let dim = n.as_usize() + 1;
    if p.chart != Chart::Ambient || p.coords.len() != dim || x.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "sphere points must be unit vectors of R^{dim}"
        )));
    }
    if (norm(x) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("target is not on the unit sphere".into()));
    }
    Ok(())
}

/// Stereographic pole far from both `p` and `x`.
fn chart_pole(p: &[f64], x: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = p.iter().zip(x).map(|(a, b)| -(a + b)).collect();
    let ns = norm(&s);
    if ns > 1e-3 {
        return s.into_iter().map(|v| v / ns).collect();
    }
    // x ≈ -p: any pole orthogonal to p is at distance √2 from both.
    let axis = (0..p.len())
        .min_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()))
        .unwrap_or(0);
    let mut q = vec![0.0; p.len()];
    q[axis] = 1.0;
    let c = dot(&q, p);
    q.iter_mut().zip(p).for_each(|(qi, pi)| *qi -= c * pi);
    let nq = norm(&q);
    q.into_iter().map(|v| v / nq).collect()
}

/// Green function on the unit round `Sⁿ`, by pulling back the flat kernel
/// through a stereographic chart whose pole avoids both points.
pub fn sphere_green(n: Dimension, p: &BasePoint, x: &[f64]) -> Result<KernelEvaluation> {
    check_sphere_points(n, p, x)?;
    let q = chart_pole(&p.coords, x);
    let project = |z: &[f64]| -> (Vec<f64>, f64) {
        let c = dot(z, &q);
        let s = 1.0 - c;
        let image = z.iter().zip(&q).map(|(zi, qi)| (zi - c * qi) / s).collect();
        // |dX|² = u^{4/(n-2)} g with u = (1 - ⟨z,q⟩)^{-(n-2)/2}.
        (image, s.powf(-(n.as_f64() - 2.0) / 2.0))
    };
    let (xp, up) = project(&p.coords);
    let (xx, ux) = project(x);
    let d: Vec<f64> = xp.iter().zip(&xx).map(|(a, b)| a - b).collect();
    let value = up * ux * flat_kernel(n, norm(&d))?;
    Ok(KernelEvaluation {
        source: p.clone(),
        target: x.to_vec(),
        value,
        method: KernelMethod::ClosedForm,
    })
}

/// Green function on `RPⁿ = Sⁿ/±1`: the lift is `Γ^S_P + Γ^S_{-P}`.
pub fn projective_green(n: Dimension, p: &BasePoint, x: &[f64]) -> Result<KernelEvaluation> {
    let minus = BasePoint {
        coords: p.coords.iter().map(|v| -v).collect(),
        chart: Chart::Ambient,
    };
    let direct = sphere_green(n, p, x)?;
    let image = sphere_green(n, &minus, x)?;
    Ok(KernelEvaluation {
        value: direct.value + image.value,
        ..direct
    })
}

/// Mass of `RPⁿ` at `P`: the antipodal summand read in the flat gauge at `P`.
pub fn projective_mass_at(n: Dimension, p: &BasePoint) -> Result<f64> {
    let model = ModelGeometry::ProjectiveSpace { n };
    let gauge = FlatGauge::new(&model, p)?;
    let minus = BasePoint {
        coords: p.coords.iter().map(|v| -v).collect(),
        chart: Chart::Ambient,
    };
    let image = sphere_green(n, &minus, &p.coords)?;
    Ok(image.value / (gauge.factor(&p.coords) * gauge.factor(&p.coords)))
}

/// `2^{2-n}/(4(n-1)ω_{n-1})`, the same at every point.
pub fn projective_mass(n: Dimension) -> Result<f64> {
    let model = ModelGeometry::ProjectiveSpace { n };
    let value = projective_mass_at(n, &model.default_base_point())?;
    let closed = leading_normalization(n) * 2f64.powf(2.0 - n.as_f64());
    debug_assert!((value - closed).abs() <= 1e-14 * closed);
    Ok(value)
}

/// Stopping rule for image sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSumOptions {
    /// Stop once the tail bound is below this fraction of the partial sum.
    pub relative_tolerance: f64,
    pub max_images: usize,
}

impl Default for ImageSumOptions {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-14,
            max_images: 100_000,
        }
    }
}

fn cylinder_length(model: &ModelGeometry) -> Result<(Dimension, f64)> {
    match model {
        ModelGeometry::CylinderQuotient { n, length } => Ok((*n, *length)),
        other => Err(Error::InvalidModel(format!("{other} is not a cylinder quotient"))),
    }
}

/// Green function of `(ℝⁿ∖0)/(x ~ e^L x)` with metric `|x|^{-2}|dx|²`:
/// `Σ_k (|P||x|e^{kL})^{(n-2)/2} K(|x - e^{kL}P|)`, summed `k = 0, ±1, ±2, …`.
pub fn cylinder_green(
    model: &ModelGeometry,
    p: &BasePoint,
    x: &[f64],
    options: &ImageSumOptions,
) -> Result<KernelEvaluation> {
    let (n, length) = cylinder_length(model)?;
    let dim = n.as_usize();
    if p.chart != Chart::Punctured || p.coords.len() != dim || x.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "cylinder points must be nonzero vectors of R^{dim}"
        )));
    }
    let (rp, rx) = (norm(&p.coords), norm(x));
    if !(rx > 0.0) {
        return Err(Error::InvalidArgument("cylinder target must be nonzero".into()));
    }
    let half = (n.as_f64() - 2.0) / 2.0;
    let c = leading_normalization(n);
    let term = |k: i64| -> Result<f64> {
        let s = (k as f64 * length).exp();
        let d: Vec<f64> = x.iter().zip(&p.coords).map(|(a, b)| a - s * b).collect();
        Ok((rp * rx * s).powf(half) * flat_kernel(n, norm(&d))?)
    };
    // Tail bounds: for e^{kL}|P| ≥ 2|x| the k-th term is at most
    // 2^{n-2}(|x|/|P|)^{(n-2)/2} q^k c with q = e^{-(n-2)L/2}; symmetrically
    // for negative k once e^{kL}|P| ≤ |x|/2.
    let q = (-half * length).exp();
    let bound_pos = 2f64.powf(n.as_f64() - 2.0) * (rx / rp).powf(half) * c / (1.0 - q);
    let bound_neg = 2f64.powf(n.as_f64() - 2.0) * (rp / rx).powf(half) * c / (1.0 - q);

    let mut sum = NeumaierSum::new();
    sum.add(term(0)?);
    let mut tail = f64::INFINITY;
    for m in 1..=options.max_images as i64 {
        sum.add(term(m)?);
        sum.add(term(-m)?);
        let next = (m + 1) as f64 * length;
        let pos_ok = next.exp() * rp >= 2.0 * rx;
        let neg_ok = (-next).exp() * rp <= 0.5 * rx;
        if pos_ok && neg_ok {
            let qm = q.powi(m as i32 + 1);
            tail = qm * (bound_pos + bound_neg);
            if tail < options.relative_tolerance * sum.value().abs() {
                return Ok(KernelEvaluation {
                    source: p.clone(),
                    target: x.to_vec(),
                    value: sum.value(),
                    method: KernelMethod::ImageSum,
                });
            }
        }
    }
    Err(Error::ImageSum {
        terms: 2 * options.max_images + 1,
        tail,
        partial: sum.value(),
    })
}

/// `(1/(2(n-1)ω_{n-1})) Σ_{k≥1} (2 sinh(kL/2))^{2-n}`.
pub fn cylinder_mass(model: &ModelGeometry) -> Result<f64> {
    let (n, length) = cylinder_length(model)?;
    let e = n.as_f64() - 2.0;
    let q = (-e * length / 2.0).exp();
    let floor = (1.0 - (-length).exp()).powf(-e);
    let mut sum = NeumaierSum::new();
    for k in 1..=1_000_000i32 {
        sum.add((2.0 * (k as f64 * length / 2.0).sinh()).powf(-e));
        // (2 sinh(jL/2))^{-e} ≤ q^j (1 - e^{-L})^{-e}.
        let tail = q.powi(k + 1) / (1.0 - q) * floor;
        if tail < 1e-16 * sum.value() {
            return Ok(2.0 * leading_normalization(n) * sum.value());
        }
    }
    Err(Error::NonConvergence {
        what: "cylinder mass series".into(),
        residual: f64::NAN,
    })
}

/// Cylinder mass read directly off the image sum at `P`: the `k ≠ 0` images
/// in the flat gauge.
pub fn cylinder_mass_image_sum(model: &ModelGeometry, p: &BasePoint) -> Result<f64> {
    let (n, length) = cylinder_length(model)?;
    let gauge = FlatGauge::new(model, p)?;
    let rp = norm(&p.coords);
    let half = (n.as_f64() - 2.0) / 2.0;
    let mut sum = NeumaierSum::new();
    for k in 1..=100_000i64 {
        for s in [k, -k] {
            let f = (s as f64 * length).exp();
            sum.add(f.powf(half) * rp.powf(2.0 * half) * flat_kernel(n, rp * (f - 1.0).abs())?);
        }
        if (-(k as f64) * half * length).exp() < 1e-17 {
            break;
        }
    }
    Ok(sum.value() / gauge.factor(&p.coords).powi(2))
}

/// Green function of any admissible model, closed form or image sum.
pub fn model_green(model: &ModelGeometry, p: &BasePoint, x: &[f64]) -> Result<KernelEvaluation> {
    model.require_admissible()?;
    match model {
        ModelGeometry::RoundSphere { n } => sphere_green(*n, p, x),
        ModelGeometry::ProjectiveSpace { n } => projective_green(*n, p, x),
        ModelGeometry::CylinderQuotient { .. } => cylinder_green(model, p, x, &ImageSumOptions::default()),
        ModelGeometry::FlatTorus { .. } => Err(Error::NotInvertible(model.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConformalFactor;
    use crate::kernels::conformal_covariance_transform;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nv = norm(&v);
            if nv > 0.1 && nv <= 1.0 {
                return v.into_iter().map(|c| c / nv).collect();
            }
        }
    }

    fn chordal(n: Dimension, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        leading_normalization(n) * norm(&d).powf(2.0 - n.as_f64())
    }

    #[test]
    fn sphere_green_matches_chordal_form_and_is_symmetric() {
        let n = Dimension::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_unit(&mut rng, 5);
            let b = random_unit(&mut rng, 5);
            let pa = BasePoint::on_sphere(a.clone()).unwrap();
            let pb = BasePoint::on_sphere(b.clone()).unwrap();
            let gab = sphere_green(n, &pa, &b).unwrap().value;
            let gba = sphere_green(n, &pb, &a).unwrap().value;
            assert_relative_eq!(gab, gba, max_relative = 1e-12);
            assert_relative_eq!(gab, chordal(n, &a, &b), max_relative = 1e-12);
            assert!(gab > 0.0);
        }
        // Antipodal pair, where the default chart would be singular.
        let p = BasePoint::on_sphere(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let g = sphere_green(n, &p, &[0.0, 0.0, -1.0, 0.0, 0.0]).unwrap().value;
        assert_relative_eq!(g, leading_normalization(n) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn stereographic_transform_gives_flat_kernel() {
        let n = Dimension::new(4).unwrap();
        let model = ModelGeometry::RoundSphere { n };
        let p = BasePoint::on_sphere(vec![0.2, 0.1, -0.4, 0.3, 0.8]).unwrap();
        let gauge = FlatGauge::new(&model, &p).unwrap();
        let g = gauge.clone();
        let u = ConformalFactor::analytic("stereographic", move |x| g.factor(x));
        for y in [[0.3, 0.0, -0.2, 0.1], [1.5, 2.0, -0.7, 0.4], [-4.0, 1.0, 0.0, 3.0]] {
            let x = gauge.to_model(&y);
            let k = sphere_green(n, &p, &x).unwrap();
            let t = conformal_covariance_transform(&k, &u);
            assert_relative_eq!(t.value, flat_kernel(n, norm(&y)).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn projective_mass_closed_form_and_homogeneity() {
        let n = Dimension::new(4).unwrap();
        let m = projective_mass(n).unwrap();
        assert_relative_eq!(m, 1.0 / (96.0 * PI * PI), max_relative = 1e-14);
        assert!(m > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = BasePoint::on_sphere(random_unit(&mut rng, 5)).unwrap();
            assert_abs_diff_eq!(projective_mass_at(n, &p).unwrap(), m, epsilon = 1e-12);
        }
        for n in [6u32, 8] {
            let dim = Dimension::even(n).unwrap();
            let expected = leading_normalization(dim) * 2f64.powi(2 - n as i32);
            assert_relative_eq!(projective_mass(dim).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn projective_green_is_antipodally_invariant() {
        let n = Dimension::new(4).unwrap();
        let p = BasePoint::on_sphere(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let x = [0.6, 0.0, 0.8, 0.0, 0.0];
        let mx: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = projective_green(n, &p, &x).unwrap().value;
        let b = projective_green(n, &p, &mx).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn cylinder_mass_reference_values() {
        for (l, expected) in [
            (0.5, 4.74639333e-02),
            (1.0, 1.00189826e-02),
            (2.0, 1.71317367e-03),
            (4.0, 1.63358491e-04),
        ] {
            let model = ModelGeometry::cylinder(4, l).unwrap();
            let m = cylinder_mass(&model).unwrap();
            assert_relative_eq!(m, expected, max_relative = 1e-8);
            let p = model.default_base_point();
            assert_relative_eq!(cylinder_mass_image_sum(&model, &p).unwrap(), m, max_relative = 1e-13);
        }
    }

    #[test]
    fn cylinder_green_symmetry_positivity_and_periodicity() {
        let model = ModelGeometry::cylinder(4, 1.0).unwrap();
        let opts = ImageSumOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a: Vec<f64> = random_unit(&mut rng, 4)
                .iter()
                .map(|v| v * rng.random_range(0.5..3.0))
                .collect();
            let b: Vec<f64> = random_unit(&mut rng, 4)
                .iter()
                .map(|v| v * rng.random_range(0.5..3.0))
                .collect();
            let pa = BasePoint {
                coords: a.clone(),
                chart: Chart::Punctured,
            };
            let pb = BasePoint {
                coords: b.clone(),
                chart: Chart::Punctured,
            };
            let gab = cylinder_green(&model, &pa, &b, &opts).unwrap().value;
            let gba = cylinder_green(&model, &pb, &a, &opts).unwrap().value;
            assert_relative_eq!(gab, gba, max_relative = 1e-12);
            assert!(gab > 0.0);
            let shifted: Vec<f64> = b.iter().map(|v| v * 1f64.exp()).collect();
            let gs = cylinder_green(&model, &pa, &shifted, &opts).unwrap().value;
            assert_relative_eq!(gab, gs, max_relative = 1e-12);
        }
    }

    #[test]
    fn cylinder_image_sum_reports_truncation_failure() {
        let model = ModelGeometry::cylinder(4, 0.01).unwrap();
        let p = model.default_base_point();
        let opts = ImageSumOptions {
            relative_tolerance: 1e-14,
            max_images: 5,
        };
        let err = cylinder_green(&model, &p, &[0.0, 1.0, 0.0, 0.0], &opts).unwrap_err();
        assert!(matches!(err, Error::ImageSum { .. }));
    }

    #[test]
    fn model_green_rejects_torus() {
        let t = ModelGeometry::torus(4, vec![1.0; 4]).unwrap();
        let p = t.default_base_point();
        assert!(matches!(model_green(&t, &p, &[0.5; 4]), Err(Error::NotInvertible(_))));
    }
}
