//! Green functions by parametrix subtraction and eigen-expansion.
//!
//! With `Φ = η(ρ)·W·K(ρ)` (cut-off times the flat kernel, carried to the
//! model by the gauge factor `W`), `L_g Φ = δ_P + f` where `f` is smooth and
//! supported where `η` ramps down. Then `Γ_P = Φ + w` with `L_g w = -f`,
//! which is solved mode by mode. Quotients use the push-forward of `Φ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::basis::{
    cylinder_eigenvalue, cylinder_frequency_cutoff, harmonic_dimension, sphere_eigenvalue, zonal_harmonics,
};
use crate::extrapolate::RichardsonOptions;
use crate::geometry::{
    conformal_coefficient_f64, sphere_volume, BasePoint, ConformalFactor, Cutoff, CutoffProfile, Dimension, FlatGauge,
    ModelGeometry,
};
use crate::kernels::{
    conformal_covariance_transform, flat_kernel, flat_kernel_derivative, GreenExpansion, KernelEvaluation, KernelMethod,
};
use crate::quadrature::ZonalRule;
use crate::summation::NeumaierSum;
use crate::{Error, Result};

/// Knobs of [`solve_regular_part`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Highest harmonic degree kept.
    pub degree: usize,
    /// Cut-off radius `r₀` in gauge units; `η = 1` on `B(r₀/2)`, `0` outside `B(r₀)`.
    pub cutoff_radius: Option<f64>,
    pub profile: CutoffProfile,
    /// Largest admissible relative residual.
    pub residual_tolerance: f64,
    /// Extra degrees (and frequencies) projected only to estimate the residual.
    pub guard: usize,
    /// Multiplies the point source.
    pub strength: f64,
    pub richardson: RichardsonOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            degree: 200,
            cutoff_radius: None,
            profile: CutoffProfile::default(),
            residual_tolerance: 1e-2,
            guard: 32,
            strength: 1.0,
            richardson: RichardsonOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }
}

/// `1.5` on spheres and `RPⁿ`, `0.9` on the cylinder.
pub fn default_cutoff_radius(model: &ModelGeometry) -> f64 {
    match model {
        ModelGeometry::CylinderQuotient { .. } => 0.9,
        _ => 1.5,
    }
}

#[derive(Debug, Clone)]
enum Representation {
    Zonal {
        coefficients: Vec<f64>,
        antipodal: bool,
    },
    Cylinder {
        length: f64,
        /// `[k][l]` for `k = 0..=kmax`; negative `k` by conjugation.
        coefficients: Vec<Vec<Complex64>>,
    },
}

/// `w = Γ_P - Φ` in eigen-coefficients, plus the data needed to rebuild `Γ_P`.
#[derive(Debug, Clone)]
pub struct RegularPartSolution {
    model: ModelGeometry,
    base: BasePoint,
    chart: FlatGauge,
    cutoff: Cutoff,
    strength: f64,
    degree: usize,
    residual: f64,
    richardson: RichardsonOptions,
    repr: Representation,
}

/// Spectral mass with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralMass {
    /// Richardson limit of the averaged regular part.
    pub mass: f64,
    pub error_estimate: f64,
    /// `w(P)` plus the cut-off images at `P`.
    pub direct: f64,
    pub residual: f64,
    pub degree: usize,
}

struct Parametrix {
    n: Dimension,
    cutoff: Cutoff,
    strength: f64,
}

impl Parametrix {
    /// `η W K` at gauge radius `ρ` with gauge factor `W`.
    fn value(&self, rho: f64, w: f64) -> Result<f64> {
        let eta = self.cutoff.value(rho);
        if eta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.strength * eta * w * flat_kernel(self.n, rho)?)
    }

    /// `L_g(η W K)` away from the pole:
    /// `W^{(n+2)/(n-2)} c_n (-η''K - 2η'K' - (n-1)η'K/ρ)`.
    fn source(&self, rho: f64, w: f64) -> Result<f64> {
        if !self.cutoff.in_transition(rho) {
            return Ok(0.0);
        }
        let n = self.n.as_f64();
        let (_, d1, d2) = self.cutoff.with_derivatives(rho);
        let k = flat_kernel(self.n, rho)?;
        let dk = flat_kernel_derivative(self.n, rho)?;
        let lap = -d2 * k - 2.0 * d1 * dk - (n - 1.0) * d1 * k / rho;
        Ok(self.strength * w.powf((n + 2.0) / (n - 2.0)) * conformal_coefficient_f64(self.n) * lap)
    }
}

fn sphere_radius(theta: f64) -> f64 {
    2.0 * (0.5 * theta).tan()
}

fn sphere_weight(n: Dimension, rho: f64) -> f64 {
    (1.0 + 0.25 * rho * rho).powf(0.5 * (n.as_f64() - 2.0))
}

/// Solves for the regular part of `Γ_P` on an admissible model.
pub fn solve_regular_part(
    model: &ModelGeometry,
    p: &BasePoint,
    options: &SolverOptions,
) -> Result<RegularPartSolution> {
    model.require_admissible()?;
    let chart = FlatGauge::new(model, p)?;
    let r0 = options.cutoff_radius.unwrap_or_else(|| default_cutoff_radius(model));
    if !(r0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cut-off radius must be positive, got {r0}"
        )));
    }
    let limit = match model {
        ModelGeometry::ProjectiveSpace { .. } => 2.0,
        _ => f64::INFINITY,
    };
    if r0 >= limit {
        return Err(Error::InvalidArgument(format!(
            "cut-off radius {r0} must stay below {limit} on {model}"
        )));
    }
    let parametrix = Parametrix {
        n: model.dimension(),
        cutoff: Cutoff::new(r0, options.profile),
        strength: options.strength,
    };
    let (repr, residual) = match model {
        ModelGeometry::RoundSphere { .. } => solve_zonal(&parametrix, options, false)?,
        ModelGeometry::ProjectiveSpace { .. } => solve_zonal(&parametrix, options, true)?,
        ModelGeometry::CylinderQuotient { length, .. } => solve_cylinder(&parametrix, *length, options)?,
        ModelGeometry::FlatTorus { .. } => unreachable!("rejected as inadmissible"),
    };
    if !(residual <= options.residual_tolerance) {
        return Err(Error::Residual {
            residual,
            tolerance: options.residual_tolerance,
            degree: options.degree,
        });
    }
    Ok(RegularPartSolution {
        model: model.clone(),
        base: p.clone(),
        chart,
        cutoff: parametrix.cutoff,
        strength: options.strength,
        degree: options.degree,
        residual,
        richardson: options.richardson,
        repr,
    })
}

fn quadrature_size(lmax: usize) -> usize {
    2 * lmax + 200
}

fn solve_zonal(parametrix: &Parametrix, options: &SolverOptions, antipodal: bool) -> Result<(Representation, f64)> {
    let n = parametrix.n;
    let alpha = (n.as_f64() - 1.0) / 2.0;
    let lmax = options.degree + options.guard;
    let r0 = parametrix.cutoff.radius;
    let (a, b) = (2.0 * (0.25 * r0).atan(), 2.0 * (0.5 * r0).atan());
    let rule = ZonalRule::new(n.get(), quadrature_size(lmax), a, b)?;
    let rhs: Vec<f64> = rule
        .angles
        .iter()
        .map(|&th| {
            let rho = sphere_radius(th);
            parametrix.source(rho, sphere_weight(n, rho))
        })
        .collect::<Result<_>>()?;
    let zonal: Vec<Vec<f64>> = rule
        .angles
        .iter()
        .map(|th| zonal_harmonics(alpha, th.cos(), lmax))
        .collect();
    let omega = sphere_volume(n.get())?;
    let coefficients: Vec<f64> = (0..=lmax)
        .into_par_iter()
        .map(|l| {
            let mut acc = NeumaierSum::new();
            for ((w, f), z) in rule.weights.iter().zip(&rhs).zip(&zonal) {
                acc.add(w * f * z[l]);
            }
            let mut a_l = acc.value() * harmonic_dimension(n.get(), l as u32) / omega;
            if antipodal {
                // f(θ) + f(π - θ), and Z_l(-x) = (-1)^l Z_l(x).
                a_l *= if l % 2 == 0 { 2.0 } else { 0.0 };
            }
            a_l
        })
        .collect();

    let mut norm2 = NeumaierSum::new();
    for (w, f) in rule.weights.iter().zip(&rhs) {
        norm2.add(w * f * f);
    }
    let norm2 = norm2.value() * if antipodal { 2.0 } else { 1.0 };
    let mut tail = NeumaierSum::new();
    for (l, a_l) in coefficients.iter().enumerate().skip(options.degree + 1) {
        tail.add(a_l * a_l * omega / harmonic_dimension(n.get(), l as u32));
    }
    let residual = relative_residual(tail.value(), norm2);

    let solved = coefficients[..=options.degree]
        .iter()
        .enumerate()
        .map(|(l, a_l)| -a_l / sphere_eigenvalue(n, l as u32))
        .collect();
    Ok((
        Representation::Zonal {
            coefficients: solved,
            antipodal,
        },
        residual,
    ))
}

fn relative_residual(tail: f64, norm2: f64) -> f64 {
    if norm2 > 0.0 {
        (tail.max(0.0) / norm2).sqrt()
    } else {
        0.0
    }
}

/// Gauge radius `|x - P|/|P|` on the cylinder in terms of `t = ln(|x|/|P|)`
/// and the versine `1 - cos θ` of the angle between `x` and `P`.
fn cylinder_radius(t: f64, vers: f64) -> f64 {
    let m = t.exp_m1();
    (m * m + 2.0 * t.exp() * vers).max(0.0).sqrt()
}

/// Deck translates `j` for which `t + jL` can lie in the cut-off ball.
fn image_range(t: f64, length: f64, r0: f64) -> std::ops::RangeInclusive<i64> {
    let lo = if r0 < 1.0 { (1.0 - r0).ln() } else { f64::NEG_INFINITY };
    let hi = (1.0 + r0).ln();
    let first = if lo.is_finite() {
        ((lo - t) / length).ceil() as i64
    } else {
        ((-40.0 - t) / length).ceil() as i64
    };
    let last = ((hi - t) / length).floor() as i64;
    first..=last
}

fn solve_cylinder(parametrix: &Parametrix, length: f64, options: &SolverOptions) -> Result<(Representation, f64)> {
    let n = parametrix.n;
    let d = n.get() - 1;
    let alpha = (d as f64 - 1.0) / 2.0;
    let lmax = options.degree + options.guard;
    let kmax = cylinder_frequency_cutoff(options.degree, length);
    let kguard = 4;
    let ktop = kmax + kguard;
    let nt = (4 * ktop + 8).max(32);
    let r0 = parametrix.cutoff.radius;
    let theta_max = if r0 < 1.0 { r0.asin() } else { PI };
    let rule = ZonalRule::new(d, quadrature_size(lmax), 0.0, theta_max)?;
    let half = 0.5 * (n.as_f64() - 2.0);
    let times: Vec<f64> = (0..nt).map(|m| m as f64 * length / nt as f64).collect();

    // Push-forward of the source to one period, then FFT in t per node.
    let spectra: Vec<Vec<Complex64>> = rule
        .angles
        .par_iter()
        .map(|&th| -> Result<Vec<Complex64>> {
            let c = th.cos();
            let mut row: Vec<Complex64> = times
                .iter()
                .map(|&t| -> Result<Complex64> {
                    let mut acc = NeumaierSum::new();
                    for j in image_range(t, length, r0) {
                        let tt = t + j as f64 * length;
                        acc.add(parametrix.source(cylinder_radius(tt, 1.0 - c), (half * tt).exp())?);
                    }
                    Ok(Complex64::new(acc.value(), 0.0))
                })
                .collect::<Result<_>>()?;
            let fft = FftPlanner::<f64>::new().plan_fft_forward(nt);
            fft.process(&mut row);
            Ok(row.into_iter().map(|v| v / nt as f64).collect())
        })
        .collect::<Result<_>>()?;

    let mut norm2 = NeumaierSum::new();
    for (w, row) in rule.weights.iter().zip(&spectra) {
        // Parseval on the t-grid: (1/nt) Σ_m |f_m|² = Σ_k |F_k|².
        let power: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        norm2.add(w * power * length);
    }
    let norm2 = norm2.value();

    let zonal: Vec<Vec<f64>> = rule
        .angles
        .iter()
        .map(|th| zonal_harmonics(alpha, th.cos(), lmax))
        .collect();
    let omega = sphere_volume(d)?;
    // coefficients[k][l] of e^{2πikt/L} Z_l.
    let coefficients: Vec<Vec<Complex64>> = (0..=ktop)
        .into_par_iter()
        .map(|k| {
            (0..=lmax)
                .map(|l| {
                    let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
                    for ((w, row), z) in rule.weights.iter().zip(&spectra).zip(&zonal) {
                        let v = row[k] * (w * z[l]);
                        re.add(v.re);
                        im.add(v.im);
                    }
                    Complex64::new(re.value(), im.value()) * (harmonic_dimension(d, l as u32) / omega)
                })
                .collect()
        })
        .collect();

    let mut tail = NeumaierSum::new();
    for (k, row) in coefficients.iter().enumerate() {
        let copies = if k == 0 { 1.0 } else { 2.0 };
        for (l, c) in row.iter().enumerate() {
            if k <= kmax && l <= options.degree {
                continue;
            }
            tail.add(copies * c.norm_sqr() * length * omega / harmonic_dimension(d, l as u32));
        }
    }
    let residual = relative_residual(tail.value(), norm2);

    let solved = coefficients[..=kmax]
        .iter()
        .enumerate()
        .map(|(k, row)| {
            row[..=options.degree]
                .iter()
                .enumerate()
                .map(|(l, c)| -c / cylinder_eigenvalue(n, length, k as i64, l as u32))
                .collect()
        })
        .collect();
    Ok((
        Representation::Cylinder {
            length,
            coefficients: solved,
        },
        residual,
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RegularPartSolution {
    pub fn model(&self) -> &ModelGeometry {
        &self.model
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.base
    }

    pub fn chart(&self) -> &FlatGauge {
        &self.chart
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn richardson(&self) -> RichardsonOptions {
        self.richardson
    }

    /// Relative `L²` norm of the part of the source beyond the kept modes,
    /// i.e. `‖L_g w + f‖/‖f‖`, estimated from the guard band.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    fn parametrix(&self) -> Parametrix {
        Parametrix {
            n: self.model.dimension(),
            cutoff: self.cutoff,
            strength: self.strength,
        }
    }

    /// `(t, 1 - cos θ)` of a model point relative to the pole. The versine
    /// comes from a chord length so that it keeps full relative accuracy
    /// next to the pole.
    fn polar(&self, x: &[f64]) -> (f64, f64) {
        let p = &self.base.coords;
        let (rx, rp) = (dot(x, x).sqrt(), dot(p, p).sqrt());
        let chord2: f64 = x.iter().zip(p).map(|(a, b)| (a / rx - b / rp).powi(2)).sum();
        let vers = (0.5 * chord2).clamp(0.0, 2.0);
        match self.repr {
            Representation::Cylinder { .. } => ((rx / rp).ln(), vers),
            Representation::Zonal { .. } => (0.0, vers),
        }
    }

    fn regular_polar(&self, t: f64, vers: f64) -> f64 {
        let c = 1.0 - vers;
        match &self.repr {
            Representation::Zonal { coefficients, .. } => {
                let n = self.model.dimension().as_f64();
                let z = zonal_harmonics((n - 1.0) / 2.0, c, self.degree);
                let mut acc = NeumaierSum::new();
                for (a, zl) in coefficients.iter().zip(&z) {
                    acc.add(a * zl);
                }
                acc.value()
            }
            Representation::Cylinder { length, coefficients } => {
                let n = self.model.dimension().as_f64();
                let z = zonal_harmonics((n - 2.0) / 2.0, c, self.degree);
                let phases: Vec<Complex64> = (0..coefficients.len())
                    .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * t / length))
                    .collect();
                let mut acc = NeumaierSum::new();
                for (l, zl) in z.iter().enumerate() {
                    let mut s = coefficients[0][l].re;
                    for k in 1..coefficients.len() {
                        s += 2.0 * (coefficients[k][l] * phases[k]).re;
                    }
                    acc.add(s * zl);
                }
                acc.value()
            }
        }
    }

    /// `w(x) = Γ_P(x) - Φ(x)`.
    pub fn regular_value(&self, x: &[f64]) -> f64 {
        let (t, v) = self.polar(x);
        self.regular_polar(t, v)
    }

    /// The (pushed-forward) parametrix `Φ(x)`.
    pub fn parametrix_value(&self, x: &[f64]) -> Result<f64> {
        let (t, v) = self.polar(x);
        self.parametrix_polar(t, v)
    }

    fn parametrix_polar(&self, t: f64, vers: f64) -> Result<f64> {
        let par = self.parametrix();
        let n = self.model.dimension();
        match &self.repr {
            Representation::Zonal { antipodal, .. } => {
                let at = |vers: f64| -> Result<f64> {
                    if vers >= 2.0 - 1e-12 {
                        return Ok(0.0);
                    }
                    // 2 tan(θ/2) with sin²(θ/2) = vers/2.
                    let rho = 2.0 * (vers / (2.0 - vers)).sqrt();
                    if !(rho < self.cutoff.radius) {
                        return Ok(0.0);
                    }
                    par.value(rho, sphere_weight(n, rho))
                };
                Ok(at(vers)? + if *antipodal { at(2.0 - vers)? } else { 0.0 })
            }
            Representation::Cylinder { length, .. } => {
                let half = 0.5 * (n.as_f64() - 2.0);
                let mut acc = NeumaierSum::new();
                for j in image_range(t, *length, self.cutoff.radius) {
                    let tt = t + j as f64 * length;
                    let rho = cylinder_radius(tt, vers);
                    if rho > 0.0 {
                        acc.add(par.value(rho, (half * tt).exp())?);
                    }
                }
                Ok(acc.value())
            }
        }
    }

    /// `Γ_P(x) = Φ(x) + w(x)` by eigen-summation.
    pub fn green_value(&self, x: &[f64]) -> Result<KernelEvaluation> {
        let (t, v) = self.polar(x);
        Ok(KernelEvaluation {
            source: self.base.clone(),
            target: x.to_vec(),
            value: self.parametrix_polar(t, v)? + self.regular_polar(t, v),
            method: KernelMethod::EigenSum,
        })
    }

    /// `w(P)` plus the parametrix images (other than the pole itself) at `P`.
    pub fn direct_mass(&self) -> Result<f64> {
        let w = self.regular_polar(0.0, 0.0);
        let images = match &self.repr {
            Representation::Zonal { .. } => 0.0,
            Representation::Cylinder { length, .. } => {
                let par = self.parametrix();
                let half = 0.5 * (self.model.dimension().as_f64() - 2.0);
                let mut acc = NeumaierSum::new();
                for j in image_range(0.0, *length, self.cutoff.radius) {
                    if j != 0 {
                        let tt = j as f64 * length;
                        acc.add(par.value(cylinder_radius(tt, 0.0), (half * tt).exp())?);
                    }
                }
                acc.value()
            }
        };
        Ok(w + images)
    }

    /// The chart gauge `W` as a conformal factor, flat on the whole chart.
    pub fn gauge_factor(&self) -> ConformalFactor {
        let chart = self.chart.clone();
        ConformalFactor::analytic(format!("chart gauge of {}", self.model), move |x| chart.factor(x))
            .with_flat_radius(self.chart.embedding_radius())
    }

    /// Largest radius at which the Richardson samples are anchored.
    pub fn sampling_radius(&self) -> f64 {
        self.cutoff.radius.min(0.5 * self.chart.embedding_radius()).min(1.0)
    }

    /// Expansion of the eigen-summed Green function in the chart gauge.
    pub fn expansion(&self) -> Result<GreenExpansion> {
        let gauge = self.gauge_factor();
        let f = |y: &[f64]| -> Result<f64> {
            let x = self.chart.to_model(y);
            Ok(conformal_covariance_transform(&self.green_value(&x)?, &gauge).value)
        };
        GreenExpansion::from_flat_coordinates(
            self.model.dimension(),
            self.sampling_radius(),
            gauge.clone(),
            f,
            &self.richardson,
        )
    }

    pub fn mass(&self) -> Result<SpectralMass> {
        let e = self.expansion()?;
        let direct = self.direct_mass()?;
        Ok(SpectralMass {
            mass: e.mass,
            error_estimate: e.error_estimate.max((e.mass - direct).abs()),
            direct,
            residual: self.residual,
            degree: self.degree,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{cylinder_mass, projective_mass, sphere_green};
    use approx::assert_relative_eq;

    #[test]
    fn sphere_mass_is_zero_and_green_matches_closed_form() {
        let model = ModelGeometry::sphere(4).unwrap();
        let p = model.default_base_point();
        let sol = solve_regular_part(&model, &p, &SolverOptions::default()).unwrap();
        let m = sol.mass().unwrap();
        assert!(m.mass.abs() < 1e-8 && m.direct.abs() < 1e-8, "{m:?}");
        let x = [0.0, 1.0, 0.0, 0.0, 0.0];
        let exact = sphere_green(model.dimension(), &p, &x).unwrap().value;
        assert!((sol.green_value(&x).unwrap().value - exact).abs() < 1e-8);
    }

    #[test]
    fn projective_mass_matches_closed_form() {
        let model = ModelGeometry::projective(4).unwrap();
        let p = model.default_base_point();
        let sol = solve_regular_part(&model, &p, &SolverOptions::default()).unwrap();
        let m = sol.mass().unwrap();
        let exact = projective_mass(model.dimension()).unwrap();
        assert!((m.mass - exact).abs() < 1e-6, "{m:?} vs {exact}");
    }

    #[test]
    fn cylinder_mass_matches_closed_form() {
        let model = ModelGeometry::cylinder(4, 2.0).unwrap();
        let p = model.default_base_point();
        let sol = solve_regular_part(&model, &p, &SolverOptions::default()).unwrap();
        let m = sol.mass().unwrap();
        let exact = cylinder_mass(&model).unwrap();
        assert!((m.mass - exact).abs() < 1e-5, "{m:?} vs {exact}");
    }

    #[test]
    fn residual_decreases_with_degree() {
        let model = ModelGeometry::sphere(4).unwrap();
        let p = model.default_base_point();
        let loose = |d| SolverOptions {
            degree: d,
            residual_tolerance: 1.0,
            ..Default::default()
        };
        let r: Vec<f64> = [25, 50, 100]
            .iter()
            .map(|&d| solve_regular_part(&model, &p, &loose(d)).unwrap().residual())
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
        let err = solve_regular_part(
            &model,
            &p,
            &SolverOptions {
                degree: 10,
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(Error::Residual { .. })));
    }

    #[test]
    fn doubling_the_source_doubles_w() {
        let model = ModelGeometry::projective(4).unwrap();
        let p = model.default_base_point();
        let base = SolverOptions::default().with_degree(150);
        let one = solve_regular_part(&model, &p, &base).unwrap();
        let two = solve_regular_part(&model, &p, &SolverOptions { strength: 2.0, ..base }).unwrap();
        for x in [[0.6, 0.8, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0]] {
            assert_relative_eq!(two.regular_value(&x), 2.0 * one.regular_value(&x), max_relative = 1e-13);
        }
    }
}
