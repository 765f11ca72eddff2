use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Check, MassReport, OracleRow, SweepRow};
use crate::dec::{
    annulus_block, build_star, flat_weitzenboeck_check, harmonic_space, inversion_residuals, kernel_residual,
    pullback_norm, ConstantForm, CubicalGrid, HarmonicOptions, MetricField,
};
use crate::geometry::{Dimension, ModelDescriptor, ModelGeometry};
use crate::kernels::{
    cylinder_mass, cylinder_mass_image_sum, flat_kernel_flux, projective_mass, ExpansionOptions, GreenExpansion,
};
use crate::series::{omega_a, verify_flux_limit, verify_mass_derivative, Symbol, SymbolicPoly};
use crate::spectral::{
    check_scalar_curvature, perturbed_mass_from, random_perturbation, solve_regular_part, SolverOptions,
    CURVATURE_SAMPLES,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunCommand {
    Mass,
    SeriesVerify,
    DecCheck,
    OracleCompare,
    Sweep,
}

impl RunCommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mass => "mass",
            Self::SeriesVerify => "series-verify",
            Self::DecCheck => "dec-check",
            Self::OracleCompare => "oracle-compare",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassMethod {
    #[default]
    ClosedForm,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecTest {
    StarInvariance,
    HarmonicDim,
    Inversion,
    Weitzenboeck,
}

impl DecTest {
    pub const ALL: [DecTest; 4] = [
        Self::StarInvariance,
        Self::HarmonicDim,
        Self::Inversion,
        Self::Weitzenboeck,
    ];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "L")]
    Length,
    #[serde(rename = "seed")]
    Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// A model given by name (with `n` and `L` taken from the config) or as a full descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Name(String),
    Descriptor(ModelDescriptor),
}

fn parse_kebab<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::InvalidArgument(format!("unrecognised value `{s}`")))
}

macro_rules! kebab_from_str {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                parse_kebab(s)
            }
        }
    )*};
}
kebab_from_str!(RunCommand, MassMethod, DecTest, Emit);

/// Everything a run needs. Omitted fields take the documented defaults:
/// `n = 4`, `method = closed-form`, spectral `degree = 200`, DEC `grid = 6`,
/// all DEC tests, `seed = 0`, JSON output, no timing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<RunCommand>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(rename = "L", default)]
    pub length: Option<f64>,
    #[serde(default)]
    pub method: Option<MassMethod>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub grid: Option<usize>,
    /// Overrides the agreement tolerance of the command's main check.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tests: Option<Vec<DecTest>>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub emit: Option<Emit>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub timing: Option<bool>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fields set in `other` win.
    pub fn merged(self, other: RunConfig) -> Self {
        Self {
            command: other.command.or(self.command),
            model: other.model.or(self.model),
            n: other.n.or(self.n),
            length: other.length.or(self.length),
            method: other.method.or(self.method),
            degree: other.degree.or(self.degree),
            grid: other.grid.or(self.grid),
            tol: other.tol.or(self.tol),
            seed: other.seed.or(self.seed),
            tests: other.tests.or(self.tests),
            sweep: other.sweep.or(self.sweep),
            emit: other.emit.or(self.emit),
            out: other.out.or(self.out),
            timing: other.timing.or(self.timing),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn emit(&self) -> Emit {
        self.emit.unwrap_or_default()
    }

    fn degree(&self) -> usize {
        self.degree.unwrap_or(SolverOptions::default().degree)
    }

    fn model_name(&self) -> Result<String> {
        match &self.model {
            Some(ModelSpec::Name(s)) => Ok(s.clone()),
            Some(ModelSpec::Descriptor(d)) => Ok(d.model.clone()),
            None => Err(Error::InvalidArgument("no model given".into())),
        }
    }

    /// The model, with `n` and `L` from the config overriding a descriptor.
    pub fn model(&self) -> Result<ModelGeometry> {
        self.model_with_length(self.length)
    }

    fn model_with_length(&self, length: Option<f64>) -> Result<ModelGeometry> {
        let mut d = match &self.model {
            Some(ModelSpec::Descriptor(d)) => d.clone(),
            Some(ModelSpec::Name(name)) => ModelDescriptor {
                model: name.clone(),
                n: 4,
                length: None,
                periods: None,
            },
            None => return Err(Error::InvalidArgument("no model given".into())),
        };
        if let Some(n) = self.n {
            d.n = n;
        }
        if length.is_some() {
            d.length = length;
        }
        ModelGeometry::try_from(d)
    }
}

const KERNELS: &str = "green-kernels";
const SPECTRAL: &str = "spectral-solver";
const SERIES: &str = "exact-series";
const DEC: &str = "dec-forms";
const GEOMETRY: &str = "core-geometry";

/// Runs one command and returns its report. Errors are configuration or
/// numerical failures that prevent a report; failed checks are recorded in
/// the report instead.
pub fn run(config: &RunConfig) -> Result<MassReport> {
    let start = Instant::now();
    let command = config
        .command
        .ok_or_else(|| Error::InvalidArgument("no command given".into()))?;
    let mut report = match command {
        RunCommand::Mass => mass(config)?,
        RunCommand::SeriesVerify => series_verify(config)?,
        RunCommand::DecCheck => dec_check(config)?,
        RunCommand::OracleCompare => oracle_compare(config)?,
        RunCommand::Sweep => sweep(config)?,
    };
    if config.timing.unwrap_or(false) {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    report.finish();
    Ok(report)
}

fn closed_form_mass(model: &ModelGeometry) -> Result<f64> {
    model.require_admissible()?;
    match model {
        ModelGeometry::RoundSphere { .. } => Ok(0.0),
        ModelGeometry::ProjectiveSpace { n } => projective_mass(*n),
        _ => cylinder_mass(model),
    }
}

/// Agreement tolerance of the spectral value against the closed form.
fn spectral_tolerance(model: &ModelGeometry) -> f64 {
    match model {
        ModelGeometry::RoundSphere { .. } => 1e-8,
        ModelGeometry::ProjectiveSpace { .. } => 1e-4,
        _ => 1e-3,
    }
}

/// Agreement tolerance of the read-off from the closed-form kernel.
const EXPANSION_TOLERANCE: f64 = 1e-6;
const SPHERE_TOLERANCE: f64 = 1e-8;
const FLUX_TOLERANCE: f64 = 1e-8;

fn sign_check(model: &ModelGeometry, mass: f64, source: (&str, &str), tol: Option<f64>) -> Check {
    match model {
        ModelGeometry::RoundSphere { .. } => {
            Check::within("mass-vanishes", source, mass, 0.0, tol.unwrap_or(SPHERE_TOLERANCE))
        }
        _ => Check::above("mass-positive", source, mass, 0.0, 0.0),
    }
}

fn base_report(command: &str, config: &RunConfig, model: &ModelGeometry) -> MassReport {
    let mut report = MassReport::new(command, Some(model.dimension().get()), config.seed());
    report.model = Some(model.clone().into());
    if let ModelGeometry::CylinderQuotient { length, .. } = model {
        report.parameter("L", length);
    }
    report
}

fn mass(config: &RunConfig) -> Result<MassReport> {
    let model = config.model()?;
    model.require_admissible()?;
    let n = model.dimension();
    let p = model.default_base_point();
    let method = config.method.unwrap_or_default();
    let closed = closed_form_mass(&model)?;
    let mut report = base_report("mass", config, &model);
    if let Some(tol) = config.tol {
        report.parameter("tol", tol);
    }
    let operation = match model {
        ModelGeometry::RoundSphere { .. } => "sphere_green",
        ModelGeometry::ProjectiveSpace { .. } => "projective_mass",
        _ => "cylinder_mass",
    };
    match method {
        MassMethod::ClosedForm => {
            report.method = Some("closed-form".into());
            let e = GreenExpansion::for_model(&model, &p, &ExpansionOptions::default())?;
            report.mass = Some(closed);
            report.error_estimate = Some(e.error_estimate.max((e.mass - closed).abs()));
            report.push(Check::within(
                "expansion-agrees-with-closed-form",
                (KERNELS, "extract_mass"),
                e.mass,
                closed,
                config.tol.unwrap_or(if closed == 0.0 {
                    SPHERE_TOLERANCE
                } else {
                    EXPANSION_TOLERANCE
                }),
            ));
            report.push(sign_check(&model, closed, (KERNELS, operation), config.tol));
        }
        MassMethod::Spectral => {
            let degree = config.degree();
            report.method = Some("spectral".into());
            report.parameter("degree", degree);
            let options = SolverOptions::default().with_degree(degree);
            let s = solve_regular_part(&model, &p, &options)?.mass()?;
            report.mass = Some(s.mass);
            report.error_estimate = Some(s.error_estimate);
            report.push(Check::within(
                "spectral-agrees-with-closed-form",
                (SPECTRAL, "solve_regular_part"),
                s.mass,
                closed,
                config.tol.unwrap_or(spectral_tolerance(&model)),
            ));
            report.push(Check::within(
                "regular-part-residual",
                (SPECTRAL, "solve_regular_part"),
                s.residual,
                0.0,
                options.residual_tolerance,
            ));
            report.push(sign_check(&model, s.mass, (SPECTRAL, "solve_regular_part"), config.tol));
        }
    }
    for r in [0.25, 0.5] {
        report.push(Check::within(
            format!("flat-kernel-flux-r{r}"),
            (KERNELS, "flat_kernel"),
            flat_kernel_flux(n, r, 16)?,
            1.0,
            FLUX_TOLERANCE,
        ));
    }
    Ok(report)
}

fn coefficient_of(poly: &SymbolicPoly, of: &SymbolicPoly) -> f64 {
    let (monomial, _) = of.terms().next().expect("a single monomial");
    poly.coefficient(monomial).to_f64().unwrap_or(f64::NAN)
}

fn series_verify(config: &RunConfig) -> Result<MassReport> {
    let dims: Vec<u32> = match config.n {
        Some(n) => vec![n],
        None => vec![4, 6, 8, 10, 12],
    };
    let mut report = MassReport::new("series-verify", config.n, config.seed());
    report.method = Some("exact-rational".into());
    report.parameter("n_values", &dims);
    let omega_a = omega_a();
    let omega2_a = &SymbolicPoly::symbol(Symbol::Omega) * &omega_a;
    for n in dims {
        let dim = Dimension::even(n)?;
        let ni = f64::from(n);
        let d = verify_mass_derivative(dim, None)?;
        report.push(
            Check::within(
                format!("mass-derivative-leading-n{n}"),
                (SERIES, "verify_mass_derivative"),
                coefficient_of(&d.leading_coefficient, &omega_a),
                -8.0 * ni * (ni - 1.0),
                0.0,
            )
            .with_detail(format!("{} r^{}", d.leading_coefficient, d.leading_exponent)),
        );
        report.push(Check::holds(
            format!("mass-derivative-exact-n{n}"),
            (SERIES, "verify_mass_derivative"),
            d.pass,
        ));
        let f = verify_flux_limit(dim, None)?;
        report.push(
            Check::within(
                format!("flux-limit-n{n}"),
                (SERIES, "verify_flux_limit"),
                coefficient_of(&f.limit, &omega2_a),
                4.0 * ni * (ni - 1.0),
                0.0,
            )
            .with_detail(f.limit.to_string()),
        );
        report.push(Check::holds(
            format!("flux-limit-exact-n{n}"),
            (SERIES, "verify_flux_limit"),
            f.pass,
        ));
    }
    Ok(report)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Unit-norm constant form with seeded coefficients.
fn seeded_form(n: usize, p: usize, seed: u64) -> Result<ConstantForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = binomial(n, p);
    let c = (0..count).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(ConstantForm::new(n, p, c)?.normalized())
}

const STAR_TOLERANCE: f64 = 1e-15;
const KERNEL_TOLERANCE: f64 = 1e-10;
const POINTWISE_TOLERANCE: f64 = 1e-12;
const RATE_TOLERANCE: f64 = 0.3;
const WEITZENBOECK_TOLERANCE: f64 = 1e-12;
const METRIC_AMPLITUDE: f64 = 0.5;

fn dec_check(config: &RunConfig) -> Result<MassReport> {
    let n = config.n.unwrap_or(4);
    let dim = Dimension::even(n)?;
    let cells = config.grid.unwrap_or(6);
    let seed = config.seed();
    let p = dim.as_usize() / 2;
    let tests = config.tests.clone().unwrap_or_else(|| DecTest::ALL.to_vec());
    let mut report = MassReport::new("dec-check", Some(n), seed);
    report.parameter("grid", cells);
    report.parameter("tests", &tests);
    let torus = || CubicalGrid::torus(n, cells);
    for test in tests {
        match test {
            DecTest::StarInvariance => {
                let g = torus()?;
                let flat = build_star(&g, &MetricField::flat(&g), p)?;
                let bent = build_star(&g, &MetricField::random(&g, seed, METRIC_AMPLITUDE)?, p)?;
                let diff = flat
                    .iter()
                    .zip(&bent)
                    .map(|(a, b)| (a - b).abs() / a.abs())
                    .fold(0.0, f64::max);
                report.push(Check::within(
                    "star-invariance",
                    (DEC, "build_star"),
                    diff,
                    0.0,
                    STAR_TOLERANCE,
                ));
            }
            DecTest::HarmonicDim => {
                let g = torus()?;
                let flat = MetricField::flat(&g);
                let bent = MetricField::random(&g, seed, METRIC_AMPLITUDE)?;
                let options = HarmonicOptions {
                    seed,
                    ..HarmonicOptions::default()
                };
                let h0 = harmonic_space(&g, &flat, p, &options)?;
                let hu = harmonic_space(&g, &bent, p, &options)?;
                let expected = binomial(dim.as_usize(), p) as f64;
                let source = (DEC, "harmonic_space");
                report.push(Check::within(
                    "harmonic-dim-flat",
                    source,
                    h0.dimension as f64,
                    expected,
                    0.0,
                ));
                report.push(Check::within(
                    "harmonic-dim-conformal",
                    source,
                    hu.dimension as f64,
                    expected,
                    0.0,
                ));
                let tol = config.tol.unwrap_or(KERNEL_TOLERANCE);
                report.push(Check::within(
                    "flat-kernel-in-conformal-kernel",
                    source,
                    kernel_residual(&g, &bent, &h0.basis)?,
                    0.0,
                    tol,
                ));
                report.push(Check::within(
                    "conformal-kernel-in-flat-kernel",
                    source,
                    kernel_residual(&g, &flat, &hu.basis)?,
                    0.0,
                    tol,
                ));
            }
            DecTest::Inversion => {
                let phi = seeded_form(dim.as_usize(), p, seed)?;
                let coarse_grid = annulus_block(n, cells)?;
                let pointwise = coarse_grid
                    .cell_centers(p)
                    .iter()
                    .map(|x| {
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        (pullback_norm(&phi, x) * r2.powf(dim.as_f64() / 2.0) - 1.0).abs()
                    })
                    .fold(0.0, f64::max);
                report.push(Check::within(
                    "pullback-norm",
                    (DEC, "inversion_pullback"),
                    pointwise,
                    0.0,
                    POINTWISE_TOLERANCE,
                ));
                let coarse = inversion_residuals(n, cells, &phi)?;
                let fine = inversion_residuals(n, 2 * cells, &phi)?;
                let source = (DEC, "inversion_pullback");
                let tol = config.tol.unwrap_or(RATE_TOLERANCE);
                let rate = |a: f64, b: f64| (a / b).log2();
                report.push(Check::within(
                    "d-residual-order",
                    source,
                    rate(coarse.d_residual, fine.d_residual),
                    2.0,
                    tol,
                ));
                report.push(Check::within(
                    "delta-residual-order",
                    source,
                    rate(coarse.delta_residual, fine.delta_residual),
                    2.0,
                    tol,
                ));
            }
            DecTest::Weitzenboeck => {
                let g = torus()?;
                let w = flat_weitzenboeck_check(&g, p, 5, seed)?;
                let source = (DEC, "flat_weitzenboeck_check");
                let tol = config.tol.unwrap_or(WEITZENBOECK_TOLERANCE);
                report.push(Check::within(
                    "weitzenboeck-operator",
                    source,
                    w.operator_discrepancy,
                    0.0,
                    tol,
                ));
                report.push(Check::within(
                    "weitzenboeck-samples",
                    source,
                    w.max_discrepancy,
                    0.0,
                    tol,
                ));
            }
        }
    }
    Ok(report)
}

fn oracle_compare(config: &RunConfig) -> Result<MassReport> {
    let model = config.model()?;
    model.require_admissible()?;
    let p = model.default_base_point();
    let degree = config.degree();
    let closed = closed_form_mass(&model)?;
    let mut report = base_report("oracle-compare", config, &model);
    report.parameter("degree", degree);
    report.method = Some("closed-form".into());
    report.mass = Some(closed);

    let mut rows = vec![("closed-form", closed, 0.0, (KERNELS, "closed_form"))];
    let e = GreenExpansion::for_model(&model, &p, &ExpansionOptions::default())?;
    let expansion_tol = if closed == 0.0 {
        SPHERE_TOLERANCE
    } else {
        EXPANSION_TOLERANCE
    };
    rows.push(("expansion", e.mass, expansion_tol, (KERNELS, "extract_mass")));
    if matches!(model, ModelGeometry::CylinderQuotient { .. }) {
        rows.push((
            "image-sum",
            cylinder_mass_image_sum(&model, &p)?,
            EXPANSION_TOLERANCE,
            (KERNELS, "cylinder_green"),
        ));
    }
    let s = solve_regular_part(&model, &p, &SolverOptions::default().with_degree(degree))?.mass()?;
    rows.push((
        "spectral",
        s.mass,
        config.tol.unwrap_or(spectral_tolerance(&model)),
        (SPECTRAL, "solve_regular_part"),
    ));
    for (method, mass, tol, source) in rows {
        report.oracle.push(OracleRow {
            method: method.into(),
            mass,
            abs_delta: (mass - closed).abs(),
        });
        if method != "closed-form" {
            report.push(Check::within(
                format!("{method}-agrees-with-closed-form"),
                source,
                mass,
                closed,
                tol,
            ));
        }
    }
    report.push(sign_check(&model, closed, (GEOMETRY, "closed_form"), None));
    Ok(report)
}

const PERTURBATION_AMPLITUDE: f64 = 0.25;
const NONNEGATIVE_TOLERANCE: f64 = 1e-6;

struct SweepPoint {
    row: SweepRow,
    checks: Vec<Check>,
}

fn sweep(config: &RunConfig) -> Result<MassReport> {
    let range = config
        .sweep
        .clone()
        .ok_or_else(|| Error::InvalidArgument("sweep needs a parameter range".into()))?;
    let name = config.model_name()?;
    let n = config.n.unwrap_or(match &config.model {
        Some(ModelSpec::Descriptor(d)) => d.n,
        _ => 4,
    });
    let method = config.method.unwrap_or_default();
    let degree = config.degree();
    let mut report = MassReport::new("sweep", Some(n), config.seed());
    report.model = Some(ModelDescriptor {
        model: name.clone(),
        n,
        length: config.length,
        periods: None,
    });
    report.parameter("values", &range.values);
    report.parameter(
        "parameter",
        match range.parameter {
            SweepParameter::Length => "L",
            SweepParameter::Seed => "seed",
        },
    );
    let options = SolverOptions::default().with_degree(degree);

    let points: Vec<SweepPoint> = match range.parameter {
        SweepParameter::Length => {
            if name != "cylinder" {
                return Err(Error::InvalidArgument(format!(
                    "an L sweep needs the cylinder model, not `{name}`"
                )));
            }
            report.method = Some(method_name(method).into());
            if method == MassMethod::Spectral {
                report.parameter("degree", degree);
            }
            range
                .values
                .par_iter()
                .map(|&l| {
                    let result = config
                        .model_with_length(Some(l))
                        .and_then(|model| length_point(&model, method, &options));
                    finish_point(l, method_name(method), result, |mass| {
                        vec![Check::above(
                            format!("mass-positive-L{l}"),
                            (KERNELS, "cylinder_mass"),
                            mass,
                            0.0,
                            0.0,
                        )]
                    })
                })
                .collect()
        }
        SweepParameter::Seed => {
            let model = config.model()?;
            model.require_admissible()?;
            if let Some(bad) = range.values.iter().find(|v| !(v.fract() == 0.0 && **v >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "seeds must be non-negative integers, got {bad}"
                )));
            }
            report.model = Some(model.clone().into());
            report.method = Some("spectral-perturbed".into());
            report.parameter("degree", degree);
            report.parameter("amplitude", PERTURBATION_AMPLITUDE);
            let p = model.default_base_point();
            let solution = if range.values.is_empty() {
                None
            } else {
                Some(solve_regular_part(&model, &p, &options)?)
            };
            range
                .values
                .par_iter()
                .map(|&v| {
                    let seed = v as u64;
                    let solution = solution.as_ref().expect("non-empty sweep");
                    let result = random_perturbation(&model, seed, PERTURBATION_AMPLITUDE).and_then(|u| {
                        check_scalar_curvature(&model, &u, &p, CURVATURE_SAMPLES, seed)?;
                        perturbed_mass_from(solution, &u, seed)
                    });
                    match result {
                        Ok(m) => {
                            let source = (SPECTRAL, "perturbed_mass");
                            SweepPoint {
                                row: SweepRow {
                                    param: v,
                                    mass: Some(m.mass),
                                    method: "spectral-perturbed".into(),
                                    error: Some(m.error_estimate),
                                    failure: None,
                                },
                                checks: vec![
                                    Check::above(
                                        format!("mass-nonnegative-seed{seed}"),
                                        source,
                                        m.mass,
                                        0.0,
                                        NONNEGATIVE_TOLERANCE,
                                    ),
                                    Check::holds(format!("gauge-signs-agree-seed{seed}"), source, m.signs_agree),
                                    Check::above(
                                        format!("scalar-curvature-positive-seed{seed}"),
                                        source,
                                        m.min_scalar_curvature,
                                        0.0,
                                        0.0,
                                    ),
                                ],
                            }
                        }
                        Err(e) => failed_point(v, "spectral-perturbed", e),
                    }
                })
                .collect()
        }
    };
    let masses: Vec<f64> = points.iter().filter_map(|p| p.row.mass).collect();
    if !masses.is_empty() {
        report.mass = Some(masses.iter().copied().fold(f64::INFINITY, f64::min));
    }
    for point in points {
        report.sweep.push(point.row);
        report.checks.extend(point.checks);
    }
    Ok(report)
}

fn method_name(method: MassMethod) -> &'static str {
    match method {
        MassMethod::ClosedForm => "closed-form",
        MassMethod::Spectral => "spectral",
    }
}

/// Mass and error for one cylinder length.
fn length_point(model: &ModelGeometry, method: MassMethod, options: &SolverOptions) -> Result<(f64, f64)> {
    let p = model.default_base_point();
    match method {
        MassMethod::ClosedForm => {
            let closed = cylinder_mass(model)?;
            let e = GreenExpansion::for_model(model, &p, &ExpansionOptions::default())?;
            Ok((closed, e.error_estimate.max((e.mass - closed).abs())))
        }
        MassMethod::Spectral => {
            let s = solve_regular_part(model, &p, options)?.mass()?;
            Ok((s.mass, s.error_estimate))
        }
    }
}

fn finish_point<F>(param: f64, method: &str, result: Result<(f64, f64)>, checks: F) -> SweepPoint
where
    F: FnOnce(f64) -> Vec<Check>,
{
    match result {
        Ok((mass, error)) => SweepPoint {
            row: SweepRow {
                param,
                mass: Some(mass),
                method: method.into(),
                error: Some(error),
                failure: None,
            },
            checks: checks(mass),
        },
        Err(e) => failed_point(param, method, e),
    }
}

fn failed_point(param: f64, method: &str, error: Error) -> SweepPoint {
    SweepPoint {
        row: SweepRow {
            param,
            mass: None,
            method: method.into(),
            error: None,
            failure: Some(error.to_string()),
        },
        checks: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"command": "mass", "modle": "sphere"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command": "mass", "model": {"model": "sphere", "n": 4, "x": 1}}"#).is_err());
    }

    #[test]
    fn model_by_name_or_descriptor() {
        let a = config(r#"{"model": "cylinder", "n": 4, "L": 2.0}"#).model().unwrap();
        let b = config(r#"{"model": {"model": "cylinder", "n": 4, "L": 2.0}}"#)
            .model()
            .unwrap();
        assert_eq!(a, b);
        assert!(config(r#"{"model": "cylinder"}"#).model().is_err());
    }

    #[test]
    fn merged_prefers_the_second() {
        let a = config(r#"{"n": 4, "seed": 3}"#);
        let b = config(r#"{"n": 6}"#);
        let m = a.merged(b);
        assert_eq!((m.n, m.seed), (Some(6), Some(3)));
    }

    #[test]
    fn sphere_closed_form_report() {
        let r = run(&config(r#"{"command": "mass", "model": "sphere", "n": 4}"#)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.mass, Some(0.0));
        assert!(r.checks.iter().all(|c| !c.module.is_empty() && !c.operation.is_empty()));
    }

    #[test]
    fn torus_is_a_configuration_error() {
        let err = run(&config(r#"{"command": "mass", "model": "torus", "n": 4}"#)).unwrap_err();
        assert_eq!(super::super::exit_code(&err), 2);
        assert!(err.to_string().contains("not invertible"));
    }

    #[test]
    fn series_report_for_n6() {
        let r = run(&config(r#"{"command": "series-verify", "n": 6}"#)).unwrap();
        assert!(r.pass);
        let lead = r
            .checks
            .iter()
            .find(|c| c.name == "mass-derivative-leading-n6")
            .unwrap();
        assert_eq!(lead.measured, -240.0);
    }

    #[test]
    fn empty_sweep_has_no_rows() {
        let r = run(&config(
            r#"{"command": "sweep", "model": "cylinder", "n": 4, "sweep": {"parameter": "L", "values": []}}"#,
        ))
        .unwrap();
        assert!(r.pass && r.sweep.is_empty());
    }

    #[test]
    fn kebab_names_parse() {
        assert_eq!("harmonic-dim".parse::<DecTest>().unwrap(), DecTest::HarmonicDim);
        assert_eq!("spectral".parse::<MassMethod>().unwrap(), MassMethod::Spectral);
        assert!("nope".parse::<Emit>().is_err());
    }
}
