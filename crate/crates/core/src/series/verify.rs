//! Symbolic checks of the small-`r` behaviour of `|φ|²` in the blown-up metric
//! `g̃ = G^{4/(n-2)} g` and of the boundary flux that forces `A ≥ 0`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::poly::{Symbol, SymbolicPoly};
use super::radial::RadialSeries;
use crate::geometry::Dimension;
use crate::{Error, Result};

/// How the cross term of `|u + v|²` is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossTermConvention {
    /// `|u+v|² = |u|² + 2⟨u,v⟩ + |v|²`.
    Doubled,
    /// Single cross term, as the expansion is usually printed.
    AsPrinted,
}

impl CrossTermConvention {
    fn factor(self) -> i64 {
        match self {
            Self::Doubled => 2,
            Self::AsPrinted => 1,
        }
    }
}

/// Default truncation order `2n + 2`.
pub fn default_order(n: Dimension) -> i32 {
    2 * n.get() as i32 + 2
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `ω·A`.
pub fn omega_a() -> SymbolicPoly {
    &SymbolicPoly::symbol(Symbol::Omega) * &SymbolicPoly::symbol(Symbol::Mass)
}

fn check_inputs(n: Dimension, order: i32) -> Result<i32> {
    let n = n.require_even()?.get() as i32;
    if order < n - 2 {
        return Err(Error::Series(format!(
            "truncation order {order} too small for n = {n}; need at least {}",
            n - 2
        )));
    }
    Ok(n)
}

/// `Σ_{j ≥ 0} s_j r^{start + j}` up to `order`.
fn symbol_tail(make: fn(u32) -> Symbol, start: i32, order: i32) -> RadialSeries {
    let terms = (start..=order).map(|k| (k, SymbolicPoly::symbol(make((k - start) as u32))));
    RadialSeries::from_terms(start.min(0), order, terms).expect("exponents above start")
}

/// `r^{n-2} G = 1 + 4(n-1)ωA r^{n-2} + Σ b_j r^{n-1+j}`.
fn inner_factor(n: i32, order: i32) -> RadialSeries {
    let one = RadialSeries::monomial(SymbolicPoly::one(), 0, order);
    let mass = RadialSeries::monomial(omega_a().scale(&rat(4 * (n as i64 - 1), 1)), n - 2, order);
    one.add(&mass).add(&symbol_tail(Symbol::Regular, n - 1, order))
}

/// `G = r^{2-n} + 4(n-1)ωA + r Σ b_j r^j`, valid to `order`.
pub fn build_g_series(n: Dimension, order: i32) -> Result<RadialSeries> {
    let n = check_inputs(n, order)?;
    Ok(inner_factor(n, order + n - 2).shift(2 - n))
}

/// `|φ|²_{g̃}` near the puncture for the inverted model form plus a smooth
/// perturbation `φ'`:
/// `(r^{n-2}G)^{-2n/(n-2)} · (1 + κ rⁿ Σ c_j r^j + r^{2n} Σ e_j r^j)`.
pub fn build_phi_norm_series(n: Dimension, order: i32, convention: CrossTermConvention) -> Result<RadialSeries> {
    let n = check_inputs(n, order)?;
    let inner = inner_factor(n, order);
    let conformal = inner.pow_rational(&rat(-2 * n as i64, n as i64 - 2))?;
    let cross = symbol_tail(Symbol::Cross, n, order).scale_rational(&rat(convention.factor(), 1));
    let smooth = symbol_tail(Symbol::Smooth, 2 * n, order);
    let pointwise = RadialSeries::monomial(SymbolicPoly::one(), 0, order)
        .add(&cross)
        .add(&smooth);
    Ok(conformal.mul(&pointwise))
}

/// One asserted coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientCheck {
    pub exponent: i32,
    pub value: SymbolicPoly,
    pub expected: SymbolicPoly,
    pub pass: bool,
}

fn assert_coefficients(
    series: &RadialSeries,
    from: i32,
    upto: i32,
    expected_top: &SymbolicPoly,
) -> Result<Vec<CoefficientCheck>> {
    (from..=upto)
        .map(|k| {
            let value = series.coefficient(k)?;
            let expected = if k == upto {
                expected_top.clone()
            } else {
                SymbolicPoly::zero()
            };
            let pass = value == expected;
            Ok(CoefficientCheck {
                exponent: k,
                value,
                expected,
                pass,
            })
        })
        .collect()
}

fn only_mass_and_omega(checks: &[CoefficientCheck]) -> bool {
    let allowed: BTreeSet<Symbol> = [Symbol::Mass, Symbol::Omega].into();
    checks.iter().all(|c| c.value.symbols().is_subset(&allowed))
}

fn first_free_exponent(series: &RadialSeries) -> Option<i32> {
    series.terms().find_map(|(k, c)| {
        c.symbols()
            .iter()
            .any(|s| !matches!(s, Symbol::Mass | Symbol::Omega))
            .then_some(k)
    })
}

/// Outcome of the `∂_r|φ|²` check.
#[derive(Debug, Clone, Serialize)]
pub struct MassDerivativeReport {
    pub n: u32,
    pub order: i32,
    pub leading_exponent: i32,
    pub leading_coefficient: SymbolicPoly,
    pub checks: Vec<CoefficientCheck>,
    /// The asserted coefficients involve only `A` and `ω`.
    pub symbol_free: bool,
    /// Exponent where `b`, `c` or `e` first appear.
    pub first_free_exponent: Option<i32>,
    /// With `A = 0` the derivative is `O(r^{n-2})`.
    pub vanishes_without_mass: bool,
    /// Both cross-term weightings give the same asserted coefficients.
    pub conventions_agree: bool,
    pub pass: bool,
}

/// Checks `∂_r|φ|²_{g̃} = -8n(n-1)ωA r^{n-3} + o(r^{n-3})` exactly.
pub fn verify_mass_derivative(n: Dimension, order: Option<i32>) -> Result<MassDerivativeReport> {
    let order = order.unwrap_or_else(|| default_order(n));
    let ni = check_inputs(n, order)?;
    let lead = ni - 3;
    let expected = omega_a().scale(&rat(-8 * ni as i64 * (ni as i64 - 1), 1));

    let derivative = |c| -> Result<RadialSeries> { Ok(build_phi_norm_series(n, order, c)?.derivative()) };
    let d = derivative(CrossTermConvention::Doubled)?;
    let d_printed = derivative(CrossTermConvention::AsPrinted)?;
    let from = d.lowest();
    let checks = assert_coefficients(&d, from, lead, &expected)?;
    let printed = assert_coefficients(&d_printed, from, lead, &expected)?;
    let conventions_agree = checks.iter().zip(&printed).all(|(a, b)| a.value == b.value);

    let massless = d.substitute(Symbol::Mass, &BigRational::zero());
    let vanishes_without_mass = (from..=lead).all(|k| massless.coefficient(k).is_ok_and(|c| c.is_zero()));

    let symbol_free = only_mass_and_omega(&checks);
    let pass = checks.iter().all(|c| c.pass) && symbol_free && vanishes_without_mass && conventions_agree;
    Ok(MassDerivativeReport {
        n: n.get(),
        order,
        leading_exponent: lead,
        leading_coefficient: d.coefficient(lead)?,
        checks,
        symbol_free,
        first_free_exponent: first_free_exponent(&d),
        vanishes_without_mass,
        conventions_agree,
        pass,
    })
}

/// Outcome of the boundary-flux limit check.
#[derive(Debug, Clone, Serialize)]
pub struct FluxLimitReport {
    pub n: u32,
    pub order: i32,
    pub limit: SymbolicPoly,
    pub expected: SymbolicPoly,
    pub checks: Vec<CoefficientCheck>,
    pub symbol_free: bool,
    pub first_free_exponent: Option<i32>,
    pub vanishes_without_mass: bool,
    pub conventions_agree: bool,
    pub pass: bool,
}

/// `½ ∮ ν(|φ|²) ds_{g̃}` over the coordinate sphere of radius `r`, as a series in `r`.
fn flux_series(n: i32, order: i32, convention: CrossTermConvention) -> Result<RadialSeries> {
    let dim = Dimension::even(n as u32)?;
    let inner = inner_factor(n, order);
    let d = build_phi_norm_series(dim, order, convention)?.derivative();
    // ν = -G^{-2/(n-2)} ∂_r and G^{-2/(n-2)} = r² (r^{n-2}G)^{-2/(n-2)}.
    let normal = inner.pow_rational(&rat(-2, n as i64 - 2))?.shift(2).neg();
    // ds_{g̃} = G^{2(n-1)/(n-2)} r^{n-1} ds = r^{1-n} (r^{n-2}G)^{2(n-1)/(n-2)} ds.
    let area = inner.pow_rational(&rat(2 * (n as i64 - 1), n as i64 - 2))?.shift(1 - n);
    let half_omega = SymbolicPoly::symbol(Symbol::Omega).scale(&rat(1, 2));
    Ok(normal.mul(&d).mul(&area).scale(&half_omega))
}

/// Checks that the flux has no singular part and tends to `4n(n-1)ω²A`.
pub fn verify_flux_limit(n: Dimension, order: Option<i32>) -> Result<FluxLimitReport> {
    let order = order.unwrap_or_else(|| default_order(n));
    let ni = check_inputs(n, order)?;
    let omega = SymbolicPoly::symbol(Symbol::Omega);
    let expected = (&omega * &omega_a()).scale(&rat(4 * ni as i64 * (ni as i64 - 1), 1));

    let flux = flux_series(ni, order, CrossTermConvention::Doubled)?;
    let flux_printed = flux_series(ni, order, CrossTermConvention::AsPrinted)?;
    let from = flux.lowest();
    let checks = assert_coefficients(&flux, from, 0, &expected)?;
    let printed = assert_coefficients(&flux_printed, from, 0, &expected)?;
    let conventions_agree = checks.iter().zip(&printed).all(|(a, b)| a.value == b.value);
    let massless = flux.substitute(Symbol::Mass, &BigRational::zero());
    let vanishes_without_mass = (from..=0).all(|k| massless.coefficient(k).is_ok_and(|c| c.is_zero()));
    let symbol_free = only_mass_and_omega(&checks);
    let pass = checks.iter().all(|c| c.pass) && symbol_free && vanishes_without_mass && conventions_agree;
    Ok(FluxLimitReport {
        n: n.get(),
        order,
        limit: flux.coefficient(0)?,
        expected,
        checks,
        symbol_free,
        first_free_exponent: first_free_exponent(&flux),
        vanishes_without_mass,
        conventions_agree,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u32) -> Dimension {
        Dimension::even(n).unwrap()
    }

    #[test]
    fn g_series_n4() {
        let g = build_g_series(dim(4), 6).unwrap();
        assert_eq!(g.coefficient(-2).unwrap(), SymbolicPoly::one());
        assert_eq!(g.coefficient(-1).unwrap(), SymbolicPoly::zero());
        assert_eq!(g.coefficient(0).unwrap().to_string(), "12*A*ω");
        assert_eq!(g.coefficient(1).unwrap(), SymbolicPoly::symbol(Symbol::Regular(0)));
        assert_eq!(g.coefficient(2).unwrap(), SymbolicPoly::symbol(Symbol::Regular(1)));
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn g_series_constant_term_for_even_n() {
        for n in (4..=12).step_by(2) {
            let g = build_g_series(dim(n), default_order(dim(n))).unwrap();
            let expected = omega_a().scale(&rat(4 * (n as i64 - 1), 1));
            assert_eq!(g.coefficient(0).unwrap(), expected);
            let flat = [Symbol::Mass]
                .into_iter()
                .chain((0..40).map(Symbol::Regular))
                .fold(g, |s, sym| s.substitute(sym, &BigRational::zero()));
            assert_eq!(flat.terms().count(), 1);
            assert_eq!(flat.coefficient(2 - n as i32).unwrap(), SymbolicPoly::one());
        }
    }

    #[test]
    fn phi_norm_leading_terms() {
        for n in (4..=10).step_by(2) {
            let s = build_phi_norm_series(dim(n), 2 * n as i32 + 2, CrossTermConvention::Doubled).unwrap();
            assert_eq!(s.coefficient(0).unwrap(), SymbolicPoly::one());
        }
        let s = build_phi_norm_series(dim(4), 10, CrossTermConvention::Doubled).unwrap();
        assert_eq!(s.coefficient(2).unwrap().to_string(), "-48*A*ω");
        // The same coefficient from expanding the first factor alone.
        let x = RadialSeries::from_terms(0, 2, [(0, SymbolicPoly::one()), (2, omega_a().scale(&rat(12, 1)))]).unwrap();
        let alone = x.pow_rational(&rat(-4, 1)).unwrap();
        assert_eq!(alone.coefficient(2).unwrap(), s.coefficient(2).unwrap());
    }

    #[test]
    fn phi_norm_without_symbols_is_one() {
        let s = build_phi_norm_series(dim(6), 14, CrossTermConvention::Doubled).unwrap();
        let mut t = s.substitute(Symbol::Mass, &BigRational::zero());
        for j in 0..20 {
            for sym in [Symbol::Regular(j), Symbol::Cross(j), Symbol::Smooth(j)] {
                t = t.substitute(sym, &BigRational::zero());
            }
        }
        assert!(t.agrees_to(&RadialSeries::one(), 14));
    }

    #[test]
    fn mass_derivative_small_cases() {
        let r4 = verify_mass_derivative(dim(4), None).unwrap();
        assert!(r4.pass, "{r4:?}");
        assert_eq!(r4.leading_coefficient.to_string(), "-96*A*ω");
        let r6 = verify_mass_derivative(dim(6), None).unwrap();
        assert!(r6.pass);
        assert_eq!(r6.leading_exponent, 3);
        assert_eq!(r6.leading_coefficient.to_string(), "-240*A*ω");
        assert!(r6.first_free_exponent.unwrap() > 3);
    }

    #[test]
    fn flux_limits() {
        let r4 = verify_flux_limit(dim(4), None).unwrap();
        assert!(r4.pass, "{r4:?}");
        assert_eq!(r4.limit.to_string(), "48*A*ω^2");
        let r8 = verify_flux_limit(dim(8), None).unwrap();
        assert!(r8.pass);
        assert_eq!(r8.limit.to_string(), "224*A*ω^2");
        assert!(r8.vanishes_without_mass);
    }

    #[test]
    fn every_even_dimension_passes() {
        for n in (4..=12).step_by(2) {
            assert!(verify_mass_derivative(dim(n), None).unwrap().pass, "n = {n}");
            assert!(verify_flux_limit(dim(n), None).unwrap().pass, "n = {n}");
        }
    }

    #[test]
    fn rejects_odd_dimension_and_short_order() {
        let odd = Dimension::new(5).unwrap();
        assert!(verify_mass_derivative(odd, None).is_err());
        assert!(verify_flux_limit(dim(8), Some(3)).is_err());
    }
}
