//! Truncated Laurent series in the radial variable `r`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Symbol, SymbolicPoly};
use crate::{Error, Result};

/// Truncation order of a series known exactly (finitely many terms, no `O(·)`).
pub const EXACT_ORDER: i32 = i32::MAX / 4;

fn shifted(order: i32, by: i32) -> i32 {
    if order >= EXACT_ORDER {
        EXACT_ORDER
    } else {
        (order + by).min(EXACT_ORDER)
    }
}

/// `Σ_{lowest ≤ k ≤ order} c_k r^k + O(r^{order+1})` with symbolic `c_k`.
///
/// `lowest` is a declared lower bound for the exponents; all stored
/// exponents lie in `[lowest, order]` and zero coefficients are not stored.
/// Equality compares the valid order and the coefficients, not `lowest`.
#[derive(Debug, Clone)]
pub struct RadialSeries {
    lowest: i32,
    order: i32,
    coeffs: BTreeMap<i32, SymbolicPoly>,
}

impl RadialSeries {
    pub fn zero(lowest: i32, order: i32) -> Self {
        Self {
            lowest: lowest.min(order + 1),
            order,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a series from `(exponent, coefficient)` pairs; pairs beyond
    /// `order` are dropped.
    pub fn from_terms<I>(lowest: i32, order: i32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, SymbolicPoly)>,
    {
        let mut s = Self::zero(lowest, order);
        for (k, c) in terms {
            if k < lowest {
                return Err(Error::Series(format!(
                    "term r^{k} lies below the declared lowest exponent {lowest}"
                )));
            }
            s.add_term(k, c);
        }
        Ok(s)
    }

    /// `c · r^k` to the given truncation order.
    pub fn monomial(c: SymbolicPoly, k: i32, order: i32) -> Self {
        let mut s = Self::zero(k.min(order + 1), order);
        s.add_term(k, c);
        s
    }

    /// `c · r^k`, exact.
    pub fn exact_monomial(c: SymbolicPoly, k: i32) -> Self {
        Self::monomial(c, k, EXACT_ORDER)
    }

    /// The exact constant series `1`.
    pub fn one() -> Self {
        Self::exact_monomial(SymbolicPoly::one(), 0)
    }

    /// `r^k`, exact.
    pub fn power_of_r(k: i32) -> Self {
        Self::exact_monomial(SymbolicPoly::one(), k)
    }

    fn add_term(&mut self, k: i32, c: SymbolicPoly) {
        if k > self.order || c.is_zero() {
            return;
        }
        debug_assert!(k >= self.lowest);
        let sum = match self.coeffs.remove(&k) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(k, sum);
        }
    }

    pub fn lowest(&self) -> i32 {
        self.lowest
    }

    /// Highest exponent whose coefficient is valid.
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn is_exact(&self) -> bool {
        self.order >= EXACT_ORDER
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &SymbolicPoly)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Coefficient of `r^k`. Reading past the truncation order is an error.
    pub fn coefficient(&self, k: i32) -> Result<SymbolicPoly> {
        if k > self.order {
            return Err(Error::Series(format!(
                "coefficient of r^{k} requested but the series is only valid to order {}",
                self.order
            )));
        }
        Ok(self.coeffs.get(&k).cloned().unwrap_or_default())
    }

    /// Drops all terms above `order` and lowers the valid order accordingly.
    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order);
        let mut s = Self::zero(self.lowest, order);
        for (k, c) in self.coeffs.range(..=order) {
            s.coeffs.insert(*k, c.clone());
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.lowest.min(other.lowest), self.order.min(other.order));
        for (k, c) in self.terms().chain(other.terms()) {
            s.add_term(k, c.clone());
        }
        s
    }

    pub fn neg(&self) -> Self {
        Self {
            lowest: self.lowest,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product, valid to `min(order_a + lowest_b, order_b + lowest_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let order = shifted(self.order, other.lowest).min(shifted(other.order, self.lowest));
        let mut s = Self::zero(self.lowest + other.lowest, order);
        for (ka, ca) in self.terms() {
            for (kb, cb) in other.terms() {
                if ka + kb <= order {
                    s.add_term(ka + kb, ca * cb);
                }
            }
        }
        s
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &SymbolicPoly) -> Self {
        let mut s = Self::zero(self.lowest, self.order);
        for (k, v) in self.terms() {
            s.add_term(k, v * c);
        }
        s
    }

    pub fn scale_rational(&self, c: &BigRational) -> Self {
        self.scale(&SymbolicPoly::constant(c.clone()))
    }

    /// Multiplies by `r^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            lowest: self.lowest + k,
            order: shifted(self.order, k),
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Term-wise `d/dr`; the valid order drops by one.
    pub fn derivative(&self) -> Self {
        let mut s = Self::zero(self.lowest - 1, shifted(self.order, -1));
        for (k, c) in self.terms() {
            if k != 0 {
                s.add_term(k - 1, c.scale(&BigRational::from_integer(BigInt::from(k))));
            }
        }
        s
    }

    /// `(1 + x)^α` by the binomial series, for `self = 1 + x` with `x = O(r)`.
    pub fn pow_rational(&self, alpha: &BigRational) -> Result<Self> {
        if self.lowest < 0 && self.valuation().is_some_and(|v| v < 0) {
            return Err(Error::Series(
                "pow_rational needs a power series (no negative exponents)".into(),
            ));
        }
        if !self.coefficient(0)?.is_one() {
            return Err(Error::Series(format!(
                "pow_rational needs constant term 1, got {}",
                self.coefficient(0)?
            )));
        }
        let x = self.sub(&Self::one());
        let Some(v) = x.valuation() else {
            return Ok(Self::monomial(SymbolicPoly::one(), 0, self.order));
        };
        let is_polynomial_power = alpha.is_integer() && *alpha >= BigRational::zero();
        if self.is_exact() && !is_polynomial_power {
            return Err(Error::Series(
                "pow_rational of an exact series with a non-integer exponent needs a finite truncation order".into(),
            ));
        }
        let x = Self { lowest: v, ..x };
        let order = self.order;
        let max_k = if self.is_exact() {
            alpha.to_integer().try_into().unwrap_or(0usize)
        } else {
            (order / v).max(0) as usize
        };

        let mut result = Self::monomial(SymbolicPoly::one(), 0, order);
        let mut binom = BigRational::one();
        let mut power = Self::one();
        for k in 1..=max_k {
            let kk = BigRational::from_integer(BigInt::from(k as i64));
            binom = binom * (alpha - (&kk - BigRational::one())) / &kk;
            power = power.mul(&x).truncate(order);
            if binom.is_zero() {
                break;
            }
            result = result.add(&power.scale_rational(&binom));
        }
        Ok(result.truncate(order))
    }

    /// Replaces a symbol by a rational value in every coefficient.
    pub fn substitute(&self, s: Symbol, v: &BigRational) -> Self {
        let mut out = Self::zero(self.lowest, self.order);
        for (k, c) in self.terms() {
            out.add_term(k, c.substitute(s, v));
        }
        out
    }

    /// Whether two series agree on every exponent up to `order`.
    pub fn agrees_to(&self, other: &Self, order: i32) -> bool {
        let lo = self.lowest.min(other.lowest);
        (lo..=order).all(|k| {
            self.coeffs.get(&k).cloned().unwrap_or_default() == other.coeffs.get(&k).cloned().unwrap_or_default()
        })
    }
}

impl PartialEq for RadialSeries {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Eq for RadialSeries {}

impl fmt::Display for RadialSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·r^{k}")?;
        }
        if !self.is_exact() {
            write!(f, " + O(r^{})", self.order + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn int(c: i64) -> SymbolicPoly {
        SymbolicPoly::integer(c)
    }

    fn series(order: i32, terms: &[(i32, SymbolicPoly)]) -> RadialSeries {
        let lowest = terms.iter().map(|t| t.0).min().unwrap_or(0).min(0);
        RadialSeries::from_terms(lowest, order, terms.iter().cloned()).unwrap()
    }

    #[test]
    fn one_plus_r_times_one_minus_r() {
        let a = series(4, &[(0, int(1)), (1, int(1))]);
        let b = series(4, &[(0, int(1)), (1, int(-1))]);
        let p = a.mul(&b);
        assert_eq!(p, series(4, &[(0, int(1)), (2, int(-1))]));
        assert_eq!(p.order(), 4);
    }

    #[test]
    fn laurent_times_monomial() {
        let a_sym = SymbolicPoly::symbol(Symbol::Mass);
        let a = RadialSeries::from_terms(-2, 4, [(-2, int(1)), (0, a_sym.clone())]).unwrap();
        let p = a.mul(&RadialSeries::power_of_r(2));
        assert_eq!(p.coefficient(0).unwrap(), int(1));
        assert_eq!(p.coefficient(2).unwrap(), a_sym);
        assert_eq!(p.order(), 6);
    }

    #[test]
    fn product_order_is_min_of_orders() {
        let a = series(5, &[(0, int(1)), (3, int(2))]);
        let b = series(5, &[(0, int(1)), (1, int(7))]);
        assert_eq!(a.mul(&b).order(), 5);
        let c = RadialSeries::from_terms(-2, 3, [(-2, int(1))]).unwrap();
        assert_eq!(a.mul(&c).order(), 3);
        assert!(a.mul(&c).coefficient(4).is_err());
    }

    #[test]
    fn binomial_series() {
        let a = series(2, &[(0, int(1)), (1, int(1))]);
        let p = a.pow_rational(&q(-2, 1)).unwrap();
        assert_eq!(p, series(2, &[(0, int(1)), (1, int(-2)), (2, int(3))]));

        let m = SymbolicPoly::symbol(Symbol::Mass);
        let a = series(2, &[(0, int(1)), (2, m.clone())]);
        let p = a.pow_rational(&q(1, 2)).unwrap();
        assert_eq!(p, series(2, &[(0, int(1)), (2, m.scale(&q(1, 2)))]));
    }

    #[test]
    fn binomial_series_matches_repeated_multiplication() {
        // (1 + 12ωA r²)^{-4} = 1 / (1 + x)^4, checked by multiplying back.
        let x = &SymbolicPoly::symbol(Symbol::Omega) * &SymbolicPoly::symbol(Symbol::Mass);
        let x = x.scale(&q(12, 1));
        let a = series(3, &[(0, int(1)), (2, x.clone())]);
        let p = a.pow_rational(&q(-4, 1)).unwrap();
        assert_eq!(p.coefficient(2).unwrap(), x.scale(&q(-4, 1)));
        assert_eq!(p.coefficient(3).unwrap(), SymbolicPoly::zero());
        let a4 = a.mul(&a).mul(&a).mul(&a);
        let back = p.mul(&a4);
        assert!(back.agrees_to(&RadialSeries::one(), 3));
        assert_eq!(p.coefficient(2).unwrap().to_string(), "-48*A*ω");
    }

    #[test]
    fn pow_rejects_bad_constant_term() {
        let a = series(3, &[(0, int(2)), (1, int(1))]);
        assert!(a.pow_rational(&q(1, 2)).is_err());
        let b = RadialSeries::from_terms(-1, 3, [(-1, int(1)), (0, int(1))]).unwrap();
        assert!(b.pow_rational(&q(1, 2)).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = RadialSeries::power_of_r(-2).derivative();
        assert_eq!(d.coefficient(-3).unwrap(), int(-2));
        let m = SymbolicPoly::symbol(Symbol::Mass);
        let a = series(4, &[(0, int(1)), (2, m.clone())]);
        let d = a.derivative();
        assert_eq!(d.order(), 3);
        assert_eq!(d, series(3, &[(1, m.scale(&q(2, 1)))]));
        assert_eq!(series(4, &[(0, int(5))]).derivative().valuation(), None);
    }

    fn small_poly() -> impl Strategy<Value = SymbolicPoly> {
        (-3i64..=3, -3i64..=3, 0u32..=1).prop_map(|(a, b, e)| {
            let s = SymbolicPoly::symbol(if e == 0 { Symbol::Mass } else { Symbol::Regular(0) });
            &SymbolicPoly::integer(a) + &s.scale(&BigRational::from_integer(b.into()))
        })
    }

    fn small_series() -> impl Strategy<Value = RadialSeries> {
        (proptest::collection::vec(small_poly(), 1..5), -1i32..=1, 3i32..=6).prop_map(|(cs, lowest, order)| {
            RadialSeries::from_terms(
                lowest,
                order,
                cs.into_iter().enumerate().map(|(i, c)| (lowest + i as i32, c)),
            )
            .unwrap()
        })
    }

    fn unit_series() -> impl Strategy<Value = RadialSeries> {
        (proptest::collection::vec(small_poly(), 0..4), 3i32..=6).prop_map(|(cs, order)| {
            RadialSeries::from_terms(
                0,
                order,
                std::iter::once((0, SymbolicPoly::one()))
                    .chain(cs.into_iter().enumerate().map(|(i, c)| (i as i32 + 1, c))),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms_hold_to_truncation(a in small_series(), b in small_series(), c in small_series()) {
            let left = a.mul(&b).mul(&c);
            let right = a.mul(&b.mul(&c));
            prop_assert_eq!(left.order(), right.order());
            prop_assert!(left.agrees_to(&right, left.order()));

            let dist_l = a.mul(&b.add(&c));
            let dist_r = a.mul(&b).add(&a.mul(&c));
            let order = dist_l.order().min(dist_r.order());
            prop_assert!(dist_l.agrees_to(&dist_r, order));

            let comm = a.mul(&b);
            prop_assert!(comm.agrees_to(&b.mul(&a), comm.order()));
        }

        #[test]
        fn pow_then_inverse_pow_is_identity(a in unit_series(), num in -5i64..=5, den in 1i64..=4) {
            prop_assume!(num != 0);
            let alpha = q(num, den);
            let p = a.pow_rational(&alpha).unwrap();
            let back = p.pow_rational(&(BigRational::one() / alpha)).unwrap();
            prop_assert!(back.agrees_to(&a, a.order()));
        }
    }
}
