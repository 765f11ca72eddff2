//! Multivariate polynomials with exact rational coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Formal symbols of the radial expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// The mass `A`.
    Mass,
    /// `ω = ω_{n-1}`.
    Omega,
    /// Taylor coefficient `b_j` of the regular part `f̄` of the Green function.
    Regular(u32),
    /// Taylor coefficient `c_j` of the cross term `⟨i*(rⁿφ₀), φ'⟩`.
    Cross(u32),
    /// Taylor coefficient `e_j` of `|φ'|²`.
    Smooth(u32),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mass => write!(f, "A"),
            Self::Omega => write!(f, "ω"),
            Self::Regular(j) => write!(f, "b{j}"),
            Self::Cross(j) => write!(f, "c{j}"),
            Self::Smooth(j) => write!(f, "e{j}"),
        }
    }
}

/// Product of symbol powers; the empty monomial is `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Symbol, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::power(s, 1)
    }

    pub fn power(s: Symbol, e: u32) -> Self {
        let mut m = BTreeMap::new();
        if e > 0 {
            m.insert(s, e);
        }
        Self(m)
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.0.get(&s).copied().unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.keys().copied()
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (s, e) in &other.0 {
            *out.entry(*s).or_insert(0) += e;
        }
        Self(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Exact polynomial in [`Symbol`]s. Zero is the empty term map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolicPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl SymbolicPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn integer(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::term(BigRational::one(), Monomial::symbol(s))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Coefficient of `m` (zero if absent).
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// All symbols that occur with a nonzero coefficient.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.symbols()).collect()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Replaces `s` by the rational value `v`.
    pub fn substitute(&self, s: Symbol, v: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(s);
            let mut rest = m.0.clone();
            rest.remove(&s);
            let factor = num_traits::pow(v.clone(), e as usize);
            out.add_term(Monomial(rest), c * factor);
        }
        out
    }
}

impl serde::Serialize for SymbolicPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Add for &SymbolicPoly {
    type Output = SymbolicPoly;
    fn add(self, rhs: &SymbolicPoly) -> SymbolicPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SymbolicPoly {
    type Output = SymbolicPoly;
    fn sub(self, rhs: &SymbolicPoly) -> SymbolicPoly {
        self + &(-rhs)
    }
}

impl Neg for &SymbolicPoly {
    type Output = SymbolicPoly;
    fn neg(self) -> SymbolicPoly {
        SymbolicPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &SymbolicPoly {
    type Output = SymbolicPoly;
    fn mul(self, rhs: &SymbolicPoly) -> SymbolicPoly {
        let mut out = SymbolicPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for SymbolicPoly {
    /// Deterministic human-readable form, e.g. `-96*A*ω`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let is_unit_monomial = m.0.is_empty();
            if is_unit_monomial {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let a = SymbolicPoly::symbol(Symbol::Mass);
        let w = SymbolicPoly::symbol(Symbol::Omega);
        let s = &(&a + &w) * &(&a - &w);
        let expected = &(&a * &a) - &(&w * &w);
        assert_eq!(s, expected);
        assert!((&s - &expected).is_zero());
        assert_eq!(SymbolicPoly::zero().to_string(), "0");
    }

    #[test]
    fn display_is_stable() {
        let p = &SymbolicPoly::symbol(Symbol::Mass).scale(&q(-96, 1)) * &SymbolicPoly::symbol(Symbol::Omega);
        assert_eq!(p.to_string(), "-96*A*ω");
        let p = &p + &SymbolicPoly::constant(q(1, 2));
        assert_eq!(p.to_string(), "1/2 - 96*A*ω");
    }

    #[test]
    fn substitution() {
        let a = SymbolicPoly::symbol(Symbol::Mass);
        let p = &(&a * &a) + &SymbolicPoly::symbol(Symbol::Regular(0));
        let at_zero = p.substitute(Symbol::Mass, &q(0, 1));
        assert_eq!(at_zero, SymbolicPoly::symbol(Symbol::Regular(0)));
        let at_half = p.substitute(Symbol::Mass, &q(1, 2));
        assert_eq!(
            at_half,
            &SymbolicPoly::constant(q(1, 4)) + &SymbolicPoly::symbol(Symbol::Regular(0))
        );
    }
}
