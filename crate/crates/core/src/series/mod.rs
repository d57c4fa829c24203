//! Exact truncated power series over big rationals.
//!
//! A [`TruncSeries`] stores `c₀ … c_N` and represents the class of power
//! series modulo `t^{N+1}`. Every operation is exact through the order it
//! reports; floating point never enters.

mod recursion;

pub use recursion::{
    extract_f, f_from_p, g_from_f, odd_from_even, odd_from_even_force, p_from_f, urabe_h, FExtraction,
    UrabeH,
};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

pub type Rational = BigRational;

/// Small-integer rational constructor.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Which variable a series is expanded in. Purely a label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    #[default]
    X,
    G,
    /// `X = ±√(2G)`.
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<Rational>,
    var: Var,
}

impl TruncSeries {
    /// Series from coefficients `c₀ … c_N`; the order is `N = len - 1`.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        TruncSeries { coeffs, var: Var::X }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| q(c, 1)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Rational::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Rational::one();
        s
    }

    /// The variable `t` itself.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of `tᵏ`, zero beyond the order.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set_coeff(&mut self, k: usize, v: Rational) {
        self.coeffs[k] = v;
    }

    /// Drop terms above `order` (no-op when already shorter).
    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    /// Extend with zeros up to `order`; only meaningful for polynomials.
    pub fn pad(mut self, order: usize) -> Self {
        if self.coeffs.len() < order + 1 {
            self.coeffs.resize(order + 1, Rational::zero());
        }
        self
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            var: self.var,
        }
    }

    /// Multiply by `tᵐ`; the order grows by `m`.
    pub fn shift_up(&self, m: usize) -> Self {
        let mut cs = vec![Rational::zero(); m];
        cs.extend(self.coeffs.iter().cloned());
        TruncSeries { coeffs: cs, var: self.var }
    }

    /// Divide by `tᵐ`; the leading `m` coefficients must vanish.
    pub fn shift_down(&self, m: usize) -> Result<Self> {
        if m > self.order() || self.coeffs[..m].iter().any(|c| !c.is_zero()) {
            return Err(Error::LeadingCoefficient(format!(
                "cannot divide by t^{m}: low-order terms are nonzero"
            )));
        }
        Ok(TruncSeries { coeffs: self.coeffs[m..].to_vec(), var: self.var })
    }

    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0).with_var(self.var);
        }
        let cs = (1..self.coeffs.len())
            .map(|k| &self.coeffs[k] * BigInt::from(k))
            .collect();
        TruncSeries { coeffs: cs, var: self.var }
    }

    /// Antiderivative with zero constant term; the order grows by one.
    pub fn integral(&self) -> Self {
        let mut cs = vec![Rational::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            cs.push(c / BigInt::from(k + 1));
        }
        TruncSeries { coeffs: cs, var: self.var }
    }

    /// Multiplicative inverse; needs `c₀ ≠ 0`.
    pub fn recip(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::SingularDenominator("series inverse needs c0 != 0".into()));
        }
        let n = self.coeffs.len();
        let mut r: Vec<Rational> = Vec::with_capacity(n);
        r.push(c0.recip());
        for k in 1..n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &r[k - j];
            }
            r.push(-acc / c0);
        }
        Ok(TruncSeries { coeffs: r, var: self.var })
    }

    pub fn div(&self, rhs: &TruncSeries) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    /// `self(inner(t))` with `inner(0) = 0`.
    pub fn compose(&self, inner: &TruncSeries) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::LeadingCoefficient(
                "composition needs an inner series with zero constant term".into(),
            ));
        }
        let order = self.order().min(inner.order());
        let g = inner.clone().truncate(order);
        let mut r = TruncSeries::zero(order);
        r.coeffs[0] = self.coeffs[order].clone();
        for k in (0..order).rev() {
            r = &r * &g;
            r.coeffs[0] += &self.coeffs[k];
        }
        r.var = inner.var;
        Ok(r)
    }

    /// Compositional inverse: `s` with `self(s(t)) = t`. Needs `c₀ = 0`, `c₁ ≠ 0`.
    pub fn revert(&self) -> Result<Self> {
        if self.order() < 1 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(Error::SeriesInversion(
                "reversion needs c0 = 0 and c1 != 0".into(),
            ));
        }
        let n = self.order();
        let f1 = self.coeffs[1].clone();
        let mut s = TruncSeries::zero(n);
        s.coeffs[1] = f1.recip();
        // Powers of s are rebuilt each round; n is small (≤ 20 in practice).
        for k in 2..=n {
            let fk = self.compose(&s)?.coeffs[k].clone();
            s.coeffs[k] = -fk / &f1;
        }
        Ok(s)
    }

    /// Square root. The valuation must be even and the leading coefficient a
    /// rational square; `√(c t^{2m} (1 + …)) = √c tᵐ √(1 + …)`. A series with
    /// valuation `2m` loses `m` orders of precision.
    pub fn sqrt(&self) -> Result<Self> {
        let v = self.valuation().ok_or_else(|| {
            Error::LeadingCoefficient("square root of the zero series".into())
        })?;
        if v % 2 != 0 {
            return Err(Error::LeadingCoefficient(format!(
                "square root needs even valuation, got {v}"
            )));
        }
        let m = v / 2;
        let lead = rational_sqrt(&self.coeffs[v]).ok_or_else(|| {
            Error::LeadingCoefficient(format!(
                "leading coefficient {} is not a rational square",
                fmt_rational(&self.coeffs[v])
            ))
        })?;
        let unit = self.shift_down(v)?.scale(&self.coeffs[v].recip());
        let n = unit.coeffs.len();
        let mut s: Vec<Rational> = Vec::with_capacity(n);
        s.push(Rational::one());
        for k in 1..n {
            let mut acc = unit.coeffs[k].clone();
            for j in 1..k {
                acc -= &s[j] * &s[k - j];
            }
            s.push(acc / BigInt::from(2));
        }
        let root = TruncSeries { coeffs: s, var: self.var }.scale(&lead);
        let out = root.shift_up(m);
        Ok(out.truncate(self.order() - m))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Horner evaluation of the truncated polynomial in `f64`.
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.to_f64().iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// JSON-friendly form: `"num/den"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(fmt_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::ParameterDomain("empty coefficient list".into()));
        }
        let cs = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(cs))
    }
}

impl Serialize for TruncSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        TruncSeries::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", fmt_rational(c))?,
                1 => write!(f, "({})t", fmt_rational(c))?,
                _ => write!(f, "({})t^{k}", fmt_rational(c))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.order() + 1)
    }
}

fn binary<F: Fn(&Rational, &Rational) -> Rational>(a: &TruncSeries, b: &TruncSeries, f: F) -> TruncSeries {
    let n = a.coeffs.len().min(b.coeffs.len());
    TruncSeries {
        coeffs: (0..n).map(|k| f(&a.coeffs[k], &b.coeffs[k])).collect(),
        var: a.var,
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        binary(self, rhs, |x, y| x + y)
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        binary(self, rhs, |x, y| x - y)
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        self.scale(&-Rational::one())
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncSeries { coeffs: out, var: self.var }
    }
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

/// Correctly rounded conversion (via `num-traits`).
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational from a finite `f64`.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::ParameterDomain(format!("{v} is not finite")))
}

/// `"num/den"`, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or an integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::ParameterDomain(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::ParameterDomain(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(cs: &[(i64, i64)]) -> TruncSeries {
        TruncSeries::new(cs.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn revert_x_plus_x_squared() {
        // Catalan numbers with alternating signs
        let f = TruncSeries::from_ints(&[0, 1, 1, 0, 0, 0]);
        let r = f.revert().unwrap();
        assert_eq!(r, TruncSeries::from_ints(&[0, 1, -1, 2, -5, 14]));
    }

    #[test]
    fn compose_with_zero_series_is_constant_term() {
        let f = s(&[(3, 7), (1, 1), (-2, 5)]);
        let z = TruncSeries::zero(2);
        assert_eq!(f.compose(&z).unwrap(), s(&[(3, 7), (0, 1), (0, 1)]));
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let f = TruncSeries::from_ints(&[1, 2, 1, 0, 0]);
        assert_eq!(f.sqrt().unwrap(), TruncSeries::from_ints(&[1, 1, 0, 0, 0]));
    }

    #[test]
    fn sqrt_of_two_g_for_harmonic() {
        // 2G = x² → √ = x, losing one order
        let two_g = TruncSeries::from_ints(&[0, 0, 1, 0, 0]);
        assert_eq!(two_g.sqrt().unwrap(), TruncSeries::from_ints(&[0, 1, 0, 0]));
    }

    #[test]
    fn sqrt_rejects_odd_valuation_and_non_squares() {
        assert!(matches!(
            TruncSeries::from_ints(&[0, 1, 1]).sqrt(),
            Err(Error::LeadingCoefficient(_))
        ));
        assert!(matches!(
            TruncSeries::from_ints(&[2, 1, 1]).sqrt(),
            Err(Error::LeadingCoefficient(_))
        ));
    }

    #[test]
    fn revert_needs_linear_term() {
        assert!(matches!(
            TruncSeries::from_ints(&[0, 0, 1]).revert(),
            Err(Error::SeriesInversion(_))
        ));
    }

    #[test]
    fn string_round_trip() {
        let f = s(&[(10, 9), (-56, 27), (0, 1), (7, 1)]);
        let strs = f.to_strings();
        assert_eq!(strs[0], "10/9");
        assert_eq!(strs[3], "7/1");
        assert_eq!(TruncSeries::from_strings(&strs).unwrap(), f);
        let json = serde_json::to_string(&f).unwrap();
        let back: TruncSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_rational(" -3 ").unwrap(), q(-3, 1));
    }

    fn arb_series(len: usize) -> impl Strategy<Value = TruncSeries> {
        proptest::collection::vec((-9i64..=9, 1i64..=6), len)
            .prop_map(|v| TruncSeries::new(v.into_iter().map(|(n, d)| q(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn revert_then_compose_is_identity(mut f in arb_series(7), c1 in 1i64..5) {
            f.set_coeff(0, Rational::zero());
            f.set_coeff(1, q(c1, 1));
            let r = f.revert().unwrap();
            prop_assert_eq!(f.compose(&r).unwrap(), TruncSeries::identity(6));
            prop_assert_eq!(r.compose(&f).unwrap(), TruncSeries::identity(6));
        }

        #[test]
        fn division_undoes_multiplication(a in arb_series(6), mut b in arb_series(6)) {
            if b.coeff(0).is_zero() { b.set_coeff(0, q(1, 1)); }
            let back = (&a * &b).div(&b).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn sqrt_of_square(mut a in arb_series(6)) {
            a.set_coeff(0, q(1, 1));
            let sq = &a * &a;
            prop_assert_eq!(sq.sqrt().unwrap(), a);
        }

        #[test]
        fn derivative_of_integral(a in arb_series(6)) {
            prop_assert_eq!(a.integral().derivative(), a);
        }
    }
}
