//! The isochronicity recursions on force coefficients.
//!
//! Write `g(x) = Σ aₙ xⁿ` with `a₁ = 1`. A potential is isochronous exactly
//! when `φ = d/dx[G/g²]` is a function of `G` alone, `φ = Σ b_j G^j`. The
//! coefficient of `x^m` in `φ` is linear in `a_{m+2}` with slope
//! `κ = −(m+2)(m+1)/(m+3)`, and `G^j` starts at `x^{2j}/2^j`. Matching order by
//! order therefore either
//!
//! - fixes `a_{m+2}` from known `b`'s (odd `m`, or every `m` when `f` is given), or
//! - fixes `b_{m/2}` from a known even coefficient `a_{m+2}` (even `m`).
//!
//! Everything is exact. The `b_j` are coefficients of `f = dF/dG` with
//! `F = 2G/g − x`, which equals `d/dx[G/g²]`.

use super::{q, Rational, TruncSeries, Var};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// `G` as a series in `x` from force coefficients `a[0..=n]` (`a[0] = 0`).
fn potential_from_force(a: &[Rational]) -> TruncSeries {
    let mut cs = vec![Rational::zero(); a.len() + 1];
    for (n, an) in a.iter().enumerate() {
        cs[n + 1] = an / BigInt::from(n + 1);
    }
    TruncSeries::new(cs)
}

/// Coefficients of `φ = d/dx[G/g²]` through `x^m`, given `a[0..=m+2]`.
fn phi(a: &[Rational], m: usize) -> TruncSeries {
    // G = x²/2 (1 + w), g = x (1 + u) ⇒ G/g² = (1 + w) / (2 (1 + u)²)
    let len = m + 2;
    let mut u = vec![Rational::zero(); len];
    let mut w = vec![Rational::zero(); len];
    u[0] = Rational::one();
    w[0] = Rational::one();
    for k in 1..len {
        let n = k + 1;
        let an = a.get(n).cloned().unwrap_or_else(Rational::zero);
        w[k] = &an * q(2, n as i64 + 1);
        u[k] = an;
    }
    let u = TruncSeries::new(u);
    let w = TruncSeries::new(w);
    let den = &u * &u;
    let ratio = w.div(&den).expect("1 + u is a unit").scale(&q(1, 2));
    ratio.derivative()
}

/// `[G^j]_m` for `j = 0..=m/2`.
fn power_coeffs(g: &TruncSeries, m: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(m / 2 + 1);
    let mut p = TruncSeries::one(m);
    let g = g.clone().pad(m).truncate(m);
    for _ in 0..=m / 2 {
        out.push(p.coeff(m));
        p = &p * &g;
    }
    out
}

enum Known<'a> {
    Evens(&'a [Rational]),
    F(&'a [Rational]),
}

/// Runs the order-by-order matching up to force index `n_max`.
/// Returns `(a[0..=n_max], b)`.
fn complete(known: Known<'_>, n_max: usize) -> (Vec<Rational>, Vec<Rational>) {
    let mut a = vec![Rational::zero(); n_max + 1];
    a[1] = Rational::one();
    let mut b: Vec<Rational> = match known {
        Known::F(bs) => bs.to_vec(),
        Known::Evens(_) => Vec::new(),
    };
    for m in 0..=n_max.saturating_sub(2) {
        let n = m + 2;
        let given = match known {
            Known::Evens(ev) if n % 2 == 0 => Some(ev.get(n / 2 - 1).cloned().unwrap_or_else(Rational::zero)),
            _ => None,
        };
        a[n] = given.clone().unwrap_or_else(Rational::zero);
        let phi_m = phi(&a[..=n], m).coeff(m);
        let pw = power_coeffs(&potential_from_force(&a[..=n]), m);
        let solve_b = given.is_some();
        let mut rest = Rational::zero();
        for (j, c) in pw.iter().enumerate() {
            if solve_b && 2 * j == m {
                continue;
            }
            if let Some(bj) = b.get(j) {
                rest += bj * c;
            }
        }
        if solve_b {
            let j = m / 2;
            let bj = (phi_m - rest) / &pw[j];
            if b.len() <= j {
                b.resize(j + 1, Rational::zero());
            }
            b[j] = bj;
        } else {
            let kappa = q(-((n * (n - 1)) as i64), n as i64 + 1);
            a[n] = (rest - phi_m) / kappa;
        }
    }
    (a, b)
}

/// Odd force coefficients `a₃, a₅, …, a_{2K+1}` from even ones `a₂, …, a_{2K}`.
pub fn odd_from_even(evens: &[Rational]) -> Result<Vec<Rational>> {
    if evens.is_empty() {
        return Err(Error::ParameterDomain("need at least a2".into()));
    }
    let n_max = 2 * evens.len() + 1;
    let (a, _) = complete(Known::Evens(evens), n_max);
    Ok((3..=n_max).step_by(2).map(|n| a[n].clone()).collect())
}

/// Replace the odd coefficients of a force series `g = x + a₂x² + …` by the
/// isochronous completion of its even ones. Keeps the order of `g`.
pub fn odd_from_even_force(g: &TruncSeries) -> Result<TruncSeries> {
    check_force_normalised(g)?;
    let n_max = g.order();
    let evens: Vec<Rational> = (2..=n_max).step_by(2).map(|n| g.coeff(n)).collect();
    let (a, _) = complete(Known::Evens(&evens), n_max.max(2));
    Ok(TruncSeries::new(a[..=n_max].to_vec()))
}

fn check_force_normalised(g: &TruncSeries) -> Result<()> {
    if g.order() < 1 || !g.coeff(0).is_zero() || g.coeff(1) != Rational::one() {
        return Err(Error::LeadingCoefficient(format!(
            "force series must start x + …, got {}",
            g
        )));
    }
    Ok(())
}

/// Potential `G(x)` through `x^order` from the coefficients `b_j` of
/// `d/dx[G/g²] = Σ b_j G^j` (missing `b_j` are zero).
pub fn g_from_f(b: &[Rational], order: usize) -> Result<TruncSeries> {
    if order < 2 {
        return Err(Error::ParameterDomain("order must be at least 2".into()));
    }
    let (a, _) = complete(Known::F(b), order - 1);
    Ok(potential_from_force(&a).truncate(order))
}

/// Result of reading `b_j` back off a potential.
#[derive(Clone, Debug, PartialEq)]
pub struct FExtraction {
    pub b: Vec<Rational>,
    /// `(m, r)` for every odd order `m` whose matching residual `r` is nonzero.
    pub obstructions: Vec<(usize, Rational)>,
}

impl FExtraction {
    pub fn is_isochronous(&self) -> bool {
        self.obstructions.is_empty()
    }
}

/// Read the coefficients `b_j` off a potential series and report orders
/// where no `f(G)` can match (the potential is not isochronous there).
pub fn extract_f(g_pot: &TruncSeries) -> Result<FExtraction> {
    if g_pot.order() < 3 || !g_pot.coeff(0).is_zero() || !g_pot.coeff(1).is_zero() || g_pot.coeff(2) != q(1, 2) {
        return Err(Error::LeadingCoefficient(
            "potential series must start x²/2 + …".into(),
        ));
    }
    let force = g_pot.derivative();
    let n_max = force.order();
    let a: Vec<Rational> = (0..=n_max).map(|n| force.coeff(n)).collect();
    let mut b: Vec<Rational> = Vec::new();
    let mut obstructions = Vec::new();
    for m in 0..=n_max - 2 {
        let phi_m = phi(&a[..=m + 2], m).coeff(m);
        let pw = power_coeffs(&potential_from_force(&a[..=m + 2]), m);
        let mut rest = Rational::zero();
        for (j, c) in pw.iter().enumerate() {
            if 2 * j != m {
                rest += b.get(j).cloned().unwrap_or_else(Rational::zero) * c;
            }
        }
        if m % 2 == 0 {
            b.push((phi_m - rest) / &pw[m / 2]);
        } else {
            let r = phi_m - rest;
            if !r.is_zero() {
                obstructions.push((m, r));
            }
        }
    }
    Ok(FExtraction { b, obstructions })
}

/// `P` from `F = 2G·P′ − P`, term by term: `p₀ = −f₀`, `p_k = f_k/(2k − 1)`.
pub fn p_from_f(f: &TruncSeries) -> TruncSeries {
    let cs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c / BigInt::from(2 * k as i64 - 1))
        .collect();
    TruncSeries::new(cs).with_var(Var::G)
}

/// `F = 2G·P′ − P`, the inverse of [`p_from_f`].
pub fn f_from_p(p: &TruncSeries) -> TruncSeries {
    let cs = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c * BigInt::from(2 * k as i64 - 1))
        .collect();
    TruncSeries::new(cs).with_var(Var::G)
}

/// Urabe function of a potential series.
#[derive(Clone, Debug, PartialEq)]
pub struct UrabeH {
    /// `h(X)` with `g = X/(1 + h(X))`, `X = √(2G)` on the `x > 0` branch.
    pub h: TruncSeries,
    /// Indices of nonzero even coefficients.
    pub even_nonzero: Vec<usize>,
    /// Largest `|c_k|` over even `k`.
    pub even_max: Rational,
}

impl UrabeH {
    pub fn is_odd(&self) -> bool {
        self.even_nonzero.is_empty()
    }
}

/// `h(X) = X/g(x(X)) − 1` for a potential series through `x^N`; exact
/// through `X^{N−2}`.
pub fn urabe_h(g_pot: &TruncSeries) -> Result<UrabeH> {
    if g_pot.order() < 3 || !g_pot.coeff(0).is_zero() || !g_pot.coeff(1).is_zero() {
        return Err(Error::SeriesInversion(
            "potential series must vanish to second order".into(),
        ));
    }
    if g_pot.coeff(2) != q(1, 2) {
        return Err(Error::SeriesInversion(
            "force series must have leading coefficient 1".into(),
        ));
    }
    let two_g = g_pot.scale(&q(2, 1));
    let big_x = two_g.sqrt()?;
    let x_of_big_x = big_x.revert()?;
    let force = g_pot.derivative();
    let g_of_big_x = force.compose(&x_of_big_x)?;
    let g_over_big_x = g_of_big_x.shift_down(1)?;
    let mut h = g_over_big_x.recip()?;
    let c0 = h.coeff(0) - Rational::one();
    h.set_coeff(0, c0);
    let h = h.with_var(Var::Root);
    let mut even_nonzero = Vec::new();
    let mut even_max = Rational::zero();
    for (k, c) in h.coeffs().iter().enumerate().step_by(2) {
        if !c.is_zero() {
            even_nonzero.push(k);
            if c.abs() > even_max {
                even_max = c.abs();
            }
        }
    }
    Ok(UrabeH { h, even_nonzero, even_max })
}
