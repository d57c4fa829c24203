//! Truncated Taylor arithmetic on `f64`.
//!
//! A [`Taylor`] holds normalised coefficients `c_k = f⁽ᵏ⁾(x₀)/k!` of a function
//! around some base point, truncated after `len` terms. Arithmetic is the
//! usual Cauchy-product recurrences; everything is `Copy` and allocation free.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of stored coefficients (degree 15).
pub const CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    c: [f64; CAP],
    len: usize,
}

impl Taylor {
    /// Zero series with `len` terms.
    pub fn zero(len: usize) -> Self {
        assert!(len >= 1 && len <= CAP, "Taylor length {len} out of 1..={CAP}");
        Taylor { c: [0.0; CAP], len }
    }

    pub fn constant(v: f64, len: usize) -> Self {
        let mut t = Self::zero(len);
        t.c[0] = v;
        t
    }

    /// The independent variable `x₀ + t`.
    pub fn var(x0: f64, len: usize) -> Self {
        let mut t = Self::constant(x0, len);
        if len > 1 {
            t.c[1] = 1.0;
        }
        t
    }

    pub fn from_coeffs(cs: &[f64]) -> Self {
        let mut t = Self::zero(cs.len());
        t.c[..cs.len()].copy_from_slice(cs);
        t
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    /// Coefficient `k`, zero past the end.
    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the base point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.coeff(k) * f
    }

    pub fn truncate(mut self, len: usize) -> Self {
        let len = len.min(self.len).max(1);
        for v in &mut self.c[len..] {
            *v = 0.0;
        }
        self.len = len;
        self
    }

    /// Evaluate the truncated polynomial at offset `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Series of the derivative (one term shorter).
    pub fn differentiate(&self) -> Self {
        if self.len == 1 {
            return Self::zero(1);
        }
        let mut d = Self::zero(self.len - 1);
        for k in 1..self.len {
            d.c[k - 1] = k as f64 * self.c[k];
        }
        d
    }

    /// Multiply by `tᵐ`, keeping the length.
    pub fn shift_up(&self, m: usize) -> Self {
        let mut r = Self::zero(self.len);
        for k in 0..self.len.saturating_sub(m) {
            r.c[k + m] = self.c[k];
        }
        r
    }

    /// Divide by `tᵐ`. The dropped leading terms are assumed zero; the result
    /// is `m` terms shorter.
    pub fn shift_down(&self, m: usize) -> Self {
        assert!(m < self.len);
        let mut r = Self::zero(self.len - m);
        r.c[..self.len - m].copy_from_slice(&self.c[m..self.len]);
        r
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c[..self.len] {
            *v *= s;
        }
        self
    }

    /// Rescale the variable: coefficients of `f(x₀ + s·t)`.
    pub fn dilate(mut self, s: f64) -> Self {
        let mut p = 1.0;
        for v in &mut self.c[..self.len] {
            *v *= p;
            p *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0, self.len) / *self
    }

    /// Square root; needs a positive constant term.
    pub fn sqrt(&self) -> Self {
        let a = self;
        let mut s = Self::zero(a.len);
        s.c[0] = a.c[0].sqrt();
        for k in 1..a.len {
            let mut acc = a.c[k];
            for j in 1..k {
                acc -= s.c[j] * s.c[k - j];
            }
            s.c[k] = acc / (2.0 * s.c[0]);
        }
        s
    }

    /// Real power; needs a positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        let a = self;
        let mut y = Self::zero(a.len);
        y.c[0] = a.c[0].powf(p);
        for k in 1..a.len {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * a.c[j] * y.c[k - j];
            }
            y.c[k] = acc / (k as f64 * a.c[0]);
        }
        y
    }

    /// `self(inner(t))` where `inner` has zero constant term.
    pub fn compose(&self, inner: &Taylor) -> Self {
        let len = self.len.min(inner.len);
        let mut g = inner.truncate(len);
        g.c[0] = 0.0;
        let mut r = Self::constant(self.c[len - 1], len);
        for k in (0..len - 1).rev() {
            r = r * g;
            r.c[0] += self.c[k];
        }
        r
    }

    /// Compositional inverse of a series with `c₀ = 0`, `c₁ ≠ 0`:
    /// returns `s` with `self(s(t)) = t`.
    pub fn revert(&self) -> Option<Self> {
        let len = self.len;
        let f1 = self.coeff(1);
        if len < 2 || f1 == 0.0 || !f1.is_finite() {
            return None;
        }
        let mut f = *self;
        f.c[0] = 0.0;
        let mut s = Self::zero(len);
        s.c[1] = 1.0 / f1;
        for k in 2..len {
            let fk = f.compose(&s).c[k];
            s.c[k] = -fk / f1;
        }
        Some(s)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|v| v.is_finite())
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        let len = self.len.min(rhs.len);
        let mut r = Taylor::zero(len);
        for k in 0..len {
            r.c[k] = self.c[k] + rhs.c[k];
        }
        r
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self + (-rhs)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let len = self.len.min(rhs.len);
        let mut r = Taylor::zero(len);
        for k in 0..len {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            r.c[k] = acc;
        }
        r
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        let len = self.len.min(rhs.len);
        let mut q = Taylor::zero(len);
        for k in 0..len {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q.c[k - j];
            }
            q.c[k] = acc / rhs.c[0];
        }
        q
    }
}

impl Add<f64> for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: f64) -> Taylor {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: f64) -> Taylor {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: f64) -> Taylor {
        self.scale(rhs)
    }
}

impl Div<f64> for Taylor {
    type Output = Taylor;
    fn div(self, rhs: f64) -> Taylor {
        self.scale(1.0 / rhs)
    }
}
