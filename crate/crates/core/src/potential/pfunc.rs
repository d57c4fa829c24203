//! The decomposition `x = ±√(2G) + P(G)` of an isochronous potential.

use crate::error::{Error, Result};
use crate::jet::Taylor;
use crate::series::TruncSeries;
use serde::{Deserialize, Serialize};

/// Closed-form or polynomial `P(G)`, each normalised to `P(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PFunction {
    Zero,
    /// `2cG/(1 + 2G)`.
    Family1 { c: f64 },
    /// `2aG/√(1 + 2a²G)`.
    Family2 { a: f64 },
    /// `(a + 2G)/√(1 + 2G) − a`.
    Family3 { a: f64 },
    /// `α − α(1 + 4β²G)/√(1 + 2β²G)`, the analytic solution of
    /// `2GP′ − P = α/(1 + 2β²G)^{3/2}` shifted to `P(0) = 0`.
    Family4 { alpha: f64, beta: f64 },
    /// `(√(1 + 2α²G) − 1)/α`.
    Isotonic { alpha: f64 },
    /// `2a(√(1 + bc²G) − 1)/(bc)`.
    ThreeParam { a: f64, b: f64, c: f64 },
    /// Polynomial `Σ p_k G^k`.
    Poly { coeffs: TruncSeries },
}

impl PFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ParameterDomain(m.to_string()));
        let finite = |v: f64| v.is_finite();
        match *self {
            PFunction::Zero | PFunction::Poly { .. } => Ok(()),
            PFunction::Family1 { c } if !finite(c) || c == 0.0 => bad("family 1 needs c != 0"),
            PFunction::Family2 { a } if !finite(a) => bad("family 2 needs finite a"),
            PFunction::Family3 { a } if !finite(a) || a == 0.0 => bad("family 3 needs a != 0"),
            PFunction::Family4 { alpha, beta }
                if !finite(alpha) || !finite(beta) || alpha == 0.0 || beta == 0.0 =>
            {
                bad("family 4 needs alpha != 0 and beta != 0")
            }
            PFunction::Isotonic { alpha } if !finite(alpha) || alpha == 0.0 => {
                bad("isotonic needs alpha != 0")
            }
            PFunction::ThreeParam { a, b, c } => {
                if !(finite(a) && finite(b) && finite(c)) || c == 0.0 || 2.0 * a * a >= b {
                    bad("three-parameter family needs 2a^2 < b and c != 0")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Taylor coefficients of `P(G₀ + s)`.
    pub fn taylor(&self, g0: f64, len: usize) -> Taylor {
        let g = Taylor::var(g0, len);
        match *self {
            PFunction::Zero => Taylor::zero(len),
            PFunction::Family1 { c } => g * (2.0 * c) / (g * 2.0 + 1.0),
            PFunction::Family2 { a } => g * (2.0 * a) * (g * (2.0 * a * a) + 1.0).powf(-0.5),
            PFunction::Family3 { a } => (g * 2.0 + a) * (g * 2.0 + 1.0).powf(-0.5) - a,
            PFunction::Family4 { alpha, beta } => {
                // with s = 1 + 2β²G: α(√s − 2s + 1)/√s = α((√s − 1) − 2(s − 1))/√s
                let sm1 = g * (2.0 * beta * beta);
                let rs = (sm1 + 1.0).sqrt();
                (sm1 / (rs + 1.0) - sm1 * 2.0) * alpha / rs
            }
            PFunction::Isotonic { alpha } => {
                // 2αG/(1 + √(1 + 2α²G))
                g * (2.0 * alpha) / ((g * (2.0 * alpha * alpha) + 1.0).sqrt() + 1.0)
            }
            PFunction::ThreeParam { a, b, c } => {
                // 2a(√(1 + bc²G) − 1)/(bc) = 2acG/(1 + √(1 + bc²G))
                g * (2.0 * a * c) / ((g * (b * c * c) + 1.0).sqrt() + 1.0)
            }
            PFunction::Poly { ref coeffs } => poly_taylor(&coeffs.to_f64(), g0, len),
        }
    }

    /// Where the closed form stops being analytic (nearest singularity in `G`).
    pub fn radius(&self) -> f64 {
        match *self {
            PFunction::Zero | PFunction::Poly { .. } => f64::INFINITY,
            PFunction::Family1 { .. } | PFunction::Family3 { .. } => 0.5,
            PFunction::Family2 { a } => 1.0 / (2.0 * a * a),
            PFunction::Family4 { beta, .. } => 1.0 / (2.0 * beta * beta),
            PFunction::Isotonic { alpha } => 1.0 / (2.0 * alpha * alpha),
            PFunction::ThreeParam { b, c, .. } => 1.0 / (b * c * c),
        }
    }
}

/// Taylor coefficients of a polynomial re-centred at `x0`.
pub(crate) fn poly_taylor(cs: &[f64], x0: f64, len: usize) -> Taylor {
    let x = Taylor::var(x0, len);
    let mut acc = Taylor::zero(len);
    for &c in cs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// `P` together with a dilation `s`: the effective function is `P(s²G)/s`,
/// which is how the scaling `G(x) ↦ G(sx)/s²` acts on the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PDefinition {
    pub p: PFunction,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default)]
    pub label: String,
}

fn unit() -> f64 {
    1.0
}

impl PDefinition {
    pub fn new(p: PFunction) -> Self {
        PDefinition { p, scale: 1.0, label: String::new() }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Taylor coefficients of `P(G₀ + s)` including the dilation.
    pub fn taylor(&self, g0: f64, len: usize) -> Taylor {
        let s = self.scale;
        if s == 1.0 {
            return self.p.taylor(g0, len);
        }
        self.p.taylor(s * s * g0, len).dilate(s * s) / s
    }

    pub fn value(&self, g: f64) -> f64 {
        self.taylor(g, 1).value()
    }

    /// `P′(G)`.
    pub fn slope(&self, g: f64) -> f64 {
        self.taylor(g, 2).coeff(1)
    }

    /// `F(G) = 2G·P′(G) − P(G)`.
    pub fn f_value(&self, g: f64) -> f64 {
        let t = self.taylor(g, 2);
        2.0 * g * t.coeff(1) - t.value()
    }

    /// Taylor coefficients of `F` at `G = 0` (floating point).
    pub fn f_taylor_at_zero(&self, len: usize) -> Vec<f64> {
        let p = self.taylor(0.0, len);
        (0..len)
            .map(|k| (2.0 * k as f64 - 1.0) * p.coeff(k))
            .collect()
    }

    pub fn radius(&self) -> f64 {
        self.p.radius() / (self.scale * self.scale)
    }

    /// `2G·P′² < 1`, i.e. `x₊` increasing and `x₋` decreasing at `G`.
    pub fn monotone_at(&self, g: f64) -> bool {
        let d = self.slope(g);
        2.0 * g * d * d < 1.0
    }

    /// Check monotonicity on `(0, g_max]` over a dense grid.
    pub fn check_monotone(&self, g_max: f64) -> Result<()> {
        match self.first_non_monotone(g_max) {
            None => Ok(()),
            Some(g) => Err(Error::Monotonicity(format!(
                "dx/dG = ±1/√(2G) + P′(G) changes sign near G = {g:.6e} (requested G_max = {g_max})"
            ))),
        }
    }

    /// First grid point in `(0, g_max]` where monotonicity fails.
    pub fn first_non_monotone(&self, g_max: f64) -> Option<f64> {
        const N: usize = 4000;
        // uniform in X = √(2G) so the small-G end is resolved
        let x_max = (2.0 * g_max).sqrt();
        (1..=N)
            .map(|i| {
                let x = x_max * i as f64 / N as f64;
                0.5 * x * x
            })
            .find(|&g| !self.monotone_at(g) || !self.value(g).is_finite())
    }
}
