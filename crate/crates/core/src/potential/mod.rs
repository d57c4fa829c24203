//! Potential families, jets, turning branches, involution and scaling.

mod pfunc;

pub use pfunc::{PDefinition, PFunction};

use crate::error::{Error, Result};
use crate::jet::{Taylor, CAP};
use crate::roots::newton_bracketed;
use crate::series::{rational_from_f64, Rational, TruncSeries};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Largest jet order `eval_jet` accepts by default.
pub const MAX_JET_ORDER: usize = 6;

/// Default upper energy for decomposition-defined potentials.
pub const DEFAULT_G_MAX: f64 = 8.0;

/// One side of the well.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Open interval `(lo, hi)` with the supremum of `G` approached at each end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    /// `sup G` towards `lo` (`∞` for a singular wall or unbounded growth).
    pub g_lo: f64,
    /// `sup G` towards `hi`.
    pub g_hi: f64,
}

impl Domain {
    fn whole_line() -> Self {
        Domain { lo: f64::NEG_INFINITY, hi: f64::INFINITY, g_lo: f64::INFINITY, g_hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn edge(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.lo,
            Side::Right => self.hi,
        }
    }

    pub fn edge_level(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.g_lo,
            Side::Right => self.g_hi,
        }
    }

    /// A finite edge where `G` diverges.
    pub fn is_wall(&self, side: Side) -> bool {
        self.edge(side).is_finite() && self.edge_level(side).is_infinite()
    }

    /// Highest energy whose orbit stays inside.
    pub fn max_energy(&self) -> f64 {
        self.g_lo.min(self.g_hi)
    }
}

/// The potential families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    Harmonic,
    /// `(1/8α²)[αx + 1 − 1/(αx + 1)]²`.
    Isotonic { alpha: f64 },
    /// The same potential written as a rational function,
    /// `x²(αx + 2)² / (8(αx + 1)²)`.
    ChalykhVeselov { alpha: f64 },
    /// `[2a + bcx − 2a√(1 + 2acx + bc²x²/2)]² / (2c²(b − 2a²)²)`.
    ThreeParam { a: f64, b: f64, c: f64 },
    /// `G` defined implicitly by `x = ±√(2G) + P(G)` on `0 ≤ G < g_max`.
    PDefined {
        #[serde(flatten)]
        def: PDefinition,
        #[serde(default)]
        g_max: Option<f64>,
    },
    /// Polynomial `G(x) = Σ c_k x^k` with exact coefficients.
    Series { coeffs: TruncSeries },
}

/// A validated potential: family plus its domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct PotentialSpec {
    family: Family,
    domain: Domain,
    /// Cached `f64` coefficients for series potentials.
    poly: Vec<f64>,
    /// Resolved `G_max` for decomposition-defined potentials.
    g_max: f64,
}

impl TryFrom<Family> for PotentialSpec {
    type Error = Error;
    fn try_from(f: Family) -> Result<Self> {
        PotentialSpec::new(f)
    }
}

impl From<PotentialSpec> for Family {
    fn from(p: PotentialSpec) -> Family {
        match p.family {
            Family::PDefined { def, g_max: None } => Family::PDefined { def, g_max: None },
            other => other,
        }
    }
}

/// `G` and its derivatives `g, g′, …, g^(k−1)` at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jet {
    pub x: f64,
    pub order: usize,
    /// `(G, g, g′, …)`, length `order + 1`.
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn potential(&self) -> f64 {
        self.coeffs[0]
    }

    /// `g^(n)`; `n = 0` is the force.
    pub fn force_derivative(&self, n: usize) -> f64 {
        self.coeffs[n + 1]
    }
}

impl PotentialSpec {
    /// Validate parameters, resolve the domain and check `g′(0) = 1`.
    pub fn new(family: Family) -> Result<Self> {
        let mut spec = PotentialSpec { family, domain: Domain::whole_line(), poly: Vec::new(), g_max: 0.0 };
        spec.domain = spec.resolve_domain()?;
        let t = spec.taylor(0.0, 3)?;
        let (g0, f0, f1) = (t.coeff(0), t.coeff(1), 2.0 * t.coeff(2));
        if g0.abs() > 1e-14 || f0.abs() > 1e-14 || (f1 - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(format!(
                "G(0) = {g0:e}, g(0) = {f0:e}, g'(0) = {f1}"
            )));
        }
        Ok(spec)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn max_energy(&self) -> f64 {
        self.domain.max_energy()
    }

    /// Short identifier used in reports.
    pub fn name(&self) -> String {
        match &self.family {
            Family::Harmonic => "harmonic".into(),
            Family::Isotonic { alpha } => format!("isotonic(alpha={alpha})"),
            Family::ChalykhVeselov { alpha } => format!("chalykh-veselov(alpha={alpha})"),
            Family::ThreeParam { a, b, c } => format!("three-param(a={a},b={b},c={c})"),
            Family::PDefined { def, .. } if !def.label.is_empty() => def.label.clone(),
            Family::PDefined { def, .. } => format!("p-defined({:?})", def.p),
            Family::Series { coeffs } => format!("series(order={})", coeffs.order()),
        }
    }

    fn resolve_domain(&mut self) -> Result<Domain> {
        let finite = |v: f64| v.is_finite();
        match &self.family {
            Family::Harmonic => Ok(Domain::whole_line()),
            Family::Isotonic { alpha } | Family::ChalykhVeselov { alpha } => {
                let alpha = *alpha;
                if !finite(alpha) || alpha == 0.0 {
                    return Err(Error::ParameterDomain("alpha must be nonzero".into()));
                }
                let wall = -1.0 / alpha;
                Ok(if alpha > 0.0 {
                    Domain { lo: wall, hi: f64::INFINITY, g_lo: f64::INFINITY, g_hi: f64::INFINITY }
                } else {
                    Domain { lo: f64::NEG_INFINITY, hi: wall, g_lo: f64::INFINITY, g_hi: f64::INFINITY }
                })
            }
            Family::ThreeParam { a, b, c } => {
                PFunction::ThreeParam { a: *a, b: *b, c: *c }.validate()?;
                Ok(Domain::whole_line())
            }
            Family::PDefined { def, g_max } => {
                def.p.validate()?;
                if !finite(def.scale) || def.scale == 0.0 {
                    return Err(Error::ParameterDomain("scale must be nonzero".into()));
                }
                let g_max = match *g_max {
                    Some(g) => {
                        if !(g > 0.0 && g.is_finite()) {
                            return Err(Error::ParameterDomain("g_max must be positive".into()));
                        }
                        def.check_monotone(g)?;
                        g
                    }
                    None => match def.first_non_monotone(DEFAULT_G_MAX) {
                        None => DEFAULT_G_MAX,
                        Some(g) => 0.98 * g,
                    },
                };
                self.g_max = g_max;
                let r = (2.0 * g_max).sqrt();
                let p = def.value(g_max);
                Ok(Domain { lo: -r + p, hi: r + p, g_lo: g_max, g_hi: g_max })
            }
            Family::Series { coeffs } => {
                let c = coeffs.coeffs();
                if c.len() < 3
                    || !c[0].is_zero()
                    || !c[1].is_zero()
                    || c[2] != Rational::new(1.into(), 2.into())
                {
                    return Err(Error::Normalization(
                        "series potential must start x²/2 + O(x³)".into(),
                    ));
                }
                self.poly = coeffs.to_f64();
                Ok(series_domain(&self.poly))
            }
        }
    }

    /// Taylor coefficients of `G(x + t)`, `len` terms.
    pub fn taylor(&self, x: f64, len: usize) -> Result<Taylor> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside ({}, {})",
                self.domain.lo, self.domain.hi
            )));
        }
        let t = match &self.family {
            Family::Harmonic => {
                let v = Taylor::var(x, len);
                v * v * 0.5
            }
            Family::Isotonic { alpha } => {
                let a = *alpha;
                let at = Taylor::var(x, len) * a;
                // y − 1/y = αx(2 + αx)/(1 + αx)
                let w = at * (at + 2.0) / (at + 1.0);
                w * w / (8.0 * a * a)
            }
            Family::ChalykhVeselov { alpha } => {
                let a = *alpha;
                let v = Taylor::var(x, len);
                let num = v * v * (v * a + 2.0) * (v * a + 2.0);
                let den = (v * a + 1.0) * (v * a + 1.0) * 8.0;
                num / den
            }
            Family::ThreeParam { a, b, c } => {
                let (a, b, c) = (*a, *b, *c);
                let v = Taylor::var(x, len);
                let u = v * (2.0 * a * c) + v * v * (0.5 * b * c * c);
                let bracket = v * (b * c) - u * (2.0 * a) / ((u + 1.0).sqrt() + 1.0);
                let d = b - 2.0 * a * a;
                bracket * bracket / (2.0 * c * c * d * d)
            }
            Family::PDefined { def, .. } => self.pdefined_taylor(def, x, len)?,
            Family::Series { .. } => pfunc::poly_taylor(&self.poly, x, len),
        };
        if !t.is_finite() {
            return Err(Error::Domain(format!("potential not finite at x = {x}")));
        }
        Ok(t)
    }

    /// Solve `X + P(X²/2) = x` for `X`, the signed `√(2G)` coordinate.
    fn root_coordinate(&self, def: &PDefinition, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let side = Side::of(x);
        let x_max = (2.0 * self.g_max).sqrt() * side.sign();
        let fdf = |big_x: f64| {
            let t = def.taylor(0.5 * big_x * big_x, 2);
            (big_x + t.value() - x, 1.0 + big_x * t.coeff(1))
        };
        newton_bracketed(fdf, 0.0, x_max, x, 1e-15).map_err(|e| match e {
            Error::Bracket(_) => Error::Domain(format!("x = {x} beyond G_max = {}", self.g_max)),
            other => Error::Inversion(format!("x(G) = {x}: {other}")),
        })
    }

    fn pdefined_taylor(&self, def: &PDefinition, x: f64, len: usize) -> Result<Taylor> {
        let x0 = self.root_coordinate(def, x)?;
        let g0 = 0.5 * x0 * x0;
        if len == 1 {
            return Ok(Taylor::constant(g0, 1));
        }
        // x(X₀ + s) − x = s + P(G₀ + X₀s + s²/2) − P(G₀); revert, then G = (X₀ + s)²/2
        let s = Taylor::var(0.0, len);
        let sigma = s * x0 + s * s * 0.5;
        let p = def.taylor(g0, len).compose(&sigma);
        let mut dx = s + p;
        dx = dx - dx.value();
        let s_of_t = dx
            .revert()
            .ok_or_else(|| Error::Inversion(format!("dx/dX vanishes at x = {x}")))?;
        let big = s_of_t + x0;
        Ok(big * big * 0.5)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.taylor(x, 1)?.value())
    }

    /// `(G(x), g(x))`.
    pub fn value_force(&self, x: f64) -> Result<(f64, f64)> {
        if let Family::PDefined { def, .. } = &self.family {
            if !self.domain.contains(x) {
                return Err(Error::Domain(format!("x = {x} outside domain")));
            }
            // g = X/(1 + X·P′(X²/2))
            let big = self.root_coordinate(def, x)?;
            let g0 = 0.5 * big * big;
            return Ok((g0, big / (1.0 + big * def.slope(g0))));
        }
        let t = self.taylor(x, 2)?;
        Ok((t.value(), t.coeff(1)))
    }

    pub fn force(&self, x: f64) -> Result<f64> {
        Ok(self.value_force(x)?.1)
    }

    /// Jet `(G, g, …, g^(k−1))` with the default order cap.
    pub fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        if k > MAX_JET_ORDER {
            return Err(Error::ParameterDomain(format!(
                "jet order {k} exceeds the configured maximum {MAX_JET_ORDER}"
            )));
        }
        self.jet_uncapped(x, k)
    }

    /// Jet without the default cap (up to the Taylor capacity).
    pub fn jet_uncapped(&self, x: f64, k: usize) -> Result<Jet> {
        if k == 0 || k + 1 > CAP {
            return Err(Error::ParameterDomain(format!("jet order {k} out of range")));
        }
        let t = self.taylor(x, k + 1)?;
        Ok(Jet { x, order: k, coeffs: (0..=k).map(|i| t.derivative_at(i)).collect() })
    }

    /// The point on `side` where `G = level`.
    pub fn branch(&self, level: f64, side: Side) -> Result<f64> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::ParameterDomain(format!("level {level} must be >= 0")));
        }
        if level == 0.0 {
            return Ok(0.0);
        }
        if level >= self.domain.edge_level(side) {
            return Err(Error::Domain(format!(
                "level {level} not reached on the {side:?} side (sup G = {})",
                self.domain.edge_level(side)
            )));
        }
        let s = side.sign();
        match &self.family {
            Family::Harmonic => Ok(s * (2.0 * level).sqrt()),
            Family::PDefined { def, .. } => Ok(s * (2.0 * level).sqrt() + def.value(level)),
            Family::Isotonic { alpha } => {
                let a = *alpha;
                // w = y − 1/y with w² = 8α²G and sign(w) = sign(αx)
                let w = s * a.signum() * (8.0 * a * a * level).sqrt();
                // y − 1 = (w + w²/(√(w²+4) + 2))/2
                let ym1 = 0.5 * (w + w * w / ((w * w + 4.0).sqrt() + 2.0));
                Ok(ym1 / a)
            }
            _ => self.branch_numeric(level, side),
        }
    }

    /// `(x, 1/g(x))` at the point of `side` where `G = level`.
    pub fn branch_point(&self, level: f64, side: Side) -> Result<(f64, f64)> {
        let s = side.sign();
        if level > 0.0 && level < 1e-200 {
            // below this the quadratic approximation is exact in f64
            let big = s * (2.0 * level).sqrt();
            return Ok((big, 1.0 / big));
        }
        if let Family::PDefined { def, .. } = &self.family {
            if level >= self.domain.edge_level(side) || !(level > 0.0) {
                return Err(Error::Domain(format!("level {level} outside (0, {})", self.g_max)));
            }
            // 1/g = 1/X + P′(G)
            let big = s * (2.0 * level).sqrt();
            let t = def.taylor(level, 2);
            return Ok((big + t.value(), 1.0 / big + t.coeff(1)));
        }
        let x = self.branch(level, side)?;
        Ok((x, 1.0 / self.force(x)?))
    }

    /// Bracket by geometric expansion, then safeguarded Newton.
    fn branch_numeric(&self, level: f64, side: Side) -> Result<f64> {
        let s = side.sign();
        let reach = (self.domain.edge(side) * s).max(0.0);
        let mut inner = 0.0;
        let mut t = (2.0 * level).sqrt().min(0.5 * reach);
        let mut outer = None;
        for _ in 0..200 {
            let g = self.value(s * t)?;
            if g >= level {
                outer = Some(t);
                break;
            }
            inner = t;
            t = if reach.is_finite() { (2.0 * t).min(0.5 * (t + reach)) } else { 2.0 * t };
            if t <= inner {
                break;
            }
        }
        let outer = outer.ok_or_else(|| {
            Error::Domain(format!("level {level} not reached on the {side:?} side"))
        })?;
        let fdf = |u: f64| match self.value_force(s * u) {
            Ok((g, f)) => (g - level, s * f),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let guess = (2.0 * level).sqrt().clamp(inner, outer);
        let u = newton_bracketed(fdf, inner, outer, guess, 1e-15)
            .map_err(|e| Error::Inversion(format!("branch at level {level}: {e}")))?;
        Ok(s * u)
    }

    /// Turning points `(a, b)` of the orbit at energy `e`.
    pub fn turning_points(&self, e: f64) -> Result<(f64, f64)> {
        if !(e > 0.0) {
            return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
        }
        Ok((self.branch(e, Side::Left)?, self.branch(e, Side::Right)?))
    }

    /// `A(x)`: the other point with the same `G`.
    pub fn involution(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let g = self.value(x)?;
        if let Family::PDefined { def, .. } = &self.family {
            // X ↦ −X in the root coordinate
            let big = self.root_coordinate(def, x)?;
            return Ok(-big + def.value(0.5 * big * big));
        }
        self.branch(g, Side::of(x).opposite())
    }

    /// The decomposition `x = ±√(2G) + P(G)` when the family provides one.
    pub fn decomposition(&self) -> Result<PDefinition> {
        match &self.family {
            Family::Harmonic => Ok(PDefinition::new(PFunction::Zero)),
            Family::Isotonic { alpha } | Family::ChalykhVeselov { alpha } => {
                Ok(PDefinition::new(PFunction::Isotonic { alpha: *alpha }))
            }
            Family::ThreeParam { a, b, c } => {
                Ok(PDefinition::new(PFunction::ThreeParam { a: *a, b: *b, c: *c }))
            }
            Family::PDefined { def, .. } => Ok(def.clone()),
            Family::Series { coeffs } => series_decomposition(coeffs),
        }
    }

    /// Exact series coefficients, for series potentials.
    pub fn series(&self) -> Option<&TruncSeries> {
        match &self.family {
            Family::Series { coeffs } => Some(coeffs),
            _ => None,
        }
    }

    /// `x ↦ G(cx)/c²`, same period function.
    pub fn scale(&self, c: f64) -> Result<PotentialSpec> {
        if !c.is_finite() || c == 0.0 {
            return Err(Error::ParameterDomain("scale factor must be nonzero".into()));
        }
        let family = match &self.family {
            Family::Harmonic => Family::Harmonic,
            Family::Isotonic { alpha } => Family::Isotonic { alpha: alpha * c },
            Family::ChalykhVeselov { alpha } => Family::ChalykhVeselov { alpha: alpha * c },
            Family::ThreeParam { a, b, c: c0 } => Family::ThreeParam { a: *a, b: *b, c: c0 * c },
            Family::PDefined { def, .. } => Family::PDefined {
                def: PDefinition { scale: def.scale * c, ..def.clone() },
                g_max: Some(self.g_max / (c * c)),
            },
            Family::Series { coeffs } => {
                let cr = rational_from_f64(c)?;
                let mut out = coeffs.clone();
                let inv2 = (&cr * &cr).recip();
                let mut pw = inv2;
                for k in 0..=coeffs.order() {
                    out.set_coeff(k, coeffs.coeff(k) * &pw);
                    pw *= &cr;
                }
                Family::Series { coeffs: out }
            }
        };
        PotentialSpec::new(family)
    }
}

/// Domain of a polynomial potential: the widest interval around 0 where
/// `x·g(x) > 0`, searched out to `|x| = 50`.
fn series_domain(c: &[f64]) -> Domain {
    const REACH: f64 = 50.0;
    const N: usize = 20000;
    let force = |x: f64| pfunc::poly_taylor(c, x, 2).coeff(1);
    let value = |x: f64| pfunc::poly_taylor(c, x, 1).value();
    let mut out = Domain::whole_line();
    for side in [Side::Left, Side::Right] {
        let s = side.sign();
        let mut edge = None;
        for i in 1..=N {
            let x = s * REACH * (i as f64 / N as f64).powi(2);
            if s * force(x) <= 0.0 {
                edge = Some(x);
                break;
            }
        }
        let (e, lvl) = match edge {
            Some(x) => (x, value(x)),
            None => {
                let x = s * REACH;
                (x, value(x))
            }
        };
        match side {
            Side::Left => {
                out.lo = e;
                out.g_lo = lvl;
            }
            Side::Right => {
                out.hi = e;
                out.g_hi = lvl;
            }
        }
    }
    out
}

/// `P` for an isochronous polynomial potential: invert `X = √(2G)` exactly and
/// read `P` off the even part of `x(X)`.
fn series_decomposition(coeffs: &TruncSeries) -> Result<PDefinition> {
    let two_g = coeffs.scale(&Rational::from_integer(2.into()));
    let x_of_big = two_g.sqrt()?.revert()?;
    let n = x_of_big.order();
    let mut p = TruncSeries::zero(n / 2);
    let mut pow2 = Rational::one();
    for k in 0..=n {
        let ck = x_of_big.coeff(k);
        if k % 2 == 1 {
            let want = if k == 1 { Rational::one() } else { Rational::zero() };
            if ck != want {
                return Err(Error::DecompositionUnavailable(format!(
                    "series is not isochronous: x(X) has odd coefficient {} at X^{k}",
                    crate::series::fmt_rational(&ck)
                )));
            }
        } else {
            // X^{2j} = (2G)^j
            p.set_coeff(k / 2, ck * &pow2);
            pow2 *= Rational::from_integer(2.into());
        }
    }
    Ok(PDefinition::new(PFunction::Poly { coeffs: p.with_var(crate::series::Var::G) }))
}

/// The potential defined by `x = ±√(2G) + P(G)` on `0 ≤ G < g_max`.
pub fn potential_from_p(def: PDefinition, g_max: f64) -> Result<PotentialSpec> {
    PotentialSpec::new(Family::PDefined { def, g_max: Some(g_max) })
}

/// Named catalog entries with their default parameters.
pub fn make_family(id: &str, params: &FamilyParams) -> Result<PotentialSpec> {
    let family = match id {
        "harmonic" => Family::Harmonic,
        "isotonic" => Family::Isotonic { alpha: params.alpha.unwrap_or(1.0) },
        "chalykh-veselov" => Family::ChalykhVeselov { alpha: params.alpha.unwrap_or(1.0) },
        "three-param" => Family::ThreeParam {
            a: params.a.unwrap_or(0.1),
            b: params.b.unwrap_or(1.0),
            c: params.c.unwrap_or(1.0),
        },
        "family1" => pdefined(PFunction::Family1 { c: params.c.unwrap_or(0.3) }, id, params),
        "family2" => pdefined(PFunction::Family2 { a: params.a.unwrap_or(0.3) }, id, params),
        "family3" => pdefined(PFunction::Family3 { a: params.a.unwrap_or(0.75) }, id, params),
        "family4" => pdefined(
            PFunction::Family4 {
                alpha: params.alpha.unwrap_or(0.5),
                beta: params.beta.unwrap_or(1.0),
            },
            id,
            params,
        ),
        "quartic" => Family::Series { coeffs: quartic() },
        "series" => {
            let coeffs = params
                .coeffs
                .clone()
                .ok_or_else(|| Error::ParameterDomain("series needs coefficients".into()))?;
            Family::Series { coeffs }
        }
        other => return Err(Error::ParameterDomain(format!("unknown family {other:?}"))),
    };
    PotentialSpec::new(family)
}

fn pdefined(p: PFunction, id: &str, params: &FamilyParams) -> Family {
    Family::PDefined { def: PDefinition::new(p).labelled(id), g_max: params.g_max }
}

/// `x²/2 + x⁴/4`, the standard non-isochronous control.
pub fn quartic() -> TruncSeries {
    TruncSeries::new(vec![
        Rational::zero(),
        Rational::zero(),
        Rational::new(1.into(), 2.into()),
        Rational::zero(),
        Rational::new(1.into(), 4.into()),
    ])
}

/// Optional parameters for [`make_family`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub g_max: Option<f64>,
    pub coeffs: Option<TruncSeries>,
}

/// Catalog ids accepted by [`make_family`], with a one-line description.
pub const CATALOG: &[(&str, &str)] = &[
    ("harmonic", "G = x^2/2"),
    ("isotonic", "G = (1/8a^2)[ax + 1 - 1/(ax + 1)]^2, wall at x = -1/a; params alpha (default 1)"),
    ("chalykh-veselov", "isotonic potential in rational form x^2(ax+2)^2/(8(ax+1)^2); params alpha (default 1)"),
    ("three-param", "closed-form three-parameter family, 2a^2 < b; params a (0.1), b (1), c (1)"),
    ("family1", "x = ±sqrt(2G) + 2cG/(1+2G); param c (default 0.3)"),
    ("family2", "x = ±sqrt(2G) + 2aG/sqrt(1+2a^2 G); param a (default 0.3)"),
    ("family3", "x = ±sqrt(2G) + (a+2G)/sqrt(1+2G) - a; param a (default 0.75)"),
    ("family4", "x = ±sqrt(2G) + alpha - alpha(1+4b^2 G)/sqrt(1+2b^2 G); params alpha (0.5), beta (1)"),
    ("quartic", "G = x^2/2 + x^4/4 (not isochronous; negative control)"),
    ("series", "polynomial G from exact coefficients; param coeffs"),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(id: &str) -> PotentialSpec {
        make_family(id, &FamilyParams::default()).unwrap()
    }

    fn iso(alpha: f64) -> PotentialSpec {
        PotentialSpec::new(Family::Isotonic { alpha }).unwrap()
    }

    #[test]
    fn isotonic_value_and_force() {
        let p = iso(1.0);
        let j = p.jet(1.0, 2).unwrap();
        assert!((j.coeffs[0] - 9.0 / 32.0).abs() < 1e-15);
        assert!((j.coeffs[1] - 15.0 / 32.0).abs() < 1e-15);
        // g′ = (1/4)(1 + 3/y⁴) at y = 2
        assert!((j.coeffs[2] - 0.25 * (1.0 + 3.0 / 16.0)).abs() < 1e-14);
    }

    #[test]
    fn harmonic_jet() {
        let j = fam("harmonic").jet(3.0, 3).unwrap();
        assert_eq!(j.coeffs, vec![4.5, 3.0, 1.0, 0.0]);
        assert_eq!(fam("harmonic").force(2.0).unwrap(), 2.0);
    }

    #[test]
    fn pdefined_normalised_at_origin() {
        let p = make_family("family1", &FamilyParams { c: Some(1.0), ..Default::default() }).unwrap();
        let j = p.jet(0.0, 2).unwrap();
        assert!(j.coeffs[0].abs() < 1e-15 && j.coeffs[1].abs() < 1e-15);
        assert!((j.coeffs[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_param_boundary_is_rejected() {
        let r = PotentialSpec::new(Family::ThreeParam { a: 1.0, b: 1.0, c: 1.0 });
        assert!(matches!(r, Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn bad_normalisation_is_rejected() {
        let coeffs = TruncSeries::from_ints(&[0, 0, 1, 1]);
        assert!(matches!(
            PotentialSpec::new(Family::Series { coeffs }),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn outside_domain() {
        assert!(matches!(iso(1.0).value(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn chalykh_veselov_equals_isotonic() {
        let a = iso(1.3);
        let b = PotentialSpec::new(Family::ChalykhVeselov { alpha: 1.3 }).unwrap();
        for x in [-0.7, -0.2, 1e-3, 0.4, 2.5, 9.0] {
            let (ja, jb) = (a.jet(x, 4).unwrap(), b.jet(x, 4).unwrap());
            for k in 0..5 {
                let d = (ja.coeffs[k] - jb.coeffs[k]).abs();
                assert!(d <= 1e-12 * (1.0 + ja.coeffs[k].abs()), "x={x} k={k}: {d}");
            }
        }
    }

    #[test]
    fn involution_examples() {
        assert!((fam("harmonic").involution(1.7).unwrap() + 1.7).abs() < 1e-15);
        assert!((iso(1.0).involution(1.0).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_param_involution_matches_closed_form() {
        // A(x) = [2bx − b²cx² + 4ax(1 − √(1 + 2acx + bc²x²/2))... verified numerically
        let p = fam("three-param");
        let x = 0.5;
        let ax = p.involution(x).unwrap();
        let g = p.value(x).unwrap();
        assert!(ax < 0.0);
        assert!((p.value(ax).unwrap() - g).abs() <= 1e-14 * g);
        // on the decomposition: x − A = 2√(2G)
        assert!((x - ax - 2.0 * (2.0 * g).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn turning_points_examples() {
        let (a, b) = fam("harmonic").turning_points(2.0).unwrap();
        assert_eq!((a, b), (-2.0, 2.0));
        let (a, b) = iso(1.0).turning_points(9.0 / 32.0).unwrap();
        assert!((a + 0.5).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let (a, b) = fam("quartic").turning_points(0.75).unwrap();
        assert!((a + 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdefined_round_trip() {
        for id in ["family1", "family2", "family3", "family4"] {
            let p = fam(id);
            for g in [1e-6, 0.01, 0.5, 1.9] {
                for side in [Side::Left, Side::Right] {
                    let x = p.branch(g, side).unwrap();
                    let back = p.value(x).unwrap();
                    assert!((back - g).abs() <= 1e-12 * g, "{id} {side:?} G={g}: {back}");
                }
            }
        }
    }

    #[test]
    fn pdefined_zero_is_harmonic() {
        let p = PotentialSpec::new(Family::PDefined {
            def: PDefinition::new(PFunction::Zero),
            g_max: Some(10.0),
        })
        .unwrap();
        for x in [-3.0, -0.4, 0.25, 2.0] {
            assert!((p.value(x).unwrap() - 0.5 * x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_g_max_checks_monotonicity() {
        let r = make_family("family2", &FamilyParams { a: Some(0.5), g_max: Some(2.0), ..Default::default() });
        assert!(matches!(r, Err(Error::Monotonicity(_))));
    }

    #[test]
    fn series_jets_match_term_by_term() {
        let p = fam("quartic");
        let j = p.jet(0.7, 4).unwrap();
        let x: f64 = 0.7;
        let want = [0.5 * x * x + 0.25 * x.powi(4), x + x.powi(3), 1.0 + 3.0 * x * x, 6.0 * x, 6.0];
        for k in 0..5 {
            assert!((j.coeffs[k] - want[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn jet_order_cap() {
        assert!(matches!(fam("harmonic").jet(0.0, 7), Err(Error::ParameterDomain(_))));
        assert!(fam("harmonic").jet_uncapped(0.0, 7).is_ok());
    }

    #[test]
    fn json_exchange_format() {
        let p: PotentialSpec = serde_json::from_str(r#"{"family":"isotonic","alpha":1.0}"#).unwrap();
        assert_eq!(p, iso(1.0));
        let s = serde_json::to_string(&fam("family2")).unwrap();
        let back: PotentialSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, fam("family2"));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"family":"isotonic","alpha":1.0,"x":2}"#).is_err());
        let q: PotentialSpec =
            serde_json::from_str(r#"{"family":"series","coeffs":["0","0","1/2","0","1/4"]}"#).unwrap();
        assert_eq!(q, fam("quartic"));
    }

    #[test]
    fn scaling_keeps_family() {
        assert_eq!(fam("harmonic").scale(3.0).unwrap(), fam("harmonic"));
        assert_eq!(iso(1.0).scale(2.0).unwrap(), iso(2.0));
        let q2 = fam("quartic").scale(2.0).unwrap();
        // G(2x)/4 = x²/2 + x⁴
        assert!((q2.value(0.5).unwrap() - (0.125 + 0.0625)).abs() < 1e-15);
        let f = fam("family1").scale(-1.5).unwrap();
        let orig = fam("family1");
        for x in [-0.3, 0.2, 0.6] {
            let want = orig.value(-1.5 * x).unwrap() / 2.25;
            assert!((f.value(x).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn series_decomposition_requires_isochrony() {
        assert!(matches!(fam("quartic").decomposition(), Err(Error::DecompositionUnavailable(_))));
        let mut g = TruncSeries::zero(6);
        g.set_coeff(2, Rational::new(1.into(), 2.into()));
        let h = PotentialSpec::new(Family::Series { coeffs: g }).unwrap();
        let d = h.decomposition().unwrap();
        assert_eq!(d.value(0.7), 0.0);
    }
}
