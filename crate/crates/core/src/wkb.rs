//! The `√(2G)` decomposition algebra and the WKB corrections `I₀`, `I₂`, `I₄`.
//!
//! On an isochronous potential every derivative of `g`, and every product and
//! quotient of them, can be written on the orbit as `u(G)√(2G) + v(G)` with
//! `u`, `v` analytic, the sign of the square root selecting the branch. The
//! pair `(u, v)` is a [`SqrtPair`]; its components are jets in `G` about a
//! base level, so `G`-derivatives come for free.
//!
//! The corrections are computed two ways. The direct route differentiates the
//! orbit integrals `∫ g²/√(E − G) dx` and friends in `E` with a least-squares
//! stencil. The Abel route uses the decomposition and moves the
//! `E`-derivatives under the integral sign.

use crate::error::{Error, Result};
use crate::exec::{try_map, Exec};
use crate::jet::Taylor;
use crate::period::orbit_integral;
use crate::potential::{PDefinition, PotentialSpec, Side};
use crate::quad::TanhSinh;
use crate::roots::brent;
use crate::series::Rational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

/// Jet length used for decomposition coefficients (enough for `∂⁴(v·c)`).
pub const PAIR_LEN: usize = 8;

/// `u(G)√(2G) + v(G)` with `u`, `v` given as jets about `G₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtPair {
    pub g0: f64,
    pub u: Taylor,
    pub v: Taylor,
}

impl SqrtPair {
    pub fn new(g0: f64, u: Taylor, v: Taylor) -> Self {
        SqrtPair { g0, u, v }
    }

    /// Constant components.
    pub fn constant(g0: f64, u: f64, v: f64, len: usize) -> Self {
        SqrtPair { g0, u: Taylor::constant(u, len), v: Taylor::constant(v, len) }
    }

    pub fn len(&self) -> usize {
        self.u.len().min(self.v.len())
    }

    /// `2G` as a jet about `G₀`.
    fn two_g(&self) -> Taylor {
        Taylor::var(self.g0, self.len()) * 2.0
    }

    /// The function value on `side` at `G₀`.
    pub fn value(&self, side: Side) -> f64 {
        side.sign() * self.u.value() * (2.0 * self.g0).sqrt() + self.v.value()
    }

    pub fn add(&self, o: &SqrtPair) -> SqrtPair {
        SqrtPair::new(self.g0, self.u + o.u, self.v + o.v)
    }

    pub fn mul(&self, o: &SqrtPair) -> SqrtPair {
        let tg = self.two_g().truncate(self.len().min(o.len()));
        SqrtPair::new(self.g0, self.u * o.v + o.u * self.v, tg * self.u * o.u + self.v * o.v)
    }

    /// Division by rationalisation: multiply through by `u_q√(2G) − v_q`.
    pub fn div(&self, o: &SqrtPair) -> Result<SqrtPair> {
        let tg = self.two_g().truncate(self.len().min(o.len()));
        let den = tg * o.u * o.u - o.v * o.v;
        let scale = (tg.value() * o.u.value() * o.u.value()).abs() + o.v.value() * o.v.value();
        if !(den.value().abs() > 1e-14 * scale) {
            return Err(Error::SingularDenominator(format!(
                "2G u^2 - v^2 = {:e} at G = {}",
                den.value(),
                self.g0
            )));
        }
        let u = self.v * o.u - self.u * o.v;
        let v = tg * self.u * o.u - self.v * o.v;
        Ok(SqrtPair::new(self.g0, u / den, v / den))
    }

    /// `d/dx` along the orbit, given the base pair of `g`.
    pub fn derivative(&self, base: &BasePair) -> SqrtPair {
        let (a1, b1, r) = (base.g.u, base.g.v, base.ratio);
        let (du, dv) = (self.u.differentiate(), self.v.differentiate());
        let n = du.len().min(dv.len()).min(a1.len());
        let u = self.u.truncate(n);
        let tg = Taylor::var(self.g0, n) * 2.0;
        SqrtPair::new(
            self.g0,
            du * b1 + u * r + dv * a1,
            tg * a1 * du + a1 * u + b1 * dv,
        )
    }
}

/// The pair of `g` together with the regular ratio `b₁/(2G)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePair {
    pub g: SqrtPair,
    /// `b₁/(2G) = P′/(2GP′² − 1)`.
    pub ratio: Taylor,
    /// `P′` as a jet.
    pub slope: Taylor,
}

/// `a₁ = −1/(2GP′² − 1)`, `b₁ = 2GP′/(2GP′² − 1)`.
pub fn base_pair(def: &PDefinition, g0: f64, len: usize) -> Result<BasePair> {
    let slope = def.taylor(g0, len + 1).differentiate();
    let tg = Taylor::var(g0, len) * 2.0;
    let d = tg * slope * slope - 1.0;
    if !(d.value().abs() > 1e-12) {
        return Err(Error::SingularDenominator(format!("2GP'^2 - 1 = {:e} at G = {g0}", d.value())));
    }
    let a1 = -d.recip();
    let ratio = slope / d;
    let b1 = tg * ratio;
    Ok(BasePair { g: SqrtPair::new(g0, a1, b1), ratio, slope })
}

/// Pairs of `g, g′, …, g^(n−1)`, i.e. `(a₁, b₁) … (aₙ, bₙ)`.
pub fn derivative_pairs(def: &PDefinition, g0: f64, n: usize) -> Result<Vec<SqrtPair>> {
    let base = base_pair(def, g0, (n + PAIR_LEN).min(crate::jet::CAP - 1))?;
    let mut out = vec![base.g];
    for _ in 1..n {
        let next = out.last().unwrap().derivative(&base);
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairOp {
    Add,
    Mul,
    Div,
}

pub fn pair_algebra(op: PairOp, p: &SqrtPair, q: &SqrtPair) -> Result<SqrtPair> {
    match op {
        PairOp::Add => Ok(p.add(q)),
        PairOp::Mul => Ok(p.mul(q)),
        PairOp::Div => p.div(q),
    }
}

/// Orbit functions used by the correction integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitFunction {
    /// `g`.
    Force,
    /// `g·g′`.
    ForceSlope,
    /// `g′²/g`.
    SlopeSquaredOverForce,
}

impl OrbitFunction {
    pub const ALL: [OrbitFunction; 3] =
        [OrbitFunction::Force, OrbitFunction::ForceSlope, OrbitFunction::SlopeSquaredOverForce];

    /// Pointwise value from the potential's own jets.
    pub fn pointwise(self, p: &PotentialSpec, x: f64) -> Result<f64> {
        let t = p.taylor(x, 3)?;
        let (g, dg) = (t.coeff(1), 2.0 * t.coeff(2));
        Ok(match self {
            OrbitFunction::Force => g,
            OrbitFunction::ForceSlope => g * dg,
            OrbitFunction::SlopeSquaredOverForce => dg * dg / g,
        })
    }

    /// The decomposition at level `g0`.
    pub fn pair(self, def: &PDefinition, g0: f64) -> Result<SqrtPair> {
        let d = derivative_pairs(def, g0, 2)?;
        match self {
            OrbitFunction::Force => Ok(d[0]),
            OrbitFunction::ForceSlope => Ok(d[0].mul(&d[1])),
            OrbitFunction::SlopeSquaredOverForce => d[1].mul(&d[1]).div(&d[0]),
        }
    }
}

/// Published closed forms of `a₂` and `b₂` in terms of `P′`, `P″`.
pub fn printed_a2_b2(def: &PDefinition, g: f64) -> (f64, f64) {
    let t = def.taylor(g, 3);
    let (p1, p2) = (t.coeff(1), 2.0 * t.coeff(2));
    let d3 = (2.0 * g * p1 * p1 - 1.0).powi(3);
    let a2 = (2.0 * g * p1.powi(3) + 12.0 * g * g * p2 * p1 * p1 + 3.0 * p1 + 2.0 * g * p2) / d3;
    let b2 = -(6.0 * g * p1 * p1 + 12.0 * g * g * p2 * p1 + 1.0 + 8.0 * g.powi(3) * p2 * p1.powi(3)) / d3;
    (a2, b2)
}

/// The appendix expressions for `(c₁,₂, d₁,₂)` of `g·g′`, transcribed as
/// printed with `φ = 2GP′` and `f = P′ + 2GP″`.
pub fn printed_c12_d12(def: &PDefinition, g: f64) -> (f64, f64) {
    let t = def.taylor(g, 3);
    let (p1, p2) = (t.coeff(1), 2.0 * t.coeff(2));
    let phi = 2.0 * g * p1;
    let f = p1 + 2.0 * g * p2;
    let s = SQRT_2 * g.sqrt();
    let den = (s - phi).powi(4) * (s + phi).powi(4);
    let diff = 8.0 * g.powf(2.5) * SQRT_2
        * (-4.0 * g * g - 4.0 * g * phi * phi + 3.0 * phi.powi(4)
            - 16.0 * g * g * f * phi
            - 8.0 * phi.powi(3) * g * f)
        / den;
    let sum = 8.0 * g * g
        * (-12.0 * g * g * phi + 4.0 * g * phi.powi(3) + phi.powi(5) - 8.0 * g.powi(3) * f
            - 24.0 * g * g * f * phi * phi
            - 2.0 * g * f * phi.powi(4))
        / den;
    (diff / (2.0 * (2.0 * g).sqrt()), sum / 2.0)
}

/// The appendix expressions for `(a₁,₂, b₁,₂)` of `g′²/g`, transcribed as
/// printed. The sum formula is read as `2b₁,₂ = 64G⁵(…)/D⁵` with
/// `D = (√(2G) − 2GP′)(√(2G) + 2GP′)`.
pub fn printed_a12_b12(def: &PDefinition, g: f64) -> (f64, f64) {
    let t = def.taylor(g, 3);
    let (p1, p2) = (t.coeff(1), 2.0 * t.coeff(2));
    let s = SQRT_2 * g.sqrt();
    let phi = 2.0 * g * p1;
    let d = (s - phi) * (s + phi);
    let diff = -128.0 * g.powf(4.5) * SQRT_2
        * (-p1 - 2.0 * g * p1.powi(3) + g * p2 + 12.0 * g * g * p1 * p1 * p2
            + 4.0 * g.powi(3) * p2 * p1.powi(4)
            - 8.0 * g.powi(3) * p1 * p2 * p2
            - 16.0 * g.powi(4) * p2 * p2 * p1.powi(3))
        / d.powi(4);
    let sum = 64.0 * g.powi(5)
        * (-4.0 * g * p2 + 4.0 * g * g * p1.powi(5) + 20.0 * g * p2.powi(3) + 5.0 * p1
            - 80.0 * g * g * p2 * p1 * p1
            - 80.0 * g.powi(3) * p1.powi(4) * p2
            + 160.0 * g.powi(4) * p1.powi(3) * p2 * p2
            + 40.0 * g.powi(3) * p2 * p2 * p1
            + 32.0 * g.powi(4) * p2 * p2 * p1.powi(5))
        / d.powi(5);
    (diff / (2.0 * (2.0 * g).sqrt()), sum / 2.0)
}

fn tight_rule() -> TanhSinh {
    TanhSinh { rel_tol: 1e-14, max_level: 12, ..TanhSinh::default() }
}

fn collect<T>(failure: Option<Error>, r: Result<T>) -> Result<T> {
    match failure {
        Some(e) => Err(e),
        None => r,
    }
}

/// `∫_a^b φ·g/√(E − G) dx`, evaluated on both branches from pointwise values.
pub fn two_sided_integral(p: &PotentialSpec, f: OrbitFunction, e: f64) -> Result<f64> {
    let mut failure = None;
    let r = orbit_integral(p, e, tight_rule(), |side, x, _, _, dhi| match f.pointwise(p, x) {
        Ok(v) => side.sign() * v / dhi.sqrt(),
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    });
    collect(failure, r)
}

/// `∫₀ᴱ 2u(v)√(2v)/√(E − v) dv` for a pair-valued `φ`; the `v` part cancels
/// over the full orbit.
pub fn half_orbit_integral<F>(e: f64, mut phi: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<SqrtPair>,
{
    let mut failure = None;
    let q = tight_rule().integrate(0.0, e, |_, v, dhi| match phi(v) {
        Ok(pair) => 2.0 * pair.u.value() * (2.0 * v).sqrt() / dhi.sqrt(),
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    });
    collect(failure, q.map(|q| q.value))
}

/// Both sides of the half-orbit reduction for one orbit function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfOrbitCheck {
    pub energy: f64,
    pub two_sided: f64,
    pub abel: f64,
}

pub fn half_orbit_check(p: &PotentialSpec, f: OrbitFunction, e: f64) -> Result<HalfOrbitCheck> {
    let def = p.decomposition()?;
    Ok(HalfOrbitCheck {
        energy: e,
        two_sided: two_sided_integral(p, f, e)?,
        abel: half_orbit_integral(e, |v| f.pair(&def, v))?,
    })
}

/// `I₀(E) = (1/π) ∫_a^b √(2(E − G)) dx`.
pub fn action_i0(p: &PotentialSpec, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
    }
    let v = orbit_integral(p, e, tight_rule(), |side, _, ginv, _, dhi| {
        side.sign() * ginv * (2.0 * dhi).sqrt()
    })?;
    Ok(v / PI)
}

/// How an `E`-derivative of an orbit integral is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Least-squares differentiation of the orbit integrals in `E`.
    #[default]
    Direct,
    /// Abel integrals of the decomposition coefficients.
    Abel,
}

/// Stencil half-width and polynomial degree of the direct route.
const STENCIL: i64 = 4;
const FIT_DEGREE: usize = 6;
/// Stencil step relative to `E`.
pub const STENCIL_STEP: f64 = 1e-2;

/// Least-squares weights: row `m` maps the 9 samples `K(E + jh)` to the
/// coefficient of `jᵐ` in the degree-6 fit. Solved once in exact arithmetic.
fn fit_weights() -> &'static [[f64; 9]; FIT_DEGREE + 1] {
    static W: OnceLock<[[f64; 9]; FIT_DEGREE + 1]> = OnceLock::new();
    W.get_or_init(|| {
        let n = FIT_DEGREE + 1;
        let js: Vec<i64> = (-STENCIL..=STENCIL).collect();
        let pw = |j: i64, k: usize| Rational::from_integer(j.pow(k as u32).into());
        // augmented [VᵀV | Vᵀ]
        let mut m: Vec<Vec<Rational>> = (0..n)
            .map(|r| {
                let mut row: Vec<Rational> =
                    (0..n).map(|c| js.iter().map(|&j| pw(j, r + c)).sum()).collect();
                row.extend(js.iter().map(|&j| pw(j, r)));
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("normal matrix is regular");
            m.swap(col, piv);
            let inv = Rational::one() / m[col][col].clone();
            for v in m[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    let pivot_row = m[col].clone();
                    for (v, pv) in m[r].iter_mut().zip(pivot_row.iter()) {
                        *v -= &f * pv;
                    }
                }
            }
        }
        let mut w = [[0.0; 9]; FIT_DEGREE + 1];
        for (r, row) in w.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = crate::series::rational_to_f64(&m[r][n + c]);
            }
        }
        w
    })
}

/// `dᵐK/dEᵐ` at `E` from the degree-6 least-squares fit on `E + jh`,
/// `j = −4…4`, `h = 0.01E`.
pub fn stencil_derivative<F>(mut k: F, e: f64, order: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(order <= FIT_DEGREE);
    let h = STENCIL_STEP * e;
    let w = &fit_weights()[order];
    let mut acc = 0.0;
    for (i, j) in (-STENCIL..=STENCIL).enumerate() {
        acc += w[i] * k(e + j as f64 * h)?;
    }
    let fact: f64 = (1..=order).map(|i| i as f64).product();
    Ok(acc * fact / h.powi(order as i32))
}

/// The orbit integrals differentiated by the direct route, in `G`:
/// `K₀ = ∫ g²/√(E − G) dx`, `K₁ = ∫ g′²/√ dx`, `K₂ = ∫ g²g′/√ dx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitKernel {
    K0,
    K1,
    K2,
}

pub fn orbit_kernel(p: &PotentialSpec, k: OrbitKernel, e: f64) -> Result<f64> {
    let mut failure = None;
    let r = orbit_integral(p, e, tight_rule(), |side, x, ginv, _, dhi| {
        // g² dx = |g| dG on each branch
        let abs_g = side.sign() / ginv;
        let w = match k {
            OrbitKernel::K0 => abs_g,
            _ => match p.taylor(x, 3) {
                Ok(t) => {
                    let dg = 2.0 * t.coeff(2);
                    if k == OrbitKernel::K1 {
                        dg * dg / abs_g
                    } else {
                        abs_g * dg
                    }
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    return f64::NAN;
                }
            },
        };
        w / dhi.sqrt()
    });
    collect(failure, r)
}

fn check_energy(p: &PotentialSpec, e: f64, route: Route) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
    }
    if route == Route::Direct && e * (1.0 + STENCIL as f64 * STENCIL_STEP) >= p.max_energy() {
        return Err(Error::Domain(format!(
            "stencil around E = {e} leaves the well (max energy {})",
            p.max_energy()
        )));
    }
    Ok(())
}

/// `v^{n−1/2}·F(v)/√(E − v)` integrated over `[0, E]`.
fn abel_moment<F>(e: f64, n: i32, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let q = tight_rule().integrate(0.0, e, |_, v, dhi| match f(v) {
        Ok(val) => v.powi(n) / v.sqrt() * val / dhi.sqrt(),
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    });
    collect(failure, q.map(|q| q.value))
}

/// `I₂(E)`.
///
/// Direct: `−ħ²/(24√2π)·∂²K₀/∂E²`. Abel: `−(ħ²/12π)E⁻²∫₀ᴱ v^{3/2}(v·a₁)″/√(E − v) dv`.
pub fn correction_i2(p: &PotentialSpec, e: f64, route: Route, hbar: f64) -> Result<f64> {
    check_energy(p, e, route)?;
    let h2 = hbar * hbar;
    match route {
        Route::Direct => {
            let d2 = stencil_derivative(|x| orbit_kernel(p, OrbitKernel::K0, x), e, 2)?;
            Ok(-h2 / (24.0 * SQRT_2 * PI) * d2)
        }
        Route::Abel => {
            let def = p.decomposition()?;
            let m = abel_moment(e, 2, |v| {
                let b = base_pair(&def, v, 4)?;
                let va = Taylor::var(v, 4) * b.g.u;
                Ok(va.derivative_at(2))
            })?;
            Ok(-h2 / (12.0 * PI) * m / (e * e))
        }
    }
}

/// `I₄(E)`.
///
/// Direct: `+ħ⁴/(4√2π)·[∂³K₁/120 − ∂⁴K₂/288]`. Abel:
/// `+(ħ⁴/4π)[E⁻³/120·∫v^{5/2}W‴/√ − E⁻⁴/144·∫v^{7/2}(v·c)⁗/√]` with
/// `W = 2G·P′·(2a₂b₂) + 2Ga₂² + b₂²` (twice `v` times the `√(2G)` part of
/// `g′²/g`) and `c = a₁b₂ + a₂b₁` (the `√(2G)` part of `gg′`).
pub fn correction_i4(p: &PotentialSpec, e: f64, route: Route, hbar: f64) -> Result<f64> {
    check_energy(p, e, route)?;
    let h4 = hbar.powi(4);
    match route {
        Route::Direct => {
            let d3 = stencil_derivative(|x| orbit_kernel(p, OrbitKernel::K1, x), e, 3)?;
            let d4 = stencil_derivative(|x| orbit_kernel(p, OrbitKernel::K2, x), e, 4)?;
            Ok(h4 / (4.0 * SQRT_2 * PI) * (d3 / 120.0 - d4 / 288.0))
        }
        Route::Abel => {
            let def = p.decomposition()?;
            let w = abel_moment(e, 3, |v| Ok(i4_kernels(&def, v)?.0))?;
            let c = abel_moment(e, 4, |v| Ok(i4_kernels(&def, v)?.1))?;
            Ok(h4 / (4.0 * PI) * (w / (120.0 * e.powi(3)) - c / (144.0 * e.powi(4))))
        }
    }
}

/// `(W‴(v), (v·c)⁗(v))` for the Abel form of `I₄`.
fn i4_kernels(def: &PDefinition, v: f64) -> Result<(f64, f64)> {
    let d = derivative_pairs(def, v, 2)?;
    let (g, dg) = (d[0], d[1]);
    let base = base_pair(def, v, PAIR_LEN)?;
    let n = dg.len();
    let tg = Taylor::var(v, n) * 2.0;
    let (a2, b2) = (dg.u, dg.v);
    let w = tg * base.slope.truncate(n) * (a2 * b2 * 2.0) + tg * a2 * a2 + b2 * b2;
    let c = g.u.truncate(n) * b2 + a2 * g.v.truncate(n);
    let vc = Taylor::var(v, n) * c;
    Ok((w.derivative_at(3), vc.derivative_at(4)))
}

/// Quantisation sum `I₀ + I₂ + I₄` truncated at `order`.
pub fn quantisation_sum(p: &PotentialSpec, e: f64, order: u8, route: Route, hbar: f64) -> Result<f64> {
    let mut n = action_i0(p, e)?;
    if order >= 2 {
        n += correction_i2(p, e, route, hbar)?;
    }
    if order >= 4 {
        n += correction_i4(p, e, route, hbar)?;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level {
    pub n: usize,
    #[serde(rename = "E")]
    pub energy: f64,
}

/// Gap statistics of a level list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapStats {
    pub mean_gap: f64,
    /// `max |gap − ħ|`.
    pub max_deviation: f64,
    pub increasing: bool,
    /// Whether `|gap − ħ|` grows with `n`.
    pub deviation_grows: bool,
}

impl GapStats {
    pub fn from_levels(energies: &[f64], hbar: f64) -> GapStats {
        let gaps: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
        let dev: Vec<f64> = gaps.iter().map(|g| (g - hbar).abs()).collect();
        GapStats {
            mean_gap: if gaps.is_empty() { f64::NAN } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
            max_deviation: dev.iter().copied().fold(0.0, f64::max),
            increasing: gaps.iter().all(|g| *g > 0.0),
            deviation_grows: dev.windows(2).all(|w| w[1] >= w[0]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub hbar: f64,
    pub order: u8,
    pub route: Route,
    pub levels: Vec<Level>,
    pub gaps: GapStats,
}

/// Solve `I₀ + I₂ + … = (n + ½)ħ` for `n = 0…n_max`.
pub fn wkb_spectrum(
    p: &PotentialSpec,
    hbar: f64,
    order: u8,
    n_max: usize,
    route: Route,
    exec: Exec,
) -> Result<SpectrumReport> {
    if ![0, 2, 4].contains(&order) {
        return Err(Error::ParameterDomain(format!("order {order} not in {{0, 2, 4}}")));
    }
    if !(hbar > 0.0) {
        return Err(Error::ParameterDomain(format!("hbar {hbar} must be positive")));
    }
    let e_cap = p.max_energy() / (1.0 + (STENCIL + 1) as f64 * STENCIL_STEP);
    let ns: Vec<usize> = (0..=n_max).collect();
    let energies = try_map(exec, &ns, |&n| {
        let target = (n as f64 + 0.5) * hbar;
        let f = |e: f64| quantisation_sum(p, e, order, route, hbar).map(|s| s - target);
        solve_level(f, target, e_cap)
    })?;
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Monotonicity("WKB levels not increasing in n".into()));
    }
    let gaps = GapStats::from_levels(&energies, hbar);
    let levels = energies.into_iter().enumerate().map(|(n, energy)| Level { n, energy }).collect();
    Ok(SpectrumReport { hbar, order, route, levels, gaps })
}

/// Bracket a root of `f` (increasing in `E`) near `guess`, then Brent.
fn solve_level<F>(mut f: F, guess: f64, e_cap: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut hi = guess.min(0.5 * e_cap).max(1e-6);
    let mut f_hi = f(hi)?;
    let mut lo = hi;
    let mut f_lo = f_hi;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        if hi >= e_cap {
            return Err(Error::Bracket(format!(
                "level {guess} not reached below E = {e_cap}"
            )));
        }
        hi = (hi * 1.5).min(e_cap);
        let next = f(hi)?;
        if next <= f_lo {
            return Err(Error::Monotonicity(format!("quantisation sum not increasing near E = {hi}")));
        }
        f_hi = next;
    }
    let mut guard = 0;
    while f_lo > 0.0 {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        let next = f(lo)?;
        if next >= f_hi {
            return Err(Error::Monotonicity(format!("quantisation sum not increasing near E = {lo}")));
        }
        f_lo = next;
        guard += 1;
        if guard > 60 {
            return Err(Error::Bracket(format!("level {guess} has no lower bracket")));
        }
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut failure = None;
    let r = brent(
        |e| match f(e) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12,
    );
    collect(failure, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_family, Family, FamilyParams, PFunction};

    fn fam(id: &str) -> PotentialSpec {
        make_family(id, &FamilyParams::default()).unwrap()
    }

    fn iso() -> PotentialSpec {
        PotentialSpec::new(Family::Isotonic { alpha: 1.0 }).unwrap()
    }

    #[test]
    fn harmonic_base_pair() {
        let b = base_pair(&PDefinition::new(PFunction::Zero), 0.7, 4).unwrap();
        assert_eq!((b.g.u.value(), b.g.v.value()), (1.0, 0.0));
        let d = derivative_pairs(&PDefinition::new(PFunction::Zero), 0.7, 2).unwrap();
        assert!(d[1].u.value().abs() < 1e-15 && (d[1].v.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn base_identity() {
        let def = PDefinition::new(PFunction::Family2 { a: 0.5 });
        let b = base_pair(&def, 0.3, 3).unwrap();
        let (a1, b1) = (b.g.u.value(), b.g.v.value());
        assert!((b1 * b1 - 0.6 * (a1 * a1 - a1)).abs() < 1e-12);
        let b = base_pair(&PDefinition::new(PFunction::Family1 { c: 0.3 }), 0.0, 3).unwrap();
        assert_eq!((b.g.u.value(), b.g.v.value()), (1.0, 0.0));
    }

    #[test]
    fn printed_second_pair_matches_recursion() {
        let def = PDefinition::new(PFunction::Family2 { a: 0.5 });
        let d = derivative_pairs(&def, 0.2, 2).unwrap();
        let (a2, b2) = printed_a2_b2(&def, 0.2);
        assert!((d[1].u.value() - a2).abs() < 1e-12);
        assert!((d[1].v.value() - b2).abs() < 1e-12);
    }

    #[test]
    fn square_root_squared() {
        let x = SqrtPair::constant(0.5, 1.0, 0.0, 3);
        let y = x.mul(&x);
        assert_eq!((y.u.value(), y.v.value()), (0.0, 1.0));
    }

    #[test]
    fn division_inverts_product() {
        let p = SqrtPair::new(0.3, Taylor::from_coeffs(&[0.7, 0.1, -0.2]), Taylor::from_coeffs(&[1.3, 0.4, 0.5]));
        let q = SqrtPair::new(0.3, Taylor::from_coeffs(&[-0.2, 0.3, 0.1]), Taylor::from_coeffs(&[2.0, -1.0, 0.2]));
        let r = p.mul(&q).div(&q).unwrap();
        for k in 0..3 {
            assert!((r.u.coeff(k) - p.u.coeff(k)).abs() < 1e-13);
            assert!((r.v.coeff(k) - p.v.coeff(k)).abs() < 1e-13);
        }
        let zero = SqrtPair::constant(0.3, 0.0, 0.0, 3);
        assert!(matches!(p.div(&zero), Err(Error::SingularDenominator(_))));
    }

    #[test]
    fn fit_weights_differentiate_polynomials() {
        // exact for degree ≤ 6
        let k = |e: f64| Ok(e.powi(6) - 2.0 * e.powi(3));
        let d4 = stencil_derivative(k, 1.3, 4).unwrap();
        assert!((d4 - 360.0 * 1.3f64.powi(2)).abs() < 1e-6 * 360.0);
        let d2 = stencil_derivative(k, 1.3, 2).unwrap();
        assert!((d2 - (30.0 * 1.3f64.powi(4) - 12.0 * 1.3)).abs() < 1e-8);
    }

    #[test]
    fn harmonic_action_and_corrections() {
        let p = fam("harmonic");
        assert!((action_i0(&p, 1.7).unwrap() - 1.7).abs() < 1e-13);
        assert!(correction_i2(&p, 1.0, Route::Direct, 1.0).unwrap().abs() < 1e-9);
        assert!(correction_i2(&p, 1.0, Route::Abel, 1.0).unwrap().abs() < 1e-12);
        assert!(correction_i4(&p, 1.0, Route::Direct, 1.0).unwrap().abs() < 1e-8);
        assert!(correction_i4(&p, 1.0, Route::Abel, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn isotonic_corrections_are_constant() {
        let p = iso();
        for e in [0.1, 0.7, 2.0] {
            for route in [Route::Direct, Route::Abel] {
                let i2 = correction_i2(&p, e, route, 1.0).unwrap();
                let i4 = correction_i4(&p, e, route, 1.0).unwrap();
                assert!((i2 + 0.125).abs() < 1e-6, "{route:?} E={e} I2={i2}");
                assert!((i4 - 1.0 / 32.0).abs() < 1e-5, "{route:?} E={e} I4={i4}");
            }
        }
    }

    #[test]
    fn half_orbit_reduction() {
        for id in ["harmonic", "family2", "three-param"] {
            let p = fam(id);
            for f in OrbitFunction::ALL {
                let c = half_orbit_check(&p, f, 0.5).unwrap();
                assert!((c.two_sided - c.abel).abs() < 1e-8, "{id} {f:?}: {c:?}");
            }
        }
        let v = half_orbit_integral(1.0, |g| Ok(SqrtPair::constant(g, 0.0, g.exp(), 2))).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn harmonic_order0_spectrum() {
        let r = wkb_spectrum(&fam("harmonic"), 1.0, 0, 4, Route::Direct, Exec::Sequential).unwrap();
        for l in &r.levels {
            assert!((l.energy - (l.n as f64 + 0.5)).abs() < 1e-9);
        }
    }
}
