//! Period function, its energy derivative, the isochronicity certificates and
//! an ODE-integration oracle for the period.
//!
//! Orbit integrals are taken in the energy variable: on each branch
//! `dx = dG/g`, so `T(E) = 2∫₀ᴱ [1/g(x₊) + 1/|g(x₋)|] dG/√(2(E − G))`. The
//! `1/√G` behaviour at the bottom and `1/√(E − G)` at the top are both
//! endpoint singularities of the tanh-sinh rule.

use crate::error::{Error, Result};
use crate::exec::{try_map, Exec};
use crate::potential::{PotentialSpec, Side};
use crate::quad::TanhSinh;
use crate::roots::brent;
use crate::series::{urabe_h, TruncSeries};
use crate::TWO_PI;
use rkf78::{OdeSystem, Rkf78, Tolerances};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this energy the period is taken from its small-amplitude expansion.
pub const SMALL_ENERGY: f64 = 1e-8;

/// Default certificate tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

/// An orbit at energy `E` with turning points `a < 0 < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitData {
    pub energy: f64,
    pub a: f64,
    pub b: f64,
}

/// Turning points, with the residual check `|G − E| ≤ 1e−12·max(1, E)`.
pub fn turning_points(p: &PotentialSpec, e: f64) -> Result<OrbitData> {
    let (a, b) = p.turning_points(e)?;
    let tol = 1e-12 * e.max(1.0);
    for x in [a, b] {
        let r = (p.value(x)? - e).abs();
        if r > tol {
            return Err(Error::Tolerance(format!("|G({x}) - E| = {r:e} at E = {e}")));
        }
    }
    Ok(OrbitData { energy: e, a, b })
}

fn rule() -> TanhSinh {
    TanhSinh::default().with_rel_tol(1e-12)
}

/// `∫₀ᴱ f(side, x, 1/g, G, E − G) dG` summed over both branches.
pub(crate) fn orbit_integral<F>(p: &PotentialSpec, e: f64, rule: TanhSinh, mut f: F) -> Result<f64>
where
    F: FnMut(Side, f64, f64, f64, f64) -> f64,
{
    let mut failure = None;
    let q = rule.integrate(0.0, e, |_, dlo, dhi| {
        let mut sum = 0.0;
        for side in [Side::Right, Side::Left] {
            match p.branch_point(dlo, side) {
                Ok((x, ginv)) => sum += f(side, x, ginv, dlo, dhi),
                Err(err) => {
                    failure.get_or_insert(err);
                    return f64::NAN;
                }
            }
        }
        sum
    });
    match (q, failure) {
        (_, Some(err)) => Err(err),
        (Ok(q), None) => Ok(q.value),
        (Err(err), None) => Err(err),
    }
}

/// Small-amplitude coefficients `(a₂, a₃)` of `g = x + a₂x² + a₃x³ + …`.
fn center_coefficients(p: &PotentialSpec) -> Result<(f64, f64)> {
    let t = p.taylor(0.0, 5)?;
    Ok((3.0 * t.coeff(3), 4.0 * t.coeff(4)))
}

/// `T(E)` to first order in `E`.
fn small_energy_period(p: &PotentialSpec, e: f64) -> Result<f64> {
    let (a2, a3) = center_coefficients(p)?;
    Ok(TWO_PI * (1.0 + (5.0 * a2 * a2 / 6.0 - 0.75 * a3) * e))
}

/// The period `T(E)`.
pub fn period(p: &PotentialSpec, e: f64) -> Result<f64> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
    }
    if e < SMALL_ENERGY {
        return small_energy_period(p, e);
    }
    let half = orbit_integral(p, e, rule(), |side, _, ginv, _, dhi| {
        side.sign() * ginv / (2.0 * dhi).sqrt()
    })?;
    Ok(2.0 * half)
}

/// `φ = d/dx[G/g²] = (g² − 2Gg′)/g³`, from a local expansion near 0.
pub fn phi(p: &PotentialSpec, x: f64) -> Result<f64> {
    if x.abs() < 1e-4 {
        // G/g² = (G/t²)/(g/t)² is regular at the origin
        let t = p.taylor(0.0, 9)?;
        let g = t.differentiate().shift_down(1);
        let q = t.shift_down(2).truncate(g.len()) / (g * g);
        return Ok(q.differentiate().eval(x));
    }
    let t = p.taylor(x, 3)?;
    let g = t.differentiate();
    let q = t.truncate(2) / (g * g);
    Ok(q.coeff(1))
}

/// `T′(E) = (1/E) ∫₀ᴱ [φ(x₊) − φ(x₋)] dG/√(2(E − G))`.
pub fn period_derivative(p: &PotentialSpec, e: f64) -> Result<f64> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
    }
    if e < SMALL_ENERGY {
        let (a2, a3) = center_coefficients(p)?;
        return Ok(TWO_PI * (5.0 * a2 * a2 / 6.0 - 0.75 * a3));
    }
    // the branches cancel exactly for isochronous potentials, so the
    // tolerance is set by the size of a single branch
    let scale = (2.0 * e).sqrt() * (1.0 + phi(p, 0.0)?.abs() + phi(p, p.branch(e, Side::Right)?)?.abs());
    let rule = TanhSinh { abs_tol: 1e-13 * scale, ..rule() };
    let mut failure = None;
    let v = orbit_integral(p, e, rule, |side, x, _, _, dhi| match phi(p, x) {
        Ok(f) => side.sign() * f / (2.0 * dhi).sqrt(),
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(v? / e)
}

/// `b − a = (1/π) ∫₀ᴱ T(γ) dγ/√(2(E − γ))` for a prescribed period function.
pub fn width_from_period<F: FnMut(f64) -> f64>(mut t: F, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::ParameterDomain(format!("energy {e} must be positive")));
    }
    let q = rule().integrate(0.0, e, |_, dlo, dhi| t(dlo) / (2.0 * dhi).sqrt())?;
    Ok(q.value / PI)
}

/// [`width_from_period`] fed with the computed `T` of `p`.
pub fn width_from_sampled_period(p: &PotentialSpec, e: f64) -> Result<f64> {
    let mut failure = None;
    let w = width_from_period(
        |g| match period(p, g) {
            Ok(t) => t,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        e,
    );
    match failure {
        Some(err) => Err(err),
        None => w,
    }
}

/// `n` logarithmically spaced energies on `[lo, hi]`.
pub fn energy_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let r = (hi / lo).ln() / (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i == n - 1 => hi,
                    _ => lo * (r * i as f64).exp(),
                })
                .collect()
        }
    }
}

/// The default certificate grid: 16 energies in `[0.05, 2]`.
pub fn default_energy_grid() -> Vec<f64> {
    energy_grid(0.05, 2.0, 16)
}

/// One row of a period table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodRow {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "T_prime")]
    pub derivative: f64,
}

pub fn period_table(p: &PotentialSpec, energies: &[f64], exec: Exec) -> Result<Vec<PeriodRow>> {
    try_map(exec, energies, |&e| {
        Ok(PeriodRow { energy: e, period: period(p, e)?, derivative: period_derivative(p, e)? })
    })
}

/// The five isochronicity tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// (i) `φ = d/dx[G/g²]` takes equal values at `x` and `A(x)`.
    PhiInvariance,
    /// (ii) `x − 2G/g` takes equal values at `x` and `A(x)`.
    FInvariance,
    /// (iii) `x − A(x) = 2√(2G)`.
    Landau,
    /// (iv) `G/g² = 2/(1 − A′)²`.
    InvolutionDerivative,
    /// (v) `h(X) = X/g − 1` is odd in `X = ±√(2G)`.
    Urabe,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::PhiInvariance,
        Criterion::FInvariance,
        Criterion::Landau,
        Criterion::InvolutionDerivative,
        Criterion::Urabe,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Criterion::PhiInvariance => "phi-invariance",
            Criterion::FInvariance => "f-invariance",
            Criterion::Landau => "landau",
            Criterion::InvolutionDerivative => "involution-derivative",
            Criterion::Urabe => "urabe",
        }
    }

    pub fn numeral(self) -> &'static str {
        match self {
            Criterion::PhiInvariance => "i",
            Criterion::FInvariance => "ii",
            Criterion::Landau => "iii",
            Criterion::InvolutionDerivative => "iv",
            Criterion::Urabe => "v",
        }
    }

    /// Accepts the id or the roman numeral.
    pub fn parse(s: &str) -> Result<Criterion> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.id() == s || c.numeral() == s)
            .ok_or_else(|| Error::ParameterDomain(format!("unknown criterion {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Isochronous,
    NotIsochronous,
    Inconclusive,
}

impl Verdict {
    pub fn from_residual(max: f64, tol: f64) -> Verdict {
        if max <= tol {
            Verdict::Isochronous
        } else if max >= 10.0 * tol {
            Verdict::NotIsochronous
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Sample set for a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    /// Both turning points of each energy.
    Energies(Vec<f64>),
    /// Explicit nonzero points.
    Points(Vec<f64>),
}

impl Default for Grid {
    fn default() -> Self {
        Grid::Energies(default_energy_grid())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertReport {
    pub criterion: Criterion,
    /// Sample abscissae (for the exact Urabe test, coefficient indices).
    pub samples: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    /// True when the residual came from exact series arithmetic.
    pub exact: bool,
}

impl CertReport {
    fn new(criterion: Criterion, samples: Vec<f64>, residuals: Vec<f64>, tol: f64, exact: bool) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        CertReport {
            criterion,
            samples,
            residuals,
            max_residual,
            tol,
            verdict: Verdict::from_residual(max_residual, tol),
            exact,
        }
    }
}

fn grid_points(p: &PotentialSpec, grid: &Grid) -> Result<Vec<f64>> {
    match grid {
        Grid::Points(xs) => {
            if let Some(x) = xs.iter().find(|x| **x == 0.0) {
                return Err(Error::ParameterDomain(format!("grid point {x} must be nonzero")));
            }
            Ok(xs.clone())
        }
        Grid::Energies(es) => {
            let mut xs = Vec::with_capacity(2 * es.len());
            for &e in es {
                let (a, b) = p.turning_points(e)?;
                xs.push(b);
                xs.push(a);
            }
            Ok(xs)
        }
    }
}

/// `A′(x)` by 5-point central differences, `h = 1e−4(1 + |x|)`.
pub fn involution_slope(p: &PotentialSpec, x: f64) -> Result<f64> {
    let h = 1e-4 * (1.0 + x.abs());
    let a = |t: f64| p.involution(t);
    Ok((a(x - 2.0 * h)? - 8.0 * a(x - h)? + 8.0 * a(x + h)? - a(x + 2.0 * h)?) / (12.0 * h))
}

fn residual_at(p: &PotentialSpec, c: Criterion, x: f64) -> Result<f64> {
    let (g_val, f) = p.value_force(x)?;
    match c {
        Criterion::PhiInvariance => {
            let ax = p.involution(x)?;
            Ok((phi(p, x)? - phi(p, ax)?).abs())
        }
        Criterion::FInvariance => {
            let ax = p.involution(x)?;
            let fa = p.force(ax)?;
            Ok(((x - 2.0 * g_val / f) - (ax - 2.0 * g_val / fa)).abs())
        }
        Criterion::Landau => {
            let ax = p.involution(x)?;
            Ok((x - ax - x.signum() * 2.0 * (2.0 * g_val).sqrt()).abs())
        }
        Criterion::InvolutionDerivative => {
            let d = 1.0 - involution_slope(p, x)?;
            Ok((g_val / (f * f) - 2.0 / (d * d)).abs())
        }
        Criterion::Urabe => {
            // even part of h: (h(X) + h(−X))/2 with X = √(2G) at x and −X at A(x)
            let big = (2.0 * g_val).sqrt();
            let fa = p.force(p.involution(x)?)?;
            Ok((0.5 * big * (1.0 / f.abs() + 1.0 / fa.abs()) - 1.0).abs())
        }
    }
}

/// Exact Urabe test on a series potential: the even coefficients of `h`.
pub fn urabe_exact(g: &TruncSeries, tol: f64) -> Result<CertReport> {
    let u = urabe_h(g)?;
    let mut samples = Vec::new();
    let mut residuals = Vec::new();
    for k in (2..=u.h.order()).step_by(2) {
        samples.push(k as f64);
        residuals.push(crate::series::rational_to_f64(&u.h.coeff(k)).abs());
    }
    Ok(CertReport::new(Criterion::Urabe, samples, residuals, tol, true))
}

/// Run one certificate.
///
/// The `(iii)` residual uses `2√(2G)` with the sign of `x`, so points on
/// either side may be supplied.
pub fn certify(p: &PotentialSpec, c: Criterion, grid: &Grid, tol: f64, exec: Exec) -> Result<CertReport> {
    if c == Criterion::Urabe {
        if let Some(g) = p.series() {
            return urabe_exact(g, tol);
        }
    }
    let xs = grid_points(p, grid)?;
    let residuals = try_map(exec, &xs, |&x| residual_at(p, c, x))?;
    Ok(CertReport::new(c, xs, residuals, tol, false))
}

/// All five certificates.
pub fn certify_all(p: &PotentialSpec, grid: &Grid, tol: f64, exec: Exec) -> Result<Vec<CertReport>> {
    Criterion::ALL.iter().map(|&c| certify(p, c, grid, tol, exec)).collect()
}

struct Oscillator<'a> {
    p: &'a PotentialSpec,
}

impl OdeSystem<f64, 2> for Oscillator<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 2], dydt: &mut [f64; 2]) {
        dydt[0] = y[1];
        dydt[1] = -self.p.force(y[0]).unwrap_or(f64::NAN);
    }
}

/// Settings for [`ode_period_oracle`].
#[derive(Clone, Copy, Debug)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings { rtol: 1e-13, atol: 1e-14, max_steps: 200_000 }
    }
}

/// Period by integrating `ẍ = −g(x)` from `(b, 0)` until `ẋ` next falls
/// through zero with `x > 0`.
pub fn ode_period_oracle(p: &PotentialSpec, e: f64) -> Result<f64> {
    ode_period_with(p, e, OdeSettings::default())
}

pub fn ode_period_with(p: &PotentialSpec, e: f64, s: OdeSettings) -> Result<f64> {
    let orbit = turning_points(p, e)?;
    let sys = Oscillator { p };
    let scale = orbit.b.max(-orbit.a).max((2.0 * e).sqrt());
    let tol = Tolerances::new(s.atol * scale, s.rtol);
    let mut solver: Rkf78<f64, 2> = Rkf78::new(tol);
    let mut t = 0.0;
    let mut y = [orbit.b, 0.0];
    let mut h = 1e-2;
    let mut left_side = false;
    for _ in 0..s.max_steps {
        let r = solver.step(&sys, t, &y, h);
        if !r.error.is_finite() || !r.y.iter().all(|v| v.is_finite()) {
            h *= 0.25;
            if h < 1e-14 {
                return Err(Error::Integration(format!("step size collapsed at t = {t}")));
            }
            continue;
        }
        if !r.accepted {
            h = r.h_next.clamp(0.1 * h, h);
            continue;
        }
        if r.y[0] < 0.0 {
            left_side = true;
        }
        if left_side && y[1] > 0.0 && r.y[1] <= 0.0 && r.y[0] > 0.0 {
            // return to the right turning point inside this step
            let (t0, y0) = (t, y);
            let mut tau_fn = |tau: f64| {
                if tau == 0.0 {
                    return y0[1];
                }
                solver.step(&sys, t0, &y0, tau).y[1]
            };
            let tau = brent(&mut tau_fn, 0.0, h, 1e-15 * (t0 + h))?;
            return Ok(t0 + tau);
        }
        t = r.t;
        y = r.y;
        h = r.h_next.min(0.5).max(1e-12);
    }
    Err(Error::Integration(format!("no return within {} steps", s.max_steps)))
}
