//! Finite-difference eigenvalues of `−(ħ²/2)ψ″ + G(x)ψ = Eψ`.
//!
//! Three-point Laplacian on a uniform grid, Dirichlet at both ends, and the
//! lowest eigenvalues by Sturm-sequence bisection. On a side where `G`
//! diverges at a finite point the boundary sits on the wall itself; the
//! interior nodes never touch the singularity. Elsewhere the boundary is
//! placed where `G` reaches `E_max + margin`.

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::potential::{PotentialSpec, Side};
use crate::wkb::GapStats;
use serde::{Deserialize, Serialize};

/// Smallest admissible number of grid intervals.
pub const MIN_GRID: usize = 200;

/// Symmetric tridiagonal operator on the interior nodes.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Number of intervals; the matrix has `n − 1` rows.
    pub n: usize,
    pub h: f64,
    pub hbar: f64,
    /// Interior nodes `x₁ … x_{N−1}`.
    pub grid: Vec<f64>,
    /// `ħ²/h² + G(xᵢ)`.
    pub diag: Vec<f64>,
    /// `−ħ²/(2h²)`, the same on every row.
    pub off: f64,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let mut q = 1.0;
        let mut count = 0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - lambda } else { d - lambda - e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + lambda.abs() + self.off.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d + r));
        (lo, hi)
    }
}

/// Build the operator on `[x_lo, x_hi]` with `n` intervals.
///
/// An endpoint may coincide with a singular wall of `p`; any other endpoint
/// must lie inside the domain.
pub fn discretize(p: &PotentialSpec, hbar: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<DiscreteOperator> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::ParameterDomain(format!("hbar = {hbar} must be positive")));
    }
    if n < MIN_GRID {
        return Err(Error::ParameterDomain(format!("grid N = {n} below the minimum {MIN_GRID}")));
    }
    if !(x_lo < x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
        return Err(Error::Domain(format!("bad interval [{x_lo}, {x_hi}]")));
    }
    let dom = p.domain();
    let ok = |x: f64, side: Side| dom.contains(x) || (dom.is_wall(side) && x == dom.edge(side));
    if !ok(x_lo, Side::Left) || !ok(x_hi, Side::Right) {
        return Err(Error::Domain(format!(
            "[{x_lo}, {x_hi}] not inside the domain ({}, {}) of {}",
            dom.lo,
            dom.hi,
            p.name()
        )));
    }
    let h = (x_hi - x_lo) / n as f64;
    let grid: Vec<f64> = (1..n).map(|i| x_lo + i as f64 * h).collect();
    let kin = hbar * hbar / (h * h);
    let diag = grid
        .iter()
        .map(|&x| p.value(x).map(|g| kin + g))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteOperator { x_lo, x_hi, n, h, hbar, grid, diag, off: -0.5 * kin })
}

/// Interval confining energies up to `e_max`: the wall where there is one,
/// otherwise the point where `G = e_max + margin`.
pub fn confining_interval(p: &PotentialSpec, e_max: f64, margin: f64) -> Result<(f64, f64)> {
    let dom = p.domain();
    let level = e_max + margin;
    let end = |side: Side| -> Result<f64> {
        if dom.is_wall(side) {
            return Ok(dom.edge(side));
        }
        if level >= dom.edge_level(side) {
            return Err(Error::Margin(format!(
                "G only reaches {} on the {side:?} side, below E_max + margin = {level}",
                dom.edge_level(side)
            )));
        }
        p.branch(level, side)
    };
    Ok((end(Side::Left)?, end(Side::Right)?))
}

/// Check that user-chosen bounds confine energies up to `e_max`.
pub fn check_margin(p: &PotentialSpec, x_lo: f64, x_hi: f64, e_max: f64, margin: f64) -> Result<()> {
    let dom = p.domain();
    let level = e_max + margin;
    for (x, side) in [(x_lo, Side::Left), (x_hi, Side::Right)] {
        if dom.is_wall(side) && x == dom.edge(side) {
            continue;
        }
        let g = p.value(x)?;
        if g < level {
            return Err(Error::Margin(format!(
                "G({x}) = {g} below E_max + margin = {level}; levels near E_max are not confined"
            )));
        }
    }
    Ok(())
}

/// The `k` lowest eigenvalues, each by bisection on the Sturm count.
pub fn eigenvalues(op: &DiscreteOperator, k: usize, exec: Exec) -> Result<Vec<f64>> {
    if k == 0 || k > op.n / 10 {
        return Err(Error::ParameterDomain(format!(
            "k = {k} levels needs 1 <= k <= N/10 = {}",
            op.n / 10
        )));
    }
    let (lo, hi) = op.bounds();
    let idx: Vec<usize> = (0..k).collect();
    exec::try_map(exec, &idx, |&j| bisect_level(op, j, lo, hi))
}

fn bisect_level(op: &DiscreteOperator, j: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        if op.count_below(mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Convergence(format!("bisection for level {j} stalled in [{lo}, {hi}]")))
}

/// Gap statistics of a level list against `ħ`.
pub fn spacing_report(levels: &[f64], hbar: f64) -> Result<GapStats> {
    if levels.len() < 3 {
        return Err(Error::ParameterDomain(format!(
            "spacing needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    Ok(GapStats::from_levels(levels, hbar))
}

/// Oracle run parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub hbar: f64,
    pub levels: usize,
    /// Intervals on the coarse grid; the fine grid has twice as many.
    pub grid: usize,
    /// Highest energy that must be confined. Estimated from the levels when unset.
    #[serde(default)]
    pub e_max: Option<f64>,
    /// Forbidden-region margin above `e_max`; defaults to `10ħ`.
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub x_lo: Option<f64>,
    #[serde(default)]
    pub x_hi: Option<f64>,
    #[serde(default = "yes")]
    pub richardson: bool,
}

fn yes() -> bool {
    true
}

impl OracleSettings {
    pub fn new(hbar: f64, levels: usize, grid: usize) -> Self {
        OracleSettings { hbar, levels, grid, e_max: None, margin: None, x_lo: None, x_hi: None, richardson: true }
    }

    pub fn bounds(mut self, x_lo: f64, x_hi: f64) -> Self {
        self.x_lo = Some(x_lo);
        self.x_hi = Some(x_hi);
        self
    }
}

/// Oracle spectrum with its refinement data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub hbar: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub grid: usize,
    /// Extrapolated levels (or the coarse ones when extrapolation is off).
    pub levels: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Option<Vec<f64>>,
    /// `max |E_N − E_2N| / h_N²`.
    pub refinement_constant: Option<f64>,
    pub gaps: GapStats,
}

/// Lowest levels of `p`, extrapolated over `N` and `2N` by default.
pub fn oracle_spectrum(p: &PotentialSpec, s: &OracleSettings, exec: Exec) -> Result<OracleReport> {
    let hbar = s.hbar;
    let margin = s.margin.unwrap_or(10.0 * hbar);
    let k = s.levels;
    let mut e_max = s.e_max.unwrap_or((k as f64 + 1.0) * hbar);
    let (x_lo, x_hi, coarse_op, coarse) = loop {
        let auto = confining_interval(p, e_max, margin);
        let x_lo = match s.x_lo {
            Some(x) => x,
            None => auto.as_ref().map_err(Clone::clone)?.0,
        };
        let x_hi = match s.x_hi {
            Some(x) => x,
            None => auto.as_ref().map_err(Clone::clone)?.1,
        };
        if s.x_lo.is_some() || s.x_hi.is_some() {
            check_margin(p, x_lo, x_hi, e_max, margin)?;
        }
        let op = discretize(p, hbar, x_lo, x_hi, s.grid)?;
        let lv = eigenvalues(&op, k, exec)?;
        let top = *lv.last().expect("k >= 1");
        if top <= e_max || s.e_max.is_some() {
            if top > e_max {
                return Err(Error::Margin(format!(
                    "level {} at {top} exceeds the requested E_max = {e_max}",
                    k - 1
                )));
            }
            break (x_lo, x_hi, op, lv);
        }
        e_max = 1.5 * top;
    };
    let (levels, fine, c) = if s.richardson {
        let fine_op = discretize(p, hbar, x_lo, x_hi, 2 * s.grid)?;
        let fine = eigenvalues(&fine_op, k, exec)?;
        let levels: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
        let h2 = coarse_op.h * coarse_op.h;
        let c = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs() / h2).fold(0.0, f64::max);
        (levels, Some(fine), Some(c))
    } else {
        (coarse.clone(), None, None)
    };
    let gaps = GapStats::from_levels(&levels, hbar);
    Ok(OracleReport { hbar, x_lo, x_hi, grid: s.grid, levels, coarse, fine, refinement_constant: c, gaps })
}
