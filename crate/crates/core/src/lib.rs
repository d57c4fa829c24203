//! Isochronous potentials in one dimension.
//!
//! A potential `G` is normalised so that `G(0) = 0`, `g = G'` and `g'(0) = 1`,
//! which puts the small-oscillation period at `2π`. The crate builds the
//! standard isochronous families, certifies isochronicity numerically and
//! exactly (rational power series), computes higher-order WKB corrections
//! and checks them against a finite-difference Schrödinger spectrum.
//!
//! Layout:
//!
//! - [`jet`]: truncated Taylor arithmetic on `f64`.
//! - [`series`]: exact rational power series and the isochronous recursions.
//! - [`potential`]: potential families, jets, involution and scaling.
//! - [`period`]: turning points, period, period derivative, certificates, ODE oracle.
//! - [`wkb`]: square-root pairs, action and the `ħ²`, `ħ⁴` corrections.
//! - [`schrodinger`]: finite-difference spectrum by Sturm bisection.
//!
//! Sweeps over energy grids and eigenvalue indices run on rayon when the
//! `parallel` feature is on (the default); see [`exec`].

pub mod error;
pub mod exec;
pub mod jet;
pub mod period;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod schrodinger;
pub mod series;
pub mod wkb;

pub use error::{Error, Result};
pub use exec::Exec;
pub use jet::Taylor;
pub use potential::{Domain, Family, Jet, PFunction, PotentialSpec, Side};
pub use series::{Rational, TruncSeries};

/// `2π`, the small-oscillation period of a normalised potential.
pub const TWO_PI: f64 = std::f64::consts::TAU;
