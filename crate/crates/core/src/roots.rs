//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "f({a:e}) = {fa:e} and f({b:e}) = {fb:e} do not bracket a root"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Convergence(format!("non-finite value at {b:e}")));
        }
    }
    Err(Error::Convergence("Brent iteration limit".into()))
}

/// Newton's method kept inside `[lo, hi]`, falling back to bisection when a
/// step leaves the bracket or stalls. `fdf` returns `(f, f')`; the signs of
/// `f` at the ends must differ.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut fdf: F,
    lo: f64,
    hi: f64,
    x0: f64,
    rel_tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let flo = fdf(lo).0;
    let fhi = fdf(hi).0;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo:e}, {hi:e}]"
        )));
    }
    let rising = fhi > 0.0;
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut last_step = hi - lo;
    for _ in 0..MAX_ITER {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_finite() {
            if (fx > 0.0) == rising {
                hi = x;
            } else {
                lo = x;
            }
        }
        let newton = if fx.is_finite() && dfx.is_finite() && dfx != 0.0 {
            Some(x - fx / dfx)
        } else {
            None
        };
        let next = match newton {
            Some(n) if n > lo && n < hi && (n - x).abs() < 0.75 * last_step.abs() => n,
            _ => 0.5 * (lo + hi),
        };
        last_step = next - x;
        let scale = next.abs().max(f64::MIN_POSITIVE);
        x = next;
        if last_step.abs() <= rel_tol * scale || hi - lo <= rel_tol * scale {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!(
        "safeguarded Newton did not converge on [{lo:e}, {hi:e}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cube_root_of_two() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_same_sign() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn newton_survives_bad_start() {
        // atan has a basin problem for plain Newton far from the root
        let r = newton_bracketed(|x| (x.atan(), 1.0 / (1.0 + x * x)), -20.0, 30.0, 25.0, 1e-15)
            .unwrap();
        assert!(r.abs() < 1e-14);
    }

    #[test]
    fn newton_handles_descending_function() {
        let r = newton_bracketed(|x| (1.0 - x * x, -2.0 * x), 0.0, 3.0, 2.9, 1e-15).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }
}
