//! Scalar root finding: bracketed bisection followed by a Newton polish.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON: usize = 50;

/// Finds a root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite sign (or zero).
///
/// Bisection shrinks the bracket to `bracket_tol`, then Newton steps with derivative `df`
/// reduce `|f|` below `residual_tol`. Newton iterates that leave the bracket are rejected.
pub fn bisect_newton<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    bracket_tol: f64,
    residual_tol: f64,
    what: &'static str,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::NoConvergence {
            what,
            iterations: 0,
        });
    }

    let mut iterations = 0;
    while hi - lo > bracket_tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let fx = f(x);
        if fx.abs() < residual_tol {
            return Ok(x);
        }
        let slope = df(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - fx / slope;
        // a Newton step that leaves the original bracket means the bracket was too wide
        if !(next >= lo - bracket_tol && next <= hi + bracket_tol) {
            break;
        }
        if next == x {
            break;
        }
        x = next;
    }
    if f(x).abs() < residual_tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            what,
            iterations: iterations + MAX_NEWTON,
        })
    }
}
