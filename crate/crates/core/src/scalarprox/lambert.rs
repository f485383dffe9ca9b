//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-14;
/// `-1/e`, the branch point.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// `W₀(x)` for `x ≥ -1/e`: the solution `w ≥ -1` of `w·eʷ = x`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("lambert_w of NaN".into()));
    }
    if x < BRANCH_POINT {
        // tolerate rounding of -1/e itself
        if x >= BRANCH_POINT * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("lambert_w undefined below -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > 1e100 {
        return Ok(w_of_exp_newton(x.ln()));
    }

    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        if !dw.is_finite() {
            break;
        }
        w -= dw;
        if dw.abs() <= TOL * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Solves `w + ln w = t` for `w > 0`, i.e. `W₀(eᵗ)`, for large `t`.
fn w_of_exp_newton(t: f64) -> f64 {
    let mut w = t - t.ln();
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - t;
        let dw = g / (1.0 + 1.0 / w);
        w -= dw;
        if dw.abs() <= TOL * w.abs() {
            break;
        }
    }
    w
}

/// `W₀(eᵗ)` without overflowing `eᵗ`.
pub fn lambert_w_exp(t: f64) -> f64 {
    if t > 500.0 {
        w_of_exp_newton(t)
    } else {
        // exp(t) > 0 so the argument is inside the domain
        lambert_w(t.exp()).unwrap_or(0.0)
    }
}
