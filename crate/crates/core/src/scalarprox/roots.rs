//! Safeguarded one-dimensional root finders and real polynomial roots.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-12;

#[inline]
fn tolerance(x: f64) -> f64 {
    REL_TOL * x.abs().max(1.0)
}

fn check_bracket(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<()> {
    if !(lo <= hi) || !(f_lo <= 0.0) || !(f_hi >= 0.0) {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    Ok(())
}

/// Root of a continuous nondecreasing-through-the-root function on
/// `[lo, hi]`, given `f(lo) ≤ 0 ≤ f(hi)`.
///
/// Uses Illinois-modified regula falsi with a forced bisection every third
/// step, so the bracket at least halves every three evaluations.
pub fn solve_increasing_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    check_bracket(a, b, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for it in 0..MAX_ITER {
        if b - a <= tolerance(0.5 * (a + b)) {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if it % 3 == 2 || !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 || fx.is_nan() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton iteration safeguarded by bisection. `f` returns `(value, derivative)`
/// and must be increasing through the bracketed root.
pub fn newton_bisect(f: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    check_bracket(a, b, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut x = 0.5 * (a + b);
    let mut step_prev = b - a;
    let mut step = step_prev;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let use_newton = dfx.is_finite()
            && dfx > 0.0
            && newton > a
            && newton < b
            && (2.0 * fx).abs() <= (step_prev * dfx).abs();
        step_prev = step;
        let next = if use_newton { newton } else { 0.5 * (a + b) };
        step = (next - x).abs();
        x = next;
        if step <= tolerance(x) || b - a <= tolerance(x) {
            return Ok(x);
        }
        let (v, d) = f(x);
        fx = v;
        dfx = d;
        if fx.is_nan() {
            return Err(Error::Domain(format!("root function is NaN at {x}")));
        }
    }
    Ok(x)
}

/// Widens `hi` geometrically until `f(hi) ≥ 0`.
pub(crate) fn expand_upper(f: impl Fn(f64) -> f64, lo: f64, mut hi: f64) -> f64 {
    let mut width = (hi - lo).max(1.0);
    for _ in 0..2000 {
        if f(hi) >= 0.0 {
            break;
        }
        width *= 2.0;
        hi = lo + width;
    }
    hi
}

/// Shrinks a positive `lo` geometrically toward zero until `f(lo) ≤ 0`.
pub(crate) fn shrink_lower(f: impl Fn(f64) -> f64, mut lo: f64) -> f64 {
    for _ in 0..400 {
        if f(lo) <= 0.0 || lo < 1e-300 {
            break;
        }
        lo *= 1e-3;
    }
    lo
}

/// Horner evaluation; coefficients ordered from the highest degree.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (deg - k) as f64)
        .collect()
}

/// All real roots of a polynomial in `[lo, hi]`, in increasing order.
///
/// Roots of the derivative split the interval into monotone pieces, each of
/// which holds at most one root. Touching (even-multiplicity) roots are
/// reported through the critical points where the polynomial vanishes to
/// within rounding.
pub fn poly_real_roots(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let first = coeffs.iter().position(|&c| c != 0.0);
    let coeffs = match first {
        Some(k) => &coeffs[k..],
        None => return vec![],
    };
    if coeffs.len() == 1 {
        return vec![];
    }
    if coeffs.len() == 2 {
        let r = -coeffs[1] / coeffs[0];
        return if r >= lo && r <= hi { vec![r] } else { vec![] };
    }
    let crit = poly_real_roots(&poly_derivative(coeffs), lo, hi);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut knots = Vec::with_capacity(crit.len() + 2);
    knots.push(lo);
    knots.extend(crit.iter().copied().filter(|&c| c > lo && c < hi));
    knots.push(hi);

    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (p0, p1) = (poly_eval(coeffs, x0), poly_eval(coeffs, x1));
        if p0 == 0.0 {
            roots.push(x0);
            continue;
        }
        if p0.signum() == p1.signum() || p1 == 0.0 {
            continue;
        }
        let sign = if p0 < 0.0 { 1.0 } else { -1.0 };
        if let Ok(r) = solve_increasing_root(|x| sign * poly_eval(coeffs, x), x0, x1) {
            roots.push(r);
        }
    }
    if poly_eval(coeffs, hi) == 0.0 {
        roots.push(hi);
    }
    for &c in &crit {
        let mag: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| (a * c.abs().powi((coeffs.len() - 1 - k) as i32)).abs())
            .sum();
        if poly_eval(coeffs, c).abs() <= 1e-13 * mag.max(scale * 1e-300) {
            roots.push(c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    roots
}
