//! Scalar kernels lifted to symmetric matrices through the eigenbasis, and
//! Bregman divergences and proximity operators of spectral functions.

use crate::error::{Error, Result};
use crate::scalarprox::roots::{expand_upper, shrink_lower};
use crate::scalarprox::{
    hard, lambert_w, newton_bisect, soft, solve_increasing_root, Divergence, Penalty,
    ScalarKernel,
};
use crate::symlin::{eig_sym, fro_norm, inner, EigenDecomp, SymMatrix};

/// Input of [`prox_spectral`]: the minimizer of
/// `γ(φ(C) + ψ(C) − ⟨T, C⟩) + ½‖C − C̄‖²_F` (over PSD matrices when `psd`).
#[derive(Debug, Clone, Copy)]
pub struct SpectralProxRequest<'a> {
    pub kernel: ScalarKernel,
    pub gamma: f64,
    pub t: &'a SymMatrix,
    pub c_bar: &'a SymMatrix,
    pub psd: bool,
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(())
}

/// Applies the kernel to a spectrum, then clips at zero when `psd`.
pub fn prox_eigenvalues(
    kernel: &ScalarKernel,
    gamma: f64,
    lambda: &[f64],
    psd: bool,
) -> Result<Vec<f64>> {
    if psd && !kernel.is_separable() {
        return Err(Error::config(
            "psd",
            format!("psd clipping needs a separable penalty, got {}", kernel.penalty().name()),
        ));
    }
    let mut d = kernel.prox_vec(gamma, lambda)?;
    if psd {
        d.iter_mut().for_each(|x| *x = x.max(0.0));
    }
    Ok(d)
}

/// `U·diag(prox(λ))·Uᵀ` where `C̄ + γT = U·diag(λ)·Uᵀ`.
pub fn prox_spectral(req: &SpectralProxRequest<'_>) -> Result<SymMatrix> {
    Ok(prox_spectral_decomposed(req)?.0)
}

/// Like [`prox_spectral`], also returning the decomposition of `C̄ + γT`
/// and the output eigenvalues.
pub fn prox_spectral_decomposed(
    req: &SpectralProxRequest<'_>,
) -> Result<(SymMatrix, EigenDecomp, Vec<f64>)> {
    check_dims(req.t, req.c_bar)?;
    let m = req.c_bar.axpy(req.gamma, req.t)?;
    let e = eig_sym(&m)?;
    let d = prox_eigenvalues(&req.kernel, req.gamma, &e.lambda, req.psd)?;
    let out = e.with_values(&d)?;
    Ok((out, e, d))
}

/// Eigenvalues of a matrix with rounding dust flushed to zero, so that
/// indicator-type terms (rank, domain of entropies) see exact zeros.
pub fn clean_spectrum(c: &SymMatrix) -> Result<Vec<f64>> {
    let mut l = eig_sym(c)?.lambda;
    let scale = l.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for x in l.iter_mut() {
        if x.abs() <= 1e-12 * scale {
            *x = 0.0;
        }
    }
    Ok(l)
}

/// `φ(C) + ψ(C)` via the spectrum; `+∞` outside the domain.
pub fn spectral_value(kernel: &ScalarKernel, c: &SymMatrix) -> Result<f64> {
    Ok(kernel.eval_vec(&clean_spectrum(c)?))
}

/// The function [`prox_spectral`] minimizes, evaluated at `c`.
pub fn prox_objective(req: &SpectralProxRequest<'_>, c: &SymMatrix) -> Result<f64> {
    check_dims(req.t, c)?;
    check_dims(req.c_bar, c)?;
    let spec = clean_spectrum(c)?;
    if req.psd && spec.iter().any(|&x| x < 0.0) {
        return Ok(f64::INFINITY);
    }
    let v = req.kernel.eval_vec(&spec);
    if v == f64::INFINITY {
        return Ok(v);
    }
    let dist = fro_norm(&c.sub(req.c_bar)?);
    Ok(v - inner(req.t, c)? + 0.5 * dist * dist / req.gamma)
}

fn interior_decomposition(div: Divergence, y: &SymMatrix) -> Result<EigenDecomp> {
    let e = eig_sym(y)?;
    if let Some(&bad) = e.lambda.iter().find(|&&l| !div.in_interior(l)) {
        return Err(Error::Domain(format!(
            "eigenvalue {bad:e} of Y is outside the interior of dom {}",
            div.name()
        )));
    }
    Ok(e)
}

/// `D^f(C, Y) = f(C) − f(Y) − ⟨∇f(Y), C − Y⟩` for `f = Σφ(λᵢ)`.
///
/// `+∞` when `C` is outside `dom f`; an error when `Y` is not interior.
pub fn bregman_div(div: Divergence, c: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    check_dims(c, y)?;
    div.validate()?;
    let ey = interior_decomposition(div, y)?;
    if div == Divergence::HalfSquare {
        let r = fro_norm(&c.sub(y)?);
        return Ok(0.5 * r * r);
    }
    let fc: f64 = clean_spectrum(c)?.iter().map(|&l| div.value(l)).sum();
    if fc == f64::INFINITY {
        return Ok(fc);
    }
    let fy: f64 = ey.lambda.iter().map(|&l| div.value(l)).sum();
    let grad = ey.map_values(|l| div.derivative(l));
    let lin = inner(&grad, &c.sub(y)?)?;
    let d = fc - fy - lin;
    // cancellation can leave a negative residue of rounding size
    let scale = fc.abs() + fy.abs() + lin.abs();
    if d < 0.0 && d >= -1e-12 * scale.max(1.0) {
        return Ok(0.0);
    }
    Ok(d)
}

/// `argmin_C ψ(C) + D^f(C, Y)`, computed eigenvalue by eigenvalue in the
/// eigenbasis of `Y`.
///
/// Supported: the half-square, Burg and Shannon divergences with penalties
/// none, nuclear, squared Frobenius, Schatten, box, plus inverse Schatten for
/// half-square and Burg and rank for half-square.
pub fn bregman_prox(div: Divergence, psi: Penalty, y: &SymMatrix) -> Result<SymMatrix> {
    div.validate()?;
    psi.validate()?;
    let unsupported = || Error::UnsupportedPairing {
        divergence: div.name().into(),
        penalty: psi.name().into(),
    };
    match (div, psi) {
        (Divergence::NoisyBurg { .. }, _) => return Err(unsupported()),
        (_, Penalty::FroNorm { .. } | Penalty::FroBall { .. } | Penalty::SpectralNorm { .. }) => {
            return Err(unsupported())
        }
        (_, Penalty::Cauchy { .. }) => return Err(unsupported()),
        (Divergence::Burg | Divergence::Shannon, Penalty::Rank { .. }) => {
            return Err(unsupported())
        }
        (Divergence::Shannon, Penalty::InvSchattenP { .. }) => return Err(unsupported()),
        _ => {}
    }
    let e = interior_decomposition(div, y)?;
    let d = e
        .lambda
        .iter()
        .map(|&l| bregman_prox_scalar(div, psi, l))
        .collect::<Result<Vec<_>>>()?;
    e.with_values(&d)
}

/// Minimizer over `d` of `ψ(d) + φ(d) − φ(y) − φ'(y)(d − y)`.
pub fn bregman_prox_scalar(div: Divergence, psi: Penalty, y: f64) -> Result<f64> {
    match div {
        Divergence::HalfSquare => bregman_halfsquare(psi, y),
        Divergence::Burg => bregman_burg(psi, y),
        Divergence::Shannon => bregman_shannon(psi, y),
        Divergence::NoisyBurg { .. } => Err(Error::UnsupportedPairing {
            divergence: div.name().into(),
            penalty: psi.name().into(),
        }),
    }
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

fn bregman_halfsquare(psi: Penalty, y: f64) -> Result<f64> {
    Ok(match psi {
        Penalty::None => y,
        Penalty::Nuclear { mu } => soft(mu, y),
        Penalty::FroSquared { mu } => y / (1.0 + 2.0 * mu),
        Penalty::SchattenP { mu, p } => {
            let a = y.abs();
            let c = mu * p;
            let h = |d: f64| c * if p == 1.0 { 1.0 } else { d.powf(p - 1.0) } + d - a;
            if a == 0.0 || h(0.0) >= 0.0 {
                0.0
            } else {
                y.signum() * solve_increasing_root(h, 0.0, a)?
            }
        }
        Penalty::InvSchattenP { mu, p } => {
            let c = mu * p;
            let g = |d: f64| {
                let t = c * d.powf(-p - 1.0);
                (d - y - t, 1.0 + (p + 1.0) * t / d)
            };
            positive_root(g, y.max(0.0) + 1.0 + c)?
        }
        Penalty::EigBox { alpha, beta } => clamp(y, alpha, beta),
        Penalty::Rank { mu } => hard((2.0 * mu).sqrt(), y),
        _ => unreachable!("filtered by bregman_prox"),
    })
}

fn positive_root(g: impl Fn(f64) -> (f64, f64), hi: f64) -> Result<f64> {
    let lo = shrink_lower(|d| g(d).0, 1e-14);
    let hi = expand_upper(|d| g(d).0, lo, hi.max(2.0 * lo));
    newton_bisect(g, lo, hi)
}

fn bregman_burg(psi: Penalty, y: f64) -> Result<f64> {
    let t = 1.0 / y;
    Ok(match psi {
        Penalty::None => y,
        Penalty::Nuclear { mu } => y / (1.0 + mu * y),
        Penalty::FroSquared { mu } if mu == 0.0 => y,
        Penalty::FroSquared { mu } => (-t + (t * t + 8.0 * mu).sqrt()) / (4.0 * mu),
        Penalty::SchattenP { mu, p } => {
            let c = mu * p;
            // −1/d + c·d^{p−1} + 1/y, increasing; the root is at most y
            let g = |d: f64| {
                let s = c * d.powf(p - 1.0);
                (-1.0 / d + s + t, 1.0 / (d * d) + (p - 1.0) * s / d)
            };
            let lo = shrink_lower(|d| g(d).0, 1e-14 * y);
            newton_bisect(g, lo, y)?
        }
        Penalty::InvSchattenP { mu, p } => {
            let c = mu * p;
            // −1/d − c·d^{−p−1} + 1/y, increasing; the root is at least y
            let g = |d: f64| {
                let s = c * d.powf(-p - 1.0);
                (-1.0 / d - s + t, 1.0 / (d * d) + (p + 1.0) * s / d)
            };
            let hi = expand_upper(|d| g(d).0, y, 2.0 * y);
            newton_bisect(g, y, hi)?
        }
        Penalty::EigBox { alpha, beta } => clamp(y, alpha.max(0.0), beta),
        _ => unreachable!("filtered by bregman_prox"),
    })
}

fn bregman_shannon(psi: Penalty, y: f64) -> Result<f64> {
    Ok(match psi {
        Penalty::None => y,
        Penalty::Nuclear { mu } => y * (-mu).exp(),
        Penalty::FroSquared { mu } if mu == 0.0 => y,
        Penalty::FroSquared { mu } => lambert_w(2.0 * mu * y)? / (2.0 * mu),
        Penalty::SchattenP { mu, p } => {
            // d = eˢ: s + c·e^{s(p−1)} − ln y, increasing in s; root ≤ ln y
            let c = mu * p;
            let ly = y.ln();
            let h = |s: f64| {
                let q = c * (s * (p - 1.0)).exp();
                (s + q - ly, 1.0 + (p - 1.0) * q)
            };
            let mut lo = ly - 1.0;
            let mut step = 1.0;
            while h(lo).0 > 0.0 {
                lo -= step;
                step *= 2.0;
            }
            newton_bisect(h, lo, ly)?.exp()
        }
        Penalty::EigBox { alpha, beta } => clamp(y, alpha.max(0.0), beta),
        _ => unreachable!("filtered by bregman_prox"),
    })
}
