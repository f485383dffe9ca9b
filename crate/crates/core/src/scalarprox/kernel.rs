use std::fmt;

use super::l1ball::project_l1_ball;
use super::lambert::lambert_w_exp;
use super::roots::{expand_upper, newton_bisect, poly_real_roots, shrink_lower, solve_increasing_root};
use crate::error::{Error, Result};

/// Lower end of the search interval for roots on `]0, ∞[`.
pub const BURG_EPS: f64 = 1e-14;

/// Soft threshold: shrinks `xi` toward zero by `mu`.
#[inline]
pub fn soft(mu: f64, xi: f64) -> f64 {
    xi.signum() * (xi.abs() - mu).max(0.0)
}

/// Hard threshold: keeps `xi` only when `|xi| > mu`.
#[inline]
pub fn hard(mu: f64, xi: f64) -> f64 {
    if xi.abs() > mu {
        xi
    } else {
        0.0
    }
}

/// The spectral function `φ` the divergence is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    /// `λ²/2`
    HalfSquare,
    /// `−log λ`
    Burg,
    /// `λ log λ`
    Shannon,
    /// `−log(λ/(1+σ²λ))`
    NoisyBurg { sigma2: f64 },
}

impl Divergence {
    pub fn name(&self) -> &'static str {
        match self {
            Divergence::HalfSquare => "halfsquare",
            Divergence::Burg => "burg",
            Divergence::Shannon => "shannon",
            Divergence::NoisyBurg { .. } => "noisyburg",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Divergence::NoisyBurg { sigma2 } = *self {
            if !(sigma2 >= 0.0 && sigma2.is_finite()) {
                return Err(Error::config("sigma2", format!("must be finite and ≥ 0, got {sigma2}")));
            }
        }
        Ok(())
    }

    /// `φ(λ)`, `+∞` outside the domain.
    pub fn value(&self, l: f64) -> f64 {
        match *self {
            Divergence::HalfSquare => 0.5 * l * l,
            Divergence::Burg => {
                if l > 0.0 {
                    -l.ln()
                } else {
                    f64::INFINITY
                }
            }
            Divergence::Shannon => {
                if l > 0.0 {
                    l * l.ln()
                } else if l == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Divergence::NoisyBurg { sigma2 } => {
                if l > 0.0 {
                    -l.ln() + (sigma2 * l).ln_1p()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `φ'(λ)` on the interior of the domain.
    pub fn derivative(&self, l: f64) -> f64 {
        match *self {
            Divergence::HalfSquare => l,
            Divergence::Burg => -1.0 / l,
            Divergence::Shannon => l.ln() + 1.0,
            Divergence::NoisyBurg { sigma2 } => -1.0 / l + sigma2 / (1.0 + sigma2 * l),
        }
    }

    /// Whether `λ` lies in the interior of `dom φ`.
    pub fn in_interior(&self, l: f64) -> bool {
        match self {
            Divergence::HalfSquare => l.is_finite(),
            _ => l > 0.0 && l.is_finite(),
        }
    }

    /// Whether the domain is restricted to nonnegative reals.
    pub fn is_positive_domain(&self) -> bool {
        !matches!(self, Divergence::HalfSquare)
    }
}

/// The spectral penalty `ψ` (`g0` in the solver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    None,
    Nuclear { mu: f64 },
    FroNorm { mu: f64 },
    FroSquared { mu: f64 },
    SchattenP { mu: f64, p: f64 },
    InvSchattenP { mu: f64, p: f64 },
    FroBall { alpha: f64 },
    EigBox { alpha: f64, beta: f64 },
    Rank { mu: f64 },
    Cauchy { mu: f64, eps: f64 },
    SpectralNorm { mu: f64 },
}

impl Penalty {
    pub fn name(&self) -> &'static str {
        match self {
            Penalty::None => "none",
            Penalty::Nuclear { .. } => "nuclear",
            Penalty::FroNorm { .. } => "fronorm",
            Penalty::FroSquared { .. } => "frosquared",
            Penalty::SchattenP { .. } => "schatten",
            Penalty::InvSchattenP { .. } => "invschatten",
            Penalty::FroBall { .. } => "froball",
            Penalty::EigBox { .. } => "eigbox",
            Penalty::Rank { .. } => "rank",
            Penalty::Cauchy { .. } => "cauchy",
            Penalty::SpectralNorm { .. } => "spectral",
        }
    }

    /// Separable penalties act on each eigenvalue independently.
    pub fn is_separable(&self) -> bool {
        !matches!(
            self,
            Penalty::FroNorm { .. } | Penalty::FroBall { .. } | Penalty::SpectralNorm { .. }
        )
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Penalty::Rank { .. } | Penalty::Cauchy { .. })
    }

    pub fn validate(&self) -> Result<()> {
        fn weight(mu: f64) -> Result<()> {
            if mu >= 0.0 && mu.is_finite() {
                Ok(())
            } else {
                Err(Error::config("mu", format!("must be finite and ≥ 0, got {mu}")))
            }
        }
        match *self {
            Penalty::None => Ok(()),
            Penalty::Nuclear { mu }
            | Penalty::FroNorm { mu }
            | Penalty::FroSquared { mu }
            | Penalty::Rank { mu }
            | Penalty::SpectralNorm { mu } => weight(mu),
            Penalty::SchattenP { mu, p } => {
                weight(mu)?;
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::config("p", format!("schatten needs p ≥ 1, got {p}")));
                }
                Ok(())
            }
            Penalty::InvSchattenP { mu, p } => {
                weight(mu)?;
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::config("p", format!("inverse schatten needs p > 0, got {p}")));
                }
                Ok(())
            }
            Penalty::FroBall { alpha } => {
                if alpha >= 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("alpha", format!("must be finite and ≥ 0, got {alpha}")))
                }
            }
            Penalty::EigBox { alpha, beta } => {
                if alpha.is_nan() || beta.is_nan() || alpha > beta {
                    Err(Error::config("beta", format!("need alpha ≤ beta, got [{alpha}, {beta}]")))
                } else {
                    Ok(())
                }
            }
            Penalty::Cauchy { mu, eps } => {
                weight(mu)?;
                if eps > 0.0 && eps.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("eps", format!("must be > 0, got {eps}")))
                }
            }
        }
    }

    /// `ψ(λ)` for a single eigenvalue. Vector penalties are evaluated on
    /// the one-element vector `[λ]`.
    pub fn value_scalar(&self, l: f64) -> f64 {
        match *self {
            Penalty::None => 0.0,
            Penalty::Nuclear { mu } | Penalty::FroNorm { mu } | Penalty::SpectralNorm { mu } => {
                mu * l.abs()
            }
            Penalty::FroSquared { mu } => mu * l * l,
            Penalty::SchattenP { mu, p } => mu * l.abs().powf(p),
            Penalty::InvSchattenP { mu, p } => {
                if l > 0.0 {
                    mu * l.powf(-p)
                } else {
                    f64::INFINITY
                }
            }
            Penalty::FroBall { alpha } => ball_indicator(l.abs(), alpha),
            Penalty::EigBox { alpha, beta } => {
                let slack_lo = 1e-12 * alpha.abs().max(1.0);
                let slack_hi = 1e-12 * beta.abs().max(1.0);
                if l >= alpha - slack_lo && l <= beta + slack_hi {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Penalty::Rank { mu } => {
                if l != 0.0 {
                    mu
                } else {
                    0.0
                }
            }
            Penalty::Cauchy { mu, eps } => mu * (l * l + eps).ln(),
        }
    }

    /// `ψ(λ)` for a whole eigenvalue vector.
    pub fn value_vec(&self, l: &[f64]) -> f64 {
        match *self {
            Penalty::FroNorm { mu } => mu * euclid(l),
            Penalty::FroBall { alpha } => ball_indicator(euclid(l), alpha),
            Penalty::SpectralNorm { mu } => mu * l.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            _ => l.iter().map(|&x| self.value_scalar(x)).sum(),
        }
    }
}

fn ball_indicator(norm: f64, alpha: f64) -> f64 {
    if norm <= alpha * (1.0 + 1e-12) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::NoisyBurg { sigma2 } => write!(f, "divergence=noisyburg sigma2={sigma2}"),
            d => write!(f, "divergence={}", d.name()),
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "penalty={}", self.name())?;
        match *self {
            Penalty::None => Ok(()),
            Penalty::Nuclear { mu }
            | Penalty::FroNorm { mu }
            | Penalty::FroSquared { mu }
            | Penalty::Rank { mu }
            | Penalty::SpectralNorm { mu } => write!(f, " mu={mu}"),
            Penalty::SchattenP { mu, p } | Penalty::InvSchattenP { mu, p } => {
                write!(f, " mu={mu} p={p}")
            }
            Penalty::FroBall { alpha } => write!(f, " alpha={alpha}"),
            Penalty::EigBox { alpha, beta } => write!(f, " alpha={alpha} beta={beta}"),
            Penalty::Cauchy { mu, eps } => write!(f, " mu={mu} eps={eps}"),
        }
    }
}

/// Minimizers of a one-dimensional prox objective, best first.
///
/// Ordered by objective value, ties by smaller magnitude. Convex kernels
/// always yield a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSet {
    points: Vec<f64>,
}

impl ProxSet {
    fn single(d: f64) -> Self {
        ProxSet { points: vec![d] }
    }

    /// The point downstream solvers use.
    pub fn selected(&self) -> f64 {
        self.points[0]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A supported `(φ, ψ)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarKernel {
    divergence: Divergence,
    penalty: Penalty,
}

impl fmt::Display for ScalarKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.divergence, self.penalty)
    }
}

fn supported(d: &Divergence, p: &Penalty) -> bool {
    use Penalty as P;
    match d {
        Divergence::HalfSquare => true,
        Divergence::Burg => matches!(
            p,
            P::None
                | P::Nuclear { .. }
                | P::FroSquared { .. }
                | P::SchattenP { .. }
                | P::InvSchattenP { .. }
                | P::EigBox { .. }
                | P::Cauchy { .. }
        ),
        Divergence::Shannon => matches!(
            p,
            P::None
                | P::Nuclear { .. }
                | P::FroSquared { .. }
                | P::SchattenP { .. }
                | P::EigBox { .. }
                | P::Rank { .. }
        ),
        Divergence::NoisyBurg { .. } => match p {
            P::None => true,
            P::InvSchattenP { p, .. } => *p == 1.0,
            _ => false,
        },
    }
}

impl ScalarKernel {
    /// Validates parameters and the pairing. For divergences living on
    /// nonnegative reals, box bounds are clipped to `[0, +∞]`.
    pub fn new(divergence: Divergence, penalty: Penalty) -> Result<Self> {
        divergence.validate()?;
        penalty.validate()?;
        if !supported(&divergence, &penalty) {
            return Err(Error::UnsupportedPairing {
                divergence: divergence.name().into(),
                penalty: penalty.name().into(),
            });
        }
        if let (Divergence::HalfSquare, Penalty::InvSchattenP { mu, .. }) = (divergence, penalty) {
            if mu <= 0.0 {
                return Err(Error::config("mu", "inverse schatten with halfsquare needs mu > 0"));
            }
        }
        let penalty = match penalty {
            Penalty::EigBox { alpha, beta } if divergence.is_positive_domain() => {
                let alpha = alpha.max(0.0);
                if beta < alpha {
                    return Err(Error::config("beta", "box lies entirely below zero"));
                }
                Penalty::EigBox { alpha, beta }
            }
            p => p,
        };
        Ok(ScalarKernel { divergence, penalty })
    }

    pub fn divergence(&self) -> Divergence {
        self.divergence
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn is_separable(&self) -> bool {
        self.penalty.is_separable()
    }

    pub fn is_convex(&self) -> bool {
        self.penalty.is_convex()
    }

    /// `φ(λ) + ψ(λ)`; `+∞` outside the domain.
    pub fn eval(&self, l: f64) -> f64 {
        let phi = self.divergence.value(l);
        if phi == f64::INFINITY {
            return phi;
        }
        phi + self.penalty.value_scalar(l)
    }

    /// `Σφ(λᵢ) + ψ(λ)` for an eigenvalue vector.
    pub fn eval_vec(&self, l: &[f64]) -> f64 {
        let phi: f64 = l.iter().map(|&x| self.divergence.value(x)).sum();
        if phi == f64::INFINITY {
            return phi;
        }
        phi + self.penalty.value_vec(l)
    }

    /// `½(d−λ)² + γ(φ(d)+ψ(d))`.
    pub fn objective(&self, gamma: f64, lam: f64, d: f64) -> f64 {
        0.5 * (d - lam) * (d - lam) + gamma * self.eval(d)
    }

    /// Vector form of [`objective`](Self::objective).
    pub fn objective_vec(&self, gamma: f64, lam: &[f64], d: &[f64]) -> f64 {
        let q: f64 = lam.iter().zip(d).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
        q + gamma * self.eval_vec(d)
    }

    /// Minimizers of `d ↦ ½(d−λ)² + γ(φ(d)+ψ(d))`.
    pub fn prox(&self, gamma: f64, lam: f64) -> Result<ProxSet> {
        check_args(gamma, lam)?;
        if !self.is_separable() {
            return Ok(ProxSet::single(self.prox_vec(gamma, &[lam])?[0]));
        }
        match self.divergence {
            Divergence::HalfSquare => halfsquare(self.penalty, gamma, lam),
            Divergence::Burg => burg(self.penalty, gamma, lam),
            Divergence::Shannon => shannon(self.penalty, gamma, lam),
            Divergence::NoisyBurg { sigma2 } => {
                let mu0 = match self.penalty {
                    Penalty::InvSchattenP { mu, .. } => mu,
                    _ => 0.0,
                };
                prox_noisy_burg_quartic(gamma, mu0, sigma2, lam).map(ProxSet::single)
            }
        }
    }

    /// Prox of the whole eigenvalue vector. Separable kernels apply
    /// [`prox`](Self::prox) entrywise and keep the selected point.
    pub fn prox_vec(&self, gamma: f64, lam: &[f64]) -> Result<Vec<f64>> {
        for &l in lam {
            check_args(gamma, l)?;
        }
        let g1 = 1.0 + gamma;
        match self.penalty {
            Penalty::FroNorm { mu } => {
                let nrm = euclid(lam);
                if nrm > gamma * mu {
                    let s = (1.0 - gamma * mu / nrm) / g1;
                    Ok(lam.iter().map(|x| s * x).collect())
                } else {
                    Ok(vec![0.0; lam.len()])
                }
            }
            Penalty::FroBall { alpha } => {
                let nrm = euclid(lam);
                if nrm > alpha * g1 {
                    Ok(lam.iter().map(|x| alpha * x / nrm).collect())
                } else {
                    Ok(lam.iter().map(|x| x / g1).collect())
                }
            }
            Penalty::SpectralNorm { mu } => {
                let r = mu * gamma;
                if r == 0.0 {
                    return Ok(lam.iter().map(|x| x / g1).collect());
                }
                let scaled: Vec<f64> = lam.iter().map(|x| x / r).collect();
                let p = project_l1_ball(&scaled, 1.0);
                Ok(lam.iter().zip(p).map(|(x, q)| (x - r * q) / g1).collect())
            }
            _ => lam
                .iter()
                .map(|&l| self.prox(gamma, l).map(|s| s.selected()))
                .collect(),
        }
    }
}

fn check_args(gamma: f64, lam: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::config("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    if !lam.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite eigenvalue {lam}")));
    }
    Ok(())
}

pub(crate) fn select_minimizers(candidates: &[f64], obj: impl Fn(f64) -> f64) -> ProxSet {
    let scored: Vec<(f64, f64)> = candidates
        .iter()
        .map(|&d| (d, obj(d)))
        .filter(|(_, v)| !v.is_nan())
        .collect();
    let best = scored.iter().fold(f64::INFINITY, |m, &(_, v)| m.min(v));
    let slack = 1e-14 * best.abs().max(1.0);
    let mut ties: Vec<f64> = scored
        .iter()
        .filter(|&&(_, v)| v <= best + slack)
        .map(|&(d, _)| d)
        .collect();
    ties.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    ties.dedup();
    if ties.is_empty() {
        ties.push(candidates[0]);
    }
    ProxSet { points: ties }
}

/// Positive root of `d² − b·d − c` for `c > 0`, free of cancellation.
fn positive_quadratic_root(b: f64, c: f64) -> f64 {
    let s = (b * b + 4.0 * c).sqrt();
    if b >= 0.0 {
        0.5 * (b + s)
    } else {
        2.0 * c / (s - b)
    }
}

/// Root of an increasing `g` on `]0, ∞[` that tends to `−∞` at `0⁺`.
fn positive_root(
    g: impl Fn(f64) -> (f64, f64),
    hi_guess: f64,
) -> Result<f64> {
    let lo = shrink_lower(|d| g(d).0, BURG_EPS);
    let hi = expand_upper(|d| g(d).0, lo, hi_guess.max(2.0 * lo));
    newton_bisect(g, lo, hi)
}

fn halfsquare(pen: Penalty, gamma: f64, lam: f64) -> Result<ProxSet> {
    let g1 = 1.0 + gamma;
    let d = match pen {
        Penalty::None => lam / g1,
        Penalty::Nuclear { mu } => soft(mu * gamma / g1, lam / g1),
        Penalty::FroSquared { mu } => lam / (1.0 + gamma * (1.0 + 2.0 * mu)),
        Penalty::SchattenP { mu, p } => halfsquare_schatten(gamma, mu, p, lam)?,
        Penalty::InvSchattenP { mu, p } => {
            let g = |d: f64| {
                let t = gamma * mu * p * d.powf(-p - 1.0);
                (g1 * d - lam - t, g1 + (p + 1.0) * t / d)
            };
            let scale = (gamma * mu * p).powf(1.0 / (p + 2.0));
            positive_root(g, lam.max(0.0) / g1 + 10.0 * scale.max(1.0))?
        }
        Penalty::EigBox { alpha, beta } => (lam / g1).max(alpha).min(beta),
        Penalty::Rank { mu } => {
            let x = lam / g1;
            let thr = (2.0 * mu * gamma / g1).sqrt();
            return Ok(if x.abs() > thr {
                ProxSet::single(x)
            } else if x.abs() == thr && x != 0.0 {
                ProxSet { points: vec![0.0, x] }
            } else {
                ProxSet::single(0.0)
            });
        }
        Penalty::Cauchy { mu, eps } => {
            let a = lam.abs();
            let coeffs = [g1, -a, 2.0 * gamma * mu + eps * g1, -a * eps];
            let mut cands = poly_real_roots(&coeffs, 0.0, a);
            cands.push(0.0);
            let obj = |d: f64| {
                0.5 * (d - a) * (d - a) + gamma * (0.5 * d * d + mu * (d * d + eps).ln())
            };
            let set = select_minimizers(&cands, obj);
            let sign = if lam < 0.0 { -1.0 } else { 1.0 };
            return Ok(ProxSet {
                points: set.points.iter().map(|d| sign * d).collect(),
            });
        }
        Penalty::FroNorm { .. } | Penalty::FroBall { .. } | Penalty::SpectralNorm { .. } => {
            unreachable!("vector kernels are dispatched through prox_vec")
        }
    };
    Ok(ProxSet::single(d))
}

/// `d ≥ 0` solving `μγp·d^{p−1} + (γ+1)d = |λ|`, signed like `λ`.
/// Closed forms for p ∈ {1, 2, 3, 4, 4/3, 3/2}; root finding otherwise.
pub fn halfsquare_schatten(gamma: f64, mu: f64, p: f64, lam: f64) -> Result<f64> {
    let a = lam.abs();
    let g1 = 1.0 + gamma;
    let gm = gamma * mu;
    if a == 0.0 {
        return Ok(0.0);
    }
    if gm == 0.0 {
        return Ok(lam / g1);
    }
    let d = if p == 1.0 {
        (a - gm).max(0.0) / g1
    } else if p == 2.0 {
        a / (1.0 + gamma * (1.0 + 2.0 * mu))
    } else if p == 3.0 {
        2.0 * a / ((g1 * g1 + 12.0 * a * gm).sqrt() + g1)
    } else if p == 4.0 {
        let zeta = g1 * g1 * g1 / (27.0 * gm);
        let big = (a + (a * a + zeta).sqrt()).cbrt();
        let small = -zeta.cbrt() / big;
        (big + small) / (8.0 * gm).cbrt()
    } else if p == 4.0 / 3.0 {
        let zeta = 256.0 * gm * gm * gm / (729.0 * g1);
        let r = (a * a + zeta).sqrt();
        let k = 4.0 * gm / (3.0 * (2.0 * g1).cbrt());
        ((a + k * ((r - a).cbrt() - (r + a).cbrt())) / g1).max(0.0)
    } else if p == 1.5 {
        let x = 16.0 * g1 * a / (9.0 * gm * gm);
        let s = 1.0 + (1.0 + x).sqrt();
        a * x / (s * s * g1)
    } else {
        return halfsquare_schatten_implicit(gamma, mu, p, lam);
    };
    Ok(lam.signum() * d)
}

/// Root-finding path for the same stationarity equation, for any `p ≥ 1`.
pub fn halfsquare_schatten_implicit(gamma: f64, mu: f64, p: f64, lam: f64) -> Result<f64> {
    let a = lam.abs();
    let g1 = 1.0 + gamma;
    let c = mu * gamma * p;
    if a == 0.0 {
        return Ok(0.0);
    }
    let h = |d: f64| {
        let pw = if p == 1.0 { 1.0 } else { d.powf(p - 1.0) };
        c * pw + g1 * d - a
    };
    if h(0.0) >= 0.0 {
        return Ok(0.0);
    }
    let d = solve_increasing_root(h, 0.0, a / g1)?;
    Ok(lam.signum() * d)
}

fn burg(pen: Penalty, gamma: f64, lam: f64) -> Result<ProxSet> {
    let d = match pen {
        Penalty::None => positive_quadratic_root(lam, gamma),
        Penalty::Nuclear { mu } => positive_quadratic_root(lam - gamma * mu, gamma),
        Penalty::FroSquared { mu } => {
            let k = 1.0 + 2.0 * gamma * mu;
            positive_quadratic_root(lam / k, gamma / k)
        }
        Penalty::SchattenP { mu, p } if p == 1.0 => positive_quadratic_root(lam - gamma * mu, gamma),
        Penalty::SchattenP { mu, p } if p == 2.0 => {
            let k = 1.0 + 2.0 * gamma * mu;
            positive_quadratic_root(lam / k, gamma / k)
        }
        Penalty::SchattenP { mu, p } => {
            let c = gamma * mu * p;
            let g = |d: f64| {
                let t = c * d.powf(p - 1.0);
                (
                    d - lam - gamma / d + t,
                    1.0 + gamma / (d * d) + (p - 1.0) * t / d,
                )
            };
            positive_root(g, burg_hi(lam, gamma, c, p))?
        }
        Penalty::InvSchattenP { mu, p } => {
            let c = gamma * mu * p;
            if c == 0.0 {
                positive_quadratic_root(lam, gamma)
            } else {
                let g = |d: f64| {
                    let t = c * d.powf(-p - 1.0);
                    (
                        d - lam - gamma / d - t,
                        1.0 + gamma / (d * d) + (p + 1.0) * t / d,
                    )
                };
                positive_root(g, burg_hi(lam, gamma, c, p))?
            }
        }
        Penalty::EigBox { alpha, beta } => positive_quadratic_root(lam, gamma).max(alpha).min(beta),
        Penalty::Cauchy { mu, eps } => {
            let coeffs = [1.0, -lam, eps + gamma * (2.0 * mu - 1.0), -eps * lam, -gamma * eps];
            let hi = lam.max(0.0) + gamma * mu / eps.sqrt() + gamma.sqrt() + 1.0;
            let mut cands: Vec<f64> = poly_real_roots(&coeffs, 0.0, hi)
                .into_iter()
                .filter(|&d| d > 0.0)
                .collect();
            if cands.is_empty() {
                return Err(Error::Domain(format!(
                    "no positive stationary point for burg+cauchy at λ={lam}"
                )));
            }
            cands.dedup();
            let obj = |d: f64| {
                0.5 * (d - lam) * (d - lam) + gamma * (mu * (d * d + eps).ln() - d.ln())
            };
            return Ok(select_minimizers(&cands, obj));
        }
        _ => unreachable!("pairing validated at construction"),
    };
    Ok(ProxSet::single(d))
}

fn burg_hi(lam: f64, gamma: f64, c: f64, p: f64) -> f64 {
    lam.max(0.0) + 10.0 * 1f64.max(gamma.sqrt()).max(c.powf(1.0 / p))
}

/// `γ·W(exp(λ/γ − 1 − ln γ − shift))`, the Shannon prox with the linear
/// term shifted by `shift`.
fn shannon_w(gamma: f64, lam: f64, shift: f64) -> f64 {
    gamma * lambert_w_exp(lam / gamma - 1.0 - gamma.ln() - shift)
}

fn shannon(pen: Penalty, gamma: f64, lam: f64) -> Result<ProxSet> {
    let d = match pen {
        Penalty::None => shannon_w(gamma, lam, 0.0),
        Penalty::Nuclear { mu } => shannon_w(gamma, lam, mu),
        Penalty::SchattenP { mu, p } if p == 1.0 => shannon_w(gamma, lam, mu),
        Penalty::FroSquared { mu } => frosq_shannon(gamma, mu, lam),
        Penalty::SchattenP { mu, p } if p == 2.0 => frosq_shannon(gamma, mu, lam),
        Penalty::SchattenP { mu, p } => {
            // d = e^s keeps the iterate positive
            let c = p * mu * gamma;
            let h = |s: f64| {
                let t = c * (s * (p - 1.0)).exp();
                let e = s.exp();
                (t + e + gamma * s + gamma - lam, t * (p - 1.0) + e + gamma)
            };
            let mut lo = lam / gamma - 2.0;
            let mut step = 1.0;
            while h(lo).0 > 0.0 {
                lo -= step;
                step *= 2.0;
            }
            let mut hi = lam.abs().max(1.0).ln() + 1.0;
            let mut step = 1.0;
            while h(hi).0 < 0.0 {
                hi += step;
                step *= 2.0;
            }
            newton_bisect(h, lo, hi)?.exp()
        }
        Penalty::EigBox { alpha, beta } => shannon_w(gamma, lam, 0.0).max(alpha).min(beta),
        Penalty::Rank { mu } => {
            let rho = shannon_w(gamma, lam, 0.0);
            let chi = (gamma * (gamma + 2.0 * mu)).sqrt() - gamma;
            return Ok(if rho > chi {
                ProxSet::single(rho)
            } else if rho == chi {
                ProxSet { points: vec![0.0, rho] }
            } else {
                ProxSet::single(0.0)
            });
        }
        _ => unreachable!("pairing validated at construction"),
    };
    Ok(ProxSet::single(d))
}

fn frosq_shannon(gamma: f64, mu: f64, lam: f64) -> f64 {
    let k = (2.0 * mu * gamma + 1.0) / gamma;
    lambert_w_exp(k.ln() + lam / gamma - 1.0) / k
}

/// Coefficients, highest degree first, of the quartic whose unique positive
/// root is the noisy-Burg prox:
/// `σ²d⁴ + (1 − λσ²)d³ − λd² − γ(1 + μ0σ²)d − γμ0`.
pub fn noisy_burg_quartic_coeffs(gamma: f64, mu0: f64, sigma2: f64, lam: f64) -> [f64; 5] {
    [
        sigma2,
        1.0 - lam * sigma2,
        -lam,
        -gamma * (1.0 + mu0 * sigma2),
        -gamma * mu0,
    ]
}

/// Minimizer over `d > 0` of `½(d−λ)² + γ(−log(d/(1+σ²d)) + μ0/d)`.
///
/// The stationarity condition (the quartic above divided by `d²(1+σ²d)`)
/// is strictly increasing in `d`, so it is solved by bracketed Newton.
pub fn prox_noisy_burg_quartic(gamma: f64, mu0: f64, sigma2: f64, lam: f64) -> Result<f64> {
    check_args(gamma, lam)?;
    if !(mu0 >= 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need mu0 ≥ 0 and sigma2 ≥ 0, got {mu0}, {sigma2}"
        )));
    }
    if mu0 == 0.0 && sigma2 == 0.0 {
        return Ok(positive_quadratic_root(lam, gamma));
    }
    let g = |d: f64| {
        let u = 1.0 + sigma2 * d;
        let val = d - lam + gamma * (-1.0 / d + sigma2 / u - mu0 / (d * d));
        let der = 1.0
            + gamma * (1.0 / (d * d) - sigma2 * sigma2 / (u * u) + 2.0 * mu0 / (d * d * d));
        (val, der)
    };
    let hi = lam.max(0.0) + 10.0 * 1f64.max(gamma.sqrt()).max((gamma * mu0).cbrt());
    positive_root(g, hi)
}
