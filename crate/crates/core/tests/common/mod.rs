//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use matprox::experiments::Rng;
use matprox::scalarprox::{Divergence, Penalty, ScalarKernel};
use matprox::symlin::SymMatrix;

/// Golden-section minimization of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut best = (a, f(a));
    for x in [b, c, d] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Grid search followed by golden refinement of every discrete local
/// minimum, plus the given extra candidates.
pub fn minimize_1d(f: &dyn Fn(f64) -> f64, xs: &mut Vec<f64>, extra: &[f64]) -> (f64, f64) {
    xs.retain(|x| x.is_finite());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (f64::NAN, f64::INFINITY);
    let mut consider = |x: f64, v: f64| {
        if v < best.1 {
            best = (x, v);
        }
    };
    for &x in extra {
        if x.is_finite() {
            consider(x, f(x));
        }
    }
    let m = xs.len();
    let mut locals: Vec<usize> = (0..m)
        .filter(|&i| {
            let left = i == 0 || vals[i] <= vals[i - 1];
            let right = i + 1 == m || vals[i] <= vals[i + 1];
            vals[i].is_finite() && left && right
        })
        .collect();
    locals.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    locals.truncate(64);
    for i in locals {
        consider(xs[i], vals[i]);
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(m - 1)];
        let (x, v) = golden(f, a, b);
        consider(x, v);
    }
    best
}

fn penalty_reach(pen: &Penalty, gamma: f64) -> f64 {
    match *pen {
        Penalty::InvSchattenP { mu, p } => 2.0 * (p * gamma * mu).powf(1.0 / (p + 2.0)) + gamma * mu * p,
        _ => 0.0,
    }
}

fn box_points(pen: &Penalty) -> Vec<f64> {
    match *pen {
        Penalty::EigBox { alpha, beta } => vec![alpha, beta],
        _ => vec![],
    }
}

/// Search interval known to contain the scalar prox.
pub fn oracle_interval(k: &ScalarKernel, gamma: f64, lam: f64) -> (f64, f64) {
    let reach = penalty_reach(&k.penalty(), gamma);
    match k.divergence() {
        Divergence::HalfSquare => (-lam.abs() - 1.0, lam.abs() + 1.0 + reach),
        _ => {
            let mu_p = match k.penalty() {
                Penalty::SchattenP { mu, p } | Penalty::InvSchattenP { mu, p } => mu * p,
                _ => 0.0,
            };
            (0.0, lam.max(0.0) + gamma + gamma * mu_p + gamma.sqrt() + 2.0 + reach)
        }
    }
}

/// `min_d ½(d−λ)² + γ(φ+ψ)(d)`, optionally over `d ≥ 0`, by brute force.
pub fn scalar_min(k: &ScalarKernel, gamma: f64, lam: f64, nonneg: bool, grid: usize) -> (f64, f64) {
    let f = |d: f64| {
        if nonneg && d < 0.0 {
            f64::INFINITY
        } else {
            k.objective(gamma, lam, d)
        }
    };
    let (lo, hi) = oracle_interval(k, gamma, lam);
    let lo = if nonneg { lo.max(0.0) } else { lo };
    let mut xs: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    if k.divergence().is_positive_domain() || nonneg {
        let (a, b) = (1e-12f64.ln(), hi.max(1e-11).ln());
        xs.extend((0..=grid).map(|i| (a + (b - a) * i as f64 / grid as f64).exp()));
    }
    let mut extra = vec![0.0, lam];
    for b in box_points(&k.penalty()) {
        extra.push(b);
        extra.push(lam.clamp(b.min(lam), b.max(lam)));
    }
    if let Penalty::EigBox { alpha, beta } = k.penalty() {
        extra.push(lam.clamp(alpha, beta));
    }
    minimize_1d(&f, &mut xs, &extra)
}

/// Two-dimensional zooming grid search on a box, for convex objectives.
/// Zoomed boxes are clipped to the original one, so its faces stay on the grid.
pub fn minimize_2d(f: &dyn Fn(f64, f64) -> f64, lo0: [f64; 2], hi0: [f64; 2]) -> (f64, f64, f64) {
    let (mut lo, mut hi) = (lo0, hi0);
    let g = 40;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for _ in 0..14 {
        let h = [(hi[0] - lo[0]) / g as f64, (hi[1] - lo[1]) / g as f64];
        for i in 0..=g {
            for j in 0..=g {
                let (x, y) = (lo[0] + h[0] * i as f64, lo[1] + h[1] * j as f64);
                let v = f(x, y);
                if v < best.2 {
                    best = (x, y, v);
                }
            }
        }
        lo = [(best.0 - 2.0 * h[0]).max(lo0[0]), (best.1 - 2.0 * h[1]).max(lo0[1])];
        hi = [(best.0 + 2.0 * h[0]).min(hi0[0]), (best.1 + 2.0 * h[1]).min(hi0[1])];
    }
    best
}

/// Random symmetric matrix with entries `U[−scale, scale]`.
pub fn random_sym(rng: &mut Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.uniform_in(-scale, scale))
}

/// Random positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_pd(rng: &mut Rng, n: usize, lo: f64, hi: f64) -> SymMatrix {
    let q = random_orthogonal(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.uniform_in(lo, hi)).collect();
    SymMatrix::from_fn(n, |i, j| (0..n).map(|k| q[i][k] * d[k] * q[j][k]).sum())
}

/// Gram–Schmidt on a Gaussian matrix; rows of the result are orthonormal.
pub fn random_orthogonal(rng: &mut Rng, n: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for u in &q {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            q.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    q
}

pub const SPECIAL_P: [f64; 6] = [1.0, 4.0 / 3.0, 1.5, 2.0, 3.0, 4.0];

/// Names of the penalty families, in the order used by [`draw_penalty`].
pub const PENALTY_FAMILIES: [&str; 11] = [
    "none",
    "nuclear",
    "fronorm",
    "frosquared",
    "schatten",
    "invschatten",
    "froball",
    "eigbox",
    "rank",
    "cauchy",
    "spectral",
];

pub fn draw_penalty(rng: &mut Rng, family: usize, div: Divergence) -> Penalty {
    let mu = rng.uniform_in(0.05, 2.0);
    let p_schatten = if rng.uniform() < 0.5 {
        SPECIAL_P[rng.below(SPECIAL_P.len())]
    } else {
        rng.uniform_in(1.0, 4.0)
    };
    match family {
        0 => Penalty::None,
        1 => Penalty::Nuclear { mu },
        2 => Penalty::FroNorm { mu },
        3 => Penalty::FroSquared { mu },
        4 => Penalty::SchattenP { mu, p: p_schatten },
        5 => {
            let p = if matches!(div, Divergence::NoisyBurg { .. }) {
                1.0
            } else if rng.uniform() < 0.3 {
                SPECIAL_P[rng.below(SPECIAL_P.len())]
            } else {
                rng.uniform_in(0.2, 4.0)
            };
            Penalty::InvSchattenP { mu, p }
        }
        6 => Penalty::FroBall {
            alpha: rng.uniform_in(0.0, 3.0),
        },
        7 => {
            let alpha = rng.uniform_in(-2.0, 2.0);
            Penalty::EigBox {
                alpha,
                beta: alpha.max(0.0) + rng.uniform_in(0.05, 3.0),
            }
        }
        8 => Penalty::Rank { mu },
        9 => Penalty::Cauchy {
            mu,
            eps: rng.uniform_in(0.01, 1.0),
        },
        10 => Penalty::SpectralNorm { mu },
        _ => unreachable!(),
    }
}

pub fn draw_divergence(rng: &mut Rng, which: usize) -> Divergence {
    match which {
        0 => Divergence::HalfSquare,
        1 => Divergence::Burg,
        2 => Divergence::Shannon,
        _ => Divergence::NoisyBurg {
            sigma2: rng.uniform_in(0.0, 1.0),
        },
    }
}

/// Every supported (divergence, penalty family) pair.
pub fn supported_families() -> Vec<(usize, usize)> {
    let mut rng = Rng::new(0);
    let mut out = Vec::new();
    for d in 0..4 {
        for f in 0..PENALTY_FAMILIES.len() {
            let div = draw_divergence(&mut rng, d);
            let pen = draw_penalty(&mut rng, f, div);
            if ScalarKernel::new(div, pen).is_ok() {
                out.push((d, f));
            }
        }
    }
    out
}

pub fn family_name(d: usize, f: usize) -> String {
    let div = ["halfsquare", "burg", "shannon", "noisyburg"][d];
    format!("{div}+{}", PENALTY_FAMILIES[f])
}

/// A random kernel of the given family, redrawn until it validates.
pub fn draw_kernel(rng: &mut Rng, d: usize, f: usize) -> ScalarKernel {
    loop {
        let div = draw_divergence(rng, d);
        if let Ok(k) = ScalarKernel::new(div, draw_penalty(rng, f, div)) {
            return k;
        }
    }
}

/// Dense `n×n` product of row-major matrices.
pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    c
}

/// `‖a − b‖_F`
pub fn fro_dist(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a.get(i, j) - b.get(i, j)).powi(2);
        }
    }
    s.sqrt()
}
