//! Synthetic covariance and precision models, sampling and quality metrics.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::symlin::{eig_sym, fro_norm, spd_inverse, SymMatrix};

/// Identity of the random stream, recorded in dataset metadata.
pub const RNG_NAME: &str = "chacha20-boxmuller";

/// Mask XORed into the seed of the sampling stream in two-stage trials.
pub const SAMPLE_SEED_MASK: u64 = 0x9E37_79B9_7F4A_7C15;

/// ChaCha20 seeded from a `u64`, with Box–Muller normals.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            inner: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform on `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    block_sizes: Vec<usize>,
}

impl BlockSpec {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() {
            return Err(Error::config("blocks", "need at least one block"));
        }
        if block_sizes.contains(&0) {
            return Err(Error::config("blocks", "block sizes must be ≥ 1"));
        }
        Ok(BlockSpec { block_sizes })
    }

    /// `k` blocks splitting `n` as evenly as possible.
    pub fn even(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::config("blocks", format!("cannot split {n} into {k} blocks")));
        }
        Self::new((0..k).map(|j| n / k + usize::from(j < n % k)).collect())
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

/// Samples and the ground truth they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Covariance, or precision for the sparse-precision scenario.
    pub y_star: SymMatrix,
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
    pub sigma: f64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y_star.n()
    }
}

/// Block-diagonal covariance whose `j`-th block is `a aᵀ`, `a ~ U[−1, 1]^{r_j}`.
pub fn gen_block_lowrank_cov(spec: &BlockSpec, seed: u64) -> SymMatrix {
    let mut rng = Rng::new(seed);
    let mut y = SymMatrix::zeros(spec.n());
    let mut start = 0;
    for &r in spec.block_sizes() {
        let a: Vec<f64> = (0..r).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        for i in 0..r {
            for j in i..r {
                y.set(start + i, start + j, a[i] * a[j]);
            }
        }
        start += r;
    }
    y
}

/// Sparse positive definite precision matrix.
///
/// `round(p·n²)` distinct off-diagonal pairs receive `±U[0.5, 1]`, mirrored
/// across the diagonal. The diagonal is one, then shifted so that the
/// smallest eigenvalue is at least `0.1`.
pub fn gen_sparse_precision(n: usize, p: f64, seed: u64) -> Result<SymMatrix> {
    if n == 0 {
        return Err(Error::config("n", "must be ≥ 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::config("density", format!("must lie in ]0, 1[, got {p}")));
    }
    let mut rng = Rng::new(seed);
    let pairs = n * (n - 1) / 2;
    let target = ((p * (n * n) as f64).round() as usize).min(pairs);
    let mut c = SymMatrix::identity(n);
    let mut placed = 0;
    while placed < target {
        let i = rng.below(n);
        let j = rng.below(n);
        if i == j || c.get(i, j) != 0.0 {
            continue;
        }
        let mag = rng.uniform_in(0.5, 1.0);
        let v = if rng.uniform() < 0.5 { -mag } else { mag };
        c.set(i, j, v);
        placed += 1;
    }
    let min = eig_sym(&c)?.min_eig();
    if min < 0.1 {
        c = c.add_identity(0.1 - min);
    }
    Ok(c)
}

/// Symmetric square root of the PSD part of `y`.
fn psd_sqrt(y: &SymMatrix) -> Result<Vec<f64>> {
    Ok(eig_sym(y)?.map_values(|l| l.max(0.0).sqrt()).to_dense())
}

/// `N` draws of `x = Y*^{1/2} z + σ e` with `z, e ~ N(0, I)`.
pub fn sample_gaussian(y_star: &SymMatrix, sigma: f64, n_samples: usize, seed: u64) -> Result<Dataset> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::config("sigma", format!("must be finite and ≥ 0, got {sigma}")));
    }
    if n_samples == 0 {
        return Err(Error::config("samples", "must be ≥ 1"));
    }
    let e = eig_sym(y_star)?;
    if e.min_eig() < -1e-10 * e.max_eig().abs().max(1.0) {
        return Err(Error::Domain("ground truth is not positive semidefinite".into()));
    }
    let n = y_star.n();
    let root = psd_sqrt(y_star)?;
    let mut rng = Rng::new(seed);
    let mut samples = Vec::with_capacity(n_samples);
    let mut z = vec![0.0; n];
    for _ in 0..n_samples {
        z.iter_mut().for_each(|v| *v = rng.normal());
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let signal: f64 = (0..n).map(|k| root[i * n + k] * z[k]).sum();
                signal + sigma * rng.normal()
            })
            .collect();
        samples.push(x);
    }
    Ok(Dataset {
        y_star: y_star.clone(),
        samples,
        seed,
        sigma,
    })
}

/// `S = (1/N) Σ x xᵀ`
pub fn empirical_cov(ds: &Dataset) -> SymMatrix {
    let n = ds.n();
    let mut s = SymMatrix::zeros(n);
    for x in &ds.samples {
        for i in 0..n {
            for j in i..n {
                s.set(i, j, s.get(i, j) + x[i] * x[j]);
            }
        }
    }
    s.scale(1.0 / ds.samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tpr: f64,
    pub fpr: f64,
    pub rmse: f64,
}

/// Support recovery over all `n²` entries, and `‖est − truth‖²_F / ‖truth‖²_F`.
///
/// An entry belongs to a support when its magnitude exceeds `support_tol`.
/// A rate whose denominator is empty is reported as zero.
pub fn metrics(estimate: &SymMatrix, truth: &SymMatrix, support_tol: f64) -> Result<Metrics> {
    if estimate.n() != truth.n() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            got: estimate.n(),
        });
    }
    let norm = fro_norm(truth);
    if norm == 0.0 {
        return Err(Error::InvalidInput("rmse is undefined for a zero ground truth".into()));
    }
    let n = truth.n();
    let (mut tp, mut pos, mut fp, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..n {
        for j in 0..n {
            let hit = estimate.get(i, j).abs() > support_tol;
            if truth.get(i, j).abs() > support_tol {
                pos += 1;
                tp += usize::from(hit);
            } else {
                neg += 1;
                fp += usize::from(hit);
            }
        }
    }
    let rate = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let diff = fro_norm(&estimate.sub(truth)?);
    Ok(Metrics {
        tpr: rate(tp, pos),
        fpr: rate(fp, neg),
        rmse: (diff / norm).powi(2),
    })
}

/// `S − σ²I` with negative eigenvalues set to zero.
pub fn raw_estimator(s: &SymMatrix, sigma: f64) -> Result<SymMatrix> {
    Ok(eig_sym(&s.add_identity(-sigma * sigma))?.map_values(|l| l.max(0.0)))
}

/// Low-rank covariance trial: truth from `seed`, samples from the masked seed.
pub fn covariance_trial(spec: &BlockSpec, sigma: f64, n_samples: usize, seed: u64) -> Result<Dataset> {
    let y = gen_block_lowrank_cov(spec, seed);
    let mut ds = sample_gaussian(&y, sigma, n_samples, seed ^ SAMPLE_SEED_MASK)?;
    ds.seed = seed;
    Ok(ds)
}

/// Sparse precision trial; `y_star` of the result is the precision matrix.
pub fn precision_trial(n: usize, density: f64, sigma: f64, n_samples: usize, seed: u64) -> Result<Dataset> {
    let c = gen_sparse_precision(n, density, seed)?;
    let cov = spd_inverse(&c)?;
    let mut ds = sample_gaussian(&cov, sigma, n_samples, seed ^ SAMPLE_SEED_MASK)?;
    ds.y_star = c;
    ds.seed = seed;
    Ok(ds)
}

/// Estimators compared on precision trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mm,
    Glasso,
    DrNoisy,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mm, Method::Glasso, Method::DrNoisy];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mm => "mm",
            Method::Glasso => "glasso",
            Method::DrNoisy => "dr-noisy",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}` (mm, glasso, dr-noisy)")))
    }
}
