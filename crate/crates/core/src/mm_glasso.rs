//! Graphical lasso under additive isotropic noise.
//!
//! With `M = I + σ²C`, the objective over precision matrices `C ≻ 0` is
//!
//! ```text
//! F(C) = log det(C⁻¹ + σ²I) + tr(M⁻¹CS) + μ0·tr(C⁻¹) + μ1‖C‖₁
//! ```
//!
//! The trace term is concave, so replacing it by its tangent at the current
//! iterate gives a convex majorant, minimized by Douglas–Rachford.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::scalarprox::{Divergence, Penalty};
use crate::splitting::{dr_resume, dr_solve, DRConfig, ObjectiveSpec, SolveReport, StopReason};
use crate::symlin::{dense_matmul, eig_sym, inner, spd_inverse, trace, SymMatrix};

/// Data and weights of the noisy graphical lasso.
#[derive(Debug, Clone)]
pub struct NoisyGlassoProblem {
    s: SymMatrix,
    sigma2: f64,
    mu0: f64,
    mu1: f64,
}

impl NoisyGlassoProblem {
    /// `s` may carry negative eigenvalues of rounding size (down to
    /// `−1e-10·max(1, ‖s‖)`); they are clipped to zero.
    pub fn new(s: SymMatrix, sigma2: f64, mu0: f64, mu1: f64) -> Result<Self> {
        for (key, v) in [("sigma2", sigma2), ("mu0", mu0), ("mu1", mu1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be finite and ≥ 0, got {v}")));
            }
        }
        let e = eig_sym(&s)?;
        let scale = e.max_eig().abs().max(1.0);
        if e.min_eig() < -1e-10 * scale {
            return Err(Error::Domain(format!(
                "empirical covariance has eigenvalue {:e}",
                e.min_eig()
            )));
        }
        let s = if e.min_eig() < 0.0 {
            e.map_values(|l| l.max(0.0))
        } else {
            s
        };
        Ok(NoisyGlassoProblem { s, sigma2, mu0, mu1 })
    }

    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    fn g0(&self) -> Penalty {
        if self.mu0 > 0.0 {
            Penalty::InvSchattenP { mu: self.mu0, p: 1.0 }
        } else {
            Penalty::None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMConfig {
    pub inner: DRConfig,
    pub outer_eps: f64,
    pub outer_max: usize,
}

impl Default for MMConfig {
    fn default() -> Self {
        MMConfig {
            inner: DRConfig {
                gamma: 1.0,
                alpha: 1.0,
                eps: 1e-10,
                max_iter: 2000,
            },
            outer_eps: 1e-8,
            outer_max: 20,
        }
    }
}

impl MMConfig {
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if !(self.outer_eps > 0.0) {
            return Err(Error::config("outer_eps", "must be > 0"));
        }
        if self.outer_max == 0 {
            return Err(Error::config("outer_max", "must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MMReport {
    pub c_final: SymMatrix,
    /// Support companion of the last inner solve.
    pub c_sparse: SymMatrix,
    /// `F(C^(0)), F(C^(1)), …`
    pub outer_objective: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    pub outer_iterations: usize,
    pub stop_reason: StopReason,
    /// Whether some inner solve ran out of iterations.
    pub inner_hit_max: bool,
    pub elapsed: Duration,
}

impl MMReport {
    pub fn total_inner_iterations(&self) -> usize {
        self.inner_iterations.iter().sum()
    }

    /// `outer,objective,inner_iterations` rows; row 0 is the start.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("outer,objective,inner_iterations\n");
        for (l, f) in self.outer_objective.iter().enumerate() {
            let inner = if l == 0 { 0 } else { self.inner_iterations[l - 1] };
            s.push_str(&format!("{l},{f:.16e},{inner}\n"));
        }
        s
    }
}

fn check_dim(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<()> {
    if c.n() != prob.n() {
        return Err(Error::DimensionMismatch {
            expected: prob.n(),
            got: c.n(),
        });
    }
    Ok(())
}

fn check_psd(c: &SymMatrix) -> Result<()> {
    let e = eig_sym(c)?;
    if e.min_eig() < -1e-10 * e.max_eig().abs().max(1.0) {
        return Err(Error::Domain(format!(
            "matrix is not positive semidefinite (eigenvalue {:e})",
            e.min_eig()
        )));
    }
    Ok(())
}

/// `(I + σ²C)⁻¹`
fn noise_resolvent(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<SymMatrix> {
    spd_inverse(&c.scale(prob.sigma2).add_identity(1.0))
}

/// `tr((I + σ²C)⁻¹CS)` for PSD `c`.
pub fn trace_term(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<f64> {
    check_dim(prob, c)?;
    check_psd(c)?;
    if prob.sigma2 == 0.0 {
        return inner(c, &prob.s);
    }
    let n = c.n();
    let mc = dense_matmul(n, &noise_resolvent(prob, c)?.to_dense(), &c.to_dense());
    let s = prob.s.to_dense();
    // tr(AS) = Σ_ij A_ij S_ji
    Ok(mc.iter().zip(&s).map(|(a, b)| a * b).sum())
}

/// `∇ tr((I + σ²C)⁻¹CS) = (I + σ²C)⁻¹ S (I + σ²C)⁻¹`.
pub fn grad_trace_term(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<SymMatrix> {
    check_dim(prob, c)?;
    check_psd(c)?;
    if prob.sigma2 == 0.0 {
        return Ok(prob.s.clone());
    }
    let n = c.n();
    let m = noise_resolvent(prob, c)?.to_dense();
    let g = dense_matmul(n, &dense_matmul(n, &m, &prob.s.to_dense()), &m);
    Ok(SymMatrix::from_dense_lenient(n, &g)?.0)
}

/// `Σ −log(λᵢ/(1+σ²λᵢ))` over the eigenvalues of `c`, `+∞` unless `c ≻ 0`.
pub fn f_noisy(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<f64> {
    check_dim(prob, c)?;
    let l = eig_sym(c)?.lambda;
    Ok(f_noisy_spectrum(prob.sigma2, &l))
}

fn f_noisy_spectrum(sigma2: f64, l: &[f64]) -> f64 {
    let div = Divergence::NoisyBurg { sigma2 };
    l.iter().map(|&x| div.value(x)).sum()
}

struct Pieces {
    f: f64,
    g0: f64,
    g1: f64,
}

fn pieces(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<Option<Pieces>> {
    check_dim(prob, c)?;
    let l = eig_sym(c)?.lambda;
    if l.iter().any(|&x| !(x > 0.0)) {
        return Ok(None);
    }
    Ok(Some(Pieces {
        f: f_noisy_spectrum(prob.sigma2, &l),
        g0: prob.mu0 * l.iter().map(|x| 1.0 / x).sum::<f64>(),
        g1: prob.mu1 * c.l1_norm(),
    }))
}

/// `F(C)`; `+∞` unless `c ≻ 0`.
pub fn objective(prob: &NoisyGlassoProblem, c: &SymMatrix) -> Result<f64> {
    match pieces(prob, c)? {
        None => Ok(f64::INFINITY),
        Some(p) => Ok(p.f + trace_term(prob, c)? + p.g0 + p.g1),
    }
}

/// Tangent majorant `G(c | anchor)`: the trace term is replaced by its
/// linearization at `anchor`.
pub fn majorant_eval(prob: &NoisyGlassoProblem, c: &SymMatrix, anchor: &SymMatrix) -> Result<f64> {
    check_dim(prob, anchor)?;
    let p = match pieces(prob, c)? {
        None => return Ok(f64::INFINITY),
        Some(p) => p,
    };
    let t_anchor = trace_term(prob, anchor)?;
    let lin = inner(&grad_trace_term(prob, anchor)?, &c.sub(anchor)?)?;
    Ok(p.f + t_anchor + lin + p.g0 + p.g1)
}

/// `(S + σ²I + δI)⁻¹` with `δ = 10⁻³·tr(S)/n` (or `10⁻³` when `S = 0`).
pub fn default_start(prob: &NoisyGlassoProblem) -> Result<SymMatrix> {
    let n = prob.n() as f64;
    let tr = trace(&prob.s);
    let delta = if tr > 0.0 { 1e-3 * tr / n } else { 1e-3 };
    spd_inverse(&prob.s.add_identity(prob.sigma2 + delta))
}

fn surrogate(prob: &NoisyGlassoProblem, anchor: &SymMatrix) -> Result<ObjectiveSpec> {
    let grad = grad_trace_term(prob, anchor)?;
    let offset = trace_term(prob, anchor)? - inner(&grad, anchor)?;
    Ok(ObjectiveSpec::new(
        Divergence::NoisyBurg { sigma2: prob.sigma2 },
        grad.scale(-1.0),
        prob.g0(),
        prob.mu1,
        false,
    )?
    .with_offset(offset))
}

/// Majorize–minimize with warm-started Douglas–Rachford inner solves.
///
/// The inner objective equals `G(· | C^(ℓ))`, so the inner stopping rule is
/// the relative change of the majorant. If an inner solve stops with
/// `G > F(C^(ℓ))` it is resumed (within the inner budget) until the
/// majorant drops below the current objective. A rise of `F` beyond
/// `1e-12·max(1, |F|)` aborts with [`Error::DescentViolation`].
pub fn mm_solve(prob: &NoisyGlassoProblem, cfg: &MMConfig, c0: &SymMatrix) -> Result<MMReport> {
    cfg.validate()?;
    check_dim(prob, c0)?;
    let start = Instant::now();
    let f0 = objective(prob, c0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidStart(format!("objective at the start is {f0}")));
    }
    let mut c = c0.clone();
    let mut aux = c0.clone();
    let mut f_cur = f0;
    let mut outer_objective = vec![f0];
    let mut inner_iterations = Vec::new();
    let mut inner_hit_max = false;
    let mut stop_reason = StopReason::MaxIter;
    let mut c_sparse = c0.clone();

    for l in 0..cfg.outer_max {
        let wrap = |e: Error| Error::Inner {
            outer: l,
            source: Box::new(e),
        };
        let spec = surrogate(prob, &c).map_err(wrap)?;
        let slack = 1e-12 * f_cur.abs().max(1.0);
        let mut rep = dr_resume(&spec, &cfg.inner, &aux).map_err(wrap)?;
        let mut used = rep.iterations;
        while rep.final_objective() > f_cur + slack && used < cfg.inner.max_iter {
            let budget = DRConfig {
                max_iter: cfg.inner.max_iter - used,
                ..cfg.inner
            };
            rep = dr_resume(&spec, &budget, &rep.aux).map_err(wrap)?;
            used += rep.iterations;
        }
        inner_hit_max |= used >= cfg.inner.max_iter;
        inner_iterations.push(used);

        let c_next = rep.c_final;
        let f_next = objective(prob, &c_next).map_err(wrap)?;
        if !(f_next <= f_cur + slack) {
            return Err(Error::DescentViolation {
                outer: l,
                before: f_cur,
                after: f_next,
            });
        }
        outer_objective.push(f_next);
        aux = rep.aux;
        c_sparse = rep.c_sparse;
        c = c_next;
        let rel = (f_next - f_cur).abs() / f_cur.abs().max(1e-300);
        f_cur = f_next;
        if rel <= cfg.outer_eps {
            stop_reason = StopReason::Tolerance;
            break;
        }
    }
    Ok(MMReport {
        c_final: c,
        c_sparse,
        outer_iterations: inner_iterations.len(),
        outer_objective,
        inner_iterations,
        stop_reason,
        inner_hit_max,
        elapsed: start.elapsed(),
    })
}

fn baseline(s: &SymMatrix, g0: Penalty, mu1: f64, cfg: &DRConfig) -> Result<SolveReport> {
    let prob = NoisyGlassoProblem::new(s.clone(), 0.0, 0.0, mu1)?;
    let spec = ObjectiveSpec::new(Divergence::Burg, s.scale(-1.0), g0, mu1, false)?;
    dr_solve(&spec, cfg, &default_start(&prob)?)
}

/// `min −log det C + tr(CS) + μ1‖C‖₁` by Douglas–Rachford.
pub fn glasso_solve(s: &SymMatrix, mu1: f64, cfg: &DRConfig) -> Result<SolveReport> {
    baseline(s, Penalty::None, mu1, cfg)
}

/// `min −log det C + tr(CS) + μ0·tr(C⁻¹) + μ1‖C‖₁`, noise ignored.
pub fn dr_noisy_baseline(s: &SymMatrix, mu0: f64, mu1: f64, cfg: &DRConfig) -> Result<SolveReport> {
    let g0 = if mu0 > 0.0 {
        Penalty::InvSchattenP { mu: mu0, p: 1.0 }
    } else {
        Penalty::None
    };
    baseline(s, g0, mu1, cfg)
}
