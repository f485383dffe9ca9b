//! Douglas–Rachford splitting for
//! `min_C f(C) − ⟨T, C⟩ + g0(C) + μ1‖C‖₁ (+ ι_{C ⪰ 0})`.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::scalarprox::{soft, Divergence, Penalty, ScalarKernel};
use crate::spectralprox::{clean_spectrum, prox_eigenvalues};
use crate::symlin::{eig_sym, fro_norm, inner, SymMatrix};

/// The problem solved by [`dr_solve`]. `offset` is a constant added to every
/// objective value; it does not change the minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub divergence: Divergence,
    pub t: SymMatrix,
    pub g0: Penalty,
    pub mu1: f64,
    pub psd: bool,
    pub offset: f64,
}

impl ObjectiveSpec {
    pub fn new(divergence: Divergence, t: SymMatrix, g0: Penalty, mu1: f64, psd: bool) -> Result<Self> {
        let spec = ObjectiveSpec {
            divergence,
            t,
            g0,
            mu1,
            psd,
            offset: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn kernel(&self) -> Result<ScalarKernel> {
        ScalarKernel::new(self.divergence, self.g0)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.kernel()?;
        if !(self.mu1 >= 0.0 && self.mu1.is_finite()) {
            return Err(Error::config("mu1", format!("must be finite and ≥ 0, got {}", self.mu1)));
        }
        if self.psd && !k.is_separable() {
            return Err(Error::config("psd", "psd constraint needs a separable g0"));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidInput("non-finite entry in T".into()));
        }
        Ok(())
    }
}

/// Step size, relaxation and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DRConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for DRConfig {
    fn default() -> Self {
        DRConfig {
            gamma: 1.0,
            alpha: 1.5,
            eps: 1e-8,
            max_iter: 2000,
        }
    }
}

impl DRConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::config("alpha", format!("must lie in ]0, 2[, got {}", self.alpha)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::config("eps", format!("must be > 0, got {}", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIter,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// The shadow iterate `C^{k+½}`, output of the spectral prox.
    pub c_final: SymMatrix,
    /// `prox_{γ g1}(2C^{k+½} − C^k)`; equal to `c_final` at a fixed point
    /// but with exact zeros, so it is the one to read supports from.
    pub c_sparse: SymMatrix,
    /// Objective at `C^{k+½}` for every iteration.
    pub objective_trace: Vec<f64>,
    /// `‖C^{k+1} − C^k‖_F` for every iteration.
    pub fixed_point_residuals: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub elapsed: Duration,
    /// The governing sequence `C^k` that produced `c_final`; feeding it back
    /// as the start resumes the iteration.
    pub aux: SymMatrix,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// `iteration,objective,residual` rows.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,objective,residual\n");
        for (k, (f, r)) in self.objective_trace.iter().zip(&self.fixed_point_residuals).enumerate() {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", k + 1, f, r));
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "iterations={}\nstop_reason={}\nfinal_objective={:.16e}\nfinal_residual={:.16e}\nseconds={:.6}\n",
            self.iterations,
            self.stop_reason,
            self.final_objective(),
            self.fixed_point_residuals.last().copied().unwrap_or(f64::NAN),
            self.elapsed.as_secs_f64()
        )
    }
}

/// Entrywise soft thresholding, diagonal included.
pub fn prox_l1_matrix(tau: f64, m: &SymMatrix) -> SymMatrix {
    if tau == 0.0 {
        return m.clone();
    }
    m.map(|x| soft(tau, x))
}

/// `f(C) − ⟨T, C⟩ + g0(C) + μ1‖C‖₁ + offset`, `+∞` outside the domain.
pub fn objective_eval(spec: &ObjectiveSpec, c: &SymMatrix) -> Result<f64> {
    let k = spec.kernel()?;
    if c.n() != spec.t.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.t.n(),
            got: c.n(),
        });
    }
    let l = clean_spectrum(c)?;
    if spec.psd && l.iter().any(|&x| x < 0.0) {
        return Ok(f64::INFINITY);
    }
    let v = k.eval_vec(&l);
    if v == f64::INFINITY {
        return Ok(v);
    }
    Ok(v - inner(&spec.t, c)? + spec.mu1 * c.l1_norm() + spec.offset)
}

/// Runs Douglas–Rachford from `c0`.
///
/// Each iteration diagonalizes `C^k + γT`, applies the scalar prox of
/// `γ(φ+ψ)` (clipped at zero when `psd`), and relaxes toward the
/// soft-thresholded reflection. Stops when the relative change of the
/// objective at the shadow iterate is at most `eps`.
pub fn dr_solve(spec: &ObjectiveSpec, cfg: &DRConfig, c0: &SymMatrix) -> Result<SolveReport> {
    spec.validate()?;
    let f0 = objective_eval(spec, c0)?;
    if !f0.is_finite() {
        return Err(Error::InvalidStart(format!("objective at the start is {f0}")));
    }
    dr_resume(spec, cfg, c0)
}

/// [`dr_solve`] without the start check, for warm starts where `c0` is the
/// governing sequence of an earlier run rather than a feasible point.
pub fn dr_resume(spec: &ObjectiveSpec, cfg: &DRConfig, c0: &SymMatrix) -> Result<SolveReport> {
    cfg.validate()?;
    let kernel = spec.kernel()?;
    if c0.n() != spec.t.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.t.n(),
            got: c0.n(),
        });
    }
    if spec.psd && !kernel.is_separable() {
        return Err(Error::config("psd", "psd constraint needs a separable g0"));
    }
    let start = Instant::now();
    let (gamma, alpha) = (cfg.gamma, cfg.alpha);
    let tau = gamma * spec.mu1;

    let mut c = c0.clone();
    let mut objective_trace = Vec::new();
    let mut residuals = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    let mut last = None;

    for k in 0..cfg.max_iter {
        let e = eig_sym(&c.axpy(gamma, &spec.t)?)?;
        let d = prox_eigenvalues(&kernel, gamma, &e.lambda, spec.psd)?;
        let c_half = e.with_values(&d)?;
        let f = kernel.eval_vec(&d) - inner(&spec.t, &c_half)? + spec.mu1 * c_half.l1_norm()
            + spec.offset;

        let z = prox_l1_matrix(tau, &c_half.scale(2.0).sub(&c)?);
        let c_next = c.axpy(alpha, &z.sub(&c_half)?)?;
        if !c_next.is_finite() || f.is_nan() {
            return Err(Error::Domain(format!("iterate became non-finite at iteration {k}")));
        }
        residuals.push(fro_norm(&c_next.sub(&c)?));

        let converged = match objective_trace.last() {
            Some(&prev) => {
                let prev: f64 = prev;
                (f - prev).abs() / prev.abs().max(1e-300) <= cfg.eps
            }
            None => false,
        };
        objective_trace.push(f);
        let aux = std::mem::replace(&mut c, c_next);
        last = Some((c_half, z, aux));
        if converged {
            stop_reason = StopReason::Tolerance;
            break;
        }
    }

    let (c_final, c_sparse, aux) = last.expect("max_iter ≥ 1");
    Ok(SolveReport {
        c_final,
        c_sparse,
        iterations: objective_trace.len(),
        objective_trace,
        fixed_point_residuals: residuals,
        stop_reason,
        elapsed: start.elapsed(),
        aux,
    })
}
