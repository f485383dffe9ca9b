mod common;

use common::*;
use matprox::experiments::{empirical_cov, precision_trial, Rng};
use matprox::mm_glasso::{
    default_start, glasso_solve, grad_trace_term, majorant_eval, mm_solve, objective, trace_term, MMConfig,
    NoisyGlassoProblem,
};
use matprox::splitting::{DRConfig, StopReason};
use matprox::symlin::SymMatrix;
use proptest::prelude::*;

fn small_problem(seed: u64, sigma: f64) -> NoisyGlassoProblem {
    let ds = precision_trial(8, 0.05, sigma, 400, seed).unwrap();
    NoisyGlassoProblem::new(empirical_cov(&ds), sigma * sigma, 0.01, 0.05).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), n in 1usize..8, sigma2 in 0.0f64..1.0) {
        let mut rng = Rng::new(seed);
        let prob = NoisyGlassoProblem::new(random_pd(&mut rng, n, 0.05, 2.0), sigma2, 0.0, 0.0).unwrap();
        let c = random_pd(&mut rng, n, 0.2, 3.0);
        let g = grad_trace_term(&prob, &c).unwrap();
        let dir = random_sym(&mut rng, n, 1.0);
        let h = 1e-5;
        let fd = (trace_term(&prob, &c.axpy(h, &dir).unwrap()).unwrap()
            - trace_term(&prob, &c.axpy(-h, &dir).unwrap()).unwrap()) / (2.0 * h);
        let exact = matprox::symlin::inner(&g, &dir).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn majorant_dominates(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = Rng::new(seed);
        let prob = NoisyGlassoProblem::new(
            random_pd(&mut rng, n, 0.0, 2.0),
            rng.uniform_in(0.0, 1.0),
            rng.uniform_in(0.0, 0.3),
            rng.uniform_in(0.0, 0.3),
        ).unwrap();
        let c = random_pd(&mut rng, n, 0.05, 5.0);
        let anchor = random_pd(&mut rng, n, 0.05, 5.0);
        let f = objective(&prob, &c).unwrap();
        prop_assert!(majorant_eval(&prob, &c, &anchor).unwrap() >= f - 1e-9);
        prop_assert_eq!(majorant_eval(&prob, &c, &c).unwrap(), f);
    }
}

#[test]
fn outer_objective_never_increases() {
    for seed in 0..4 {
        let prob = small_problem(seed, 0.3);
        let rep = mm_solve(&prob, &MMConfig::default(), &default_start(&prob).unwrap()).unwrap();
        for w in rep.outer_objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
        assert_eq!(rep.outer_objective.len(), rep.outer_iterations + 1);
        assert_eq!(rep.inner_iterations.len(), rep.outer_iterations);
    }
}

#[test]
fn zero_noise_reduces_to_glasso() {
    // σ = 0 and μ0 = 0: the trace term is linear, so one outer step solves it
    let ds = precision_trial(8, 0.05, 0.0, 400, 1).unwrap();
    let s = empirical_cov(&ds);
    let prob = NoisyGlassoProblem::new(s.clone(), 0.0, 0.0, 0.05).unwrap();
    let cfg = MMConfig::default();
    let mm = mm_solve(&prob, &cfg, &default_start(&prob).unwrap()).unwrap();
    let gl = glasso_solve(&s, 0.05, &cfg.inner).unwrap();
    assert!(fro_dist(&mm.c_final, &gl.c_final) <= 1e-6, "{}", fro_dist(&mm.c_final, &gl.c_final));
    assert!(mm.outer_iterations <= 2);
}

#[test]
fn objective_is_continuous_in_sigma() {
    let ds = precision_trial(6, 0.1, 0.2, 300, 2).unwrap();
    let s = empirical_cov(&ds);
    let mut rng = Rng::new(3);
    let c = random_pd(&mut rng, 6, 0.3, 2.0);
    let at = |sigma2: f64| objective(&NoisyGlassoProblem::new(s.clone(), sigma2, 0.02, 0.05).unwrap(), &c).unwrap();
    let base = at(0.04);
    for h in [1e-4, 1e-6, 1e-8] {
        assert!((at(0.04 + h) - base).abs() <= 100.0 * h * (1.0 + base.abs()));
    }
}

#[test]
fn mm_converges_on_small_instances() {
    let mut converged = 0;
    for seed in 0..5 {
        let prob = small_problem(seed, 0.2);
        let rep = mm_solve(&prob, &MMConfig::default(), &default_start(&prob).unwrap()).unwrap();
        converged += usize::from(rep.stop_reason == StopReason::Tolerance);
        let csv = rep.trace_csv();
        assert_eq!(csv.lines().count(), rep.outer_iterations + 2);
    }
    assert!(converged >= 4);
}

#[test]
fn invalid_configurations_are_rejected() {
    let prob = small_problem(0, 0.1);
    let c0 = default_start(&prob).unwrap();
    let bad = MMConfig { outer_max: 0, ..MMConfig::default() };
    assert!(mm_solve(&prob, &bad, &c0).unwrap_err().is_config());
    let bad = MMConfig { inner: DRConfig { gamma: -1.0, ..DRConfig::default() }, ..MMConfig::default() };
    assert!(mm_solve(&prob, &bad, &c0).unwrap_err().is_config());
    let indefinite = SymMatrix::from_diag(&[1.0; 8]).add_identity(-2.0);
    assert!(matches!(mm_solve(&prob, &MMConfig::default(), &indefinite), Err(matprox::Error::InvalidStart(_))));
}
