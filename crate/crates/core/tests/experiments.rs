use matprox::experiments::{
    covariance_trial, empirical_cov, gen_block_lowrank_cov, gen_sparse_precision, metrics, precision_trial,
    raw_estimator, sample_gaussian, BlockSpec, Rng,
};
use matprox::symlin::{eig_sym, fro_norm, SymMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metrics_agree_with_counting(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let sparse = |rng: &mut Rng| SymMatrix::from_fn(6, |_, _| if rng.uniform() < 0.5 { 0.0 } else { rng.uniform_in(-1.0, 1.0) });
        let truth = sparse(&mut rng).add_identity(2.0);
        let est = sparse(&mut rng);
        let m = metrics(&est, &truth, 1e-8).unwrap();
        let (mut tp, mut p, mut fp, mut z, mut num, mut den) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..6 {
            for j in 0..6 {
                let (t, e) = (truth.get(i, j), est.get(i, j));
                if t != 0.0 { p += 1.0; if e != 0.0 { tp += 1.0; } } else { z += 1.0; if e != 0.0 { fp += 1.0; } }
                num += (e - t) * (e - t);
                den += t * t;
            }
        }
        prop_assert_eq!(m.tpr, tp / p);
        prop_assert_eq!(m.fpr, if z == 0.0 { 0.0 } else { fp / z });
        prop_assert!((m.rmse - num / den).abs() <= 1e-14 * (1.0 + num / den));
    }

    #[test]
    fn blocks_have_rank_one(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = Rng::new(seed);
        let sizes: Vec<usize> = (0..k).map(|_| 1 + rng.below(6)).collect();
        let spec = BlockSpec::new(sizes.clone()).unwrap();
        let y = gen_block_lowrank_cov(&spec, seed);
        let e = eig_sym(&y).unwrap();
        let rank = e.lambda.iter().filter(|&&l| l > 1e-10).count();
        prop_assert_eq!(rank, k);
        prop_assert!(e.min_eig() >= -1e-12);
        let mut start = 0;
        for &r in &sizes {
            for i in start..start + r {
                for j in 0..y.n() {
                    if j < start || j >= start + r {
                        prop_assert_eq!(y.get(i, j), 0.0);
                    }
                }
            }
            start += r;
        }
    }

    #[test]
    fn precision_is_well_conditioned(seed in any::<u64>(), n in 2usize..20, p in 0.01f64..0.3) {
        let c = gen_sparse_precision(n, p, seed).unwrap();
        prop_assert!(eig_sym(&c).unwrap().min_eig() >= 0.1 - 1e-10);
    }

    #[test]
    fn empirical_covariance_is_psd(seed in any::<u64>(), n in 1usize..8, sigma in 0.0f64..1.0) {
        let mut rng = Rng::new(seed);
        let y = gen_block_lowrank_cov(&BlockSpec::even(n, 1 + rng.below(n)).unwrap(), seed);
        let ds = sample_gaussian(&y, sigma, 1 + rng.below(20), seed).unwrap();
        prop_assert!(eig_sym(&empirical_cov(&ds)).unwrap().min_eig() >= -1e-12);
    }
}

#[test]
fn empirical_covariance_concentrates() {
    let y = SymMatrix::from_rows(&[vec![1.0, 0.4, 0.0], vec![0.4, 0.8, -0.2], vec![0.0, -0.2, 0.5]]).unwrap();
    let sigma = 0.3;
    let n = 100_000;
    let ds = sample_gaussian(&y, sigma, n, 17).unwrap();
    let target = y.add_identity(sigma * sigma);
    let err = fro_norm(&empirical_cov(&ds).sub(&target).unwrap());
    assert!(err <= 5.0 / (n as f64).sqrt() * fro_norm(&target), "{err}");
}

#[test]
fn generators_are_pure_functions_of_the_seed() {
    let spec = BlockSpec::new(vec![3, 2]).unwrap();
    assert_eq!(covariance_trial(&spec, 0.1, 7, 4).unwrap(), covariance_trial(&spec, 0.1, 7, 4).unwrap());
    assert_ne!(covariance_trial(&spec, 0.1, 7, 4).unwrap(), covariance_trial(&spec, 0.1, 7, 5).unwrap());
    assert_eq!(precision_trial(6, 0.1, 0.2, 5, 9).unwrap(), precision_trial(6, 0.1, 0.2, 5, 9).unwrap());
}

#[test]
fn full_scale_precision_pattern() {
    let c = gen_sparse_precision(100, 1e-3, 0).unwrap();
    let off = (0..100).flat_map(|i| (0..100).map(move |j| (i, j))).filter(|&(i, j)| i != j && c.get(i, j) != 0.0).count();
    assert_eq!(off, 20);
    let spec = BlockSpec::new(vec![14, 36, 18, 10, 22]).unwrap();
    assert_eq!(spec.n(), 100);
    let e = eig_sym(&gen_block_lowrank_cov(&spec, 0)).unwrap();
    assert_eq!(e.lambda.iter().filter(|&&l| l > 1e-10).count(), 5);
}

#[test]
fn raw_estimator_clips_and_shifts() {
    let s = SymMatrix::from_diag(&[1.0, 0.005, 0.5]);
    let r = raw_estimator(&s, 0.1).unwrap();
    let mut d = r.diag();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(d[0], 0.0);
    assert!((d[1] - 0.49).abs() < 1e-12 && (d[2] - 0.99).abs() < 1e-12);
}

#[test]
fn invalid_generator_inputs() {
    assert!(gen_sparse_precision(5, 0.0, 1).unwrap_err().is_config());
    assert!(sample_gaussian(&SymMatrix::identity(2), -1.0, 3, 1).unwrap_err().is_config());
    assert!(sample_gaussian(&SymMatrix::identity(2), 0.1, 0, 1).unwrap_err().is_config());
    assert!(sample_gaussian(&SymMatrix::from_diag(&[1.0, -1.0]), 0.1, 3, 1).is_err());
}
