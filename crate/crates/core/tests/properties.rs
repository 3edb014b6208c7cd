//! Randomized invariants.

mod common;

use funcboost::boost::{adaboost_scores, logitboost_scores};
use funcboost::learners::{
    fit_componentwise, fit_stump, hat_matrix, penalized_df, Learner, LearnerSpec, TargetKind,
};
use funcboost::linalg::symmetric_eigenvalues;
use funcboost::{
    fit_fof, kfold, Algorithm, BasisSystem, BoostConfig, BoostedModel, FunctionalDataSet,
    OutputKind, ResampleMode, Response,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn sized_matrix(
    rows: std::ops::RangeInclusive<usize>,
    cols: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = DMatrix<f64>> {
    (rows, cols).prop_flat_map(|(r, c)| matrix(r, c))
}

fn labels(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::bool::ANY, n)
        .prop_map(|b| b.into_iter().map(|x| if x { 1.0 } else { -1.0 }).collect())
}

fn basis() -> impl Strategy<Value = BasisSystem<f64>> {
    prop_oneof![
        (1usize..=41, -2.0..0.0f64, 0.5..3.0f64).prop_map(|(k, a, w)| BasisSystem::fourier(
            k,
            a,
            a + w
        )
        .unwrap()),
        (1usize..=8, -2.0..0.0f64, 0.5..3.0f64).prop_map(|(k, a, w)| BasisSystem::polynomial(
            k,
            a,
            a + w
        )
        .unwrap()),
        (1usize..=4, 0usize..=12, -2.0..0.0f64, 0.5..3.0f64).prop_map(|(d, extra, a, w)| {
            BasisSystem::bspline_uniform(d + 1 + extra, d, a, a + w).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_and_penalty_are_symmetric_psd(b in basis(), order in 0usize..=2) {
        prop_assume!(b.max_derivative().is_none_or(|d| order <= d));
        let r = b.penalty_matrix(order).unwrap();
        let scale = r.amax().max(1e-300);
        prop_assert!((&r - r.transpose()).amax() <= 1e-12 * scale.max(1.0));
        let eig = symmetric_eigenvalues(&r);
        let top = eig.iter().cloned().fold(0.0, f64::max);
        prop_assert!(eig.iter().all(|&e| e >= -1e-9 * top));
    }

    #[test]
    fn stump_weight_scale_invariance(
        z in sized_matrix(2..=15, 1..=3),
        scale in 0.01..100.0f64,
        seed in any::<u64>(),
    ) {
        let n = z.nrows();
        let t: Vec<f64> = (0..n).map(|i| if (seed >> (i % 64)) & 1 == 1 { 1.0 } else { -1.0 }).collect();
        for kind in [TargetKind::Classification, TargetKind::Regression] {
            let a = fit_stump(&z, &t, &vec![1.0; n], kind, 0.0).unwrap();
            let b = fit_stump(&z, &t, &vec![scale; n], kind, 0.0).unwrap();
            prop_assert_eq!((a.feature, a.threshold), (b.feature, b.threshold));
        }
    }

    #[test]
    fn stump_partition_survives_monotone_transform(
        z in sized_matrix(2..=15, 1..=3),
        t in prop::collection::vec(-2.0..2.0f64, 15),
        w in prop::collection::vec(0.1..2.0f64, 15),
    ) {
        let n = z.nrows();
        let (t, w) = (&t[..n], &w[..n]);
        let warped = z.map(|v| v.powi(3) + 2.0 * v);
        let a = fit_stump(&z, t, w, TargetKind::Regression, 0.0).unwrap();
        let b = fit_stump(&warped, t, w, TargetKind::Regression, 0.0).unwrap();
        prop_assert_eq!(a.feature, b.feature);
        let side = |m: &DMatrix<f64>, s: &funcboost::learners::Stump<f64>| {
            (0..n).map(|i| m[(i, s.feature)] <= s.threshold).collect::<Vec<_>>()
        };
        prop_assert_eq!(side(&z, &a), side(&warped, &b));
    }

    #[test]
    fn hat_matrix_at_zero_penalty_is_a_projection(z in sized_matrix(6..=15, 1..=5)) {
        let k = z.ncols();
        prop_assume!(z.clone().svd(false, false).singular_values.min() > 1e-3);
        let s = hat_matrix(&z, 0.0, &DMatrix::identity(k, k)).unwrap();
        prop_assert!((&s * &s - &s).amax() <= 1e-8);
        prop_assert!((&s - s.transpose()).amax() <= 1e-10);
        prop_assert!((s.trace() - k as f64).abs() <= 1e-6);
    }

    #[test]
    fn df_decreases_with_lambda(z in sized_matrix(6..=15, 2..=5)) {
        let k = z.ncols();
        let r = DMatrix::identity(k, k);
        let dfs: Vec<f64> = [0.01, 0.1, 1.0, 10.0, 100.0].iter().map(|&l| penalized_df(&z, l, &r).unwrap()).collect();
        prop_assert!(dfs.windows(2).all(|w| w[1] < w[0]), "{:?}", dfs);
    }

    #[test]
    fn fof_training_loss_decreases_with_lambda(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let xb = BasisSystem::fourier(4, 0.0, 1.0).unwrap();
        let yb = BasisSystem::polynomial(3, 0.0, 1.0).unwrap();
        let x = FunctionalDataSet::new(xb, common::normal_matrix(&mut rng, 12, 4), Response::None).unwrap();
        let y = FunctionalDataSet::new(yb, common::normal_matrix(&mut rng, 12, 3), Response::None).unwrap();
        let losses: Vec<f64> = [100.0, 10.0, 1.0, 0.1, 0.0]
            .iter()
            .map(|&l| fit_fof(&x, &y, l).unwrap().training_loss())
            .collect();
        prop_assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", losses);
    }

    #[test]
    fn folds_partition_the_sample(n in 2usize..200, k in 2usize..12, seed in any::<u64>(), strat in prop::bool::ANY) {
        prop_assume!(k <= n);
        let lab: Vec<f64> = (0..n).map(|i| if (i * 7 + seed as usize % 5).is_multiple_of(3) { -1.0 } else { 1.0 }).collect();
        let folds = kfold(n, k, seed, strat.then_some(&lab[..])).unwrap();
        let sizes = folds.sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = (0..k).flat_map(|f| folds.test_indices(f)).collect();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn adaboost_weights_stay_a_distribution(
        z in sized_matrix(4..=30, 1..=4),
        y in labels(30),
        resample in prop::bool::ANY,
        seed in any::<u64>(),
    ) {
        let n = z.nrows();
        let learner = Learner::prepare(&LearnerSpec::stump(), &z, None).unwrap();
        let mode = if resample { ResampleMode::Resample } else { ResampleMode::Reweight };
        if let Ok((_, trace)) = adaboost_scores(&z, &y[..n], &learner, 20, mode, seed) {
            for d in &trace.weights {
                prop_assert!((d.sum() - 1.0).abs() <= 1e-12);
                prop_assert!(d.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn logitboost_probabilities_stay_open(z in sized_matrix(4..=30, 1..=4), y in labels(30)) {
        let n = z.nrows();
        for spec in [LearnerSpec::stump(), LearnerSpec::Componentwise] {
            let learner = Learner::prepare(&spec, &z, None).unwrap();
            if let Ok((_, trace)) = logitboost_scores(&z, &y[..n], &learner, 40) {
                for p in &trace.probabilities {
                    prop_assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
                }
            }
        }
    }

    #[test]
    fn model_survives_serde_round_trip(seed in any::<u64>(), algo in 0usize..3) {
        let (algorithm, ds) = match algo {
            0 => (Algorithm::AdaBoost, common::two_class_curves(seed, 30, 7)),
            1 => (Algorithm::LogitBoost, common::two_class_curves(seed, 30, 7)),
            _ => (Algorithm::L2Boost, common::sparse_regression(seed, 30, 7, 0.5).dataset),
        };
        let spec = if algo == 2 { LearnerSpec::penalized(1.0, 2) } else { LearnerSpec::stump() };
        let cfg = BoostConfig::new(algorithm, spec, 8)
            .with_score_basis(BasisSystem::bspline_uniform(6, 3, 0.0, 1.0).unwrap());
        let model = BoostedModel::fit(&ds, &cfg).unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let back: BoostedModel<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let a = model.predict_coefs(ds.coefs(), None, OutputKind::Score).unwrap();
        let b = back.predict_coefs(ds.coefs(), None, OutputKind::Score).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn componentwise_never_increases_rss() {
    let mut rng = common::rng(1000);
    for _ in 0..1000 {
        use rand::Rng;
        let n = rng.random_range(1..=20);
        let k = rng.random_range(1..=6);
        let z = common::normal_matrix(&mut rng, n, k);
        let u = common::normal_vector(&mut rng, n);
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let base = fit_componentwise(&z, u.as_slice(), &w).unwrap();
        let g = base.evaluate_rows(&z);
        let rss = |r: &DVector<f64>| r.iter().zip(&w).map(|(v, wi)| wi * v * v).sum::<f64>();
        assert!(rss(&(&u - &g)) <= rss(&u) * (1.0 + 1e-12) + 1e-15);
    }
}
