//! Choosing the number of boosting iterations.
//!
//! Cross-validation trains each fold once to `M_max` and reads the error of
//! every prefix `m ≤ M_max` from the truncated score paths. For L2Boost with
//! a fixed linear smoother `S`, the boosting operator after `m` steps is
//! `B_m = I − (I − νS)^m`; its trace gives the degrees of freedom used by
//! AIC and BIC.

use crate::boost::{label_of, training_design, Algorithm, BoostConfig, BoostedModel};
use crate::data::{FunctionalDataSet, Response};
use crate::error::{Error, Result};
use crate::learners::hat_matrix;
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Assignment of `n` samples to `K` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    folds: usize,
    assignment: Vec<usize>,
    seed: u64,
    stratified: bool,
}

impl FoldAssignment {
    pub fn folds(&self) -> usize {
        self.folds
    }

    /// Fold index of every sample.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_stratified(&self) -> bool {
        self.stratified
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded random `K`-fold partition with fold sizes differing by at most one.
///
/// With `labels`, samples are stratified: each class is shuffled and dealt
/// round-robin, continuing the deal across classes, so per-class counts per
/// fold also differ by at most one.
pub fn kfold<T: Scalar>(
    n: usize,
    folds: usize,
    seed: u64,
    labels: Option<&[T]>,
) -> Result<FoldAssignment> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidArgument(format!(
            "fold count {folds} must lie in 2..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order: Vec<usize> = match labels {
        None => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
            let mut classes: Vec<T> = Vec::new();
            for &y in labels {
                if !classes.contains(&y) {
                    classes.push(y);
                }
            }
            classes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let mut order = Vec::with_capacity(n);
            for class in classes {
                let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
                members.shuffle(&mut rng);
                order.extend(members);
            }
            order
        }
    };
    let mut assignment = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }
    Ok(FoldAssignment {
        folds,
        assignment,
        seed,
        stratified: labels.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    CvMisclassification,
    CvMse,
    Df,
    Aic,
    Bic,
}

/// Per-iteration criterion values for `m = 1..=M_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionCurve<T: Scalar> {
    metric: MetricKind,
    values: Vec<T>,
    m_opt: usize,
}

impl<T: Scalar> SelectionCurve<T> {
    /// `m_opt` is the first `m` attaining the minimum.
    pub fn new(metric: MetricKind, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty selection curve".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("selection curve"));
        }
        let mut m_opt = 1;
        for (i, &v) in values.iter().enumerate() {
            if v < values[m_opt - 1] {
                m_opt = i + 1;
            }
        }
        Ok(Self {
            metric,
            values,
            m_opt,
        })
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    /// Value at iteration `m` is `values()[m − 1]`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn m_opt(&self) -> usize {
        self.m_opt
    }

    pub fn min_value(&self) -> T {
        self.values[self.m_opt - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-fold sums of the loss at every `m`, pooled over held-out samples.
fn fold_losses<T: Scalar>(
    config: &BoostConfig<T>,
    dataset: &FunctionalDataSet<T>,
    folds: &FoldAssignment,
    fold: usize,
    max_iterations: usize,
) -> Result<Vec<T>> {
    let train = dataset.select(&folds.train_indices(fold));
    let test_rows = folds.test_indices(fold);
    let test = dataset.select(&test_rows);
    let mut cfg = config.clone();
    cfg.iterations = max_iterations;
    let model = BoostedModel::fit(&train, &cfg)?;
    let paths = model.score_paths(test.coefs())?;
    let classify = config.algorithm.is_classifier();
    let truth: &[T] = match test.response() {
        Response::Scalar(y) | Response::Labels(y) => y.as_slice(),
        _ => {
            return Err(Error::InvalidArgument(
                "cross-validation needs a scalar or label response".into(),
            ))
        }
    };
    let mut losses = vec![T::zero(); max_iterations];
    for (path, &y) in paths.iter().zip(truth) {
        for (m, loss) in losses.iter_mut().enumerate() {
            // Runs that stopped early keep their last score.
            let score = path[m.min(path.len() - 1)];
            *loss += if classify {
                if label_of(score) != y {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                (y - score) * (y - score)
            };
        }
    }
    Ok(losses)
}

/// K-fold cross-validated misclassification rate (classifiers) or mean
/// squared error (L2Boost) at every `m ≤ max_iterations`.
///
/// Folds train concurrently; per-fold losses are pooled over all held-out
/// samples in fold order.
pub fn cross_validate<T: Scalar>(
    config: &BoostConfig<T>,
    dataset: &FunctionalDataSet<T>,
    folds: &FoldAssignment,
    max_iterations: usize,
) -> Result<SelectionCurve<T>> {
    if max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "max iterations must be at least 1".into(),
        ));
    }
    if folds.assignment().len() != dataset.len() {
        return Err(Error::DimensionMismatch(format!(
            "fold assignment covers {} samples, data set has {}",
            folds.assignment().len(),
            dataset.len()
        )));
    }
    let per_fold: Vec<Result<Vec<T>>> = (0..folds.folds())
        .into_par_iter()
        .map(|k| {
            fold_losses(config, dataset, folds, k, max_iterations).map_err(|e| Error::Fold {
                fold: k,
                source: Box::new(e),
            })
        })
        .collect();
    let mut total = vec![T::zero(); max_iterations];
    for losses in per_fold {
        for (t, l) in total.iter_mut().zip(losses?) {
            *t += l;
        }
    }
    let n = T::from_count(dataset.len());
    let metric = if config.algorithm.is_classifier() {
        MetricKind::CvMisclassification
    } else {
        MetricKind::CvMse
    };
    SelectionCurve::new(metric, total.into_iter().map(|t| t / n).collect())
}

fn check_smoother<T: Scalar>(smoother: &DMatrix<T>) -> Result<()> {
    if smoother.nrows() != smoother.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "smoother must be square, got {}x{}",
            smoother.nrows(),
            smoother.ncols()
        )));
    }
    Ok(())
}

/// `df_m = trace(I − (I − νS)^m)` for `m = 1..=max_iterations`.
///
/// Symmetric `S` uses its eigenvalues, `df_m = Σ 1 − (1 − νs_i)^m`; other
/// smoothers use repeated products.
pub fn l2boost_df_curve<T: Scalar>(
    smoother: &DMatrix<T>,
    shrinkage: T,
    max_iterations: usize,
) -> Result<Vec<T>> {
    check_smoother(smoother)?;
    if max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be at least 1".into(),
        ));
    }
    let n = smoother.nrows();
    let asymmetry = (smoother - smoother.transpose()).amax();
    let scale = smoother.amax();
    if asymmetry <= T::lit(1e-10) * (scale + T::one()) {
        let eigenvalues = linalg::symmetric_eigenvalues(smoother);
        Ok((1..=max_iterations)
            .map(|m| {
                eigenvalues.iter().fold(T::zero(), |acc, &s| {
                    acc + T::one() - (T::one() - shrinkage * s).powi(m as i32)
                })
            })
            .collect())
    } else {
        let step = DMatrix::identity(n, n) - smoother * shrinkage;
        let mut power = step.clone();
        let mut out = Vec::with_capacity(max_iterations);
        for _ in 0..max_iterations {
            out.push(T::from_count(n) - power.trace());
            power = &power * &step;
        }
        Ok(out)
    }
}

/// Degrees of freedom of L2Boost after `m` steps with smoother `S` and step `ν`.
pub fn l2boost_df<T: Scalar>(smoother: &DMatrix<T>, shrinkage: T, m: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be at least 1".into(),
        ));
    }
    Ok(l2boost_df_curve(smoother, shrinkage, m)?[m - 1])
}

/// The boosting operator `B_m = I − (I − νS)^m`.
pub fn boosting_operator<T: Scalar>(
    smoother: &DMatrix<T>,
    shrinkage: T,
    m: usize,
) -> Result<DMatrix<T>> {
    check_smoother(smoother)?;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be at least 1".into(),
        ));
    }
    let n = smoother.nrows();
    let step = DMatrix::identity(n, n) - smoother * shrinkage;
    let mut power = DMatrix::identity(n, n);
    for _ in 0..m {
        power = &power * &step;
    }
    Ok(DMatrix::identity(n, n) - power)
}

/// `AIC_m = n log(RSS_m/n) + 2 df_m` and `BIC_m = n log(RSS_m/n) + log(n) df_m`.
pub fn aic_bic<T: Scalar>(
    df: &[T],
    rss: &[T],
    n: usize,
) -> Result<(SelectionCurve<T>, SelectionCurve<T>)> {
    if df.len() != rss.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} df values, {} RSS values",
            df.len(),
            rss.len()
        )));
    }
    if n == 0 || rss.iter().any(|&r| !(r > T::zero())) {
        return Err(Error::InvalidArgument(
            "AIC/BIC need positive residual sums of squares".into(),
        ));
    }
    let nf = T::from_count(n);
    let fit_term: Vec<T> = rss.iter().map(|&r| nf * (r / nf).ln()).collect();
    let aic = fit_term
        .iter()
        .zip(df)
        .map(|(&f, &d)| f + T::lit(2.0) * d)
        .collect();
    let bic = fit_term
        .iter()
        .zip(df)
        .map(|(&f, &d)| f + nf.ln() * d)
        .collect();
    Ok((
        SelectionCurve::new(MetricKind::Aic, aic)?,
        SelectionCurve::new(MetricKind::Bic, bic)?,
    ))
}

/// df, training RSS, AIC, and BIC curves of an L2Boost run.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationCurves<T: Scalar> {
    pub df: Vec<T>,
    pub rss: Vec<T>,
    pub aic: SelectionCurve<T>,
    pub bic: SelectionCurve<T>,
}

/// Fits L2Boost with a penalized (fixed linear smoother) learner and returns
/// its information-criterion curves over `m = 1..=config.iterations`.
pub fn l2boost_information<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<(BoostedModel<T>, InformationCurves<T>)> {
    if config.algorithm != Algorithm::L2Boost {
        return Err(Error::InvalidArgument(
            "information criteria need an L2Boost configuration".into(),
        ));
    }
    let y = match dataset.response() {
        Response::Scalar(y) => y.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "L2Boost needs a scalar response".into(),
            ))
        }
    };
    let (_, z, learner) = training_design(dataset, config)?;
    if !learner.is_linear_smoother() {
        return Err(Error::InvalidArgument(
            "degrees of freedom are only defined for the penalized (fixed linear smoother) learner"
                .into(),
        ));
    }
    let smoother = hat_matrix(
        &z,
        learner.lambda(),
        learner.penalty().expect("penalized learner"),
    )?;
    let df = l2boost_df_curve(&smoother, config.shrinkage, config.iterations)?;
    let model = BoostedModel::fit(dataset, config)?;
    let paths = model.score_paths(dataset.coefs())?;
    let rss: Vec<T> = (0..model.len())
        .map(|m| {
            paths
                .iter()
                .zip(y.iter())
                .fold(T::zero(), |acc, (path, &yi)| {
                    acc + (yi - path[m]) * (yi - path[m])
                })
        })
        .collect();
    let (aic, bic) = aic_bic(&df, &rss, dataset.len())?;
    Ok((model, InformationCurves { df, rss, aic, bic }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leave_one_out_partition() {
        let folds = kfold::<f64>(10, 10, 3, None).unwrap();
        assert_eq!(folds.sizes(), vec![1; 10]);
        let mut seen: Vec<usize> = folds.assignment().to_vec();
        seen.sort();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn ten_even_folds() {
        let folds = kfold::<f64>(100, 10, 7, None).unwrap();
        assert_eq!(folds.sizes(), vec![10; 10]);
        assert_eq!(folds, kfold::<f64>(100, 10, 7, None).unwrap());
    }

    #[test]
    fn stratified_folds_for_48_52() {
        let labels: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 && i < 96 { -1.0 } else { 1.0 })
            .collect();
        assert_eq!(labels.iter().filter(|&&y| y < 0.0).count(), 48);
        let folds = kfold(100, 10, 11, Some(&labels)).unwrap();
        assert_eq!(folds.sizes(), vec![10; 10]);
        for k in 0..10 {
            let test = folds.test_indices(k);
            let neg = test.iter().filter(|&&i| labels[i] < 0.0).count();
            let pos = test.len() - neg;
            assert!((4..=5).contains(&neg), "fold {k}: {neg} negatives");
            assert!((5..=6).contains(&pos), "fold {k}: {pos} positives");
        }
    }

    #[test]
    fn fold_count_out_of_range() {
        assert!(kfold::<f64>(5, 1, 0, None).is_err());
        assert!(kfold::<f64>(5, 6, 0, None).is_err());
    }

    #[test]
    fn selection_prefers_first_minimum() {
        let curve =
            SelectionCurve::new(MetricKind::CvMisclassification, vec![0.3, 0.1, 0.2, 0.1]).unwrap();
        assert_eq!(curve.m_opt(), 2);
        assert_eq!(curve.min_value(), 0.1);
        let single = SelectionCurve::new(MetricKind::CvMse, vec![4.0]).unwrap();
        assert_eq!(single.m_opt(), 1);
    }

    #[test]
    fn null_smoother_has_no_df() {
        let s = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(l2boost_df_curve(&s, 1.0, 3).unwrap(), vec![0.0; 3]);
        assert_eq!(boosting_operator(&s, 1.0, 2).unwrap(), DMatrix::zeros(4, 4));
        assert!(l2boost_df(&DMatrix::<f64>::zeros(2, 3), 1.0, 1).is_err());
        assert!(l2boost_df(&s, 1.0, 0).is_err());
    }

    #[test]
    fn projection_df_is_rank() {
        // Projection onto the first two coordinates, rotated.
        let q = DMatrix::from_row_slice(3, 2, &[0.6, 0.0, 0.8, 0.0, 0.0, 1.0]);
        let s: DMatrix<f64> = &q * q.transpose();
        for (m, df) in l2boost_df_curve(&s, 1.0, 20)
            .unwrap()
            .into_iter()
            .enumerate()
        {
            assert!((df - 2.0).abs() < 1e-12, "m = {}", m + 1);
        }
        let b = boosting_operator(&s, 1.0, 5).unwrap();
        assert!((b - &s).amax() < 1e-12);
    }

    #[test]
    fn asymmetric_smoother_uses_matrix_powers() {
        let s = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.25]);
        let curve = l2boost_df_curve(&s, 1.0, 4).unwrap();
        for (m, df) in curve.iter().enumerate() {
            let expected = 2.0 - 0.5f64.powi(m as i32 + 1) - 0.75f64.powi(m as i32 + 1);
            assert!((df - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn aic_bic_formulas() {
        let (aic, bic) = aic_bic(&[1.0, 2.0], &[10.0, 5.0], 10).unwrap();
        assert!((aic.values()[0] - (10.0 * 1.0f64.ln() + 2.0)).abs() < 1e-12);
        assert!((bic.values()[1] - (10.0 * 0.5f64.ln() + 10f64.ln() * 2.0)).abs() < 1e-12);
        assert!(aic_bic(&[1.0], &[0.0], 3).is_err());
    }
}
