//! AdaBoost, L2Boost, and LogitBoost over projection scores.
//!
//! A fitted model is the forward-stagewise sum
//! `f_M(x) = offset + Σ_m α_m g_m(z(x))`, where `z(x)` are the centered
//! projection scores of curve `x` on the score basis. Truncating the sum at
//! any `m ≤ M` gives exactly the model the engine held after `m` steps.

use crate::basis::BasisSystem;
use crate::data::{check_labels, FunctionalDataSet, Response};
use crate::error::{Error, Result};
use crate::learners::{FittedBase, Learner, LearnerSpec, TargetKind};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// AdaBoost stops once the weighted error falls to this level.
pub const ADABOOST_ERROR_FLOOR: f64 = 1e-10;
/// LogitBoost lower bound on the Newton weights `p(1 − p)`.
pub const LOGITBOOST_WEIGHT_FLOOR: f64 = 1e-10;
/// LogitBoost bound on the magnitude of the working response.
pub const LOGITBOOST_RESPONSE_CLAMP: f64 = 4.0;
/// Probabilities are kept inside `[floor, 1 − floor]`.
pub const PROBABILITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `(y − f)² / 2`
    Quadratic,
    /// `log(1 + exp(−y f))`, `y ∈ {−1, +1}`
    Logistic,
}

impl LossKind {
    pub fn value<T: Scalar>(self, y: T, f: T) -> T {
        match self {
            LossKind::Quadratic => {
                let r = y - f;
                r * r * T::lit(0.5)
            }
            LossKind::Logistic => softplus(-(y * f)),
        }
    }

    /// `−∂L/∂f` at `f`.
    pub fn negative_gradient<T: Scalar>(self, y: T, f: T) -> T {
        match self {
            LossKind::Quadratic => y - f,
            LossKind::Logistic => {
                let margin = y * f;
                if margin > T::zero() {
                    let e = (-margin).exp();
                    y * e / (T::one() + e)
                } else {
                    y / (T::one() + margin.exp())
                }
            }
        }
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus<T: Scalar>(x: T) -> T {
    let zero = T::zero();
    let pos = if x > zero { x } else { zero };
    pos + (-x.abs()).exp().ln_1p()
}

/// Elementwise negative gradient `u_i = −∂L(y_i, f)/∂f |_{f = f_i}`.
pub fn negative_gradient<T: Scalar>(loss: LossKind, y: &[T], f: &[T]) -> Vec<T> {
    y.iter()
        .zip(f)
        .map(|(&y, &f)| loss.negative_gradient(y, f))
        .collect()
}

/// `P(Y = 1 | x)` from a half-log-odds score, `(1 + exp(−2s))⁻¹`, kept
/// inside `[PROBABILITY_FLOOR, 1 − PROBABILITY_FLOOR]`.
pub fn probability_from_score<T: Scalar>(score: T) -> T {
    let two = T::lit(2.0);
    let p = if score >= T::zero() {
        T::one() / (T::one() + (-two * score).exp())
    } else {
        let e = (two * score).exp();
        e / (T::one() + e)
    };
    let floor = T::lit(PROBABILITY_FLOOR);
    let ceil = T::one() - floor;
    if p < floor {
        floor
    } else if p > ceil {
        ceil
    } else {
        p
    }
}

/// `sign` with `sign(0) = +1`.
pub fn label_of<T: Scalar>(score: T) -> T {
    if score >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    AdaBoost,
    L2Boost,
    LogitBoost,
}

impl Algorithm {
    pub fn loss(self) -> Option<LossKind> {
        match self {
            Algorithm::AdaBoost => None,
            Algorithm::L2Boost => Some(LossKind::Quadratic),
            Algorithm::LogitBoost => Some(LossKind::Logistic),
        }
    }

    pub fn is_classifier(self) -> bool {
        !matches!(self, Algorithm::L2Boost)
    }
}

/// How AdaBoost presents the weights `D_m` to the weak learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMode {
    /// Weighted fit on the full sample.
    #[default]
    Reweight,
    /// Unweighted fit on `n` indices drawn i.i.d. from `D_m`.
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Score,
    Label,
    Probability,
}

/// Map from curve coefficients to centered projection scores
/// `z = Jᵀc − z̄`, with `J` the cross-Gram of the data and score bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "FeatureMapRepr<T>",
    try_from = "FeatureMapRepr<T>",
    bound(
        serialize = "T: Scalar + Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct FeatureMap<T: Scalar> {
    data_basis: BasisSystem<T>,
    score_basis: BasisSystem<T>,
    cross_gram: DMatrix<T>,
    center: DVector<T>,
}

#[derive(Serialize, Deserialize)]
struct FeatureMapRepr<T> {
    data_basis: BasisSystem<T>,
    score_basis: BasisSystem<T>,
    center: Vec<T>,
}

impl<T: Scalar> From<FeatureMap<T>> for FeatureMapRepr<T> {
    fn from(map: FeatureMap<T>) -> Self {
        Self {
            data_basis: map.data_basis,
            score_basis: map.score_basis,
            center: map.center.iter().copied().collect(),
        }
    }
}

impl<T: Scalar> TryFrom<FeatureMapRepr<T>> for FeatureMap<T> {
    type Error = Error;

    fn try_from(repr: FeatureMapRepr<T>) -> Result<Self> {
        repr.data_basis.validate()?;
        repr.score_basis.validate()?;
        let cross_gram = repr.data_basis.cross_gram(&repr.score_basis)?;
        if repr.center.len() != repr.score_basis.len() {
            return Err(Error::DimensionMismatch(
                "centering vector does not match the score basis".into(),
            ));
        }
        Ok(Self {
            data_basis: repr.data_basis,
            score_basis: repr.score_basis,
            cross_gram,
            center: DVector::from_vec(repr.center),
        })
    }
}

impl<T: Scalar> FeatureMap<T> {
    /// Feature map whose centering is the mean score of the training curves.
    pub fn fit(
        data_basis: &BasisSystem<T>,
        score_basis: &BasisSystem<T>,
        coefs: &DMatrix<T>,
    ) -> Result<Self> {
        let cross_gram = data_basis.cross_gram(score_basis)?;
        let raw = coefs * &cross_gram;
        let n = T::from_count(raw.nrows().max(1));
        let center = DVector::from_fn(raw.ncols(), |j, _| raw.column(j).sum() / n);
        Ok(Self {
            data_basis: data_basis.clone(),
            score_basis: score_basis.clone(),
            cross_gram,
            center,
        })
    }

    pub fn data_basis(&self) -> &BasisSystem<T> {
        &self.data_basis
    }

    pub fn score_basis(&self) -> &BasisSystem<T> {
        &self.score_basis
    }

    pub fn center(&self) -> &DVector<T> {
        &self.center
    }

    pub fn scores(&self, curve: &[T]) -> Result<Vec<T>> {
        if curve.len() != self.data_basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "curve has {} coefficients, model expects {}",
                curve.len(),
                self.data_basis.len()
            )));
        }
        let c = DVector::from_column_slice(curve);
        let z = self.cross_gram.transpose() * c - &self.center;
        Ok(z.iter().copied().collect())
    }

    pub fn scores_matrix(&self, coefs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if coefs.ncols() != self.data_basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficient columns, model expects {}",
                coefs.ncols(),
                self.data_basis.len()
            )));
        }
        let mut z = coefs * &self.cross_gram;
        for mut row in z.row_iter_mut() {
            row -= self.center.transpose();
        }
        Ok(z)
    }
}

/// One term `α_m g_m`; `signed` components contribute `α_m·sign(g_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage<T> {
    pub weight: T,
    pub base: FittedBase<T>,
    #[serde(default)]
    pub signed: bool,
}

impl<T: Scalar> Stage<T> {
    pub fn component(&self, scores: &[T]) -> T {
        let g = self.base.evaluate(scores);
        if self.signed {
            label_of(g)
        } else {
            g
        }
    }
}

/// Boosting run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig<T: Scalar> {
    pub algorithm: Algorithm,
    pub learner: LearnerSpec<T>,
    /// Number of boosting iterations `M`.
    pub iterations: usize,
    /// L2Boost step length `ν ∈ (0, 1]`.
    pub shrinkage: T,
    pub mode: ResampleMode,
    pub seed: u64,
    /// Basis of the projection scores; the data basis when `None`.
    pub score_basis: Option<BasisSystem<T>>,
}

impl<T: Scalar> BoostConfig<T> {
    pub fn new(algorithm: Algorithm, learner: LearnerSpec<T>, iterations: usize) -> Self {
        Self {
            algorithm,
            learner,
            iterations,
            shrinkage: T::one(),
            mode: ResampleMode::Reweight,
            seed: 1,
            score_basis: None,
        }
    }

    pub fn with_shrinkage(mut self, shrinkage: T) -> Self {
        self.shrinkage = shrinkage;
        self
    }

    pub fn with_mode(mut self, mode: ResampleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_score_basis(mut self, basis: BasisSystem<T>) -> Self {
        self.score_basis = Some(basis);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "at least one boosting iteration is required".into(),
            ));
        }
        if !(self.shrinkage > T::zero() && self.shrinkage <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        self.learner.validate()
    }
}

/// Per-iteration diagnostics of a boosting run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace<T: Scalar> {
    /// Sample weights presented at each iteration; AdaBoost also records the
    /// distribution after the last update.
    pub weights: Vec<DVector<T>>,
    /// AdaBoost weighted errors `ε_m`.
    pub errors: Vec<T>,
    /// LogitBoost training probabilities `p_m`, including the final one.
    pub probabilities: Vec<DVector<T>>,
}

/// Fitted boosting model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct BoostedModel<T: Scalar> {
    algorithm: Algorithm,
    features: FeatureMap<T>,
    offset: T,
    stages: Vec<Stage<T>>,
    /// Class labels as (negative, positive) for classifiers.
    labels: Option<(i32, i32)>,
}

/// Prepared inputs shared by the dataset-level engines.
struct Prepared<T: Scalar> {
    features: FeatureMap<T>,
    z: DMatrix<T>,
    learner: Learner<T>,
}

fn prepare<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<Prepared<T>> {
    config.validate()?;
    let score_basis = config
        .score_basis
        .clone()
        .unwrap_or_else(|| dataset.basis().clone());
    let features = FeatureMap::fit(dataset.basis(), &score_basis, dataset.coefs())?;
    let z = features.scores_matrix(dataset.coefs())?;
    let penalty = match &config.learner {
        LearnerSpec::Penalized { penalty_order, .. } => {
            Some(score_basis.penalty_matrix(*penalty_order)?)
        }
        _ => None,
    };
    let learner = Learner::prepare(&config.learner, &z, penalty)?;
    Ok(Prepared {
        features,
        z,
        learner,
    })
}

fn labels_of<T: Scalar>(dataset: &FunctionalDataSet<T>) -> Result<&[T]> {
    match dataset.response() {
        Response::Labels(y) => Ok(y.as_slice()),
        _ => Err(Error::InvalidArgument(
            "classification needs a -1/+1 label response".into(),
        )),
    }
}

impl<T: Scalar> BoostedModel<T> {
    /// Runs the engine selected by `config.algorithm`.
    pub fn fit(dataset: &FunctionalDataSet<T>, config: &BoostConfig<T>) -> Result<Self> {
        match config.algorithm {
            Algorithm::AdaBoost => adaboost(dataset, config),
            Algorithm::L2Boost => l2boost(dataset, config),
            Algorithm::LogitBoost => logitboost(dataset, config),
        }
    }

    pub fn from_parts(
        algorithm: Algorithm,
        features: FeatureMap<T>,
        offset: T,
        stages: Vec<Stage<T>>,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument(
                "a boosted model needs at least one stage".into(),
            ));
        }
        let dim = features.score_basis().len();
        for stage in &stages {
            if !stage.weight.is_finite() {
                return Err(Error::NonFinite("stage weight"));
            }
            if stage.base.required_dim() > dim || stage.base.input_dim().is_some_and(|d| d != dim) {
                return Err(Error::DimensionMismatch(
                    "stage does not match the score basis".into(),
                ));
            }
        }
        Ok(Self {
            algorithm,
            features,
            offset,
            stages,
            labels: algorithm.is_classifier().then_some((-1, 1)),
        })
    }

    /// Checks invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        Self::from_parts(
            self.algorithm,
            self.features.clone(),
            self.offset,
            self.stages.clone(),
        )
        .map(|_| ())
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn loss(&self) -> Option<LossKind> {
        self.algorithm.loss()
    }

    pub fn features(&self) -> &FeatureMap<T> {
        &self.features
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    /// Number of stages `M`.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn labels(&self) -> Option<(i32, i32)> {
        self.labels
    }

    /// Model made of the first `m` stages.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        let m = self.check_truncation(Some(m))?;
        Ok(Self {
            stages: self.stages[..m].to_vec(),
            ..self.clone()
        })
    }

    fn check_truncation(&self, m: Option<usize>) -> Result<usize> {
        match m {
            None => Ok(self.stages.len()),
            Some(m) if m >= 1 && m <= self.stages.len() => Ok(m),
            Some(m) => Err(Error::InvalidArgument(format!(
                "truncation {m} outside 1..={}",
                self.stages.len()
            ))),
        }
    }

    /// `offset + Σ_{m ≤ m_opt} α_m g_m` on precomputed scores.
    pub fn score_from_scores(&self, scores: &[T], m: Option<usize>) -> Result<T> {
        let m = self.check_truncation(m)?;
        Ok(self.stages[..m]
            .iter()
            .fold(self.offset, |acc, s| acc + s.weight * s.component(scores)))
    }

    /// Cumulative scores `f_1, …, f_M` for one row of scores.
    pub fn score_path_from_scores(&self, scores: &[T]) -> Vec<T> {
        let mut acc = self.offset;
        self.stages
            .iter()
            .map(|s| {
                acc += s.weight * s.component(scores);
                acc
            })
            .collect()
    }

    pub fn score(&self, curve: &[T], m: Option<usize>) -> Result<T> {
        let z = self.features.scores(curve)?;
        self.score_from_scores(&z, m)
    }

    /// Score, label (`sign`, with `sign(0) = +1`), or class probability
    /// (LogitBoost only) of a curve given by its data-basis coefficients.
    pub fn predict(&self, curve: &[T], m: Option<usize>, output: OutputKind) -> Result<T> {
        let score = self.score(curve, m)?;
        self.transform(score, output)
    }

    fn transform(&self, score: T, output: OutputKind) -> Result<T> {
        match output {
            OutputKind::Score => Ok(score),
            OutputKind::Label => Ok(label_of(score)),
            OutputKind::Probability => {
                if self.algorithm != Algorithm::LogitBoost {
                    return Err(Error::InvalidArgument(
                        "probabilities are only available for LogitBoost models".into(),
                    ));
                }
                Ok(probability_from_score(score))
            }
        }
    }

    /// Predictions for every curve (row) of a coefficient matrix.
    pub fn predict_coefs(
        &self,
        coefs: &DMatrix<T>,
        m: Option<usize>,
        output: OutputKind,
    ) -> Result<Vec<T>> {
        let z = self.features.scores_matrix(coefs)?;
        let m = self.check_truncation(m)?;
        let mut row = vec![T::zero(); z.ncols()];
        (0..z.nrows())
            .map(|i| {
                row.iter_mut().enumerate().for_each(|(j, v)| *v = z[(i, j)]);
                let score = self.score_from_scores(&row, Some(m))?;
                self.transform(score, output)
            })
            .collect()
    }

    /// Score paths for every curve; entry `[i][m − 1]` is `f_m(x_i)`.
    pub fn score_paths(&self, coefs: &DMatrix<T>) -> Result<Vec<Vec<T>>> {
        let z = self.features.scores_matrix(coefs)?;
        let mut row = vec![T::zero(); z.ncols()];
        Ok((0..z.nrows())
            .map(|i| {
                row.iter_mut().enumerate().for_each(|(j, v)| *v = z[(i, j)]);
                self.score_path_from_scores(&row)
            })
            .collect())
    }

    /// For models whose stages are all linear in the scores, the intercept
    /// and coefficient vector of `β(t)` in the score basis after `m` stages:
    /// `f_m(x) = β₀ + ∫ β(t) x(t) dt`.
    pub fn linear_coefficients(&self, m: Option<usize>) -> Result<Option<(T, DVector<T>)>> {
        let m = self.check_truncation(m)?;
        let dim = self.features.score_basis().len();
        let mut total = DVector::zeros(dim);
        for stage in &self.stages[..m] {
            if stage.signed {
                return Ok(None);
            }
            match stage.base.linear_coefs(dim) {
                Some(b) => total += b * stage.weight,
                None => return Ok(None),
            }
        }
        let intercept = self.offset - total.dot(self.features.center());
        Ok(Some((intercept, total)))
    }
}

/// Weighted misclassification of `predictions` against `labels` under `weights`.
fn weighted_error<T: Scalar>(labels: &[T], predictions: &[T], weights: &[T]) -> T {
    labels
        .iter()
        .zip(predictions)
        .zip(weights)
        .filter(|((y, g), _)| y != g)
        .fold(T::zero(), |acc, (_, &w)| acc + w)
}

fn normalize<T: Scalar>(weights: &mut DVector<T>) {
    let total = weights.sum();
    *weights /= total;
}

/// AdaBoost on scores.
///
/// Starts from `D_1 = 1/n`; each step fits `g_m` to `(Z, y, D_m)` (or to a
/// resample drawn from `D_m`), computes `ε_m = Σ D_m(i) 1{y_i ≠ g_m(x_i)}`
/// on the full sample and `α_m = ln((1 − ε_m)/ε_m)`, then multiplies the
/// weights of misclassified points by `exp(α_m)` and renormalizes. After the
/// update `g_m` has weighted error exactly 1/2.
///
/// Stops early when `ε_m ≥ 1/2` (the learner is dropped) or when
/// `ε_m ≤ ADABOOST_ERROR_FLOOR` (kept with `α` capped at the floor).
pub fn adaboost_scores<T: Scalar>(
    z: &DMatrix<T>,
    labels: &[T],
    learner: &Learner<T>,
    iterations: usize,
    mode: ResampleMode,
    seed: u64,
) -> Result<(Vec<Stage<T>>, FitTrace<T>)> {
    check_labels(labels)?;
    let n = z.nrows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} curves but {} labels",
            labels.len()
        )));
    }
    let signed = !matches!(learner.spec(), LearnerSpec::Stump { .. });
    let floor = T::lit(ADABOOST_ERROR_FLOOR);
    let half = T::lit(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = DVector::from_element(n, T::one() / T::from_count(n));
    let mut trace = FitTrace::default();
    let mut stages = Vec::with_capacity(iterations);

    for m in 0..iterations {
        trace.weights.push(weights.clone());
        let base = match mode {
            ResampleMode::Reweight => {
                learner.fit(z, labels, weights.as_slice(), TargetKind::Classification)?
            }
            ResampleMode::Resample => {
                let probs: Vec<f64> = weights.iter().map(|w| w.to_f64_lossy()).collect();
                let dist = WeightedIndex::new(&probs).map_err(|e| {
                    Error::LearnerFailure(format!("cannot resample from weights: {e}"))
                })?;
                let rows: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
                let zs = z.select_rows(&rows);
                let ys: Vec<T> = rows.iter().map(|&i| labels[i]).collect();
                learner.fit(&zs, &ys, &vec![T::one(); n], TargetKind::Classification)?
            }
        };
        let stage = Stage {
            weight: T::zero(),
            base,
            signed,
        };
        let predictions: Vec<T> = (0..n)
            .map(|i| {
                let row: Vec<T> = z.row(i).iter().copied().collect();
                stage.component(&row)
            })
            .collect();
        let error = weighted_error(labels, &predictions, weights.as_slice());
        trace.errors.push(error);
        if error >= half {
            log::debug!(
                "adaboost: weighted error {error} at iteration {} ends the run",
                m + 1
            );
            break;
        }
        let capped = error <= floor;
        let eps = if capped { floor } else { error };
        let alpha = ((T::one() - eps) / eps).ln();
        stages.push(Stage {
            weight: alpha,
            ..stage
        });
        let boost = alpha.exp();
        for i in 0..n {
            if predictions[i] != labels[i] {
                weights[i] *= boost;
            }
        }
        normalize(&mut weights);
        if capped {
            trace.weights.push(weights.clone());
            break;
        }
        if m + 1 == iterations {
            trace.weights.push(weights.clone());
        }
    }
    if stages.is_empty() {
        return Err(Error::LearnerFailure(
            "first weak learner is no better than chance (weighted error >= 1/2)".into(),
        ));
    }
    Ok((stages, trace))
}

/// L2Boost on scores with centered targets: `f ← f + ν·g` where `g` is fit
/// to the residuals `y − f`.
pub fn l2boost_scores<T: Scalar>(
    z: &DMatrix<T>,
    targets: &[T],
    learner: &Learner<T>,
    iterations: usize,
    shrinkage: T,
) -> Result<Vec<Stage<T>>> {
    let n = z.nrows();
    if targets.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} curves but {} responses",
            targets.len()
        )));
    }
    let ones = vec![T::one(); n];
    let mut fitted = vec![T::zero(); n];
    let mut stages = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let residuals = negative_gradient(LossKind::Quadratic, targets, &fitted);
        let base = learner.fit(z, &residuals, &ones, TargetKind::Regression)?;
        let g = base.evaluate_rows(z);
        for (f, gi) in fitted.iter_mut().zip(g.iter()) {
            *f += shrinkage * *gi;
        }
        stages.push(Stage {
            weight: shrinkage,
            base,
            signed: false,
        });
    }
    Ok(stages)
}

/// LogitBoost on scores: Newton steps on the logistic loss.
///
/// With `y* = (y + 1)/2` and `p_1 = 1/2`, each step uses weights
/// `D = max(p(1 − p), LOGITBOOST_WEIGHT_FLOOR)` and working response
/// `u = (y* − p)/D` clipped to `±LOGITBOOST_RESPONSE_CLAMP`, fits `g` by
/// weighted least squares, then sets `f ← f + g/2` and `p = (1 + e^{−2f})⁻¹`.
pub fn logitboost_scores<T: Scalar>(
    z: &DMatrix<T>,
    labels: &[T],
    learner: &Learner<T>,
    iterations: usize,
) -> Result<(Vec<Stage<T>>, FitTrace<T>)> {
    check_labels(labels)?;
    let n = z.nrows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} curves but {} labels",
            labels.len()
        )));
    }
    let half = T::lit(0.5);
    let weight_floor = T::lit(LOGITBOOST_WEIGHT_FLOOR);
    let clamp = T::lit(LOGITBOOST_RESPONSE_CLAMP);
    let targets: Vec<T> = labels.iter().map(|&y| (y + T::one()) * half).collect();
    let mut f = vec![T::zero(); n];
    let mut p = DVector::from_element(n, half);
    let mut trace = FitTrace::default();
    let mut stages = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        trace.probabilities.push(p.clone());
        let weights: Vec<T> = p
            .iter()
            .map(|&pi| {
                let w = pi * (T::one() - pi);
                if w < weight_floor {
                    weight_floor
                } else {
                    w
                }
            })
            .collect();
        let response: Vec<T> = (0..n)
            .map(|i| {
                let u = (targets[i] - p[i]) / weights[i];
                if u > clamp {
                    clamp
                } else if u < -clamp {
                    -clamp
                } else {
                    u
                }
            })
            .collect();
        let base = learner.fit(z, &response, &weights, TargetKind::Regression)?;
        let g = base.evaluate_rows(z);
        for i in 0..n {
            f[i] += half * g[i];
            p[i] = probability_from_score(f[i]);
        }
        trace.weights.push(DVector::from_vec(weights));
        stages.push(Stage {
            weight: half,
            base,
            signed: false,
        });
    }
    trace.probabilities.push(p);
    Ok((stages, trace))
}

/// AdaBoost on a labelled functional data set.
pub fn adaboost<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<BoostedModel<T>> {
    let labels = labels_of(dataset)?;
    let prepared = prepare(dataset, config)?;
    let (stages, _) = adaboost_scores(
        &prepared.z,
        labels,
        &prepared.learner,
        config.iterations,
        config.mode,
        config.seed,
    )?;
    BoostedModel::from_parts(Algorithm::AdaBoost, prepared.features, T::zero(), stages)
}

/// L2Boost on a functional data set with a scalar response. The response
/// mean becomes the model offset.
pub fn l2boost<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<BoostedModel<T>> {
    let y = match dataset.response() {
        Response::Scalar(y) => y,
        _ => {
            return Err(Error::InvalidArgument(
                "L2Boost needs a scalar response".into(),
            ))
        }
    };
    let prepared = prepare(dataset, config)?;
    let offset = y.sum() / T::from_count(y.len());
    let centered: Vec<T> = y.iter().map(|&v| v - offset).collect();
    let stages = l2boost_scores(
        &prepared.z,
        &centered,
        &prepared.learner,
        config.iterations,
        config.shrinkage,
    )?;
    BoostedModel::from_parts(Algorithm::L2Boost, prepared.features, offset, stages)
}

/// LogitBoost on a labelled functional data set.
pub fn logitboost<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<BoostedModel<T>> {
    let labels = labels_of(dataset)?;
    let prepared = prepare(dataset, config)?;
    let (stages, _) = logitboost_scores(&prepared.z, labels, &prepared.learner, config.iterations)?;
    BoostedModel::from_parts(Algorithm::LogitBoost, prepared.features, T::zero(), stages)
}

/// Scores and prepared learner for a data set, as the engines see them.
pub fn training_design<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    config: &BoostConfig<T>,
) -> Result<(FeatureMap<T>, DMatrix<T>, Learner<T>)> {
    let p = prepare(dataset, config)?;
    Ok((p.features, p.z, p.learner))
}
