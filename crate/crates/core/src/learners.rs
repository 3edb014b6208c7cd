//! Weak learners over projection scores `Z` (one row per curve).
//!
//! Every learner consumes the same feature representation: the scores
//! `z_ij = ∫ x_i(t) φ_j(t) dt` of each curve on a coefficient basis.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Weak-learner configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerSpec<T> {
    /// Penalized least squares `(ZᵀWZ + λR_k)⁻¹ZᵀWu`. When `df_target` is set,
    /// `λ` is chosen on the unweighted training design so that
    /// `trace(S(λ)) ≈ df_target`.
    Penalized {
        lambda: T,
        penalty_order: usize,
        df_target: Option<T>,
    },
    /// Single best score column by weighted least squares.
    Componentwise,
    /// One-split tree on a single score column.
    Stump { min_leaf_weight: T },
}

impl<T: Scalar> LearnerSpec<T> {
    pub fn stump() -> Self {
        LearnerSpec::Stump {
            min_leaf_weight: T::zero(),
        }
    }

    pub fn penalized(lambda: T, penalty_order: usize) -> Self {
        LearnerSpec::Penalized {
            lambda,
            penalty_order,
            df_target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::Penalized {
                lambda, df_target, ..
            } => {
                if !(*lambda >= T::zero()) || !lambda.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "penalty weight must be non-negative, got {lambda}"
                    )));
                }
                if let Some(df) = df_target {
                    if !(*df > T::zero()) {
                        return Err(Error::InvalidArgument(format!(
                            "target degrees of freedom must be positive, got {df}"
                        )));
                    }
                }
            }
            LearnerSpec::Componentwise => {}
            LearnerSpec::Stump { min_leaf_weight } => {
                if !(*min_leaf_weight >= T::zero()) {
                    return Err(Error::InvalidArgument(
                        "minimum leaf weight must be non-negative".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// How targets are interpreted by a stump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// Real-valued targets, weighted squared error.
    Regression,
    /// Labels in {−1, +1}, weighted misclassification.
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump<T> {
    pub feature: usize,
    pub threshold: T,
    pub left: T,
    pub right: T,
    /// Set when no split was possible and both leaves hold the same value.
    #[serde(default)]
    pub degenerate: bool,
}

impl<T: Scalar> Stump<T> {
    /// `left` when `z_feature ≤ threshold`, else `right`.
    pub fn evaluate(&self, scores: &[T]) -> T {
        if scores[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

/// One fitted component `g_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedBase<T> {
    Penalized {
        coefs: Vec<T>,
        /// Unpenalized projection (`λ = 0`).
        #[serde(default)]
        projection: bool,
    },
    Componentwise {
        index: usize,
        slope: T,
    },
    Stump(Stump<T>),
}

impl<T: Scalar> FittedBase<T> {
    pub fn evaluate(&self, scores: &[T]) -> T {
        match self {
            FittedBase::Penalized { coefs, .. } => coefs
                .iter()
                .zip(scores)
                .fold(T::zero(), |acc, (&b, &z)| acc + b * z),
            FittedBase::Componentwise { index, slope } => *slope * scores[*index],
            FittedBase::Stump(stump) => stump.evaluate(scores),
        }
    }

    /// Number of score columns the component reads.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            FittedBase::Penalized { coefs, .. } => Some(coefs.len()),
            _ => None,
        }
    }

    /// Minimum score dimension needed to evaluate the component.
    pub fn required_dim(&self) -> usize {
        match self {
            FittedBase::Penalized { coefs, .. } => coefs.len(),
            FittedBase::Componentwise { index, .. } => index + 1,
            FittedBase::Stump(s) => s.feature + 1,
        }
    }

    /// Coefficient vector over the score basis for linear components.
    pub fn linear_coefs(&self, dim: usize) -> Option<DVector<T>> {
        match self {
            FittedBase::Penalized { coefs, .. } => Some(DVector::from_column_slice(coefs)),
            FittedBase::Componentwise { index, slope } => {
                let mut v = DVector::zeros(dim);
                v[*index] = *slope;
                Some(v)
            }
            FittedBase::Stump(_) => None,
        }
    }

    pub fn evaluate_rows(&self, z: &DMatrix<T>) -> DVector<T> {
        let mut row = vec![T::zero(); z.ncols()];
        DVector::from_fn(z.nrows(), |i, _| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = z[(i, j)];
            }
            self.evaluate(&row)
        })
    }
}

fn check_sample<T: Scalar>(z: &DMatrix<T>, targets: &[T], weights: &[T]) -> Result<()> {
    let n = z.nrows();
    if targets.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} rows, {} targets, {} weights",
            targets.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "weights must be finite and non-negative".into(),
        ));
    }
    if weights.iter().fold(T::zero(), |a, &w| a + w) <= T::zero() {
        return Err(Error::InvalidArgument("all weights are zero".into()));
    }
    if z.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("learner inputs"));
    }
    Ok(())
}

/// Result of [`fit_penalized`]: the component and its fitted values.
#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedFit<T: Scalar> {
    pub base: FittedBase<T>,
    pub fitted: DVector<T>,
}

/// Weighted penalized least squares `b = (ZᵀWZ + λR)⁻¹ZᵀWu`.
pub fn fit_penalized<T: Scalar>(
    z: &DMatrix<T>,
    targets: &[T],
    weights: &[T],
    lambda: T,
    penalty: &DMatrix<T>,
) -> Result<PenalizedFit<T>> {
    check_sample(z, targets, weights)?;
    let k = z.ncols();
    if penalty.shape() != (k, k) {
        return Err(Error::DimensionMismatch(
            "penalty matrix does not match score columns".into(),
        ));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be non-negative, got {lambda}"
        )));
    }
    let mut zw = z.clone();
    for (i, mut row) in zw.row_iter_mut().enumerate() {
        row *= weights[i];
    }
    let mut system = z.transpose() * &zw;
    if lambda > T::zero() {
        system += penalty * lambda;
    } else {
        log::debug!("penalized learner with lambda = 0 is the unpenalized projection");
    }
    let u = DVector::from_column_slice(targets);
    let coefs = linalg::spd_solve_vec(&system, &(zw.transpose() * u))?;
    let fitted = z * &coefs;
    Ok(PenalizedFit {
        base: FittedBase::Penalized {
            coefs: coefs.iter().copied().collect(),
            projection: lambda == T::zero(),
        },
        fitted,
    })
}

/// Linear smoother `S = Z(ZᵀZ + λR)⁻¹Zᵀ` of the unweighted penalized learner.
pub fn hat_matrix<T: Scalar>(
    z: &DMatrix<T>,
    lambda: T,
    penalty: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let system = z.transpose() * z + penalty * lambda;
    let solved = linalg::spd_solve(&system, &z.transpose())?;
    Ok(linalg::symmetrize(&(z * solved)))
}

/// `trace(S(λ)) = trace((ZᵀZ + λR)⁻¹ZᵀZ)` computed in coefficient space.
pub fn penalized_df<T: Scalar>(z: &DMatrix<T>, lambda: T, penalty: &DMatrix<T>) -> Result<T> {
    let gram = z.transpose() * z;
    let system = &gram + penalty * lambda;
    Ok(linalg::spd_solve(&system, &gram)?.trace())
}

/// Finds `λ` with `trace(S(λ))` within 0.01 of `df` by bisection on `log λ`.
pub fn lambda_for_df<T: Scalar>(z: &DMatrix<T>, penalty: &DMatrix<T>, df: T) -> Result<T> {
    let tolerance = T::lit(1e-3);
    let gram_trace = (z.transpose() * z).trace();
    let penalty_trace = penalty.trace();
    if !(penalty_trace > T::zero()) {
        return Err(Error::InvalidArgument("penalty matrix is zero".into()));
    }
    let scale = gram_trace / penalty_trace;
    let mut lo = (scale * T::lit(1e-10)).ln();
    let mut hi = (scale * T::lit(1e10)).ln();
    let df_lo = penalized_df(z, lo.exp(), penalty)?;
    let df_hi = penalized_df(z, hi.exp(), penalty)?;
    if df > df_lo + tolerance || df < df_hi - tolerance {
        return Err(Error::InvalidArgument(format!(
            "target degrees of freedom {df} outside the attainable range [{df_hi:.4}, {df_lo:.4}]"
        )));
    }
    let half = T::lit(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        let value = penalized_df(z, mid.exp(), penalty)?;
        if (value - df).abs() <= tolerance {
            return Ok(mid.exp());
        }
        if value > df {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(((lo + hi) * half).exp())
}

/// Componentwise selector: per column `b̂_j = Σw z u / Σw z²`, keeping the
/// column with the smallest weighted residual sum of squares (ties: lowest
/// index). Columns with zero weighted norm are skipped.
pub fn fit_componentwise<T: Scalar>(
    z: &DMatrix<T>,
    targets: &[T],
    weights: &[T],
) -> Result<FittedBase<T>> {
    check_sample(z, targets, weights)?;
    // Risk of column j is Σwu² − cross²/norm, so the largest reduction wins.
    let total = targets
        .iter()
        .zip(weights)
        .fold(T::zero(), |acc, (&u, &w)| acc + w * u * u);
    let tolerance = T::lit(64.0) * T::eps() * total;
    let mut best: Option<(usize, T, T)> = None;
    for j in 0..z.ncols() {
        let col = z.column(j);
        let mut norm = T::zero();
        let mut cross = T::zero();
        for i in 0..z.nrows() {
            norm += weights[i] * col[i] * col[i];
            cross += weights[i] * col[i] * targets[i];
        }
        if norm <= T::zero() {
            continue;
        }
        let slope = cross / norm;
        let reduction = cross * slope;
        if best.is_none_or(|(_, _, top)| reduction > top + tolerance) {
            best = Some((j, slope, reduction));
        }
    }
    let (index, slope, _) = best
        .ok_or_else(|| Error::LearnerFailure("every score column has zero weighted norm".into()))?;
    Ok(FittedBase::Componentwise { index, slope })
}

/// Exhaustive one-split search over all score columns and midpoints between
/// consecutive distinct values. Points with `z_j ≤ τ` go left.
///
/// Regression leaves hold weighted target means; classification leaves hold
/// the weighted majority label (ties: +1). Ties between splits go to the
/// smaller column, then the smaller threshold.
pub fn fit_stump<T: Scalar>(
    z: &DMatrix<T>,
    targets: &[T],
    weights: &[T],
    kind: TargetKind,
    min_leaf_weight: T,
) -> Result<Stump<T>> {
    check_sample(z, targets, weights)?;
    let n = z.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "a stump needs at least two samples".into(),
        ));
    }
    if kind == TargetKind::Classification {
        crate::data::check_labels(targets)?;
    }
    let total_w = weights.iter().fold(T::zero(), |a, &w| a + w);
    let total_wt = weights
        .iter()
        .zip(targets)
        .fold(T::zero(), |a, (&w, &t)| a + w * t);
    let total_wtt = weights
        .iter()
        .zip(targets)
        .fold(T::zero(), |a, (&w, &t)| a + w * t * t);
    let total_pos = weights
        .iter()
        .zip(targets)
        .filter(|(_, &t)| t > T::zero())
        .fold(T::zero(), |a, (&w, _)| a + w);

    // Loss to minimize, up to a constant.
    let leaf_value = |w: T, wt: T, pos: T| -> T {
        match kind {
            TargetKind::Regression => {
                if w > T::zero() {
                    wt / w
                } else {
                    T::zero()
                }
            }
            TargetKind::Classification => {
                if pos >= w - pos {
                    T::one()
                } else {
                    -T::one()
                }
            }
        }
    };
    let loss = |w: T, wt: T, pos: T| -> T {
        match kind {
            // −(Σwt)²/Σw; the Σwt² term is common to every split.
            TargetKind::Regression => {
                if w > T::zero() {
                    -(wt * wt) / w
                } else {
                    T::zero()
                }
            }
            TargetKind::Classification => {
                let neg = w - pos;
                if pos < neg {
                    pos
                } else {
                    neg
                }
            }
        }
    };
    let scale = match kind {
        TargetKind::Regression => total_wtt,
        TargetKind::Classification => total_w,
    };
    let tie_tolerance = T::lit(64.0) * T::eps() * scale;

    let mut best: Option<(T, Stump<T>)> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..z.ncols() {
        let col = z.column(j);
        order.sort_by(|&a, &b| {
            col[a]
                .partial_cmp(&col[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let (mut w_l, mut wt_l, mut pos_l) = (T::zero(), T::zero(), T::zero());
        for p in 0..n - 1 {
            let i = order[p];
            w_l += weights[i];
            wt_l += weights[i] * targets[i];
            if targets[i] > T::zero() {
                pos_l += weights[i];
            }
            let (a, b) = (col[order[p]], col[order[p + 1]]);
            if !(a < b) {
                continue;
            }
            let (w_r, wt_r, pos_r) = (total_w - w_l, total_wt - wt_l, total_pos - pos_l);
            if w_l < min_leaf_weight || w_r < min_leaf_weight {
                continue;
            }
            let value = loss(w_l, wt_l, pos_l) + loss(w_r, wt_r, pos_r);
            if best
                .as_ref()
                .is_none_or(|(best_value, _)| value < *best_value - tie_tolerance)
            {
                let mut threshold = (a + b) * T::lit(0.5);
                if threshold >= b {
                    threshold = a;
                }
                best = Some((
                    value,
                    Stump {
                        feature: j,
                        threshold,
                        left: leaf_value(w_l, wt_l, pos_l),
                        right: leaf_value(w_r, wt_r, pos_r),
                        degenerate: false,
                    },
                ));
            }
        }
    }
    match best {
        Some((_, stump)) => Ok(stump),
        None => {
            log::debug!("no admissible split; fitting a single-leaf stump");
            let value = leaf_value(total_w, total_wt, total_pos);
            let feature = 0;
            let threshold = z
                .column(feature)
                .iter()
                .copied()
                .fold(z[(0, feature)], |m, v| if v > m { v } else { m });
            Ok(Stump {
                feature,
                threshold,
                left: value,
                right: value,
                degenerate: true,
            })
        }
    }
}

/// A learner bound to a training design: penalty matrices and any
/// df-targeted `λ` are resolved once.
#[derive(Debug, Clone)]
pub struct Learner<T: Scalar> {
    spec: LearnerSpec<T>,
    lambda: T,
    penalty: Option<DMatrix<T>>,
}

impl<T: Scalar> Learner<T> {
    /// `penalty` is the roughness matrix of the score basis (needed by the
    /// penalized learner only).
    pub fn prepare(
        spec: &LearnerSpec<T>,
        z: &DMatrix<T>,
        penalty: Option<DMatrix<T>>,
    ) -> Result<Self> {
        spec.validate()?;
        let mut lambda = T::zero();
        if let LearnerSpec::Penalized {
            lambda: l,
            df_target,
            ..
        } = spec
        {
            let r = penalty.as_ref().ok_or_else(|| {
                Error::InvalidArgument("penalized learner needs a penalty matrix".into())
            })?;
            lambda = match df_target {
                Some(df) => lambda_for_df(z, r, *df)?,
                None => *l,
            };
        }
        Ok(Self {
            spec: spec.clone(),
            lambda,
            penalty,
        })
    }

    pub fn spec(&self) -> &LearnerSpec<T> {
        &self.spec
    }

    /// Resolved penalty weight (penalized learner only).
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn penalty(&self) -> Option<&DMatrix<T>> {
        self.penalty.as_ref()
    }

    /// Whether the learner's fit is a fixed linear map of the targets.
    pub fn is_linear_smoother(&self) -> bool {
        matches!(self.spec, LearnerSpec::Penalized { .. })
    }

    pub fn fit(
        &self,
        z: &DMatrix<T>,
        targets: &[T],
        weights: &[T],
        kind: TargetKind,
    ) -> Result<FittedBase<T>> {
        match &self.spec {
            LearnerSpec::Penalized { .. } => {
                let r = self.penalty.as_ref().expect("prepared with a penalty");
                Ok(fit_penalized(z, targets, weights, self.lambda, r)?.base)
            }
            LearnerSpec::Componentwise => fit_componentwise(z, targets, weights),
            LearnerSpec::Stump { min_leaf_weight } => Ok(FittedBase::Stump(fit_stump(
                z,
                targets,
                weights,
                kind,
                *min_leaf_weight,
            )?)),
        }
    }
}
