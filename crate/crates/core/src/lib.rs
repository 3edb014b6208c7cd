//! Boosting for functional data.
//!
//! Curves are represented by coefficients in a finite [`BasisSystem`]
//! (Fourier, B-spline, or polynomial). Supervised models are built either
//! directly as functional linear models ([`flm`]) or by boosting weak
//! learners over the curves' projection scores ([`boost`]): AdaBoost,
//! L2Boost, and LogitBoost. [`modelsel`] chooses the number of boosting
//! iterations by k-fold cross-validation or, for L2Boost with a fixed linear
//! smoother, by AIC/BIC from the boosting operator's degrees of freedom.
//!
//! Everything is generic over the floating-point [`Scalar`]; the aliases at
//! the crate root fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod boost;
pub mod data;
pub mod error;
pub mod flm;
pub mod learners;
pub mod linalg;
pub mod modelsel;
pub mod quadrature;
pub mod scalar;

pub use basis::{BasisKind, BasisSystem};
pub use boost::{
    adaboost, l2boost, logitboost, Algorithm, BoostConfig, BoostedModel, FeatureMap, LossKind,
    OutputKind, ResampleMode, Stage,
};
pub use data::{expand_curves, fit_coefficients, FunctionalDataSet, Response};
pub use error::{Error, Result};
pub use flm::{design_scores, fit_fof, FunctionOnFunctionModel, FunctionalLinearModel};
pub use learners::{FittedBase, LearnerSpec, TargetKind};
pub use modelsel::{cross_validate, kfold, FoldAssignment, MetricKind, SelectionCurve};
pub use quadrature::QuadratureRule;
pub use scalar::Scalar;

pub type Basis = BasisSystem<f64>;
pub type DataSet = FunctionalDataSet<f64>;
pub type Model = BoostedModel<f64>;
pub type LinearModel = FunctionalLinearModel<f64>;
pub type FofModel = FunctionOnFunctionModel<f64>;
pub type Config = BoostConfig<f64>;
pub type LearnerConfig = LearnerSpec<f64>;
pub type Curve = SelectionCurve<f64>;
