//! Functional linear models.
//!
//! Scalar-on-function: `y = β₀ + ∫ β(t) x(t) dt` with `β = Σ b_l φ_l`. After
//! expanding `x` in its own basis, `∫ β x = zᵀb` with scores `z = Jᵀc`, where
//! `J` is the cross-Gram between the data basis and the coefficient basis.
//! The intercept is recovered from centered data so the roughness penalty
//! never touches it.

use crate::basis::BasisSystem;
use crate::data::{FunctionalDataSet, Response};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Projection scores `Z = C·J` of a data set on a coefficient basis.
pub fn design_scores<T: Scalar>(
    dataset: &FunctionalDataSet<T>,
    beta_basis: &BasisSystem<T>,
) -> Result<DMatrix<T>> {
    let cross = dataset.basis().cross_gram(beta_basis)?;
    Ok(dataset.coefs() * cross)
}

/// Intercept and slope vector of a (penalized) least-squares fit on scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T: Scalar> {
    pub intercept: T,
    pub coefs: DVector<T>,
}

impl<T: Scalar> LinearFit<T> {
    pub fn predict_scores(&self, z: &DMatrix<T>) -> DVector<T> {
        (z * &self.coefs).add_scalar(self.intercept)
    }
}

/// `b = (Z_cᵀZ_c + λR)⁻¹ Z_cᵀ y_c` on column-centered data; `β₀ = ȳ − z̄ᵀb`.
///
/// `penalty` defaults to the identity when `None`.
pub fn fit_scores<T: Scalar>(
    z: &DMatrix<T>,
    y: &DVector<T>,
    lambda: T,
    penalty: Option<&DMatrix<T>>,
) -> Result<LinearFit<T>> {
    let (n, k) = z.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} score rows but {} responses",
            y.len()
        )));
    }
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("empty design".into()));
    }
    if z.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression inputs"));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be non-negative, got {lambda}"
        )));
    }
    let nf = T::from_count(n);
    let z_mean = DVector::from_fn(k, |j, _| z.column(j).sum() / nf);
    let y_mean = y.sum() / nf;
    let mut zc = z.clone();
    for (j, mut col) in zc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-z_mean[j]);
    }
    let yc = y.add_scalar(-y_mean);
    let mut system = zc.transpose() * &zc;
    if lambda > T::zero() {
        match penalty {
            Some(r) => {
                if r.shape() != (k, k) {
                    return Err(Error::DimensionMismatch(format!(
                        "penalty {}x{} for {k} coefficients",
                        r.nrows(),
                        r.ncols()
                    )));
                }
                system += r * lambda;
            }
            None => {
                for i in 0..k {
                    system[(i, i)] += lambda;
                }
            }
        }
    }
    let coefs = linalg::spd_solve_vec(&system, &(zc.transpose() * yc))?;
    let intercept = y_mean - z_mean.dot(&coefs);
    Ok(LinearFit { intercept, coefs })
}

/// Fitted scalar-on-function regression.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalLinearModel<T: Scalar> {
    intercept: T,
    coefs: DVector<T>,
    data_basis: BasisSystem<T>,
    beta_basis: BasisSystem<T>,
    cross_gram: DMatrix<T>,
    lambda: T,
    penalty_order: usize,
}

impl<T: Scalar> FunctionalLinearModel<T> {
    /// Fits `β` in `beta_basis` with roughness penalty `λ∫(β^(k))²`.
    pub fn fit(
        dataset: &FunctionalDataSet<T>,
        beta_basis: &BasisSystem<T>,
        lambda: T,
        penalty_order: usize,
    ) -> Result<Self> {
        let y = match dataset.response() {
            Response::Scalar(y) | Response::Labels(y) => y,
            _ => {
                return Err(Error::InvalidArgument(
                    "scalar-on-function regression needs a scalar response".into(),
                ))
            }
        };
        let cross_gram = dataset.basis().cross_gram(beta_basis)?;
        let z = dataset.coefs() * &cross_gram;
        let penalty = if lambda > T::zero() {
            Some(beta_basis.penalty_matrix(penalty_order)?)
        } else {
            None
        };
        let fit = fit_scores(&z, y, lambda, penalty.as_ref())?;
        Ok(Self {
            intercept: fit.intercept,
            coefs: fit.coefs,
            data_basis: dataset.basis().clone(),
            beta_basis: beta_basis.clone(),
            cross_gram,
            lambda,
            penalty_order,
        })
    }

    pub fn intercept(&self) -> T {
        self.intercept
    }

    /// Coefficients of `β(t)` in the coefficient basis.
    pub fn coefs(&self) -> &DVector<T> {
        &self.coefs
    }

    pub fn beta_basis(&self) -> &BasisSystem<T> {
        &self.beta_basis
    }

    pub fn data_basis(&self) -> &BasisSystem<T> {
        &self.data_basis
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn penalty_order(&self) -> usize {
        self.penalty_order
    }

    /// `β₀ + ∫ β(t) x(t) dt` for a curve given by its data-basis coefficients.
    pub fn predict(&self, curve: &[T]) -> Result<T> {
        if curve.len() != self.data_basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "curve has {} coefficients, model expects {}",
                curve.len(),
                self.data_basis.len()
            )));
        }
        let c = DVector::from_column_slice(curve);
        Ok(self.intercept + (self.cross_gram.transpose() * c).dot(&self.coefs))
    }

    pub fn predict_dataset(&self, dataset: &FunctionalDataSet<T>) -> Result<DVector<T>> {
        if dataset.basis() != &self.data_basis {
            return Err(Error::InvalidArgument(
                "data set basis differs from the training basis".into(),
            ));
        }
        Ok((dataset.coefs() * &self.cross_gram * &self.coefs).add_scalar(self.intercept))
    }

    /// `β(t)` on a grid.
    pub fn beta_on(&self, grid: &[T]) -> Result<DVector<T>> {
        Ok(self.beta_basis.eval(grid, 0)? * &self.coefs)
    }
}

/// Function-on-function regression
/// `y(t) = α(t) + ∫ β(s,t) x(s) ds`, `β(s,t) = Σ_k Σ_l b_kl ψ_k(s) φ_l(t)`,
/// with `ψ` the predictor basis and `φ` the response basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionOnFunctionModel<T: Scalar> {
    alpha: DVector<T>,
    surface: DMatrix<T>,
    predictor_basis: BasisSystem<T>,
    response_basis: BasisSystem<T>,
    lambda: T,
    training_loss: T,
}

impl<T: Scalar> FunctionOnFunctionModel<T> {
    /// Coefficients of the functional intercept `α(t)` in the response basis.
    pub fn alpha(&self) -> &DVector<T> {
        &self.alpha
    }

    /// Surface coefficients `B` (`K₁ × K₂`).
    pub fn surface(&self) -> &DMatrix<T> {
        &self.surface
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Empirical integrated squared loss on the training curves.
    pub fn training_loss(&self) -> T {
        self.training_loss
    }

    pub fn predictor_basis(&self) -> &BasisSystem<T> {
        &self.predictor_basis
    }

    pub fn response_basis(&self) -> &BasisSystem<T> {
        &self.response_basis
    }

    /// Response-basis coefficients of the predicted curve for each predictor row.
    pub fn predict(&self, predictor_coefs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if predictor_coefs.ncols() != self.predictor_basis.len() {
            return Err(Error::DimensionMismatch(
                "predictor coefficients do not match the basis".into(),
            ));
        }
        let z = predictor_coefs * self.predictor_basis.gram_matrix()?;
        let mut out = z * &self.surface;
        for mut row in out.row_iter_mut() {
            row += self.alpha.transpose();
        }
        Ok(out)
    }
}

/// Fits a function-on-function model minimizing
/// `Σ_i ∫ (y_i − ŷ_i)² dt + λ‖B‖²_F` (the intercept is not penalized).
///
/// With scores `Z = C_x J_x` and response Gram `J_y = QΛQᵀ`, the normal
/// equations `ZᵀZ B J_y + λB = Zᵀ D J_y` decouple in the rotated columns
/// `B' = BQ`: `(Λ_l ZᵀZ + λI) b'_l = Λ_l Zᵀ d'_l`.
pub fn fit_fof<T: Scalar>(
    x: &FunctionalDataSet<T>,
    y: &FunctionalDataSet<T>,
    lambda: T,
) -> Result<FunctionOnFunctionModel<T>> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} predictor curves but {} response curves",
            y.len()
        )));
    }
    if x.basis().domain() != y.basis().domain() {
        return Err(Error::DomainMismatch);
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be non-negative, got {lambda}"
        )));
    }
    let gram_x = x.basis().gram_matrix()?;
    let gram_y = y.basis().gram_matrix()?;
    let z = x.coefs() * &gram_x;
    let d = y.coefs();
    let (k1, k2) = (x.basis().len(), y.basis().len());

    let nf = T::from_count(n);
    let z_mean = DVector::from_fn(k1, |j, _| z.column(j).sum() / nf);
    let d_mean = DVector::from_fn(k2, |j, _| d.column(j).sum() / nf);
    let mut zc = z.clone();
    for (j, mut col) in zc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-z_mean[j]);
    }
    let mut dc = d.clone();
    for (j, mut col) in dc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-d_mean[j]);
    }

    let eig = SymmetricEigen::new(linalg::symmetrize(&gram_y));
    let q = eig.eigenvectors;
    let gram_z = zc.transpose() * &zc;
    let rhs = zc.transpose() * (&dc * &q);
    let mut rotated = DMatrix::zeros(k1, k2);
    for l in 0..k2 {
        let weight = eig.eigenvalues[l];
        if weight <= T::zero() {
            return Err(Error::Singular);
        }
        let mut system = &gram_z * weight;
        for i in 0..k1 {
            system[(i, i)] += lambda;
        }
        let col = linalg::spd_solve_vec(&system, &(rhs.column(l) * weight))?;
        rotated.set_column(l, &col);
    }
    let surface = rotated * q.transpose();
    let alpha = &d_mean - surface.transpose() * &z_mean;

    let mut loss = T::zero();
    for i in 0..n {
        let fitted = &alpha + surface.transpose() * z.row(i).transpose();
        let resid = d.row(i).transpose() - fitted;
        loss += (gram_y.transpose() * &resid).dot(&resid);
    }

    Ok(FunctionOnFunctionModel {
        alpha,
        surface,
        predictor_basis: x.basis().clone(),
        response_basis: y.basis().clone(),
        lambda,
        training_loss: loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_equal_coefficients_for_shared_orthonormal_basis() {
        let basis = BasisSystem::<f64>::fourier(5, 0.0, 1.0).unwrap();
        let c = DMatrix::from_fn(4, 5, |i, j| (i * 5 + j) as f64 * 0.1 - 0.7);
        let ds = FunctionalDataSet::new(basis.clone(), c.clone(), Response::None).unwrap();
        let z = design_scores(&ds, &basis).unwrap();
        assert!((z - c).amax() < 1e-15);
    }

    #[test]
    fn polynomial_scores_by_hand() {
        let basis = BasisSystem::<f64>::polynomial(2, 0.0, 1.0).unwrap();
        let ds = FunctionalDataSet::new(
            basis.clone(),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            Response::None,
        )
        .unwrap();
        let z = design_scores(&ds, &basis).unwrap();
        assert!((z[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((z[(0, 1)] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_domains_rejected() {
        let a = BasisSystem::<f64>::fourier(3, 0.0, 1.0).unwrap();
        let b = BasisSystem::<f64>::fourier(3, 0.0, 2.0).unwrap();
        let ds = FunctionalDataSet::new(a, DMatrix::zeros(2, 3), Response::None).unwrap();
        assert_eq!(design_scores(&ds, &b), Err(Error::DomainMismatch));
    }

    #[test]
    fn zero_curve_predicts_intercept() {
        let basis = BasisSystem::<f64>::fourier(3, 0.0, 1.0).unwrap();
        let c = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 0.0, 0.5, -1.0, 1.0, 0.0, 0.3, 0.2, 1.0, 0.0, -0.4, 0.1],
        );
        let y = DVector::from_vec(vec![2.0, 1.0, 0.5, 3.0]);
        let ds = FunctionalDataSet::new(basis.clone(), c, Response::Scalar(y)).unwrap();
        let model = FunctionalLinearModel::fit(&ds, &basis, 0.0, 2).unwrap();
        assert!((model.predict(&[0.0; 3]).unwrap() - model.intercept()).abs() < 1e-15);
        assert!(model.predict(&[0.0; 2]).is_err());
    }

    #[test]
    fn singular_unpenalized_fit_reported() {
        let z = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(fit_scores(&z, &y, 0.0, None).is_err());
        let mut bad = y.clone();
        bad[0] = f64::NAN;
        assert_eq!(
            fit_scores(&z, &bad, 1.0, None),
            Err(Error::NonFinite("regression inputs"))
        );
    }
}
