//! Functional data sets: basis coefficients of sampled curves plus responses.

use crate::basis::BasisSystem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Response attached to each curve of a [`FunctionalDataSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum Response<T: Scalar> {
    None,
    Scalar(DVector<T>),
    /// Class labels in {−1, +1}.
    Labels(DVector<T>),
    /// Response curves as coefficients over their own basis.
    Functional {
        basis: BasisSystem<T>,
        coefs: DMatrix<T>,
    },
}

impl<T: Scalar> Response<T> {
    fn len(&self) -> Option<usize> {
        match self {
            Response::None => None,
            Response::Scalar(y) | Response::Labels(y) => Some(y.len()),
            Response::Functional { coefs, .. } => Some(coefs.nrows()),
        }
    }
}

/// Means removed by [`FunctionalDataSet::center`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecord<T: Scalar> {
    pub curve: DVector<T>,
    pub response: Option<T>,
}

/// `n` curves as rows of an `n × K` coefficient matrix over a shared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataSet<T: Scalar> {
    basis: BasisSystem<T>,
    coefs: DMatrix<T>,
    response: Response<T>,
    mean: Option<MeanRecord<T>>,
}

impl<T: Scalar> FunctionalDataSet<T> {
    pub fn new(basis: BasisSystem<T>, coefs: DMatrix<T>, response: Response<T>) -> Result<Self> {
        if coefs.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "data set needs at least one curve".into(),
            ));
        }
        if coefs.ncols() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficient columns for a basis of {} functions",
                coefs.ncols(),
                basis.len()
            )));
        }
        if let Some(len) = response.len() {
            if len != coefs.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "{} responses for {} curves",
                    len,
                    coefs.nrows()
                )));
            }
        }
        if coefs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curve coefficients"));
        }
        if let Response::Labels(y) = &response {
            check_labels(y.as_slice())?;
        }
        Ok(Self {
            basis,
            coefs,
            response,
            mean: None,
        })
    }

    /// Expands sampled curves (rows of `values`, one column per grid point).
    pub fn from_samples(
        grid: &[T],
        values: &DMatrix<T>,
        basis: BasisSystem<T>,
        lambda: T,
        penalty_order: usize,
        response: Response<T>,
    ) -> Result<Self> {
        let coefs = expand_curves(grid, values, &basis, lambda, penalty_order)?;
        Self::new(basis, coefs, response)
    }

    pub fn basis(&self) -> &BasisSystem<T> {
        &self.basis
    }

    /// Coefficient matrix `C` (`n × K`).
    pub fn coefs(&self) -> &DMatrix<T> {
        &self.coefs
    }

    pub fn response(&self) -> &Response<T> {
        &self.response
    }

    pub fn mean(&self) -> Option<&MeanRecord<T>> {
        self.mean.as_ref()
    }

    pub fn len(&self) -> usize {
        self.coefs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coefs.nrows() == 0
    }

    /// Subset of curves in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let coefs = self.coefs.select_rows(rows);
        let response = match &self.response {
            Response::None => Response::None,
            Response::Scalar(y) => Response::Scalar(y.select_rows(rows)),
            Response::Labels(y) => Response::Labels(y.select_rows(rows)),
            Response::Functional { basis, coefs } => Response::Functional {
                basis: basis.clone(),
                coefs: coefs.select_rows(rows),
            },
        };
        Self {
            basis: self.basis.clone(),
            coefs,
            response,
            mean: None,
        }
    }

    /// Removes column means of `C` and, for scalar responses, the response
    /// mean. Labels and functional responses are left untouched.
    ///
    /// Returns the centered set and the removed means; the centered set keeps
    /// the cumulative record so repeated centering composes.
    pub fn center(&self) -> (Self, DVector<T>, Option<T>) {
        let n = T::from_count(self.len());
        let curve_mean = DVector::from_fn(self.basis.len(), |j, _| self.coefs.column(j).sum() / n);
        let mut coefs = self.coefs.clone();
        for (j, mut col) in coefs.column_iter_mut().enumerate() {
            col.add_scalar_mut(-curve_mean[j]);
        }
        let (response, response_mean) = match &self.response {
            Response::Scalar(y) => {
                let mean = y.sum() / n;
                (Response::Scalar(y.add_scalar(-mean)), Some(mean))
            }
            other => (other.clone(), None),
        };
        let record = match &self.mean {
            Some(prev) => MeanRecord {
                curve: &prev.curve + &curve_mean,
                response: match (prev.response, response_mean) {
                    (Some(a), Some(b)) => Some(a + b),
                    (a, b) => a.or(b),
                },
            },
            None => MeanRecord {
                curve: curve_mean.clone(),
                response: response_mean,
            },
        };
        let centered = Self {
            basis: self.basis.clone(),
            coefs,
            response,
            mean: Some(record),
        };
        (centered, curve_mean, response_mean)
    }
}

pub(crate) fn check_labels<T: Scalar>(y: &[T]) -> Result<()> {
    for (index, &v) in y.iter().enumerate() {
        if v != T::one() && v != -T::one() {
            return Err(Error::InvalidLabel {
                index,
                value: v.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Normal-equation matrix `ΦᵀΦ + λR_k` and the evaluation matrix `Φ`.
fn smoothing_system<T: Scalar>(
    grid: &[T],
    basis: &BasisSystem<T>,
    lambda: T,
    penalty_order: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty sampling grid".into()));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "smoothing parameter must be finite and non-negative, got {lambda}"
        )));
    }
    if lambda == T::zero() && grid.len() < basis.len() {
        return Err(Error::Singular);
    }
    let phi = basis.eval(grid, 0)?;
    let mut system = phi.transpose() * &phi;
    if lambda > T::zero() {
        system += basis.penalty_matrix(penalty_order)? * lambda;
    }
    Ok((system, phi))
}

/// Penalized least-squares coefficients of one sampled curve:
/// `argmin_c Σ_j (v_j − Σ_l c_l ψ_l(t_j))² + λ cᵀR_k c`.
pub fn fit_coefficients<T: Scalar>(
    grid: &[T],
    values: &[T],
    basis: &BasisSystem<T>,
    lambda: T,
    penalty_order: usize,
) -> Result<DVector<T>> {
    if grid.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} grid points but {} observations",
            grid.len(),
            values.len()
        )));
    }
    let matrix = DMatrix::from_row_slice(1, values.len(), values);
    let coefs = expand_curves(grid, &matrix, basis, lambda, penalty_order)?;
    Ok(coefs.row(0).transpose())
}

/// Row-wise [`fit_coefficients`] for `n` curves sampled on a shared grid
/// (`values` is `n × |grid|`); returns the `n × K` coefficient matrix.
pub fn expand_curves<T: Scalar>(
    grid: &[T],
    values: &DMatrix<T>,
    basis: &BasisSystem<T>,
    lambda: T,
    penalty_order: usize,
) -> Result<DMatrix<T>> {
    if values.ncols() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} sample columns for {} grid points",
            values.ncols(),
            grid.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("curve samples"));
    }
    let (system, phi) = smoothing_system(grid, basis, lambda, penalty_order)?;
    let rhs = phi.transpose() * values.transpose();
    let solution = linalg::spd_solve(&system, &rhs)?;
    Ok(solution.transpose())
}

/// Evaluates curves given by coefficient rows on a grid (`n × |grid|`).
pub fn evaluate_curves<T: Scalar>(
    coefs: &DMatrix<T>,
    basis: &BasisSystem<T>,
    grid: &[T],
) -> Result<DMatrix<T>> {
    let phi = basis.eval(grid, 0)?;
    Ok(coefs * phi.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fourier_representation() {
        let basis = BasisSystem::<f64>::fourier(3, 0.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..64).map(|j| j as f64 / 63.0).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let c = fit_coefficients(&grid, &values, &basis, 0.0, 2).unwrap();
        assert!((c[0]).abs() < 1e-12);
        assert!((c[1] - 1.0).abs() < 1e-12);
        assert!((c[2]).abs() < 1e-12);
    }

    #[test]
    fn constant_reproduction() {
        let grid: Vec<f64> = (0..30).map(|j| (j as f64 / 29.0).powi(2)).collect();
        let values = vec![5.0; grid.len()];
        for basis in [
            BasisSystem::<f64>::fourier(7, 0.0, 1.0).unwrap(),
            BasisSystem::<f64>::polynomial(4, 0.0, 1.0).unwrap(),
            BasisSystem::<f64>::bspline_uniform(8, 3, 0.0, 1.0).unwrap(),
        ] {
            let c = fit_coefficients(&grid, &values, &basis, 0.0, 2).unwrap();
            let fitted = basis.eval(&grid, 0).unwrap() * c;
            assert!(fitted.iter().all(|v| (v - 5.0).abs() < 1e-10));
        }
    }

    #[test]
    fn underdetermined_unpenalized_fit_fails() {
        let basis = BasisSystem::<f64>::fourier(5, 0.0, 1.0).unwrap();
        let grid = [0.0, 0.5, 1.0];
        assert_eq!(
            fit_coefficients(&grid, &[1.0, 2.0, 3.0], &basis, 0.0, 2),
            Err(Error::Singular)
        );
        assert!(fit_coefficients(&grid, &[1.0, 2.0, 3.0], &basis, 1.0, 0).is_ok());
        assert!(fit_coefficients(&grid, &[1.0, 2.0], &basis, 1.0, 0).is_err());
        assert!(fit_coefficients(&grid, &[1.0, 2.0, 3.0], &basis, -1.0, 0).is_err());
    }

    #[test]
    fn centering_arithmetic() {
        let basis = BasisSystem::<f64>::polynomial(2, 0.0, 1.0).unwrap();
        let coefs = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 2.0]);
        let ds = FunctionalDataSet::new(
            basis,
            coefs,
            Response::Scalar(DVector::from_vec(vec![1.0, 4.0])),
        )
        .unwrap();
        let (centered, mean, ymean) = ds.center();
        assert_eq!(
            centered.coefs(),
            &DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 1.0, 1.0])
        );
        assert_eq!(mean, DVector::from_vec(vec![2.0, 1.0]));
        assert_eq!(ymean, Some(2.5));
        let (twice, mean2, _) = centered.center();
        assert_eq!(twice.coefs(), centered.coefs());
        assert_eq!(mean2, DVector::zeros(2));
        assert_eq!(twice.mean().unwrap().curve, mean);
    }

    #[test]
    fn labels_are_not_centered() {
        let basis = BasisSystem::<f64>::fourier(1, 0.0, 1.0).unwrap();
        let coefs = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 6.0]);
        let labels = DVector::from_vec(vec![1.0, 1.0, -1.0]);
        let ds = FunctionalDataSet::new(basis, coefs, Response::Labels(labels.clone())).unwrap();
        let (centered, _, ymean) = ds.center();
        assert_eq!(centered.response(), &Response::Labels(labels));
        assert_eq!(ymean, None);
    }

    #[test]
    fn invalid_data_sets() {
        let basis = BasisSystem::<f64>::fourier(2, 0.0, 1.0).unwrap();
        assert!(
            FunctionalDataSet::new(basis.clone(), DMatrix::zeros(2, 3), Response::None).is_err()
        );
        assert!(FunctionalDataSet::new(
            basis.clone(),
            DMatrix::zeros(2, 2),
            Response::Scalar(DVector::zeros(3))
        )
        .is_err());
        assert!(matches!(
            FunctionalDataSet::new(
                basis,
                DMatrix::zeros(2, 2),
                Response::Labels(DVector::from_vec(vec![1.0, 0.0]))
            ),
            Err(Error::InvalidLabel { index: 1, .. })
        ));
    }
}
