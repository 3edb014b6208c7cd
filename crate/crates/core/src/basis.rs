//! Basis systems on a closed interval: evaluation, Gram matrices, and
//! derivative roughness penalties.
//!
//! Three families are supported:
//!
//! * **Fourier** with period `b − a`: `1/√P`, then `√(2/P)·sin(2πkt/P)`,
//!   `√(2/P)·cos(2πkt/P)` for `k = 1, 2, …`; an even count ends with a sine.
//!   The system is orthonormal on `[a, b]`, so its Gram matrix is the identity.
//! * **Polynomial**: the monomials `1, t, …, t^(K−1)`.
//! * **B-spline** of a given degree over an explicit knot vector whose first
//!   and last knots are the domain endpoints; `K = #knots − degree − 1`.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Nodes per panel for the generic cross-basis quadrature.
const GENERIC_NODES_PER_PANEL: usize = 24;
const GENERIC_PANELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisKind<T> {
    Fourier,
    Polynomial,
    #[serde(rename = "bspline")]
    BSpline {
        degree: usize,
        knots: Vec<T>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSystem<T> {
    #[serde(flatten)]
    kind: BasisKind<T>,
    nbasis: usize,
    lower: T,
    upper: T,
}

impl<T: Scalar> BasisSystem<T> {
    /// Validating constructor. For B-splines `nbasis` must equal
    /// `#knots − degree − 1` and the knots must run from `lower` to `upper`.
    pub fn new(kind: BasisKind<T>, nbasis: usize, lower: T, upper: T) -> Result<Self> {
        let basis = Self {
            kind,
            nbasis,
            lower,
            upper,
        };
        basis.validate()?;
        Ok(basis)
    }

    pub fn fourier(nbasis: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(BasisKind::Fourier, nbasis, lower, upper)
    }

    pub fn polynomial(nbasis: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(BasisKind::Polynomial, nbasis, lower, upper)
    }

    /// B-spline basis over an explicit knot vector; the domain is
    /// `[knots[0], knots[last]]`.
    pub fn bspline(degree: usize, knots: Vec<T>) -> Result<Self> {
        if knots.len() < degree + 2 {
            return Err(Error::InvalidBasis(format!(
                "degree {degree} needs at least {} knots, got {}",
                degree + 2,
                knots.len()
            )));
        }
        let nbasis = knots.len() - degree - 1;
        let (lower, upper) = (knots[0], knots[knots.len() - 1]);
        Self::new(BasisKind::BSpline { degree, knots }, nbasis, lower, upper)
    }

    /// Clamped B-spline basis with `nbasis` functions and equally spaced
    /// interior knots.
    pub fn bspline_uniform(nbasis: usize, degree: usize, lower: T, upper: T) -> Result<Self> {
        if nbasis < degree + 1 {
            return Err(Error::InvalidBasis(format!(
                "a degree-{degree} spline basis needs at least {} functions",
                degree + 1
            )));
        }
        let interior = nbasis - degree - 1;
        let mut knots = vec![lower; degree + 1];
        let step = (upper - lower) / T::from_count(interior + 1);
        knots.extend((1..=interior).map(|i| lower + step * T::from_count(i)));
        knots.extend(std::iter::repeat_n(upper, degree + 1));
        Self::bspline(degree, knots)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nbasis == 0 {
            return Err(Error::InvalidBasis(
                "basis needs at least one function".into(),
            ));
        }
        if !self.lower.is_finite() || !self.upper.is_finite() || !(self.lower < self.upper) {
            return Err(Error::InvalidBasis(format!(
                "degenerate domain [{}, {}]",
                self.lower, self.upper
            )));
        }
        if let BasisKind::BSpline { degree, knots } = &self.kind {
            let degree = *degree;
            if knots.iter().any(|k| !k.is_finite()) {
                return Err(Error::InvalidBasis("non-finite knot".into()));
            }
            if knots.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidBasis(
                    "knot vector must be non-decreasing".into(),
                ));
            }
            if knots.len() < degree + 2 || self.nbasis != knots.len() - degree - 1 {
                return Err(Error::InvalidBasis(format!(
                    "{} functions inconsistent with {} knots of degree {degree}",
                    self.nbasis,
                    knots.len()
                )));
            }
            if knots[0] != self.lower || knots[knots.len() - 1] != self.upper {
                return Err(Error::InvalidBasis(
                    "knot vector must span the domain".into(),
                ));
            }
            let mut run = 1;
            for w in knots.windows(2) {
                run = if w[0] == w[1] { run + 1 } else { 1 };
                if run > degree + 1 {
                    return Err(Error::InvalidBasis(format!(
                        "knot multiplicity exceeds degree + 1 = {}",
                        degree + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &BasisKind<T> {
        &self.kind
    }

    /// Number of basis functions `K`.
    pub fn len(&self) -> usize {
        self.nbasis
    }

    pub fn is_empty(&self) -> bool {
        self.nbasis == 0
    }

    pub fn domain(&self) -> (T, T) {
        (self.lower, self.upper)
    }

    pub fn period(&self) -> T {
        self.upper - self.lower
    }

    /// Highest derivative order that can be evaluated (`None`: unbounded).
    pub fn max_derivative(&self) -> Option<usize> {
        match &self.kind {
            BasisKind::BSpline { degree, .. } => Some(*degree),
            _ => None,
        }
    }

    fn check_derivative(&self, order: usize) -> Result<()> {
        match self.max_derivative() {
            Some(max) if order > max => Err(Error::UnsupportedDerivative { order, max }),
            _ => Ok(()),
        }
    }

    fn check_point(&self, t: T) -> Result<()> {
        if !(t >= self.lower && t <= self.upper) {
            return Err(Error::OutOfDomain {
                point: t.to_f64_lossy(),
                lower: self.lower.to_f64_lossy(),
                upper: self.upper.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Values `ψ_l^(d)(t)` for `l = 1..K`.
    pub fn eval_point(&self, t: T, derivative: usize) -> Result<Vec<T>> {
        self.check_point(t)?;
        self.check_derivative(derivative)?;
        let mut out = vec![T::zero(); self.nbasis];
        match &self.kind {
            BasisKind::Fourier => self.fourier_values(t, derivative, &mut out),
            BasisKind::Polynomial => polynomial_values(t, derivative, &mut out),
            BasisKind::BSpline { degree, knots } => {
                bspline_values(knots, *degree, t, derivative, &mut out)
            }
        }
        Ok(out)
    }

    /// Evaluation matrix `Φ` with `Φ[j][l] = ψ_l^(d)(t_j)`.
    pub fn eval(&self, grid: &[T], derivative: usize) -> Result<DMatrix<T>> {
        self.check_derivative(derivative)?;
        let mut phi = DMatrix::zeros(grid.len(), self.nbasis);
        for (j, &t) in grid.iter().enumerate() {
            let row = self.eval_point(t, derivative)?;
            for (l, v) in row.into_iter().enumerate() {
                phi[(j, l)] = v;
            }
        }
        Ok(phi)
    }

    fn fourier_values(&self, t: T, derivative: usize, out: &mut [T]) {
        let period = self.period();
        let two = T::lit(2.0);
        out[0] = if derivative == 0 {
            T::one() / period.sqrt()
        } else {
            T::zero()
        };
        let amp = (two / period).sqrt();
        for (l, slot) in out.iter_mut().enumerate().take(self.nbasis).skip(1) {
            let k = l.div_ceil(2);
            let omega = T::two_pi() * T::from_count(k) / period;
            let (s, c) = (omega * t).sin_cos();
            let is_sine = l % 2 == 1;
            // d-th derivative of sin cycles sin, cos, -sin, -cos.
            let base = match (is_sine, derivative % 4) {
                (true, 0) | (false, 3) => s,
                (true, 1) | (false, 0) => c,
                (true, 2) | (false, 1) => -s,
                _ => -c,
            };
            *slot = amp * omega.powi(derivative as i32) * base;
        }
    }

    /// Gram matrix `J_ij = ∫ ψ_i ψ_j`.
    pub fn gram_matrix(&self) -> Result<DMatrix<T>> {
        self.penalty_matrix(0)
    }

    /// Roughness penalty `R_ij = ∫ ψ_i^(k) ψ_j^(k)`; `k = 0` is the Gram matrix.
    pub fn penalty_matrix(&self, order: usize) -> Result<DMatrix<T>> {
        self.check_derivative(order)?;
        let k = self.nbasis;
        let m = match &self.kind {
            BasisKind::Fourier => {
                let period = self.period();
                DMatrix::from_fn(k, k, |i, j| {
                    if i != j {
                        T::zero()
                    } else if i == 0 {
                        if order == 0 {
                            T::one()
                        } else {
                            T::zero()
                        }
                    } else {
                        let freq = T::two_pi() * T::from_count(i.div_ceil(2)) / period;
                        freq.powi(2 * order as i32)
                    }
                })
            }
            BasisKind::Polynomial => polynomial_inner_products(k, k, order, self.lower, self.upper),
            BasisKind::BSpline { degree, knots } => {
                let rule = QuadratureRule::composite_gauss_legendre(knots, degree + 1)?;
                self.numeric_inner_products(self, order, order, &rule)?
            }
        };
        Ok(crate::linalg::symmetrize(&m))
    }

    /// Cross-Gram `J_lj = ∫ ψ_l φ_j` between this basis (rows) and `other` (columns).
    pub fn cross_gram(&self, other: &BasisSystem<T>) -> Result<DMatrix<T>> {
        if self.domain() != other.domain() {
            return Err(Error::DomainMismatch);
        }
        if self == other {
            return self.gram_matrix();
        }
        match (&self.kind, &other.kind) {
            (BasisKind::Fourier, BasisKind::Fourier) => {
                Ok(DMatrix::from_fn(self.nbasis, other.nbasis, |i, j| {
                    if i == j {
                        T::one()
                    } else {
                        T::zero()
                    }
                }))
            }
            (BasisKind::Polynomial, BasisKind::Polynomial) => Ok(polynomial_inner_products(
                self.nbasis,
                other.nbasis,
                0,
                self.lower,
                self.upper,
            )),
            _ => {
                let rule = self.generic_rule(other)?;
                self.numeric_inner_products(other, 0, 0, &rule)
            }
        }
    }

    /// Panels for integrating products of two arbitrary bases: uniform panels
    /// refined at every spline knot.
    fn generic_rule(&self, other: &BasisSystem<T>) -> Result<QuadratureRule<T>> {
        let mut points: Vec<T> = (0..=GENERIC_PANELS)
            .map(|i| {
                if i == GENERIC_PANELS {
                    self.upper
                } else {
                    self.lower + self.period() * T::from_count(i) / T::from_count(GENERIC_PANELS)
                }
            })
            .collect();
        for basis in [self, other] {
            if let BasisKind::BSpline { knots, .. } = &basis.kind {
                points.extend(knots.iter().copied());
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        points.dedup();
        QuadratureRule::composite_gauss_legendre(&points, GENERIC_NODES_PER_PANEL)
    }

    fn numeric_inner_products(
        &self,
        other: &BasisSystem<T>,
        order_self: usize,
        order_other: usize,
        rule: &QuadratureRule<T>,
    ) -> Result<DMatrix<T>> {
        let mut out = DMatrix::zeros(self.nbasis, other.nbasis);
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let a = self.eval_point(t, order_self)?;
            let b = other.eval_point(t, order_other)?;
            for (i, &ai) in a.iter().enumerate() {
                if ai == T::zero() {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    out[(i, j)] += w * ai * bj;
                }
            }
        }
        Ok(out)
    }
}

fn falling_factorial<T: Scalar>(n: usize, k: usize) -> T {
    (0..k).fold(T::one(), |acc, i| acc * T::from_count(n - i))
}

fn polynomial_values<T: Scalar>(t: T, derivative: usize, out: &mut [T]) {
    for (l, v) in out.iter_mut().enumerate() {
        *v = if l < derivative {
            T::zero()
        } else {
            falling_factorial::<T>(l, derivative) * t.powi((l - derivative) as i32)
        };
    }
}

/// `∫_a^b (t^i)^(k) (t^j)^(k) dt` in closed form.
fn polynomial_inner_products<T: Scalar>(
    rows: usize,
    cols: usize,
    order: usize,
    a: T,
    b: T,
) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |i, j| {
        if i < order || j < order {
            return T::zero();
        }
        let p = (i - order + j - order + 1) as i32;
        let coef = falling_factorial::<T>(i, order) * falling_factorial::<T>(j, order);
        coef * (b.powi(p) - a.powi(p)) / T::lit(p as f64)
    })
}

/// B-spline values (or derivatives) of every basis function at `t`.
///
/// Degree `degree − derivative` values come from the Cox–de Boor recurrence;
/// each remaining degree applies the derivative recurrence
/// `D B_{j,q} = q (B_{j,q−1}/(t_{j+q} − t_j) − B_{j+1,q−1}/(t_{j+q+1} − t_{j+1}))`.
fn bspline_values<T: Scalar>(knots: &[T], degree: usize, t: T, derivative: usize, out: &mut [T]) {
    let m = knots.len();
    let upper = knots[m - 1];
    let mut values = vec![T::zero(); m - 1];
    let span = if t == upper {
        // Closed at the right end: last non-empty interval.
        (0..m - 1).rev().find(|&j| knots[j] < knots[j + 1])
    } else {
        (0..m - 1).find(|&j| knots[j] <= t && t < knots[j + 1])
    };
    if let Some(j) = span {
        values[j] = T::one();
    }
    let ratio = |num: T, den: T| {
        if den == T::zero() {
            T::zero()
        } else {
            num / den
        }
    };
    let base_degree = degree - derivative;
    for q in 1..=base_degree {
        for j in 0..m - 1 - q {
            let left = ratio(t - knots[j], knots[j + q] - knots[j]) * values[j];
            let right =
                ratio(knots[j + q + 1] - t, knots[j + q + 1] - knots[j + 1]) * values[j + 1];
            values[j] = left + right;
        }
    }
    for q in base_degree + 1..=degree {
        let qf = T::from_count(q);
        for j in 0..m - 1 - q {
            let left = ratio(values[j], knots[j + q] - knots[j]);
            let right = ratio(values[j + 1], knots[j + q + 1] - knots[j + 1]);
            values[j] = qf * (left - right);
        }
    }
    out.copy_from_slice(&values[..out.len()]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn constant_polynomial() {
        let basis = BasisSystem::<f64>::polynomial(1, 0.0, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(basis.eval_point(t, 0).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn fourier_triple_values() {
        let basis = BasisSystem::<f64>::fourier(3, 0.0, 1.0).unwrap();
        let v = basis.eval_point(0.25, 0).unwrap();
        let s2 = 2f64.sqrt();
        assert_close(v[0], 1.0, 1e-15);
        assert_close(v[1], s2, 1e-15);
        assert_close(v[2], 0.0, 1e-15);
        let d2 = basis.eval_point(0.0, 2).unwrap();
        assert_close(d2[1], 0.0, 1e-12);
        let tpi = 2.0 * std::f64::consts::PI;
        assert_close(d2[2], -s2 * tpi * tpi, 1e-10);
    }

    #[test]
    fn fourier_even_count_ends_with_sine() {
        let basis = BasisSystem::<f64>::fourier(4, 0.0, 2.0).unwrap();
        let v = basis.eval_point(0.25, 0).unwrap();
        // Fourth function: sin(2π·2t/2) scaled by √(2/2) = 1 → sin(π/2) = 1.
        assert_close(v[3], 1.0, 1e-15);
    }

    #[test]
    fn polynomial_evaluation_matrix() {
        let basis = BasisSystem::<f64>::polynomial(2, 0.0, 1.0).unwrap();
        let phi = basis.eval(&[0.0, 1.0], 0).unwrap();
        assert_eq!(phi, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        let d = basis.eval(&[0.5], 1).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
    }

    #[test]
    fn bspline_dimension_formula() {
        let knots: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let basis = BasisSystem::bspline(3, knots).unwrap();
        assert_eq!(basis.len(), 11 - 3 - 1);
        let clamped = BasisSystem::<f64>::bspline_uniform(9, 3, 0.0, 1.0).unwrap();
        assert_eq!(clamped.len(), 9);
    }

    #[test]
    fn bspline_partition_of_unity_and_derivative() {
        let basis = BasisSystem::<f64>::bspline_uniform(8, 3, 0.0, 2.0).unwrap();
        let h = 1e-6;
        for i in 0..=40 {
            let t = 2.0 * i as f64 / 40.0;
            let v = basis.eval_point(t, 0).unwrap();
            assert_close(v.iter().sum(), 1.0, 1e-12);
            let d: f64 = basis.eval_point(t, 1).unwrap().iter().sum();
            assert_close(d, 0.0, 1e-10);
        }
        // Central difference check of the first derivative away from knots.
        let t = 0.37;
        let d = basis.eval_point(t, 1).unwrap();
        let hi = basis.eval_point(t + h, 0).unwrap();
        let lo = basis.eval_point(t - h, 0).unwrap();
        for l in 0..basis.len() {
            assert_close(d[l], (hi[l] - lo[l]) / (2.0 * h), 1e-6);
        }
    }

    #[test]
    fn invalid_bases_rejected() {
        assert!(BasisSystem::<f64>::fourier(0, 0.0, 1.0).is_err());
        assert!(BasisSystem::<f64>::fourier(3, 1.0, 1.0).is_err());
        assert!(BasisSystem::<f64>::bspline(3, vec![0.0, 0.5, 0.2, 1.0, 1.0, 1.0]).is_err());
        assert!(BasisSystem::new(
            BasisKind::BSpline {
                degree: 1,
                knots: vec![0.0, 0.5, 1.0]
            },
            2,
            0.0,
            1.0
        )
        .is_err());
        assert!(BasisSystem::<f64>::bspline(1, vec![0.0, 0.5, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn domain_and_derivative_errors() {
        let basis = BasisSystem::<f64>::bspline_uniform(5, 2, 0.0, 1.0).unwrap();
        assert!(matches!(
            basis.eval_point(1.5, 0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            basis.eval_point(0.5, 3),
            Err(Error::UnsupportedDerivative { order: 3, max: 2 })
        ));
        assert!(basis.penalty_matrix(3).is_err());
    }

    #[test]
    fn closed_form_matrices() {
        let fourier = BasisSystem::<f64>::fourier(5, 0.0, 1.0).unwrap();
        assert_eq!(fourier.gram_matrix().unwrap(), DMatrix::identity(5, 5));
        let r2 = fourier.penalty_matrix(2).unwrap();
        assert_close(r2[(1, 1)], (2.0 * std::f64::consts::PI).powi(4), 1e-9);
        assert_close(r2[(1, 1)], 1558.5454565440389, 1e-9);

        let poly = BasisSystem::<f64>::polynomial(2, 0.0, 1.0).unwrap();
        let j = poly.gram_matrix().unwrap();
        assert_close(j[(0, 1)], 0.5, 1e-15);
        assert_close(j[(1, 1)], 1.0 / 3.0, 1e-15);
        assert_eq!(
            poly.penalty_matrix(1).unwrap(),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])
        );
    }

    #[test]
    fn cross_gram_polynomial_vs_numeric() {
        let poly = BasisSystem::<f64>::polynomial(3, 0.0, 1.0).unwrap();
        let spline = BasisSystem::<f64>::bspline_uniform(6, 3, 0.0, 1.0).unwrap();
        let cross = poly.cross_gram(&spline).unwrap();
        // Row 0 integrates each spline; clamped uniform splines sum to 1.
        assert_close(cross.row(0).sum(), 1.0, 1e-13);
        let other = BasisSystem::<f64>::fourier(3, 0.0, 2.0).unwrap();
        assert_eq!(poly.cross_gram(&other), Err(Error::DomainMismatch));
    }
}
