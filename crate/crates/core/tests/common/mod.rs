#![allow(dead_code)]

pub mod oracle;

use funcboost::{BasisSystem, FunctionalDataSet, Response};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

pub fn uniform_grid(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            if j + 1 == n {
                b
            } else {
                a + (b - a) * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Composite Simpson weights with `intervals` panels on [a, b].
pub fn simpson(intervals: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / intervals as f64;
    let nodes = uniform_grid(intervals + 1, a, b);
    let weights = (0..=intervals)
        .map(|j| {
            let c = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Standard deviation of Fourier coefficient `l` for smooth random curves:
/// frequency `k` gets `1/k`, the constant gets 1.
pub fn smooth_sd(l: usize) -> f64 {
    if l == 0 {
        1.0
    } else {
        1.0 / l.div_ceil(2) as f64
    }
}

/// `n` smooth random curves as Fourier coefficients on [0, 1].
pub fn smooth_curves(rng: &mut ChaCha8Rng, n: usize, nbasis: usize) -> DMatrix<f64> {
    let mut c = normal_matrix(rng, n, nbasis);
    for l in 0..nbasis {
        c.column_mut(l).scale_mut(smooth_sd(l));
    }
    c
}

/// Regression set with `β*` made of three active Fourier components:
/// `y_i = 2 + ∫ β* x_i + ε_i` over smooth random curves.
pub struct SparseRegression {
    pub dataset: FunctionalDataSet<f64>,
    pub beta: DVector<f64>,
}

pub fn sparse_regression(seed: u64, n: usize, nbasis: usize, sigma: f64) -> SparseRegression {
    let mut rng = rng(seed);
    let basis = BasisSystem::fourier(nbasis, 0.0, 1.0).unwrap();
    let coefs = smooth_curves(&mut rng, n, nbasis);
    let mut beta = DVector::zeros(nbasis);
    beta[1] = 1.0;
    beta[2] = -0.8;
    beta[5] = 0.6;
    let noise = Normal::new(0.0, sigma).unwrap();
    // Orthonormal basis: ∫ β x = cᵀ b.
    let y = DVector::from_fn(n, |i, _| {
        coefs.row(i).transpose().dot(&beta) + 2.0 + noise.sample(&mut rng)
    });
    SparseRegression {
        dataset: FunctionalDataSet::new(basis, coefs, Response::Scalar(y)).unwrap(),
        beta,
    }
}

/// Pointwise standard deviation of [`smooth_curves`]. Sine and cosine of a
/// frequency share a variance, so it is constant in `t`.
pub fn smooth_pointwise_sd(nbasis: usize) -> f64 {
    (0..nbasis)
        .map(|l| smooth_sd(l).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Two functional classes: smooth random curves around the means
/// `±σ·sin(2πt)`, where σ is the pointwise noise sd, so the mean curves are
/// `2σ` apart at their peak.
pub fn two_class_curves(seed: u64, n: usize, nbasis: usize) -> FunctionalDataSet<f64> {
    let mut rng = rng(seed);
    let basis = BasisSystem::fourier(nbasis, 0.0, 1.0).unwrap();
    let sigma = smooth_pointwise_sd(nbasis);
    let mut coefs = smooth_curves(&mut rng, n, nbasis);
    let mut labels = DVector::zeros(n);
    for i in 0..n {
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        labels[i] = y;
        // sin(2πt) = ψ_1 / √2 on [0, 1].
        coefs[(i, 1)] += y * sigma / 2f64.sqrt();
    }
    FunctionalDataSet::new(basis, coefs, Response::Labels(labels)).unwrap()
}

/// Classes separated by a wide margin along the first sine score.
pub fn separable_curves(seed: u64, n: usize, nbasis: usize) -> FunctionalDataSet<f64> {
    let mut rng = rng(seed);
    let basis = BasisSystem::fourier(nbasis, 0.0, 1.0).unwrap();
    let mut coefs = normal_matrix(&mut rng, n, nbasis) * 0.3;
    let mut labels = DVector::zeros(n);
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        labels[i] = y;
        coefs[(i, 1)] += 3.0 * y;
    }
    FunctionalDataSet::new(basis, coefs, Response::Labels(labels)).unwrap()
}
