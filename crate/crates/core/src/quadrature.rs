//! Quadrature rules on a closed interval.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Nodes and positive weights approximating `∫_a^b f(t) dt ≈ Σ w_j f(t_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed in `f64` by Newton
/// iteration on the Legendre polynomial.
fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn check_interval<T: Scalar>(a: T, b: T) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "degenerate interval [{a}, {b}]"
        )));
    }
    Ok(())
}

impl<T: Scalar> QuadratureRule<T> {
    /// `n`-point Gauss–Legendre rule on [a, b]; exact for polynomials of degree ≤ 2n − 1.
    pub fn gauss_legendre(n: usize, a: T, b: T) -> Result<Self> {
        Self::composite_gauss_legendre(&[a, b], n)
    }

    /// Gauss–Legendre with `n` nodes on each panel between consecutive
    /// distinct breakpoints.
    pub fn composite_gauss_legendre(breakpoints: &[T], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one node".into(),
            ));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two breakpoints".into(),
            ));
        }
        check_interval(breakpoints[0], breakpoints[breakpoints.len() - 1])?;
        let (ref_nodes, ref_weights) = gauss_legendre_reference(n);
        let half = T::lit(0.5);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breakpoints.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi < lo {
                return Err(Error::InvalidArgument(
                    "breakpoints must be non-decreasing".into(),
                ));
            }
            if hi == lo {
                continue;
            }
            let mid = (lo + hi) * half;
            let radius = (hi - lo) * half;
            for (&x, &w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + radius * T::lit(x));
                weights.push(radius * T::lit(w));
            }
        }
        Ok(Self { nodes, weights })
    }

    /// Composite Simpson rule with `intervals` (even) subintervals.
    pub fn composite_simpson(intervals: usize, a: T, b: T) -> Result<Self> {
        check_interval(a, b)?;
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "composite Simpson needs an even number of intervals".into(),
            ));
        }
        let h = (b - a) / T::from_count(intervals);
        let third = h / T::lit(3.0);
        let nodes: Vec<T> = (0..=intervals)
            .map(|j| {
                if j == intervals {
                    b
                } else {
                    a + h * T::from_count(j)
                }
            })
            .collect();
        let weights = (0..=intervals)
            .map(|j| {
                if j == 0 || j == intervals {
                    third
                } else if j % 2 == 1 {
                    third * T::lit(4.0)
                } else {
                    third * T::lit(2.0)
                }
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&t, &w)| acc + w * f(t))
    }
}
