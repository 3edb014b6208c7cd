//! Independent reference implementations used as test oracles.

use funcboost::TargetKind;
use nalgebra::{DMatrix, DVector};

/// Weighted loss of the split `z_j ≤ τ` with optimal leaf values.
pub fn split_error(
    z: &DMatrix<f64>,
    t: &[f64],
    w: &[f64],
    j: usize,
    tau: f64,
    kind: TargetKind,
) -> f64 {
    let sides: [Vec<usize>; 2] = [
        (0..z.nrows()).filter(|&i| z[(i, j)] <= tau).collect(),
        (0..z.nrows()).filter(|&i| z[(i, j)] > tau).collect(),
    ];
    sides
        .iter()
        .map(|side| match kind {
            TargetKind::Regression => {
                let sw: f64 = side.iter().map(|&i| w[i]).sum();
                if sw == 0.0 {
                    return 0.0;
                }
                let mean = side.iter().map(|&i| w[i] * t[i]).sum::<f64>() / sw;
                side.iter().map(|&i| w[i] * (t[i] - mean).powi(2)).sum()
            }
            TargetKind::Classification => {
                let pos: f64 = side.iter().filter(|&&i| t[i] > 0.0).map(|&i| w[i]).sum();
                let neg: f64 = side.iter().filter(|&&i| t[i] < 0.0).map(|&i| w[i]).sum();
                pos.min(neg)
            }
        })
        .sum()
}

/// Smallest split loss over every feature and every midpoint threshold;
/// `None` when all features are constant.
pub fn best_split_error(z: &DMatrix<f64>, t: &[f64], w: &[f64], kind: TargetKind) -> Option<f64> {
    let mut best: Option<f64> = None;
    for j in 0..z.ncols() {
        let mut vals: Vec<f64> = z.column(j).iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for pair in vals.windows(2) {
            let e = split_error(z, t, w, j, (pair[0] + pair[1]) / 2.0, kind);
            best = Some(best.map_or(e, |b| b.min(e)));
        }
    }
    best
}

/// Exhaustive single-column weighted least squares: `(index, slope)`.
/// Risks equal up to rounding count as ties and go to the smaller index.
pub fn best_single_column(z: &DMatrix<f64>, u: &[f64], w: &[f64]) -> (usize, f64) {
    let total: f64 = u.iter().zip(w).map(|(v, wi)| wi * v * v).sum();
    let mut fits = Vec::new();
    for j in 0..z.ncols() {
        let (mut szz, mut szu) = (0.0, 0.0);
        for i in 0..z.nrows() {
            szz += w[i] * z[(i, j)].powi(2);
            szu += w[i] * z[(i, j)] * u[i];
        }
        if szz == 0.0 {
            continue;
        }
        let b = szu / szz;
        let risk: f64 = (0..z.nrows())
            .map(|i| w[i] * (u[i] - b * z[(i, j)]).powi(2))
            .sum();
        fits.push((j, b, risk));
    }
    let least = fits.iter().map(|f| f.2).fold(f64::INFINITY, f64::min);
    let &(j, b, _) = fits
        .iter()
        .find(|f| f.2 <= least + 1e-12 * total)
        .expect("a nonzero column");
    (j, b)
}

/// Minimizes `Σ w (u − zb)² + λ bᵀRb` by gradient descent with step halving.
pub fn penalized_by_descent(
    z: &DMatrix<f64>,
    u: &[f64],
    w: &[f64],
    lambda: f64,
    r: &DMatrix<f64>,
) -> DVector<f64> {
    let n = z.nrows();
    let grad = |b: &DVector<f64>| {
        let mut g = r * b * (2.0 * lambda);
        for i in 0..n {
            let resid = u[i] - z.row(i).transpose().dot(b);
            g -= z.row(i).transpose() * (2.0 * w[i] * resid);
        }
        g
    };
    let mut b = DVector::zeros(z.ncols());
    let mut step = 1e-2;
    for _ in 0..500_000 {
        let g = grad(&b);
        if g.amax() < 1e-13 {
            break;
        }
        let next = &b - &g * step;
        if grad(&next).norm() > g.norm() {
            step *= 0.5;
            continue;
        }
        b = next;
    }
    b
}

/// Componentwise L2Boost written as plain loops: `(index, slope)` per step.
pub fn sequential_componentwise(
    z: &DMatrix<f64>,
    y: &[f64],
    shrinkage: f64,
    steps: usize,
) -> Vec<(usize, f64)> {
    let n = z.nrows();
    let ones = vec![1.0; n];
    let mut f = vec![0.0; n];
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let resid: Vec<f64> = (0..n).map(|i| y[i] - f[i]).collect();
        let (j, b) = best_single_column(z, &resid, &ones);
        for i in 0..n {
            f[i] += shrinkage * b * z[(i, j)];
        }
        out.push((j, b));
    }
    out
}
