//! Small least-squares helpers shared by the exponent and growth fits.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ X β` via SVD. Returns `None` when there are
/// fewer rows than unknowns or the design is numerically rank deficient.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Option<LinearFit> {
    let rows = design.len();
    let cols = design.first()?.len();
    if rows < cols || rows != y.len() || cols == 0 {
        return None;
    }
    let x = DMatrix::from_fn(rows, cols, |i, j| design[i][j]);
    let rhs = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() <= smax * 1e-12 {
        return None;
    }
    let beta = svd.solve(&rhs, smax * 1e-14).ok()?;
    let resid = &rhs - &x * &beta;
    let ss_res = resid.norm_squared();
    let mean = rhs.mean();
    let ss_tot: f64 = rhs.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LinearFit {
        coefficients: beta.iter().copied().collect(),
        residual_rms: (ss_res / rows as f64).sqrt(),
        r2,
    })
}

/// Fits `y ≈ slope·x + intercept`, returning `(slope, intercept, rms)`.
pub fn line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, 1.0]).collect();
    let fit = least_squares(&design, ys)?;
    Some((fit.coefficients[0], fit.coefficients[1], fit.residual_rms))
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}
