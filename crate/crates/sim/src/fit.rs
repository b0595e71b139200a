//! Least-squares polynomial fits for the complexity benchmarks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    /// Coefficients, constant term first.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
}

impl PolyFit {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Fits a polynomial of `degree` to the points. `x` is rescaled to [0, 1]
/// internally for conditioning; returned coefficients are in original units.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<PolyFit> {
    let n = xs.len();
    if n != ys.len() || n <= degree {
        return None;
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let a = DMatrix::from_fn(n, degree + 1, |i, j| (xs[i] / scale).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    let coefficients: Vec<f64> = sol.iter().enumerate().map(|(j, c)| c / scale.powi(j as i32)).collect();
    let fitted = &a * &sol;
    let mean = ys.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(fitted.iter()).map(|(y, f)| (y - f).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(PolyFit { coefficients, r_squared })
}

/// Slope of log(y) against log(x) over points with positive coordinates.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).unzip();
    polyfit(&lx, &ly, 1).map(|f| f.coefficients[1])
}
