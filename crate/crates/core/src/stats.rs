//! Small numerical helpers shared by the fitting routines.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(GeomError::Precondition(format!("least squares needs >= 2 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GeomError::Precondition("degenerate fit window".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / nf).sqrt();
    Ok(LinearFit { slope, intercept, residual })
}

/// Neumaier-compensated sum; error stays O(ε) independent of length.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

/// Polynomial extrapolation to `x = 0` through the last `order + 1` points
/// (Neville's scheme), with the change from the next-lower order as error.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64], order: usize) -> Result<(f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < order + 2 {
        return Err(GeomError::Precondition(format!("extrapolation of order {order} needs {} points", order + 2)));
    }
    let neville = |k: usize| -> f64 {
        let xs = &xs[n - k - 1..];
        let mut p: Vec<f64> = ys[n - k - 1..].to_vec();
        for level in 1..=k {
            for i in 0..=k - level {
                p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i]);
            }
        }
        p[0]
    };
    let hi = neville(order);
    let lo = neville(order.saturating_sub(1));
    Ok((hi, (hi - lo).abs()))
}
