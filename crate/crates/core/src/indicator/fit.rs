use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::IndicatorSeries;

/// Magnitudes at or below this are treated as underflow and dropped.
pub const NUMERIC_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("every indicator value is at or below the numeric floor {floor:e}")]
    AllBelowFloor { floor: f64 },
    #[error("no suffix window of at least {min_points} points fits within residual {threshold}")]
    WindowEmpty { min_points: usize, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest admissible per-point residual in `log|I|`.
    pub threshold: f64,
    pub min_points: usize,
    pub floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { threshold: 0.05, min_points: 4, floor: NUMERIC_FLOOR }
    }
}

/// `log|I_τ| ≈ −2L̂τ + p̂ log τ + ĉ` over `window`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub l_hat: f64,
    pub p_hat: f64,
    pub c_hat: f64,
    /// RMS residual over the window.
    pub residual: f64,
    pub max_residual: f64,
    pub window: [f64; 2],
    pub points: usize,
    /// τ values dropped because `|I_τ|` underflowed the floor.
    pub dropped: Vec<f64>,
}

pub fn extract_length(series: &IndicatorSeries) -> Result<SlopeFit, FitError> {
    extract_length_with(&series.taus, &series.values, FitOptions::default())
}

/// Fits the widest suffix of the (floor-filtered) grid whose every residual
/// stays within `opts.threshold`, starting from the whole grid and shedding
/// small-τ points one at a time.
pub fn extract_length_with(taus: &[f64], values: &[f64], opts: FitOptions) -> Result<SlopeFit, FitError> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped = Vec::new();
    for (t, v) in taus.iter().zip(values) {
        if v.abs() > opts.floor && v.is_finite() {
            x.push(*t);
            y.push(v.abs().ln());
        } else {
            dropped.push(*t);
        }
    }
    if x.is_empty() {
        return Err(FitError::AllBelowFloor { floor: opts.floor });
    }
    let min_points = opts.min_points.max(3);
    let n = x.len();
    for m in (min_points..=n).rev() {
        let xs = &x[n - m..];
        let ys = &y[n - m..];
        let Some(beta) = least_squares(xs, ys) else { continue };
        let res: Vec<f64> = xs.iter().zip(ys).map(|(t, y)| y - model(&beta, *t)).collect();
        let max_residual = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if max_residual <= opts.threshold {
            let rms = (res.iter().map(|r| r * r).sum::<f64>() / m as f64).sqrt();
            return Ok(SlopeFit {
                l_hat: beta[0],
                p_hat: beta[1],
                c_hat: beta[2],
                residual: rms,
                max_residual,
                window: [xs[0], xs[m - 1]],
                points: m,
                dropped,
            });
        }
    }
    Err(FitError::WindowEmpty { min_points, threshold: opts.threshold })
}

fn model(beta: &[f64; 3], tau: f64) -> f64 {
    -2.0 * beta[0] * tau + beta[1] * tau.ln() + beta[2]
}

/// Least squares for `[L, p, c]` by modified Gram–Schmidt on the columns
/// `[−2τ, log τ, 1]`.
fn least_squares(tau: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    let mut q: [Vec<f64>; 3] = [
        tau.iter().map(|t| -2.0 * t).collect(),
        tau.iter().map(|t| t.ln()).collect(),
        vec![1.0; tau.len()],
    ];
    let mut r = [[0.0; 3]; 3];
    let scale: f64 = q.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max);
    for j in 0..3 {
        for i in 0..j {
            let rij = dot(&q[i], &q[j]);
            r[i][j] = rij;
            let qi = q[i].clone();
            for (a, b) in q[j].iter_mut().zip(&qi) {
                *a -= rij * b;
            }
        }
        let norm = dot(&q[j], &q[j]).sqrt();
        if !(norm > 1e-12 * scale) {
            return None;
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|a| *a /= norm);
    }
    let qty = [dot(&q[0], y), dot(&q[1], y), dot(&q[2], y)];
    let mut beta = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| r[i][k] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }
    Some(beta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
