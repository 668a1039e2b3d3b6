//! Laplace-domain indicator functions built from time traces on `B`, the
//! large-τ slope fit that turns them into lengths, sign checks, and the
//! enclosure predicate assembled from many probes.

mod enclosure;
mod fit;
mod pipeline;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::TraceSet;
use crate::geometry::QuadratureSet;
use crate::medium::Monotonicity;

pub use enclosure::{Enclosure, ProbeResult};
pub use fit::{extract_length, extract_length_with, FitError, FitOptions, SlopeFit};
pub use pipeline::{
    default_tau_grid, log_tau_grid, run_probe_pipeline, survey, PipelineError, PipelineOptions, ProbeOutcome, SurveyOutcome,
    TailMethod,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("traces do not share a time grid and node set")]
    GridMismatch,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Tilde,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Tilde => "tilde",
        }
    }
}

/// Indicator values on an ascending τ grid with the metadata needed to
/// reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSeries {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub t_final: f64,
    pub variant: Variant,
    pub config_hash: String,
    pub monotonicity: Option<Monotonicity>,
}

impl IndicatorSeries {
    pub fn new(
        taus: Vec<f64>,
        values: Vec<f64>,
        t_final: f64,
        variant: Variant,
        config_hash: impl Into<String>,
        monotonicity: Option<Monotonicity>,
    ) -> Result<Self, IndicatorError> {
        if taus.len() != values.len() {
            return Err(IndicatorError::DimensionMismatch(format!("{} taus, {} values", taus.len(), values.len())));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(IndicatorError::InvalidSeries("taus must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(IndicatorError::InvalidSeries(format!("non-finite value {v}")));
        }
        Ok(Self { taus, values, t_final, variant, config_hash: config_hash.into(), monotonicity })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// CSV with columns `tau,indicator,log_abs_indicator`; `log|I|` is empty
    /// for values at or below the numeric floor.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# config_hash={}", self.config_hash)?;
        writeln!(w, "# variant={} t_final={:.16e}", self.variant.as_str(), self.t_final)?;
        writeln!(w, "tau,indicator,log_abs_indicator")?;
        for (t, v) in self.taus.iter().zip(&self.values) {
            if v.abs() > fit::NUMERIC_FLOOR {
                writeln!(w, "{t:.16e},{v:.16e},{:.16e}", v.abs().ln())?;
            } else {
                writeln!(w, "{t:.16e},{v:.16e},")?;
            }
        }
        w.flush()
    }
}

/// Trapezoid weights `dt·e^{−τt_k}` on `t_k = k·dt`, `k = 0..=steps`, halved
/// at both ends. The time quadrature error is `O(dt²)` relative.
pub fn laplace_weights(dt: f64, steps: usize, tau: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..=steps).map(|k| dt * (-tau * k as f64 * dt).exp()).collect();
    w[0] *= 0.5;
    if steps > 0 {
        w[steps] *= 0.5;
    }
    w
}

/// Trapezoid Laplace transform of a scalar series sampled every `dt`.
pub fn laplace_transform_series(series: &[f64], dt: f64, tau: f64) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    laplace_weights(dt, series.len() - 1, tau).iter().zip(series).map(|(w, s)| w * s).sum()
}

/// `w(x_q; τ) = ∫₀ᵀ e^{−τt} u(t, x_q) dt` at every trace node.
pub fn laplace_transform_traces(tr: &TraceSet, tau: f64) -> Vec<f64> {
    let weights = laplace_weights(tr.dt, tr.steps(), tau);
    let mut out = vec![0.0; tr.nodes.len()];
    for (row, w) in tr.values.iter().zip(&weights) {
        for (o, u) in out.iter_mut().zip(row) {
            *o += w * u;
        }
    }
    out
}

/// `I_τ = ∫_B f(w − v)` under the node quadrature of `B`; `f` holds the
/// source value at each node.
pub fn indicator(w: &[f64], v: &[f64], f: &[f64], bquad: &QuadratureSet) -> Result<f64, IndicatorError> {
    let n = bquad.len();
    if w.len() != n || v.len() != n || f.len() != n {
        return Err(IndicatorError::DimensionMismatch(format!(
            "w {}, v {}, f {}, nodes {n}",
            w.len(),
            v.len(),
            f.len()
        )));
    }
    Ok((0..n).map(|q| bquad.weights[q] * f[q] * (w[q] - v[q])).sum())
}

/// `⟨f, u(t_k) − u₀(t_k)⟩` for every time level, differencing node-wise so
/// levels before the first reflection are exactly zero.
pub fn paired_difference(tr_u: &TraceSet, tr_u0: &TraceSet) -> Result<Vec<f64>, IndicatorError> {
    if !tr_u.same_grid(tr_u0) || tr_u.source != tr_u0.source {
        return Err(IndicatorError::GridMismatch);
    }
    Ok(tr_u
        .values
        .iter()
        .zip(&tr_u0.values)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .zip(&tr_u.source)
                .zip(&tr_u.nodes.weights)
                .map(|(((u, u0), f), w)| w * f * (u - u0))
                .sum()
        })
        .collect())
}

/// `Ĩ_τ = ∫₀ᵀ∫_B e^{−τt} f(u − u₀)`.
pub fn indicator_tilde(tr_u: &TraceSet, tr_u0: &TraceSet, tau: f64) -> Result<f64, IndicatorError> {
    Ok(laplace_transform_series(&paired_difference(tr_u, tr_u0)?, tr_u.dt, tau))
}

/// Result of comparing indicator signs to the monotonicity tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub monotonicity: Monotonicity,
    pub expected_sign: Option<f64>,
    pub from_tau: f64,
    pub checked: usize,
    pub passed: bool,
    pub first_violation: Option<f64>,
}

/// Checks `sign(I_τ)` against the tag for every `τ ≥ from_tau`. A
/// [`Monotonicity::Violation`] tag fails at the first checked τ.
pub fn sign_check(series: &IndicatorSeries, tag: Monotonicity, from_tau: f64) -> SignReport {
    let expected = tag.expected_sign();
    let mut checked = 0;
    let mut first_violation = None;
    for (t, v) in series.taus.iter().zip(&series.values) {
        if *t < from_tau {
            continue;
        }
        checked += 1;
        let ok = matches!(expected, Some(s) if s * v > 0.0);
        if !ok && first_violation.is_none() {
            first_violation = Some(*t);
        }
    }
    SignReport {
        monotonicity: tag,
        expected_sign: expected,
        from_tau,
        checked,
        passed: checked > 0 && first_violation.is_none(),
        first_violation,
    }
}

/// `τ·e^{τT}|I_τ − Ĩ_τ| / ‖f‖²` per τ, the quantity the equivalence bound
/// keeps bounded.
pub fn equivalence_sequence(
    standard: &IndicatorSeries,
    tilde: &IndicatorSeries,
    norm_sq: f64,
) -> Result<Vec<f64>, IndicatorError> {
    if standard.taus != tilde.taus {
        return Err(IndicatorError::DimensionMismatch("series use different τ grids".into()));
    }
    let t = standard.t_final;
    Ok(standard
        .taus
        .iter()
        .zip(standard.values.iter().zip(&tilde.values))
        .map(|(tau, (i, it))| {
            // e^{τT}|Δ| formed in log space: Δ is often ~e^{−τT}.
            let d = (i - it).abs();
            if d == 0.0 {
                0.0
            } else {
                tau * (tau * t + d.ln()).exp() / norm_sq
            }
        })
        .collect())
}

/// Kendall rank correlation (τ-b) of `seq` against its index. Positive
/// values mean an increasing trend.
pub fn kendall_tau(seq: &[f64]) -> f64 {
    let n = seq.len();
    let (mut concordant, mut discordant, mut ties) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            match seq[j].partial_cmp(&seq[i]) {
                Some(std::cmp::Ordering::Greater) => concordant += 1,
                Some(std::cmp::Ordering::Less) => discordant += 1,
                _ => ties += 1,
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    let denom = (pairs * (pairs - ties as f64)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (concordant - discordant) as f64 / denom
    }
}
