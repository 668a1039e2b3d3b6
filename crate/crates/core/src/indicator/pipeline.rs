use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fit::{extract_length_with, FitError, FitOptions, SlopeFit};
use super::{
    equivalence_sequence, laplace_transform_series, paired_difference, sign_check, IndicatorError, IndicatorSeries,
    ProbeResult, SignReport, Variant,
};
use crate::forward::{self, probe_indices, ForwardError, GridSpec, SourceSpec, TraceSet};
use crate::geometry::GeometryError;
use crate::medium::{Medium, Monotonicity, Violation};
use crate::stencil::{Operator, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|v| v.0.as_str()).collect::<Vec<_>>().join("; ")
}

/// How `⟨f, v − w_T(u₀)⟩`, the part of the background resolvent beyond the
/// horizon, is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailMethod {
    /// Keep marching `u₀` in the same box for `extension` more time units
    /// (default `16/τ_min`) and sum the Laplace tail directly.
    March { extension: Option<f64> },
    /// One shifted CG solve per τ seeded by the last two time levels.
    Solve { tolerance: f64, max_iterations: usize },
}

impl Default for TailMethod {
    fn default() -> Self {
        TailMethod::March { extension: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub h: f64,
    pub t_final: f64,
    pub taus: Vec<f64>,
    #[serde(default)]
    pub tail: TailMethod,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub config_hash: String,
    /// Explicit grid; otherwise padded from `h` and `t_final` per probe.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

/// 16 log-spaced points in `[2, 16]`.
pub fn default_tau_grid() -> Vec<f64> {
    log_tau_grid(2.0, 16.0, 16)
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_tau_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub grid: GridSpec,
    pub monotonicity: Option<Monotonicity>,
    pub standard: IndicatorSeries,
    pub tilde: IndicatorSeries,
    pub fit: Result<SlopeFit, FitError>,
    pub tilde_fit: Result<SlopeFit, FitError>,
    /// Checked from the start of the standard fit window; absent without an
    /// inclusion or a fit.
    pub sign: Option<SignReport>,
    /// `τ·e^{τT}|I_τ − Ĩ_τ|/‖f‖²` on the τ grid.
    pub equivalence: Vec<f64>,
    pub source_norm_sq: f64,
    pub traces_u: TraceSet,
    pub traces_u0: TraceSet,
}

/// Simulates `u` and the background `u₀` on one padded grid, forms the
/// tilde series from the trace difference and the standard series by
/// subtracting the resolvent tail, then fits and checks signs.
///
/// The background resolvent `v` is the discrete one of the padded box at the
/// leapfrog-consistent decay `σ = 2 sinh(τdt/2)/dt`, so `w_T(u₀)` and `v`
/// differ only by the tail beyond `T`.
pub fn run_probe_pipeline(
    medium: &Medium,
    source: &SourceSpec,
    opts: &PipelineOptions,
) -> Result<ProbeOutcome, PipelineError> {
    medium.validate(&source.region).map_err(PipelineError::Invalid)?;
    if opts.taus.is_empty() || opts.taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(IndicatorError::InvalidSeries("τ grid must be nonempty and positive".into()).into());
    }
    let monotonicity = medium.check_monotonicity().ok();
    let grid = opts.grid.unwrap_or_else(|| GridSpec::padded(medium, &source.region, opts.h, opts.t_final));
    let sim = forward::simulate(medium, source, &grid)?;
    let traces_u = sim.traces;
    drop(sim.state);

    let background = medium.background_only();
    let op0 = Operator::assemble(grid.lattice()?, &background);
    let probe = probe_indices(&op0.lattice, &traces_u.nodes)?;
    let fw: Vec<f64> = traces_u.source.iter().zip(&traces_u.nodes.weights).map(|(f, w)| f * w).collect();
    let pair = |u: &[f64]| -> f64 { probe.iter().zip(&fw).map(|(&i, fw)| fw * u[i]).sum() };

    let (n, dt) = (grid.steps, grid.dt);
    let tau_min = opts.taus.iter().copied().fold(f64::INFINITY, f64::min);
    let extra = match opts.tail {
        TailMethod::March { extension } => (extension.unwrap_or(16.0 / tau_min) / dt).ceil() as usize,
        TailMethod::Solve { .. } => 0,
    };
    let mut rows = Vec::with_capacity(n + 1);
    let mut pairings = Vec::with_capacity(n + extra + 1);
    let (state0, _) = forward::march(&op0, source, dt, n + extra, |k, u| {
        if k <= n {
            rows.push(probe.iter().map(|&i| u[i]).collect::<Vec<f64>>());
        }
        pairings.push(pair(u));
    });
    let traces_u0 = TraceSet { nodes: traces_u.nodes.clone(), source: traces_u.source.clone(), dt, values: rows };

    let tail: Vec<f64> = match opts.tail {
        TailMethod::March { .. } => opts
            .taus
            .iter()
            .map(|&tau| {
                let zn = |k: usize| (-tau * k as f64 * dt).exp();
                dt * (0.5 * zn(n) * pairings[n] + (n + 1..=n + extra).map(|k| zn(k) * pairings[k]).sum::<f64>())
            })
            .collect(),
        TailMethod::Solve { tolerance, max_iterations } => {
            let (cur, prev) = (&state0.current, &state0.previous);
            let mut out = Vec::with_capacity(opts.taus.len());
            for &tau in &opts.taus {
                let z = (-tau * dt).exp();
                let sigma = 2.0 * (tau * dt / 2.0).sinh() / dt;
                let rhs: Vec<f64> = cur.iter().zip(prev.iter()).map(|(a, b)| (a - z * b) / (z * dt * dt)).collect();
                let (q, _) = op0.solve_shifted(sigma * sigma, &rhs, tolerance, max_iterations)?;
                let d: Vec<f64> = q.iter().zip(cur.iter()).map(|(q, u)| q - 0.5 * u).collect();
                out.push(dt * (-tau * n as f64 * dt).exp() * pair(&d));
            }
            out
        }
    };
    drop(state0);

    let diff = paired_difference(&traces_u, &traces_u0)?;
    let tilde_values: Vec<f64> = opts.taus.iter().map(|&t| laplace_transform_series(&diff, dt, t)).collect();
    let standard_values: Vec<f64> = tilde_values.iter().zip(&tail).map(|(it, q)| it - q).collect();
    let t_final = grid.t_final();
    let hash = opts.config_hash.clone();
    let standard =
        IndicatorSeries::new(opts.taus.clone(), standard_values, t_final, Variant::Standard, hash.clone(), monotonicity)?;
    let tilde = IndicatorSeries::new(opts.taus.clone(), tilde_values, t_final, Variant::Tilde, hash, monotonicity)?;

    let fit = extract_length_with(&standard.taus, &standard.values, opts.fit);
    let tilde_fit = extract_length_with(&tilde.taus, &tilde.values, opts.fit);
    let sign = match (&fit, monotonicity) {
        (Ok(f), Some(m)) => Some(sign_check(&standard, m, f.window[0])),
        _ => None,
    };
    let source_norm_sq: f64 = traces_u.source.iter().zip(&fw).map(|(f, fw)| f * fw).sum();
    let equivalence = equivalence_sequence(&standard, &tilde, source_norm_sq)?;
    Ok(ProbeOutcome {
        grid,
        monotonicity,
        standard,
        tilde,
        fit,
        tilde_fit,
        sign,
        equivalence,
        source_norm_sq,
        traces_u,
        traces_u0,
    })
}

#[derive(Debug, Clone)]
pub struct SurveyOutcome {
    pub results: Vec<ProbeResult>,
    /// Probes whose fit failed, by index, with the reason.
    pub failures: Vec<(usize, String)>,
    pub outcomes: Vec<ProbeOutcome>,
}

/// One pipeline run per probe source; probes are processed in order.
pub fn survey(medium: &Medium, probes: &[SourceSpec], opts: &PipelineOptions) -> Result<SurveyOutcome, PipelineError> {
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut outcomes = Vec::with_capacity(probes.len());
    for (i, s) in probes.iter().enumerate() {
        let out = run_probe_pipeline(medium, s, opts)?;
        match (&out.fit, &s.region) {
            (Ok(f), crate::geometry::Region::Ball { center, radius }) if f.l_hat > 0.0 => results.push(ProbeResult {
                center: *center,
                radius: *radius,
                l_hat: f.l_hat,
                background: medium.background,
            }),
            (Ok(f), crate::geometry::Region::Ball { .. }) => failures.push((i, format!("non-positive length {}", f.l_hat))),
            (Ok(_), _) => failures.push((i, "probe region is not a ball".into())),
            (Err(e), _) => failures.push((i, e.to_string())),
        }
        outcomes.push(out);
    }
    Ok(SurveyOutcome { results, failures, outcomes })
}
