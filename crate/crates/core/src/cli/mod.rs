//! Command-line front end: config-driven runs, verification suites and
//! SVG plots.
//!
//! Exit codes: `0` success, `1` runtime or I/O failure (or a failed verify
//! check), `2` invalid input (config, placement, suite name, CSV), `3` CFL or
//! causality-padding violation.

pub mod config;
pub mod output;
pub mod plot;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::forward::{self, ForwardError};
use crate::indicator::{
    run_probe_pipeline, survey, Enclosure, FitError, PipelineError, ProbeOutcome, SlopeFit,
};
use crate::medium::Violation;

pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICS: i32 = 3;

/// Directions shot from the reference point when sampling the enclosure
/// boundary.
const BOUNDARY_RAYS: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "wave-enclosure", version, about = "Time-domain enclosure experiments")]
pub struct Cli {
    /// Worker threads (falls back to WAVE_ENCLOSURE_THREADS, then all cores).
    #[arg(long, global = true, env = "WAVE_ENCLOSURE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the forward solver and write the traces on B.
    Simulate(RunArgs),
    /// Indicator series, slope fit and sign check for one probe.
    Probe(RunArgs),
    /// One probe run per survey ball plus the enclosure point cloud.
    Survey(RunArgs),
    /// Run a self-check suite: geometry, optical, resolvent, indicator or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a CSV written by another subcommand as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// SVG file to write.
        #[arg(long)]
        out: PathBuf,
        /// Fixed coordinate of an enclosure slice.
        #[arg(long, value_enum, default_value = "x2")]
        plane: PlaneArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        at: f64,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Slope,
    Trace,
    EnclosureSlice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    X1,
    X2,
    X3,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
    }
}

fn violations(v: &[Violation]) -> CliError {
    let list: Vec<String> = v.iter().map(|v| format!("  - {v}")).collect();
    CliError::new(EXIT_VALIDATION, format!("configuration violates placement constraints:\n{}", list.join("\n")))
}

fn forward_error(e: ForwardError) -> CliError {
    match e {
        ForwardError::CflViolation { dt, max_dt } => {
            CliError::new(EXIT_NUMERICS, format!("dt = {dt:.6e} violates CFL; suggested dt = {max_dt:.6e}"))
        }
        ForwardError::PaddingViolation { .. } => CliError::new(EXIT_NUMERICS, e.to_string()),
        ForwardError::InvalidGrid(_) | ForwardError::Geometry(_) => CliError::new(EXIT_VALIDATION, e.to_string()),
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Invalid(v) => violations(&v),
        PipelineError::Forward(f) => forward_error(f),
        PipelineError::Geometry(g) => CliError::new(EXIT_VALIDATION, g.to_string()),
        PipelineError::Indicator(i) => CliError::new(EXIT_VALIDATION, i.to_string()),
        PipelineError::Solve(s) => CliError::new(EXIT_FAILURE, s.to_string()),
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Probe(a) => cmd_probe(&a),
        Command::Survey(a) => cmd_survey(&a),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed),
        Command::Plot { input, kind, out, plane, at } => cmd_plot(&input, kind, &out, plane, at),
    }
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    if let Some(v) = args.tau_min {
        cfg.tau.min = v;
    }
    if let Some(v) = args.tau_max {
        cfg.tau.max = v;
    }
    if let Some(v) = args.tau_count {
        cfg.tau.count = v;
    }
    let t = cfg.tau;
    if !(t.min > 0.0 && t.max > t.min && t.count >= 2) {
        return Err(CliError::new(EXIT_VALIDATION, format!("invalid τ grid: min {} max {} count {}", t.min, t.max, t.count)));
    }
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    Ok((cfg, out))
}

fn cmd_simulate(args: &RunArgs) -> Result<i32, CliError> {
    let (cfg, out) = load(args)?;
    let medium = cfg.medium();
    medium.validate(&cfg.source.region).map_err(|v| violations(&v))?;
    let grid = cfg.grid_spec();
    let sim = forward::simulate(&medium, &cfg.source, &grid).map_err(forward_error)?;
    let hash = cfg.hash();
    let csv = out.join("traces.csv");
    sim.traces.write_csv(&csv, &hash).map_err(|e| CliError::io(&csv, e))?;
    let e0 = sim.energy.first().copied().unwrap_or(0.0);
    let e1 = sim.energy.last().copied().unwrap_or(0.0);
    let sidecar = json!({
        "config_hash": hash,
        "config": cfg,
        "grid": grid,
        "node_count": sim.traces.nodes.len(),
        "nodes": sim.traces.nodes,
        "source_values": sim.traces.source,
        "steps": grid.steps,
        "t_final": grid.t_final(),
        "energy_initial": e0,
        "energy_final": e1,
        "energy_relative_drift": if e0 != 0.0 { (e1 - e0) / e0 } else { 0.0 },
    });
    let path = out.join("traces.json");
    output::write_json(&path, &sidecar).map_err(|e| CliError::io(&path, e))?;
    println!("wrote {} ({} nodes, {} steps)", csv.display(), sim.traces.nodes.len(), grid.steps);
    Ok(EXIT_OK)
}

fn fit_json(fit: &Result<SlopeFit, FitError>) -> serde_json::Value {
    match fit {
        Ok(f) => serde_json::to_value(f).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

#[derive(Serialize)]
struct EquivalencePoint {
    tau: f64,
    value: f64,
}

fn outcome_json(hash: &str, o: &ProbeOutcome) -> serde_json::Value {
    let eq: Vec<EquivalencePoint> =
        o.standard.taus.iter().zip(&o.equivalence).map(|(t, v)| EquivalencePoint { tau: *t, value: *v }).collect();
    json!({
        "config_hash": hash,
        "grid": o.grid,
        "monotonicity": o.monotonicity,
        "fit": fit_json(&o.fit),
        "tilde_fit": fit_json(&o.tilde_fit),
        "sign": o.sign,
        "equivalence": eq,
        "source_norm_sq": o.source_norm_sq,
    })
}

fn write_series(o: &ProbeOutcome, cfg: &ExperimentConfig, dir: &Path, prefix: &str) -> Result<(), CliError> {
    use config::VariantFlags::*;
    let v = cfg.indicator.variant;
    if matches!(v, Standard | Both) {
        let p = dir.join(format!("{prefix}standard.csv"));
        o.standard.write_csv(&p).map_err(|e| CliError::io(&p, e))?;
    }
    if matches!(v, Tilde | Both) {
        let p = dir.join(format!("{prefix}tilde.csv"));
        o.tilde.write_csv(&p).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(())
}

fn cmd_probe(args: &RunArgs) -> Result<i32, CliError> {
    let (cfg, out) = load(args)?;
    let hash = cfg.hash();
    let o = run_probe_pipeline(&cfg.medium(), &cfg.source, &cfg.pipeline_options()).map_err(pipeline_error)?;
    write_series(&o, &cfg, &out, "series_")?;
    let path = out.join("probe.json");
    output::write_json(&path, &outcome_json(&hash, &o)).map_err(|e| CliError::io(&path, e))?;
    match (&o.fit, &o.sign) {
        (Ok(f), Some(s)) => println!("L_hat = {:.6} on [{:.3}, {:.3}]; sign check {}", f.l_hat, f.window[0], f.window[1], if s.passed { "passed" } else { "failed" }),
        (Ok(f), None) => println!("L_hat = {:.6} on [{:.3}, {:.3}]", f.l_hat, f.window[0], f.window[1]),
        (Err(e), _) => println!("fit: {e}"),
    }
    Ok(EXIT_OK)
}

fn cmd_survey(args: &RunArgs) -> Result<i32, CliError> {
    let (cfg, out) = load(args)?;
    if cfg.survey.is_none() {
        return Err(CliError::new(EXIT_VALIDATION, "config has no survey section"));
    }
    let hash = cfg.hash();
    let medium = cfg.medium();
    let sources = cfg.probe_sources();
    let s = survey(&medium, &sources, &cfg.pipeline_options()).map_err(pipeline_error)?;
    for (i, o) in s.outcomes.iter().enumerate() {
        write_series(o, &cfg, &out, &format!("probe_{i:02}_"))?;
    }
    let per_probe: Vec<serde_json::Value> = s.outcomes.iter().map(|o| outcome_json(&hash, o)).collect();
    let summary = json!({
        "config_hash": hash,
        "results": s.results,
        "failures": s.failures,
        "probes": per_probe,
    });
    let path = out.join("survey.json");
    output::write_json(&path, &summary).map_err(|e| CliError::io(&path, e))?;

    let path = out.join("probes.csv");
    let mut text = format!(
        "# config_hash={hash}\n# background={}\n# inclusion={}\ncenter_x1,center_x2,center_x3,radius,l_hat\n",
        serde_json::to_string(&medium.background).expect("serializes"),
        serde_json::to_string(&medium.inclusion.as_ref().map(|i| &i.region)).expect("serializes"),
    );
    for r in &s.results {
        text += &format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", r.center.x1, r.center.x2, r.center.x3, r.radius, r.l_hat);
    }
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;

    let enclosure = Enclosure::new(s.results.clone(), medium.background);
    let reach = s.results.iter().map(|r| r.center.norm() + r.radius).fold(1.0, f64::max);
    let max_radius = 4.0 * reach;
    let points = match enclosure.default_reference(max_radius) {
        Some(r) => enclosure.boundary_samples(r, BOUNDARY_RAYS, max_radius),
        None => Vec::new(),
    };
    let path = out.join("enclosure.csv");
    let mut text = format!("# config_hash={hash}\nx1,x2,x3\n");
    for p in &points {
        text += &format!("{:.16e},{:.16e},{:.16e}\n", p.x1, p.x2, p.x3);
    }
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    println!("{} probes fitted, {} failed; {} enclosure boundary points", s.results.len(), s.failures.len(), points.len());
    Ok(EXIT_OK)
}

fn cmd_verify(suite: &str, seed: u64) -> Result<i32, CliError> {
    let checks = verify::run_suite(suite, seed).ok_or_else(|| {
        CliError::new(EXIT_VALIDATION, format!("unknown suite {suite:?}; expected one of {}", verify::SUITES.join(", ")))
    })?;
    let mut failed = 0;
    for c in &checks {
        if !c.passed {
            failed += 1;
        }
        println!("{:<10} {:<48} {}  {}", c.suite, c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_plot(input: &Path, kind: PlotKind, out: &Path, plane: PlaneArg, at: f64) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let plane = match plane {
        PlaneArg::X1 => plot::Plane::X1,
        PlaneArg::X2 => plot::Plane::X2,
        PlaneArg::X3 => plot::Plane::X3,
    };
    let svg = match kind {
        PlotKind::Slope => plot::slope_svg(&text),
        PlotKind::Trace => plot::trace_svg(&text),
        PlotKind::EnclosureSlice => plot::enclosure_slice_svg(&text, plane, at),
    }
    .map_err(|e| CliError::new(EXIT_VALIDATION, format!("{}: {e}", input.display())))?;
    std::fs::write(out, svg).map_err(|e| CliError::io(out, e))?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}
