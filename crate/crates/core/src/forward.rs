//! Leapfrog time stepping of `∂ₜ²u = div(γ∇u)` with `u(0) = 0`,
//! `∂ₜu(0) = f`, on a box large enough that the outer boundary stays causally
//! invisible from the measurement set.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{lattice_ceil, lattice_coord, lattice_floor, GeometryError, Point3, QuadratureSet, Region};
use crate::medium::Medium;
use crate::stencil::{dot, Lattice, Operator};

pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForwardError {
    #[error("time step {dt:.6e} violates CFL; largest admissible dt is {max_dt:.6e}")]
    CflViolation { dt: f64, max_dt: f64 },
    #[error("causality padding {padding:.6e} too small; need more than {required:.6e}")]
    PaddingViolation { padding: f64, required: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Spatial lattice plus time stepping. `origin` is the first node; node
/// coordinates are snapped to the `(k + ½)h` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point3,
    pub extent: [f64; 3],
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
}

impl GridSpec {
    /// The smallest snapped grid around `B ∪ D` with more than `c_max·T/2` of
    /// padding on every side, dt at the CFL limit times the safety factor
    /// (shrunk so that `steps·dt = T`).
    pub fn padded(medium: &Medium, b: &Region, h: f64, t_final: f64) -> Self {
        let c = medium.max_speed();
        let pad = c * t_final / 2.0 + h;
        let (lo, hi) = occupied_box(medium, b);
        let mut start = [0i64; 3];
        let mut extent = [0.0; 3];
        for a in 0..3 {
            let k0 = lattice_floor(lo[a] - pad, h);
            let k1 = lattice_ceil(hi[a] + pad, h);
            start[a] = k0;
            extent[a] = (k1 - k0) as f64 * h;
        }
        let origin = Point3::new(lattice_coord(start[0], h), lattice_coord(start[1], h), lattice_coord(start[2], h));
        let max_dt = max_stable_dt(h, medium);
        let steps = (t_final / max_dt).ceil().max(1.0) as usize;
        Self { origin, extent, h, dt: t_final / steps as f64, steps }
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn lattice(&self) -> Result<Lattice, ForwardError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(ForwardError::InvalidGrid(format!("h = {} must be positive", self.h)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.steps == 0 {
            return Err(ForwardError::InvalidGrid("dt and steps must be positive".into()));
        }
        let mut start = [0i64; 3];
        let mut shape = [0usize; 3];
        for a in 0..3 {
            if !(self.extent[a] > 0.0) {
                return Err(ForwardError::InvalidGrid(format!("extent[{a}] must be positive")));
            }
            start[a] = (self.origin[a] / self.h - 0.5).round() as i64;
            shape[a] = (self.extent[a] / self.h).round() as usize + 1;
        }
        Ok(Lattice::new(start, shape, self.h))
    }
}

fn occupied_box(medium: &Medium, b: &Region) -> (Point3, Point3) {
    let (mut lo, mut hi) = b.bounding_box();
    if let Some(inc) = &medium.inclusion {
        let (l, h) = inc.region.bounding_box();
        lo = lo.zip_with(l, f64::min);
        hi = hi.zip_with(h, f64::max);
    }
    (lo, hi)
}

pub fn max_stable_dt(h: f64, medium: &Medium) -> f64 {
    CFL_SAFETY * h / (3f64.sqrt() * medium.max_speed())
}

/// `Err(suggested_dt)` when `dt` exceeds the safety-scaled CFL bound.
pub fn cfl_check(grid: &GridSpec, medium: &Medium) -> Result<(), f64> {
    let max_dt = max_stable_dt(grid.h, medium);
    if grid.dt <= max_dt * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(max_dt)
    }
}

/// Smallest distance from `B ∪ D` to a face of the node box, and the
/// required bound `c_max·T/2`.
pub fn padding_margin(grid: &GridSpec, medium: &Medium, b: &Region) -> Result<(f64, f64), ForwardError> {
    let (lo, hi) = grid.lattice()?.bounds();
    let (olo, ohi) = occupied_box(medium, b);
    let margin = (0..3).map(|a| (olo[a] - lo[a]).min(hi[a] - ohi[a])).fold(f64::INFINITY, f64::min);
    Ok((margin, medium.max_speed() * grid.t_final() / 2.0))
}

/// Initial velocity `f = ±c₁·1_B`, optionally smoothed by supersampling
/// each cell `n³` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub region: Region,
    pub amplitude: f64,
    #[serde(default = "positive")]
    pub sign: f64,
    #[serde(default)]
    pub supersample: Option<usize>,
}

fn positive() -> f64 {
    1.0
}

impl SourceSpec {
    pub fn new(region: Region, amplitude: f64) -> Self {
        Self { region, amplitude, sign: 1.0, supersample: None }
    }

    pub fn negated(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.amplitude *= factor;
        self
    }

    /// Continuum value `f(x)`.
    pub fn value(&self, x: Point3) -> f64 {
        if self.region.contains(x) {
            self.sign * self.amplitude
        } else {
            0.0
        }
    }

    /// Grid value at a node of spacing `h`.
    pub fn cell_value(&self, x: Point3, h: f64) -> f64 {
        match self.supersample {
            None | Some(0) | Some(1) => self.value(x),
            Some(n) => {
                let mut inside = 0usize;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let off = |t: usize| ((t as f64 + 0.5) / n as f64 - 0.5) * h;
                            if self.region.contains(x + Point3::new(off(a), off(b), off(c))) {
                                inside += 1;
                            }
                        }
                    }
                }
                self.sign * self.amplitude * inside as f64 / (n * n * n) as f64
            }
        }
    }

    /// Lattice nodes carrying a nonzero grid source, weighted by the cell
    /// volume, with the source values in node order. Without smoothing these
    /// are exactly the midpoint nodes of `B`.
    pub fn quadrature(&self, h: f64) -> Result<(QuadratureSet, Vec<f64>), GeometryError> {
        self.region.validate()?;
        let (lo, hi) = self.region.bounding_box();
        let lat = Lattice::covering(lo - Point3::new(h, h, h), hi + Point3::new(h, h, h), h);
        let [nx, ny, nz] = lat.shape;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let x = lat.coord(i, j, k);
                    let v = self.cell_value(x, h);
                    if v != 0.0 {
                        nodes.push(x);
                        values.push(v);
                    }
                }
            }
        }
        if nodes.is_empty() {
            return Err(GeometryError::EmptyRegion { spacing: h });
        }
        let weights = vec![h * h * h; nodes.len()];
        Ok((QuadratureSet { nodes, weights }, values))
    }

    /// `‖f‖²_{L²}` under the grid quadrature.
    pub fn norm_sq(&self, h: f64) -> Result<f64, GeometryError> {
        let (q, f) = self.quadrature(h)?;
        Ok(q.weights.iter().zip(&f).map(|(w, f)| w * f * f).sum())
    }
}

/// `u(t_k, x_q)` for `k = 0..=steps`, `t_k = k·dt`, at the source nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub nodes: QuadratureSet,
    /// Source value at each node, so the set is self-contained for pairing.
    pub source: Vec<f64>,
    pub dt: f64,
    /// Row `k` holds time `k·dt`.
    pub values: Vec<Vec<f64>>,
}

impl TraceSet {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| k as f64 * self.dt)
    }

    /// `⟨f, u(t_k)⟩` under the node quadrature for every `k`.
    pub fn paired_with_source(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row.iter().zip(&self.source).zip(&self.nodes.weights).map(|((u, f), w)| u * f * w).sum())
            .collect()
    }

    pub fn same_grid(&self, other: &TraceSet) -> bool {
        self.dt == other.dt && self.values.len() == other.values.len() && self.nodes == other.nodes
    }

    /// CSV: `# config_hash=…`, header `t,node_0,…`, then one row per time.
    pub fn write_csv(&self, path: &Path, config_hash: &str) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# config_hash={config_hash}")?;
        write!(w, "t")?;
        for q in 0..self.nodes.len() {
            write!(w, ",node_{q}")?;
        }
        writeln!(w)?;
        for (k, row) in self.values.iter().enumerate() {
            write!(w, "{:.16e}", k as f64 * self.dt)?;
            for v in row {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

/// Two consecutive time levels on the full grid.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub lattice: Lattice,
    pub previous: Vec<f64>,
    pub current: Vec<f64>,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub traces: TraceSet,
    pub state: FieldState,
    /// Discrete energy after every step, starting at step 1.
    pub energy: Vec<f64>,
}

/// Discrete energy `½h³[Σ((u^{n+1}−uⁿ)/dt)² + Σ u^{n+1}·Kuⁿ]`, conserved
/// exactly by the leapfrog update.
pub fn energy(state: &FieldState, op: &Operator, dt: f64) -> f64 {
    let mut ku = vec![0.0; state.previous.len()];
    op.apply(&state.previous, &mut ku);
    let kin: f64 = dot_diff(&state.current, &state.previous);
    let pot = dot(&state.current, &ku);
    0.5 * op.lattice.h().powi(3) * (kin / (dt * dt) + pot)
}

fn dot_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    dot(&d, &d)
}

/// Check every precondition and run the leapfrog to `grid.t_final()`.
pub fn simulate(medium: &Medium, source: &SourceSpec, grid: &GridSpec) -> Result<Simulation, ForwardError> {
    if let Err(max_dt) = cfl_check(grid, medium) {
        return Err(ForwardError::CflViolation { dt: grid.dt, max_dt });
    }
    let (padding, required) = padding_margin(grid, medium, &source.region)?;
    if padding <= required {
        return Err(ForwardError::PaddingViolation { padding, required });
    }
    let lattice = grid.lattice()?;
    let op = Operator::assemble(lattice, medium);
    run(&op, source, grid.dt, grid.steps)
}

/// Leapfrog on an assembled operator without the causality checks; the
/// caller owns the boundary (used for Dirichlet-box resolvents).
pub fn run(op: &Operator, source: &SourceSpec, dt: f64, steps: usize) -> Result<Simulation, ForwardError> {
    let lattice = op.lattice;
    let (nodes, fvals) = source.quadrature(lattice.h())?;
    let probe = probe_indices(&lattice, &nodes)?;
    let mut values = Vec::with_capacity(steps + 1);
    let (state, energy) = march(op, source, dt, steps, |_, u| values.push(probe.iter().map(|&p| u[p]).collect()));
    Ok(Simulation { traces: TraceSet { nodes, source: fvals, dt, values }, state, energy })
}

/// Flat indices of quadrature nodes that sit on lattice nodes.
pub fn probe_indices(lattice: &Lattice, nodes: &QuadratureSet) -> Result<Vec<usize>, ForwardError> {
    nodes
        .nodes
        .iter()
        .map(|x| lattice.node_at(*x).ok_or_else(|| ForwardError::InvalidGrid("source node outside grid".into())))
        .collect()
}

/// Raw leapfrog loop. `observe(n, uⁿ)` sees every level `n = 0..=steps`;
/// returns the final two levels and the energy after every step.
pub fn march(
    op: &Operator,
    source: &SourceSpec,
    dt: f64,
    steps: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> (FieldState, Vec<f64>) {
    let lattice = op.lattice;
    let h = lattice.h();
    let f = lattice.sample(|x| source.cell_value(x, h));
    let h3 = h * h * h;
    let mut energy = Vec::with_capacity(steps);
    energy.push(0.5 * h3 * dot(&f, &f));
    let mut previous = vec![0.0; lattice.len()];
    observe(0, &previous);
    let mut current: Vec<f64> = f.iter().map(|v| dt * v).collect();
    drop(f);
    observe(1, &current);
    let dt2 = dt * dt;
    for n in 2..=steps {
        let (kin, pot) = op.leapfrog(&current, &mut previous, dt2);
        std::mem::swap(&mut previous, &mut current);
        energy.push(0.5 * h3 * (kin / dt2 + pot));
        observe(n, &current);
    }
    (FieldState { lattice, previous, current, step: steps.max(1) }, energy)
}

/// Trilinear samples of a grid field at arbitrary points (`None` outside).
pub fn interpolate(lattice: &Lattice, field: &[f64], points: &[Point3]) -> Vec<Option<f64>> {
    points
        .iter()
        .map(|x| lattice.trilinear(*x).map(|st| st.iter().map(|(i, w)| w * field[*i]).sum()))
        .collect()
}
