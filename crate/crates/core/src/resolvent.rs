//! Background fields `v(·; τ)` solving `(τ² − div(γ₀∇))v = f`.
//!
//! Free space: the Yukawa kernel `e^{−τ|x−y|}/(4π|x−y|)` integrated against
//! `f`, by quadrature or, for ball sources, in closed form. Two layers: the
//! 7-point discretization on a Dirichlet box, solved either by CG directly or
//! by marching the discrete wave equation and summing its exact discrete
//! Laplace transform, with a CG solve only for the tail beyond the horizon.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{self, max_stable_dt, ForwardError, SourceSpec};
use crate::geometry::{dist_sets, sample_region, GeometryError, Point3, QuadratureSet, Region};
use crate::medium::{Background, Medium};
use crate::optical::{optical_path, hessian_det, Layers, OpticalError};
use crate::stencil::{Lattice, Operator, SolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolventError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Optical(#[from] OpticalError),
    #[error("decay padding {padding:.4e} below required {required:.4e}")]
    PaddingViolation { padding: f64, required: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub x: Point3,
    pub tau: f64,
    pub value: f64,
    pub gradient: Point3,
}

/// Potential of `f = c₁` on the ball of radius `ρ` at distance `R > ρ` from
/// its centre: `c₁(τρ cosh τρ − sinh τρ)e^{−τR}/(τ³R)`, written without
/// overflowing exponentials. Also returns `∂v/∂R = −v(τ + 1/R)`.
pub fn ball_potential(tau: f64, radius: f64, amplitude: f64, r: f64) -> (f64, f64) {
    let tr = tau * radius;
    let core = 0.5 * ((tr - 1.0) * (tau * (radius - r)).exp() + (tr + 1.0) * (-tau * (radius + r)).exp());
    let v = amplitude * core / (tau * tau * tau * r);
    (v, -v * (tau + 1.0 / r))
}

fn check_tau(tau: f64) -> Result<(), ResolventError> {
    if tau >= 1.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(ResolventError::Domain(format!("tau = {tau} must be >= 1")))
    }
}

/// Closed-form free-space field of a ball source, `None` for other shapes.
pub fn v_free_exact(x: Point3, tau: f64, source: &SourceSpec) -> Option<ResolventSample> {
    let Region::Ball { center, radius } = source.region else {
        return None;
    };
    let d = x - center;
    let r = d.norm();
    if r <= radius || source.supersample.is_some_and(|n| n > 1) {
        return None;
    }
    let (v, dv) = ball_potential(tau, radius, source.sign * source.amplitude, r);
    Some(ResolventSample { x, tau, value: v, gradient: d * (dv / r) })
}

/// Free-space field by quadrature of the kernel and its gradient over `B`.
pub fn v_free(x: Point3, tau: f64, source: &SourceSpec, bquad: &QuadratureSet) -> Result<ResolventSample, ResolventError> {
    check_tau(tau)?;
    if source.region.closure_contains(x) {
        return Err(ResolventError::Domain("evaluation point inside closure of B".into()));
    }
    let mut value = 0.0;
    let mut gradient = Point3::ORIGIN;
    for (y, w) in bquad.nodes.iter().zip(&bquad.weights) {
        let f = source.value(*y);
        if f == 0.0 {
            continue;
        }
        let d = x - *y;
        let r = d.norm();
        let k = (-tau * r).exp() / (4.0 * PI * r);
        value += w * f * k;
        gradient += d * (-w * f * k * (tau + 1.0 / r) / r);
    }
    Ok(ResolventSample { x, tau, value, gradient })
}

/// Quadrature of `D` used by the gradient-norm functionals: a Gauss rule for
/// balls (nodes cluster toward the boundary, where `|∇v|²` concentrates),
/// the midpoint lattice otherwise.
pub fn inclusion_quadrature(d: &Region, spacing: f64) -> Result<QuadratureSet, GeometryError> {
    match *d {
        Region::Ball { center, radius } => {
            let n = ((radius / spacing).ceil() as usize).max(16);
            Ok(QuadratureSet::gauss_ball(center, radius, n, n, 2 * n))
        }
        _ => sample_region(d, spacing),
    }
}

/// `∫_D |∇v|²` with `v` the free-space field of `s`: exact for ball
/// sources, lattice quadrature over `B` at `spacing` otherwise.
pub fn grad_norm_sq_free(d: &Region, s: &SourceSpec, tau: f64, spacing: f64) -> Result<f64, ResolventError> {
    check_tau(tau)?;
    dist_sets(d, &s.region)?;
    let dquad = inclusion_quadrature(d, spacing)?;
    let bquad = if v_free_exact(dquad.nodes[0], tau, s).is_some() { None } else { Some(sample_region(&s.region, spacing)?) };
    let mut total = 0.0;
    for (x, w) in dquad.nodes.iter().zip(&dquad.weights) {
        let g = match &bquad {
            None => v_free_exact(*x, tau, s).expect("ball source outside D").gradient,
            Some(q) => v_free(*x, tau, s, q)?.gradient,
        };
        total += w * g.dot(g);
    }
    Ok(total)
}

/// Leading asymptotic term of the layered fundamental solution for `x`
/// below and `y` above the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticKernel {
    pub value: f64,
    /// `∇ₓΦ ≈ value · gradient_factor`.
    pub gradient_factor: Point3,
    pub l: f64,
    pub det_h: f64,
    pub e0: f64,
}

pub fn phi0_asymptotic(x: Point3, y: Point3, tau: f64, layers: Layers) -> Result<AsymptoticKernel, ResolventError> {
    let path = optical_path(x, y, layers)?;
    let det_h = hessian_det(x, y, layers)?;
    let (gp, gm) = (layers.gamma_plus, layers.gamma_minus);
    let zt = Point3::new(path.z_prime[0], path.z_prime[1], 0.0);
    let rx = x.distance(zt);
    let ry = y.distance(zt);
    let a0 = layers.a0();
    let horiz = (x.x1 - zt.x1).hypot(x.x2 - zt.x2);
    let s = (a0 * a0 * rx * rx - horiz * horiz).max(0.0).sqrt();
    let depth = x.x3.abs();
    let e0 = 4.0 * gm.sqrt() * depth * s / (rx * (s + a0 * a0 * depth));
    let value = (-tau * path.l).exp() * e0 / (8.0 * PI * gp * gm * det_h.sqrt() * rx * ry);
    let gradient_factor = (x - zt) * (-tau / (gm.sqrt() * rx));
    Ok(AsymptoticKernel { value, gradient_factor, l: path.l, det_h, e0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMethod {
    /// One CG solve of the elliptic system per τ.
    Direct,
    /// March the wave equation to `horizon`, sum the discrete Laplace
    /// transform on the evaluation nodes, and close with one CG solve for
    /// the remainder. Keeps full relative precision where `v` is
    /// exponentially small, which a global residual criterion cannot.
    #[default]
    TimeMarched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzSolveSpec {
    pub origin: Point3,
    pub extent: [f64; 3],
    pub h: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub method: SolveMethod,
    /// Time horizon for [`SolveMethod::TimeMarched`].
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl HelmholtzSolveSpec {
    /// Box around `B ∪ eval` with `margin ≥ 10/τ_min` on every side.
    pub fn padded(source: &Region, eval: &Region, h: f64, tau_min: f64, margin: f64) -> Self {
        let margin = margin.max(10.0 / tau_min);
        let (a, b) = source.bounding_box();
        let (c, d) = eval.bounding_box();
        let lo = a.zip_with(c, f64::min) - Point3::new(margin, margin, margin);
        let hi = b.zip_with(d, f64::max) + Point3::new(margin, margin, margin);
        let lat = Lattice::covering(lo, hi, h);
        let (o, e) = lat.bounds();
        Self {
            origin: o,
            extent: (e - o).to_array(),
            h,
            tolerance: 1e-8,
            max_iterations: 20_000,
            method: SolveMethod::TimeMarched,
            horizon: None,
        }
    }

    pub fn lattice(&self) -> Lattice {
        let mut start = [0i64; 3];
        let mut shape = [0usize; 3];
        for a in 0..3 {
            start[a] = (self.origin[a] / self.h - 0.5).round() as i64;
            shape[a] = (self.extent[a] / self.h).round() as usize + 1;
        }
        Lattice::new(start, shape, self.h)
    }

    fn validate(&self, source: &Region, eval: &[Point3], tau_min: f64) -> Result<(), ResolventError> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(ResolventError::Domain(format!("tolerance {} not in (0, 1e-6]", self.tolerance)));
        }
        let (lo, hi) = self.lattice().bounds();
        let (slo, shi) = source.bounding_box();
        let mut margin = (0..3).map(|a| (slo[a] - lo[a]).min(hi[a] - shi[a])).fold(f64::INFINITY, f64::min);
        for x in eval {
            for a in 0..3 {
                margin = margin.min(x[a] - lo[a]).min(hi[a] - x[a]);
            }
        }
        let required = 10.0 / tau_min;
        if margin < required - 1e-9 {
            return Err(ResolventError::PaddingViolation { padding: margin, required });
        }
        Ok(())
    }
}

/// Solve report for one τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub tau: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Layered resolvent on a fixed box and source, evaluated at fixed nodes
/// for any number of τ.
pub struct LayeredSolver<'a> {
    medium: Medium,
    source: &'a SourceSpec,
    spec: HelmholtzSolveSpec,
    eval: Vec<Point3>,
    op: Operator,
    /// Sub-lattice holding the evaluation nodes plus a two-node halo.
    window: Lattice,
    window_offset: [usize; 3],
}

impl<'a> LayeredSolver<'a> {
    pub fn new(background: Background, source: &'a SourceSpec, spec: HelmholtzSolveSpec, eval: Vec<Point3>) -> Result<Self, ResolventError> {
        if let Background::TwoLayer { gamma_plus, gamma_minus } = background {
            if !(gamma_plus > 0.0 && gamma_minus > 0.0) {
                return Err(ResolventError::Domain("layer coefficients must be positive".into()));
            }
        }
        for x in &eval {
            if source.region.closure_contains(*x) {
                return Err(ResolventError::Domain("evaluation node inside closure of B".into()));
            }
        }
        let medium = Medium { background, inclusion: None };
        let lattice = spec.lattice();
        let op = Operator::assemble(lattice, &medium);
        let h = spec.h;
        let (mut lo, mut hi) = (eval[0], eval[0]);
        for x in &eval {
            lo = lo.zip_with(*x, f64::min);
            hi = hi.zip_with(*x, f64::max);
        }
        let sub = Lattice::covering(lo - Point3::new(2.0 * h, 2.0 * h, 2.0 * h), hi + Point3::new(2.0 * h, 2.0 * h, 2.0 * h), h);
        let mut window_offset = [0usize; 3];
        for a in 0..3 {
            let off = sub.start[a] - lattice.start[a];
            if off < 0 || off as usize + sub.shape[a] > lattice.shape[a] {
                return Err(ResolventError::PaddingViolation { padding: 0.0, required: 2.0 * h });
            }
            window_offset[a] = off as usize;
        }
        Ok(Self { medium, source, spec, eval, op, window: sub, window_offset })
    }

    fn window_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [ox, oy, oz] = self.window_offset;
        self.op.lattice.index(i + ox, j + oy, k + oz)
    }

    fn extract_window(&self, field: &[f64]) -> Vec<f64> {
        let [nx, ny, nz] = self.window.shape;
        let mut out = Vec::with_capacity(self.window.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    out.push(field[self.window_index(i, j, k)]);
                }
            }
        }
        out
    }

    /// Samples at the evaluation nodes from a window field: trilinear value
    /// and trilinear interpolation of the centred-difference gradient.
    fn samples(&self, tau: f64, w: &[f64]) -> Vec<ResolventSample> {
        let lat = self.window;
        let [nx, ny, nz] = lat.shape;
        let h = lat.h();
        let grad_at = |i: usize, j: usize, k: usize| {
            let c = |a: usize, b: usize, cc: usize| w[lat.index(a, b, cc)];
            let d = |lo: f64, hi: f64, span: f64| (hi - lo) / (span * h);
            let gx = if i == 0 || i + 1 == nx { 0.0 } else { d(c(i - 1, j, k), c(i + 1, j, k), 2.0) };
            let gy = if j == 0 || j + 1 == ny { 0.0 } else { d(c(i, j - 1, k), c(i, j + 1, k), 2.0) };
            let gz = if k == 0 || k + 1 == nz { 0.0 } else { d(c(i, j, k - 1), c(i, j, k + 1), 2.0) };
            Point3::new(gx, gy, gz)
        };
        self.eval
            .iter()
            .map(|x| {
                let st = lat.trilinear(*x).expect("evaluation nodes lie inside their window");
                let mut value = 0.0;
                let mut gradient = Point3::ORIGIN;
                for (idx, wt) in st {
                    if wt == 0.0 {
                        continue;
                    }
                    value += wt * w[idx];
                    let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
                    gradient += grad_at(i, j, k) * wt;
                }
                ResolventSample { x: *x, tau, value, gradient }
            })
            .collect()
    }

    fn rhs(&self) -> Vec<f64> {
        let h = self.spec.h;
        self.op.lattice.sample(|x| self.source.cell_value(x, h))
    }

    /// Samples for each τ, with one solve report per τ.
    pub fn sweep(&self, taus: &[f64]) -> Result<(Vec<Vec<ResolventSample>>, Vec<SolveReport>), ResolventError> {
        let tau_min = taus.iter().copied().fold(f64::INFINITY, f64::min);
        for &t in taus {
            check_tau(t)?;
        }
        self.spec.validate(&self.source.region, &self.eval, tau_min)?;
        match self.spec.method {
            SolveMethod::Direct => {
                let b = self.rhs();
                let mut out = Vec::new();
                let mut reports = Vec::new();
                for &tau in taus {
                    let (v, rep) = self.op.solve_shifted(tau * tau, &b, self.spec.tolerance, self.spec.max_iterations)?;
                    out.push(self.samples(tau, &self.extract_window(&v)));
                    reports.push(SolveReport { tau, iterations: rep.iterations, relative_residual: rep.relative_residual });
                }
                Ok((out, reports))
            }
            SolveMethod::TimeMarched => self.sweep_time_marched(taus, tau_min),
        }
    }

    fn default_horizon(&self, tau_min: f64) -> f64 {
        let (lo, hi) = self.source.region.bounding_box();
        let mut far: f64 = 0.0;
        for x in &self.eval {
            for c in 0..8 {
                let corner = Point3::new(
                    if c & 1 == 0 { lo.x1 } else { hi.x1 },
                    if c & 2 == 0 { lo.x2 } else { hi.x2 },
                    if c & 4 == 0 { lo.x3 } else { hi.x3 },
                );
                far = far.max(corner.distance(*x));
            }
        }
        let c_min = match self.medium.background {
            Background::Homogeneous => 1.0,
            Background::TwoLayer { gamma_plus, gamma_minus } => gamma_plus.min(gamma_minus).sqrt(),
        };
        far / c_min + 12.0 / tau_min
    }

    fn sweep_time_marched(&self, taus: &[f64], tau_min: f64) -> Result<(Vec<Vec<ResolventSample>>, Vec<SolveReport>), ResolventError> {
        let horizon = self.spec.horizon.unwrap_or_else(|| self.default_horizon(tau_min));
        let dt0 = max_stable_dt(self.spec.h, &self.medium);
        let steps = (horizon / dt0).ceil().max(2.0) as usize;
        let dt = horizon / steps as f64;
        // Time decay realizing each target σ exactly in the discrete identity
        // (σ² + K)·dtΣzⁿuⁿ = f, z = e^{−τ_t dt}, σ = 2 sinh(τ_t dt/2)/dt.
        let zs: Vec<f64> = taus.iter().map(|&s| (-2.0 * (s * dt / 2.0).asinh()).exp()).collect();
        let nwin = self.window.len();
        let mut acc = vec![vec![0.0; nwin]; taus.len()];
        let dt2 = dt * dt;
        // Σ_{n=1}^{N−1} zⁿuⁿ on the window; u^N and u^{N−1} feed the tail.
        let (state, _) = forward::march(&self.op, self.source, dt, steps, |n, u| {
            if n == 0 || n == steps {
                return;
            }
            let win = self.extract_window(u);
            for (a, z) in acc.iter_mut().zip(&zs) {
                let zn = z.powi(n as i32);
                for (s, u) in a.iter_mut().zip(&win) {
                    *s += zn * u;
                }
            }
        });
        let (cur, prev) = (&state.current, &state.previous);
        let zn: Vec<f64> = zs.iter().map(|z| z.powi(steps as i32)).collect();
        let mut out = Vec::with_capacity(taus.len());
        let mut reports = Vec::with_capacity(taus.len());
        for (t, &tau) in taus.iter().enumerate() {
            let z = zs[t];
            let rhs: Vec<f64> = cur.iter().zip(prev.iter()).map(|(un, um)| (un - z * um) / (z * dt2)).collect();
            let (q, rep) = self.op.solve_shifted(tau * tau, &rhs, self.spec.tolerance, self.spec.max_iterations)?;
            let qw = self.extract_window(&q);
            let w: Vec<f64> = acc[t].iter().zip(&qw).map(|(s, q)| dt * (s + zn[t] * q)).collect();
            out.push(self.samples(tau, &w));
            reports.push(SolveReport { tau, iterations: rep.iterations, relative_residual: rep.relative_residual });
        }
        Ok((out, reports))
    }
}

/// Layered background field at the evaluation nodes.
pub fn v_layered(
    eval: &QuadratureSet,
    tau: f64,
    s: &SourceSpec,
    background: Background,
    spec: &HelmholtzSolveSpec,
) -> Result<(Vec<ResolventSample>, SolveReport), ResolventError> {
    let solver = LayeredSolver::new(background, s, *spec, eval.nodes.clone())?;
    let (mut v, mut r) = solver.sweep(&[tau])?;
    Ok((v.remove(0), r.remove(0)))
}

/// `∫_D |∇v|²` for the layered field, one value per τ. `D` is sampled on
/// the solver lattice so the gradient is evaluated at grid nodes.
pub fn grad_norm_sq_layered_sweep(
    d: &Region,
    s: &SourceSpec,
    taus: &[f64],
    background: Background,
    spec: &HelmholtzSolveSpec,
) -> Result<Vec<f64>, ResolventError> {
    dist_sets(d, &s.region)?;
    let dquad = sample_region(d, spec.h)?;
    let solver = LayeredSolver::new(background, s, *spec, dquad.nodes.clone())?;
    let (fields, _) = solver.sweep(taus)?;
    Ok(fields
        .iter()
        .map(|samples| samples.iter().zip(&dquad.weights).map(|(p, w)| w * p.gradient.dot(p.gradient)).sum())
        .collect())
}

pub fn grad_norm_sq_layered(
    d: &Region,
    s: &SourceSpec,
    tau: f64,
    background: Background,
    spec: &HelmholtzSolveSpec,
) -> Result<f64, ResolventError> {
    Ok(grad_norm_sq_layered_sweep(d, s, &[tau], background, spec)?[0])
}

/// `σ = 2 sinh(τ·dt/2)/dt`: the leapfrog sum `dtΣ e^{−τn·dt}uⁿ` solves
/// `(σ² + K)v = f` exactly.
pub fn discrete_laplace_parameter(tau: f64, dt: f64) -> f64 {
    2.0 * (tau * dt / 2.0).sinh() / dt
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_potential_matches_gauss_quadrature() {
        let c = Point3::new(0.2, -0.1, 0.3);
        let q = QuadratureSet::gauss_ball(c, 0.5, 40, 40, 80);
        let x = Point3::new(1.0, 0.7, 1.9);
        let r = x.distance(c);
        for tau in [1.0, 4.0, 12.0] {
            let (exact, _) = ball_potential(tau, 0.5, 1.0, r);
            let numeric = q.integrate(|y| (-tau * x.distance(y)).exp() / (4.0 * PI * x.distance(y)));
            assert!(((numeric - exact) / exact).abs() < 1e-6, "tau {tau}: {numeric} vs {exact}");
        }
    }

    #[test]
    fn vertical_kernel_reduces_to_free_space_when_layers_coincide() {
        let g = 2.0;
        let layers = Layers::new(g, g);
        let x = Point3::new(0.0, 0.0, -0.6);
        let y = Point3::new(0.0, 0.0, 1.1);
        let k = phi0_asymptotic(x, y, 3.0, layers).unwrap();
        let r = 1.7;
        let expect = (-3.0 * r / g.sqrt()).exp() / (4.0 * PI * g * r);
        assert!(((k.value - expect) / expect).abs() < 1e-13);
    }
}
