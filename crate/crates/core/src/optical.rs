//! Travel-time geometry across the flat interface `x₃ = 0` separating the
//! speeds `√γ₋` (below) and `√γ₊` (above).
//!
//! A path from `x` (below) to `y` (above) crossing the interface at
//! `z̃′ = (z′, 0)` takes `l_{x,y}(z′) = |z̃′ − x|/√γ₋ + |z̃′ − y|/√γ₊`. Its
//! minimizer lies on the horizontal segment `x′y′`, where the derivative along
//! the segment is strictly increasing, so the Snell point is a bracketed 1-D
//! root.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point3, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticalError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// Layer coefficients `(γ₊, γ₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layers {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl Layers {
    pub fn new(gamma_plus: f64, gamma_minus: f64) -> Self {
        Self { gamma_plus, gamma_minus }
    }

    fn slowness(&self) -> (f64, f64) {
        (1.0 / self.gamma_minus.sqrt(), 1.0 / self.gamma_plus.sqrt())
    }

    /// `a₀ = √(γ₋/γ₊)`.
    pub fn a0(&self) -> f64 {
        (self.gamma_minus / self.gamma_plus).sqrt()
    }

    pub fn critical_angle(&self) -> Option<CriticalAngle> {
        (self.gamma_plus > self.gamma_minus).then(|| {
            let a0 = self.a0();
            CriticalAngle { a0, theta0: a0.asin() }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngle {
    pub a0: f64,
    pub theta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalPath {
    pub x: Point3,
    pub y: Point3,
    pub z_prime: [f64; 2],
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub l: f64,
}

impl OpticalPath {
    /// `sin θ₋/√γ₋ − sin θ₊/√γ₊`.
    pub fn snell_residual(&self, layers: Layers) -> f64 {
        let (sm, sp) = layers.slowness();
        self.theta_minus.sin() * sm - self.theta_plus.sin() * sp
    }
}

fn check_sides(x: Point3, y: Point3) -> Result<(), OpticalError> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(OpticalError::Domain("non-finite point".into()));
    }
    if !(x.x3 < 0.0 && y.x3 > 0.0) {
        return Err(OpticalError::Domain(format!("need x3 < 0 < y3, got x3 = {} and y3 = {}", x.x3, y.x3)));
    }
    Ok(())
}

fn lift(z: [f64; 2]) -> Point3 {
    Point3::new(z[0], z[1], 0.0)
}

/// `l_{x,y}(z′)` for any interface point.
pub fn path_length(x: Point3, y: Point3, z: [f64; 2], layers: Layers) -> f64 {
    let (sm, sp) = layers.slowness();
    let zt = lift(z);
    zt.distance(x) * sm + zt.distance(y) * sp
}

/// Gradient of `l_{x,y}` in `z′`; vanishes at the Snell point.
pub fn stationarity_residual(x: Point3, y: Point3, z: [f64; 2], layers: Layers) -> [f64; 2] {
    let (sm, sp) = layers.slowness();
    let zt = lift(z);
    let (rx, ry) = (zt.distance(x), zt.distance(y));
    [
        (z[0] - x.x1) * sm / rx + (z[0] - y.x1) * sp / ry,
        (z[1] - x.x2) * sm / rx + (z[1] - y.x2) * sp / ry,
    ]
}

/// Parameter `t ∈ [0, 1]` of the Snell point on `x′ + t(y′ − x′)`.
fn snell_parameter(x: Point3, y: Point3, layers: Layers) -> f64 {
    let (sm, sp) = layers.slowness();
    let dx = y.x1 - x.x1;
    let dy = y.x2 - x.x2;
    let len = dx.hypot(dy);
    if len == 0.0 {
        return 0.0;
    }
    let (a2, b2) = (x.x3 * x.x3, y.x3 * y.x3);
    // g(t) = sin θ₋/√γ₋ − sin θ₊/√γ₊ (dl/dt divided by the segment length).
    let g = |t: f64| {
        let p = t * len;
        let q = (1.0 - t) * len;
        let (rx, ry) = ((p * p + a2).sqrt(), (q * q + b2).sqrt());
        let val = p / rx * sm - q / ry * sp;
        let der = len * (a2 / (rx * rx * rx) * sm + b2 / (ry * ry * ry) * sp);
        (val, der)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t = 0.5;
    for _ in 0..200 {
        let (val, der) = g(t);
        if val == 0.0 {
            return t;
        }
        if val < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if val.abs() <= 1e-15 || hi - lo <= f64::EPSILON * 4.0 {
            return t;
        }
        let newton = t - val / der;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    t
}

/// The unique minimizer `z′(x, y)` of `l_{x,y}`.
pub fn snell_point(x: Point3, y: Point3, layers: Layers) -> Result<[f64; 2], OpticalError> {
    check_sides(x, y)?;
    let t = snell_parameter(x, y, layers);
    Ok([x.x1 + t * (y.x1 - x.x1), x.x2 + t * (y.x2 - x.x2)])
}

pub fn optical_path(x: Point3, y: Point3, layers: Layers) -> Result<OpticalPath, OpticalError> {
    let z = snell_point(x, y, layers)?;
    let zt = lift(z);
    let (rx, ry) = (zt.distance(x), zt.distance(y));
    let hx = (z[0] - x.x1).hypot(z[1] - x.x2);
    let hy = (z[0] - y.x1).hypot(z[1] - y.x2);
    Ok(OpticalPath {
        x,
        y,
        z_prime: z,
        theta_minus: (hx / rx).asin(),
        theta_plus: (hy / ry).asin(),
        l: path_length(x, y, z, layers),
    })
}

/// `l(x, y) = min_{z′} l_{x,y}(z′)`.
pub fn optical_distance(x: Point3, y: Point3, layers: Layers) -> Result<f64, OpticalError> {
    Ok(optical_path(x, y, layers)?.l)
}

/// Closed-form Hessian of `l_{x,y}` in `z′` at `z`.
pub fn hessian_at(x: Point3, y: Point3, z: [f64; 2], layers: Layers) -> [[f64; 2]; 2] {
    let (sm, sp) = layers.slowness();
    let zt = lift(z);
    let mut h = [[0.0; 2]; 2];
    for (p, s) in [(x, sm), (y, sp)] {
        let d = [z[0] - p.x1, z[1] - p.x2];
        let r = zt.distance(p);
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                h[i][j] += s * (delta - d[i] * d[j] / (r * r)) / r;
            }
        }
    }
    h
}

/// `det Hess(l_{x,y})(z′(x,y))`; strictly positive.
pub fn hessian_det(x: Point3, y: Point3, layers: Layers) -> Result<f64, OpticalError> {
    let z = snell_point(x, y, layers)?;
    let h = hessian_at(x, y, z, layers);
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    assert!(det > 0.0, "Snell point must be a strict minimum");
    Ok(det)
}

fn require_total_reflection(layers: Layers) -> Result<CriticalAngle, OpticalError> {
    layers
        .critical_angle()
        .ok_or_else(|| OpticalError::Domain("modified length needs gamma_plus > gamma_minus".into()))
}

/// Whether `z′ ∈ U₁(x)`, i.e. `|x′ − z′| < a₀|x − z̃′|`.
pub fn in_subcritical_zone(x: Point3, z: [f64; 2], layers: Layers) -> bool {
    let horiz = (x.x1 - z[0]).hypot(x.x2 - z[1]);
    horiz < layers.a0() * lift(z).distance(x)
}

fn evanescent_branch(x: Point3, y: Point3, z: [f64; 2], layers: Layers, c: CriticalAngle) -> f64 {
    let (sm, sp) = layers.slowness();
    let horiz = (x.x1 - z[0]).hypot(x.x2 - z[1]);
    x.x3.abs() * c.theta0.cos() * sm + (horiz + lift(z).distance(y)) * sp
}

/// Modified length `l̃_{x,y}(z′)`: the travel time inside `U₁(x)`, the
/// critical-angle (interface-guided) time outside. Within 1e-9 rad of the
/// critical angle both branches are evaluated and the smaller is returned.
pub fn tilde_l(x: Point3, y: Point3, z: [f64; 2], layers: Layers) -> Result<f64, OpticalError> {
    check_sides(x, y)?;
    let c = require_total_reflection(layers)?;
    let horiz = (x.x1 - z[0]).hypot(x.x2 - z[1]);
    let theta = horiz.atan2(x.x3.abs());
    let exact = path_length(x, y, z, layers);
    if (theta - c.theta0).abs() < 1e-9 {
        return Ok(exact.min(evanescent_branch(x, y, z, layers, c)));
    }
    Ok(if in_subcritical_zone(x, z, layers) { exact } else { evanescent_branch(x, y, z, layers, c) })
}

/// The critical-angle point `z₀′` on the segment `x′z′` for `z′ ∉ U₁(x)`.
pub fn critical_point(x: Point3, z: [f64; 2], layers: Layers) -> Result<[f64; 2], OpticalError> {
    let c = require_total_reflection(layers)?;
    let d = [z[0] - x.x1, z[1] - x.x2];
    let n = d[0].hypot(d[1]);
    let reach = x.x3.abs() * c.theta0.tan();
    if n < reach {
        return Err(OpticalError::Domain("z' lies inside the subcritical zone".into()));
    }
    Ok([x.x1 + d[0] * reach / n, x.x2 + d[1] * reach / n])
}

/// `(value, argmin)` of `l̃_{x,y}` by a dense interface scan followed by
/// repeated local zooms.
pub fn min_tilde_l(x: Point3, y: Point3, layers: Layers, grid: usize) -> Result<(f64, [f64; 2]), OpticalError> {
    check_sides(x, y)?;
    require_total_reflection(layers)?;
    let pad = 2.0 * x.x3.abs().max(y.x3);
    let lo = [x.x1.min(y.x1) - pad, x.x2.min(y.x2) - pad];
    let hi = [x.x1.max(y.x1) + pad, x.x2.max(y.x2) + pad];
    let n = grid.max(3);
    let eval = |z: [f64; 2]| tilde_l(x, y, z, layers).expect("sides checked");
    let scan = |lo: [f64; 2], hi: [f64; 2], n: usize| {
        let mut best = (f64::INFINITY, lo);
        for i in 0..n {
            let a = lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let b = lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64;
                let v = eval([a, b]);
                if v < best.0 {
                    best = (v, [a, b]);
                }
            }
        }
        best
    };
    let mut best = scan(lo, hi, n);
    let mut half = [(hi[0] - lo[0]) / (n - 1) as f64 * 2.0, (hi[1] - lo[1]) / (n - 1) as f64 * 2.0];
    while half[0].max(half[1]) > 1e-9 {
        let c = best.1;
        let cand = scan([c[0] - half[0], c[1] - half[1]], [c[0] + half[0], c[1] + half[1]], 21);
        if cand.0 <= best.0 {
            best = cand;
        }
        half = [half[0] * 0.25, half[1] * 0.25];
    }
    Ok(best)
}

/// `l(D, B) = inf_{x∈D, y∈B} l(x, y)` with its minimizing pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalMinimum {
    pub l: f64,
    pub x: Point3,
    pub y: Point3,
}

fn envelope_gradient(x: Point3, y: Point3, layers: Layers) -> (f64, Point3, Point3) {
    let z = snell_point(x, y, layers).expect("sides checked by caller");
    let zt = lift(z);
    let (sm, sp) = layers.slowness();
    let gx = (x - zt) * (sm / x.distance(zt));
    let gy = (y - zt) * (sp / y.distance(zt));
    (path_length(x, y, z, layers), gx, gy)
}

/// Projected gradient on one convex pair of primitives. `l` is jointly
/// convex in `(x, y)`, so any stationary point is the pair minimum.
fn descend(d: &Region, b: &Region, layers: Layers) -> OpticalMinimum {
    let centre = |r: &Region| {
        let (lo, hi) = r.bounding_box();
        (lo + hi) * 0.5
    };
    let mut x = d.project(centre(d));
    let mut y = b.project(centre(b));
    let (mut f, mut gx, mut gy) = envelope_gradient(x, y, layers);
    let mut step = 0.1 * (d.bounding_box().1 - d.bounding_box().0).norm().max(1e-3);
    for _ in 0..20_000 {
        let mut accepted = false;
        while step > 1e-16 {
            let xn = d.project(x - gx * step);
            let yn = b.project(y - gy * step);
            if xn.x3 >= 0.0 || yn.x3 <= 0.0 {
                step *= 0.5;
                continue;
            }
            let (fn_, gxn, gyn) = envelope_gradient(xn, yn, layers);
            let moved = (xn - x).dot(xn - x) + (yn - y).dot(yn - y);
            if fn_ <= f - 1e-4 * moved / step {
                let dg = (gxn - gx).dot(xn - x) + (gyn - gy).dot(yn - y);
                let (dx, dy) = (xn - x, yn - y);
                x = xn;
                y = yn;
                f = fn_;
                gx = gxn;
                gy = gyn;
                accepted = true;
                // Barzilai–Borwein length for the next trial.
                step = if dg > 0.0 { ((dx.dot(dx) + dy.dot(dy)) / dg).clamp(1e-12, 1e3) } else { step * 2.0 };
                if moved.sqrt() < 1e-14 {
                    return OpticalMinimum { l: f, x, y };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    OpticalMinimum { l: f, x, y }
}

pub fn min_optical_distance(d: &Region, b: &Region, layers: Layers) -> Result<OpticalMinimum, OpticalError> {
    d.validate().map_err(|e| OpticalError::Domain(e.to_string()))?;
    b.validate().map_err(|e| OpticalError::Domain(e.to_string()))?;
    if d.bounding_box().1.x3 >= 0.0 {
        return Err(OpticalError::Domain("D not strictly below interface".into()));
    }
    if b.bounding_box().0.x3 <= 0.0 {
        return Err(OpticalError::Domain("B not strictly above interface".into()));
    }
    let mut best: Option<OpticalMinimum> = None;
    for pd in d.primitives() {
        for pb in b.primitives() {
            let m = descend(pd, pb, layers);
            if best.map_or(true, |b| m.l < b.l) {
                best = Some(m);
            }
        }
    }
    Ok(best.expect("validated regions have parts"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAYERS: Layers = Layers { gamma_plus: 1.0, gamma_minus: 4.0 };

    #[test]
    fn vertical_pair() {
        let x = Point3::new(0.0, 0.0, -1.0);
        let y = Point3::new(0.0, 0.0, 2.0);
        assert_eq!(snell_point(x, y, LAYERS).unwrap(), [0.0, 0.0]);
        let l = optical_distance(x, y, LAYERS).unwrap();
        assert!((l - (1.0 / 2.0 + 2.0)).abs() < 1e-15);
        let det = hessian_det(x, y, LAYERS).unwrap();
        let expect: f64 = (1.0 / (1.0 * 2.0) + 1.0 / (2.0 * 1.0)) * (1.0 / (1.0 * 2.0) + 1.0 / (2.0 * 1.0));
        assert!((det - expect).abs() < 1e-14);
    }

    #[test]
    fn degenerate_layers_give_straight_ray() {
        let layers = Layers::new(2.5, 2.5);
        let x = Point3::new(0.3, -1.0, -0.7);
        let y = Point3::new(-1.2, 0.4, 1.9);
        let l = optical_distance(x, y, layers).unwrap();
        assert!((l - x.distance(y) / 2.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wrong_half_spaces_rejected() {
        let bad = snell_point(Point3::new(0.0, 0.0, 1.0), Point3::new(0.0, 0.0, 2.0), LAYERS);
        assert!(matches!(bad, Err(OpticalError::Domain(_))));
        let x = Point3::new(0.0, 0.0, -1.0);
        let y = Point3::new(0.0, 0.0, 1.0);
        assert!(tilde_l(x, y, [0.0, 0.0], Layers::new(1.0, 4.0)).is_err());
    }

    #[test]
    fn coaxial_balls() {
        let d = Region::ball(Point3::new(0.0, 0.0, -3.0), 1.0);
        let b = Region::ball(Point3::new(0.0, 0.0, 2.0), 0.5);
        let m = min_optical_distance(&d, &b, LAYERS).unwrap();
        assert!((m.l - (2.0 / 2.0 + 1.5)).abs() < 1e-9, "{m:?}");
        assert!(m.x.horizontal()[0].abs() < 1e-6 && m.y.horizontal()[1].abs() < 1e-6);
    }

    #[test]
    fn tilde_branches() {
        let layers = Layers::new(4.0, 1.0);
        let x = Point3::new(0.0, 0.0, -1.0);
        let y = Point3::new(3.0, 0.0, 1.0);
        let inside = [0.1, 0.0];
        assert!(in_subcritical_zone(x, inside, layers));
        assert_eq!(tilde_l(x, y, inside, layers).unwrap(), path_length(x, y, inside, layers));
        let outside = [2.0, 0.5];
        assert!(!in_subcritical_zone(x, outside, layers));
        assert!(tilde_l(x, y, outside, layers).unwrap() < path_length(x, y, outside, layers));
        let (v, z) = min_tilde_l(x, y, layers, 201).unwrap();
        let zs = snell_point(x, y, layers).unwrap();
        assert!((v - optical_distance(x, y, layers).unwrap()).abs() < 1e-10);
        assert!((z[0] - zs[0]).hypot(z[1] - zs[1]) < 1e-5);
    }
}
