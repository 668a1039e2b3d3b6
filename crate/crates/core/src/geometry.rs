//! Bounded regions in ℝ³: membership, set distances, support functions,
//! cone integrals and lattice quadrature.
//!
//! Every region is a ball, an axis-aligned box or a finite union of those.
//! All of them satisfy an interior cone condition at every boundary point,
//! which is the regularity the enclosure estimates rely on.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("sets intersect (separation {separation:.6e})")]
    Overlap { separation: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("no lattice node of spacing {spacing} falls inside the region")]
    EmptyRegion { spacing: f64 },
    #[error("decay rate {tau} is below 1")]
    Domain { tau: f64 },
    #[error("invalid cone: {0}")]
    InvalidCone(String),
}

/// A point (or vector) of ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Horizontal part `x′ = (x₁, x₂)`.
    pub fn horizontal(self) -> [f64; 2] {
        [self.x1, self.x2]
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Point3 {
        Point3::new(f(self.x1), f(self.x2), f(self.x3))
    }

    pub fn zip_with(self, other: Point3, f: impl Fn(f64, f64) -> f64) -> Point3 {
        Point3::new(f(self.x1, other.x1), f(self.x2, other.x2), f(self.x3, other.x3))
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Index<usize> for Point3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.x3,
            _ => panic!("Point3 index {i} out of range"),
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        self * -1.0
    }
}

/// A bounded open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball { center: Point3, radius: f64 },
    Box { min: Point3, max: Point3 },
    Union { parts: Vec<Region> },
}

impl Region {
    pub fn ball(center: Point3, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn cuboid(min: Point3, max: Point3) -> Self {
        Region::Box { min, max }
    }

    pub fn union(parts: Vec<Region>) -> Self {
        Region::Union { parts }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Region::Ball { center, radius } => {
                if !center.is_finite() {
                    return Err(GeometryError::InvalidRegion("ball center not finite".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(GeometryError::InvalidRegion(format!(
                        "ball radius {radius} must be positive"
                    )));
                }
                Ok(())
            }
            Region::Box { min, max } => {
                if !(min.is_finite() && max.is_finite()) {
                    return Err(GeometryError::InvalidRegion("box corner not finite".into()));
                }
                if !(min.x1 < max.x1 && min.x2 < max.x2 && min.x3 < max.x3) {
                    return Err(GeometryError::InvalidRegion(
                        "box requires min < max componentwise".into(),
                    ));
                }
                Ok(())
            }
            Region::Union { parts } => {
                if parts.is_empty() {
                    return Err(GeometryError::InvalidRegion("empty union".into()));
                }
                parts.iter().try_for_each(Region::validate)
            }
        }
    }

    /// Membership in the open set.
    pub fn contains(&self, x: Point3) -> bool {
        match self {
            Region::Ball { center, radius } => (x - *center).dot(x - *center) < radius * radius,
            Region::Box { min, max } => {
                (0..3).all(|k| min[k] < x[k] && x[k] < max[k])
            }
            Region::Union { parts } => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, x: Point3) -> bool {
        match self {
            Region::Ball { center, radius } => (x - *center).dot(x - *center) <= radius * radius,
            Region::Box { min, max } => (0..3).all(|k| min[k] <= x[k] && x[k] <= max[k]),
            Region::Union { parts } => parts.iter().any(|p| p.closure_contains(x)),
        }
    }

    /// Axis-aligned bounding box `(min, max)` of the closure.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        match self {
            Region::Ball { center, radius } => {
                let r = Point3::new(*radius, *radius, *radius);
                (*center - r, *center + r)
            }
            Region::Box { min, max } => (*min, *max),
            Region::Union { parts } => {
                let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
                let mut hi = -lo;
                for p in parts {
                    let (a, b) = p.bounding_box();
                    lo = lo.zip_with(a, f64::min);
                    hi = hi.zip_with(b, f64::max);
                }
                (lo, hi)
            }
        }
    }

    /// Closest point of the closure to `x`.
    pub fn project(&self, x: Point3) -> Point3 {
        match self {
            Region::Ball { center, radius } => {
                let d = x - *center;
                let n = d.norm();
                if n <= *radius {
                    x
                } else {
                    *center + d * (radius / n)
                }
            }
            Region::Box { min, max } => Point3::new(
                x.x1.clamp(min.x1, max.x1),
                x.x2.clamp(min.x2, max.x2),
                x.x3.clamp(min.x3, max.x3),
            ),
            Region::Union { parts } => parts
                .iter()
                .map(|p| p.project(x))
                .min_by(|a, b| a.distance(x).total_cmp(&b.distance(x)))
                .expect("validated union is nonempty"),
        }
    }

    /// Distance from `x` to the closure (zero inside).
    pub fn distance_to(&self, x: Point3) -> f64 {
        self.project(x).distance(x)
    }

    /// Primitive parts (a ball or box is its own single part).
    pub fn primitives(&self) -> Vec<&Region> {
        match self {
            Region::Union { parts } => parts.iter().flat_map(Region::primitives).collect(),
            other => vec![other],
        }
    }

    /// Exact volume for primitives; for unions the lattice estimate is the
    /// only honest answer, so `None` is returned.
    pub fn volume(&self) -> Option<f64> {
        match self {
            Region::Ball { radius, .. } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            Region::Box { min, max } => {
                let d = *max - *min;
                Some(d.x1 * d.x2 * d.x3)
            }
            Region::Union { .. } => None,
        }
    }

    /// Translated copy.
    pub fn translated(&self, by: Point3) -> Region {
        match self {
            Region::Ball { center, radius } => Region::ball(*center + by, *radius),
            Region::Box { min, max } => Region::cuboid(*min + by, *max + by),
            Region::Union { parts } => Region::union(parts.iter().map(|p| p.translated(by)).collect()),
        }
    }
}

fn primitive_gap(a: &Region, b: &Region) -> f64 {
    match (a, b) {
        (Region::Ball { center: c1, radius: r1 }, Region::Ball { center: c2, radius: r2 }) => {
            c1.distance(*c2) - r1 - r2
        }
        (Region::Ball { center, radius }, bx @ Region::Box { .. })
        | (bx @ Region::Box { .. }, Region::Ball { center, radius }) => {
            let d = bx.distance_to(*center);
            if d > 0.0 {
                d - radius
            } else {
                // Center inside the box: the closures intersect.
                -radius
            }
        }
        (Region::Box { min: a0, max: a1 }, Region::Box { min: b0, max: b1 }) => {
            let mut sq = 0.0;
            let mut overlapping_axes = 0;
            for k in 0..3 {
                let gap = (b0[k] - a1[k]).max(a0[k] - b1[k]);
                if gap > 0.0 {
                    sq += gap * gap;
                } else {
                    overlapping_axes += 1;
                }
            }
            if overlapping_axes == 3 {
                -1.0
            } else {
                sq.sqrt()
            }
        }
        _ => unreachable!("primitive_gap called on a union"),
    }
}

/// `inf_{x∈A, y∈B} |x − y|`, exact for every supported pair of regions.
///
/// Returns [`GeometryError::Overlap`] when the closures intersect.
pub fn dist_sets(a: &Region, b: &Region) -> Result<f64, GeometryError> {
    a.validate()?;
    b.validate()?;
    let pa = a.primitives();
    let pb = b.primitives();
    let mut best = f64::INFINITY;
    // Fixed evaluation order keeps the value the same when A and B are swapped.
    for p in &pa {
        for q in &pb {
            best = best.min(primitive_gap(p, q).min(primitive_gap(q, p)));
        }
    }
    if best <= 0.0 {
        Err(GeometryError::Overlap { separation: best })
    } else {
        Ok(best)
    }
}

/// Support function `h(ω) = sup_{x∈region} x·ω`.
pub fn support_function(region: &Region, omega: Point3) -> f64 {
    match region {
        Region::Ball { center, radius } => center.dot(omega) + radius * omega.norm(),
        Region::Box { min, max } => (0..3)
            .map(|k| (min[k] * omega[k]).max(max[k] * omega[k]))
            .sum(),
        Region::Union { parts } => parts
            .iter()
            .map(|p| support_function(p, omega))
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Closed cone with vertex `vertex`, unit axis `axis`, height `height` and
/// half-opening angle `opening ∈ (0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub vertex: Point3,
    pub axis: Point3,
    pub height: f64,
    pub opening: f64,
}

impl Cone {
    pub fn new(vertex: Point3, axis: Point3, height: f64, opening: f64) -> Result<Self, GeometryError> {
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidCone(format!("axis norm {} is not 1", axis.norm())));
        }
        if !(height > 0.0) {
            return Err(GeometryError::InvalidCone(format!("height {height} must be positive")));
        }
        if !(opening > 0.0 && opening <= PI / 2.0) {
            return Err(GeometryError::InvalidCone(format!("opening {opening} outside (0, π/2]")));
        }
        Ok(Self { vertex, axis, height, opening })
    }

    pub fn contains(&self, y: Point3) -> bool {
        let d = y - self.vertex;
        let r = d.norm();
        r <= self.height && d.dot(self.axis) >= r * self.opening.cos()
    }

    /// Solid angle of the spherical cap cut out by the cone.
    pub fn solid_angle(&self) -> f64 {
        2.0 * PI * (1.0 - self.opening.cos())
    }
}

/// `∫₀^X s² e^{−s} ds = 2 − e^{−X}(X² + 2X + 2)`.
pub fn incomplete_gamma3(x: f64) -> f64 {
    if x < 1e-3 {
        // Series avoids cancellation: X³/3 − X⁴/4 + X⁵/10.
        return x.powi(3) / 3.0 - x.powi(4) / 4.0 + x.powi(5) / 10.0;
    }
    2.0 - (-x).exp() * (x * x + 2.0 * x + 2.0)
}

/// `∫_C e^{−τ|x−a|} dx` over the cone, reduced to polar coordinates about the
/// vertex: `Vol(S) τ⁻³ ∫₀^{hτ} s² e^{−s} ds`.
pub fn cone_integral(cone: &Cone, tau: f64) -> Result<f64, GeometryError> {
    if !(tau >= 1.0) {
        return Err(GeometryError::Domain { tau });
    }
    Ok(cone.solid_angle() * incomplete_gamma3(cone.height * tau) / tau.powi(3))
}

/// Nodes and positive weights of a quadrature rule over a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSet {
    pub nodes: Vec<Point3>,
    pub weights: Vec<f64>,
}

impl QuadratureSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ wᵢ g(xᵢ)` in node order.
    pub fn integrate(&self, g: impl Fn(Point3) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * g(*x)).sum()
    }

    /// Tensor-product Gauss rule on a ball in spherical coordinates:
    /// Gauss–Legendre in `r` and `cos θ`, trapezoid (exact for trigonometric
    /// polynomials) in the azimuth.
    pub fn gauss_ball(center: Point3, radius: f64, n_radial: usize, n_polar: usize, n_azimuth: usize) -> Self {
        let radial = gauss_quad::GaussLegendre::new(n_radial).expect("n_radial >= 2");
        let polar = gauss_quad::GaussLegendre::new(n_polar).expect("n_polar >= 2");
        let r_rule: Vec<(f64, f64)> = radial
            .as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| (0.5 * radius * (t + 1.0), 0.5 * radius * w))
            .collect();
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for &(r, wr) in &r_rule {
            for &(mu, wmu) in polar.as_node_weight_pairs() {
                let s = (1.0 - mu * mu).sqrt();
                for k in 0..n_azimuth {
                    let phi = (k as f64 + 0.5) * dphi;
                    nodes.push(center + Point3::new(r * s * phi.cos(), r * s * phi.sin(), r * mu));
                    weights.push(wr * r * r * wmu * dphi);
                }
            }
        }
        Self { nodes, weights }
    }
}

/// Coordinate of lattice index `k` for the midpoint lattice of the given
/// spacing: nodes sit at `(k + ½)·spacing`.
pub fn lattice_coord(k: i64, spacing: f64) -> f64 {
    (k as f64 + 0.5) * spacing
}

/// Smallest lattice index whose coordinate is ≥ `x`.
pub fn lattice_ceil(x: f64, spacing: f64) -> i64 {
    (x / spacing - 0.5).ceil() as i64
}

/// Largest lattice index whose coordinate is ≤ `x`.
pub fn lattice_floor(x: f64, spacing: f64) -> i64 {
    (x / spacing - 0.5).floor() as i64
}

/// Midpoint rule: the cells of the lattice `spacing·ℤ³` whose centers lie in
/// the open region, each weighted by the cell volume.
pub fn sample_region(region: &Region, spacing: f64) -> Result<QuadratureSet, GeometryError> {
    region.validate()?;
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(GeometryError::InvalidRegion(format!("spacing {spacing} must be positive")));
    }
    let (lo, hi) = region.bounding_box();
    let range = |k: usize| lattice_ceil(lo[k], spacing)..=lattice_floor(hi[k], spacing);
    let (r1, r2) = (range(0), range(1));
    let slabs: Vec<i64> = range(2).collect();
    let cell = spacing.powi(3);
    let nodes: Vec<Point3> = slabs
        .par_iter()
        .flat_map_iter(|&k| {
            let z = lattice_coord(k, spacing);
            let r1 = r1.clone();
            let r2 = r2.clone();
            r2.flat_map(move |j| {
                let y = lattice_coord(j, spacing);
                r1.clone().map(move |i| Point3::new(lattice_coord(i, spacing), y, z))
            })
            .filter(|p| region.contains(*p))
            .collect::<Vec<_>>()
        })
        .collect();
    if nodes.is_empty() {
        return Err(GeometryError::EmptyRegion { spacing });
    }
    let weights = vec![cell; nodes.len()];
    Ok(QuadratureSet { nodes, weights })
}

/// Roughly uniform unit directions on the sphere (Fibonacci lattice).
pub fn fibonacci_directions(n: usize) -> Vec<Point3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Point3::new(s * phi.cos(), s * phi.sin(), z)
        })
        .collect()
}
