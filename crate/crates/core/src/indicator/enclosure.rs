use serde::{Deserialize, Serialize};

use crate::geometry::{fibonacci_directions, Point3};
use crate::medium::Background;
use crate::optical::{optical_distance, Layers};

/// Extracted length for one spherical probe `B_r(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub center: Point3,
    pub radius: f64,
    pub l_hat: f64,
    pub background: Background,
}

/// Intersection of the per-probe exclusion sets: every point strictly
/// farther from each probe than its extracted length.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub probes: Vec<ProbeResult>,
    pub background: Background,
}

impl Enclosure {
    pub fn new(probes: Vec<ProbeResult>, background: Background) -> Self {
        Self { probes, background }
    }

    /// Homogeneous: `|x − p_i| > L̂_i + r_i` for all `i`. Layered:
    /// `l(x, p_i) > L̂_i + r_i/√γ₊`, only below the interface.
    pub fn contains(&self, x: Point3) -> bool {
        match self.background {
            Background::Homogeneous => self.probes.iter().all(|p| x.distance(p.center) > p.l_hat + p.radius),
            Background::TwoLayer { gamma_plus, gamma_minus } => {
                if x.x3 >= 0.0 {
                    return false;
                }
                let layers = Layers::new(gamma_plus, gamma_minus);
                let slow = 1.0 / gamma_plus.sqrt();
                self.probes.iter().all(|p| match optical_distance(x, p.center, layers) {
                    Ok(l) => l > p.l_hat + p.radius * slow,
                    Err(_) => false,
                })
            }
        }
    }

    /// A point the predicate accepts, to shoot boundary rays from: the mean
    /// probe center when homogeneous, else the first accepted point straight
    /// below the mean horizontal probe position.
    pub fn default_reference(&self, max_radius: f64) -> Option<Point3> {
        if self.probes.is_empty() {
            return None;
        }
        let n = self.probes.len() as f64;
        let mean = self.probes.iter().fold(Point3::ORIGIN, |a, p| a + p.center) * (1.0 / n);
        match self.background {
            Background::Homogeneous => self.contains(mean).then_some(mean),
            Background::TwoLayer { .. } => {
                let step = max_radius / 2000.0;
                (1..=2000)
                    .map(|k| Point3::new(mean.x1, mean.x2, -(k as f64) * step))
                    .find(|x| self.contains(*x))
            }
        }
    }

    /// First predicate crossing along each of `directions` Fibonacci rays from
    /// `reference`, located by marching with `max_radius/400` steps then
    /// bisecting. Rays that stay inside up to `max_radius` are skipped.
    pub fn boundary_samples(&self, reference: Point3, directions: usize, max_radius: f64) -> Vec<Point3> {
        if !self.contains(reference) {
            return Vec::new();
        }
        let step = max_radius / 400.0;
        let mut out = Vec::with_capacity(directions);
        for d in fibonacci_directions(directions) {
            let mut inside = 0.0;
            let mut t = step;
            while t <= max_radius && self.contains(reference + d * t) {
                inside = t;
                t += step;
            }
            if t > max_radius {
                continue;
            }
            let (mut lo, mut hi) = (inside, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.contains(reference + d * mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-12 * max_radius {
                    break;
                }
            }
            out.push(reference + d * (0.5 * (lo + hi)));
        }
        out
    }
}
