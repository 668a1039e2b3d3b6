//! Coefficient fields `γ(x)` of `∂ₜ²u = div(γ∇u)`: a homogeneous or
//! two-layered background plus an optional inclusion with its own diagonal
//! SPD coefficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist_sets, GeometryError, Point3, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("medium has no inclusion")]
    NoInclusion,
}

/// Diagonal SPD coefficient `diag(g₁, g₂, g₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "GammaRepr", into = "[f64; 3]")]
pub struct Gamma(pub [f64; 3]);

#[derive(Deserialize)]
#[serde(untagged)]
enum GammaRepr {
    Scalar(f64),
    Diagonal([f64; 3]),
}

impl From<GammaRepr> for Gamma {
    fn from(r: GammaRepr) -> Self {
        match r {
            GammaRepr::Scalar(s) => Gamma::scalar(s),
            GammaRepr::Diagonal(d) => Gamma(d),
        }
    }
}

impl From<Gamma> for [f64; 3] {
    fn from(g: Gamma) -> Self {
        g.0
    }
}

impl Gamma {
    pub const IDENTITY: Gamma = Gamma([1.0; 3]);

    pub const fn scalar(s: f64) -> Self {
        Gamma([s, s, s])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_spd(&self) -> bool {
        self.0.iter().all(|g| *g > 0.0 && g.is_finite())
    }

    /// Quadratic form `γξ·ξ`.
    pub fn quadratic_form(&self, xi: Point3) -> f64 {
        self.0[0] * xi.x1 * xi.x1 + self.0[1] * xi.x2 * xi.x2 + self.0[2] * xi.x3 * xi.x3
    }
}

/// Coefficient outside the inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// `γ = I₃`.
    Homogeneous,
    /// `γ = γ₊I₃` for `x₃ > 0`, `γ₋I₃` for `x₃ ≤ 0`.
    TwoLayer { gamma_plus: f64, gamma_minus: f64 },
}

impl Background {
    /// Scalar background value at `x`; the interface plane belongs to the
    /// lower layer.
    pub fn value_at(&self, x: Point3) -> f64 {
        match *self {
            Background::Homogeneous => 1.0,
            Background::TwoLayer { gamma_plus, gamma_minus } => {
                if x.x3 > 0.0 {
                    gamma_plus
                } else {
                    gamma_minus
                }
            }
        }
    }

    /// Background value seen by an inclusion (the lower layer when layered).
    pub fn inclusion_reference(&self) -> f64 {
        match *self {
            Background::Homogeneous => 1.0,
            Background::TwoLayer { gamma_minus, .. } => gamma_minus,
        }
    }

    pub fn max_value(&self) -> f64 {
        match *self {
            Background::Homogeneous => 1.0,
            Background::TwoLayer { gamma_plus, gamma_minus } => gamma_plus.max(gamma_minus),
        }
    }

    pub fn is_layered(&self) -> bool {
        matches!(self, Background::TwoLayer { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub region: Region,
    pub gamma: Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub background: Background,
    #[serde(default)]
    pub inclusion: Option<Inclusion>,
}

/// Outcome of the monotonicity test on the inclusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    /// `γ_D` strictly above the background: the indicator is eventually negative.
    Plus,
    /// `γ_D` strictly below the background: the indicator is eventually positive.
    Minus,
    Violation,
}

impl Monotonicity {
    /// Expected sign of `I_τ` for large `τ`.
    pub fn expected_sign(self) -> Option<f64> {
        match self {
            Monotonicity::Plus => Some(-1.0),
            Monotonicity::Minus => Some(1.0),
            Monotonicity::Violation => None,
        }
    }
}

/// One failed placement or coefficient constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation(pub String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl Medium {
    pub fn homogeneous() -> Self {
        Self { background: Background::Homogeneous, inclusion: None }
    }

    pub fn two_layer(gamma_plus: f64, gamma_minus: f64) -> Self {
        Self { background: Background::TwoLayer { gamma_plus, gamma_minus }, inclusion: None }
    }

    pub fn with_inclusion(mut self, region: Region, gamma: Gamma) -> Self {
        self.inclusion = Some(Inclusion { region, gamma });
        self
    }

    /// The same background with the inclusion removed.
    pub fn background_only(&self) -> Self {
        Self { background: self.background, inclusion: None }
    }

    pub fn gamma_at(&self, x: Point3) -> Gamma {
        match &self.inclusion {
            Some(inc) if inc.region.contains(x) => inc.gamma,
            _ => Gamma::scalar(self.background.value_at(x)),
        }
    }

    /// Largest eigenvalue of `γ` anywhere, so `√` of it bounds the wave speed.
    pub fn max_eigenvalue(&self) -> f64 {
        let bg = self.background.max_value();
        match &self.inclusion {
            Some(inc) => bg.max(inc.gamma.max_eigenvalue()),
            None => bg,
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.max_eigenvalue().sqrt()
    }

    pub fn check_monotonicity(&self) -> Result<Monotonicity, MediumError> {
        let inc = self.inclusion.as_ref().ok_or(MediumError::NoInclusion)?;
        let reference = self.background.inclusion_reference();
        Ok(if inc.gamma.min_eigenvalue() > reference {
            Monotonicity::Plus
        } else if inc.gamma.max_eigenvalue() < reference {
            Monotonicity::Minus
        } else {
            Monotonicity::Violation
        })
    }

    /// Every violated constraint on the medium and the measurement set `b`.
    pub fn validate(&self, b: &Region) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if let Err(e) = b.validate() {
            out.push(Violation(format!("measurement set: {e}")));
        }
        if let Background::TwoLayer { gamma_plus, gamma_minus } = self.background {
            if !(gamma_plus > 0.0 && gamma_minus > 0.0) {
                out.push(Violation("layer coefficients must be positive".into()));
            }
            if gamma_plus == gamma_minus {
                out.push(Violation("two-layer background requires gamma_plus != gamma_minus".into()));
            }
            if b.bounding_box().0.x3 <= 0.0 {
                out.push(Violation("B not strictly above interface".into()));
            }
        }
        if let Some(inc) = &self.inclusion {
            if let Err(e) = inc.region.validate() {
                out.push(Violation(format!("inclusion: {e}")));
            }
            if !inc.gamma.is_spd() {
                out.push(Violation("inclusion gamma not positive definite".into()));
            }
            if self.background.is_layered() && inc.region.bounding_box().1.x3 >= 0.0 {
                out.push(Violation("D not strictly below interface".into()));
            }
            match dist_sets(&inc.region, b) {
                Ok(_) => {}
                Err(GeometryError::Overlap { .. }) => out.push(Violation("sets intersect".into())),
                Err(_) => {}
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(z: f64, r: f64) -> Region {
        Region::ball(Point3::new(0.0, 0.0, z), r)
    }

    #[test]
    fn gamma_case_split() {
        let m = Medium::homogeneous().with_inclusion(ball(0.0, 1.0), Gamma::scalar(2.0));
        assert_eq!(m.gamma_at(Point3::new(0.0, 0.0, 3.0)), Gamma::IDENTITY);
        assert_eq!(m.gamma_at(Point3::ORIGIN), Gamma::scalar(2.0));
        let layered = Medium::two_layer(2.0, 1.0);
        assert_eq!(layered.gamma_at(Point3::new(0.0, 0.0, 5.0)), Gamma::scalar(2.0));
        assert_eq!(layered.gamma_at(Point3::new(0.0, 0.0, 0.0)), Gamma::scalar(1.0));
        let with_d = Medium::two_layer(1.0, 4.0).with_inclusion(ball(-3.0, 1.0), Gamma::scalar(8.0));
        assert_eq!(with_d.gamma_at(Point3::new(0.0, 0.0, -3.0)), Gamma::scalar(8.0));
    }

    #[test]
    fn monotonicity_tags() {
        let plus = Medium::homogeneous().with_inclusion(ball(0.0, 1.0), Gamma::scalar(2.0));
        assert_eq!(plus.check_monotonicity(), Ok(Monotonicity::Plus));
        let minus = Medium::two_layer(1.0, 4.0).with_inclusion(ball(-3.0, 1.0), Gamma::scalar(2.0));
        assert_eq!(minus.check_monotonicity(), Ok(Monotonicity::Minus));
        let mixed = Medium::homogeneous().with_inclusion(ball(0.0, 1.0), Gamma([0.5, 2.0, 1.0]));
        assert_eq!(mixed.check_monotonicity(), Ok(Monotonicity::Violation));
        assert_eq!(Medium::homogeneous().check_monotonicity(), Err(MediumError::NoInclusion));
    }

    #[test]
    fn validation_collects_violations() {
        let ok = Medium::homogeneous().with_inclusion(ball(0.0, 1.0), Gamma::scalar(2.0));
        assert!(ok.validate(&ball(3.0, 0.5)).is_ok());
        let errs = ok.validate(&ball(1.2, 0.5)).unwrap_err();
        assert!(errs.iter().any(|v| v.0 == "sets intersect"));
        let layered = Medium::two_layer(1.0, 4.0).with_inclusion(ball(-0.5, 0.5), Gamma::scalar(2.0));
        let errs = layered.validate(&ball(2.0, 0.5)).unwrap_err();
        assert!(errs.iter().any(|v| v.0 == "D not strictly below interface"));
        let bad = Medium::two_layer(1.0, 1.0).with_inclusion(ball(-2.0, 0.5), Gamma([1.0, -1.0, 1.0]));
        let errs = bad.validate(&ball(0.2, 0.5)).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn gamma_deserializes_from_scalar_or_diagonal() {
        let g: Gamma = serde_json::from_str("2.5").unwrap();
        assert_eq!(g, Gamma::scalar(2.5));
        let g: Gamma = serde_json::from_str("[1.0, 2.0, 3.0]").unwrap();
        assert_eq!(g, Gamma([1.0, 2.0, 3.0]));
    }
}
