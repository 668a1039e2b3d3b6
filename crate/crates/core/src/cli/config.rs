use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::forward::{GridSpec, SourceSpec};
use crate::geometry::{fibonacci_directions, Point3, Region};
use crate::indicator::{FitOptions, PipelineOptions, TailMethod};
use crate::medium::{Background, Inclusion, Medium};

/// One experiment as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub background: Background,
    #[serde(default)]
    pub inclusion: Option<Inclusion>,
    pub source: SourceSpec,
    pub grid: GridConfig,
    #[serde(default)]
    pub tau: TauGrid,
    #[serde(default)]
    pub indicator: IndicatorConfig,
    #[serde(default)]
    pub survey: Option<SurveyConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub t_final: f64,
    /// Explicit time step; defaults to the CFL limit times the safety factor.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Explicit node box; defaults to causality padding around `B ∪ D`.
    #[serde(default)]
    pub origin: Option<Point3>,
    #[serde(default)]
    pub extent: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self { min: 2.0, max: 16.0, count: 16 }
    }
}

impl TauGrid {
    /// Log-spaced points from `min` to `max`.
    pub fn values(&self) -> Vec<f64> {
        crate::indicator::log_tau_grid(self.min, self.max, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VariantFlags {
    Standard,
    Tilde,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    #[serde(default)]
    pub variant: VariantFlags,
    #[serde(default)]
    pub tail: TailMethod,
    #[serde(default)]
    pub fit: FitOptions,
}

/// Probe balls; each reuses the source amplitude and sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurveyConfig {
    List { probes: Vec<ProbeBall> },
    /// The 26 neighbour directions of a cube, scaled to `distance`.
    Cube26 { center: Point3, distance: f64, radius: f64 },
    Fibonacci { center: Point3, distance: f64, radius: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBall {
    pub center: Point3,
    pub radius: f64,
}

impl SurveyConfig {
    pub fn probe_balls(&self) -> Vec<ProbeBall> {
        match self {
            SurveyConfig::List { probes } => probes.clone(),
            SurveyConfig::Cube26 { center, distance, radius } => cube26_directions()
                .into_iter()
                .map(|d| ProbeBall { center: *center + d * *distance, radius: *radius })
                .collect(),
            SurveyConfig::Fibonacci { center, distance, radius, count } => fibonacci_directions(*count)
                .into_iter()
                .map(|d| ProbeBall { center: *center + d * *distance, radius: *radius })
                .collect(),
        }
    }
}

/// Unit vectors towards the 26 neighbours of a cube cell.
pub fn cube26_directions() -> Vec<Point3> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) != (0, 0, 0) {
                    let p = Point3::new(i as f64, j as f64, k as f64);
                    out.push(p * (1.0 / p.norm()));
                }
            }
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text).map_err(|message| ConfigError::Parse { path: path.into(), message })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn medium(&self) -> Medium {
        Medium { background: self.background, inclusion: self.inclusion.clone() }
    }

    /// sha256 of the canonical JSON form; recorded in every output.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// The grid the forward solver runs on: the explicit box and dt when
    /// given, causality padding and the CFL-safe step otherwise.
    pub fn grid_spec(&self) -> GridSpec {
        let medium = self.medium();
        let mut g = GridSpec::padded(&medium, &self.source.region, self.grid.h, self.grid.t_final);
        if let (Some(origin), Some(extent)) = (self.grid.origin, self.grid.extent) {
            g.origin = origin;
            g.extent = extent;
        }
        if let Some(dt) = self.grid.dt {
            g.steps = (self.grid.t_final / dt).round().max(1.0) as usize;
            g.dt = dt;
        }
        g
    }

    pub fn explicit_grid(&self) -> bool {
        self.grid.dt.is_some() || (self.grid.origin.is_some() && self.grid.extent.is_some())
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            h: self.grid.h,
            t_final: self.grid.t_final,
            taus: self.tau.values(),
            tail: self.indicator.tail,
            fit: self.indicator.fit,
            config_hash: self.hash(),
            grid: self.explicit_grid().then(|| self.grid_spec()),
        }
    }

    pub fn probe_sources(&self) -> Vec<SourceSpec> {
        let Some(survey) = &self.survey else { return vec![self.source.clone()] };
        survey
            .probe_balls()
            .into_iter()
            .map(|p| SourceSpec { region: Region::ball(p.center, p.radius), ..self.source.clone() })
            .collect()
    }
}
