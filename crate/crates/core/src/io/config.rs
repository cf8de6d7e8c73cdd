//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adversaries::{validate_waypoints, ControllerError, LionController, ScriptedPath};
use crate::engine::{GameConfig, Horizon, DEFAULT_SUBSTEPS};
use crate::geometry::Point2;
use crate::params::{derive_cascade, CascadeOptions, ParamError, StartConfiguration};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("lion {lion}: {source}")]
    Controller {
        lion: usize,
        source: ControllerError,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Standard,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonSpec {
    Time(f64),
    Intervals(u64),
    Steps(u64),
}

impl From<HorizonSpec> for Horizon {
    fn from(h: HorizonSpec) -> Self {
        match h {
            HorizonSpec::Time(t) => Horizon::Time(t),
            HorizonSpec::Intervals(c) => Horizon::Intervals(c),
            HorizonSpec::Steps(c) => Horizon::Steps(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrbitCenter {
    Point([f64; 2]),
    /// `"first_milestone"`: the first milestone level 2 pursues.
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    pub center: OrbitCenter,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    Stationary,
    PurePursuit,
    GoalAmbush {
        #[serde(default)]
        goal_visible: bool,
    },
    Scripted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        waypoints: Option<Vec<[f64; 3]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orbit: Option<OrbitSpec>,
    },
    /// `[t, x, y]` samples; a `trace` file is expanded into samples on load.
    Replay {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<[f64; 3]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trace: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lion: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LionSpec {
    pub start: [f64; 2],
    pub controller: ControllerSpec,
}

/// A run configuration as written on disk, with defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eps: f64,
    pub man_start: [f64; 2],
    pub lions: Vec<LionSpec>,
    pub level: usize,
    pub horizon: HorizonSpec,
    #[serde(default = "default_substeps")]
    pub substep_factor: u64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub delta_override: Option<Vec<f64>>,
    #[serde(default)]
    pub record_levels: Option<Vec<usize>>,
}

fn default_substeps() -> u64 {
    DEFAULT_SUBSTEPS
}

fn point<S: Scalar>(p: [f64; 2]) -> Point2<S> {
    Point2::from_f64(p[0], p[1])
}

fn samples<S: Scalar>(rows: &[[f64; 3]]) -> Vec<(S, Point2<S>)> {
    rows.iter()
        .map(|r| (S::of(r[0]), Point2::from_f64(r[1], r[2])))
        .collect()
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file; replay traces are resolved relative to it.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.resolve_replays(path.parent().unwrap_or(Path::new(".")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_replays(&mut self, base: &Path) -> Result<(), ConfigError> {
        for (i, lion) in self.lions.iter_mut().enumerate() {
            if let ControllerSpec::Replay {
                samples,
                trace: Some(file),
                lion: which,
            } = &mut lion.controller
            {
                let path = base.join(&*file);
                let column = which.unwrap_or(i + 1);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                *samples =
                    Some(crate::io::csv::lion_column(&text, column).map_err(ConfigError::Invalid)?);
                *which = None;
            }
            if let ControllerSpec::Replay { trace, .. } = &mut lion.controller {
                *trace = None;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.lions.is_empty() {
            return bad("at least one lion is required".into());
        }
        for (i, lion) in self.lions.iter().enumerate() {
            if lion.start == self.man_start {
                return bad(format!(
                    "lion {} starts at the man's position {:?}; every lion must start away from the man",
                    i + 1,
                    self.man_start
                ));
            }
            let err = |source| ConfigError::Controller {
                lion: i + 1,
                source,
            };
            match &lion.controller {
                ControllerSpec::Scripted { waypoints, orbit } => match (waypoints, orbit) {
                    (Some(w), None) => validate_waypoints(&samples::<f64>(w)).map_err(err)?,
                    (None, Some(o)) => {
                        if !(o.radius > 0.0) {
                            return Err(err(ControllerError::Radius));
                        }
                        if let OrbitCenter::Named(name) = &o.center {
                            if name != "first_milestone" {
                                return bad(format!(
                                    "lion {}: unknown orbit center {name:?}",
                                    i + 1
                                ));
                            }
                        }
                    }
                    _ => {
                        return bad(format!(
                            "lion {}: scripted needs exactly one of waypoints or orbit",
                            i + 1
                        ))
                    }
                },
                ControllerSpec::Replay {
                    samples: Some(s), ..
                } => validate_waypoints(&samples::<f64>(s)).map_err(err)?,
                ControllerSpec::Replay { samples: None, .. } => {
                    return bad(format!(
                        "lion {}: replay needs samples or a trace file",
                        i + 1
                    ))
                }
                _ => {}
            }
        }
        if self.level < 1 || self.level > self.lions.len() {
            return bad(format!(
                "level {} needs between 1 and {} lions",
                self.level,
                self.lions.len()
            ));
        }
        if self.substep_factor < 1 {
            return bad("substep_factor must be at least 1".into());
        }
        if let HorizonSpec::Time(t) = self.horizon {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!(
                    "horizon time must be finite and non-negative, got {t}"
                ));
            }
        }
        if let Some(levels) = &self.record_levels {
            if let Some(k) = levels.iter().find(|&&k| k < 1 || k > self.level) {
                return bad(format!(
                    "record_levels entry {k} outside 1..={}",
                    self.level
                ));
            }
        }
        Ok(())
    }

    /// Canonical JSON text: defaults explicit, fixed key order, no whitespace.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON, lowercase hex.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn start<S: Scalar>(&self) -> Result<StartConfiguration<S>, ConfigError> {
        Ok(StartConfiguration::new(
            point(self.man_start),
            self.lions.iter().map(|l| point(l.start)).collect(),
            S::of(self.eps),
        )?)
    }

    /// First milestone pursued by level 2: `M_1(sigma_1 / p_2)`.
    fn first_milestone<S: Scalar>(
        &self,
        start: &StartConfiguration<S>,
    ) -> Result<Point2<S>, ConfigError> {
        if start.lion_starts.len() < 2 {
            return Err(ConfigError::Invalid(
                "first_milestone needs at least two lions".into(),
            ));
        }
        let opts = CascadeOptions {
            delta_override: self.delta_override(),
            precision_guard: false,
        };
        let c = derive_cascade(start, 2, &opts)?;
        let p = c.level(2).milestone.expect("level 2").p;
        let heading = (start.man_start - start.lion_starts[0])
            .unit()
            .expect("validated start");
        Ok(start.man_start + heading * (c.level(1).step_len() / S::of_u64(p)))
    }

    fn delta_override<S: Scalar>(&self) -> Option<Vec<S>> {
        self.delta_override
            .as_ref()
            .map(|d| d.iter().map(|&x| S::of(x)).collect())
    }

    /// The engine configuration in scalar type `S`.
    pub fn game<S: Scalar>(&self) -> Result<GameConfig<S>, ConfigError> {
        let start = self.start::<S>()?;
        let mut controllers = Vec::with_capacity(self.lions.len());
        for (i, lion) in self.lions.iter().enumerate() {
            let err = |source| ConfigError::Controller {
                lion: i + 1,
                source,
            };
            let ctrl = match &lion.controller {
                ControllerSpec::Stationary => LionController::Stationary,
                ControllerSpec::PurePursuit => LionController::PurePursuit,
                ControllerSpec::GoalAmbush { goal_visible } => LionController::GoalAmbush {
                    goal_visible: *goal_visible,
                },
                ControllerSpec::Scripted {
                    waypoints: Some(w), ..
                } => LionController::Scripted(ScriptedPath::waypoints(samples(w)).map_err(err)?),
                ControllerSpec::Scripted { orbit: Some(o), .. } => {
                    let center = match &o.center {
                        OrbitCenter::Point(p) => point(*p),
                        OrbitCenter::Named(_) => self.first_milestone(&start)?,
                    };
                    LionController::Scripted(
                        ScriptedPath::orbit(start.lion_starts[i], center, S::of(o.radius))
                            .map_err(err)?,
                    )
                }
                ControllerSpec::Replay {
                    samples: Some(s), ..
                } => LionController::Replay(samples(s)),
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "lion {} controller is incomplete",
                        i + 1
                    )))
                }
            };
            controllers.push(ctrl);
        }
        let mut game = GameConfig::new(start, self.level, controllers, self.horizon.into());
        game.substep_factor = self.substep_factor;
        game.delta_override = self.delta_override();
        game.record_levels = self.record_levels.clone().unwrap_or_default();
        game.config_digest = self.digest();
        Ok(game)
    }
}
