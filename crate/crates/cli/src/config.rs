//! Run configuration: one weighted space and one command.

use serde::{Deserialize, Serialize};
use shiftlab::{DeltaSchedule, GammaSet, Mode, SearchBudget, VecEntries, WeightSeq};

/// Config documents carry this version.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub weight: WeightSeq,
    #[serde(default = "default_p")]
    pub p: f64,
    pub command: Command,
}

fn default_p() -> f64 {
    2.0
}

fn default_qmax() -> u64 {
    4
}

fn default_check_tol() -> f64 {
    1e-3
}

fn default_lambda() -> f64 {
    1.0
}

fn positive_gamma() -> GammaSet {
    GammaSet::positive()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Command {
    /// Finite-horizon verdicts of the weight criteria.
    Classify {
        horizon: u64,
        epsilon: f64,
        #[serde(default = "default_qmax")]
        qmax: u64,
        /// Bilateral only; adds a Γ-supercyclicity verdict.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<GammaSet>,
    },
    /// Inductive construction of an approximate Γ-supercyclic vector.
    Construct {
        schedule: ScheduleSpec,
        targets: TargetSpec,
        /// Tail tolerance of the schedule diagnostic.
        #[serde(default = "default_check_tol")]
        check_tol: f64,
    },
    /// Witness pairs `(n, λ)` along the orbit of `x` approaching `y`.
    Witness {
        x: VecEntries,
        y: VecEntries,
        horizon: u64,
        #[serde(default = "positive_gamma")]
        gamma: GammaSet,
        #[serde(default)]
        schedule: DeltaSchedule,
    },
    /// Orbit trace, optional return set, and limit-point clusters.
    Orbit {
        x: VecEntries,
        horizon: u64,
        #[serde(default)]
        probes: Vec<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ball: Option<BallSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit_tol: Option<f64>,
    },
    /// Cyclic-vector certificate.
    Cyclic {
        x: VecEntries,
        n_max: usize,
        tol: f64,
        #[serde(default)]
        budget: SearchBudget,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hypothesis: Option<HypothesisSpec>,
    },
    /// `‖S*ⁿe_0‖` in the dual space.
    Adjoint { n_max: u64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Construct { .. } => "construct",
            Command::Witness { .. } => "witness",
            Command::Orbit { .. } => "orbit",
            Command::Cyclic { .. } => "cyclic",
            Command::Adjoint { .. } => "adjoint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// `n_k = start + step·k` for `k < count`, constant modulus.
    Arithmetic {
        #[serde(default)]
        k0: i64,
        start: u64,
        step: u64,
        count: usize,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Explicit { k0: i64, pairs: Vec<(u64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    /// The first `count` vectors of the dyadic enumeration.
    Dense { count: usize, max_support: u64, max_level: u32 },
    Explicit { vectors: Vec<VecEntries> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: VecEntries,
    pub radius: f64,
    /// The set `A`; defaults to `{x}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<VecEntries>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    pub y: VecEntries,
    pub horizon: u64,
    #[serde(default)]
    pub schedule: DeltaSchedule,
}

/// A rejected configuration, with a position or a field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            message: message.into(),
            line: None,
            column: None,
            field: Some(field.to_string()),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        ConfigError {
            message: message.into(),
            line: None,
            column: None,
            field: None,
        }
    }
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        let line = (e.line() > 0).then(|| e.line());
        let column = (e.column() > 0).then(|| e.column());
        ConfigError {
            message: e.to_string(),
            line,
            column,
            field: None,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("must be a positive finite number, got {v}")))
    }
}

fn entries(field: &str, v: &VecEntries, mode: Mode) -> Result<(), ConfigError> {
    v.clone()
        .into_vec(mode)
        .map(|_| ())
        .map_err(|e| ConfigError::field(field, e.to_string()))
}

fn nonzero(field: &str, v: &VecEntries) -> Result<(), ConfigError> {
    if v.0.iter().any(|(_, c)| c.norm() > 0.0) {
        Ok(())
    } else {
        Err(ConfigError::field(field, "vector must be non-zero"))
    }
}

fn require_mode(field: &str, found: Mode, want: Mode) -> Result<(), ConfigError> {
    if found == want {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("requires a {want} weight, got {found}")))
    }
}

impl RunConfig {
    /// Parse and validate a config document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::field(
                "version",
                format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(ConfigError::field("p", format!("must satisfy 1 <= p < inf, got {}", self.p)));
        }
        let mode = self.weight.mode();
        match &self.command {
            Command::Classify { epsilon, gamma, .. } => {
                positive("command.epsilon", *epsilon)?;
                if gamma.is_some() {
                    require_mode("command.gamma", mode, Mode::Bilateral)?;
                }
            }
            Command::Construct { schedule, targets, check_tol } => {
                require_mode("command", mode, Mode::Bilateral)?;
                positive("command.check_tol", *check_tol)?;
                if let ScheduleSpec::Arithmetic { start, step, count, lambda, .. } = schedule {
                    positive("command.schedule.lambda", *lambda)?;
                    if *start == 0 || *step == 0 || *count == 0 {
                        return Err(ConfigError::field(
                            "command.schedule",
                            "start, step and count must be positive",
                        ));
                    }
                    if count.checked_mul(*step as usize).and_then(|v| v.checked_add(*start as usize)).is_none() {
                        return Err(ConfigError::field("command.schedule", "schedule overflows"));
                    }
                }
                if let TargetSpec::Explicit { vectors } = targets {
                    if vectors.is_empty() {
                        return Err(ConfigError::field("command.targets.vectors", "no targets"));
                    }
                    for (i, v) in vectors.iter().enumerate() {
                        let f = format!("command.targets.vectors[{i}]");
                        entries(&f, v, Mode::Bilateral)?;
                        nonzero(&f, v)?;
                    }
                }
            }
            Command::Witness { x, y, .. } => {
                entries("command.x", x, mode)?;
                entries("command.y", y, mode)?;
                nonzero("command.y", y)?;
            }
            Command::Orbit { x, ball, limit_tol, .. } => {
                entries("command.x", x, mode)?;
                if let Some(b) = ball {
                    entries("command.ball.center", &b.center, mode)?;
                    positive("command.ball.radius", b.radius)?;
                    if let Some(src) = &b.sources {
                        if src.is_empty() {
                            return Err(ConfigError::field("command.ball.sources", "must be non-empty"));
                        }
                        for (i, v) in src.iter().enumerate() {
                            entries(&format!("command.ball.sources[{i}]"), v, mode)?;
                        }
                    }
                }
                if let Some(t) = limit_tol {
                    positive("command.limit_tol", *t)?;
                }
            }
            Command::Cyclic { x, tol, hypothesis, .. } => {
                require_mode("command", mode, Mode::Unilateral)?;
                entries("command.x", x, mode)?;
                nonzero("command.x", x)?;
                positive("command.tol", *tol)?;
                if let Some(h) = hypothesis {
                    entries("command.hypothesis.y", &h.y, mode)?;
                    nonzero("command.hypothesis.y", &h.y)?;
                }
            }
            Command::Adjoint { .. } => {
                require_mode("command", mode, Mode::Unilateral)?;
                if self.p <= 1.0 {
                    return Err(ConfigError::field("p", "adjoint requires p > 1"));
                }
            }
        }
        Ok(())
    }
}
