//! Front end for `shiftlab`: parse a run config, dispatch to the library,
//! and write a JSON report plus optional CSV side files.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shiftlab::constructor::{ConditionRow, WitnessCheck};
use shiftlab::criteria::WitnessReport;
use shiftlab::orbit::{AdjointNorms, LimitPoint};
use shiftlab::*;
use std::result::Result;

pub use config::{Command, ConfigError, RunConfig};

/// Exit status for a rejected config.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for an error raised by the library.
pub const EXIT_MODULE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Module(#[from] shiftlab::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Module(_) => EXIT_MODULE,
        }
    }

    /// Machine-readable error document for stderr.
    pub fn envelope(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            code: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            column: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            error: Body<'a>,
        }
        let body = match self {
            CliError::Config(e) => Body {
                kind: "ConfigError",
                code: "ConfigError",
                message: e.message.clone(),
                line: e.line,
                column: e.column,
                field: e.field.as_deref(),
            },
            CliError::Module(e) => Body {
                kind: "ModuleError",
                code: e.code(),
                message: e.to_string(),
                line: None,
                column: None,
                field: None,
            },
            CliError::Io { .. } => Body {
                kind: "IoError",
                code: "IoError",
                message: self.to_string(),
                line: None,
                column: None,
                field: None,
            },
        };
        serde_json::to_string(&Envelope { error: body }).expect("error envelope serializes")
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum CommandResult {
    Classify(ClassifyResult),
    Construct(Box<ConstructResult>),
    Witness(WitnessReport),
    Orbit(Box<OrbitResult>),
    Cyclic(Box<CyclicityCert>),
    Adjoint(AdjointNorms),
}

#[derive(Debug, Serialize)]
pub struct ClassifyResult {
    pub mode: Mode,
    pub hypercyclic: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supercyclic: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_supercyclic: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_orbit: Option<Verdict>,
}

#[derive(Debug, Serialize)]
pub struct ConstructResult {
    pub witness_check: WitnessCheck,
    pub targets: TargetSet,
    pub certificate: ConstructionCert,
    pub conditions: Vec<ConditionRow>,
}

#[derive(Debug, Serialize)]
pub struct OrbitResult {
    pub trace: OrbitTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_set: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_points: Option<Vec<LimitPoint>>,
}

/// A computed report and its CSV side files.
#[derive(Debug)]
pub struct Outcome {
    pub result: CommandResult,
    pub trace_csv: Option<String>,
    pub plot_csv: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    version: String,
    config: &'a RunConfig,
    result: &'a CommandResult,
}

/// `"shiftlab <version>"`, embedded in every report.
pub fn version_string() -> String {
    format!("shiftlab {}", shiftlab::VERSION)
}

/// The JSON report document for a finished run.
pub fn render_report(cfg: &RunConfig, result: &CommandResult) -> String {
    let report = Report {
        version: version_string(),
        config: cfg,
        result,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

fn vector(v: &VecEntries, mode: Mode) -> Result<SparseVec, CliError> {
    Ok(v.clone().into_vec(mode)?)
}

fn schedule(spec: &config::ScheduleSpec) -> Result<WitnessSchedule, CliError> {
    Ok(match spec {
        config::ScheduleSpec::Arithmetic {
            k0,
            start,
            step,
            count,
            lambda,
        } => WitnessSchedule::arithmetic(*k0, *start, *step, *count, |_| *lambda)?,
        config::ScheduleSpec::Explicit { k0, pairs } => WitnessSchedule::new(*k0, pairs.clone())?,
    })
}

fn targets(spec: &config::TargetSpec) -> Result<TargetSet, CliError> {
    Ok(match spec {
        config::TargetSpec::Dense {
            count,
            max_support,
            max_level,
        } => default_dense_targets(*count, Mode::Bilateral, *max_support, *max_level)?,
        config::TargetSpec::Explicit { vectors } => TargetSet::new(
            vectors
                .iter()
                .map(|v| vector(v, Mode::Bilateral))
                .collect::<Result<_, _>>()?,
        )?,
    })
}

fn classify_csv(w: &WeightSeq, horizon: u64) -> Result<String, CliError> {
    let mut out = String::new();
    match w.mode() {
        Mode::Unilateral => {
            out.push_str("n,omega\n");
            for n in 0..=horizon as i64 {
                writeln!(out, "{n},{:?}", w.weight_at(n)?).unwrap();
            }
        }
        Mode::Bilateral => {
            out.push_str("n,omega_n,omega_neg_n,max,product\n");
            for n in 0..=horizon as i64 {
                let a = w.weight_at(n)?;
                let b = w.weight_at(-n)?;
                writeln!(out, "{n},{a:?},{b:?},{:?},{:?}", a.max(b), a * b).unwrap();
            }
        }
    }
    Ok(out)
}

/// Run the configured command. `plot` requests the plotting CSV.
pub fn execute(cfg: &RunConfig, plot: bool) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let w = &cfg.weight;
    let mode = w.mode();
    let ctx = SpaceCtx::new(w.clone(), cfg.p)?;
    let mut trace_csv = None;
    let mut plot_csv = None;
    let result = match &cfg.command {
        Command::Classify {
            horizon,
            epsilon,
            qmax,
            gamma,
        } => {
            w.validate_horizon(horizon.saturating_add(*qmax))?;
            if plot {
                plot_csv = Some(classify_csv(w, *horizon)?);
            }
            CommandResult::Classify(match mode {
                Mode::Unilateral => ClassifyResult {
                    mode,
                    hypercyclic: check_unilateral_hypercyclic(w, *horizon, *epsilon)?,
                    supercyclic: None,
                    gamma_supercyclic: None,
                    bounded_orbit: Some(bounded_orbit_criterion(w, *horizon)?),
                },
                Mode::Bilateral => ClassifyResult {
                    mode,
                    hypercyclic: check_bilateral_hypercyclic(w, *qmax, *horizon, *epsilon)?,
                    supercyclic: Some(check_bilateral_supercyclic(w, *qmax, *horizon, *epsilon)?),
                    gamma_supercyclic: gamma
                        .as_ref()
                        .map(|g| check_gamma_supercyclic(w, g, *qmax, *horizon, *epsilon))
                        .transpose()?,
                    bounded_orbit: None,
                },
            })
        }
        Command::Construct {
            schedule: s,
            targets: t,
            check_tol,
        } => {
            let ws = schedule(s)?;
            let ys = targets(t)?;
            let witness_check = validate_witnesses(&ws, w, *check_tol)?;
            let certificate = build_supercyclic(w, &ws, &ys, cfg.p)?;
            let conditions = evaluate_conditions(&certificate, w, &ys, cfg.p)?;
            CommandResult::Construct(Box::new(ConstructResult {
                witness_check,
                targets: ys,
                certificate,
                conditions,
            }))
        }
        Command::Witness {
            x,
            y,
            horizon,
            gamma,
            schedule,
        } => CommandResult::Witness(extract_witnesses(
            &vector(x, mode)?,
            &vector(y, mode)?,
            &ctx,
            gamma,
            *horizon,
            schedule,
        )?),
        Command::Orbit {
            x,
            horizon,
            probes,
            ball,
            limit_tol,
        } => {
            let xv = vector(x, mode)?;
            let trace = trace_orbit(&xv, &ctx, *horizon, probes)?;
            let return_set = match ball {
                Some(b) => {
                    let sources = match &b.sources {
                        Some(src) => src.iter().map(|v| vector(v, mode)).collect::<Result<Vec<_>, _>>()?,
                        None => vec![xv.clone()],
                    };
                    let ball = Ball::new(vector(&b.center, mode)?, b.radius)?;
                    Some(shiftlab::return_set(&sources, &ball, &ctx, *horizon)?)
                }
                None => None,
            };
            let limit_points = limit_tol
                .map(|tol| detect_limit_points(&xv, &ctx, *horizon, tol))
                .transpose()?;
            trace_csv = Some(trace.to_csv());
            if plot {
                let mut s = String::from("n,norm\n");
                for step in &trace.steps {
                    writeln!(s, "{},{:?}", step.n, step.norm).unwrap();
                }
                plot_csv = Some(s);
            }
            CommandResult::Orbit(Box::new(OrbitResult {
                trace,
                return_set,
                limit_points,
            }))
        }
        Command::Cyclic {
            x,
            n_max,
            tol,
            budget,
            hypothesis,
        } => {
            let xv = vector(x, mode)?;
            let cert = match hypothesis {
                Some(h) => projective_limit_point_cyclic(
                    &xv,
                    &ctx,
                    &vector(&h.y, mode)?,
                    h.horizon,
                    *n_max,
                    *tol,
                    *budget,
                    &h.schedule,
                )?,
                None => certify_cyclic(&xv, &ctx, *n_max, *tol, *budget)?,
            };
            CommandResult::Cyclic(Box::new(cert))
        }
        Command::Adjoint { n_max } => CommandResult::Adjoint(adjoint_orbit_norms(&ctx, *n_max)?),
    };
    Ok(Outcome {
        result,
        trace_csv,
        plot_csv,
    })
}

/// `<out>` with `suffix` appended to its file name.
pub fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read the config, run it, and write the report. Without `out` the report
/// goes to stdout and side files are not written.
pub fn run(config_path: &Path, out: Option<&Path>, plot: bool) -> Result<String, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| CliError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = RunConfig::from_json(&text)?;
    if plot && !matches!(cfg.command, Command::Classify { .. } | Command::Orbit { .. }) {
        return Err(ConfigError::general("--emit-plot-data applies to classify and orbit only").into());
    }
    if plot && out.is_none() {
        return Err(ConfigError::general("--emit-plot-data requires --out").into());
    }
    let outcome = execute(&cfg, plot)?;
    let report = render_report(&cfg, &outcome.result);
    if let Some(out) = out {
        write(out, &report)?;
        if let Some(csv) = &outcome.trace_csv {
            write(&side_path(out, ".trace.csv"), csv)?;
        }
        if let Some(csv) = &outcome.plot_csv {
            write(&side_path(out, ".plot.csv"), csv)?;
        }
    }
    Ok(report)
}

/// Cap rayon's global pool from `SHIFTLAB_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), ConfigError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::field("SHIFTLAB_THREADS", format!("expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::field("SHIFTLAB_THREADS", e.to_string()))
}
