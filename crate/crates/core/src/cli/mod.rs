//! Command-line front end: configuration, units, and table output.
//!
//! Every subcommand resolves its settings (see [`config`] for precedence),
//! validates them into a [`Job`] before any computation, runs the job and
//! writes a [`Table`] as CSV or JSON.
//!
//! Exit codes: 0 success, 2 configuration error (including unknown commands
//! and unparseable values), 3 precondition violation, 4 I/O failure,
//! 5 numeric failure.

pub mod config;
pub mod table;
pub mod units;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use thiserror::Error as ThisError;

use crate::diagnostics::{
    classify_regime, default_epsilon_grid, default_phi_grid, default_tau_ladder, linear_grid,
    ordering_difference_surface, stepped_grid, GaussianStudy,
};
use crate::error::Error;
use crate::ode::{evolve, IntegratorConfig};
use crate::perturbation::dyson_second_order;
use crate::propagators::{kick_sequence, nto_propagator, KickSpec};
use crate::pulses::{Pulse, Representation, Schedule};
use crate::su2::{Matrix2, PauliAxis, StateVector};

pub use config::{ConfigFile, Settings};
pub use table::{Cell, Table};
pub use units::{preset_2s2p, Preset2s2p, UnitTag, HBAR_EV_PS};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TIMEORDER_WORKERS";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    SweepSurface,
    CompareNto,
    MapClassify,
    Pert2,
    KickLimit,
    ObsTime,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::SweepSurface => "sweep-surface",
            Command::CompareNto => "compare-nto",
            Command::MapClassify => "map-classify",
            Command::Pert2 => "pert2",
            Command::KickLimit => "kick-limit",
            Command::ObsTime => "obs-time",
        }
    }

    fn keys(self) -> Vec<&'static str> {
        const COMMON: &[&str] = &["output", "format", "workers"];
        const SCHEDULE: &[&str] = &[
            "preset", "units", "delta_e", "t0", "tf", "pulse", "alpha", "tau", "t_k",
        ];
        const STUDY: &[&str] = &["preset", "units", "delta_e", "alpha", "t_k", "t0"];
        let own: &[&str] = match self {
            Command::Evolve => &["representation", "dt", "record_every"],
            Command::CompareNto => &["dt"],
            Command::Pert2 => &[],
            Command::SweepSurface => &[
                "eps_min", "eps_max", "eps_step", "phi_min", "phi_max", "phi_step",
            ],
            Command::MapClassify => &["half_split_phase", "strength_phase"],
            Command::KickLimit => &["tf", "taus"],
            Command::ObsTime => &["tau", "tf_min", "tf_max", "tf_count"],
        };
        let base = match self {
            Command::Evolve | Command::CompareNto | Command::Pert2 => SCHEDULE,
            Command::KickLimit | Command::ObsTime => STUDY,
            Command::SweepSurface | Command::MapClassify => &[],
        };
        COMMON.iter().chain(base).chain(own).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A command with its resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub settings: Settings,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Resolves the configuration file and flags for `command`.
    pub fn resolve(
        command: Command,
        file: Option<&ConfigFile>,
        flags: &[(String, String)],
    ) -> Result<Self, CliError> {
        let settings = Settings::resolve(command.name(), file, flags)?;
        settings.restrict(command.name(), &command.keys())?;
        let format = match settings.str("format") {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown format `{other}` (csv or json)"
                )))
            }
        };
        let output = settings
            .str("output")
            .filter(|p| *p != "-")
            .map(PathBuf::from);
        let workers = match settings.usize("workers")? {
            Some(0) => return Err(CliError::Config("workers must be at least 1".into())),
            w => w,
        };
        Ok(Self {
            command,
            settings,
            output,
            format,
            workers,
        })
    }
}

/// Validated work for one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Evolve {
        schedule: Schedule,
        integrator: IntegratorConfig,
    },
    SweepSurface {
        eps: Vec<f64>,
        phi: Vec<f64>,
    },
    CompareNto {
        schedule: Schedule,
        dt: Option<f64>,
    },
    MapClassify {
        half_split: Vec<f64>,
        strength: Vec<f64>,
    },
    Pert2 {
        schedule: Schedule,
    },
    KickLimit {
        study: GaussianStudy,
        taus: Vec<f64>,
        tf: f64,
    },
    ObsTime {
        study: GaussianStudy,
        tau: f64,
        tf_grid: Vec<f64>,
    },
}

/// Parses `kind key=value ...`, e.g. `gaussian alpha=1 t=150 tau=9.46 axis=x`.
/// Kinds: `kick`, `gaussian`, `rect`. `t` is the kick time, Gaussian center
/// or rectangle start; `axis` defaults to `x`.
pub fn parse_pulse(spec: &str) -> Result<Pulse, CliError> {
    let bad = |msg: String| CliError::Config(format!("pulse `{spec}`: {msg}"));
    let mut tokens = spec
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty());
    let kind = tokens
        .next()
        .ok_or_else(|| bad("empty".into()))?
        .to_ascii_lowercase();
    let (mut alpha, mut t, mut tau, mut axis) = (None, None, None, PauliAxis::X);
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{tok}`")))?;
        match k {
            "alpha" => alpha = Some(config::parse_f64("alpha", v)?),
            "t" | "t_k" | "t_start" => t = Some(config::parse_f64("t", v)?),
            "tau" => tau = Some(config::parse_f64("tau", v)?),
            "axis" => {
                axis = match v.to_ascii_lowercase().as_str() {
                    "x" => PauliAxis::X,
                    "y" => PauliAxis::Y,
                    "z" => PauliAxis::Z,
                    _ => return Err(bad(format!("unknown axis `{v}`"))),
                }
            }
            _ => return Err(bad(format!("unknown key `{k}`"))),
        }
    }
    let alpha = alpha.ok_or_else(|| bad("missing alpha".into()))?;
    let t = t.ok_or_else(|| bad("missing t".into()))?;
    let need_tau = || tau.ok_or_else(|| bad("missing tau".into()));
    match kind.as_str() {
        "kick" | "delta" => {
            if tau.is_some() {
                return Err(bad("kicks take no tau".into()));
            }
            Ok(Pulse::DeltaKick {
                alpha,
                t_k: t,
                axis,
            })
        }
        "gaussian" | "gauss" => Ok(Pulse::Gaussian {
            alpha,
            t_k: t,
            tau: need_tau()?,
            axis,
        }),
        "rect" | "rectangular" => Ok(Pulse::Rectangular {
            alpha,
            t_start: t,
            tau: need_tau()?,
            axis,
        }),
        _ => Err(bad(format!("unknown kind `{kind}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PresetKind {
    Gaussian,
    NoPulse,
}

fn preset_kind(s: &Settings) -> Result<Option<PresetKind>, CliError> {
    let kind = match s.str("preset") {
        None => return Ok(None),
        Some("2s2p" | "2s-2p") => PresetKind::Gaussian,
        Some("2s2p-free" | "2s-2p-free") => PresetKind::NoPulse,
        Some(other) => return Err(CliError::Config(format!("unknown preset `{other}`"))),
    };
    for key in ["delta_e", "pulse"] {
        if s.contains(key) {
            return Err(CliError::Config(format!("`{key}` conflicts with `preset`")));
        }
    }
    if units(s)? == Some(UnitTag::Dimensionless) {
        return Err(CliError::Config(
            "`preset` uses eV and ps; `units = dimensionless` conflicts".into(),
        ));
    }
    if kind == PresetKind::NoPulse && (s.contains("alpha") || s.contains("tau")) {
        return Err(CliError::Config(
            "the pulse-free preset takes no alpha or tau".into(),
        ));
    }
    Ok(Some(kind))
}

fn units(s: &Settings) -> Result<Option<UnitTag>, CliError> {
    s.str("units")
        .map(|u| UnitTag::parse(u).ok_or_else(|| CliError::Config(format!("unknown units `{u}`"))))
        .transpose()
}

fn require(s: &Settings, key: &str) -> Result<f64, CliError> {
    s.f64(key)?
        .ok_or_else(|| CliError::Config(format!("missing `{key}`")))
}

fn preset_params(s: &Settings) -> Result<Preset2s2p, CliError> {
    let mut p = Preset2s2p::default();
    if let Some(a) = s.f64("alpha")? {
        p.alpha = a;
    }
    if let Some(tau) = s.f64("tau")? {
        p.tau = tau;
    }
    if let Some(t_k) = s.f64("t_k")? {
        p.t_k = t_k;
        p.tf = t_k + 3.0 * units::rabi_time_2s2p();
    }
    if let Some(t0) = s.f64("t0")? {
        p.t0 = t0;
    }
    if let Some(tf) = s.f64("tf")? {
        p.tf = tf;
    }
    Ok(p)
}

fn build_schedule(s: &Settings) -> Result<Schedule, CliError> {
    if let Some(kind) = preset_kind(s)? {
        let p = preset_params(s)?;
        let sched = p.schedule()?;
        return Ok(match kind {
            PresetKind::Gaussian => sched,
            PresetKind::NoPulse => sched.with_pulses(Vec::new())?,
        });
    }
    for key in ["alpha", "tau", "t_k"] {
        if s.contains(key) {
            return Err(CliError::Config(format!(
                "`{key}` needs `preset`; describe pulses with `pulse`"
            )));
        }
    }
    let unit = units(s)?.unwrap_or(UnitTag::Dimensionless);
    let delta_e = unit.energy_to_internal(require(s, "delta_e")?);
    let pulses = s
        .all("pulse")
        .iter()
        .map(|p| parse_pulse(p))
        .collect::<Result<Vec<_>, _>>()?;
    let t0 = s.f64("t0")?.unwrap_or(0.0);
    let tf = require(s, "tf")?;
    Ok(Schedule::new(delta_e, pulses, t0, tf)?)
}

fn build_study(s: &Settings) -> Result<GaussianStudy, CliError> {
    match preset_kind(s)? {
        Some(PresetKind::NoPulse) => Err(CliError::Config(
            "width scans need a pulse; use preset = 2s2p".into(),
        )),
        Some(PresetKind::Gaussian) => {
            let p = preset_params(s)?;
            Ok(GaussianStudy {
                delta_e: units::delta_e_2s2p(),
                alpha: p.alpha,
                t_k: p.t_k,
                t0: p.t0,
            })
        }
        None => {
            let unit = units(s)?.unwrap_or(UnitTag::Dimensionless);
            Ok(GaussianStudy {
                delta_e: unit.energy_to_internal(require(s, "delta_e")?),
                alpha: require(s, "alpha")?,
                t_k: require(s, "t_k")?,
                t0: s.f64("t0")?.unwrap_or(0.0),
            })
        }
    }
}

fn check_positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Precondition(format!(
            "`{key}` must be positive, got {v}"
        )))
    }
}

fn grid(s: &Settings, prefix: &str, default: fn() -> Vec<f64>) -> Result<Vec<f64>, CliError> {
    let keys = [
        format!("{prefix}_min"),
        format!("{prefix}_max"),
        format!("{prefix}_step"),
    ];
    if keys.iter().all(|k| !s.contains(k)) {
        return Ok(default());
    }
    let d = default();
    let min = s.f64(&keys[0])?.unwrap_or(d[0]);
    let max = s
        .f64(&keys[1])?
        .unwrap_or(*d.last().expect("default grids are non-empty"));
    let step = s.f64(&keys[2])?.unwrap_or(d[1] - d[0]);
    Ok(stepped_grid(min, max, step)?)
}

/// Turns settings into a validated [`Job`] without running anything heavy.
pub fn prepare(cfg: &RunConfig) -> Result<Job, CliError> {
    let s = &cfg.settings;
    Ok(match cfg.command {
        Command::Evolve => {
            let schedule = build_schedule(s)?;
            let representation = match s.str("representation") {
                None | Some("interaction") => Representation::Interaction,
                Some("schrodinger" | "schroedinger") => Representation::Schrodinger,
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "unknown representation `{other}`"
                    )))
                }
            };
            let mut integrator = IntegratorConfig::default_for(&schedule, representation);
            if let Some(dt) = s.f64("dt")? {
                integrator.dt = check_positive("dt", dt)?;
            }
            if let Some(n) = s.usize("record_every")? {
                if n == 0 {
                    return Err(CliError::Precondition(
                        "`record_every` must be at least 1".into(),
                    ));
                }
                integrator.record_every = n;
            }
            Job::Evolve {
                schedule,
                integrator,
            }
        }
        Command::CompareNto => {
            let schedule = build_schedule(s)?;
            if schedule.has_kicks() && schedule.has_smooth_pulses() {
                return Err(CliError::Precondition(
                    "compare-nto needs all-kick or all-smooth schedules".into(),
                ));
            }
            let dt = s
                .f64("dt")?
                .map(|dt| check_positive("dt", dt))
                .transpose()?;
            Job::CompareNto { schedule, dt }
        }
        Command::Pert2 => Job::Pert2 {
            schedule: build_schedule(s)?,
        },
        Command::SweepSurface => {
            let eps = grid(s, "eps", default_epsilon_grid)?;
            let phi = grid(s, "phi", default_phi_grid)?;
            if let Some(e) = eps.iter().find(|e| e.abs() > 1.0) {
                return Err(CliError::Precondition(format!(
                    "epsilon grid leaves [-1, 1] at {e}"
                )));
            }
            Job::SweepSurface { eps, phi }
        }
        Command::MapClassify => {
            let default = vec![0.1, 1.0, 10.0, 100.0];
            let half_split = s
                .f64_list("half_split_phase")?
                .unwrap_or_else(|| default.clone());
            let strength = s.f64_list("strength_phase")?.unwrap_or(default);
            if let Some(v) = half_split
                .iter()
                .chain(&strength)
                .find(|v| v.is_nan() || **v < 0.0)
            {
                return Err(CliError::Precondition(format!(
                    "map phases must be non-negative, got {v}"
                )));
            }
            Job::MapClassify {
                half_split,
                strength,
            }
        }
        Command::KickLimit => {
            let study = build_study(s)?;
            let period = study.rabi_period();
            let taus = match (s.f64_list("taus")?, period) {
                (Some(t), _) => t,
                (None, Some(t)) => default_tau_ladder(t),
                (None, None) => {
                    return Err(CliError::Config(
                        "missing `taus` (no Rabi period to derive them)".into(),
                    ))
                }
            };
            let tf = match (s.f64("tf")?, period) {
                (Some(tf), _) => tf,
                (None, Some(t)) => study.t_k + 3.0 * t,
                (None, None) => return Err(CliError::Config("missing `tf`".into())),
            };
            if taus.iter().any(|t| t.is_nan() || *t <= 0.0) || taus.windows(2).any(|w| w[1] >= w[0])
            {
                return Err(CliError::Precondition(
                    "`taus` must be positive and strictly descending".into(),
                ));
            }
            for &tau in &taus {
                study.schedule(tau, tf)?;
            }
            Job::KickLimit { study, taus, tf }
        }
        Command::ObsTime => {
            let study = build_study(s)?;
            let period = study.rabi_period();
            let tau = match (s.f64("tau")?, preset_kind(s)?, period) {
                (Some(t), ..) => t,
                (None, Some(_), Some(p)) => p / 100.0,
                _ => return Err(CliError::Config("missing `tau`".into())),
            };
            let tf_min = s.f64("tf_min")?.unwrap_or(study.t_k);
            let tf_max = match (s.f64("tf_max")?, period) {
                (Some(t), _) => t,
                (None, Some(p)) => study.t_k + 3.0 * p,
                (None, None) => return Err(CliError::Config("missing `tf_max`".into())),
            };
            let count = s.usize("tf_count")?.unwrap_or(301);
            if tf_min < study.t_k {
                return Err(CliError::Precondition(format!(
                    "observation times must not precede the pulse center {}",
                    study.t_k
                )));
            }
            let tf_grid = linear_grid(tf_min, tf_max, count)?;
            study.schedule(tau, tf_max)?;
            Job::ObsTime {
                study,
                tau,
                tf_grid,
            }
        }
    })
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn schedule_warnings(s: &Schedule) -> Vec<String> {
    s.support_warnings()
}

fn ordered_p2(schedule: &Schedule, dt: Option<f64>) -> Result<(f64, Vec<String>), CliError> {
    if schedule.has_smooth_pulses() {
        let mut cfg = IntegratorConfig::default_for(schedule, Representation::Interaction);
        if let Some(dt) = dt {
            cfg.dt = dt;
        }
        cfg.record_every = usize::MAX;
        let warnings = cfg.resolution_warnings(schedule);
        Ok((
            evolve(schedule, &cfg, &StateVector::ground())?.final_p2(),
            warnings,
        ))
    } else {
        let kicks = schedule
            .pulses()
            .iter()
            .filter(|p| (schedule.t0()..=schedule.tf()).contains(&p.anchor_time()))
            .map(|p| KickSpec::new(p.alpha(), p.anchor_time(), p.axis()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((
            kick_sequence(schedule.delta_e(), &kicks)?.m21.norm_sqr(),
            Vec::new(),
        ))
    }
}

fn matrix_json(m: &Matrix2) -> Value {
    let z = |i, j| {
        let v = m.get(i, j);
        json!([v.re, v.im])
    };
    json!([[z(0, 0), z(0, 1)], [z(1, 0), z(1, 1)]])
}

/// Runs a validated job.
pub fn execute(job: &Job) -> Result<Table, CliError> {
    let table = match job {
        Job::Evolve {
            schedule,
            integrator,
        } => {
            let tr = evolve(schedule, integrator, &StateVector::ground())?;
            let mut t = Table::new("evolve", &["t", "p1", "p2"]);
            t.warnings = schedule_warnings(schedule);
            t.warnings.extend(integrator.resolution_warnings(schedule));
            for (time, st) in tr.times.iter().zip(&tr.states) {
                let (p1, p2) = crate::su2::probabilities(st);
                t.push(vec![num(*time), num(p1), num(p2)]);
            }
            t.config.push(("step".into(), format!("{}", integrator.dt)));
            t.config
                .push(("norm_drift".into(), format!("{}", tr.norm_drift())));
            t
        }
        Job::SweepSurface { eps, phi } => {
            let mut t = Table::new(
                "sweep-surface",
                &["epsilon", "phi", "p2_ordered", "p2_nto", "difference"],
            );
            for p in ordering_difference_surface(eps, phi)? {
                t.push(vec![
                    num(p.epsilon),
                    num(p.phi),
                    num(p.p2_ordered),
                    num(p.p2_nto),
                    num(p.difference),
                ]);
            }
            t
        }
        Job::CompareNto { schedule, dt } => {
            let (ordered, warnings) = ordered_p2(schedule, *dt)?;
            let mut t = Table::new(
                "compare-nto",
                &["representation", "p2_ordered", "p2_nto", "difference"],
            );
            t.warnings = schedule_warnings(schedule);
            t.warnings.extend(warnings);
            for rep in [Representation::Interaction, Representation::Schrodinger] {
                let nto = nto_propagator(schedule, rep)?.m21.norm_sqr();
                t.push(vec![
                    Cell::from(rep.name()),
                    num(ordered),
                    num(nto),
                    num(ordered - nto),
                ]);
            }
            t
        }
        Job::MapClassify {
            half_split,
            strength,
        } => {
            let mut t = Table::new(
                "map-classify",
                &["half_split_phase", "strength_phase", "regime"],
            );
            for &h in half_split {
                for &v in strength {
                    t.push(vec![
                        num(h),
                        num(v),
                        Cell::from(classify_regime(h, v)?.name()),
                    ]);
                }
            }
            t
        }
        Job::Pert2 { schedule } => {
            let b = dyson_second_order(schedule)?;
            let mut t = Table::new("pert2", &["term", "row", "col", "re", "im"]);
            t.warnings = schedule_warnings(schedule);
            let terms = [
                ("zeroth", b.zeroth),
                ("first", b.first),
                ("second_ordered", b.second_ordered),
                ("second_nto", b.second_nto),
                ("commutator_correction", b.commutator_correction),
            ];
            let mut breakdown = Map::new();
            for (name, m) in &terms {
                for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let z = m.get(i, j);
                    t.push(vec![
                        Cell::from(*name),
                        Cell::from(i + 1),
                        Cell::from(j + 1),
                        num(z.re),
                        num(z.im),
                    ]);
                }
                breakdown.insert((*name).into(), matrix_json(m));
            }
            t.config.push((
                "identity_residual".into(),
                format!("{}", b.identity_residual()),
            ));
            t.extra.insert("breakdown".into(), Value::Object(breakdown));
            t
        }
        Job::KickLimit { study, taus, tf } => {
            let mut t = Table::new(
                "kick-limit",
                &[
                    "tau",
                    "p2_rk4_ordered",
                    "p2_nto_interaction",
                    "p2_nto_schrodinger",
                ],
            );
            for r in study.kick_limit_scan(taus, *tf)? {
                t.push(vec![
                    num(r.tau),
                    num(r.p2_rk4_ordered),
                    num(r.p2_nto_interaction),
                    num(r.p2_nto_schrodinger),
                ]);
            }
            t
        }
        Job::ObsTime {
            study,
            tau,
            tf_grid,
        } => {
            let mut t = Table::new(
                "obs-time",
                &[
                    "tf",
                    "p2_ordered",
                    "p2_nto_schrodinger",
                    "p2_nto_interaction",
                ],
            );
            if let Some(&last) = tf_grid.last() {
                t.warnings = schedule_warnings(&study.schedule(*tau, last)?);
            }
            for r in study.observation_time_scan(*tau, tf_grid)? {
                t.push(vec![
                    num(r.tf),
                    num(r.p2_ordered),
                    num(r.p2_nto_schrodinger),
                    num(r.p2_nto_interaction),
                ]);
            }
            t
        }
    };
    if table
        .rows
        .iter()
        .flatten()
        .any(|c| matches!(c, Cell::Num(x) if x.is_nan()))
    {
        return Err(CliError::Numeric("result contains NaN".into()));
    }
    Ok(table)
}

/// Prepares, runs and renders `cfg`, returning the artifact text.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let job = prepare(cfg)?;
    let workers = match cfg.workers {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|n| *n > 0)
                    .ok_or_else(|| {
                        CliError::Config(format!(
                            "{WORKERS_ENV} must be a positive integer, got `{v}`"
                        ))
                    })?,
            ),
            Err(_) => None,
        },
    };
    let mut table = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?
            .install(|| execute(&job))?,
        None => execute(&job)?,
    };
    let mut provenance: Vec<(String, String)> = cfg
        .settings
        .entries()
        .filter(|(k, ..)| !matches!(*k, "output" | "workers"))
        .map(|(k, v, _)| (k.to_string(), v.to_string()))
        .collect();
    provenance.append(&mut table.config);
    table.config = provenance;
    Ok(match cfg.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    })
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Flags shared by every subcommand. Values are kept as text and validated
/// with the configuration file entries.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Configuration file of `key = value` lines with `[command]` sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra setting, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file; standard output when absent or `-`.
    #[arg(long, short)]
    pub output: Option<String>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads for grid evaluations.
    #[arg(long, allow_hyphen_values = true)]
    pub workers: Option<String>,
    /// `2s2p` or `2s2p-free` (no pulse).
    #[arg(long)]
    pub preset: Option<String>,
    /// `dimensionless` or `ev-ps`.
    #[arg(long)]
    pub units: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_e: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tf: Option<String>,
    /// Pulse such as `gaussian alpha=1 t=0 tau=2 axis=x`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub pulse: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_k: Option<String>,
    /// `interaction` or `schrodinger`.
    #[arg(long)]
    pub representation: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub record_every: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_step: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_step: Option<String>,
    /// Comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub half_split_phase: Option<String>,
    /// Comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub strength_phase: Option<String>,
    /// Comma-separated descending widths.
    #[arg(long, allow_hyphen_values = true)]
    pub taus: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tf_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tf_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tf_count: Option<String>,
}

impl Opts {
    fn flags(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            out.push((config::normalize_key(k), v.trim().to_string()));
        }
        let named = [
            ("output", &self.output),
            ("format", &self.format),
            ("workers", &self.workers),
            ("preset", &self.preset),
            ("units", &self.units),
            ("delta_e", &self.delta_e),
            ("t0", &self.t0),
            ("tf", &self.tf),
            ("alpha", &self.alpha),
            ("tau", &self.tau),
            ("t_k", &self.t_k),
            ("representation", &self.representation),
            ("dt", &self.dt),
            ("record_every", &self.record_every),
            ("eps_min", &self.eps_min),
            ("eps_max", &self.eps_max),
            ("eps_step", &self.eps_step),
            ("phi_min", &self.phi_min),
            ("phi_max", &self.phi_max),
            ("phi_step", &self.phi_step),
            ("half_split_phase", &self.half_split_phase),
            ("strength_phase", &self.strength_phase),
            ("taus", &self.taus),
            ("tf_min", &self.tf_min),
            ("tf_max", &self.tf_max),
            ("tf_count", &self.tf_count),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        for p in &self.pulse {
            out.push(("pulse".into(), p.clone()));
        }
        Ok(out)
    }
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// RK4 trajectory (t, p1, p2) from the ground state.
    Evolve(Opts),
    /// Kick-pair ordering difference over an (epsilon, phi) grid.
    SweepSurface(Opts),
    /// Final P2 with and without time ordering in both pictures.
    CompareNto(Opts),
    /// Qubit-map regime of (dE tau / 2, int V dt) pairs.
    MapClassify(Opts),
    /// Second-order Dyson breakdown.
    Pert2(Opts),
    /// Final P2 against Gaussian width.
    KickLimit(Opts),
    /// P2 against observation time for one width.
    ObsTime(Opts),
}

#[derive(Debug, Parser)]
#[command(
    name = "timeorder",
    version,
    about = "Time-ordering effects in pulsed two-state systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

fn split(sub: Sub) -> (Command, Opts) {
    match sub {
        Sub::Evolve(o) => (Command::Evolve, o),
        Sub::SweepSurface(o) => (Command::SweepSurface, o),
        Sub::CompareNto(o) => (Command::CompareNto, o),
        Sub::MapClassify(o) => (Command::MapClassify, o),
        Sub::Pert2(o) => (Command::Pert2, o),
        Sub::KickLimit(o) => (Command::KickLimit, o),
        Sub::ObsTime(o) => (Command::ObsTime, o),
    }
}

/// Builds the [`RunConfig`] for a subcommand and its flags.
pub fn config_from_opts(command: Command, opts: &Opts) -> Result<RunConfig, CliError> {
    let file = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Some(ConfigFile::parse(&text)?)
        }
        None => None,
    };
    RunConfig::resolve(command, file.as_ref(), &opts.flags()?)
}

/// Full program: parse arguments, run, write output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, opts) = split(cli.command);
    let result = config_from_opts(command, &opts).and_then(|cfg| {
        let text = run(&cfg)?;
        write_output(&cfg, &text)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("timeorder: {e}");
            e.exit_code()
        }
    }
}
