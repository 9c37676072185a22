//! Run configuration for the `nlz` binary.
//!
//! Values are layered: built-in defaults, then an optional JSON config file,
//! then `NLZ_THREADS` (pool width only), then command-line flags.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::CliError;
use crate::dynamics::IntegratorOptions;
use crate::experiments::{log_spaced, ExperimentError, SpectrumConfig, SweepConfig, WorkPool};
use crate::model::{ModelParams, NonlinearityKind, NonlinearitySpec, RampProtocol};

/// Environment variable overriding the worker-pool width.
pub const THREADS_ENV: &str = "NLZ_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    Evolve,
    Sweep,
    LzCheck,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Evolve => "evolve",
            CommandKind::Sweep => "sweep",
            CommandKind::LzCheck => "lz-check",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
            _ => Err(format!("expected a positive thread count or \"auto\", got \"{s}\"")),
        }
    }
}

impl Serialize for Threads {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => serializer.serialize_str("auto"),
            Threads::Fixed(n) => serializer.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match Value::deserialize(deserializer)? {
            Value::String(s) => s.parse().map_err(de::Error::custom),
            Value::Number(n) => n
                .as_u64()
                .map(|n| Threads::Fixed(n as usize))
                .ok_or_else(|| de::Error::custom("thread count must be a non-negative integer")),
            other => Err(de::Error::custom(format!("invalid thread setting {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "J")]
    pub coupling: f64,
    pub kind: NonlinearityKind,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub alpha: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kappas: Vec<f64>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ModelSection,
    pub protocol: ProtocolSection,
    pub sweep: SweepSection,
    pub spectrum: SpectrumSection,
    pub integrator: IntegratorOptions,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub threads: Threads,
}

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        let sweep = SweepConfig::default();
        let spectrum = SpectrumConfig::default();
        Self {
            command,
            model: ModelSection {
                coupling: 1.0,
                kind: NonlinearityKind::GrossPitaevskii,
                kappa: 4.0,
            },
            protocol: ProtocolSection {
                alpha: sweep.alpha,
                tau: 10.0,
            },
            sweep: SweepSection {
                kappas: sweep.kappas,
                tau_min: 0.1,
                tau_max: 1000.0,
                tau_points: 61,
            },
            spectrum: SpectrumSection {
                delta_min: spectrum.delta_min,
                delta_max: spectrum.delta_max,
                points: spectrum.points,
            },
            integrator: IntegratorOptions::default(),
            output_dir: PathBuf::from("."),
            emit_svg: false,
            threads: Threads::Auto,
        }
    }

    /// Checks every numeric field, independent of the command.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::Validation(m));
        let m = &self.model;
        if let Err(e) = NonlinearitySpec::new(m.kind, m.kappa).and_then(|nl| ModelParams::new(m.coupling, nl)) {
            return invalid(e.to_string());
        }
        if !self.protocol.alpha.is_finite() {
            return invalid(format!("alpha must be finite, got {}", self.protocol.alpha));
        }
        if matches!(self.command, CommandKind::Sweep | CommandKind::LzCheck) && self.protocol.alpha <= 0.0 {
            return invalid(format!("alpha must be positive for {}, got {}", self.command, self.protocol.alpha));
        }
        if let Err(e) = RampProtocol::new(self.protocol.alpha, self.protocol.tau) {
            return invalid(e.to_string());
        }
        let s = &self.sweep;
        if s.tau_points < 1 {
            return invalid("tau_points must be at least 1".into());
        }
        if !(s.tau_min > 0.0 && s.tau_min.is_finite() && s.tau_max.is_finite()) {
            return invalid(format!("tau range must be positive and finite, got [{}, {}]", s.tau_min, s.tau_max));
        }
        if s.tau_points > 1 && s.tau_max <= s.tau_min {
            return invalid(format!("tau_max ({}) must exceed tau_min ({})", s.tau_max, s.tau_min));
        }
        let mut sweep = self.sweep_config();
        if sweep.alpha <= 0.0 {
            // Only sweeps need a forward ramp; the sign was checked above.
            sweep.alpha = 1.0;
        }
        sweep.validate().map_err(|e| match e {
            ExperimentError::Config(m) => CliError::Validation(m),
            other => CliError::Validation(other.to_string()),
        })?;
        let sp = &self.spectrum;
        if !(sp.delta_min.is_finite() && sp.delta_max.is_finite() && sp.delta_min < sp.delta_max) {
            return invalid(format!("delta range [{}, {}] is empty or non-finite", sp.delta_min, sp.delta_max));
        }
        if sp.points < 2 {
            return invalid(format!("spectrum needs at least 2 points, got {}", sp.points));
        }
        if self.threads == Threads::Fixed(0) {
            return invalid("thread count must be positive".into());
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        log_spaced(self.sweep.tau_min, self.sweep.tau_max, self.sweep.tau_points)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            coupling: self.model.coupling,
            alpha: self.protocol.alpha,
            kind: self.model.kind,
            kappas: self.sweep.kappas.clone(),
            taus: self.taus(),
            integrator: self.integrator,
        }
    }

    pub fn spectrum_config(&self) -> SpectrumConfig {
        SpectrumConfig {
            coupling: self.model.coupling,
            kind: self.model.kind,
            kappa: self.model.kappa,
            delta_min: self.spectrum.delta_min,
            delta_max: self.spectrum.delta_max,
            points: self.spectrum.points,
        }
    }

    pub fn work_pool(&self) -> WorkPool {
        match self.threads {
            Threads::Auto => WorkPool::default(),
            Threads::Fixed(n) => WorkPool::with_threads(n),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }
}

/// `lo:hi:n` detuning grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl FromStr for DeltaRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = || format!("expected lo:hi:n, got \"{s}\"");
        if parts.len() != 3 {
            return Err(err());
        }
        Ok(Self {
            lo: parts[0].trim().parse().map_err(|_| err())?,
            hi: parts[1].trim().parse().map_err(|_| err())?,
            points: parts[2].trim().parse().map_err(|_| err())?,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "nlz", version, about = "Nonlinear Landau-Zener model: spectra, ramps and coherence observables")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Stationary states and generalized spectrum over a detuning range.
    Spectrum(Flags),
    /// Integrate one ramp and dump the trajectory.
    Evolve(Flags),
    /// Final-time observables over a grid of kappa and tau.
    Sweep(Flags),
    /// Compare the linear model with the Landau-Zener formula.
    LzCheck(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Coupling strength J.
    #[arg(long = "J", allow_hyphen_values = true)]
    coupling: Option<f64>,
    /// Detuning span: the ramp runs from -alpha/2 to +alpha/2.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Nonlinearity: linear, gp, kolomeisky, log or arctan.
    #[arg(long)]
    kind: Option<NonlinearityKind>,
    /// Nonlinearity strength (spectrum, evolve).
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Comma-separated nonlinearity strengths (sweep).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    kappas: Option<Vec<f64>>,
    /// Ramp duration (evolve).
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Shortest ramp duration in the sweep.
    #[arg(long, allow_hyphen_values = true)]
    tau_min: Option<f64>,
    /// Longest ramp duration in the sweep.
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<f64>,
    /// Number of log-spaced ramp durations.
    #[arg(long)]
    tau_points: Option<usize>,
    /// Detuning grid as lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    delta_range: Option<DeltaRange>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    svg: bool,
    /// Relative tolerance of the integrator.
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<f64>,
    /// Absolute tolerance of the integrator.
    #[arg(long, allow_hyphen_values = true)]
    abs_tol: Option<f64>,
    /// Worker threads, or "auto".
    #[arg(long)]
    threads: Option<Threads>,
    /// JSON configuration file; flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

/// Outcome of argument parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run { config: RunConfig, print_config: bool },
    /// `--help` or `--version`; the text goes to stdout.
    Info(String),
}

/// Parses arguments using the process environment for `NLZ_THREADS`.
pub fn parse_config<I, T>(args: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(THREADS_ENV).ok();
    parse_config_with_env(args, env.as_deref())
}

/// Parses arguments with an explicit `NLZ_THREADS` value.
pub fn parse_config_with_env<I, T>(args: I, env_threads: Option<&str>) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Invocation::Info(e.to_string())),
                _ => Err(CliError::Usage(e.to_string())),
            };
        }
    };
    let (command, flags) = match cli.command {
        Sub::Spectrum(f) => (CommandKind::Spectrum, f),
        Sub::Evolve(f) => (CommandKind::Evolve, f),
        Sub::Sweep(f) => (CommandKind::Sweep, f),
        Sub::LzCheck(f) => (CommandKind::LzCheck, f),
    };

    let mut value = serde_json::to_value(RunConfig::defaults(command)).expect("defaults serialize");
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config file {} is not valid JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::Usage(format!("config file {} must hold a JSON object", path.display())));
        }
        merge(&mut value, file);
    }
    if let Some(raw) = env_threads {
        let threads: Threads = raw
            .parse()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))?;
        merge(&mut value, json!({ "threads": threads }));
    }
    merge(&mut value, flag_overrides(command, &flags));
    // The subcommand always wins over a command named in the file.
    merge(&mut value, json!({ "command": command }));

    let mut config: RunConfig =
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    if command == CommandKind::LzCheck {
        config.sweep.kappas = vec![0.0];
    }
    config.validate()?;
    Ok(Invocation::Run {
        config,
        print_config: flags.print_config,
    })
}

fn flag_overrides(command: CommandKind, f: &Flags) -> Value {
    let mut root = Map::new();
    let mut section = |name: &str, entries: Vec<(&str, Option<Value>)>| {
        let map: Map<String, Value> = entries
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        if !map.is_empty() {
            root.insert(name.to_string(), Value::Object(map));
        }
    };
    section(
        "model",
        vec![
            ("J", f.coupling.map(|v| json!(v))),
            ("kind", f.kind.map(|v| json!(v))),
            ("kappa", f.kappa.map(|v| json!(v))),
        ],
    );
    section(
        "protocol",
        vec![("alpha", f.alpha.map(|v| json!(v))), ("tau", f.tau.map(|v| json!(v)))],
    );
    let kappas = f
        .kappas
        .clone()
        .or_else(|| (command == CommandKind::Sweep).then_some(f.kappa.map(|k| vec![k])).flatten());
    section(
        "sweep",
        vec![
            ("kappas", kappas.map(|v| json!(v))),
            ("tau_min", f.tau_min.map(|v| json!(v))),
            ("tau_max", f.tau_max.map(|v| json!(v))),
            ("tau_points", f.tau_points.map(|v| json!(v))),
        ],
    );
    section(
        "spectrum",
        vec![
            ("delta_min", f.delta_range.map(|r| json!(r.lo))),
            ("delta_max", f.delta_range.map(|r| json!(r.hi))),
            ("points", f.delta_range.map(|r| json!(r.points))),
        ],
    );
    section(
        "integrator",
        vec![
            ("rel_tol", f.rel_tol.map(|v| json!(v))),
            ("abs_tol", f.abs_tol.map(|v| json!(v))),
        ],
    );
    if let Some(out) = &f.out {
        root.insert("output_dir".into(), json!(out));
    }
    if f.svg {
        root.insert("emit_svg".into(), json!(true));
    }
    if let Some(t) = f.threads {
        root.insert("threads".into(), json!(t));
    }
    Value::Object(root)
}

/// Recursive object merge; non-object values in `patch` replace `base`.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, p) => *slot = p,
    }
}
