//! Command-line surface: configuration resolution, dispatch and output.
//!
//! A run is described by a [`RunConfig`]. Parameters come from three
//! layers, later layers winning: per-command defaults, a config file
//! (`key = value` lines, `#` comments, no nesting), and `key=value`
//! arguments on the command line. The fully resolved configuration is
//! echoed into every output file.
//!
//! Physical-unit inputs (`lambda0_nm`) are converted once at this boundary;
//! the library works in units of λ₀ or in the caller's length unit.

mod commands;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;

use crate::error::{Error, Result};
use crate::exec::ExecMode;

pub use commands::run;
pub use output::{
    emit, emit_csv, emit_json, read_csv, Cell, CsvFile, RunOutput, Table, SCHEMA_VERSION,
};

/// Seed used by stochastic commands when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Command {
    QfiSingle,
    Squeeze,
    KappaCurve,
    Reparam,
    BayesThermal,
    BayesTwo,
    SinglePhoton,
    Simulate,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::QfiSingle,
        Command::Squeeze,
        Command::KappaCurve,
        Command::Reparam,
        Command::BayesThermal,
        Command::BayesTwo,
        Command::SinglePhoton,
        Command::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::QfiSingle => "qfi-single",
            Command::Squeeze => "squeeze",
            Command::KappaCurve => "kappa-curve",
            Command::Reparam => "reparam",
            Command::BayesThermal => "bayes-thermal",
            Command::BayesTwo => "bayes-two",
            Command::SinglePhoton => "single-photon",
            Command::Simulate => "simulate",
        }
    }

    /// Whether the command draws random numbers (and so echoes a seed).
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Command::BayesThermal | Command::BayesTwo | Command::Simulate
        )
    }

    pub fn default_format(self) -> Format {
        match self {
            Command::KappaCurve => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            Command::QfiSingle => QFI_SINGLE,
            Command::Squeeze => SQUEEZE,
            Command::KappaCurve => KAPPA_CURVE,
            Command::Reparam => REPARAM,
            Command::BayesThermal => BAYES_THERMAL,
            Command::BayesTwo => BAYES_TWO,
            Command::SinglePhoton => SINGLE_PHOTON,
            Command::Simulate => SIMULATE,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!(
                "format must be csv or json, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Real,
    Positive,
    NonNegative,
    /// Integer ≥ 0.
    Count,
    Choice(&'static [&'static str]),
    /// Three comma-separated reals.
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub kind: ParamKind,
}

impl ParamSpec {
    const fn new(key: &'static str, default: &'static str, kind: ParamKind) -> Self {
        ParamSpec { key, default, kind }
    }

    fn validate(&self, value: &str) -> Result<()> {
        let bad = |why: &str| Error::Config(format!("{} = {value:?}: {why}", self.key));
        let real = || value.parse::<f64>().ok().filter(|v| v.is_finite());
        match self.kind {
            ParamKind::Real => real()
                .map(|_| ())
                .ok_or_else(|| bad("expected a finite number")),
            ParamKind::Positive => real()
                .filter(|v| *v > 0.0)
                .map(|_| ())
                .ok_or_else(|| bad("expected a positive number")),
            ParamKind::NonNegative => real()
                .filter(|v| *v >= 0.0)
                .map(|_| ())
                .ok_or_else(|| bad("expected a number ≥ 0")),
            ParamKind::Count => value
                .parse::<u64>()
                .map(|_| ())
                .map_err(|_| bad("expected an integer ≥ 0")),
            ParamKind::Choice(options) => {
                if options.contains(&value) {
                    Ok(())
                } else {
                    Err(bad(&format!("expected one of {}", options.join(", "))))
                }
            }
            ParamKind::Vector => parse_vector(value)
                .map(|_| ())
                .map_err(|_| bad("expected three comma-separated numbers")),
        }
    }
}

mod param_tables {
    use super::{ParamKind, ParamSpec};
    use ParamKind::*;
    const DIPOLES: &[&str] = &["linear-z", "circular-xy", "general"];
    const NAMED: &[&str] = &["linear-z", "circular-xy"];

    pub(super) const QFI_SINGLE: &[ParamSpec] = &[
        ParamSpec::new("kind", "linear-z", Choice(DIPOLES)),
        ParamSpec::new("N", "20000", Positive),
        ParamSpec::new("lambda0_nm", "342", Positive),
        ParamSpec::new("dipole", "0,0,1", Vector),
    ];

    pub(super) const SQUEEZE: &[ParamSpec] = &[
        ParamSpec::new("N0", "100", NonNegative),
        ParamSpec::new("kind", "linear-z", Choice(NAMED)),
        ParamSpec::new("N", "20000", Positive),
        ParamSpec::new("lambda0_nm", "342", Positive),
    ];

    pub(super) const KAPPA_CURVE: &[ParamSpec] = &[
        ParamSpec::new("dmin", "0", NonNegative),
        ParamSpec::new("dmax", "2", NonNegative),
        ParamSpec::new("steps", "81", Count),
        ParamSpec::new("phase_over_pi", "0", Real),
    ];

    pub(super) const REPARAM: &[ParamSpec] = &[
        ParamSpec::new("d", "0.5", NonNegative),
        ParamSpec::new("phase_over_pi", "0", Real),
    ];

    pub(super) const BAYES_THERMAL: &[ParamSpec] = &[
        ParamSpec::new("Nbar", "1e4", Positive),
        ParamSpec::new("C", "1", Positive),
        ParamSpec::new("j", "1", Positive),
        ParamSpec::new("lambda0", "1", Positive),
        ParamSpec::new("samples", "0", Count),
    ];

    pub(super) const BAYES_TWO: &[ParamSpec] = &[
        ParamSpec::new("d", "0.5", NonNegative),
        ParamSpec::new("N", "1000", NonNegative),
        ParamSpec::new("N2", "1000", NonNegative),
        ParamSpec::new(
            "phases",
            "incoherent",
            Choice(&["coherent", "incoherent", "thermal"]),
        ),
        ParamSpec::new("phase_over_pi", "0", Real),
        ParamSpec::new("j", "0", NonNegative),
        ParamSpec::new("samples", "20000", Count),
    ];

    pub(super) const SINGLE_PHOTON: &[ParamSpec] = &[
        ParamSpec::new("pol", "linear", Choice(&["linear", "circular"])),
        ParamSpec::new("gamma_ratio", "0.001", Positive),
        ParamSpec::new("lambda0", "1", Positive),
    ];

    pub(super) const SIMULATE: &[ParamSpec] = &[
        ParamSpec::new("method", "homodyne", Choice(&["homodyne", "heterodyne"])),
        ParamSpec::new("axis", "x", Choice(&["x", "y", "z"])),
        ParamSpec::new("kind", "linear-z", Choice(NAMED)),
        ParamSpec::new("N", "1", Positive),
        ParamSpec::new("N0", "0", NonNegative),
        ParamSpec::new("offset", "0.01", Real),
        ParamSpec::new("trials", "10000", Count),
        ParamSpec::new("d", "0", NonNegative),
    ];
}
use param_tables::*;

pub(crate) fn parse_vector(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("not a vector: {s:?}")))?;
    match parts.as_slice() {
        [a, b, c] if parts.iter().all(|v| v.is_finite()) => Ok([*a, *b, *c]),
        _ => Err(Error::Config(format!(
            "expected three components, got {s:?}"
        ))),
    }
}

/// Parses `WxH` quadrature sizes such as `64x128`.
pub fn parse_quadrature(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("quadrature must look like 64x128, got {s:?}")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("quadrature must look like 64x128, got {s:?}")))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Parses the config file grammar: `key = value` per line, `#` starts a
/// comment, blank lines ignored. Repeated keys are an error.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {k:?}",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Parses `key=value` command-line arguments.
pub fn parse_assignments<S: AsRef<str>>(args: &[S]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for a in args {
        let a = a.as_ref();
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {a:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Keys a config file may set besides command parameters.
const RESERVED: [&str; 4] = ["seed", "quad", "format", "output"];

/// Inputs to [`RunConfig::resolve`], one layer per source.
#[derive(Debug, Clone, Default)]
pub struct ConfigLayers {
    /// Contents of the config file.
    pub file: Option<String>,
    /// `key=value` arguments.
    pub assignments: Vec<String>,
    pub seed: Option<u64>,
    pub quad: Option<String>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub sequential: bool,
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Seed for stochastic commands.
    pub seed: u64,
    /// `None` selects the command's default rule.
    pub quadrature: Option<(usize, usize)>,
    pub exec: ExecMode,
}

impl RunConfig {
    /// Config with all defaults.
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            params: command
                .params()
                .iter()
                .map(|p| (p.key.to_string(), p.default.to_string()))
                .collect(),
            output: None,
            format: command.default_format(),
            seed: DEFAULT_SEED,
            quadrature: None,
            exec: ExecMode::default(),
        }
    }

    /// Merges defaults, file and flags. Unknown keys are rejected.
    pub fn resolve(command: Command, layers: &ConfigLayers) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        let mut file = match &layers.file {
            Some(text) => parse_config_text(text)?,
            None => BTreeMap::new(),
        };
        let mut reserved = BTreeMap::new();
        for key in RESERVED {
            if let Some(v) = file.remove(key) {
                reserved.insert(key, v);
            }
        }
        let flags = parse_assignments(&layers.assignments)?;
        for (k, v) in file.into_iter().chain(flags) {
            cfg.set(&k, v)?;
        }

        if let Some(s) = reserved.get("seed") {
            cfg.seed = s.parse().map_err(|_| {
                Error::Config(format!("seed must be a 64-bit unsigned integer, got {s:?}"))
            })?;
        }
        if let Some(q) = reserved.get("quad") {
            cfg.quadrature = Some(parse_quadrature(q)?);
        }
        if let Some(f) = reserved.get("format") {
            cfg.format = f.parse()?;
        }
        if let Some(o) = reserved.get("output") {
            cfg.output = Some(PathBuf::from(o));
        }

        if let Some(s) = layers.seed {
            cfg.seed = s;
        }
        if let Some(q) = &layers.quad {
            cfg.quadrature = Some(parse_quadrature(q)?);
        }
        if let Some(f) = layers.format {
            cfg.format = f;
        }
        if let Some(o) = &layers.output {
            cfg.output = Some(o.clone());
        }
        if layers.sequential {
            cfg.exec = ExecMode::Sequential;
        }
        Ok(cfg)
    }

    /// Sets one parameter after validating key and value.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let value = value.into();
        let spec = self
            .command
            .params()
            .iter()
            .find(|p| p.key == key)
            .ok_or_else(|| {
                let known: Vec<&str> = self.command.params().iter().map(|p| p.key).collect();
                Error::Config(format!(
                    "unknown key {key:?} for {}; known keys: {}",
                    self.command,
                    known.join(", ")
                ))
            })?;
        spec.validate(&value)?;
        self.params.insert(key.to_string(), value);
        Ok(())
    }

    pub(crate) fn text(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or_default()
    }

    pub(crate) fn real(&self, key: &str) -> f64 {
        self.text(key).parse().unwrap_or(f64::NAN)
    }

    pub(crate) fn count(&self, key: &str) -> u64 {
        self.text(key).parse().unwrap_or(0)
    }
}

/// Process exit code for a failed run: 2 for numerical failures, 1 for
/// everything else.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_grammar() {
        let m = parse_config_text("# header\n a = 1 \n\nb=x # trailing\n").unwrap();
        assert_eq!(m.get("a").unwrap(), "1");
        assert_eq!(m.get("b").unwrap(), "x");
        assert!(parse_config_text("a = 1\na = 2").is_err());
        assert!(parse_config_text("just words").is_err());
    }

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let layers = ConfigLayers {
            file: Some("steps = 11\ndmax = 1\nseed = 5\n".into()),
            assignments: vec!["steps=21".into()],
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::KappaCurve, &layers).unwrap();
        assert_eq!(cfg.text("steps"), "21");
        assert_eq!(cfg.text("dmax"), "1");
        assert_eq!(cfg.text("dmin"), "0");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn unknown_and_malformed_keys_rejected() {
        let l = |a: &str| ConfigLayers {
            assignments: vec![a.into()],
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve(Command::KappaCurve, &l("bogus=1")),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::resolve(Command::KappaCurve, &l("steps=-3")).is_err());
        assert!(RunConfig::resolve(Command::QfiSingle, &l("kind=square")).is_err());
        assert!(RunConfig::resolve(Command::QfiSingle, &l("N=0")).is_err());
        assert!(RunConfig::resolve(Command::QfiSingle, &l("dipole=1,2")).is_err());
        assert!(RunConfig::resolve(Command::QfiSingle, &l("N")).is_err());
    }

    #[test]
    fn quadrature_flag() {
        assert_eq!(parse_quadrature("16x32").unwrap(), (16, 32));
        assert!(parse_quadrature("16").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(
            exit_code(&Error::Singular {
                min_eigenvalue: 0.0
            }),
            2
        );
    }
}
