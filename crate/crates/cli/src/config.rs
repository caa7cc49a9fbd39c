//! Parsing and validating a [`RunConfig`] from argv and an optional config
//! file.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Keys are
//! the long flag names (`_` and `-` are interchangeable). Precedence, lowest
//! first: schema defaults, config file, flags.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Arg, ArgAction, Command};
use sparselab_core::rub::CERTIFIED_MAX_DIM;
use sparselab_core::rub::OPNORM_MAX_ROWS;

use crate::error::CliError;
use crate::schema::{schema, CommandName, Kind, ParamSpec, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Count(usize),
    Seed(u64),
    Real(f64),
    Text(String),
    CountList(Vec<usize>),
    RealList(Vec<f64>),
}

impl Value {
    /// Canonical text form, parseable back by the same kind.
    pub fn render(&self) -> String {
        let join = |items: Vec<String>| items.join(",");
        match self {
            Value::Count(v) => v.to_string(),
            Value::Seed(v) => v.to_string(),
            Value::Real(v) => format!("{v:?}"),
            Value::Text(v) => v.clone(),
            Value::CountList(v) => join(v.iter().map(|x| x.to_string()).collect()),
            Value::RealList(v) => join(v.iter().map(|x| format!("{x:?}")).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandName,
    pub params: BTreeMap<String, Value>,
    pub schema_version: u32,
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    pub fn count(&self, key: &str) -> Option<usize> {
        match self.params.get(key) {
            Some(Value::Count(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match self.params.get("seed") {
            Some(Value::Seed(v)) => *v,
            _ => 0,
        }
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        match self.params.get(key) {
            Some(Value::Real(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.params.get(key) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }

    pub fn counts(&self, key: &str) -> Option<&[usize]> {
        match self.params.get(key) {
            Some(Value::CountList(v)) => Some(v),
            _ => None,
        }
    }

    pub fn reals(&self, key: &str) -> Option<&[f64]> {
        match self.params.get(key) {
            Some(Value::RealList(v)) => Some(v),
            _ => None,
        }
    }

    /// `key -> canonical value` for run records.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.params.iter().map(|(k, v)| (k.clone(), v.render())).collect()
    }
}

fn type_error(key: &str, raw: &str, what: &str) -> CliError {
    CliError::Config(format!("type mismatch for '{key}': '{raw}' is not {what}"))
}

fn parse_count(key: &str, raw: &str) -> Result<usize, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| type_error(key, raw, "a nonnegative integer"))
}

fn parse_counts(key: &str, raw: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_count(key, v)?),
            [a, b] | [a, _, b] => {
                let start = parse_count(key, a)?;
                let end = parse_count(key, b)?;
                let step = if parts.len() == 3 {
                    parse_count(key, parts[1])?
                } else {
                    1
                };
                if step == 0 || end < start {
                    return Err(CliError::Config(format!(
                        "range '{item}' for '{key}' needs a positive step and start <= end"
                    )));
                }
                out.extend((start..=end).step_by(step));
            }
            _ => return Err(type_error(key, item, "a count or start:step:end range")),
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("'{key}' needs at least one value")));
    }
    Ok(out)
}

fn parse_real(key: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw.trim().parse().map_err(|_| type_error(key, raw, "a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(type_error(key, raw, "a finite number"))
    }
}

pub fn parse_value(spec: &ParamSpec, raw: &str) -> Result<Value, CliError> {
    let key = spec.key;
    Ok(match spec.kind {
        Kind::Count => Value::Count(parse_count(key, raw)?),
        Kind::Seed => Value::Seed(
            raw.trim()
                .parse()
                .map_err(|_| type_error(key, raw, "a 64-bit seed"))?,
        ),
        Kind::Real => Value::Real(parse_real(key, raw)?),
        Kind::Choice(choices) => {
            let v = raw.trim();
            if !choices.contains(&v) {
                return Err(CliError::Config(format!(
                    "'{key}' must be one of {}, got '{v}'",
                    choices.join(", ")
                )));
            }
            Value::Text(v.to_string())
        }
        Kind::Path => {
            if raw.trim().is_empty() {
                return Err(CliError::Config(format!("'{key}' needs a path")));
            }
            Value::Text(raw.trim().to_string())
        }
        Kind::CountList => Value::CountList(parse_counts(key, raw)?),
        Kind::RealList => Value::RealList(
            raw.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_real(key, s))
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Parse config-file text into raw `key -> value` pairs.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!(
                "config line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    Ok(out)
}

/// Merge defaults, config-file values and flags for `cmd`, then validate.
pub fn build_config(
    cmd: CommandName,
    file: &BTreeMap<String, String>,
    flags: &BTreeMap<String, String>,
) -> Result<RunConfig, CliError> {
    let specs = schema(cmd);
    for key in file.keys() {
        if !specs.iter().any(|s| s.key == key) {
            return Err(CliError::Config(format!("unknown key '{key}' for command {cmd}")));
        }
    }
    let mut params = BTreeMap::new();
    for spec in &specs {
        let raw = flags
            .get(spec.key)
            .or_else(|| file.get(spec.key))
            .map(String::as_str)
            .or(spec.default);
        match raw {
            Some(raw) => {
                params.insert(spec.key.to_string(), parse_value(spec, raw)?);
            }
            None if spec.required => {
                return Err(CliError::Config(format!(
                    "missing required parameter '{}' for {cmd}",
                    spec.key
                )));
            }
            None => {}
        }
    }
    let config = RunConfig {
        command: cmd,
        params,
        schema_version: SCHEMA_VERSION,
    };
    validate(&config)?;
    Ok(config)
}

fn range_error(msg: String) -> CliError {
    CliError::Config(format!("out of range: {msg}"))
}

fn ascending(key: &str, v: &[usize]) -> Result<(), CliError> {
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(range_error(format!("'{key}' must be strictly ascending")));
    }
    Ok(())
}

fn matrix_source(c: &RunConfig) -> Result<(), CliError> {
    let sampled = c.count("m").is_some() || c.count("n").is_some();
    match (c.text("matrix"), sampled) {
        (Some(_), true) => Err(CliError::Config(
            "give either --matrix or --m/--n, not both".into(),
        )),
        (None, false) => Err(CliError::Config("need --matrix or both --m and --n".into())),
        (None, true) if c.count("m").is_none() || c.count("n").is_none() => {
            Err(CliError::Config("a sampled matrix needs both --m and --n".into()))
        }
        (None, true) if c.count("m") == Some(0) || c.count("n") == Some(0) => {
            Err(range_error("matrix dimensions must be positive".into()))
        }
        _ => Ok(()),
    }
}

/// Range checks and contradictory combinations.
pub fn validate(c: &RunConfig) -> Result<(), CliError> {
    match c.command {
        CommandName::GenMatrix => {
            if c.count("m") == Some(0) || c.count("n") == Some(0) {
                return Err(range_error("m and n must be positive".into()));
            }
        }
        CommandName::Recover => {
            for key in ["feas-tol", "opt-tol", "rec-tol"] {
                if c.real(key).is_some_and(|v| v <= 0.0) {
                    return Err(range_error(format!("'{key}' must be positive")));
                }
            }
        }
        CommandName::Rub => {
            matrix_source(c)?;
            let k = match (c.count("k"), c.count("s"), c.real("lambda")) {
                (_, Some(_), None) | (_, None, Some(_)) => {
                    return Err(CliError::Config("--s and --lambda go together".into()));
                }
                (_, Some(0), _) => return Err(range_error("s must be at least 1".into())),
                (_, _, Some(l)) if l <= 0.0 => return Err(range_error("lambda must be positive".into())),
                (Some(k), Some(s), Some(l)) if k != sparselab_core::rub::certificate_level(s, l) => {
                    return Err(CliError::Config(format!(
                        "--k {k} contradicts s + ceil(lambda s) = {}",
                        sparselab_core::rub::certificate_level(s, l)
                    )));
                }
                (Some(k), _, _) => k,
                (None, Some(s), Some(l)) => sparselab_core::rub::certificate_level(s, l),
                (None, None, None) => return Err(CliError::Config("need --k, or --s with --lambda".into())),
            };
            if k == 0 {
                return Err(range_error("k must be at least 1".into()));
            }
            if c.count("n").is_some_and(|n| k > n) {
                return Err(range_error(format!("k = {k} exceeds n")));
            }
            if c.text("method") == Some("exact_tiny") {
                if c.count("m").is_some_and(|m| m > OPNORM_MAX_ROWS) {
                    return Err(CliError::Config(format!(
                        "exact RUB enumerates signs and needs m <= {OPNORM_MAX_ROWS}; use --method monte_carlo"
                    )));
                }
                if k > CERTIFIED_MAX_DIM {
                    return Err(CliError::Config(format!(
                        "exact RUB is certified only for k <= {CERTIFIED_MAX_DIM}, got {k}"
                    )));
                }
            }
            if c.count("budget") == Some(0) {
                return Err(range_error("budget must be positive".into()));
            }
        }
        CommandName::Nsp => {
            matrix_source(c)?;
            if c.count("s") == Some(0) {
                return Err(range_error("s must be at least 1".into()));
            }
            if c.count("n").is_some_and(|n| c.count("s").unwrap_or(0) > n) {
                return Err(range_error("s exceeds n".into()));
            }
            if c.count("budget") == Some(0) {
                return Err(range_error("budget must be positive".into()));
            }
        }
        CommandName::Net => {
            let eps = c.real("epsilon").unwrap_or(0.5);
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(range_error(format!("epsilon must lie in (0, 1], got {eps}")));
            }
            let (n, s) = (c.count("n").unwrap_or(0), c.count("s").unwrap_or(0));
            if s == 0 || s > n {
                return Err(range_error(format!("need 1 <= s <= n, got s = {s}, n = {n}")));
            }
            if c.count("probes") == Some(0) {
                return Err(range_error("probes must be positive".into()));
            }
        }
        CommandName::Concentration => {
            if c.count("n") == Some(0) {
                return Err(range_error("n must be positive".into()));
            }
            if c.count("trials").unwrap_or(0) < 100 {
                return Err(range_error("trials must be at least 100".into()));
            }
            let ms = c.counts("m").unwrap_or(&[]);
            if ms.contains(&0) {
                return Err(range_error("m values must be positive".into()));
            }
            ascending("m", ms)?;
            if c.reals("delta").unwrap_or(&[]).iter().any(|d| *d <= 0.0) {
                return Err(range_error("delta values must be positive".into()));
            }
        }
        CommandName::PhaseDiagram => {
            let n = c.count("n").unwrap_or(0);
            let (ss, ms) = (c.counts("s").unwrap_or(&[]), c.counts("m").unwrap_or(&[]));
            ascending("s", ss)?;
            ascending("m", ms)?;
            if n == 0 || ms.contains(&0) {
                return Err(range_error("n and every m must be positive".into()));
            }
            if ss.iter().any(|&s| s > n) {
                return Err(range_error("every s must be at most n".into()));
            }
            if c.count("trials") == Some(0) {
                return Err(range_error("trials must be positive".into()));
            }
        }
        CommandName::Fit => {
            let level = c.real("level").unwrap_or(0.5);
            if !(level > 0.0 && level < 1.0) {
                return Err(range_error(format!("level must lie in (0, 1), got {level}")));
            }
        }
    }
    Ok(())
}

pub fn cli() -> Command {
    let mut app = Command::new("sparselab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Sparse recovery experiments with sub-exponential measurement matrices")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(
            "Environment: SPARSELAB_OUT_DIR (base for relative output paths), \
             SPARSELAB_THREADS (worker threads).\n\
             Exit codes: 0 ok, 2 config error, 3 size/cap error, 4 numerical failure, \
             5 assertion failure, 1 I/O error.",
        );
    for cmd in CommandName::ALL {
        let mut sub = Command::new(cmd.as_str()).about(cmd.about()).arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("Flat key = value config file; flags take precedence"),
        );
        for spec in schema(cmd) {
            let mut help = spec.help.to_string();
            if let Kind::Choice(choices) = spec.kind {
                help.push_str(&format!(" [{}]", choices.join("|")));
            }
            if let Some(d) = spec.default {
                help.push_str(&format!(" (default {d})"));
            }
            if spec.required {
                help.push_str(" (required)");
            }
            sub = sub.arg(
                Arg::new(spec.key)
                    .long(spec.key)
                    .value_name(spec.kind.value_name())
                    .action(ArgAction::Set)
                    .allow_hyphen_values(true)
                    .help(help),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

/// Parse argv (including the program name) into a validated config.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = cli().try_get_matches_from(args).map_err(CliError::Clap)?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cmd =
        CommandName::from_name(name).ok_or_else(|| CliError::Config(format!("unknown command '{name}'")))?;
    let file = match sub.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags: BTreeMap<String, String> = schema(cmd)
        .iter()
        .filter_map(|spec| {
            sub.get_one::<String>(spec.key)
                .map(|v| (spec.key.to_string(), v.clone()))
        })
        .collect();
    build_config(cmd, &file, &flags)
}
