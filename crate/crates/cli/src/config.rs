//! Run configuration: command-line flags layered over an optional
//! `key = value` file, layered over defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use ftsim::ancilla::DEFAULT_RETRY_BUDGET;
use ftsim::harness::{DEFAULT_BURN_IN, DEFAULT_POOL_CAPACITY, DEFAULT_ROUNDS};
use ftsim::Scheme;

/// Environment variable naming the directory relative output paths go to.
pub const OUTPUT_DIR_ENV: &str = "FTSIM_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CrashRate,
    Threshold,
    Overhead,
    Ideal,
    DecoderAudit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CrashRate => "crash-rate",
            Command::Threshold => "threshold",
            Command::Overhead => "overhead",
            Command::Ideal => "ideal",
            Command::DecoderAudit => "decoder-audit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ftsim", version, about = "Crash-rate, threshold and overhead sweeps for the concatenated Steane code")]
struct Cli {
    command: Command,
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated rates.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Log-spaced grid: lower end.
    #[arg(long, allow_hyphen_values = true)]
    gamma_min: Option<String>,
    /// Log-spaced grid: upper end.
    #[arg(long, allow_hyphen_values = true)]
    gamma_max: Option<String>,
    /// Log-spaced grid: number of points.
    #[arg(long)]
    points: Option<String>,
    /// steane, reject or ideal.
    #[arg(long)]
    scheme: Option<String>,
    /// Verification checks per 7-qubit ancilla (3 or 4).
    #[arg(long)]
    checks: Option<String>,
    /// Trials per rate (delivered ancillas per rate for `overhead`).
    #[arg(long)]
    trials: Option<String>,
    /// Counted rounds per trial.
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    pool_capacity: Option<String>,
    #[arg(long)]
    retry_budget: Option<String>,
    /// Output file; relative paths resolve against the output directory.
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<String>,
    /// Add residual-error rates of delivered ancillas to the output.
    #[arg(long)]
    ancilla_stats: bool,
}

const KEYS: &[&str] = &[
    "gamma",
    "gamma-min",
    "gamma-max",
    "points",
    "scheme",
    "checks",
    "trials",
    "rounds",
    "burn-in",
    "seed",
    "pool-capacity",
    "retry-budget",
    "output",
    "output-dir",
    "format",
    "workers",
    "ancilla-stats",
];

/// Invalid invocation; the message names the offending key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub gammas: Vec<f64>,
    pub scheme: Scheme,
    pub checks: usize,
    pub trials: u64,
    pub rounds: u32,
    pub burn_in: u32,
    pub seed: u64,
    pub pool_capacity: usize,
    pub retry_budget: u64,
    pub output: PathBuf,
    pub format: Format,
    pub workers: Option<usize>,
    pub ancilla_stats: bool,
}

/// Parses `key = value` lines; `#` starts a comment. Keys may use `_` or `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key `{}`", n + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn flag_map(cli: &Cli) -> BTreeMap<String, String> {
    let pairs: [(&str, &Option<String>); 16] = [
        ("gamma", &cli.gamma),
        ("gamma-min", &cli.gamma_min),
        ("gamma-max", &cli.gamma_max),
        ("points", &cli.points),
        ("scheme", &cli.scheme),
        ("checks", &cli.checks),
        ("trials", &cli.trials),
        ("rounds", &cli.rounds),
        ("burn-in", &cli.burn_in),
        ("seed", &cli.seed),
        ("pool-capacity", &cli.pool_capacity),
        ("retry-budget", &cli.retry_budget),
        ("output", &cli.output),
        ("output-dir", &cli.output_dir),
        ("format", &cli.format),
        ("workers", &cli.workers),
    ];
    let mut map: BTreeMap<String, String> = pairs
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
        .collect();
    if cli.ancilla_stats {
        map.insert("ancilla-stats".into(), "true".into());
    }
    map
}

struct Values {
    map: BTreeMap<String, String>,
}

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, UsageError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }
}

fn probability(key: &str, g: f64) -> Result<f64, UsageError> {
    if (0.0..=1.0).contains(&g) {
        Ok(g)
    } else {
        Err(usage(format!("`{key}` must be a probability, got {g}")))
    }
}

fn gammas(v: &Values, command: Command) -> Result<Vec<f64>, UsageError> {
    let grid = ["gamma-min", "gamma-max", "points"].map(|k| v.raw(k).is_some());
    if let Some(list) = v.raw("gamma") {
        if grid.iter().any(|&b| b) {
            return Err(usage("`gamma` cannot be combined with `gamma-min`/`gamma-max`/`points`"));
        }
        let mut out = Vec::new();
        for item in list.split(',') {
            let g: f64 = item
                .trim()
                .parse()
                .map_err(|_| usage(format!("invalid value `{}` for `gamma`", item.trim())))?;
            out.push(probability("gamma", g)?);
        }
        if out.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("`gamma` values must be strictly increasing"));
        }
        if command == Command::Threshold && out.len() < 2 {
            return Err(usage("`threshold` needs at least 2 rates"));
        }
        return Ok(out);
    }
    if !grid.iter().any(|&b| b) {
        return if command == Command::DecoderAudit {
            Ok(Vec::new())
        } else {
            Err(usage("give rates with `gamma` or `gamma-min`, `gamma-max` and `points`"))
        };
    }
    let lo = probability("gamma-min", v.parse("gamma-min")?.ok_or_else(|| usage("missing `gamma-min`"))?)?;
    let hi = probability("gamma-max", v.parse("gamma-max")?.ok_or_else(|| usage("missing `gamma-max`"))?)?;
    let points: usize = v.parse("points")?.ok_or_else(|| usage("missing `points`"))?;
    if lo <= 0.0 {
        return Err(usage("`gamma-min` must be positive for a log grid"));
    }
    if lo >= hi {
        return Err(usage(format!("`gamma-min` ({lo}) must be below `gamma-max` ({hi})")));
    }
    if points < 2 {
        return Err(usage("`points` must be at least 2"));
    }
    Ok(log_grid(lo, hi, points))
}

/// `<command>-<scheme>.<ext>`, or `decoder-audit.<ext>`.
pub fn default_file_name(command: Command, scheme: Scheme, format: Format) -> String {
    match command {
        Command::DecoderAudit => format!("{}.{}", command.name(), format.extension()),
        _ => format!("{}-{}.{}", command.name(), scheme, format.extension()),
    }
}

/// `points` rates spaced evenly in log between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect()
}

fn resolve(merged: BTreeMap<String, String>, command: Command, env_dir: Option<PathBuf>) -> Result<RunConfig, UsageError> {
    let v = Values { map: merged };
    let gammas = gammas(&v, command)?;
    let scheme = match v.raw("scheme") {
        None => Scheme::Reject,
        Some(s) => s
            .parse()
            .map_err(|_| usage(format!("invalid value `{s}` for `scheme` (steane, reject, ideal)")))?,
    };
    let checks = v.or("checks", 4usize)?;
    if !(3..=4).contains(&checks) {
        return Err(usage(format!("`checks` must be 3 or 4, got {checks}")));
    }
    let trials = v.or("trials", 1000u64)?;
    if trials == 0 {
        return Err(usage("`trials` must be at least 1"));
    }
    let rounds = v.or("rounds", DEFAULT_ROUNDS)?;
    if rounds == 0 {
        return Err(usage("`rounds` must be at least 1"));
    }
    let pool_capacity = v.or("pool-capacity", DEFAULT_POOL_CAPACITY)?;
    if pool_capacity == 0 {
        return Err(usage("`pool-capacity` must be positive"));
    }
    let retry_budget = v.or("retry-budget", DEFAULT_RETRY_BUDGET)?;
    if retry_budget == 0 {
        return Err(usage("`retry-budget` must be positive"));
    }
    let format = match v.raw("format") {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(usage(format!("invalid value `{other}` for `format` (csv, json)"))),
    };
    let workers: Option<usize> = v.parse("workers")?;
    if workers == Some(0) {
        return Err(usage("`workers` must be positive"));
    }
    let file = v
        .raw("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(default_file_name(command, scheme, format)));
    let dir = v.raw("output-dir").map(PathBuf::from).or(env_dir);
    let output = match dir {
        Some(d) if file.is_relative() => d.join(file),
        _ => file,
    };
    Ok(RunConfig {
        command,
        gammas,
        scheme,
        checks,
        trials,
        rounds,
        burn_in: v.or("burn-in", DEFAULT_BURN_IN)?,
        seed: v.or("seed", 1u64)?,
        pool_capacity,
        retry_budget,
        output,
        format,
        workers,
        ancilla_stats: v.or("ancilla-stats", false)?,
    })
}

/// Either a configuration or a usage error; `Help` carries clap's help or
/// version text, which is not an error.
#[derive(Debug)]
pub enum Parsed {
    Run(RunConfig),
    Help(String),
}

/// Parses `argv` (program name first). Flags override keys from `--config`,
/// which override defaults; an output directory given by flag or file wins
/// over the environment.
pub fn parse_config<I, T>(argv: I) -> Result<Parsed, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Ok(Parsed::Help(e.to_string()))
                }
                _ => Err(usage(e.to_string().trim_end().to_string())),
            }
        }
    };
    let mut merged = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    merged.extend(flag_map(&cli));
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    resolve(merged, cli.command, env_dir).map(Parsed::Run)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_grid(3e-3, 1.5e-2, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 3e-3);
        assert_eq!(g[6], 1.5e-2);
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 5f64.powf(1.0 / 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn file_parser_normalizes_keys_and_comments() {
        let m = parse_config_file("# sweep\npool_capacity = 10\nscheme=steane # inline\n\n").unwrap();
        assert_eq!(m["pool-capacity"], "10");
        assert_eq!(m["scheme"], "steane");
        assert!(parse_config_file("colour = red").unwrap_err().0.contains("colour"));
        assert!(parse_config_file("scheme steane").is_err());
    }
}
