//! Command-line front end for the `ftsim` simulator.

pub mod config;
pub mod output;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use ftsim::audit;
use ftsim::harness::{measure_overhead, run_ideal_experiment, run_sweep, threshold_of};
use ftsim::{OverheadConfig, RandomSource, SimError, SweepConfig, SweepResult, ThresholdEstimate};

pub use config::{parse_config, Command, Format, Parsed, RunConfig, UsageError, OUTPUT_DIR_ENV};
use output::{AuditRow, Row, COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Random weight-3 and weight-4 patterns checked by `decoder-audit`.
const AUDIT_SAMPLES: u64 = 20_000;

#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    Sim(SimError),
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "{e}"),
            RunError::Sim(e) => write!(f, "{e}"),
            RunError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Sim(SimError::Config(_) | SimError::InvalidGamma(_)) => EXIT_USAGE,
            RunError::Sim(SimError::RetryBudgetExhausted { .. }) => EXIT_BUDGET,
            RunError::Sim(SimError::Frame(_)) => EXIT_INVARIANT,
            RunError::Io(..) => EXIT_IO,
        }
    }
}

impl From<SimError> for RunError {
    fn from(e: SimError) -> Self {
        RunError::Sim(e)
    }
}

/// What a finished command produced.
#[derive(Debug)]
pub struct Report {
    pub output: PathBuf,
    /// Lines for standard output.
    pub summary: Vec<String>,
    /// Lines for standard error explaining a nonzero status.
    pub warnings: Vec<String>,
    pub status: i32,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn sweep_summary(rows: &[SweepResult]) -> Vec<String> {
    rows.iter()
        .map(|r| {
            format!(
                "gamma={:e} {} crash_rate={:.4e} [{:.3e}, {:.3e}] ({}/{}) time_units={}",
                r.gamma,
                r.scheme,
                r.crash_rate,
                r.ci_low,
                r.ci_high,
                r.crashes,
                r.rounds,
                fmt_opt(r.mean_time_units)
            )
        })
        .collect()
}

fn threshold_line(t: &ThresholdEstimate) -> String {
    match t {
        ThresholdEstimate::Crossing {
            gamma_star, left, right, ..
        } => format!("gamma* = {gamma_star:.4e} (between {left:e} and {right:e})"),
        ThresholdEstimate::NoCrossing => "gamma* not bracketed: no crossing of crash_rate = 0.75 gamma".into(),
    }
}

fn encode<R: serde::Serialize>(cfg: &RunConfig, rows: &[R], threshold: Option<&ThresholdEstimate>) -> Result<Vec<u8>, RunError> {
    let io = |e| RunError::Io(cfg.output.clone(), e);
    match cfg.format {
        Format::Csv => output::to_csv(rows, &COLUMNS).map_err(io),
        Format::Json => output::to_json(cfg.command.name(), rows, threshold).map_err(io),
    }
}

fn sweep_config(cfg: &RunConfig) -> SweepConfig {
    let mut s = SweepConfig::new(cfg.scheme, cfg.trials, cfg.seed);
    s.checks = cfg.checks;
    s.rounds = cfg.rounds;
    s.burn_in = cfg.burn_in;
    s.pool_capacity = cfg.pool_capacity;
    s.retry_budget = cfg.retry_budget;
    s.ancilla_stats = cfg.ancilla_stats;
    s
}

fn run_audit(cfg: &RunConfig) -> (Vec<AuditRow>, bool) {
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" }.to_string();
    let mut rows = Vec::new();
    let low = audit::exhaustive_low_weight(2);
    rows.push(AuditRow {
        check: "weight≤2 exhaustive".into(),
        patterns: low.patterns,
        failures: low.failures,
        result: verdict(low.passed()),
    });
    let mut rng = RandomSource::new(cfg.seed);
    for w in [3usize, 4] {
        let r = audit::random_weight(w, AUDIT_SAMPLES, &mut rng);
        rows.push(AuditRow {
            check: format!("weight-{w} random"),
            patterns: r.patterns,
            failures: r.failures,
            result: verdict(r.passed()),
        });
    }
    let ok = rows.iter().all(|r| r.failures == 0);
    let witness = audit::hierarchical_witness();
    rows.push(AuditRow {
        check: "level-by-level weaker than exact".into(),
        patterns: 1,
        failures: witness.is_none() as u64,
        result: witness.map_or_else(|| "FAIL".into(), |m| format!("PASS (mask {m:#x})")),
    });
    (rows, ok && witness.is_some())
}

/// Runs the command and writes its artifact. A retry-budget abort still
/// writes the rows gathered so far and reports status 3.
pub fn execute(cfg: &RunConfig) -> Result<Report, RunError> {
    let mut warnings = Vec::new();
    let mut status = EXIT_OK;
    let (bytes, summary) = match cfg.command {
        Command::CrashRate | Command::Threshold | Command::Ideal => {
            let sc = sweep_config(cfg);
            let rows = if cfg.command == Command::Ideal {
                run_ideal_experiment(&cfg.gammas, &sc)?
            } else {
                run_sweep(&cfg.gammas, &sc)?
            };
            let aborts: u64 = rows.iter().map(|r| r.aborts).sum();
            if aborts > 0 {
                status = EXIT_BUDGET;
                warnings.push(format!(
                    "{aborts} trial(s) ran out of ancilla retries (budget {}); rate too high for {}",
                    cfg.retry_budget, cfg.scheme
                ));
            }
            let mut summary = sweep_summary(&rows);
            let threshold = (cfg.command == Command::Threshold).then(|| threshold_of(&rows));
            if let Some(t) = &threshold {
                summary.push(threshold_line(t));
            }
            let table: Vec<Row> = rows.iter().map(Row::from_sweep).collect();
            (encode(cfg, &table, threshold.as_ref())?, summary)
        }
        Command::Overhead => {
            let mut oc = OverheadConfig::new(cfg.scheme, cfg.trials, cfg.seed);
            oc.checks = cfg.checks;
            oc.retry_budget = cfg.retry_budget;
            let points = measure_overhead(&cfg.gammas, &oc)?;
            let summary = points
                .iter()
                .map(|p| match p.time_units {
                    Some(t) => format!("gamma={:e} {} time_units={t:.4}", p.gamma, p.scheme),
                    None => format!("gamma={:e} {} time_units=exceeds budget", p.gamma, p.scheme),
                })
                .collect();
            if points.iter().any(|p| p.exhausted) {
                status = EXIT_BUDGET;
                warnings.push(format!("retry budget {} exhausted at some rates", cfg.retry_budget));
            }
            let table: Vec<Row> = points.iter().map(|p| Row::from_overhead(p, cfg.ancilla_stats)).collect();
            (encode(cfg, &table, None)?, summary)
        }
        Command::DecoderAudit => {
            let (rows, ok) = run_audit(cfg);
            if !ok {
                status = EXIT_INVARIANT;
                warnings.push("decoder audit failed".into());
            }
            let summary = rows.iter().map(|r| format!("{}: {}", r.check, r.result)).collect();
            let io = |e| RunError::Io(cfg.output.clone(), e);
            let bytes = match cfg.format {
                Format::Csv => output::to_csv(&rows, &["check", "patterns", "failures", "result"]).map_err(io)?,
                Format::Json => output::to_json(cfg.command.name(), &rows, None).map_err(io)?,
            };
            (bytes, summary)
        }
    };
    output::write_atomic(&cfg.output, &bytes).map_err(|e| RunError::Io(cfg.output.clone(), e))?;
    Ok(Report {
        output: cfg.output.clone(),
        summary,
        warnings,
        status,
    })
}

/// Executes inside a pool of `cfg.workers` threads, or the global pool.
pub fn execute_with_workers(cfg: &RunConfig) -> Result<Report, RunError> {
    match cfg.workers {
        None => execute(cfg),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Usage(UsageError(format!("cannot start {n} workers: {e}"))))?
            .install(|| execute(cfg)),
    }
}

/// Full program: parse, run, print. Returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_config(argv) {
        Ok(Parsed::Run(cfg)) => cfg,
        Ok(Parsed::Help(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute_with_workers(&cfg) {
        Ok(report) => {
            // A closed stdout must not turn a finished run into a crash.
            let mut out = std::io::stdout().lock();
            for line in &report.summary {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(out, "wrote {}", report.output.display());
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            report.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
