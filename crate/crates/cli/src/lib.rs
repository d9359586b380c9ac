//! Scenario runner for the `casimir-born` library.
//!
//! A run reads a TOML configuration, evaluates one scenario, and writes a
//! JSON result record plus optional CSV tables.

pub mod config;
pub mod error;
pub mod identities;
pub mod scenarios;
pub mod units;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

pub use config::ScenarioConfig;
pub use error::{CliError, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
pub use scenarios::CsvTable;

use config::McConfig;
use units::Units;

/// Command-line overrides of a configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Directory for CSV tables; overrides `output.plot_dir`.
    pub plot_dir: Option<PathBuf>,
    /// JSON destination; overrides `output.json`.
    pub out: Option<PathBuf>,
}

/// Machine-readable result of one run.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub id: String,
    pub tool_version: String,
    pub units: String,
    pub inputs: ScenarioConfig,
    pub results: Map<String, Value>,
    pub flags: Vec<String>,
    pub timing_seconds: f64,
}

/// Record, tables, and exit status of a finished run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub record: ResultRecord,
    pub tables: Vec<CsvTable>,
    pub exit_code: i32,
}

impl ResultRecord {
    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Applies the overrides to a configuration.
pub fn apply_overrides(cfg: &mut ScenarioConfig, opts: &RunOptions) {
    if let Some(seed) = opts.seed {
        match cfg.mc.as_mut() {
            Some(mc) => mc.seed = seed,
            None => cfg.mc = Some(McConfig::with_seed(seed)),
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| {
                    CliError::Config(format!("cannot build a pool of {n} threads: {e}"))
                })?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Evaluates a configuration without touching the file system.
///
/// Configuration and validation problems are returned as errors. Numerical
/// failures produce a record with a flag and exit status 3.
pub fn evaluate(mut cfg: ScenarioConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    apply_overrides(&mut cfg, opts);
    cfg.validate()?;
    let start = Instant::now();
    let outcome = with_threads(opts.threads, || scenarios::execute(&cfg))?;
    let elapsed = start.elapsed().as_secs_f64();
    let (outcome, exit_code) = match outcome {
        Ok(o) => {
            let code = if o.failed { EXIT_NUMERICAL } else { EXIT_OK };
            (o, code)
        }
        Err(e) if e.is_numerical() => (
            scenarios::Outcome {
                flags: vec![format!("numerical_failure: {e}")],
                failed: true,
                ..Default::default()
            },
            EXIT_NUMERICAL,
        ),
        Err(e) => return Err(e),
    };
    let units = Units::new(cfg.units, cfg.length_unit_m);
    Ok(RunReport {
        record: ResultRecord {
            scenario: cfg.scenario.name().into(),
            id: cfg.id(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            units: units.tag().into(),
            results: outcome.results,
            flags: outcome.flags,
            timing_seconds: elapsed,
            inputs: cfg,
        },
        tables: outcome.tables,
        exit_code,
    })
}

/// Writes one table as RFC 4180 CSV.
pub fn write_csv(path: &Path, table: &CsvTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs a configuration file and writes its outputs.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let cfg = ScenarioConfig::from_path(path)?;
    let json_path = opts.out.clone().or_else(|| cfg.output.json.clone());
    let plot_dir = opts
        .plot_dir
        .clone()
        .or_else(|| cfg.output.plot_dir.clone());
    let report = evaluate(cfg, opts)?;

    let text = report.record.to_json()?;
    match json_path {
        Some(p) => std::fs::write(&p, text + "\n").map_err(io_err(&p))?,
        None => println!("{text}"),
    }
    if let Some(dir) = plot_dir {
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for t in &report.tables {
            write_csv(&dir.join(format!("{}.csv", t.name)), t)?;
        }
    }
    Ok(report)
}
