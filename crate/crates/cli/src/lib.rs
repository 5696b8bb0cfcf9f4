//! Front end for the subcarrier-domain library: figure-data emitters, the
//! end-to-end simulation runner and the statistics experiments.

pub mod commands;
pub mod config;

pub use commands::{execute, Cell, Product, Table};
pub use config::{load, Cli, Command, ConfigError, Format, Options, RunConfig, Violation, SEED_ENV};

use serde_json::json;
use std::fmt;
use std::io::Write;
use std::time::Instant;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Model(subdom_core::Error),
    Io(String),
}

impl RunError {
    /// 2 for anything the user can fix in the configuration, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(ConfigError::Io(_)) | RunError::Io(_) => 1,
            RunError::Config(_) | RunError::Model(_) => 2,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Model(e) => write!(f, "{e}"),
            RunError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<subdom_core::Error> for RunError {
    fn from(e: subdom_core::Error) -> Self {
        RunError::Model(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub rows: usize,
    pub seed: u64,
    pub elapsed_ms: u128,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wrote {} rows (seed {}) in {} ms", self.rows, self.seed, self.elapsed_ms)
    }
}

/// Runs the command on a pool of `cfg.threads` workers, or on rayon's
/// global pool when unset.
pub fn compute(cfg: &RunConfig) -> Result<Product, RunError> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Io(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(|| execute(cfg))?)
        }
        None => Ok(execute(cfg)?),
    }
}

/// Serializes a product in the configured format.
pub fn render(cfg: &RunConfig, product: &Product) -> Result<Vec<u8>, RunError> {
    let config = serde_json::to_value(cfg).expect("config serializes");
    match cfg.format {
        Format::Csv => {
            let mut out = format!("# config: {config}\n").into_bytes();
            let mut w = csv::Writer::from_writer(&mut out);
            let io = |e: csv::Error| RunError::Io(e.to_string());
            w.write_record(&product.table.columns).map_err(io)?;
            for row in &product.table.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(io)?;
            }
            w.flush().map_err(|e| RunError::Io(e.to_string()))?;
            drop(w);
            Ok(out)
        }
        Format::Json => {
            let body = match &product.record {
                Some(record) => json!({ "config": config, "record": record }),
                None => json!({
                    "config": config,
                    "columns": product.table.columns,
                    "rows": product.table.rows,
                }),
            };
            let mut out = serde_json::to_vec_pretty(&body).expect("json body serializes");
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Computes, renders and writes the output (to stdout without a path).
pub fn run(cfg: &RunConfig) -> Result<Summary, RunError> {
    let start = Instant::now();
    let product = compute(cfg)?;
    let bytes = render(cfg, &product)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| RunError::Io(format!("cannot write to stdout: {e}")))?,
    }
    Ok(Summary {
        rows: product.table.rows.len(),
        seed: cfg.seed,
        elapsed_ms: start.elapsed().as_millis(),
    })
}
