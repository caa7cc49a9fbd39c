//! Command-line harness: validated configs, dispatch to the core library,
//! atomic output files and an append-only run log.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod record;
pub mod schema;

use std::ffi::OsString;
use std::path::Path;

pub use config::{parse_args, RunConfig, Value};
pub use error::CliError;
pub use record::{read_log, RunRecord};

use record::{append_record, now_unix_ms, sha256_hex, OutputDigest, RUN_LOG_NAME};

/// Execute `config`, write its outputs under `base` and append a record to
/// `base/sparselab-runs.jsonl`. Failed internal checks still write outputs
/// and a record with status `assertion_failed`, then return
/// [`CliError::Assertion`].
pub fn run(config: &RunConfig, base: &Path) -> Result<RunRecord, CliError> {
    let started = now_unix_ms();
    let outcome = commands::execute(config, base)?;
    let mut outputs = Vec::with_capacity(outcome.files.len());
    for (path, bytes) in &outcome.files {
        output::write_atomic(path, bytes)?;
        let path = std::fs::canonicalize(path)?;
        outputs.push(OutputDigest {
            path,
            sha256: sha256_hex(bytes),
        });
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    let record = RunRecord {
        schema_version: config.schema_version,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command.as_str().to_string(),
        config: config.snapshot(),
        started_unix_ms: started,
        finished_unix_ms: now_unix_ms(),
        outputs,
        status: if outcome.failed.is_empty() {
            "ok"
        } else {
            "assertion_failed"
        }
        .to_string(),
    };
    std::fs::create_dir_all(base)?;
    append_record(&base.join(RUN_LOG_NAME), &record)?;
    if outcome.failed.is_empty() {
        Ok(record)
    } else {
        Err(CliError::Assertion(outcome.failed.join("; ")))
    }
}

/// Full CLI: parse, run, report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = output::configure_threads()
        .and_then(|_| parse_args(args))
        .and_then(|config| run(&config, &output::out_dir()));
    match result {
        Ok(_) => error::EXIT_OK,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("sparselab: {e}");
            e.exit_code()
        }
    }
}
