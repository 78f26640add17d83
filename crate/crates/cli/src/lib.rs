//! The `coordctl` command-line harness: configuration, command dispatch
//! and artifact files for the `coordcap` library.

pub mod config;
pub mod error;
pub mod grid;
pub mod run;

use std::ffi::OsString;
use std::io::Write as _;

use clap::Parser;

pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, ErrorKind};
pub use run::run_command;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "COORDCTL_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::validation(THREADS_ENV, format!("`{value}` is not a positive integer")))?;
    // A pool built earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Runs a full command line and returns the process exit code. Errors are
/// printed to stderr as one JSON record.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = config::Cli::try_parse_from(&args) {
        use clap::error::ErrorKind as K;
        if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
            let _ = write!(std::io::stdout(), "{e}");
            return 0;
        }
    }
    let result = configure_threads()
        .and_then(|_| parse_config(&args))
        .and_then(|c| run_command(&c));
    match result {
        Ok(paths) => {
            let mut out = std::io::stdout().lock();
            for p in paths {
                let _ = writeln!(out, "{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            match e.kind {
                ErrorKind::Usage | ErrorKind::Config | ErrorKind::Validation | ErrorKind::Range => 2,
                _ => 1,
            }
        }
    }
}
