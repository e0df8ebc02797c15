//! Scene files, CSV formats, the benchmark sweep and the command line for
//! [`tetherplan_core`].
//!
//! ```no_run
//! use tetherplan::scene::Scene;
//! use tetherplan::sweep::{run_sweep, SweepConfig};
//!
//! let scene = Scene::default_scene().unwrap();
//! let report = run_sweep(&scene, &SweepConfig { seed: 7, threads: None }).unwrap();
//! println!("{}", report.grid_text());
//! ```

pub mod cli;
pub mod io;
pub mod outcome;
pub mod scene;
pub mod sweep;

/// Errors surfaced to the command line. All of them map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed scene text; the message carries the line and column.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}: invalid `{field}`: {message}")]
    Validation { origin: String, field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] tetherplan_core::Error),
    #[error("{0}")]
    Usage(String),
}
