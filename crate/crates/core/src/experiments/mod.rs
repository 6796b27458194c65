//! Reproducible experiment driver behind the `lyirr` binary.
//!
//! A TOML config names a shift space, a cocycle, a family of periodic
//! measures and the parameters of each pipeline. Every command writes
//! line-delimited JSON reports (plus two-column plot data where useful)
//! into an output directory and returns a human-readable summary. Reports
//! contain no timestamps; equal configs and seeds give equal bytes.

mod commands;
mod config;

pub use commands::{cmd_bounds, cmd_irregular, cmd_scan, cmd_spectrum, cmd_verify, Outcome, WitnessFile};
pub use config::{
    BoundsConfig, Caps, CocycleConfig, Experiment, ExperimentConfig, InstanceConfig, IrregularConfig, OutputConfig,
    Overrides, ScanConfig, SpaceConfig,
};

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::irregular::IrregularError;
use crate::lyapunov::LyapunovError;

pub const WITNESS_FORMAT: &str = "lyirr-witness/1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}{}: {message}", .line.map(|l| format!(":{l}")).unwrap_or_default())]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("window length {window} exceeds the cap {cap}; raise it with --caps max_window=N")]
    WindowCap { window: usize, cap: usize },
    #[error("{0}")]
    NoGap(String),
    #[error("{0}")]
    Certification(String),
    #[error("{0}")]
    Budget(String),
    #[error("{what} hash mismatch: witness has {recorded}, config gives {computed}")]
    HashMismatch {
        what: &'static str,
        recorded: String,
        computed: String,
    },
    #[error("recomputation mismatch at level {level} ({quantity}): recorded {recorded}, recomputed {recomputed}")]
    RecomputationMismatch {
        level: usize,
        quantity: &'static str,
        recorded: f64,
        recomputed: f64,
    },
    #[error("{0}")]
    BoundViolation(String),
    #[error(transparent)]
    Irregular(IrregularError),
    #[error(transparent)]
    Lyapunov(LyapunovError),
    #[error("malformed witness file {path}: {message}")]
    Witness { path: String, message: String },
}

impl ExperimentError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config { .. } | ExperimentError::WindowCap { .. } | ExperimentError::Witness { .. } => 2,
            ExperimentError::NoGap(_) => 3,
            ExperimentError::Certification(_) => 4,
            ExperimentError::Budget(_) => 5,
            ExperimentError::HashMismatch { .. } | ExperimentError::RecomputationMismatch { .. } => 6,
            ExperimentError::BoundViolation(_) => 7,
            ExperimentError::Io { .. } | ExperimentError::Irregular(_) | ExperimentError::Lyapunov(_) => 1,
        }
    }
}

const DICHOTOMY: &str = "all supplied periodic measures have the same Lyapunov spectrum; \
     the construction does not apply (inf/sup taken over the supplied measures only)";

impl From<IrregularError> for ExperimentError {
    fn from(e: IrregularError) -> Self {
        match e {
            IrregularError::AllSpectraEqual => ExperimentError::NoGap(DICHOTOMY.into()),
            IrregularError::NoGap { .. } => ExperimentError::NoGap(format!("{e}; {DICHOTOMY}")),
            IrregularError::BudgetExceeded { .. } => ExperimentError::Budget(e.to_string()),
            IrregularError::CertificationFailed { .. } => ExperimentError::Certification(e.to_string()),
            IrregularError::Lyapunov(l) => ExperimentError::Lyapunov(l),
            other => ExperimentError::Irregular(other),
        }
    }
}

impl From<LyapunovError> for ExperimentError {
    fn from(e: LyapunovError) -> Self {
        match e {
            LyapunovError::BoundViolation(_) | LyapunovError::ConeEscape { .. } => {
                ExperimentError::BoundViolation(e.to_string())
            }
            other => ExperimentError::Lyapunov(other),
        }
    }
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn sha256_json<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("serializable");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn io_error(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// One JSON object per line.
pub(crate) fn jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    out
}
