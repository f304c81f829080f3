//! Reading and writing problems, solutions, postsolve records, statistics and
//! parameters, and summarising transaction logs.

pub mod mps;
pub mod params;
pub mod record;
pub mod report;
pub mod sol;
pub mod stats;

use thiserror::Error;

pub use mps::{mps_name, read_mps, read_mps_str, write_mps, write_mps_string, MpsFormat, MpsOptions};
pub use params::{Settings, PARAMETERS};
pub use record::{read_record, record_mode, write_record, RecordFormat};
pub use report::ConflictReport;
pub use sol::{read_sol, write_sol};
pub use stats::Statistics;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Format(String),
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        IoError::Format(message.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeanError {
    #[error("shifted geometric mean of an empty list")]
    Empty,
    #[error("shift must be positive and values at least zero")]
    Domain,
}

/// `exp(mean(ln(v + shift))) - shift`.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, MeanError> {
    if values.is_empty() {
        return Err(MeanError::Empty);
    }
    if shift <= 0.0 || values.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(MeanError::Domain);
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Ok(mean.exp() - shift)
}
