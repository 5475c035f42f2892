//! Identification workflow: chirp excitation, H1 frequency-response
//! estimation and rational transfer-function fitting.

mod chirp;
mod fit;
mod frf;
mod series;

pub use chirp::{ChirpKind, ChirpSpec};
pub use fit::{fit_rational, fit_rational_with, FitOptions, RationalFit};
pub use frf::{empirical_frf, empirical_frf_with, read_frf_csv, write_frf_csv, EmpiricalFrf, FrfOptions};
pub use series::TimeSeries;

use thiserror::Error;

use crate::lti::LtiError;

#[derive(Debug, Error)]
pub enum SysidError {
    #[error("{0}")]
    InvalidArgument(String),
    #[error("frequency {f_hz} Hz is at or above Nyquist ({nyquist} Hz)")]
    AboveNyquist { f_hz: f64, nyquist: f64 },
    #[error("fit needs {needed} valid bins, got {bins}")]
    InsufficientData { bins: usize, needed: usize },
    #[error("least-squares system is ill-conditioned (condition {condition:e}): {detail}")]
    IllConditioned { condition: f64, detail: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lti(#[from] LtiError),
}
