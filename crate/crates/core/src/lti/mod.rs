//! Polynomials, continuous transfer functions, bilinear discretization,
//! discrete IIR execution and frequency responses.

mod bilinear;
mod freq;
mod iir;
mod polynomial;
mod transfer;

pub use bilinear::bilinear_discretize;
pub use freq::{
    freq_response, log_grid, max_bode_deviation, FrequencyResponse, LinearSystem, DEFAULT_POINTS_PER_DECADE,
};
pub use iir::DiscreteIirFilter;
pub use polynomial::{taylor_shift, Polynomial};
pub use transfer::{butterworth_lowpass, ContinuousTransferFunction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("polynomial needs at least one coefficient")]
    EmptyPolynomial,
    #[error("polynomial coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("transfer function is not causal: numerator degree {num_degree} > denominator degree {den_degree}")]
    NonCausal { num_degree: usize, den_degree: usize },
    #[error("sample period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("bilinear map produced a zero current-output coefficient")]
    DegenerateOutputCoefficient,
    #[error("frequency {f_hz} Hz is at or above Nyquist ({nyquist} Hz)")]
    AboveNyquist { f_hz: f64, nyquist: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("{0}")]
    InvalidArgument(String),
}
