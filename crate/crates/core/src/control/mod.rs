//! Joint-space force control: PID + feedforward, disturbance observer with
//! a feedback blend, virtual impedance and leaky integration.

mod dob;
mod force;
mod gains;
mod impedance;
mod leaky;
mod pid;

pub use dob::{nominal_plant, q_filter, DobConfig, NOMINAL_PLANT_DEN, NOMINAL_PLANT_GAIN};
pub use force::{build_force_controller, DisturbanceObserver, ForceController, ForceTerms, DEFAULT_FORCE_SCALE};
pub use gains::{actuator_gains, GainSet, LOWER_BODY_GAINS};
pub use impedance::{impedance_step, ImpedanceConfig};
pub use leaky::{leaky_step, LeakyState};
pub use pid::{PidConfig, LAMBDA_C_SCALE};

use thiserror::Error;

use crate::lti::LtiError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid {name}: {value}")]
    InvalidGain { name: &'static str, value: f64 },
    #[error("Q-filter cutoff {omega_c} rad/s is at or above Nyquist ({nyquist} rad/s)")]
    CutoffAboveNyquist { omega_c: f64, nyquist: f64 },
    #[error("observer not causal: Q-filter degree {q_degree} below plant relative degree {plant_relative_degree}")]
    NonCausalObserver {
        q_degree: usize,
        plant_relative_degree: usize,
    },
    #[error(transparent)]
    Lti(#[from] LtiError),
}
