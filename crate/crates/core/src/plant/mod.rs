//! Desk-scale testbed: the elastic actuator with injectable model error and
//! friction, the weighted pendulum, and the two-rate loop that runs them
//! against the controller.

mod lsea;
mod pendulum;
mod scenario;

pub use lsea::{lsea_step, Factorization, LseaParams, LseaPlant, Perturbation, Stiction, DEFAULT_SPRING_STIFFNESS};
pub use pendulum::{pendulum_step, PendulumParams, PendulumState};
pub use scenario::{
    run_scenario, run_scenario_partial, ControllerSetup, Excitation, InputHold, PendulumSetup, Rates, SimLog, SimRun,
    SimScenario, SIMLOG_COLUMNS,
};

use thiserror::Error;

use crate::control::ControlError;
use crate::kinematics::KinematicsError;
use crate::sysid::SysidError;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("{0}")]
    InvalidRates(String),
    #[error("numeric fault at t = {t} s")]
    NumericFault { t: f64 },
    #[error("load diverged at t = {t} s (theta = {theta} rad)")]
    LoadDiverged { t: f64, theta: f64 },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Sysid(#[from] SysidError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
