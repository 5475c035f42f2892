//! Joint-space force control for structurally elastic actuators.
//!
//! The crate is organized by subsystem:
//!
//! - [`lti`]: polynomials, transfer functions, Tustin discretization via
//!   Horner-style Taylor shifts, IIR execution and bode data.
//! - [`control`]: PID + feedforward force loop with a disturbance observer,
//!   virtual impedance and leaky integration.
//! - [`kinematics`]: joint/actuator maps, Jacobian velocity mapping and
//!   inverse-transpose effort mapping.
//! - [`plant`]: elastic-actuator and pendulum simulator, two-rate scenarios.
//! - [`sysid`]: chirps, H1 frequency-response estimation, rational fitting.
//! - [`experiments`] and [`config`]: named experiment workflows behind the
//!   command-line runner in [`cli`].
//!
//! Runnable walkthroughs for each capability live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod control;
pub mod experiments;
pub mod kinematics;
pub mod lti;
pub mod plant;
pub mod sysid;

pub use control::nominal_plant;
