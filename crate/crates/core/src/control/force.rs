use std::f64::consts::PI;

use crate::lti::{bilinear_discretize, DiscreteIirFilter};

use super::{ControlError, DobConfig, PidConfig};

/// Newtons per plant output unit. The feedforward gain is quoted in A per
/// kN, and the identified model's output is read in the same kN units.
pub const DEFAULT_FORCE_SCALE: f64 = 1000.0;

/// Breakdown of the most recent command.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForceTerms {
    pub pid: f64,
    pub feedforward: f64,
    /// Disturbance estimate `d_hat`, A.
    pub disturbance: f64,
    /// Commanded motor current `i_m`, A.
    pub command: f64,
}

/// PID + feedforward force loop with a blended disturbance observer.
///
/// Per step:
///
/// ```text
/// d_hat = (Q_d/P_n)[f_measured] - Q_d[u_prev]
/// i_m   = C[f_desired - f_measured] + k_ff f_desired - gamma d_hat
/// ```
///
/// Forces enter in newtons and are divided by `force_scale` before any
/// filter sees them.
#[derive(Debug, Clone)]
pub struct ForceController {
    pid: DiscreteIirFilter,
    dob: DisturbanceObserver,
    k_ff: f64,
    force_scale: f64,
    last: ForceTerms,
    fault: bool,
}

pub fn build_force_controller(
    pid: &PidConfig,
    dob: &DobConfig,
    k_ff: f64,
    period: f64,
) -> Result<ForceController, ControlError> {
    pid.validate()?;
    if !k_ff.is_finite() {
        return Err(ControlError::InvalidGain {
            name: "k_ff",
            value: k_ff,
        });
    }
    let dob = DisturbanceObserver::new(dob, period)?;
    Ok(ForceController {
        pid: bilinear_discretize(&pid.transfer_function(), period)?,
        dob,
        k_ff,
        force_scale: DEFAULT_FORCE_SCALE,
        last: ForceTerms::default(),
        fault: false,
    })
}

impl ForceController {
    pub fn with_force_scale(mut self, newtons_per_unit: f64) -> Result<Self, ControlError> {
        if !(newtons_per_unit > 0.0) || !newtons_per_unit.is_finite() {
            return Err(ControlError::InvalidGain {
                name: "force_scale",
                value: newtons_per_unit,
            });
        }
        self.force_scale = newtons_per_unit;
        Ok(self)
    }

    /// One control tick. Non-finite inputs hold the previous command, leave
    /// all filter state untouched and latch the fault flag.
    pub fn step(&mut self, f_desired: f64, f_measured: f64) -> f64 {
        if !f_desired.is_finite() || !f_measured.is_finite() {
            self.fault = true;
            return self.dob.u_prev;
        }
        let fd = f_desired / self.force_scale;
        let fm = f_measured / self.force_scale;
        let pid = self.pid.step(fd - fm);
        let feedforward = self.k_ff * fd;
        let command = self.dob.step(pid + feedforward, fm);
        let disturbance = self.dob.last_estimate;
        self.last = ForceTerms {
            pid,
            feedforward,
            disturbance,
            command,
        };
        command
    }

    pub fn last_terms(&self) -> ForceTerms {
        self.last
    }

    pub fn fault(&self) -> bool {
        self.fault
    }

    pub fn clear_fault(&mut self) {
        self.fault = false;
    }

    pub fn gamma(&self) -> f64 {
        self.dob.gamma
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        self.dob.gamma = super::dob::clamp_gamma(gamma);
    }

    pub fn k_ff(&self) -> f64 {
        self.k_ff
    }

    pub fn force_scale(&self) -> f64 {
        self.force_scale
    }

    pub fn previous_command(&self) -> f64 {
        self.dob.u_prev
    }

    pub fn pid_filter(&self) -> &DiscreteIirFilter {
        &self.pid
    }

    pub fn observer(&self) -> &DisturbanceObserver {
        &self.dob
    }

    /// Clears the PID history, which holds the integrator state.
    pub fn reset_integrator(&mut self) {
        self.pid.reset();
    }

    pub fn reset(&mut self) {
        self.pid.reset();
        self.dob.reset();
        self.last = ForceTerms::default();
        self.fault = false;
    }
}

/// The observer junction on its own: `i_m = u_c - gamma d_hat`, with the
/// previous `i_m` fed to the input channel.
#[derive(Debug, Clone)]
pub struct DisturbanceObserver {
    q_filter: DiscreteIirFilter,
    inv_plant: DiscreteIirFilter,
    gamma: f64,
    u_prev: f64,
    last_estimate: f64,
}

impl DisturbanceObserver {
    pub fn new(dob: &DobConfig, period: f64) -> Result<Self, ControlError> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(ControlError::Lti(crate::lti::LtiError::InvalidPeriod(period)));
        }
        let nyquist = PI / period;
        if dob.omega_c >= nyquist {
            return Err(ControlError::CutoffAboveNyquist {
                omega_c: dob.omega_c,
                nyquist,
            });
        }
        Ok(DisturbanceObserver {
            q_filter: bilinear_discretize(&dob.q_filter()?, period)?,
            inv_plant: bilinear_discretize(&dob.inverse_plant()?, period)?,
            gamma: super::dob::clamp_gamma(dob.gamma),
            u_prev: 0.0,
            last_estimate: 0.0,
        })
    }

    /// `u_c` in A, `y_measured` in plant output units.
    pub fn step(&mut self, u_c: f64, y_measured: f64) -> f64 {
        let d_hat = self.inv_plant.step(y_measured) - self.q_filter.step(self.u_prev);
        let u = u_c - self.gamma * d_hat;
        self.u_prev = u;
        self.last_estimate = d_hat;
        u
    }

    pub fn last_estimate(&self) -> f64 {
        self.last_estimate
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q_filter(&self) -> &DiscreteIirFilter {
        &self.q_filter
    }

    pub fn inverse_plant_filter(&self) -> &DiscreteIirFilter {
        &self.inv_plant
    }

    pub fn reset(&mut self) {
        self.q_filter.reset();
        self.inv_plant.reset();
        self.u_prev = 0.0;
        self.last_estimate = 0.0;
    }
}
