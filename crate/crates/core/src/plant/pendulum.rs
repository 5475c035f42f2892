use std::f64::consts::PI;

use super::PlantError;

/// Weighted pendulum driven through a moment arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    /// Bob mass, kg.
    pub m: f64,
    /// Pivot to bob, m.
    pub l1: f64,
    /// Pivot to actuator attachment, m.
    pub l2: f64,
    pub g: f64,
    /// Viscous damping at the pivot, N m s/rad.
    pub c: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        PendulumParams {
            m: 10.0,
            l1: 0.33,
            l2: 0.07,
            g: 9.81,
            c: 0.0,
        }
    }
}

impl PendulumParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        for (name, v) in [("m", self.m), ("l1", self.l1), ("l2", self.l2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PlantError::InvalidParameter(format!(
                    "pendulum {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.g >= 0.0) || !(self.c >= 0.0) {
            return Err(PlantError::InvalidParameter(
                "pendulum g and c must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn inertia(&self) -> f64 {
        self.m * self.l1 * self.l1
    }

    /// Small-angle natural frequency, Hz.
    pub fn natural_frequency_hz(&self) -> f64 {
        (self.g / self.l1).sqrt() / (2.0 * PI)
    }

    /// Joint torque for a desired trajectory point:
    /// `m l1^2 qddot + m g l1 sin q`.
    pub fn feedforward_torque(&self, q: f64, qddot: f64) -> f64 {
        self.inertia() * qddot + self.m * self.g * self.l1 * q.sin()
    }

    /// Actuator force that holds the pendulum still at `theta`.
    pub fn static_hold_force(&self, theta: f64) -> f64 {
        self.m * self.g * self.l1 * theta.sin() / self.l2
    }

    /// Angular acceleration under a joint torque.
    pub fn acceleration(&self, theta: f64, theta_dot: f64, torque: f64) -> f64 {
        (torque - self.m * self.g * self.l1 * theta.sin() - self.c * theta_dot) / self.inertia()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
    pub params: PendulumParams,
}

impl PendulumState {
    pub fn new(params: PendulumParams, theta: f64, theta_dot: f64) -> Result<Self, PlantError> {
        params.validate()?;
        Ok(PendulumState {
            theta,
            theta_dot,
            params,
        })
    }

    /// Kinetic plus potential energy, zero at rest hanging down.
    pub fn energy(&self) -> f64 {
        let p = &self.params;
        0.5 * p.inertia() * self.theta_dot * self.theta_dot + p.m * p.g * p.l1 * (1.0 - self.theta.cos())
    }

    /// RK4 step with the actuator force `f_actuator` (N) acting at `l2`.
    pub fn step(&mut self, f_actuator: f64, dt: f64) {
        let p = self.params;
        let tau = p.l2 * f_actuator;
        let acc = |th: f64, w: f64| p.acceleration(th, w, tau);
        let (th, w) = (self.theta, self.theta_dot);
        let (k1t, k1w) = (w, acc(th, w));
        let (k2t, k2w) = (w + 0.5 * dt * k1w, acc(th + 0.5 * dt * k1t, w + 0.5 * dt * k1w));
        let (k3t, k3w) = (w + 0.5 * dt * k2w, acc(th + 0.5 * dt * k2t, w + 0.5 * dt * k2w));
        let (k4t, k4w) = (w + dt * k3w, acc(th + dt * k3t, w + dt * k3w));
        self.theta = th + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        self.theta_dot = w + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }
}

pub fn pendulum_step(s: &PendulumState, f_actuator: f64, dt: f64) -> PendulumState {
    let mut next = *s;
    next.step(f_actuator, dt);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_equilibrium() {
        let s = PendulumState::new(PendulumParams::default(), 0.0, 0.0).unwrap();
        let n = pendulum_step(&s, 0.0, 5e-5);
        assert_eq!((n.theta, n.theta_dot), (0.0, 0.0));
    }

    #[test]
    fn natural_frequency() {
        let p = PendulumParams::default();
        assert!((p.natural_frequency_hz() - 0.87).abs() < 0.01);
    }

    #[test]
    fn static_hold() {
        let p = PendulumParams::default();
        let f = p.static_hold_force(0.1);
        assert!((f - 46.2).abs() < 0.05, "{f}");
        let mut s = PendulumState::new(p, 0.1, 0.0).unwrap();
        for _ in 0..20_000 {
            s.step(f, 5e-5);
        }
        assert!((s.theta - 0.1).abs() < 1e-12);
    }

    #[test]
    fn energy_drift_per_step() {
        let mut s = PendulumState::new(PendulumParams::default(), 0.1, 0.0).unwrap();
        let e0 = s.energy();
        let mut prev = e0;
        for _ in 0..20_000 {
            s.step(0.0, 5e-5);
            let e = s.energy();
            assert!((e - prev).abs() / e0 < 1e-6);
            prev = e;
        }
    }

    #[test]
    fn energy_over_a_minute() {
        let mut s = PendulumState::new(PendulumParams::default(), 0.1, 0.0).unwrap();
        let e0 = s.energy();
        for _ in 0..1_200_000 {
            s.step(0.0, 5e-5);
        }
        assert!((s.energy() - e0).abs() / e0 < 1e-5);
    }

    #[test]
    fn rejects_bad_params() {
        let p = PendulumParams {
            l1: 0.0,
            ..Default::default()
        };
        assert!(PendulumState::new(p, 0.0, 0.0).is_err());
    }
}
