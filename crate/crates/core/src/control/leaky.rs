use super::ControlError;

/// Leaky integration of desired accelerations into position and velocity
/// setpoints. Each step:
///
/// ```text
/// qdot[k+1] = qddot[k] dT + (1 - alpha_v) qdot[k]
/// q[k+1]    = qdot[k] dT + (1 - alpha_p) q[k] + alpha_p q_measured[k]
/// ```
///
/// The position update uses the velocity from before this step's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakyState {
    pub q_bar_d: f64,
    pub qdot_bar_d: f64,
    pub alpha_v: f64,
    pub alpha_p: f64,
    pub dt: f64,
}

impl LeakyState {
    /// Starts at rest at position `q0`.
    pub fn new(alpha_v: f64, alpha_p: f64, dt: f64, q0: f64) -> Result<Self, ControlError> {
        for (name, a) in [("alpha_v", alpha_v), ("alpha_p", alpha_p)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(ControlError::InvalidGain { name, value: a });
            }
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ControlError::InvalidGain { name: "dt", value: dt });
        }
        Ok(LeakyState {
            q_bar_d: q0,
            qdot_bar_d: 0.0,
            alpha_v,
            alpha_p,
            dt,
        })
    }

    /// Advances one step; returns the new `(q_bar_d, qdot_bar_d)`.
    pub fn step(&mut self, qddot_d: f64, q_measured: f64) -> (f64, f64) {
        let qdot = self.qdot_bar_d;
        let q = self.q_bar_d;
        self.qdot_bar_d = qddot_d * self.dt + (1.0 - self.alpha_v) * qdot;
        self.q_bar_d = qdot * self.dt + (1.0 - self.alpha_p) * q + self.alpha_p * q_measured;
        (self.q_bar_d, self.qdot_bar_d)
    }
}

/// Free-function form of [`LeakyState::step`].
pub fn leaky_step(st: &mut LeakyState, qddot_d: f64, q_measured: f64) -> (f64, f64) {
    st.step(qddot_d, q_measured)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windup_without_leak() {
        let mut st = LeakyState::new(0.0, 0.0, 0.001, 0.0).unwrap();
        for _ in 0..25 {
            st.step(1.0, 0.1);
        }
        assert!((st.qdot_bar_d - 0.025).abs() < 1e-15);
        for _ in 0..25 {
            st.step(0.0, 0.1);
        }
        assert!((st.qdot_bar_d - 0.025).abs() < 1e-15);
    }

    #[test]
    fn full_position_snap() {
        let mut st = LeakyState::new(0.0, 1.0, 0.001, 0.0).unwrap();
        let (q, _) = st.step(0.0, 0.1);
        assert_eq!(q, 0.1);
    }

    #[test]
    fn full_velocity_leak() {
        let mut st = LeakyState::new(1.0, 0.0, 0.001, 0.0).unwrap();
        st.qdot_bar_d = 3.0;
        let (_, v) = st.step(0.0, 0.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn position_uses_pre_update_velocity() {
        let mut st = LeakyState::new(0.0, 0.0, 0.5, 0.0).unwrap();
        let (q, v) = st.step(2.0, 0.0);
        assert_eq!(q, 0.0);
        assert_eq!(v, 1.0);
        let (q, _) = st.step(0.0, 0.0);
        assert_eq!(q, 0.5);
    }

    #[test]
    fn rates_validated() {
        assert!(LeakyState::new(1.5, 0.0, 0.001, 0.0).is_err());
        assert!(LeakyState::new(0.5, -0.1, 0.001, 0.0).is_err());
        assert!(LeakyState::new(0.5, 0.5, 0.0, 0.0).is_err());
    }
}
