use super::ControlError;

/// Virtual spring (N/m) and damper (N s/m) in actuator space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceConfig {
    pub k: f64,
    pub b: f64,
}

impl ImpedanceConfig {
    pub fn new(k: f64, b: f64) -> Result<Self, ControlError> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(ControlError::InvalidGain { name: "k", value: k });
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(ControlError::InvalidGain { name: "b", value: b });
        }
        Ok(ImpedanceConfig { k, b })
    }
}

/// Desired actuator force:
/// `(q_a_d - q_a_hat) k + (qdot_a_d - qdot_a_hat) b + f_ff_d`.
pub fn impedance_step(
    cfg: &ImpedanceConfig,
    q_a_d: f64,
    qdot_a_d: f64,
    q_a_hat: f64,
    qdot_a_hat: f64,
    f_ff_d: f64,
) -> f64 {
    (q_a_d - q_a_hat) * cfg.k + (qdot_a_d - qdot_a_hat) * cfg.b + f_ff_d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn front_hip_gains() {
        let cfg = ImpedanceConfig::new(40.0, 5.0).unwrap();
        let f = impedance_step(&cfg, 0.01, 0.1, 0.0, 0.0, 100.0);
        assert!((f - 100.9).abs() < 1e-12);
    }

    #[test]
    fn zero_inputs() {
        let cfg = ImpedanceConfig::new(40.0, 5.0).unwrap();
        assert_eq!(impedance_step(&cfg, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn pure_feedforward() {
        let cfg = ImpedanceConfig::new(30.0, 2.5).unwrap();
        assert_eq!(impedance_step(&cfg, 0.3, -0.2, 0.3, -0.2, 250.0), 250.0);
    }

    #[test]
    fn negative_gains_rejected() {
        assert!(ImpedanceConfig::new(-1.0, 0.0).is_err());
        assert!(ImpedanceConfig::new(1.0, -0.5).is_err());
    }
}
