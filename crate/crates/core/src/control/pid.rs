use crate::lti::ContinuousTransferFunction;

use super::ControlError;

/// Scale between the tabulated `lambda_c` and the derivative filter pole.
pub const LAMBDA_C_SCALE: f64 = 1e-3;

/// PID gains with a first-order filtered derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidConfig {
    pub k_p: f64,
    pub k_i: f64,
    pub k_d: f64,
    /// Derivative filter pole, rad/s.
    pub lambda: f64,
}

impl PidConfig {
    pub fn new(k_p: f64, k_i: f64, k_d: f64, lambda: f64) -> Result<Self, ControlError> {
        let cfg = PidConfig { k_p, k_i, k_d, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Gains in the tabulated convention, `lambda = 1e-3 * lambda_c`.
    pub fn from_lambda_c(k_p: f64, k_i: f64, k_d: f64, lambda_c: f64) -> Result<Self, ControlError> {
        Self::new(k_p, k_i, k_d, LAMBDA_C_SCALE * lambda_c)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        for (name, v) in [("k_p", self.k_p), ("k_i", self.k_i), ("k_d", self.k_d)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ControlError::InvalidGain { name, value: v });
            }
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(ControlError::InvalidGain {
                name: "lambda",
                value: self.lambda,
            });
        }
        Ok(())
    }

    /// `C(s) = k_p + k_i/s + k_d s lambda/(s + lambda)` over the common
    /// denominator `s^2 + lambda s`.
    pub fn transfer_function(&self) -> ContinuousTransferFunction {
        let PidConfig { k_p, k_i, k_d, lambda } = *self;
        ContinuousTransferFunction::from_coeffs(
            &[k_p + k_d * lambda, k_p * lambda + k_i, k_i * lambda],
            &[1.0, lambda, 0.0],
        )
        .expect("PID rational form is causal with a non-zero denominator")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn front_hip_numerator() {
        let pid = PidConfig::from_lambda_c(15.0, 4.0, 2.5, 3.5).unwrap();
        assert!((pid.lambda - 0.0035).abs() < 1e-15);
        let num = pid.transfer_function().num().coeffs().to_vec();
        let want = [15.00875, 4.0525, 0.014];
        for (g, w) in num.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        assert_eq!(pid.transfer_function().den().coeffs(), &[1.0, 0.0035, 0.0]);
    }

    #[test]
    fn rejects_negative_or_zero_lambda() {
        assert!(PidConfig::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(PidConfig::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PidConfig::new(1.0, f64::NAN, 0.0, 1.0).is_err());
    }
}
