use std::f64::consts::SQRT_2;

use crate::lti::ContinuousTransferFunction;

use super::ControlError;

/// Numerator gain of the identified testbed model.
pub const NOMINAL_PLANT_GAIN: f64 = 208.8;
/// Denominator of the identified testbed model, highest power first.
pub const NOMINAL_PLANT_DEN: [f64; 4] = [0.01, 1.13, 23.04, 987.0];

/// Motor current (A) to output force (model units) of the locked testbed.
pub fn nominal_plant() -> ContinuousTransferFunction {
    ContinuousTransferFunction::from_coeffs(&[NOMINAL_PLANT_GAIN], &NOMINAL_PLANT_DEN).expect("nominal plant is valid")
}

/// Third-order low-pass used on both observer channels:
///
/// `w^3 / (s^3 + (sqrt2 + 1) w s^2 + (1 + sqrt2) w^2 s + w^3)`
pub fn q_filter(omega_c: f64) -> Result<ContinuousTransferFunction, ControlError> {
    if !(omega_c > 0.0) || !omega_c.is_finite() {
        return Err(ControlError::InvalidGain {
            name: "omega_c",
            value: omega_c,
        });
    }
    let w = omega_c;
    Ok(ContinuousTransferFunction::from_coeffs(
        &[w * w * w],
        &[1.0, (SQRT_2 + 1.0) * w, (1.0 + SQRT_2) * w * w, w * w * w],
    )?)
}

/// Disturbance observer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DobConfig {
    /// Q-filter cutoff, rad/s.
    pub omega_c: f64,
    /// Feedback blend, clamped to `[0, 1]`.
    pub gamma: f64,
    /// Nominal plant `P_n(s)`.
    pub plant: ContinuousTransferFunction,
}

impl DobConfig {
    pub fn new(omega_c: f64, gamma: f64, plant: ContinuousTransferFunction) -> Self {
        DobConfig {
            omega_c,
            gamma: clamp_gamma(gamma),
            plant,
        }
    }

    /// Observer around the nominal testbed model.
    pub fn nominal(omega_c: f64, gamma: f64) -> Self {
        Self::new(omega_c, gamma, nominal_plant())
    }

    pub fn q_filter(&self) -> Result<ContinuousTransferFunction, ControlError> {
        q_filter(self.omega_c)
    }

    /// `Q_d(s) / P_n(s)` as one rational function.
    pub fn inverse_plant(&self) -> Result<ContinuousTransferFunction, ControlError> {
        self.q_filter()?
            .divide(&self.plant)
            .map_err(|_| ControlError::NonCausalObserver {
                q_degree: 3,
                plant_relative_degree: self.plant.den().degree() - self.plant.num().degree(),
            })
    }
}

pub(crate) fn clamp_gamma(gamma: f64) -> f64 {
    if gamma.is_nan() {
        0.0
    } else {
        gamma.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;

    #[test]
    fn q_filter_anchor_values() {
        let wc = 2.0 * PI * 25.0;
        let q = q_filter(wc).unwrap();
        assert_eq!(q.eval(Complex64::new(0.0, 0.0)).norm(), 1.0);
        assert!((q.eval(Complex64::new(0.0, wc)).norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gamma_clamped() {
        assert_eq!(DobConfig::nominal(100.0, 1.7).gamma, 1.0);
        assert_eq!(DobConfig::nominal(100.0, -0.2).gamma, 0.0);
        assert_eq!(DobConfig::nominal(100.0, 0.4).gamma, 0.4);
    }

    #[test]
    fn inverse_plant_is_biproper() {
        let inv = DobConfig::nominal(2.0 * PI * 25.0, 1.0).inverse_plant().unwrap();
        assert_eq!(inv.num().degree(), 3);
        assert_eq!(inv.den().degree(), 3);
        let dc = inv.dc_gain();
        assert!((dc - 987.0 / 208.8).abs() < 1e-12);
    }

    #[test]
    fn plant_with_excess_relative_degree_is_rejected() {
        let plant = ContinuousTransferFunction::from_coeffs(&[1.0], &[1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let dob = DobConfig::new(10.0, 1.0, plant);
        assert!(matches!(
            dob.inverse_plant(),
            Err(ControlError::NonCausalObserver {
                plant_relative_degree: 4,
                ..
            })
        ));
    }
}
