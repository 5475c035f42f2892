use std::f64::consts::PI;

use num_complex::Complex64;

use super::{LtiError, Polynomial};

/// Rational transfer function `num(s) / den(s)` in the Laplace variable.
///
/// Construction enforces causality (`deg num <= deg den`) and a non-zero
/// denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl ContinuousTransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        if !num.is_zero() && num.degree() > den.degree() {
            return Err(LtiError::NonCausal {
                num_degree: num.degree(),
                den_degree: den.degree(),
            });
        }
        Ok(ContinuousTransferFunction { num, den })
    }

    /// Shorthand from highest-first coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, LtiError> {
        Self::new(Polynomial::new(num.to_vec())?, Polynomial::new(den.to_vec())?)
    }

    pub fn unity() -> Self {
        ContinuousTransferFunction {
            num: Polynomial::constant(1.0),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// System order, the degree of the denominator.
    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// Value at `s = j 2 pi f`.
    pub fn eval_hz(&self, f_hz: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, 2.0 * PI * f_hz))
    }

    /// `H(0)`; infinite when the origin is a pole.
    pub fn dc_gain(&self) -> f64 {
        self.num.trailing() / self.den.trailing()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    /// Series connection `self * other`.
    pub fn series(&self, other: &ContinuousTransferFunction) -> Result<Self, LtiError> {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// `self / other`, formed as one rational function; errors if the
    /// quotient is not causal.
    pub fn divide(&self, other: &ContinuousTransferFunction) -> Result<Self, LtiError> {
        if other.num.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        Self::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// Same system with a monic denominator.
    pub fn normalized(&self) -> Self {
        let k = 1.0 / self.den.leading();
        ContinuousTransferFunction {
            num: self.num.scale(k),
            den: self.den.scale(k),
        }
    }
}

/// Analog Butterworth low-pass of the given order, cutoff in rad/s.
pub fn butterworth_lowpass(order: usize, omega_c: f64) -> Result<ContinuousTransferFunction, LtiError> {
    if order == 0 {
        return Err(LtiError::InvalidArgument("butterworth order must be >= 1".into()));
    }
    if !(omega_c > 0.0) {
        return Err(LtiError::InvalidArgument("cutoff must be positive".into()));
    }
    // Conjugate pole pairs give real quadratic factors.
    let mut den = Polynomial::constant(1.0);
    let n = order as f64;
    for k in 0..order / 2 {
        let theta = PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
        let re = omega_c * theta.cos();
        den = den.mul(&Polynomial::from_raw(vec![1.0, -2.0 * re, omega_c * omega_c]));
    }
    if order % 2 == 1 {
        den = den.mul(&Polynomial::from_raw(vec![1.0, omega_c]));
    }
    ContinuousTransferFunction::new(Polynomial::constant(omega_c.powi(order as i32)), den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_causal() {
        let err = ContinuousTransferFunction::from_coeffs(&[1.0, 0.0], &[1.0]).unwrap_err();
        assert!(matches!(
            err,
            LtiError::NonCausal {
                num_degree: 1,
                den_degree: 0
            }
        ));
    }

    #[test]
    fn rejects_zero_denominator() {
        let err = ContinuousTransferFunction::from_coeffs(&[1.0], &[0.0]).unwrap_err();
        assert!(matches!(err, LtiError::ZeroDenominator));
    }

    #[test]
    fn butterworth_half_power_at_cutoff() {
        for order in 1..=8 {
            let wc = 2.0 * PI * 25.0;
            let h = butterworth_lowpass(order, wc).unwrap();
            let mag = h.eval(Complex64::new(0.0, wc)).norm();
            assert!((mag - 0.5f64.sqrt()).abs() < 1e-12, "order {order}: {mag}");
            assert!((h.dc_gain() - 1.0).abs() < 1e-12);
            assert!(h.is_stable());
        }
    }

    #[test]
    fn divide_builds_single_rational() {
        let a = ContinuousTransferFunction::from_coeffs(&[2.0], &[1.0, 3.0]).unwrap();
        let b = ContinuousTransferFunction::from_coeffs(&[4.0], &[1.0, 5.0]).unwrap();
        let q = a.divide(&b).unwrap();
        let s = Complex64::new(0.3, 1.7);
        assert!((q.eval(s) - a.eval(s) / b.eval(s)).norm() < 1e-12);
    }
}
