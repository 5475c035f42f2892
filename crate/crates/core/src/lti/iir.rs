use num_complex::Complex64;

use super::{LtiError, Polynomial};

/// Direct-form difference equation
///
/// ```text
/// y0 = b1 y1 + ... + bn yn + a0 x0 + a1 x1 + ... + an xn
/// ```
///
/// with `n + 1` input coefficients and `n` output coefficients. Histories
/// start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteIirFilter {
    a_hat: Vec<f64>,
    b_hat: Vec<f64>,
    /// x1..xn, most recent first.
    x_hist: Vec<f64>,
    /// y1..yn, most recent first.
    y_hist: Vec<f64>,
    period: f64,
}

impl DiscreteIirFilter {
    pub fn new(a_hat: Vec<f64>, b_hat: Vec<f64>, period: f64) -> Result<Self, LtiError> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(LtiError::InvalidPeriod(period));
        }
        if a_hat.len() != b_hat.len() + 1 {
            return Err(LtiError::InvalidArgument(format!(
                "expected {} input coefficients for {} output coefficients, got {}",
                b_hat.len() + 1,
                b_hat.len(),
                a_hat.len()
            )));
        }
        let n = b_hat.len();
        Ok(DiscreteIirFilter {
            a_hat,
            b_hat,
            x_hist: vec![0.0; n],
            y_hist: vec![0.0; n],
            period,
        })
    }

    /// Identity filter `y0 = x0`.
    pub fn pass_through(period: f64) -> Result<Self, LtiError> {
        Self::new(vec![1.0], Vec::new(), period)
    }

    pub fn a_hat(&self) -> &[f64] {
        &self.a_hat
    }

    pub fn b_hat(&self) -> &[f64] {
        &self.b_hat
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn order(&self) -> usize {
        self.b_hat.len()
    }

    pub fn input_history(&self) -> &[f64] {
        &self.x_hist
    }

    pub fn output_history(&self) -> &[f64] {
        &self.y_hist
    }

    /// Advances one sample and returns `y0`. NaN inputs propagate.
    pub fn step(&mut self, x0: f64) -> f64 {
        let mut y0 = self.a_hat[0] * x0;
        for i in 0..self.b_hat.len() {
            y0 += self.a_hat[i + 1] * self.x_hist[i] + self.b_hat[i] * self.y_hist[i];
        }
        if !self.b_hat.is_empty() {
            self.x_hist.rotate_right(1);
            self.x_hist[0] = x0;
            self.y_hist.rotate_right(1);
            self.y_hist[0] = y0;
        }
        y0
    }

    pub fn reset(&mut self) {
        self.x_hist.iter_mut().for_each(|v| *v = 0.0);
        self.y_hist.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Numerator in powers of `z^-1`: `a0 + a1 z^-1 + ...`.
    fn num_poly(&self) -> Polynomial {
        Polynomial::from_raw(self.a_hat.clone())
    }

    /// Denominator `1 - b1 z^-1 - ... - bn z^-n`, as a polynomial in z.
    fn den_poly(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.b_hat.len() + 1);
        c.push(1.0);
        c.extend(self.b_hat.iter().map(|b| -b));
        Polynomial::from_raw(c)
    }

    /// Transfer function value at a point `z` of the complex plane.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        // Both sides multiplied by z^n; padding zeros must stay in place.
        let num = horner(self.a_hat.iter().copied(), z);
        let den = horner(std::iter::once(1.0).chain(self.b_hat.iter().map(|b| -b)), z);
        num / den
    }

    /// Value at `z = 1`.
    pub fn dc_gain(&self) -> f64 {
        self.a_hat.iter().sum::<f64>() / (1.0 - self.b_hat.iter().sum::<f64>())
    }

    /// Roots of the characteristic polynomial in z.
    pub fn poles(&self) -> Vec<Complex64> {
        self.den_poly().roots()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        self.num_poly().roots()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

fn horner(coeffs: impl Iterator<Item = f64>, z: Complex64) -> Complex64 {
    coeffs.fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}
