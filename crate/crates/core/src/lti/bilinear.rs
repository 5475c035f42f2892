//! Tustin discretization through Horner-style polynomial maps.
//!
//! Each polynomial `F(s)` of the transfer function is rewritten in `w = 1/s`
//! and pushed through the chain
//!
//! ```text
//! F(x) -> F(x + 1) -> F(1/x + 1) -> F(2/x + 1) -> F((T/2)(2/(z - 1) + 1))
//! ```
//!
//! which realizes `1/s = (T/2) (z + 1)/(z - 1)` using only Taylor shifts,
//! coefficient reversals and per-coefficient scalings. Numerator and
//! denominator share the same padding degree so the common factors cancel.

use super::polynomial::shift_in_place;
use super::{ContinuousTransferFunction, DiscreteIirFilter, LtiError};

/// Discretizes `tf` at sample period `period` (seconds) with the bilinear map
/// `s = (2/T) (z - 1)/(z + 1)`.
pub fn bilinear_discretize(tf: &ContinuousTransferFunction, period: f64) -> Result<DiscreteIirFilter, LtiError> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(LtiError::InvalidPeriod(period));
    }
    let n = tf.order();
    if !tf.num().is_zero() && tf.num().degree() > n {
        return Err(LtiError::NonCausal {
            num_degree: tf.num().degree(),
            den_degree: n,
        });
    }
    let num_z = davies_map(&tf.num().padded(n), period);
    let den_z = davies_map(&tf.den().padded(n), period);

    let lead = den_z[0];
    let scale = den_z.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if lead == 0.0 || !lead.is_finite() || lead.abs() <= scale * f64::EPSILON {
        return Err(LtiError::DegenerateOutputCoefficient);
    }
    let a_hat: Vec<f64> = num_z.iter().map(|c| c / lead).collect();
    let b_hat: Vec<f64> = den_z[1..].iter().map(|c| -c / lead).collect();
    DiscreteIirFilter::new(a_hat, b_hat, period)
}

/// Maps the highest-first coefficients of `F(s)` (length `n + 1`) to the
/// highest-first coefficients of `(z - 1)^n F(s)|_{1/s = (T/2)(z+1)/(z-1)}`
/// up to a constant factor shared by every polynomial of the same degree.
fn davies_map(s_coeffs: &[f64], period: f64) -> Vec<f64> {
    let n = s_coeffs.len() - 1;
    // s^n G(1/s) = F(s): reversing the list re-expresses F in w = 1/s.
    let mut c: Vec<f64> = s_coeffs.iter().rev().copied().collect();

    // G(w) -> G((T/2) u)
    let half_t = 0.5 * period;
    for (i, coeff) in c.iter_mut().enumerate() {
        *coeff *= half_t.powi((n - i) as i32);
    }
    // -> G(u + 1)
    shift_in_place(&mut c, 1.0);
    // -> x^n G(1/x + 1)
    c.reverse();
    // -> x^n G(2/x + 1)
    for (i, coeff) in c.iter_mut().enumerate() {
        *coeff *= 2f64.powi(i as i32);
    }
    // x = z - 1
    shift_in_place(&mut c, -1.0);
    c
}
