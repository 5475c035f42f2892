//! Real polynomials stored highest degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LtiError;

/// Real polynomial `c[0] x^n + c[1] x^(n-1) + ... + c[n]`.
///
/// Leading zeros are stripped on construction, so the leading coefficient of
/// a non-zero polynomial is always non-zero. The zero polynomial is `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self, LtiError> {
        let coeffs = coeffs.into();
        if coeffs.is_empty() {
            return Err(LtiError::EmptyPolynomial);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LtiError::NonFiniteCoefficient);
        }
        Ok(Self::from_raw(coeffs))
    }

    /// Builds without validation; strips leading zeros.
    pub(crate) fn from_raw(mut coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        match first {
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    /// Polynomial with the given roots and leading coefficient 1.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Polynomial::constant(1.0), |acc, &r| {
            acc.mul(&Polynomial::from_raw(vec![1.0, -r]))
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Constant term, i.e. the value at zero.
    pub fn trailing(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        Polynomial::from_raw(convolve(&self.coeffs, &other.coeffs))
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::from_raw(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }

    /// Coefficients left-padded with zeros to `degree + 1` entries.
    pub fn padded(&self, degree: usize) -> Vec<f64> {
        let mut out = vec![0.0; (degree + 1).saturating_sub(self.coeffs.len())];
        out.extend_from_slice(&self.coeffs);
        out
    }

    /// `q(x) = p(x + 1)`, by repeated synthetic division.
    pub fn taylor_shift(&self) -> Polynomial {
        taylor_shift(self)
    }

    /// `q(x) = p(x + a)`.
    pub fn shift_by(&self, a: f64) -> Polynomial {
        let mut c = self.coeffs.clone();
        shift_in_place(&mut c, a);
        Polynomial::from_raw(c)
    }

    /// Complex roots from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            companion[(0, j)] = -self.coeffs[j + 1] / lead;
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }
}

/// Taylor shift `p(x) -> p(x + 1)` using Horner's scheme.
///
/// Each pass of synthetic division by `(x - 1)` peels off one coefficient of
/// the shifted polynomial; no binomial coefficients are formed.
pub fn taylor_shift(p: &Polynomial) -> Polynomial {
    let mut c = p.coeffs.clone();
    shift_in_place(&mut c, 1.0);
    Polynomial::from_raw(c)
}

/// In-place `c(x) -> c(x + a)` on a highest-first coefficient slice.
/// Keeps the slice length, so leading zeros used as padding survive.
pub(crate) fn shift_in_place(c: &mut [f64], a: f64) {
    let n = c.len().saturating_sub(1);
    for i in 0..n {
        for j in 1..=(n - i) {
            c[j] += a * c[j - 1];
        }
    }
}

pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    #[test]
    fn shift_square() {
        assert_eq!(taylor_shift(&poly(&[1.0, 0.0, 0.0])).coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn shift_constant() {
        assert_eq!(taylor_shift(&poly(&[1.0])).coeffs(), &[1.0]);
    }

    #[test]
    fn shift_cubic() {
        // 2(x+1)^3 + (x+1) + 5 = 2x^3 + 6x^2 + 7x + 8
        assert_eq!(
            taylor_shift(&poly(&[2.0, 0.0, 1.0, 5.0])).coeffs(),
            &[2.0, 6.0, 7.0, 8.0]
        );
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(Polynomial::new(vec![]), Err(LtiError::EmptyPolynomial)));
    }

    #[test]
    fn leading_zeros_stripped() {
        let p = poly(&[0.0, 0.0, 3.0, 1.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(poly(&[0.0, 0.0]).coeffs(), &[0.0]);
        assert!(poly(&[0.0]).is_zero());
    }

    #[test]
    fn roots_of_known_cubic() {
        let p = Polynomial::from_real_roots(&[-1.0, -2.0, -3.0]);
        let mut r: Vec<f64> = p.roots().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in r.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_by_negative_undoes_shift() {
        let p = poly(&[0.5, -1.0, 2.0, 3.0]);
        let back = p.taylor_shift().shift_by(-1.0);
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
