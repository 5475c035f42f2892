use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::lti::{ContinuousTransferFunction, FrequencyResponse, Polynomial};

use super::SysidError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Sanathanan-Koerner reweighting passes after the Levy solve.
    pub sk_iterations: usize,
    /// Largest acceptable singular value ratio of the scaled system.
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            sk_iterations: 0,
            max_condition: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFit {
    pub tf: ContinuousTransferFunction,
    /// `||H - H_fit|| / ||H||` over the bins used.
    pub residual: f64,
    pub condition: f64,
    pub bins: usize,
}

pub fn fit_rational(frf: &FrequencyResponse, num_order: usize, den_order: usize) -> Result<RationalFit, SysidError> {
    fit_rational_with(frf, num_order, den_order, &FitOptions::default())
}

/// Linearized complex least squares with the denominator's constant term
/// pinned to one:
///
/// ```text
/// N(jw) - H(jw) (D(jw) - 1) = H(jw)
/// ```
///
/// Frequencies are scaled by their median and columns by their norms before
/// an SVD solve. Non-finite bins are skipped.
pub fn fit_rational_with(
    frf: &FrequencyResponse,
    num_order: usize,
    den_order: usize,
    opts: &FitOptions,
) -> Result<RationalFit, SysidError> {
    if num_order > den_order {
        return Err(SysidError::InvalidArgument(format!(
            "numerator order {num_order} exceeds denominator order {den_order}"
        )));
    }
    let data: Vec<(f64, Complex64)> = frf
        .freqs_hz()
        .iter()
        .zip(frf.values())
        .filter(|(_, h)| h.re.is_finite() && h.im.is_finite())
        .map(|(f, h)| (2.0 * std::f64::consts::PI * f, *h))
        .collect();
    let unknowns = num_order + 1 + den_order;
    let needed = 2 * unknowns;
    if data.len() < needed {
        return Err(SysidError::InsufficientData {
            bins: data.len(),
            needed,
        });
    }

    let mut omegas: Vec<f64> = data.iter().map(|(w, _)| *w).collect();
    omegas.sort_by(f64::total_cmp);
    let w0 = omegas[omegas.len() / 2];

    let mut weights = vec![1.0; data.len()];
    let mut solution = None;
    for _ in 0..=opts.sk_iterations {
        let (coeffs, condition) = solve_weighted(&data, w0, num_order, den_order, &weights, opts)?;
        let (num, den) = split(&coeffs, num_order);
        for ((w, _), wt) in data.iter().zip(weights.iter_mut()) {
            let s = Complex64::new(0.0, w / w0);
            *wt = 1.0 / eval_ascending(&den, s).norm();
        }
        solution = Some((num, den, condition));
    }
    let (num, den, condition) = solution.expect("at least one pass");

    // Undo the frequency scaling: coefficient of s'^i becomes that of s^i / w0^i.
    let unscale = |c: &[f64]| -> Vec<f64> { c.iter().enumerate().rev().map(|(i, v)| v / w0.powi(i as i32)).collect() };
    let tf = ContinuousTransferFunction::new(Polynomial::new(unscale(&num))?, Polynomial::new(unscale(&den))?)?;

    let (mut err, mut norm) = (0.0, 0.0);
    for (w, h) in &data {
        let fit = tf.eval(Complex64::new(0.0, *w));
        err += (h - fit).norm_sqr();
        norm += h.norm_sqr();
    }
    Ok(RationalFit {
        tf,
        residual: (err / norm).sqrt(),
        condition,
        bins: data.len(),
    })
}

fn solve_weighted(
    data: &[(f64, Complex64)],
    w0: f64,
    m: usize,
    n: usize,
    weights: &[f64],
    opts: &FitOptions,
) -> Result<(Vec<f64>, f64), SysidError> {
    let cols = m + 1 + n;
    let rows = 2 * data.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (r, ((w, h), wt)) in data.iter().zip(weights).enumerate() {
        let s = Complex64::new(0.0, w / w0);
        let mut p = Complex64::new(1.0, 0.0);
        for i in 0..=n.max(m) {
            if i <= m {
                let v = p * wt;
                a[(2 * r, i)] = v.re;
                a[(2 * r + 1, i)] = v.im;
            }
            if i >= 1 && i <= n {
                let v = -h * p * wt;
                a[(2 * r, m + i)] = v.re;
                a[(2 * r + 1, m + i)] = v.im;
            }
            p *= s;
        }
        let v = h * wt;
        rhs[2 * r] = v.re;
        rhs[2 * r + 1] = v.im;
    }
    let scales: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    if let Some(j) = scales.iter().position(|s| *s == 0.0 || !s.is_finite()) {
        return Err(SysidError::IllConditioned {
            condition: f64::INFINITY,
            detail: format!("column {j} is empty"),
        });
    }
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let min = sv.min();
    let condition = max / min;
    if !(condition <= opts.max_condition) {
        return Err(SysidError::IllConditioned {
            condition,
            detail: format!("singular values span [{min:e}, {max:e}]"),
        });
    }
    let x = svd.solve(&rhs, 0.0).map_err(|e| SysidError::IllConditioned {
        condition,
        detail: e.to_string(),
    })?;
    Ok(((0..cols).map(|j| x[j] / scales[j]).collect(), condition))
}

/// Numerator and denominator, lowest power first, with the pinned constant.
fn split(coeffs: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let num = coeffs[..=m].to_vec();
    let mut den = vec![1.0];
    den.extend_from_slice(&coeffs[m + 1..]);
    (num, den)
}

fn eval_ascending(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * s + v)
}
