use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ContinuousTransferFunction, DiscreteIirFilter, LtiError};

/// Default density of [`log_grid`].
pub const DEFAULT_POINTS_PER_DECADE: usize = 200;

/// Complex response sampled on a strictly increasing positive frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    freqs_hz: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(freqs_hz: Vec<f64>, values: Vec<Complex64>) -> Result<Self, LtiError> {
        check_grid(&freqs_hz)?;
        if freqs_hz.len() != values.len() {
            return Err(LtiError::InvalidArgument(format!(
                "{} frequencies but {} values",
                freqs_hz.len(),
                values.len()
            )));
        }
        Ok(FrequencyResponse { freqs_hz, values })
    }

    /// Builds from magnitude (dB) and phase (degrees) columns.
    pub fn from_bode(freqs_hz: Vec<f64>, mag_db: &[f64], phase_deg: &[f64]) -> Result<Self, LtiError> {
        if mag_db.len() != phase_deg.len() {
            return Err(LtiError::InvalidArgument("magnitude/phase length mismatch".into()));
        }
        let values = mag_db
            .iter()
            .zip(phase_deg)
            .map(|(m, p)| Complex64::from_polar(10f64.powf(m / 20.0), p.to_radians()))
            .collect();
        Self::new(freqs_hz, values)
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    /// Phase in degrees, unwrapped along the grid starting from the
    /// principal value at the first frequency.
    pub fn phase_deg(&self) -> Vec<f64> {
        unwrap_phase(self.values.iter().map(|v| v.arg()))
            .into_iter()
            .map(f64::to_degrees)
            .collect()
    }

    /// Keeps the points whose frequency lies in `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> FrequencyResponse {
        let (freqs_hz, values) = self
            .freqs_hz
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, v)| (*f, *v))
            .unzip();
        FrequencyResponse { freqs_hz, values }
    }
}

/// Largest absolute magnitude (dB) and phase (degrees) differences between
/// two responses on the same grid.
pub fn max_bode_deviation(a: &FrequencyResponse, b: &FrequencyResponse) -> (f64, f64) {
    let mag = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (20.0 * (x.norm() / y.norm()).log10()).abs())
        .fold(0.0, f64::max);
    // The ratio's angle avoids unwrap offsets between the two curves.
    let phase = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x / y).arg().to_degrees().abs())
        .fold(0.0, f64::max);
    (mag, phase)
}

pub(crate) fn unwrap_phase(phases: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for p in phases {
        if p.is_nan() {
            out.push(p);
            continue;
        }
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            } else if d < -PI {
                offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

fn check_grid(freqs_hz: &[f64]) -> Result<(), LtiError> {
    if freqs_hz.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(LtiError::InvalidGrid("frequencies must be finite and positive".into()));
    }
    if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LtiError::InvalidGrid("frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// Log-spaced grid from `f_lo` to `f_hi` inclusive.
pub fn log_grid(f_lo: f64, f_hi: f64, points_per_decade: usize) -> Result<Vec<f64>, LtiError> {
    if !(f_lo > 0.0) || !(f_hi > f_lo) || points_per_decade == 0 {
        return Err(LtiError::InvalidGrid(format!(
            "need 0 < f_lo < f_hi, got {f_lo}..{f_hi}"
        )));
    }
    let decades = (f_hi / f_lo).log10();
    let n = ((decades * points_per_decade as f64).round() as usize).max(1);
    let step = decades / n as f64;
    Ok((0..=n)
        .map(|i| {
            if i == n {
                f_hi
            } else {
                f_lo * 10f64.powf(i as f64 * step)
            }
        })
        .collect())
}

/// Systems with a frequency response.
pub trait LinearSystem {
    fn response_at(&self, f_hz: f64) -> Result<Complex64, LtiError>;
}

impl LinearSystem for ContinuousTransferFunction {
    fn response_at(&self, f_hz: f64) -> Result<Complex64, LtiError> {
        Ok(self.eval_hz(f_hz))
    }
}

impl LinearSystem for DiscreteIirFilter {
    fn response_at(&self, f_hz: f64) -> Result<Complex64, LtiError> {
        let nyquist = 0.5 / self.period();
        if f_hz >= nyquist {
            return Err(LtiError::AboveNyquist { f_hz, nyquist });
        }
        let z = Complex64::from_polar(1.0, 2.0 * PI * f_hz * self.period());
        Ok(self.eval_z(z))
    }
}

/// Evaluates `sys` on a caller-supplied grid: `s = j w` for continuous
/// systems, `z = exp(j w T)` for discrete ones.
pub fn freq_response<S: LinearSystem + ?Sized>(sys: &S, freqs_hz: &[f64]) -> Result<FrequencyResponse, LtiError> {
    check_grid(freqs_hz)?;
    let values = freqs_hz
        .iter()
        .map(|&f| sys.response_at(f))
        .collect::<Result<Vec<_>, _>>()?;
    FrequencyResponse::new(freqs_hz.to_vec(), values)
}
