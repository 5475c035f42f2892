use std::f64::consts::PI;

use super::{SysidError, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChirpKind {
    /// `A sin(omega_o t^2)`.
    Linear { omega_o: f64 },
    /// Frequency rising geometrically from `f_start` to `f_end` over the
    /// duration.
    Exponential { f_start: f64, f_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    pub kind: ChirpKind,
    pub amplitude: f64,
    pub duration: f64,
    /// Sample period of generated series, s.
    pub period: f64,
}

impl ChirpSpec {
    pub fn linear(amplitude: f64, omega_o: f64, duration: f64, period: f64) -> Result<Self, SysidError> {
        let spec = ChirpSpec {
            kind: ChirpKind::Linear { omega_o },
            amplitude,
            duration,
            period,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exponential(
        amplitude: f64,
        f_start: f64,
        f_end: f64,
        duration: f64,
        period: f64,
    ) -> Result<Self, SysidError> {
        let spec = ChirpSpec {
            kind: ChirpKind::Exponential { f_start, f_end },
            amplitude,
            duration,
            period,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SysidError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SysidError::InvalidArgument(format!(
                    "chirp {name} must be positive, got {v}"
                )))
            }
        };
        positive("amplitude", self.amplitude)?;
        positive("duration", self.duration)?;
        positive("period", self.period)?;
        match self.kind {
            ChirpKind::Linear { omega_o } => positive("rate", omega_o)?,
            ChirpKind::Exponential { f_start, f_end } => {
                positive("start frequency", f_start)?;
                positive("end frequency", f_end)?;
            }
        }
        let nyquist = 0.5 / self.period;
        let f_max = self.max_frequency_hz();
        if f_max >= nyquist {
            return Err(SysidError::AboveNyquist { f_hz: f_max, nyquist });
        }
        Ok(())
    }

    /// Highest instantaneous frequency reached during the sweep.
    pub fn max_frequency_hz(&self) -> f64 {
        match self.kind {
            ChirpKind::Linear { .. } => self.instantaneous_frequency_hz(self.duration),
            ChirpKind::Exponential { f_start, f_end } => f_start.max(f_end),
        }
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        match self.kind {
            ChirpKind::Linear { omega_o } => omega_o * t * t,
            ChirpKind::Exponential { f_start, f_end } => {
                let (k, d) = (f_end / f_start, self.duration);
                if k == 1.0 {
                    2.0 * PI * f_start * t
                } else {
                    2.0 * PI * f_start * d / k.ln() * (k.powf(t / d) - 1.0)
                }
            }
        }
    }

    fn phase_rate(&self, t: f64) -> f64 {
        match self.kind {
            ChirpKind::Linear { omega_o } => 2.0 * omega_o * t,
            ChirpKind::Exponential { f_start, f_end } => 2.0 * PI * f_start * (f_end / f_start).powf(t / self.duration),
        }
    }

    fn phase_accel(&self, t: f64) -> f64 {
        match self.kind {
            ChirpKind::Linear { omega_o } => 2.0 * omega_o,
            ChirpKind::Exponential { f_start, f_end } => self.phase_rate(t) * (f_end / f_start).ln() / self.duration,
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.amplitude * self.phase_at(t).sin()
    }

    /// For the linear chirp, `2 A omega_o t cos(omega_o t^2)`.
    pub fn velocity_at(&self, t: f64) -> f64 {
        self.amplitude * self.phase_rate(t) * self.phase_at(t).cos()
    }

    /// For the linear chirp,
    /// `2 A omega_o cos(omega_o t^2) - 4 A omega_o^2 t^2 sin(omega_o t^2)`.
    pub fn acceleration_at(&self, t: f64) -> f64 {
        let (ph, w) = (self.phase_at(t), self.phase_rate(t));
        self.amplitude * (self.phase_accel(t) * ph.cos() - w * w * ph.sin())
    }

    /// Instantaneous frequency, Hz. `omega_o t / pi` for the linear chirp.
    pub fn instantaneous_frequency_hz(&self, t: f64) -> f64 {
        self.phase_rate(t) / (2.0 * PI)
    }

    /// Time at which the sweep passes `f_hz`, if it does.
    pub fn crossing_time(&self, f_hz: f64) -> Option<f64> {
        let t = match self.kind {
            ChirpKind::Linear { omega_o } => PI * f_hz / omega_o,
            ChirpKind::Exponential { f_start, f_end } => {
                if f_start == f_end {
                    return None;
                }
                self.duration * (f_hz / f_start).ln() / (f_end / f_start).ln()
            }
        };
        (t >= 0.0 && t <= self.duration).then_some(t)
    }

    /// Number of samples in `[0, duration)`.
    pub fn len(&self) -> usize {
        (self.duration / self.period).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn series(&self, f: impl Fn(f64) -> f64) -> TimeSeries {
        let samples = (0..self.len()).map(|k| f(k as f64 * self.period)).collect();
        TimeSeries::new(self.period, samples).expect("validated chirp has samples")
    }

    pub fn samples(&self) -> TimeSeries {
        self.series(|t| self.value_at(t))
    }

    /// Closed-form velocity and acceleration series on the same grid.
    pub fn derivative_series(&self) -> (TimeSeries, TimeSeries) {
        (
            self.series(|t| self.velocity_at(t)),
            self.series(|t| self.acceleration_at(t)),
        )
    }
}
