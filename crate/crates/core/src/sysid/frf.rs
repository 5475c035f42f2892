use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::lti::FrequencyResponse;

use super::{SysidError, TimeSeries};

/// Welch-style averaging settings for [`empirical_frf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfOptions {
    pub segments: usize,
    /// Fraction of a segment shared with the next one.
    pub overlap: f64,
    /// Bins whose input auto-spectrum falls below this fraction of the
    /// largest one on the grid are marked invalid.
    pub relative_floor: f64,
}

impl Default for FrfOptions {
    fn default() -> Self {
        FrfOptions {
            segments: 8,
            overlap: 0.5,
            relative_floor: 1e-10,
        }
    }
}

/// H1 estimate with per-bin coherence. Invalid bins carry NaN values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFrf {
    pub response: FrequencyResponse,
    pub coherence: Vec<f64>,
    pub valid: Vec<bool>,
}

impl EmpiricalFrf {
    /// Only the valid bins.
    pub fn valid_response(&self) -> FrequencyResponse {
        let (f, v): (Vec<f64>, Vec<Complex64>) = self
            .response
            .freqs_hz()
            .iter()
            .zip(self.response.values())
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|((f, v), _)| (*f, *v))
            .unzip();
        FrequencyResponse::new(f, v).expect("subset of a valid grid")
    }

    /// `f_hz, mag_db, phase_deg, coherence`; invalid bins are written as NaN.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SysidError> {
        write_frf_csv(w, &self.response, Some(&self.coherence))
    }
}

pub fn write_frf_csv<W: Write>(
    w: W,
    response: &FrequencyResponse,
    coherence: Option<&[f64]>,
) -> Result<(), SysidError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["f_hz", "mag_db", "phase_deg", "coherence"])?;
    let mag = response.magnitude_db();
    let phase = response.phase_deg();
    for (k, f) in response.freqs_hz().iter().enumerate() {
        let c = coherence.map_or(1.0, |c| c[k]);
        out.write_record([
            format!("{f:.8e}"),
            format!("{:.8e}", mag[k]),
            format!("{:.8e}", phase[k]),
            format!("{c:.8e}"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an FRF CSV back into a response and its coherence column. Rows
/// with non-finite magnitude or phase are dropped.
pub fn read_frf_csv<R: Read>(r: R) -> Result<(FrequencyResponse, Vec<f64>), SysidError> {
    let mut rdr = csv::Reader::from_reader(r);
    let (mut f, mut m, mut p, mut c) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(SysidError::Parse(format!("row {}: expected 4 columns", line + 2)));
        }
        let mut vals = [0.0; 4];
        for (i, s) in rec.iter().enumerate() {
            vals[i] = s
                .trim()
                .parse::<f64>()
                .map_err(|e| SysidError::Parse(format!("row {}: {e}", line + 2)))?;
        }
        if vals[1].is_finite() && vals[2].is_finite() {
            f.push(vals[0]);
            m.push(vals[1]);
            p.push(vals[2]);
            c.push(vals[3]);
        }
    }
    let resp = FrequencyResponse::from_bode(f, &m, &p)?;
    Ok((resp, c))
}

pub fn empirical_frf(u: &TimeSeries, y: &TimeSeries, grid: &[f64]) -> Result<EmpiricalFrf, SysidError> {
    empirical_frf_with(u, y, grid, &FrfOptions::default())
}

/// H1 estimator: averaged cross-spectrum over averaged input auto-spectrum,
/// Hann-windowed overlapping segments, evaluated directly at each grid
/// frequency.
pub fn empirical_frf_with(
    u: &TimeSeries,
    y: &TimeSeries,
    grid: &[f64],
    opts: &FrfOptions,
) -> Result<EmpiricalFrf, SysidError> {
    if u.len() != y.len() || u.period() != y.period() {
        return Err(SysidError::InvalidArgument(
            "input and output records must share length and period".into(),
        ));
    }
    let period = u.period();
    let nyquist = 0.5 / period;
    if let Some(&f) = grid.iter().find(|f| **f >= nyquist) {
        return Err(SysidError::AboveNyquist { f_hz: f, nyquist });
    }
    if opts.segments == 0 || !(0.0..1.0).contains(&opts.overlap) {
        return Err(SysidError::InvalidArgument(
            "need at least one segment and overlap in [0, 1)".into(),
        ));
    }
    let n = u.len();
    let k = opts.segments as f64;
    let seg_len = (n as f64 / (1.0 + (k - 1.0) * (1.0 - opts.overlap))).floor() as usize;
    let hop = ((seg_len as f64) * (1.0 - opts.overlap)).floor().max(1.0) as usize;
    if seg_len < 2 {
        return Err(SysidError::InvalidArgument(format!(
            "{n} samples are too few for {} segments",
            opts.segments
        )));
    }
    let window: Vec<f64> = (0..seg_len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (seg_len - 1) as f64).cos())
        .collect();
    let segments: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.segments)
        .map(|s| {
            let start = s * hop;
            let us = &u.samples()[start..start + seg_len];
            let ys = &y.samples()[start..start + seg_len];
            (
                us.iter().zip(&window).map(|(a, w)| a * w).collect(),
                ys.iter().zip(&window).map(|(a, w)| a * w).collect(),
            )
        })
        .collect();

    let mut sxx = Vec::with_capacity(grid.len());
    let mut syy = Vec::with_capacity(grid.len());
    let mut sxy = Vec::with_capacity(grid.len());
    for &f in grid {
        let (mut axx, mut ayy, mut axy) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for (us, ys) in &segments {
            let (x, y) = dft_pair(us, ys, 2.0 * PI * f * period);
            axx += x.norm_sqr();
            ayy += y.norm_sqr();
            axy += x.conj() * y;
        }
        sxx.push(axx);
        syy.push(ayy);
        sxy.push(axy);
    }

    let peak = sxx.iter().cloned().fold(0.0, f64::max);
    let mut values = Vec::with_capacity(grid.len());
    let mut coherence = Vec::with_capacity(grid.len());
    let mut valid = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let ok = sxx[i] > 0.0 && sxx[i] > opts.relative_floor * peak;
        valid.push(ok);
        if ok {
            values.push(sxy[i] / sxx[i]);
            coherence.push(if syy[i] > 0.0 {
                sxy[i].norm_sqr() / (sxx[i] * syy[i])
            } else {
                0.0
            });
        } else {
            values.push(Complex64::new(f64::NAN, f64::NAN));
            coherence.push(f64::NAN);
        }
    }
    Ok(EmpiricalFrf {
        response: FrequencyResponse::new(grid.to_vec(), values)?,
        coherence,
        valid,
    })
}

/// `sum x[n] e^{-j theta n}` for two records at once. The rotating phasor
/// is re-seeded periodically to bound drift.
fn dft_pair(x: &[f64], y: &[f64], theta: f64) -> (Complex64, Complex64) {
    const RESEED: usize = 512;
    let step = Complex64::from_polar(1.0, -theta);
    let (mut sx, mut sy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (block, (xb, yb)) in x.chunks(RESEED).zip(y.chunks(RESEED)).enumerate() {
        let mut ph = Complex64::from_polar(1.0, -theta * (block * RESEED) as f64);
        for (a, b) in xb.iter().zip(yb) {
            sx += ph * a;
            sy += ph * b;
            ph *= step;
        }
    }
    (sx, sy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::log_grid;

    fn noise(n: usize) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn identity_and_gain() {
        let u = TimeSeries::new(0.001, noise(20_000)).unwrap();
        let y2 = TimeSeries::new(0.001, u.samples().iter().map(|v| 2.0 * v).collect()).unwrap();
        let grid = log_grid(1.0, 100.0, 10).unwrap();
        let id = empirical_frf(&u, &u, &grid).unwrap();
        for (m, p) in id.response.magnitude_db().iter().zip(id.response.phase_deg()) {
            assert!(m.abs() < 1e-9 && p.abs() < 1e-9);
        }
        let g = empirical_frf(&u, &y2, &grid).unwrap();
        for m in g.response.magnitude_db() {
            assert!((m - 6.0206).abs() < 1e-3);
        }
        assert!(g.coherence.iter().all(|c| (c - 1.0).abs() < 1e-9));
    }

    #[test]
    fn unexcited_bins_flagged() {
        let u: Vec<f64> = (0..8000).map(|k| (2.0 * PI * 5.0 * k as f64 * 0.001).sin()).collect();
        let u = TimeSeries::new(0.001, u).unwrap();
        let frf = empirical_frf(&u, &u, &[5.0, 200.0]).unwrap();
        assert!(frf.valid[0]);
        let zero = TimeSeries::new(0.001, vec![0.0; 8000]).unwrap();
        let frf = empirical_frf(&zero, &u, &[5.0]).unwrap();
        assert!(!frf.valid[0]);
        assert!(frf.response.values()[0].re.is_nan());
    }

    #[test]
    fn nyquist_and_length_checks() {
        let u = TimeSeries::new(0.001, vec![0.0; 100]).unwrap();
        let v = TimeSeries::new(0.001, vec![0.0; 99]).unwrap();
        assert!(empirical_frf(&u, &v, &[1.0]).is_err());
        assert!(matches!(
            empirical_frf(&u, &u, &[500.0]),
            Err(SysidError::AboveNyquist { .. })
        ));
    }

    #[test]
    fn csv_round_trip_drops_invalid() {
        let frf = EmpiricalFrf {
            response: FrequencyResponse::new(
                vec![1.0, 2.0, 3.0],
                vec![
                    Complex64::new(1.0, 1.0),
                    Complex64::new(f64::NAN, f64::NAN),
                    Complex64::new(0.5, 0.0),
                ],
            )
            .unwrap(),
            coherence: vec![0.99, f64::NAN, 1.0],
            valid: vec![true, false, true],
        };
        let mut buf = Vec::new();
        frf.write_csv(&mut buf).unwrap();
        let (resp, coh) = read_frf_csv(buf.as_slice()).unwrap();
        assert_eq!(resp.freqs_hz(), &[1.0, 3.0]);
        assert_eq!(coh, vec![0.99, 1.0]);
        assert!((resp.values()[0] - Complex64::new(1.0, 1.0)).norm() < 1e-7);
    }
}
