use std::io::{Read, Write};

use super::SysidError;

/// Uniformly sampled scalar record starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    period: f64,
    samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self, SysidError> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(SysidError::InvalidArgument(format!(
                "sample period must be positive, got {period}"
            )));
        }
        if samples.is_empty() {
            return Err(SysidError::InvalidArgument(
                "time series needs at least one sample".into(),
            ));
        }
        Ok(TimeSeries { period, samples })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.period
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SysidError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "value"])?;
        for (k, v) in self.samples.iter().enumerate() {
            out.write_record([format!("{:.8e}", self.time(k)), format!("{v:.8e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a `(t, value)` CSV. The period is taken from the first two
    /// timestamps and every later timestamp must sit on that grid.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, SysidError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(SysidError::Parse(format!("row {}: expected 2 columns", line + 2)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| SysidError::Parse(format!("row {}: {e}", line + 2)))
            };
            t.push(parse(&rec[0])?);
            v.push(parse(&rec[1])?);
        }
        let period = match t.len() {
            0 => return Err(SysidError::Parse("no samples".into())),
            1 => 1.0,
            _ => t[1] - t[0],
        };
        for (k, tk) in t.iter().enumerate() {
            if (tk - t[0] - k as f64 * period).abs() > 1e-6 * period.max(tk.abs()) {
                return Err(SysidError::Parse(format!("row {}: timestamps are not uniform", k + 2)));
            }
        }
        Self::new(period, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let ts = TimeSeries::new(0.001, vec![0.0, 1.5, -2.25, 1e-7]).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n"));
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 4);
        assert!((back.period() - 0.001).abs() < 1e-15);
        assert_eq!(back.samples(), ts.samples());
    }

    #[test]
    fn rejects_empty_and_bad_period() {
        assert!(TimeSeries::new(0.001, vec![]).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0]).is_err());
    }

    #[test]
    fn non_uniform_timestamps_rejected() {
        let text = "t,value\n0,1\n0.001,2\n0.003,3\n";
        assert!(TimeSeries::read_csv(text.as_bytes()).is_err());
    }
}
