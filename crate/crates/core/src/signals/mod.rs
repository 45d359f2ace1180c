//! Ground-motion records: AT2 ingestion, resampling, peak and spectral
//! characterization, amplitude scaling, and synthetic record generation.

mod at2;
mod spectrum;
mod synthetic;

pub use at2::{parse_at2, write_at2};
pub use spectrum::{elastic_sa, response_spectrum, scale_to_pga, scale_to_sa, spectrum_csv, DEFAULT_SPECTRUM_DAMPING};
pub use synthetic::{synthetic_record, SyntheticSpec};

use crate::error::{Error, Result};
use crate::history::fmt_time;
use std::fmt::Write as _;

/// A uniformly sampled horizontal ground acceleration record in units of g.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMotionRecord {
    id: String,
    dt: f64,
    accel: Vec<f64>,
    source_meta: Vec<String>,
}

impl GroundMotionRecord {
    pub fn new(id: impl Into<String>, dt: f64, accel: Vec<f64>, source_meta: Vec<String>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("record dt must be positive, got {dt}")));
        }
        if accel.len() < 2 {
            return Err(Error::Argument(format!("record needs at least 2 samples, got {}", accel.len())));
        }
        if let Some(i) = accel.iter().position(|a| !a.is_finite()) {
            return Err(Error::Argument(format!("record sample {i} is not finite")));
        }
        Ok(Self { id: id.into(), dt, accel, source_meta })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn npts(&self) -> usize {
        self.accel.len()
    }

    pub fn accel(&self) -> &[f64] {
        &self.accel
    }

    pub fn source_meta(&self) -> &[String] {
        &self.source_meta
    }

    pub fn duration(&self) -> f64 {
        (self.npts() - 1) as f64 * self.dt
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Record multiplied by `factor`; metadata is kept.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            id: self.id.clone(),
            dt: self.dt,
            accel: self.accel.iter().map(|a| a * factor).collect(),
            source_meta: self.source_meta.clone(),
        }
    }

    /// Negated record (used for odd-symmetry checks).
    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Acceleration at time `t` by linear interpolation; zero past the end.
    pub fn accel_at(&self, t: f64) -> f64 {
        interp(&self.accel, self.dt, t)
    }

    pub fn as_time_series(&self) -> TimeSeries {
        TimeSeries { dt: self.dt, values: self.accel.clone() }
    }

    /// Record resampled onto `new_dt` by linear interpolation.
    pub fn resampled(&self, new_dt: f64) -> Result<Self> {
        let ts = resample(&self.as_time_series(), new_dt)?;
        Self::new(self.id.clone(), ts.dt, ts.values, self.source_meta.clone())
    }

    /// CSV with `time,value` rows.
    pub fn to_csv(&self) -> String {
        self.as_time_series().to_csv()
    }
}

/// Plain uniformly sampled series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("series dt must be positive, got {dt}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("series contains non-finite values".into()));
        }
        Ok(Self { dt, values })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{:.9e}", fmt_time(k as f64 * self.dt), v);
        }
        out
    }
}

pub(crate) fn interp(values: &[f64], dt: f64, t: f64) -> f64 {
    if values.is_empty() || t < 0.0 {
        return 0.0;
    }
    let last = values.len() - 1;
    let x = t / dt;
    if x >= last as f64 {
        // Round-off right at the final sample still hits it.
        return if x - last as f64 <= 1e-9 { values[last] } else { 0.0 };
    }
    let i = x.floor() as usize;
    let f = x - i as f64;
    values[i] + f * (values[i + 1] - values[i])
}

/// Linear-interpolation resampling onto a grid of step `new_dt` starting at
/// the first sample. The new grid covers the original duration to within
/// one `new_dt`.
pub fn resample(ts: &TimeSeries, new_dt: f64) -> Result<TimeSeries> {
    if !(new_dt > 0.0) || !new_dt.is_finite() {
        return Err(Error::Argument(format!("resample step must be positive, got {new_dt}")));
    }
    if new_dt == ts.dt || ts.values.len() < 2 {
        return Ok(TimeSeries { dt: new_dt, values: ts.values.clone() });
    }
    let duration = (ts.values.len() - 1) as f64 * ts.dt;
    let steps = (duration / new_dt + 1e-9).floor() as usize;
    let last = ts.values.len() - 1;
    let values = (0..=steps)
        .map(|k| {
            // Index arithmetic on the ratio keeps grid points that coincide
            // with original samples exact.
            let x = k as f64 * new_dt / ts.dt;
            let i = (x.floor() as usize).min(last);
            let f = x - i as f64;
            if i == last || f <= 1e-12 {
                ts.values[i]
            } else if f >= 1.0 - 1e-12 {
                ts.values[i + 1]
            } else {
                ts.values[i] + f * (ts.values[i + 1] - ts.values[i])
            }
        })
        .collect();
    Ok(TimeSeries { dt: new_dt, values })
}

/// Peak ground acceleration, `max |accel|`, in g.
pub fn pga(record: &GroundMotionRecord) -> f64 {
    record.accel.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
}
