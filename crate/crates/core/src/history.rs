//! Time-aligned response trajectories produced by the oracles and by
//! network rollouts.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Per-DOF displacement, velocity and acceleration series on a uniform grid.
///
/// Units follow the producer: inches for the frame, radians for rocking.
/// Rollouts only predict displacements, so `vel`/`acc` may be empty there.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseHistory {
    pub dt: f64,
    pub disp: Vec<Vec<f64>>,
    pub vel: Vec<Vec<f64>>,
    pub acc: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl ResponseHistory {
    pub fn new(dt: f64, disp: Vec<Vec<f64>>, vel: Vec<Vec<f64>>, acc: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("history dt must be positive, got {dt}")));
        }
        if disp.is_empty() || labels.len() != disp.len() {
            return Err(Error::Argument("history needs one label per DOF".into()));
        }
        let len = disp[0].len();
        let extra = vel.iter().chain(acc.iter());
        if disp.iter().chain(extra).any(|s| s.len() != len) {
            return Err(Error::Argument("history series lengths differ".into()));
        }
        if (!vel.is_empty() && vel.len() != disp.len()) || (!acc.is_empty() && acc.len() != disp.len()) {
            return Err(Error::Argument("velocity/acceleration DOF count mismatch".into()));
        }
        if disp.iter().chain(vel.iter()).chain(acc.iter()).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument("history contains non-finite values".into()));
        }
        Ok(Self { dt, disp, vel, acc, labels })
    }

    /// Displacement-only history.
    pub fn displacement_only(dt: f64, disp: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        Self::new(dt, disp, Vec::new(), Vec::new(), labels)
    }

    pub fn len(&self) -> usize {
        self.disp[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_dof(&self) -> usize {
        self.disp.len()
    }

    pub fn peak_disp(&self, dof: usize) -> f64 {
        self.disp[dof].iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Keeps every `stride`-th sample starting at index 0.
    pub fn downsample(&self, stride: usize) -> Self {
        assert!(stride >= 1);
        let pick = |s: &Vec<Vec<f64>>| -> Vec<Vec<f64>> { s.iter().map(|ch| ch.iter().step_by(stride).copied().collect()).collect() };
        Self {
            dt: self.dt * stride as f64,
            disp: pick(&self.disp),
            vel: pick(&self.vel),
            acc: pick(&self.acc),
            labels: self.labels.clone(),
        }
    }

    /// First `len` samples.
    pub fn truncate(&self, len: usize) -> Self {
        let cut = |s: &Vec<Vec<f64>>| -> Vec<Vec<f64>> { s.iter().map(|ch| ch[..len.min(ch.len())].to_vec()).collect() };
        Self { dt: self.dt, disp: cut(&self.disp), vel: cut(&self.vel), acc: cut(&self.acc), labels: self.labels.clone() }
    }

    /// CSV with header `time,disp1..,vel1..,acc1..`; absent series are omitted.
    pub fn to_csv(&self) -> String {
        let n = self.n_dof();
        let mut out = String::from("time");
        for (prefix, present) in [("disp", true), ("vel", !self.vel.is_empty()), ("acc", !self.acc.is_empty())] {
            if present {
                for i in 1..=n {
                    let _ = write!(out, ",{prefix}{i}");
                }
            }
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(out, "{}", fmt_time(k as f64 * self.dt));
            for s in [&self.disp, &self.vel, &self.acc] {
                for ch in s.iter() {
                    let _ = write!(out, ",{:.9e}", ch[k]);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Formats a time stamp without floating-point noise in the trailing digits.
pub(crate) fn fmt_time(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0');
    let s = s.strip_suffix('.').unwrap_or(s);
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}
