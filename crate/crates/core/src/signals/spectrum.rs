//! Elastic pseudo-spectral acceleration and amplitude scaling.

use super::{pga, GroundMotionRecord};
use crate::error::{Error, Result};
use crate::frame::hht::{hht_advance, DynamicState, IntegratorConfig, LinearRestoring};
use crate::parallel;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Damping ratio used for spectral scaling unless configured otherwise.
pub const DEFAULT_SPECTRUM_DAMPING: f64 = 0.05;

/// Pseudo-spectral acceleration `ω² max|u|` (in g) of a linear oscillator of
/// period `period` and damping `zeta` under the record.
///
/// Integrated with dissipation-free HHT (average acceleration) at a step of
/// at most `min(dt, period/20)`, sub-dividing each record interval evenly
/// and interpolating the excitation linearly.
pub fn elastic_sa(record: &GroundMotionRecord, period: f64, zeta: f64) -> Result<f64> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Argument(format!("spectral period must be positive, got {period}")));
    }
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::Argument(format!("damping ratio must lie in [0, 1), got {zeta}")));
    }
    let omega = 2.0 * PI / period;
    let h_max = record.dt().min(period / 20.0);
    let sub = (record.dt() / h_max - 1e-9).ceil().max(1.0) as usize;
    let h = record.dt() / sub as f64;

    let mass = DVector::from_element(1, 1.0);
    let damping = DMatrix::from_element(1, 1, 2.0 * zeta * omega);
    let mut sys = LinearRestoring { stiffness: DMatrix::from_element(1, 1, omega * omega) };
    let cfg = IntegratorConfig { alpha: 1.0, dt: h, newton_tol: 1e-12, newton_max_iter: 5 };

    let acc = record.accel();
    let mut state = DynamicState::at_rest(&mass, DVector::from_element(1, -acc[0]));
    let mut peak = 0.0_f64;
    for i in 0..acc.len() - 1 {
        for j in 1..=sub {
            let frac = j as f64 / sub as f64;
            let ug = acc[i] + frac * (acc[i + 1] - acc[i]);
            let t = (i as f64 + frac) * record.dt();
            state = hht_advance(&mut sys, &mass, &damping, &state, DVector::from_element(1, -ug), h, &cfg, t)?;
            peak = peak.max(state.u[0].abs());
        }
    }
    Ok(omega * omega * peak)
}

/// Spectrum over `periods`, evaluated in parallel when enabled.
pub fn response_spectrum(record: &GroundMotionRecord, periods: &[f64], zeta: f64) -> Result<Vec<(f64, f64)>> {
    parallel::map(periods, |&t| elastic_sa(record, t, zeta).map(|sa| (t, sa))).into_iter().collect()
}

/// CSV with `period,Sa` rows.
pub fn spectrum_csv(spectrum: &[(f64, f64)]) -> String {
    let mut out = String::from("period,Sa\n");
    for (t, sa) in spectrum {
        let _ = writeln!(out, "{t},{sa:.9e}");
    }
    out
}

/// Scales the record so its spectral acceleration at `period` equals
/// `target` (g). Returns the scaled record and the factor applied.
pub fn scale_to_sa(record: &GroundMotionRecord, period: f64, zeta: f64, target: f64) -> Result<(GroundMotionRecord, f64)> {
    let sa = elastic_sa(record, period, zeta)?;
    if !(sa > 0.0) {
        return Err(Error::Degenerate(format!("record {} has zero spectral response at T={period}", record.id())));
    }
    let factor = target / sa;
    Ok((record.scaled(factor), factor))
}

/// Scales the record so its PGA equals `target` (g).
pub fn scale_to_pga(record: &GroundMotionRecord, target: f64) -> Result<(GroundMotionRecord, f64)> {
    let peak = pga(record);
    if !(peak > 0.0) {
        return Err(Error::Degenerate(format!("record {} is identically zero", record.id())));
    }
    let factor = target / peak;
    Ok((record.scaled(factor), factor))
}
