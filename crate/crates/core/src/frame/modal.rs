//! Modal analysis, stiffness calibration to target periods, and Rayleigh
//! damping coefficients.

use super::ShearFrame;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::f64::consts::PI;

/// Periods (descending), circular frequencies and mass-normalized shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalResult {
    pub periods: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `shapes[mode][dof]`, with `φᵀ M φ = 1` and positive roof component.
    pub shapes: Vec<Vec<f64>>,
}

/// Tridiagonal shear-building stiffness from story stiffnesses.
pub fn shear_stiffness(k: &[f64]) -> DMatrix<f64> {
    let n = k.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] += k[i];
        if i + 1 < n {
            m[(i, i)] += k[i + 1];
            m[(i, i + 1)] = -k[i + 1];
            m[(i + 1, i)] = -k[i + 1];
        }
    }
    m
}

/// Solves `K φ = ω² M φ` for a diagonal mass matrix.
pub fn modal_from(masses: &[f64], k: &[f64]) -> Result<ModalResult> {
    if masses.len() != k.len() || masses.is_empty() {
        return Err(Error::Argument("mass and stiffness counts differ".into()));
    }
    if k.iter().any(|&v| !(v > 0.0)) || masses.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Model(format!("stiffness matrix is not positive definite (k={k:?}, m={masses:?})")));
    }
    let n = masses.len();
    let kmat = shear_stiffness(k);
    let inv_sqrt: Vec<f64> = masses.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * kmat[(i, j)] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Model("stiffness matrix is not positive definite".into()));
    }
    let mut periods = Vec::with_capacity(n);
    let mut frequencies = Vec::with_capacity(n);
    let mut shapes = Vec::with_capacity(n);
    for &idx in &order {
        let w = eig.eigenvalues[idx].sqrt();
        frequencies.push(w);
        periods.push(2.0 * PI / w);
        let col = eig.eigenvectors.column(idx);
        let mut phi: Vec<f64> = (0..n).map(|i| col[i] * inv_sqrt[i]).collect();
        let norm: f64 = phi.iter().zip(masses).map(|(p, m)| m * p * p).sum::<f64>().sqrt();
        let sign = if phi[n - 1] < 0.0 { -1.0 } else { 1.0 };
        phi.iter_mut().for_each(|p| *p *= sign / norm);
        shapes.push(phi);
    }
    Ok(ModalResult { periods, frequencies, shapes })
}

/// Modal analysis on the initial (elastic) spring stiffnesses.
pub fn modal_analysis(frame: &ShearFrame) -> Result<ModalResult> {
    modal_from(frame.masses(), &frame.initial_stiffnesses())
}

const CALIBRATION_MAX_ITER: usize = 200;
const CALIBRATION_TOL: f64 = 1e-10;

/// Story stiffnesses whose modal periods match `target_periods`.
///
/// Damped Newton on `ln k ↦ ln T(k)` with a forward-difference Jacobian,
/// starting from uniform stiffness sized so a single-story model with the
/// total mass has the fundamental target period.
pub fn calibrate_stiffness(masses: &[f64], target_periods: &[f64]) -> Result<Vec<f64>> {
    let n = masses.len();
    if target_periods.len() != n {
        return Err(Error::Argument(format!("need {n} target periods, got {}", target_periods.len())));
    }
    if target_periods.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Argument("target periods must be positive".into()));
    }
    if target_periods.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Argument(format!("target periods must be strictly descending, got {target_periods:?}")));
    }
    if masses.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Argument("masses must be positive".into()));
    }

    let log_target: Vec<f64> = target_periods.iter().map(|t| t.ln()).collect();
    let residual = |lk: &[f64]| -> Option<DVector<f64>> {
        let k: Vec<f64> = lk.iter().map(|v| v.exp()).collect();
        let m = modal_from(masses, &k).ok()?;
        Some(DVector::from_iterator(n, m.periods.iter().zip(&log_target).map(|(t, lt)| t.ln() - lt)))
    };

    let total: f64 = masses.iter().sum();
    let k_init = total * (2.0 * PI / target_periods[0]).powi(2);
    let mut lk = vec![k_init.ln(); n];
    let mut r = residual(&lk).ok_or_else(|| Error::Model("initial calibration guess is singular".into()))?;
    for _ in 0..CALIBRATION_MAX_ITER {
        if r.amax() <= CALIBRATION_TOL {
            return Ok(lk.iter().map(|v| v.exp()).collect());
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut probe = lk.clone();
            probe[j] += h;
            let rp = residual(&probe).ok_or_else(|| Error::Model("calibration probe left the admissible region".into()))?;
            jac.set_column(j, &((rp - &r) / h));
        }
        let Some(step) = jac.lu().solve(&(-&r)) else {
            return Err(Error::Calibration { iterations: 0, residual: r.amax() });
        };
        // Backtrack until the residual norm decreases.
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = lk.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(rt) = residual(&trial) {
                if rt.norm() < r.norm() || lambda < 1e-6 {
                    lk = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-9 {
                break;
            }
        }
    }
    if r.amax() <= CALIBRATION_TOL {
        return Ok(lk.iter().map(|v| v.exp()).collect());
    }
    Err(Error::Calibration { iterations: CALIBRATION_MAX_ITER, residual: r.amax() })
}

/// Rayleigh coefficients `(a0, a1)` giving damping ratio `zeta` at both
/// `omega_i` and `omega_j`. Equal frequencies collapse to `(ζω, ζ/ω)`.
pub fn rayleigh_coefficients(omega_i: f64, omega_j: f64, zeta: f64) -> Result<(f64, f64)> {
    if !(omega_i > 0.0) || omega_j < omega_i {
        return Err(Error::Argument(format!("need 0 < omega_i <= omega_j, got {omega_i}, {omega_j}")));
    }
    if !(zeta >= 0.0) {
        return Err(Error::Argument(format!("damping ratio must be non-negative, got {zeta}")));
    }
    let sum = omega_i + omega_j;
    Ok((2.0 * zeta * omega_i * omega_j / sum, 2.0 * zeta / sum))
}

/// Damping ratio produced by Rayleigh coefficients at `omega`.
pub fn rayleigh_ratio(a0: f64, a1: f64, omega: f64) -> f64 {
    0.5 * (a0 / omega + a1 * omega)
}
