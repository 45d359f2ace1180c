//! Three-storey hysteretic shear frame: the first ground-truth oracle.
//!
//! Lumped floor masses, one smooth-hysteresis spring per story acting on
//! the interstory drift, Rayleigh damping on the initial stiffness fitted at
//! two modes, and HHT-α integration with Newton iteration.

pub mod hht;
mod modal;
mod simulate;
pub mod spring;

pub use hht::IntegratorConfig;
pub use modal::{calibrate_stiffness, modal_analysis, modal_from, rayleigh_coefficients, rayleigh_ratio, shear_stiffness, ModalResult};
pub use simulate::{simulate_frame, EnergyBalance, FrameIntegrator, FrameRun};
pub use spring::{spring_response, Branch, HystereticSpring, SpringParams, SpringState};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Modes (1-based) at which the Rayleigh damping ratio is matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighSpec {
    pub zeta: f64,
    pub mode_i: usize,
    pub mode_j: usize,
}

/// Transition shape shared by all story springs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisShape {
    pub b: f64,
    pub r0: f64,
    pub cr1: f64,
    pub cr2: f64,
}

impl Default for HysteresisShape {
    fn default() -> Self {
        Self { b: 0.03, r0: 18.0, cr1: 0.925, cr2: 0.15 }
    }
}

/// Floor masses in kip·s²/in, springs in kip and inches.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearFrame {
    masses: Vec<f64>,
    springs: Vec<SpringParams>,
    story_height: f64,
    rayleigh: RayleighSpec,
}

impl ShearFrame {
    pub fn new(masses: Vec<f64>, springs: Vec<SpringParams>, story_height: f64, rayleigh: RayleighSpec) -> Result<Self> {
        if masses.is_empty() || masses.len() != springs.len() {
            return Err(Error::Argument(format!("{} masses but {} springs", masses.len(), springs.len())));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Argument("floor masses must be positive".into()));
        }
        for s in &springs {
            s.validate()?;
        }
        if !(story_height > 0.0) {
            return Err(Error::Argument("story height must be positive".into()));
        }
        let n = masses.len();
        if rayleigh.mode_i == 0 || rayleigh.mode_j > n || rayleigh.mode_i > rayleigh.mode_j || !(rayleigh.zeta >= 0.0) {
            return Err(Error::Argument(format!("invalid Rayleigh specification {rayleigh:?} for {n} modes")));
        }
        Ok(Self { masses, springs, story_height, rayleigh })
    }

    /// Frame whose elastic periods match `target_periods`, with every story
    /// yielding at drift `yield_drift_ratio × story_height`.
    pub fn calibrated(
        masses: Vec<f64>,
        target_periods: &[f64],
        story_height: f64,
        yield_drift_ratio: f64,
        shape: HysteresisShape,
        rayleigh: RayleighSpec,
    ) -> Result<Self> {
        if !(yield_drift_ratio > 0.0) {
            return Err(Error::Argument("yield drift ratio must be positive".into()));
        }
        let k = calibrate_stiffness(&masses, target_periods)?;
        let uy = yield_drift_ratio * story_height;
        let springs =
            k.iter().map(|&k0| SpringParams { k0, fy: k0 * uy, b: shape.b, r0: shape.r0, cr1: shape.cr1, cr2: shape.cr2 }).collect();
        Self::new(masses, springs, story_height, rayleigh)
    }

    /// The reference three-storey frame: masses 0.3/0.3/0.18 kip·s²/in,
    /// periods 0.550/0.188/0.120 s, 118 in stories, 2.5% Rayleigh damping
    /// on modes 1 and 3, yield at 0.5% drift.
    pub fn reference() -> Result<Self> {
        Self::calibrated(
            vec![0.3, 0.3, 0.18],
            &[0.550, 0.188, 0.120],
            118.0,
            0.005,
            HysteresisShape::default(),
            RayleighSpec { zeta: 0.025, mode_i: 1, mode_j: 3 },
        )
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn springs(&self) -> &[SpringParams] {
        &self.springs
    }

    pub fn story_height(&self) -> f64 {
        self.story_height
    }

    pub fn rayleigh(&self) -> RayleighSpec {
        self.rayleigh
    }

    pub fn initial_stiffnesses(&self) -> Vec<f64> {
        self.springs.iter().map(|s| s.k0).collect()
    }

    pub fn mass_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.masses)
    }

    pub fn initial_stiffness_matrix(&self) -> DMatrix<f64> {
        shear_stiffness(&self.initial_stiffnesses())
    }

    /// Rayleigh coefficients `(a0, a1)` from the configured modes.
    pub fn rayleigh_coefficients(&self) -> Result<(f64, f64)> {
        let modal = modal_analysis(self)?;
        let wi = modal.frequencies[self.rayleigh.mode_i - 1];
        let wj = modal.frequencies[self.rayleigh.mode_j - 1];
        rayleigh_coefficients(wi, wj, self.rayleigh.zeta)
    }

    /// `C = a0 M + a1 K_initial`.
    pub fn damping_matrix(&self) -> Result<DMatrix<f64>> {
        let (a0, a1) = self.rayleigh_coefficients()?;
        let mut c = a1 * self.initial_stiffness_matrix();
        for (i, m) in self.masses.iter().enumerate() {
            c[(i, i)] += a0 * m;
        }
        Ok(c)
    }
}
