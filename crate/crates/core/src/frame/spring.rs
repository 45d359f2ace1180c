//! Smooth Giuffré–Menegotto–Pinto story spring.
//!
//! Each branch is a curved transition from the last reversal point
//! `(u_r, f_r)` toward the intersection `(u_s0, f_s0)` of the elastic line
//! through the reversal with the hardening asymptote. The curvature parameter
//! shrinks with the plastic excursion, giving the Bauschinger effect:
//!
//! ```text
//! R  = r0 (1 - cr1 ξ / (cr2 + ξ))
//! u* = (u - u_r) / (u_s0 - u_r)
//! f* = b u* + (1 - b) u* / (1 + |u*|^R)^(1/R)
//! f  = f_r + f* (f_s0 - f_r)
//! ```
//!
//! Isotropic hardening is not modelled.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringParams {
    /// Initial stiffness (kip/in).
    pub k0: f64,
    /// Yield force (kip).
    pub fy: f64,
    /// Post-yield stiffness ratio.
    pub b: f64,
    pub r0: f64,
    pub cr1: f64,
    pub cr2: f64,
}

impl SpringParams {
    /// Standard transition shape (`r0=18, cr1=0.925, cr2=0.15, b=0.03`).
    pub fn with_defaults(k0: f64, fy: f64) -> Self {
        Self { k0, fy, b: 0.03, r0: 18.0, cr1: 0.925, cr2: 0.15 }
    }

    pub fn yield_disp(&self) -> f64 {
        self.fy / self.k0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0) || !(self.fy > 0.0) {
            return Err(Error::Argument(format!("spring needs k0 > 0 and Fy > 0, got k0={} Fy={}", self.k0, self.fy)));
        }
        if !(0.0..1.0).contains(&self.b) {
            return Err(Error::Argument(format!("post-yield ratio b must lie in [0, 1), got {}", self.b)));
        }
        if !(self.r0 > 0.0) || !(0.0..1.0).contains(&self.cr1) || !(self.cr2 > 0.0) {
            return Err(Error::Argument("transition parameters need r0 > 0, 0 <= cr1 < 1, cr2 > 0".into()));
        }
        Ok(())
    }
}

/// Which branch the spring is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Never displaced.
    Virgin,
    /// Displacement increasing.
    Loading,
    /// Displacement decreasing.
    Unloading,
}

/// Path-dependent state after a (trial or committed) displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringState {
    pub u: f64,
    pub force: f64,
    pub tangent: f64,
    pub branch: Branch,
    /// Largest and smallest excursions so far.
    pub u_max: f64,
    pub u_min: f64,
    /// Plastic excursion reference of the current branch.
    pub u_pl: f64,
    /// Asymptote intersection of the current branch.
    pub u_s0: f64,
    pub f_s0: f64,
    /// Last reversal point.
    pub u_r: f64,
    pub f_r: f64,
}

impl SpringState {
    pub fn virgin(p: &SpringParams) -> Self {
        Self {
            u: 0.0,
            force: 0.0,
            tangent: p.k0,
            branch: Branch::Virgin,
            u_max: p.yield_disp(),
            u_min: -p.yield_disp(),
            u_pl: 0.0,
            u_s0: 0.0,
            f_s0: 0.0,
            u_r: 0.0,
            f_r: 0.0,
        }
    }
}

/// Evaluates the spring at `u` starting from `committed`. Pure.
pub fn spring_response(p: &SpringParams, committed: &SpringState, u: f64) -> SpringState {
    let uy = p.yield_disp();
    let ksh = p.b * p.k0;
    let du = u - committed.u;
    let mut s = *committed;
    s.u = u;

    if s.branch == Branch::Virgin {
        if du.abs() <= f64::EPSILON * uy {
            s.force = p.k0 * u;
            s.tangent = p.k0;
            return s;
        }
        s.u_max = uy;
        s.u_min = -uy;
        if du < 0.0 {
            s.branch = Branch::Unloading;
            s.u_s0 = -uy;
            s.f_s0 = -p.fy;
            s.u_pl = -uy;
        } else {
            s.branch = Branch::Loading;
            s.u_s0 = uy;
            s.f_s0 = p.fy;
            s.u_pl = uy;
        }
    }

    if s.branch == Branch::Unloading && du > 0.0 {
        s.branch = Branch::Loading;
        s.u_r = committed.u;
        s.f_r = committed.force;
        s.u_min = s.u_min.min(committed.u);
        s.u_s0 = (p.fy - ksh * uy - s.f_r + p.k0 * s.u_r) / (p.k0 - ksh);
        s.f_s0 = p.fy + ksh * (s.u_s0 - uy);
        s.u_pl = s.u_max;
    } else if s.branch == Branch::Loading && du < 0.0 {
        s.branch = Branch::Unloading;
        s.u_r = committed.u;
        s.f_r = committed.force;
        s.u_max = s.u_max.max(committed.u);
        s.u_s0 = (-p.fy + ksh * uy - s.f_r + p.k0 * s.u_r) / (p.k0 - ksh);
        s.f_s0 = -p.fy + ksh * (s.u_s0 + uy);
        s.u_pl = s.u_min;
    }

    let xi = ((s.u_pl - s.u_s0) / uy).abs();
    let r = p.r0 * (1.0 - p.cr1 * xi / (p.cr2 + xi));
    let span = s.u_s0 - s.u_r;
    let ratio = (u - s.u_r) / span;
    let d1 = 1.0 + ratio.abs().powf(r);
    let d2 = d1.powf(1.0 / r);
    let fstar = p.b * ratio + (1.0 - p.b) * ratio / d2;
    s.force = fstar * (s.f_s0 - s.f_r) + s.f_r;
    s.tangent = (p.b + (1.0 - p.b) / (d1 * d2)) * (s.f_s0 - s.f_r) / span;
    s
}

/// A spring with committed state and the most recent trial.
#[derive(Debug, Clone, PartialEq)]
pub struct HystereticSpring {
    pub params: SpringParams,
    committed: SpringState,
    trial: SpringState,
}

impl HystereticSpring {
    pub fn new(params: SpringParams) -> Result<Self> {
        params.validate()?;
        let s = SpringState::virgin(&params);
        Ok(Self { params, committed: s, trial: s })
    }

    /// Force and tangent at `u` from the committed state; remembered as the trial.
    pub fn set_trial(&mut self, u: f64) -> (f64, f64) {
        self.trial = spring_response(&self.params, &self.committed, u);
        (self.trial.force, self.trial.tangent)
    }

    pub fn commit(&mut self) {
        self.committed = self.trial;
    }

    pub fn committed(&self) -> &SpringState {
        &self.committed
    }

    /// Recoverable elastic energy stored at the committed force.
    pub fn elastic_energy(&self) -> f64 {
        self.committed.force.powi(2) / (2.0 * self.params.k0)
    }
}
