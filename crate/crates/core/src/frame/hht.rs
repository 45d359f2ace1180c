//! Hilber–Hughes–Taylor α time stepping with Newton iteration on a
//! nonlinear restoring force.
//!
//! The dissipation parameter follows the convention where `alpha = 1`
//! recovers average-acceleration Newmark and smaller values (down to 2/3)
//! add high-frequency numerical damping. Equilibrium is enforced at the
//! α-weighted instant:
//!
//! ```text
//! M a₁ + α C v₁ + (1-α) C v₀ + α f(u₁) + (1-α) f₀ = α p₁ + (1-α) p₀
//! β = (2-α)²/4,  γ = 3/2 - α
//! ```

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Iterations with the consistent tangent before falling back to the
/// initial stiffness.
const TANGENT_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Dissipation parameter in [2/3, 1]; 1 is dissipation-free.
    pub alpha: f64,
    pub dt: f64,
    /// Absolute tolerance on the force residual norm.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { alpha: 1.0, dt: 0.005, newton_tol: 1e-8, newton_max_iter: 50 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2.0 / 3.0 - 1e-3..=1.0).contains(&self.alpha) {
            return Err(Error::Argument(format!("HHT alpha must lie in [2/3, 1], got {}", self.alpha)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Argument(format!("integrator dt must be positive, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::Argument("Newton tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }

    /// Newmark (β, γ) implied by `alpha`.
    pub fn newmark(&self) -> (f64, f64) {
        let beta = (2.0 - self.alpha).powi(2) / 4.0;
        let gamma = 1.5 - self.alpha;
        (beta, gamma)
    }
}

/// A (possibly path-dependent) internal force `f(u)`.
///
/// `trial` evaluates force and tangent from the last committed state without
/// changing it; `commit` accepts the most recent trial.
pub trait Restoring {
    fn dofs(&self) -> usize;
    fn trial(&mut self, u: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>);
    fn initial_stiffness(&self) -> DMatrix<f64>;
    fn commit(&mut self);
}

/// Linear elastic restoring force `K u`.
#[derive(Debug, Clone)]
pub struct LinearRestoring {
    pub stiffness: DMatrix<f64>,
}

impl Restoring for LinearRestoring {
    fn dofs(&self) -> usize {
        self.stiffness.nrows()
    }

    fn trial(&mut self, u: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        (&self.stiffness * u, self.stiffness.clone())
    }

    fn initial_stiffness(&self) -> DMatrix<f64> {
        self.stiffness.clone()
    }

    fn commit(&mut self) {}
}

/// Kinematic and force state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
    /// Restoring force at `u`.
    pub f: DVector<f64>,
    /// External load at this instant.
    pub p: DVector<f64>,
}

impl DynamicState {
    /// State at rest under load `p`, with acceleration from equilibrium.
    pub fn at_rest(mass: &DVector<f64>, p: DVector<f64>) -> Self {
        let n = mass.len();
        let a = p.component_div(mass);
        Self { u: DVector::zeros(n), v: DVector::zeros(n), a, f: DVector::zeros(n), p }
    }

    /// State from initial displacement and velocity; acceleration from
    /// equilibrium `M a = p - C v - f(u)`. The trial force is committed.
    pub fn from_initial<R: Restoring>(
        sys: &mut R,
        mass: &DVector<f64>,
        damping: &DMatrix<f64>,
        u: DVector<f64>,
        v: DVector<f64>,
        p: DVector<f64>,
    ) -> Self {
        let (f, _) = sys.trial(&u);
        sys.commit();
        let a = (&p - damping * &v - &f).component_div(mass);
        Self { u, v, a, f, p }
    }
}

/// Advances `state` by `dt` to load `p_next`. On success the restoring
/// model has committed the new state.
pub fn hht_advance<R: Restoring>(
    sys: &mut R,
    mass: &DVector<f64>,
    damping: &DMatrix<f64>,
    state: &DynamicState,
    p_next: DVector<f64>,
    dt: f64,
    cfg: &IntegratorConfig,
    time: f64,
) -> Result<DynamicState> {
    let (beta, gamma) = cfg.newmark();
    let al = cfg.alpha;
    let c0 = 1.0 / (beta * dt * dt);
    let c1 = gamma / (beta * dt);
    let a_coef = (0.5 - beta) / beta;

    // Terms of the residual that do not depend on the unknown.
    let fixed = al * &p_next + (1.0 - al) * &state.p - (1.0 - al) * (damping * &state.v) - (1.0 - al) * &state.f;
    let base = &state.u + dt * &state.v;

    let mut jac_base = al * c1 * damping;
    for i in 0..mass.len() {
        jac_base[(i, i)] += mass[i] * c0;
    }

    let mut u = state.u.clone();
    let mut trace = Vec::new();
    for iter in 0..cfg.newton_max_iter {
        let a = c0 * (&u - &base) - a_coef * &state.a;
        let v = &state.v + dt * ((1.0 - gamma) * &state.a + gamma * &a);
        let (f, kt) = sys.trial(&u);
        let inertia = mass.component_mul(&a);
        let damp = al * (damping * &v);
        let r = &fixed - &inertia - &damp - al * &f;
        let norm = r.norm();
        if !norm.is_finite() {
            trace.push(norm);
            break;
        }
        trace.push(norm);
        // Round-off floor relative to the largest term in the balance.
        let scale = fixed.norm().max(inertia.norm()).max(damp.norm()).max(al * f.norm());
        if norm <= cfg.newton_tol || norm <= 1e-11 * scale {
            sys.commit();
            return Ok(DynamicState { u, v, a, f, p: p_next });
        }
        let k = if iter < TANGENT_ITERATIONS { kt } else { sys.initial_stiffness() };
        let jac = &jac_base + al * k;
        match jac.lu().solve(&r) {
            // An increment below round-off of u cannot reduce the residual further.
            Some(du) if du.norm() <= 8.0 * f64::EPSILON * u.norm() => {
                sys.commit();
                return Ok(DynamicState { u, v, a, f, p: p_next });
            }
            Some(du) => u += du,
            None => break,
        }
    }
    Err(Error::StepFailure { time, trace })
}
