//! Time-history simulation of the shear frame under base excitation.

use super::hht::{hht_advance, DynamicState, IntegratorConfig, Restoring};
use super::spring::HystereticSpring;
use super::ShearFrame;
use crate::error::{Error, Result};
use crate::history::{fmt_time, ResponseHistory};
use crate::signals::GroundMotionRecord;
use crate::G_IN;
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;

/// Times a failing step may be split in half before giving up.
const MAX_HALVINGS: usize = 6;

/// Story springs acting on interstory drifts; the base is fixed.
#[derive(Debug, Clone)]
struct FrameRestoring {
    springs: Vec<HystereticSpring>,
    k_init: DMatrix<f64>,
}

impl Restoring for FrameRestoring {
    fn dofs(&self) -> usize {
        self.springs.len()
    }

    fn trial(&mut self, u: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.springs.len();
        let mut story_f = vec![0.0; n];
        let mut story_k = vec![0.0; n];
        for i in 0..n {
            let below = if i == 0 { 0.0 } else { u[i - 1] };
            let (f, k) = self.springs[i].set_trial(u[i] - below);
            story_f[i] = f;
            story_k[i] = k;
        }
        let mut force = DVector::zeros(n);
        let mut tangent = DMatrix::zeros(n, n);
        for i in 0..n {
            force[i] = story_f[i] - if i + 1 < n { story_f[i + 1] } else { 0.0 };
            tangent[(i, i)] = story_k[i];
            if i + 1 < n {
                tangent[(i, i)] += story_k[i + 1];
                tangent[(i, i + 1)] = -story_k[i + 1];
                tangent[(i + 1, i)] = -story_k[i + 1];
            }
        }
        (force, tangent)
    }

    fn initial_stiffness(&self) -> DMatrix<f64> {
        self.k_init.clone()
    }

    fn commit(&mut self) {
        self.springs.iter_mut().for_each(HystereticSpring::commit);
    }
}

/// Cumulative energy terms (kip·in) in relative coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyBalance {
    pub kinetic: f64,
    /// Recoverable spring energy `Σ f²/2k0`.
    pub strain: f64,
    pub damped: f64,
    /// Spring work not recoverable elastically.
    pub hysteretic: f64,
    pub input: f64,
}

impl EnergyBalance {
    /// `E_k + E_s + E_d + E_h - E_in`.
    pub fn imbalance(&self) -> f64 {
        self.kinetic + self.strain + self.damped + self.hysteretic - self.input
    }
}

/// Stepwise HHT integration of one frame. Owns all mutable state.
#[derive(Debug, Clone)]
pub struct FrameIntegrator {
    restoring: FrameRestoring,
    mass: DVector<f64>,
    damping: DMatrix<f64>,
    cfg: IntegratorConfig,
    state: DynamicState,
    ug: f64,
    time: f64,
    spring_work: f64,
    energy: EnergyBalance,
}

impl FrameIntegrator {
    /// Frame at rest with ground acceleration `ug0` (g).
    pub fn new(frame: &ShearFrame, cfg: IntegratorConfig, ug0: f64) -> Result<Self> {
        cfg.validate()?;
        let springs = frame.springs().iter().map(|p| HystereticSpring::new(*p)).collect::<Result<Vec<_>>>()?;
        let mass = frame.mass_vector();
        let p0 = -G_IN * ug0 * &mass;
        Ok(Self {
            restoring: FrameRestoring { springs, k_init: frame.initial_stiffness_matrix() },
            damping: frame.damping_matrix()?,
            state: DynamicState::at_rest(&mass, p0),
            mass,
            cfg,
            ug: ug0,
            time: 0.0,
            spring_work: 0.0,
            energy: EnergyBalance::default(),
        })
    }

    pub fn state(&self) -> &DynamicState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn springs(&self) -> &[HystereticSpring] {
        &self.restoring.springs
    }

    pub fn energy(&self) -> EnergyBalance {
        self.energy
    }

    /// One HHT step of `cfg.dt` to ground acceleration `ug_next` (g).
    /// A step whose Newton iteration fails is retried as two half steps
    /// with linearly interpolated excitation, recursively.
    pub fn step(&mut self, ug_next: f64) -> Result<()> {
        self.advance(ug_next, self.cfg.dt, 0)
    }

    fn advance(&mut self, ug_next: f64, dt: f64, depth: usize) -> Result<()> {
        let p_next = -G_IN * ug_next * &self.mass;
        let old_forces: Vec<f64> = self.springs().iter().map(|s| s.committed().force).collect();
        let old_drifts: Vec<f64> = self.springs().iter().map(|s| s.committed().u).collect();
        match hht_advance(&mut self.restoring, &self.mass, &self.damping, &self.state, p_next, dt, &self.cfg, self.time + dt) {
            Ok(next) => {
                self.account(&next, &old_forces, &old_drifts);
                self.state = next;
                self.time += dt;
                self.ug = ug_next;
                Ok(())
            }
            Err(Error::StepFailure { .. }) if depth < MAX_HALVINGS => {
                let mid = 0.5 * (self.ug + ug_next);
                self.advance(mid, 0.5 * dt, depth + 1)?;
                self.advance(ug_next, 0.5 * dt, depth + 1)
            }
            Err(e) => Err(e),
        }
    }

    fn account(&mut self, next: &DynamicState, old_forces: &[f64], old_drifts: &[f64]) {
        let du = &next.u - &self.state.u;
        let v_sum = &self.state.v + &next.v;
        self.energy.damped += 0.5 * du.dot(&(&self.damping * v_sum));
        self.energy.input += 0.5 * du.dot(&(&self.state.p + &next.p));
        let mut strain = 0.0;
        for (i, s) in self.restoring.springs.iter().enumerate() {
            let c = s.committed();
            self.spring_work += 0.5 * (old_forces[i] + c.force) * (c.u - old_drifts[i]);
            strain += s.elastic_energy();
        }
        self.energy.strain = strain;
        self.energy.hysteretic = self.spring_work - strain;
        self.energy.kinetic = 0.5 * next.v.iter().zip(self.mass.iter()).map(|(v, m)| m * v * v).sum::<f64>();
    }
}

/// Output of [`simulate_frame`].
#[derive(Debug, Clone)]
pub struct FrameRun {
    /// Floor displacements relative to the ground (in), velocities, accelerations.
    pub history: ResponseHistory,
    /// Interstory drift and spring force per story, per step.
    pub story_drift: Vec<Vec<f64>>,
    pub story_force: Vec<Vec<f64>>,
    pub yield_disp: Vec<f64>,
    /// Energy terms after each step (index 0 is the initial state).
    pub energy: Vec<EnergyBalance>,
}

impl FrameRun {
    /// Peak |drift| over yield drift, per story.
    pub fn peak_ductility(&self) -> Vec<f64> {
        self.story_drift.iter().zip(&self.yield_disp).map(|(d, uy)| d.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / uy).collect()
    }

    /// Worst `|imbalance| / max(|E_in| so far, ε)` over the run.
    pub fn max_energy_error(&self) -> f64 {
        let mut peak_input = 0.0_f64;
        let mut worst = 0.0_f64;
        for e in &self.energy {
            peak_input = peak_input.max(e.input.abs());
            worst = worst.max(e.imbalance().abs() / peak_input.max(1e-12));
        }
        worst
    }

    /// `drift,force` trace of one story (0-based) as CSV.
    pub fn spring_trace_csv(&self, story: usize) -> String {
        let mut out = String::from("time,drift,force\n");
        for (k, (d, f)) in self.story_drift[story].iter().zip(&self.story_force[story]).enumerate() {
            let _ = writeln!(out, "{},{d:.9e},{f:.9e}", fmt_time(k as f64 * self.history.dt));
        }
        out
    }
}

/// Nonlinear time history of `frame` under `record`, stepped at `cfg.dt`
/// with the record interpolated linearly onto that grid.
pub fn simulate_frame(frame: &ShearFrame, record: &GroundMotionRecord, cfg: &IntegratorConfig) -> Result<FrameRun> {
    cfg.validate()?;
    if cfg.dt > record.dt() * (1.0 + 1e-12) {
        return Err(Error::Argument(format!("integrator dt {} exceeds record dt {}", cfg.dt, record.dt())));
    }
    let n = frame.n();
    let steps = (record.duration() / cfg.dt + 1e-9).floor() as usize;
    let mut integ = FrameIntegrator::new(frame, *cfg, record.accel()[0])?;

    let mut disp = vec![Vec::with_capacity(steps + 1); n];
    let mut vel = disp.clone();
    let mut acc = disp.clone();
    let mut drift = disp.clone();
    let mut force = disp.clone();
    let mut energy = Vec::with_capacity(steps + 1);

    let mut record_sample = |integ: &FrameIntegrator| {
        let s = integ.state();
        for i in 0..n {
            disp[i].push(s.u[i]);
            vel[i].push(s.v[i]);
            acc[i].push(s.a[i]);
            let c = integ.springs()[i].committed();
            drift[i].push(c.u);
            force[i].push(c.force);
        }
        energy.push(integ.energy());
    };
    record_sample(&integ);
    for k in 1..=steps {
        integ.step(record.accel_at(k as f64 * cfg.dt))?;
        record_sample(&integ);
    }
    let labels = (1..=n).map(|i| format!("floor{i}")).collect();
    Ok(FrameRun {
        history: ResponseHistory::new(cfg.dt, disp, vel, acc, labels)?,
        story_drift: drift,
        story_force: force,
        yield_disp: frame.springs().iter().map(|s| s.yield_disp()).collect(),
        energy,
    })
}
