//! Planar rigid-block rocking under base excitation: the second
//! ground-truth oracle.
//!
//! Between impacts the block pivots about one bottom corner:
//!
//! ```text
//! θ̈ = -p² [ sin(α sgnθ - θ) + (üg/g) cos(α sgnθ - θ) ]
//! ```
//!
//! When θ crosses zero the pivot switches corners and the angular velocity
//! is multiplied by the restitution coefficient `e`. Smooth segments are
//! integrated with classical RK4; crossings are located by bisection on the
//! step fraction.

use crate::error::{Error, Result};
use crate::history::{fmt_time, ResponseHistory};
use crate::signals::GroundMotionRecord;
use crate::G_SI;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

/// Impact location tolerance on |θ| (rad).
const IMPACT_TOL: f64 = 1e-12;
/// Below these the block is considered back at rest after an impact.
const REST_THETA: f64 = 1e-8;
const REST_RATE: f64 = 1e-8;

/// Default oracle step (s).
pub const DEFAULT_ROCKING_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RockingBlock {
    /// Half-width and half-height (m).
    pub w: f64,
    pub h: f64,
    /// Mass (kg).
    pub m: f64,
    /// Slenderness angle `atan(w/h)` (rad).
    pub alpha: f64,
    /// Half-diagonal `hypot(w, h)` (m).
    pub r: f64,
    /// Frequency parameter `sqrt(3g / 4R)` (1/s).
    pub p: f64,
    /// Angular velocity ratio across an impact.
    pub e: f64,
}

/// Moments of inertia about a pivot (kg·m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaIdentities {
    /// `4 m R² / 3`.
    pub pivot: f64,
    /// Translational masses lumped along the body: `m R² (1 + cos²α / 3)`.
    pub translational: f64,
    /// Rotational mass to add on top: `m R² sin²α / 3`.
    pub supplemental: f64,
}

/// Block from full dimensions `2w × 2h` and mass, with the classical
/// restitution coefficient.
pub fn block_constants(full_width: f64, full_height: f64, m: f64) -> Result<RockingBlock> {
    if !(full_width > 0.0 && full_height > 0.0 && m > 0.0) {
        return Err(Error::Argument(format!("block dimensions and mass must be positive, got {full_width} x {full_height}, m={m}")));
    }
    let w = 0.5 * full_width;
    let h = 0.5 * full_height;
    let alpha = (w / h).atan();
    let r = w.hypot(h);
    let p = (3.0 * G_SI / (4.0 * r)).sqrt();
    let e = restitution_coefficient(alpha)?;
    Ok(RockingBlock { w, h, m, alpha, r, p, e })
}

impl RockingBlock {
    /// Same block with a user-supplied restitution coefficient in (0, 1].
    pub fn with_restitution(mut self, e: f64) -> Result<Self> {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Argument(format!("restitution must lie in (0, 1], got {e}")));
        }
        self.e = e;
        Ok(self)
    }

    /// Moment of inertia about a pivot corner.
    pub fn pivot_inertia(&self) -> f64 {
        4.0 * self.m * self.r * self.r / 3.0
    }

    /// `½ I₀ θ̇² + m g R [cos(α - |θ|) - cos α]`.
    pub fn energy(&self, theta: f64, theta_dot: f64) -> f64 {
        0.5 * self.pivot_inertia() * theta_dot * theta_dot + self.m * G_SI * self.r * ((self.alpha - theta.abs()).cos() - self.alpha.cos())
    }

    /// Ground acceleration magnitude (m/s²) needed to lift the block off.
    pub fn uplift_threshold(&self) -> f64 {
        G_SI * self.alpha.tan()
    }
}

pub fn inertia_identities(block: &RockingBlock) -> InertiaIdentities {
    let mr2 = block.m * block.r * block.r;
    let (s, c) = block.alpha.sin_cos();
    InertiaIdentities { pivot: 4.0 * mr2 / 3.0, translational: mr2 * (1.0 + c * c / 3.0), supplemental: mr2 * s * s / 3.0 }
}

/// `e = 1 - (3/2) sin²α`, from angular momentum conservation about the
/// new pivot. Geometries with `e <= 0` are rejected.
pub fn restitution_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::Argument(format!("slenderness angle must lie in (0, π/2), got {alpha}")));
    }
    let e = 1.0 - 1.5 * alpha.sin().powi(2);
    if e <= 1e-12 {
        return Err(Error::UnsupportedGeometry(format!("alpha={alpha} gives non-positive restitution {e}")));
    }
    Ok(e.min(1.0))
}

/// Rotation, rate and active pivot (`-1`, `0` at rest, `+1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RockingState {
    pub theta: f64,
    pub theta_dot: f64,
    pub pivot: i8,
    pub overturned: bool,
}

impl RockingState {
    pub fn at_rest() -> Self {
        Self { theta: 0.0, theta_dot: 0.0, pivot: 0, overturned: false }
    }

    /// Released from rest at `theta` (pivot taken from its sign).
    pub fn released(theta: f64) -> Self {
        let pivot = if theta > 0.0 {
            1
        } else if theta < 0.0 {
            -1
        } else {
            0
        };
        Self { theta, theta_dot: 0.0, pivot, overturned: false }
    }
}

/// Angular acceleration on pivot `sgn` (±1) under ground acceleration
/// `ug_ddot` (m/s²).
pub fn rocking_accel(block: &RockingBlock, theta: f64, sgn: f64, ug_ddot: f64) -> f64 {
    let arg = block.alpha * sgn - theta;
    -block.p * block.p * (arg.sin() + ug_ddot / G_SI * arg.cos())
}

/// Pivot that lifts off under `ug_ddot` from rest, if any.
fn uplift_pivot(block: &RockingBlock, ug_ddot: f64) -> i8 {
    let threshold = block.uplift_threshold();
    if ug_ddot < -threshold {
        1
    } else if ug_ddot > threshold {
        -1
    } else {
        0
    }
}

fn rk4(block: &RockingBlock, theta: f64, rate: f64, sgn: f64, h: f64, ug: impl Fn(f64) -> f64) -> (f64, f64) {
    let f = |th: f64, t: f64| rocking_accel(block, th, sgn, ug(t));
    let k1v = f(theta, 0.0);
    let k1x = rate;
    let k2v = f(theta + 0.5 * h * k1x, 0.5 * h);
    let k2x = rate + 0.5 * h * k1v;
    let k3v = f(theta + 0.5 * h * k2x, 0.5 * h);
    let k3x = rate + 0.5 * h * k2v;
    let k4v = f(theta + h * k3x, h);
    let k4x = rate + h * k3v;
    (theta + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x), rate + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))
}

/// One detected pivot switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactEvent {
    pub time: f64,
    pub rate_before: f64,
    pub rate_after: f64,
}

/// Output of [`simulate_rocking`].
#[derive(Debug, Clone)]
pub struct RockingRun {
    /// θ (rad) and θ̇ on the record grid.
    pub history: ResponseHistory,
    pub alpha: f64,
    /// Overturned flag per stored sample.
    pub overturned: Vec<bool>,
    pub impacts: Vec<ImpactEvent>,
    /// Number of RK4 steps taken on the oracle grid.
    pub steps: usize,
    pub final_state: RockingState,
}

impl RockingRun {
    pub fn theta(&self) -> &[f64] {
        &self.history.disp[0]
    }

    /// θ/α per stored sample.
    pub fn theta_normalized(&self) -> Vec<f64> {
        self.theta().iter().map(|t| t / self.alpha).collect()
    }

    /// CSV with `time,theta,theta_norm,theta_dot,overturned` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,theta,theta_norm,theta_dot,overturned\n");
        for (k, (&th, &rate)) in self.theta().iter().zip(&self.history.vel[0]).enumerate() {
            let _ = writeln!(
                out,
                "{},{th:.9e},{:.9e},{rate:.9e},{}",
                fmt_time(k as f64 * self.history.dt),
                th / self.alpha,
                u8::from(self.overturned[k])
            );
        }
        out
    }
}

/// Rocking history under `record` from rest.
pub fn simulate_rocking(block: &RockingBlock, record: &GroundMotionRecord, dt: f64) -> Result<RockingRun> {
    simulate_rocking_from(block, record, dt, RockingState::at_rest())
}

/// Rocking history from an arbitrary initial state. Integrates at `dt`
/// (at most 1 ms) and stores samples on the record grid.
pub fn simulate_rocking_from(block: &RockingBlock, record: &GroundMotionRecord, dt: f64, initial: RockingState) -> Result<RockingRun> {
    if !(dt > 0.0 && dt <= 1e-3 + 1e-15) {
        return Err(Error::Argument(format!("rocking step must lie in (0, 1e-3] s, got {dt}")));
    }
    let sub = (record.dt() / dt - 1e-9).ceil().max(1.0) as usize;
    let h = record.dt() / sub as f64;
    let acc = record.accel();
    let ug_at = |i: usize, s: f64| -> f64 {
        // Linear interpolation inside record interval i at fraction s.
        let a0 = acc[i];
        let a1 = acc.get(i + 1).copied().unwrap_or(a0);
        (a0 + s * (a1 - a0)) * G_SI
    };

    let mut st = initial;
    let mut theta = vec![st.theta];
    let mut rate = vec![st.theta_dot];
    let mut over = vec![st.overturned];
    let mut impacts = Vec::new();
    let mut steps = 0usize;

    for i in 0..acc.len() - 1 {
        for j in 0..sub {
            steps += 1;
            if st.overturned {
                continue;
            }
            let s0 = j as f64 / sub as f64;
            let t0 = (i as f64 + s0) * record.dt();
            let ug = |tau: f64| ug_at(i, s0 + tau / record.dt());
            advance_step(block, &mut st, h, t0, &ug, &mut impacts)?;
        }
        theta.push(st.theta);
        rate.push(st.theta_dot);
        over.push(st.overturned);
    }

    let history = ResponseHistory::new(record.dt(), vec![theta], vec![rate], Vec::new(), vec!["theta".into()])?;
    Ok(RockingRun { history, alpha: block.alpha, overturned: over, impacts, steps, final_state: st })
}

/// Advances one oracle step of length `h` starting at time `t0`, handling
/// uplift, any number of impacts, and overturning.
fn advance_step(
    block: &RockingBlock,
    st: &mut RockingState,
    h: f64,
    t0: f64,
    ug: &dyn Fn(f64) -> f64,
    impacts: &mut Vec<ImpactEvent>,
) -> Result<()> {
    let mut elapsed = 0.0;
    // Each pass either finishes the step or consumes time up to an impact.
    for _ in 0..64 {
        let remaining = h - elapsed;
        if remaining <= 0.0 {
            return Ok(());
        }
        if st.pivot == 0 {
            let pivot = uplift_pivot(block, ug(elapsed));
            if pivot == 0 {
                // Resting block: check the end of the step for uplift on the next call.
                return Ok(());
            }
            st.pivot = pivot;
            st.theta = 0.0;
            st.theta_dot = 0.0;
        }
        let sgn = f64::from(st.pivot);
        let shifted = |tau: f64| ug(elapsed + tau);
        let (th1, v1) = rk4(block, st.theta, st.theta_dot, sgn, remaining, shifted);
        if !(th1.is_finite() && v1.is_finite()) {
            return Err(Error::Integration { time: t0 + elapsed });
        }
        let crossed = th1 * sgn < 0.0 || (th1 == 0.0 && v1 * sgn < 0.0);
        if !crossed {
            st.theta = th1;
            st.theta_dot = v1;
            if st.theta.abs() >= FRAC_PI_2 {
                st.overturned = true;
                st.theta_dot = 0.0;
            }
            return Ok(());
        }
        // Bisection on the sub-step length for the zero crossing.
        let (mut lo, mut hi) = (0.0, remaining);
        let mut at = (st.theta, st.theta_dot);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (th, v) = rk4(block, st.theta, st.theta_dot, sgn, mid, shifted);
            at = (th, v);
            if th.abs() < IMPACT_TOL && th * sgn >= 0.0 {
                lo = mid;
                break;
            }
            if th * sgn > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * remaining {
                lo = hi;
                at = rk4(block, st.theta, st.theta_dot, sgn, hi, shifted);
                break;
            }
        }
        elapsed += lo;
        let before = at.1;
        let after = block.e * before;
        impacts.push(ImpactEvent { time: t0 + elapsed, rate_before: before, rate_after: after });
        st.theta = 0.0;
        if after.abs() < REST_RATE * block.p && at.0.abs() < REST_THETA {
            *st = RockingState::at_rest();
        } else {
            st.theta_dot = after;
            st.pivot = -st.pivot;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn reference_block() -> RockingBlock {
        block_constants(4.0, 12.0, 1.0).unwrap()
    }

    #[test]
    fn reference_constants() {
        let b = reference_block();
        assert!((b.alpha - 0.32175).abs() < 1e-5);
        assert!((b.r - 6.3246).abs() < 1e-4);
        assert!((b.p - 1.0786).abs() < 1e-4);
        let sq = block_constants(3.0, 3.0, 2.0).unwrap();
        assert!((sq.alpha - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn inertia_split() {
        let b = reference_block();
        let i = inertia_identities(&b);
        assert!((i.translational + i.supplemental - i.pivot).abs() <= 4.0 * f64::EPSILON * i.pivot);
        assert!((i.pivot - 53.3333).abs() < 1e-3);
        assert!((i.supplemental - 1.3333).abs() < 1e-3);
        let slender = block_constants(1e-6, 10.0, 1.0).unwrap();
        assert!(inertia_identities(&slender).supplemental < 1e-12);
    }

    #[test]
    fn restitution_values() {
        let b = reference_block();
        assert!((b.e - 0.85).abs() < 1e-12);
        assert!((b.e * b.e - 0.7225).abs() < 1e-12);
        assert!((restitution_coefficient(1e-6).unwrap() - 1.0).abs() < 1e-11);
        let critical = (2.0_f64 / 3.0).sqrt().asin();
        assert!(matches!(restitution_coefficient(critical), Err(Error::UnsupportedGeometry(_))));
        assert!(matches!(restitution_coefficient(0.96), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn accel_signs() {
        let b = reference_block();
        let a = rocking_accel(&b, 1e-12, 1.0, 0.0);
        assert!(a < 0.0);
        assert!((a + b.p * b.p * b.alpha.sin()).abs() < 1e-9);
        assert!(rocking_accel(&b, b.alpha, 1.0, 0.0).abs() < 1e-15);
        assert!((b.uplift_threshold() - 3.27).abs() < 1e-6);
    }

    #[test]
    fn uplift_threshold_from_static_balance() {
        // Overturning moment m üg h versus restoring moment m g w.
        let b = reference_block();
        let oracle = G_SI * b.w / b.h;
        assert!((b.uplift_threshold() - oracle).abs() < 1e-12);
        assert_eq!(uplift_pivot(&b, -1.01 * oracle), 1);
        assert_eq!(uplift_pivot(&b, 1.01 * oracle), -1);
        assert_eq!(uplift_pivot(&b, 0.99 * oracle), 0);
    }

    #[test]
    fn at_rest_stays_at_rest() {
        let b = reference_block();
        let r = GroundMotionRecord::new("z", 0.01, vec![0.0; 200], vec![]).unwrap();
        let run = simulate_rocking(&b, &r, DEFAULT_ROCKING_DT).unwrap();
        assert!(run.theta().iter().all(|&t| t == 0.0));
        assert!(run.impacts.is_empty());
    }

    #[test]
    fn small_motion_does_not_uplift() {
        let b = reference_block();
        let r = GroundMotionRecord::new("s", 0.01, (0..300).map(|k| 0.3 * (k as f64 * 0.05).sin()).collect(), vec![]).unwrap();
        let run = simulate_rocking(&b, &r, DEFAULT_ROCKING_DT).unwrap();
        assert!(run.theta().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn rejects_coarse_step() {
        let r = GroundMotionRecord::new("z", 0.01, vec![0.0; 2], vec![]).unwrap();
        assert!(simulate_rocking(&reference_block(), &r, 0.01).is_err());
    }

    #[test]
    fn csv_columns() {
        let b = reference_block();
        let r = GroundMotionRecord::new("z", 0.01, vec![0.0; 3], vec![]).unwrap();
        let run = simulate_rocking_from(&b, &r, 1e-4, RockingState::released(0.1)).unwrap();
        let csv = run.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time,theta,theta_norm,theta_dot,overturned"));
        assert!(lines.next().unwrap().ends_with(",0"));
    }

    fn quiet(seconds: f64) -> GroundMotionRecord {
        GroundMotionRecord::new("quiet", 0.01, vec![0.0; (seconds / 0.01) as usize + 1], vec![]).unwrap()
    }

    #[test]
    fn free_rocking_quarter_period() {
        let b = reference_block();
        let run = simulate_rocking_from(&b, &quiet(4.0), DEFAULT_ROCKING_DT, RockingState::released(b.alpha / 2.0)).unwrap();
        let first = run.impacts[0].time;
        // Linearized closed form: (1/p)·acosh(1/(1 − θ0/α)).
        let closed = (2.0f64).acosh() / b.p;
        assert!((closed - 1.2210).abs() < 1e-4);
        assert!((first - closed).abs() / closed < 5e-3, "{first} vs {closed}");
    }

    #[test]
    fn impacts_scale_rate_by_restitution() {
        let b = reference_block();
        let run = simulate_rocking_from(&b, &quiet(12.0), DEFAULT_ROCKING_DT, RockingState::released(0.6 * b.alpha)).unwrap();
        assert!(run.impacts.len() >= 4);
        for ev in &run.impacts {
            assert!((ev.rate_after / ev.rate_before - b.e).abs() < 1e-12);
            let ke = |r: f64| 0.5 * b.pivot_inertia() * r * r;
            assert!((ke(ev.rate_after) / ke(ev.rate_before) - 0.7225).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_conserved_between_impacts() {
        let b = reference_block();
        let run = simulate_rocking_from(&b, &quiet(8.0), DEFAULT_ROCKING_DT, RockingState::released(0.5 * b.alpha)).unwrap();
        let dt = run.history.dt;
        let e: Vec<f64> = run.theta().iter().zip(&run.history.vel[0]).map(|(&t, &r)| b.energy(t, r)).collect();
        let mut checked = 0;
        for k in 1..e.len() {
            let (t0, t1) = ((k - 1) as f64 * dt, k as f64 * dt);
            if run.impacts.iter().any(|ev| ev.time > t0 - 1e-9 && ev.time <= t1 + 1e-9) {
                continue;
            }
            assert!((e[k] - e[k - 1]).abs() <= 1e-6 * e[k - 1], "step {k}");
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn amplitude_decays_in_free_rocking() {
        let b = reference_block();
        let run = simulate_rocking_from(&b, &quiet(15.0), DEFAULT_ROCKING_DT, RockingState::released(0.8 * b.alpha)).unwrap();
        let th = run.theta();
        let peaks: Vec<f64> =
            (1..th.len() - 1).filter(|&k| th[k].abs() > th[k - 1].abs() && th[k].abs() >= th[k + 1].abs()).map(|k| th[k].abs()).collect();
        assert!(peaks.len() >= 3);
        assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
        assert!(!run.overturned.iter().any(|&o| o));
    }

    #[test]
    fn odd_symmetry_under_negated_record() {
        let b = reference_block();
        let acc: Vec<f64> = (0..600).map(|k| 0.6 * (k as f64 * 0.01 * 2.0 * std::f64::consts::PI * 1.2).sin()).collect();
        let rec = GroundMotionRecord::new("s", 0.01, acc, vec![]).unwrap();
        let a = simulate_rocking(&b, &rec, DEFAULT_ROCKING_DT).unwrap();
        let n = simulate_rocking(&b, &rec.negated(), DEFAULT_ROCKING_DT).unwrap();
        assert!(a.theta().iter().any(|t| t.abs() > 1e-3));
        for (x, y) in a.theta().iter().zip(n.theta()) {
            assert!((x + y).abs() <= 1e-12 * b.alpha, "{x} {y}");
        }
    }
}
