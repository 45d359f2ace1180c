//! Oracle histories to supervised series, closed-loop rollouts and reports.

mod bench;
mod report;

pub use crate::ann::SupervisedSeries;
pub use bench::{bench, BenchReport, BenchRow};
pub use report::{evaluate_motion, EvalReport, EvalRow, MotionEval, Role};

use crate::ann::{adaptive_fit, DenseNetwork, FitOutcome, GrowthPolicy, Scratch};
use crate::error::{Error, Result};
use crate::frame::hht::IntegratorConfig;
use crate::frame::{simulate_frame, ShearFrame};
use crate::history::ResponseHistory;
use crate::rocking::{simulate_rocking, RockingBlock};
use crate::signals::GroundMotionRecord;

/// Network operating step (s); records are resampled onto it.
pub const ROLLOUT_DT: f64 = 0.01;

/// Scale factors between physical and network units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    /// Peak |ground acceleration| (g) over the training motions.
    pub ground_scale: f64,
    /// Story height for the frame, α for the rocking block.
    pub response_scale: f64,
}

impl Normalizer {
    pub fn new(ground_scale: f64, response_scale: f64) -> Result<Self> {
        for (v, name) in [(ground_scale, "ground"), (response_scale, "response")] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Degenerate(format!("{name} scale must be positive, got {v}")));
            }
        }
        Ok(Self { ground_scale, response_scale })
    }

    pub fn ground(&self, a: f64) -> f64 {
        a / self.ground_scale
    }

    pub fn response(&self, u: f64) -> f64 {
        u / self.response_scale
    }

    pub fn invert_ground(&self, a: f64) -> f64 {
        a * self.ground_scale
    }

    pub fn invert_response(&self, u: f64) -> f64 {
        u * self.response_scale
    }

    pub fn to_text(&self) -> String {
        format!("ground_scale {:?}\nresponse_scale {:?}\n", self.ground_scale, self.response_scale)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut ground = None;
        let mut response = None;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Format { line: i + 1, msg: format!("malformed normalizer line `{line}`") };
            let mut parts = line.split_whitespace();
            let (key, value) = (parts.next().ok_or_else(bad)?, parts.next().ok_or_else(bad)?);
            let v: f64 = value.parse().map_err(|_| bad())?;
            match key {
                "ground_scale" => ground = Some(v),
                "response_scale" => response = Some(v),
                _ => return Err(bad()),
            }
        }
        match (ground, response) {
            (Some(g), Some(r)) => Self::new(g, r),
            _ => Err(Error::Format { line: 0, msg: "normalizer needs ground_scale and response_scale".into() }),
        }
    }
}

/// Ground scale from the training motions, response scale given by the structure.
pub fn fit_normalizer(records: &[&GroundMotionRecord], response_scale: f64) -> Result<Normalizer> {
    if records.is_empty() {
        return Err(Error::Argument("normalizer needs at least one record".into()));
    }
    let peak = records.iter().flat_map(|r| r.accel()).fold(0.0f64, |m, a| m.max(a.abs()));
    Normalizer::new(peak, response_scale)
}

/// Either ground-truth simulator.
#[derive(Debug, Clone)]
pub enum Oracle {
    Frame { frame: ShearFrame, cfg: IntegratorConfig },
    Rocking { block: RockingBlock, dt: f64 },
}

impl Oracle {
    pub fn n_dof(&self) -> usize {
        match self {
            Oracle::Frame { frame, .. } => frame.n(),
            Oracle::Rocking { .. } => 1,
        }
    }

    pub fn response_scale(&self) -> f64 {
        match self {
            Oracle::Frame { frame, .. } => frame.story_height(),
            Oracle::Rocking { block, .. } => block.alpha,
        }
    }

    pub fn oracle_dt(&self) -> f64 {
        match self {
            Oracle::Frame { cfg, .. } => cfg.dt,
            Oracle::Rocking { dt, .. } => *dt,
        }
    }

    /// Number of integration steps the oracle takes for `record`.
    pub fn steps_for(&self, record: &GroundMotionRecord) -> usize {
        (record.duration() / self.oracle_dt() + 1e-9).floor() as usize
    }

    /// Displacement history on the record grid.
    pub fn simulate(&self, record: &GroundMotionRecord) -> Result<ResponseHistory> {
        match self {
            Oracle::Frame { frame, cfg } => {
                let run = simulate_frame(frame, record, cfg)?;
                to_record_grid(&run.history, record)
            }
            Oracle::Rocking { block, dt } => {
                let run = simulate_rocking(block, record, *dt)?;
                to_record_grid(&run.history, record)
            }
        }
    }
}

/// Downsamples an oracle history onto the record grid.
pub fn to_record_grid(history: &ResponseHistory, record: &GroundMotionRecord) -> Result<ResponseHistory> {
    let ratio = record.dt() / history.dt;
    let stride = ratio.round() as usize;
    if stride == 0 || (ratio - stride as f64).abs() > 1e-6 * ratio {
        return Err(Error::Argument(format!("record dt {} is not a multiple of history dt {}", record.dt(), history.dt)));
    }
    let mut h = history.downsample(stride);
    h.dt = record.dt();
    h.vel.clear();
    h.acc.clear();
    Ok(h.truncate(record.npts()))
}

/// Feature layout at step t: `[p(t), p(t−1), p(t−2), O(t)…, O(t−1)…]`,
/// target `O(t+1)`, everything normalized and lags zero before the start.
pub fn build_dataset(history: &ResponseHistory, record: &GroundMotionRecord, norm: &Normalizer) -> Result<SupervisedSeries> {
    if (history.dt - record.dt()).abs() > 1e-9 * record.dt() || history.len() != record.npts() {
        return Err(Error::Argument(format!(
            "history ({} samples at {} s) and record ({} samples at {} s) are not aligned",
            history.len(),
            history.dt,
            record.npts(),
            record.dt()
        )));
    }
    let n = history.n_dof();
    let len = history.len();
    let p = |t: isize| if t < 0 { 0.0 } else { norm.ground(record.accel()[t as usize]) };
    let o = |i: usize, t: isize| if t < 0 { 0.0 } else { norm.response(history.disp[i][t as usize]) };
    let mut inputs = Vec::with_capacity(len.saturating_sub(1));
    let mut targets = Vec::with_capacity(len.saturating_sub(1));
    for t in 0..len.saturating_sub(1) as isize {
        let mut row = vec![p(t), p(t - 1), p(t - 2)];
        row.extend((0..n).map(|i| o(i, t)));
        row.extend((0..n).map(|i| o(i, t - 1)));
        inputs.push(row);
        targets.push((0..n).map(|i| o(i, t + 1)).collect());
    }
    SupervisedSeries::new(record.dt(), inputs, targets)
}

pub fn feature_width(n: usize) -> usize {
    2 * n + 3
}

/// Autoregressive prediction from rest. Returns `min(steps, npts − 1) + 1`
/// samples in physical units, the first being the at-rest state.
pub fn rollout(net: &DenseNetwork, record: &GroundMotionRecord, norm: &Normalizer, n: usize, steps: usize) -> Result<ResponseHistory> {
    if net.d_in() != feature_width(n) || net.d_out() != n {
        return Err(Error::Argument(format!(
            "network is {}→{}, a {n}-DOF surrogate needs {}→{n}",
            net.d_in(),
            net.d_out(),
            feature_width(n)
        )));
    }
    let len = steps.min(record.npts().saturating_sub(1));
    let acc = record.accel();
    let p = |t: isize| if t < 0 { 0.0 } else { norm.ground(acc[t as usize]) };
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut disp = vec![Vec::with_capacity(len + 1); n];
    disp.iter_mut().for_each(|d| d.push(0.0));
    let mut x = vec![0.0; feature_width(n)];
    let mut y = Vec::with_capacity(n);
    let mut scratch = Scratch::default();
    for t in 0..len {
        let ti = t as isize;
        x[0] = p(ti);
        x[1] = p(ti - 1);
        x[2] = p(ti - 2);
        x[3..3 + n].copy_from_slice(&cur);
        x[3 + n..].copy_from_slice(&prev);
        net.predict_into(&x, &mut scratch, &mut y);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::RolloutDivergence { step: t + 1 });
        }
        std::mem::swap(&mut prev, &mut cur);
        cur.copy_from_slice(&y);
        for i in 0..n {
            disp[i].push(norm.invert_response(cur[i]));
        }
    }
    let labels = (1..=n).map(|i| format!("dof{i}")).collect();
    ResponseHistory::displacement_only(record.dt(), disp, labels)
}

/// `100 · mean|pred − truth| / max|truth|` for one DOF.
pub fn avg_error_rate(pred: &ResponseHistory, truth: &ResponseHistory, dof: usize) -> Result<f64> {
    if pred.len() != truth.len() || (pred.dt - truth.dt).abs() > 1e-12 * truth.dt {
        return Err(Error::Argument(format!("series not aligned: {} vs {} samples", pred.len(), truth.len())));
    }
    if dof >= pred.n_dof() || dof >= truth.n_dof() {
        return Err(Error::Argument(format!("dof {dof} out of range")));
    }
    let t = &truth.disp[dof];
    let peak = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate(format!("truth for dof {dof} is identically zero")));
    }
    let mae = pred.disp[dof].iter().zip(t).map(|(p, q)| (p - q).abs()).sum::<f64>() / t.len() as f64;
    Ok(100.0 * mae / peak)
}

/// Inputs and result of one surrogate training run.
#[derive(Debug, Clone)]
pub struct SurrogateFit {
    pub outcome: FitOutcome,
    pub normalizer: Normalizer,
    pub train_histories: Vec<ResponseHistory>,
    pub valid_history: Option<ResponseHistory>,
}

/// Simulates the oracle on each motion and runs adaptive training.
pub fn train_surrogate(
    oracle: &Oracle,
    train: &[GroundMotionRecord],
    valid: Option<&GroundMotionRecord>,
    policy: &GrowthPolicy,
) -> Result<SurrogateFit> {
    if train.is_empty() {
        return Err(Error::Argument("no training motions".into()));
    }
    let refs: Vec<&GroundMotionRecord> = train.iter().collect();
    let normalizer = fit_normalizer(&refs, oracle.response_scale())?;
    let histories: Vec<ResponseHistory> = crate::parallel::map(&refs, |r| oracle.simulate(r)).into_iter().collect::<Result<_>>()?;
    let series: Vec<SupervisedSeries> =
        histories.iter().zip(train).map(|(h, r)| build_dataset(h, r, &normalizer)).collect::<Result<_>>()?;
    let (valid_history, valid_series) = match valid {
        Some(r) => {
            let h = oracle.simulate(r)?;
            let s = build_dataset(&h, r, &normalizer)?;
            (Some(h), Some(s))
        }
        None => (None, None),
    };
    let n = oracle.n_dof();
    let net = policy.initial_network(feature_width(n), n)?;
    let outcome = adaptive_fit(net, &series, valid_series.as_ref(), policy)?;
    Ok(SurrogateFit { outcome, normalizer, train_histories: histories, valid_history })
}
