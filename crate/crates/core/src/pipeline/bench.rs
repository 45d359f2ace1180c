use super::{rollout, Normalizer, Oracle};
use crate::ann::DenseNetwork;
use crate::error::Result;
use crate::parallel;
use crate::signals::GroundMotionRecord;
use std::fmt::Write as _;
use std::time::Instant;

/// Per-motion timings are the best of this many runs.
const REPEATS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub motion: String,
    pub oracle_s: f64,
    pub rollout_s: f64,
    pub oracle_steps: usize,
    pub rollout_steps: usize,
}

/// Oracle versus rollout wall-clock over a set of motions. Per-motion rows
/// come from the single-worker pass, best of [`REPEATS`]; `multi` times the
/// same work spread over all workers.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Total (oracle, rollout) seconds, one worker.
    pub single: (f64, f64),
    /// Total (oracle, rollout) seconds, all workers.
    pub multi: (f64, f64),
    pub workers: usize,
}

fn ratio(oracle: f64, rollout: f64) -> String {
    if rollout > 0.0 {
        format!("{:.3}", oracle / rollout)
    } else {
        "nan".into()
    }
}

impl BenchReport {
    pub fn single_speedup(&self) -> f64 {
        self.single.0 / self.single.1
    }

    pub fn multi_speedup(&self) -> f64 {
        self.multi.0 / self.multi.1
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,motion,oracle_s,rollout_s,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "single,{},{:.6},{:.6},{}", r.motion, r.oracle_s, r.rollout_s, ratio(r.oracle_s, r.rollout_s));
        }
        let _ = writeln!(s, "single_total,all,{:.6},{:.6},{}", self.single.0, self.single.1, ratio(self.single.0, self.single.1));
        let _ = writeln!(
            s,
            "multi_total,workers={},{:.6},{:.6},{}",
            self.workers,
            self.multi.0,
            self.multi.1,
            ratio(self.multi.0, self.multi.1)
        );
        s
    }
}

pub fn bench(oracle: &Oracle, records: &[GroundMotionRecord], net: &DenseNetwork, norm: &Normalizer) -> Result<BenchReport> {
    let n = oracle.n_dof();
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let mut oracle_s = f64::INFINITY;
        let mut rollout_s = f64::INFINITY;
        let mut h = None;
        for _ in 0..REPEATS {
            let t0 = Instant::now();
            oracle.simulate(r)?;
            oracle_s = oracle_s.min(t0.elapsed().as_secs_f64());
            let t1 = Instant::now();
            let pred = rollout(net, r, norm, n, usize::MAX)?;
            rollout_s = rollout_s.min(t1.elapsed().as_secs_f64());
            h = Some(pred);
        }
        let h = h.expect("at least one repeat");
        rows.push(BenchRow {
            motion: r.id().to_string(),
            oracle_s,
            rollout_s,
            oracle_steps: oracle.steps_for(r),
            rollout_steps: h.len() - 1,
        });
    }
    let single = (rows.iter().map(|r| r.oracle_s).sum(), rows.iter().map(|r| r.rollout_s).sum());

    let t0 = Instant::now();
    parallel::map(records, |r| oracle.simulate(r)).into_iter().collect::<Result<Vec<_>>>()?;
    let multi_oracle = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    parallel::map(records, |r| rollout(net, r, norm, n, usize::MAX)).into_iter().collect::<Result<Vec<_>>>()?;
    let multi_rollout = t1.elapsed().as_secs_f64();
    let multi = if records.is_empty() { (0.0, 0.0) } else { (multi_oracle, multi_rollout) };
    Ok(BenchReport { rows, single, multi, workers: parallel::workers() })
}
