use super::{avg_error_rate, build_dataset, rollout, Normalizer, Oracle};
use crate::ann::{teacher_forced_error, DenseNetwork};
use crate::error::Result;
use crate::history::ResponseHistory;
use crate::signals::GroundMotionRecord;
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Training,
    Testing,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Training => "Training",
            Role::Testing => "Testing",
        })
    }
}

/// Errors (percent) and timings for one motion.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub motion: String,
    pub role: Role,
    pub closed_loop: Vec<f64>,
    pub teacher_forced: Vec<f64>,
    /// Relative error of the peak |response| per DOF.
    pub peak_error: Vec<f64>,
    pub oracle_s: f64,
    pub rollout_s: f64,
}

impl EvalRow {
    pub fn speedup(&self) -> f64 {
        self.oracle_s / self.rollout_s
    }

    pub fn mean_closed_loop(&self) -> f64 {
        self.closed_loop.iter().sum::<f64>() / self.closed_loop.len() as f64
    }

    pub fn mean_teacher_forced(&self) -> f64 {
        self.teacher_forced.iter().sum::<f64>() / self.teacher_forced.len() as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub n_dof: usize,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn new(n_dof: usize) -> Self {
        Self { n_dof, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("motion,role");
        for prefix in ["closed_loop", "teacher_forced", "peak"] {
            for i in 1..=self.n_dof {
                let _ = write!(s, ",{prefix}_dof{i}_pct");
            }
        }
        s.push_str(",oracle_s,rollout_s,speedup\n");
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.motion, r.role);
            for v in r.closed_loop.iter().chain(&r.teacher_forced).chain(&r.peak_error) {
                let _ = write!(s, ",{v:.4}");
            }
            let _ = writeln!(s, ",{:.6},{:.6},{:.3}", r.oracle_s, r.rollout_s, r.speedup());
        }
        s
    }
}

/// Evaluation of one motion together with both trajectories.
#[derive(Debug, Clone)]
pub struct MotionEval {
    pub row: EvalRow,
    pub truth: ResponseHistory,
    pub pred: ResponseHistory,
}

/// Runs the oracle and a closed-loop rollout on `record` and compares them.
pub fn evaluate_motion(
    oracle: &Oracle,
    net: &DenseNetwork,
    norm: &Normalizer,
    record: &GroundMotionRecord,
    role: Role,
) -> Result<MotionEval> {
    let n = oracle.n_dof();
    let t0 = Instant::now();
    let truth = oracle.simulate(record)?;
    let oracle_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let pred = rollout(net, record, norm, n, usize::MAX)?;
    let rollout_s = t1.elapsed().as_secs_f64();
    let closed_loop = (0..n).map(|i| avg_error_rate(&pred, &truth, i)).collect::<Result<Vec<_>>>()?;
    let series = build_dataset(&truth, record, norm)?;
    let teacher_forced = teacher_forced_error(net, &series)?;
    let peak_error = (0..n)
        .map(|i| {
            let (p, t) = (pred.peak_disp(i), truth.peak_disp(i));
            100.0 * (p - t).abs() / t
        })
        .collect();
    let row = EvalRow { motion: record.id().to_string(), role, closed_loop, teacher_forced, peak_error, oracle_s, rollout_s };
    Ok(MotionEval { row, truth, pred })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut rep = EvalReport::new(3);
        assert_eq!(rep.to_csv().lines().count(), 1);
        rep.rows.push(EvalRow {
            motion: "syn1".into(),
            role: Role::Training,
            closed_loop: vec![1.8, 1.5, 0.8],
            teacher_forced: vec![1.0, 1.0, 0.5],
            peak_error: vec![2.0, 3.0, 4.0],
            oracle_s: 2.0,
            rollout_s: 0.5,
        });
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0].split(',').count(), 2 + 9 + 3);
        assert!(lines[1].starts_with("syn1,Training,1.8000,1.5000,0.8000"));
        assert!(lines[1].ends_with(",4.000"));
    }
}
