//! Trains a frame surrogate on two synthetic motions scaled to Sa(T1)
//! (3 g unless given) and reports closed-loop errors on those and on a
//! held-out motion. Set FRAME_TRAINING_DUMP=<dir> to write the histories.
//!
//! cargo run --release -p surrogate-core --example frame_training [seed] [sa_g]

use std::time::Instant;
use surrogate_core::ann::GrowthPolicy;
use surrogate_core::frame::{IntegratorConfig, ShearFrame};
use surrogate_core::pipeline::{evaluate_motion, train_surrogate, Oracle, Role};
use surrogate_core::signals::{scale_to_sa, synthetic_record, SyntheticSpec, DEFAULT_SPECTRUM_DAMPING};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let sa_target: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3.0);
    let dump = std::env::var("FRAME_TRAINING_DUMP").ok();
    let frame = ShearFrame::reference()?;
    let oracle = Oracle::Frame { frame, cfg: IntegratorConfig::default() };
    let motion = |s: u64| -> Result<_, Box<dyn std::error::Error>> {
        let rec = synthetic_record(&SyntheticSpec { seed: s, ..SyntheticSpec::default() })?;
        Ok(scale_to_sa(&rec, 0.55, DEFAULT_SPECTRUM_DAMPING, sa_target)?.0)
    };
    let train = vec![motion(seed)?, motion(seed + 1)?];
    let held_out = motion(seed + 2)?;
    let policy = GrowthPolicy { seed, ..GrowthPolicy::default() };
    let t0 = Instant::now();
    let fit = train_surrogate(&oracle, &train, Some(&held_out), &policy)?;
    let out = &fit.outcome;
    println!(
        "converged={} train_error={:.3}% valid_error={:.3}% growth={} arch={} in {:.1}s",
        out.converged,
        out.train_error,
        out.valid_error,
        out.growth_count,
        out.net.architecture(),
        t0.elapsed().as_secs_f64()
    );
    if let Some(dir) = &dump {
        std::fs::write(format!("{dir}/train_log.csv"), out.log.to_csv())?;
    }
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
    for (rec, role) in train.iter().map(|r| (r, Role::Training)).chain([(&held_out, Role::Testing)]) {
        let ev = evaluate_motion(&oracle, &out.net, &fit.normalizer, rec, role)?;
        println!(
            "{} {}: closed-loop {} teacher-forced {} peak {}",
            ev.row.motion,
            role,
            fmt(&ev.row.closed_loop),
            fmt(&ev.row.teacher_forced),
            fmt(&ev.row.peak_error)
        );
        if let Some(dir) = &dump {
            std::fs::write(format!("{dir}/{}_truth.csv", ev.row.motion), ev.truth.to_csv())?;
            std::fs::write(format!("{dir}/{}_pred.csv", ev.row.motion), ev.pred.to_csv())?;
        }
    }
    Ok(())
}
