use crate::config::{Experiment, Structure};
use crate::error::user;
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use surrogate_core::ann::{network_from_text, network_to_text, DenseNetwork};
use surrogate_core::frame::simulate_frame;
use surrogate_core::parallel;
use surrogate_core::pipeline::{bench, evaluate_motion, feature_width, train_surrogate, EvalReport, Normalizer, Role};
use surrogate_core::rocking::simulate_rocking;
use surrogate_core::signals::{elastic_sa, pga, response_spectrum, spectrum_csv, write_at2};
use surrogate_core::svg::{stacked_plot, Series};

/// Files written by a command, relative paths as given to `write`.
#[derive(Debug, Default)]
pub struct Outputs(pub Vec<String>);

impl Outputs {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.0.push(name.to_string());
        Ok(())
    }
}

fn prepare(exp: &Experiment) -> Result<&Path> {
    std::fs::create_dir_all(&exp.out_dir).with_context(|| format!("creating {}", exp.out_dir.display()))?;
    Ok(&exp.out_dir)
}

/// Oracle histories, one CSV per record.
pub fn cmd_simulate(exp: &Experiment, which: Option<Structure>) -> Result<Outputs> {
    let dir = prepare(exp)?;
    let which = which.unwrap_or(exp.config.structure);
    let csvs: Vec<Result<(String, String)>> = match which {
        Structure::Frame => {
            let frame = exp.config.shear_frame()?;
            let cfg = exp.config.integrator();
            parallel::map(&exp.records, |r| {
                let run = simulate_frame(&frame, r, &cfg).with_context(|| format!("simulating {}", r.id()))?;
                Ok((format!("frame_{}.csv", r.id()), run.history.to_csv()))
            })
        }
        Structure::Rocking => {
            let block = exp.config.block()?;
            let dt = exp.config.rocking.dt;
            parallel::map(&exp.records, |r| {
                let run = simulate_rocking(&block, r, dt).with_context(|| format!("simulating {}", r.id()))?;
                Ok((format!("rocking_{}.csv", r.id()), run.to_csv()))
            })
        }
    };
    let mut out = Outputs::default();
    for item in csvs {
        let (name, csv) = item?;
        out.write(dir, &name, &csv)?;
    }
    Ok(out)
}

/// Scaled records as AT2 plus a table of factors.
pub fn cmd_scale(exp: &Experiment) -> Result<Outputs> {
    let rec = &exp.config.records;
    if rec.sa_target.is_none() && rec.pga_target.is_none() {
        return Err(user("scale needs config key `records.sa_target` or `records.pga_target`"));
    }
    let dir = prepare(exp)?;
    let period = rec.sa_period.unwrap_or(exp.config.frame.periods[0]);
    let mut out = Outputs::default();
    let mut table = format!("record,factor,pga_g,sa_g_at_{period}s\n");
    for (r, (_, factor)) in exp.records.iter().zip(&exp.scale_factors) {
        let sa = elastic_sa(r, period, rec.sa_damping)?;
        let _ = writeln!(table, "{},{factor:.9e},{:.9e},{sa:.9e}", r.id(), pga(r));
        out.write(dir, &format!("{}.at2", r.id()), &write_at2(r))?;
    }
    out.write(dir, "scale_factors.csv", &table)?;
    Ok(out)
}

/// Elastic pseudo-acceleration spectra of the (scaled) records.
pub fn cmd_spectrum(exp: &Experiment) -> Result<Outputs> {
    let dir = prepare(exp)?;
    let s = &exp.config.spectrum;
    let periods = s.periods();
    let spectra = parallel::map(&exp.records, |r| response_spectrum(r, &periods, s.damping));
    let mut out = Outputs::default();
    for (r, spec) in exp.records.iter().zip(spectra) {
        out.write(dir, &format!("spectrum_{}.csv", r.id()), &spectrum_csv(&spec?))?;
    }
    Ok(out)
}

/// Adaptive training on the configured motions.
pub fn cmd_train(exp: &Experiment) -> Result<Outputs> {
    let dir = prepare(exp)?;
    let (train, valid) = exp.training_split()?;
    let oracle = exp.config.oracle(exp.config.structure)?;
    let policy = exp.config.policy(exp.seed)?;
    let fit = train_surrogate(&oracle, &train, valid.as_ref(), &policy).context("training")?;
    let o = &fit.outcome;
    let mut out = Outputs::default();
    out.write(dir, "network.txt", &network_to_text(&o.net))?;
    out.write(dir, "normalizer.txt", &fit.normalizer.to_text())?;
    out.write(dir, "train_log.csv", &o.log.to_csv())?;
    let mut summary = String::from("key,value\n");
    let _ = writeln!(summary, "converged,{}", o.converged);
    let _ = writeln!(summary, "train_error_pct,{:.6}", o.train_error);
    let _ = writeln!(summary, "valid_error_pct,{:.6}", o.valid_error);
    let _ = writeln!(summary, "growth_events,{}", o.growth_count);
    let _ = writeln!(summary, "epochs,{}", o.log.rows().len());
    let _ = writeln!(summary, "architecture,{}", o.net.architecture());
    out.write(dir, "train_summary.csv", &summary)?;
    let mut report = EvalReport::new(oracle.n_dof());
    for r in &train {
        report.rows.push(evaluate_motion(&oracle, &o.net, &fit.normalizer, r, Role::Training)?.row);
    }
    out.write(dir, "eval_train.csv", &report.to_csv())?;
    Ok(out)
}

/// Network and normalizer stored by `train`.
pub fn load_surrogate(exp: &Experiment, network: Option<&Path>) -> Result<(DenseNetwork, Normalizer)> {
    let net_path = network.map(Path::to_path_buf).unwrap_or_else(|| exp.out_dir.join("network.txt"));
    let norm_path = net_path.with_file_name("normalizer.txt");
    let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| user(format!("cannot read {}: {e}", p.display())));
    let net = network_from_text(&read(&net_path)?).with_context(|| format!("in network file {}", net_path.display()))?;
    let norm = Normalizer::from_text(&read(&norm_path)?).with_context(|| format!("in normalizer file {}", norm_path.display()))?;
    let n = exp.config.oracle(exp.config.structure)?.n_dof();
    let (want_in, want_out) = (feature_width(n), n);
    if net.d_in() != want_in || net.d_out() != want_out {
        return Err(user(format!(
            "network {} has input/output dims {}/{}, the {:?} structure expects {want_in}/{want_out}",
            net_path.display(),
            net.d_in(),
            net.d_out(),
            exp.config.structure
        )));
    }
    Ok((net, norm))
}

/// Closed-loop evaluation of a stored surrogate on every record.
pub fn cmd_eval(exp: &Experiment, network: Option<&Path>) -> Result<Outputs> {
    let (net, norm) = load_surrogate(exp, network)?;
    let dir = prepare(exp)?;
    let oracle = exp.config.oracle(exp.config.structure)?;
    let train_ids = exp.training_ids();
    let mut report = EvalReport::new(oracle.n_dof());
    let mut out = Outputs::default();
    for r in &exp.records {
        let role = if train_ids.iter().any(|id| id == r.id()) { Role::Training } else { Role::Testing };
        let ev = evaluate_motion(&oracle, &net, &norm, r, role).with_context(|| format!("evaluating {}", r.id()))?;
        let svg = surrogate_core::svg::overlay_plot(&format!("{} ({role})", r.id()), &ev.pred, &ev.truth);
        out.write(dir, &format!("overlay_{}.svg", r.id()), &svg)?;
        report.rows.push(ev.row);
    }
    out.write(dir, "eval.csv", &report.to_csv())?;
    Ok(out)
}

/// Oracle versus surrogate timing over every record.
pub fn cmd_bench(exp: &Experiment, network: Option<&Path>) -> Result<Outputs> {
    let (net, norm) = load_surrogate(exp, network)?;
    let dir = prepare(exp)?;
    let oracle = exp.config.oracle(exp.config.structure)?;
    let report = bench(&oracle, &exp.records, &net, &norm).context("benchmark")?;
    let mut out = Outputs::default();
    out.write(dir, "bench.csv", &report.to_csv())?;
    Ok(out)
}

/// Ground motion and oracle response, stacked, one SVG per record.
pub fn cmd_plot(exp: &Experiment) -> Result<Outputs> {
    let dir = prepare(exp)?;
    let oracle = exp.config.oracle(exp.config.structure)?;
    let histories = parallel::map(&exp.records, |r| oracle.simulate(r));
    let mut out = Outputs::default();
    for (r, h) in exp.records.iter().zip(histories) {
        let h = h.with_context(|| format!("simulating {}", r.id()))?;
        let mut panels = vec![("ground (g)".to_string(), vec![Series { label: "accel", color: "#555555", values: r.accel() }])];
        for (label, d) in h.labels.iter().zip(&h.disp) {
            panels.push((label.clone(), vec![Series { label: "oracle", color: "#1f77b4", values: d }]));
        }
        out.write(dir, &format!("plot_{}.svg", r.id()), &stacked_plot(r.id(), r.dt(), &panels))?;
    }
    Ok(out)
}
