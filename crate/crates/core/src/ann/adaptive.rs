//! Training loop that halves the learning rate on stagnation and grows the
//! network once the rate bottoms out.

use super::growth::{deepen, growth_kind, widen, DeepenMode, GrowthKind, WidenMode};
use super::network::{DenseNetwork, Scratch, INITIAL_HIDDEN_LAYERS, INITIAL_HIDDEN_WIDTH};
use super::train::{mean_error, train_epoch, SupervisedSeries};
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// How `frozen_iterations` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrozenUnit {
    Samples,
    Epochs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPolicy {
    pub lr0: f64,
    pub lr_halve_patience: usize,
    pub lr_min: f64,
    pub error_threshold_pct: f64,
    pub widens_per_deepen: usize,
    pub frozen_iterations: usize,
    pub frozen_unit: FrozenUnit,
    pub pretrain_epochs: usize,
    pub max_growth_steps: usize,
    /// Relative drop of the best error that counts as an improvement.
    pub min_improvement: f64,
    /// Hard cap on normal-mode epochs.
    pub max_epochs: usize,
    pub widen_mode: WidenMode,
    pub deepen_mode: DeepenMode,
    pub initial_hidden_layers: usize,
    pub initial_hidden_width: usize,
    pub seed: u64,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        let lr0 = 0.5;
        Self {
            lr0,
            lr_halve_patience: 20,
            lr_min: lr0 / 256.0,
            error_threshold_pct: 3.0,
            widens_per_deepen: 5,
            frozen_iterations: 10_000,
            frozen_unit: FrozenUnit::Samples,
            pretrain_epochs: 200,
            max_growth_steps: 25,
            min_improvement: 1e-3,
            max_epochs: 20_000,
            widen_mode: WidenMode::Random,
            deepen_mode: DeepenMode::Random,
            initial_hidden_layers: INITIAL_HIDDEN_LAYERS,
            initial_hidden_width: INITIAL_HIDDEN_WIDTH,
            seed: 0,
        }
    }
}

impl GrowthPolicy {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be positive, got {v}")))
            }
        };
        pos(self.lr0, "lr0")?;
        pos(self.lr_min, "lr_min")?;
        pos(self.error_threshold_pct, "error_threshold_pct")?;
        if !(0.0..1.0).contains(&self.min_improvement) {
            return Err(Error::Argument(format!("min_improvement must be in [0, 1), got {}", self.min_improvement)));
        }
        for (v, name) in [
            (self.lr_halve_patience, "lr_halve_patience"),
            (self.widens_per_deepen, "widens_per_deepen"),
            (self.frozen_iterations, "frozen_iterations"),
            (self.max_epochs, "max_epochs"),
            (self.initial_hidden_layers, "initial_hidden_layers"),
            (self.initial_hidden_width, "initial_hidden_width"),
        ] {
            if v == 0 {
                return Err(Error::Argument(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Starting network for the given input/output widths.
    pub fn initial_network(&self, d_in: usize, d_out: usize) -> Result<DenseNetwork> {
        let mut dims = vec![d_in];
        dims.extend(std::iter::repeat_n(self.initial_hidden_width, self.initial_hidden_layers));
        dims.push(d_out);
        DenseNetwork::with_dims(&dims, self.seed)
    }

    fn growth_seed(&self, event: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(event as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    Normal,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogEvent {
    None,
    LrHalved,
    /// Non-finite loss; the epoch was rolled back and the rate halved.
    Divergence,
    Growth {
        kind: GrowthKind,
        frozen_updates: usize,
        frozen_conserved: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub epoch: usize,
    pub mode: TrainMode,
    pub lr: f64,
    pub train_error: f64,
    pub valid_error: f64,
    pub signed_error: f64,
    pub architecture: String,
    pub event: LogEvent,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    rows: Vec<LogRow>,
}

impl TrainLog {
    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn growth_events(&self) -> Vec<GrowthKind> {
        self.rows
            .iter()
            .filter_map(|r| match r.event {
                LogEvent::Growth { kind, .. } => Some(kind),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("epoch,mode,lr,train_error_pct,valid_error_pct,signed_error,architecture,event,frozen_updates,frozen_conserved\n");
        for r in &self.rows {
            let mode = match r.mode {
                TrainMode::Normal => "normal",
                TrainMode::Frozen => "frozen",
            };
            let (event, updates, conserved) = match r.event {
                LogEvent::None => (String::new(), String::new(), String::new()),
                LogEvent::LrHalved => ("lr_halved".into(), String::new(), String::new()),
                LogEvent::Divergence => ("divergence".into(), String::new(), String::new()),
                LogEvent::Growth { kind, frozen_updates, frozen_conserved } => {
                    let name = match kind {
                        GrowthKind::Widen => "widen",
                        GrowthKind::Deepen => "deepen",
                    };
                    (name.into(), frozen_updates.to_string(), frozen_conserved.to_string())
                }
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.epoch, mode, r.lr, r.train_error, r.valid_error, r.signed_error, r.architecture, event, updates, conserved
            );
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub net: DenseNetwork,
    pub log: TrainLog,
    pub converged: bool,
    /// Teacher-forced error of the returned network on the training series.
    pub train_error: f64,
    pub valid_error: f64,
    pub growth_count: usize,
}

fn frozen_values(net: &DenseNetwork) -> Vec<u64> {
    net.layers()
        .iter()
        .flat_map(|l| {
            let w = l.weights.iter().zip(&l.frozen_weights);
            let b = l.biases.iter().zip(&l.frozen_biases);
            w.chain(b).filter(|(_, &f)| f).map(|(v, _)| v.to_bits())
        })
        .collect()
}

/// Frozen-mode updates on a freshly grown network, cycling through the
/// training rows in order. Returns the updated network, the number of
/// sample updates and whether every frozen parameter kept its bits.
pub fn frozen_phase(
    grown: &DenseNetwork,
    train: &[&SupervisedSeries],
    lr: f64,
    iterations: usize,
    unit: FrozenUnit,
) -> Result<(DenseNetwork, usize, bool)> {
    let before = frozen_values(grown);
    let mut net = grown.clone();
    let mut scratch = Scratch::default();
    let mut updates = 0;
    match unit {
        FrozenUnit::Samples => {
            let rows = train.iter().flat_map(|s| s.inputs.iter().zip(&s.targets)).cycle().take(iterations);
            for (x, t) in rows {
                net.train_sample(x, t, lr, true, &mut scratch);
                updates += 1;
            }
        }
        FrozenUnit::Epochs => {
            for e in 0..iterations {
                let s = train[e % train.len()];
                for (x, t) in s.inputs.iter().zip(&s.targets) {
                    net.train_sample(x, t, lr, true, &mut scratch);
                    updates += 1;
                }
            }
        }
    }
    if !net.is_finite() {
        return Err(Error::Divergence(format!("frozen training diverged at lr {lr}")));
    }
    let conserved = frozen_values(&net) == before;
    Ok((net, updates, conserved))
}

/// Adaptive training. `train` holds the series trained on (alternating one
/// per epoch); `valid` selects the snapshot returned when the budget runs out.
pub fn adaptive_fit(
    net: DenseNetwork,
    train: &[SupervisedSeries],
    valid: Option<&SupervisedSeries>,
    policy: &GrowthPolicy,
) -> Result<FitOutcome> {
    policy.validate()?;
    if train.is_empty() || train.iter().any(SupervisedSeries::is_empty) {
        return Err(Error::Argument("adaptive training needs nonempty training series".into()));
    }
    let trains: Vec<&SupervisedSeries> = train.iter().collect();
    let valid_set: Vec<&SupervisedSeries> = match valid {
        Some(v) => vec![v],
        None => trains.clone(),
    };
    let mut net = net;
    let mut log = TrainLog::default();
    let mut lr = policy.lr0;
    let mut growth_count = 0;
    let mut epoch = 0;
    let mut err = mean_error(&net, &trains)?;
    let mut verr = mean_error(&net, &valid_set)?;
    let mut best_err = err;
    let mut since = 0;
    let mut best_valid = (verr, net.clone(), err);
    let row = |epoch, mode, lr, err, verr, signed, net: &DenseNetwork, event| LogRow {
        epoch,
        mode,
        lr,
        train_error: err,
        valid_error: verr,
        signed_error: signed,
        architecture: net.architecture(),
        event,
    };
    log.push(row(0, TrainMode::Normal, lr, err, verr, 0.0, &net, LogEvent::None));
    let mut converged = err <= policy.error_threshold_pct;

    while !converged && epoch < policy.max_epochs {
        let series = trains[epoch % trains.len()];
        let snapshot = net.clone();
        epoch += 1;
        let signed = match train_epoch(&mut net, series, lr, false) {
            Ok(m) => m.signed,
            Err(Error::Divergence(_)) => {
                net = snapshot;
                lr /= 2.0;
                since = 0;
                log.push(row(epoch, TrainMode::Normal, lr, err, verr, f64::NAN, &net, LogEvent::Divergence));
                continue;
            }
            Err(e) => return Err(e),
        };
        err = mean_error(&net, &trains)?;
        verr = mean_error(&net, &valid_set)?;
        if verr < best_valid.0 {
            best_valid = (verr, net.clone(), err);
        }
        let mut event = LogEvent::None;
        if err <= policy.error_threshold_pct {
            converged = true;
        } else if err < best_err * (1.0 - policy.min_improvement) {
            best_err = err;
            since = 0;
        } else {
            since += 1;
            if since >= policy.lr_halve_patience {
                lr /= 2.0;
                since = 0;
                event = LogEvent::LrHalved;
            }
        }
        log.push(row(epoch, TrainMode::Normal, lr, err, verr, signed, &net, event));
        if converged || epoch < policy.pretrain_epochs || lr >= policy.lr_min {
            continue;
        }
        if growth_count >= policy.max_growth_steps {
            break;
        }

        growth_count += 1;
        let kind = growth_kind(growth_count, policy.widens_per_deepen);
        let seed = policy.growth_seed(growth_count);
        let grown = match kind {
            GrowthKind::Widen => widen(&net, policy.widen_mode, seed)?,
            GrowthKind::Deepen => deepen(&net, policy.deepen_mode, seed)?,
        };
        lr = policy.lr0 / 2f64.powi(growth_count as i32);
        let (mut trained, updates, conserved) = loop {
            match frozen_phase(&grown, &trains, lr, policy.frozen_iterations, policy.frozen_unit) {
                Ok(r) => break r,
                Err(Error::Divergence(_)) if lr > f64::MIN_POSITIVE => lr /= 2.0,
                Err(e) => return Err(e),
            }
        };
        trained.clear_frozen();
        net = trained;
        err = mean_error(&net, &trains)?;
        verr = mean_error(&net, &valid_set)?;
        if verr < best_valid.0 {
            best_valid = (verr, net.clone(), err);
        }
        best_err = err;
        since = 0;
        converged = err <= policy.error_threshold_pct;
        let event = LogEvent::Growth { kind, frozen_updates: updates, frozen_conserved: conserved };
        log.push(row(epoch, TrainMode::Frozen, lr, err, verr, f64::NAN, &net, event));
    }

    let (net, train_error, valid_error) = if converged { (net, err, verr) } else { (best_valid.1, best_valid.2, best_valid.0) };
    Ok(FitOutcome { net, log, converged, train_error, valid_error, growth_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(f: impl Fn(f64) -> f64, n: usize, phase: f64) -> SupervisedSeries {
        let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 * 0.05 + phase).sin() * 1.5]).collect();
        let ts = xs.iter().map(|x| vec![f(x[0])]).collect();
        SupervisedSeries::new(0.01, xs, ts).unwrap()
    }

    #[test]
    fn policy_defaults_and_validation() {
        let p = GrowthPolicy::default();
        assert_eq!(p.lr0, 0.5);
        assert_eq!(p.lr_min, 0.5 / 256.0);
        assert!(p.validate().is_ok());
        assert!(GrowthPolicy { widens_per_deepen: 0, ..p.clone() }.validate().is_err());
        assert!(GrowthPolicy { lr0: -1.0, ..p }.validate().is_err());
    }

    #[test]
    fn realizable_target_converges_without_growth() {
        let train = [series_from(|x| (0.8 * x).tanh(), 300, 0.0), series_from(|x| (0.8 * x).tanh(), 300, 1.0)];
        let policy = GrowthPolicy { seed: 3, ..GrowthPolicy::default() };
        let net = policy.initial_network(1, 1).unwrap();
        let out = adaptive_fit(net, &train, None, &policy).unwrap();
        assert!(out.converged);
        assert_eq!(out.growth_count, 0);
        assert!(out.log.last().unwrap().train_error <= 3.0);
    }

    #[test]
    fn narrow_start_must_widen() {
        // Three bumps need more than one tanh unit per layer.
        let bumps = |x: f64| (-(x - 1.0).powi(2) * 8.0).exp() - (-(x).powi(2) * 8.0).exp() + (-(x + 1.0).powi(2) * 8.0).exp();
        let train = [series_from(bumps, 400, 0.0), series_from(bumps, 400, 0.7)];
        let policy = GrowthPolicy {
            initial_hidden_width: 1,
            initial_hidden_layers: 1,
            pretrain_epochs: 20,
            lr_halve_patience: 5,
            lr_min: 0.5 / 16.0,
            frozen_iterations: 2000,
            max_growth_steps: 12,
            seed: 1,
            ..GrowthPolicy::default()
        };
        let net = policy.initial_network(1, 1).unwrap();
        let out = adaptive_fit(net, &train, None, &policy).unwrap();
        assert!(out.log.growth_events().contains(&GrowthKind::Widen));
        assert!(out.net.param_count() > 4);
    }

    #[test]
    fn forced_growth_sequence() {
        let train = [series_from(|x| x.sin() * x.cos() * 3.0, 200, 0.0), series_from(|x| x.sin() * x.cos() * 3.0, 200, 0.5)];
        let policy = GrowthPolicy {
            error_threshold_pct: 1e-9,
            pretrain_epochs: 1,
            lr_halve_patience: 1,
            min_improvement: 0.5,
            lr_min: 0.3,
            max_growth_steps: 6,
            max_epochs: 500,
            seed: 9,
            ..GrowthPolicy::default()
        };
        let net = policy.initial_network(1, 1).unwrap();
        let out = adaptive_fit(net, &train, None, &policy).unwrap();
        let seq: String = out.log.growth_events().iter().map(|k| k.letter()).collect();
        assert_eq!(seq, "WWWWDW");
        for r in out.log.rows() {
            if let LogEvent::Growth { frozen_updates, frozen_conserved, .. } = r.event {
                assert_eq!(frozen_updates, 10_000);
                assert!(frozen_conserved);
            }
        }
        assert!(!out.converged);
        let archs: Vec<usize> = out.log.rows().iter().map(|r| r.architecture.len()).collect();
        assert!(archs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn frozen_phase_counts_epochs() {
        let train = [series_from(|x| x, 50, 0.0), series_from(|x| x, 30, 0.2)];
        let net = widen(&GrowthPolicy::default().initial_network(1, 1).unwrap(), WidenMode::Random, 0).unwrap();
        let refs: Vec<&SupervisedSeries> = train.iter().collect();
        let (_, n, ok) = frozen_phase(&net, &refs, 0.1, 3, FrozenUnit::Epochs).unwrap();
        assert_eq!(n, 50 + 30 + 50);
        assert!(ok);
        let (_, n, _) = frozen_phase(&net, &refs, 0.1, 123, FrozenUnit::Samples).unwrap();
        assert_eq!(n, 123);
    }

    #[test]
    fn deterministic_log() {
        let train = [series_from(|x| x * x - 0.5, 200, 0.0), series_from(|x| x * x - 0.5, 200, 0.4)];
        let policy = GrowthPolicy {
            pretrain_epochs: 5,
            lr_min: 0.2,
            max_growth_steps: 2,
            frozen_iterations: 500,
            seed: 4,
            ..GrowthPolicy::default()
        };
        let run = || adaptive_fit(policy.initial_network(1, 1).unwrap(), &train, None, &policy).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.log.to_csv(), b.log.to_csv());
        assert_eq!(a.net, b.net);
    }
}
