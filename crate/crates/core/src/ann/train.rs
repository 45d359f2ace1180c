//! Per-sample SGD over chronologically ordered supervised pairs.

use super::network::{DenseNetwork, Scratch};
use crate::error::{Error, Result};

/// Feature and target rows sharing one time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSeries {
    pub dt: f64,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl SupervisedSeries {
    pub fn new(dt: f64, inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Argument(format!("{} input rows but {} target rows", inputs.len(), targets.len())));
        }
        let s = Self { dt, inputs, targets };
        if let (Some(fi), Some(ft)) = (s.inputs.first(), s.targets.first()) {
            let (wi, wt) = (fi.len(), ft.len());
            if s.inputs.iter().any(|r| r.len() != wi) || s.targets.iter().any(|r| r.len() != wt) {
                return Err(Error::Argument("ragged rows in supervised series".into()));
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn feature_width(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_width(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    fn check(&self, net: &DenseNetwork) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Argument("empty supervised series".into()));
        }
        if self.feature_width() != net.d_in() || self.target_width() != net.d_out() {
            return Err(Error::Argument(format!(
                "series is {}→{} but network is {}→{}",
                self.feature_width(),
                self.target_width(),
                net.d_in(),
                net.d_out()
            )));
        }
        Ok(())
    }
}

/// Error totals over one pass, summed over time steps and outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// Σ (target − output); signed terms may cancel.
    pub signed: f64,
    /// Σ |target − output|; drives all control decisions.
    pub absolute: f64,
    pub samples: usize,
}

/// One SGD update per row in order. Metrics use each row's output before its update.
pub fn train_epoch(net: &mut DenseNetwork, series: &SupervisedSeries, lr: f64, respect_frozen: bool) -> Result<EpochMetrics> {
    series.check(net)?;
    let mut scratch = Scratch::default();
    let mut m = EpochMetrics { signed: 0.0, absolute: 0.0, samples: series.len() };
    for (x, t) in series.inputs.iter().zip(&series.targets) {
        net.train_sample(x, t, lr, respect_frozen, &mut scratch);
        for (ti, yi) in t.iter().zip(scratch.output()) {
            m.signed += ti - yi;
            m.absolute += (ti - yi).abs();
        }
    }
    if !m.absolute.is_finite() || !net.is_finite() {
        return Err(Error::Divergence(format!("non-finite loss at lr {lr}")));
    }
    Ok(m)
}

/// Evaluation-only counterpart of [`train_epoch`].
pub fn evaluate(net: &DenseNetwork, series: &SupervisedSeries) -> Result<EpochMetrics> {
    series.check(net)?;
    let mut scratch = Scratch::default();
    let mut y = Vec::new();
    let mut m = EpochMetrics { signed: 0.0, absolute: 0.0, samples: series.len() };
    for (x, t) in series.inputs.iter().zip(&series.targets) {
        net.predict_into(x, &mut scratch, &mut y);
        for (ti, yi) in t.iter().zip(&y) {
            m.signed += ti - yi;
            m.absolute += (ti - yi).abs();
        }
    }
    Ok(m)
}

/// Teacher-forced average error rate per output, in percent:
/// `100 · mean|pred − target| / max|target|`.
pub fn teacher_forced_error(net: &DenseNetwork, series: &SupervisedSeries) -> Result<Vec<f64>> {
    series.check(net)?;
    let d = net.d_out();
    let mut scratch = Scratch::default();
    let mut y = Vec::new();
    let mut sum = vec![0.0; d];
    let mut peak = vec![0.0f64; d];
    for (x, t) in series.inputs.iter().zip(&series.targets) {
        net.predict_into(x, &mut scratch, &mut y);
        for i in 0..d {
            sum[i] += (y[i] - t[i]).abs();
            peak[i] = peak[i].max(t[i].abs());
        }
    }
    let n = series.len() as f64;
    sum.iter()
        .zip(&peak)
        .enumerate()
        .map(
            |(i, (s, p))| {
                if *p == 0.0 {
                    Err(Error::Degenerate(format!("target channel {i} is identically zero")))
                } else {
                    Ok(100.0 * s / n / p)
                }
            },
        )
        .collect()
}

/// Mean of [`teacher_forced_error`] over outputs and series.
pub fn mean_error(net: &DenseNetwork, series: &[&SupervisedSeries]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0;
    for s in series {
        for e in teacher_forced_error(net, s)? {
            total += e;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Argument("no series to evaluate".into()));
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::network::{Activation, Layer};

    fn linear(w: f64) -> DenseNetwork {
        let mut l = Layer::zeros(1, 1);
        l.weights[0] = w;
        DenseNetwork::from_layers(vec![l], Activation::Tanh, Activation::Identity, 0).unwrap()
    }

    fn doubling() -> SupervisedSeries {
        let xs: Vec<Vec<f64>> = (0..100).map(|i| vec![(i as f64 * 0.37).sin()]).collect();
        let ts = xs.iter().map(|x| vec![2.0 * x[0]]).collect();
        SupervisedSeries::new(0.01, xs, ts).unwrap()
    }

    #[test]
    fn perfect_net_has_zero_metrics() {
        let mut net = linear(2.0);
        let m = train_epoch(&mut net, &doubling(), 0.1, false).unwrap();
        assert_eq!((m.signed, m.absolute), (0.0, 0.0));
    }

    #[test]
    fn zero_rate_matches_evaluation() {
        let mut net = crate::ann::init_network(1, 1, 3);
        let before = net.clone();
        let s = doubling();
        let m = train_epoch(&mut net, &s, 0.0, false).unwrap();
        assert_eq!(net, before);
        assert_eq!(m, evaluate(&net, &s).unwrap());
    }

    #[test]
    fn scalar_lms_converges() {
        let mut net = linear(0.0);
        let s = doubling();
        let first = train_epoch(&mut net, &s, 0.05, false).unwrap().absolute;
        let mut last = first;
        for _ in 1..50 {
            last = train_epoch(&mut net, &s, 0.05, false).unwrap().absolute;
        }
        assert!(last * 100.0 <= first, "{first} -> {last}");
    }

    #[test]
    fn divergence_reported() {
        let mut net = linear(1.0);
        let xs: Vec<Vec<f64>> = (0..200).map(|_| vec![100.0]).collect();
        let ts = vec![vec![0.0]; 200];
        let s = SupervisedSeries::new(0.01, xs, ts).unwrap();
        assert!(matches!(train_epoch(&mut net, &s, 10.0, false), Err(Error::Divergence(_))));
    }

    #[test]
    fn error_rate_formula() {
        let s = doubling();
        let peak = s.targets.iter().fold(0.0f64, |m, t| m.max(t[0].abs()));
        let mut net = linear(2.0);
        net.layers_mut()[0].biases[0] = 0.05 * peak;
        let e = teacher_forced_error(&net, &s).unwrap();
        assert!((e[0] - 5.0).abs() < 1e-12);
        assert_eq!(teacher_forced_error(&linear(2.0), &s).unwrap(), vec![0.0]);
    }

    #[test]
    fn shape_checks() {
        let mut net = linear(1.0);
        let s = SupervisedSeries::new(0.01, vec![vec![1.0, 2.0]], vec![vec![1.0]]).unwrap();
        assert!(train_epoch(&mut net, &s, 0.1, false).is_err());
        assert!(SupervisedSeries::new(0.01, vec![vec![1.0]], vec![]).is_err());
        let empty = SupervisedSeries::new(0.01, vec![], vec![]).unwrap();
        assert!(evaluate(&net, &empty).is_err());
    }
}
