//! Plain-text network format. Values are written in shortest round-trip
//! form, so parsing restores identical bits. Frozen flags are not stored.

use super::network::{Activation, DenseNetwork, Layer};
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "adaptive-ann";

pub fn network_to_text(net: &DenseNetwork) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {FORMAT_VERSION}");
    let dims: Vec<String> = net.layer_dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "layer_dims {}", dims.join(" "));
    let _ = writeln!(s, "hidden_activation {}", net.hidden_activation().name());
    let _ = writeln!(s, "output_activation {}", net.output_activation().name());
    let _ = writeln!(s, "seed {}", net.seed());
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    for (k, l) in net.layers().iter().enumerate() {
        let _ = writeln!(s, "weights {k} {} {}", l.n_out, l.n_in);
        for row in l.weights.chunks(l.n_in) {
            let _ = writeln!(s, "{}", join(row));
        }
        let _ = writeln!(s, "biases {k} {}", l.n_out);
        let _ = writeln!(s, "{}", join(&l.biases));
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim())
            }
            None => Err(Error::Format { line: self.last + 1, msg: format!("unexpected end of input, expected {what}") }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format { line: self.last, msg: msg.into() }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next(key)?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, found `{line}`")));
        }
        Ok(parts.collect())
    }

    fn usizes(&self, parts: &[&str]) -> Result<Vec<usize>> {
        parts.iter().map(|p| p.parse().map_err(|_| self.err(format!("`{p}` is not a count")))).collect()
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let line = self.next("parameter values")?;
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| match t.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(self.err(format!("`{t}` is not a finite number"))),
            })
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(self.err(format!("expected {n} values, found {}", v.len())));
        }
        Ok(v)
    }
}

pub fn network_from_text(text: &str) -> Result<DenseNetwork> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let header = lines.keyed(MAGIC)?;
    match header.as_slice() {
        [v] if v.parse::<u32>().ok() == Some(FORMAT_VERSION) => {}
        _ => return Err(lines.err(format!("unsupported format version {header:?}"))),
    }
    let dims_raw = lines.keyed("layer_dims")?;
    let dims = lines.usizes(&dims_raw)?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(lines.err(format!("invalid layer dims {dims:?}")));
    }
    let mut act = |key: &str| -> Result<Activation> {
        let v = lines.keyed(key)?;
        match v.as_slice() {
            [name] => Activation::from_name(name).ok_or_else(|| lines.err(format!("unknown activation `{name}`"))),
            _ => Err(lines.err(format!("malformed `{key}` line"))),
        }
    };
    let hidden = act("hidden_activation")?;
    let output = act("output_activation")?;
    let seed_raw = lines.keyed("seed")?;
    let seed = match seed_raw.as_slice() {
        [s] => s.parse::<u64>().map_err(|_| lines.err(format!("bad seed `{s}`")))?,
        _ => return Err(lines.err("malformed seed line")),
    };
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (k, w) in dims.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let head = lines.keyed("weights")?;
        if lines.usizes(&head)? != [k, n_out, n_in] {
            return Err(lines.err(format!("expected `weights {k} {n_out} {n_in}`")));
        }
        let mut l = Layer::zeros(n_in, n_out);
        for i in 0..n_out {
            let row = lines.floats(n_in)?;
            l.weights[i * n_in..(i + 1) * n_in].copy_from_slice(&row);
        }
        let head = lines.keyed("biases")?;
        if lines.usizes(&head)? != [k, n_out] {
            return Err(lines.err(format!("expected `biases {k} {n_out}`")));
        }
        l.biases = lines.floats(n_out)?;
        layers.push(l);
    }
    if lines.next("end")? != "end" {
        return Err(lines.err("expected `end`"));
    }
    DenseNetwork::from_layers(layers, hidden, output, seed)
}
