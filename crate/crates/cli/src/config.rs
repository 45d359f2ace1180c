//! Experiment configuration: a TOML file with dotted keys, strictly typed.
//!
//! ```toml
//! structure = "frame"
//! seed = 1
//! frame.story_height = 118.0
//! records.synthetic = 3
//! records.sa_target = 3.0
//! ```

use crate::error::user;
use anyhow::{Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use surrogate_core::ann::{DeepenMode, FrozenUnit, GrowthPolicy, WidenMode};
use surrogate_core::frame::{HysteresisShape, IntegratorConfig, RayleighSpec, ShearFrame};
use surrogate_core::pipeline::Oracle;
use surrogate_core::rocking::{block_constants, RockingBlock};
use surrogate_core::signals::{parse_at2, scale_to_pga, scale_to_sa, synthetic_record, GroundMotionRecord, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Frame,
    Rocking,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub structure: Structure,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub rocking: RockingSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub records: RecordsSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub growth: GrowthSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    /// kip·s²/in, bottom floor first.
    pub masses: Vec<f64>,
    /// Target elastic periods (s).
    pub periods: Vec<f64>,
    pub story_height: f64,
    pub yield_drift_ratio: f64,
    pub b: f64,
    pub r0: f64,
    pub cr1: f64,
    pub cr2: f64,
    pub damping: f64,
    pub damping_modes: [usize; 2],
}

impl Default for FrameSection {
    fn default() -> Self {
        let shape = HysteresisShape::default();
        Self {
            masses: vec![0.3, 0.3, 0.18],
            periods: vec![0.550, 0.188, 0.120],
            story_height: 118.0,
            yield_drift_ratio: 0.005,
            b: shape.b,
            r0: shape.r0,
            cr1: shape.cr1,
            cr2: shape.cr2,
            damping: 0.025,
            damping_modes: [1, 3],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RockingSection {
    /// Full block dimensions (m) and mass (kg).
    pub width: f64,
    pub height: f64,
    pub mass: f64,
    /// Overrides the classical restitution coefficient.
    pub restitution: Option<f64>,
    pub dt: f64,
}

impl Default for RockingSection {
    fn default() -> Self {
        Self { width: 4.0, height: 12.0, mass: 1.0, restitution: None, dt: surrogate_core::rocking::DEFAULT_ROCKING_DT }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub alpha: f64,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self { alpha: c.alpha, dt: c.dt, newton_tol: c.newton_tol, newton_max_iter: c.newton_max_iter }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordsSection {
    /// AT2 files or glob patterns, relative to the config file.
    pub files: Vec<String>,
    /// Number of synthetic records, seeded `seed`, `seed + 1`, ...
    pub synthetic: usize,
    pub synthetic_duration: f64,
    pub synthetic_pga: f64,
    pub sa_target: Option<f64>,
    /// Defaults to the first frame period.
    pub sa_period: Option<f64>,
    pub sa_damping: f64,
    pub pga_target: Option<f64>,
}

impl Default for RecordsSection {
    fn default() -> Self {
        let syn = SyntheticSpec::default();
        Self {
            files: Vec::new(),
            synthetic: 0,
            synthetic_duration: syn.duration,
            synthetic_pga: syn.pga,
            sa_target: None,
            sa_period: None,
            sa_damping: surrogate_core::signals::DEFAULT_SPECTRUM_DAMPING,
            pga_target: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    /// Record ids used for training; the first two records if empty.
    pub train: Vec<String>,
    pub valid: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthSection {
    pub lr0: Option<f64>,
    pub lr_halve_patience: Option<usize>,
    pub lr_min: Option<f64>,
    pub error_threshold_pct: Option<f64>,
    pub widens_per_deepen: Option<usize>,
    pub frozen_iterations: Option<usize>,
    pub frozen_unit: Option<String>,
    pub pretrain_epochs: Option<usize>,
    pub max_growth_steps: Option<usize>,
    pub min_improvement: Option<f64>,
    pub max_epochs: Option<usize>,
    pub widen_mode: Option<String>,
    pub deepen_mode: Option<String>,
    pub initial_hidden_layers: Option<usize>,
    pub initial_hidden_width: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub min_period: f64,
    pub max_period: f64,
    pub points: usize,
    pub damping: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { min_period: 0.05, max_period: 4.0, points: 80, damping: surrogate_core::signals::DEFAULT_SPECTRUM_DAMPING }
    }
}

impl SpectrumSection {
    /// Log-spaced periods.
    pub fn periods(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min_period];
        }
        let (a, b) = (self.min_period.ln(), self.max_period.ln());
        (0..self.points).map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp()).collect()
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub records: Option<String>,
}

fn check(ok: bool, key: &str, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(user(format!("config key `{key}` {what}")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| user(format!("invalid config: {}", e.message().trim())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let f = &self.frame;
        check(!f.masses.is_empty() && f.masses.iter().all(|&m| m > 0.0), "frame.masses", "must be nonempty and positive")?;
        check(f.periods.len() == f.masses.len(), "frame.periods", "must have one entry per mass")?;
        check(f.periods.iter().all(|&t| t > 0.0), "frame.periods", "must be positive")?;
        check(f.story_height > 0.0, "frame.story_height", "must be positive")?;
        check(f.yield_drift_ratio > 0.0, "frame.yield_drift_ratio", "must be positive")?;
        check((0.0..1.0).contains(&f.damping), "frame.damping", "must lie in [0, 1)")?;
        let [i, j] = f.damping_modes;
        check(i >= 1 && i <= j && j <= f.masses.len(), "frame.damping_modes", "must be two ascending 1-based mode numbers")?;
        let r = &self.rocking;
        check(r.width > 0.0 && r.height > 0.0, "rocking.width/height", "must be positive")?;
        check(r.mass > 0.0, "rocking.mass", "must be positive")?;
        check(r.dt > 0.0 && r.dt <= 1e-3, "rocking.dt", "must lie in (0, 1e-3]")?;
        let it = &self.integrator;
        check((2.0 / 3.0 - 1e-3..=1.0).contains(&it.alpha), "integrator.alpha", "must lie in [2/3, 1]")?;
        check(it.dt > 0.0, "integrator.dt", "must be positive")?;
        check(it.newton_tol > 0.0 && it.newton_max_iter > 0, "integrator.newton_tol/newton_max_iter", "must be positive")?;
        let rec = &self.records;
        check(rec.sa_target.is_none() || rec.pga_target.is_none(), "records.sa_target", "conflicts with records.pga_target")?;
        check(rec.sa_target.is_none_or(|v| v > 0.0), "records.sa_target", "must be positive")?;
        check(rec.pga_target.is_none_or(|v| v > 0.0), "records.pga_target", "must be positive")?;
        check(rec.sa_period.is_none_or(|v| v > 0.0), "records.sa_period", "must be positive")?;
        check(rec.synthetic_duration > 0.1 && rec.synthetic_pga > 0.0, "records.synthetic_duration/synthetic_pga", "must be positive")?;
        let s = &self.spectrum;
        check(
            s.min_period > 0.0 && s.max_period >= s.min_period && s.points > 0,
            "spectrum",
            "needs 0 < min_period <= max_period and points > 0",
        )?;
        self.policy(self.seed)?;
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let it = &self.integrator;
        IntegratorConfig { alpha: it.alpha, dt: it.dt, newton_tol: it.newton_tol, newton_max_iter: it.newton_max_iter }
    }

    pub fn shear_frame(&self) -> Result<ShearFrame> {
        let f = &self.frame;
        let shape = HysteresisShape { b: f.b, r0: f.r0, cr1: f.cr1, cr2: f.cr2 };
        let rayleigh = RayleighSpec { zeta: f.damping, mode_i: f.damping_modes[0], mode_j: f.damping_modes[1] };
        ShearFrame::calibrated(f.masses.clone(), &f.periods, f.story_height, f.yield_drift_ratio, shape, rayleigh).context("building frame")
    }

    pub fn block(&self) -> Result<RockingBlock> {
        let r = &self.rocking;
        let block = block_constants(r.width, r.height, r.mass)?;
        Ok(match r.restitution {
            Some(e) => block.with_restitution(e)?,
            None => block,
        })
    }

    pub fn oracle(&self, structure: Structure) -> Result<Oracle> {
        Ok(match structure {
            Structure::Frame => Oracle::Frame { frame: self.shear_frame()?, cfg: self.integrator() },
            Structure::Rocking => Oracle::Rocking { block: self.block()?, dt: self.rocking.dt },
        })
    }

    pub fn policy(&self, seed: u64) -> Result<GrowthPolicy> {
        let g = &self.growth;
        let d = GrowthPolicy::default();
        let frozen_unit = match g.frozen_unit.as_deref() {
            None => d.frozen_unit,
            Some("samples") => FrozenUnit::Samples,
            Some("epochs") => FrozenUnit::Epochs,
            Some(v) => return Err(user(format!("config key `growth.frozen_unit` must be \"samples\" or \"epochs\", got {v:?}"))),
        };
        let widen_mode = match g.widen_mode.as_deref() {
            None => d.widen_mode,
            Some("random") => WidenMode::Random,
            Some("function_preserving") => WidenMode::FunctionPreserving,
            Some(v) => {
                return Err(user(format!("config key `growth.widen_mode` must be \"random\" or \"function_preserving\", got {v:?}")))
            }
        };
        let deepen_mode = match g.deepen_mode.as_deref() {
            None => d.deepen_mode,
            Some("random") => DeepenMode::Random,
            Some("near_identity") => DeepenMode::NearIdentity,
            Some(v) => return Err(user(format!("config key `growth.deepen_mode` must be \"random\" or \"near_identity\", got {v:?}"))),
        };
        let p = GrowthPolicy {
            lr0: g.lr0.unwrap_or(d.lr0),
            lr_halve_patience: g.lr_halve_patience.unwrap_or(d.lr_halve_patience),
            lr_min: g.lr_min.unwrap_or(d.lr_min),
            error_threshold_pct: g.error_threshold_pct.unwrap_or(d.error_threshold_pct),
            widens_per_deepen: g.widens_per_deepen.unwrap_or(d.widens_per_deepen),
            frozen_iterations: g.frozen_iterations.unwrap_or(d.frozen_iterations),
            frozen_unit,
            pretrain_epochs: g.pretrain_epochs.unwrap_or(d.pretrain_epochs),
            max_growth_steps: g.max_growth_steps.unwrap_or(d.max_growth_steps),
            min_improvement: g.min_improvement.unwrap_or(d.min_improvement),
            max_epochs: g.max_epochs.unwrap_or(d.max_epochs),
            widen_mode,
            deepen_mode,
            initial_hidden_layers: g.initial_hidden_layers.unwrap_or(d.initial_hidden_layers),
            initial_hidden_width: g.initial_hidden_width.unwrap_or(d.initial_hidden_width),
            seed,
        };
        p.validate().map_err(|e| user(format!("invalid [growth] section: {e}")))?;
        Ok(p)
    }
}

/// A loaded config with every referenced input resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Scaled records, files first, then synthetic ones.
    pub records: Vec<GroundMotionRecord>,
    /// (id, scale factor) per record.
    pub scale_factors: Vec<(String, f64)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Experiment {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| user(format!("cannot read config {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| user(format!("config {} is not UTF-8", path.display())))?;
        let config = ExperimentConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        let seed = overrides.seed.unwrap_or(config.seed);
        let out_dir = overrides.out.clone().unwrap_or_else(|| config.out_dir.clone());
        let base = path.parent().unwrap_or(Path::new("."));
        let files = match &overrides.records {
            Some(pattern) => expand_glob(pattern, Path::new("."))?,
            None => config.records.files.iter().map(|p| expand_glob(p, base)).collect::<Result<Vec<_>>>()?.concat(),
        };
        let mut raw = Vec::new();
        for f in &files {
            let text = std::fs::read_to_string(f).map_err(|e| user(format!("cannot read record {}: {e}", f.display())))?;
            let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            raw.push(parse_at2(&id, &text).with_context(|| format!("in record {}", f.display()))?);
        }
        let rec = &config.records;
        for i in 0..rec.synthetic as u64 {
            let spec =
                SyntheticSpec { seed: seed + i, duration: rec.synthetic_duration, pga: rec.synthetic_pga, ..SyntheticSpec::default() };
            raw.push(synthetic_record(&spec)?);
        }
        let mut ids = std::collections::HashSet::new();
        for r in &raw {
            if !ids.insert(r.id().to_string()) {
                return Err(user(format!("duplicate record id {}", r.id())));
            }
        }
        let period = rec.sa_period.unwrap_or(config.frame.periods[0]);
        let mut records = Vec::with_capacity(raw.len());
        let mut scale_factors = Vec::with_capacity(raw.len());
        for r in raw {
            let (scaled, factor) = match (rec.sa_target, rec.pga_target) {
                (Some(t), _) => scale_to_sa(&r, period, rec.sa_damping, t).with_context(|| format!("scaling record {}", r.id()))?,
                (None, Some(t)) => scale_to_pga(&r, t).with_context(|| format!("scaling record {}", r.id()))?,
                (None, None) => (r, 1.0),
            };
            scale_factors.push((scaled.id().to_string(), factor));
            records.push(scaled);
        }
        Ok(Self { config, config_hash: sha256_hex(&bytes), seed, out_dir, records, scale_factors })
    }

    pub fn record(&self, id: &str) -> Result<&GroundMotionRecord> {
        self.records.iter().find(|r| r.id() == id).ok_or_else(|| user(format!("no record with id {id:?} (config key `training`)")))
    }

    /// Training records and the optional validation record.
    pub fn training_split(&self) -> Result<(Vec<GroundMotionRecord>, Option<GroundMotionRecord>)> {
        let t = &self.config.training;
        let train: Vec<GroundMotionRecord> = if t.train.is_empty() {
            if self.records.len() < 2 {
                return Err(user(format!("training needs two records, the config provides {}", self.records.len())));
            }
            self.records[..2].to_vec()
        } else {
            t.train.iter().map(|id| self.record(id).cloned()).collect::<Result<_>>()?
        };
        let valid = t.valid.as_deref().map(|id| self.record(id).cloned()).transpose()?;
        Ok((train, valid))
    }

    pub fn training_ids(&self) -> Vec<String> {
        match self.training_split() {
            Ok((train, _)) => train.iter().map(|r| r.id().to_string()).collect(),
            Err(_) => Vec::new(),
        }
    }
}

fn expand_glob(pattern: &str, base: &Path) -> Result<Vec<PathBuf>> {
    let full = base.join(pattern);
    let is_pattern = pattern.contains(['*', '?', '[']);
    if !is_pattern {
        if !full.is_file() {
            return Err(user(format!("record file not found: {}", full.display())));
        }
        return Ok(vec![full]);
    }
    let text = full.to_string_lossy();
    let mut out: Vec<PathBuf> = glob::glob(&text)
        .map_err(|e| user(format!("bad record pattern {text}: {e}")))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| user(format!("reading {text}: {e}")))?;
    out.sort();
    Ok(out)
}
