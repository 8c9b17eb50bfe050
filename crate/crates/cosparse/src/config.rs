//! `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Keys are grouped by
//! prefix (`scene.`, `weights.`, `learn.`, `sr.`, `bench.`). Unknown keys are
//! errors. Later assignments win, so command-line `--set` overrides are
//! applied after the file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use cosparse_core::learning::{redundant_rows, LearnConfig};
use cosparse_core::manifold::CgConfig;
use cosparse_core::simulate::SceneSpec;
use cosparse_core::sparsity::ModalityWeights;
use cosparse_core::superres::default_sr_cg;
use cosparse_core::AnnealSchedule;

use crate::error::{Error, Result};

/// Benchmark and data-preparation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub factor: usize,
    /// Held-out scenes used to train the operators.
    pub train_scenes: usize,
    /// Seed of the first training scene.
    pub train_seed: u64,
    pub flip_rate: f64,
    pub softness: f64,
    pub noise_sigma: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            factor: 4,
            train_scenes: 4,
            train_seed: 1000,
            flip_rate: 0.2,
            softness: 0.5,
            noise_sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: SceneSpec,
    pub weights: ModalityWeights,
    pub eta: f64,
    pub kappa: [f64; 3],
    pub mu: [f64; 3],
    /// Operator rows; `None` applies the redundancy convention.
    pub k: Option<usize>,
    pub patch_side: usize,
    pub outer_iters: usize,
    pub cg: CgConfig,
    pub depth_cg: CgConfig,
    pub learn_seed: u64,
    /// Training patches sampled per scene.
    pub patches_per_scene: usize,
    pub schedule: AnnealSchedule,
    pub sr_cg: CgConfig,
    pub bench: BenchSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let learn = LearnConfig::default();
        Self {
            scene: SceneSpec::default(),
            weights: learn.weights,
            eta: learn.eta,
            kappa: learn.kappa,
            mu: learn.mu,
            k: None,
            patch_side: learn.patch_side,
            outer_iters: learn.lr_outer_iters,
            cg: learn.cg,
            depth_cg: learn.depth_cg,
            learn_seed: learn.seed,
            patches_per_scene: 500,
            schedule: AnnealSchedule::default(),
            sr_cg: default_sr_cg(),
            bench: BenchSettings::default(),
        }
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "scene.width",
    "scene.height",
    "scene.regions",
    "scene.classes",
    "scene.shadow_bands",
    "scene.depth_min",
    "scene.depth_max",
    "scene.seed",
    "weights.intensity",
    "weights.depth",
    "weights.semantics",
    "learn.eta",
    "learn.kappa_i",
    "learn.kappa_d",
    "learn.kappa_s",
    "learn.mu_i",
    "learn.mu_d",
    "learn.mu_s",
    "learn.k",
    "learn.patch_side",
    "learn.outer_iters",
    "learn.cg_iters",
    "learn.cg_tol",
    "learn.depth_cg_iters",
    "learn.depth_cg_tol",
    "learn.seed",
    "learn.patches",
    "sr.eta_start",
    "sr.eta_end",
    "sr.restarts",
    "sr.rho",
    "sr.cg_iters",
    "sr.cg_tol",
    "bench.factor",
    "bench.train_scenes",
    "bench.train_seed",
    "bench.flip_rate",
    "bench.softness",
    "bench.noise_sigma",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_str(&text, &path.display().to_string())
    }

    /// Applies every assignment in `text`; `origin` labels errors.
    pub fn merge_str(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    origin: origin.to_string(),
                    line: i + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{pair}` is not of the form key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "scene.width" => self.scene.width = parse(key, v)?,
            "scene.height" => self.scene.height = parse(key, v)?,
            "scene.regions" => self.scene.num_regions = parse(key, v)?,
            "scene.classes" => self.scene.num_classes = parse(key, v)?,
            "scene.shadow_bands" => self.scene.shadow_bands = parse(key, v)?,
            "scene.depth_min" => self.scene.depth_range.0 = parse(key, v)?,
            "scene.depth_max" => self.scene.depth_range.1 = parse(key, v)?,
            "scene.seed" => self.scene.seed = parse(key, v)?,
            "weights.intensity" => self.weights.intensity = parse(key, v)?,
            "weights.depth" => self.weights.depth = parse(key, v)?,
            "weights.semantics" => self.weights.semantics = parse(key, v)?,
            "learn.eta" => self.eta = parse(key, v)?,
            "learn.kappa_i" => self.kappa[0] = parse(key, v)?,
            "learn.kappa_d" => self.kappa[1] = parse(key, v)?,
            "learn.kappa_s" => self.kappa[2] = parse(key, v)?,
            "learn.mu_i" => self.mu[0] = parse(key, v)?,
            "learn.mu_d" => self.mu[1] = parse(key, v)?,
            "learn.mu_s" => self.mu[2] = parse(key, v)?,
            "learn.k" => self.k = if v == "auto" { None } else { Some(parse(key, v)?) },
            "learn.patch_side" => self.patch_side = parse(key, v)?,
            "learn.outer_iters" => self.outer_iters = parse(key, v)?,
            "learn.cg_iters" => self.cg.max_iters = parse(key, v)?,
            "learn.cg_tol" => self.cg.grad_tol = parse(key, v)?,
            "learn.depth_cg_iters" => self.depth_cg.max_iters = parse(key, v)?,
            "learn.depth_cg_tol" => self.depth_cg.grad_tol = parse(key, v)?,
            "learn.seed" => self.learn_seed = parse(key, v)?,
            "learn.patches" => self.patches_per_scene = parse(key, v)?,
            "sr.eta_start" => self.schedule.eta_start = parse(key, v)?,
            "sr.eta_end" => self.schedule.eta_end = parse(key, v)?,
            "sr.restarts" => self.schedule.restarts = parse(key, v)?,
            "sr.rho" => self.schedule.rho = parse(key, v)?,
            "sr.cg_iters" => self.sr_cg.max_iters = parse(key, v)?,
            "sr.cg_tol" => self.sr_cg.grad_tol = parse(key, v)?,
            "bench.factor" => self.bench.factor = parse(key, v)?,
            "bench.train_scenes" => self.bench.train_scenes = parse(key, v)?,
            "bench.train_seed" => self.bench.train_seed = parse(key, v)?,
            "bench.flip_rate" => self.bench.flip_rate = parse(key, v)?,
            "bench.softness" => self.bench.softness = parse(key, v)?,
            "bench.noise_sigma" => self.bench.noise_sigma = parse(key, v)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Learning configuration for data with `num_classes` classes.
    pub fn learn_config(&self, num_classes: usize) -> Result<LearnConfig> {
        let mut cfg = LearnConfig::new(self.patch_side, num_classes);
        cfg.eta = self.eta;
        cfg.kappa = self.kappa;
        cfg.mu = self.mu;
        cfg.weights = self.weights;
        cfg.k = self.k.unwrap_or_else(|| redundant_rows(self.patch_side, num_classes));
        cfg.lr_outer_iters = self.outer_iters;
        cfg.cg = self.cg;
        cfg.depth_cg = self.depth_cg;
        cfg.seed = self.learn_seed;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on input data.
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.schedule.validate()?;
        self.sr_cg.validate()?;
        self.learn_config(self.scene.num_classes)?;
        let b = &self.bench;
        if b.factor == 0 {
            return Err(Error::BadValue {
                key: "bench.factor".into(),
                value: "0".into(),
            });
        }
        for (key, v) in [("bench.flip_rate", b.flip_rate), ("bench.softness", b.softness)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::BadValue {
                    key: key.into(),
                    value: v.to_string(),
                });
            }
        }
        if !(b.noise_sigma >= 0.0 && b.noise_sigma.is_finite()) {
            return Err(Error::BadValue {
                key: "bench.noise_sigma".into(),
                value: b.noise_sigma.to_string(),
            });
        }
        Ok(())
    }
}
