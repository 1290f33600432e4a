//! Experiment configuration, read from TOML.
//!
//! ```toml
//! model = "both"              # repelling | opposing | both
//! n_list = [50, 100, 200]
//! seeds = [1, 2, 3]
//! latent_scheme = "stochastic"
//! horizon = 2.0
//! # step = 0.01              # default: largest h <= min(1e-2, 0.1/L) dividing horizon
//! ref_multiplier = 8          # reference resolution M = ref_multiplier * max(n_list)
//! nu = 0.05
//! output_dir = "out"
//! workers = 0                 # 0 = one per core
//!
//! [kernel]
//! name = "block"
//! values = [[0.8, -0.6], [-0.6, 0.8]]
//!
//! [initial]
//! name = "sine"
//! k = 1
//!
//! [[sparsity]]                # a single [sparsity] table also works
//! family = "constant"
//! c = 1.0
//! ```

use std::path::{Path, PathBuf};

use graphon_core::{LatentScheme, Model, SparsitySchedule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant { p: f64 },
    Block { values: Vec<Vec<f64>> },
    Product,
    Polarized { a: f64 },
    /// `m` rows of `m` comma-separated values; `#` starts a comment line.
    GridFile { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Linear,
    /// `sin(2πkx)`
    Sine { k: f64 },
    /// `a` on `[0, 1/2]`, `b` on `(1/2, 1]`
    Step { a: f64, b: f64 },
    Constant { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SparsitySpec {
    Constant { c: f64 },
    Power { tau: f64 },
    Polylog { c: f64, q: f64 },
}

impl SparsitySpec {
    pub fn schedule(self) -> SparsitySchedule {
        match self {
            SparsitySpec::Constant { c } => SparsitySchedule::Constant { c },
            SparsitySpec::Power { tau } => SparsitySchedule::Power { tau },
            SparsitySpec::Polylog { c, q } => SparsitySchedule::Polylog { c, q },
        }
    }

    /// Short label used in output files, e.g. `power(0.25)`.
    pub fn label(self) -> String {
        match self {
            SparsitySpec::Constant { c } => format!("constant({c})"),
            SparsitySpec::Power { tau } => format!("power({tau})"),
            SparsitySpec::Polylog { c, q } => format!("polylog({c},{q})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Repelling,
    Opposing,
    #[default]
    Both,
}

impl ModelChoice {
    pub fn models(self) -> Vec<Model> {
        match self {
            ModelChoice::Repelling => vec![Model::Repelling],
            ModelChoice::Opposing => vec![Model::Opposing],
            ModelChoice::Both => vec![Model::Repelling, Model::Opposing],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentChoice {
    Deterministic,
    #[default]
    Stochastic,
}

impl From<LatentChoice> for LatentScheme {
    fn from(c: LatentChoice) -> Self {
        match c {
            LatentChoice::Deterministic => LatentScheme::Deterministic,
            LatentChoice::Stochastic => LatentScheme::Stochastic,
        }
    }
}

fn default_ref_multiplier() -> usize {
    8
}

fn default_nu() -> f64 {
    0.05
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub model: ModelChoice,
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub latent_scheme: LatentChoice,
    pub sparsity: OneOrMany<SparsitySpec>,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default = "default_ref_multiplier")]
    pub ref_multiplier: usize,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub workers: usize,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("n_list must be a nonempty list of positive node counts".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.sparsity.to_vec().is_empty() {
            return bad("sparsity must list at least one schedule".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon = {} must be positive", self.horizon));
        }
        if let Some(h) = self.step {
            let k = (self.horizon / h).round();
            if !(h > 0.0) || k < 1.0 || (k * h - self.horizon).abs() > 1e-12 * self.horizon {
                return bad(format!("step = {h} must be positive and divide horizon = {}", self.horizon));
            }
        }
        if self.ref_multiplier == 0 {
            return bad("ref_multiplier must be at least 1".into());
        }
        let m = self.reference_resolution();
        if let Some(n) = self.n_list.iter().find(|&&n| !m.is_multiple_of(n)) {
            return bad(format!("n = {n} does not divide reference resolution M = {m}"));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad(format!("nu = {} outside (0, 1)", self.nu));
        }
        Ok(())
    }

    /// `M = ref_multiplier · max(n_list)`
    pub fn reference_resolution(&self) -> usize {
        self.ref_multiplier * self.n_list.iter().copied().max().unwrap_or(1)
    }

    pub fn schedules(&self) -> Vec<SparsitySpec> {
        self.sparsity.to_vec()
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Hex SHA-256 of the config serialized as JSON in field order.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
n_list = [10, 20]
seeds = [1]
horizon = 1.0
[kernel]
name = "constant"
p = 0.5
[initial]
name = "linear"
[sparsity]
family = "constant"
c = 1.0
"#;

    #[test]
    fn defaults_and_hash() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.model, ModelChoice::Both);
        assert_eq!(cfg.ref_multiplier, 8);
        assert_eq!(cfg.reference_resolution(), 160);
        assert_eq!(cfg.schedules().len(), 1);
        assert_eq!(cfg.hash(), ExperimentConfig::parse(MINIMAL).unwrap().hash());
        let mut other = cfg.clone();
        other.seeds = vec![2];
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn schedule_list_and_registry_params() {
        let text = MINIMAL.replace(
            "[sparsity]\nfamily = \"constant\"\nc = 1.0",
            "[[sparsity]]\nfamily = \"constant\"\nc = 1.0\n[[sparsity]]\nfamily = \"power\"\ntau = 0.25",
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.schedules()[1], SparsitySpec::Power { tau: 0.25 });
        assert_eq!(cfg.schedules()[1].label(), "power(0.25)");
    }

    #[test]
    fn rejects_invalid() {
        let cases = [
            MINIMAL.replace("[10, 20]", "[20, 30]").replace("horizon", "ref_multiplier = 1\nhorizon"),
            MINIMAL.replace("horizon = 1.0", "horizon = 1.0\nstep = 0.3"),
            MINIMAL.replace("p = 0.5", "q = 0.5"),
            MINIMAL.replace("seeds = [1]", "seeds = []"),
            MINIMAL.replace("horizon = 1.0", "horizon = 1.0\nnu = 1.5"),
            MINIMAL.replace("horizon = 1.0", "horizon = 1.0\nalpha = 0.1"),
        ];
        for text in cases {
            assert!(matches!(ExperimentConfig::parse(&text), Err(HarnessError::Config(_))), "{text}");
        }
    }
}
