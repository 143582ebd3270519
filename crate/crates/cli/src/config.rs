//! Experiment configuration, read from a TOML file and overridden by flags.
//!
//! ```toml
//! seed = 7
//! out = "runs/tver"
//!
//! [dataset]
//! kind = "tver"          # tver | lfer | rw | file
//! n_slots = 100
//!
//! [solver]
//! regularizer = "fused"
//! alpha = 1.0
//! eta = 0.5
//!
//! [grid]
//! alphas = [1.0, 10.0]
//! repeats = 5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tvgl::synth::{ErConfig, LfErConfig, PresenceRule, RwConfig};
use tvgl::{Regularizer, SolverConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub solver: SolverSection,
    pub grid: GridSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: None,
            dataset: DatasetSpec::Tver(TverSpec::default()),
            solver: SolverSection::default(),
            grid: GridSection::default(),
        }
    }
}

/// Where the signals come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSpec {
    Tver(TverSpec),
    Lfer(LferSpec),
    Rw(RwSpec),
    File(FileSpec),
}

impl DatasetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DatasetSpec::Tver(_) => "tver",
            DatasetSpec::Lfer(_) => "lfer",
            DatasetSpec::Rw(_) => "rw",
            DatasetSpec::File(_) => "file",
        }
    }

    /// Generator defaults for `kind`.
    pub fn from_kind(kind: &str) -> Result<Self> {
        match kind {
            "tver" => Ok(DatasetSpec::Tver(TverSpec::default())),
            "lfer" => Ok(DatasetSpec::Lfer(LferSpec::default())),
            "rw" => Ok(DatasetSpec::Rw(RwSpec::default())),
            other => Err(CliError::Usage(format!(
                "unknown generator `{other}` (expected tver, lfer or rw)"
            ))),
        }
    }
}

/// Signals drawn per window.
pub const DEFAULT_SAMPLES_PER_WINDOW: usize = 10;
/// Noise level of the sampled GMRF.
pub const DEFAULT_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TverSpec {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub resample_fraction: f64,
    pub n_slots: usize,
    pub samples_per_window: usize,
    pub sigma: f64,
}

impl Default for TverSpec {
    fn default() -> Self {
        let er = ErConfig::default();
        Self {
            n_nodes: er.n_nodes,
            edge_prob: er.edge_prob,
            resample_fraction: er.resample_fraction,
            n_slots: er.n_slots,
            samples_per_window: DEFAULT_SAMPLES_PER_WINDOW,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl TverSpec {
    pub fn generator(&self, seed: u64) -> ErConfig {
        ErConfig {
            n_nodes: self.n_nodes,
            edge_prob: self.edge_prob,
            resample_fraction: self.resample_fraction,
            n_slots: self.n_slots,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LferSpec {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub n_states: usize,
    pub stay_prob: f64,
    pub n_slots: usize,
    pub samples_per_window: usize,
    pub sigma: f64,
}

impl Default for LferSpec {
    fn default() -> Self {
        let lf = LfErConfig::default();
        Self {
            n_nodes: lf.n_nodes,
            edge_prob: lf.edge_prob,
            n_states: lf.n_states,
            stay_prob: lf.stay_prob,
            n_slots: lf.n_slots,
            samples_per_window: DEFAULT_SAMPLES_PER_WINDOW,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl LferSpec {
    pub fn generator(&self, seed: u64) -> LfErConfig {
        LfErConfig {
            n_nodes: self.n_nodes,
            edge_prob: self.edge_prob,
            n_states: self.n_states,
            stay_prob: self.stay_prob,
            n_slots: self.n_slots,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RwSpec {
    pub n_nodes: usize,
    pub area_side: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub sample_period: f64,
    pub n_samples: usize,
    pub knn: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub samples_per_window: usize,
    pub sigma: f64,
}

impl Default for RwSpec {
    fn default() -> Self {
        let rw = RwConfig::default();
        Self {
            n_nodes: rw.n_nodes,
            area_side: rw.area_side,
            speed_min: rw.speed_min,
            speed_max: rw.speed_max,
            sample_period: rw.sample_period,
            n_samples: rw.n_samples,
            knn: rw.knn,
            theta: rw.theta,
            samples_per_window: DEFAULT_SAMPLES_PER_WINDOW,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl RwSpec {
    pub fn generator(&self, seed: u64) -> RwConfig {
        RwConfig {
            n_nodes: self.n_nodes,
            area_side: self.area_side,
            speed_min: self.speed_min,
            speed_max: self.speed_max,
            sample_period: self.sample_period,
            n_samples: self.n_samples,
            knn: self.knn,
            theta: self.theta,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub signals: PathBuf,
    /// Ground-truth graph directory, needed by `gridsearch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// `fused`, `group` or `none`.
    pub regularizer: String,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub tolerance: f64,
    pub max_iters: usize,
    pub trace_interval: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let base = SolverConfig::default();
        Self {
            regularizer: Regularizer::FusedLasso.to_string(),
            alpha: 1.0,
            beta: 0.0,
            eta: 0.5,
            gamma: None,
            tolerance: base.tolerance,
            max_iters: base.max_iters,
            trace_interval: base.trace_interval,
        }
    }
}

impl SolverSection {
    pub fn to_solver_config(&self) -> Result<SolverConfig> {
        let regularizer: Regularizer = self
            .regularizer
            .parse()
            .map_err(|e: tvgl::Error| CliError::Usage(format!("solver.regularizer: {e}")))?;
        let cfg = SolverConfig {
            alpha: self.alpha,
            beta: self.beta,
            eta: self.eta,
            regularizer,
            gamma: self.gamma,
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            trace_interval: self.trace_interval,
        };
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("[solver] {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub alphas: Vec<f64>,
    /// Defaults to `{0} ∪ {0.75ʳ z_max : r = 1..=beta_steps}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    pub beta_steps: u32,
    /// Defaults to `0.1, 0.2, …, 2.0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
    /// Number of generated datasets, seeded `seed, seed + 1, …`.
    pub repeats: usize,
    /// Edge-presence threshold relative to the largest weight of a slot.
    pub presence_threshold: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 10.0, 100.0],
            betas: None,
            beta_steps: 14,
            etas: None,
            repeats: 1,
            presence_threshold: PresenceRule::default().relative,
        }
    }
}

impl GridSection {
    pub fn presence_rule(&self) -> Result<PresenceRule> {
        if !(0.0..1.0).contains(&self.presence_threshold) {
            return Err(CliError::Usage(format!(
                "grid.presence_threshold must lie in [0, 1), got {}",
                self.presence_threshold
            )));
        }
        Ok(PresenceRule {
            relative: self.presence_threshold,
        })
    }
}

/// Flag values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub regularizer: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iters: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = &o.regularizer {
            self.solver.regularizer = v.clone();
        }
        if let Some(v) = o.alpha {
            self.solver.alpha = v;
        }
        if let Some(v) = o.beta {
            self.solver.beta = v;
        }
        if let Some(v) = o.eta {
            self.solver.eta = v;
        }
        if let Some(v) = o.tolerance {
            self.solver.tolerance = v;
        }
        if let Some(v) = o.max_iters {
            self.solver.max_iters = v;
        }
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("no output directory (use --out or `out`)".into()))
    }
}
