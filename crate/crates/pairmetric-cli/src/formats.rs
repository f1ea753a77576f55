//! Config schemas, file I/O, and value formatting.
//!
//! Dataset and model files reuse the core types' serde layouts directly;
//! configs are CLI-level documents with optional generator presets so a
//! usable experiment does not require writing mixing matrices by hand.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pairmetric_core::{
    Dataset, GroundTruth, LossSpec, MetricCaps, ModalityLayout, ModalitySet, RiskMode,
    StepSchedule, TrainConfig,
};

use crate::error::{CliError, CliResult};

/// Format a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Tri-state cell for `*_holds` columns.
pub fn fmt_holds(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "na",
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Load a dataset file, canonicalize the missing-modality encoding, and
/// validate it against its layout.
pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let mut ds: Dataset = read_json(path)?;
    for s in ds.samples.iter_mut() {
        s.canonicalize().map_err(CliError::from)?;
    }
    ds.validate()?;
    Ok(ds)
}

/// Layout section of a config: only the per-modality dimensions are
/// required.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub dims: Vec<usize>,
}

impl LayoutConfig {
    pub fn build(&self) -> CliResult<ModalityLayout> {
        ModalityLayout::new(self.dims.clone())
            .map_err(|e| CliError::invalid(format!("layout: {e}")))
    }
}

/// Ground truth, either spelled out in full or via a preset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroundTruthConfig {
    Preset(GroundTruthPreset),
    Explicit(GroundTruth),
}

/// Compact generator presets.
///
/// * `replicated`: every modality observes a noisy copy of the latent
///   vector (`dims[k] == latent_dim` required);
/// * `identity`: the concatenated modalities observe the latent vector
///   itself (`latent_dim == total_dim`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthPreset {
    pub preset: PresetKind,
    #[serde(default)]
    pub latent_dim: Option<usize>,
    #[serde(default = "default_num_centers")]
    pub num_centers: usize,
    pub scale: f64,
    pub noise_sigma: f64,
    pub bayes_threshold: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    Replicated,
    Identity,
}

fn default_num_centers() -> usize {
    2
}

impl GroundTruthConfig {
    pub fn build(&self, layout: &ModalityLayout) -> CliResult<GroundTruth> {
        match self {
            GroundTruthConfig::Explicit(gt) => {
                gt.validate_against(layout)
                    .map_err(|e| CliError::invalid(format!("ground_truth: {e}")))?;
                Ok(gt.clone())
            }
            GroundTruthConfig::Preset(p) => {
                if p.num_centers == 0 {
                    return Err(CliError::invalid("ground_truth.num_centers: must be >= 1"));
                }
                let gt = match p.preset {
                    PresetKind::Identity => {
                        let latent_dim = layout.total_dim();
                        GroundTruth::identity_mixing(
                            layout,
                            p.noise_sigma,
                            p.bayes_threshold,
                            GroundTruth::axis_centers(p.num_centers, latent_dim, p.scale),
                        )
                    }
                    PresetKind::Replicated => {
                        let latent_dim = p.latent_dim.ok_or_else(|| {
                            CliError::invalid(
                                "ground_truth.latent_dim: required for the replicated preset",
                            )
                        })?;
                        GroundTruth::replicated_mixing(
                            layout,
                            latent_dim,
                            p.noise_sigma,
                            p.bayes_threshold,
                            GroundTruth::axis_centers(p.num_centers, latent_dim, p.scale),
                        )
                    }
                };
                gt.map_err(|e| CliError::invalid(format!("ground_truth: {e}")))
            }
        }
    }
}

/// `generate` command config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub layout: LayoutConfig,
    pub n: usize,
    pub seed: u64,
    pub ground_truth: GroundTruthConfig,
}

impl GenerateConfig {
    pub fn validate_shape(&self) -> CliResult<()> {
        if self.n < 2 {
            return Err(CliError::invalid(format!(
                "n: must be >= 2, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Loss section: Lipschitz constants are derived from the caps unless given
/// explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossConfig {
    pub margin: f64,
    pub clip_c: f64,
    #[serde(default)]
    pub l1: Option<f64>,
    #[serde(default)]
    pub l2: Option<f64>,
}

impl LossConfig {
    pub fn build(&self, caps: &MetricCaps, total_dim: usize) -> CliResult<LossSpec> {
        let spec = match (self.l1, self.l2) {
            (Some(l1), Some(l2)) => LossSpec::with_constants(self.margin, self.clip_c, l1, l2),
            (None, None) => LossSpec::clipped_hinge(self.margin, self.clip_c, caps, total_dim),
            _ => {
                return Err(CliError::invalid(
                    "loss: l1 and l2 must be given together or not at all",
                ))
            }
        };
        spec.map_err(|e| CliError::invalid(format!("loss: {e}")))
    }
}

/// Trainer section mirroring [`TrainConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSection {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_schedule")]
    pub schedule: StepSchedule,
    #[serde(default = "default_base_step")]
    pub base_step: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_risk_mode")]
    pub risk_mode: RiskMode,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iters() -> usize {
    400
}
fn default_schedule() -> StepSchedule {
    StepSchedule::InverseSqrt
}
fn default_base_step() -> f64 {
    0.3
}
fn default_tol() -> f64 {
    1e-9
}
fn default_risk_mode() -> RiskMode {
    RiskMode::UStat
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            max_iters: default_max_iters(),
            schedule: default_schedule(),
            base_step: default_base_step(),
            tol: default_tol(),
            risk_mode: default_risk_mode(),
            seed: 0,
        }
    }
}

impl TrainSection {
    pub fn build(&self) -> CliResult<TrainConfig> {
        let cfg = TrainConfig {
            max_iters: self.max_iters,
            schedule: self.schedule,
            base_step: self.base_step,
            tol: self.tol,
            risk_mode: self.risk_mode,
            seed: self.seed,
        };
        cfg.validate()
            .map_err(|e| CliError::invalid(format!("train: {e}")))?;
        Ok(cfg)
    }
}

/// Complexity-estimation section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexitySection {
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_mc_trials")]
    pub mc_trials: usize,
}

fn default_grid_size() -> usize {
    256
}
fn default_mc_trials() -> usize {
    100
}

impl Default for ComplexitySection {
    fn default() -> Self {
        ComplexitySection {
            grid_size: default_grid_size(),
            mc_trials: default_mc_trials(),
        }
    }
}

/// Generator section shared by bounds/sweep configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSection {
    pub layout: LayoutConfig,
    pub ground_truth: GroundTruthConfig,
}

/// `sweep` / `bounds` command config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    /// Nested pairs `[N, M]` of 1-based modality index lists.
    pub modality_pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub trials_per_cell: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub generator: GeneratorSection,
    pub caps: MetricCaps,
    pub loss: LossConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub complexity: ComplexitySection,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_delta() -> f64 {
    0.05
}

/// Fully validated, ready-to-run sweep plan.
pub struct SweepPlan {
    pub n_values: Vec<usize>,
    pub pairs: Vec<(ModalitySet, ModalitySet)>,
    pub trials_per_cell: usize,
    pub delta: f64,
    pub layout: ModalityLayout,
    pub ground_truth: GroundTruth,
    pub caps: MetricCaps,
    pub loss: LossSpec,
    pub train: TrainConfig,
    pub grid_size: usize,
    pub mc_trials: usize,
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn build(&self) -> CliResult<SweepPlan> {
        if self.n_values.is_empty() {
            return Err(CliError::invalid("n_values: must be nonempty"));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(CliError::invalid(format!(
                "n_values: entries must be >= 2, got {n}"
            )));
        }
        if self.modality_pairs.is_empty() {
            return Err(CliError::invalid("modality_pairs: must be nonempty"));
        }
        if self.trials_per_cell == 0 {
            return Err(CliError::invalid("trials_per_cell: must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::invalid(format!(
                "delta: must be in (0,1), got {}",
                self.delta
            )));
        }
        let layout = self.generator.layout.build()?;
        let ground_truth = self.generator.ground_truth.build(&layout)?;
        self.caps
            .validate()
            .map_err(|e| CliError::invalid(format!("caps: {e}")))?;
        let loss = self.loss.build(&self.caps, layout.total_dim())?;
        let train = self.train.build()?;
        if self.complexity.grid_size == 0 {
            return Err(CliError::invalid("complexity.grid_size: must be >= 1"));
        }
        if self.complexity.mc_trials < 100 {
            return Err(CliError::invalid("complexity.mc_trials: must be >= 100"));
        }
        let mut pairs = Vec::with_capacity(self.modality_pairs.len());
        for (i, (n_raw, m_raw)) in self.modality_pairs.iter().enumerate() {
            let n_set = ModalitySet::new(n_raw.clone())
                .map_err(|e| CliError::invalid(format!("modality_pairs[{i}].0: {e}")))?;
            let m_set = ModalitySet::new(m_raw.clone())
                .map_err(|e| CliError::invalid(format!("modality_pairs[{i}].1: {e}")))?;
            n_set
                .check_range(layout.num_modalities())
                .and(m_set.check_range(layout.num_modalities()))
                .map_err(|e| CliError::invalid(format!("modality_pairs[{i}]: {e}")))?;
            if !n_set.is_subset_of(&m_set) {
                return Err(CliError::invalid(format!(
                    "modality_pairs[{i}]: {} is not a subset of {}",
                    n_set.display_compact(),
                    m_set.display_compact()
                )));
            }
            pairs.push((n_set, m_set));
        }
        Ok(SweepPlan {
            n_values: self.n_values.clone(),
            pairs,
            trials_per_cell: self.trials_per_cell,
            delta: self.delta,
            layout,
            ground_truth,
            caps: self.caps,
            loss,
            train,
            grid_size: self.complexity.grid_size,
            mc_trials: self.complexity.mc_trials,
            base_seed: self.base_seed,
        })
    }
}

/// Parse a `--modalities` flag: `all`, `none`, or a comma list like `1,3`.
pub fn parse_modalities(raw: &str, num_modalities: usize) -> CliResult<ModalitySet> {
    let set = match raw.trim() {
        "all" => ModalitySet::full(num_modalities),
        "none" => ModalitySet::empty(),
        list => {
            let indices: Result<Vec<usize>, _> = list
                .split(',')
                .map(|tok| tok.trim().parse::<usize>())
                .collect();
            let indices = indices
                .map_err(|_| CliError::invalid(format!("--modalities: cannot parse '{raw}'")))?;
            ModalitySet::new(indices)
                .map_err(|e| CliError::invalid(format!("--modalities: {e}")))?
        }
    };
    set.check_range(num_modalities)
        .map_err(|e| CliError::invalid(format!("--modalities: {e}")))?;
    Ok(set)
}
