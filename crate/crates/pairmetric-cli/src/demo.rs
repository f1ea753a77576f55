//! Canonical demo experiment configuration used by the verification suites
//! and the documentation examples.
//!
//! Two modalities of two dimensions each observe noisy copies of a
//! two-dimensional latent vector drawn around one of two cluster centers at
//! `±1.5·e1`. The decision threshold 5.9 is the numerically calibrated
//! hinge-optimal bias for that latent geometry. Caps: eigenvalues in
//! `[0, 1]`, distances clipped at 512, feature differences bounded by 16;
//! the loss clip `C = margin + κ` can then never activate on feasible
//! parameters, which keeps the training objective convex.

use pairmetric_core::MetricCaps;

use crate::formats::{
    ComplexitySection, GeneratorSection, GroundTruthConfig, GroundTruthPreset, LayoutConfig,
    LossConfig, PresetKind, SweepConfig, TrainSection,
};

/// Demo sweep configuration over the nested pair `{1} ⊂ {1,2}`.
pub fn demo_sweep_config(
    n_values: Vec<usize>,
    trials_per_cell: usize,
    base_seed: u64,
) -> SweepConfig {
    SweepConfig {
        n_values,
        modality_pairs: vec![(vec![1], vec![1, 2])],
        trials_per_cell,
        delta: 0.05,
        generator: GeneratorSection {
            layout: LayoutConfig { dims: vec![2, 2] },
            ground_truth: GroundTruthConfig::Preset(GroundTruthPreset {
                preset: PresetKind::Replicated,
                latent_dim: Some(2),
                num_centers: 2,
                scale: 1.5,
                noise_sigma: 0.6,
                bayes_threshold: 5.9,
            }),
        },
        caps: demo_caps(),
        loss: LossConfig {
            margin: 1.0,
            clip_c: 513.0,
            l1: None,
            l2: None,
        },
        train: TrainSection {
            max_iters: 200,
            ..TrainSection::default()
        },
        complexity: ComplexitySection {
            grid_size: 256,
            mc_trials: 100,
        },
        base_seed,
    }
}

pub fn demo_caps() -> MetricCaps {
    MetricCaps {
        eigen_cap: 1.0,
        dist_cap: 512.0,
        feature_cap: 16.0,
    }
}
