//! Synthetic datasets with known generative ground truth.
//!
//! Samples are produced by a latent Gaussian cluster model: a class center
//! is chosen uniformly among `C` centers, the latent vector is the center
//! plus spherical unit Gaussian noise, and each modality view is a linear
//! mixing of the latent vector plus optional spherical observation noise.
//! The label is the center index, so the true composite decision rule —
//! "similar iff the latent Mahalanobis distance is below the threshold" —
//! is known exactly and every reference quantity (true-composite risk,
//! representation quality) is computable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::modality::{ModalityLayout, MultimodalSample};
use crate::rng::substream;

/// Everything the generator knows and a learner does not: per-modality
/// mixing matrices, the latent metric and decision threshold defining the
/// true composite rule, the cluster centers, and (after generation) the
/// realized latent vectors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    /// Per-modality mixing matrices; `mixing_matrices[k]` has shape
    /// `dims[k] x latent_dim` (row-major rows).
    pub mixing_matrices: Vec<Vec<Vec<f64>>>,
    pub latent_dim: usize,
    /// Scale of the spherical observation noise added to each modality view.
    pub noise_sigma: f64,
    /// Decision threshold of the true composite rule on latent distance.
    pub bayes_threshold: f64,
    /// Diagonal latent metric (eigenvalues) of the true composite rule.
    pub latent_metric: Vec<f64>,
    /// Cluster centers in latent space; the label of a sample is the index
    /// of the center it was drawn from.
    pub centers: Vec<Vec<f64>>,
    /// Realized latent vectors, filled in by the generator. `None` when the
    /// struct is used purely as generator configuration.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub latents: Option<Vec<Vec<f64>>>,
}

impl GroundTruth {
    /// Selector mixing: `latent_dim == total_dim` and modality `k` reads its
    /// own slice of the latent vector. With `noise_sigma == 0` the
    /// concatenated features reproduce the latent vector exactly.
    pub fn identity_mixing(
        layout: &ModalityLayout,
        noise_sigma: f64,
        bayes_threshold: f64,
        centers: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let latent_dim = layout.total_dim();
        let mut mixing_matrices = Vec::with_capacity(layout.num_modalities());
        for (k, &d) in layout.dims().iter().enumerate() {
            let offset = layout.offset(k + 1);
            let mut w = vec![vec![0.0; latent_dim]; d];
            for (r, row) in w.iter_mut().enumerate() {
                row[offset + r] = 1.0;
            }
            mixing_matrices.push(w);
        }
        let gt = GroundTruth {
            mixing_matrices,
            latent_dim,
            noise_sigma,
            bayes_threshold,
            latent_metric: vec![1.0; latent_dim],
            centers,
            latents: None,
        };
        gt.validate_against(layout)?;
        Ok(gt)
    }

    /// Replicated mixing: every modality observes a full noisy copy of the
    /// latent vector (requires `dims[k] == latent_dim` for all modalities).
    /// Larger masks then genuinely help by averaging observation noise.
    pub fn replicated_mixing(
        layout: &ModalityLayout,
        latent_dim: usize,
        noise_sigma: f64,
        bayes_threshold: f64,
        centers: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if layout.dims().iter().any(|&d| d != latent_dim) {
            return Err(Error::Layout(format!(
                "replicated mixing needs every modality dimension to equal latent_dim {latent_dim}"
            )));
        }
        let mut eye = vec![vec![0.0; latent_dim]; latent_dim];
        for (r, row) in eye.iter_mut().enumerate() {
            row[r] = 1.0;
        }
        let gt = GroundTruth {
            mixing_matrices: vec![eye; layout.num_modalities()],
            latent_dim,
            noise_sigma,
            bayes_threshold,
            latent_metric: vec![1.0; latent_dim],
            centers,
            latents: None,
        };
        gt.validate_against(layout)?;
        Ok(gt)
    }

    /// `count` centers spread along the first latent axis at `±scale` (a
    /// single center sits at the origin).
    pub fn axis_centers(count: usize, latent_dim: usize, scale: f64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| {
                let mut c = vec![0.0; latent_dim];
                if count > 1 {
                    c[0] = scale * (2.0 * i as f64 - (count as f64 - 1.0)) / (count as f64 - 1.0);
                }
                c
            })
            .collect()
    }

    /// Consistency checks against a layout.
    pub fn validate_against(&self, layout: &ModalityLayout) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Config("latent_dim must be >= 1".into()));
        }
        if self.mixing_matrices.len() != layout.num_modalities() {
            return Err(Error::Layout(format!(
                "{} mixing matrices for {} modalities",
                self.mixing_matrices.len(),
                layout.num_modalities()
            )));
        }
        for (k, (w, &d)) in self
            .mixing_matrices
            .iter()
            .zip(layout.dims().iter())
            .enumerate()
        {
            if w.len() != d || w.iter().any(|row| row.len() != self.latent_dim) {
                return Err(Error::Layout(format!(
                    "mixing matrix {} must have shape {} x {}",
                    k + 1,
                    d,
                    self.latent_dim
                )));
            }
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }
        if self.latent_metric.len() != self.latent_dim {
            return Err(Error::Shape(format!(
                "latent_metric has length {}, latent_dim is {}",
                self.latent_metric.len(),
                self.latent_dim
            )));
        }
        if self.latent_metric.iter().any(|&l| l < 0.0) {
            return Err(Error::Config("latent_metric entries must be >= 0".into()));
        }
        if self.centers.is_empty() {
            return Err(Error::Config(
                "at least one cluster center is required".into(),
            ));
        }
        if self.centers.iter().any(|c| c.len() != self.latent_dim) {
            return Err(Error::Shape(
                "every center must have length latent_dim".into(),
            ));
        }
        Ok(())
    }

    /// Latent Mahalanobis distance of the true composite rule.
    pub fn latent_distance(&self, z_i: &[f64], z_j: &[f64]) -> f64 {
        self.latent_metric
            .iter()
            .zip(z_i.iter().zip(z_j.iter()))
            .map(|(&l, (&a, &b))| l * (a - b) * (a - b))
            .sum()
    }
}

/// A generated (or loaded) dataset: layout, samples, optional generative
/// ground truth, and the seed it was generated from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    pub layout: ModalityLayout,
    pub seed: u64,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub ground_truth: Option<GroundTruth>,
    pub samples: Vec<MultimodalSample>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Realized latent vectors, when the dataset came from the generator.
    pub fn latents(&self) -> Option<&[Vec<f64>]> {
        self.ground_truth
            .as_ref()
            .and_then(|gt| gt.latents.as_deref())
    }

    /// Structural validation of every sample against the layout, plus
    /// ground-truth consistency when present.
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        for s in &self.samples {
            self.layout.check_sample(s)?;
        }
        if let Some(gt) = &self.ground_truth {
            gt.validate_against(&self.layout)?;
            if let Some(latents) = &gt.latents {
                if latents.len() != self.samples.len() {
                    return Err(Error::Shape(format!(
                        "{} latent vectors for {} samples",
                        latents.len(),
                        self.samples.len()
                    )));
                }
                if latents.iter().any(|z| z.len() != gt.latent_dim) {
                    return Err(Error::Shape("latent vector length mismatch".into()));
                }
            }
        }
        Ok(())
    }
}

/// Draw `n` samples from the latent cluster model, deterministically in
/// `seed`. Sample `i` consumes only its own counter-based substream, so
/// growing `n` extends a dataset without reshuffling earlier samples.
pub fn generate_dataset(
    layout: &ModalityLayout,
    n: usize,
    gt: &GroundTruth,
    seed: u64,
) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Size(format!("need n >= 2 samples, got {n}")));
    }
    gt.validate_against(layout)?;

    let num_centers = gt.centers.len();
    let mut samples = Vec::with_capacity(n);
    let mut latents = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = substream(seed, i as u64);
        let center_idx = rng.random_range(0..num_centers);
        let mut z = gt.centers[center_idx].clone();
        for coord in z.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *coord += g;
        }
        let mut features = Vec::with_capacity(layout.num_modalities());
        for w in &gt.mixing_matrices {
            let mut view: Vec<f64> = w
                .iter()
                .map(|row| row.iter().zip(z.iter()).map(|(&a, &b)| a * b).sum())
                .collect();
            if gt.noise_sigma > 0.0 {
                for v in view.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v += gt.noise_sigma * g;
                }
            }
            features.push(view);
        }
        samples.push(MultimodalSample::complete(features, center_idx as i64));
        latents.push(z);
    }

    let mut stored = gt.clone();
    stored.latents = Some(latents);
    Ok(Dataset {
        layout: layout.clone(),
        seed,
        ground_truth: Some(stored),
        samples,
    })
}
