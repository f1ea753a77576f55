//! Diagonal Mahalanobis models and the constraint box they live in.
//!
//! The learnable metric is a diagonal PSD matrix with eigenvalues in
//! `[0, eigen_cap]`, zeroed outside the modality mask, together with a
//! decision bias in `[0, dist_cap]`. Distances are hard-clipped at
//! `dist_cap`, which keeps the loss bounded however the data behaves.

use alloc::format;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::modality::{ModalityLayout, ModalitySet};

/// The three capacity constants of the constraint set: eigenvalue cap `D`,
/// distance cap `κ`, and feature-difference cap `B` (sup-norm).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricCaps {
    pub eigen_cap: f64,
    pub dist_cap: f64,
    pub feature_cap: f64,
}

impl MetricCaps {
    pub fn new(eigen_cap: f64, dist_cap: f64, feature_cap: f64) -> Result<Self> {
        let caps = MetricCaps {
            eigen_cap,
            dist_cap,
            feature_cap,
        };
        caps.validate()?;
        Ok(caps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eigen_cap > 0.0) || !(self.dist_cap > 0.0) || !(self.feature_cap > 0.0) {
            return Err(Error::Config(
                "eigen_cap, dist_cap, and feature_cap must all be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A feasible diagonal metric model: eigenvalue vector over the flattened
/// feature space, decision bias, the modality mask it operates on, and the
/// caps defining its constraint set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagonalMetricModel {
    lambdas: Vec<f64>,
    bias: f64,
    mask: ModalitySet,
    #[cfg_attr(feature = "serde", serde(flatten))]
    caps: MetricCaps,
}

impl DiagonalMetricModel {
    /// Build a model, rejecting infeasible parameters.
    pub fn new(
        lambdas: Vec<f64>,
        bias: f64,
        mask: ModalitySet,
        caps: MetricCaps,
        layout: &ModalityLayout,
    ) -> Result<Self> {
        caps.validate()?;
        if lambdas.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "lambda vector has length {}, layout total_dim is {}",
                lambdas.len(),
                layout.total_dim()
            )));
        }
        let coord_mask = layout.coord_mask(&mask)?;
        for (i, (&l, &inside)) in lambdas.iter().zip(coord_mask.iter()).enumerate() {
            if !(0.0..=caps.eigen_cap).contains(&l) {
                return Err(Error::Config(format!(
                    "lambda[{i}] = {l} outside [0, {}]",
                    caps.eigen_cap
                )));
            }
            if !inside && l != 0.0 {
                return Err(Error::Config(format!(
                    "lambda[{i}] = {l} must be zero outside the modality mask"
                )));
            }
        }
        if !(0.0..=caps.dist_cap).contains(&bias) {
            return Err(Error::Config(format!(
                "bias {bias} outside [0, {}]",
                caps.dist_cap
            )));
        }
        Ok(DiagonalMetricModel {
            lambdas,
            bias,
            mask,
            caps,
        })
    }

    /// Build a model by projecting arbitrary parameters onto the constraint
    /// set first.
    pub fn projected(
        lambdas: &[f64],
        bias: f64,
        mask: ModalitySet,
        caps: MetricCaps,
        layout: &ModalityLayout,
    ) -> Result<Self> {
        caps.validate()?;
        let coord_mask = layout.coord_mask(&mask)?;
        if lambdas.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "lambda vector has length {}, layout total_dim is {}",
                lambdas.len(),
                layout.total_dim()
            )));
        }
        let lambdas = project_to_constraints(lambdas, caps.eigen_cap, &coord_mask);
        let bias = bias.clamp(0.0, caps.dist_cap);
        Ok(DiagonalMetricModel {
            lambdas,
            bias,
            mask,
            caps,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn mask(&self) -> &ModalitySet {
        &self.mask
    }

    pub fn caps(&self) -> &MetricCaps {
        &self.caps
    }

    /// Feasibility re-check against a layout (e.g. after deserialization).
    pub fn validate_against(&self, layout: &ModalityLayout) -> Result<()> {
        Self::new(
            self.lambdas.clone(),
            self.bias,
            self.mask.clone(),
            self.caps,
            layout,
        )
        .map(|_| ())
    }

    /// Clipped quadratic form between two flattened feature vectors.
    pub fn distance(&self, x_i: &[f64], x_j: &[f64]) -> Result<f64> {
        mahalanobis_distance(self, x_i, x_j)
    }
}

/// Diagonal Mahalanobis pseudo-distance, hard-clipped at the model's
/// distance cap: `min(Σ_c λ_c (x_i - x_j)_c², κ)`.
///
/// Symmetric, nonnegative, zero for identical points; the triangle
/// inequality is not guaranteed (distinct points may sit at distance zero).
pub fn mahalanobis_distance(model: &DiagonalMetricModel, x_i: &[f64], x_j: &[f64]) -> Result<f64> {
    if x_i.len() != model.lambdas.len() || x_j.len() != model.lambdas.len() {
        return Err(Error::Shape(format!(
            "feature vectors of length {} and {} for a {}-dimensional metric",
            x_i.len(),
            x_j.len(),
            model.lambdas.len()
        )));
    }
    let mut acc = 0.0;
    for ((&l, &a), &b) in model.lambdas.iter().zip(x_i.iter()).zip(x_j.iter()) {
        let d = a - b;
        acc += l * d * d;
    }
    Ok(acc.min(model.caps.dist_cap))
}

/// Project an eigenvalue vector onto the constraint set: clamp each entry
/// to `[0, eigen_cap]`, then zero every coordinate outside the mask.
/// Idempotent and non-expansive in the sup norm on the clamped coordinates.
pub fn project_to_constraints(lambdas: &[f64], eigen_cap: f64, coord_mask: &[bool]) -> Vec<f64> {
    lambdas
        .iter()
        .zip(coord_mask.iter())
        .map(|(&l, &inside)| if inside { l.clamp(0.0, eigen_cap) } else { 0.0 })
        .collect()
}

/// Tightest valid feature-difference cap of a dataset: the maximum over all
/// sample pairs of the sup-norm difference of flattened features.
///
/// Computed by the coordinate-wise `max - min` shortcut, which coincides
/// with the pairwise maximum exactly.
pub fn feature_diff_cap_check(dataset: &Dataset) -> f64 {
    let dim = dataset.layout.total_dim();
    if dataset.samples.is_empty() || dim == 0 {
        return 0.0;
    }
    let mut lo = alloc::vec![f64::INFINITY; dim];
    let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
    for s in &dataset.samples {
        // samples conform to the layout by construction; fall back to zeros
        // rather than panicking on a malformed hand-built dataset
        let Ok(flat) = dataset.layout.flatten(s) else {
            continue;
        };
        for (c, &v) in flat.iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let mut cap: f64 = 0.0;
    for c in 0..dim {
        if hi[c] >= lo[c] {
            cap = cap.max(hi[c] - lo[c]);
        }
    }
    cap
}
