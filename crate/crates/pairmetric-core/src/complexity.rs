//! Empirical Rademacher complexity over the decoupled blocks, finite-class
//! closed forms, and the capacity bound of the diagonal metric class.
//!
//! The Monte-Carlo estimator draws sign vectors `σ ∈ {±1}^⌊n/2⌋` and
//! averages the supremum of `(1/⌊n/2⌋)Σ_i σ_i·loss_i` over a hypothesis
//! source. The verifiable default source is a finite grid of feasible
//! models (a supremum over any finite index set is legitimate); the
//! sign-weighted optimizer is a sharper heuristic that searches the whole
//! box per sign draw with random restarts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::math::{ln, mean_and_stderr, sqrt};
use crate::metric::{DiagonalMetricModel, MetricCaps};
use crate::modality::{ModalityLayout, ModalitySet};
use crate::risk::PairCache;
use crate::rng::{derive_seed, substream, HaltonSeq};
use crate::train::{minimize_weighted, StepSchedule};

/// Flag attached when the capacity-bound log argument is below one.
pub const FLAG_T5_LOG_NONPOSITIVE: &str = "theorem5-log-argument-nonpositive";
/// Flag attached when the log argument is exactly one (bound exactly zero).
pub const FLAG_T5_BOUNDARY: &str = "boundary";

/// How the per-sign supremum was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SupMethod {
    Grid,
    SignWeightedOpt,
}

/// Monte-Carlo estimate of the block Rademacher complexity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexityEstimate {
    pub value: f64,
    pub n_blocks: usize,
    pub mc_trials: usize,
    pub stderr: f64,
    pub sup_method: SupMethod,
}

/// Settings for the sign-weighted optimization supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignOptConfig {
    pub restarts: usize,
    pub iters: usize,
    pub base_step: f64,
}

impl Default for SignOptConfig {
    fn default() -> Self {
        SignOptConfig {
            restarts: 4,
            iters: 150,
            base_step: 0.3,
        }
    }
}

/// Where the supremum over hypotheses comes from.
pub enum HypothesisSource<'a> {
    /// Exhaustive maximum over a finite model grid.
    Grid(&'a [DiagonalMetricModel]),
    /// Projected subgradient ascent of the sign-weighted objective over the
    /// feasible box, best of several restarts.
    SignWeightedOpt {
        mask: ModalitySet,
        caps: MetricCaps,
        opt: SignOptConfig,
    },
}

/// Per-hypothesis loss vectors over the block pairs of `dataset`.
pub fn loss_table(
    dataset: &Dataset,
    spec: &LossSpec,
    models: &[DiagonalMetricModel],
) -> Result<Vec<Vec<f64>>> {
    if models.is_empty() {
        return Err(Error::Config("hypothesis grid must be nonempty".into()));
    }
    let mut caches: Vec<(ModalitySet, PairCache)> = Vec::new();
    let mut table = Vec::with_capacity(models.len());
    for model in models {
        let idx = match caches.iter().position(|(m, _)| m == model.mask()) {
            Some(i) => i,
            None => {
                caches.push((
                    model.mask().clone(),
                    PairCache::block(dataset, model.mask(), None)?,
                ));
                caches.len() - 1
            }
        };
        table.push(caches[idx].1.loss_vector(
            spec,
            model.lambdas(),
            model.bias(),
            model.caps().dist_cap,
        ));
    }
    Ok(table)
}

/// Monte-Carlo Rademacher estimate over explicit loss vectors (one vector
/// per hypothesis, all of equal length `n_blocks`).
pub fn rademacher_mc_from_table(
    table: &[Vec<f64>],
    mc_trials: usize,
    seed: u64,
) -> Result<ComplexityEstimate> {
    if table.is_empty() {
        return Err(Error::Config("loss table must be nonempty".into()));
    }
    if mc_trials < 100 {
        return Err(Error::Config(format!(
            "need at least 100 sign draws, got {mc_trials}"
        )));
    }
    let n_blocks = table[0].len();
    if n_blocks == 0 || table.iter().any(|row| row.len() != n_blocks) {
        return Err(Error::Shape(
            "all loss vectors must share the same nonzero length".into(),
        ));
    }
    let mut sups = Vec::with_capacity(mc_trials);
    let mut signs = vec![1.0f64; n_blocks];
    for trial in 0..mc_trials {
        let mut rng = substream(seed, trial as u64);
        for s in signs.iter_mut() {
            *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        let mut sup = f64::NEG_INFINITY;
        for row in table {
            let corr: f64 = row.iter().zip(signs.iter()).map(|(&l, &s)| s * l).sum();
            sup = sup.max(corr / n_blocks as f64);
        }
        sups.push(sup);
    }
    let (value, stderr) = mean_and_stderr(&sups);
    Ok(ComplexityEstimate {
        value,
        n_blocks,
        mc_trials,
        stderr,
        sup_method: SupMethod::Grid,
    })
}

/// Monte-Carlo estimate of the block Rademacher complexity of the loss
/// class on `dataset`, with the supremum taken over `source`.
pub fn rademacher_mc(
    dataset: &Dataset,
    spec: &LossSpec,
    source: &HypothesisSource<'_>,
    mc_trials: usize,
    seed: u64,
) -> Result<ComplexityEstimate> {
    match source {
        HypothesisSource::Grid(models) => {
            let table = loss_table(dataset, spec, models)?;
            rademacher_mc_from_table(&table, mc_trials, seed)
        }
        HypothesisSource::SignWeightedOpt { mask, caps, opt } => {
            if mc_trials < 100 {
                return Err(Error::Config(format!(
                    "need at least 100 sign draws, got {mc_trials}"
                )));
            }
            caps.validate()?;
            let cache = PairCache::block(dataset, mask, None)?;
            let n_blocks = cache.len();
            let coord_mask = dataset.layout.coord_mask(mask)?;
            let masked_dims = coord_mask.iter().filter(|&&b| b).count();
            let mut sups = Vec::with_capacity(mc_trials);
            let mut weights = vec![0.0f64; n_blocks];
            for trial in 0..mc_trials {
                let mut rng = substream(seed, trial as u64);
                for w in weights.iter_mut() {
                    // maximizing Σ σ·loss / n_b == minimizing Σ (-σ/n_b)·loss
                    *w = if rng.random::<bool>() { -1.0 } else { 1.0 };
                    *w /= n_blocks as f64;
                }
                let mut best = f64::NEG_INFINITY;
                let mut halton =
                    HaltonSeq::new(masked_dims + 1, derive_seed(seed, 0x5157 ^ trial as u64));
                let mut point = vec![0.0; masked_dims + 1];
                for restart in 0..opt.restarts.max(1) {
                    let (init_l, init_b) = if restart == 0 {
                        // box center first, then low-discrepancy restarts
                        (
                            coord_mask
                                .iter()
                                .map(|&m| if m { caps.eigen_cap / 2.0 } else { 0.0 })
                                .collect::<Vec<f64>>(),
                            caps.dist_cap / 2.0,
                        )
                    } else {
                        halton.next_point(&mut point);
                        let mut l = vec![0.0; coord_mask.len()];
                        let mut slot = 0;
                        for (c, &m) in coord_mask.iter().enumerate() {
                            if m {
                                l[c] = point[slot] * caps.eigen_cap;
                                slot += 1;
                            }
                        }
                        (l, point[masked_dims] * caps.dist_cap)
                    };
                    let outcome = minimize_weighted(
                        &cache,
                        spec,
                        caps,
                        &coord_mask,
                        Some(&weights),
                        opt.iters,
                        StepSchedule::InverseSqrt,
                        opt.base_step,
                        0.0,
                        &init_l,
                        init_b,
                    )?;
                    best = best.max(-outcome.best_value);
                }
                sups.push(best);
            }
            let (value, stderr) = mean_and_stderr(&sups);
            Ok(ComplexityEstimate {
                value,
                n_blocks,
                mc_trials,
                stderr,
                sup_method: SupMethod::SignWeightedOpt,
            })
        }
    }
}

/// Which finite-class closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MassartVariant {
    /// Sup-norm form: `max ‖w‖_∞ · √(2 ln|W|) / n`.
    Paper,
    /// Euclidean form: `max ‖w‖_2 · √(2 ln|W|) / n`.
    Standard,
}

/// Finite-class bound from an explicit loss table. Both variants divide by
/// the vector length (here the block count); they differ in the norm.
pub fn massart_bound(table: &[Vec<f64>], variant: MassartVariant) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::Config("loss table must be nonempty".into()));
    }
    let n_blocks = table[0].len();
    if n_blocks == 0 || table.iter().any(|row| row.len() != n_blocks) {
        return Err(Error::Shape(
            "all loss vectors must share the same nonzero length".into(),
        ));
    }
    let norm = table
        .iter()
        .map(|row| match variant {
            MassartVariant::Paper => row.iter().fold(0.0f64, |m, &v| m.max(v.abs())),
            MassartVariant::Standard => sqrt(row.iter().map(|&v| v * v).sum()),
        })
        .fold(0.0f64, f64::max);
    Ok(massart_formula(norm, table.len() as f64, n_blocks))
}

/// The raw closed form `norm · √(2 ln cardinality) / n`, kept separate so
/// non-integer cardinalities can be evaluated directly.
pub fn massart_formula(norm: f64, cardinality: f64, n: usize) -> f64 {
    norm * sqrt(2.0 * ln(cardinality)) / n as f64
}

/// Closed-form value that may be undefined, with validity flags.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClosedFormBound {
    pub value: Option<f64>,
    pub flags: Vec<&'static str>,
}

/// Capacity bound of the capped diagonal class:
/// `D·√(2·ln(κ / (D^m · B²))) / ⌊n/2⌋` with `m = total_dim`.
///
/// Defined only when the log argument exceeds one; exactly one yields zero
/// with a boundary flag; below one the value is undefined and flagged.
pub fn theorem5_bound(caps: &MetricCaps, total_dim: usize, n: usize) -> Result<ClosedFormBound> {
    caps.validate()?;
    if n < 2 {
        return Err(Error::Size(format!("need n >= 2, got {n}")));
    }
    let ratio = log_ratio(caps, total_dim as i32);
    let n_blocks = (n / 2) as f64;
    if ratio > 0.0 {
        Ok(ClosedFormBound {
            value: Some(caps.eigen_cap * sqrt(2.0 * ratio) / n_blocks),
            flags: Vec::new(),
        })
    } else if ratio == 0.0 {
        Ok(ClosedFormBound {
            value: Some(0.0),
            flags: vec![FLAG_T5_BOUNDARY],
        })
    } else {
        Ok(ClosedFormBound {
            value: None,
            flags: vec![FLAG_T5_LOG_NONPOSITIVE],
        })
    }
}

/// `ln(κ / (D^power · B²))`, evaluated through the explicit ratio so exact
/// boundary inputs produce an exact zero.
pub(crate) fn log_ratio(caps: &MetricCaps, power: i32) -> f64 {
    let denom = powi(caps.eigen_cap, power) * caps.feature_cap * caps.feature_cap;
    ln(caps.dist_cap / denom)
}

#[cfg(feature = "std")]
fn powi(x: f64, p: i32) -> f64 {
    x.powi(p)
}

#[cfg(not(feature = "std"))]
fn powi(x: f64, p: i32) -> f64 {
    libm::pow(x, p as f64)
}

/// A grid of `count` feasible models over the masked `(lambda, bias)` box,
/// drawn from a seeded low-discrepancy sequence.
pub fn model_grid(
    layout: &ModalityLayout,
    mask: &ModalitySet,
    caps: &MetricCaps,
    count: usize,
    seed: u64,
) -> Result<Vec<DiagonalMetricModel>> {
    if count == 0 {
        return Err(Error::Config("grid size must be >= 1".into()));
    }
    caps.validate()?;
    let coord_mask = layout.coord_mask(mask)?;
    let masked_dims = coord_mask.iter().filter(|&&b| b).count();
    let mut halton = HaltonSeq::new(masked_dims + 1, seed);
    let mut point = vec![0.0; masked_dims + 1];
    let mut grid = Vec::with_capacity(count);
    for _ in 0..count {
        halton.next_point(&mut point);
        let mut lambdas = vec![0.0; layout.total_dim()];
        let mut slot = 0;
        for (c, &inside) in coord_mask.iter().enumerate() {
            if inside {
                lambdas[c] = point[slot] * caps.eigen_cap;
                slot += 1;
            }
        }
        let bias = point[masked_dims] * caps.dist_cap;
        grid.push(DiagonalMetricModel::new(
            lambdas,
            bias,
            mask.clone(),
            *caps,
            layout,
        )?);
    }
    Ok(grid)
}
