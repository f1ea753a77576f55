//! Empirical risk minimization over `(lambda, bias)` for a fixed modality
//! mask: projected subgradient descent on the box constraint set, with
//! best-iterate tracking and warm-starting across nested masks.
//!
//! The objective is convex whenever the two clips are inactive on the data
//! at hand (affine distance composed with a hinge), and the box projection
//! keeps every iterate feasible, so the best iterate converges to the global
//! minimum at the usual subgradient rate. Warm-starting the superset run at
//! the zero-padded subset solution realizes exactly the same function, which
//! turns empirical-risk monotonicity across nested masks into a property
//! that holds deterministically rather than asymptotically.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::math::sqrt;
use crate::metric::{project_to_constraints, DiagonalMetricModel, MetricCaps};
use crate::modality::ModalitySet;
use crate::risk::{reference_risk, PairCache, RiskMode};

/// Step-size schedule of the subgradient iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StepSchedule {
    Constant,
    InverseSqrt,
}

/// Trainer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub max_iters: usize,
    pub schedule: StepSchedule,
    /// Dimensionless base step; the applied step is scaled by the feasible
    /// box diameter and the subgradient norm.
    pub base_step: f64,
    /// Early stop when the best risk improves by less than this over a
    /// 50-iteration window (0 disables early stopping).
    pub tol: f64,
    pub risk_mode: RiskMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iters: 400,
            schedule: StepSchedule::InverseSqrt,
            base_step: 0.3,
            tol: 1e-9,
            risk_mode: RiskMode::UStat,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if !(self.base_step > 0.0) {
            return Err(Error::Config(format!(
                "base_step must be > 0, got {}",
                self.base_step
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One row of the optimization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceStep {
    pub iter: usize,
    pub risk: f64,
    pub step_size: f64,
}

/// Outcome of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    /// Best (lowest empirical risk) feasible iterate seen, not the last one.
    pub model: DiagonalMetricModel,
    pub final_empirical_risk: f64,
    /// `r̂(model) - r̂(true composite)` on the training pairs; `None` when
    /// the dataset carries no usable ground truth.
    pub excess_empirical_risk: Option<f64>,
    pub iters_used: usize,
    pub converged: bool,
    /// Per-iteration `(iter, risk, step_size)` log.
    pub trace: Vec<TraceStep>,
}

const STOP_WINDOW: usize = 50;

pub(crate) struct WeightedOutcome {
    pub lambdas: Vec<f64>,
    pub bias: f64,
    pub best_value: f64,
    pub iters_used: usize,
    pub converged: bool,
    pub trace: Vec<TraceStep>,
}

/// Minimize `Σ_p w_p loss_p` over the feasible box by projected subgradient
/// descent with normalized steps. Uniform weights give the empirical risk;
/// signed weights are used by the sign-weighted complexity estimator.
pub(crate) fn minimize_weighted(
    cache: &PairCache,
    spec: &LossSpec,
    caps: &MetricCaps,
    coord_mask: &[bool],
    weights: Option<&[f64]>,
    max_iters: usize,
    schedule: StepSchedule,
    base_step: f64,
    tol: f64,
    init_lambdas: &[f64],
    init_bias: f64,
) -> Result<WeightedOutcome> {
    let dim = cache.dim();
    let mut lambdas = project_to_constraints(init_lambdas, caps.eigen_cap, coord_mask);
    let mut bias = init_bias.clamp(0.0, caps.dist_cap);

    let masked_coords = coord_mask.iter().filter(|&&b| b).count() as f64;
    let diameter =
        sqrt(masked_coords * caps.eigen_cap * caps.eigen_cap + caps.dist_cap * caps.dist_cap);

    let mut g_lambda = vec![0.0; dim];
    let mut best_value = f64::INFINITY;
    let mut best_lambdas = lambdas.clone();
    let mut best_bias = bias;
    let mut trace = Vec::with_capacity(max_iters);
    let mut converged = false;
    let mut window_anchor = f64::INFINITY;
    let mut iters_used = 0;

    for t in 1..=max_iters {
        let (value, g_bias) = cache.weighted_value_and_subgrad(
            spec,
            &lambdas,
            bias,
            caps.dist_cap,
            weights,
            &mut g_lambda,
        );
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "objective became non-finite at iteration {t}"
            )));
        }
        if value < best_value {
            best_value = value;
            best_lambdas.copy_from_slice(&lambdas);
            best_bias = bias;
        }
        iters_used = t;

        let grad_norm = sqrt(g_lambda.iter().map(|g| g * g).sum::<f64>() + g_bias * g_bias);
        let step = if grad_norm > 1e-300 {
            let raw = base_step * diameter / grad_norm;
            match schedule {
                StepSchedule::Constant => raw,
                StepSchedule::InverseSqrt => raw / sqrt(t as f64),
            }
        } else {
            0.0
        };
        trace.push(TraceStep {
            iter: t,
            risk: value,
            step_size: step,
        });

        if grad_norm <= 1e-300 {
            // flat point: a zero subgradient certifies optimality for the
            // convex case and there is nowhere useful to go otherwise
            converged = true;
            break;
        }

        for ((l, g), &inside) in lambdas
            .iter_mut()
            .zip(g_lambda.iter())
            .zip(coord_mask.iter())
        {
            if inside {
                *l = (*l - step * g).clamp(0.0, caps.eigen_cap);
            } else {
                *l = 0.0;
            }
        }
        bias = (bias - step * g_bias).clamp(0.0, caps.dist_cap);

        if tol > 0.0 && t % STOP_WINDOW == 0 {
            if window_anchor - best_value < tol {
                converged = true;
                break;
            }
            window_anchor = best_value;
        }
    }

    // the final post-step iterate was produced but never scored; include it
    let (final_value, _) = cache.weighted_value_and_subgrad(
        spec,
        &lambdas,
        bias,
        caps.dist_cap,
        weights,
        &mut g_lambda,
    );
    if final_value < best_value {
        best_value = final_value;
        best_lambdas.copy_from_slice(&lambdas);
        best_bias = bias;
    }

    Ok(WeightedOutcome {
        lambdas: best_lambdas,
        bias: best_bias,
        best_value,
        iters_used,
        converged,
        trace,
    })
}

/// Train from the default initialization: `lambda = D/2` on masked
/// coordinates, `bias = κ/2` (the center of the feasible box).
pub fn train(
    dataset: &Dataset,
    mask: &ModalitySet,
    spec: &LossSpec,
    caps: &MetricCaps,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    let coord_mask = dataset.layout.coord_mask(mask)?;
    let init: Vec<f64> = coord_mask
        .iter()
        .map(|&inside| if inside { caps.eigen_cap / 2.0 } else { 0.0 })
        .collect();
    train_with_init(dataset, mask, spec, caps, cfg, &init, caps.dist_cap / 2.0)
}

/// Train from an explicit initial point (projected onto the feasible set
/// first). Warm-starting across nested masks passes the subset solution
/// here; its zero padding realizes the identical function, so the best
/// iterate can never be worse than the warm start.
pub fn train_with_init(
    dataset: &Dataset,
    mask: &ModalitySet,
    spec: &LossSpec,
    caps: &MetricCaps,
    cfg: &TrainConfig,
    init_lambdas: &[f64],
    init_bias: f64,
) -> Result<TrainResult> {
    cfg.validate()?;
    caps.validate()?;
    spec.validate()?;
    let coord_mask = dataset.layout.coord_mask(mask)?;
    if init_lambdas.len() != coord_mask.len() {
        return Err(Error::Shape(format!(
            "initial lambda vector has length {}, layout total_dim is {}",
            init_lambdas.len(),
            coord_mask.len()
        )));
    }
    let cache = PairCache::for_mode(dataset, mask, cfg.risk_mode)?;
    let outcome = minimize_weighted(
        &cache,
        spec,
        caps,
        &coord_mask,
        None,
        cfg.max_iters,
        cfg.schedule,
        cfg.base_step,
        cfg.tol,
        init_lambdas,
        init_bias,
    )?;
    debug_assert!(outcome.best_value >= 0.0 && outcome.best_value <= spec.clip_c);
    let model = DiagonalMetricModel::new(
        outcome.lambdas,
        outcome.bias,
        mask.clone(),
        *caps,
        &dataset.layout,
    )?;
    let excess = match reference_risk(dataset, spec, cfg.risk_mode) {
        Ok(reference) => Some(outcome.best_value - reference.value),
        Err(_) => None,
    };
    Ok(TrainResult {
        model,
        final_empirical_risk: outcome.best_value,
        excess_empirical_risk: excess,
        iters_used: outcome.iters_used,
        converged: outcome.converged,
        trace: outcome.trace,
    })
}

/// `r̂(model) - r̂(true composite)` on the dataset's pairs in the given mode.
/// Unlike the value stored in [`TrainResult`], this recomputes both sides,
/// so it works for any feasible model.
pub fn excess_empirical_risk(
    model: &DiagonalMetricModel,
    dataset: &Dataset,
    spec: &LossSpec,
    mode: RiskMode,
) -> Result<f64> {
    let model_risk = match mode {
        RiskMode::UStat => crate::risk::ustat_risk(spec, model, dataset)?.value,
        RiskMode::Block => crate::risk::block_risk(spec, model, dataset, None)?.value,
    };
    let reference = reference_risk(dataset, spec, mode)?;
    Ok(model_risk - reference.value)
}

/// Outcome of the nested-mask monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCheck {
    pub risk_m: f64,
    pub risk_n: f64,
    pub ok: bool,
    pub result_m: TrainResult,
    pub result_n: TrainResult,
}

/// Train on the subset mask `n_set` cold, then on the superset `m_set`
/// warm-started from the subset solution, and check
/// `risk_M <= risk_N + max(tol, 1e-6)`.
pub fn monotonicity_check(
    dataset: &Dataset,
    n_set: &ModalitySet,
    m_set: &ModalitySet,
    spec: &LossSpec,
    caps: &MetricCaps,
    cfg: &TrainConfig,
) -> Result<MonotonicityCheck> {
    if !n_set.is_subset_of(m_set) {
        return Err(Error::Precondition(format!(
            "N = {} is not a subset of M = {}",
            n_set.display_compact(),
            m_set.display_compact()
        )));
    }
    let result_n = train(dataset, n_set, spec, caps, cfg)?;
    let result_m = if n_set == m_set {
        // identical training problem: identical run, risks exactly equal
        result_n.clone()
    } else {
        // the subset solution is already full-length with zeros outside
        // n_set, which is exactly the zero-padded warm start for the
        // superset box
        let warm_lambdas = result_n.model.lambdas().to_vec();
        let warm_bias = result_n.model.bias();
        train_with_init(dataset, m_set, spec, caps, cfg, &warm_lambdas, warm_bias)?
    };
    let opt_tol = cfg.tol.max(1e-6);
    let ok = result_m.final_empirical_risk <= result_n.final_empirical_risk + opt_tol;
    Ok(MonotonicityCheck {
        risk_m: result_m.final_empirical_risk,
        risk_n: result_n.final_empirical_risk,
        ok,
        result_m,
        result_n,
    })
}
