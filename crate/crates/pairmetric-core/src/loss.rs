//! Pairwise losses with certified joint-Lipschitz constants.
//!
//! The single concrete loss is a clipped pairwise hinge on the signed
//! margin violation: with pair sign `τ` (+1 similar, -1 dissimilar),
//! clipped distance `d` and bias `b`,
//!
//! ```text
//!   loss = clamp(margin + τ·(d − b), 0, C)
//! ```
//!
//! Similar pairs are charged for being farther than the bias, dissimilar
//! pairs for being closer. The distance is affine in the eigenvalues, so
//! the loss is a hinge of an affine function of `(λ, b)` wherever the two
//! clips are inactive, which is what makes empirical risk minimization
//! convex on sensibly-capped configurations.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::metric::{mahalanobis_distance, DiagonalMetricModel, MetricCaps};
use crate::modality::{pair_label, MultimodalSample};
use crate::rng::substream;

/// Available pairwise loss kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LossKind {
    ClippedPairHinge,
}

/// A pairwise loss with its declared constants: margin, clip bound `C`, and
/// the joint Lipschitz constants `(L1, L2)` with respect to each argument's
/// feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossSpec {
    pub kind: LossKind,
    pub margin: f64,
    pub clip_c: f64,
    pub l1: f64,
    pub l2: f64,
}

impl LossSpec {
    /// Clipped pair hinge with Lipschitz constants derived analytically from
    /// the constraint box: the distance gradient in either argument is
    /// `2·λ∘diff`, bounded by `2·D·B·√total_dim` on the capped domain, and
    /// the hinge/clip have unit slope.
    pub fn clipped_hinge(
        margin: f64,
        clip_c: f64,
        caps: &MetricCaps,
        total_dim: usize,
    ) -> Result<Self> {
        caps.validate()?;
        let l = 2.0 * caps.eigen_cap * caps.feature_cap * sqrt(total_dim as f64);
        Self::with_constants(margin, clip_c, l, l)
    }

    /// Explicit constants; rejects inconsistent configurations.
    pub fn with_constants(margin: f64, clip_c: f64, l1: f64, l2: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::Config(format!("margin must be > 0, got {margin}")));
        }
        if !(clip_c >= margin) {
            return Err(Error::Config(format!(
                "clip_c = {clip_c} must be >= margin = {margin}"
            )));
        }
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(Error::Config("L1 and L2 must be > 0".into()));
        }
        Ok(LossSpec {
            kind: LossKind::ClippedPairHinge,
            margin,
            clip_c,
            l1,
            l2,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::with_constants(self.margin, self.clip_c, self.l1, self.l2).map(|_| ())
    }
}

/// Loss from precomputed parts: clipped distance `d` and pair sign `tau`.
#[inline]
pub(crate) fn loss_from_distance(spec: &LossSpec, d: f64, bias: f64, tau: f64) -> f64 {
    (spec.margin + tau * (d - bias)).clamp(0.0, spec.clip_c)
}

/// Subgradient parts at `(q, bias)` where `q` is the *unclipped* quadratic
/// form: returns `(hinge_active, distance_unclipped)`. The caller turns this
/// into per-coordinate gradients as `τ·u_c` on active coordinates.
#[inline]
pub(crate) fn subgrad_gates(
    spec: &LossSpec,
    q: f64,
    dist_cap: f64,
    bias: f64,
    tau: f64,
) -> (bool, bool) {
    let d = q.min(dist_cap);
    let a = spec.margin + tau * (d - bias);
    (a > 0.0 && a < spec.clip_c, q < dist_cap)
}

/// Pairwise loss of a model on two samples. Features are the flattened
/// masked vectors of each sample; the pair sign comes from the labels.
/// Always lands in `[0, C]` and is symmetric in its two sample arguments.
pub fn pair_loss(
    spec: &LossSpec,
    model: &DiagonalMetricModel,
    z_i: &MultimodalSample,
    z_j: &MultimodalSample,
) -> Result<f64> {
    let x_i = z_i.flatten_masked(model.mask())?;
    let x_j = z_j.flatten_masked(model.mask())?;
    let d = mahalanobis_distance(model, &x_i, &x_j)?;
    let tau = pair_label(z_i.label(), z_j.label());
    Ok(loss_from_distance(spec, d, model.bias(), tau))
}

/// Analytic subgradient of [`pair_loss`] with respect to `(λ, b)` at the
/// model's current parameters. Returns the eigenvalue gradient (full length,
/// zero outside the mask) and the bias gradient.
pub fn pair_loss_subgradient(
    spec: &LossSpec,
    model: &DiagonalMetricModel,
    z_i: &MultimodalSample,
    z_j: &MultimodalSample,
) -> Result<(Vec<f64>, f64)> {
    let x_i = z_i.flatten_masked(model.mask())?;
    let x_j = z_j.flatten_masked(model.mask())?;
    if x_i.len() != model.lambdas().len() || x_j.len() != model.lambdas().len() {
        return Err(Error::Shape(format!(
            "flattened samples of length {} and {} for a {}-dimensional metric",
            x_i.len(),
            x_j.len(),
            model.lambdas().len()
        )));
    }
    let tau = pair_label(z_i.label(), z_j.label());
    let mut q = 0.0;
    for ((&l, &a), &b) in model.lambdas().iter().zip(x_i.iter()).zip(x_j.iter()) {
        let d = a - b;
        q += l * d * d;
    }
    let (hinge_active, unclipped) =
        subgrad_gates(spec, q, model.caps().dist_cap, model.bias(), tau);
    let mut g_lambda = alloc::vec![0.0; model.lambdas().len()];
    let mut g_bias = 0.0;
    if hinge_active {
        g_bias = -tau;
        if unclipped {
            for (g, (&a, &b)) in g_lambda.iter_mut().zip(x_i.iter().zip(x_j.iter())) {
                let d = a - b;
                *g = tau * d * d;
            }
        }
    }
    Ok((g_lambda, g_bias))
}

fn loss_on_flat(
    spec: &LossSpec,
    lambdas: &[f64],
    bias: f64,
    dist_cap: f64,
    x: &[f64],
    y: &[f64],
    tau: f64,
) -> f64 {
    let mut q = 0.0;
    for ((&l, &a), &b) in lambdas.iter().zip(x.iter()).zip(y.iter()) {
        let d = a - b;
        q += l * d * d;
    }
    loss_from_distance(spec, q.min(dist_cap), bias, tau)
}

/// Numerically certify the declared Lipschitz constants by sampling random
/// feasible models and random feature pairs inside the `B`-box, and taking
/// the maximum observed difference quotient per argument slot.
///
/// Returns `(l1_hat, l2_hat)`. Fails with a certification error when an
/// observed quotient exceeds the declared constant, which signals a
/// misconfigured spec rather than bad luck: the declared values bound the
/// gradient everywhere on the domain.
pub fn lipschitz_certify(
    spec: &LossSpec,
    caps: &MetricCaps,
    total_dim: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < 1000 {
        return Err(Error::Config(format!(
            "need at least 1000 certification trials, got {trials}"
        )));
    }
    // eigen_cap == 0 (a constant loss) is legal here even though models
    // themselves require D > 0.
    if caps.eigen_cap < 0.0 || !(caps.dist_cap > 0.0) || !(caps.feature_cap > 0.0) {
        return Err(Error::Config(
            "certification needs eigen_cap >= 0 and dist_cap, feature_cap > 0".into(),
        ));
    }
    if total_dim == 0 {
        return Err(Error::Config("total_dim must be >= 1".into()));
    }
    let mut rng = substream(seed, 0);
    let half = caps.feature_cap / 2.0;
    let mut l1_hat: f64 = 0.0;
    let mut l2_hat: f64 = 0.0;

    let draw_point = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
        (0..total_dim)
            .map(|_| rng.random_range(-half..half))
            .collect()
    };

    for trial in 0..trials {
        let lambdas: Vec<f64> = if caps.eigen_cap == 0.0 {
            alloc::vec![0.0; total_dim]
        } else {
            (0..total_dim)
                .map(|_| rng.random_range(0.0..caps.eigen_cap))
                .collect()
        };
        let bias = rng.random_range(0.0..caps.dist_cap);
        let tau = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let anchor = draw_point(&mut rng);
        let base = draw_point(&mut rng);

        // alternate far pairs (global quotients) and near pairs (local slope)
        let mut moved = if trial % 2 == 0 {
            draw_point(&mut rng)
        } else {
            let scale = caps.feature_cap * rng.random_range(1e-6..1e-2);
            base.iter()
                .map(|&v| (v + rng.random_range(-scale..scale)).clamp(-half, half))
                .collect()
        };
        let mut gap_sq: f64 = base
            .iter()
            .zip(moved.iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        if sqrt(gap_sq) < 1e-6 {
            // enforce the minimum offset; step the first coordinate inward
            let dir = if base[0] > 0.0 { -1.0 } else { 1.0 };
            moved[0] = (base[0] + dir * 1e-5).clamp(-half, half);
            gap_sq = base
                .iter()
                .zip(moved.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
        }
        let gap = sqrt(gap_sq);
        if gap < 1e-9 {
            continue;
        }

        let f_base = loss_on_flat(spec, &lambdas, bias, caps.dist_cap, &base, &anchor, tau);
        let f_moved = loss_on_flat(spec, &lambdas, bias, caps.dist_cap, &moved, &anchor, tau);
        l1_hat = l1_hat.max((f_base - f_moved).abs() / gap);

        let g_base = loss_on_flat(spec, &lambdas, bias, caps.dist_cap, &anchor, &base, tau);
        let g_moved = loss_on_flat(spec, &lambdas, bias, caps.dist_cap, &anchor, &moved, tau);
        l2_hat = l2_hat.max((g_base - g_moved).abs() / gap);
    }

    if l1_hat > spec.l1 {
        return Err(Error::Certification(format!(
            "observed first-slot quotient {l1_hat} exceeds declared L1 = {}",
            spec.l1
        )));
    }
    if l2_hat > spec.l2 {
        return Err(Error::Certification(format!(
            "observed second-slot quotient {l2_hat} exceeds declared L2 = {}",
            spec.l2
        )));
    }
    Ok((l1_hat, l2_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modality::{ModalitySet, MultimodalSample};
    use crate::ModalityLayout;
    use alloc::vec;

    fn setup() -> (crate::ModalityLayout, DiagonalMetricModel, LossSpec) {
        let layout = ModalityLayout::new(vec![1, 1]).unwrap();
        let caps = MetricCaps::new(2.0, 100.0, 10.0).unwrap();
        let model =
            DiagonalMetricModel::new(vec![1.0, 1.0], 4.0, ModalitySet::full(2), caps, &layout)
                .unwrap();
        let spec = LossSpec::with_constants(1.0, 50.0, 10.0, 10.0).unwrap();
        (layout, model, spec)
    }

    fn sample(a: f64, b: f64, label: i64) -> MultimodalSample {
        MultimodalSample::complete(vec![vec![a], vec![b]], label)
    }

    #[test]
    fn loss_at_the_hinge_knee_equals_margin() {
        let (_, model, spec) = setup();
        // d = 4 = bias, any sign: loss = margin = 1
        let zi = sample(0.0, 0.0, 0);
        let zj = sample(2.0, 0.0, 0); // d = 4
        assert_eq!(pair_loss(&spec, &model, &zi, &zj).unwrap(), 1.0);
        let zj_dis = sample(2.0, 0.0, 1);
        assert_eq!(pair_loss(&spec, &model, &zi, &zj_dis).unwrap(), 1.0);
    }

    #[test]
    fn similar_pair_below_bias_minus_margin_has_zero_loss() {
        let (_, model, spec) = setup();
        // d = 3 = bias - margin, similar: loss = 0
        let zi = sample(0.0, 0.0, 0);
        let zj = sample(sqrt(3.0), 0.0, 0);
        let l = pair_loss(&spec, &model, &zi, &zj).unwrap();
        assert!(l.abs() < 1e-12, "loss = {l}");
    }

    #[test]
    fn clip_activates_far_beyond_bias() {
        let (layout, _, spec) = setup();
        let caps = MetricCaps::new(2.0, 1000.0, 40.0).unwrap();
        let model =
            DiagonalMetricModel::new(vec![1.0, 1.0], 4.0, ModalitySet::full(2), caps, &layout)
                .unwrap();
        // d = bias + C + 5 = 59, similar: raw hinge 1 + 55 = 56 -> clipped to C = 50
        let zi = sample(0.0, 0.0, 0);
        let zj = sample(sqrt(59.0), 0.0, 0);
        assert_eq!(pair_loss(&spec, &model, &zi, &zj).unwrap(), 50.0);
    }

    #[test]
    fn loss_is_symmetric_and_bounded() {
        let (_, model, spec) = setup();
        let mut rng = crate::rng::substream(5, 0);
        use rand::Rng;
        for _ in 0..200 {
            let zi = sample(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0..2),
            );
            let zj = sample(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0..2),
            );
            let a = pair_loss(&spec, &model, &zi, &zj).unwrap();
            let b = pair_loss(&spec, &model, &zj, &zi).unwrap();
            assert_eq!(a, b);
            assert!((0.0..=spec.clip_c).contains(&a));
        }
    }

    #[test]
    fn subgradient_zero_in_flat_regions() {
        let (_, model, spec) = setup();
        // zero-loss region: similar, d well below bias - margin
        let zi = sample(0.0, 0.0, 0);
        let zj = sample(0.1, 0.0, 0);
        let (gl, gb) = pair_loss_subgradient(&spec, &model, &zi, &zj).unwrap();
        assert!(gl.iter().all(|&g| g == 0.0));
        assert_eq!(gb, 0.0);
    }

    #[test]
    fn subgradient_masks_out_unused_modalities() {
        let layout = ModalityLayout::new(vec![1, 1]).unwrap();
        let caps = MetricCaps::new(2.0, 100.0, 10.0).unwrap();
        let model = DiagonalMetricModel::new(
            vec![1.0, 0.0],
            0.5,
            ModalitySet::new(vec![1]).unwrap(),
            caps,
            &layout,
        )
        .unwrap();
        let spec = LossSpec::with_constants(1.0, 50.0, 10.0, 10.0).unwrap();
        let zi = sample(0.0, 9.0, 0);
        let zj = sample(1.0, -9.0, 0);
        let (gl, gb) = pair_loss_subgradient(&spec, &model, &zi, &zj).unwrap();
        // active similar pair: g_lambda = tau * diff^2 on masked coords only
        assert_eq!(gl, vec![1.0, 0.0]);
        assert_eq!(gb, -1.0);
    }

    #[test]
    fn certify_respects_analytic_constants() {
        let caps = MetricCaps::new(1.0, 50.0, 1.0).unwrap();
        let spec = LossSpec::clipped_hinge(1.0, 51.0, &caps, 4).unwrap();
        assert!((spec.l1 - 4.0).abs() < 1e-12); // 2*D*B*sqrt(4) = 4
        let (l1_hat, l2_hat) = lipschitz_certify(&spec, &caps, 4, 4000, 17).unwrap();
        assert!(l1_hat <= 4.0 && l2_hat <= 4.0);
        assert!(l1_hat.is_finite() && l2_hat.is_finite());
        assert!(
            l1_hat > 0.0,
            "sampling should see a nonzero slope somewhere"
        );
    }

    #[test]
    fn certify_zero_metric_sees_zero_quotients() {
        // zero eigenvalue cap makes the loss constant in the features
        let caps = MetricCaps {
            eigen_cap: 0.0,
            dist_cap: 50.0,
            feature_cap: 1.0,
        };
        let spec = LossSpec::with_constants(1.0, 51.0, 1e-9, 1e-9).unwrap();
        let (l1_hat, l2_hat) = lipschitz_certify(&spec, &caps, 3, 2000, 3).unwrap();
        assert_eq!(l1_hat, 0.0);
        assert_eq!(l2_hat, 0.0);
    }

    #[test]
    fn certify_requires_enough_trials() {
        let caps = MetricCaps::new(1.0, 50.0, 1.0).unwrap();
        let spec = LossSpec::clipped_hinge(1.0, 51.0, &caps, 2).unwrap();
        assert!(matches!(
            lipschitz_certify(&spec, &caps, 2, 999, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn certify_rejects_underdeclared_constants() {
        let caps = MetricCaps::new(1.0, 50.0, 4.0).unwrap();
        // true constant is 2*1*4*sqrt(2) ~ 11.3; declare far less
        let spec = LossSpec::with_constants(1.0, 51.0, 0.05, 0.05).unwrap();
        assert!(matches!(
            lipschitz_certify(&spec, &caps, 2, 4000, 9),
            Err(Error::Certification(_))
        ));
    }

    #[test]
    fn spec_constructors_validate() {
        let caps = MetricCaps::new(1.0, 10.0, 1.0).unwrap();
        assert!(LossSpec::clipped_hinge(1.0, 0.5, &caps, 2).is_err()); // C < margin
        assert!(LossSpec::with_constants(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(LossSpec::with_constants(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
