//! Empirical risk over pairs: the full U-statistic (all ordered pairs) and
//! the block-decoupled form (⌊n/2⌋ disjoint pairs), plus a Monte-Carlo
//! check that the expected supremum of the first never exceeds that of the
//! second over a hypothesis grid.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::loss::{loss_from_distance, subgrad_gates, LossSpec};
use crate::math::mean_and_stderr;
use crate::metric::DiagonalMetricModel;
use crate::modality::{pair_label, ModalityLayout, ModalitySet};
use crate::rng::derive_seed;

/// Which pair population an empirical risk averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RiskMode {
    /// All `n(n-1)` ordered pairs.
    UStat,
    /// The `⌊n/2⌋` disjoint pairs `(i, ⌊n/2⌋+i)`.
    Block,
}

/// An evaluated empirical risk.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskValue {
    pub value: f64,
    pub n_pairs: usize,
    pub mode: RiskMode,
}

/// Precomputed pair data for one (dataset, mask) combination: per-pair
/// coordinate-wise squared differences and pair signs. Distances are then
/// dot products against the eigenvalue vector, so risk and subgradient
/// evaluations cost one pass over this table.
pub(crate) struct PairCache {
    dim: usize,
    diffsq: Vec<f64>,
    taus: Vec<f64>,
    /// Nominal pair count reported in `RiskValue` (ordered count for the
    /// U-statistic, block count for blocks).
    pub nominal_pairs: usize,
}

impl PairCache {
    /// All unordered pairs `i < j`; by symmetry of the loss their average
    /// equals the ordered-pair average.
    pub fn ustat(dataset: &Dataset, mask: &ModalitySet) -> Result<Self> {
        let n = dataset.n();
        if n < 2 {
            return Err(Error::Size(format!("pairwise risk needs n >= 2, got {n}")));
        }
        let flats = flatten_all(&dataset.layout, dataset, mask)?;
        let dim = dataset.layout.total_dim();
        let mut cache = PairCache {
            dim,
            diffsq: Vec::with_capacity(n * (n - 1) / 2 * dim),
            taus: Vec::with_capacity(n * (n - 1) / 2),
            nominal_pairs: n * (n - 1),
        };
        for i in 0..n {
            for j in (i + 1)..n {
                cache.push_pair(
                    &flats[i],
                    &flats[j],
                    dataset.samples[i].label(),
                    dataset.samples[j].label(),
                );
            }
        }
        Ok(cache)
    }

    /// Disjoint pairs `(π(i), π(⌊n/2⌋+i))` under an optional permutation
    /// (identity by default). For odd `n` the last permuted sample is unused.
    pub fn block(
        dataset: &Dataset,
        mask: &ModalitySet,
        permutation: Option<&[usize]>,
    ) -> Result<Self> {
        let n = dataset.n();
        if n < 2 {
            return Err(Error::Size(format!("pairwise risk needs n >= 2, got {n}")));
        }
        let identity: Vec<usize>;
        let perm: &[usize] = match permutation {
            Some(p) => {
                validate_permutation(p, n)?;
                p
            }
            None => {
                identity = (0..n).collect();
                &identity
            }
        };
        let flats = flatten_all(&dataset.layout, dataset, mask)?;
        let dim = dataset.layout.total_dim();
        let blocks = n / 2;
        let mut cache = PairCache {
            dim,
            diffsq: Vec::with_capacity(blocks * dim),
            taus: Vec::with_capacity(blocks),
            nominal_pairs: blocks,
        };
        for i in 0..blocks {
            let a = perm[i];
            let b = perm[blocks + i];
            cache.push_pair(
                &flats[a],
                &flats[b],
                dataset.samples[a].label(),
                dataset.samples[b].label(),
            );
        }
        Ok(cache)
    }

    pub fn for_mode(dataset: &Dataset, mask: &ModalitySet, mode: RiskMode) -> Result<Self> {
        match mode {
            RiskMode::UStat => Self::ustat(dataset, mask),
            RiskMode::Block => Self::block(dataset, mask, None),
        }
    }

    fn push_pair(&mut self, x: &[f64], y: &[f64], label_x: i64, label_y: i64) {
        for (a, b) in x.iter().zip(y.iter()) {
            let d = a - b;
            self.diffsq.push(d * d);
        }
        self.taus.push(pair_label(label_x, label_y));
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mean loss over the cached pairs at parameters `(lambdas, bias)`.
    pub fn risk(&self, spec: &LossSpec, lambdas: &[f64], bias: f64, dist_cap: f64) -> f64 {
        let mut acc = 0.0;
        for (p, &tau) in self.taus.iter().enumerate() {
            let u = &self.diffsq[p * self.dim..(p + 1) * self.dim];
            let q: f64 = lambdas.iter().zip(u.iter()).map(|(&l, &v)| l * v).sum();
            acc += loss_from_distance(spec, q.min(dist_cap), bias, tau);
        }
        acc / self.taus.len() as f64
    }

    /// Per-pair loss vector (used for hypothesis tables).
    pub fn loss_vector(
        &self,
        spec: &LossSpec,
        lambdas: &[f64],
        bias: f64,
        dist_cap: f64,
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.taus.len());
        for (p, &tau) in self.taus.iter().enumerate() {
            let u = &self.diffsq[p * self.dim..(p + 1) * self.dim];
            let q: f64 = lambdas.iter().zip(u.iter()).map(|(&l, &v)| l * v).sum();
            out.push(loss_from_distance(spec, q.min(dist_cap), bias, tau));
        }
        out
    }

    /// Weighted objective `Σ_p w_p · loss_p` and its subgradient in
    /// `(lambdas, bias)`. `None` weights mean the uniform average, summed
    /// and divided exactly like [`PairCache::risk`] so the two evaluation
    /// routes agree bitwise.
    pub fn weighted_value_and_subgrad(
        &self,
        spec: &LossSpec,
        lambdas: &[f64],
        bias: f64,
        dist_cap: f64,
        weights: Option<&[f64]>,
        g_lambda: &mut [f64],
    ) -> (f64, f64) {
        g_lambda.iter_mut().for_each(|g| *g = 0.0);
        let mut g_bias = 0.0;
        let mut value = 0.0;
        for (p, &tau) in self.taus.iter().enumerate() {
            let w = weights.map_or(1.0, |ws| ws[p]);
            let u = &self.diffsq[p * self.dim..(p + 1) * self.dim];
            let q: f64 = lambdas.iter().zip(u.iter()).map(|(&l, &v)| l * v).sum();
            value += w * loss_from_distance(spec, q.min(dist_cap), bias, tau);
            let (active, unclipped) = subgrad_gates(spec, q, dist_cap, bias, tau);
            if active {
                g_bias -= w * tau;
                if unclipped {
                    let wt = w * tau;
                    for (g, &v) in g_lambda.iter_mut().zip(u.iter()) {
                        *g += wt * v;
                    }
                }
            }
        }
        if weights.is_none() {
            let count = self.taus.len() as f64;
            value /= count;
            g_bias /= count;
            g_lambda.iter_mut().for_each(|g| *g /= count);
        }
        (value, g_bias)
    }
}

fn flatten_all(
    layout: &ModalityLayout,
    dataset: &Dataset,
    mask: &ModalitySet,
) -> Result<Vec<Vec<f64>>> {
    dataset
        .samples
        .iter()
        .map(|s| layout.flatten_masked(s, mask))
        .collect()
}

fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Permutation(format!(
            "permutation has length {}, dataset has {n} samples",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Permutation(format!(
                "permutation is not a bijection on 0..{n}"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Exact average of the pair loss over all `n(n-1)` ordered pairs.
pub fn ustat_risk(
    spec: &LossSpec,
    model: &DiagonalMetricModel,
    dataset: &Dataset,
) -> Result<RiskValue> {
    let cache = PairCache::ustat(dataset, model.mask())?;
    Ok(RiskValue {
        value: cache.risk(spec, model.lambdas(), model.bias(), model.caps().dist_cap),
        n_pairs: cache.nominal_pairs,
        mode: RiskMode::UStat,
    })
}

/// Average of the pair loss over the `⌊n/2⌋` disjoint block pairs
/// `(π(i), π(⌊n/2⌋+i))`; identity permutation when `permutation` is `None`.
pub fn block_risk(
    spec: &LossSpec,
    model: &DiagonalMetricModel,
    dataset: &Dataset,
    permutation: Option<&[usize]>,
) -> Result<RiskValue> {
    let cache = PairCache::block(dataset, model.mask(), permutation)?;
    Ok(RiskValue {
        value: cache.risk(spec, model.lambdas(), model.bias(), model.caps().dist_cap),
        n_pairs: cache.nominal_pairs,
        mode: RiskMode::Block,
    })
}

/// Empirical risk of the true composite rule: pair losses of the latent
/// threshold decision, evaluated on the generator's stored latent vectors
/// (unclipped latent distances; the loss clamp still applies).
///
/// Falls back to the flattened features when latents are absent but the
/// ground truth is a noiseless identity mixing, where both coincide exactly.
pub fn reference_risk(dataset: &Dataset, spec: &LossSpec, mode: RiskMode) -> Result<RiskValue> {
    let gt = dataset
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::Config("dataset carries no ground truth".into()))?;
    let n = dataset.n();
    if n < 2 {
        return Err(Error::Size(format!("pairwise risk needs n >= 2, got {n}")));
    }

    let owned: Vec<Vec<f64>>;
    let latents: &[Vec<f64>] = match &gt.latents {
        Some(z) => {
            if z.len() != n {
                return Err(Error::Shape(format!(
                    "{} stored latents for {n} samples",
                    z.len()
                )));
            }
            z
        }
        None if is_noiseless_identity(gt, &dataset.layout) => {
            owned = dataset
                .samples
                .iter()
                .map(|s| dataset.layout.flatten(s))
                .collect::<Result<_>>()?;
            &owned
        }
        None => {
            return Err(Error::Config(
                "ground truth stores no latents and is not a noiseless identity mixing".into(),
            ))
        }
    };

    let loss_of = |i: usize, j: usize| -> f64 {
        let d = gt.latent_distance(&latents[i], &latents[j]);
        let tau = pair_label(dataset.samples[i].label(), dataset.samples[j].label());
        loss_from_distance(spec, d, gt.bayes_threshold, tau)
    };

    match mode {
        RiskMode::UStat => {
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    acc += loss_of(i, j);
                }
            }
            let unordered = n * (n - 1) / 2;
            Ok(RiskValue {
                value: acc / unordered as f64,
                n_pairs: n * (n - 1),
                mode,
            })
        }
        RiskMode::Block => {
            let blocks = n / 2;
            let mut acc = 0.0;
            for i in 0..blocks {
                acc += loss_of(i, blocks + i);
            }
            Ok(RiskValue {
                value: acc / blocks as f64,
                n_pairs: blocks,
                mode,
            })
        }
    }
}

fn is_noiseless_identity(gt: &GroundTruth, layout: &ModalityLayout) -> bool {
    if gt.noise_sigma != 0.0 || gt.latent_dim != layout.total_dim() {
        return false;
    }
    for (k, w) in gt.mixing_matrices.iter().enumerate() {
        let offset = layout.offset(k + 1);
        for (r, row) in w.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let expected = if c == offset + r { 1.0 } else { 0.0 };
                if v != expected {
                    return false;
                }
            }
        }
    }
    true
}

/// Result of the decoupling probe: Monte-Carlo means of the grid suprema of
/// the two risks over fresh dataset draws, and the pooled standard error of
/// the two means.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecouplingGap {
    pub mean_sup_ustat: f64,
    pub mean_sup_block: f64,
    pub stderr: f64,
}

/// Estimate `E[sup_grid ustat]` and `E[sup_grid block]` over `draws` fresh
/// datasets from the generator. The decoupling inequality says the first
/// never exceeds the second; callers assert
/// `mean_sup_ustat <= mean_sup_block + 2·stderr`.
pub fn decoupling_gap(
    spec: &LossSpec,
    grid: &[DiagonalMetricModel],
    layout: &ModalityLayout,
    gt: &GroundTruth,
    n: usize,
    draws: usize,
    seed: u64,
) -> Result<DecouplingGap> {
    if grid.is_empty() {
        return Err(Error::Config("hypothesis grid must be nonempty".into()));
    }
    if draws < 30 {
        return Err(Error::Config(format!(
            "need at least 30 dataset draws, got {draws}"
        )));
    }
    let mut sup_u = Vec::with_capacity(draws);
    let mut sup_b = Vec::with_capacity(draws);
    for r in 0..draws {
        let ds = crate::dataset::generate_dataset(layout, n, gt, derive_seed(seed, r as u64))?;
        // caches shared across grid models with the same mask
        let mut caches: Vec<(ModalitySet, PairCache, PairCache)> = Vec::new();
        let mut best_u = f64::NEG_INFINITY;
        let mut best_b = f64::NEG_INFINITY;
        for model in grid {
            let idx = match caches.iter().position(|(m, _, _)| m == model.mask()) {
                Some(i) => i,
                None => {
                    caches.push((
                        model.mask().clone(),
                        PairCache::ustat(&ds, model.mask())?,
                        PairCache::block(&ds, model.mask(), None)?,
                    ));
                    caches.len() - 1
                }
            };
            let (_, u_cache, b_cache) = &caches[idx];
            let u = u_cache.risk(spec, model.lambdas(), model.bias(), model.caps().dist_cap);
            let b = b_cache.risk(spec, model.lambdas(), model.bias(), model.caps().dist_cap);
            best_u = best_u.max(u);
            best_b = best_b.max(b);
        }
        sup_u.push(best_u);
        sup_b.push(best_b);
    }
    let (mean_u, se_u) = mean_and_stderr(&sup_u);
    let (mean_b, se_b) = mean_and_stderr(&sup_b);
    Ok(DecouplingGap {
        mean_sup_ustat: mean_u,
        mean_sup_block: mean_b,
        stderr: crate::math::sqrt(se_u * se_u + se_b * se_b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_dataset;
    use crate::metric::MetricCaps;
    use crate::modality::MultimodalSample;
    use crate::ModalityLayout;

    fn wide_caps() -> MetricCaps {
        MetricCaps::new(2.0, 1e6, 100.0).unwrap()
    }

    fn dataset_2d(points: &[(f64, f64, i64)]) -> Dataset {
        let layout = ModalityLayout::new(vec![1, 1]).unwrap();
        Dataset {
            layout,
            seed: 0,
            ground_truth: None,
            samples: points
                .iter()
                .map(|&(a, b, y)| MultimodalSample::complete(vec![vec![a], vec![b]], y))
                .collect(),
        }
    }

    fn model(lambdas: Vec<f64>, bias: f64, ds: &Dataset) -> DiagonalMetricModel {
        DiagonalMetricModel::new(
            lambdas,
            bias,
            ModalitySet::full(ds.layout.num_modalities()),
            wide_caps(),
            &ds.layout,
        )
        .unwrap()
    }

    fn spec_plain() -> LossSpec {
        LossSpec::with_constants(1.0, 1e5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn ustat_three_point_arithmetic() {
        // all-similar points placed so pair distances are 0.2, 0.4, 0.6;
        // with margin 1 and bias 1 the loss equals the distance
        let ds = dataset_2d(&[
            (0.0, 0.0, 0),
            (crate::math::sqrt(0.2), 0.0, 0),
            (0.0, crate::math::sqrt(0.4), 0),
        ]);
        let m = model(vec![1.0, 1.0], 1.0, &ds);
        let r = ustat_risk(&spec_plain(), &m, &ds).unwrap();
        assert_eq!(r.n_pairs, 6);
        assert!((r.value - 0.4).abs() < 1e-12, "value = {}", r.value);
        // block with n = 3 uses the single pair (0, 1); sample 2 unused
        let b = block_risk(&spec_plain(), &m, &ds, None).unwrap();
        assert_eq!(b.n_pairs, 1);
        assert!((b.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn constant_loss_gives_constant_risks() {
        let ds = dataset_2d(&[(0.0, 0.0, 0), (1.0, 2.0, 1), (3.0, -1.0, 0), (0.5, 0.5, 1)]);
        // zero metric, zero bias: loss = margin for every pair and sign
        let m = model(vec![0.0, 0.0], 0.0, &ds);
        let spec = LossSpec::with_constants(0.7, 10.0, 1.0, 1.0).unwrap();
        assert!((ustat_risk(&spec, &m, &ds).unwrap().value - 0.7).abs() < 1e-15);
        for perm in [vec![0usize, 1, 2, 3], vec![3, 2, 1, 0], vec![1, 3, 0, 2]] {
            let r = block_risk(&spec, &m, &ds, Some(&perm)).unwrap();
            assert!((r.value - 0.7).abs() < 1e-15);
            assert_eq!(r.n_pairs, 2);
        }
    }

    #[test]
    fn block_pairs_follow_the_permutation() {
        let ds = dataset_2d(&[(0.0, 0.0, 0), (1.0, 0.0, 0), (2.0, 0.0, 0), (3.0, 0.0, 0)]);
        let m = model(vec![1.0, 0.0], 1.0, &ds);
        // identity: pairs (0,2) and (1,3): distances 4 and 4, loss = d with
        // margin 1, bias 1 -> mean 4
        let r = block_risk(&spec_plain(), &m, &ds, None).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        // permutation [0,1,3,2]: pairs (0,3) and (1,2): distances 9 and 1 -> 5
        let r = block_risk(&spec_plain(), &m, &ds, Some(&[0, 1, 3, 2])).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn odd_n_drops_the_last_permuted_sample() {
        let ds = dataset_2d(&[
            (0.0, 0.0, 0),
            (1.0, 0.0, 0),
            (2.0, 0.0, 0),
            (3.0, 0.0, 0),
            (100.0, 0.0, 0),
        ]);
        let m = model(vec![1.0, 0.0], 1.0, &ds);
        // blocks = 2, pairs (0,2), (1,3); sample 4 (the huge one) unused
        let r = block_risk(&spec_plain(), &m, &ds, None).unwrap();
        assert_eq!(r.n_pairs, 2);
        assert!((r.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_permutations_are_rejected() {
        let ds = dataset_2d(&[(0.0, 0.0, 0), (1.0, 0.0, 0)]);
        let m = model(vec![1.0, 0.0], 1.0, &ds);
        for bad in [vec![0usize], vec![0, 0], vec![0, 2]] {
            assert!(matches!(
                block_risk(&spec_plain(), &m, &ds, Some(&bad)),
                Err(Error::Permutation(_))
            ));
        }
    }

    #[test]
    fn ustat_matches_independent_double_loop() {
        let layout = ModalityLayout::new(vec![2, 1]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.4, 2.0, GroundTruth::axis_centers(2, 3, 1.5))
                .unwrap();
        let ds = generate_dataset(&layout, 16, &gt, 77).unwrap();
        let caps = MetricCaps::new(1.5, 50.0, 30.0).unwrap();
        let mask = ModalitySet::new(vec![1]).unwrap();
        let m = DiagonalMetricModel::new(vec![0.7, 1.2, 0.0], 3.0, mask.clone(), caps, &layout)
            .unwrap();
        let spec = LossSpec::with_constants(1.0, 51.0, 1.0, 1.0).unwrap();
        let fast = ustat_risk(&spec, &m, &ds).unwrap();

        // second, deliberately naive implementation over ordered pairs
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..ds.n() {
            for j in 0..ds.n() {
                if i == j {
                    continue;
                }
                acc += crate::loss::pair_loss(&spec, &m, &ds.samples[i], &ds.samples[j]).unwrap();
                count += 1;
            }
        }
        assert_eq!(count, fast.n_pairs);
        let naive = acc / count as f64;
        assert!((naive - fast.value).abs() < 1e-12);
    }

    #[test]
    fn ustat_is_invariant_under_sample_reordering() {
        let layout = ModalityLayout::new(vec![1, 1]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.2, 2.0, GroundTruth::axis_centers(2, 2, 1.0))
                .unwrap();
        let ds = generate_dataset(&layout, 12, &gt, 5).unwrap();
        let m = model(vec![0.5, 0.5], 1.0, &ds);
        let spec = spec_plain();
        let base = ustat_risk(&spec, &m, &ds).unwrap().value;
        let mut shuffled = ds.clone();
        shuffled.samples.reverse();
        shuffled.samples.swap(2, 7);
        let after = ustat_risk(&spec, &m, &shuffled).unwrap().value;
        assert!((base - after).abs() < 1e-12);
    }

    #[test]
    fn block_and_ustat_agree_in_expectation() {
        // both are unbiased for the population pairwise risk over i.i.d. draws
        let layout = ModalityLayout::new(vec![1]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.0, 2.0, GroundTruth::axis_centers(2, 1, 1.0))
                .unwrap();
        let caps = MetricCaps::new(1.0, 100.0, 20.0).unwrap();
        let m =
            DiagonalMetricModel::new(vec![0.8], 1.5, ModalitySet::full(1), caps, &layout).unwrap();
        let spec = LossSpec::with_constants(1.0, 101.0, 1.0, 1.0).unwrap();
        let draws = 600;
        let mut diffs = Vec::with_capacity(draws);
        for r in 0..draws {
            let ds = generate_dataset(&layout, 16, &gt, derive_seed(404, r as u64)).unwrap();
            let u = ustat_risk(&spec, &m, &ds).unwrap().value;
            let b = block_risk(&spec, &m, &ds, None).unwrap().value;
            diffs.push(u - b);
        }
        let (mean, se) = crate::math::mean_and_stderr(&diffs);
        assert!(
            mean.abs() <= 3.0 * se,
            "|E[ustat - block]| = {mean} should be within 3 stderr = {}",
            3.0 * se
        );
    }

    #[test]
    fn reference_risk_uses_stored_latents() {
        let layout = ModalityLayout::new(vec![2]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.0, 2.0, GroundTruth::axis_centers(2, 2, 1.5))
                .unwrap();
        let ds = generate_dataset(&layout, 10, &gt, 3).unwrap();
        let spec = spec_plain();
        let with_latents = reference_risk(&ds, &spec, RiskMode::UStat).unwrap();

        // stripping latents falls back to the identity-mixing route
        let mut stripped = ds.clone();
        stripped.ground_truth.as_mut().unwrap().latents = None;
        let via_features = reference_risk(&stripped, &spec, RiskMode::UStat).unwrap();
        assert!((with_latents.value - via_features.value).abs() < 1e-12);

        // no ground truth at all is a configuration error
        let mut none = ds.clone();
        none.ground_truth = None;
        assert!(matches!(
            reference_risk(&none, &spec, RiskMode::Block),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn singleton_grid_decoupling_gap_is_zero_for_constant_loss() {
        let layout = ModalityLayout::new(vec![1]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.0, 2.0, GroundTruth::axis_centers(2, 1, 1.0))
                .unwrap();
        let caps = MetricCaps::new(1.0, 100.0, 20.0).unwrap();
        // zero metric, zero bias: loss identically margin
        let constant =
            DiagonalMetricModel::new(vec![0.0], 0.0, ModalitySet::full(1), caps, &layout).unwrap();
        let spec = LossSpec::with_constants(1.0, 101.0, 1.0, 1.0).unwrap();
        let gap = decoupling_gap(&spec, &[constant], &layout, &gt, 10, 30, 8).unwrap();
        assert_eq!(gap.mean_sup_ustat, 1.0);
        assert_eq!(gap.mean_sup_block, 1.0);
        assert_eq!(gap.stderr, 0.0);
    }

    #[test]
    fn decoupling_gap_validates_inputs() {
        let layout = ModalityLayout::new(vec![1]).unwrap();
        let gt =
            GroundTruth::identity_mixing(&layout, 0.0, 2.0, GroundTruth::axis_centers(2, 1, 1.0))
                .unwrap();
        let spec = spec_plain();
        assert!(matches!(
            decoupling_gap(&spec, &[], &layout, &gt, 10, 30, 8),
            Err(Error::Config(_))
        ));
    }
}
