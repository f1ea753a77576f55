//! Property tests for the structural invariants: projection algebra,
//! distance axioms, constraint projection, risk bounds, objective
//! convexity, and subgradient correctness.

use proptest::prelude::*;

use pairmetric_core::{
    compose_projection_check, generate_dataset, jacobi_diagonalize, mahalanobis_distance,
    pair_loss, pair_loss_subgradient, project_modality, project_to_constraints, Dataset,
    DiagonalMetricModel, GroundTruth, LossSpec, MetricCaps, ModalityLayout, ModalitySet,
    MultimodalSample, SymmetricMatrix,
};

// --- strategies -------------------------------------------------------

fn arb_layout() -> impl Strategy<Value = ModalityLayout> {
    prop::collection::vec(1usize..=3, 1..=4).prop_map(|dims| ModalityLayout::new(dims).unwrap())
}

fn arb_sample(layout: &ModalityLayout) -> impl Strategy<Value = MultimodalSample> {
    let dims = layout.dims().to_vec();
    let features = dims
        .iter()
        .map(|&d| prop::collection::vec(-10.0f64..10.0, d))
        .collect::<Vec<_>>();
    let present = prop::collection::vec(any::<bool>(), dims.len());
    (features, present, 0i64..4)
        .prop_map(|(f, p, label)| MultimodalSample::new(f, p, label).unwrap())
}

fn arb_subset(k: usize) -> impl Strategy<Value = ModalitySet> {
    prop::collection::vec(any::<bool>(), k).prop_map(|flags| {
        ModalitySet::new(
            flags
                .iter()
                .enumerate()
                .filter_map(|(i, &keep)| keep.then_some(i + 1))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent(
        (layout, x, m) in arb_layout().prop_flat_map(|l| {
            let k = l.num_modalities();
            (Just(l.clone()), arb_sample(&l), arb_subset(k))
        })
    ) {
        let _ = layout;
        let once = project_modality(&x, &m).unwrap();
        let twice = project_modality(&once, &m).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn nested_projections_compose(
        (layout, x, m, n_flags) in arb_layout().prop_flat_map(|l| {
            let k = l.num_modalities();
            (Just(l.clone()), arb_sample(&l), arb_subset(k), prop::collection::vec(any::<bool>(), k))
        })
    ) {
        let _ = layout;
        // carve N out of M so N is always a subset
        let n = ModalitySet::new(
            m.members()
                .iter()
                .zip(n_flags.iter())
                .filter_map(|(&k, &keep)| keep.then_some(k))
                .collect(),
        ).unwrap();
        prop_assert!(compose_projection_check(&x, &n, &m).unwrap());
    }

    #[test]
    fn absent_modalities_read_zero_everywhere(
        (layout, x) in arb_layout().prop_flat_map(|l| (Just(l.clone()), arb_sample(&l)))
    ) {
        let flat = layout.flatten(&x).unwrap();
        let mut offset = 0;
        for k in 1..=layout.num_modalities() {
            let d = layout.dims()[k - 1];
            if !x.is_present(k) {
                prop_assert!(x.features_of(k).iter().all(|&v| v == 0.0));
                prop_assert!(flat[offset..offset + d].iter().all(|&v| v == 0.0));
            }
            offset += d;
        }
    }

    #[test]
    fn distance_is_symmetric_nonnegative_and_clipped(
        lambdas in prop::collection::vec(0.0f64..2.0, 4),
        xi in prop::collection::vec(-5.0f64..5.0, 4),
        xj in prop::collection::vec(-5.0f64..5.0, 4),
        dist_cap in 0.5f64..30.0,
    ) {
        let layout = ModalityLayout::new(vec![2, 2]).unwrap();
        let caps = MetricCaps::new(2.0, dist_cap, 20.0).unwrap();
        let m = DiagonalMetricModel::new(lambdas, 0.0, ModalitySet::full(2), caps, &layout).unwrap();
        let dij = mahalanobis_distance(&m, &xi, &xj).unwrap();
        let dji = mahalanobis_distance(&m, &xj, &xi).unwrap();
        prop_assert_eq!(dij, dji);
        prop_assert!(dij >= 0.0);
        prop_assert!(dij <= dist_cap);
        prop_assert_eq!(mahalanobis_distance(&m, &xi, &xi).unwrap(), 0.0);
    }

    #[test]
    fn unclipped_distance_is_monotone_in_each_eigenvalue(
        lambdas in prop::collection::vec(0.0f64..1.5, 3),
        xi in prop::collection::vec(-5.0f64..5.0, 3),
        xj in prop::collection::vec(-5.0f64..5.0, 3),
        coord in 0usize..3,
        bump in 0.0f64..0.5,
    ) {
        let layout = ModalityLayout::new(vec![3]).unwrap();
        let caps = MetricCaps::new(2.0, 1e9, 20.0).unwrap();
        let lo = DiagonalMetricModel::new(lambdas.clone(), 0.0, ModalitySet::full(1), caps, &layout).unwrap();
        let mut bumped = lambdas;
        bumped[coord] += bump;
        let hi = DiagonalMetricModel::new(bumped, 0.0, ModalitySet::full(1), caps, &layout).unwrap();
        prop_assert!(
            mahalanobis_distance(&hi, &xi, &xj).unwrap()
                >= mahalanobis_distance(&lo, &xi, &xj).unwrap()
        );
    }

    #[test]
    fn constraint_projection_is_idempotent_and_nonexpansive(
        raw_a in prop::collection::vec(-5.0f64..5.0, 6),
        raw_b in prop::collection::vec(-5.0f64..5.0, 6),
        mask_flags in prop::collection::vec(any::<bool>(), 6),
        cap in 0.1f64..3.0,
    ) {
        let pa = project_to_constraints(&raw_a, cap, &mask_flags);
        let pb = project_to_constraints(&raw_b, cap, &mask_flags);
        prop_assert_eq!(project_to_constraints(&pa, cap, &mask_flags), pa.clone());
        // non-expansive in sup norm on the clamped (masked) coordinates
        let before: f64 = raw_a
            .iter()
            .zip(raw_b.iter())
            .zip(mask_flags.iter())
            .filter(|&(_, &m)| m)
            .map(|((&a, &b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        let after: f64 = pa
            .iter()
            .zip(pb.iter())
            .zip(mask_flags.iter())
            .filter(|&(_, &m)| m)
            .map(|((&a, &b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(after <= before + 1e-15);
    }

    #[test]
    fn pair_loss_stays_in_the_clip_interval(
        lambdas in prop::collection::vec(0.0f64..1.0, 2),
        bias in 0.0f64..8.0,
        a in -4.0f64..4.0,
        b in -4.0f64..4.0,
        ya in 0i64..2,
        yb in 0i64..2,
    ) {
        let layout = ModalityLayout::new(vec![1, 1]).unwrap();
        let caps = MetricCaps::new(1.0, 8.0, 8.0).unwrap();
        let model = DiagonalMetricModel::new(lambdas, bias, ModalitySet::full(2), caps, &layout).unwrap();
        let spec = LossSpec::clipped_hinge(1.0, 9.0, &caps, 2).unwrap();
        let zi = MultimodalSample::complete(vec![vec![a], vec![b]], ya);
        let zj = MultimodalSample::complete(vec![vec![b], vec![a]], yb);
        let l = pair_loss(&spec, &model, &zi, &zj).unwrap();
        prop_assert!((0.0..=spec.clip_c).contains(&l));
    }
}

// --- fixed-seed numeric invariants ------------------------------------

fn demo_dataset(n: usize, seed: u64) -> Dataset {
    let layout = ModalityLayout::new(vec![2, 2]).unwrap();
    let gt =
        GroundTruth::replicated_mixing(&layout, 2, 0.6, 6.0, GroundTruth::axis_centers(2, 2, 1.5))
            .unwrap();
    generate_dataset(&layout, n, &gt, seed).unwrap()
}

/// Caps wide enough that neither the distance clip nor the loss clip can
/// activate on this dataset, making the empirical risk exactly convex.
fn inert_caps_for(ds: &Dataset) -> MetricCaps {
    let b = pairmetric_core::feature_diff_cap_check(ds);
    let d = 1.0;
    let kappa = d * ds.layout.total_dim() as f64 * b * b + 10.0;
    MetricCaps::new(d, kappa, b + 1.0).unwrap()
}

#[test]
fn empirical_risk_is_convex_on_inert_caps() {
    use rand::Rng;
    let ds = demo_dataset(24, 2024);
    let caps = inert_caps_for(&ds);
    let spec = LossSpec::with_constants(1.0, spec_c(&caps), 1.0, 1.0).unwrap();
    let mask = ModalitySet::full(2);
    let dim = ds.layout.total_dim();

    let risk_at = |lambdas: &[f64], bias: f64| -> f64 {
        let m = DiagonalMetricModel::new(lambdas.to_vec(), bias, mask.clone(), caps, &ds.layout)
            .unwrap();
        pairmetric_core::ustat_risk(&spec, &m, &ds).unwrap().value
    };

    let mut rng = pairmetric_core::rng::substream(99, 0);
    for _ in 0..100 {
        let l1: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(0.0..caps.eigen_cap))
            .collect();
        let l2: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(0.0..caps.eigen_cap))
            .collect();
        let b1 = rng.random_range(0.0..caps.dist_cap);
        let b2 = rng.random_range(0.0..caps.dist_cap);
        let r1 = risk_at(&l1, b1);
        let r2 = risk_at(&l2, b2);
        for alpha in [0.25, 0.5, 0.75] {
            let lm: Vec<f64> = l1
                .iter()
                .zip(l2.iter())
                .map(|(&a, &b)| alpha * a + (1.0 - alpha) * b)
                .collect();
            let bm = alpha * b1 + (1.0 - alpha) * b2;
            let rm = risk_at(&lm, bm);
            assert!(
                rm <= alpha * r1 + (1.0 - alpha) * r2 + 1e-10,
                "convexity violated: {rm} > {alpha}*{r1} + {}*{r2}",
                1.0 - alpha
            );
        }
    }
}

fn spec_c(caps: &MetricCaps) -> f64 {
    1.0 + caps.dist_cap
}

#[test]
fn analytic_subgradient_matches_central_differences() {
    use rand::Rng;
    let ds = demo_dataset(16, 7);
    let caps = MetricCaps::new(1.0, 64.0, 16.0).unwrap();
    let spec = LossSpec::clipped_hinge(1.0, 65.0, &caps, 4).unwrap();
    let mask = ModalitySet::full(2);
    let dim = ds.layout.total_dim();
    let kink_margin = 1e-3;
    let h = 1e-6;

    let mut rng = pairmetric_core::rng::substream(555, 0);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 120 && attempts < 20_000 {
        attempts += 1;
        let lambdas: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(0.05..caps.eigen_cap - 0.05))
            .collect();
        let bias = rng.random_range(0.05..caps.dist_cap / 2.0);
        let i = rng.random_range(0..ds.n());
        let j = rng.random_range(0..ds.n());
        if i == j {
            continue;
        }
        let model = DiagonalMetricModel::new(lambdas.clone(), bias, mask.clone(), caps, &ds.layout)
            .unwrap();
        let zi = &ds.samples[i];
        let zj = &ds.samples[j];

        // skip points too close to a hinge, clip, or distance-cap kink
        let xi = zi.flatten_masked(&mask).unwrap();
        let xj = zj.flatten_masked(&mask).unwrap();
        let q: f64 = lambdas
            .iter()
            .zip(xi.iter().zip(xj.iter()))
            .map(|(&l, (&a, &b))| l * (a - b) * (a - b))
            .sum();
        let tau = pairmetric_core::pair_label(zi.label(), zj.label());
        let arg = spec.margin + tau * (q.min(caps.dist_cap) - bias);
        if arg.abs() < kink_margin
            || (arg - spec.clip_c).abs() < kink_margin
            || (q - caps.dist_cap).abs() < kink_margin
        {
            continue;
        }
        checked += 1;

        let (g_lambda, g_bias) = pair_loss_subgradient(&spec, &model, zi, zj).unwrap();
        let loss_at = |l: &[f64], b: f64| -> f64 {
            let m =
                DiagonalMetricModel::new(l.to_vec(), b, mask.clone(), caps, &ds.layout).unwrap();
            pair_loss(&spec, &m, zi, zj).unwrap()
        };
        for c in 0..dim {
            let mut plus = lambdas.clone();
            let mut minus = lambdas.clone();
            plus[c] += h;
            minus[c] -= h;
            let fd = (loss_at(&plus, bias) - loss_at(&minus, bias)) / (2.0 * h);
            let rel = (fd - g_lambda[c]).abs() / g_lambda[c].abs().max(1.0);
            assert!(
                rel < 1e-4,
                "lambda[{c}]: fd {fd} vs analytic {}",
                g_lambda[c]
            );
        }
        let fd_b = (loss_at(&lambdas, bias + h) - loss_at(&lambdas, bias - h)) / (2.0 * h);
        let rel_b = (fd_b - g_bias).abs() / g_bias.abs().max(1.0);
        assert!(rel_b < 1e-4, "bias: fd {fd_b} vs analytic {g_bias}");
    }
    assert!(checked >= 120, "only {checked} usable non-kink points");
}

#[test]
fn jacobi_round_trip_up_to_dim_32() {
    use rand::Rng;
    let mut rng = pairmetric_core::rng::substream(31415, 0);
    for &n in &[2usize, 5, 16, 32] {
        let a = SymmetricMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        let (q, lambda) = jacobi_diagonalize(&a, 1e-11).unwrap();
        // Frobenius of QQᵀ - I
        let mut ortho = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[i][k] * q[j][k]).sum();
                let t = if i == j { 1.0 } else { 0.0 };
                ortho += (dot - t) * (dot - t);
            }
        }
        assert!(ortho.sqrt() < 1e-10, "orthogonality {ortho:e} at n={n}");
        // A = Qᵀ Λ Q reconstructs within 1e-9
        let mut err = 0.0;
        for i in 0..n {
            for j in 0..n {
                let back: f64 = (0..n).map(|k| q[k][i] * lambda[k] * q[k][j]).sum();
                err += (back - a.entries()[i][j]) * (back - a.entries()[i][j]);
            }
        }
        assert!(err.sqrt() < 1e-9, "reconstruction {err:e} at n={n}");
    }
}

#[test]
fn generator_is_deterministic_across_calls() {
    let a = demo_dataset(64, 42);
    let b = demo_dataset(64, 42);
    assert_eq!(a, b);
}

#[test]
fn risk_values_respect_the_loss_bound() {
    use rand::Rng;
    let ds = demo_dataset(20, 3);
    let caps = MetricCaps::new(1.0, 64.0, 16.0).unwrap();
    let spec = LossSpec::clipped_hinge(1.0, 65.0, &caps, 4).unwrap();
    let mut rng = pairmetric_core::rng::substream(8, 0);
    for _ in 0..50 {
        let lambdas: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let bias = rng.random_range(0.0..64.0);
        let m = DiagonalMetricModel::new(lambdas, bias, ModalitySet::full(2), caps, &ds.layout)
            .unwrap();
        let u = pairmetric_core::ustat_risk(&spec, &m, &ds).unwrap();
        let b = pairmetric_core::block_risk(&spec, &m, &ds, None).unwrap();
        assert!((0.0..=spec.clip_c).contains(&u.value));
        assert!((0.0..=spec.clip_c).contains(&b.value));
        assert_eq!(u.n_pairs, 20 * 19);
        assert_eq!(b.n_pairs, 10);
    }
}
