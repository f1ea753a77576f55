//! Multimodal data model: layouts, modality subsets, samples, and the
//! masking projection.
//!
//! A sample carries one feature vector per modality plus a presence flag;
//! an absent modality is canonically stored as an all-zero vector with
//! `present = false`. Zero is the natural sentinel here because a zeroed
//! coordinate contributes nothing to a diagonal quadratic form, which turns
//! the nesting of masked hypothesis classes into an executable identity.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Shape of the modality factorization: how many modalities and how many
/// feature dimensions each one carries.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModalityLayout {
    num_modalities: usize,
    dims: Vec<usize>,
    total_dim: usize,
}

impl ModalityLayout {
    /// Build a layout from per-modality dimensions.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("layout needs at least one modality".into()));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Layout(format!(
                "modality {} has zero dimension",
                k + 1
            )));
        }
        let total_dim = dims.iter().sum();
        Ok(ModalityLayout {
            num_modalities: dims.len(),
            dims,
            total_dim,
        })
    }

    /// Number of modalities `K`.
    pub fn num_modalities(&self) -> usize {
        self.num_modalities
    }

    /// Per-modality feature dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total flattened dimension (sum of per-modality dimensions).
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Starting offset of modality `k` (1-based) in the flattened vector.
    pub fn offset(&self, k: usize) -> usize {
        self.dims[..k - 1].iter().sum()
    }

    /// Re-check the internal invariants; useful after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() != self.num_modalities {
            return Err(Error::Layout(format!(
                "num_modalities {} does not match dims length {}",
                self.num_modalities,
                self.dims.len()
            )));
        }
        if self.num_modalities == 0 || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::Layout("all modality dimensions must be >= 1".into()));
        }
        if self.total_dim != self.dims.iter().sum::<usize>() {
            return Err(Error::Layout(format!(
                "total_dim {} does not equal the sum of dims",
                self.total_dim
            )));
        }
        Ok(())
    }

    /// Check that a sample structurally conforms to this layout.
    pub fn check_sample(&self, sample: &MultimodalSample) -> Result<()> {
        if sample.features.len() != self.num_modalities
            || sample.present.len() != self.num_modalities
        {
            return Err(Error::Layout(format!(
                "sample has {} modalities, layout expects {}",
                sample.features.len(),
                self.num_modalities
            )));
        }
        for (k, (f, &d)) in sample.features.iter().zip(self.dims.iter()).enumerate() {
            if f.len() != d {
                return Err(Error::Layout(format!(
                    "modality {} has {} features, layout expects {}",
                    k + 1,
                    f.len(),
                    d
                )));
            }
        }
        Ok(())
    }

    /// Flatten a sample into a single vector of length `total_dim`.
    /// Absent modalities contribute zeros.
    pub fn flatten(&self, sample: &MultimodalSample) -> Result<Vec<f64>> {
        self.check_sample(sample)?;
        let mut out = Vec::with_capacity(self.total_dim);
        for (f, &p) in sample.features.iter().zip(sample.present.iter()) {
            if p {
                out.extend_from_slice(f);
            } else {
                out.extend(core::iter::repeat_n(0.0, f.len()));
            }
        }
        Ok(out)
    }

    /// Flatten after masking with `mask`: coordinates of modalities outside
    /// the mask (or absent in the sample) are zero.
    pub fn flatten_masked(
        &self,
        sample: &MultimodalSample,
        mask: &ModalitySet,
    ) -> Result<Vec<f64>> {
        self.check_sample(sample)?;
        mask.check_range(self.num_modalities)?;
        let mut out = Vec::with_capacity(self.total_dim);
        for (k, (f, &p)) in sample
            .features
            .iter()
            .zip(sample.present.iter())
            .enumerate()
        {
            if p && mask.contains(k + 1) {
                out.extend_from_slice(f);
            } else {
                out.extend(core::iter::repeat_n(0.0, f.len()));
            }
        }
        Ok(out)
    }

    /// Boolean coordinate mask of length `total_dim`: true where the
    /// coordinate belongs to a modality in `mask`.
    pub fn coord_mask(&self, mask: &ModalitySet) -> Result<Vec<bool>> {
        mask.check_range(self.num_modalities)?;
        let mut out = Vec::with_capacity(self.total_dim);
        for (k, &d) in self.dims.iter().enumerate() {
            let inside = mask.contains(k + 1);
            out.extend(core::iter::repeat_n(inside, d));
        }
        Ok(out)
    }
}

/// A subset of modality indices, 1-based, stored sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ModalitySet {
    members: Vec<usize>,
}

impl ModalitySet {
    /// Build a set from indices; duplicates are collapsed, order normalized.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.iter().any(|&k| k == 0) {
            return Err(Error::Layout(
                "modality indices are 1-based; 0 is invalid".into(),
            ));
        }
        members.sort_unstable();
        members.dedup();
        Ok(ModalitySet { members })
    }

    /// The empty subset (every modality masked out).
    pub fn empty() -> Self {
        ModalitySet {
            members: Vec::new(),
        }
    }

    /// The full subset `{1, ..., k}`.
    pub fn full(k: usize) -> Self {
        ModalitySet {
            members: (1..=k).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    /// Subset test (lattice order).
    pub fn is_subset_of(&self, other: &ModalitySet) -> bool {
        self.members.iter().all(|&k| other.contains(k))
    }

    /// Lattice meet.
    pub fn intersection(&self, other: &ModalitySet) -> ModalitySet {
        ModalitySet {
            members: self
                .members
                .iter()
                .copied()
                .filter(|&k| other.contains(k))
                .collect(),
        }
    }

    /// Error unless every member lies in `[1, k]`.
    pub fn check_range(&self, k: usize) -> Result<()> {
        match self.members.last() {
            Some(&max) if max > k => Err(Error::Layout(format!(
                "modality index {max} out of range [1, {k}]"
            ))),
            _ => Ok(()),
        }
    }

    /// Re-check sortedness/uniqueness; useful after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.members.iter().any(|&k| k == 0) {
            return Err(Error::Layout(
                "modality indices are 1-based; 0 is invalid".into(),
            ));
        }
        if self.members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Layout(
                "modality set must be strictly ascending".into(),
            ));
        }
        Ok(())
    }

    /// Render as `1;2;3` (or `-` for the empty set); used in CSV cells and
    /// CLI round-trips, where commas are column separators.
    pub fn display_compact(&self) -> String {
        if self.members.is_empty() {
            return String::from("-");
        }
        let mut s = String::new();
        for (i, k) in self.members.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            s.push_str(&format!("{k}"));
        }
        s
    }
}

/// A `K`-modality observation: per-modality feature vectors, per-modality
/// presence flags, and a class label.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultimodalSample {
    features: Vec<Vec<f64>>,
    present: Vec<bool>,
    label: i64,
}

impl MultimodalSample {
    /// Build a sample; features of absent modalities are zeroed so the
    /// missing sentinel has a single canonical encoding.
    pub fn new(mut features: Vec<Vec<f64>>, present: Vec<bool>, label: i64) -> Result<Self> {
        if features.len() != present.len() {
            return Err(Error::Layout(format!(
                "{} feature blocks but {} presence flags",
                features.len(),
                present.len()
            )));
        }
        for (f, &p) in features.iter_mut().zip(present.iter()) {
            if !p {
                f.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Ok(MultimodalSample {
            features,
            present,
            label,
        })
    }

    /// A fully-present sample.
    pub fn complete(features: Vec<Vec<f64>>, label: i64) -> Self {
        let present = vec![true; features.len()];
        MultimodalSample {
            features,
            present,
            label,
        }
    }

    pub fn num_modalities(&self) -> usize {
        self.features.len()
    }

    /// Feature block of modality `k` (1-based). Absent modalities read as
    /// all zeros by the canonical encoding.
    pub fn features_of(&self, k: usize) -> &[f64] {
        &self.features[k - 1]
    }

    pub fn is_present(&self, k: usize) -> bool {
        self.present[k - 1]
    }

    pub fn present_flags(&self) -> &[bool] {
        &self.present
    }

    pub fn label(&self) -> i64 {
        self.label
    }

    /// Flatten this sample's own blocks after masking with `mask`; no layout
    /// needed because the sample carries its structure.
    pub fn flatten_masked(&self, mask: &ModalitySet) -> Result<Vec<f64>> {
        mask.check_range(self.num_modalities())?;
        let mut out = Vec::with_capacity(self.features.iter().map(Vec::len).sum());
        for (k, (f, &p)) in self.features.iter().zip(self.present.iter()).enumerate() {
            if p && mask.contains(k + 1) {
                out.extend_from_slice(f);
            } else {
                out.extend(core::iter::repeat_n(0.0, f.len()));
            }
        }
        Ok(out)
    }

    /// Restore the canonical zero encoding for absent modalities and check
    /// flag/block consistency; useful after deserialization.
    pub fn canonicalize(&mut self) -> Result<()> {
        if self.features.len() != self.present.len() {
            return Err(Error::Layout(format!(
                "{} feature blocks but {} presence flags",
                self.features.len(),
                self.present.len()
            )));
        }
        for (f, &p) in self.features.iter_mut().zip(self.present.iter()) {
            if !p {
                f.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Ok(())
    }
}

/// Mask a sample down to the modality subset `m`: modality `k` survives iff
/// it was present and `k ∈ m`; everything else becomes the zeroed sentinel.
/// The label is untouched. Idempotent, and because absent inputs stay
/// absent, the same map also serves as the extension to already-masked
/// inputs.
pub fn project_modality(x: &MultimodalSample, m: &ModalitySet) -> Result<MultimodalSample> {
    m.check_range(x.num_modalities())?;
    let mut features = Vec::with_capacity(x.features.len());
    let mut present = Vec::with_capacity(x.present.len());
    for (k, (f, &p)) in x.features.iter().zip(x.present.iter()).enumerate() {
        let keep = p && m.contains(k + 1);
        present.push(keep);
        if keep {
            features.push(f.clone());
        } else {
            features.push(vec![0.0; f.len()]);
        }
    }
    Ok(MultimodalSample {
        features,
        present,
        label: x.label,
    })
}

/// Check the projection-composition identity for nested subsets:
/// projecting straight to `n` must equal projecting to `m` first and then
/// to `n`, exactly. This is the executable form of the class hierarchy
/// (smaller subsets sit inside larger ones).
pub fn compose_projection_check(
    x: &MultimodalSample,
    n: &ModalitySet,
    m: &ModalitySet,
) -> Result<bool> {
    if !n.is_subset_of(m) {
        return Err(Error::Precondition(format!(
            "N = {} is not a subset of M = {}",
            n.display_compact(),
            m.display_compact()
        )));
    }
    let direct = project_modality(x, n)?;
    let composed = project_modality(&project_modality(x, m)?, n)?;
    Ok(direct == composed)
}

/// Pairwise similarity sign: `+1` for equal labels, `-1` otherwise.
pub fn pair_label(y_i: i64, y_j: i64) -> f64 {
    if y_i == y_j {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_123() -> MultimodalSample {
        MultimodalSample::complete(vec![vec![1.0, 2.0], vec![3.0], vec![4.0, 5.0]], 7)
    }

    #[test]
    fn layout_rejects_bad_dims() {
        assert!(matches!(ModalityLayout::new(vec![]), Err(Error::Layout(_))));
        assert!(matches!(
            ModalityLayout::new(vec![2, 0]),
            Err(Error::Layout(_))
        ));
        let l = ModalityLayout::new(vec![2, 1, 2]).unwrap();
        assert_eq!(l.total_dim(), 5);
        assert_eq!(l.offset(1), 0);
        assert_eq!(l.offset(3), 3);
    }

    #[test]
    fn projection_masks_and_keeps_label() {
        let x = sample_123();
        let m = ModalitySet::new(vec![1, 3]).unwrap();
        let p = project_modality(&x, &m).unwrap();
        assert!(p.is_present(1) && !p.is_present(2) && p.is_present(3));
        assert_eq!(p.features_of(1), &[1.0, 2.0]);
        assert_eq!(p.features_of(2), &[0.0]);
        assert_eq!(p.features_of(3), &[4.0, 5.0]);
        assert_eq!(p.label(), 7);
    }

    #[test]
    fn projection_full_set_is_identity() {
        let x = sample_123();
        let m = ModalitySet::full(3);
        assert_eq!(project_modality(&x, &m).unwrap(), x);
    }

    #[test]
    fn projection_empty_set_blanks_everything() {
        let x = sample_123();
        let p = project_modality(&x, &ModalitySet::empty()).unwrap();
        assert!(p.present_flags().iter().all(|&b| !b));
        assert_eq!(p.label(), 7);
        for k in 1..=3 {
            assert!(p.features_of(k).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let x = sample_123();
        let m = ModalitySet::new(vec![2]).unwrap();
        let once = project_modality(&x, &m).unwrap();
        let twice = project_modality(&once, &m).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn projection_out_of_range_is_layout_error() {
        let x = sample_123();
        let m = ModalitySet::new(vec![4]).unwrap();
        assert!(matches!(project_modality(&x, &m), Err(Error::Layout(_))));
    }

    #[test]
    fn composition_identity_on_nested_sets() {
        let x = sample_123();
        let n = ModalitySet::new(vec![1]).unwrap();
        let m = ModalitySet::new(vec![1, 2]).unwrap();
        assert!(compose_projection_check(&x, &n, &m).unwrap());
        assert!(compose_projection_check(&x, &m, &m).unwrap());
        assert!(compose_projection_check(&x, &ModalitySet::empty(), &m).unwrap());
    }

    #[test]
    fn composition_requires_nesting() {
        let x = sample_123();
        let n = ModalitySet::new(vec![3]).unwrap();
        let m = ModalitySet::new(vec![1, 2]).unwrap();
        assert!(matches!(
            compose_projection_check(&x, &n, &m),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pair_label_sign_and_symmetry() {
        assert_eq!(pair_label(3, 3), 1.0);
        assert_eq!(pair_label(0, 1), -1.0);
        for a in -2..3 {
            for b in -2..3 {
                assert_eq!(pair_label(a, b), pair_label(b, a));
            }
        }
    }

    #[test]
    fn absent_modalities_are_zeroed_at_construction() {
        let s =
            MultimodalSample::new(vec![vec![1.0, 2.0], vec![9.0]], vec![true, false], 0).unwrap();
        assert_eq!(s.features_of(2), &[0.0]);
        let layout = ModalityLayout::new(vec![2, 1]).unwrap();
        assert_eq!(layout.flatten(&s).unwrap(), vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn flatten_masked_zeroes_outside_mask() {
        let layout = ModalityLayout::new(vec![2, 1, 2]).unwrap();
        let x = sample_123();
        let m = ModalitySet::new(vec![2]).unwrap();
        assert_eq!(
            layout.flatten_masked(&x, &m).unwrap(),
            vec![0.0, 0.0, 3.0, 0.0, 0.0]
        );
        assert_eq!(
            layout.coord_mask(&m).unwrap(),
            vec![false, false, true, false, false]
        );
    }

    #[test]
    fn modality_set_lattice_ops() {
        let a = ModalitySet::new(vec![3, 1, 1]).unwrap();
        assert_eq!(a.members(), &[1, 3]);
        let b = ModalitySet::new(vec![1, 2]).unwrap();
        assert_eq!(a.intersection(&b).members(), &[1]);
        assert!(ModalitySet::empty().is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert_eq!(ModalitySet::full(3).members(), &[1, 2, 3]);
        assert!(ModalitySet::new(vec![0]).is_err());
    }
}
