//! Assembled bound reports: every additive term of a bound expression is
//! itemized by name so reports can be audited line by line, and the
//! right-hand side is exactly the sum of its terms.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::complexity::{log_ratio, ClosedFormBound, ComplexityEstimate};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::math::{ln, sqrt};
use crate::metric::MetricCaps;
use crate::train::TrainResult;

/// Flag attached when a risk-reduction log argument is below one.
pub const FLAG_T6_LOG_NONPOSITIVE: &str = "theorem6-log-argument-nonpositive";

/// Which bound a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Theorem {
    T3,
    T4,
    T5,
    T6,
}

/// Evaluated left- and right-hand sides of one bound, with the right-hand
/// side's additive terms itemized.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub theorem: Theorem,
    /// `None` when the statement has no evaluable left-hand side.
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub terms: BTreeMap<String, f64>,
    /// `lhs <= rhs` when the left-hand side applies.
    pub holds: Option<bool>,
    pub validity_flags: Vec<String>,
}

impl BoundReport {
    fn from_terms(theorem: Theorem, lhs: Option<f64>, terms: BTreeMap<String, f64>) -> Self {
        let rhs: f64 = terms.values().sum();
        let holds = lhs.map(|l| l <= rhs);
        BoundReport {
            theorem,
            lhs,
            rhs,
            terms,
            holds,
            validity_flags: Vec::new(),
        }
    }
}

fn check_delta_n(delta: f64, n: usize) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!(
            "delta must be in (0,1), got {delta}"
        )));
    }
    if n < 2 {
        return Err(Error::Size(format!("need n >= 2, got {n}")));
    }
    Ok(())
}

/// Risk-difference bound between two masks' trained models:
///
/// ```text
///   pop_risk_M - pop_risk_N <= gamma + 8(L1+L2)·R + 4√2·C/√n
///                              + C·√(2·ln(2/δ) / (n(n-1)))
/// ```
///
/// with `R` the block Rademacher complexity of the full class and `gamma`
/// the representation-quality gap.
pub fn theorem3_report(
    risk_m: f64,
    risk_n: f64,
    gamma: f64,
    complexity: &ComplexityEstimate,
    spec: &LossSpec,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_delta_n(delta, n)?;
    let c = spec.clip_c;
    let nf = n as f64;
    let mut terms = BTreeMap::new();
    terms.insert(String::from("gamma"), gamma);
    terms.insert(
        String::from("rademacher"),
        8.0 * (spec.l1 + spec.l2) * complexity.value,
    );
    terms.insert(String::from("clt"), 4.0 * sqrt(2.0) * c / sqrt(nf));
    terms.insert(
        String::from("confidence"),
        c * sqrt(2.0 * ln(2.0 / delta) / (nf * (nf - 1.0))),
    );
    Ok(BoundReport::from_terms(
        Theorem::T3,
        Some(risk_m - risk_n),
        terms,
    ))
}

/// Representation-quality bound for one mask's trained model:
///
/// ```text
///   eta(g_M) <= 4(L1+L2)·R_M + √(2C²·ln(2/δ)/(n(n-1))) + 4(L1+L2)·R
///               + 8C/√⌊n/2⌋ + excess_empirical_risk
/// ```
///
/// `R_M` is the complexity of the mask-restricted class, `R` of the full
/// class. The left-hand side is the independently estimated `eta(g_M)`.
pub fn theorem4_report(
    train_result: &TrainResult,
    eta_m: f64,
    complexity_m: &ComplexityEstimate,
    complexity_full: &ComplexityEstimate,
    spec: &LossSpec,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_delta_n(delta, n)?;
    let excess = train_result.excess_empirical_risk.ok_or_else(|| {
        Error::Config("training result carries no excess empirical risk (no ground truth)".into())
    })?;
    let c = spec.clip_c;
    let nf = n as f64;
    let blocks = (n / 2) as f64;
    let mut terms = BTreeMap::new();
    terms.insert(
        String::from("rademacher_restricted"),
        4.0 * (spec.l1 + spec.l2) * complexity_m.value,
    );
    terms.insert(
        String::from("confidence"),
        sqrt(2.0 * c * c * ln(2.0 / delta) / (nf * (nf - 1.0))),
    );
    terms.insert(
        String::from("rademacher_full"),
        4.0 * (spec.l1 + spec.l2) * complexity_full.value,
    );
    terms.insert(String::from("decoupling"), 8.0 * c / sqrt(blocks));
    terms.insert(String::from("excess_empirical"), excess);
    Ok(BoundReport::from_terms(Theorem::T4, Some(eta_m), terms))
}

/// Risk-reduction gap between masks of cardinalities `m_card >= n_card`:
///
/// ```text
///   (4(L1+L2)·D / ⌊n/2⌋) · (√(2·ln(κ/D^N·B²)) - √(2·ln(κ/D^M·B²)))
/// ```
///
/// Undefined (with a flag) when either log argument drops below one.
/// Nonnegative when `D >= 1`, zero when `D == 1` or the cardinalities match.
pub fn theorem6_gap(
    m_card: usize,
    n_card: usize,
    caps: &MetricCaps,
    spec: &LossSpec,
    n: usize,
) -> Result<ClosedFormBound> {
    if m_card < n_card {
        return Err(Error::Precondition(format!(
            "m_card = {m_card} must be >= n_card = {n_card}"
        )));
    }
    if n < 2 {
        return Err(Error::Size(format!("need n >= 2, got {n}")));
    }
    caps.validate()?;
    let ln_n = log_ratio(caps, n_card as i32);
    let ln_m = log_ratio(caps, m_card as i32);
    if ln_n < 0.0 || ln_m < 0.0 {
        return Ok(ClosedFormBound {
            value: None,
            flags: vec![FLAG_T6_LOG_NONPOSITIVE],
        });
    }
    let blocks = (n / 2) as f64;
    let scale = 4.0 * (spec.l1 + spec.l2) * caps.eigen_cap / blocks;
    Ok(ClosedFormBound {
        value: Some(scale * (sqrt(2.0 * ln_n) - sqrt(2.0 * ln_m))),
        flags: Vec::new(),
    })
}
