//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Alias for results produced by this crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the data model and the numeric routines.
///
/// Each variant carries a human-readable message naming the offending
/// quantity; callers that need exit-code style dispatch match on the variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A sample, matrix, or modality index does not conform to the layout.
    Layout(String),
    /// Vector or matrix dimensions do not match.
    Shape(String),
    /// Too few samples for the requested operation.
    Size(String),
    /// An operation precondition (e.g. nested modality sets) was violated.
    Precondition(String),
    /// Matrix is not symmetric within tolerance.
    Symmetry(String),
    /// An iterative routine exhausted its iteration budget.
    Convergence(String),
    /// A permutation argument is not a bijection on the sample indices.
    Permutation(String),
    /// Invalid or inconsistent configuration.
    Config(String),
    /// An observed Lipschitz quotient exceeds the declared constant.
    Certification(String),
    /// A non-finite value surfaced where a finite one is required.
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Layout(m) => write!(f, "layout error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Size(m) => write!(f, "size error: {m}"),
            Error::Precondition(m) => write!(f, "precondition error: {m}"),
            Error::Symmetry(m) => write!(f, "symmetry error: {m}"),
            Error::Convergence(m) => write!(f, "convergence error: {m}"),
            Error::Permutation(m) => write!(f, "permutation error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Certification(m) => write!(f, "certification failure: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
