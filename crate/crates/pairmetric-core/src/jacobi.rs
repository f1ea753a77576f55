//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! The constructive counterpart of the diagonalization reduction used by
//! the closed-form capacity bound: any symmetric metric is orthogonally
//! equivalent to a diagonal one, so the diagonal model class loses nothing
//! up to rotation. For the small dimensions handled here (a few dozen at
//! most) Jacobi is robust and needs no external linear-algebra dependency.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Maximum absolute asymmetry accepted by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// A dense real square matrix checked to be symmetric within
/// [`SYMMETRY_TOL`] at construction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetricMatrix {
    entries: Vec<Vec<f64>>,
}

impl SymmetricMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Shape("matrix must be nonempty".into()));
        }
        if entries.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("matrix must be square".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (entries[i][j] - entries[j][i]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::Symmetry(format!(
                        "entries ({i},{j}) and ({j},{i}) differ by {gap:e}"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix { entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                entries[i][j] = v;
                entries[j][i] = v;
            }
        }
        SymmetricMatrix::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

fn off_diagonal_frobenius(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i][j] * a[i][j];
            }
        }
    }
    sqrt(acc)
}

/// Diagonalize a symmetric matrix: returns `(q, lambda)` with `q` orthogonal,
/// `q * A * qᵀ` diagonal to within `tol` (off-diagonal Frobenius norm), and
/// `lambda` the diagonal sorted in descending order (rows of `q` permuted to
/// match).
///
/// Cyclic sweeps with a per-sweep rotation threshold; gives up with a
/// convergence error after 100 sweeps, which in practice never happens for
/// symmetric input.
pub fn jacobi_diagonalize(a: &SymmetricMatrix, tol: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be > 0, got {tol}")));
    }
    let n = a.dim();
    // Work on the exactly-symmetrized copy so tiny constructor-tolerated
    // asymmetries cannot bias the rotations.
    let mut m = a.entries.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    let mut q = vec![vec![0.0; n]; n];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    if n == 1 {
        return Ok((q, vec![m[0][0]]));
    }

    let mut converged = off_diagonal_frobenius(&m) < tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence(format!(
                "off-diagonal norm {:e} still above {tol:e} after {MAX_SWEEPS} sweeps",
                off_diagonal_frobenius(&m)
            )));
        }
        // Rotations that cannot move the norm meaningfully are skipped.
        let skip_below = tol / (10.0 * (n * n) as f64);
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[p][r];
                if apq.abs() <= skip_below {
                    continue;
                }
                let app = m[p][p];
                let aqq = m[r][r];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root of t^2 + 2*theta*t - 1 = 0, which
                // annihilates a_pr under A <- Jᵀ A J
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;

                for k in 0..n {
                    if k != p && k != r {
                        let akp = m[k][p];
                        let akq = m[k][r];
                        m[k][p] = c * akp - s * akq;
                        m[p][k] = m[k][p];
                        m[k][r] = s * akp + c * akq;
                        m[r][k] = m[k][r];
                    }
                }
                m[p][p] = app - t * apq;
                m[r][r] = aqq + t * apq;
                m[p][r] = 0.0;
                m[r][p] = 0.0;

                // rows of q accumulate Jᵀ on the left, keeping q A₀ qᵀ equal
                // to the working matrix
                for k in 0..n {
                    let qpk = q[p][k];
                    let qqk = q[r][k];
                    q[p][k] = c * qpk - s * qqk;
                    q[r][k] = s * qpk + c * qqk;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_frobenius(&m) < tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j][j]
            .partial_cmp(&m[i][i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let lambda: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let q_sorted: Vec<Vec<f64>> = order.iter().map(|&i| q[i].clone()).collect();
    Ok((q_sorted, lambda))
}
