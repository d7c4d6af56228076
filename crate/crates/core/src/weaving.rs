//! Exhaustive weaving oracle and subspace distances.
//!
//! A weaving of `M` frames with a common index set `[m]` picks, for every index
//! `i`, the `i`-th vector of one of the frames. The oracle enumerates all `M^m`
//! choices, so its verdicts are exact up to the eigenvalue computation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::linalg::{self, CMatrix};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Frame label (0-based) for every index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<usize>,
}

impl Assignment {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    /// The `index`-th assignment in lexicographic order (index 0 is the
    /// most significant digit).
    pub fn from_index(mut index: u64, frames: usize, m: usize) -> Self {
        let mut labels = vec![0; m];
        for slot in labels.iter_mut().rev() {
            *slot = (index % frames as u64) as usize;
            index /= frames as u64;
        }
        Self { labels }
    }

    /// Indices carrying label `label`.
    pub fn indices_with(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Labels shifted to 1-based numbering, for reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WovenReport {
    pub universal_lower: f64,
    pub universal_upper: f64,
    pub is_woven: bool,
    /// First assignment (lexicographically) attaining `universal_lower`.
    pub worst_assignment: Assignment,
    pub assignments_checked: u64,
}

/// Result of the rank-only (weakly woven) check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningReport {
    pub all_span: bool,
    pub first_failure: Option<Assignment>,
    pub assignments_checked: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDistance {
    /// `inf { |f - g| : f in W1, g in W2, |g| = 1 }`.
    pub d_w1_of_w2: f64,
    /// `inf { |f - g| : f in W1, |f| = 1, g in W2 }`.
    pub d_w2_of_w1: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionDistance {
    pub min_d: f64,
    /// Indices `J` taken from `phi` at the minimum; the rest come from `psi`.
    pub argmin: Vec<usize>,
    pub assignment: Assignment,
    pub partitions_checked: u64,
}

fn check_family(frames: &[Frame]) -> Result<(usize, usize)> {
    let first = frames
        .first()
        .ok_or_else(|| FrameError::ShapeMismatch("no frames given".into()))?;
    let (dim, m) = (first.dim(), first.len());
    for (j, f) in frames.iter().enumerate() {
        if f.dim() != dim || f.len() != m {
            return Err(FrameError::ShapeMismatch(format!(
                "frame {j} is {}x{}, expected {dim}x{m}",
                f.dim(),
                f.len()
            )));
        }
    }
    Ok((dim, m))
}

/// `M^m`, saturating.
pub fn assignment_count(frames: usize, m: usize) -> u128 {
    let mut count: u128 = 1;
    for _ in 0..m {
        count = count.saturating_mul(frames as u128);
    }
    count
}

fn checked_count(frames: usize, m: usize, cap: u64) -> Result<u64> {
    let count = assignment_count(frames, m);
    if count > cap as u128 {
        return Err(FrameError::EnumerationTooLarge { count, cap });
    }
    Ok(count as u64)
}

/// The family whose `i`-th vector comes from `frames[a.labels[i]]`.
pub fn weave(frames: &[Frame], a: &Assignment) -> Result<Frame> {
    let (dim, m) = check_family(frames)?;
    if a.labels.len() != m {
        return Err(FrameError::ShapeMismatch(format!(
            "assignment has {} labels for {m} indices",
            a.labels.len()
        )));
    }
    if let Some(&bad) = a.labels.iter().find(|&&l| l >= frames.len()) {
        return Err(FrameError::ShapeMismatch(format!(
            "label {bad} out of range for {} frames",
            frames.len()
        )));
    }
    let mat = CMatrix::from_fn(dim, m, |r, i| frames[a.labels[i]].synthesis()[(r, i)]);
    Frame::from_synthesis(mat, frames[0].tol())
}

#[derive(Clone, Copy)]
struct Extremes {
    lower: f64,
    lower_index: u64,
    upper: f64,
}

impl Extremes {
    const EMPTY: Extremes = Extremes {
        lower: f64::INFINITY,
        lower_index: u64::MAX,
        upper: f64::NEG_INFINITY,
    };

    fn merge(self, other: Extremes) -> Extremes {
        let take_other =
            other.lower < self.lower || (other.lower == self.lower && other.lower_index < self.lower_index);
        let (lower, lower_index) = if take_other {
            (other.lower, other.lower_index)
        } else {
            (self.lower, self.lower_index)
        };
        Extremes {
            lower,
            lower_index,
            upper: self.upper.max(other.upper),
        }
    }
}

/// Rank-one terms `v v^H` for every frame and index.
fn outer_products(frames: &[Frame]) -> Vec<Vec<CMatrix>> {
    frames
        .iter()
        .map(|f| {
            (0..f.len())
                .map(|i| {
                    let v = f.vector(i);
                    &v * v.adjoint()
                })
                .collect()
        })
        .collect()
}

/// Frame operator of the weaving at `index`.
fn weaving_operator(terms: &[Vec<CMatrix>], dim: usize, m: usize, index: u64) -> CMatrix {
    let a = Assignment::from_index(index, terms.len(), m);
    let mut s = CMatrix::zeros(dim, dim);
    for (i, &l) in a.labels.iter().enumerate() {
        s += &terms[l][i];
    }
    s
}

pub fn woven_oracle(frames: &[Frame], tol: f64) -> Result<WovenReport> {
    woven_oracle_with_cap(frames, tol, DEFAULT_ENUMERATION_CAP)
}

/// Enumerates every weaving and reports the universal optimal bounds.
pub fn woven_oracle_with_cap(frames: &[Frame], tol: f64, cap: u64) -> Result<WovenReport> {
    let (dim, m) = check_family(frames)?;
    let count = checked_count(frames.len(), m, cap)?;
    let terms = outer_products(frames);
    let ext = (0..count)
        .into_par_iter()
        .map(|idx| {
            let ev = linalg::hermitian_eigenvalues(&weaving_operator(&terms, dim, m, idx));
            Extremes {
                lower: ev[0].max(0.0),
                lower_index: idx,
                upper: ev[dim - 1].max(0.0),
            }
        })
        .reduce(|| Extremes::EMPTY, Extremes::merge);
    Ok(WovenReport {
        universal_lower: ext.lower,
        universal_upper: ext.upper,
        is_woven: ext.upper > 0.0 && ext.lower > tol * ext.upper,
        worst_assignment: Assignment::from_index(ext.lower_index, frames.len(), m),
        assignments_checked: count,
    })
}

/// Rank-only check: does every weaving span? Uses pivoted Gram-Schmidt, a
/// route independent of the eigenvalue computation in [`woven_oracle`].
pub fn weakly_woven(frames: &[Frame], tol: f64, cap: u64) -> Result<SpanningReport> {
    let (dim, m) = check_family(frames)?;
    let count = checked_count(frames.len(), m, cap)?;
    let first_failure = (0..count)
        .into_par_iter()
        .filter(|&idx| {
            let a = Assignment::from_index(idx, frames.len(), m);
            let mat = CMatrix::from_fn(dim, m, |r, i| frames[a.labels[i]].synthesis()[(r, i)]);
            linalg::gram_schmidt_rank(&mat, tol) < dim
        })
        .min();
    Ok(SpanningReport {
        all_span: first_failure.is_none(),
        first_failure: first_failure.map(|idx| Assignment::from_index(idx, frames.len(), m)),
        assignments_checked: count,
    })
}

/// Every weaving in lexicographic order.
pub fn all_weavings(frames: &[Frame], cap: u64) -> Result<Vec<(Assignment, Frame)>> {
    let (_, m) = check_family(frames)?;
    let count = checked_count(frames.len(), m, cap)?;
    (0..count)
        .map(|idx| {
            let a = Assignment::from_index(idx, frames.len(), m);
            let w = weave(frames, &a)?;
            Ok((a, w))
        })
        .collect()
}

fn one_sided(q_target: &CMatrix, q_sphere: &CMatrix) -> f64 {
    if q_sphere.ncols() == 0 {
        return f64::INFINITY;
    }
    let dim = q_sphere.nrows();
    let residual = (linalg::identity(dim) - q_target * q_target.adjoint()) * q_sphere;
    linalg::singular_values(&residual).last().copied().unwrap_or(0.0)
}

/// Distance between the column spans of `basis1` and `basis2` (both with `dim`
/// rows; spanning sets need not be independent).
pub fn subspace_distance(basis1: &CMatrix, basis2: &CMatrix, tol: f64) -> Result<SubspaceDistance> {
    if basis1.nrows() != basis2.nrows() {
        return Err(FrameError::DimensionMismatch {
            context: "subspace ambient dimension".into(),
            expected: basis1.nrows(),
            found: basis2.nrows(),
        });
    }
    let q1 = linalg::orthonormal_basis(basis1, tol);
    let q2 = linalg::orthonormal_basis(basis2, tol);
    let d_w1_of_w2 = one_sided(&q1, &q2);
    let d_w2_of_w1 = one_sided(&q2, &q1);
    Ok(SubspaceDistance {
        d_w1_of_w2,
        d_w2_of_w1,
        d: d_w1_of_w2.min(d_w2_of_w1),
    })
}

fn require_riesz(f: &Frame, name: &str) -> Result<()> {
    if f.len() != f.dim() {
        return Err(FrameError::NotRieszBasis(format!(
            "{name} has {} vectors in dimension {}",
            f.len(),
            f.dim()
        )));
    }
    if !f.is_frame() {
        return Err(FrameError::NotRieszBasis(format!("{name} does not span")));
    }
    Ok(())
}

/// `min_J d(span phi_J, span psi_{J^c})` over all `J`, including `J = {}` and `J = [m]`.
pub fn min_partition_distance(phi: &Frame, psi: &Frame, cap: u64) -> Result<PartitionDistance> {
    require_riesz(phi, "phi")?;
    require_riesz(psi, "psi")?;
    check_family(&[phi.clone(), psi.clone()])?;
    let m = phi.len();
    let count = checked_count(2, m, cap)?;
    let tol = phi.tol();
    let best = (0..count)
        .into_par_iter()
        .map(|idx| {
            let a = Assignment::from_index(idx, 2, m);
            let j = a.indices_with(0);
            let jc = a.indices_with(1);
            let w1 = phi
                .select(&j)
                .map(|f| f.synthesis().clone())
                .unwrap_or_else(|_| CMatrix::zeros(phi.dim(), 0));
            let w2 = psi
                .select(&jc)
                .map(|f| f.synthesis().clone())
                .unwrap_or_else(|_| CMatrix::zeros(phi.dim(), 0));
            let d = subspace_distance(&w1, &w2, tol).map(|s| s.d).unwrap_or(f64::NAN);
            (d, idx)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |x, y| {
                if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );
    let assignment = Assignment::from_index(best.1, 2, m);
    Ok(PartitionDistance {
        min_d: best.0,
        argmin: assignment.indices_with(0),
        assignment,
        partitions_checked: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::DEFAULT_TOL;

    fn rf(dim: usize, v: &[&[f64]]) -> Frame {
        Frame::from_real(dim, &v.iter().map(|x| x.to_vec()).collect::<Vec<_>>(), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn weave_examples() {
        let a = rf(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = rf(2, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let frames = [a.clone(), b.clone()];
        assert_eq!(weave(&frames, &Assignment::new(vec![0, 0])).unwrap(), a);
        let w = weave(&frames, &Assignment::new(vec![0, 1])).unwrap();
        assert_eq!(w, rf(2, &[&[1.0, 0.0], &[1.0, 0.0]]));
        assert!(matches!(
            weave(&frames, &Assignment::new(vec![0, 2])),
            Err(FrameError::ShapeMismatch(_))
        ));
        let three = [a.clone(), b.clone(), a];
        assert_eq!(all_weavings(&three, 100).unwrap().len(), 9);
    }

    #[test]
    fn lexicographic_indexing() {
        assert_eq!(Assignment::from_index(1, 2, 3).labels, vec![0, 0, 1]);
        assert_eq!(Assignment::from_index(5, 3, 2).labels, vec![1, 2]);
        assert_eq!(Assignment::new(vec![0, 1]).one_based(), vec![1, 2]);
    }

    #[test]
    fn identical_bases_are_woven() {
        let a = rf(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = woven_oracle(&[a.clone(), a], DEFAULT_TOL).unwrap();
        assert!(r.is_woven);
        assert!((r.universal_lower - 1.0).abs() < 1e-12 && (r.universal_upper - 1.0).abs() < 1e-12);
        assert_eq!(r.assignments_checked, 4);
    }

    #[test]
    fn swapped_basis_is_not_woven() {
        let a = rf(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = rf(2, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = woven_oracle(&[a.clone(), b.clone()], DEFAULT_TOL).unwrap();
        assert!(!r.is_woven);
        assert_eq!(r.worst_assignment.labels, vec![0, 1]);
        let s = weakly_woven(&[a, b], DEFAULT_TOL, 100).unwrap();
        assert!(!s.all_span);
        assert_eq!(s.first_failure.unwrap().labels, vec![0, 1]);
    }

    #[test]
    fn enumeration_cap() {
        let a = rf(1, &[&[1.0][..]; 5]);
        let err = woven_oracle_with_cap(&[a.clone(), a], DEFAULT_TOL, 16).unwrap_err();
        assert_eq!(err, FrameError::EnumerationTooLarge { count: 32, cap: 16 });
    }

    #[test]
    fn distance_of_lines() {
        let e1 = linalg::from_real_rows(2, 1, &[1.0, 0.0]);
        let e2 = linalg::from_real_rows(2, 1, &[0.0, 1.0]);
        assert!((subspace_distance(&e1, &e2, DEFAULT_TOL).unwrap().d - 1.0).abs() < 1e-12);
        assert!(subspace_distance(&e1, &e1, DEFAULT_TOL).unwrap().d < 1e-12);
        let t: f64 = 0.3;
        let g = linalg::from_real_rows(2, 1, &[t.cos(), t.sin()]);
        assert!((subspace_distance(&e1, &g, DEFAULT_TOL).unwrap().d - t.sin()).abs() < 1e-12);
    }

    #[test]
    fn empty_subspace_conventions() {
        let empty = CMatrix::zeros(2, 0);
        let full = linalg::identity(2);
        let d = subspace_distance(&empty, &full, DEFAULT_TOL).unwrap();
        assert!((d.d_w1_of_w2 - 1.0).abs() < 1e-12);
        assert!(d.d_w2_of_w1.is_infinite());
        assert!((d.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_distance_examples() {
        let a = rf(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = min_partition_distance(&a, &a, 1 << 10).unwrap();
        assert!((r.min_d - 1.0).abs() < 1e-12);

        let a = rf(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = rf(2, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = min_partition_distance(&a, &b, 1 << 10).unwrap();
        assert!(r.min_d < 1e-12);
        assert_eq!(r.argmin, vec![0]);

        let redundant = rf(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            min_partition_distance(&redundant, &redundant, 64),
            Err(FrameError::NotRieszBasis(_))
        ));
    }
}
