//! Finite frames, their synthesis/analysis/frame operators, optimal bounds and
//! classification.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, CMatrix, CVector, Complex64};

/// Default relative tolerance used for frame-ness and equality decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A finite family of `m` vectors in `C^dim`, stored as the `dim x m` synthesis
/// matrix whose columns are the frame vectors.
///
/// A `Frame` does not assert that the vectors span; use [`Frame::classify`] or
/// [`Frame::is_frame`] for that.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    synthesis: CMatrix,
    tol: f64,
}

/// Optimal lower and upper frame bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub optimal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameClass {
    pub is_bessel_only: bool,
    pub is_frame: bool,
    pub is_riesz_basis: bool,
    pub tight_constant: Option<f64>,
    pub is_parseval: bool,
    /// Smallest eps with `(1-eps)|f|^2 <= sum |<f, phi_i>|^2 <= (1+eps)|f|^2`.
    pub nearly_parseval_eps: f64,
    /// `max_i | |phi_i| - c | / c` with `c` the mean vector norm.
    pub nearly_equal_norm_eps: f64,
    pub equal_norm_center: f64,
}

/// The three canonical operators of a frame as explicit matrices.
#[derive(Clone, Debug)]
pub struct OperatorViews {
    /// `dim x m`, maps coefficients to `sum c_i phi_i`.
    pub synthesis: CMatrix,
    /// `m x dim`, maps `f` to `(<f, phi_i>)_i`.
    pub analysis: CMatrix,
    /// `dim x dim`, Hermitian positive semidefinite.
    pub frame_operator: CMatrix,
}

impl Frame {
    /// Validates and builds a frame from explicit vectors.
    pub fn new(dim: usize, vectors: Vec<Vec<Complex64>>, tol: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(FrameError::EmptyFamily);
        }
        if dim == 0 {
            return Err(FrameError::InvalidArgument("dimension must be positive".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    context: format!("vector {i}"),
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let synthesis = CMatrix::from_fn(dim, vectors.len(), |r, j| vectors[j][r]);
        Self::from_synthesis(synthesis, tol)
    }

    /// Real vectors embedded into `C^dim`.
    pub fn from_real(dim: usize, vectors: &[Vec<f64>], tol: f64) -> Result<Self> {
        let vs = vectors
            .iter()
            .map(|v| v.iter().map(|&x| linalg::real(x)).collect())
            .collect();
        Self::new(dim, vs, tol)
    }

    /// Builds a frame whose vectors are the columns of `synthesis`.
    pub fn from_synthesis(synthesis: CMatrix, tol: f64) -> Result<Self> {
        if synthesis.ncols() == 0 {
            return Err(FrameError::EmptyFamily);
        }
        if synthesis.nrows() == 0 {
            return Err(FrameError::InvalidArgument("dimension must be positive".into()));
        }
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(FrameError::InvalidArgument(format!(
                "tolerance must be a finite nonnegative number, got {tol}"
            )));
        }
        for j in 0..synthesis.ncols() {
            for r in 0..synthesis.nrows() {
                let z = synthesis[(r, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(FrameError::NonFiniteEntry { vector: j, coord: r });
                }
            }
        }
        Ok(Self { synthesis, tol })
    }

    pub fn dim(&self) -> usize {
        self.synthesis.nrows()
    }

    /// Number of vectors `m`.
    pub fn len(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn synthesis(&self) -> &CMatrix {
        &self.synthesis
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.synthesis.column(i).into_owned()
    }

    pub fn vectors(&self) -> Vec<Vec<Complex64>> {
        (0..self.len())
            .map(|j| self.synthesis.column(j).iter().copied().collect())
            .collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.synthesis.column(j).norm()).collect()
    }

    /// `sum_i c_i phi_i`.
    pub fn synthesize(&self, coeffs: &CVector) -> CVector {
        &self.synthesis * coeffs
    }

    /// `(<f, phi_i>)_i`, inner product linear in the first slot.
    pub fn analyze(&self, f: &CVector) -> CVector {
        self.synthesis.adjoint() * f
    }

    /// `S f = sum_i <f, phi_i> phi_i`, i.e. `Phi Phi^H`.
    pub fn frame_operator(&self) -> CMatrix {
        &self.synthesis * self.synthesis.adjoint()
    }

    pub fn operator_views(&self) -> OperatorViews {
        OperatorViews {
            synthesis: self.synthesis.clone(),
            analysis: self.synthesis.adjoint(),
            frame_operator: self.frame_operator(),
        }
    }

    /// Squared extreme singular values of the synthesis operator. When `m < dim`
    /// the lower bound is zero.
    pub fn optimal_bounds(&self) -> FrameBounds {
        let s = linalg::singular_values(&self.synthesis);
        let upper = s.first().map_or(0.0, |x| x * x);
        let lower = if self.len() < self.dim() {
            0.0
        } else {
            s[self.dim() - 1].powi(2)
        };
        FrameBounds {
            lower,
            upper,
            optimal: true,
        }
    }

    pub fn is_frame(&self) -> bool {
        let b = self.optimal_bounds();
        b.upper > 0.0 && b.lower > self.tol * b.upper
    }

    /// Errors with `NotAFrame` unless the family spans.
    pub fn require_frame(&self) -> Result<FrameBounds> {
        let b = self.optimal_bounds();
        if b.upper > 0.0 && b.lower > self.tol * b.upper {
            Ok(b)
        } else {
            Err(FrameError::NotAFrame {
                lower: b.lower,
                upper: b.upper,
            })
        }
    }

    pub fn classify(&self) -> FrameClass {
        let b = self.optimal_bounds();
        let is_frame = b.upper > 0.0 && b.lower > self.tol * b.upper;
        let tight = is_frame && (b.upper - b.lower) <= self.tol * b.upper;
        let tight_constant = tight.then_some(0.5 * (b.lower + b.upper));
        let nearly_parseval_eps = (1.0 - b.lower).max(b.upper - 1.0);
        let is_parseval = tight && nearly_parseval_eps <= self.tol;
        let norms = self.norms();
        let center = norms.iter().sum::<f64>() / norms.len() as f64;
        let nearly_equal_norm_eps = if center > 0.0 {
            norms.iter().map(|n| (n - center).abs() / center).fold(0.0, f64::max)
        } else {
            0.0
        };
        FrameClass {
            is_bessel_only: !is_frame,
            is_frame,
            is_riesz_basis: is_frame && self.len() == self.dim(),
            tight_constant: if is_parseval { Some(1.0) } else { tight_constant },
            is_parseval,
            nearly_parseval_eps,
            nearly_equal_norm_eps,
            equal_norm_center: center,
        }
    }

    /// `{T phi_i}` for a `dim x dim` operator `T`.
    pub fn apply_operator(&self, t: &CMatrix) -> Result<Frame> {
        check_square(t, self.dim(), "operator")?;
        Frame::from_synthesis(t * &self.synthesis, self.tol)
    }

    /// Frame restricted to the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Frame> {
        let cols: Vec<usize> = indices.to_vec();
        if let Some(&bad) = cols.iter().find(|&&i| i >= self.len()) {
            return Err(FrameError::InvalidArgument(format!("index {bad} out of range")));
        }
        let mat = CMatrix::from_fn(self.dim(), cols.len(), |r, k| self.synthesis[(r, cols[k])]);
        Frame::from_synthesis(mat, self.tol)
    }
}

pub fn make_frame(dim: usize, vectors: Vec<Vec<Complex64>>, tol: f64) -> Result<Frame> {
    Frame::new(dim, vectors, tol)
}

pub fn operator_views(frame: &Frame) -> OperatorViews {
    frame.operator_views()
}

pub fn optimal_bounds(frame: &Frame) -> FrameBounds {
    frame.optimal_bounds()
}

pub fn classify(frame: &Frame) -> FrameClass {
    frame.classify()
}

pub fn apply_operator(t: &CMatrix, frame: &Frame) -> Result<Frame> {
    frame.apply_operator(t)
}

pub(crate) fn check_square(t: &CMatrix, dim: usize, what: &str) -> Result<()> {
    if t.nrows() != dim || t.ncols() != dim {
        return Err(FrameError::DimensionMismatch {
            context: format!("{what} of shape {}x{}", t.nrows(), t.ncols()),
            expected: dim,
            found: if t.nrows() != dim { t.nrows() } else { t.ncols() },
        });
    }
    for z in t.iter() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(FrameError::InvalidArgument(format!("{what} has a non-finite entry")));
        }
    }
    Ok(())
}
