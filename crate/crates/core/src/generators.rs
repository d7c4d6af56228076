//! Deterministic and seeded frame constructions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::duality::BesselSequence;
use crate::error::{FrameError, Result};
use crate::frame::{Frame, DEFAULT_TOL};
use crate::linalg::{self, CMatrix, Complex64};

/// Truncation at level `d` of the repeated-basis Parseval frame
/// `{e1, e2/sqrt2, e2/sqrt2, e3/sqrt3, ...}` together with its null Bessel
/// companion `U`.
///
/// Level `k` contributes `k` copies of `e_k/sqrt(k)` to `phi`. In `U`, level 1
/// is the zero vector and level `k >= 2` contributes `k-1` copies of
/// `e_k/((k-1) sqrt(k))` followed by one `-e_k/sqrt(k)`.
///
/// # Panics
/// When `d < 1`.
pub fn example_family(d: usize) -> (Frame, BesselSequence) {
    assert!(d >= 1, "example needs at least one level");
    let m = d * (d + 1) / 2;
    let mut phi = CMatrix::zeros(d, m);
    let mut u = CMatrix::zeros(d, m);
    let mut col = 0;
    for k in 1..=d {
        let row = k - 1;
        let kf = k as f64;
        for copy in 0..k {
            phi[(row, col)] = linalg::real(1.0 / kf.sqrt());
            if k >= 2 {
                u[(row, col)] = if copy + 1 < k {
                    linalg::real(1.0 / ((kf - 1.0) * kf.sqrt()))
                } else {
                    linalg::real(-1.0 / kf.sqrt())
                };
            }
            col += 1;
        }
    }
    let phi = Frame::from_synthesis(phi, DEFAULT_TOL).expect("finite entries");
    let u = BesselSequence::from_matrix(u).expect("finite entries");
    (phi, u)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Real Gaussian matrix embedded in the complex field.
pub fn real_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| linalg::real(rng.sample(StandardNormal)))
}

/// Haar-distributed unitary via QR with the phase of `R` folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let q = qr.q();
    let r = qr.r();
    CMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::real(1.0)
        };
        q[(i, j)] * phase
    })
}

/// Seeded frame with optimal bounds `(lower, upper)`, built as `U diag(sigma) W`
/// with `U` unitary and `W` having orthonormal rows.
pub fn random_frame(dim: usize, m: usize, target_bounds: (f64, f64), seed: u64) -> Result<Frame> {
    let mut rng = rng_from_seed(seed);
    random_frame_with(dim, m, target_bounds, &mut rng)
}

pub fn random_frame_with<R: Rng + ?Sized>(
    dim: usize,
    m: usize,
    target_bounds: (f64, f64),
    rng: &mut R,
) -> Result<Frame> {
    let (lower, upper) = target_bounds;
    if dim == 0 || m < dim {
        return Err(FrameError::InfeasibleShape(format!(
            "need 1 <= dim <= m, got dim={dim}, m={m}"
        )));
    }
    if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
        return Err(FrameError::InfeasibleShape(format!(
            "need 0 < A <= B < inf, got ({lower}, {upper})"
        )));
    }
    if dim == 1 && lower != upper {
        return Err(FrameError::InfeasibleShape(
            "a one-dimensional frame is always tight".into(),
        ));
    }
    let mut sigma2: Vec<f64> = vec![upper, lower];
    for _ in 2..dim {
        sigma2.push(rng.random_range(lower..=upper));
    }
    sigma2.truncate(dim);
    let u = random_unitary(dim, rng);
    let w = random_unitary(m, rng);
    let mut mid = CMatrix::zeros(dim, m);
    for (k, s2) in sigma2.iter().enumerate() {
        for j in 0..m {
            mid[(k, j)] = w[(k, j)] * s2.sqrt();
        }
    }
    Frame::from_synthesis(u * mid, DEFAULT_TOL)
}

/// `phi_i = (1/sqrt m) (w^{ik})_{k < dim}` with `w = exp(2 pi i / m)`.
pub fn harmonic_frame(dim: usize, m: usize) -> Result<Frame> {
    if dim == 0 || m < dim {
        return Err(FrameError::InfeasibleShape(format!(
            "need 1 <= dim <= m, got dim={dim}, m={m}"
        )));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mat = CMatrix::from_fn(dim, m, |k, i| {
        let angle = 2.0 * std::f64::consts::PI * ((i * k) % m) as f64 / m as f64;
        Complex64::from_polar(scale, angle)
    });
    Frame::from_synthesis(mat, DEFAULT_TOL)
}

/// `{S^{-1/2} phi_i}`, the canonical Parseval frame of `frame`.
pub fn parsevalize(frame: &Frame) -> Result<Frame> {
    frame.require_frame()?;
    let root_inv = linalg::hermitian_function(&frame.frame_operator(), |x| 1.0 / x.sqrt());
    frame.apply_operator(&root_inv)
}

/// A seeded Riesz basis with bounds `(lower, upper)`.
pub fn random_riesz_basis(dim: usize, target_bounds: (f64, f64), seed: u64) -> Result<Frame> {
    random_frame(dim, dim, target_bounds, seed)
}
