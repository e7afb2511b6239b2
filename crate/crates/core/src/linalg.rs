//! Dense double-precision matrices and small numeric utilities.
//!
//! `RealMatrix` is the carrier type for everything in this crate: iterates,
//! gradients, linear maps, recovered bases. It is a plain [`nalgebra`]
//! dynamic matrix; no public operation admits NaN or infinity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type RealMatrix = DMatrix<f64>;

/// True iff every entry is finite.
pub fn all_finite(m: &RealMatrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Seeded standard-Gaussian matrix, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = RealMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Relative tolerance for the power-iteration 2-norm estimate.
pub const OPERATOR_NORM_TOL: f64 = 1e-10;
/// Iteration cap for the power-iteration 2-norm estimate.
pub const OPERATOR_NORM_MAX_ITER: usize = 500;

/// Spectral norm of a linear operator A given through `apply` (A·v) and
/// `adjoint` (Aᵀ·w), by power iteration on AᵀA.
///
/// The starting vector is drawn from a fixed seed so the estimate is
/// reproducible. Converges to relative tolerance [`OPERATOR_NORM_TOL`] or
/// stops after [`OPERATOR_NORM_MAX_ITER`] iterations, whichever first.
pub fn operator_norm<F, G>(apply: F, adjoint: G, input_dim: usize) -> f64
where
    F: Fn(&RealMatrix) -> RealMatrix,
    G: Fn(&RealMatrix) -> RealMatrix,
{
    assert!(input_dim > 0, "operator must have a nonempty domain");
    let mut v = gaussian_matrix(input_dim, 1, 0x5eed);
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..OPERATOR_NORM_MAX_ITER {
        let w = adjoint(&apply(&v));
        let lambda_next = v.dot(&w); // Rayleigh quotient for AᵀA
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return 0.0;
        }
        v = w / w_norm;
        if (lambda_next - lambda).abs() <= OPERATOR_NORM_TOL * lambda_next.max(1.0) {
            return lambda_next.max(0.0).sqrt();
        }
        lambda = lambda_next;
    }
    lambda.max(0.0).sqrt()
}

/// Spectral norm of a dense matrix.
pub fn spectral_norm_dense(m: &RealMatrix) -> f64 {
    operator_norm(|v| m * v, |w| m.transpose() * w, m.ncols())
}
