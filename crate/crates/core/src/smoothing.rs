//! Moreau-envelope smoothing of nonsmooth convex functions.
//!
//! For a convex, Lipschitz f and μ > 0 the Moreau envelope
//!
//! ```text
//! env_f(Z, μ) = min_Y { f(Y) + ‖Y − Z‖²_F / (2μ) }
//! ```
//!
//! is a smooth under-approximation of f whose gradient
//! (Z − prox_{μf}(Z))/μ is (1/μ)-Lipschitz and uniformly bounded by twice
//! the Lipschitz constant of f. A [`SmoothableConvex`] instance supplies
//! the raw value, the prox and the Lipschitz constant; envelope value and
//! gradient are derived from the prox by default and may be overridden
//! with closed forms (the weighted hinge does).
//!
//! The smooth part h of the objective enters through [`SmoothTerm`].

use crate::linalg::{spectral_norm_dense, RealMatrix};

#[inline]
fn assert_mu(mu: f64) {
    assert!(
        mu > 0.0 && mu.is_finite(),
        "smoothing parameter must be positive and finite, got {mu}"
    );
}

/// A convex, Lipschitz function that knows its own proximal operator.
pub trait SmoothableConvex: Send + Sync {
    /// Lipschitz constant ρ of the function itself.
    fn lipschitz_constant(&self) -> f64;

    /// (rows, cols) of the expected argument.
    fn shape(&self) -> (usize, usize);

    /// The nonsmooth value f(Z).
    fn value(&self, z: &RealMatrix) -> f64;

    /// prox_{μf}(Z) = argmin_Y f(Y) + ‖Y − Z‖²_F/(2μ).
    fn prox(&self, z: &RealMatrix, mu: f64) -> RealMatrix;

    /// env_f(Z, μ), by the generic route f(P) + ‖Z − P‖²/(2μ), P = prox.
    fn envelope(&self, z: &RealMatrix, mu: f64) -> f64 {
        assert_mu(mu);
        let p = self.prox(z, mu);
        self.value(&p) + (z - &p).norm_squared() / (2.0 * mu)
    }

    /// ∇_Z env_f(Z, μ) = (Z − prox_{μf}(Z))/μ.
    fn envelope_gradient(&self, z: &RealMatrix, mu: f64) -> RealMatrix {
        assert_mu(mu);
        (z - self.prox(z, mu)) / mu
    }
}

/// Ψ(Y) = Σ_k w_k Σ_j [Y_{k,j}]_+ with one positive weight per row.
///
/// This is the graph-Fourier-basis objective after the incidence-matrix
/// change of variables; row k carries the weight of edge k.
#[derive(Debug, Clone)]
pub struct WeightedHinge {
    weights: Vec<f64>,
    cols: usize,
}

impl WeightedHinge {
    pub fn new(weights: Vec<f64>, cols: usize) -> Self {
        assert!(!weights.is_empty() && cols >= 1, "empty hinge shape");
        assert!(
            weights.iter().all(|&w| w > 0.0 && w.is_finite()),
            "hinge weights must be strictly positive"
        );
        Self { weights, cols }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_shape(&self, z: &RealMatrix) {
        assert_eq!(
            (z.nrows(), z.ncols()),
            (self.weights.len(), self.cols),
            "weighted hinge: argument shape mismatch"
        );
    }
}

/// Scalar prox of y ↦ w[y]_+ at z.
#[inline]
fn hinge_prox_scalar(z: f64, w: f64, mu: f64) -> f64 {
    if z < 0.0 {
        z
    } else if z >= mu * w {
        z - mu * w
    } else {
        0.0
    }
}

/// Scalar Moreau envelope Φ of y ↦ w[y]_+ at z.
#[inline]
fn hinge_envelope_scalar(z: f64, w: f64, mu: f64) -> f64 {
    if z < 0.0 {
        0.0
    } else if z >= mu * w {
        w * z - mu * w * w / 2.0
    } else {
        z * z / (2.0 * mu)
    }
}

impl SmoothableConvex for WeightedHinge {
    fn lipschitz_constant(&self) -> f64 {
        // Entrywise subgradients lie in [0, w_k], so ρ = ‖w‖₂·√p bounds
        // the Frobenius norm of any subgradient matrix.
        let w2: f64 = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        w2 * (self.cols as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.weights.len(), self.cols)
    }

    fn value(&self, z: &RealMatrix) -> f64 {
        self.check_shape(z);
        psi_value(z, &self.weights)
    }

    fn prox(&self, z: &RealMatrix, mu: f64) -> RealMatrix {
        assert_mu(mu);
        self.check_shape(z);
        RealMatrix::from_fn(z.nrows(), z.ncols(), |i, j| {
            hinge_prox_scalar(z[(i, j)], self.weights[i], mu)
        })
    }

    // Closed form: env_Ψ(Z, μ) = Σ_k Σ_j Φ(Z_{kj}, μ).
    fn envelope(&self, z: &RealMatrix, mu: f64) -> f64 {
        assert_mu(mu);
        self.check_shape(z);
        let mut total = 0.0;
        for i in 0..z.nrows() {
            let w = self.weights[i];
            for j in 0..z.ncols() {
                total += hinge_envelope_scalar(z[(i, j)], w, mu);
            }
        }
        total
    }
}

/// The true nonsmooth objective Σ_k w_k Σ_j [Z_{kj}]_+, used for the
/// reported `Fval` (never the smoothed value).
pub fn psi_value(z: &RealMatrix, weights: &[f64]) -> f64 {
    assert_eq!(z.nrows(), weights.len(), "psi_value: weight length mismatch");
    let mut total = 0.0;
    for i in 0..z.nrows() {
        let mut row = 0.0;
        for j in 0..z.ncols() {
            row += z[(i, j)].max(0.0);
        }
        total += weights[i] * row;
    }
    total
}

/// λ‖Z‖₁ on q×p matrices.
#[derive(Debug, Clone)]
pub struct L1Norm {
    lambda: f64,
    rows: usize,
    cols: usize,
}

impl L1Norm {
    pub fn new(lambda: f64, rows: usize, cols: usize) -> Self {
        assert!(lambda > 0.0 && lambda.is_finite(), "lambda must be positive");
        assert!(rows >= 1 && cols >= 1, "empty l1 shape");
        Self { lambda, rows, cols }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Entrywise soft threshold: sign(z)·max(|z| − λμ, 0).
pub fn prox_l1(z: &RealMatrix, lambda: f64, mu: f64) -> RealMatrix {
    assert!(lambda > 0.0, "lambda must be positive");
    assert_mu(mu);
    let t = lambda * mu;
    z.map(|v| v.signum() * (v.abs() - t).max(0.0))
}

impl SmoothableConvex for L1Norm {
    fn lipschitz_constant(&self) -> f64 {
        self.lambda * ((self.rows * self.cols) as f64).sqrt()
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn value(&self, z: &RealMatrix) -> f64 {
        self.lambda * z.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, z: &RealMatrix, mu: f64) -> RealMatrix {
        prox_l1(z, self.lambda, mu)
    }
}

/// The smooth term h of the composite objective.
pub trait SmoothTerm: Send + Sync {
    fn value(&self, x: &RealMatrix) -> f64;
    fn gradient(&self, x: &RealMatrix) -> RealMatrix;
    /// Lipschitz constant of ∇h.
    fn gradient_lipschitz(&self) -> f64;
    /// An upper bound on ‖∇h(X)‖_F over the Stiefel manifold (C'_h).
    fn gradient_bound(&self) -> f64;
}

/// h ≡ 0.
#[derive(Debug, Clone)]
pub struct ZeroSmooth {
    rows: usize,
    cols: usize,
}

impl ZeroSmooth {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }
}

impl SmoothTerm for ZeroSmooth {
    fn value(&self, _x: &RealMatrix) -> f64 {
        0.0
    }

    fn gradient(&self, _x: &RealMatrix) -> RealMatrix {
        RealMatrix::zeros(self.rows, self.cols)
    }

    fn gradient_lipschitz(&self) -> f64 {
        0.0
    }

    fn gradient_bound(&self) -> f64 {
        0.0
    }
}

/// h(X) = −tr(Xᵀ AᵀA X), the negative explained variance of sparse PCA.
///
/// ∇h(X) = −2·AᵀA·X, so L_h = 2‖AᵀA‖₂ and the gradient norm over the
/// Stiefel manifold is bounded by 2‖AᵀA‖₂·√p.
#[derive(Debug, Clone)]
pub struct NegativeVariance {
    gram: RealMatrix,
    gram_norm: f64,
    cols: usize,
}

impl NegativeVariance {
    /// Builds the term from an m×n data matrix `a` for n×p iterates.
    pub fn from_data(a: &RealMatrix, p: usize) -> Self {
        assert!(p >= 1 && p <= a.ncols(), "need 1 <= p <= n");
        let gram = a.transpose() * a;
        let gram_norm = spectral_norm_dense(&gram);
        Self {
            gram,
            gram_norm,
            cols: p,
        }
    }
}

impl SmoothTerm for NegativeVariance {
    fn value(&self, x: &RealMatrix) -> f64 {
        -(&self.gram * x).dot(x)
    }

    fn gradient(&self, x: &RealMatrix) -> RealMatrix {
        &self.gram * x * (-2.0)
    }

    fn gradient_lipschitz(&self) -> f64 {
        2.0 * self.gram_norm
    }

    fn gradient_bound(&self) -> f64 {
        2.0 * self.gram_norm * (self.cols as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> RealMatrix {
        RealMatrix::from_element(1, 1, v)
    }

    #[test]
    fn hinge_prox_branches() {
        let f = WeightedHinge::new(vec![1.0], 1);
        // identity on negatives
        assert_relative_eq!(f.prox(&scalar(-0.3), 0.1)[(0, 0)], -0.3);
        // shrink by mu*w above the threshold
        assert_relative_eq!(f.prox(&scalar(0.5), 0.1)[(0, 0)], 0.4);
        // collapse to zero inside [0, mu*w)
        let f2 = WeightedHinge::new(vec![2.0], 1);
        assert_relative_eq!(f2.prox(&scalar(0.1), 0.1)[(0, 0)], 0.0);
    }

    #[test]
    fn hinge_envelope_branches() {
        let f = WeightedHinge::new(vec![1.0], 1);
        assert_relative_eq!(f.envelope(&scalar(-2.0), 0.1), 0.0);
        // saturated branch: w z − μ w²/2
        assert_relative_eq!(f.envelope(&scalar(0.5), 0.1), 0.45, epsilon = 1e-15);
        // quadratic branch: z²/(2μ)
        assert_relative_eq!(f.envelope(&scalar(0.05), 0.1), 0.0125, epsilon = 1e-15);
    }

    #[test]
    fn hinge_envelope_gradient_branches() {
        let f = WeightedHinge::new(vec![1.0], 1);
        assert_relative_eq!(f.envelope_gradient(&scalar(-0.3), 0.1)[(0, 0)], 0.0);
        assert_relative_eq!(f.envelope_gradient(&scalar(0.5), 0.1)[(0, 0)], 1.0);
        assert_relative_eq!(f.envelope_gradient(&scalar(0.05), 0.1)[(0, 0)], 0.5);
    }

    #[test]
    fn closed_form_envelope_matches_generic_route() {
        // exercise all three branches on seeded scalars
        let mut worst: f64 = 0.0;
        for seed in 0..1000u64 {
            let g = gaussian_matrix(3, 1, seed);
            let z = scalar(g[(0, 0)]);
            let w = 0.1 + 4.9 * (g[(1, 0)].abs() % 1.0);
            let mu = 1e-3 + 0.999 * (g[(2, 0)].abs() % 1.0);
            let f = WeightedHinge::new(vec![w], 1);
            let closed = f.envelope(&z, mu);
            let p = f.prox(&z, mu);
            let generic = f.value(&p) + (&z - &p).norm_squared() / (2.0 * mu);
            worst = worst.max((closed - generic).abs());
        }
        assert!(worst <= 1e-12, "worst gap {worst}");
    }

    #[test]
    fn envelope_below_value_and_sandwich() {
        let f = WeightedHinge::new(vec![1.5, 0.7, 2.0], 4);
        let rho = f.lipschitz_constant();
        for seed in 0..50 {
            let z = gaussian_matrix(3, 4, seed);
            let (mu1, mu2) = (0.2, 0.1);
            let e1 = f.envelope(&z, mu1);
            let e2 = f.envelope(&z, mu2);
            assert!(e1 <= f.value(&z) + 1e-10);
            assert!(e2 <= f.value(&z) + 1e-10);
            assert!(e1 <= e2 + 1e-10, "monotone in mu");
            assert!(e2 <= e1 + (mu1 - mu2) * rho * rho / 2.0 + 1e-10, "sandwich");
        }
    }

    #[test]
    fn envelope_gradient_norm_bounded_by_two_rho() {
        let f = WeightedHinge::new(vec![0.4, 1.0, 3.0], 2);
        let rho = f.lipschitz_constant();
        for seed in 0..50 {
            let z = gaussian_matrix(3, 2, seed) * 10.0;
            for &mu in &[1e-3, 0.1, 1.0] {
                assert!(f.envelope_gradient(&z, mu).norm() <= 2.0 * rho + 1e-10);
            }
        }
    }

    #[test]
    fn prox_is_nonexpansive() {
        let f = WeightedHinge::new(vec![1.0, 2.5], 3);
        let l1 = L1Norm::new(0.8, 2, 3);
        for seed in 0..50 {
            let a = gaussian_matrix(2, 3, seed);
            let b = gaussian_matrix(2, 3, seed + 100);
            for &mu in &[0.01, 0.3] {
                let d = (&a - &b).norm();
                assert!((f.prox(&a, mu) - f.prox(&b, mu)).norm() <= d + 1e-12);
                assert!((l1.prox(&a, mu) - l1.prox(&b, mu)).norm() <= d + 1e-12);
            }
        }
    }

    #[test]
    fn hinge_gradient_consistent_at_the_kink() {
        // As (z, μ) → (0, 0) the envelope gradient must land in [0, 1],
        // the subdifferential of [·]_+ at 0.
        let f = WeightedHinge::new(vec![1.0], 1);
        for i in 1..40 {
            let t = 0.5_f64.powi(i);
            for &z in &[-t, 0.0, t, t / 3.0] {
                let g = f.envelope_gradient(&scalar(z), t)[(0, 0)];
                assert!((-1e-9..=1.0 + 1e-9).contains(&g), "z={z} mu={t} g={g}");
            }
        }
    }

    #[test]
    fn psi_value_cases() {
        let z = RealMatrix::from_row_slice(1, 1, &[2.0]);
        assert_relative_eq!(psi_value(&z, &[3.0]), 6.0);
        let z = RealMatrix::from_row_slice(2, 2, &[-1.0, -0.5, -2.0, -0.1]);
        assert_relative_eq!(psi_value(&z, &[1.0, 4.0]), 0.0);
    }

    #[test]
    fn l1_prox_cases() {
        assert_relative_eq!(prox_l1(&scalar(0.0), 1.0, 0.1)[(0, 0)], 0.0);
        assert_relative_eq!(prox_l1(&scalar(0.5), 1.0, 0.1)[(0, 0)], 0.4);
        assert_relative_eq!(prox_l1(&scalar(-0.05), 1.0, 0.1)[(0, 0)], 0.0);
        assert_relative_eq!(prox_l1(&scalar(-0.5), 1.0, 0.1)[(0, 0)], -0.4);
    }

    #[test]
    fn l1_envelope_vanishes_for_large_mu() {
        let f = L1Norm::new(1.0, 2, 2);
        let z = gaussian_matrix(2, 2, 4);
        let mut prev = f64::INFINITY;
        for &mu in &[1.0, 10.0, 100.0, 1000.0] {
            let e = f.envelope(&z, mu);
            assert!(e <= prev + 1e-12);
            prev = e;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn negative_variance_gradient_matches_finite_differences() {
        let a = gaussian_matrix(6, 4, 17);
        let h = NegativeVariance::from_data(&a, 2);
        let x = gaussian_matrix(4, 2, 18);
        let g = h.gradient(&x);
        let step = 1e-6;
        for i in 0..4 {
            for j in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[(i, j)] += step;
                xm[(i, j)] -= step;
                let fd = (h.value(&xp) - h.value(&xm)) / (2.0 * step);
                assert_relative_eq!(g[(i, j)], fd, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }
}
