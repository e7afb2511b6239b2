//! Stiefel-manifold primitives.
//!
//! The Stiefel manifold S(n,p) is the set of n×p matrices X with
//! orthonormal columns, XᵀX = I_p. This module provides the geometric
//! kernel used by the solvers: tangent projection, nearest-point
//! projection onto the manifold, the polar retraction, the reflection
//! step, stationarity residuals, and seeded random feasible points.
//!
//! All operations are pure functions; feasibility of every returned
//! [`StiefelPoint`] is re-checked rather than trusted, so long runs cannot
//! silently drift off the manifold.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, gaussian_matrix, RealMatrix};

/// Feasibility certificate: ‖XᵀX − I‖_F must not exceed this.
pub const FEASIBILITY_TOL: f64 = 1e-10;
/// Drift beyond this triggers re-projection onto the manifold. Reflection
/// and retraction round-off compounds over thousands of iterations;
/// catching it this early keeps whole traces below 1e-12.
const REPROJECT_DRIFT: f64 = 1e-13;
/// Relative singular-value cutoff for numerical rank decisions.
const RANK_TOL: f64 = 1e-12;

/// A feasible point on S(n,p) with certified near-orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    x: RealMatrix,
}

impl StiefelPoint {
    /// Wraps a matrix after verifying finiteness, shape (p ≤ n) and
    /// feasibility to [`FEASIBILITY_TOL`].
    pub fn new(x: RealMatrix) -> Result<Self> {
        Self::with_tolerance(x, FEASIBILITY_TOL)
    }

    /// Same as [`StiefelPoint::new`] with a caller-chosen tolerance.
    pub fn with_tolerance(x: RealMatrix, tolerance: f64) -> Result<Self> {
        if !all_finite(&x) {
            return Err(Error::NonFinite);
        }
        if x.ncols() > x.nrows() || x.ncols() == 0 {
            return Err(Error::InvalidConfig {
                field: "shape",
                message: format!("need 1 <= p <= n, got {}x{}", x.nrows(), x.ncols()),
            });
        }
        let residual = orth_residual(&x);
        if residual > tolerance {
            return Err(Error::NotFeasible {
                residual,
                tolerance,
            });
        }
        Ok(Self { x })
    }

    /// Wraps the output of a factorization-based step. The residual is
    /// always measured; if round-off drifted past `1e-8` the point is sent
    /// back to the manifold through [`project_stiefel`].
    pub(crate) fn certify(x: RealMatrix) -> Self {
        if orth_residual(&x) > REPROJECT_DRIFT {
            if let Ok(projected) = project_stiefel(&x) {
                return projected;
            }
        }
        Self { x }
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.x
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    /// ‖XᵀX − I_p‖_F.
    pub fn orth_residual(&self) -> f64 {
        orth_residual(&self.x)
    }
}

/// ‖MᵀM − I‖_F for an arbitrary matrix.
pub fn orth_residual(m: &RealMatrix) -> f64 {
    let p = m.ncols();
    (m.transpose() * m - RealMatrix::identity(p, p)).norm()
}

/// Projection of `y` onto the tangent space at `x`:
/// (I − XXᵀ)Y + ½X(XᵀY − YᵀX), rearranged as Y − X·sym(XᵀY).
pub fn tangent_project(x: &StiefelPoint, y: &RealMatrix) -> RealMatrix {
    let xm = x.matrix();
    assert_eq!(
        (xm.nrows(), xm.ncols()),
        (y.nrows(), y.ncols()),
        "tangent_project: shape mismatch"
    );
    let xty = xm.transpose() * y;
    let sym = (&xty + xty.transpose()) * 0.5;
    y - xm * sym
}

/// Nearest Stiefel point to `y` in Frobenius norm, computed as R·I_p·Qᵀ
/// from the singular vectors of `y` (descending singular values).
///
/// Fails when `y` is numerically rank deficient, i.e. the smallest
/// singular value falls below `1e-12` times the largest.
pub fn project_stiefel(y: &RealMatrix) -> Result<StiefelPoint> {
    if !all_finite(y) {
        return Err(Error::NonFinite);
    }
    let svd = y.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin <= RANK_TOL * smax {
        return Err(Error::DegenerateMatrix {
            smallest: smin,
            largest: smax,
            threshold: RANK_TOL,
        });
    }
    let u = svd.u.expect("svd with compute_u");
    let v_t = svd.v_t.expect("svd with compute_v");
    Ok(StiefelPoint { x: u * v_t })
}

/// Polar retraction: Retr_X(ξ) = (X + ξ)(I_p + ξᵀξ)^{-1/2}.
///
/// `xi` must be a tangent vector at `x` (the caller enforces a tangency
/// residual below 1e-8; debug builds check it).
pub fn polar_retract(x: &StiefelPoint, xi: &RealMatrix) -> StiefelPoint {
    let xm = x.matrix();
    assert_eq!(
        (xm.nrows(), xm.ncols()),
        (xi.nrows(), xi.ncols()),
        "polar_retract: shape mismatch"
    );
    debug_assert!(
        {
            let t = xm.transpose() * xi;
            (&t + t.transpose()).norm() <= 1e-8 * (1.0 + xi.norm())
        },
        "polar_retract: xi is not tangent at x"
    );
    let p = xm.ncols();
    let s = RealMatrix::identity(p, p) + xi.transpose() * xi;
    // S is symmetric positive definite (eigenvalues >= 1), so the inverse
    // square root through its eigendecomposition is well conditioned.
    let eig = SymmetricEigen::new(s);
    let inv_sqrt_vals = eig.eigenvalues.map(|l| 1.0 / l.max(1.0).sqrt());
    let inv_sqrt = &eig.eigenvectors
        * RealMatrix::from_diagonal(&inv_sqrt_vals)
        * eig.eigenvectors.transpose();
    StiefelPoint::certify((xm + xi) * inv_sqrt)
}

/// Reflection of `x` through the column span of `u`:
/// (−I_n + 2U(UᵀU)†Uᵀ)X.
///
/// The projector is formed from the singular vectors of `u` with singular
/// values below `1e-12·σ_max` truncated, so rank-deficient `u` is handled
/// without error. The reflector is orthogonal and involutive: applying it
/// twice with the same `u` returns `x`.
pub fn reflect_through_span(u: &RealMatrix, x: &StiefelPoint) -> StiefelPoint {
    let xm = x.matrix();
    assert_eq!(
        (u.nrows(), u.ncols()),
        (xm.nrows(), xm.ncols()),
        "reflect_through_span: shape mismatch"
    );
    let svd = u.clone().svd(true, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        // span(U) = {0}: the reflector is -I.
        return StiefelPoint::certify(-xm);
    }
    let basis = svd.u.expect("svd with compute_u");
    let mut px = RealMatrix::zeros(xm.nrows(), xm.ncols());
    for j in 0..svd.singular_values.len() {
        if svd.singular_values[j] > RANK_TOL * smax {
            let col = basis.column(j);
            let coeff = col.transpose() * xm; // 1×p
            px += col * coeff;
        }
    }
    StiefelPoint::certify(px * 2.0 - xm)
}

/// The two residuals whose joint vanishing characterizes first-order
/// stationarity: (‖(I − XXᵀ)ξ‖_F, ‖Xᵀξ − ξᵀX‖_F).
pub fn stationarity_components(x: &StiefelPoint, xi: &RealMatrix) -> (f64, f64) {
    let xm = x.matrix();
    assert_eq!(
        (xm.nrows(), xm.ncols()),
        (xi.nrows(), xi.ncols()),
        "stationarity_components: shape mismatch"
    );
    let xtxi = xm.transpose() * xi;
    let normal = (xi - xm * &xtxi).norm();
    let skew = (&xtxi - xtxi.transpose()).norm();
    (normal, skew)
}

/// Deterministic random feasible point: thin QR factor of a seeded
/// standard-Gaussian n×p matrix.
pub fn random_stiefel(n: usize, p: usize, seed: u64) -> StiefelPoint {
    assert!(p >= 1 && p <= n, "random_stiefel: need 1 <= p <= n");
    let g = gaussian_matrix(n, p, seed);
    let q = g.qr().q();
    StiefelPoint::certify(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> RealMatrix {
        RealMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn tangent_project_p1_drops_normal_component() {
        let x = StiefelPoint::new(mat(2, 1, &[1.0, 0.0])).unwrap();
        let y = mat(2, 1, &[3.0, 4.0]);
        let p = tangent_project(&x, &y);
        assert_relative_eq!(p[(0, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(p[(1, 0)], 4.0, epsilon = 1e-15);
    }

    #[test]
    fn tangent_project_square_reduces_to_skew_part() {
        let x = StiefelPoint::new(RealMatrix::identity(2, 2)).unwrap();
        let y = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let p = tangent_project(&x, &y);
        let expected = mat(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((p - expected).norm() < 1e-15);
    }

    #[test]
    fn tangent_project_is_tangent_and_idempotent() {
        for seed in 0..100 {
            let x = random_stiefel(8, 3, seed);
            let y = gaussian_matrix(8, 3, 1000 + seed);
            let p = tangent_project(&x, &y);
            let t = x.matrix().transpose() * &p;
            assert!((&t + t.transpose()).norm() <= 1e-12, "tangency, seed {seed}");
            assert!(
                (tangent_project(&x, &p) - &p).norm() <= 1e-12,
                "idempotence, seed {seed}"
            );
        }
    }

    #[test]
    fn project_stiefel_fixes_orthonormal_input() {
        let x = random_stiefel(6, 2, 9);
        let p = project_stiefel(x.matrix()).unwrap();
        assert!((p.matrix() - x.matrix()).norm() < 1e-12);
    }

    #[test]
    fn project_stiefel_diagonal_and_column() {
        let p = project_stiefel(&mat(2, 2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        assert!((p.matrix() - RealMatrix::identity(2, 2)).norm() < 1e-14);

        let p = project_stiefel(&mat(2, 1, &[3.0, 4.0])).unwrap();
        assert_relative_eq!(p.matrix()[(0, 0)], 0.6, epsilon = 1e-14);
        assert_relative_eq!(p.matrix()[(1, 0)], 0.8, epsilon = 1e-14);
    }

    #[test]
    fn project_stiefel_rejects_rank_deficiency() {
        let y = mat(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]); // rank 1
        assert!(matches!(
            project_stiefel(&y),
            Err(Error::DegenerateMatrix { .. })
        ));
    }

    #[test]
    fn polar_retract_identity_at_zero() {
        let x = random_stiefel(5, 2, 3);
        let zero = RealMatrix::zeros(5, 2);
        let r = polar_retract(&x, &zero);
        assert!((r.matrix() - x.matrix()).norm() < 1e-14);
    }

    #[test]
    fn polar_retract_closed_form_2x1() {
        let x = StiefelPoint::new(mat(2, 1, &[1.0, 0.0])).unwrap();
        let xi = mat(2, 1, &[0.0, 1.0]);
        let r = polar_retract(&x, &xi);
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(r.matrix()[(0, 0)], s, epsilon = 1e-14);
        assert_relative_eq!(r.matrix()[(1, 0)], s, epsilon = 1e-14);
    }

    #[test]
    fn polar_retract_stays_feasible() {
        for seed in 0..100 {
            let x = random_stiefel(7, 3, seed);
            let g = gaussian_matrix(7, 3, 500 + seed);
            let mut xi = tangent_project(&x, &g);
            xi *= 0.1 / xi.norm();
            let r = polar_retract(&x, &xi);
            assert!(r.orth_residual() <= 1e-13, "seed {seed}");
        }
    }

    #[test]
    fn polar_retract_first_order_agreement() {
        // ‖Retr_X(tξ) − (X + tξ)‖ = o(t): the ratio to t must vanish.
        let x = random_stiefel(6, 2, 11);
        let g = gaussian_matrix(6, 2, 12);
        let mut xi = tangent_project(&x, &g);
        xi /= xi.norm();
        let mut prev_ratio = f64::INFINITY;
        for &t in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let step = &xi * t;
            let r = polar_retract(&x, &step);
            let ratio = (r.matrix() - (x.matrix() + &step)).norm() / t;
            assert!(ratio < prev_ratio || ratio < 1e-12);
            prev_ratio = ratio;
        }
        assert!(prev_ratio < 1e-3);
    }

    #[test]
    fn reflect_fixes_x_when_u_equals_x() {
        let x = random_stiefel(5, 2, 21);
        let r = reflect_through_span(x.matrix(), &x);
        assert!((r.matrix() - x.matrix()).norm() < 1e-12);
    }

    #[test]
    fn reflect_negates_x_when_span_orthogonal() {
        let u = mat(2, 1, &[1.0, 0.0]);
        let x = StiefelPoint::new(mat(2, 1, &[0.0, 1.0])).unwrap();
        let r = reflect_through_span(&u, &x);
        assert!((r.matrix() + x.matrix()).norm() < 1e-14);
    }

    #[test]
    fn reflect_is_involutive() {
        for seed in 0..100 {
            let x = random_stiefel(6, 3, seed);
            let u = gaussian_matrix(6, 3, 700 + seed);
            let once = reflect_through_span(&u, &x);
            let twice = reflect_through_span(&u, &once);
            assert!(
                (twice.matrix() - x.matrix()).norm() <= 1e-12,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn reflect_handles_rank_deficient_u() {
        let u = mat(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]); // rank 1
        let x = random_stiefel(3, 2, 5);
        let r = reflect_through_span(&u, &x);
        assert!(r.orth_residual() <= 1e-12);
        let back = reflect_through_span(&u, &r);
        assert!((back.matrix() - x.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn stationarity_components_symmetric_and_skew_cases() {
        let x = random_stiefel(6, 3, 31);
        // xi = X·S with S symmetric: both residuals vanish
        let s0 = gaussian_matrix(3, 3, 32);
        let s = (&s0 + s0.transpose()) * 0.5;
        let (a, b) = stationarity_components(&x, &(x.matrix() * &s));
        assert!(a < 1e-12 && b < 1e-12);

        // xi = X·K with K skew: (0, 2‖K‖)
        let k0 = gaussian_matrix(3, 3, 33);
        let k = (&k0 - k0.transpose()) * 0.5;
        let (a, b) = stationarity_components(&x, &(x.matrix() * &k));
        assert!(a < 1e-12);
        assert_relative_eq!(b, 2.0 * k.norm(), max_relative = 1e-12);
    }

    #[test]
    fn projection_norm_decomposition() {
        // ‖Proj_T(ξ)‖² = ‖(I−XXᵀ)ξ‖² + ¼‖Xᵀξ−ξᵀX‖²
        for seed in 0..100 {
            let x = random_stiefel(7, 3, seed);
            let xi = gaussian_matrix(7, 3, 900 + seed);
            let p = tangent_project(&x, &xi);
            let (a, b) = stationarity_components(&x, &xi);
            let lhs = p.norm_squared();
            let rhs = a * a + 0.25 * b * b;
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.max(1.0),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn random_stiefel_is_deterministic_and_feasible() {
        let a = random_stiefel(5, 3, 7);
        let b = random_stiefel(5, 3, 7);
        assert_eq!(a.matrix(), b.matrix());
        assert!(a.orth_residual() <= 1e-13);

        let unit = random_stiefel(1, 1, 123);
        assert_relative_eq!(unit.matrix()[(0, 0)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn stiefel_point_rejects_bad_input() {
        let skewed = mat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            StiefelPoint::new(skewed),
            Err(Error::NotFeasible { .. })
        ));
        let mut nan = RealMatrix::identity(2, 2);
        nan[(0, 0)] = f64::NAN;
        assert!(matches!(StiefelPoint::new(nan), Err(Error::NonFinite)));
    }
}
