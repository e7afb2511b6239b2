//! The composite smoothed objective F̃(X, μ) = env_f(BX, μ) + h(X).

use crate::linalg::{all_finite, operator_norm, RealMatrix};
use crate::smoothing::{SmoothTerm, SmoothableConvex};

/// Signed edge-vertex incidence structure: row k of B̃ has +1 at the head
/// of edge k and −1 at its tail (all other entries zero). Applying B̃ to a
/// vertex signal takes head-minus-tail differences along every edge.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    n_vertices: usize,
    rows: Vec<(usize, usize)>, // (tail, head)
}

impl IncidenceMatrix {
    pub fn new(n_vertices: usize, rows: Vec<(usize, usize)>) -> Self {
        assert!(n_vertices >= 2, "incidence needs at least two vertices");
        for &(i, j) in &rows {
            assert!(i < n_vertices && j < n_vertices, "vertex out of range");
            assert_ne!(i, j, "self-loops are not allowed");
        }
        Self { n_vertices, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.n_vertices
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    /// B̃·Z for an N×p signal: row k is Z[head_k,:] − Z[tail_k,:].
    pub fn apply(&self, z: &RealMatrix) -> RealMatrix {
        assert_eq!(z.nrows(), self.n_vertices, "incidence apply: bad shape");
        let mut out = RealMatrix::zeros(self.rows.len(), z.ncols());
        for (k, &(tail, head)) in self.rows.iter().enumerate() {
            for c in 0..z.ncols() {
                out[(k, c)] = z[(head, c)] - z[(tail, c)];
            }
        }
        out
    }

    /// B̃ᵀ·Y: scatter +Y_k to the head row and −Y_k to the tail row.
    pub fn apply_transpose(&self, y: &RealMatrix) -> RealMatrix {
        assert_eq!(y.nrows(), self.rows.len(), "incidence adjoint: bad shape");
        let mut out = RealMatrix::zeros(self.n_vertices, y.ncols());
        for (k, &(tail, head)) in self.rows.iter().enumerate() {
            for c in 0..y.ncols() {
                out[(head, c)] += y[(k, c)];
                out[(tail, c)] -= y[(k, c)];
            }
        }
        out
    }

    pub fn to_dense(&self) -> RealMatrix {
        let mut b = RealMatrix::zeros(self.rows.len(), self.n_vertices);
        for (k, &(tail, head)) in self.rows.iter().enumerate() {
            b[(k, tail)] = -1.0;
            b[(k, head)] = 1.0;
        }
        b
    }
}

/// The linear map B of the composite objective. GFB problems keep the
/// sparse incidence factor alongside the dense complement basis so that
/// B = B̃Ṽ is never materialized.
#[derive(Debug, Clone)]
pub enum LinearMap {
    Identity(usize),
    Dense(RealMatrix),
    IncidenceComposed {
        incidence: IncidenceMatrix,
        basis: RealMatrix,
    },
}

impl LinearMap {
    pub fn input_dim(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense(m) => m.ncols(),
            LinearMap::IncidenceComposed { basis, .. } => basis.ncols(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            LinearMap::Identity(n) => *n,
            LinearMap::Dense(m) => m.nrows(),
            LinearMap::IncidenceComposed { incidence, .. } => incidence.nrows(),
        }
    }

    pub fn apply(&self, x: &RealMatrix) -> RealMatrix {
        assert_eq!(x.nrows(), self.input_dim(), "linear map apply: bad shape");
        match self {
            LinearMap::Identity(_) => x.clone(),
            LinearMap::Dense(m) => m * x,
            LinearMap::IncidenceComposed { incidence, basis } => incidence.apply(&(basis * x)),
        }
    }

    pub fn apply_transpose(&self, y: &RealMatrix) -> RealMatrix {
        assert_eq!(y.nrows(), self.output_dim(), "linear map adjoint: bad shape");
        match self {
            LinearMap::Identity(_) => y.clone(),
            LinearMap::Dense(m) => m.transpose() * y,
            LinearMap::IncidenceComposed { incidence, basis } => {
                basis.transpose() * incidence.apply_transpose(y)
            }
        }
    }

    /// ‖B‖₂ by power iteration (computed once at objective construction).
    pub fn spectral_norm(&self) -> f64 {
        match self {
            LinearMap::Identity(_) => 1.0,
            _ => operator_norm(
                |v| self.apply(v),
                |w| self.apply_transpose(w),
                self.input_dim(),
            ),
        }
    }
}

/// F̃(X, μ) = env_f(BX, μ) + h(X), immutable after construction.
///
/// Construction computes the constants once: L₀ = ‖B‖²₂ (power
/// iteration), κ = ρ²/2 with ρ the Lipschitz constant of f, and the
/// gradient bound C₁ = 2ρ‖B‖₂ + C'_h.
pub struct CompositeObjective {
    f: Box<dyn SmoothableConvex>,
    b: LinearMap,
    h: Box<dyn SmoothTerm>,
    b_norm: f64,
    l0: f64,
}

impl CompositeObjective {
    pub fn new(
        f: Box<dyn SmoothableConvex>,
        b: LinearMap,
        h: Box<dyn SmoothTerm>,
    ) -> Self {
        let (q, _p) = f.shape();
        assert_eq!(
            q,
            b.output_dim(),
            "composite objective: f expects {q} rows but B produces {}",
            b.output_dim()
        );
        let b_norm = b.spectral_norm();
        let l0 = b_norm * b_norm;
        Self { f, b, h, b_norm, l0 }
    }

    /// Rows and columns of the iterate X.
    pub fn dims(&self) -> (usize, usize) {
        (self.b.input_dim(), self.f.shape().1)
    }

    pub fn f(&self) -> &dyn SmoothableConvex {
        self.f.as_ref()
    }

    pub fn linear_map(&self) -> &LinearMap {
        &self.b
    }

    pub fn smooth_term(&self) -> &dyn SmoothTerm {
        self.h.as_ref()
    }

    /// L₀ = ‖B‖²₂.
    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// ‖B‖₂.
    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// κ = ρ²/2, the μ-Lipschitz constant of F̃(X, ·).
    pub fn kappa(&self) -> f64 {
        let rho = self.f.lipschitz_constant();
        rho * rho / 2.0
    }

    /// L_μ = L₀/μ + L_h, the gradient Lipschitz constant at μ.
    pub fn lipschitz_l_mu(&self, mu: f64) -> f64 {
        assert!(mu > 0.0, "lipschitz_l_mu: mu must be positive");
        self.l0 / mu + self.h.gradient_lipschitz()
    }

    /// C₁ = 2ρ‖B‖₂ + C'_h, the uniform gradient-norm bound on S(n,p).
    pub fn gradient_norm_bound(&self) -> f64 {
        2.0 * self.f.lipschitz_constant() * self.b_norm + self.h.gradient_bound()
    }

    /// F̃(X, μ) = env_f(BX, μ) + h(X).
    pub fn value(&self, x: &RealMatrix, mu: f64) -> f64 {
        debug_assert!(all_finite(x), "composite value: non-finite iterate");
        self.f.envelope(&self.b.apply(x), mu) + self.h.value(x)
    }

    /// ∇_X F̃(X, μ) = Bᵀ∇_Z env_f(BX, μ) + ∇h(X).
    pub fn gradient(&self, x: &RealMatrix, mu: f64) -> RealMatrix {
        let env_grad = self.f.envelope_gradient(&self.b.apply(x), mu);
        self.b.apply_transpose(&env_grad) + self.h.gradient(x)
    }

    /// The true nonsmooth objective F(X) = f(BX) + h(X).
    pub fn true_value(&self, x: &RealMatrix) -> f64 {
        self.f.value(&self.b.apply(x)) + self.h.value(x)
    }
}
