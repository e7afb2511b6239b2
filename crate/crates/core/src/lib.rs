//! Smoothing algorithms for nonsmooth, nonconvex optimization over the
//! Stiefel manifold, built around the Moreau envelope.
//!
//! The problem class is
//!
//! ```text
//! min  F(X) = f(BX) + h(X)    subject to  XᵀX = I_p,
//! ```
//!
//! with f convex, nonsmooth and Lipschitz, B a linear map and h smooth.
//! Instead of attacking the kinks directly, f is replaced by its Moreau
//! envelope at a smoothing level μ; the resulting smooth surrogate is
//! minimized over the manifold while a merit test drives μ to zero, so
//! accumulation points are stationary for the original problem. Three
//! solvers are provided: gradient projection with proximal correction
//! (SGPC), gradient reflection with proximal correction (SGRC), and
//! Riemannian gradient descent (SRGD).
//!
//! The bundled application is the graph Fourier basis problem: build an
//! instance from a weighted graph with [`gfb::GfbProblem::assemble`] and
//! run any of the solvers on it.
//!
//! ```
//! use stiefel_smoothing::gfb::{generate_graph, GfbProblem, GraphFamily};
//! use stiefel_smoothing::solver::{solve, Algorithm};
//!
//! let graph = generate_graph(GraphFamily::Path, 8, 0)?;
//! let problem = GfbProblem::assemble(graph)?;
//! let config = problem.solver_config(Algorithm::Sgpc);
//! let report = solve(&problem.objective, &problem.x0, &config)?;
//! assert!(report.orth <= 1e-12);
//! # Ok::<(), stiefel_smoothing::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability; the thin
//! `gfb` binary exposes `solve`, `bench`, `check` and `gen` subcommands
//! over the same machinery.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gfb;
pub mod linalg;
pub mod objective;
pub mod smoothing;
pub mod solver;
pub mod stiefel;

pub use error::{Error, Result};
pub use linalg::RealMatrix;
pub use objective::{CompositeObjective, IncidenceMatrix, LinearMap};
pub use smoothing::{SmoothTerm, SmoothableConvex};
pub use solver::{solve, Algorithm, RunReport, SolverConfig};
pub use stiefel::StiefelPoint;
