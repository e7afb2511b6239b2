//! The three smoothing algorithms over the Stiefel manifold.
//!
//! SGPC and SGRC share one outer loop: a monotone line search on the
//! smoothed objective (projection or reflection step), a proximal
//! correction, and the smoothing-parameter update. SRGD runs Riemannian
//! gradient descent with backtracking and the same μ-update. In every
//! case the smoothing parameter is kept while the merit value
//! F̃(X_{k+1}, μ_k) + κμ_k decreases by at least αμ_k², and is otherwise
//! reset to μ₀/(k+1)^σ.
//!
//! Iterates never leave the manifold: projection, reflection, the polar
//! retraction and the correction factor are all orthogonal-factor
//! constructions, and feasibility is re-measured after each one.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::objective::CompositeObjective;
use crate::stiefel::{
    polar_retract, project_stiefel, reflect_through_span, stationarity_components,
    tangent_project, StiefelPoint,
};

/// Entrywise magnitude below which the correction matrix Z_k counts as zero.
const CORRECTION_ZERO_TOL: f64 = 1e-14;
/// Growth factor for the adaptive initial stepsize of SRGD.
const ADAPTIVE_GROWTH: f64 = 1.01;

/// Absolute slack for sufficient-decrease comparisons, scaled to the
/// floating-point resolution of the objective values being compared.
/// Without it, steps whose true decrease is zero (a reflection with
/// full-rank square target is the identity) backtrack forever on rounding
/// noise.
#[inline]
fn value_slack(f: f64) -> f64 {
    32.0 * f64::EPSILON * (1.0 + f.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sgpc,
    Sgrc,
    Srgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sgpc, Algorithm::Sgrc, Algorithm::Srgd];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sgpc => "sgpc",
            Algorithm::Sgrc => "sgrc",
            Algorithm::Srgd => "srgd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgpc" => Ok(Algorithm::Sgpc),
            "sgrc" => Ok(Algorithm::Sgrc),
            "srgd" => Ok(Algorithm::Srgd),
            other => Err(Error::InvalidConfig {
                field: "algorithm",
                message: format!("unknown algorithm `{other}` (expected sgpc, sgrc or srgd)"),
            }),
        }
    }
}

/// Full parameter set for one run. [`SolverConfig::table_defaults`]
/// reproduces the experimental protocol: μ₀ = 0.1, σ = 0.8, η = 0.5,
/// α = 10⁻⁵·q, and per-algorithm stopping tolerances scaled by the
/// iterate dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Initial smoothing parameter μ₀ (also μ₋₁).
    pub mu0: f64,
    /// Exponent of the μ-reset schedule μ₀/(k+1)^σ, in (0,1).
    pub sigma: f64,
    /// Merit-decrease coefficient in the μ-update test.
    pub alpha: f64,
    /// Overrides κ = ρ²/2 when the default bound is too loose.
    pub kappa_override: Option<f64>,
    /// Sufficient-decrease coefficient ε of the SGPC/SGRC test.
    pub epsilon: f64,
    /// Stepsize range ratio c > 1: τ̄ = c·τ̲.
    pub c: f64,
    /// Backtracking shrink factor η in (0,1).
    pub eta: f64,
    /// Scale of the proximal-correction shift: the matrix Z_k uses
    /// γ·L_μ (lifted further when the multiplier spectrum is larger).
    /// A fixed shift cannot work across the μ-schedule: the gradient
    /// scale it must dominate grows as μ shrinks.
    pub gamma: f64,
    /// Stop when ‖X_{k+1} − X_k‖_F < tol1 …
    pub tol1: f64,
    /// … and αμ_k < tol2 (both strict).
    pub tol2: f64,
    pub max_iter: usize,
    pub max_linesearch: usize,
    /// SRGD only: reuse the previous accepted stepsize (grown by 1.01
    /// after a backtrack-free iteration) instead of 1/L_μ while μ is
    /// unchanged.
    pub adaptive_init_step: bool,
    pub seed: u64,
}

impl SolverConfig {
    /// Protocol defaults for an iterate of size p columns and a nonsmooth
    /// argument with q rows.
    pub fn table_defaults(algorithm: Algorithm, p: usize, q: usize) -> Self {
        let pf = p as f64;
        let (tol1, tol2) = match algorithm {
            Algorithm::Sgpc => (1e-6 * pf.sqrt(), 1e-7 * pf),
            Algorithm::Sgrc => (2e-5 * pf.sqrt(), 3e-8 * pf),
            Algorithm::Srgd => (1e-6 * pf.sqrt(), 1e-8 * pf),
        };
        Self {
            algorithm,
            mu0: 0.1,
            sigma: 0.8,
            alpha: 1e-5 * q as f64,
            kappa_override: None,
            epsilon: 1e-3,
            c: 1e8,
            eta: 0.5,
            gamma: 0.25,
            tol1,
            tol2,
            max_iter: 10_000,
            max_linesearch: 50,
            adaptive_init_step: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, message: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field,
                    message: message.to_string(),
                })
            }
        }
        check(self.mu0 > 0.0 && self.mu0.is_finite(), "mu0", "must be positive")?;
        check(
            self.sigma > 0.0 && self.sigma < 1.0,
            "sigma",
            "must lie in (0, 1)",
        )?;
        check(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", "must be positive")?;
        if let Some(k) = self.kappa_override {
            check(k > 0.0 && k.is_finite(), "kappa_override", "must be positive")?;
        }
        check(self.epsilon > 0.0, "epsilon", "must be positive")?;
        check(self.c > 1.0, "c", "must exceed 1")?;
        check(self.eta > 0.0 && self.eta < 1.0, "eta", "must lie in (0, 1)")?;
        check(self.gamma > 0.0, "gamma", "must be positive")?;
        check(self.tol1 > 0.0, "tol1", "must be positive")?;
        check(self.tol2 > 0.0, "tol2", "must be positive")?;
        check(self.max_iter >= 1, "max_iter", "must be at least 1")?;
        check(self.max_linesearch >= 1, "max_linesearch", "must be at least 1")?;
        Ok(())
    }
}

/// Barzilai–Borwein stepsize, clamped to [τ̲, c·τ̲] with
/// τ̲ = 1/((1+ε)L_μ). Both gradients must be evaluated at the current μ.
/// A vanishing curvature term yields τ̄; a negative one clamps to τ̲.
pub fn bb_stepsize(
    x_k: &RealMatrix,
    x_prev: &RealMatrix,
    g_k: &RealMatrix,
    g_prev: &RealMatrix,
    l_mu: f64,
    epsilon: f64,
    c: f64,
) -> f64 {
    let tau_lo = 1.0 / ((1.0 + epsilon) * l_mu);
    let tau_hi = c * tau_lo;
    let dx = x_k - x_prev;
    let curvature = dx.dot(&(g_k - g_prev));
    if curvature == 0.0 {
        tau_hi
    } else {
        (dx.norm_squared() / curvature).min(tau_hi).max(tau_lo)
    }
}

/// μ-update of the smoothing schedule: keep μ_k while the merit value
/// F̃(X_{k+1}, μ_k) + κμ_k drops by at least αμ_k² below
/// F̃(X_k, μ_{k−1}) + κμ_{k−1}; otherwise reset to μ₀/(k+1)^σ.
#[allow(clippy::too_many_arguments)]
pub fn mu_update(
    k: usize,
    mu_k: f64,
    mu_prev: f64,
    f_next: f64,
    f_prev: f64,
    kappa: f64,
    alpha: f64,
    mu0: f64,
    sigma: f64,
) -> f64 {
    let sufficient = f_next + kappa * mu_k - f_prev - kappa * mu_prev <= -alpha * mu_k * mu_k;
    if sufficient {
        mu_k
    } else {
        mu0 / ((k + 1) as f64).powf(sigma)
    }
}

/// Stopping rule: ‖X_{k+1} − X_k‖_F < tol1 and αμ_k < tol2, both strict.
pub fn terminated(step_norm: f64, mu: f64, alpha: f64, tol1: f64, tol2: f64) -> bool {
    step_norm < tol1 && alpha * mu < tol2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Tolerance,
    MaxIterations,
}

impl TerminationReason {
    pub fn name(&self) -> &'static str {
        match self {
            TerminationReason::Tolerance => "tolerance",
            TerminationReason::MaxIterations => "max_iter",
        }
    }
}

/// Constants fixed at the start of a run and used as runtime diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticConstants {
    /// C₁ = 2L_f‖B‖₂ + C'_h, the uniform gradient-norm bound.
    pub c1: f64,
    /// L₀ = ‖B‖²₂.
    pub l0: f64,
    /// κ actually used by the run.
    pub kappa: f64,
    /// Line-search trial cap ⌈log(1/c)/log η⌉ + 1 for SGPC/SGRC.
    pub linesearch_cap_alg1: usize,
    /// Line-search trial cap for SRGD started at 1/L_μ, with the polar
    /// retraction constants M₁ = M₂ = 1.
    pub linesearch_cap_srgd: usize,
}

impl DiagnosticConstants {
    pub fn compute(obj: &CompositeObjective, cfg: &SolverConfig) -> Self {
        let c1 = obj.gradient_norm_bound();
        let l0 = obj.l0();
        let kappa = cfg.kappa_override.unwrap_or_else(|| obj.kappa());
        let cap_alg1 = ((1.0 / cfg.c).ln() / cfg.eta.ln()).ceil() as usize + 1;
        let l_h = obj.smooth_term().gradient_lipschitz();
        let cap_srgd = if l0 > 0.0 {
            let denom = l0 + 2.0 * c1 * cfg.mu0 + l_h * cfg.mu0;
            let t = ((l0.ln() - denom.ln()) / cfg.eta.ln()).ceil() as isize + 1;
            t.max(1) as usize
        } else {
            1
        };
        Self {
            c1,
            l0,
            kappa,
            linesearch_cap_alg1: cap_alg1,
            linesearch_cap_srgd: cap_srgd,
        }
    }
}

/// Telemetry for one outer iteration k.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// μ_k, the smoothing parameter used by this iteration.
    pub mu: f64,
    /// Accepted stepsize τ_k.
    pub tau: f64,
    /// F̃(X_{k+1}, μ_k).
    pub smoothed_value: f64,
    /// F(X_{k+1}), the true nonsmooth objective.
    pub true_value: f64,
    /// ‖X_{k+1}ᵀX_{k+1} − I‖_F.
    pub orth_residual: f64,
    /// ‖(I − XXᵀ)ξ‖_F with ξ = ∇F̃(X_{k+1}, μ_k).
    pub normal_residual: f64,
    /// ‖Xᵀξ − ξᵀX‖_F for the same ξ.
    pub skew_residual: f64,
    /// Number of sufficient-decrease trials (1 = accepted immediately).
    pub linesearch_count: usize,
    /// Membership of k in the update set: μ_{k+1} ≠ μ_k.
    pub mu_updated: bool,
    /// ‖X_{k+1} − X_k‖_F.
    pub step_norm: f64,
    /// ‖∇F̃(X_k, μ_k)‖_F.
    pub gradient_norm: f64,
    /// F̃(X_k, μ_k) − F̃(X̄_k, μ_k) achieved by the accepted trial
    /// (for SRGD, X̄_k is X_{k+1}).
    pub accepted_decrease: f64,
    /// The sufficient-decrease threshold of the accepted trial.
    pub required_decrease: f64,
    /// SGPC/SGRC: F̃(X̄_k, μ_k) − F̃(X_{k+1}, μ_k) across the correction.
    pub correction_decrease: f64,
    /// SGPC/SGRC: (εL_μ/2)‖X̄_k − X_{k+1}‖²_F.
    pub correction_required: f64,
}

/// Outcome of a full run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub final_point: StiefelPoint,
    /// True nonsmooth objective at the final point.
    pub fval: f64,
    /// Orthogonality residual at the final point.
    pub orth: f64,
    pub iterations: usize,
    pub wall_time: Duration,
    pub trace: Vec<IterationRecord>,
    pub termination: TerminationReason,
    pub constants: DiagnosticConstants,
}

struct Reduction {
    xbar: StiefelPoint,
    f_bar: f64,
    tau: f64,
    trials: usize,
    accepted_decrease: f64,
    required_decrease: f64,
}

/// SGPC/SGRC function-value reduction: backtrack τ by η until the trial
/// point satisfies F̃(X̄, μ) ≤ F̃(X, μ) − (εL_μ/2)‖X̄ − X‖²_F.
#[allow(clippy::too_many_arguments)]
fn reduction_step(
    algorithm: Algorithm,
    obj: &CompositeObjective,
    x: &StiefelPoint,
    grad: &RealMatrix,
    f_base: f64,
    mu: f64,
    l_mu: f64,
    tau_init: f64,
    cfg: &SolverConfig,
    k: usize,
) -> Result<Reduction> {
    let mut tau = tau_init;
    let slack = value_slack(f_base);
    for trial in 1..=cfg.max_linesearch {
        let target = x.matrix() - grad * tau;
        let xbar = match algorithm {
            Algorithm::Sgpc => match project_stiefel(&target) {
                Ok(p) => p,
                // A rank-deficient trial target cannot be projected;
                // shrink the step and retry.
                Err(_) => {
                    tau *= cfg.eta;
                    continue;
                }
            },
            Algorithm::Sgrc => reflect_through_span(&target, x),
            Algorithm::Srgd => unreachable!("reduction_step is for SGPC/SGRC"),
        };
        debug_assert!(
            (xbar.matrix() - &target).norm() <= tau * grad.norm() * (1.0 + 1e-9) + 1e-12,
            "trial point left the ball around the gradient target"
        );
        let f_bar = obj.value(xbar.matrix(), mu);
        let required = 0.5 * cfg.epsilon * l_mu * (xbar.matrix() - x.matrix()).norm_squared();
        if f_bar - f_base <= -required + slack {
            return Ok(Reduction {
                xbar,
                f_bar,
                tau,
                trials: trial,
                accepted_decrease: f_base - f_bar,
                required_decrease: required,
            });
        }
        tau *= cfg.eta;
    }
    Err(Error::LineSearchExhausted {
        iteration: k,
        budget: cfg.max_linesearch,
    })
}

/// Proximal correction X_{k+1} = −X̄·Proj_{S(p,p)}(Z) with
/// Z = X̄ᵀ∇F̃(X̄, μ) − γI, or X̄ itself when Z vanishes. If Z is
/// numerically singular the correction is skipped.
///
/// γ must strictly dominate the spectrum of the symmetric multiplier part
/// of X̄ᵀ∇F̃: the polar factor is then a small rotation damping the skew
/// part (the stationarity defect), never a sign flip, and the step
/// decreases the objective. The caller passes a γ floor already scaled to
/// L_μ; the spectral guard lifts it when the multipliers are larger.
pub fn proximal_correction(
    obj: &CompositeObjective,
    xbar: &StiefelPoint,
    mu: f64,
    gamma_floor: f64,
) -> StiefelPoint {
    assert!(gamma_floor > 0.0, "gamma must be positive");
    let gbar = obj.gradient(xbar.matrix(), mu);
    let p = xbar.ncols();
    let multiplier = xbar.matrix().transpose() * gbar;
    let sym = (&multiplier + multiplier.transpose()) * 0.5;
    let lambda_max = nalgebra::SymmetricEigen::new(sym).eigenvalues.max();
    let gamma = gamma_floor.max(1.001 * lambda_max.max(0.0) + CORRECTION_ZERO_TOL);
    let z = multiplier - RealMatrix::identity(p, p) * gamma;
    if z.amax() <= CORRECTION_ZERO_TOL {
        return xbar.clone();
    }
    match project_stiefel(&z) {
        Ok(q) => StiefelPoint::certify(-(xbar.matrix() * q.matrix())),
        Err(_) => {
            log::warn!("proximal correction skipped: Z_k numerically rank deficient");
            xbar.clone()
        }
    }
}

/// SRGD reduction: retract −τV_k and backtrack until
/// F̃(Retr_X(−τV), μ) ≤ F̃(X, μ) − (τ/2)‖V‖²_F.
#[allow(clippy::too_many_arguments)]
fn srgd_step(
    obj: &CompositeObjective,
    x: &StiefelPoint,
    v: &RealMatrix,
    f_base: f64,
    mu: f64,
    tau_init: f64,
    cfg: &SolverConfig,
    k: usize,
) -> Result<Reduction> {
    let mut tau = tau_init;
    let v_norm_sq = v.norm_squared();
    let slack = value_slack(f_base);
    for trial in 1..=cfg.max_linesearch {
        let cand = polar_retract(x, &(v * (-tau)));
        let f_cand = obj.value(cand.matrix(), mu);
        let required = 0.5 * tau * v_norm_sq;
        if f_cand - f_base <= -required + slack {
            return Ok(Reduction {
                xbar: cand,
                f_bar: f_cand,
                tau,
                trials: trial,
                accepted_decrease: f_base - f_cand,
                required_decrease: required,
            });
        }
        tau *= cfg.eta;
    }
    Err(Error::LineSearchExhausted {
        iteration: k,
        budget: cfg.max_linesearch,
    })
}

/// Runs the configured algorithm from `x0` and returns the full report.
/// Deterministic for fixed (objective, start point, configuration).
pub fn solve(
    obj: &CompositeObjective,
    x0: &StiefelPoint,
    cfg: &SolverConfig,
) -> Result<RunReport> {
    cfg.validate()?;
    let (n, p) = obj.dims();
    if (x0.nrows(), x0.ncols()) != (n, p) {
        return Err(Error::InvalidConfig {
            field: "x0",
            message: format!(
                "starting point is {}x{} but the objective needs {}x{}",
                x0.nrows(),
                x0.ncols(),
                n,
                p
            ),
        });
    }
    let constants = DiagnosticConstants::compute(obj, cfg);
    let kappa = constants.kappa;

    let start = Instant::now();
    let mut x = x0.clone();
    let mut mu = cfg.mu0;
    // μ₋₁ = μ₀ and the merit baseline F̃(X₀, μ₋₁).
    let mut merit_mu_prev = cfg.mu0;
    let mut merit_value_prev = obj.value(x.matrix(), mu);
    // Value/gradient caches, valid only while μ is unchanged.
    let mut cached_value: Option<f64> = Some(merit_value_prev);
    let mut cached_grad: Option<RealMatrix> = None;
    // Previous iterate and its gradient (tagged with the μ it was
    // evaluated at) for the BB stepsize.
    let mut bb_prev: Option<(RealMatrix, RealMatrix, f64)> = None;
    // SRGD adaptive stepsize state: accepted τ and trial count of the
    // previous iteration, valid while μ is unchanged.
    let mut srgd_prev: Option<(f64, usize)> = None;

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut termination = TerminationReason::MaxIterations;

    for k in 0..cfg.max_iter {
        let l_mu = obj.lipschitz_l_mu(mu);
        let f_base = cached_value.unwrap_or_else(|| obj.value(x.matrix(), mu));
        let grad = cached_grad
            .take()
            .unwrap_or_else(|| obj.gradient(x.matrix(), mu));
        let gradient_norm = grad.norm();

        let (reduction, x_next, f_next, correction_decrease, correction_required) =
            match cfg.algorithm {
                Algorithm::Sgpc | Algorithm::Sgrc => {
                    let tau_init = match &bb_prev {
                        None => 1.0,
                        Some((x_prev, g_prev, g_mu)) => {
                            let fresh;
                            let g_prev_at_mu = if *g_mu == mu {
                                g_prev
                            } else {
                                fresh = obj.gradient(x_prev, mu);
                                &fresh
                            };
                            bb_stepsize(
                                x.matrix(),
                                x_prev,
                                &grad,
                                g_prev_at_mu,
                                l_mu,
                                cfg.epsilon,
                                cfg.c,
                            )
                        }
                    };
                    let red =
                        reduction_step(cfg.algorithm, obj, &x, &grad, f_base, mu, l_mu, tau_init, cfg, k)?;
                    let corrected = proximal_correction(obj, &red.xbar, mu, cfg.gamma * l_mu);
                    let (x_next, f_next, corr_dec, corr_req) =
                        if corrected.matrix() == red.xbar.matrix() {
                            (corrected, red.f_bar, 0.0, 0.0)
                        } else {
                            let f_corr = obj.value(corrected.matrix(), mu);
                            let req = 0.5
                                * cfg.epsilon
                                * l_mu
                                * (red.xbar.matrix() - corrected.matrix()).norm_squared();
                            if red.f_bar - f_corr >= req - value_slack(red.f_bar) {
                                (corrected, f_corr, red.f_bar - f_corr, req)
                            } else {
                                // Correction failed its own decrease
                                // requirement at this γ; keep the reduced
                                // point so the smoothed objective stays
                                // monotone at fixed μ.
                                (red.xbar.clone(), red.f_bar, 0.0, 0.0)
                            }
                        };
                    (red, x_next, f_next, corr_dec, corr_req)
                }
                Algorithm::Srgd => {
                    let v = tangent_project(&x, &grad);
                    debug_assert!(
                        {
                            let t = x.matrix().transpose() * &v;
                            (&t + t.transpose()).norm() <= 1e-10 * (1.0 + v.norm())
                        },
                        "Riemannian gradient left the tangent space"
                    );
                    let tau_init = match srgd_prev {
                        Some((tau, trials)) if cfg.adaptive_init_step => {
                            let grown = if trials == 1 { tau * ADAPTIVE_GROWTH } else { tau };
                            grown.min(cfg.c / l_mu)
                        }
                        _ => 1.0 / l_mu,
                    };
                    let red = srgd_step(obj, &x, &v, f_base, mu, tau_init, cfg, k)?;
                    let x_next = red.xbar.clone();
                    let f_next = red.f_bar;
                    (red, x_next, f_next, 0.0, 0.0)
                }
            };

        let true_value = obj.true_value(x_next.matrix());
        let g_next = obj.gradient(x_next.matrix(), mu);
        let (normal_residual, skew_residual) = stationarity_components(&x_next, &g_next);
        let step_norm = (x_next.matrix() - x.matrix()).norm();

        let mu_next = mu_update(
            k,
            mu,
            merit_mu_prev,
            f_next,
            merit_value_prev,
            kappa,
            cfg.alpha,
            cfg.mu0,
            cfg.sigma,
        );
        let mu_updated = mu_next != mu;

        trace.push(IterationRecord {
            k,
            mu,
            tau: reduction.tau,
            smoothed_value: f_next,
            true_value,
            orth_residual: x_next.orth_residual(),
            normal_residual,
            skew_residual,
            linesearch_count: reduction.trials,
            mu_updated,
            step_norm,
            gradient_norm,
            accepted_decrease: reduction.accepted_decrease,
            required_decrease: reduction.required_decrease,
            correction_decrease,
            correction_required,
        });

        let stop = terminated(step_norm, mu, cfg.alpha, cfg.tol1, cfg.tol2);

        // Roll the state forward: the merit baseline becomes
        // F̃(X_{k+1}, μ_k); caches survive only if μ is unchanged.
        bb_prev = Some((x.into_matrix(), grad, mu));
        srgd_prev = if mu_updated {
            None
        } else {
            Some((reduction.tau, reduction.trials))
        };
        merit_value_prev = f_next;
        merit_mu_prev = mu;
        cached_value = if mu_updated { None } else { Some(f_next) };
        cached_grad = if mu_updated { None } else { Some(g_next) };
        x = x_next;
        mu = mu_next;

        if stop {
            termination = TerminationReason::Tolerance;
            break;
        }
    }

    let wall_time = start.elapsed();
    let fval = obj.true_value(x.matrix());
    let orth = x.orth_residual();
    Ok(RunReport {
        final_point: x,
        fval,
        orth,
        iterations: trace.len(),
        wall_time,
        trace,
        termination,
    constants,
    })
}
