//! Inexact accelerated proximal-gradient solvers for the overlapping
//! group penalty: ISTA/FISTA with a decaying inner-projection tolerance,
//! plus the replicated-space variant with an exact group-wise prox.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::group::{ExponentPair, GroupStructure};
use crate::math::{self, SplitMix64};
use crate::matrix::DenseMatrix;
use crate::prox::{self, Backend};
use crate::Result;

/// Outer update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ista,
    Fista,
}

/// A regularized least-squares instance.
#[derive(Debug, Clone)]
pub struct Problem {
    pub design: DenseMatrix,
    pub response: Vec<f64>,
    pub tau: f64,
    pub gs: GroupStructure,
    pub p: ExponentPair,
}

impl Problem {
    pub fn new(
        design: DenseMatrix,
        response: Vec<f64>,
        tau: f64,
        gs: GroupStructure,
        p: ExponentPair,
    ) -> Result<Self> {
        if design.rows() != response.len() {
            return Err(Error::DimensionMismatch {
                expected: design.rows(),
                actual: response.len(),
            });
        }
        if design.cols() != gs.dim() {
            return Err(Error::DimensionMismatch {
                expected: gs.dim(),
                actual: design.cols(),
            });
        }
        if design.rows() == 0 || design.cols() == 0 {
            return Err(Error::InvalidParameter {
                name: "design",
                value: 0.0,
            });
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter { name: "tau", value: tau });
        }
        Ok(Self {
            design,
            response,
            tau,
            gs,
            p,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.design.rows()
    }

    pub fn dim(&self) -> usize {
        self.design.cols()
    }

    /// Smooth data-fit term `‖Ψx - y‖²/n`.
    pub fn smooth_objective(&self, x: &[f64]) -> f64 {
        let r = self.design.matvec(x);
        let n = self.num_samples() as f64;
        r.iter()
            .zip(&self.response)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n
    }
}

/// Configuration of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Inner tolerance at outer iteration `m` is `eps0 · m^{-alpha}`.
    pub eps0: f64,
    pub alpha: f64,
    /// Relative-displacement stopping threshold.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub backend: Backend,
    pub sigma_override: Option<f64>,
    /// The convergence guarantees need `alpha > 2` (ISTA) and `alpha > 4`
    /// (FISTA); set this to run outside those ranges anyway.
    pub allow_small_alpha: bool,
    /// Keep a copy of every outer iterate in the diagnostics.
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn fista() -> Self {
        Self {
            algorithm: Algorithm::Fista,
            eps0: 1.0,
            alpha: 4.1,
            outer_tol: 1e-6,
            max_outer: 50_000,
            backend: Backend::DualNewton,
            sigma_override: None,
            allow_small_alpha: false,
            record_iterates: false,
        }
    }

    pub fn ista() -> Self {
        Self {
            algorithm: Algorithm::Ista,
            alpha: 2.1,
            ..Self::fista()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps0",
                value: self.eps0,
            });
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "outer_tol",
                value: self.outer_tol,
            });
        }
        let floor = match self.algorithm {
            Algorithm::Ista => 2.0,
            Algorithm::Fista => 4.0,
        };
        if self.alpha <= floor && !self.allow_small_alpha {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
            });
        }
        Ok(())
    }
}

/// Per-outer-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub active_groups: usize,
    pub inner_iterations: usize,
    pub inner_tolerance: f64,
    pub displacement: f64,
}

/// Diagnostics of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub outer_iterations: usize,
    pub converged: bool,
    pub sigma: f64,
    pub iterations: Vec<IterRecord>,
    /// Outer iterates `x^1, x^2, ...` when requested.
    pub iterates: Vec<Vec<f64>>,
}

/// Largest eigenvalue of a symmetric PSD operator via power iteration to
/// 1e-6 relative accuracy.
fn power_iteration<F>(dim: usize, apply: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = SplitMix64(0x5eed_5eed_5eed_5eed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64()).collect();
    let mut ev_prev = 0.0;
    for _ in 0..10_000 {
        let norm = math::norm2(&v);
        if norm == 0.0 {
            return Err(Error::ZeroOperator);
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        let w = apply(&v);
        let ev = math::dot(&v, &w);
        if ev <= 0.0 {
            return Err(Error::ZeroOperator);
        }
        if math::abs(ev - ev_prev) <= 1e-6 * ev {
            return Ok(ev);
        }
        ev_prev = ev;
        v = w;
    }
    Ok(ev_prev)
}

/// `σ = ‖Ψ^TΨ‖/n`, inflated by 1% so the induced step size is valid.
pub fn lipschitz_sigma(design: &DenseMatrix, n: usize) -> Result<f64> {
    if design.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let ev = power_iteration(design.cols(), |v| design.matvec_t(&design.matvec(v)))?;
    Ok(ev / n as f64 * 1.01)
}

/// One gradient step at unit step size `1/(2σ)` on `F(h) = ‖Ψh-y‖²/n`:
/// returns `h - Ψ^T(Ψh - y)/(nσ)`.
pub fn gradient_step(h: &[f64], problem: &Problem, sigma: f64) -> Vec<f64> {
    let mut residual = problem.design.matvec(h);
    for (ri, yi) in residual.iter_mut().zip(&problem.response) {
        *ri -= yi;
    }
    let grad = problem.design.matvec_t(&residual);
    let scale = 1.0 / (problem.num_samples() as f64 * sigma);
    h.iter().zip(&grad) .map(|(&hi, &gi)| hi - scale * gi).collect()
}

fn check_finite(v: &[f64], iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { iteration })
    }
}

/// Runs the inexact ISTA/FISTA loop on the original (projection)
/// formulation from `x0`.
pub fn solve(
    problem: &Problem,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let mut warm = vec![0.0; problem.gs.num_groups()];
    solve_warm(problem, config, x0, &mut warm)
}

/// As [`solve`], but threads dual multipliers through the inner
/// projections; along a regularization path the caller keeps the vector
/// between solves.
pub fn solve_warm(
    problem: &Problem,
    config: &SolverConfig,
    x0: &[f64],
    dual_warm: &mut Vec<f64>,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    config.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            actual: x0.len(),
        });
    }
    check_finite(x0, 0)?;
    if dual_warm.len() != problem.gs.num_groups() {
        dual_warm.clear();
        dual_warm.resize(problem.gs.num_groups(), 0.0);
    }

    let sigma = match config.sigma_override {
        Some(s) => s,
        None => lipschitz_sigma(&problem.design, problem.num_samples())?,
    };
    let lambda = problem.tau / sigma;

    let mut x = x0.to_vec();
    let mut h = x0.to_vec();
    let mut s = 1.0;
    let mut diag = SolveDiagnostics {
        outer_iterations: 0,
        converged: false,
        sigma,
        iterations: Vec::new(),
        iterates: Vec::new(),
    };

    for m in 1..=config.max_outer {
        let hhat = gradient_step(&h, problem, sigma);
        check_finite(&hhat, m)?;
        // Inner tolerance schedule, floored at what f64 can resolve.
        let tol_m = (config.eps0 * math::powf(m as f64, -config.alpha)).max(1e-12);
        let res = prox::prox(
            &hhat,
            lambda,
            &problem.gs,
            problem.p,
            config.backend,
            tol_m,
            Some(dual_warm),
        )
        .map_err(|e| match e {
            Error::ToleranceNotReached { required, achieved, .. } => {
                Error::ToleranceNotReached {
                    required,
                    achieved,
                    iterations: m,
                }
            }
            other => other,
        })?;
        let x_new = res.prox_point;
        check_finite(&x_new, m)?;

        let displacement = math::dist2(&x_new, &x) / math::norm2(&x).max(1.0);
        diag.iterations.push(IterRecord {
            active_groups: res.active_set.len(),
            inner_iterations: res.backend_iterations,
            inner_tolerance: tol_m,
            displacement,
        });
        if config.record_iterates {
            diag.iterates.push(x_new.clone());
        }

        match config.algorithm {
            Algorithm::Fista => {
                let s_next = 0.5 * (1.0 + math::sqrt(1.0 + 4.0 * s * s));
                let a = 1.0 + (s - 1.0) / s_next;
                let b = (1.0 - s) / s_next;
                h = x_new
                    .iter()
                    .zip(&x)
                    .map(|(&xn, &xo)| a * xn + b * xo)
                    .collect();
                s = s_next;
            }
            Algorithm::Ista => h = x_new.clone(),
        }
        x = x_new;
        diag.outer_iterations = m;
        if m >= 2 && displacement <= config.outer_tol {
            diag.converged = true;
            break;
        }
    }
    Ok((x, diag))
}

/// Replicated-space operator products: `Ψ̃ v = Ψ (P^* v)` and
/// `Ψ̃^T u = P (Ψ^T u)`.
fn replicated_matvec(problem: &Problem, v: &[f64]) -> Vec<f64> {
    let x = problem.gs.adjoint_sum(v).expect("latent dimension");
    problem.design.matvec(&x)
}

fn replicated_matvec_t(problem: &Problem, u: &[f64]) -> Vec<f64> {
    let g = problem.design.matvec_t(u);
    problem.gs.replicate(&g).expect("ambient dimension")
}

/// `σ̃ = ‖Ψ̃^TΨ̃‖/n` for the replicated operator, inflated by 1%.
pub fn lipschitz_sigma_replicated(problem: &Problem) -> Result<f64> {
    if problem.design.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let ev = power_iteration(problem.gs.replicated_dim(), |v| {
        replicated_matvec_t(problem, &replicated_matvec(problem, v))
    })?;
    Ok(ev / problem.num_samples() as f64 * 1.01)
}

/// Sum of the latent block norms `Σ_r ‖v_r‖_p` (the disjoint-group
/// penalty of the replicated formulation; exact).
pub fn latent_penalty(gs: &GroupStructure, v: &[f64], p: ExponentPair) -> f64 {
    let mut total = 0.0;
    for r in 0..gs.num_groups() {
        let start = gs.offset(r);
        let block = &v[start..start + gs.group(r).len()];
        total += if p.is_inf() {
            block.iter().fold(0.0f64, |m, &b| m.max(math::abs(b)))
        } else {
            math::norm2(block)
        };
    }
    total
}

/// Full replicated objective `‖Ψ̃v - y‖²/n + 2τ Σ_r ‖v_r‖_p` (exact).
pub fn replicated_objective(problem: &Problem, v: &[f64]) -> f64 {
    let r = replicated_matvec(problem, v);
    let n = problem.num_samples() as f64;
    let fit = r
        .iter()
        .zip(&problem.response)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    fit + 2.0 * problem.tau * latent_penalty(&problem.gs, v, problem.p)
}

/// FISTA/ISTA in the replicated space with the exact group-wise prox.
/// Returns the latent solution, its image `x = P^* v` and diagnostics.
pub fn solve_replicated(
    problem: &Problem,
    config: &SolverConfig,
    v0: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, SolveDiagnostics)> {
    config.validate()?;
    let dtilde = problem.gs.replicated_dim();
    if v0.len() != dtilde {
        return Err(Error::DimensionMismatch {
            expected: dtilde,
            actual: v0.len(),
        });
    }
    check_finite(v0, 0)?;

    let sigma = match config.sigma_override {
        Some(s) => s,
        None => lipschitz_sigma_replicated(problem)?,
    };
    let lambda = problem.tau / sigma;
    let n_sigma = problem.num_samples() as f64 * sigma;

    let mut v = v0.to_vec();
    let mut w = v0.to_vec();
    let mut s = 1.0;
    let mut diag = SolveDiagnostics {
        outer_iterations: 0,
        converged: false,
        sigma,
        iterations: Vec::new(),
        iterates: Vec::new(),
    };

    for m in 1..=config.max_outer {
        let mut residual = replicated_matvec(problem, &w);
        for (ri, yi) in residual.iter_mut().zip(&problem.response) {
            *ri -= yi;
        }
        let grad = replicated_matvec_t(problem, &residual);
        let what: Vec<f64> = w
            .iter()
            .zip(&grad)
            .map(|(&wi, &gi)| wi - gi / n_sigma)
            .collect();
        check_finite(&what, m)?;
        let v_new = prox::prox_replicated(&what, lambda, &problem.gs, problem.p)?;

        let displacement = math::dist2(&v_new, &v) / math::norm2(&v).max(1.0);
        diag.iterations.push(IterRecord {
            active_groups: problem.gs.num_groups(),
            inner_iterations: 0,
            inner_tolerance: 0.0,
            displacement,
        });
        if config.record_iterates {
            diag.iterates.push(problem.gs.adjoint_sum(&v_new)?);
        }

        match config.algorithm {
            Algorithm::Fista => {
                let s_next = 0.5 * (1.0 + math::sqrt(1.0 + 4.0 * s * s));
                let a = 1.0 + (s - 1.0) / s_next;
                let b = (1.0 - s) / s_next;
                w = v_new
                    .iter()
                    .zip(&v)
                    .map(|(&xn, &xo)| a * xn + b * xo)
                    .collect();
                s = s_next;
            }
            Algorithm::Ista => w = v_new.clone(),
        }
        v = v_new;
        diag.outer_iterations = m;
        if m >= 2 && displacement <= config.outer_tol {
            diag.converged = true;
            break;
        }
    }
    let x = problem.gs.adjoint_sum(&v)?;
    Ok((v, x, diag))
}

/// Smallest regularization level at which zero is optimal:
/// `max_r ‖Ψ^T y / n‖_{G_r,q}`. Returns 0 for a zero response.
pub fn tau_max(problem: &Problem) -> f64 {
    if problem.response.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let z = problem.design.matvec_t(&problem.response);
    let n = problem.num_samples() as f64;
    let z: Vec<f64> = z.into_iter().map(|v| v / n).collect();
    let mut best = 0.0f64;
    for r in 0..problem.gs.num_groups() {
        let norm = crate::group::group_norm(&z, problem.gs.group(r), problem.p.q())
            .expect("validated groups");
        best = best.max(norm);
    }
    best
}

/// `count` geometrically spaced values from `hi` down to `lo`.
pub fn tau_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidParameter { name: "tau_bounds", value: lo });
    }
    if count < 2 {
        return Err(Error::InvalidParameter {
            name: "tau_count",
            value: count as f64,
        });
    }
    let ratio = math::powf(lo / hi, 1.0 / (count as f64 - 1.0));
    let mut out = Vec::with_capacity(count);
    let mut v = hi;
    for _ in 0..count - 1 {
        out.push(v);
        v *= ratio;
    }
    out.push(lo);
    Ok(out)
}
