//! Warm-started regularization paths over a decreasing grid of penalty
//! levels, for both the projection-based solver and the replicated
//! (latent variable) reformulation.

use std::time::Instant;

use gso_core::{solver, Problem, SolveDiagnostics, SolverConfig};

use crate::{Error, Result};

/// Which formulation the path solver runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Inexact prox via projections in the ambient space.
    Projection,
    /// Exact prox in the replicated latent space.
    Replication,
}

/// One grid point of a path.
pub struct PathEntry {
    pub tau: f64,
    pub solution: Vec<f64>,
    /// Groups (0-based) containing at least one selected coordinate.
    pub selected_groups: Vec<usize>,
    /// Coordinates (0-based) above the selection threshold.
    pub support: Vec<usize>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub seconds: f64,
    /// Failure description when this grid point did not solve; the next
    /// point restarts cold.
    pub error: Option<String>,
}

pub struct PathResult {
    pub entries: Vec<PathEntry>,
    pub seconds_total: f64,
}

impl PathResult {
    pub fn total_outer_iterations(&self) -> usize {
        self.entries.iter().map(|e| e.outer_iterations).sum()
    }
}

/// Coordinates whose magnitude clears a threshold tied to the outer
/// tolerance, and the groups touching them.
fn select(x: &[f64], problem: &Problem, config: &SolverConfig) -> (Vec<usize>, Vec<usize>) {
    let thresh = 10.0 * config.outer_tol * x.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > thresh).collect();
    let selected: Vec<usize> = (0..problem.gs.num_groups())
        .filter(|&r| problem.gs.group(r).iter().any(|&j| x[j].abs() > thresh))
        .collect();
    (support, selected)
}

/// Solves the problem over `taus` (must be decreasing), warm-starting each
/// grid point from the previous solution and carrying the dual multipliers
/// along. A failed grid point is recorded and the next one restarts cold.
pub fn regularization_path(
    template: &Problem,
    taus: &[f64],
    config: &SolverConfig,
    mode: Mode,
) -> Result<PathResult> {
    if taus.is_empty() {
        return Err(Error::Invalid {
            name: "taus",
            msg: "empty grid".into(),
        });
    }
    if taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Invalid {
            name: "taus",
            msg: "grid must be strictly decreasing".into(),
        });
    }

    // One spectral-norm estimate serves the whole path.
    let mut config = config.clone();
    if config.sigma_override.is_none() {
        config.sigma_override = Some(match mode {
            Mode::Projection => {
                solver::lipschitz_sigma(&template.design, template.num_samples())?
            }
            Mode::Replication => solver::lipschitz_sigma_replicated(template)?,
        });
    }

    let d = template.dim();
    let dtilde = template.gs.replicated_dim();
    let mut x_warm = vec![0.0; d];
    let mut v_warm = vec![0.0; dtilde];
    let mut dual_warm = vec![0.0; template.gs.num_groups()];
    let mut entries = Vec::with_capacity(taus.len());
    let start_all = Instant::now();

    for &tau in taus {
        let mut problem = template.clone();
        problem.tau = tau;
        let start = Instant::now();
        let solved: Result<(Vec<f64>, SolveDiagnostics)> = match mode {
            Mode::Projection => solver::solve_warm(&problem, &config, &x_warm, &mut dual_warm)
                .map_err(Error::from),
            Mode::Replication => solver::solve_replicated(&problem, &config, &v_warm)
                .map(|(v, x, diag)| {
                    v_warm = v;
                    (x, diag)
                })
                .map_err(Error::from),
        };
        let seconds = start.elapsed().as_secs_f64();
        match solved {
            Ok((x, diag)) => {
                let (support, selected_groups) = select(&x, &problem, &config);
                x_warm = x.clone();
                entries.push(PathEntry {
                    tau,
                    solution: x,
                    selected_groups,
                    support,
                    outer_iterations: diag.outer_iterations,
                    inner_iterations: diag
                        .iterations
                        .iter()
                        .map(|it| it.inner_iterations)
                        .sum(),
                    converged: diag.converged,
                    seconds,
                    error: None,
                });
            }
            Err(e) => {
                // cold restart for the rest of the path
                x_warm = vec![0.0; d];
                v_warm = vec![0.0; dtilde];
                dual_warm = vec![0.0; template.gs.num_groups()];
                entries.push(PathEntry {
                    tau,
                    solution: Vec::new(),
                    selected_groups: Vec::new(),
                    support: Vec::new(),
                    outer_iterations: 0,
                    inner_iterations: 0,
                    converged: false,
                    seconds,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(PathResult {
        entries,
        seconds_total: start_all.elapsed().as_secs_f64(),
    })
}

/// Data-driven grid: a loose, coarse pre-pass from `tau_max` downward
/// locates the interesting range (from the largest value with an empty
/// model down to where the model stops growing or saturates the sample
/// budget), then a geometric grid with `count` points spans it.
pub fn auto_grid(template: &Problem, count: usize, config: &SolverConfig) -> Result<Vec<f64>> {
    let tmax = solver::tau_max(template);
    if !(tmax > 0.0) {
        return Err(Error::Invalid {
            name: "response",
            msg: "tau_max is zero; nothing to regularize".into(),
        });
    }
    let mut loose = config.clone();
    loose.outer_tol = 1e-4;
    loose.max_outer = 2_000;
    let probe = gso_core::tau_grid(tmax * 1e-4, tmax, 60)?;
    let n = template.num_samples();

    let mut tau_lo = *probe.last().expect("nonempty");
    let path = regularization_path(template, &probe[1..], &loose, Mode::Projection)?;
    for e in &path.entries {
        if e.error.is_none() && e.support.len() >= n.min(template.dim()) {
            // model saturated: no point going sparser than this
            tau_lo = e.tau;
            break;
        }
    }
    if !(tau_lo < tmax) {
        tau_lo = tmax * 1e-2;
    }
    gso_core::tau_grid(tau_lo, tmax, count).map_err(Error::from)
}
