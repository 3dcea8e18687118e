//! Benchmark harness: per-prox backend comparisons on random overlapping
//! groups, and whole-path projection-vs-replication timings on the
//! overlapping regression layout.

use std::time::Instant;

use gso_core::{
    cyclic::{self, StopRule},
    prox::{self, Backend},
    ExponentPair, Problem, SolverConfig,
};

use crate::path::{self, Mode};
use crate::synth;
use crate::{Error, Result};

/// One benchmark measurement.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub scenario: &'static str,
    pub d: usize,
    pub db: usize,
    pub alpha: f64,
    pub mode: String,
    pub seed: u64,
    pub seconds: f64,
    pub iterations: usize,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "scenario,d,db,alpha,mode,seed,seconds,iterations";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scenario,
            self.d,
            self.db,
            self.alpha,
            self.mode,
            self.seed,
            crate::fileio::format_float(self.seconds),
            self.iterations
        )
    }
}

/// Mean and (population) standard deviation of the seconds column of the
/// rows matching `mode`.
pub fn summarize(rows: &[BenchRow], mode: &str) -> (f64, f64) {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.mode == mode)
        .map(|r| r.seconds)
        .collect();
    if vals.is_empty() {
        return (0.0, 0.0);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
    (mean, var.sqrt())
}

/// Cyclic projection timed against a reference point: iterates until the
/// Euclidean distance to `reference` falls below `eps * ||reference||`,
/// measuring how long the scheme needs for a given true accuracy. Checks
/// once per cycle; mirrors the library's anchored update.
fn cyclic_until_close(
    x: &[f64],
    sets: &[&[usize]],
    radius: f64,
    reference: &[f64],
    eps: f64,
    max_iter: usize,
) -> Result<usize> {
    let b = sets.len();
    let target = eps
        * reference
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
    let mut w = x.to_vec();
    let mut n = 0usize;
    while n < max_iter {
        n += 1;
        cyclic::project_cylinder_p2(&mut w, sets[(n - 1) % b], radius);
        let blend = n as f64 / (n as f64 + 1.0);
        let anchor = 1.0 / (n as f64 + 1.0);
        for (wi, &xi) in w.iter_mut().zip(x) {
            *wi = anchor * xi + blend * *wi;
        }
        if n % b == 0 {
            let dist = w
                .iter()
                .zip(reference)
                .map(|(a, r)| (a - r) * (a - r))
                .sum::<f64>()
                .sqrt();
            if dist <= target {
                return Ok(n);
            }
        }
    }
    Err(Error::Core(gso_core::Error::ToleranceNotReached {
        required: eps,
        achieved: f64::NAN,
        iterations: n,
    }))
}

/// Per-prox comparison on the random-group stress instance. Emits, per
/// seed: the dual Newton solve, the cyclic scheme timed to the same true
/// accuracy against the Newton reference (`p = 2`), and the two cyclic
/// runs at a matched relative-change tolerance for `p = 2` vs `p = ∞`.
pub fn prox_bench(
    d: usize,
    db: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
    eps: f64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for rep in 0..reps {
        let s = seed + rep as u64;
        let inst = synth::gen_prox_bench(d, db, alpha, s)?;
        let row = |mode: &str, seconds: f64, iterations: usize| BenchRow {
            scenario: "prox_bench",
            d,
            db,
            alpha,
            mode: mode.to_string(),
            seed: s,
            seconds,
            iterations,
        };

        // reference + timing for the dual Newton backend (p = 2)
        let t0 = Instant::now();
        let reference = prox::prox(
            &inst.x,
            inst.tau_p2,
            &inst.gs,
            ExponentPair::p2(),
            Backend::DualNewton,
            1e-10,
            None,
        )?;
        rows.push(row("dual_newton", t0.elapsed().as_secs_f64(), reference.backend_iterations));

        // cyclic p=2 timed to the same true accuracy
        let sets: Vec<&[usize]> = inst.gs.groups().iter().map(|g| g.as_slice()).collect();
        let t0 = Instant::now();
        let iters = cyclic_until_close(
            &inst.x,
            &sets,
            inst.tau_p2,
            &reference.projection_point,
            eps,
            5_000_000,
        )?;
        rows.push(row("cyclic_p2_vs_ref", t0.elapsed().as_secs_f64(), iters));

        // matched relative-change stopping: p = 2 vs p = inf
        for (mode, p, radius) in [
            ("cyclic_p2_rel", ExponentPair::p2(), inst.tau_p2),
            ("cyclic_pinf_rel", ExponentPair::p_inf(), inst.tau_pinf),
        ] {
            let t0 = Instant::now();
            let out = cyclic::cyclic_project_p(
                &inst.x,
                &sets,
                radius,
                p,
                StopRule::RelativeChange(eps),
                5_000_000,
            )?;
            rows.push(row(mode, t0.elapsed().as_secs_f64(), out.iterations));
        }
    }
    Ok(rows)
}

/// Whole-path timing of the projection solver against the replicated
/// reformulation on the overlapping regression layout. The grid is chosen
/// by the data-driven pre-pass once per seed and shared by both modes.
pub fn path_bench(
    d: usize,
    db: usize,
    alpha: f64,
    reps: usize,
    seed: u64,
    grid_points: usize,
    config: &SolverConfig,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for rep in 0..reps {
        let s = seed + rep as u64;
        let inst = synth::gen_regression_overlap(d, db, alpha, s)?;
        let problem = Problem::new(
            inst.design,
            inst.response,
            1.0,
            inst.gs,
            ExponentPair::p2(),
        )?;
        let taus = path::auto_grid(&problem, grid_points, config)?;
        for (mode_name, mode) in [
            ("projection", Mode::Projection),
            ("replication", Mode::Replication),
        ] {
            let out = path::regularization_path(&problem, &taus, config, mode)?;
            if let Some(bad) = out.entries.iter().find(|e| e.error.is_some()) {
                return Err(Error::Invalid {
                    name: "path",
                    msg: format!(
                        "seed {s} mode {mode_name} failed at tau={}: {}",
                        bad.tau,
                        bad.error.as_deref().unwrap_or("")
                    ),
                });
            }
            rows.push(BenchRow {
                scenario: "path_overlap",
                d,
                db,
                alpha,
                mode: mode_name.to_string(),
                seed: s,
                seconds: out.seconds_total,
                iterations: out.total_outer_iterations(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_bench_rows_shape() {
        let rows = prox_bench(60, 10, 1.0, 2, 5, 1e-2).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.seconds >= 0.0));
        let (mean, std) = summarize(&rows, "dual_newton");
        assert!(mean > 0.0 && std >= 0.0);
        let csv = rows[0].to_csv();
        assert!(csv.starts_with("prox_bench,60,10,1,dual_newton,5,"), "{csv}");
    }

    #[test]
    fn path_bench_smoke() {
        let mut cfg = SolverConfig::fista();
        cfg.outer_tol = 1e-5;
        let rows = path_bench(50, 10, 1.0, 1, 3, 5, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().any(|r| r.mode == "projection"));
        assert!(rows.iter().any(|r| r.mode == "replication"));
    }
}
