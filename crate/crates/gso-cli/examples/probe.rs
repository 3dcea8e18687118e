use gso_core::{tau_max, ExponentPair, Problem, SolverConfig};
use gso_cli::synth;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5.0);
    let frac: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let inst = synth::gen_regression_overlap(1000, 10, alpha, 0).unwrap();
    let mut problem =
        Problem::new(inst.design, inst.response, 1.0, inst.gs, ExponentPair::p2()).unwrap();
    let tmax = tau_max(&problem);
    problem.tau = frac * tmax;
    let mut cfg = SolverConfig::fista();
    cfg.outer_tol = 1e-6;
    let x0 = vec![0.0; problem.dim()];
    let t0 = Instant::now();
    let (x, diag) = gso_core::solver::solve(&problem, &cfg, &x0).unwrap();
    let inner: usize = diag.iterations.iter().map(|r| r.inner_iterations).sum();
    let act = diag.iterations.last().map(|r| r.active_groups).unwrap_or(0);
    println!(
        "tau={:.4e} outer={} inner_total={} last_active={} secs={:.2} nnz={} converged={}",
        problem.tau,
        diag.outer_iterations,
        inner,
        act,
        t0.elapsed().as_secs_f64(),
        x.iter().filter(|v| v.abs() > 1e-8).count(),
        diag.converged,
    );
}
