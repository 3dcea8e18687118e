//! `gso` — overlapping group lasso solver and benchmark harness.
//!
//! Exit codes: 0 success, 2 bad inputs, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gso_core::{
    prox, solver, Algorithm, Backend, ExponentPair, Problem, SolverConfig,
};
use gso_cli::bench::{self, BenchRow};
use gso_cli::manifest::RunManifest;
use gso_cli::path::{self, Mode};
use gso_cli::{fileio, synth, Error, Result};

#[derive(Parser)]
#[command(name = "gso", version, about = "Latent (overlapping) group lasso solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PArg {
    #[value(name = "2")]
    Two,
    Inf,
}

impl PArg {
    fn to_pair(self) -> ExponentPair {
        match self {
            PArg::Two => ExponentPair::p2(),
            PArg::Inf => ExponentPair::p_inf(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Cyclic,
    Dual,
}

impl BackendArg {
    fn to_backend(self) -> Backend {
        match self {
            BackendArg::Cyclic => Backend::Cyclic,
            BackendArg::Dual => Backend::DualNewton,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Ista,
    Fista,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Projection,
    Replication,
}

#[derive(Args)]
struct DataArgs {
    /// Design matrix, CSV, one sample per row.
    #[arg(long)]
    matrix: PathBuf,
    /// Response vector, one value per line.
    #[arg(long)]
    response: PathBuf,
    /// Group file: JSON {"d": .., "groups": [[1-based indices], ..]}.
    #[arg(long)]
    groups: PathBuf,
    /// Group norm exponent.
    #[arg(long, value_enum, default_value = "2")]
    p: PArg,
}

impl DataArgs {
    fn load(&self, tau: f64) -> Result<Problem> {
        let design = fileio::read_matrix(&self.matrix)?;
        let response = fileio::read_vector(&self.response)?;
        let gs = fileio::read_groups(&self.groups)?;
        Ok(Problem::new(design, response, tau, gs, self.p.to_pair())?)
    }

    fn input_names(&self) -> Vec<String> {
        vec![
            self.matrix.display().to_string(),
            self.response.display().to_string(),
            self.groups.display().to_string(),
        ]
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "fista")]
    algorithm: AlgorithmArg,
    /// Inner tolerance scale (inner tol at outer step m is eps0 * m^-alpha).
    #[arg(long, default_value_t = 1.0)]
    eps0: f64,
    /// Inner tolerance decay exponent; defaults to 4.1 (fista) / 2.1 (ista).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    outer_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_outer: usize,
    #[arg(long, value_enum, default_value = "dual")]
    backend: BackendArg,
    /// Accept decay exponents outside the guaranteed range.
    #[arg(long)]
    allow_small_alpha: bool,
}

impl SolverArgs {
    fn to_config(&self) -> SolverConfig {
        let mut cfg = match self.algorithm {
            AlgorithmArg::Fista => SolverConfig::fista(),
            AlgorithmArg::Ista => SolverConfig::ista(),
        };
        cfg.eps0 = self.eps0;
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        cfg.outer_tol = self.outer_tol;
        cfg.max_outer = self.max_outer;
        cfg.backend = self.backend.to_backend();
        cfg.allow_small_alpha = self.allow_small_alpha;
        cfg
    }

    fn params_json(&self, extra: serde_json::Value) -> serde_json::Value {
        let cfg = self.to_config();
        let mut v = serde_json::json!({
            "algorithm": match cfg.algorithm { Algorithm::Fista => "fista", Algorithm::Ista => "ista" },
            "eps0": cfg.eps0,
            "alpha": cfg.alpha,
            "outer_tol": cfg.outer_tol,
            "max_outer": cfg.max_outer,
            "backend": match cfg.backend { Backend::Cyclic => "cyclic", Backend::DualNewton => "dual" },
        });
        if let (Some(obj), Some(add)) = (v.as_object_mut(), extra.as_object()) {
            for (k, val) in add {
                obj.insert(k.clone(), val.clone());
            }
        }
        v
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one regularized regression instance.
    Solve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        tau: f64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Use the replicated (latent space) formulation.
        #[arg(long, value_enum, default_value = "projection")]
        mode: ModeArg,
        /// Output solution vector (one value per line).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve over a decreasing grid of regularization levels.
    Path {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        tau_min: Option<f64>,
        /// Upper grid end; defaults to the smallest tau with a null model.
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long, default_value_t = 50)]
        tau_count: usize,
        /// Pick the grid from a coarse data-driven pre-pass.
        #[arg(long, conflicts_with_all = ["tau_min", "tau_max"])]
        auto_grid: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value = "projection")]
        mode: ModeArg,
        /// Output CSV of per-grid-point summaries.
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-grid-point solution vectors.
        #[arg(long)]
        solutions_dir: Option<PathBuf>,
    },
    /// Evaluate the penalty prox at one point.
    Prox {
        /// Input point, one value per line.
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        groups: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "2")]
        p: PArg,
        #[arg(long, value_enum, default_value = "dual")]
        backend: BackendArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic instance into a directory.
    Gen {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long)]
        d: usize,
        /// Group size (random-group scenarios).
        #[arg(long, default_value_t = 10)]
        db: usize,
        /// Group count multiplier B = alpha*d/db.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Sample count (no-overlap regression only).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Timing benchmarks over synthetic instances.
    Bench {
        #[arg(long, value_enum)]
        scenario: BenchScenarioArg,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        db: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matched stopping tolerance for the prox backends.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Grid size for the path scenario.
        #[arg(long, default_value_t = 50)]
        tau_count: usize,
        /// Outer stopping tolerance for the path scenario's solves.
        #[arg(long, default_value_t = 1e-6)]
        outer_tol: f64,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    ProxBench,
    RegressionNoOverlap,
    RegressionOverlap,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchScenarioArg {
    ProxBench,
    PathOverlap,
}

/// GSO_SEED in the environment overrides the --seed flag.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("GSO_SEED") {
        Ok(s) => s.parse::<u64>().map_err(|_| Error::Invalid {
            name: "GSO_SEED",
            msg: format!("cannot parse '{s}' as an unsigned integer"),
        }),
        Err(_) => Ok(flag),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { data, tau, solver: sargs, mode, out } => {
            let start = Instant::now();
            let problem = data.load(tau)?;
            let config = sargs.to_config();
            let x = match mode {
                ModeArg::Projection => {
                    let (x, _) = solver::solve(&problem, &config, &vec![0.0; problem.dim()])?;
                    x
                }
                ModeArg::Replication => {
                    let v0 = vec![0.0; problem.gs.replicated_dim()];
                    let (_, x, _) = solver::solve_replicated(&problem, &config, &v0)?;
                    x
                }
            };
            fileio::write_vector(&out, &x)?;
            let mut m = RunManifest::new(
                "solve",
                data.input_names(),
                sargs.params_json(serde_json::json!({"tau": tau})),
            );
            m.wall_seconds = start.elapsed().as_secs_f64();
            m.write_for(&out)
        }
        Command::Path {
            data,
            tau_min,
            tau_max,
            tau_count,
            auto_grid,
            solver: sargs,
            mode,
            out,
            solutions_dir,
        } => {
            let start = Instant::now();
            let problem = data.load(1.0)?;
            let config = sargs.to_config();
            let taus = if auto_grid {
                path::auto_grid(&problem, tau_count, &config)?
            } else {
                let hi = tau_max.unwrap_or_else(|| solver::tau_max(&problem));
                let lo = tau_min.unwrap_or(hi * 1e-3);
                gso_core::tau_grid(lo, hi, tau_count)?
            };
            let mode = match mode {
                ModeArg::Projection => Mode::Projection,
                ModeArg::Replication => Mode::Replication,
            };
            let result = path::regularization_path(&problem, &taus, &config, mode)?;

            if let Some(dir) = &solutions_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                for (i, e) in result.entries.iter().enumerate() {
                    if e.error.is_none() {
                        fileio::write_vector(&dir.join(format!("solution_{i:04}.csv")), &e.solution)?;
                    }
                }
            }
            let rows: Vec<String> = result
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    format!(
                        "{i},{},{},{},{},{},{},{},{}",
                        fileio::format_float(e.tau),
                        e.support.len(),
                        e.selected_groups.len(),
                        e.outer_iterations,
                        e.inner_iterations,
                        e.converged,
                        fileio::format_float(e.seconds),
                        e.error.as_deref().unwrap_or("").replace(',', ";"),
                    )
                })
                .collect();
            fileio::write_csv(
                &out,
                "index,tau,support_size,selected_groups,outer_iterations,inner_iterations,converged,seconds,error",
                &rows,
            )?;
            let mut m = RunManifest::new(
                "path",
                data.input_names(),
                sargs.params_json(serde_json::json!({
                    "tau_count": tau_count,
                    "auto_grid": auto_grid,
                })),
            );
            m.wall_seconds = start.elapsed().as_secs_f64();
            m.write_for(&out)
        }
        Command::Prox { vector, groups, lambda, p, backend, tol, out } => {
            let start = Instant::now();
            let x = fileio::read_vector(&vector)?;
            let gs = fileio::read_groups(&groups)?;
            let res = prox::prox(
                &x,
                lambda,
                &gs,
                p.to_pair(),
                backend.to_backend(),
                tol,
                None,
            )?;
            fileio::write_vector(&out, &res.prox_point)?;
            let mut m = RunManifest::new(
                "prox",
                vec![vector.display().to_string(), groups.display().to_string()],
                serde_json::json!({"lambda": lambda, "tol": tol}),
            );
            m.wall_seconds = start.elapsed().as_secs_f64();
            m.write_for(&out)
        }
        Command::Gen { scenario, d, db, alpha, n, seed, out_dir } => {
            let seed = effective_seed(seed)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let (gs, inputs) = match scenario {
                ScenarioArg::ProxBench => {
                    let inst = synth::gen_prox_bench(d, db, alpha, seed)?;
                    fileio::write_vector(&out_dir.join("x.csv"), &inst.x)?;
                    fileio::write_vector(
                        &out_dir.join("tau.csv"),
                        &[inst.tau_p2, inst.tau_pinf],
                    )?;
                    (inst.gs, vec!["x.csv", "tau.csv"])
                }
                ScenarioArg::RegressionNoOverlap => {
                    let n = n.ok_or_else(|| Error::Invalid {
                        name: "n",
                        msg: "sample count is required for this scenario".into(),
                    })?;
                    let inst = synth::gen_regression_no_overlap(d, n, seed)?;
                    fileio::write_matrix(&out_dir.join("design.csv"), &inst.design)?;
                    fileio::write_vector(&out_dir.join("response.csv"), &inst.response)?;
                    fileio::write_vector(&out_dir.join("weights.csv"), &inst.true_weights)?;
                    (inst.gs, vec!["design.csv", "response.csv", "weights.csv"])
                }
                ScenarioArg::RegressionOverlap => {
                    let inst = synth::gen_regression_overlap(d, db, alpha, seed)?;
                    fileio::write_matrix(&out_dir.join("design.csv"), &inst.design)?;
                    fileio::write_vector(&out_dir.join("response.csv"), &inst.response)?;
                    fileio::write_vector(&out_dir.join("weights.csv"), &inst.true_weights)?;
                    (inst.gs, vec!["design.csv", "response.csv", "weights.csv"])
                }
            };
            let groups_path = out_dir.join("groups.json");
            fileio::write_groups(&groups_path, &gs)?;
            let mut m = RunManifest::new(
                "gen",
                inputs.iter().map(|s| s.to_string()).collect(),
                serde_json::json!({"d": d, "db": db, "alpha": alpha, "n": n}),
            );
            m.seed = Some(seed);
            m.write_for(&groups_path)
        }
        Command::Bench {
            scenario,
            d,
            db,
            alpha,
            reps,
            seed,
            eps,
            tau_count,
            outer_tol,
            out,
        } => {
            let seed = effective_seed(seed)?;
            let start = Instant::now();
            let mut config = SolverConfig::fista();
            config.outer_tol = outer_tol;
            let rows = match scenario {
                BenchScenarioArg::ProxBench => bench::prox_bench(d, db, alpha, reps, seed, eps)?,
                BenchScenarioArg::PathOverlap => {
                    bench::path_bench(d, db, alpha, reps, seed, tau_count, &config)?
                }
            };
            let csv_rows: Vec<String> = rows.iter().map(BenchRow::to_csv).collect();
            fileio::write_csv(&out, BenchRow::CSV_HEADER, &csv_rows)?;
            for mode in ["dual_newton", "cyclic_p2_vs_ref", "cyclic_p2_rel", "cyclic_pinf_rel", "projection", "replication"] {
                let (mean, std) = bench::summarize(&rows, mode);
                if mean > 0.0 {
                    eprintln!("{mode}: {mean:.6} +/- {std:.6} s");
                }
            }
            let mut m = RunManifest::new(
                "bench",
                Vec::new(),
                serde_json::json!({
                    "d": d, "db": db, "alpha": alpha, "reps": reps, "eps": eps,
                    "tau_count": tau_count, "outer_tol": outer_tol,
                }),
            );
            m.seed = Some(seed);
            m.wall_seconds = start.elapsed().as_secs_f64();
            m.write_for(&out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
