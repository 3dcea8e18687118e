//! Independent oracles used by the acceptance suite. Each reimplements
//! the quantity under test from first principles, by a different method
//! than the library uses.

use gso_core::{ExponentPair, GroupStructure, Problem};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Prox oracle: minimizes `½‖u−x‖² + λ·Ω(u)` through its latent lifting
/// `min_v ½‖P*v − x‖² + λ Σ_r ‖v_r‖₂`, by accelerated proximal gradient
/// with the exact blockwise prox. The smooth part has Lipschitz constant
/// `max_j #{groups containing j}`.
pub fn prox_oracle(x: &[f64], lambda: f64, gs: &GroupStructure, iters: usize) -> Vec<f64> {
    let d = gs.dim();
    let dtilde = gs.replicated_dim();
    let mut mult = vec![0usize; d];
    for g in gs.groups() {
        for &j in g {
            mult[j] += 1;
        }
    }
    let lip = mult.iter().copied().max().unwrap_or(1).max(1) as f64;

    let mut v = vec![0.0; dtilde];
    let mut w = v.clone();
    let mut s = 1.0f64;
    for _ in 0..iters {
        let u = gs.adjoint_sum(&w).unwrap();
        let resid: Vec<f64> = u.iter().zip(x).map(|(a, b)| a - b).collect();
        let grad = gs.replicate(&resid).unwrap();
        let moved: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - gi / lip).collect();
        let v_new =
            gso_core::prox::prox_replicated(&moved, lambda / lip, gs, ExponentPair::p2())
                .unwrap();
        let s_next = 0.5 * (1.0 + (1.0 + 4.0 * s * s).sqrt());
        w = v_new
            .iter()
            .zip(&v)
            .map(|(&a, &b)| a + (s - 1.0) / s_next * (a - b))
            .collect();
        s = s_next;
        v = v_new;
    }
    gs.adjoint_sum(&v).unwrap()
}

/// Penalty oracle `Ω(x) = sup{⟨x,u⟩ : ‖u_{G_r}‖₂ ≤ 1 ∀r}` by a log-barrier
/// interior-point method (damped Newton on
/// `-t⟨x,u⟩ - Σ_r log(1 - ‖u_{G_r}‖²)`, following the path until the
/// barrier gap `B/t` is below `tol`).
///
/// Requires every coordinate with `x_j ≠ 0` to be covered by some group.
pub fn omega_oracle(x: &[f64], gs: &GroupStructure, tol: f64) -> f64 {
    let d = gs.dim();
    let b = gs.num_groups();
    if x.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let mut u = vec![0.0; d];
    let mut t = 1.0;
    let t_final = b as f64 / tol;
    loop {
        // Newton loop at this barrier weight
        for _ in 0..200 {
            let mut s = vec![0.0; b]; // squared group norms
            for (r, g) in gs.groups().iter().enumerate() {
                s[r] = g.iter().map(|&j| u[j] * u[j]).sum();
            }
            // gradient of the barrier-penalized objective (minimization form)
            let mut grad: Vec<f64> = x.iter().map(|&xi| -t * xi).collect();
            for (r, g) in gs.groups().iter().enumerate() {
                let c = 2.0 / (1.0 - s[r]);
                for &j in g {
                    grad[j] += c * u[j];
                }
            }
            // Hessian: Σ_r [ c_r I_{G_r} + c_r² u_{G_r} u_{G_r}^T ]
            let mut hess = vec![0.0; d * d];
            for (r, g) in gs.groups().iter().enumerate() {
                let c = 2.0 / (1.0 - s[r]);
                for &j in g {
                    hess[j * d + j] += c;
                }
                for &j in g {
                    for &k in g {
                        hess[j * d + k] += c * c * u[j] * u[k];
                    }
                }
            }
            // uncovered zero-x coordinates have an all-zero row; pin them
            for j in 0..d {
                if hess[j * d + j] == 0.0 {
                    hess[j * d + j] = 1.0;
                }
            }
            let step = solve_spd(&mut hess, d, &grad);
            let decrement = dot(&grad, &step);
            if decrement.abs() < 1e-18 * (1.0 + t) {
                break;
            }
            // backtrack to stay strictly feasible and decrease
            let mut alpha = 1.0;
            let obj = |u: &[f64]| -> Option<f64> {
                let mut val = -t * dot(x, u);
                for g in gs.groups() {
                    let sq: f64 = g.iter().map(|&j| u[j] * u[j]).sum();
                    if sq >= 1.0 {
                        return None;
                    }
                    val -= (1.0 - sq).ln();
                }
                Some(val)
            };
            let f0 = obj(&u).expect("current point feasible");
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = u
                    .iter()
                    .zip(&step)
                    .map(|(ui, si)| ui - alpha * si)
                    .collect();
                if let Some(ft) = obj(&trial) {
                    if ft <= f0 - 0.25 * alpha * decrement {
                        u = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if t >= t_final {
            break;
        }
        t = (t * 10.0).min(t_final);
    }
    dot(x, &u)
}

/// Dense SPD solve by Cholesky (destroys `a`).
fn solve_spd(a: &mut [f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    for k in 0..n {
        let mut pivot = a[k * n + k];
        for t in 0..k {
            pivot -= a[k * n + t] * a[k * n + t];
        }
        let lkk = pivot.max(1e-300).sqrt();
        a[k * n + k] = lkk;
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            for t in 0..k {
                v -= a[i * n + t] * a[k * n + t];
            }
            a[i * n + k] = v / lkk;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut v = y[i];
        for t in 0..i {
            v -= a[i * n + t] * y[t];
        }
        y[i] = v / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for t in (i + 1)..n {
            v -= a[t * n + i] * y[t];
        }
        y[i] = v / a[i * n + i];
    }
    y
}

/// Full objective `‖Ψx−y‖²/n + 2τ·Ω(x)` with the penalty evaluated by the
/// barrier oracle.
pub fn objective_oracle(problem: &Problem, x: &[f64], tol: f64) -> f64 {
    problem.smooth_objective(x) + 2.0 * problem.tau * omega_oracle(x, &problem.gs, tol)
}

/// ℓ1-ball projection oracle: bisection on the soft-threshold level μ so
/// that `Σ (|w_j| - μ)₊ = radius`.
pub fn l1_projection_oracle(w: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return w.to_vec();
    }
    let mut lo = 0.0;
    let mut hi = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..200 {
        let mu = 0.5 * (lo + hi);
        let total: f64 = w.iter().map(|v| (v.abs() - mu).max(0.0)).sum();
        if total > radius {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    let mu = 0.5 * (lo + hi);
    w.iter()
        .map(|&v| {
            let m = v.abs() - mu;
            if m > 0.0 {
                m * v.signum()
            } else {
                0.0
            }
        })
        .collect()
}

/// Deterministic linear-congruential stream for test instances (kept
/// separate from the generators under test).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random covering group family: `count` groups over `d` coordinates,
/// then coverage forced by assigning stragglers to random groups.
pub fn random_groups(rng: &mut TestRng, d: usize, count: usize) -> GroupStructure {
    let mut groups: Vec<Vec<usize>> = (0..count)
        .map(|_| {
            let size = 1 + rng.below(d);
            let mut g: Vec<usize> = (0..d).collect();
            for i in 0..size {
                let j = i + rng.below(d - i);
                g.swap(i, j);
            }
            g.truncate(size);
            g
        })
        .collect();
    let mut covered = vec![false; d];
    for g in &groups {
        for &j in g {
            covered[j] = true;
        }
    }
    for (j, c) in covered.iter().enumerate() {
        if !c {
            let r = rng.below(count);
            if !groups[r].contains(&j) {
                groups[r].push(j);
            }
        }
    }
    GroupStructure::new(d, groups).unwrap()
}
