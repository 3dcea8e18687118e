//! Deterministic synthetic instances: a prox stress test with random
//! overlapping groups, and two group-sparse regression designs (chained
//! sequential groups without overlap, and a three-plus-noise overlapping
//! layout with 20% pairwise overlap).

use gso_core::{DenseMatrix, GroupStructure};
use rand::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Number of groups `B = alpha * d / d_b`, which must come out integral.
fn group_count(d: usize, db: usize, alpha: f64) -> Result<usize> {
    if db == 0 || d == 0 {
        return Err(Error::Invalid {
            name: "d/db",
            msg: "dimensions must be positive".into(),
        });
    }
    if db > d {
        return Err(Error::Invalid {
            name: "db",
            msg: format!("group size {db} exceeds dimension {d}"),
        });
    }
    let b = alpha * d as f64 / db as f64;
    let rounded = b.round();
    if !(b > 0.0) || (b - rounded).abs() > 1e-9 {
        return Err(Error::Invalid {
            name: "alpha",
            msg: format!("alpha*d/db = {b} is not a positive integer"),
        });
    }
    Ok(rounded as usize)
}

fn sample_group(rng: &mut ChaCha8Rng, d: usize, db: usize) -> Vec<usize> {
    // uniform subset of size db via partial Fisher-Yates
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..db {
        let j = rng.random_range(i..d);
        pool.swap(i, j);
    }
    pool.truncate(db);
    pool
}

/// Prox stress instance: `B` uniform random groups of size `db` and a
/// standard normal point, with per-norm thresholds at 80% of the smallest
/// group norm so that every group is active.
pub struct ProxBenchInstance {
    pub x: Vec<f64>,
    pub gs: GroupStructure,
    /// Threshold for the Euclidean group norms.
    pub tau_p2: f64,
    /// Threshold for the ℓ1 group norms (the `p = ∞` dual).
    pub tau_pinf: f64,
}

pub fn gen_prox_bench(d: usize, db: usize, alpha: f64, seed: u64) -> Result<ProxBenchInstance> {
    let b = group_count(d, db, alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = Vec::with_capacity(b);
    for _ in 0..b {
        groups.push(sample_group(&mut rng, d, db));
    }
    let gs = GroupStructure::new(d, groups)?;
    let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();

    let mut min_p2 = f64::INFINITY;
    let mut min_l1 = f64::INFINITY;
    for g in gs.groups() {
        let p2 = g.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt();
        let l1 = g.iter().map(|&j| x[j].abs()).sum::<f64>();
        min_p2 = min_p2.min(p2);
        min_l1 = min_l1.min(l1);
    }
    Ok(ProxBenchInstance {
        x,
        gs,
        tau_p2: 0.8 * min_p2,
        tau_pinf: 0.8 * min_l1,
    })
}

/// A regression instance with known ground truth.
pub struct RegressionInstance {
    pub design: DenseMatrix,
    pub response: Vec<f64>,
    pub gs: GroupStructure,
    /// Coordinates (0-based) of the generating weight vector's support.
    pub true_support: Vec<usize>,
    pub true_weights: Vec<f64>,
}

fn fill_design(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DenseMatrix {
    let data: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(n, d, data).expect("sized above")
}

fn make_response(rng: &mut ChaCha8Rng, design: &DenseMatrix, w: &[f64]) -> Vec<f64> {
    design
        .matvec(w)
        .into_iter()
        .map(|v| v + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Sequential disjoint groups of 10; the first three groups carry the
/// signal with constant weight `sqrt(2.5)` (a 5:1 signal-to-noise ratio
/// in variance against unit noise).
pub fn gen_regression_no_overlap(d: usize, n: usize, seed: u64) -> Result<RegressionInstance> {
    if d % 10 != 0 || d < 30 {
        return Err(Error::Invalid {
            name: "d",
            msg: format!("need a multiple of 10, at least 30, got {d}"),
        });
    }
    if n == 0 {
        return Err(Error::Invalid {
            name: "n",
            msg: "need at least one sample".into(),
        });
    }
    let groups: Vec<Vec<usize>> = (0..d / 10)
        .map(|g| (10 * g..10 * (g + 1)).collect())
        .collect();
    let gs = GroupStructure::new(d, groups)?;

    let c = 2.5f64.sqrt();
    let mut w = vec![0.0; d];
    for wi in w.iter_mut().take(30) {
        *wi = c;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design = fill_design(&mut rng, n, d);
    let response = make_response(&mut rng, &design, &w);
    Ok(RegressionInstance {
        design,
        response,
        gs,
        true_support: (0..30).collect(),
        true_weights: w,
    })
}

/// Overlapping layout: three structured groups with 20% pairwise overlap
/// carry the signal, the remaining `B - 3` groups are uniform random.
///
/// With `k = db/5`: G1 = [0, 5k), G2 = [4k, 9k), G3 = [0, k) ∪ [8k, 12k);
/// the union covers the first 12k coordinates, the constant signal weight
/// is `sqrt(75/(12k))`, and `n = 10 · 12k`.
pub fn gen_regression_overlap(
    d: usize,
    db: usize,
    alpha: f64,
    seed: u64,
) -> Result<RegressionInstance> {
    if db % 5 != 0 || db == 0 {
        return Err(Error::Invalid {
            name: "db",
            msg: format!("group size must be a positive multiple of 5, got {db}"),
        });
    }
    let b = group_count(d, db, alpha)?;
    if b < 3 {
        return Err(Error::Invalid {
            name: "alpha",
            msg: format!("need at least 3 groups, got {b}"),
        });
    }
    let k = db / 5;
    if 12 * k > d {
        return Err(Error::Invalid {
            name: "d",
            msg: format!("dimension {d} too small for the structured union {}", 12 * k),
        });
    }
    let g1: Vec<usize> = (0..5 * k).collect();
    let g2: Vec<usize> = (4 * k..9 * k).collect();
    let g3: Vec<usize> = (0..k).chain(8 * k..12 * k).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = vec![g1, g2, g3];
    for _ in 3..b {
        groups.push(sample_group(&mut rng, d, db));
    }
    let gs = GroupStructure::new(d, groups)?;

    let support_len = 12 * k;
    let c = (75.0 / support_len as f64).sqrt();
    let mut w = vec![0.0; d];
    for wi in w.iter_mut().take(support_len) {
        *wi = c;
    }

    let n = 10 * support_len;
    let design = fill_design(&mut rng, n, d);
    let response = make_response(&mut rng, &design, &w);
    Ok(RegressionInstance {
        design,
        response,
        gs,
        true_support: (0..support_len).collect(),
        true_weights: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_bench_shape_and_determinism() {
        let a = gen_prox_bench(100, 10, 2.0, 7).unwrap();
        assert_eq!(a.gs.num_groups(), 20);
        assert!(a.gs.groups().iter().all(|g| g.len() == 10));
        assert!(a.tau_p2 > 0.0 && a.tau_pinf > a.tau_p2);
        let b = gen_prox_bench(100, 10, 2.0, 7).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.gs.groups(), b.gs.groups());
        let c = gen_prox_bench(100, 10, 2.0, 8).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn prox_bench_rejects_fractional_group_count() {
        assert!(gen_prox_bench(100, 10, 1.25, 0).is_err());
        assert!(gen_prox_bench(100, 10, 1.2, 0).is_ok());
    }

    #[test]
    fn no_overlap_layout() {
        let inst = gen_regression_no_overlap(50, 40, 3).unwrap();
        assert_eq!(inst.gs.num_groups(), 5);
        assert_eq!(inst.design.rows(), 40);
        assert_eq!(inst.design.cols(), 50);
        assert_eq!(inst.true_support.len(), 30);
        let c = 2.5f64.sqrt();
        assert_eq!(inst.true_weights[29], c);
        assert_eq!(inst.true_weights[30], 0.0);
        assert!(inst.design.data().iter().all(|v| (-1.0..1.0).contains(v)));
        assert!(gen_regression_no_overlap(45, 40, 3).is_err());
    }

    #[test]
    fn overlap_layout_matches_construction() {
        let inst = gen_regression_overlap(100, 10, 2.0, 11).unwrap();
        let gs = &inst.gs;
        assert_eq!(gs.num_groups(), 20);
        assert_eq!(gs.group(0), (0..10).collect::<Vec<_>>());
        assert_eq!(gs.group(1), (8..18).collect::<Vec<_>>());
        let g3: Vec<usize> = (0..2).chain(16..24).collect();
        assert_eq!(gs.group(2), g3);
        // 20% pairwise overlaps among the structured groups
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let ga = gs.group(a);
            let overlap = gs.group(b).iter().filter(|j| ga.contains(j)).count();
            assert_eq!(overlap, 2, "groups {a},{b}");
        }
        assert_eq!(inst.true_support.len(), 24);
        assert_eq!(inst.design.rows(), 240);
        assert!((inst.true_weights[0] - (75.0f64 / 24.0).sqrt()).abs() < 1e-15);
    }
}
