//! Anchored cyclic projections onto an intersection of group cylinders,
//! plus the closed-form per-set projections for `p = 2` and `p = ∞`.
//!
//! The iteration is `w^n = x/(n+1) + n/(n+1) · π_n(w^{n-1})`, where `π_n`
//! cycles through the per-set projections; it converges strongly to the
//! projection of the anchor `x` onto the intersection.

use alloc::vec::Vec;

use crate::error::Error;
use crate::group::{group_norm, ExponentPair};
use crate::math;
use crate::Result;

/// Stopping rule for the cyclic iteration, checked once per full cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Surrogate for a Euclidean distance-to-projection tolerance `tol`:
    /// stop when the worst constraint violation and the per-cycle
    /// displacement are both below `tol/2`.
    Distance(f64),
    /// Stop when the per-cycle displacement relative to the iterate norm
    /// falls below the given threshold.
    RelativeChange(f64),
}

/// Result of a cyclic-projection run.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicOutcome {
    pub point: Vec<f64>,
    /// Per-set projections performed.
    pub iterations: usize,
    /// max(constraint violation, last per-cycle displacement) at exit.
    pub residual: f64,
}

/// Default iteration budget: `100 · B̂ · ⌈1/tol⌉`, capped at 10^6. The
/// anchored averaging converges slowly; the cap surfaces pathologies
/// instead of hanging.
pub fn default_max_iter(num_sets: usize, tol: f64) -> usize {
    let per_set = libm::ceil(1.0 / tol.max(1e-6)) as usize;
    (100usize.saturating_mul(num_sets).saturating_mul(per_set)).min(1_000_000)
}

/// Projects the coordinates of `w` listed in `group` onto the Euclidean
/// ball of the given radius; all other coordinates are untouched.
pub fn project_cylinder_p2(w: &mut [f64], group: &[usize], radius: f64) {
    let norm = group_norm(w, group, 2.0).expect("valid group");
    if norm > radius {
        let scale = radius / norm;
        for &j in group {
            w[j] *= scale;
        }
    }
}

/// Projects a (dense) vector onto the ℓ1 ball of the given radius, using
/// the sorted-prefix search for the threshold `μ`.
pub fn project_l1_ball(w: &mut [f64], radius: f64) {
    let l1: f64 = w.iter().map(|&v| math::abs(v)).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<f64> = w.iter().map(|&v| math::abs(v)).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());

    // Find the first k with
    //   sum_{j<k} (w*_j - w*_k)  <=  radius  <=  sum_{j<=k} (w*_j - w*_{k+1}),
    // with w*_{len+1} treated as 0.
    let mut prefix = 0.0; // sum of the k-1 largest magnitudes
    let mut mu = 0.0;
    for k in 1..=mags.len() {
        let wk = mags[k - 1];
        let wk1 = if k < mags.len() { mags[k] } else { 0.0 };
        let lo = prefix - (k as f64 - 1.0) * wk;
        let hi = prefix + wk - (k as f64) * wk1;
        if lo <= radius && radius <= hi {
            mu = wk + (lo - radius) / k as f64;
            break;
        }
        prefix += wk;
    }
    for v in w.iter_mut() {
        let m = math::abs(*v) - mu;
        *v = if m > 0.0 { m * v.signum() } else { 0.0 };
    }
}

/// ℓ∞-cylinder projection: restrict to `group`, project onto the ℓ1 ball,
/// scatter back.
pub fn project_cylinder_linf(w: &mut [f64], group: &[usize], radius: f64) {
    let mut restricted: Vec<f64> = group.iter().map(|&j| w[j]).collect();
    project_l1_ball(&mut restricted, radius);
    for (&j, v) in group.iter().zip(restricted) {
        w[j] = v;
    }
}

/// Cyclic projections onto `∩_r {w : ‖w‖_{G_r,q} ≤ radius}` anchored at
/// `x`, with a pluggable per-set projector.
pub fn cyclic_project<F>(
    x: &[f64],
    sets: &[&[usize]],
    radius: f64,
    q: f64,
    mut per_set: F,
    stop: StopRule,
    max_iter: usize,
) -> Result<CyclicOutcome>
where
    F: FnMut(&mut [f64], &[usize], f64),
{
    if sets.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sets",
            value: 0.0,
        });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
        });
    }
    let b = sets.len();
    let mut w: Vec<f64> = x.to_vec();
    let mut cycle_start = w.clone();
    let mut n = 0usize;
    let mut residual = f64::INFINITY;
    while n < max_iter {
        n += 1;
        per_set(&mut w, sets[(n - 1) % b], radius);
        let blend = n as f64 / (n as f64 + 1.0);
        let anchor = 1.0 / (n as f64 + 1.0);
        for (wi, &xi) in w.iter_mut().zip(x) {
            *wi = anchor * xi + blend * *wi;
        }
        if n % b == 0 {
            let displacement = math::dist2(&w, &cycle_start);
            let violation = sets
                .iter()
                .map(|g| (group_norm(&w, g, q).expect("valid group") - radius).max(0.0))
                .fold(0.0, f64::max);
            residual = displacement.max(violation);
            let done = match stop {
                StopRule::Distance(tol) => {
                    violation <= tol / 2.0 && displacement <= tol / 2.0
                }
                StopRule::RelativeChange(eps) => {
                    displacement <= eps * math::norm2(&w).max(1.0)
                }
            };
            if done {
                return Ok(CyclicOutcome {
                    point: w,
                    iterations: n,
                    residual,
                });
            }
            cycle_start.copy_from_slice(&w);
        }
    }
    Err(Error::ToleranceNotReached {
        required: match stop {
            StopRule::Distance(tol) => tol,
            StopRule::RelativeChange(eps) => eps,
        },
        achieved: residual,
        iterations: n,
    })
}

/// Cyclic projections with the built-in per-set projector for `p`.
pub fn cyclic_project_p(
    x: &[f64],
    sets: &[&[usize]],
    radius: f64,
    p: ExponentPair,
    stop: StopRule,
    max_iter: usize,
) -> Result<CyclicOutcome> {
    if p.is_inf() {
        cyclic_project(x, sets, radius, p.q(), project_cylinder_linf, stop, max_iter)
    } else {
        cyclic_project(x, sets, radius, p.q(), project_cylinder_p2, stop, max_iter)
    }
}
