//! Group structures, group-restricted norms and active-group detection.
//!
//! Coordinates are 0-based throughout the library; the 1-based convention
//! of the on-disk group format is handled by the CLI crate. Error messages
//! name groups with their 1-based position, matching the file format.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::Result;

/// Penalty exponent `p` together with its conjugate `q` (`1/p + 1/q = 1`).
///
/// Only `p = 2` and `p = ∞` ship with closed-form per-set projections, so
/// construction is restricted to those two values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

impl ExponentPair {
    /// The group-lasso exponent, `p = q = 2`.
    pub const fn p2() -> Self {
        Self { p: 2.0, q: 2.0 }
    }

    /// `p = ∞`, `q = 1`: the dual cylinders are ℓ1 balls.
    pub const fn p_inf() -> Self {
        Self {
            p: f64::INFINITY,
            q: 1.0,
        }
    }

    pub fn new(p: f64) -> Result<Self> {
        if p == 2.0 {
            Ok(Self::p2())
        } else if p == f64::INFINITY {
            Ok(Self::p_inf())
        } else {
            Err(Error::InvalidParameter { name: "p", value: p })
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_inf(&self) -> bool {
        self.p.is_infinite()
    }
}

/// A family of (possibly overlapping) index sets over `{0, .., d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    d: usize,
    groups: Vec<Vec<usize>>,
    replicated_dim: usize,
    /// Offset of each group's block in the replicated (latent) layout.
    offsets: Vec<usize>,
}

impl GroupStructure {
    /// Validates and builds a group structure. Groups must be nonempty,
    /// duplicate-free and within range; they are stored sorted.
    ///
    /// The union of the groups is *not* required to cover all coordinates:
    /// the synthetic generators draw groups at random and may leave
    /// coordinates uncovered. An uncovered coordinate is implicitly
    /// constrained to zero by the penalty, which is exactly how the
    /// proximity operator treats it.
    pub fn new(d: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter { name: "d", value: 0.0 });
        }
        let mut sorted = Vec::with_capacity(groups.len());
        for (r, g) in groups.into_iter().enumerate() {
            if g.is_empty() {
                return Err(Error::EmptyGroup { group: r + 1 });
            }
            let mut g = g;
            g.sort_unstable();
            for w in g.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateIndex {
                        group: r + 1,
                        index: w[0],
                    });
                }
            }
            if *g.last().unwrap() >= d {
                return Err(Error::IndexOutOfRange {
                    group: r + 1,
                    index: *g.last().unwrap(),
                    dim: d,
                });
            }
            sorted.push(g);
        }
        let mut offsets = Vec::with_capacity(sorted.len());
        let mut acc = 0;
        for g in &sorted {
            offsets.push(acc);
            acc += g.len();
        }
        Ok(Self {
            d,
            groups: sorted,
            replicated_dim: acc,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, r: usize) -> &[usize] {
        &self.groups[r]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Total size of the latent (replicated) space, `Σ_r |G_r|`.
    pub fn replicated_dim(&self) -> usize {
        self.replicated_dim
    }

    /// Offset of group `r`'s block within a latent vector.
    pub fn offset(&self, r: usize) -> usize {
        self.offsets[r]
    }

    /// True when every coordinate belongs to at least one group.
    pub fn covers_all(&self) -> bool {
        let mut seen = vec![false; self.d];
        for g in &self.groups {
            for &j in g {
                seen[j] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Copies `x` into every latent slot whose group contains the
    /// coordinate (the operator `P`).
    pub fn replicate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: x.len(),
            });
        }
        let mut v = Vec::with_capacity(self.replicated_dim);
        for g in &self.groups {
            for &j in g {
                v.push(x[j]);
            }
        }
        Ok(v)
    }

    /// The adjoint `P^* v = Σ_r P_r^* v_r`: each coordinate receives the
    /// sum of its latent copies.
    pub fn adjoint_sum(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.replicated_dim {
            return Err(Error::DimensionMismatch {
                expected: self.replicated_dim,
                actual: v.len(),
            });
        }
        let mut x = vec![0.0; self.d];
        let mut k = 0;
        for g in &self.groups {
            for &j in g {
                x[j] += v[k];
                k += 1;
            }
        }
        Ok(x)
    }
}

/// `(Σ_{j∈group} |x_j|^q)^{1/q}`, or the max of `|x_j|` for `q = ∞`.
pub fn group_norm(x: &[f64], group: &[usize], q: f64) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::EmptyGroup { group: 0 });
    }
    if q < 1.0 {
        return Err(Error::InvalidParameter { name: "q", value: q });
    }
    for &j in group {
        if j >= x.len() {
            return Err(Error::IndexOutOfRange {
                group: 0,
                index: j,
                dim: x.len(),
            });
        }
    }
    if q.is_infinite() {
        return Ok(group.iter().fold(0.0, |m, &j| m.max(math::abs(x[j]))));
    }
    if q == 1.0 {
        return Ok(group.iter().map(|&j| math::abs(x[j])).sum());
    }
    if q == 2.0 {
        let s: f64 = group.iter().map(|&j| x[j] * x[j]).sum();
        return Ok(math::sqrt(s));
    }
    let s: f64 = group.iter().map(|&j| math::powf(math::abs(x[j]), q)).sum();
    Ok(math::powf(s, 1.0 / q))
}

/// The active groups at `(x, λ)` together with the coordinate indicator
/// needed by the dual Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    member_flags: Vec<bool>,
    members: Vec<usize>,
    /// For each coordinate, the *local* indices (positions in `members`)
    /// of the active groups containing it.
    indicator: Vec<Vec<usize>>,
}

impl ActiveSet {
    fn from_members(gs: &GroupStructure, members: Vec<usize>) -> Self {
        let mut member_flags = vec![false; gs.num_groups()];
        let mut indicator = vec![Vec::new(); gs.dim()];
        for (local, &r) in members.iter().enumerate() {
            member_flags[r] = true;
            for &j in gs.group(r) {
                indicator[j].push(local);
            }
        }
        Self {
            member_flags,
            members,
            indicator,
        }
    }

    /// An active set containing every group (used when the reduction of
    /// the active-group lemma is deliberately bypassed in tests).
    pub fn full(gs: &GroupStructure) -> Self {
        Self::from_members(gs, (0..gs.num_groups()).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Global indices of the active groups, in order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, r: usize) -> bool {
        self.member_flags[r]
    }

    /// Local active-group indices containing coordinate `j`.
    pub fn groups_of(&self, j: usize) -> &[usize] {
        &self.indicator[j]
    }
}

/// `Ĝ = {G ∈ 𝒢 : ‖x‖_{G,q} > λ}` (strict inequality: a group exactly on
/// the boundary contributes nothing to the projection).
pub fn active_groups(
    x: &[f64],
    lambda: f64,
    gs: &GroupStructure,
    q: f64,
) -> Result<ActiveSet> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
        });
    }
    if x.len() != gs.dim() {
        return Err(Error::DimensionMismatch {
            expected: gs.dim(),
            actual: x.len(),
        });
    }
    let mut members = Vec::new();
    for r in 0..gs.num_groups() {
        if group_norm(x, gs.group(r), q)? > lambda {
            members.push(r);
        }
    }
    Ok(ActiveSet::from_members(gs, members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_overlapping() -> GroupStructure {
        GroupStructure::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn structure_validation() {
        assert!(matches!(
            GroupStructure::new(3, vec![vec![]]),
            Err(Error::EmptyGroup { group: 1 })
        ));
        assert!(matches!(
            GroupStructure::new(3, vec![vec![0, 3]]),
            Err(Error::IndexOutOfRange { group: 1, index: 3, dim: 3 })
        ));
        assert!(matches!(
            GroupStructure::new(3, vec![vec![0], vec![1, 1]]),
            Err(Error::DuplicateIndex { group: 2, index: 1 })
        ));
        let gs = two_overlapping();
        assert_eq!(gs.replicated_dim(), 4);
        assert!(gs.covers_all());
    }

    #[test]
    fn group_norm_examples() {
        let x = [3.0, 4.0, 12.0];
        assert_eq!(group_norm(&[0.0, 0.0, 0.0], &[0, 1], 2.0).unwrap(), 0.0);
        assert_eq!(group_norm(&x, &[0, 1], 2.0).unwrap(), 5.0);
        let y = [3.0, -4.0, 12.0];
        assert_eq!(group_norm(&y, &[0, 1, 2], 1.0).unwrap(), 19.0);
        assert_eq!(group_norm(&y, &[0, 1, 2], f64::INFINITY).unwrap(), 12.0);
        assert!(group_norm(&x, &[], 2.0).is_err());
        assert!(group_norm(&x, &[7], 2.0).is_err());
    }

    #[test]
    fn active_group_examples() {
        let gs = two_overlapping();
        let zero = [0.0; 3];
        assert!(active_groups(&zero, 1.0, &gs, 2.0).unwrap().is_empty());

        let x = [3.0, 4.0, 0.0];
        let act = active_groups(&x, 1.0, &gs, 2.0).unwrap();
        assert_eq!(act.members(), &[0, 1]); // norms 5 and 4
        assert_eq!(act.groups_of(1), &[0, 1]);

        let act = active_groups(&x, 10.0, &gs, 2.0).unwrap();
        assert!(act.is_empty());

        assert!(active_groups(&x, 0.0, &gs, 2.0).is_err());
    }

    #[test]
    fn boundary_group_is_inactive() {
        // Strict inequality: a norm exactly equal to lambda is not active.
        let gs = GroupStructure::new(2, vec![vec![0, 1]]).unwrap();
        let x = [3.0, 4.0];
        assert!(active_groups(&x, 5.0, &gs, 2.0).unwrap().is_empty());
        assert_eq!(active_groups(&x, 4.999, &gs, 2.0).unwrap().len(), 1);
    }

    #[test]
    fn replicate_and_adjoint() {
        let gs = two_overlapping();
        let (a, b, c) = (1.5, -2.0, 7.0);
        let v = gs.replicate(&[a, b, c]).unwrap();
        assert_eq!(v, vec![a, b, b, c]);
        let x = gs.adjoint_sum(&[a, b, -3.0, c]).unwrap();
        assert_eq!(x, vec![a, b - 3.0, c]);
        // adjoint_sum(replicate(x)) multiplies by group multiplicity
        let y = gs.adjoint_sum(&gs.replicate(&[1.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 1.0]);
        assert!(gs.replicate(&[1.0]).is_err());
        assert!(gs.adjoint_sum(&[1.0]).is_err());
    }

    #[test]
    fn exponent_pairs() {
        let p2 = ExponentPair::new(2.0).unwrap();
        assert_eq!(p2.q(), 2.0);
        let pinf = ExponentPair::new(f64::INFINITY).unwrap();
        assert_eq!(pinf.q(), 1.0);
        assert!(pinf.is_inf());
        assert!(ExponentPair::new(3.0).is_err());
        assert!(ExponentPair::new(1.0).is_err());
    }
}
