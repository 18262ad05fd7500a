//! Global rewards: set functions over the ground set `V = S x T`.
//!
//! Every reward is pure and order-insensitive; subsets are passed as slices
//! of distinct elements. Implementations may override the batch hooks
//! (`prefix_marginals`, `singleton_values`, `complement_marginals`) with
//! incremental evaluations; the defaults fall back to repeated `evaluate`.

use crate::error::{Error, Result};
use crate::gmdp::{GroundElement, GroundSet};
use crate::semigrad::{ModularReward, Provenance};

/// Declared structure of a reward; drives bound construction and guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewardKind {
    Submodular,
    Supermodular,
    /// A declared sum of a submodular and a supermodular part.
    Bp,
    /// No declared structure; usable when a decomposition is supplied.
    Arbitrary,
}

/// View of `F` as `submodular + supermodular + constant` (pointwise).
pub struct Decomposition<'a> {
    pub submodular: &'a dyn GlobalReward,
    pub supermodular: &'a dyn GlobalReward,
    pub constant: f64,
}

/// A set function `F: 2^V -> R` over ground elements.
pub trait GlobalReward: Send + Sync {
    fn evaluate(&self, x: &[GroundElement]) -> f64;

    fn kind(&self) -> RewardKind;

    /// F(X + v) - F(X). `x` must not already contain `v`.
    fn marginal(&self, v: GroundElement, x: &[GroundElement]) -> f64 {
        let mut with = Vec::with_capacity(x.len() + 1);
        with.extend_from_slice(x);
        with.push(v);
        self.evaluate(&with) - self.evaluate(x)
    }

    /// Optional (submodular, supermodular, constant) split with
    /// `F = Q + G + c` pointwise.
    fn decomposition(&self) -> Option<Decomposition<'_>> {
        None
    }

    /// Marginal gains along a chain: entry i is `F(S_i) - F(S_{i-1})` where
    /// `S_i` holds the first i chain elements.
    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut out = Vec::with_capacity(chain.len());
        let mut prev = self.evaluate(&[]);
        let mut prefix = Vec::with_capacity(chain.len());
        for &e in chain {
            prefix.push(e);
            let cur = self.evaluate(&prefix);
            out.push(cur - prev);
            prev = cur;
        }
        out
    }

    /// F({v}) for every ground element, indexed flat.
    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        ground.elements().map(|e| self.evaluate(&[e])).collect()
    }

    /// F(v | V - v) for every ground element, indexed flat.
    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        let full: Vec<GroundElement> = ground.elements().collect();
        let f_full = self.evaluate(&full);
        let mut out = Vec::with_capacity(full.len());
        let mut rest: Vec<GroundElement> = Vec::with_capacity(full.len() - 1);
        for i in 0..full.len() {
            rest.clear();
            rest.extend(full.iter().take(i).copied());
            rest.extend(full.iter().skip(i + 1).copied());
            out.push(f_full - self.evaluate(&rest));
        }
        out
    }

    /// For rewards that factor through the set of visited states:
    /// `F(X) = F'(states(X))`. Enables the state-dependent bounds.
    fn state_view(&self) -> Option<&dyn StateSetReward> {
        None
    }
}

/// State-level view `F': 2^S -> R` of a time-invariant reward.
pub trait StateSetReward: Send + Sync {
    fn evaluate_states(&self, states: &[usize]) -> f64;

    /// F'(base + s) - F'(base). `base` must not already contain `s`.
    fn state_marginal(&self, s: usize, base: &[usize]) -> f64 {
        let mut with = Vec::with_capacity(base.len() + 1);
        with.extend_from_slice(base);
        with.push(s);
        self.evaluate_states(&with) - self.evaluate_states(base)
    }

    /// Marginal gains along a state chain (see `prefix_marginals`).
    fn state_prefix_marginals(&self, chain: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(chain.len());
        let mut prev = self.evaluate_states(&[]);
        let mut prefix = Vec::with_capacity(chain.len());
        for &s in chain {
            prefix.push(s);
            let cur = self.evaluate_states(&prefix);
            out.push(cur - prev);
            prev = cur;
        }
        out
    }

    /// Candidates ordered by greedily maximal marginal gain on top of
    /// `visited`. Ties keep the earliest candidate, so the caller's list
    /// order is the tie-break: pass an ascending list for deterministic
    /// index ties, or a shuffled one to sample among the (typically many)
    /// equally-good greedy chains.
    fn greedy_order(&self, visited: &[usize], candidates: &[usize]) -> Vec<usize> {
        let mut base: Vec<usize> = visited.to_vec();
        let mut remaining: Vec<usize> = candidates.to_vec();
        let mut out = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let mut best_idx = 0;
            let mut best_gain = f64::NEG_INFINITY;
            for (i, &s) in remaining.iter().enumerate() {
                let gain = self.state_marginal(s, &base);
                if gain > best_gain {
                    best_gain = gain;
                    best_idx = i;
                }
            }
            let s = remaining.remove(best_idx);
            base.push(s);
            out.push(s);
        }
        out
    }
}

fn state_counts(x: &[GroundElement], num_states: usize) -> Vec<u32> {
    let mut counts = vec![0u32; num_states];
    for e in x {
        counts[e.state] += 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

/// `F(X) = | union of D^s over states s visited by X |`: monotone submodular,
/// normalized, and fully curved whenever every cell is covered by more than
/// one ground element.
pub struct CoverageReward {
    disks: Vec<Vec<usize>>,
    universe: usize,
}

/// `disks[s]` lists the cells observed from state s; cells index the same
/// range as states.
pub fn coverage_reward(disks: Vec<Vec<usize>>) -> Result<CoverageReward> {
    if disks.is_empty() {
        return Err(Error::InvalidReward("empty disk family".into()));
    }
    let universe = disks.len();
    for (s, disk) in disks.iter().enumerate() {
        if let Some(&c) = disk.iter().find(|&&c| c >= universe) {
            return Err(Error::InvalidReward(format!(
                "disk of state {s} covers cell {c}, universe has {universe} cells"
            )));
        }
    }
    Ok(CoverageReward { disks, universe })
}

impl CoverageReward {
    pub fn disks(&self) -> &[Vec<usize>] {
        &self.disks
    }
}

impl GlobalReward for CoverageReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        let mut covered = vec![false; self.universe];
        let mut count = 0usize;
        for e in x {
            for &c in &self.disks[e.state] {
                if !covered[c] {
                    covered[c] = true;
                    count += 1;
                }
            }
        }
        count as f64
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Submodular
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut covered = vec![false; self.universe];
        chain
            .iter()
            .map(|e| {
                let mut gain = 0usize;
                for &c in &self.disks[e.state] {
                    if !covered[c] {
                        covered[c] = true;
                        gain += 1;
                    }
                }
                gain as f64
            })
            .collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        let per_state: Vec<f64> = (0..self.universe)
            .map(|s| {
                let mut unique: Vec<usize> = self.disks[s].clone();
                unique.sort_unstable();
                unique.dedup();
                unique.len() as f64
            })
            .collect();
        ground.elements().map(|e| per_state[e.state]).collect()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        // With two or more copies of each state in V, dropping one changes
        // nothing; with a single copy, the loss is the cells no other state
        // covers.
        if ground.horizon >= 2 {
            return vec![0.0; ground.size()];
        }
        let mut coverers = vec![0u32; self.universe];
        for s in 0..ground.num_states {
            let mut unique: Vec<usize> = self.disks[s].clone();
            unique.sort_unstable();
            unique.dedup();
            for c in unique {
                coverers[c] += 1;
            }
        }
        ground
            .elements()
            .map(|e| {
                let mut unique: Vec<usize> = self.disks[e.state].clone();
                unique.sort_unstable();
                unique.dedup();
                unique.iter().filter(|&&c| coverers[c] == 1).count() as f64
            })
            .collect()
    }

    fn state_view(&self) -> Option<&dyn StateSetReward> {
        Some(self)
    }
}

impl StateSetReward for CoverageReward {
    fn evaluate_states(&self, states: &[usize]) -> f64 {
        let mut covered = vec![false; self.universe];
        let mut count = 0usize;
        for &s in states {
            for &c in &self.disks[s] {
                if !covered[c] {
                    covered[c] = true;
                    count += 1;
                }
            }
        }
        count as f64
    }

    fn state_prefix_marginals(&self, chain: &[usize]) -> Vec<f64> {
        let mut covered = vec![false; self.universe];
        chain
            .iter()
            .map(|&s| {
                let mut gain = 0usize;
                for &c in &self.disks[s] {
                    if !covered[c] {
                        covered[c] = true;
                        gain += 1;
                    }
                }
                gain as f64
            })
            .collect()
    }

    fn greedy_order(&self, visited: &[usize], candidates: &[usize]) -> Vec<usize> {
        let mut covered = vec![false; self.universe];
        for &s in visited {
            for &c in &self.disks[s] {
                covered[c] = true;
            }
        }
        let mut remaining: Vec<usize> = candidates.to_vec();
        let mut out = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let mut best_idx = 0;
            let mut best_gain = -1i64;
            for (i, &s) in remaining.iter().enumerate() {
                let gain = self.disks[s].iter().filter(|&&c| !covered[c]).count() as i64;
                if gain > best_gain {
                    best_gain = gain;
                    best_idx = i;
                }
            }
            let s = remaining.remove(best_idx);
            for &c in &self.disks[s] {
                covered[c] = true;
            }
            out.push(s);
        }
        out
    }
}

/// Chebyshev ball of the given radius around each grid cell.
pub fn chebyshev_disks(width: usize, height: usize, radius: usize) -> Vec<Vec<usize>> {
    let r = radius as isize;
    let mut disks = Vec::with_capacity(width * height);
    for row in 0..height as isize {
        for col in 0..width as isize {
            let mut disk = Vec::new();
            for dr in -r..=r {
                for dc in -r..=r {
                    let (nr, nc) = (row + dr, col + dc);
                    if nr >= 0 && nr < height as isize && nc >= 0 && nc < width as isize {
                        disk.push((nr * width as isize + nc) as usize);
                    }
                }
            }
            disks.push(disk);
        }
    }
    disks
}

/// 2x2 observation window: the cell itself plus its right, upper, and
/// upper-right neighbors, clipped at the boundary.
pub fn quad_disks(width: usize, height: usize) -> Vec<Vec<usize>> {
    let mut disks = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            let mut disk = vec![row * width + col];
            if col + 1 < width {
                disk.push(row * width + col + 1);
            }
            if row + 1 < height {
                disk.push((row + 1) * width + col);
                if col + 1 < width {
                    disk.push((row + 1) * width + col + 1);
                }
            }
            disks.push(disk);
        }
    }
    disks
}

// ---------------------------------------------------------------------------
// Bounded-curvature coverage
// ---------------------------------------------------------------------------

/// Per state: 1 for the first visit, `alpha` for each revisit, so
/// `F(X) = sum_s 1{C(X,s) > 0} * (1 + alpha * (C(X,s) - 1))`.
/// Monotone submodular with curvature exactly `1 - alpha`; `alpha = 0` is
/// distinct-state coverage, `alpha = 1` is the additive count `|X|`.
pub struct BoundedCurvatureCoverage {
    alpha: f64,
    num_states: usize,
}

pub fn bounded_curvature_coverage(alpha: f64, num_states: usize) -> Result<BoundedCurvatureCoverage> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidReward(format!("alpha {alpha} outside [0, 1]")));
    }
    if num_states == 0 {
        return Err(Error::InvalidReward("no states".into()));
    }
    Ok(BoundedCurvatureCoverage { alpha, num_states })
}

impl GlobalReward for BoundedCurvatureCoverage {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        state_counts(x, self.num_states)
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| 1.0 + self.alpha * (c as f64 - 1.0))
            .sum()
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Submodular
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut counts = vec![0u32; self.num_states];
        chain
            .iter()
            .map(|e| {
                let c = counts[e.state];
                counts[e.state] += 1;
                if c == 0 {
                    1.0
                } else {
                    self.alpha
                }
            })
            .collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        vec![1.0; ground.size()]
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        // Removing one copy of a state leaves horizon - 1 copies behind.
        let m = if ground.horizon >= 2 { self.alpha } else { 1.0 };
        vec![m; ground.size()]
    }
}

// ---------------------------------------------------------------------------
// State-visitation entropy
// ---------------------------------------------------------------------------

/// Entropy of state-visitation counts normalized by the horizon:
/// `F(X) = -sum_s (c_s / H) ln(c_s / H)`.
///
/// On full trajectories (|X| = H) this is the entropy of the empirical
/// state distribution. Normalizing by the fixed horizon rather than |X|
/// keeps every per-state term concave in its count, which makes F genuinely
/// submodular on all of 2^V; it is non-monotone (revisits past H/e lose
/// value) and normalized at the empty set.
pub struct EntropyReward {
    num_states: usize,
    horizon: usize,
}

pub fn entropy_reward(num_states: usize, horizon: usize) -> Result<EntropyReward> {
    if num_states == 0 || horizon == 0 {
        return Err(Error::InvalidReward("entropy needs states and a horizon".into()));
    }
    Ok(EntropyReward { num_states, horizon })
}

impl EntropyReward {
    fn term(&self, c: u32) -> f64 {
        if c == 0 {
            0.0
        } else {
            let p = c as f64 / self.horizon as f64;
            -p * p.ln()
        }
    }
}

impl GlobalReward for EntropyReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        state_counts(x, self.num_states)
            .into_iter()
            .map(|c| self.term(c))
            .sum()
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Submodular
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut counts = vec![0u32; self.num_states];
        chain
            .iter()
            .map(|e| {
                let c = counts[e.state];
                counts[e.state] += 1;
                self.term(c + 1) - self.term(c)
            })
            .collect()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        let h = ground.horizon as u32;
        vec![self.term(h) - self.term(h - 1); ground.size()]
    }
}

// ---------------------------------------------------------------------------
// Synergy
// ---------------------------------------------------------------------------

/// `F(X) = sum_i |X ∩ S_i|^beta` over element sets S_i ⊆ V with beta >= 1:
/// monotone supermodular, normalized.
pub struct SynergyReward {
    sets: Vec<Vec<usize>>,
    beta: f64,
    member_of: Vec<Vec<u32>>,
    ground: GroundSet,
}

pub fn synergy_reward(
    sets: Vec<Vec<GroundElement>>,
    beta: f64,
    ground: GroundSet,
) -> Result<SynergyReward> {
    if beta < 1.0 || !beta.is_finite() {
        return Err(Error::InvalidReward(format!("beta {beta} must be >= 1")));
    }
    let mut member_of = vec![Vec::new(); ground.size()];
    let mut flat_sets = Vec::with_capacity(sets.len());
    for (i, set) in sets.into_iter().enumerate() {
        let mut flat: Vec<usize> = Vec::with_capacity(set.len());
        for e in set {
            if !ground.contains(e) {
                return Err(Error::InvalidReward(format!(
                    "synergy set {i} contains out-of-range element ({}, {})",
                    e.state, e.time
                )));
            }
            flat.push(ground.flatten(e));
        }
        flat.sort_unstable();
        flat.dedup();
        for &idx in &flat {
            member_of[idx].push(i as u32);
        }
        flat_sets.push(flat);
    }
    Ok(SynergyReward { sets: flat_sets, beta, member_of, ground })
}

impl SynergyReward {
    fn intersection_counts(&self, x: &[GroundElement]) -> Vec<u32> {
        let mut counts = vec![0u32; self.sets.len()];
        for e in x {
            for &i in &self.member_of[self.ground.flatten(*e)] {
                counts[i as usize] += 1;
            }
        }
        counts
    }

    fn pow(&self, c: f64) -> f64 {
        c.powf(self.beta)
    }
}

impl GlobalReward for SynergyReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        self.intersection_counts(x)
            .into_iter()
            .map(|c| self.pow(c as f64))
            .sum()
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Supermodular
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut counts = vec![0u32; self.sets.len()];
        chain
            .iter()
            .map(|e| {
                let mut gain = 0.0;
                for &i in &self.member_of[self.ground.flatten(*e)] {
                    let c = counts[i as usize] as f64;
                    gain += self.pow(c + 1.0) - self.pow(c);
                    counts[i as usize] += 1;
                }
                gain
            })
            .collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        (0..ground.size())
            .map(|idx| self.member_of[idx].len() as f64)
            .collect()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        (0..ground.size())
            .map(|idx| {
                self.member_of[idx]
                    .iter()
                    .map(|&i| {
                        let n = self.sets[i as usize].len() as f64;
                        self.pow(n) - self.pow(n - 1.0)
                    })
                    .sum()
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Diverse synergies (submodular + supermodular sum)
// ---------------------------------------------------------------------------

/// Coverage plus synergy: the canonical declared-BP reward.
pub struct DiverseSynergyReward {
    coverage: CoverageReward,
    synergy: SynergyReward,
}

pub fn diverse_synergy_reward(
    disks: Vec<Vec<usize>>,
    sets: Vec<Vec<GroundElement>>,
    beta: f64,
    ground: GroundSet,
) -> Result<DiverseSynergyReward> {
    Ok(DiverseSynergyReward {
        coverage: coverage_reward(disks)?,
        synergy: synergy_reward(sets, beta, ground)?,
    })
}

impl GlobalReward for DiverseSynergyReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        self.coverage.evaluate(x) + self.synergy.evaluate(x)
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Bp
    }

    fn decomposition(&self) -> Option<Decomposition<'_>> {
        Some(Decomposition {
            submodular: &self.coverage,
            supermodular: &self.synergy,
            constant: 0.0,
        })
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let q = self.coverage.prefix_marginals(chain);
        let g = self.synergy.prefix_marginals(chain);
        q.into_iter().zip(g).map(|(a, b)| a + b).collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        let q = self.coverage.singleton_values(ground);
        let g = self.synergy.singleton_values(ground);
        q.into_iter().zip(g).map(|(a, b)| a + b).collect()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        let q = self.coverage.complement_marginals(ground);
        let g = self.synergy.complement_marginals(ground);
        q.into_iter().zip(g).map(|(a, b)| a + b).collect()
    }
}

// ---------------------------------------------------------------------------
// Safe coverage
// ---------------------------------------------------------------------------

/// Normalized supermodular penalty `G'(X) = -C * 1{X touches an unsafe
/// state}`; non-monotone, fully curved.
pub struct SafetyPenalty {
    unsafe_state: Vec<bool>,
    penalty: f64,
}

impl SafetyPenalty {
    fn hits(&self, x: &[GroundElement]) -> bool {
        x.iter().any(|e| self.unsafe_state[e.state])
    }
}

impl GlobalReward for SafetyPenalty {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        if self.hits(x) {
            -self.penalty
        } else {
            0.0
        }
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Supermodular
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        let mut hit = false;
        chain
            .iter()
            .map(|e| {
                if !hit && self.unsafe_state[e.state] {
                    hit = true;
                    -self.penalty
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        ground
            .elements()
            .map(|e| if self.unsafe_state[e.state] { -self.penalty } else { 0.0 })
            .collect()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        let unsafe_copies: usize = (0..ground.num_states)
            .filter(|&s| self.unsafe_state[s])
            .count()
            * ground.horizon;
        ground
            .elements()
            .map(|e| {
                // Removing the only unsafe copy flips the indicator.
                if self.unsafe_state[e.state] && unsafe_copies == 1 {
                    -self.penalty
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `F(X) = |covered cells| + C * 1{X avoids all unsafe states}`. Shipped as
/// arbitrary kind with the explicit split `coverage + G' + C`, where the
/// constant keeps the parts normalized while `F(empty) = C`.
pub struct SafeCoverageReward {
    coverage: CoverageReward,
    safety: SafetyPenalty,
    penalty: f64,
}

pub fn safe_coverage_reward(
    disks: Vec<Vec<usize>>,
    unsafe_states: &[usize],
    penalty: f64,
) -> Result<SafeCoverageReward> {
    let coverage = coverage_reward(disks)?;
    if penalty < 0.0 || !penalty.is_finite() {
        return Err(Error::InvalidReward(format!("penalty {penalty} must be >= 0")));
    }
    let num_states = coverage.disks.len();
    let mut unsafe_state = vec![false; num_states];
    for &s in unsafe_states {
        if s >= num_states {
            return Err(Error::InvalidReward(format!("unsafe state {s} out of range")));
        }
        unsafe_state[s] = true;
    }
    Ok(SafeCoverageReward {
        coverage,
        safety: SafetyPenalty { unsafe_state, penalty },
        penalty,
    })
}

impl GlobalReward for SafeCoverageReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        self.coverage.evaluate(x) + self.safety.evaluate(x) + self.penalty
    }

    fn kind(&self) -> RewardKind {
        RewardKind::Arbitrary
    }

    fn decomposition(&self) -> Option<Decomposition<'_>> {
        Some(Decomposition {
            submodular: &self.coverage,
            supermodular: &self.safety,
            constant: self.penalty,
        })
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        let q = self.coverage.singleton_values(ground);
        let g = self.safety.singleton_values(ground);
        q.into_iter().zip(g).map(|(a, b)| a + b + self.penalty).collect()
    }
}

// ---------------------------------------------------------------------------
// Modularization and curvature
// ---------------------------------------------------------------------------

/// The classic modular proxy: each element keeps its singleton value.
pub fn modularize(reward: &dyn GlobalReward, ground: &GroundSet) -> ModularReward {
    ModularReward::new(
        reward.singleton_values(ground),
        0.0,
        Provenance::Modularized,
        *ground,
    )
}

/// Submodular and supermodular curvature of a monotone reward (Def. of
/// curvature via singleton values against complement marginals).
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    /// `1 - min_v F(v | V - v) / F(v)`, clamped to [0, 1].
    pub k_sub: f64,
    /// `1 - min_v F(v) / F(v | V - v)`, clamped to [0, 1].
    pub k_sup: f64,
    /// Elements with both quantities zero, skipped as uninformative.
    pub skipped_elements: Vec<GroundElement>,
}

pub fn compute_curvature(reward: &dyn GlobalReward, ground: &GroundSet) -> Result<CurvatureReport> {
    if ground.size() == 0 {
        return Err(Error::InvalidConfig("empty ground set".into()));
    }
    let singles = reward.singleton_values(ground);
    let comps = reward.complement_marginals(ground);
    let mut skipped = Vec::new();
    let mut min_sub = f64::INFINITY;
    let mut min_sup = f64::INFINITY;
    let mut informative = false;
    for (idx, (&s, &c)) in singles.iter().zip(comps.iter()).enumerate() {
        if s == 0.0 && c == 0.0 {
            skipped.push(ground.unflatten(idx));
            continue;
        }
        informative = true;
        min_sub = min_sub.min(ratio(c, s));
        min_sup = min_sup.min(ratio(s, c));
    }
    if !informative {
        return Err(Error::UndefinedCurvature);
    }
    Ok(CurvatureReport {
        k_sub: (1.0 - min_sub).clamp(0.0, 1.0),
        k_sup: (1.0 - min_sup).clamp(0.0, 1.0),
        skipped_elements: skipped,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        num / den
    }
}
