//! Controlled Markov processes with a finite horizon, plus the ground set
//! `V = S x T` on which global rewards live.
//!
//! A trajectory is identified with the set of (state, time) pairs it visits;
//! actions are kept alongside so trajectory probabilities can be computed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rewards::GlobalReward;

/// One (state, time) pair of the ground set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroundElement {
    pub state: usize,
    pub time: usize,
}

impl GroundElement {
    pub fn new(state: usize, time: usize) -> Self {
        GroundElement { state, time }
    }
}

/// Flat order is time-major: index = time * num_states + state.
impl Ord for GroundElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.state).cmp(&(other.time, other.state))
    }
}

impl PartialOrd for GroundElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The ground set `V = S x T`: every state paired with every time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundSet {
    pub num_states: usize,
    pub horizon: usize,
}

impl GroundSet {
    pub fn new(num_states: usize, horizon: usize) -> Self {
        GroundSet { num_states, horizon }
    }

    pub fn size(&self) -> usize {
        self.num_states * self.horizon
    }

    pub fn flatten(&self, e: GroundElement) -> usize {
        debug_assert!(e.state < self.num_states && e.time < self.horizon);
        e.time * self.num_states + e.state
    }

    pub fn unflatten(&self, idx: usize) -> GroundElement {
        debug_assert!(idx < self.size());
        GroundElement::new(idx % self.num_states, idx / self.num_states)
    }

    pub fn contains(&self, e: GroundElement) -> bool {
        e.state < self.num_states && e.time < self.horizon
    }

    /// All elements in ascending flat order.
    pub fn elements(&self) -> impl Iterator<Item = GroundElement> + '_ {
        (0..self.size()).map(move |i| self.unflatten(i))
    }
}

/// A realized path: the visited (state, time) pairs in time order together
/// with the actions taken between them.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub elements: Vec<GroundElement>,
    pub actions: Vec<usize>,
}

impl Trajectory {
    pub fn new(states: Vec<usize>, actions: Vec<usize>) -> Self {
        let elements = states
            .into_iter()
            .enumerate()
            .map(|(t, s)| GroundElement::new(s, t))
            .collect();
        Trajectory { elements, actions }
    }

    pub fn horizon(&self) -> usize {
        self.elements.len()
    }

    pub fn states(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e.state).collect()
    }

    /// Structural validity against a process: length H, times 0..H in order,
    /// states and actions in range. Zero-probability transitions are allowed
    /// here; `trajectory_probability` reports them as probability 0.
    pub fn validate(&self, gmdp: &Gmdp) -> Result<()> {
        if self.elements.len() != gmdp.horizon {
            return Err(Error::MalformedTrajectory(format!(
                "expected {} elements, got {}",
                gmdp.horizon,
                self.elements.len()
            )));
        }
        if self.actions.len() + 1 != gmdp.horizon {
            return Err(Error::MalformedTrajectory(format!(
                "expected {} actions, got {}",
                gmdp.horizon - 1,
                self.actions.len()
            )));
        }
        for (t, e) in self.elements.iter().enumerate() {
            if e.time != t {
                return Err(Error::MalformedTrajectory(format!(
                    "element {t} carries time {}",
                    e.time
                )));
            }
            if e.state >= gmdp.num_states {
                return Err(Error::MalformedTrajectory(format!(
                    "state {} out of range",
                    e.state
                )));
            }
        }
        if let Some(&a) = self.actions.iter().find(|&&a| a >= gmdp.num_actions) {
            return Err(Error::MalformedTrajectory(format!("action {a} out of range")));
        }
        Ok(())
    }
}

/// Grid dimensions kept by grid-built processes for geometry-aware rewards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub width: usize,
    pub height: usize,
}

/// Finite-horizon controlled Markov process with a sparse transition kernel.
#[derive(Clone, Debug)]
pub struct Gmdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    /// kernel[s][a] lists (successor, probability), sorted by successor.
    kernel: Vec<Vec<Vec<(usize, f64)>>>,
    /// Initial state distribution.
    pub initial: Vec<f64>,
    pub grid: Option<GridShape>,
    pub stochasticity: f64,
}

/// JSON schema for grid construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub horizon: usize,
    #[serde(default)]
    pub stochasticity_degree: f64,
    #[serde(default)]
    pub initial_state: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Grid actions in fixed order; moves that would leave the grid stay in place.
pub const GRID_ACTIONS: [&str; 5] = ["left", "right", "up", "down", "stay"];

/// Build the grid process: 5 actions, boundary moves resolve to staying, and
/// with probability `stochasticity_degree` the next state is drawn uniformly
/// from the in-grid 4-neighborhood of the current state (mass merged when the
/// intended target is also a neighbor).
pub fn build_grid(config: &GridConfig) -> Result<Gmdp> {
    let (w, h) = (config.width, config.height);
    if w == 0 || h == 0 {
        return Err(Error::InvalidConfig("grid dimensions must be positive".into()));
    }
    if config.horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let rho = config.stochasticity_degree;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidConfig(format!(
            "stochasticity_degree {rho} outside [0, 1]"
        )));
    }
    let num_states = w * h;
    let init = config.initial_state.unwrap_or(0);
    if init >= num_states {
        return Err(Error::InvalidConfig(format!(
            "initial_state {init} out of range for {num_states} states"
        )));
    }

    let move_to = |s: usize, a: usize| -> usize {
        let (col, row) = (s % w, s / w);
        let (nc, nr) = match a {
            0 => (col.wrapping_sub(1), row),
            1 => (col + 1, row),
            2 => (col, row + 1),
            3 => (col, row.wrapping_sub(1)),
            _ => (col, row),
        };
        if nc < w && nr < h {
            nr * w + nc
        } else {
            s
        }
    };

    let mut kernel = Vec::with_capacity(num_states);
    for s in 0..num_states {
        let neighbors: Vec<usize> = (0..4).map(|a| move_to(s, a)).filter(|&n| n != s).collect();
        let mut rows = Vec::with_capacity(5);
        for a in 0..5 {
            let mut row = std::collections::BTreeMap::new();
            *row.entry(move_to(s, a)).or_insert(0.0) += 1.0 - rho;
            if rho > 0.0 {
                if neighbors.is_empty() {
                    *row.entry(s).or_insert(0.0) += rho;
                } else {
                    let share = rho / neighbors.len() as f64;
                    for &n in &neighbors {
                        *row.entry(n).or_insert(0.0) += share;
                    }
                }
            }
            rows.push(row.into_iter().collect::<Vec<_>>());
        }
        kernel.push(rows);
    }

    let mut initial = vec![0.0; num_states];
    initial[init] = 1.0;
    Ok(Gmdp {
        num_states,
        num_actions: 5,
        horizon: config.horizon,
        kernel,
        initial,
        grid: Some(GridShape { width: w, height: h }),
        stochasticity: rho,
    })
}

impl Gmdp {
    /// General tabular constructor for non-grid processes.
    /// `kernel[s][a]` is a dense row over successors; rows must sum to one.
    pub fn from_kernel(
        kernel: Vec<Vec<Vec<f64>>>,
        initial: Vec<f64>,
        horizon: usize,
    ) -> Result<Gmdp> {
        let num_states = kernel.len();
        if num_states == 0 {
            return Err(Error::InvalidConfig("kernel has no states".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        let num_actions = kernel[0].len();
        if num_actions == 0 {
            return Err(Error::InvalidConfig("kernel has no actions".into()));
        }
        if initial.len() != num_states {
            return Err(Error::ShapeMismatch(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                num_states
            )));
        }
        check_distribution(&initial, "initial distribution")?;
        let mut sparse = Vec::with_capacity(num_states);
        for (s, rows) in kernel.iter().enumerate() {
            if rows.len() != num_actions {
                return Err(Error::ShapeMismatch(format!(
                    "state {s} has {} action rows, expected {num_actions}",
                    rows.len()
                )));
            }
            let mut per_action = Vec::with_capacity(num_actions);
            for (a, row) in rows.iter().enumerate() {
                if row.len() != num_states {
                    return Err(Error::ShapeMismatch(format!(
                        "kernel row ({s}, {a}) has {} entries",
                        row.len()
                    )));
                }
                check_distribution(row, &format!("kernel row ({s}, {a})"))?;
                per_action.push(
                    row.iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(j, &p)| (j, p))
                        .collect::<Vec<_>>(),
                );
            }
            sparse.push(per_action);
        }
        Ok(Gmdp {
            num_states,
            num_actions,
            horizon,
            kernel: sparse,
            initial,
            grid: None,
            stochasticity: f64::NAN,
        })
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet::new(self.num_states, self.horizon)
    }

    /// Sparse successor row for (state, action), sorted by successor index.
    pub fn transitions(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.kernel[s][a]
    }

    pub fn transition_prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.kernel[s][a]
            .iter()
            .find(|(j, _)| *j == next)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    /// Structurally deterministic: point-mass start and single-successor rows.
    pub fn is_deterministic(&self) -> bool {
        let init_support = self.initial.iter().filter(|&&p| p > 0.0).count();
        init_support == 1
            && self.kernel.iter().all(|rows| {
                rows.iter()
                    .all(|row| row.len() == 1 && (row[0].1 - 1.0).abs() <= 1e-12)
            })
    }

    /// The unique start state of a deterministic process.
    pub fn initial_state(&self) -> Option<usize> {
        let mut it = self.initial.iter().enumerate().filter(|(_, &p)| p > 0.0);
        match (it.next(), it.next()) {
            (Some((s, _)), None) => Some(s),
            _ => None,
        }
    }
}

fn check_distribution(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidConfig(format!("{what} has negative entries")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Non-stationary tabular policy; probs[t][s][a].
#[derive(Clone, Debug, PartialEq)]
pub struct TabularPolicy {
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl TabularPolicy {
    pub fn uniform(gmdp: &Gmdp) -> Self {
        let p = 1.0 / gmdp.num_actions as f64;
        TabularPolicy {
            probs: vec![vec![vec![p; gmdp.num_actions]; gmdp.num_states]; gmdp.horizon - 1],
        }
    }

    /// One-hot policy from an action table actions[t][s].
    pub fn greedy(actions: &[Vec<usize>], num_actions: usize) -> Self {
        let probs = actions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&a| {
                        let mut p = vec![0.0; num_actions];
                        p[a] = 1.0;
                        p
                    })
                    .collect()
            })
            .collect();
        TabularPolicy { probs }
    }

    pub fn validate(&self, gmdp: &Gmdp) -> Result<()> {
        if self.probs.len() < gmdp.horizon.saturating_sub(1) {
            return Err(Error::ShapeMismatch(format!(
                "policy covers {} steps, horizon needs {}",
                self.probs.len(),
                gmdp.horizon - 1
            )));
        }
        for (t, per_state) in self.probs.iter().enumerate() {
            if per_state.len() != gmdp.num_states {
                return Err(Error::ShapeMismatch(format!(
                    "policy step {t} covers {} states",
                    per_state.len()
                )));
            }
            for (s, row) in per_state.iter().enumerate() {
                if row.len() != gmdp.num_actions {
                    return Err(Error::ShapeMismatch(format!(
                        "policy row ({t}, {s}) has {} actions",
                        row.len()
                    )));
                }
                if row.iter().any(|&p| p < 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "policy row ({t}, {s}) has negative entries"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "policy row ({t}, {s}) sums to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn action_probs(&self, t: usize, s: usize) -> &[f64] {
        &self.probs[t][s]
    }
}

fn sample_categorical<R: Rng>(probs: impl Iterator<Item = (usize, f64)>, rng: &mut R) -> usize {
    let entries: Vec<(usize, f64)> = probs.filter(|(_, p)| *p > 0.0).collect();
    let r: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for &(idx, p) in &entries {
        acc += p;
        if r < acc {
            return idx;
        }
    }
    entries.last().expect("empty distribution").0
}

/// Sample one trajectory under the policy. Deterministic given the RNG state.
pub fn sample_trajectory<R: Rng>(gmdp: &Gmdp, policy: &TabularPolicy, rng: &mut R) -> Trajectory {
    let mut states = Vec::with_capacity(gmdp.horizon);
    let mut actions = Vec::with_capacity(gmdp.horizon.saturating_sub(1));
    let mut s = sample_categorical(gmdp.initial.iter().copied().enumerate(), rng);
    states.push(s);
    for t in 0..gmdp.horizon - 1 {
        let a = sample_categorical(policy.probs[t][s].iter().copied().enumerate(), rng);
        actions.push(a);
        s = sample_categorical(gmdp.transitions(s, a).iter().copied(), rng);
        states.push(s);
    }
    Trajectory::new(states, actions)
}

/// Walk the process with uniformly random actions; the standard random
/// initializer for trajectory-space solvers.
pub fn random_trajectory<R: Rng>(gmdp: &Gmdp, rng: &mut R) -> Trajectory {
    let uniform = TabularPolicy::uniform(gmdp);
    sample_trajectory(gmdp, &uniform, rng)
}

/// p_pi(tau) = mu(s_0) * prod_t pi_t(a_t | s_t) * P(s_{t+1} | s_t, a_t).
/// Structurally malformed trajectories are rejected; trajectories that are
/// merely unreachable get probability 0.
pub fn trajectory_probability(
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    traj: &Trajectory,
) -> Result<f64> {
    traj.validate(gmdp)?;
    policy.validate(gmdp)?;
    let mut p = gmdp.initial[traj.elements[0].state];
    for t in 0..gmdp.horizon - 1 {
        let s = traj.elements[t].state;
        let a = traj.actions[t];
        let next = traj.elements[t + 1].state;
        p *= policy.probs[t][s][a] * gmdp.transition_prob(s, a, next);
        if p == 0.0 {
            return Ok(0.0);
        }
    }
    Ok(p)
}

/// Every positive-kernel-probability (state path, action path) pair, together
/// with its policy-independent mass `mu(s_0) * prod P(s_{t+1}|s_t,a_t)`.
/// Multiplying by the policy factors of any policy recovers p_pi, so the
/// masses let one trajectory enumeration serve every policy.
pub fn enumerate_trajectories(gmdp: &Gmdp, max_count: usize) -> Result<Vec<(Trajectory, f64)>> {
    let mut out = Vec::new();
    let mut states = Vec::with_capacity(gmdp.horizon);
    let mut actions = Vec::with_capacity(gmdp.horizon.saturating_sub(1));

    fn recurse(
        gmdp: &Gmdp,
        t: usize,
        s: usize,
        mass: f64,
        states: &mut Vec<usize>,
        actions: &mut Vec<usize>,
        out: &mut Vec<(Trajectory, f64)>,
        max_count: usize,
    ) -> Result<()> {
        if t == gmdp.horizon - 1 {
            if out.len() == max_count {
                return Err(Error::EnumerationBudget {
                    required: max_count + 1,
                    budget: max_count,
                });
            }
            out.push((Trajectory::new(states.clone(), actions.clone()), mass));
            return Ok(());
        }
        for a in 0..gmdp.num_actions {
            for &(next, p) in gmdp.transitions(s, a) {
                states.push(next);
                actions.push(a);
                recurse(gmdp, t + 1, next, mass * p, states, actions, out, max_count)?;
                states.pop();
                actions.pop();
            }
        }
        Ok(())
    }

    for (s0, &mu) in gmdp.initial.iter().enumerate() {
        if mu > 0.0 {
            states.push(s0);
            recurse(gmdp, 0, s0, mu, &mut states, &mut actions, &mut out, max_count)?;
            states.pop();
        }
    }
    Ok(out)
}

/// Point estimate of an expectation, with a standard error when sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// How J(pi) = E[F(tau)] is computed.
#[derive(Clone, Copy, Debug)]
pub enum ObjectiveEval {
    /// Exact expectation by trajectory enumeration, bounded by `budget`.
    Exact { budget: usize },
    /// Monte-Carlo average over `samples` sampled trajectories.
    MonteCarlo { samples: usize },
}

/// J(pi) under a global reward, either exactly or by Monte Carlo.
pub fn evaluate_policy_objective<R: Rng>(
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    reward: &dyn GlobalReward,
    eval: ObjectiveEval,
    rng: &mut R,
) -> Result<Estimate> {
    policy.validate(gmdp)?;
    match eval {
        ObjectiveEval::Exact { budget } => {
            let trajectories = enumerate_trajectories(gmdp, budget)?;
            let mut mean = 0.0;
            for (traj, mass) in &trajectories {
                let mut w = *mass;
                for t in 0..gmdp.horizon - 1 {
                    w *= policy.probs[t][traj.elements[t].state][traj.actions[t]];
                    if w == 0.0 {
                        break;
                    }
                }
                if w > 0.0 {
                    mean += w * reward.evaluate(&traj.elements);
                }
            }
            Ok(Estimate { mean, stderr: 0.0 })
        }
        ObjectiveEval::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidConfig("sample count must be positive".into()));
            }
            let mut values = Vec::with_capacity(samples);
            for _ in 0..samples {
                let traj = sample_trajectory(gmdp, policy, rng);
                values.push(reward.evaluate(&traj.elements));
            }
            let mean = values.iter().sum::<f64>() / samples as f64;
            let stderr = if samples > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (samples as f64 - 1.0);
                (var / samples as f64).sqrt()
            } else {
                0.0
            };
            Ok(Estimate { mean, stderr })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewards::coverage_reward;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(w: usize, h: usize, horizon: usize, rho: f64) -> Gmdp {
        build_grid(&GridConfig {
            width: w,
            height: h,
            horizon,
            stochasticity_degree: rho,
            initial_state: None,
            seed: None,
        })
        .unwrap()
    }

    #[test]
    fn deterministic_grid_moves_right() {
        let g = grid(2, 2, 3, 0.0);
        assert_eq!(g.transitions(0, 1), &[(1, 1.0)]);
        assert!(g.is_deterministic());
    }

    #[test]
    fn stochastic_grid_merges_intended_and_neighborhood_mass() {
        let g = grid(2, 2, 3, 0.1);
        // State 0 has in-grid neighbors {1 (right), 2 (up)}.
        assert!((g.transition_prob(0, 1, 1) - 0.95).abs() < 1e-12);
        assert!((g.transition_prob(0, 1, 2) - 0.05).abs() < 1e-12);
        // Bumping the left wall: stay keeps 0.9, the neighborhood takes 0.1.
        assert!((g.transition_prob(0, 0, 0) - 0.9).abs() < 1e-12);
        for s in 0..4 {
            for a in 0..5 {
                let sum: f64 = g.transitions(s, a).iter().map(|(_, p)| p).sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_cell_grid_always_stays() {
        let g = grid(1, 1, 2, 0.3);
        for a in 0..5 {
            assert_eq!(g.transitions(0, a), &[(0, 1.0)]);
        }
    }

    #[test]
    fn grid_config_validation() {
        assert!(build_grid(&GridConfig {
            width: 0,
            height: 3,
            horizon: 2,
            stochasticity_degree: 0.0,
            initial_state: None,
            seed: None,
        })
        .is_err());
        assert!(build_grid(&GridConfig {
            width: 2,
            height: 2,
            horizon: 2,
            stochasticity_degree: 1.5,
            initial_state: None,
            seed: None,
        })
        .is_err());
    }

    #[test]
    fn one_hot_deterministic_chain_has_probability_one() {
        let g = grid(3, 1, 3, 0.0);
        let policy = TabularPolicy::greedy(&vec![vec![1; 3]; 2], 5);
        let traj = Trajectory::new(vec![0, 1, 2], vec![1, 1]);
        assert_eq!(trajectory_probability(&g, &policy, &traj).unwrap(), 1.0);
    }

    #[test]
    fn zero_probability_transition_yields_zero() {
        let g = grid(3, 1, 3, 0.0);
        let policy = TabularPolicy::uniform(&g);
        // 0 -> 2 is not reachable in one step.
        let traj = Trajectory::new(vec![0, 2, 2], vec![1, 4]);
        assert_eq!(trajectory_probability(&g, &policy, &traj).unwrap(), 0.0);
    }

    #[test]
    fn malformed_trajectory_is_rejected() {
        let g = grid(3, 1, 3, 0.0);
        let policy = TabularPolicy::uniform(&g);
        let traj = Trajectory::new(vec![0, 1], vec![1]);
        assert!(trajectory_probability(&g, &policy, &traj).is_err());
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let g = grid(2, 2, 4, 0.0);
        match enumerate_trajectories(&g, 10) {
            Err(Error::EnumerationBudget { budget, .. }) => assert_eq!(budget, 10),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_enumeration_counts_action_sequences() {
        let g = grid(2, 2, 3, 0.0);
        let trajs = enumerate_trajectories(&g, 100).unwrap();
        assert_eq!(trajs.len(), 25);
        assert!(trajs.iter().all(|(_, mass)| *mass == 1.0));
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let g = grid(3, 3, 5, 0.2);
        let policy = TabularPolicy::uniform(&g);
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let t1 = sample_trajectory(&g, &policy, &mut r1);
        let t2 = sample_trajectory(&g, &policy, &mut r2);
        assert_eq!(t1, t2);
        assert!(trajectory_probability(&g, &policy, &t1).unwrap() > 0.0);
    }

    #[test]
    fn exact_objective_matches_monte_carlo() {
        let g = grid(2, 2, 3, 0.1);
        let policy = TabularPolicy::uniform(&g);
        let disks: Vec<Vec<usize>> = (0..4).map(|s| vec![s]).collect();
        let f = coverage_reward(disks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let exact =
            evaluate_policy_objective(&g, &policy, &f, ObjectiveEval::Exact { budget: 100_000 }, &mut rng)
                .unwrap();
        let mc = evaluate_policy_objective(
            &g,
            &policy,
            &f,
            ObjectiveEval::MonteCarlo { samples: 20_000 },
            &mut rng,
        )
        .unwrap();
        assert!(
            (exact.mean - mc.mean).abs() <= 3.0 * mc.stderr.max(1e-3),
            "exact {} vs mc {} +- {}",
            exact.mean,
            mc.mean,
            mc.stderr
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Kernel masses times policy factors form a probability distribution.
        #[test]
        fn enumerated_probabilities_sum_to_one(
            w in 1usize..3, h in 1usize..3, horizon in 1usize..4, rho in 0.0f64..1.0, seed in 0u64..50
        ) {
            let g = grid(w, h, horizon, rho);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // A random (valid) policy, not just the uniform one.
            let mut probs = vec![vec![vec![0.0; g.num_actions]; g.num_states]; g.horizon - 1];
            for per_state in probs.iter_mut() {
                for row in per_state.iter_mut() {
                    let mut total = 0.0;
                    for p in row.iter_mut() {
                        *p = rng.gen::<f64>() + 1e-3;
                        total += *p;
                    }
                    for p in row.iter_mut() {
                        *p /= total;
                    }
                }
            }
            let policy = TabularPolicy { probs };
            let trajs = enumerate_trajectories(&g, 1_000_000).unwrap();
            let mut total = 0.0;
            for (traj, _) in &trajs {
                total += trajectory_probability(&g, &policy, traj).unwrap();
            }
            prop_assert!((total - 1.0).abs() < 1e-9, "total {total}");
        }

        #[test]
        fn flatten_roundtrip(num_states in 1usize..50, horizon in 1usize..20) {
            let ground = GroundSet::new(num_states, horizon);
            for idx in 0..ground.size() {
                prop_assert_eq!(ground.flatten(ground.unflatten(idx)), idx);
            }
        }
    }
}
