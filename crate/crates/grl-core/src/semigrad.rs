//! Semi-gradient machinery: modular lower bounds on global rewards,
//! anchored at a trajectory (or averaged over sampled trajectories).
//!
//! Every constructor here returns a `ModularReward` m with
//! `m(Y) <= F(Y)` for all `Y ⊆ V` when `F` has the declared structure, and
//! `m(X) = F(X)` at the anchor `X`.

use crate::error::{Error, Result};
use crate::gmdp::{sample_trajectory, Gmdp, GroundElement, GroundSet, TabularPolicy, Trajectory};
use crate::rewards::{GlobalReward, RewardKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// How a modular surrogate was constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Plain singleton values, no anchoring.
    Modularized,
    /// Extreme point of the submodular base polytope along a permutation.
    SubmodularExtreme,
    /// Supermodular tight bound anchored at a set.
    SupermodularAnchor,
    /// Sum of a submodular extreme point and a supermodular anchor bound.
    BpCombined,
    /// State-level chain bound spread over times.
    StateDependent,
    /// Average of per-trajectory bounds.
    Expected,
}

/// A permutation of the flat ground-set indices `0..|V|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>, ground: &GroundSet) -> Result<Self> {
        if order.len() != ground.size() {
            return Err(Error::InvalidPermutation(format!(
                "length {} does not match ground set size {}",
                order.len(),
                ground.size()
            )));
        }
        let mut seen = vec![false; order.len()];
        for &idx in &order {
            if idx >= seen.len() {
                return Err(Error::InvalidPermutation(format!("index {idx} out of range")));
            }
            if seen[idx] {
                return Err(Error::InvalidPermutation(format!("index {idx} repeated")));
            }
            seen[idx] = true;
        }
        Ok(Permutation { order })
    }

    /// Anchor elements first (in the order given), then every remaining
    /// element in ascending flat order.
    pub fn anchored_at(anchor: &[GroundElement], ground: &GroundSet) -> Result<Self> {
        let mut order = Vec::with_capacity(ground.size());
        let mut taken = vec![false; ground.size()];
        for &e in anchor {
            if !ground.contains(e) {
                return Err(Error::InvalidPermutation(format!(
                    "anchor element ({}, {}) out of range",
                    e.state, e.time
                )));
            }
            let idx = ground.flatten(e);
            if taken[idx] {
                return Err(Error::InvalidPermutation(format!(
                    "anchor element ({}, {}) repeated",
                    e.state, e.time
                )));
            }
            taken[idx] = true;
            order.push(idx);
        }
        order.extend((0..ground.size()).filter(|&idx| !taken[idx]));
        Ok(Permutation { order })
    }

    /// Anchor elements first (in the order given), then every remaining
    /// element in uniformly random order. Tightness and soundness hold for
    /// any tail order; the choice only steers where non-anchor credit lands.
    pub fn anchored_shuffled<R: Rng>(
        anchor: &[GroundElement],
        ground: &GroundSet,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sigma = Self::anchored_at(anchor, ground)?;
        sigma.order[anchor.len()..].shuffle(rng);
        Ok(sigma)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn chain(&self, ground: &GroundSet) -> Vec<GroundElement> {
        self.order.iter().map(|&idx| ground.unflatten(idx)).collect()
    }
}

/// A modular set function `m(Y) = offset + sum_{v in Y} values[v]` over a
/// fixed ground set.
#[derive(Clone, Debug)]
pub struct ModularReward {
    values: Vec<f64>,
    offset: f64,
    provenance: Provenance,
    ground: GroundSet,
}

impl ModularReward {
    pub fn new(values: Vec<f64>, offset: f64, provenance: Provenance, ground: GroundSet) -> Self {
        assert_eq!(values.len(), ground.size(), "value table must cover the ground set");
        ModularReward { values, offset, provenance, ground }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn value(&self, e: GroundElement) -> f64 {
        self.values[self.ground.flatten(e)]
    }

    pub fn evaluate_set(&self, x: &[GroundElement]) -> f64 {
        self.offset + x.iter().map(|&e| self.value(e)).sum::<f64>()
    }

    pub fn evaluate_trajectory(&self, tau: &Trajectory) -> f64 {
        self.evaluate_set(&tau.elements)
    }
}

impl GlobalReward for ModularReward {
    fn evaluate(&self, x: &[GroundElement]) -> f64 {
        self.evaluate_set(x)
    }

    // Modular functions are (weakly) submodular; this keeps them usable
    // anywhere a declared-submodular reward is expected.
    fn kind(&self) -> RewardKind {
        RewardKind::Submodular
    }

    fn marginal(&self, v: GroundElement, _x: &[GroundElement]) -> f64 {
        self.value(v)
    }

    fn prefix_marginals(&self, chain: &[GroundElement]) -> Vec<f64> {
        chain.iter().map(|&e| self.value(e)).collect()
    }

    fn singleton_values(&self, ground: &GroundSet) -> Vec<f64> {
        assert_eq!(*ground, self.ground);
        self.values.clone()
    }

    fn complement_marginals(&self, ground: &GroundSet) -> Vec<f64> {
        assert_eq!(*ground, self.ground);
        self.values.clone()
    }
}

/// Extreme point of the base polytope: `values[sigma(i)]` is the gain of the
/// i-th chain element over its predecessors. Tight on every chain prefix;
/// a global lower bound when `f` is submodular.
pub fn submodular_lower_bound(
    f: &dyn GlobalReward,
    sigma: &Permutation,
    ground: &GroundSet,
) -> ModularReward {
    let chain = sigma.chain(ground);
    let marginals = f.prefix_marginals(&chain);
    let mut values = vec![0.0; ground.size()];
    for (pos, &idx) in sigma.order().iter().enumerate() {
        values[idx] = marginals[pos];
    }
    ModularReward::new(values, f.evaluate(&[]), Provenance::SubmodularExtreme, *ground)
}

/// Tight modular lower bound on a supermodular `g`, anchored at `x`:
/// elements of the anchor keep their marginal against the rest of the anchor,
/// outside elements keep their singleton gain over the empty set, and the
/// offset restores `m(x) = g(x)`. Monotonicity of `g` is not required.
pub fn supermodular_lower_bound(
    g: &dyn GlobalReward,
    x: &[GroundElement],
    ground: &GroundSet,
) -> Result<ModularReward> {
    let mut in_anchor = vec![false; ground.size()];
    for &e in x {
        if !ground.contains(e) {
            return Err(Error::InvalidConfig(format!(
                "anchor element ({}, {}) out of range",
                e.state, e.time
            )));
        }
        let idx = ground.flatten(e);
        if in_anchor[idx] {
            return Err(Error::InvalidConfig(format!(
                "anchor element ({}, {}) repeated",
                e.state, e.time
            )));
        }
        in_anchor[idx] = true;
    }
    let g_empty = g.evaluate(&[]);
    let g_anchor = g.evaluate(x);
    let singles = g.singleton_values(ground);
    let mut values = vec![0.0; ground.size()];
    let mut anchor_sum = 0.0;
    let mut rest: Vec<GroundElement> = Vec::with_capacity(x.len().saturating_sub(1));
    for (i, &e) in x.iter().enumerate() {
        rest.clear();
        rest.extend(x.iter().take(i).copied());
        rest.extend(x.iter().skip(i + 1).copied());
        let m = g_anchor - g.evaluate(&rest);
        values[ground.flatten(e)] = m;
        anchor_sum += m;
    }
    for idx in 0..ground.size() {
        if !in_anchor[idx] {
            values[idx] = singles[idx] - g_empty;
        }
    }
    Ok(ModularReward::new(
        values,
        g_anchor - anchor_sum,
        Provenance::SupermodularAnchor,
        *ground,
    ))
}

/// Combined bound for `f = q + g + c`: submodular extreme point for `q`
/// along `sigma` plus the supermodular anchor bound for `g` at the first
/// `|x|` elements of `sigma`... the caller supplies the anchor explicitly to
/// keep the two parts aligned.
pub fn bp_lower_bound(
    f: &dyn GlobalReward,
    x: &[GroundElement],
    sigma: &Permutation,
    ground: &GroundSet,
) -> Result<ModularReward> {
    let d = f.decomposition().ok_or(Error::MissingDecomposition)?;
    let mq = submodular_lower_bound(d.submodular, sigma, ground);
    let mg = supermodular_lower_bound(d.supermodular, x, ground)?;
    let values = mq
        .values()
        .iter()
        .zip(mg.values())
        .map(|(a, b)| a + b)
        .collect();
    Ok(ModularReward::new(
        values,
        mq.offset() + mg.offset() + d.constant,
        Provenance::BpCombined,
        *ground,
    ))
}

/// States visited by the anchor, ordered by first visit.
fn first_visit_order(x: &[GroundElement], num_states: usize) -> Vec<usize> {
    let mut sorted: Vec<GroundElement> = x.to_vec();
    sorted.sort();
    let mut seen = vec![false; num_states];
    let mut order = Vec::new();
    for e in sorted {
        if !seen[e.state] {
            seen[e.state] = true;
            order.push(e.state);
        }
    }
    order
}

/// Chain bound through the state-level view `F'`: visited states are charged
/// at their first visit along the anchor, every unvisited state spreads its
/// tail marginal uniformly over the horizon. Valid for monotone submodular
/// `F'` — each state's weight across times totals at most one, and tail
/// marginals are nonnegative — and tight at the anchor.
pub fn state_dependent_lower_bound(
    f: &dyn GlobalReward,
    x: &[GroundElement],
    ground: &GroundSet,
    greedy_tail: bool,
) -> Result<ModularReward> {
    state_dependent_impl(f, x, ground, greedy_tail, None)
}

/// Worker behind [`state_dependent_lower_bound`]. With `tie_rng` set and a
/// greedy tail, the candidate list handed to the greedy ordering is shuffled
/// first; since greedy keeps the earliest candidate on equal marginals, this
/// samples uniformly among the tied greedy chains instead of always taking
/// the lowest-index one. Without an RNG the candidates stay ascending.
fn state_dependent_impl(
    f: &dyn GlobalReward,
    x: &[GroundElement],
    ground: &GroundSet,
    greedy_tail: bool,
    tie_rng: Option<&mut dyn rand::RngCore>,
) -> Result<ModularReward> {
    let view = f
        .state_view()
        .ok_or_else(|| Error::InvalidReward("reward has no state-level view".into()))?;
    let visited = first_visit_order(x, ground.num_states);
    let mut is_visited = vec![false; ground.num_states];
    for &s in &visited {
        is_visited[s] = true;
    }
    let mut unvisited: Vec<usize> =
        (0..ground.num_states).filter(|&s| !is_visited[s]).collect();
    if let Some(rng) = tie_rng {
        unvisited.shuffle(rng);
    }
    let tail = if greedy_tail {
        view.greedy_order(&visited, &unvisited)
    } else {
        unvisited
    };
    let mut chain = visited.clone();
    chain.extend(&tail);
    let marginals = view.state_prefix_marginals(&chain);

    let mut first_time = vec![usize::MAX; ground.num_states];
    for &e in x {
        if !ground.contains(e) {
            return Err(Error::InvalidConfig(format!(
                "anchor element ({}, {}) out of range",
                e.state, e.time
            )));
        }
        first_time[e.state] = first_time[e.state].min(e.time);
    }

    let mut values = vec![0.0; ground.size()];
    for (pos, &s) in chain.iter().enumerate() {
        if is_visited[s] {
            values[ground.flatten(GroundElement::new(s, first_time[s]))] = marginals[pos];
        } else {
            let share = marginals[pos] / ground.horizon as f64;
            for t in 0..ground.horizon {
                values[ground.flatten(GroundElement::new(s, t))] = share;
            }
        }
    }
    Ok(ModularReward::new(
        values,
        view.evaluate_states(&[]),
        Provenance::StateDependent,
        *ground,
    ))
}

/// Permutation whose tail orders unvisited states greedily by marginal
/// coverage on top of the anchor: anchor elements first (trajectory order),
/// then each unvisited state's copies across all times (greedy state order,
/// times ascending), then the remaining copies of visited states in
/// ascending flat order.
pub fn greedy_permutation(
    f: &dyn GlobalReward,
    tau: &Trajectory,
    ground: &GroundSet,
) -> Result<Permutation> {
    let view = f
        .state_view()
        .ok_or_else(|| Error::InvalidReward("reward has no state-level view".into()))?;
    let visited = first_visit_order(&tau.elements, ground.num_states);
    let mut is_visited = vec![false; ground.num_states];
    for &s in &visited {
        is_visited[s] = true;
    }
    let unvisited: Vec<usize> = (0..ground.num_states).filter(|&s| !is_visited[s]).collect();
    let tail = view.greedy_order(&visited, &unvisited);

    let mut order = Vec::with_capacity(ground.size());
    let mut taken = vec![false; ground.size()];
    for &e in &tau.elements {
        let idx = ground.flatten(e);
        taken[idx] = true;
        order.push(idx);
    }
    for &s in &tail {
        for t in 0..ground.horizon {
            let idx = ground.flatten(GroundElement::new(s, t));
            taken[idx] = true;
            order.push(idx);
        }
    }
    order.extend((0..ground.size()).filter(|&idx| !taken[idx]));
    Permutation::new(order, ground)
}

/// Bound flavor used when anchoring at a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Dispatch on the declared kind: submodular extreme point, supermodular
    /// anchor, or their combination for decomposed rewards.
    #[default]
    Full,
    /// State-level chain bound; the deterministic constructor orders
    /// unvisited states by ascending index, the randomized one draws the
    /// order uniformly.
    StateDependent,
    /// State-level chain bound, unvisited states in greedy marginal-gain
    /// order (argmax ties: lowest index deterministically, sampled in the
    /// randomized constructor).
    GreedyStateDependent,
}

impl BoundVariant {
    /// Suffix used in experiment records ("gto" -> "gto_s", ...).
    pub fn label_suffix(&self) -> &'static str {
        match self {
            BoundVariant::Full => "",
            BoundVariant::StateDependent => "_s",
            BoundVariant::GreedyStateDependent => "_greedy_s",
        }
    }
}

/// Modular lower bound on `f` anchored at (and tight at) `tau`.
pub fn trajectory_lower_bound(
    f: &dyn GlobalReward,
    tau: &Trajectory,
    ground: &GroundSet,
    variant: BoundVariant,
) -> Result<ModularReward> {
    let x = &tau.elements;
    match variant {
        BoundVariant::Full => match f.kind() {
            RewardKind::Submodular => {
                let sigma = Permutation::anchored_at(x, ground)?;
                Ok(submodular_lower_bound(f, &sigma, ground))
            }
            RewardKind::Supermodular => supermodular_lower_bound(f, x, ground),
            RewardKind::Bp | RewardKind::Arbitrary => {
                let sigma = Permutation::anchored_at(x, ground)?;
                bp_lower_bound(f, x, &sigma, ground)
            }
        },
        BoundVariant::StateDependent | BoundVariant::GreedyStateDependent => {
            let greedy = variant == BoundVariant::GreedyStateDependent;
            state_dependent_dispatch(f, x, ground, greedy, None)
        }
    }
}

/// State-chain bound dispatched on reward kind: the submodular part goes
/// through the chain construction, a supermodular part through its anchor
/// bound, and BP rewards combine both via their decomposition.
fn state_dependent_dispatch(
    f: &dyn GlobalReward,
    x: &[GroundElement],
    ground: &GroundSet,
    greedy: bool,
    tie_rng: Option<&mut dyn rand::RngCore>,
) -> Result<ModularReward> {
    match f.kind() {
        RewardKind::Submodular => state_dependent_impl(f, x, ground, greedy, tie_rng),
        RewardKind::Supermodular => supermodular_lower_bound(f, x, ground),
        RewardKind::Bp | RewardKind::Arbitrary => {
            let d = f.decomposition().ok_or(Error::MissingDecomposition)?;
            let mq = state_dependent_impl(d.submodular, x, ground, greedy, tie_rng)?;
            let mg = supermodular_lower_bound(d.supermodular, x, ground)?;
            let values = mq
                .values()
                .iter()
                .zip(mg.values())
                .map(|(a, b)| a + b)
                .collect();
            Ok(ModularReward::new(
                values,
                mq.offset() + mg.offset() + d.constant,
                Provenance::StateDependent,
                *ground,
            ))
        }
    }
}

/// Like [`trajectory_lower_bound`], but the non-anchor tail of any extreme
/// point permutation is drawn from `rng` instead of ascending flat order.
/// The guarantee is tail-independent; the search behavior is not. A fixed
/// ascending tail parks every unvisited element's credit at time 0, which
/// the dynamics cannot revisit, so an optimizer that replans against the
/// bound sees nothing worth moving for and stalls at its starting
/// trajectory. A fresh random tail per probe spreads that credit across
/// reachable times. The state-chain variants get the same treatment at their
/// own free choice points: the plain chain's unvisited-state order is drawn
/// uniformly instead of ascending, and the greedy chain samples among its
/// argmax ties instead of keeping the lowest index, so repeated probes
/// explore different valid chains. Only constructions with no free choices
/// (supermodular anchors) ignore the RNG.
pub fn randomized_trajectory_lower_bound<R: Rng>(
    f: &dyn GlobalReward,
    tau: &Trajectory,
    ground: &GroundSet,
    variant: BoundVariant,
    rng: &mut R,
) -> Result<ModularReward> {
    let x = &tau.elements;
    match variant {
        BoundVariant::Full => match f.kind() {
            RewardKind::Submodular => {
                let sigma = Permutation::anchored_shuffled(x, ground, rng)?;
                Ok(submodular_lower_bound(f, &sigma, ground))
            }
            RewardKind::Supermodular => supermodular_lower_bound(f, x, ground),
            RewardKind::Bp | RewardKind::Arbitrary => {
                let sigma = Permutation::anchored_shuffled(x, ground, rng)?;
                bp_lower_bound(f, x, &sigma, ground)
            }
        },
        BoundVariant::StateDependent => {
            state_dependent_dispatch(f, x, ground, false, Some(rng))
        }
        BoundVariant::GreedyStateDependent => {
            state_dependent_dispatch(f, x, ground, true, Some(rng))
        }
    }
}

/// Whether [`randomized_trajectory_lower_bound`] actually consults the RNG
/// for this reward/variant pair. When it does not, repeated probes from the
/// same anchor are identical, so one rejected probe proves a fixed point.
/// Supermodular anchors are the only fully determined construction; every
/// other pair has at least one sampled choice (permutation tail, chain
/// order, or greedy ties).
pub fn bound_is_randomized(_variant: BoundVariant, kind: RewardKind) -> bool {
    !matches!(kind, RewardKind::Supermodular)
}

/// Monte-Carlo estimate of the expected bound under a policy: the average of
/// per-trajectory bounds. Any convex combination of valid lower bounds is
/// itself a valid lower bound, so soundness holds for every sample set, not
/// just in expectation.
pub fn expected_lower_bound<R: Rng>(
    f: &dyn GlobalReward,
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    variant: BoundVariant,
    num_trajectories: usize,
    rng: &mut R,
) -> Result<ModularReward> {
    expected_bound_impl(f, gmdp, policy, variant, num_trajectories, false, rng)
}

/// [`expected_lower_bound`] with per-sample random permutation tails (see
/// [`randomized_trajectory_lower_bound`]). Still a valid lower bound for any
/// sample set; preferred inside optimization loops.
pub fn randomized_expected_lower_bound<R: Rng>(
    f: &dyn GlobalReward,
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    variant: BoundVariant,
    num_trajectories: usize,
    rng: &mut R,
) -> Result<ModularReward> {
    expected_bound_impl(f, gmdp, policy, variant, num_trajectories, true, rng)
}

fn expected_bound_impl<R: Rng>(
    f: &dyn GlobalReward,
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    variant: BoundVariant,
    num_trajectories: usize,
    shuffle_tails: bool,
    rng: &mut R,
) -> Result<ModularReward> {
    if num_trajectories == 0 {
        return Err(Error::InvalidConfig("need at least one sampled trajectory".into()));
    }
    let ground = gmdp.ground();
    let mut values = vec![0.0; ground.size()];
    let mut offset = 0.0;
    for _ in 0..num_trajectories {
        let tau = sample_trajectory(gmdp, policy, rng);
        let m = if shuffle_tails {
            randomized_trajectory_lower_bound(f, &tau, &ground, variant, rng)?
        } else {
            trajectory_lower_bound(f, &tau, &ground, variant)?
        };
        for (acc, v) in values.iter_mut().zip(m.values()) {
            *acc += v;
        }
        offset += m.offset();
    }
    let n = num_trajectories as f64;
    for v in values.iter_mut() {
        *v /= n;
    }
    Ok(ModularReward::new(values, offset / n, Provenance::Expected, ground))
}

/// Exact expected bound: per-trajectory bounds weighted by trajectory
/// probability under the policy. Exponential in the horizon; guarded by
/// `max_trajectories`.
pub fn exact_expected_lower_bound(
    f: &dyn GlobalReward,
    gmdp: &Gmdp,
    policy: &TabularPolicy,
    variant: BoundVariant,
    max_trajectories: usize,
) -> Result<ModularReward> {
    let ground = gmdp.ground();
    let all = crate::gmdp::enumerate_trajectories(gmdp, max_trajectories)?;
    let mut values = vec![0.0; ground.size()];
    let mut offset = 0.0;
    let mut total_weight = 0.0;
    for (tau, kernel_mass) in &all {
        let mut w = *kernel_mass;
        for (t, &a) in tau.actions.iter().enumerate() {
            w *= policy.action_probs(t, tau.elements[t].state)[a];
        }
        if w == 0.0 {
            continue;
        }
        let m = trajectory_lower_bound(f, tau, &ground, variant)?;
        for (acc, v) in values.iter_mut().zip(m.values()) {
            *acc += w * v;
        }
        offset += w * m.offset();
        total_weight += w;
    }
    if (total_weight - 1.0).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "trajectory weights sum to {total_weight}, expected 1"
        )));
    }
    Ok(ModularReward::new(values, offset, Provenance::Expected, ground))
}
