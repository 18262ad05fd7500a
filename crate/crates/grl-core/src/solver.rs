//! Exact finite-horizon planning for modular (per-element) rewards, plus
//! brute-force baselines used as references on small instances.

use crate::error::{Error, Result};
use crate::gmdp::{enumerate_trajectories, Gmdp, GroundElement, TabularPolicy, Trajectory};
use crate::rewards::GlobalReward;
use crate::semigrad::ModularReward;
use rand::Rng;

/// Output of backward induction on a modular surrogate.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Greedy deterministic policy, one-hot per (time, state).
    pub policy: TabularPolicy,
    /// `values[t][s]`: optimal reward-to-go from (s, t), offset excluded.
    pub values: Vec<Vec<f64>>,
    /// Expected optimal value under the initial distribution (offset
    /// excluded; add `m.offset()` for the bound's prediction).
    pub optimal_value: f64,
}

/// Backward induction: `values[t][s] = m(s, t) + max_a E[values[t+1][s']]`.
/// Ties break toward the lowest action index.
pub fn solve_finite_horizon(gmdp: &Gmdp, m: &ModularReward) -> Result<SolveResult> {
    solve_inner(gmdp, m, None)
}

/// [`solve_finite_horizon`] with ties resolved uniformly at random instead
/// of toward the lowest action. Every returned policy is still an exact
/// argmax of the surrogate; sampling merely picks a different member of the
/// (often enormous) optimal set each call. Optimization loops use this so
/// that plateaus in the surrogate — where whole regions carry equal credit —
/// do not collapse onto one lexicographic path.
pub fn solve_finite_horizon_sampled_ties<R: Rng>(
    gmdp: &Gmdp,
    m: &ModularReward,
    rng: &mut R,
) -> Result<SolveResult> {
    solve_inner(gmdp, m, Some(rng))
}

fn solve_inner(
    gmdp: &Gmdp,
    m: &ModularReward,
    mut rng: Option<&mut dyn rand::RngCore>,
) -> Result<SolveResult> {
    let ground = gmdp.ground();
    if m.ground() != ground {
        return Err(Error::ShapeMismatch(format!(
            "surrogate covers {} states x {} steps, process has {} x {}",
            m.ground().num_states,
            m.ground().horizon,
            ground.num_states,
            ground.horizon
        )));
    }
    let (s_count, horizon) = (gmdp.num_states, gmdp.horizon);
    let mut values = vec![vec![0.0; s_count]; horizon];
    let mut actions = vec![vec![0usize; s_count]; horizon.saturating_sub(1)];
    let mut qs = vec![0.0; gmdp.num_actions];
    for s in 0..s_count {
        values[horizon - 1][s] = m.value(GroundElement::new(s, horizon - 1));
    }
    for t in (0..horizon - 1).rev() {
        for s in 0..s_count {
            let mut best_q = f64::NEG_INFINITY;
            let mut best_a = 0;
            for (a, q_slot) in qs.iter_mut().enumerate() {
                let q: f64 = gmdp
                    .transitions(s, a)
                    .iter()
                    .map(|&(next, p)| p * values[t + 1][next])
                    .sum();
                *q_slot = q;
                if q > best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            if let Some(r) = rng.as_deref_mut() {
                // Reservoir draw over the tied actions; tolerance absorbs
                // accumulation noise on stochastic kernels.
                let tol = 1e-12 * best_q.abs().max(1.0);
                let mut seen = 0u32;
                for (a, &q) in qs.iter().enumerate() {
                    if q >= best_q - tol {
                        seen += 1;
                        if r.gen_range(0..seen) == 0 {
                            best_a = a;
                        }
                    }
                }
            }
            values[t][s] = m.value(GroundElement::new(s, t)) + best_q;
            actions[t][s] = best_a;
        }
    }
    let optimal_value = gmdp
        .initial
        .iter()
        .enumerate()
        .map(|(s, &p)| p * values[0][s])
        .sum();
    Ok(SolveResult {
        policy: TabularPolicy::greedy(&actions, gmdp.num_actions),
        values,
        optimal_value,
    })
}

/// Roll a deterministic process forward under a policy's argmax actions.
pub fn extract_trajectory(gmdp: &Gmdp, policy: &TabularPolicy) -> Result<Trajectory> {
    let mut state = gmdp
        .initial_state()
        .ok_or(Error::RequiresDeterministic)?;
    if !gmdp.is_deterministic() {
        return Err(Error::RequiresDeterministic);
    }
    let mut states = Vec::with_capacity(gmdp.horizon);
    let mut actions = Vec::with_capacity(gmdp.horizon.saturating_sub(1));
    states.push(state);
    for t in 0..gmdp.horizon - 1 {
        let probs = policy.action_probs(t, state);
        let a = probs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .map(|(a, _)| a)
            .unwrap_or(0);
        let (next, _) = gmdp.transitions(state, a)[0];
        actions.push(a);
        state = next;
        states.push(state);
    }
    Ok(Trajectory::new(states, actions))
}

/// Exact trajectory optimum of a global reward on a deterministic process,
/// found by exhausting every action sequence. Guarded by `max_trajectories`.
pub fn brute_force_optimum(
    gmdp: &Gmdp,
    f: &dyn GlobalReward,
    max_trajectories: usize,
) -> Result<(Trajectory, f64)> {
    if !gmdp.is_deterministic() {
        return Err(Error::RequiresDeterministic);
    }
    let all = enumerate_trajectories(gmdp, max_trajectories)?;
    let mut best: Option<(Trajectory, f64)> = None;
    for (tau, _) in all {
        let value = f.evaluate(&tau.elements);
        let better = match &best {
            None => true,
            Some((_, cur)) => value > *cur,
        };
        if better {
            best = Some((tau, value));
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("process admits no trajectories".into()))
}

/// Every deterministic Markovian policy, enumerated as mixed-radix counters
/// over the (time, state) action table. `A^(S * (H-1))` policies; guarded by
/// `max_policies`.
pub fn enumerate_deterministic_policies(
    gmdp: &Gmdp,
    max_policies: usize,
) -> Result<Vec<TabularPolicy>> {
    let slots = gmdp.num_states * (gmdp.horizon - 1);
    let required = (gmdp.num_actions as f64).powi(slots as i32);
    if required > max_policies as f64 {
        return Err(Error::EnumerationBudget {
            required: required as usize,
            budget: max_policies,
        });
    }
    let mut table = vec![0usize; slots];
    let mut out = Vec::with_capacity(required as usize);
    loop {
        let actions: Vec<Vec<usize>> = (0..gmdp.horizon - 1)
            .map(|t| table[t * gmdp.num_states..(t + 1) * gmdp.num_states].to_vec())
            .collect();
        out.push(TabularPolicy::greedy(&actions, gmdp.num_actions));
        // Increment the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == slots {
                return Ok(out);
            }
            table[i] += 1;
            if table[i] < gmdp.num_actions {
                break;
            }
            table[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmdp::{build_grid, GridConfig, GroundSet};
    use crate::rewards::{chebyshev_disks, coverage_reward};
    use crate::semigrad::{ModularReward, Provenance};
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn modular(values: Vec<f64>, ground: GroundSet) -> ModularReward {
        ModularReward::new(values, 0.0, Provenance::Modularized, ground)
    }

    #[test]
    fn solver_prefers_the_rewarding_state() {
        // 2x1 grid, H = 2: reward 5 at (state 1, t 1), 0 elsewhere.
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 1,
            horizon: 2,
            stochasticity_degree: 0.0,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        let ground = gmdp.ground();
        let mut values = vec![0.0; ground.size()];
        values[ground.flatten(crate::gmdp::GroundElement::new(1, 1))] = 5.0;
        let sol = solve_finite_horizon(&gmdp, &modular(values, ground)).unwrap();
        assert_eq!(sol.optimal_value, 5.0);
        let tau = extract_trajectory(&gmdp, &sol.policy).unwrap();
        assert_eq!(tau.states(), vec![0, 1]);
        assert_eq!(tau.actions, vec![1]);
    }

    #[test]
    fn ties_break_toward_the_lowest_action() {
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 1,
            horizon: 3,
            stochasticity_degree: 0.0,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        let ground = gmdp.ground();
        // All-zero surrogate: every action is equally good.
        let sol = solve_finite_horizon(&gmdp, &modular(vec![0.0; ground.size()], ground)).unwrap();
        let tau = extract_trajectory(&gmdp, &sol.policy).unwrap();
        // Action 0 is "left"; at the left wall it stays in place.
        assert_eq!(tau.actions, vec![0, 0]);
        assert_eq!(tau.states(), vec![0, 0, 0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 1,
            horizon: 3,
            stochasticity_degree: 0.0,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        let wrong = GroundSet::new(2, 2);
        let m = modular(vec![0.0; wrong.size()], wrong);
        assert!(matches!(
            solve_finite_horizon(&gmdp, &m),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn extraction_requires_deterministic_dynamics() {
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 2,
            horizon: 3,
            stochasticity_degree: 0.3,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        let policy = TabularPolicy::uniform(&gmdp);
        assert!(matches!(
            extract_trajectory(&gmdp, &policy),
            Err(Error::RequiresDeterministic)
        ));
    }

    #[test]
    fn brute_force_finds_full_coverage() {
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 2,
            horizon: 4,
            stochasticity_degree: 0.0,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        let f = coverage_reward(chebyshev_disks(2, 2, 0)).unwrap();
        let (tau, value) = brute_force_optimum(&gmdp, &f, 1 << 16).unwrap();
        assert_eq!(value, 4.0);
        let mut visited = tau.states();
        visited.sort_unstable();
        assert_eq!(visited, vec![0, 1, 2, 3]);
    }

    #[test]
    fn policy_enumeration_counts_and_guards() {
        let gmdp = build_grid(&GridConfig {
            width: 2,
            height: 1,
            horizon: 3,
            stochasticity_degree: 0.0,
            initial_state: Some(0),
            seed: None,
        })
        .unwrap();
        // 5 actions, 2 states, 2 decision steps: 5^4 = 625 policies.
        let policies = enumerate_deterministic_policies(&gmdp, 1000).unwrap();
        assert_eq!(policies.len(), 625);
        assert!(matches!(
            enumerate_deterministic_policies(&gmdp, 100),
            Err(Error::EnumerationBudget { required: 625, budget: 100 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Backward induction matches exhaustive policy search on random
        /// stochastic instances with random modular rewards.
        #[test]
        fn solver_matches_exhaustive_policy_search(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gmdp = build_grid(&GridConfig {
                width: 2,
                height: 1,
                horizon: 3,
                stochasticity_degree: rng.gen_range(0.0..0.5),
                initial_state: Some(rng.gen_range(0..2)),
                seed: None,
            }).unwrap();
            let ground = gmdp.ground();
            let values: Vec<f64> = (0..ground.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = modular(values, ground);
            let sol = solve_finite_horizon(&gmdp, &m).unwrap();
            let trajectories = enumerate_trajectories(&gmdp, 1 << 16).unwrap();
            let mut best = f64::NEG_INFINITY;
            for policy in enumerate_deterministic_policies(&gmdp, 1 << 20).unwrap() {
                let mut value = 0.0;
                for (traj, mass) in &trajectories {
                    let mut w = *mass;
                    for (t, &a) in traj.actions.iter().enumerate() {
                        w *= policy.action_probs(t, traj.elements[t].state)[a];
                        if w == 0.0 {
                            break;
                        }
                    }
                    if w > 0.0 {
                        value += w * m.evaluate_set(&traj.elements);
                    }
                }
                best = best.max(value);
            }
            prop_assert!((sol.optimal_value - best).abs() < 1e-7,
                "dp {} vs enumeration {}", sol.optimal_value, best);
        }
    }
}
