//! Seed-sweep executor: builds the per-seed instance (environment, reward
//! draw, initial trajectory), runs every configured algorithm on it, and
//! collects sorted records plus a cross-seed summary.

use crate::algorithms::{run_gpo, run_gto, run_mod_baseline, GpoOptions, GtoOptions};
use crate::error::{Error, Result};
use crate::gmdp::{
    build_grid, enumerate_trajectories, evaluate_policy_objective, random_trajectory, Gmdp,
    GroundSet, ObjectiveEval,
};
use crate::gp::{grid_points, mutual_information_reward};
use crate::harness::config::{
    AlgorithmName, DiskConfig, DiskShape, ExperimentConfig, RewardKindConfig,
};
use crate::harness::records::{summarize, RunRecord, SummaryRow};
use crate::rewards::{
    bounded_curvature_coverage, chebyshev_disks, compute_curvature, coverage_reward,
    diverse_synergy_reward, entropy_reward, quad_disks, safe_coverage_reward, synergy_reward,
    GlobalReward, RewardKind,
};
use crate::solver::brute_force_optimum;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const DEFAULT_MAX_ITERS: usize = 35;
const DEFAULT_N_TRAJ_SAMPLES: usize = 20;
const DEFAULT_EVAL_SAMPLES: usize = 20;
/// Objective estimates switch from exact enumeration to Monte Carlo when an
/// instance has more trajectories than this.
const EXACT_EVAL_BUDGET: usize = 20_000;
const BRUTE_FORCE_BUDGET: usize = 1 << 21;

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Run every algorithm over `runs` seeded instances in parallel (seed fan-out
/// honors the GRL_THREADS cap) and return records sorted by
/// (algorithm, seed, iteration).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let pool = thread_pool()?;
    let per_run: Vec<Result<Vec<RunRecord>>> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run| run_one(config, run))
            .collect()
    });
    let mut records = Vec::new();
    for result in per_run {
        records.extend(result?);
    }
    records.sort_by(|a, b| {
        (a.algorithm.as_str(), a.seed, a.iteration).cmp(&(b.algorithm.as_str(), b.seed, b.iteration))
    });
    let summary = summarize(&records);
    Ok(ExperimentOutput { records, summary })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("GRL_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "GRL_THREADS must be a positive integer, got {raw:?}"
                )))
            }
        }
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("failed to build thread pool: {e}")))
}

pub fn disks_from_config(disk: &DiskConfig, width: usize, height: usize) -> Vec<Vec<usize>> {
    match disk.shape {
        DiskShape::Chebyshev => chebyshev_disks(width, height, disk.radius),
        DiskShape::Quad => quad_disks(width, height),
    }
}

/// Instantiate the configured reward for one run. Synergy sets, unsafe
/// states, and the GP length scale may vary per seed; all draws come from
/// the supplied RNG so instances are reproducible.
pub fn materialize_reward(
    config: &ExperimentConfig,
    run: usize,
    gmdp: &Gmdp,
    rng: &mut ChaCha8Rng,
) -> Result<Box<dyn GlobalReward>> {
    let (width, height) = (config.environment.width, config.environment.height);
    let ground = gmdp.ground();
    let r = &config.reward;
    let disk = r.disk.unwrap_or_default();
    match r.kind {
        RewardKindConfig::Coverage => Ok(Box::new(coverage_reward(disks_from_config(
            &disk, width, height,
        ))?)),
        RewardKindConfig::BoundedCurvatureCoverage => Ok(Box::new(bounded_curvature_coverage(
            r.alpha.unwrap_or(0.1),
            gmdp.num_states,
        )?)),
        RewardKindConfig::Entropy => {
            Ok(Box::new(entropy_reward(gmdp.num_states, gmdp.horizon)?))
        }
        RewardKindConfig::Synergy => Ok(Box::new(synergy_reward(
            synergy_sets(config, &ground, rng)?,
            r.beta.unwrap_or(2.0),
            ground,
        )?)),
        RewardKindConfig::DiverseSynergy => Ok(Box::new(diverse_synergy_reward(
            disks_from_config(&disk, width, height),
            synergy_sets(config, &ground, rng)?,
            r.beta.unwrap_or(2.0),
            ground,
        )?)),
        RewardKindConfig::SafeCoverage => Ok(Box::new(safe_coverage_reward(
            disks_from_config(&disk, width, height),
            &unsafe_states(config, gmdp, rng)?,
            r.penalty.unwrap_or(500.0),
        )?)),
        RewardKindConfig::MutualInformation => {
            let gp = config.gp.clone().unwrap_or_default();
            Ok(Box::new(mutual_information_reward(
                &gp.params_for_run(run),
                &grid_points(width, height),
            )?))
        }
    }
}

fn synergy_sets(
    config: &ExperimentConfig,
    ground: &GroundSet,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<crate::gmdp::GroundElement>>> {
    let r = &config.reward;
    if let Some(flat_sets) = &r.synergy_sets {
        return Ok(flat_sets
            .iter()
            .map(|set| set.iter().map(|&idx| ground.unflatten(idx)).collect())
            .collect());
    }
    let num_sets = r.num_synergy_sets.unwrap_or(0);
    let set_size = r.synergy_set_size.unwrap_or(2).min(ground.size());
    let mut sets = Vec::with_capacity(num_sets);
    for _ in 0..num_sets {
        let picks = rand::seq::index::sample(rng, ground.size(), set_size);
        sets.push(picks.iter().map(|idx| ground.unflatten(idx)).collect());
    }
    Ok(sets)
}

/// Unsafe states drawn away from the initial distribution's support, so the
/// safety bonus is never forfeited at step zero.
fn unsafe_states(
    config: &ExperimentConfig,
    gmdp: &Gmdp,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if let Some(explicit) = &config.reward.unsafe_states {
        return Ok(explicit.clone());
    }
    let wanted = config.reward.num_unsafe_states.unwrap_or(0);
    let candidates: Vec<usize> = (0..gmdp.num_states)
        .filter(|&s| gmdp.initial[s] == 0.0)
        .collect();
    if wanted > candidates.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot draw {wanted} unsafe states from {} non-initial states",
            candidates.len()
        )));
    }
    let picks = rand::seq::index::sample(rng, candidates.len(), wanted);
    Ok(picks.iter().map(|i| candidates[i]).collect())
}

/// Curvature columns for the records: for decomposed rewards, the submodular
/// part's k_sub and the supermodular part's k_sup; otherwise both sides of
/// the reward itself. Undefined curvature maps to the conservative 1.
pub fn curvature_pair(reward: &dyn GlobalReward, ground: &GroundSet) -> (f64, f64) {
    match reward.kind() {
        RewardKind::Bp | RewardKind::Arbitrary => match reward.decomposition() {
            Some(d) => {
                let k_sub = compute_curvature(d.submodular, ground)
                    .map(|rep| rep.k_sub)
                    .unwrap_or(1.0);
                let k_sup = compute_curvature(d.supermodular, ground)
                    .map(|rep| rep.k_sup)
                    .unwrap_or(1.0);
                (k_sub, k_sup)
            }
            None => (1.0, 1.0),
        },
        _ => compute_curvature(reward, ground)
            .map(|rep| (rep.k_sub, rep.k_sup))
            .unwrap_or((1.0, 1.0)),
    }
}

fn auto_eval(gmdp: &Gmdp, samples: usize) -> ObjectiveEval {
    match enumerate_trajectories(gmdp, EXACT_EVAL_BUDGET) {
        Ok(_) => ObjectiveEval::Exact { budget: EXACT_EVAL_BUDGET },
        Err(_) => ObjectiveEval::MonteCarlo { samples },
    }
}

/// Build the environment and reward for one run index exactly as
/// `run_experiment` does: same per-run seed derivation, same RNG consumption
/// order (must stay in lockstep with the head of `run_one`). This is the
/// entry point for inspecting an instance outside a full experiment.
pub fn instantiate_run(
    config: &ExperimentConfig,
    run: usize,
) -> Result<(Gmdp, Box<dyn GlobalReward>)> {
    let seed = config.seed.wrapping_add(run as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gmdp = build_grid(&config.environment)?;
    let reward = materialize_reward(config, run, &gmdp, &mut rng)?;
    Ok((gmdp, reward))
}

fn run_one(config: &ExperimentConfig, run: usize) -> Result<Vec<RunRecord>> {
    let seed = config.seed.wrapping_add(run as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gmdp = build_grid(&config.environment)?;
    let reward = materialize_reward(config, run, &gmdp, &mut rng)?;
    let ground = gmdp.ground();
    let (k_sub, k_sup) = curvature_pair(reward.as_ref(), &ground);
    // Variant comparisons are paired (common random numbers): every
    // algorithm on this seed shares the initial trajectory and starts its
    // loop from the same RNG state, so per-seed differences reflect the
    // algorithms rather than stream luck.
    let initial = if gmdp.is_deterministic() {
        Some(random_trajectory(&gmdp, &mut rng))
    } else {
        None
    };
    let algo_seed: u64 = rng.gen();

    let mut records = Vec::new();
    let mut push = |label: &str, iteration: usize, objective: f64, stderr: f64, bound: f64, wall_ms: f64| {
        records.push(RunRecord {
            seed,
            algorithm: label.to_string(),
            iteration,
            objective,
            objective_stderr: stderr,
            bound_value: bound,
            k_sub,
            k_sup,
            wall_ms: if config.record_wall_time { wall_ms } else { 0.0 },
        });
    };

    for alg in &config.algorithms {
        let mut algo_rng = ChaCha8Rng::seed_from_u64(algo_seed);
        let label = alg.label();
        match alg.name {
            AlgorithmName::Gto => {
                let options = GtoOptions {
                    max_iterations: alg.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
                    variant: alg.lower_bound.unwrap_or_default(),
                    ..GtoOptions::default()
                };
                let result =
                    run_gto(&gmdp, reward.as_ref(), initial.clone(), &options, &mut algo_rng)?;
                for rec in &result.iterations {
                    push(&label, rec.iteration, rec.objective, rec.objective_stderr,
                        rec.bound_value, rec.wall_ms);
                }
            }
            AlgorithmName::Gpo => {
                let options = GpoOptions {
                    max_iterations: alg.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
                    variant: alg.lower_bound.unwrap_or_default(),
                    bound_trajectories: alg.n_traj_samples.unwrap_or(DEFAULT_N_TRAJ_SAMPLES),
                    eval: auto_eval(&gmdp, alg.eval_samples.unwrap_or(DEFAULT_EVAL_SAMPLES)),
                    ..GpoOptions::default()
                };
                let result = run_gpo(&gmdp, reward.as_ref(), None, &options, &mut algo_rng)?;
                for rec in &result.iterations {
                    push(&label, rec.iteration, rec.objective, rec.objective_stderr,
                        rec.bound_value, rec.wall_ms);
                }
            }
            AlgorithmName::Mod => {
                let started = std::time::Instant::now();
                let result = run_mod_baseline(&gmdp, reward.as_ref())?;
                let (objective, stderr) = match result.objective {
                    Some(value) => (value, 0.0),
                    None => {
                        let eval = auto_eval(&gmdp, alg.eval_samples.unwrap_or(DEFAULT_EVAL_SAMPLES));
                        let est = evaluate_policy_objective(
                            &gmdp,
                            &result.policy,
                            reward.as_ref(),
                            eval,
                            &mut algo_rng,
                        )?;
                        (est.mean, est.stderr)
                    }
                };
                let wall_ms = started.elapsed().as_secs_f64() * 1e3;
                push(&label, 0, objective, stderr, result.proxy_value, wall_ms);
            }
            AlgorithmName::BruteForce => {
                let started = std::time::Instant::now();
                let (_, value) = brute_force_optimum(&gmdp, reward.as_ref(), BRUTE_FORCE_BUDGET)?;
                let wall_ms = started.elapsed().as_secs_f64() * 1e3;
                push(&label, 0, value, 0.0, value, wall_ms);
            }
        }
    }
    Ok(records)
}
