//! Global-reward sequential decision making: trajectory-level set rewards
//! over finite-horizon MDPs, modular surrogate bounds, semi-gradient
//! optimization loops, curvature-based guarantees, and an experiment harness.
//!
//! The central objects are a controlled Markov process ([`gmdp::Gmdp`]), a
//! set function over (state, time) pairs ([`rewards::GlobalReward`]), and
//! modular lower bounds anchored at trajectories ([`semigrad`]). The
//! optimization loops in [`algorithms`] alternate bound construction with
//! exact dynamic programming on the surrogate.

pub mod algorithms;
pub mod error;
pub mod gmdp;
pub mod gp;
pub mod harness;
pub mod rewards;
pub mod semigrad;
pub mod solver;

pub use algorithms::{
    approximation_alpha, check_guarantee, run_gpo, run_gto, run_mod_baseline, GpoOptions,
    GpoResult, GtoOptions, GtoResult, GuaranteeCase, GuaranteeCheck, IterationRecord, ModBaseline,
};
pub use error::{Error, Result};
pub use gmdp::{
    build_grid, enumerate_trajectories, evaluate_policy_objective, random_trajectory,
    sample_trajectory, trajectory_probability, Estimate, Gmdp, GridConfig, GroundElement,
    GroundSet, ObjectiveEval, TabularPolicy, Trajectory,
};
pub use gp::{grid_points, matern_kernel, mutual_information_reward, GpParams, MaternNu};
pub use rewards::{
    bounded_curvature_coverage, chebyshev_disks, compute_curvature, coverage_reward,
    diverse_synergy_reward, entropy_reward, modularize, quad_disks, safe_coverage_reward,
    synergy_reward, CurvatureReport, Decomposition, GlobalReward, RewardKind, StateSetReward,
};
pub use semigrad::{
    bound_is_randomized, bp_lower_bound, exact_expected_lower_bound, expected_lower_bound,
    greedy_permutation, randomized_expected_lower_bound, randomized_trajectory_lower_bound,
    state_dependent_lower_bound, submodular_lower_bound, supermodular_lower_bound,
    trajectory_lower_bound, BoundVariant, ModularReward, Permutation, Provenance,
};
pub use solver::{
    brute_force_optimum, enumerate_deterministic_policies, extract_trajectory,
    solve_finite_horizon, solve_finite_horizon_sampled_ties, SolveResult,
};
