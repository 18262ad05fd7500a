//! Canned experiment configurations mirroring the benchmark suite: sensor
//! design with mutual information, synergy hunting under noise, penalized
//! safe coverage, and the smaller diagnostic sweeps.

use crate::error::{Error, Result};
use crate::gmdp::GridConfig;
use crate::harness::config::{
    AlgorithmConfig, AlgorithmName, DiskConfig, DiskShape, ExperimentConfig, GpBlock,
    RewardConfig, RewardKindConfig,
};
use crate::semigrad::BoundVariant;

pub const PRESET_NAMES: [&str; 6] = [
    "design",
    "synergies",
    "safe_coverage",
    "coverage",
    "bounded_coverage",
    "entropy",
];

/// Look up a named preset. The returned config validates cleanly and runs 20
/// seeds starting from seed 0.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let config = match name {
        "design" => design(),
        "synergies" => synergies(),
        "safe_coverage" => safe_coverage(),
        "coverage" => coverage(),
        "bounded_coverage" => bounded_coverage(),
        "entropy" => entropy(),
        _ => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {name:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    config.validate()?;
    Ok(config)
}

fn grid(width: usize, height: usize, horizon: usize, stochasticity: f64) -> GridConfig {
    GridConfig {
        width,
        height,
        horizon,
        stochasticity_degree: stochasticity,
        initial_state: None,
        seed: None,
    }
}

fn base(name: &str, environment: GridConfig, reward: RewardConfig) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        environment,
        reward,
        gp: None,
        algorithms: Vec::new(),
        runs: 20,
        seed: 0,
        output_dir: None,
        record_wall_time: false,
    }
}

fn gto(max_iters: usize, lower_bound: Option<BoundVariant>) -> AlgorithmConfig {
    AlgorithmConfig {
        max_iters: Some(max_iters),
        lower_bound,
        ..AlgorithmConfig::bare(AlgorithmName::Gto)
    }
}

/// Sensor placement on a 20x20 field: maximize mutual information under a
/// Matern GP whose length scale varies with the seed.
fn design() -> ExperimentConfig {
    let mut config = base(
        "design",
        grid(20, 20, 10, 0.0),
        RewardConfig::bare(RewardKindConfig::MutualInformation),
    );
    config.gp = Some(GpBlock {
        length_scale_choices: Some(vec![1.0, 2.0, 3.0]),
        ..GpBlock::default()
    });
    config.algorithms = vec![gto(6, None), AlgorithmConfig::bare(AlgorithmName::Mod)];
    config
}

/// Coverage plus 100 random pairwise synergies on a noisy grid, optimized
/// with the stochastic policy loop.
fn synergies() -> ExperimentConfig {
    let mut config = base(
        "synergies",
        grid(20, 20, 8, 0.1),
        RewardConfig {
            beta: Some(2.0),
            num_synergy_sets: Some(100),
            synergy_set_size: Some(2),
            disk: Some(DiskConfig { shape: DiskShape::Chebyshev, radius: 1 }),
            ..RewardConfig::bare(RewardKindConfig::DiverseSynergy)
        },
    );
    config.algorithms = vec![
        AlgorithmConfig {
            max_iters: Some(6),
            n_traj_samples: Some(20),
            eval_samples: Some(20),
            ..AlgorithmConfig::bare(AlgorithmName::Gpo)
        },
        AlgorithmConfig::bare(AlgorithmName::Mod),
    ];
    config
}

/// Coverage with 40 forbidden cells and a large one-shot penalty; the
/// state-dependent bound keeps the surrogate tractable at this horizon.
fn safe_coverage() -> ExperimentConfig {
    let mut config = base(
        "safe_coverage",
        grid(20, 20, 20, 0.0),
        RewardConfig {
            penalty: Some(500.0),
            num_unsafe_states: Some(40),
            disk: Some(DiskConfig { shape: DiskShape::Chebyshev, radius: 1 }),
            ..RewardConfig::bare(RewardKindConfig::SafeCoverage)
        },
    );
    config.algorithms = vec![
        gto(25, Some(BoundVariant::StateDependent)),
        AlgorithmConfig::bare(AlgorithmName::Mod),
    ];
    config
}

/// Long-horizon quadrant coverage comparing the first-visit state chain
/// against its greedy reordering.
fn coverage() -> ExperimentConfig {
    let mut config = base(
        "coverage",
        grid(20, 20, 31, 0.0),
        RewardConfig {
            disk: Some(DiskConfig { shape: DiskShape::Quad, radius: 1 }),
            ..RewardConfig::bare(RewardKindConfig::Coverage)
        },
    );
    config.algorithms = vec![
        gto(35, Some(BoundVariant::StateDependent)),
        gto(35, Some(BoundVariant::GreedyStateDependent)),
    ];
    config
}

/// Coverage with tunable curvature (alpha = 0.9 keeps it nearly additive).
fn bounded_coverage() -> ExperimentConfig {
    let mut config = base(
        "bounded_coverage",
        grid(10, 10, 10, 0.0),
        RewardConfig {
            alpha: Some(0.9),
            ..RewardConfig::bare(RewardKindConfig::BoundedCurvatureCoverage)
        },
    );
    config.algorithms = vec![gto(15, None), AlgorithmConfig::bare(AlgorithmName::Mod)];
    config
}

/// Maximize the entropy of the empirical state-visit distribution.
fn entropy() -> ExperimentConfig {
    let mut config = base(
        "entropy",
        grid(10, 10, 10, 0.0),
        RewardConfig::bare(RewardKindConfig::Entropy),
    );
    config.algorithms = vec![gto(15, None), AlgorithmConfig::bare(AlgorithmName::Mod)];
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for name in PRESET_NAMES {
            let config = preset(name).unwrap_or_else(|e| panic!("preset {name}: {e}"));
            assert_eq!(config.name, name);
            assert_eq!(config.runs, 20);
            let json = config.to_json();
            let back = ExperimentConfig::from_json(&json).unwrap();
            assert_eq!(config, back);
        }
    }

    #[test]
    fn unknown_preset_is_rejected_with_the_menu() {
        let err = preset("does_not_exist").unwrap_err().to_string();
        assert!(err.contains("design"));
        assert!(err.contains("entropy"));
    }

    #[test]
    fn design_cycles_three_length_scales() {
        let config = preset("design").unwrap();
        let gp = config.gp.unwrap();
        let choices = gp.length_scale_choices.clone().unwrap();
        assert_eq!(choices.len(), 3);
        assert_eq!(gp.params_for_run(0).length_scale, 1.0);
        assert_eq!(gp.params_for_run(4).length_scale, 2.0);
    }

    #[test]
    fn coverage_compares_the_two_state_chain_variants() {
        let config = preset("coverage").unwrap();
        let labels: Vec<String> = config.algorithms.iter().map(|a| a.label()).collect();
        assert_eq!(labels, vec!["gto_s", "gto_greedy_s"]);
    }

    #[test]
    fn synergies_runs_the_stochastic_loop() {
        let config = preset("synergies").unwrap();
        assert!(config.environment.stochasticity_degree > 0.0);
        assert_eq!(config.algorithms[0].name, AlgorithmName::Gpo);
    }
}
