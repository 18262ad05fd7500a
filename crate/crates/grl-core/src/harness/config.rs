//! Experiment configuration: a JSON document with an environment block, a
//! reward block, an optional GP block, and a list of algorithm blocks.

use crate::error::{Error, Result};
use crate::gmdp::GridConfig;
use crate::gp::{GpParams, MaternNu};
use crate::semigrad::BoundVariant;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Used in output file names and plot titles.
    pub name: String,
    pub environment: GridConfig,
    pub reward: RewardConfig,
    /// Matern field parameters; only read by the mutual-information reward.
    #[serde(default)]
    pub gp: Option<GpBlock>,
    pub algorithms: Vec<AlgorithmConfig>,
    /// Number of seeds; instance seeds are `seed..seed + runs`.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Base seed for the sweep.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// When false (the default) the wall_ms column is written as 0 so that
    /// reruns produce byte-identical CSV files.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_runs() -> usize {
    1
}

/// Reward block. `kind` selects the catalog entry; the remaining fields are
/// read per kind, with Table-style defaults where meaningful.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    pub kind: RewardKindConfig,
    /// Revisit weight for bounded-curvature coverage (default 0.1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Synergy exponent (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Safe-coverage bonus (default 500).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    /// Explicit synergy sets as flat ground indices; when absent they are
    /// drawn per seed using `num_synergy_sets` / `synergy_set_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synergy_sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_synergy_sets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synergy_set_size: Option<usize>,
    /// Explicit unsafe states; when absent they are drawn per seed using
    /// `num_unsafe_states`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsafe_states: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_unsafe_states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<DiskConfig>,
}

impl RewardConfig {
    pub fn bare(kind: RewardKindConfig) -> Self {
        RewardConfig {
            kind,
            alpha: None,
            beta: None,
            penalty: None,
            synergy_sets: None,
            num_synergy_sets: None,
            synergy_set_size: None,
            unsafe_states: None,
            num_unsafe_states: None,
            disk: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RewardKindConfig {
    Coverage,
    BoundedCurvatureCoverage,
    Entropy,
    Synergy,
    DiverseSynergy,
    SafeCoverage,
    MutualInformation,
}

/// Observation footprint per state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    #[serde(default)]
    pub shape: DiskShape,
    /// Chebyshev radius; ignored by the quad shape.
    #[serde(default = "default_radius")]
    pub radius: usize,
}

impl Default for DiskConfig {
    fn default() -> Self {
        DiskConfig { shape: DiskShape::Chebyshev, radius: 1 }
    }
}

fn default_radius() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DiskShape {
    #[default]
    Chebyshev,
    /// 2x2 window anchored at the cell (the cell plus right/up/up-right).
    Quad,
}

/// GP block with per-field defaults matching `GpParams::default()`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GpBlock {
    #[serde(default = "default_nu")]
    pub nu: MaternNu,
    #[serde(default = "default_length_scale")]
    pub length_scale: f64,
    /// When present, each seed picks `choices[seed % len]` instead of
    /// `length_scale`, giving per-run field variation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_scale_choices: Option<Vec<f64>>,
    #[serde(default = "default_signal_variance")]
    pub signal_variance: f64,
    #[serde(default = "default_noise_variance")]
    pub noise_variance: f64,
}

impl Default for GpBlock {
    fn default() -> Self {
        GpBlock {
            nu: default_nu(),
            length_scale: default_length_scale(),
            length_scale_choices: None,
            signal_variance: default_signal_variance(),
            noise_variance: default_noise_variance(),
        }
    }
}

fn default_nu() -> MaternNu {
    MaternNu::FiveHalves
}
fn default_length_scale() -> f64 {
    2.0
}
fn default_signal_variance() -> f64 {
    1.0
}
fn default_noise_variance() -> f64 {
    0.1
}

impl GpBlock {
    /// Parameters for a given run index, applying the per-seed choice list.
    pub fn params_for_run(&self, run: usize) -> GpParams {
        let length_scale = match &self.length_scale_choices {
            Some(choices) if !choices.is_empty() => choices[run % choices.len()],
            _ => self.length_scale,
        };
        GpParams {
            nu: self.nu,
            length_scale,
            signal_variance: self.signal_variance,
            noise_variance: self.noise_variance,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: AlgorithmName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<BoundVariant>,
    /// Trajectories sampled per iteration for the expected bound (gpo).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_traj_samples: Option<usize>,
    /// Monte-Carlo samples for objective estimates on instances too large to
    /// enumerate (gpo and the mod baseline under stochastic dynamics).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_samples: Option<usize>,
}

impl AlgorithmConfig {
    pub fn bare(name: AlgorithmName) -> Self {
        AlgorithmConfig {
            name,
            max_iters: None,
            lower_bound: None,
            n_traj_samples: None,
            eval_samples: None,
        }
    }

    /// CSV label: the name plus the bound-variant suffix.
    pub fn label(&self) -> String {
        let suffix = match self.name {
            AlgorithmName::Gto | AlgorithmName::Gpo => {
                self.lower_bound.unwrap_or_default().label_suffix()
            }
            _ => "",
        };
        format!("{}{}", self.name.as_str(), suffix)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Gto,
    Gpo,
    Mod,
    BruteForce,
}

impl AlgorithmName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmName::Gto => "gto",
            AlgorithmName::Gpo => "gpo",
            AlgorithmName::Mod => "mod",
            AlgorithmName::BruteForce => "brute_force",
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms configured".into()));
        }
        let states = self.environment.width * self.environment.height;
        let ground_size = states * self.environment.horizon;
        let r = &self.reward;
        match r.kind {
            RewardKindConfig::BoundedCurvatureCoverage => {
                if let Some(alpha) = r.alpha {
                    if !(0.0..=1.0).contains(&alpha) {
                        return Err(Error::InvalidConfig(format!(
                            "reward.alpha {alpha} outside [0, 1]"
                        )));
                    }
                }
            }
            RewardKindConfig::Synergy | RewardKindConfig::DiverseSynergy => {
                if let Some(beta) = r.beta {
                    if beta < 1.0 {
                        return Err(Error::InvalidConfig(format!(
                            "reward.beta {beta} must be >= 1"
                        )));
                    }
                }
                if r.synergy_sets.is_none() && r.num_synergy_sets.is_none() {
                    return Err(Error::InvalidConfig(
                        "synergy rewards need reward.synergy_sets or reward.num_synergy_sets"
                            .into(),
                    ));
                }
                if let Some(sets) = &r.synergy_sets {
                    for (i, set) in sets.iter().enumerate() {
                        if let Some(&v) = set.iter().find(|&&v| v >= ground_size) {
                            return Err(Error::InvalidConfig(format!(
                                "reward.synergy_sets[{i}] index {v} outside ground set of size {ground_size}"
                            )));
                        }
                    }
                }
            }
            RewardKindConfig::SafeCoverage => {
                if let Some(unsafe_states) = &r.unsafe_states {
                    if let Some(&s) = unsafe_states.iter().find(|&&s| s >= states) {
                        return Err(Error::InvalidConfig(format!(
                            "reward.unsafe_states entry {s} outside the {states}-state grid"
                        )));
                    }
                } else if r.num_unsafe_states.is_none() {
                    return Err(Error::InvalidConfig(
                        "safe coverage needs reward.unsafe_states or reward.num_unsafe_states"
                            .into(),
                    ));
                }
                if let Some(p) = r.penalty {
                    if p < 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "reward.penalty {p} must be >= 0"
                        )));
                    }
                }
            }
            _ => {}
        }
        let deterministic = self.environment.stochasticity_degree == 0.0;
        for alg in &self.algorithms {
            match alg.name {
                AlgorithmName::Gto if !deterministic => {
                    return Err(Error::InvalidConfig(
                        "gto requires stochasticity_degree 0".into(),
                    ));
                }
                AlgorithmName::BruteForce if !deterministic => {
                    return Err(Error::InvalidConfig(
                        "brute_force requires stochasticity_degree 0".into(),
                    ));
                }
                _ => {}
            }
            if let Some(0) = alg.max_iters {
                return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
            }
            if let Some(0) = alg.n_traj_samples {
                return Err(Error::InvalidConfig(
                    "n_traj_samples must be at least 1".into(),
                ));
            }
            if let Some(0) = alg.eval_samples {
                return Err(Error::InvalidConfig("eval_samples must be at least 1".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> &'static str {
        r#"{
            "name": "smoke",
            "environment": {"width": 3, "height": 3, "horizon": 4},
            "reward": {"kind": "coverage", "disk": {"radius": 1}},
            "algorithms": [{"name": "gto"}],
            "runs": 2
        }"#
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = ExperimentConfig::from_json(minimal_json()).unwrap();
        assert_eq!(config.runs, 2);
        assert_eq!(config.seed, 0);
        assert!(!config.record_wall_time);
        assert_eq!(config.algorithms[0].label(), "gto");
        assert_eq!(config.environment.stochasticity_degree, 0.0);
    }

    #[test]
    fn labels_carry_the_bound_suffix() {
        let mut alg = AlgorithmConfig::bare(AlgorithmName::Gto);
        alg.lower_bound = Some(BoundVariant::StateDependent);
        assert_eq!(alg.label(), "gto_s");
        alg.lower_bound = Some(BoundVariant::GreedyStateDependent);
        assert_eq!(alg.label(), "gto_greedy_s");
        let m = AlgorithmConfig::bare(AlgorithmName::Mod);
        assert_eq!(m.label(), "mod");
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = ExperimentConfig::from_json(minimal_json()).unwrap();
        let text = config.to_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = minimal_json().replace("\"runs\": 2", "\"runs\": 2, \"typo\": 1");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn gto_on_stochastic_dynamics_is_a_config_error() {
        let text = minimal_json().replace(
            "\"horizon\": 4",
            "\"horizon\": 4, \"stochasticity_degree\": 0.1",
        );
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn synergy_needs_sets_or_a_draw_size() {
        let text = minimal_json().replace(
            r#""reward": {"kind": "coverage", "disk": {"radius": 1}}"#,
            r#""reward": {"kind": "synergy", "beta": 2.0}"#,
        );
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn bound_variant_strings_are_stable() {
        let v: BoundVariant = serde_json::from_str("\"greedy_state_dependent\"").unwrap();
        assert_eq!(v, BoundVariant::GreedyStateDependent);
        assert_eq!(
            serde_json::to_string(&BoundVariant::StateDependent).unwrap(),
            "\"state_dependent\""
        );
        assert_eq!(serde_json::to_string(&BoundVariant::Full).unwrap(), "\"full\"");
    }

    #[test]
    fn gp_block_cycles_length_scale_choices() {
        let block = GpBlock {
            length_scale_choices: Some(vec![1.0, 2.0, 3.0]),
            ..GpBlock::default()
        };
        assert_eq!(block.params_for_run(0).length_scale, 1.0);
        assert_eq!(block.params_for_run(4).length_scale, 2.0);
        let plain = GpBlock::default();
        assert_eq!(plain.params_for_run(7).length_scale, 2.0);
    }
}
