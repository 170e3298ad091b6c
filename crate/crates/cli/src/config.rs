//! Experiment configuration: one JSON document that names (or generates) a
//! model, fixes the variable partition, and parameterizes the planner and
//! the evaluation harness. Every run is a pure function of this document,
//! the flags, and the master seed.

use std::path::{Path, PathBuf};

use beliefplan_core::evaluate::EvalConfig;
use beliefplan_core::planner::PlannerConfig;
use beliefplan_core::simplify::ClassPartition;
use beliefplan_core::Pomdp;
use serde::{Deserialize, Serialize};

use crate::generate::GeneratorSpec;
use crate::CliError;

/// Where the model comes from: a file on disk or a generator specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ModelSource {
    #[serde(rename = "path")]
    Path(PathBuf),
    #[serde(rename = "generator")]
    Generator(GeneratorSpec),
}

/// Planner parameters; `gamma` and `r_max` always come from the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerBlock {
    /// Target suboptimality of the sparse-sampling search.
    pub delta: f64,
    /// Use this search depth instead of the formula value.
    pub horizon_override: Option<usize>,
    /// Use this per-node sample count instead of the formula value.
    pub samples_override: Option<usize>,
}

impl Default for PlannerBlock {
    fn default() -> Self {
        PlannerBlock {
            delta: 0.1,
            horizon_override: None,
            samples_override: None,
        }
    }
}

/// Evaluation-harness parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorBlock {
    /// Episodes for drift traces and bound checks.
    pub episodes: usize,
    /// Largest history length drift and value gaps are recorded at.
    pub t_max: usize,
    /// Steps simulated by `plan` and by rollout-return estimation.
    pub t_sim: usize,
    /// Lookahead depth standing in for the infinite-horizon optimal value.
    pub h_eval: usize,
    /// Node budget for each exhaustive lookahead.
    pub budget: f64,
    /// Depth of the history tree the epsilon measurements cover.
    pub measure_depth: usize,
    /// Exhaustive enumeration is used when the history tree fits this cap.
    pub measure_node_cap: u64,
    /// Trajectories sampled when the tree exceeds the cap.
    pub measure_episodes: usize,
}

impl Default for EvaluatorBlock {
    fn default() -> Self {
        let eval = EvalConfig::default();
        EvaluatorBlock {
            episodes: eval.episodes,
            t_max: eval.t_max,
            t_sim: 20,
            h_eval: eval.h_eval,
            budget: eval.budget,
            measure_depth: eval.measure.depth,
            measure_node_cap: eval.measure.node_cap,
            measure_episodes: eval.measure.episodes,
        }
    }
}

/// The experiment document. Shares the model file's JSON format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    /// Variable classes for the projection. Falls back to the classes
    /// bundled with the model, then to one class per variable.
    #[serde(default)]
    pub partition: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub planner: PlannerBlock,
    #[serde(default)]
    pub evaluator: EvaluatorBlock,
    /// Where artifacts are written; `--out` overrides.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Master seed; every stream in the run derives from it by labels.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Parse and structurally validate a config document.
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Invalid(format!("config parse failed: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Load a config file; relative model paths resolve against its parent.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json_str(&text)?;
        if let ModelSource::Path(model_path) = &config.model {
            if model_path.is_relative() {
                if let Some(dir) = path.parent() {
                    config.model = ModelSource::Path(dir.join(model_path));
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let ModelSource::Generator(spec) = &self.model {
            spec.validate()?;
        }
        if !(self.planner.delta > 0.0) {
            return Err(CliError::Invalid(format!(
                "planner.delta: must be positive, got {}",
                self.planner.delta
            )));
        }
        if self.evaluator.episodes < 2 {
            return Err(CliError::Invalid(format!(
                "evaluator.episodes: need at least 2, got {}",
                self.evaluator.episodes
            )));
        }
        if !(self.evaluator.budget > 0.0) {
            return Err(CliError::Invalid(format!(
                "evaluator.budget: must be positive, got {}",
                self.evaluator.budget
            )));
        }
        Ok(())
    }

    /// Materialize the model: load the file or run the generator.
    pub fn resolve_model(&self) -> Result<Pomdp, CliError> {
        match &self.model {
            ModelSource::Path(path) => Pomdp::load(path).map_err(CliError::from),
            ModelSource::Generator(spec) => spec.build(),
        }
    }

    /// Partition precedence: config, then model classes, then one class per
    /// variable.
    pub fn resolve_partition(&self, model: &Pomdp) -> Result<ClassPartition, CliError> {
        let classes = match &self.partition {
            Some(classes) => classes.clone(),
            None => match model.classes() {
                Some(classes) => classes.to_vec(),
                None => (0..model.num_vars()).map(|v| vec![v]).collect(),
            },
        };
        ClassPartition::new(model.num_vars(), classes).map_err(CliError::from)
    }

    /// Planner config with `gamma`/`r_max` from the model and the block's
    /// overrides applied.
    pub fn planner_config(
        &self,
        model: &Pomdp,
        partition: &ClassPartition,
    ) -> Result<PlannerConfig<f64>, CliError> {
        let mut planner =
            PlannerConfig::for_model(model, partition.clone(), self.planner.delta, self.seed)?;
        planner.horizon_override = self.planner.horizon_override;
        planner.samples_override = self.planner.samples_override;
        planner.validate()?;
        Ok(planner)
    }

    /// Evaluation config with all seeds derived from the master seed.
    pub fn eval_config(&self) -> EvalConfig {
        let mut eval = EvalConfig {
            episodes: self.evaluator.episodes,
            t_max: self.evaluator.t_max,
            h_eval: self.evaluator.h_eval,
            budget: self.evaluator.budget,
            seed: self.seed,
            ..EvalConfig::default()
        };
        eval.measure.depth = self.evaluator.measure_depth;
        eval.measure.node_cap = self.evaluator.measure_node_cap;
        eval.measure.episodes = self.evaluator.measure_episodes;
        eval.measure.seed = self.seed;
        eval
    }

    /// Output directory after applying the `--out` override.
    pub fn out_dir(&self, flag: Option<&Path>) -> Result<PathBuf, CliError> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out_dir.clone())
            .ok_or_else(|| {
                CliError::Invalid("no output directory: set out_dir or pass --out".into())
            })
    }
}
