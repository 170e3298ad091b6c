//! The six subcommands. Each is a pure function of its input files, flags,
//! and the master seed: artifacts and stdout are byte-identical across
//! reruns.

use std::io::Write;
use std::path::{Path, PathBuf};

use beliefplan_core::evaluate::{
    check_drifting_bound, check_tracking_bound, discounted_sum, drift_trace, CheckOutcome,
};
use beliefplan_core::model::{BeliefState, SimState, StepOutcome};
use beliefplan_core::planner::{
    choose_action_keyed, exact_lookahead, LookaheadMode, SparseSamplingPolicy,
};
use beliefplan_core::simplify::{measure_kl_eps, measure_l1_eps, mixing_coefficient, ClassPartition};
use beliefplan_core::{Pomdp, StreamKey};
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::output::{
    bounds_csv, decisions_csv, drift_csv, epsilon_csv, epsilon_json, json_num, json_text,
    write_text, DecisionRow,
};
use crate::CliError;

/// Generate the model named by the config and write `model.json`.
pub fn cmd_gen(
    config_path: &Path,
    out_flag: Option<&Path>,
    stdout: &mut impl Write,
) -> Result<PathBuf, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let spec = match &config.model {
        crate::config::ModelSource::Generator(spec) => spec,
        crate::config::ModelSource::Path(_) => {
            return Err(CliError::Invalid(
                "model.generator: gen needs a generator spec, not a model path".into(),
            ))
        }
    };
    let model = spec.build()?;
    let out_dir = config.out_dir(out_flag)?;
    let path = out_dir.join("model.json");
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", out_dir.display())))?;
    model.save(&path)?;
    writeln!(stdout, "model written to {}", path.display())?;
    if model.num_vars() <= beliefplan_core::simplify::MIXING_MAX_VARS {
        writeln!(stdout, "eta={}", mixing_coefficient(&model)?)?;
    }
    Ok(path)
}

/// Parse and validate a model file; any violation is reported with a path
/// into the document.
pub fn cmd_validate(model_path: &Path, stdout: &mut impl Write) -> Result<(), CliError> {
    let model = Pomdp::load(model_path)?;
    writeln!(
        stdout,
        "ok: {} vars, {} actions, {} observations, {} states",
        model.num_vars(),
        model.num_actions(),
        model.num_observations(),
        model.num_states()
    )?;
    Ok(())
}

/// Simulate `t_sim` true-POMDP steps, replanning on the simplified belief at
/// every step, and write the decision trace.
///
/// Streams derive from `root(seed).label("plan-trace")` exactly as an
/// episode rollout does, so the trace's discounted return equals
/// `rollout_return` under the same key.
pub fn cmd_plan(
    config_path: &Path,
    out_flag: Option<&Path>,
    pretty: bool,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let model = config.resolve_model()?;
    let partition = config.resolve_partition(&model)?;
    let planner = config.planner_config(&model, &partition)?;
    let t_sim = config.evaluator.t_sim;

    let key = StreamKey::root(config.seed).label("plan-trace");
    let mut env = SimState::new(&model, key.label("env"));
    let mut hat = partition.project(&model.initial_belief())?;
    let mut rows = Vec::with_capacity(t_sim);
    let mut rewards = Vec::with_capacity(t_sim);
    for t in 0..t_sim {
        let stats = choose_action_keyed(
            &model,
            &hat,
            &planner,
            key.label("policy").index(t as u64),
        )?;
        let StepOutcome {
            observation,
            reward,
        } = env.sim_step(&model, stats.action)?;
        let predicted = model.predict(&hat.expand(), stats.action)?;
        let posterior = model.posterior_from_predicted(&predicted, stats.action, observation)?;
        hat = partition.project(&posterior)?;
        rewards.push(reward);
        rows.push(DecisionRow {
            step: t,
            action: stats.action,
            observation,
            reward,
            nodes: stats.nodes,
            q: stats.root_q,
        });
    }

    let out_dir = config.out_dir(out_flag)?;
    let path = out_dir.join("decisions.csv");
    write_text(&path, &decisions_csv(&rows, model.num_actions()))?;
    let ret = discounted_sum(&rewards, 0, t_sim, model.discount());
    writeln!(stdout, "trace written to {}", path.display())?;
    writeln!(stdout, "discounted_return={ret}")?;
    if pretty {
        writeln!(stdout, "{:>4} {:>6} {:>3} {:>12} {:>8}", "step", "action", "obs", "reward", "nodes")?;
        for row in &rows {
            writeln!(
                stdout,
                "{:>4} {:>6} {:>3} {:>12.6} {:>8}",
                row.step, row.action, row.observation, row.reward, row.nodes
            )?;
        }
    }
    Ok(())
}

/// Exhaustive lookahead from a belief; prints value, argmax, and node count.
#[allow(clippy::too_many_arguments)]
pub fn cmd_oracle(
    model_path: &Path,
    depth: usize,
    mode: LookaheadMode,
    belief_path: Option<&Path>,
    partition_path: Option<&Path>,
    budget: f64,
    pretty: bool,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let model = Pomdp::load(model_path)?;
    let belief = match belief_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            let probs: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("belief parse failed: {e}")))?;
            BeliefState::new(probs)?
        }
        None => model.initial_belief(),
    };
    let partition = match partition_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            let classes: Vec<Vec<usize>> = serde_json::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("partition parse failed: {e}")))?;
            ClassPartition::new(model.num_vars(), classes)?
        }
        None => match model.classes() {
            Some(classes) => ClassPartition::new(model.num_vars(), classes.to_vec())?,
            None => {
                ClassPartition::new(model.num_vars(), (0..model.num_vars()).map(|v| vec![v]).collect())?
            }
        },
    };
    let result = exact_lookahead(&model, &belief, depth, mode, &partition, budget)?;
    if pretty {
        writeln!(stdout, "depth-{depth} lookahead:")?;
        writeln!(stdout, "  value  {}", result.value)?;
        writeln!(stdout, "  action {}", result.action)?;
        writeln!(stdout, "  nodes  {}", result.nodes)?;
    } else {
        writeln!(stdout, "value={}", result.value)?;
        writeln!(stdout, "action={}", result.action)?;
        writeln!(stdout, "nodes={}", result.nodes)?;
    }
    Ok(())
}

/// Measure simplification errors, mixing, and belief drift; write
/// `epsilon.csv`, `drift_trace.csv`, and `summary.json`.
pub fn cmd_measure(
    config_path: &Path,
    out_flag: Option<&Path>,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let model = config.resolve_model()?;
    let partition = config.resolve_partition(&model)?;
    let planner = config.planner_config(&model, &partition)?;
    let policy = SparseSamplingPolicy::new(planner)?;
    let eval = config.eval_config();

    let eps_l1 = measure_l1_eps(&model, &partition, &eval.measure)?;
    let eps_kl = measure_kl_eps(&model, &partition, &policy, &eval.measure)?;
    let eta = mixing_coefficient(&model)?;
    let trace = drift_trace(
        &model,
        &partition,
        &policy,
        eval.episodes,
        eval.t_max,
        eval.seed,
    )?;

    let out_dir = config.out_dir(out_flag)?;
    write_text(&out_dir.join("epsilon.csv"), &epsilon_csv(&[&eps_l1, &eps_kl]))?;
    write_text(&out_dir.join("drift_trace.csv"), &drift_csv(&trace))?;

    let mut summary = Map::new();
    summary.insert("eta".into(), json_num(eta));
    summary.insert("eps_l1".into(), epsilon_json(&eps_l1));
    summary.insert("eps_kl".into(), epsilon_json(&eps_kl));
    summary.insert("policy".into(), Value::String(trace.policy.clone()));
    summary.insert("episodes".into(), Value::from(trace.episodes));
    summary.insert("t_max".into(), Value::from(eval.t_max));
    summary.insert("seed".into(), Value::from(config.seed));
    write_text(&out_dir.join("summary.json"), &json_text(&Value::Object(summary)))?;

    writeln!(stdout, "eta={eta}")?;
    writeln!(stdout, "eps_l1={}", eps_l1.max)?;
    writeln!(stdout, "eps_kl={}", eps_kl.max)?;
    writeln!(stdout, "artifacts written to {}", out_dir.display())?;
    Ok(())
}

fn report_lines(outcome: &CheckOutcome<f64>, stdout: &mut impl Write) -> Result<(), CliError> {
    for report in &outcome.reports {
        let status = match (report.pass, report.vacuous) {
            (true, false) => "pass",
            (true, true) => "pass (vacuous rows)",
            (false, _) => "FAIL",
        };
        writeln!(stdout, "{}: {status}", report.theorem)?;
    }
    Ok(())
}

/// Check the tracking and drifting value-gap bounds; write one bounds CSV
/// per family plus `summary.json`. Returns overall pass.
pub fn cmd_check(
    config_path: &Path,
    out_flag: Option<&Path>,
    stdout: &mut impl Write,
) -> Result<bool, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let model = config.resolve_model()?;
    let partition = config.resolve_partition(&model)?;
    let planner = config.planner_config(&model, &partition)?;
    let eval = config.eval_config();

    let tracking = check_tracking_bound(&model, &partition, &planner, &eval)?;
    let drifting = check_drifting_bound(&model, &partition, &planner, &eval)?;

    let out_dir = config.out_dir(out_flag)?;
    write_text(&out_dir.join("tracking_bounds.csv"), &bounds_csv(&tracking.reports))?;
    write_text(&out_dir.join("drifting_bounds.csv"), &bounds_csv(&drifting.reports))?;

    let pass = tracking.pass() && drifting.pass();
    let mut summary = Map::new();
    summary.insert("pass".into(), Value::from(pass));
    summary.insert("tracking_pass".into(), Value::from(tracking.pass()));
    summary.insert("drifting_pass".into(), Value::from(drifting.pass()));
    summary.insert("eta".into(), json_num(tracking.eta));
    summary.insert("eps_l1".into(), epsilon_json(&tracking.eps_l1));
    summary.insert("eps_kl".into(), epsilon_json(&tracking.eps_kl));
    summary.insert("delta".into(), json_num(tracking.inputs.delta));
    summary.insert("truncation".into(), json_num(tracking.inputs.truncation));
    summary.insert("episodes".into(), Value::from(tracking.stats.episodes));
    summary.insert("h_eval".into(), Value::from(tracking.stats.h_eval));
    summary.insert("seed".into(), Value::from(config.seed));
    write_text(&out_dir.join("summary.json"), &json_text(&Value::Object(summary)))?;

    report_lines(&tracking, stdout)?;
    report_lines(&drifting, stdout)?;
    writeln!(stdout, "{}", if pass { "pass" } else { "FAIL" })?;
    writeln!(stdout, "artifacts written to {}", out_dir.display())?;
    Ok(pass)
}
