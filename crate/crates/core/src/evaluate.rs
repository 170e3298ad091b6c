//! Monte Carlo evaluation in the true process, belief-drift traces, and
//! empirical checks of the simplification error bounds.
//!
//! Every episode runs in the *true* POMDP: observations are emitted by the
//! hidden state, while the policy only ever sees the simplified belief,
//! maintained by the projected recursion `S(U(belief, <a,o>))`. The exact
//! Bayes filter runs alongside for drift measurement.
//!
//! The bound checks compare measured per-step expectations against
//!
//! ```text
//! tracking      E|G - V*|            <= delta + (3 r_max/(1-gamma)^2) sqrt(2 eps_KL/eta)
//! drifting      E|G - V*|            <= delta + 12 eps_L1 r_max/(1-gamma)^3
//!                                            + 12 eps_L1 r_max t/(1-gamma)^2
//! drift_KL      E D(beta||beta_hat)  <= eps_KL/eta
//! pinsker       E ||beta-beta_hat||1 <= sqrt(2 eps_KL/eta)
//! drift_L1      E ||beta-beta_hat||1 <= 4 eps_L1 (t+1)
//! reward_gap    E |R - R_hat|        <= r_max sqrt(2 eps_KL/eta)   (tracking)
//!                                    <= 4 eps_L1 (t+1) r_max        (drifting)
//! obsdist_gap   E ||P(o|a,.) - P_hat(o|a,.)||1
//!                                    <= sqrt(2 eps_KL/eta)          (tracking)
//!                                    <= 4 eps_L1 (t+1)              (drifting)
//! ```
//!
//! with KL in nats throughout. The expectations bound true means, so a check
//! passes when the sample mean is within the bound plus a declared slack of
//! three standard errors (plus the lookahead truncation tail where the bound
//! involves `V*`). A bound of `+inf` or `0/0` is vacuous: its hypothesis is
//! unmet and the row passes with a warning flag. Negative measured KL gaps
//! are clamped to zero before entering a bound formula.
//!
//! `V*` at a history is accessed by exhaustive lookahead to depth `h_eval`
//! with truncation tail `gamma^(h_eval+1) r_max/(1-gamma)`; the empirical
//! return `G` over the same window carries the same tail, so value-gap rows
//! get twice that tail as extra slack.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    BeliefState, FactoredPomdp, History, ModelError, SimState, StepOutcome,
};
use crate::num::Real;
use crate::planner::{
    exact_lookahead, Lookahead, LookaheadMode, PlanError, PlannerConfig, SparseSamplingPolicy,
};
use crate::policy::{Decision, Policy};
use crate::rng::StreamKey;
use crate::simplify::{
    kl_divergence, l1_distance, measure_kl_eps, measure_l1_eps, mixing_coefficient,
    ClassPartition, EpsilonEstimate, LogBase, MeasureConfig, SimplifiedBelief,
};

/// `v_max = r_max / (1 - gamma)`: the largest magnitude any discounted
/// return or value can take.
pub fn v_max<F: Real>(model: &FactoredPomdp<F>) -> F {
    model.r_max() / (F::one() - model.discount())
}

/// Settings for episode-based evaluation and bound checking.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Independent episodes to average over.
    pub episodes: usize,
    /// Largest history length a value gap is recorded at.
    pub t_max: usize,
    /// Lookahead depth standing in for the infinite-horizon optimal value.
    pub h_eval: usize,
    /// Node budget for each exhaustive lookahead.
    pub budget: f64,
    /// Master seed for the episode streams.
    pub seed: u64,
    /// How the one-step simplification errors are measured.
    pub measure: MeasureConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            episodes: 200,
            t_max: 5,
            h_eval: 4,
            budget: crate::planner::DEFAULT_NODE_BUDGET,
            seed: 0,
            measure: MeasureConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.episodes < 2 {
            return Err(ModelError::Invalid {
                path: "episodes".into(),
                message: "need at least 2 episodes".into(),
            });
        }
        if !(self.budget > 0.0) {
            return Err(ModelError::Invalid {
                path: "budget".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe<F> {
    pub mean: F,
    pub se: F,
}

fn mean_se<F: Real>(samples: &[F]) -> MeanSe<F> {
    if samples.is_empty() {
        return MeanSe {
            mean: F::zero(),
            se: F::zero(),
        };
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return MeanSe {
            mean: F::infinity(),
            se: F::infinity(),
        };
    }
    let n = F::from_usize(samples.len()).expect("sample count fits");
    let mean = samples.iter().copied().sum::<F>() / n;
    let se = if samples.len() < 2 || samples.iter().all(|&x| x == samples[0]) {
        F::zero()
    } else {
        let var = samples
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<F>()
            / (n - F::one());
        (var / n).sqrt()
    };
    MeanSe { mean, se }
}

fn max_of<F: Real>(samples: &[F]) -> F {
    samples
        .iter()
        .copied()
        .fold(F::neg_infinity(), |acc, x| if x > acc { x } else { acc })
}

/// One simulated trajectory with everything later passes need.
struct EpisodeRecord<F> {
    rewards: Vec<F>,
    /// `(history, exact belief, simplified belief)` at each `t <= record_t`,
    /// taken before the step at `t`.
    snapshots: Vec<(History, BeliefState<F>, SimplifiedBelief<F>)>,
}

/// Simulate `steps` steps of the true POMDP under `policy`, recording belief
/// snapshots for `t = 0..=record_t`.
fn run_episode<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    steps: usize,
    record_t: usize,
    key: StreamKey,
) -> Result<EpisodeRecord<F>, ModelError> {
    let mut env = SimState::new(model, key.label("env"));
    let mut history = History::new();
    let mut exact = model.initial_belief();
    let mut hat = partition.project(&exact)?;
    let mut rewards = Vec::with_capacity(steps);
    let mut snapshots = Vec::with_capacity(record_t + 1);

    for t in 0..steps {
        if t <= record_t {
            snapshots.push((history.clone(), exact.clone(), hat.clone()));
        }
        let action = policy.choose(&Decision {
            model,
            history: &history,
            simplified: &hat,
            t,
            key: key.label("policy").index(t as u64),
        })?;
        let StepOutcome {
            observation,
            reward,
        } = env.sim_step(model, action)?;
        rewards.push(reward);

        exact = model.belief_update(&exact, action, observation)?;
        let hat_expanded = hat.expand();
        let predicted = model.predict(&hat_expanded, action)?;
        let posterior = model.posterior_from_predicted(&predicted, action, observation)?;
        hat = partition.project(&posterior)?;
        history.push(action, observation);
    }
    if steps <= record_t {
        snapshots.push((history, exact, hat));
    }
    Ok(EpisodeRecord { rewards, snapshots })
}

/// Discounted return `sum_{t < t_sim} gamma^t r_t` of one episode, with the
/// policy fed the evolving simplified belief. Deterministic in `key`.
pub fn rollout_return<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    t_sim: usize,
    key: StreamKey,
) -> Result<F, ModelError> {
    let record = run_episode(model, partition, policy, t_sim, 0, key)?;
    Ok(discounted_sum(&record.rewards, 0, t_sim, model.discount()))
}

/// `sum_{k < terms} gamma^k rewards[from + k]`, accumulated in ascending
/// `k` so callers can reproduce [`rollout_return`] exactly.
pub fn discounted_sum<F: Real>(rewards: &[F], from: usize, terms: usize, gamma: F) -> F {
    let mut total = F::zero();
    let mut weight = F::one();
    for k in 0..terms {
        total += weight * rewards[from + k];
        weight *= gamma;
    }
    total
}

/// Mean discounted return over independent episodes and the half-width of
/// its 95% normal-approximation confidence interval.
pub fn estimate_value<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    episodes: usize,
    t_sim: usize,
    seed: u64,
) -> Result<(F, F), ModelError> {
    if episodes < 2 {
        return Err(ModelError::Invalid {
            path: "episodes".into(),
            message: "need at least 2 episodes".into(),
        });
    }
    let root = StreamKey::root(seed).label("rollout");
    let returns = (0..episodes)
        .into_par_iter()
        .map(|e| rollout_return(model, partition, policy, t_sim, root.index(e as u64)))
        .collect::<Result<Vec<F>, ModelError>>()?;
    let stats = mean_se(&returns);
    Ok((stats.mean, F::from_f64_lossy(1.96) * stats.se))
}

/// Per-step drift between the exact filter and the simplified recursion.
#[derive(Debug, Clone, Serialize)]
pub struct DriftRow<F> {
    pub t: usize,
    pub mean_l1: F,
    pub max_l1: F,
    pub se_l1: F,
    pub mean_kl: F,
    pub max_kl: F,
    pub se_kl: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftTrace<F> {
    pub rows: Vec<DriftRow<F>>,
    pub episodes: usize,
    pub policy: String,
    pub seed: u64,
}

/// Run `policy` in the true POMDP for `episodes` episodes of `t_max` steps,
/// recording `||beta - beta_hat||_1` and `D(beta || beta_hat)` (nats) at
/// every `t = 0..=t_max`.
pub fn drift_trace<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    episodes: usize,
    t_max: usize,
    seed: u64,
) -> Result<DriftTrace<F>, ModelError> {
    let root = StreamKey::root(seed).label("drift");
    let traces = (0..episodes)
        .into_par_iter()
        .map(|e| {
            let record = run_episode(model, partition, policy, t_max, t_max, root.index(e as u64))?;
            record
                .snapshots
                .iter()
                .map(|(_, exact, hat)| {
                    let expanded = hat.expand();
                    let l1 = l1_distance(exact.probs(), expanded.probs())?;
                    let kl = kl_divergence(exact.probs(), expanded.probs(), LogBase::Nats)?;
                    Ok((l1, kl))
                })
                .collect::<Result<Vec<(F, F)>, ModelError>>()
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let rows = (0..=t_max)
        .map(|t| {
            let l1s: Vec<F> = traces.iter().map(|tr| tr[t].0).collect();
            let kls: Vec<F> = traces.iter().map(|tr| tr[t].1).collect();
            let l1 = mean_se(&l1s);
            let kl = mean_se(&kls);
            DriftRow {
                t,
                mean_l1: l1.mean,
                max_l1: max_of(&l1s),
                se_l1: l1.se,
                mean_kl: kl.mean,
                max_kl: max_of(&kls),
                se_kl: kl.se,
            }
        })
        .collect();
    Ok(DriftTrace {
        rows,
        episodes,
        policy: policy.name(),
        seed,
    })
}

/// Measured gaps at one history length.
#[derive(Debug, Clone, Serialize)]
pub struct GapRow<F> {
    pub t: usize,
    /// `|G_t - V*(rho_t)|`: realized continuation return vs. optimal value.
    pub opt_gap: MeanSe<F>,
    /// `|G_t - V_hat*(rho_t)|`.
    pub simp_gap: MeanSe<F>,
    /// `|V_hat*(rho_t) - V*(rho_t)|`.
    pub star_gap: MeanSe<F>,
    /// `|R(beta) - R(beta_hat)|`.
    pub reward_gap: MeanSe<F>,
    /// Per action: `||P(o|a,beta) - P(o|a,beta_hat)||_1`.
    pub obs_gap: Vec<MeanSe<F>>,
    /// `||beta - beta_hat||_1`.
    pub l1_drift: MeanSe<F>,
    /// `D(beta || beta_hat)` in nats.
    pub kl_drift: MeanSe<F>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueGapStats<F> {
    pub rows: Vec<GapRow<F>>,
    pub episodes: usize,
    pub h_eval: usize,
    /// `gamma^(h_eval+1) r_max / (1-gamma)`: tail both `G` and the lookahead
    /// values omit.
    pub truncation: F,
    /// Nodes expanded across all distinct lookahead calls.
    pub lookahead_nodes: u64,
    pub policy: String,
    pub seed: u64,
}

/// Run `policy` in the true POMDP and measure, at every `t <= t_max`, the
/// gaps between its realized continuation return `G_t = sum_{k<=h_eval}
/// gamma^k r_{t+k}`, the truncated optimal value `V*(rho_t)`, and the
/// truncated simplified-optimal value `V_hat*(rho_t)`, together with the
/// one-step reward and observation-distribution gaps and the belief drift.
///
/// `V*` and `V_hat*` are deterministic per history and cached, so shared
/// prefixes across episodes are expanded once.
pub fn measure_value_gaps<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    cfg: &EvalConfig,
) -> Result<ValueGapStats<F>, PlanError> {
    cfg.validate()?;
    let estimate = crate::planner::lookahead_estimate(
        model.num_actions(),
        model.num_observations(),
        cfg.h_eval,
    );
    if !(estimate <= cfg.budget) {
        return Err(PlanError::Budget {
            estimate,
            budget: cfg.budget,
        });
    }

    let steps = cfg.t_max + cfg.h_eval + 1;
    let root = StreamKey::root(cfg.seed).label("gaps");
    let records = (0..cfg.episodes)
        .into_par_iter()
        .map(|e| run_episode(model, partition, policy, steps, cfg.t_max, root.index(e as u64)))
        .collect::<Result<Vec<_>, ModelError>>()?;

    let gamma = model.discount();
    let mut cache: HashMap<History, (F, F)> = HashMap::new();
    let mut lookahead_nodes = 0u64;
    let num_actions = model.num_actions();
    let n_t = cfg.t_max + 1;
    let mut opt = vec![Vec::with_capacity(cfg.episodes); n_t];
    let mut simp = vec![Vec::with_capacity(cfg.episodes); n_t];
    let mut star = vec![Vec::with_capacity(cfg.episodes); n_t];
    let mut reward = vec![Vec::with_capacity(cfg.episodes); n_t];
    let mut obs = vec![vec![Vec::with_capacity(cfg.episodes); num_actions]; n_t];
    let mut l1 = vec![Vec::with_capacity(cfg.episodes); n_t];
    let mut kl = vec![Vec::with_capacity(cfg.episodes); n_t];

    for record in &records {
        for (t, (history, exact, hat)) in record.snapshots.iter().enumerate() {
            let (v_star, v_hat) = match cache.get(history) {
                Some(&pair) => pair,
                None => {
                    let hat_expanded = hat.expand();
                    let Lookahead { value: vs, nodes: n1, .. } = exact_lookahead(
                        model,
                        exact,
                        cfg.h_eval,
                        LookaheadMode::TrueBeliefs,
                        partition,
                        cfg.budget,
                    )?;
                    let Lookahead { value: vh, nodes: n2, .. } = exact_lookahead(
                        model,
                        &hat_expanded,
                        cfg.h_eval,
                        LookaheadMode::Simplified,
                        partition,
                        cfg.budget,
                    )?;
                    lookahead_nodes += n1 + n2;
                    cache.insert(history.clone(), (vs, vh));
                    (vs, vh)
                }
            };
            let g = discounted_sum(&record.rewards, t, cfg.h_eval + 1, gamma);
            opt[t].push((g - v_star).abs());
            simp[t].push((g - v_hat).abs());
            star[t].push((v_hat - v_star).abs());

            let hat_expanded = hat.expand();
            let r_true = model.expected_reward(exact)?;
            let r_hat = model.expected_reward(&hat_expanded)?;
            reward[t].push((r_true - r_hat).abs());
            for a in 0..num_actions {
                let p_true = model.observation_distribution(&model.predict(exact, a)?);
                let p_hat = model.observation_distribution(&model.predict(&hat_expanded, a)?);
                obs[t][a].push(l1_distance(&p_true, &p_hat)?);
            }
            l1[t].push(l1_distance(exact.probs(), hat_expanded.probs())?);
            kl[t].push(kl_divergence(exact.probs(), hat_expanded.probs(), LogBase::Nats)?);
        }
    }

    let rows = (0..n_t)
        .map(|t| GapRow {
            t,
            opt_gap: mean_se(&opt[t]),
            simp_gap: mean_se(&simp[t]),
            star_gap: mean_se(&star[t]),
            reward_gap: mean_se(&reward[t]),
            obs_gap: obs[t].iter().map(|xs| mean_se(xs)).collect(),
            l1_drift: mean_se(&l1[t]),
            kl_drift: mean_se(&kl[t]),
        })
        .collect();

    let tail = gamma.powi(cfg.h_eval as i32 + 1) * model.r_max() / (F::one() - gamma);
    Ok(ValueGapStats {
        rows,
        episodes: cfg.episodes,
        h_eval: cfg.h_eval,
        truncation: tail,
        lookahead_nodes,
        policy: policy.name(),
        seed: cfg.seed,
    })
}

/// Which bound a report's rows are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "tracking")]
    Tracking,
    #[serde(rename = "drifting")]
    Drifting,
    #[serde(rename = "drift_L1")]
    DriftL1,
    #[serde(rename = "drift_KL")]
    DriftKl,
    #[serde(rename = "pinsker")]
    Pinsker,
    #[serde(rename = "reward_gap")]
    RewardGap,
    #[serde(rename = "obsdist_gap")]
    ObsdistGap,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Theorem::Tracking => "tracking",
            Theorem::Drifting => "drifting",
            Theorem::DriftL1 => "drift_L1",
            Theorem::DriftKl => "drift_KL",
            Theorem::Pinsker => "pinsker",
            Theorem::RewardGap => "reward_gap",
            Theorem::ObsdistGap => "obsdist_gap",
        };
        f.write_str(tag)
    }
}

/// Constants a bound was evaluated with.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundInputs<F> {
    pub eps_kl: F,
    pub eps_l1: F,
    pub eta: F,
    pub gamma: F,
    pub r_max: F,
    pub delta: F,
    pub episodes: usize,
    pub truncation: F,
}

/// One measured-vs-bound comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRow<F> {
    pub t: usize,
    /// Set for per-action rows (observation-distribution gaps).
    pub action: Option<usize>,
    pub measured: F,
    pub se: F,
    pub bound: F,
    /// Tolerance added to the bound: three standard errors plus any
    /// truncation terms.
    pub slack: F,
    pub pass: bool,
    /// The bound's hypothesis is unmet (eta = 0 or infinite epsilon); the
    /// row passes vacuously.
    pub vacuous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport<F> {
    pub theorem: Theorem,
    pub rows: Vec<BoundRow<F>>,
    pub inputs: BoundInputs<F>,
    pub pass: bool,
    pub vacuous: bool,
}

fn bound_row<F: Real>(
    t: usize,
    action: Option<usize>,
    measured: &MeanSe<F>,
    bound: F,
    extra_slack: F,
) -> BoundRow<F> {
    let vacuous = !bound.is_finite();
    let slack = F::from_f64_lossy(3.0) * measured.se + extra_slack;
    let pass = vacuous || (measured.mean.is_finite() && measured.mean <= bound + slack);
    BoundRow {
        t,
        action,
        measured: measured.mean,
        se: measured.se,
        bound,
        slack,
        pass,
        vacuous,
    }
}

fn report<F: Real>(theorem: Theorem, rows: Vec<BoundRow<F>>, inputs: &BoundInputs<F>) -> BoundReport<F> {
    let pass = rows.iter().all(|r| r.pass);
    let vacuous = rows.iter().any(|r| r.vacuous);
    BoundReport {
        theorem,
        rows,
        inputs: *inputs,
        pass,
        vacuous,
    }
}

fn clamped<F: Real>(eps: F) -> F {
    if eps > F::zero() {
        eps
    } else if eps.is_nan() {
        F::infinity()
    } else {
        F::zero()
    }
}

/// `sqrt(2 eps / eta)`, `+inf` when the mixing hypothesis is unmet.
fn kl_drift_term<F: Real>(eps_kl: F, eta: F) -> F {
    if !(eta > F::zero()) || !eps_kl.is_finite() {
        return F::infinity();
    }
    (F::from_f64_lossy(2.0) * clamped(eps_kl) / eta).sqrt()
}

/// Value, reward, and observation-distribution checks against the
/// mixing-based (KL) bounds.
pub fn tracking_reports<F: Real>(
    stats: &ValueGapStats<F>,
    inputs: &BoundInputs<F>,
) -> Vec<BoundReport<F>> {
    let term = kl_drift_term(inputs.eps_kl, inputs.eta);
    let one = F::one() - inputs.gamma;
    let three = F::from_f64_lossy(3.0);
    let two = F::from_f64_lossy(2.0);
    let value_bound = inputs.delta + three * inputs.r_max / (one * one) * term;
    let trunc = two * inputs.truncation;

    let value_rows = stats
        .rows
        .iter()
        .map(|row| bound_row(row.t, None, &row.opt_gap, value_bound, trunc))
        .collect();
    let reward_rows = stats
        .rows
        .iter()
        .map(|row| bound_row(row.t, None, &row.reward_gap, inputs.r_max * term, F::zero()))
        .collect();
    let obs_rows = stats
        .rows
        .iter()
        .flat_map(|row| {
            row.obs_gap
                .iter()
                .enumerate()
                .map(|(a, gap)| bound_row(row.t, Some(a), gap, term, F::zero()))
        })
        .collect();
    vec![
        report(Theorem::Tracking, value_rows, inputs),
        report(Theorem::RewardGap, reward_rows, inputs),
        report(Theorem::ObsdistGap, obs_rows, inputs),
    ]
}

/// Value and drift checks against the mixing-free (L1, linear-in-t) bounds.
pub fn drifting_reports<F: Real>(
    stats: &ValueGapStats<F>,
    inputs: &BoundInputs<F>,
) -> Vec<BoundReport<F>> {
    let eps = clamped(inputs.eps_l1);
    let one = F::one() - inputs.gamma;
    let twelve = F::from_f64_lossy(12.0);
    let four = F::from_f64_lossy(4.0);
    let two = F::from_f64_lossy(2.0);
    let trunc = two * inputs.truncation;
    let fixed = inputs.delta + twelve * eps * inputs.r_max / (one * one * one);
    let per_t = twelve * eps * inputs.r_max / (one * one);

    let value_rows = stats
        .rows
        .iter()
        .map(|row| {
            let bound = fixed + per_t * F::from_usize(row.t).expect("t fits");
            bound_row(row.t, None, &row.opt_gap, bound, trunc)
        })
        .collect();
    let linear = |t: usize| four * eps * F::from_usize(t + 1).expect("t fits");
    let drift_rows = stats
        .rows
        .iter()
        .map(|row| bound_row(row.t, None, &row.l1_drift, linear(row.t), F::zero()))
        .collect();
    let reward_rows = stats
        .rows
        .iter()
        .map(|row| bound_row(row.t, None, &row.reward_gap, linear(row.t) * inputs.r_max, F::zero()))
        .collect();
    let obs_rows = stats
        .rows
        .iter()
        .flat_map(|row| {
            row.obs_gap
                .iter()
                .enumerate()
                .map(|(a, gap)| bound_row(row.t, Some(a), gap, linear(row.t), F::zero()))
        })
        .collect();
    vec![
        report(Theorem::Drifting, value_rows, inputs),
        report(Theorem::DriftL1, drift_rows, inputs),
        report(Theorem::RewardGap, reward_rows, inputs),
        report(Theorem::ObsdistGap, obs_rows, inputs),
    ]
}

/// Belief-drift checks on a [`DriftTrace`]: the KL drift bound, its Pinsker
/// consequence, and the linear-in-t L1 drift bound.
pub fn drift_reports<F: Real>(trace: &DriftTrace<F>, inputs: &BoundInputs<F>) -> Vec<BoundReport<F>> {
    let ratio = if !(inputs.eta > F::zero()) || !inputs.eps_kl.is_finite() {
        F::infinity()
    } else {
        clamped(inputs.eps_kl) / inputs.eta
    };
    let term = kl_drift_term(inputs.eps_kl, inputs.eta);
    let eps = clamped(inputs.eps_l1);
    let four = F::from_f64_lossy(4.0);

    let kl_rows = trace
        .rows
        .iter()
        .map(|row| {
            let m = MeanSe {
                mean: row.mean_kl,
                se: row.se_kl,
            };
            bound_row(row.t, None, &m, ratio, F::zero())
        })
        .collect();
    let pinsker_rows = trace
        .rows
        .iter()
        .map(|row| {
            let m = MeanSe {
                mean: row.mean_l1,
                se: row.se_l1,
            };
            bound_row(row.t, None, &m, term, F::zero())
        })
        .collect();
    let l1_rows = trace
        .rows
        .iter()
        .map(|row| {
            let m = MeanSe {
                mean: row.mean_l1,
                se: row.se_l1,
            };
            let bound = four * eps * F::from_usize(row.t + 1).expect("t fits");
            bound_row(row.t, None, &m, bound, F::zero())
        })
        .collect();
    vec![
        report(Theorem::DriftKl, kl_rows, inputs),
        report(Theorem::Pinsker, pinsker_rows, inputs),
        report(Theorem::DriftL1, l1_rows, inputs),
    ]
}

/// Everything a full bound check produces.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome<F> {
    pub reports: Vec<BoundReport<F>>,
    pub stats: ValueGapStats<F>,
    pub eps_kl: EpsilonEstimate<F>,
    pub eps_l1: EpsilonEstimate<F>,
    pub eta: F,
    pub inputs: BoundInputs<F>,
}

impl<F: Real> CheckOutcome<F> {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

fn check_with<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    planner: &PlannerConfig<F>,
    cfg: &EvalConfig,
    tracking: bool,
    drifting: bool,
) -> Result<CheckOutcome<F>, PlanError> {
    planner.validate()?;
    cfg.validate()?;
    if planner.gamma != model.discount() {
        return Err(PlanError::Model(ModelError::Invalid {
            path: "planner.gamma".into(),
            message: "must equal the model discount for bound checks".into(),
        }));
    }
    let policy = SparseSamplingPolicy::new(planner.clone())?;
    let eps_kl = measure_kl_eps(model, partition, &policy, &cfg.measure)?;
    let eps_l1 = measure_l1_eps(model, partition, &cfg.measure)?;
    let eta = mixing_coefficient(model)?;
    let stats = measure_value_gaps(model, partition, &policy, cfg)?;
    let inputs = BoundInputs {
        eps_kl: eps_kl.value(),
        eps_l1: eps_l1.value(),
        eta,
        gamma: model.discount(),
        r_max: model.r_max(),
        delta: planner.delta,
        episodes: cfg.episodes,
        truncation: stats.truncation,
    };
    let mut reports = Vec::new();
    if tracking {
        reports.extend(tracking_reports(&stats, &inputs));
    }
    if drifting {
        reports.extend(drifting_reports(&stats, &inputs));
    }
    Ok(CheckOutcome {
        reports,
        stats,
        eps_kl,
        eps_l1,
        eta,
        inputs,
    })
}

/// Measure value gaps under the sparse-sampling policy and compare them
/// against the mixing-based (KL) bounds.
pub fn check_tracking_bound<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    planner: &PlannerConfig<F>,
    cfg: &EvalConfig,
) -> Result<CheckOutcome<F>, PlanError> {
    check_with(model, partition, planner, cfg, true, false)
}

/// Measure value gaps under the sparse-sampling policy and compare them
/// against the mixing-free (L1) bounds.
pub fn check_drifting_bound<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    planner: &PlannerConfig<F>,
    cfg: &EvalConfig,
) -> Result<CheckOutcome<F>, PlanError> {
    check_with(model, partition, planner, cfg, false, true)
}

/// Both families of checks over a single shared measurement.
pub fn check_bounds<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    planner: &PlannerConfig<F>,
    cfg: &EvalConfig,
) -> Result<CheckOutcome<F>, PlanError> {
    check_with(model, partition, planner, cfg, true, true)
}
