//! Depth-limited sparse-sampling search over simplified beliefs, plus an
//! exhaustive truncated lookahead used as a small-instance oracle.
//!
//! The sampled search estimates action values by the recursion
//!
//! ```text
//! Q(rho, a, 0) = R(rho)
//! Q(rho, a, d) = R(rho) + gamma * (1/C) * sum_{o in O(rho,a)} max_b Q(rho<a,o>, b, d-1)
//! ```
//!
//! where `O(rho,a)` is a multiset of `C` observations sampled i.i.d. from the
//! predictive distribution of the node's simplified belief, and each child
//! belief is the projected Bayes update `S(U(belief, <a,o>))`. The root action
//! is `argmax_b Q(root, b, H)` with ties broken toward the lowest index.
//!
//! With a target suboptimality `delta`, writing `lambda = r_max / delta`, the
//! search depth and per-node sample count default to
//!
//! ```text
//! H = max(1, ceil( ln(4*lambda / (1-gamma)^3) / (1-gamma) ))
//! C = max(1, ceil( (4*lambda^2/(1-gamma)^6)
//!         * (2*H*ln(4*|A|*H*lambda^2/(1-gamma)^4) + ln(4*lambda/(1-gamma))) ))
//! ```
//!
//! both with natural logarithms. These constants certify a worst-case
//! guarantee and are astronomically conservative at realistic parameters, so
//! both admit explicit overrides.
//!
//! Randomness is derived, never shared: each node owns a [`StreamKey`], every
//! (node, action) pair draws its observation multiset from its own substream,
//! and a child's key is derived from (parent key, action, observation). Q
//! values are therefore independent of traversal order, and parallel and
//! serial evaluation are bit-identical.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{BeliefState, FactoredPomdp, ModelError, MIN_OBS_PROB};
use crate::num::Real;
use crate::policy::{Decision, Policy};
use crate::rng::{sample_weighted, StreamKey};
use crate::simplify::{ClassPartition, SimplifiedBelief};

/// Default cap on the a-priori node estimate of [`exact_lookahead`].
pub const DEFAULT_NODE_BUDGET: f64 = 1e7;

/// Errors from the exhaustive lookahead.
#[derive(Debug, Error)]
pub enum PlanError {
    /// The a-priori node estimate for the requested depth exceeds the budget.
    #[error("exhaustive lookahead needs about {estimate:.3e} nodes, budget is {budget:.3e}")]
    Budget { estimate: f64, budget: f64 },
    /// A model-level operation failed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters of the sparse-sampling policy.
#[derive(Debug, Clone, Serialize)]
pub struct PlannerConfig<F> {
    /// Target suboptimality; must be positive.
    pub delta: F,
    /// Discount used by the search recursion and the parameter formulas.
    pub gamma: F,
    /// Reward magnitude bound used by the parameter formulas.
    pub r_max: F,
    /// Use this search depth instead of the formula value.
    pub horizon_override: Option<usize>,
    /// Use this per-node sample count instead of the formula value.
    pub samples_override: Option<usize>,
    /// Master seed for [`choose_action`].
    pub seed: u64,
    /// Projection applied to every child belief.
    pub partition: ClassPartition,
}

impl<F: Real> PlannerConfig<F> {
    /// Config with `gamma` and `r_max` taken from the model.
    pub fn for_model(
        model: &FactoredPomdp<F>,
        partition: ClassPartition,
        delta: F,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let config = PlannerConfig {
            delta,
            gamma: model.discount(),
            r_max: model.r_max(),
            horizon_override: None,
            samples_override: None,
            seed,
            partition,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.delta > F::zero()) {
            return Err(ModelError::Invalid {
                path: "delta".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.gamma >= F::zero() && self.gamma < F::one()) {
            return Err(ModelError::Invalid {
                path: "gamma".into(),
                message: "must satisfy 0 <= gamma < 1".into(),
            });
        }
        if !(self.r_max >= F::zero()) {
            return Err(ModelError::Invalid {
                path: "r_max".into(),
                message: "must be nonnegative".into(),
            });
        }
        if self.horizon_override == Some(0) {
            return Err(ModelError::Invalid {
                path: "horizon_override".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.samples_override == Some(0) {
            return Err(ModelError::Invalid {
                path: "samples_override".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// `lambda = r_max / delta`.
    pub fn lambda(&self) -> F {
        self.r_max / self.delta
    }
}

fn lambda_f64<F: Real>(config: &PlannerConfig<F>) -> f64 {
    let r_max = config.r_max.to_f64().expect("r_max fits f64");
    let delta = config.delta.to_f64().expect("delta fits f64");
    r_max / delta
}

/// Search depth `H`; honors `horizon_override`.
pub fn horizon_h<F: Real>(config: &PlannerConfig<F>) -> usize {
    if let Some(h) = config.horizon_override {
        return h;
    }
    let lambda = lambda_f64(config);
    if lambda <= 0.0 {
        return 1;
    }
    let gamma = config.gamma.to_f64().expect("gamma fits f64");
    let one = 1.0 - gamma;
    let arg = (4.0 * lambda / (one * one * one)).ln() / one;
    arg.ceil().max(1.0) as usize
}

/// Per-node sample count `C`; honors `samples_override`.
pub fn sample_count_c<F: Real>(config: &PlannerConfig<F>, num_actions: usize) -> usize {
    if let Some(c) = config.samples_override {
        return c;
    }
    let lambda = lambda_f64(config);
    if lambda <= 0.0 {
        return 1;
    }
    let gamma = config.gamma.to_f64().expect("gamma fits f64");
    let one = 1.0 - gamma;
    let one2 = one * one;
    let h = horizon_h(config) as f64;
    let lam2 = lambda * lambda;
    let arg = (4.0 * lam2 / (one2 * one2 * one2))
        * (2.0 * h * (4.0 * num_actions as f64 * h * lam2 / (one2 * one2)).ln()
            + (4.0 * lambda / one).ln());
    arg.ceil().max(1.0) as usize
}

/// One position of the sampled game tree.
#[derive(Debug, Clone)]
pub struct SearchNode<F> {
    /// Simplified belief at this position; a fixed point of the projection
    /// everywhere below the root.
    pub belief: SimplifiedBelief<F>,
    /// Remaining search depth.
    pub depth: usize,
    /// Stream key all randomness below this node derives from.
    pub key: StreamKey,
}

/// Outcome of one root search.
#[derive(Debug, Clone, Serialize)]
pub struct PlanStats<F> {
    /// Chosen root action (lowest index among maximizers).
    pub action: usize,
    /// Root Q value per action at depth `horizon`.
    pub root_q: Vec<F>,
    /// Nodes expanded, shared subtrees counted once.
    pub nodes: u64,
    /// Search depth used.
    pub horizon: usize,
    /// Observation samples per (node, action).
    pub samples: usize,
}

struct Search<'a, F> {
    model: &'a FactoredPomdp<F>,
    partition: &'a ClassPartition,
    gamma: F,
    samples: usize,
    nodes: AtomicU64,
}

impl<F: Real> Search<'_, F> {
    /// `max_b Q(node, b, depth)` for a node with the given expansion.
    fn best_value(
        &self,
        belief: &SimplifiedBelief<F>,
        depth: usize,
        key: StreamKey,
    ) -> Result<F, ModelError> {
        self.nodes.fetch_add(1, Ordering::Relaxed);
        let expanded = belief.expand();
        let reward = self.model.expected_reward(&expanded)?;
        if depth == 0 {
            return Ok(reward);
        }
        let mut best = F::neg_infinity();
        for action in 0..self.model.num_actions() {
            let q = reward + self.gamma * self.continuation(&expanded, depth, key, action)?;
            if q > best {
                best = q;
            }
        }
        Ok(best)
    }

    /// `(1/C) * sum_{o in O(node, action)} max_b Q(child(o), b, depth-1)`.
    ///
    /// The multiset is drawn from this (node, action) pair's own substream;
    /// duplicate observations share one child evaluation, weighted by their
    /// multiplicity.
    fn continuation(
        &self,
        expanded: &BeliefState<F>,
        depth: usize,
        key: StreamKey,
        action: usize,
    ) -> Result<F, ModelError> {
        let predicted = self.model.predict(expanded, action)?;
        let obs_dist = self.model.observation_distribution(&predicted);
        let base = key.index(action as u64);
        let mut rng = base.label("obs").rng();
        let mut counts = vec![0u64; obs_dist.len()];
        for _ in 0..self.samples {
            counts[sample_weighted(&mut rng, &obs_dist)] += 1;
        }
        let mut total = F::zero();
        for (o, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let posterior = self.model.posterior_from_predicted(&predicted, action, o)?;
            let child = self.partition.project(&posterior)?;
            let child_key = base.label("child").index(o as u64);
            let value = self.best_value(&child, depth - 1, child_key)?;
            total += F::from_u64(count).expect("count fits") * value;
        }
        Ok(total / F::from_usize(self.samples).expect("sample count fits"))
    }
}

/// `Q(node, action, node.depth)` per the sampled recursion.
pub fn q_value<F: Real>(
    model: &FactoredPomdp<F>,
    config: &PlannerConfig<F>,
    node: &SearchNode<F>,
    action: usize,
) -> Result<F, ModelError> {
    config.validate()?;
    model.check_action(action)?;
    let search = Search {
        model,
        partition: &config.partition,
        gamma: config.gamma,
        samples: sample_count_c(config, model.num_actions()),
        nodes: AtomicU64::new(0),
    };
    let expanded = node.belief.expand();
    let reward = model.expected_reward(&expanded)?;
    if node.depth == 0 {
        return Ok(reward);
    }
    Ok(reward + config.gamma * search.continuation(&expanded, node.depth, node.key, action)?)
}

/// Run the root search from `belief` with all randomness derived from `key`.
///
/// Root actions are searched in parallel; results are merged in action order,
/// so the outcome is identical across worker counts.
pub fn choose_action_keyed<F: Real>(
    model: &FactoredPomdp<F>,
    belief: &SimplifiedBelief<F>,
    config: &PlannerConfig<F>,
    key: StreamKey,
) -> Result<PlanStats<F>, ModelError> {
    config.validate()?;
    let horizon = horizon_h(config);
    let samples = sample_count_c(config, model.num_actions());
    let search = Search {
        model,
        partition: &config.partition,
        gamma: config.gamma,
        samples,
        nodes: AtomicU64::new(1),
    };
    let expanded = belief.expand();
    let reward = model.expected_reward(&expanded)?;
    let root_q = (0..model.num_actions())
        .into_par_iter()
        .map(|action| {
            search
                .continuation(&expanded, horizon, key, action)
                .map(|cont| reward + config.gamma * cont)
        })
        .collect::<Result<Vec<F>, ModelError>>()?;
    let mut action = 0;
    for (a, &q) in root_q.iter().enumerate() {
        if q > root_q[action] {
            action = a;
        }
    }
    Ok(PlanStats {
        action,
        root_q,
        nodes: search.nodes.load(Ordering::Relaxed),
        horizon,
        samples,
    })
}

/// Root search seeded from `config.seed`.
pub fn choose_action<F: Real>(
    model: &FactoredPomdp<F>,
    belief: &SimplifiedBelief<F>,
    config: &PlannerConfig<F>,
) -> Result<PlanStats<F>, ModelError> {
    choose_action_keyed(model, belief, config, StreamKey::root(config.seed).label("plan"))
}

/// The sparse-sampling search as a [`Policy`]: each decision reruns the root
/// search from the decision's own stream key.
#[derive(Debug, Clone)]
pub struct SparseSamplingPolicy<F> {
    config: PlannerConfig<F>,
}

impl<F: Real> SparseSamplingPolicy<F> {
    pub fn new(config: PlannerConfig<F>) -> Result<Self, ModelError> {
        config.validate()?;
        Ok(SparseSamplingPolicy { config })
    }

    pub fn config(&self) -> &PlannerConfig<F> {
        &self.config
    }
}

impl<F: Real> Policy<F> for SparseSamplingPolicy<F> {
    fn name(&self) -> String {
        format!("sparse-sampling(delta={})", self.config.delta)
    }

    fn choose(&self, decision: &Decision<'_, F>) -> Result<usize, ModelError> {
        choose_action_keyed(decision.model, decision.simplified, &self.config, decision.key)
            .map(|stats| stats.action)
    }
}

/// Which belief recursion the exhaustive lookahead expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookaheadMode {
    /// Exact Bayes updates throughout.
    TrueBeliefs,
    /// Children are re-projected after every update; predictive observation
    /// probabilities come from the node's simplified belief.
    Simplified,
}

/// Result of [`exact_lookahead`].
#[derive(Debug, Clone, Serialize)]
pub struct Lookahead<F> {
    /// Depth-`d` optimal value of the requested recursion.
    pub value: F,
    /// Maximizing root action, lowest index on ties.
    pub action: usize,
    /// Nodes actually expanded (zero-probability children are pruned).
    pub nodes: u64,
}

/// A-priori upper bound on the lookahead's node count:
/// `sum_{i=0}^{depth} (|A|*|O|)^i`.
pub fn lookahead_estimate(num_actions: usize, num_observations: usize, depth: usize) -> f64 {
    let branching = (num_actions * num_observations) as f64;
    let mut total = 1.0;
    let mut level = 1.0;
    for _ in 0..depth {
        level *= branching;
        total += level;
    }
    total
}

/// Exhaustive depth-`d` expectimax
///
/// ```text
/// V_0(phi) = R(phi)
/// V_d(phi) = R(phi) + gamma * max_a sum_o P(o | a, phi) * V_{d-1}(child(phi, a, o))
/// ```
///
/// over *all* observations, weighted by their exact probabilities under the
/// node's belief. `TrueBeliefs` takes `child = U(phi, <a,o>)`; `Simplified`
/// takes `child = S(U(phi, <a,o>))`. The root belief is used as given in both
/// modes. Children with vanishing probability are pruned, not expanded.
pub fn exact_lookahead<F: Real>(
    model: &FactoredPomdp<F>,
    belief: &BeliefState<F>,
    depth: usize,
    mode: LookaheadMode,
    partition: &ClassPartition,
    budget: f64,
) -> Result<Lookahead<F>, PlanError> {
    model.check_belief(belief)?;
    let estimate = lookahead_estimate(model.num_actions(), model.num_observations(), depth);
    if !(estimate <= budget) {
        return Err(PlanError::Budget { estimate, budget });
    }
    let mut nodes = 0u64;
    let (value, action) = lookahead_rec(model, partition, mode, belief, depth, &mut nodes)?;
    Ok(Lookahead {
        value,
        action,
        nodes,
    })
}

fn lookahead_rec<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    mode: LookaheadMode,
    belief: &BeliefState<F>,
    depth: usize,
    nodes: &mut u64,
) -> Result<(F, usize), ModelError> {
    *nodes += 1;
    let reward = model.expected_reward(belief)?;
    if depth == 0 {
        return Ok((reward, 0));
    }
    let min_mass = F::from_f64_lossy(MIN_OBS_PROB);
    let gamma = model.discount();
    let mut best = F::neg_infinity();
    let mut best_action = 0;
    for action in 0..model.num_actions() {
        let predicted = model.predict(belief, action)?;
        let obs_dist = model.observation_distribution(&predicted);
        let mut continuation = F::zero();
        for (o, &mass) in obs_dist.iter().enumerate() {
            if mass <= min_mass {
                continue;
            }
            let posterior = model.posterior_from_predicted(&predicted, action, o)?;
            let child = match mode {
                LookaheadMode::TrueBeliefs => posterior,
                LookaheadMode::Simplified => partition.simplify(&posterior)?,
            };
            let (value, _) = lookahead_rec(model, partition, mode, &child, depth - 1, nodes)?;
            continuation += mass * value;
        }
        let q = reward + gamma * continuation;
        if q > best {
            best = q;
            best_action = action;
        }
    }
    Ok((best, best_action))
}
