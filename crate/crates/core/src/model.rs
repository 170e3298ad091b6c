//! Factored POMDP model, exact belief tracking, and simulation.
//!
//! A model has `n <= 20` binary state variables. A joint state is the
//! little-endian packing of the variable values: variable `v` contributes bit
//! `v`, so `encode_state(&[true, true, false, true]) == 11`. Transitions are
//! factored per action and variable: each variable carries a CPT giving
//! `P(v' = 1 | a, parents(s))` where the parent set reads the *previous*
//! joint state, and next-state variables are conditionally independent given
//! the full previous state. Observations and rewards are dense over joint
//! states.
//!
//! Belief tracking is Bayes' rule over the joint space:
//!
//! ```text
//! U(phi, <a,o>)(s') = P(o|s') * sum_s phi(s) P(s'|a,s) / P(o|a,phi)
//! P(o|a,phi)        = sum_{s'} P(o|s') * sum_s phi(s) P(s'|a,s)
//! ```
//!
//! Conditioning on an observation whose probability is at most
//! [`MIN_OBS_PROB`] is an error, not a NaN factory.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;
use crate::rng::{sample_weighted, StreamKey};

/// Hard cap on the number of state variables; `2^n` tables are materialized.
pub const MAX_VARS: usize = 20;
/// Observation probabilities at or below this cannot be conditioned on.
pub const MIN_OBS_PROB: f64 = 1e-300;
/// Belief mass drift beyond this is silently renormalized.
pub const RENORM_TOL: f64 = 1e-12;
/// Belief mass drift beyond this is an error: it signals a logic bug.
pub const BELIEF_SUM_TOL: f64 = 1e-6;
/// Each observation row must sum to 1 within this tolerance.
pub const OBS_ROW_TOL: f64 = 1e-9;

/// Errors from model validation, belief arithmetic, and simulation.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A model document violates an invariant; `path` points at the field.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    /// A probability vector is not a distribution.
    #[error("not a probability distribution: {0}")]
    BadDistribution(String),
    /// Two vectors that must share a support have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// Conditioning was requested on an (action, observation) pair whose
    /// predicted probability is numerically zero.
    #[error(
        "observation {observation} under action {action} has probability \
         {mass:e} <= 1e-300; cannot condition on it"
    )]
    ZeroObservationProbability {
        action: usize,
        observation: usize,
        mass: f64,
    },
    #[error("state {state} out of range: model has {num_states} joint states")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("action {action} out of range: model has {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error(
        "observation {observation} out of range: model has {num_observations} observations"
    )]
    ObservationOutOfRange {
        observation: usize,
        num_observations: usize,
    },
    #[error("model i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("model parse failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Value of variable `v` inside packed joint state `s`.
#[inline]
pub fn state_bit(s: usize, v: usize) -> bool {
    (s >> v) & 1 == 1
}

/// Pack variable values into a joint state, little-endian: `vars[v]` is bit `v`.
pub fn encode_state(vars: &[bool]) -> usize {
    vars.iter()
        .enumerate()
        .fold(0, |s, (v, &b)| if b { s | (1 << v) } else { s })
}

/// Unpack a joint state into `num_vars` variable values.
pub fn decode_state(s: usize, num_vars: usize) -> Vec<bool> {
    (0..num_vars).map(|v| state_bit(s, v)).collect()
}

/// Conditional probability table for one (action, variable) pair.
///
/// `table[i] = P(v' = 1 | parent assignment i)` where `i` packs the parent
/// values little-endian in the order the parents are listed: `parents[j]`
/// contributes bit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarCpt<F> {
    pub parents: Vec<usize>,
    pub table: Vec<F>,
}

impl<F: Real> VarCpt<F> {
    /// Row index for the parent assignment found in joint state `s`.
    #[inline]
    pub fn row_index(&self, s: usize) -> usize {
        self.parents
            .iter()
            .enumerate()
            .fold(0, |i, (j, &p)| if state_bit(s, p) { i | (1 << j) } else { i })
    }

    /// `P(v' = 1 | a, s)` for the previous joint state `s`.
    #[inline]
    pub fn prob_one(&self, s: usize) -> F {
        self.table[self.row_index(s)]
    }
}

/// Dense belief over the joint state space.
///
/// Entries are nonnegative and sum to 1: construction renormalizes drift
/// beyond [`RENORM_TOL`] and rejects anything off by more than
/// [`BELIEF_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefState<F> {
    probs: Vec<F>,
}

impl<F: Real> BeliefState<F> {
    /// Validating constructor; see the type docs for the tolerance policy.
    pub fn new(probs: Vec<F>) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::BadDistribution("empty support".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= F::zero()) || !p.is_finite() {
                return Err(ModelError::BadDistribution(format!(
                    "entry {i} is {p}, expected a finite nonnegative value"
                )));
            }
        }
        let sum: F = probs.iter().copied().sum();
        let drift = (sum - F::one()).abs();
        if drift > F::from_f64_lossy(BELIEF_SUM_TOL) {
            return Err(ModelError::BadDistribution(format!(
                "mass sums to {sum}, off by more than {BELIEF_SUM_TOL:e}"
            )));
        }
        let mut probs = probs;
        if drift > F::from_f64_lossy(RENORM_TOL) {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(BeliefState { probs })
    }

    /// Uniform belief over `num_states` joint states.
    pub fn uniform(num_states: usize) -> Self {
        let w = F::one() / F::from_usize(num_states).expect("state count fits");
        BeliefState {
            probs: vec![w; num_states],
        }
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<F> {
        self.probs
    }

    #[inline]
    pub fn get(&self, s: usize) -> F {
        self.probs[s]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Alternating action/observation record; the planner and evaluator key
/// caches on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct History {
    steps: Vec<(usize, usize)>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn push(&mut self, action: usize, observation: usize) {
        self.steps.push((action, observation));
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Factored POMDP. Construct via [`FactoredPomdp::new`] or the JSON loaders;
/// both validate every invariant and report the first violation with a path
/// into the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredPomdp<F> {
    num_vars: usize,
    actions: Vec<String>,
    observations: Vec<String>,
    transition: Vec<Vec<VarCpt<F>>>,
    observation_model: Vec<Vec<F>>,
    rewards: Vec<F>,
    r_max: F,
    discount: F,
    initial_state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<Vec<usize>>>,
}

impl<F: Real> FactoredPomdp<F> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_vars: usize,
        actions: Vec<String>,
        observations: Vec<String>,
        transition: Vec<Vec<VarCpt<F>>>,
        observation_model: Vec<Vec<F>>,
        rewards: Vec<F>,
        r_max: F,
        discount: F,
        initial_state: usize,
        classes: Option<Vec<Vec<usize>>>,
    ) -> Result<Self, ModelError> {
        let model = FactoredPomdp {
            num_vars,
            actions,
            observations,
            transition,
            observation_model,
            rewards,
            r_max,
            discount,
            initial_state,
            classes,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_states(&self) -> usize {
        1 << self.num_vars
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn cpt(&self, action: usize, var: usize) -> &VarCpt<F> {
        &self.transition[action][var]
    }

    pub fn observation_row(&self, s: usize) -> &[F] {
        &self.observation_model[s]
    }

    pub fn rewards(&self) -> &[F] {
        &self.rewards
    }

    pub fn reward(&self, s: usize) -> F {
        self.rewards[s]
    }

    pub fn r_max(&self) -> F {
        self.r_max
    }

    pub fn discount(&self) -> F {
        self.discount
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn classes(&self) -> Option<&[Vec<usize>]> {
        self.classes.as_deref()
    }

    /// Check every structural invariant; returns the first violation with a
    /// path into the document.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars;
        if n == 0 || n > MAX_VARS {
            return Err(invalid(
                "num_vars",
                format!("must be in 1..={MAX_VARS}, got {n}"),
            ));
        }
        let num_states = 1usize << n;
        if self.actions.is_empty() {
            return Err(invalid("actions", "at least one action is required"));
        }
        if self.observations.is_empty() {
            return Err(invalid(
                "observations",
                "at least one observation is required",
            ));
        }
        if self.transition.len() != self.actions.len() {
            return Err(invalid(
                "transition",
                format!(
                    "expected {} per-action entries, got {}",
                    self.actions.len(),
                    self.transition.len()
                ),
            ));
        }
        for (a, per_var) in self.transition.iter().enumerate() {
            if per_var.len() != n {
                return Err(invalid(
                    format!("transition[{a}]"),
                    format!("expected {n} per-variable CPTs, got {}", per_var.len()),
                ));
            }
            for (v, cpt) in per_var.iter().enumerate() {
                let mut seen = vec![false; n];
                for (k, &p) in cpt.parents.iter().enumerate() {
                    if p >= n {
                        return Err(invalid(
                            format!("transition[{a}][{v}].parents[{k}]"),
                            format!("parent index {p} out of range for {n} variables"),
                        ));
                    }
                    if seen[p] {
                        return Err(invalid(
                            format!("transition[{a}][{v}].parents[{k}]"),
                            format!("duplicate parent index {p}"),
                        ));
                    }
                    seen[p] = true;
                }
                let rows = 1usize << cpt.parents.len();
                if cpt.table.len() != rows {
                    return Err(invalid(
                        format!("transition[{a}][{v}].table"),
                        format!(
                            "expected {rows} rows for {} parents, got {}",
                            cpt.parents.len(),
                            cpt.table.len()
                        ),
                    ));
                }
                for (i, &p) in cpt.table.iter().enumerate() {
                    if !(p >= F::zero() && p <= F::one()) {
                        return Err(invalid(
                            format!("transition[{a}][{v}].table[{i}]"),
                            format!("probability {p} outside [0, 1]"),
                        ));
                    }
                }
            }
        }
        if self.observation_model.len() != num_states {
            return Err(invalid(
                "observation_model",
                format!(
                    "expected {num_states} rows, got {}",
                    self.observation_model.len()
                ),
            ));
        }
        let row_tol = F::from_f64_lossy(OBS_ROW_TOL);
        for (s, row) in self.observation_model.iter().enumerate() {
            if row.len() != self.observations.len() {
                return Err(invalid(
                    format!("observation_model[{s}]"),
                    format!(
                        "expected {} entries, got {}",
                        self.observations.len(),
                        row.len()
                    ),
                ));
            }
            for (o, &p) in row.iter().enumerate() {
                if !(p >= F::zero() && p <= F::one()) {
                    return Err(invalid(
                        format!("observation_model[{s}][{o}]"),
                        format!("probability {p} outside [0, 1]"),
                    ));
                }
            }
            let sum: F = row.iter().copied().sum();
            if (sum - F::one()).abs() > row_tol {
                return Err(invalid(
                    format!("observation_model[{s}]"),
                    format!("row sums to {sum}, expected 1 within {OBS_ROW_TOL:e}"),
                ));
            }
        }
        if self.rewards.len() != num_states {
            return Err(invalid(
                "rewards",
                format!("expected {num_states} entries, got {}", self.rewards.len()),
            ));
        }
        if !(self.r_max >= F::zero()) || !self.r_max.is_finite() {
            return Err(invalid(
                "r_max",
                format!("must be finite and nonnegative, got {}", self.r_max),
            ));
        }
        for (s, &r) in self.rewards.iter().enumerate() {
            if !r.is_finite() || r.abs() > self.r_max {
                return Err(invalid(
                    format!("rewards[{s}]"),
                    format!("reward {r} exceeds r_max {}", self.r_max),
                ));
            }
        }
        if !(self.discount >= F::zero() && self.discount < F::one()) {
            return Err(invalid(
                "discount",
                format!("must satisfy 0 <= discount < 1, got {}", self.discount),
            ));
        }
        if self.initial_state >= num_states {
            return Err(invalid(
                "initial_state",
                format!(
                    "state {} out of range for {num_states} joint states",
                    self.initial_state
                ),
            ));
        }
        if let Some(classes) = &self.classes {
            let mut covered = vec![false; n];
            for (c, class) in classes.iter().enumerate() {
                if class.is_empty() {
                    return Err(invalid(format!("classes[{c}]"), "class is empty"));
                }
                for (k, &v) in class.iter().enumerate() {
                    if v >= n {
                        return Err(invalid(
                            format!("classes[{c}][{k}]"),
                            format!("variable index {v} out of range for {n} variables"),
                        ));
                    }
                    if covered[v] {
                        return Err(invalid(
                            format!("classes[{c}][{k}]"),
                            format!("variable {v} appears in more than one class"),
                        ));
                    }
                    covered[v] = true;
                }
            }
            if let Some(v) = covered.iter().position(|&c| !c) {
                return Err(invalid(
                    "classes",
                    format!("variable {v} is not covered by any class"),
                ));
            }
        }
        Ok(())
    }

    /// Validate an action index against the model.
    pub fn check_action(&self, action: usize) -> Result<(), ModelError> {
        if action >= self.num_actions() {
            return Err(ModelError::ActionOutOfRange {
                action,
                num_actions: self.num_actions(),
            });
        }
        Ok(())
    }

    /// Validate an observation index against the model.
    pub fn check_observation(&self, observation: usize) -> Result<(), ModelError> {
        if observation >= self.num_observations() {
            return Err(ModelError::ObservationOutOfRange {
                observation,
                num_observations: self.num_observations(),
            });
        }
        Ok(())
    }

    /// Validate that a belief matches the model's joint state count.
    pub fn check_belief(&self, belief: &BeliefState<F>) -> Result<(), ModelError> {
        if belief.len() != self.num_states() {
            return Err(ModelError::LengthMismatch {
                left: belief.len(),
                right: self.num_states(),
            });
        }
        Ok(())
    }

    /// `P(v' = 1 | a, s)`.
    #[inline]
    pub fn var_prob(&self, action: usize, var: usize, s: usize) -> F {
        self.transition[action][var].prob_one(s)
    }

    /// Joint transition probability `P(s' | a, s)`: product over variables.
    pub fn transition_prob(&self, action: usize, s: usize, s_next: usize) -> F {
        (0..self.num_vars).fold(F::one(), |acc, v| {
            let p1 = self.var_prob(action, v, s);
            acc * if state_bit(s_next, v) { p1 } else { F::one() - p1 }
        })
    }

    /// Scatter `mass` at previous state `s` across all successor states,
    /// accumulating into `out`. Runs in `O(2^n)` by expanding the product of
    /// per-variable Bernoullis one variable at a time.
    fn scatter_row(&self, action: usize, s: usize, mass: F, out: &mut [F]) {
        let mut buf = vec![F::zero(); self.num_states()];
        buf[0] = mass;
        let mut len = 1;
        for v in 0..self.num_vars {
            let p1 = self.var_prob(action, v, s);
            let p0 = F::one() - p1;
            for j in 0..len {
                let m = buf[j];
                buf[j] = m * p0;
                buf[j + len] = m * p1;
            }
            len <<= 1;
        }
        for (acc, b) in out.iter_mut().zip(&buf) {
            *acc += *b;
        }
    }

    /// One row of the joint transition matrix: `P(. | a, s)`.
    pub fn transition_row(&self, action: usize, s: usize) -> Vec<F> {
        let mut row = vec![F::zero(); self.num_states()];
        self.scatter_row(action, s, F::one(), &mut row);
        row
    }

    /// Materialize the full `2^n x 2^n` joint transition matrix for one
    /// action. Row `s` is the distribution of the next state given `s`.
    pub fn transition_matrix(&self, action: usize) -> Result<Vec<Vec<F>>, ModelError> {
        self.check_action(action)?;
        Ok((0..self.num_states())
            .map(|s| self.transition_row(action, s))
            .collect())
    }

    /// Push a belief through one action: the predicted distribution of the
    /// next state before any observation, `sum_s phi(s) P(. | a, s)`.
    pub fn predict(&self, belief: &BeliefState<F>, action: usize) -> Result<Vec<F>, ModelError> {
        self.check_action(action)?;
        self.check_belief(belief)?;
        let mut out = vec![F::zero(); self.num_states()];
        for (s, &mass) in belief.probs().iter().enumerate() {
            if mass > F::zero() {
                self.scatter_row(action, s, mass, &mut out);
            }
        }
        Ok(out)
    }

    /// `P(o | s')` column applied to a predicted next-state distribution,
    /// for every observation at once.
    pub fn observation_distribution(&self, predicted: &[F]) -> Vec<F> {
        let mut dist = vec![F::zero(); self.num_observations()];
        for (s, &mass) in predicted.iter().enumerate() {
            if mass > F::zero() {
                for (d, &p) in dist.iter_mut().zip(self.observation_row(s)) {
                    *d += p * mass;
                }
            }
        }
        dist
    }

    /// Probability of seeing `observation` after taking `action` in `belief`.
    pub fn obs_probability(
        &self,
        belief: &BeliefState<F>,
        action: usize,
        observation: usize,
    ) -> Result<F, ModelError> {
        self.check_observation(observation)?;
        let predicted = self.predict(belief, action)?;
        Ok(predicted
            .iter()
            .enumerate()
            .map(|(s, &m)| m * self.observation_model[s][observation])
            .sum())
    }

    /// Condition a predicted next-state distribution on an observation.
    pub fn posterior_from_predicted(
        &self,
        predicted: &[F],
        action: usize,
        observation: usize,
    ) -> Result<BeliefState<F>, ModelError> {
        self.check_observation(observation)?;
        let mut unnorm: Vec<F> = predicted
            .iter()
            .enumerate()
            .map(|(s, &m)| m * self.observation_model[s][observation])
            .collect();
        let norm: F = unnorm.iter().copied().sum();
        if norm <= F::from_f64_lossy(MIN_OBS_PROB) {
            return Err(ModelError::ZeroObservationProbability {
                action,
                observation,
                mass: norm.to_f64().unwrap_or(0.0),
            });
        }
        for p in &mut unnorm {
            *p /= norm;
        }
        BeliefState::new(unnorm)
    }

    /// Full Bayes update `U(phi, <a,o>)`.
    pub fn belief_update(
        &self,
        belief: &BeliefState<F>,
        action: usize,
        observation: usize,
    ) -> Result<BeliefState<F>, ModelError> {
        let predicted = self.predict(belief, action)?;
        self.posterior_from_predicted(&predicted, action, observation)
    }

    /// Expected immediate reward under a belief.
    pub fn expected_reward(&self, belief: &BeliefState<F>) -> Result<F, ModelError> {
        self.check_belief(belief)?;
        Ok(belief
            .probs()
            .iter()
            .zip(&self.rewards)
            .map(|(&m, &r)| m * r)
            .sum())
    }

    /// Point-mass belief on joint state `s`.
    pub fn dirac_belief(&self, s: usize) -> Result<BeliefState<F>, ModelError> {
        if s >= self.num_states() {
            return Err(ModelError::StateOutOfRange {
                state: s,
                num_states: self.num_states(),
            });
        }
        let mut probs = vec![F::zero(); self.num_states()];
        probs[s] = F::one();
        BeliefState::new(probs)
    }

    /// Point-mass belief on the model's known initial state.
    pub fn initial_belief(&self) -> BeliefState<F> {
        self.dirac_belief(self.initial_state)
            .expect("validated initial state")
    }

    /// Parse and validate a model from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Load and validate a model from a JSON file.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Serialize to JSON; `pretty` adds stable two-space indentation.
    pub fn to_json_string(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(self).expect("model serializes")
        } else {
            serde_json::to_string(self).expect("model serializes")
        }
    }

    /// Write the model to a file as pretty JSON with a trailing newline.
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), ModelError> {
        let mut text = self.to_json_string(true);
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Outcome of one simulated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<F> {
    /// Observation emitted by the state the simulator moved into.
    pub observation: usize,
    /// Reward of the state the simulator left.
    pub reward: F,
}

/// Hidden-state simulator with its own derived random stream.
#[derive(Debug, Clone)]
pub struct SimState {
    state: usize,
    t: usize,
    rng: rand_chacha::ChaCha8Rng,
}

impl SimState {
    /// Start at the model's initial state.
    pub fn new<F: Real>(model: &FactoredPomdp<F>, key: StreamKey) -> Self {
        SimState {
            state: model.initial_state(),
            t: 0,
            rng: key.rng(),
        }
    }

    /// Start at an arbitrary hidden state.
    pub fn at_state(state: usize, key: StreamKey) -> Self {
        SimState {
            state,
            t: 0,
            rng: key.rng(),
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Advance one step: collect the current state's reward, sample each
    /// next-state variable from its CPT, then sample an observation from the
    /// state moved into.
    pub fn sim_step<F: Real>(
        &mut self,
        model: &FactoredPomdp<F>,
        action: usize,
    ) -> Result<StepOutcome<F>, ModelError> {
        model.check_action(action)?;
        let reward = model.reward(self.state);
        let mut next = 0usize;
        for v in 0..model.num_vars() {
            let p1 = model.var_prob(action, v, self.state);
            let u = F::from_f64_lossy(rand::Rng::random::<f64>(&mut self.rng));
            if u < p1 {
                next |= 1 << v;
            }
        }
        let observation = sample_weighted(&mut self.rng, model.observation_row(next));
        self.state = next;
        self.t += 1;
        Ok(StepOutcome {
            observation,
            reward,
        })
    }
}
