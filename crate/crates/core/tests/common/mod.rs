#![allow(dead_code)]
//! Shared helpers for the integration suites: seeded random model
//! construction, and a deliberately naive reference implementation of the
//! belief recursion that serves as the comparison oracle. The oracle walks
//! every (state, next-state) pair and re-derives each CPT row index from
//! scratch, sharing no code with the library's update path.

use beliefplan_core::model::{BeliefState, FactoredPomdp, VarCpt};
use rand::Rng;

pub fn random_distribution(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    // Exponential spacing drawn uniformly from the simplex interior.
    let mut v: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    v
}

pub fn random_belief(rng: &mut impl Rng, k: usize) -> BeliefState<f64> {
    BeliefState::new(random_distribution(rng, k)).unwrap()
}

/// Random model with per-variable parent sets of {self} plus at most one
/// other variable, interior CPT and observation probabilities, and rewards
/// in [-1, 1].
pub fn random_model(
    rng: &mut impl Rng,
    num_vars: usize,
    num_actions: usize,
    num_observations: usize,
) -> FactoredPomdp<f64> {
    let num_states = 1usize << num_vars;
    let transition = (0..num_actions)
        .map(|_| {
            (0..num_vars)
                .map(|v| {
                    let mut parents = vec![v];
                    if num_vars > 1 && rng.random::<f64>() < 0.6 {
                        let other = (v + rng.random_range(1..num_vars)) % num_vars;
                        parents.push(other);
                    }
                    let table = (0..1usize << parents.len())
                        .map(|_| rng.random::<f64>())
                        .collect();
                    VarCpt { parents, table }
                })
                .collect()
        })
        .collect();
    let observation_model = (0..num_states)
        .map(|_| random_distribution(rng, num_observations))
        .collect();
    let rewards = (0..num_states)
        .map(|_| rng.random::<f64>() * 2.0 - 1.0)
        .collect();
    FactoredPomdp::new(
        num_vars,
        (0..num_actions).map(|a| format!("a{a}")).collect(),
        (0..num_observations).map(|o| format!("o{o}")).collect(),
        transition,
        observation_model,
        rewards,
        1.0,
        0.5,
        rng.random_range(0..num_states),
        None,
    )
    .unwrap()
}

/// `P(s2 | a, s)` recomputed the slow way.
pub fn oracle_transition_prob(model: &FactoredPomdp<f64>, a: usize, s: usize, s2: usize) -> f64 {
    let mut p = 1.0;
    for v in 0..model.num_vars() {
        let cpt = model.cpt(a, v);
        let mut row = 0usize;
        for (j, &parent) in cpt.parents.iter().enumerate() {
            if (s >> parent) & 1 == 1 {
                row |= 1 << j;
            }
        }
        let p1 = cpt.table[row];
        p *= if (s2 >> v) & 1 == 1 { p1 } else { 1.0 - p1 };
    }
    p
}

/// Unnormalized Bayes numerator and its normalizer, by direct double loop.
pub fn oracle_posterior(
    model: &FactoredPomdp<f64>,
    prior: &[f64],
    a: usize,
    o: usize,
) -> (f64, Vec<f64>) {
    let num_states = model.num_states();
    let mut unnorm = vec![0.0; num_states];
    for s2 in 0..num_states {
        let mut mass = 0.0;
        for (s, &w) in prior.iter().enumerate() {
            mass += w * oracle_transition_prob(model, a, s, s2);
        }
        unnorm[s2] = mass * model.observation_row(s2)[o];
    }
    let norm: f64 = unnorm.iter().sum();
    let posterior = unnorm.iter().map(|&u| u / norm).collect();
    (norm, posterior)
}
