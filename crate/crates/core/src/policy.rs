//! Action-selection abstraction shared by the evaluator and the measurement
//! routines.
//!
//! A policy sees the model, the history so far, and the *simplified* belief —
//! never the exact one, which keeps planners honest about what they can
//! condition on. Stochastic policies draw from the per-decision stream key,
//! so a policy is a pure function of the decision context.

use rand::Rng;

use crate::model::{FactoredPomdp, History, ModelError};
use crate::num::Real;
use crate::rng::StreamKey;
use crate::simplify::SimplifiedBelief;

/// Everything a policy may condition on for one decision.
#[derive(Debug)]
pub struct Decision<'a, F: Real> {
    pub model: &'a FactoredPomdp<F>,
    pub history: &'a History,
    pub simplified: &'a SimplifiedBelief<F>,
    /// Decision epoch, starting at 0.
    pub t: usize,
    /// Stream key owned by this decision; stochastic policies draw from it.
    pub key: StreamKey,
}

/// An action-selection rule.
pub trait Policy<F: Real>: Sync {
    /// Stable identifier echoed into traces and reports.
    fn name(&self) -> String;

    /// Pick an action index for this decision.
    fn choose(&self, decision: &Decision<'_, F>) -> Result<usize, ModelError>;
}

/// Uniform random action choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl<F: Real> Policy<F> for RandomPolicy {
    fn name(&self) -> String {
        "random".into()
    }

    fn choose(&self, decision: &Decision<'_, F>) -> Result<usize, ModelError> {
        let mut rng = decision.key.rng();
        Ok(rng.random_range(0..decision.model.num_actions()))
    }
}

/// Always the same action.
#[derive(Debug, Clone, Copy)]
pub struct FixedPolicy(pub usize);

impl<F: Real> Policy<F> for FixedPolicy {
    fn name(&self) -> String {
        format!("fixed({})", self.0)
    }

    fn choose(&self, decision: &Decision<'_, F>) -> Result<usize, ModelError> {
        decision.model.check_action(self.0)?;
        Ok(self.0)
    }
}
