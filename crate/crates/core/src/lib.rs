//! Planning in factored POMDPs with simplified belief states.
//!
//! A factored POMDP over `n` binary state variables has a joint state space
//! of size `2^n`; exact belief tracking stores one probability per joint
//! state and updates it by Bayes' rule:
//!
//! ```text
//! U(phi, <a,o>)(s') = P(o|s') * sum_s phi(s) P(s'|a,s) / P(o|a,phi)
//! ```
//!
//! This crate implements exact tracking plus a *simplifier* that projects a
//! belief onto a product of marginals over a partition of the variables into
//! classes, a sparse-sampling lookahead planner that runs on the simplified
//! beliefs, and an evaluation harness that measures how far simplified
//! tracking drifts from the truth and checks the measured drift and value
//! loss against their analytic bounds.
//!
//! All numeric code is generic over the scalar type via [`Real`]; the crate
//! root exports `f64` aliases, which is what the CLI tooling and the file
//! formats use.

pub mod evaluate;
pub mod model;
pub mod num;
pub mod planner;
pub mod policy;
pub mod rng;
pub mod simplify;

pub use num::Real;
pub use rng::StreamKey;

/// Factored POMDP over `f64` probabilities.
pub type Pomdp = model::FactoredPomdp<f64>;
/// Factored POMDP over `f32` probabilities.
pub type Pomdp32 = model::FactoredPomdp<f32>;
/// Dense joint-state belief over `f64`.
pub type Belief = model::BeliefState<f64>;
/// Dense joint-state belief over `f32`.
pub type Belief32 = model::BeliefState<f32>;
/// Class-marginal product belief over `f64`.
pub type Simplified = simplify::SimplifiedBelief<f64>;
