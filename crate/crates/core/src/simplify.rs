//! Belief simplification: projection onto class-marginal products, the
//! divergences that grade it, and the routines that measure how much error
//! one projection step introduces.
//!
//! A [`ClassPartition`] splits the state variables into disjoint classes. The
//! simplification operator `S` projects a joint belief to its exact marginal
//! on each class and re-forms the product:
//!
//! ```text
//! S(phi)(s) = prod_c  phi_marginal_c(assignment of class c in s)
//! ```
//!
//! `S` is idempotent, preserves every class marginal, and is the identity
//! whenever the partition has a single class. Simplified tracking replaces
//! the Bayes posterior with `S(U(phi, <a,o>))` after every step; the
//! per-step damage is measured either in L1 or as the KL gap
//! `D(psi || S(phi)) - D(psi || phi)` against the true posterior `psi`, and
//! the measured epsilon feeds the drift and value-loss bounds in
//! [`crate::evaluate`].

use serde::{Deserialize, Serialize};

use crate::model::{
    BeliefState, FactoredPomdp, History, ModelError, MIN_OBS_PROB,
};
use crate::num::Real;
use crate::policy::{Decision, Policy};
use crate::rng::{sample_weighted, StreamKey};
use crate::model::state_bit;

/// `mixing_coefficient` scans all state pairs; joint spaces beyond this are
/// refused rather than silently taking hours.
pub const MIXING_MAX_VARS: usize = 12;

/// Logarithm base for KL divergences. Internal measurements use nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Nats,
    Bits,
}

/// Which divergence an epsilon estimate was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonKind {
    L1,
    Kl,
}

impl std::fmt::Display for EpsilonKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpsilonKind::L1 => write!(f, "l1"),
            EpsilonKind::Kl => write!(f, "kl"),
        }
    }
}

/// Disjoint, exhaustive grouping of the state variables.
///
/// Variables inside each class are kept sorted ascending; a class assignment
/// is packed little-endian in that order, so class `[1, 3]` maps variable 1
/// to bit 0 and variable 3 to bit 1 of the marginal index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassPartition {
    num_vars: usize,
    classes: Vec<Vec<usize>>,
}

impl ClassPartition {
    /// Validate and canonicalize a partition of `num_vars` variables.
    pub fn new(num_vars: usize, classes: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let mut covered = vec![false; num_vars];
        for (c, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(ModelError::Invalid {
                    path: format!("classes[{c}]"),
                    message: "class is empty".into(),
                });
            }
            for (k, &v) in class.iter().enumerate() {
                if v >= num_vars {
                    return Err(ModelError::Invalid {
                        path: format!("classes[{c}][{k}]"),
                        message: format!(
                            "variable index {v} out of range for {num_vars} variables"
                        ),
                    });
                }
                if covered[v] {
                    return Err(ModelError::Invalid {
                        path: format!("classes[{c}][{k}]"),
                        message: format!("variable {v} appears in more than one class"),
                    });
                }
                covered[v] = true;
            }
        }
        if let Some(v) = covered.iter().position(|&c| !c) {
            return Err(ModelError::Invalid {
                path: "classes".into(),
                message: format!("variable {v} is not covered by any class"),
            });
        }
        let mut classes = classes;
        for class in &mut classes {
            class.sort_unstable();
        }
        Ok(ClassPartition { num_vars, classes })
    }

    /// The trivial partition: one class holding every variable. Projection
    /// through it is the identity.
    pub fn single_class(num_vars: usize) -> Self {
        ClassPartition {
            num_vars,
            classes: vec![(0..num_vars).collect()],
        }
    }

    /// The fully factored partition: one singleton class per variable.
    pub fn singletons(num_vars: usize) -> Self {
        ClassPartition {
            num_vars,
            classes: (0..num_vars).map(|v| vec![v]).collect(),
        }
    }

    /// The model's declared partition, or the single-class identity when the
    /// model declares none.
    pub fn of_model<F: Real>(model: &FactoredPomdp<F>) -> Result<Self, ModelError> {
        match model.classes() {
            Some(classes) => ClassPartition::new(model.num_vars(), classes.to_vec()),
            None => Ok(ClassPartition::single_class(model.num_vars())),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, c: usize) -> &[usize] {
        &self.classes[c]
    }

    /// Marginal index of class `c`'s assignment inside joint state `s`.
    #[inline]
    pub fn assignment_index(&self, c: usize, s: usize) -> usize {
        self.classes[c]
            .iter()
            .enumerate()
            .fold(0, |i, (j, &v)| if state_bit(s, v) { i | (1 << j) } else { i })
    }

    fn check_belief<F: Real>(&self, belief: &BeliefState<F>) -> Result<(), ModelError> {
        if belief.len() != 1 << self.num_vars {
            return Err(ModelError::LengthMismatch {
                left: belief.len(),
                right: 1 << self.num_vars,
            });
        }
        Ok(())
    }

    /// Exact marginal of the belief on every class.
    pub fn project<F: Real>(
        &self,
        belief: &BeliefState<F>,
    ) -> Result<SimplifiedBelief<F>, ModelError> {
        self.check_belief(belief)?;
        let mut marginals: Vec<Vec<F>> = self
            .classes
            .iter()
            .map(|class| vec![F::zero(); 1 << class.len()])
            .collect();
        for (s, &mass) in belief.probs().iter().enumerate() {
            if mass > F::zero() {
                for (c, marginal) in marginals.iter_mut().enumerate() {
                    marginal[self.assignment_index(c, s)] += mass;
                }
            }
        }
        Ok(SimplifiedBelief {
            partition: self.clone(),
            marginals,
        })
    }

    /// The simplification operator `S`: project, then re-form the product.
    pub fn simplify<F: Real>(
        &self,
        belief: &BeliefState<F>,
    ) -> Result<BeliefState<F>, ModelError> {
        Ok(self.project(belief)?.expand())
    }
}

/// A belief stored as one exact marginal per class; the joint it stands for
/// is the product across classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplifiedBelief<F> {
    partition: ClassPartition,
    marginals: Vec<Vec<F>>,
}

impl<F: Real> SimplifiedBelief<F> {
    /// Build from explicit per-class marginals, each a distribution over the
    /// class's assignments.
    pub fn new(partition: ClassPartition, marginals: Vec<Vec<F>>) -> Result<Self, ModelError> {
        if marginals.len() != partition.num_classes() {
            return Err(ModelError::LengthMismatch {
                left: marginals.len(),
                right: partition.num_classes(),
            });
        }
        let mut checked = Vec::with_capacity(marginals.len());
        for (c, marginal) in marginals.into_iter().enumerate() {
            if marginal.len() != 1 << partition.class(c).len() {
                return Err(ModelError::LengthMismatch {
                    left: marginal.len(),
                    right: 1 << partition.class(c).len(),
                });
            }
            checked.push(BeliefState::new(marginal)?.into_probs());
        }
        Ok(SimplifiedBelief {
            partition,
            marginals: checked,
        })
    }

    pub fn partition(&self) -> &ClassPartition {
        &self.partition
    }

    pub fn marginals(&self) -> &[Vec<F>] {
        &self.marginals
    }

    pub fn marginal(&self, c: usize) -> &[F] {
        &self.marginals[c]
    }

    /// Re-form the dense joint belief as the product across classes.
    pub fn expand(&self) -> BeliefState<F> {
        let num_states = 1usize << self.partition.num_vars();
        let probs: Vec<F> = (0..num_states)
            .map(|s| {
                self.marginals
                    .iter()
                    .enumerate()
                    .fold(F::one(), |acc, (c, marginal)| {
                        acc * marginal[self.partition.assignment_index(c, s)]
                    })
            })
            .collect();
        BeliefState::new(probs).expect("product of marginals is a distribution")
    }
}

/// KL divergence `D(p || q)` between two probability vectors.
///
/// Terms with `p[i] = 0` contribute zero; any `p[i] > 0` with `q[i] = 0`
/// makes the divergence infinite.
pub fn kl_divergence<F: Real>(p: &[F], q: &[F], base: LogBase) -> Result<F, ModelError> {
    if p.len() != q.len() {
        return Err(ModelError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut nats = F::zero();
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < F::zero() || qi < F::zero() {
            return Err(ModelError::BadDistribution(format!(
                "entry {i} is negative"
            )));
        }
        if pi > F::zero() {
            if qi <= F::zero() {
                return Ok(F::infinity());
            }
            nats += pi * (pi / qi).ln();
        }
    }
    Ok(match base {
        LogBase::Nats => nats,
        LogBase::Bits => nats / F::from_f64_lossy(std::f64::consts::LN_2),
    })
}

/// L1 distance `sum_i |p[i] - q[i]|`; at most 2 for two distributions.
pub fn l1_distance<F: Real>(p: &[F], q: &[F]) -> Result<F, ModelError> {
    if p.len() != q.len() {
        return Err(ModelError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum())
}

/// Exact mixing coefficient of the model's transition kernels:
///
/// ```text
/// eta = min over actions a and state pairs (s1, s2) of
///       sum_{s3} min(P(s3|a,s1), P(s3|a,s2))
/// ```
///
/// Equivalently `1 - L1_max/2` where `L1_max` is the largest row-to-row L1
/// distance. The scan is `O(|A| * 4^n * 2^n)`, so models beyond
/// [`MIXING_MAX_VARS`] variables are refused.
pub fn mixing_coefficient<F: Real>(model: &FactoredPomdp<F>) -> Result<F, ModelError> {
    if model.num_vars() > MIXING_MAX_VARS {
        return Err(ModelError::Invalid {
            path: "num_vars".into(),
            message: format!(
                "mixing_coefficient scans all state pairs and is capped at \
                 {MIXING_MAX_VARS} variables, got {}",
                model.num_vars()
            ),
        });
    }
    let mut eta = F::one();
    for a in 0..model.num_actions() {
        let matrix = model.transition_matrix(a)?;
        for s1 in 0..matrix.len() {
            for s2 in (s1 + 1)..matrix.len() {
                let overlap: F = matrix[s1]
                    .iter()
                    .zip(&matrix[s2])
                    .map(|(&x, &y)| x.min(y))
                    .sum();
                if overlap < eta {
                    eta = overlap;
                }
            }
        }
    }
    Ok(eta)
}

/// Settings for the epsilon-measurement walks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureConfig {
    /// Cover histories up to this many (action, observation) steps.
    pub depth: usize,
    /// Enumerate exhaustively when the full history tree has at most this
    /// many nodes; otherwise fall back to sampled trajectories.
    pub node_cap: u64,
    /// Trajectories to sample in the fallback mode.
    pub episodes: usize,
    /// Master seed for the sampled mode.
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            depth: 6,
            node_cap: 100_000,
            episodes: 1_000,
            seed: 0,
        }
    }
}

/// Result of an epsilon measurement.
///
/// `max` is what the bound machinery consumes; `mean` and `samples` are
/// reported alongside so the spread is visible. `exhaustive` records whether
/// every history up to `depth` was enumerated or only sampled.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonEstimate<F> {
    pub kind: EpsilonKind,
    pub max: F,
    pub mean: F,
    pub samples: usize,
    pub exhaustive: bool,
    pub depth: usize,
    pub seed: u64,
}

impl<F: Real> EpsilonEstimate<F> {
    /// The epsilon value bounds are computed from: the measured maximum.
    pub fn value(&self) -> F {
        self.max
    }
}

struct GapAccumulator<F> {
    max: F,
    sum: F,
    count: usize,
}

impl<F: Real> GapAccumulator<F> {
    fn new() -> Self {
        GapAccumulator {
            max: F::neg_infinity(),
            sum: F::zero(),
            count: 0,
        }
    }

    fn record(&mut self, gap: F) {
        if gap > self.max {
            self.max = gap;
        }
        self.sum += gap;
        self.count += 1;
    }

    fn finish(self, kind: EpsilonKind, exhaustive: bool, cfg: &MeasureConfig) -> EpsilonEstimate<F> {
        let mean = if self.count == 0 {
            F::zero()
        } else {
            self.sum / F::from_usize(self.count).expect("sample count fits")
        };
        EpsilonEstimate {
            kind,
            max: if self.count == 0 { F::zero() } else { self.max },
            mean,
            samples: self.count,
            exhaustive,
            depth: cfg.depth,
            seed: cfg.seed,
        }
    }
}

/// Number of nodes in the full depth-`d` history tree, saturating.
fn history_tree_size(branching: usize, depth: usize) -> u64 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..depth {
        level = level.saturating_mul(branching as u128);
        total = total.saturating_add(level);
    }
    u64::try_from(total).unwrap_or(u64::MAX)
}

fn check_partition_model<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
) -> Result<(), ModelError> {
    if partition.num_vars() != model.num_vars() {
        return Err(ModelError::LengthMismatch {
            left: partition.num_vars(),
            right: model.num_vars(),
        });
    }
    Ok(())
}

/// Measure the per-step L1 simplification error
///
/// ```text
/// eps_L1 = max || U(phi, <a,o>) - S(U(phi, <a,o>)) ||_1
/// ```
///
/// over simplified beliefs `phi` reachable from `S(dirac(s0))` within
/// `cfg.depth` steps under the simplified dynamics, plus the initial term
/// `||dirac(s0) - S(dirac(s0))||_1` (always zero: a point mass is its own
/// product). Exhaustive when the history tree fits `cfg.node_cap`, otherwise
/// sampled over `cfg.episodes` uniform-action trajectories.
pub fn measure_l1_eps<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    cfg: &MeasureConfig,
) -> Result<EpsilonEstimate<F>, ModelError> {
    check_partition_model(model, partition)?;
    let mut acc = GapAccumulator::new();
    let start = model.initial_belief();
    let simplified_start = partition.simplify(&start)?;
    acc.record(l1_distance(start.probs(), simplified_start.probs())?);

    let branching = model.num_actions() * model.num_observations();
    let exhaustive = history_tree_size(branching, cfg.depth) <= cfg.node_cap;
    let min_mass = F::from_f64_lossy(MIN_OBS_PROB);
    if exhaustive {
        // Depth-first over every positive-probability history of the
        // simplified process.
        let mut stack = vec![(simplified_start, cfg.depth)];
        while let Some((belief, left)) = stack.pop() {
            if left == 0 {
                continue;
            }
            for a in 0..model.num_actions() {
                let predicted = model.predict(&belief, a)?;
                let obs_dist = model.observation_distribution(&predicted);
                for (o, &mass) in obs_dist.iter().enumerate() {
                    if mass <= min_mass {
                        continue;
                    }
                    let psi = model.posterior_from_predicted(&predicted, a, o)?;
                    let simplified = partition.simplify(&psi)?;
                    acc.record(l1_distance(psi.probs(), simplified.probs())?);
                    stack.push((simplified, left - 1));
                }
            }
        }
    } else {
        let root = StreamKey::root(cfg.seed).label("l1-eps");
        for e in 0..cfg.episodes {
            let mut rng = root.index(e as u64).rng();
            let mut belief = simplified_start.clone();
            for _ in 0..cfg.depth {
                let a = rand::Rng::random_range(&mut rng, 0..model.num_actions());
                let predicted = model.predict(&belief, a)?;
                let obs_dist = model.observation_distribution(&predicted);
                let o = sample_weighted(&mut rng, &obs_dist);
                let psi = model.posterior_from_predicted(&predicted, a, o)?;
                let simplified = partition.simplify(&psi)?;
                acc.record(l1_distance(psi.probs(), simplified.probs())?);
                belief = simplified;
            }
        }
    }
    Ok(acc.finish(EpsilonKind::L1, exhaustive, cfg))
}

/// KL gap of one simplification step at a given true posterior `psi` and
/// pre-simplified belief `phi`: `D(psi || S(phi)) - D(psi || phi)`.
///
/// When conditioning has driven both divergences infinite the gap is
/// reported as `+inf` rather than `inf - inf = NaN`.
fn kl_gap<F: Real>(
    psi: &BeliefState<F>,
    phi: &BeliefState<F>,
    simplified_phi: &BeliefState<F>,
) -> Result<F, ModelError> {
    let against_simplified = kl_divergence(psi.probs(), simplified_phi.probs(), LogBase::Nats)?;
    if against_simplified == F::infinity() {
        return Ok(F::infinity());
    }
    let against_phi = kl_divergence(psi.probs(), phi.probs(), LogBase::Nats)?;
    Ok(against_simplified - against_phi)
}

/// Measure the per-step KL simplification error
///
/// ```text
/// eps_KL = max  D(psi || S(phi)) - D(psi || phi)
///   psi = true posterior after the history step
///   phi = Bayes update of the simplified belief before projection
/// ```
///
/// over histories of the *true* process up to `cfg.depth` steps. Exhaustive
/// enumeration covers every action branch when the tree fits `cfg.node_cap`;
/// otherwise `cfg.episodes` trajectories are sampled with actions drawn from
/// `policy`. Gaps are recorded signed; the mean is the signed mean.
pub fn measure_kl_eps<F: Real>(
    model: &FactoredPomdp<F>,
    partition: &ClassPartition,
    policy: &dyn Policy<F>,
    cfg: &MeasureConfig,
) -> Result<EpsilonEstimate<F>, ModelError> {
    check_partition_model(model, partition)?;
    let mut acc = GapAccumulator::new();
    let start = model.initial_belief();
    let hat_start = partition.simplify(&start)?;
    acc.record(kl_gap(&start, &start, &hat_start)?);

    let branching = model.num_actions() * model.num_observations();
    let exhaustive = history_tree_size(branching, cfg.depth) <= cfg.node_cap;
    let min_mass = F::from_f64_lossy(MIN_OBS_PROB);
    if exhaustive {
        let mut stack = vec![(start, hat_start, cfg.depth)];
        while let Some((true_belief, hat_belief, left)) = stack.pop() {
            if left == 0 {
                continue;
            }
            for a in 0..model.num_actions() {
                let predicted_true = model.predict(&true_belief, a)?;
                let obs_dist = model.observation_distribution(&predicted_true);
                let predicted_hat = model.predict(&hat_belief, a)?;
                for (o, &mass) in obs_dist.iter().enumerate() {
                    if mass <= min_mass {
                        continue;
                    }
                    let psi = model.posterior_from_predicted(&predicted_true, a, o)?;
                    let phi = model.posterior_from_predicted(&predicted_hat, a, o)?;
                    let simplified_phi = partition.simplify(&phi)?;
                    acc.record(kl_gap(&psi, &phi, &simplified_phi)?);
                    stack.push((psi, simplified_phi, left - 1));
                }
            }
        }
    } else {
        let root = StreamKey::root(cfg.seed).label("kl-eps");
        for e in 0..cfg.episodes {
            let episode = root.index(e as u64);
            let mut history = History::new();
            let mut true_belief = start.clone();
            let mut hat_belief = hat_start.clone();
            for t in 0..cfg.depth {
                let simplified = partition.project(&hat_belief)?;
                let a = policy.choose(&Decision {
                    model,
                    history: &history,
                    simplified: &simplified,
                    t,
                    key: episode.label("policy").index(t as u64),
                })?;
                let predicted_true = model.predict(&true_belief, a)?;
                let obs_dist = model.observation_distribution(&predicted_true);
                let mut rng = episode.label("env").index(t as u64).rng();
                let o = sample_weighted(&mut rng, &obs_dist);
                let psi = model.posterior_from_predicted(&predicted_true, a, o)?;
                let predicted_hat = model.predict(&hat_belief, a)?;
                let phi = model.posterior_from_predicted(&predicted_hat, a, o)?;
                let simplified_phi = partition.simplify(&phi)?;
                acc.record(kl_gap(&psi, &phi, &simplified_phi)?);
                history.push(a, o);
                true_belief = psi;
                hat_belief = simplified_phi;
            }
        }
    }
    Ok(acc.finish(EpsilonKind::Kl, exhaustive, cfg))
}
