//! Acceptance suite. Each test covers one release criterion end to end and
//! prints a `criterion N (...): PASS` line when it holds; run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::{Path, PathBuf};
use std::process::Command;

use beliefplan_cli::generate::GeneratorSpec;
use beliefplan_core::evaluate::{drift_reports, check_bounds, BoundInputs, EvalConfig};
use beliefplan_core::model::{BeliefState, FactoredPomdp, VarCpt};
use beliefplan_core::planner::{
    choose_action_keyed, exact_lookahead, horizon_h, q_value, sample_count_c, LookaheadMode,
    PlannerConfig, SearchNode, DEFAULT_NODE_BUDGET,
};
use beliefplan_core::policy::FixedPolicy;
use beliefplan_core::rng::StreamKey;
use beliefplan_core::simplify::{
    kl_divergence, l1_distance, measure_kl_eps, measure_l1_eps, mixing_coefficient,
    ClassPartition, LogBase, MeasureConfig, SimplifiedBelief,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_distribution(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    v
}

/// Random model with arbitrary action/observation counts; CPT parents are
/// the variable itself plus at most one other.
fn random_model(
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
                    let parents = if num_vars > 1 && rng.random::<f64>() < 0.5 {
                        let mut other = rng.random_range(0..num_vars - 1);
                        if other >= v {
                            other += 1;
                        }
                        vec![v, other]
                    } else {
                        vec![v]
                    };
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
    let rewards: Vec<f64> = (0..num_states)
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
        0,
        None,
    )
    .unwrap()
}

/// Brute-force joint transition probability, re-deriving every CPT row
/// index from scratch; shares no code with the library's update path.
fn brute_transition_prob(model: &FactoredPomdp<f64>, a: usize, s: usize, s2: usize) -> f64 {
    (0..model.num_vars())
        .map(|v| {
            let cpt = model.cpt(a, v);
            let mut row = 0usize;
            for (j, &p) in cpt.parents.iter().enumerate() {
                if (s >> p) & 1 == 1 {
                    row |= 1 << j;
                }
            }
            let p_one = cpt.table[row];
            if (s2 >> v) & 1 == 1 {
                p_one
            } else {
                1.0 - p_one
            }
        })
        .product()
}

/// Brute-force one-step Bayes filter: returns the observation distribution
/// and, per observation, the normalized posterior (None when the
/// observation has zero mass).
fn brute_bayes(
    model: &FactoredPomdp<f64>,
    prior: &[f64],
    a: usize,
) -> (Vec<f64>, Vec<Option<Vec<f64>>>) {
    let num_states = model.num_states();
    let mut predicted = vec![0.0; num_states];
    for s in 0..num_states {
        for (s2, slot) in predicted.iter_mut().enumerate() {
            *slot += prior[s] * brute_transition_prob(model, a, s, s2);
        }
    }
    let mut obs_dist = vec![0.0; model.num_observations()];
    let mut posteriors = Vec::with_capacity(model.num_observations());
    for o in 0..model.num_observations() {
        let mut joint: Vec<f64> = (0..num_states)
            .map(|s2| predicted[s2] * model.observation_row(s2)[o])
            .collect();
        let mass: f64 = joint.iter().sum();
        obs_dist[o] = mass;
        if mass > 1e-280 {
            for x in &mut joint {
                *x /= mass;
            }
            posteriors.push(Some(joint));
        } else {
            posteriors.push(None);
        }
    }
    (obs_dist, posteriors)
}

#[test]
fn criterion_1_belief_update_matches_brute_force_bayes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..200 {
        let n = rng.random_range(1..=3usize);
        let a_count = rng.random_range(1..=3usize);
        let o_count = rng.random_range(1..=3usize);
        let model = random_model(&mut rng, n, a_count, o_count);
        for _ in 0..200 {
            let prior = random_distribution(&mut rng, model.num_states());
            let belief = BeliefState::new(prior.clone()).unwrap();
            let a = rng.random_range(0..a_count);
            let (obs_dist, posteriors) = brute_bayes(&model, &prior, a);
            for o in 0..o_count {
                let got = model.obs_probability(&belief, a, o).unwrap();
                assert!(
                    (got - obs_dist[o]).abs() < 1e-10,
                    "obs prob: {got} vs {}",
                    obs_dist[o]
                );
                if let Some(expected) = &posteriors[o] {
                    let posterior = model.belief_update(&belief, a, o).unwrap();
                    for (g, w) in posterior.probs().iter().zip(expected) {
                        assert!((g - w).abs() < 1e-10, "posterior entry: {g} vs {w}");
                    }
                }
            }
        }
    }
    println!("criterion 1 (belief-update oracle equivalence): PASS");
}

#[test]
fn criterion_2_distribution_inequality_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let instances = 10_000;

    let mut pinsker_violations = 0usize;
    for _ in 0..instances {
        let k = rng.random_range(2..=8usize);
        let p = random_distribution(&mut rng, k);
        let q = random_distribution(&mut rng, k);
        let kl = kl_divergence::<f64>(&p, &q, LogBase::Nats).unwrap();
        let l1 = l1_distance::<f64>(&p, &q).unwrap();
        if kl + 1e-12 < 0.5 * l1 * l1 {
            pinsker_violations += 1;
        }
    }
    assert_eq!(pinsker_violations, 0, "Pinsker violated");

    let mut kernel_errors = 0usize;
    for _ in 0..instances {
        let s = rng.random_range(2..=5usize);
        let x = rng.random_range(2..=5usize);
        let beta = random_distribution(&mut rng, s);
        let beta_hat = random_distribution(&mut rng, s);
        let kernel: Vec<Vec<f64>> = (0..s).map(|_| random_distribution(&mut rng, x)).collect();
        let joint = |b: &[f64]| -> Vec<f64> {
            (0..s)
                .flat_map(|i| kernel[i].iter().map(move |&k| (i, k)))
                .map(|(i, k)| b[i] * k)
                .collect()
        };
        let l1_joint = l1_distance::<f64>(&joint(&beta), &joint(&beta_hat)).unwrap();
        let l1_base = l1_distance::<f64>(&beta, &beta_hat).unwrap();
        if (l1_joint - l1_base).abs() > 1e-12 {
            kernel_errors += 1;
        }
    }
    assert_eq!(kernel_errors, 0, "shared-kernel L1 equality violated");

    let mut contraction_violations = 0usize;
    let mut conditional_violations = 0usize;
    for _ in 0..instances {
        let x = rng.random_range(2..=5usize);
        let o = rng.random_range(2..=5usize);
        let p = random_distribution(&mut rng, x * o);
        let q = random_distribution(&mut rng, x * o);
        let joint = l1_distance::<f64>(&p, &q).unwrap();
        let marg = |j: &[f64]| -> Vec<f64> {
            (0..o).map(|oo| (0..x).map(|xx| j[xx * o + oo]).sum()).collect()
        };
        let p_o = marg(&p);
        let q_o = marg(&q);
        let marginal = l1_distance::<f64>(&p_o, &q_o).unwrap();
        if marginal > joint + 1e-12 {
            contraction_violations += 1;
        }
        let mut expected = 0.0;
        for oo in 0..o {
            let p_cond: Vec<f64> = (0..x).map(|xx| p[xx * o + oo] / p_o[oo]).collect();
            let q_cond: Vec<f64> = (0..x).map(|xx| q[xx * o + oo] / q_o[oo]).collect();
            expected += p_o[oo] * l1_distance::<f64>(&p_cond, &q_cond).unwrap();
        }
        if expected > joint + marginal + 1e-12 {
            conditional_violations += 1;
        }
    }
    assert_eq!(contraction_violations, 0, "marginal contraction violated");
    assert_eq!(conditional_violations, 0, "conditional L1 bound violated");

    println!("criterion 2 (distribution inequality suite): PASS");
}

#[test]
fn criterion_3_projection_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    for _ in 0..10_000 {
        let n = rng.random_range(2..=4usize);
        let num_classes = rng.random_range(1..=n);
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
        for v in 0..n {
            let c = if v < num_classes {
                v
            } else {
                rng.random_range(0..num_classes)
            };
            classes[c].push(v);
        }
        let partition = ClassPartition::new(n, classes).unwrap();
        let phi = BeliefState::new(random_distribution(&mut rng, 1 << n)).unwrap();
        let once = partition.project(&phi).unwrap();
        let twice = partition.project(&once.expand()).unwrap();
        for (a, b) in once.marginals().iter().zip(twice.marginals()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12, "projection not idempotent");
            }
        }
        for (c, class) in partition.classes().iter().enumerate() {
            let mut direct = vec![0.0; 1 << class.len()];
            for (s, &mass) in phi.probs().iter().enumerate() {
                direct[partition.assignment_index(c, s)] += mass;
            }
            for (x, y) in once.marginal(c).iter().zip(&direct) {
                assert!((x - y).abs() < 1e-12, "class marginal not preserved");
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3103);
    let cfg = MeasureConfig {
        depth: 4,
        node_cap: 100_000,
        episodes: 200,
        seed: 0,
    };
    for _ in 0..50 {
        let n = rng.random_range(1..=3usize);
        let model = random_model(&mut rng, n, 2, 2);
        let single = ClassPartition::new(n, vec![(0..n).collect()]).unwrap();
        let l1 = measure_l1_eps(&model, &single, &cfg).unwrap();
        let kl = measure_kl_eps(&model, &single, &FixedPolicy(0), &cfg).unwrap();
        assert!(l1.exhaustive && kl.exhaustive);
        assert_eq!(l1.max, 0.0, "single-class L1 eps must vanish");
        assert_eq!(l1.mean, 0.0);
        assert_eq!(kl.max, 0.0, "single-class KL eps must vanish");
        assert_eq!(kl.mean, 0.0);
    }
    println!("criterion 3 (projection exactness): PASS");
}

/// `(gamma, lambda, |A|)` against independently computed `(H, C)`, frozen
/// from a 60-digit arbitrary-precision evaluation of the closed forms.
const PARAM_GRID: &[(f64, f64, usize, usize, usize)] = &[
    (0.1, 0.5, 2, 2, 16),
    (0.1, 0.5, 4, 2, 21),
    (0.1, 1.0, 2, 2, 108),
    (0.1, 1.0, 4, 2, 129),
    (0.1, 2.0, 2, 3, 967),
    (0.1, 2.0, 4, 3, 1092),
    (0.1, 5.0, 2, 4, 11281),
    (0.1, 5.0, 4, 4, 12324),
    (0.1, 10.0, 2, 5, 68455),
    (0.1, 10.0, 4, 5, 73672),
    (0.3, 0.5, 2, 3, 174),
    (0.3, 0.5, 4, 3, 209),
    (0.3, 1.0, 2, 4, 1390),
    (0.3, 1.0, 4, 4, 1579),
    (0.3, 2.0, 2, 5, 9174),
    (0.3, 2.0, 4, 5, 10117),
    (0.3, 5.0, 2, 6, 89720),
    (0.3, 5.0, 4, 6, 96790),
    (0.3, 10.0, 2, 7, 492471),
    (0.3, 10.0, 4, 7, 525464),
    (0.5, 0.5, 2, 6, 4127),
    (0.5, 0.5, 4, 6, 4659),
    (0.5, 1.0, 2, 7, 24897),
    (0.5, 1.0, 4, 7, 27381),
    (0.5, 2.0, 2, 9, 158324),
    (0.5, 2.0, 4, 9, 171100),
    (0.5, 5.0, 2, 11, 1497617),
    (0.5, 5.0, 4, 11, 1595212),
    (0.5, 10.0, 2, 12, 7449411),
    (0.5, 10.0, 4, 12, 7875281),
    (0.7, 0.5, 2, 15, 340755),
    (0.7, 0.5, 4, 15, 369279),
    (0.7, 1.0, 2, 17, 1829141),
    (0.7, 1.0, 4, 17, 1958452),
    (0.7, 2.0, 2, 19, 9434819),
    (0.7, 2.0, 4, 19, 10012917),
    (0.7, 5.0, 2, 23, 84181898),
    (0.7, 5.0, 4, 23, 88555666),
    (0.7, 10.0, 2, 25, 406508528),
    (0.7, 10.0, 4, 25, 425524911),
    (0.9, 0.5, 2, 77, 2197078851),
    (0.9, 0.5, 4, 77, 2303823517),
    (0.9, 1.0, 2, 83, 10445280873),
    (0.9, 1.0, 4, 83, 10905530600),
    (0.9, 2.0, 2, 90, 49536663949),
    (0.9, 2.0, 4, 90, 51532927829),
    (0.9, 5.0, 2, 100, 382806390227),
    (0.9, 5.0, 4, 100, 396669333839),
    (0.9, 10.0, 2, 106, 1745748159050),
    (0.9, 10.0, 4, 106, 1804527039961),
];

#[test]
fn criterion_4_planner_parameter_grid() {
    let partition = ClassPartition::new(1, vec![vec![0]]).unwrap();
    for &(gamma, lambda, num_actions, want_h, want_c) in PARAM_GRID {
        let config = PlannerConfig {
            delta: 1.0,
            gamma,
            r_max: lambda,
            horizon_override: None,
            samples_override: None,
            seed: 0,
            partition: partition.clone(),
        };
        assert_eq!(
            horizon_h(&config),
            want_h,
            "H at gamma={gamma} lambda={lambda}"
        );
        assert_eq!(
            sample_count_c(&config, num_actions),
            want_c,
            "C at gamma={gamma} lambda={lambda} actions={num_actions}"
        );
    }
    println!("criterion 4 (planner parameter grid, 50 points): PASS");
}

fn exhaustive_q(
    model: &FactoredPomdp<f64>,
    partition: &ClassPartition,
    root: &SimplifiedBelief<f64>,
    action: usize,
    depth: usize,
) -> f64 {
    let expanded = root.expand();
    let reward = model.expected_reward(&expanded).unwrap();
    let predicted = model.predict(&expanded, action).unwrap();
    let obs = model.observation_distribution(&predicted);
    let mut continuation = 0.0;
    for (o, &mass) in obs.iter().enumerate() {
        if mass <= 1e-300 {
            continue;
        }
        let posterior = model.posterior_from_predicted(&predicted, action, o).unwrap();
        let child = partition.project(&posterior).unwrap();
        let value = exact_lookahead(
            model,
            &child.expand(),
            depth - 1,
            LookaheadMode::Simplified,
            partition,
            DEFAULT_NODE_BUDGET,
        )
        .unwrap()
        .value;
        continuation += mass * value;
    }
    reward + model.discount() * continuation
}

#[test]
fn criterion_5_sparse_sampling_convergence() {
    const MODEL_SEEDS: [u64; 5] = [2, 3, 6, 36, 48];
    const HORIZON: usize = 4;
    let partition = ClassPartition::new(2, vec![vec![0], vec![1]]).unwrap();
    let trials = 50u64;

    let mut agree = 0usize;
    let mut total = 0usize;
    let mut mean_errors = [0.0f64; 3];
    for &model_seed in &MODEL_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(model_seed);
        let model = random_model(&mut rng, 2, 2, 2);
        let root = partition.project(&BeliefState::uniform(4)).unwrap();
        let exact: Vec<f64> = (0..2)
            .map(|a| exhaustive_q(&model, &partition, &root, a, HORIZON))
            .collect();
        let best = if exact[0] > exact[1] { 0 } else { 1 };

        for (slot, &samples) in [64usize, 256, 1024].iter().enumerate() {
            let mut config = PlannerConfig::for_model(&model, partition.clone(), 1.0, 0).unwrap();
            config.horizon_override = Some(HORIZON);
            config.samples_override = Some(samples);
            for trial in 0..trials {
                let key = StreamKey::root(trial).label("conv");
                for (a, &q_true) in exact.iter().enumerate() {
                    let node = SearchNode {
                        belief: root.clone(),
                        depth: HORIZON,
                        key,
                    };
                    let q_hat = q_value(&model, &config, &node, a).unwrap();
                    mean_errors[slot] += (q_hat - q_true).abs();
                }
                if samples == 1024 {
                    let stats = choose_action_keyed(
                        &model,
                        &root,
                        &config,
                        StreamKey::root(trial).label("scan"),
                    )
                    .unwrap();
                    total += 1;
                    if stats.action == best {
                        agree += 1;
                    }
                }
            }
        }
    }
    let denom = (MODEL_SEEDS.len() as f64) * (trials as f64) * 2.0;
    for err in &mut mean_errors {
        *err /= denom;
    }
    assert!(
        mean_errors[1] <= mean_errors[0] && mean_errors[2] <= mean_errors[1],
        "root-Q error not nonincreasing across C: {mean_errors:?}"
    );
    assert_eq!(total, 250);
    assert!(
        agree as f64 >= 0.99 * total as f64,
        "argmax agreement {agree}/{total} below 99%"
    );
    println!(
        "criterion 5 (sparse-sampling convergence, errors {:.4}/{:.4}/{:.4}, argmax {agree}/{total}): PASS",
        mean_errors[0], mean_errors[1], mean_errors[2]
    );
}

fn generated_model(seed: u64, num_vars: usize, eta_min: f64) -> FactoredPomdp<f64> {
    GeneratorSpec {
        num_vars,
        num_actions: 2,
        num_observations: 2,
        eta_min,
        obs_determinism: 0.6,
        reward_min: -1.0,
        reward_max: 1.0,
        discount: 0.5,
        seed,
        classes: None,
        initial_state: 0,
    }
    .build()
    .unwrap()
}

#[test]
fn criterion_6_drift_bounds() {
    let eta_levels = [0.3, 0.6, 1.0, 0.3, 0.6, 1.0, 0.3, 0.6, 1.0, 0.3];
    let partition = ClassPartition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
    let measure_cfg = MeasureConfig {
        depth: 6,
        node_cap: 100_000,
        episodes: 500,
        seed: 0,
    };
    let mut failures = 0usize;
    for (i, &eta_min) in eta_levels.iter().enumerate() {
        let seed = 100 + i as u64;
        let model = generated_model(seed, 3, eta_min);
        let eta = mixing_coefficient(&model).unwrap();
        assert!(eta >= eta_min - 1e-12);

        let mut planner = PlannerConfig::for_model(&model, partition.clone(), 1.0, seed).unwrap();
        planner.horizon_override = Some(1);
        planner.samples_override = Some(4);
        let policy =
            beliefplan_core::planner::SparseSamplingPolicy::new(planner).unwrap();

        let eps_l1 = measure_l1_eps(&model, &partition, &measure_cfg).unwrap();
        let eps_kl = measure_kl_eps(&model, &partition, &policy, &measure_cfg).unwrap();
        assert!(eps_l1.exhaustive && eps_kl.exhaustive, "need exhaustive eps");

        let trace = beliefplan_core::evaluate::drift_trace(
            &model, &partition, &policy, 2000, 10, seed,
        )
        .unwrap();
        let inputs = BoundInputs {
            eps_kl: eps_kl.value(),
            eps_l1: eps_l1.value(),
            eta,
            gamma: model.discount(),
            r_max: model.r_max(),
            delta: 0.0,
            episodes: 2000,
            truncation: 0.0,
        };
        for report in drift_reports(&trace, &inputs) {
            assert!(!report.vacuous, "eta {eta} must give finite bounds");
            for row in &report.rows {
                if !row.pass {
                    failures += 1;
                    eprintln!(
                        "model {seed} {}: t={} measured {} > bound {} + slack {}",
                        report.theorem, row.t, row.measured, row.bound, row.slack
                    );
                }
            }
        }
    }
    assert_eq!(failures, 0, "drift bound violations");
    println!("criterion 6 (drift bounds on 10 generated models): PASS");
}

#[test]
fn criterion_7_value_gap_bounds() {
    let partition = ClassPartition::new(2, vec![vec![0], vec![1]]).unwrap();
    let mut failures = 0usize;
    for (i, eta_min) in [0.5, 0.6, 0.7].into_iter().enumerate() {
        let seed = 200 + i as u64;
        let model = generated_model(seed, 2, eta_min);
        let mut planner = PlannerConfig::for_model(&model, partition.clone(), 1.0, seed).unwrap();
        planner.horizon_override = Some(3);
        planner.samples_override = Some(32);
        let cfg = EvalConfig {
            episodes: 300,
            t_max: 5,
            h_eval: 6,
            budget: DEFAULT_NODE_BUDGET,
            seed: 17,
            measure: MeasureConfig {
                depth: 6,
                node_cap: 100_000,
                episodes: 500,
                seed: 17,
            },
        };
        let outcome = check_bounds(&model, &partition, &planner, &cfg).unwrap();
        for report in &outcome.reports {
            assert!(
                !report.vacuous,
                "model {seed}: {} unexpectedly vacuous",
                report.theorem
            );
            for row in &report.rows {
                if !row.pass {
                    failures += 1;
                    eprintln!(
                        "model {seed} {}: t={} action={:?} measured {} > bound {} + slack {}",
                        report.theorem, row.t, row.action, row.measured, row.bound, row.slack
                    );
                }
            }
        }
        assert!(outcome.pass(), "model {seed} failed");
    }
    assert_eq!(failures, 0, "value-gap bound violations");
    println!("criterion 7 (value-gap bounds on 3 generated models): PASS");
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn assert_matches_golden(out_dir: &Path, golden_dir: &Path, files: &[&str]) {
    for file in files {
        let got = std::fs::read(out_dir.join(file))
            .unwrap_or_else(|e| panic!("{file} missing: {e}"));
        let want = std::fs::read(golden_dir.join(file))
            .unwrap_or_else(|e| panic!("golden {file} missing: {e}"));
        assert_eq!(
            got, want,
            "{file} differs from the golden copy"
        );
    }
}

#[test]
fn criterion_8_golden_reproduction() {
    let scratch = std::env::temp_dir().join("beliefplan-acceptance-golden");
    let _ = std::fs::remove_dir_all(&scratch);
    std::fs::create_dir_all(&scratch).unwrap();

    let measure_out = scratch.join("measure");
    let status = Command::new(env!("CARGO_BIN_EXE_beliefplan"))
        .args([
            "measure",
            "--config",
            repo_path("fixtures/configs/measure.json").to_str().unwrap(),
            "--out",
            measure_out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert_matches_golden(
        &measure_out,
        &repo_path("fixtures/golden/measure"),
        &["epsilon.csv", "drift_trace.csv", "summary.json"],
    );

    let check_out = scratch.join("check");
    let status = Command::new(env!("CARGO_BIN_EXE_beliefplan"))
        .args([
            "check",
            "--config",
            repo_path("fixtures/configs/check.json").to_str().unwrap(),
            "--out",
            check_out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert_matches_golden(
        &check_out,
        &repo_path("fixtures/golden/check"),
        &["tracking_bounds.csv", "drifting_bounds.csv", "summary.json"],
    );
    println!("criterion 8 (golden-file reproduction): PASS");
}
