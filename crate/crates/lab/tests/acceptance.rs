//! One pass/fail line per acceptance criterion.
//!
//! Run with `cargo test -p yorlab --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use yorlab::config::{ExperimentConfig, Params};
use yorlab::{run_experiment, Outcome};

struct Criterion {
    id: u8,
    title: &'static str,
    experiment: &'static str,
    params: Params,
    checks: &'static [&'static str],
    budget: Duration,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn criteria() -> Vec<Criterion> {
    let d = Params::default;
    vec![
        Criterion {
            id: 1,
            title: "discrete Pitman law equals discrete Bessel(3), n <= 24",
            experiment: "pitman-discrete",
            params: Params { n: Some(24), ..d() },
            checks: &["pitman_equals_bessel3"],
            budget: secs(5),
        },
        Criterion {
            id: 2,
            title: "graph-chain distance law equals ground-state chain, q in {2,3,5}, n <= 20",
            experiment: "tree-samelaw",
            params: Params { q: Some(vec![2, 3, 5]), n: Some(20), ..d() },
            checks: &["graph_distance_equals_ground_state"],
            budget: secs(10),
        },
        Criterion {
            id: 3,
            title: "ground-state kernel -> Bessel(3) kernel, err(q)/err(4q) in [3.5, 4.5]",
            experiment: "tree-samelaw",
            params: Params { q: Some(vec![2]), n: Some(0), ..d() },
            checks: &["kernel_gap_ratio"],
            budget: secs(1),
        },
        Criterion {
            id: 4,
            title: "Toda series combination equals K_lambda(e^-r) within 1e-8",
            experiment: "toda-identity",
            params: Params { lambda: Some(vec![0.1, 0.3, 0.45]), tolerance: Some(1e-8), ..d() },
            checks: &["toda_equals_macdonald"],
            budget: secs(5),
        },
        Criterion {
            id: 5,
            title: "g_q decays over q in {8,32,128,512}; |g_512| < 1e-2; second derivative decays",
            experiment: "spherical-limit",
            params: Params { q: Some(vec![8, 32, 128, 512]), lambda: Some(vec![0.2, 0.45]), tolerance: Some(1e-2), ..d() },
            checks: &["g_q_strictly_decreasing", "g_q_at_largest_q", "second_derivative_decreasing"],
            budget: secs(30),
        },
        Criterion {
            id: 6,
            title: "E[eta_1] = e^(1/2) within 3 SE, 1e5 paths, dt = 1e-3",
            experiment: "my-generator",
            params: generator_params(),
            checks: &["mean_eta_z"],
            budget: secs(120),
        },
        Criterion {
            id: 7,
            title: "shared-noise convergence, err(1e4) < err(1e2) on >= 90/100 seeds, median < 0.05",
            experiment: "my-convergence",
            params: Params {
                q: Some(vec![100, 10_000]),
                horizon: Some(1.0),
                dt: Some(1e-3),
                paths: Some(100),
                tolerance: Some(0.05),
                ..d()
            },
            checks: &["largest_q_beats_smallest", "median_err_largest_q"],
            budget: secs(600),
        },
        Criterion {
            id: 8,
            title: "generator test for log eta passes; zero-drift and mu=3 controls reject",
            experiment: "my-generator",
            params: generator_params(),
            checks: &["generator_my_drift", "generator_zero_drift_control", "markov_mu3_rejects"],
            budget: secs(600),
        },
        Criterion {
            id: 9,
            title: "conditional law of exp(lambda B_1) given eta, lambda in {0.5, 1}, within 3 SE",
            experiment: "conditional-law",
            params: Params {
                lambda: Some(vec![0.5, 1.0]),
                horizon: Some(1.0),
                dt: Some(1e-3),
                paths: Some(100_000),
                ..d()
            },
            checks: &["conditional_law_lambda_0.5", "conditional_law_lambda_1"],
            budget: secs(300),
        },
        Criterion {
            id: 10,
            title: "matrix limit monotone on >= 90% of 50 seeds; p=1 reduction; invariant halves with dt",
            experiment: "supq-limit",
            params: supq_params(),
            checks: &["matrix_limit_monotone", "p1_reduction_rel_err", "invariant_halving_dt", "invariant_halving_dt_half"],
            budget: secs(600),
        },
        Criterion {
            id: 11,
            title: "complex:real theta ratio in [1.8, 2.2] at q = 800",
            experiment: "supq-limit",
            params: supq_params(),
            checks: &["theta_ratio_complex_real"],
            budget: secs(300),
        },
        Criterion {
            id: 12,
            title: "normalized det N_(2,q) -> K-tilde ratio, decreasing error, < 5e-2 at q = 256",
            experiment: "hoogenboom-det",
            params: Params { p: Some(2), q: Some(vec![16, 64, 256]), tolerance: Some(5e-2), ..d() },
            checks: &["det_error_decreasing", "det_error_at_largest_q"],
            budget: secs(120),
        },
    ]
}

fn generator_params() -> Params {
    Params { horizon: Some(1.0), dt: Some(1e-3), h: Some(1e-3), paths: Some(100_000), ..Params::default() }
}

fn supq_params() -> Params {
    Params {
        p: Some(2),
        q: Some(vec![50, 200, 800]),
        horizon: Some(1.0),
        dt: Some(1e-3),
        paths: Some(50),
        ..Params::default()
    }
}

#[test]
fn acceptance_criteria() {
    // Criteria sharing an experiment and parameters reuse one run.
    let mut cache: Vec<(&str, Params, Outcome, Duration)> = Vec::new();
    let mut failures = Vec::new();
    for c in criteria() {
        let hit = cache.iter().position(|(e, p, _, _)| *e == c.experiment && *p == c.params);
        let idx = match hit {
            Some(i) => i,
            None => {
                let start = Instant::now();
                let outcome = run_experiment(&ExperimentConfig::new(c.experiment, c.params.clone()))
                    .unwrap_or_else(|e| panic!("criterion {}: {e:#}", c.id));
                cache.push((c.experiment, c.params.clone(), outcome, start.elapsed()));
                cache.len() - 1
            }
        };
        let (_, _, outcome, elapsed) = &cache[idx];
        let mut ok = *elapsed <= c.budget;
        let mut detail = Vec::new();
        for name in c.checks {
            let check = outcome.check(name).unwrap_or_else(|| panic!("criterion {}: missing check {name}", c.id));
            ok &= check.passed;
            detail.push(format!("{name}={:.4e} ({})", check.value, check.rule));
        }
        println!(
            "criterion {:>2} {} {:<80} [{:.2?} / {:?}] {}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.title,
            elapsed,
            c.budget,
            detail.join("; ")
        );
        if !ok {
            failures.push(c.id);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
