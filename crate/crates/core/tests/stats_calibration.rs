//! Size and power of the statistical tests under known laws.

use yorlab_core::stats::{
    generator_test, ks_two_sample, markov_property_test, BatchMeta, GaussianBump, SampleBatch,
};
use yorlab_core::RngStream;

fn meta() -> BatchMeta {
    BatchMeta::default()
}

fn normals(seed: u64, idx: u64, n: usize) -> Vec<f64> {
    let mut z = RngStream::new(seed, idx).normals();
    let mut out = vec![0.0; n];
    z.fill(&mut out);
    out
}

#[test]
fn ks_null_pass_rate() {
    let reps = 100;
    let passes = (0..reps)
        .filter(|&r| {
            let a = SampleBatch::scalars(normals(11, 2 * r, 10_000), meta());
            let b = SampleBatch::scalars(normals(11, 2 * r + 1, 10_000), meta());
            ks_two_sample(&a, &b, 0.01).unwrap().passed()
        })
        .count();
    assert!(passes >= 98, "{passes}/{reps}");
}

#[test]
fn ks_detects_shift() {
    let a = SampleBatch::scalars(normals(12, 0, 10_000), meta());
    let b = SampleBatch::scalars(normals(12, 1, 10_000).into_iter().map(|x| x + 0.1).collect(), meta());
    assert!(!ks_two_sample(&a, &b, 0.01).unwrap().passed());
}

/// Exact Ornstein–Uhlenbeck transitions `dX = −θX dt + dW` from the stationary law.
fn ou_pairs(seed: u64, rep: u64, n: usize, theta: f64, h: f64) -> SampleBatch {
    let sd0 = (0.5 / theta).sqrt();
    let decay = (-theta * h).exp();
    let sd_h = ((1.0 - decay * decay) / (2.0 * theta)).sqrt();
    let z0 = normals(seed, 2 * rep, n);
    let z1 = normals(seed, 2 * rep + 1, n);
    let rows = z0
        .iter()
        .zip(&z1)
        .map(|(&a, &b)| {
            let x = sd0 * a;
            vec![x, decay * x + sd_h * b]
        })
        .collect();
    SampleBatch::new(rows, meta())
}

#[test]
fn generator_size_and_power() {
    let (theta, h, n) = (1.0, 0.02, 20_000);
    let bump = GaussianBump { center: 0.5, width: 0.5 };
    let true_drift = move |x: f64| Ok(-theta * x);
    let wrong_drift = |_x: f64| Ok(0.0);

    let reps = 100;
    let mut false_rejects = 0;
    let mut detections = 0;
    for r in 0..reps {
        let batch = ou_pairs(21, r, n, theta, h);
        if !generator_test(&batch, &true_drift, &bump, h).unwrap().passed() {
            false_rejects += 1;
        }
        if !generator_test(&batch, &wrong_drift, &bump, h).unwrap().passed() {
            detections += 1;
        }
    }
    assert!(false_rejects <= 3, "size: {false_rejects}/{reps}");
    assert!(detections >= 90, "power: {detections}/{reps}");
}

/// Values at three times of either a Brownian path or its running integral.
/// The integral alone is not Markov: its past carries the current slope.
fn triples(seed: u64, rep: u64, n: usize, integrated: bool) -> SampleBatch {
    let steps = 48;
    let dt = 1.0 / steps as f64;
    let mut stream = RngStream::new(seed, rep).normals();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut b, mut int) = (0.0, 0.0);
        let mut row = Vec::with_capacity(3);
        for k in 1..=steps {
            let db = dt.sqrt() * stream.next();
            int += dt * (b + 0.5 * db);
            b += db;
            if k == steps / 4 || k == steps / 2 || k == steps {
                row.push(if integrated { int } else { b });
            }
        }
        rows.push(row);
    }
    SampleBatch::new(rows, meta())
}

#[test]
fn markov_size() {
    let reps = 40;
    let rejects = (0..reps)
        .filter(|&r| !markov_property_test(&triples(31, r, 4_000, false), 4, 0.05).unwrap().passed())
        .count();
    // level 0.05 with Bonferroni over bins is conservative
    assert!(rejects <= 5, "{rejects}/{reps}");
}

#[test]
fn markov_power() {
    let reps = 10;
    let detections = (0..reps)
        .filter(|&r| !markov_property_test(&triples(32, r, 20_000, true), 4, 0.05).unwrap().passed())
        .count();
    assert!(detections >= 9, "{detections}/{reps}");
}

#[test]
fn reports_are_deterministic() {
    let a = ou_pairs(41, 0, 5_000, 1.0, 1e-2);
    let bump = GaussianBump { center: 0.0, width: 1.0 };
    let drift = |x: f64| Ok(-x);
    let r1 = generator_test(&a, &drift, &bump, 1e-2).unwrap();
    let r2 = generator_test(&ou_pairs(41, 0, 5_000, 1.0, 1e-2), &drift, &bump, 1e-2).unwrap();
    assert_eq!(r1, r2);
    let m1 = markov_property_test(&triples(42, 0, 2_000, false), 2, 0.05).unwrap();
    let m2 = markov_property_test(&triples(42, 0, 2_000, false), 2, 0.05).unwrap();
    assert_eq!(m1, m2);
}
