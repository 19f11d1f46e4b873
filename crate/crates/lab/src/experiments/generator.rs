use anyhow::{ensure, Result};
use serde::Serialize;
use yorlab_core::paths::{DriftTable, TimeGrid};
use yorlab_core::stats::{generator_test, markov_property_test, BatchMeta, GaussianBump, SampleBatch, Z_BAND};

use crate::batch::par_replicas;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;
use crate::sampling::{MyReplica, MySampler};

#[derive(Debug, Serialize)]
struct Settings {
    horizon: f64,
    dt: f64,
    h: f64,
    substeps: usize,
    paths: usize,
    seed: u64,
    markov_bins: usize,
    level: f64,
}

/// Drift table range in `r = log η`; values outside are computed directly.
const TABLE_RANGE: (f64, f64, usize) = (-8.0, 8.0, 4001);

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        horizon: params.horizon.unwrap_or(1.0),
        dt: params.dt.unwrap_or(1e-3),
        h: params.h.unwrap_or(1e-3),
        substeps: 10,
        paths: params.paths.unwrap_or(100_000),
        seed: params.seed.unwrap_or(7),
        markov_bins: 5,
        level: 0.01,
    };
    ensure!(s.paths >= 2 * 100 * s.markov_bins, "need at least {} paths for the Markov test", 200 * s.markov_bins);
    let grid = TimeGrid::with_step(s.horizon, s.dt)?;
    let sampler = MySampler { grid, drift: 0.0, h: s.h, substeps: s.substeps, markov: true };
    let reps: Vec<MyReplica> = par_replicas(s.paths, s.seed, |_, st| sampler.sample(st));
    let prov = Provenance::monte_carlo(s.seed, s.dt, s.paths);
    let meta = BatchMeta { seed_range: (0, s.paths as u64), dt: s.dt, q: None, t: s.horizon };
    let mut out = Outcome::new(&s);

    // E[η_T] = T e^{T/2}: 2B_s − B_T is centred Gaussian with variance T.
    let eta: Vec<f64> = reps.iter().map(|r| r.log_eta.exp()).collect();
    let (m, sd) = mean_sd(&eta);
    let se = sd / (s.paths as f64).sqrt();
    let target = s.horizon * (0.5 * s.horizon).exp();
    out.checks.push(
        Check::at_most("mean_eta_z", ((m - target) / se).abs(), Z_BAND, prov)
            .with_note(format!("mean {m}, target {target}, se {se}")),
    );

    let x: Vec<f64> = reps.iter().map(|r| r.log_eta).collect();
    let (mx, sx) = mean_sd(&x);
    // The bump sits one standard deviation above the mean, where the drift
    // term carries most of the signal.
    let bump = GaussianBump { center: mx + sx, width: sx };
    let pairs = SampleBatch::new(reps.iter().map(|r| vec![r.log_eta, r.log_eta_h]).collect(), meta.clone());
    let table = DriftTable::new(0.0, TABLE_RANGE.0, TABLE_RANGE.1, TABLE_RANGE.2)?;
    let my = generator_test(&pairs, &|r| table.eval(r), &bump, s.h)?;
    let zero = generator_test(&pairs, &|_| Ok(0.0), &bump, s.h)?;
    let mut gen_table = Table::new("generator", &["test", "z", "estimate", "se"], prov);
    for (name, rep) in [("my_drift", &my), ("zero_drift", &zero)] {
        let p = &rep.parts[0];
        gen_table.push(row![name, p.statistic, p.estimate.unwrap_or(f64::NAN), p.se.unwrap_or(f64::NAN)]);
    }
    out.checks.push(Check::from_test("generator_my_drift", my, true, prov));
    out.checks.push(Check::from_test("generator_zero_drift_control", zero, false, prov));

    let mut markov_table = Table::new("markov", &["mu", "bin", "ks"], prov);
    for (idx, mu, expect_pass) in [(0usize, 1u32, true), (1, 2, true), (2, 3, false)] {
        let rows = reps.iter().map(|r| r.markov.expect("sampled with markov data")[idx].to_vec()).collect();
        let rep = markov_property_test(&SampleBatch::new(rows, meta.clone()), s.markov_bins, s.level)?;
        for (b, part) in rep.parts.iter().enumerate() {
            markov_table.push(row![mu, b, part.statistic]);
        }
        let name = if expect_pass { format!("markov_mu{mu}") } else { format!("markov_mu{mu}_rejects") };
        out.checks.push(Check::from_test(name, rep, expect_pass, prov));
    }
    out.tables.extend([gen_table, markov_table]);
    Ok(out)
}
