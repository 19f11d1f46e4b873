use anyhow::Result;
use serde::Serialize;
use yorlab_core::paths::{DriftTable, TimeGrid};
use yorlab_core::stats::{conditional_law_test, generator_test, BatchMeta, EtaTestFn, GaussianBump, SampleBatch};

use crate::batch::par_replicas;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;
use crate::sampling::MySampler;

#[derive(Debug, Serialize)]
struct Settings {
    lambda: Vec<f64>,
    horizon: f64,
    dt: f64,
    h: f64,
    paths: usize,
    seed: u64,
    indicator_edges: Vec<f64>,
    log_bump_centers: Vec<f64>,
    log_bump_width: f64,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        lambda: params.lambda.clone().unwrap_or_else(|| vec![0.5, 1.0]),
        horizon: params.horizon.unwrap_or(1.0),
        dt: params.dt.unwrap_or(1e-3),
        h: params.h.unwrap_or(1e-3),
        paths: params.paths.unwrap_or(100_000),
        seed: params.seed.unwrap_or(11),
        indicator_edges: vec![0.0, 0.6, 1.0, 1.6, 3.0, f64::MAX],
        log_bump_centers: vec![-0.3, 0.3, 0.9],
        log_bump_width: 0.3,
    };
    let grid = TimeGrid::with_step(s.horizon, s.dt)?;
    let prov = Provenance::monte_carlo(s.seed, s.dt, s.paths);
    let meta = BatchMeta { seed_range: (0, s.paths as u64), dt: s.dt, q: None, t: s.horizon };
    let mut tests: Vec<EtaTestFn> =
        s.indicator_edges.windows(2).map(|w| EtaTestFn::Indicator { lo: w[0], hi: w[1] }).collect();
    tests.extend(
        s.log_bump_centers.iter().map(|&c| EtaTestFn::LogBump(GaussianBump { center: c, width: s.log_bump_width })),
    );

    let undrifted = MySampler { grid, drift: 0.0, h: s.h, substeps: 10, markov: false };
    let reps = par_replicas(s.paths, s.seed, |_, st| undrifted.sample(st));
    let joint = SampleBatch::new(reps.iter().map(|r| vec![r.b_end, r.log_eta.exp()]).collect(), meta.clone());

    let mut out = Outcome::new(&s);
    let mut table = Table::new("conditional", &["lambda", "test_fn", "z", "estimate", "se"], prov);
    for &lambda in &s.lambda {
        let rep = conditional_law_test(&joint, lambda, &tests)?;
        for p in &rep.parts {
            table.push(row![lambda, p.label, p.statistic, p.estimate.unwrap_or(f64::NAN), p.se.unwrap_or(f64::NAN)]);
        }
        out.checks.push(Check::from_test(format!("conditional_law_lambda_{lambda}"), rep, true, prov));

        // B with drift λ: log η has generator ½∂² + (d/dr log K_λ(e^{−r}))∂.
        let drifted = MySampler { drift: lambda, ..undrifted };
        let dreps = par_replicas(s.paths, s.seed ^ 0xD81F, |_, st| drifted.sample(st));
        let x: Vec<f64> = dreps.iter().map(|r| r.log_eta).collect();
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
        let pairs = SampleBatch::new(dreps.iter().map(|r| vec![r.log_eta, r.log_eta_h]).collect(), meta.clone());
        let drift = DriftTable::new(lambda, -8.0, 8.0, 4001)?;
        let bump = GaussianBump { center: m + sd, width: sd };
        let g = generator_test(&pairs, &|r| drift.eval(r), &bump, s.h)?;
        let p = &g.parts[0];
        table.push(row![lambda, "drifted_generator", p.statistic, p.estimate.unwrap_or(f64::NAN), p.se.unwrap_or(f64::NAN)]);
        out.checks.push(Check::from_test(format!("drifted_generator_lambda_{lambda}"), g, true, prov));
    }
    out.tables.push(table);
    Ok(out)
}
