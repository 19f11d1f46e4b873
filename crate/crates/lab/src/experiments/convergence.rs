use anyhow::{ensure, Result};
use serde::Serialize;
use yorlab_core::paths::{hyperbolic_radial_nested, log_exponential_functional, sample_bm, Noise, TimeGrid};

use crate::batch::try_par_replicas;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

#[derive(Debug, Serialize)]
struct Settings {
    q: Vec<u64>,
    horizon: f64,
    dt: f64,
    paths: usize,
    seed: u64,
    /// Errors are measured on `[t_min, T]`.
    t_min: f64,
    win_fraction: f64,
    median_bound: f64,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        q: params.q.clone().unwrap_or_else(|| vec![100, 10_000]),
        horizon: params.horizon.unwrap_or(1.0),
        dt: params.dt.unwrap_or(1e-3),
        paths: params.paths.unwrap_or(100),
        seed: params.seed.unwrap_or(2024),
        t_min: 0.1,
        win_fraction: 0.9,
        median_bound: params.tolerance.unwrap_or(0.05),
    };
    ensure!(s.q.len() >= 2, "need at least two values of q");
    ensure!(s.paths > 0, "need at least one replica");
    let grid = TimeGrid::with_step(s.horizon, s.dt)?;
    let k0 = grid.index_of(s.t_min);
    let errs: Vec<Vec<f64>> = try_par_replicas(s.paths, s.seed, |_, stream| -> Result<Vec<f64>> {
        let b = sample_bm(grid, 0.0, Noise::Gaussian(stream.child(1, 0)));
        let log_eta = log_exponential_functional(&b, 2.0);
        let radial = hyperbolic_radial_nested(&s.q, &b, Noise::Gaussian(stream.child(2, 0)))?;
        Ok(radial
            .iter()
            .zip(&s.q)
            .map(|(d, &q)| {
                let lq = (q as f64).ln();
                (k0..=grid.n_steps()).map(|k| (d.values[k] - lq - log_eta[k]).abs()).fold(0.0, f64::max)
            })
            .collect())
    })?;

    let prov = Provenance::monte_carlo(s.seed, s.dt, s.paths);
    let mut table = Table::new("errors", &["replica", "q", "err"], prov);
    for (i, e) in errs.iter().enumerate() {
        for (&q, v) in s.q.iter().zip(e) {
            table.push(row![i, q, v]);
        }
    }
    let last = s.q.len() - 1;
    let wins = errs.iter().filter(|e| e[last] < e[0]).count();
    let mut finals: Vec<f64> = errs.iter().map(|e| e[last]).collect();
    finals.sort_by(f64::total_cmp);
    let median = finals[finals.len() / 2];

    let mut out = Outcome::new(&s);
    out.checks.push(
        Check::at_least("largest_q_beats_smallest", wins as f64 / s.paths as f64, s.win_fraction, prov)
            .with_note(format!("{wins} of {} replicas", s.paths)),
    );
    out.checks.push(Check::at_most("median_err_largest_q", median, s.median_bound, prov));
    out.tables.push(table);
    Ok(out)
}
