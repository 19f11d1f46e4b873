use anyhow::Result;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use yorlab_core::trees::{exact_distribution, kernel_gap_max, GraphKernel, GraphNode, GroundStateKernel};

use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

#[derive(Debug, Serialize)]
struct Settings {
    q: Vec<u64>,
    n: usize,
    gap_q: Vec<u64>,
    gap_n_max: u64,
    ratio_band: (f64, f64),
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        q: params.q.clone().unwrap_or_else(|| vec![2, 3, 5]),
        n: params.n.unwrap_or(20),
        gap_q: vec![4, 16, 64],
        gap_n_max: 10,
        ratio_band: (3.5, 4.5),
    };
    let mut out = Outcome::new(&s);
    let exact = Provenance::exact();

    let mut samelaw = Table::new("samelaw", &["q", "n", "value", "probability"], exact);
    let mut all_equal = true;
    for &q in &s.q {
        if q < 2 {
            anyhow::bail!("q must be at least 2 for the tree T_q");
        }
        let ground = GroundStateKernel { q };
        for n in 0..=s.n {
            let graph = exact_distribution(&GraphKernel::Finite(q), GraphNode::new(0, 0), n)?;
            let dist = graph.map(|g| g.distance() as u64);
            let radial = exact_distribution(&ground, 0, n)?;
            all_equal &= dist == radial;
            for (v, p) in dist.iter() {
                samelaw.push(row![q, n, v, p]);
            }
        }
    }
    out.checks.push(Check::new("graph_distance_equals_ground_state", all_equal, s.n as f64, "exact equality", exact));

    let mut gaps = Table::new("kernel_gap", &["q", "gap", "ratio_to_4q"], exact);
    let mut ratios_ok = true;
    let mut worst = f64::NAN;
    for &q in &s.gap_q {
        let a = kernel_gap_max(q, s.gap_n_max);
        let b = kernel_gap_max(4 * q, s.gap_n_max);
        let ratio = to_f64(&(&a / &b));
        ratios_ok &= (s.ratio_band.0..=s.ratio_band.1).contains(&ratio);
        if worst.is_nan() || (ratio - 4.0).abs() > (worst - 4.0).abs() {
            worst = ratio;
        }
        gaps.push(row![q, to_f64(&a), ratio]);
    }
    out.checks.push(Check::new(
        "kernel_gap_ratio",
        ratios_ok,
        worst,
        format!("every err(q)/err(4q) in [{}, {}]", s.ratio_band.0, s.ratio_band.1),
        exact,
    ));
    out.tables.extend([samelaw, gaps]);
    Ok(out)
}
