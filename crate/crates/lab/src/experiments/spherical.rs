use anyhow::Result;
use serde::Serialize;
use yorlab_core::series::{g_q_derivative_at_zero, g_q_error};
use yorlab_core::specialfn::{GroupFamily, Multiplicities};

use super::strictly_decreasing;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

#[derive(Debug, Serialize)]
struct Settings {
    q: Vec<u64>,
    lambda: Vec<f64>,
    r: Vec<f64>,
    final_bound: f64,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        q: params.q.clone().unwrap_or_else(|| vec![8, 32, 128, 512]),
        lambda: params.lambda.clone().unwrap_or_else(|| vec![0.2, 0.45]),
        r: vec![1.0, 2.0],
        final_bound: params.tolerance.unwrap_or(1e-2),
    };
    let mut out = Outcome::new(&s);
    let exact = Provenance::exact();
    let mut table = Table::new("gq", &["q", "lambda", "r", "g_q", "d2_at_zero"], exact);
    let (mut g_dec, mut d_dec) = (true, true);
    let mut last_worst = 0.0f64;
    for &r in &s.r {
        let mut d2 = Vec::new();
        for &q in &s.q {
            let mult = Multiplicities::from_group(GroupFamily::SU, u32::try_from(q)?)?;
            d2.push(g_q_derivative_at_zero(2, r, mult)?.abs());
        }
        d_dec &= strictly_decreasing(&d2);
        for &l in &s.lambda {
            let mut g = Vec::new();
            for (&q, &d) in s.q.iter().zip(&d2) {
                let mult = Multiplicities::from_group(GroupFamily::SU, u32::try_from(q)?)?;
                let v = g_q_error(l, r, mult)?;
                table.push(row![q, l, r, v, d]);
                g.push(v.abs());
            }
            g_dec &= strictly_decreasing(&g);
            last_worst = last_worst.max(*g.last().unwrap_or(&f64::NAN));
        }
    }
    out.checks.push(Check::new("g_q_strictly_decreasing", g_dec, 0.0, "|g_q| decreasing in q", exact));
    out.checks.push(Check::at_most("g_q_at_largest_q", last_worst, s.final_bound, exact));
    out.checks.push(Check::new("second_derivative_decreasing", d_dec, 0.0, "|d2 g_q(0)| decreasing in q", exact));
    out.tables.push(table);
    Ok(out)
}
