use anyhow::{ensure, Result};
use serde::Serialize;
use yorlab_core::series::n_det;
use yorlab_core::specialfn::{ktilde_det, ChamberVector};

use super::strictly_decreasing;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

#[derive(Debug, Serialize)]
struct Settings {
    p: usize,
    q: Vec<u64>,
    r: Vec<f64>,
    r0: Vec<f64>,
    tolerance: f64,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let p = params.p.unwrap_or(2);
    ensure!(p == 2, "hoogenboom-det is set up for p = 2");
    let s = Settings {
        p,
        q: params.q.clone().unwrap_or_else(|| vec![16, 64, 256]),
        r: vec![1.5, 0.5],
        r0: vec![2.0, 1.0],
        tolerance: params.tolerance.unwrap_or(5e-2),
    };
    let mut out = Outcome::new(&s);
    let exact = Provenance::exact();
    let r = ChamberVector::strict(s.r.clone())?;
    let r0 = ChamberVector::strict(s.r0.clone())?;
    let target = ktilde_det(&r)? / ktilde_det(&r0)?;
    let mut table = Table::new("det", &["q", "ratio", "target", "abs_err"], exact);
    let mut errs = Vec::new();
    for &q in &s.q {
        let q32 = u32::try_from(q)?;
        ensure!(q32 > s.p as u32, "q must exceed p");
        let shift = (2.0 * (q32 - s.p as u32) as f64).ln();
        let ratio = n_det(s.p as u32, q32, &r.shifted(shift))? / n_det(s.p as u32, q32, &r0.shifted(shift))?;
        errs.push((ratio - target).abs());
        table.push(row![q, ratio, target, (ratio - target).abs()]);
    }
    out.checks.push(Check::new("det_error_decreasing", strictly_decreasing(&errs), errs[0], "decreasing in q", exact));
    out.checks.push(Check::at_most("det_error_at_largest_q", *errs.last().unwrap(), s.tolerance, exact));
    out.tables.push(table);
    Ok(out)
}
