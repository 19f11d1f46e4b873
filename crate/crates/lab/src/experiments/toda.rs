use anyhow::Result;
use serde::Serialize;
use yorlab_core::series::toda_combination;
use yorlab_core::specialfn::macdonald_k;

use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

#[derive(Debug, Serialize)]
struct Settings {
    lambda: Vec<f64>,
    r: Vec<f64>,
    tolerance: f64,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        lambda: params.lambda.clone().unwrap_or_else(|| vec![0.1, 0.3, 0.45]),
        r: vec![0.5, 1.0, 2.0, 3.0],
        tolerance: params.tolerance.unwrap_or(1e-8),
    };
    let mut out = Outcome::new(&s);
    let mut table = Table::new("toda", &["lambda", "r", "combination", "macdonald", "abs_err"], Provenance::exact());
    let mut worst = 0.0f64;
    for &l in &s.lambda {
        for &r in &s.r {
            let lhs = toda_combination(l, r)?;
            let k = macdonald_k(l, (-r).exp())?;
            worst = worst.max((lhs - k).abs());
            table.push(row![l, r, lhs, k, (lhs - k).abs()]);
        }
    }
    out.checks.push(Check::at_most("toda_equals_macdonald", worst, s.tolerance, Provenance::exact()));
    out.tables.push(table);
    Ok(out)
}
