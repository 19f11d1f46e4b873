use anyhow::Result;
use serde::Serialize;
use yorlab_core::trees::{exact_distribution, pitman_walk_distribution, pitman_walk_enumerated, Bessel3Kernel};

use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

/// Largest `n` for which all `2^n` paths are also enumerated.
const ENUMERATION_MAX: usize = 20;

#[derive(Debug, Serialize)]
struct Settings {
    n: usize,
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings { n: params.n.unwrap_or(24) };
    let mut out = Outcome::new(&s);
    let exact = Provenance::exact();
    let mut table = Table::new("laws", &["n", "value", "probability", "probability_f64"], exact);
    let (mut bessel_ok, mut enum_ok) = (true, true);
    for n in 0..=s.n {
        let pitman = pitman_walk_distribution(n)?;
        bessel_ok &= pitman == exact_distribution(&Bessel3Kernel, 0, n)?;
        if n <= ENUMERATION_MAX {
            enum_ok &= pitman == pitman_walk_enumerated(n)?;
        }
        for (v, p) in pitman.iter() {
            let f = p.numer().to_string().parse::<f64>()? / p.denom().to_string().parse::<f64>()?;
            table.push(row![n, v, p, f]);
        }
    }
    out.checks.push(Check::new("pitman_equals_bessel3", bessel_ok, s.n as f64, "exact equality for every n", exact));
    out.checks.push(Check::new(
        "dp_equals_enumeration",
        enum_ok,
        s.n.min(ENUMERATION_MAX) as f64,
        "exact equality for every n",
        exact,
    ));
    out.tables.push(table);
    Ok(out)
}
