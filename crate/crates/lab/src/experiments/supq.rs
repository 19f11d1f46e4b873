use anyhow::{ensure, Result};
use serde::Serialize;
use yorlab_core::linalg::{lower_triangular_inverse, CMat};
use yorlab_core::matrixproc::{
    coarsen_increments, eta_matrix, half_singular_values, integrated_gram, sample_triangular_bm, singular_values,
    simulate_su_solvable_nested, triangular_bm_from_increments, Field, GaussianDriver, RecordedDriver,
    StratonovichScheme,
};
use yorlab_core::paths::{eta_functional, Noise, ScalarPath, TimeGrid};
use yorlab_core::RngStream;

use crate::batch::try_par_replicas;
use crate::config::Params;
use crate::report::{Check, Outcome, Provenance, Table};
use crate::row;

const L_TAG: u64 = 1;
const SOLVABLE_TAG: u64 = 2;

#[derive(Debug, Serialize)]
struct Settings {
    p: usize,
    q: Vec<u64>,
    horizon: f64,
    dt: f64,
    paths: usize,
    seed: u64,
    /// Errors are measured on `[t_min, T]` every `record_every` steps.
    t_min: f64,
    record_every: usize,
    monotone_fraction: f64,
    theta_paths: usize,
    theta_band: (f64, f64),
    p1_dt: f64,
    invariant_paths: usize,
    invariant_band: (f64, f64),
}

pub fn run(params: &Params) -> Result<Outcome> {
    let s = Settings {
        p: params.p.unwrap_or(2),
        q: params.q.clone().unwrap_or_else(|| vec![50, 200, 800]),
        horizon: params.horizon.unwrap_or(1.0),
        dt: params.dt.unwrap_or(1e-3),
        paths: params.paths.unwrap_or(50),
        seed: params.seed.unwrap_or(5),
        t_min: 0.1,
        record_every: 10,
        monotone_fraction: 0.9,
        theta_paths: 20,
        theta_band: (1.8, 2.2),
        p1_dt: 1e-4,
        invariant_paths: 20,
        invariant_band: (1.5, 2.5),
    };
    ensure!(s.q.windows(2).all(|w| w[0] < w[1]), "q must be increasing");
    ensure!(s.q[0] as usize > s.p, "q must exceed p");
    let grid = TimeGrid::with_step(s.horizon, s.dt)?;
    let record: Vec<usize> = (grid.index_of(s.t_min)..=grid.n_steps()).step_by(s.record_every).collect();
    let qs: Vec<usize> = s.q.iter().map(|&q| q as usize).collect();
    let mut out = Outcome::new(&s);
    let prov = Provenance::monte_carlo(s.seed, s.dt, s.paths);

    // (1/q) cosh Rad against SingVal(l⁻¹∫ll*), relative per component.
    let errs: Vec<Vec<Vec<f64>>> = try_par_replicas(s.paths, s.seed, |_, st| {
        let fit = solvable_replica(Field::Complex, s.p, &qs, grid, &record, st)?;
        Ok::<_, anyhow::Error>(fit.rel_err)
    })?;
    let mut table = Table::new("matrix_errors", &["replica", "q", "component", "rel_err"], prov);
    let mut monotone = 0;
    for (i, e) in errs.iter().enumerate() {
        for (lvl, q) in s.q.iter().enumerate() {
            for (c, v) in e[lvl].iter().enumerate() {
                table.push(row![i, q, c, v]);
            }
        }
        if (0..s.p).all(|c| e.windows(2).all(|w| w[0][c] > w[1][c])) {
            monotone += 1;
        }
    }
    out.checks.push(
        Check::at_least("matrix_limit_monotone", monotone as f64 / s.paths as f64, s.monotone_fraction, prov)
            .with_note(format!("{monotone} of {} replicas decrease in every component", s.paths)),
    );
    out.tables.push(table);

    // Fitted θ in (1/q)c ≈ θ∫ll* at the largest q, complex against real.
    let q_last = [*qs.last().unwrap()];
    let theta_prov = Provenance::monte_carlo(s.seed, s.dt, s.theta_paths);
    let mut theta_table = Table::new("theta", &["field", "theta"], theta_prov);
    let mut theta = [0.0; 2];
    for (slot, field) in [Field::Complex, Field::Real].into_iter().enumerate() {
        let fits = try_par_replicas(s.theta_paths, s.seed ^ 0x7E7A, |_, st| {
            solvable_replica(field, s.p, &q_last, grid, &record, st)
        })?;
        let (num, den) = fits.iter().fold((0.0, 0.0), |a, f| (a.0 + f.theta_num[0], a.1 + f.theta_den[0]));
        theta[slot] = num / den;
        theta_table.push(row![format!("{field:?}"), theta[slot]]);
    }
    out.checks.push(Check::within(
        "theta_ratio_complex_real",
        theta[0] / theta[1],
        s.theta_band.0,
        s.theta_band.1,
        theta_prov,
    ));
    out.tables.push(theta_table);

    // p = 1: SingVal(l⁻¹∫ll*) is the scalar η of the driving Brownian motion.
    let g1 = TimeGrid::with_step(s.horizon, s.p1_dt)?;
    let l1 = sample_triangular_bm(1, Field::Real, g1, &[0.0], Noise::Gaussian(RngStream::new(s.seed, 0).child(L_TAG, 0)))?;
    let b: Vec<f64> = {
        let mut acc = 0.0;
        std::iter::once(0.0).chain(l1.increments.iter().map(|m| { acc += m[(0, 0)].re; acc })).collect()
    };
    let eta = eta_functional(&ScalarPath::new(g1, b));
    let em = eta_matrix(&l1)?;
    let p1_err = (1..=g1.n_steps()).map(|k| (em[k].0[0] / eta.values[k] - 1.0).abs()).fold(0.0, f64::max);
    out.checks.push(Check::at_most(
        "p1_reduction_rel_err",
        p1_err,
        5.0 * s.p1_dt.sqrt(),
        Provenance::monte_carlo(s.seed, s.p1_dt, 1),
    ));

    // ‖c + c* − bb*‖ under the trapezoid rule on dt, dt/2, dt/4 with the same noise.
    let fine = TimeGrid::new(s.horizon, 4 * grid.n_steps())?;
    let cols = s.q[0] as usize - s.p;
    let defects: Vec<[f64; 3]> = try_par_replicas(s.invariant_paths, s.seed ^ 0x1A7, |_, st| {
        let lf = sample_triangular_bm(s.p, Field::Complex, fine, &vec![0.0; s.p], Noise::Gaussian(st.child(L_TAG, 0)))?;
        let rec = RecordedDriver::record(
            &mut GaussianDriver::new(Field::Complex, fine, cols, st.child(SOLVABLE_TAG, 0)),
            s.p,
            cols,
            fine.n_steps(),
        );
        let mut d = [0.0; 3];
        for (slot, factor) in [4usize, 2, 1].into_iter().enumerate() {
            let g = TimeGrid::new(s.horizon, fine.n_steps() / factor)?;
            let lp = triangular_bm_from_increments(s.p, Field::Complex, g, &vec![0.0; s.p], coarsen_increments(&lf.increments, factor))?;
            let snaps = simulate_su_solvable_nested(
                &[s.q[0] as usize],
                &lp,
                &mut rec.coarsen(factor),
                StratonovichScheme::Heun,
                &[g.n_steps()],
                None,
            )?;
            let snap = &snaps[0][0];
            d[slot] = snap.invariant_defect() / (1.0 + snap.bb.max_abs());
        }
        Ok::<_, anyhow::Error>(d)
    })?;
    let inv_prov = Provenance::monte_carlo(s.seed, s.dt, s.invariant_paths);
    let mut inv_table = Table::new("invariant", &["replica", "n_steps", "defect"], inv_prov);
    let mut mean = [0.0; 3];
    for (i, d) in defects.iter().enumerate() {
        for (slot, factor) in [4usize, 2, 1].into_iter().enumerate() {
            inv_table.push(row![i, fine.n_steps() / factor, d[slot]]);
            mean[slot] += d[slot] / s.invariant_paths as f64;
        }
    }
    for (name, ratio) in [("invariant_halving_dt", mean[0] / mean[1]), ("invariant_halving_dt_half", mean[1] / mean[2])] {
        out.checks.push(Check::within(name, ratio, s.invariant_band.0, s.invariant_band.1, inv_prov));
    }
    out.tables.push(inv_table);
    Ok(out)
}

struct ReplicaFit {
    /// `[level][component]`, sup over recorded times.
    rel_err: Vec<Vec<f64>>,
    theta_num: Vec<f64>,
    theta_den: Vec<f64>,
}

fn solvable_replica(
    field: Field,
    p: usize,
    qs: &[usize],
    grid: TimeGrid,
    record: &[usize],
    stream: RngStream,
) -> Result<ReplicaFit> {
    let lpath = sample_triangular_bm(p, field, grid, &vec![0.0; p], Noise::Gaussian(stream.child(L_TAG, 0)))?;
    let grams = integrated_gram(&lpath);
    let cols = qs.last().unwrap() - p;
    let mut drv = GaussianDriver::new(field, grid, cols, stream.child(SOLVABLE_TAG, 0));
    let snaps = simulate_su_solvable_nested(qs, &lpath, &mut drv, StratonovichScheme::Heun, record, None)?;
    let half_theta = field.theta() / 2.0;
    let mut fit = ReplicaFit { rel_err: Vec::new(), theta_num: Vec::new(), theta_den: Vec::new() };
    for (level, &q) in qs.iter().enumerate() {
        let qf = q as f64;
        let mut err = vec![0.0f64; p];
        let (mut num, mut den) = (0.0, 0.0);
        for (snap, &k) in snaps[level].iter().zip(record) {
            let h = half_singular_values(&snap.l, &snap.c)?;
            let target = singular_values(&lower_triangular_inverse(&snap.l).matmul(&grams[k]))?;
            for c in 0..p {
                let t = half_theta * target.0[c];
                err[c] = err[c].max((h.0[c] / qf - t).abs() / t);
            }
            let herm: CMat = snap.c.add(&snap.c.adjoint()).scale(0.5 / qf);
            for (a, b) in herm.as_slice().iter().zip(grams[k].as_slice()) {
                num += (a.conj() * b).re;
                den += b.norm_sqr();
            }
        }
        fit.rel_err.push(err);
        fit.theta_num.push(num);
        fit.theta_den.push(den);
    }
    Ok(fit)
}
