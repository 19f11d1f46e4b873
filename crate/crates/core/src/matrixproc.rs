//! Matrix processes on the solvable (horocyclic) model of `SU(p,q)` and
//! `SO(p,q)`.
//!
//! The triangular Brownian motion solves `δl = l δλ` and is advanced by
//! exact group steps `l_{k+1} = l_k exp(Δλ_k + diag(drift)·dt)`. The
//! solvable coordinates
//!
//! ```text
//! b_t = ∫ l δβ,    c_t = ∫ l δκ l* + ∫ b δβ* l*
//! ```
//!
//! are Stratonovich integrals, discretized by either the trapezoid (Heun)
//! rule or the midpoint rule; see [`StratonovichScheme`].
//!
//! Noise scalings (one place only, [`Field::offdiag_normal`] and friends):
//!
//! | entry | complex | real |
//! |---|---|---|
//! | `λ^{rr}` | `W` | `W` |
//! | `λ^{rs}`, `r > s` | `√2(W + iW')` | `√2 W` |
//! | `β^{kl}` | `√2(W + iW')` | `√2 W` |
//! | `κ^{rr}` | `−2iW` | `0` |
//! | `κ^{rs}`, `r < s` | `√2(W + iW')`, `κ^{sr} = −conj κ^{rs}` | `√2 W`, `κ^{sr} = −κ^{rs}` |

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, Zero};

use crate::linalg::{expm_lower_triangular, hermitian_eigenvalues, lower_triangular_inverse, CMat};
use crate::paths::{Noise, TimeGrid};
use crate::rng::{NormalStream, RngStream};
use crate::{Error, Result};

/// Stream tags for the three noise families.
pub const LAMBDA_TAG: u64 = 0x1A4B;
pub const KAPPA_TAG: u64 = 0x4A99;
pub const BETA_COLUMN_TAG: u64 = 0xBE7A;

/// Scalar field of the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Increment of an off-diagonal `λ`, or of a `β` entry, or of an upper `κ` entry.
    fn offdiag_normal(self, n: &mut NormalStream, sd: f64) -> Complex64 {
        match self {
            Field::Complex => Complex64::new(SQRT_2 * sd * n.next(), SQRT_2 * sd * n.next()),
            Field::Real => Complex64::new(SQRT_2 * sd * n.next(), 0.0),
        }
    }

    /// Increment of a diagonal `κ` entry.
    fn kappa_diag_normal(self, n: &mut NormalStream, sd: f64) -> Complex64 {
        match self {
            Field::Complex => Complex64::new(0.0, -2.0 * sd * n.next()),
            Field::Real => Complex64::zero(),
        }
    }

    /// Limit constant `θ` in `(1/q)c_t → θ∫ l l* ds`.
    pub fn theta(self) -> f64 {
        match self {
            Field::Complex => 2.0,
            Field::Real => 1.0,
        }
    }
}

/// Singular values in decreasing order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialVector(pub Vec<f64>);

impl RadialVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Square roots of the eigenvalues of `N N*`, decreasing.
pub fn singular_values(n: &CMat) -> Result<RadialVector> {
    let h = n.mul_adjoint(n);
    let ev = hermitian_eigenvalues(&h)?;
    Ok(RadialVector(ev.into_iter().map(|e| e.max(0.0).sqrt()).collect()))
}

/// Trajectory of the triangular Brownian motion and its driver increments.
#[derive(Debug, Clone)]
pub struct TriangularPath {
    pub p: usize,
    pub field: Field,
    pub grid: TimeGrid,
    pub frames: Vec<CMat>,
    /// `Δλ_k` (without the drift part), one per step.
    pub increments: Vec<CMat>,
    pub diag_drift: Vec<f64>,
}

impl TriangularPath {
    /// Driver `λ_{t_k}` accumulated from the increments.
    pub fn driver(&self, k: usize) -> CMat {
        let mut s = CMat::zeros(self.p, self.p);
        for inc in &self.increments[..k] {
            s = s.add(inc);
        }
        s
    }
}

/// Samples `l` on `grid` with `l_0 = I`.
pub fn sample_triangular_bm(
    p: usize,
    field: Field,
    grid: TimeGrid,
    diag_drift: &[f64],
    noise: Noise,
) -> Result<TriangularPath> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be positive"));
    }
    if diag_drift.len() != p {
        return Err(Error::InvalidParameter("diag_drift must have p entries"));
    }
    let sd = grid.dt().sqrt();
    let mut normals = match noise {
        Noise::Gaussian(s) => Some(s.child(LAMBDA_TAG, 0).normals()),
        Noise::Zero => None,
    };
    let mut increments = Vec::with_capacity(grid.n_steps());
    for _ in 0..grid.n_steps() {
        let mut inc = CMat::zeros(p, p);
        if let Some(n) = normals.as_mut() {
            for r in 0..p {
                inc[(r, r)] = Complex64::new(sd * n.next(), 0.0);
                for s in 0..r {
                    inc[(r, s)] = field.offdiag_normal(n, sd);
                }
            }
        }
        increments.push(inc);
    }
    triangular_bm_from_increments(p, field, grid, diag_drift, increments)
}

/// Builds `l` from prescribed driver increments `Δλ_k` (lower triangular).
pub fn triangular_bm_from_increments(
    p: usize,
    field: Field,
    grid: TimeGrid,
    diag_drift: &[f64],
    increments: Vec<CMat>,
) -> Result<TriangularPath> {
    if diag_drift.len() != p {
        return Err(Error::InvalidParameter("diag_drift must have p entries"));
    }
    if increments.len() != grid.n_steps() {
        return Err(Error::InvalidParameter("one increment per step is required"));
    }
    if increments.iter().any(|m| m.rows() != p || m.cols() != p || !m.is_lower_triangular()) {
        return Err(Error::InvalidParameter("increments must be p×p lower triangular"));
    }
    let dt = grid.dt();
    let mut frames = Vec::with_capacity(grid.n_steps() + 1);
    let mut l = CMat::identity(p);
    frames.push(l.clone());
    for inc in &increments {
        let mut step = inc.clone();
        for r in 0..p {
            step[(r, r)] += diag_drift[r] * dt;
        }
        l = lower_mul_keep_triangular(&l, &expm_lower_triangular(&step));
        frames.push(l.clone());
    }
    Ok(TriangularPath { p, field, grid, frames, increments, diag_drift: diag_drift.to_vec() })
}

/// Sums consecutive blocks of `factor` increments, for coupled coarse grids.
pub fn coarsen_increments(increments: &[CMat], factor: usize) -> Vec<CMat> {
    increments
        .chunks(factor)
        .map(|c| c[1..].iter().fold(c[0].clone(), |acc, m| acc.add(m)))
        .collect()
}

/// Product of lower-triangular matrices with exact zeros kept above the diagonal.
fn lower_mul_keep_triangular(a: &CMat, b: &CMat) -> CMat {
    let n = a.rows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::zero();
            for k in j..=i {
                s += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Trapezoid `∫_0^{t_k} l l* ds` for every grid index.
pub fn integrated_gram(lpath: &TriangularPath) -> Vec<CMat> {
    let dt = lpath.grid.dt();
    let mut out = Vec::with_capacity(lpath.frames.len());
    let mut acc = CMat::zeros(lpath.p, lpath.p);
    out.push(acc.clone());
    let mut prev = lpath.frames[0].mul_adjoint(&lpath.frames[0]);
    for f in &lpath.frames[1..] {
        let cur = f.mul_adjoint(f);
        acc.add_assign_scaled(&prev, 0.5 * dt);
        acc.add_assign_scaled(&cur, 0.5 * dt);
        out.push(acc.clone());
        prev = cur;
    }
    out
}

/// `SingVal(l_t⁻¹ ∫_0^t l l* ds)` at every grid index `k ≥ 1`
/// (index 0 of the output is the zero vector).
pub fn eta_matrix(lpath: &TriangularPath) -> Result<Vec<RadialVector>> {
    let grams = integrated_gram(lpath);
    let mut out = Vec::with_capacity(grams.len());
    out.push(RadialVector(vec![0.0; lpath.p]));
    for (l, g) in lpath.frames.iter().zip(&grams).skip(1) {
        let n = lower_triangular_inverse(l).matmul(g);
        out.push(singular_values(&n)?);
    }
    Ok(out)
}

/// Point `(l, b, c)` of the solvable group.
#[derive(Debug, Clone, PartialEq)]
pub struct SuSolvableState {
    pub l: CMat,
    pub b: CMat,
    pub c: CMat,
}

impl SuSolvableState {
    /// `‖c + c* − b b*‖_∞`.
    pub fn invariant_defect(&self) -> f64 {
        self.c.add(&self.c.adjoint()).sub(&self.b.mul_adjoint(&self.b)).max_abs()
    }
}

/// Per-level summary when only `(l, c)` and `bb*` are needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvableSnapshot {
    pub k: usize,
    pub l: CMat,
    pub c: CMat,
    pub bb: CMat,
}

impl SolvableSnapshot {
    pub fn invariant_defect(&self) -> f64 {
        self.c.add(&self.c.adjoint()).sub(&self.bb).max_abs()
    }
}

/// Discretization of the Stratonovich integrals for `b` and `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StratonovichScheme {
    /// Average of the integrand at both ends; `c + c* = bb*` drifts at O(dt).
    #[default]
    Heun,
    /// Integrand at the averaged state; preserves `c + c* = bb*` exactly.
    Midpoint,
}

/// Increments of `κ` and of the columns of `β`.
pub trait SolvableDriver {
    /// Writes `Δκ_k` (p×p, skew-Hermitian).
    fn kappa(&mut self, k: usize, out: &mut CMat);
    /// Writes `Δβ_k` for column `j` (length p).
    fn beta(&mut self, j: usize, k: usize, out: &mut [Complex64]);
}

/// Gaussian driver with the scalings of the module table. Column `j` of `β`
/// uses its own stream, so columns (hence smaller `q`) are shared across `q`.
#[derive(Debug)]
pub struct GaussianDriver {
    field: Field,
    sd: f64,
    kappa: NormalStream,
    columns: Vec<NormalStream>,
}

impl GaussianDriver {
    pub fn new(field: Field, grid: TimeGrid, columns: usize, rng: RngStream) -> Self {
        Self {
            field,
            sd: grid.dt().sqrt(),
            kappa: rng.child(KAPPA_TAG, 0).normals(),
            columns: (0..columns as u64).map(|j| rng.child(BETA_COLUMN_TAG, j).normals()).collect(),
        }
    }
}

impl SolvableDriver for GaussianDriver {
    fn kappa(&mut self, _k: usize, out: &mut CMat) {
        let p = out.rows();
        for r in 0..p {
            out[(r, r)] = self.field.kappa_diag_normal(&mut self.kappa, self.sd);
            for s in r + 1..p {
                let z = self.field.offdiag_normal(&mut self.kappa, self.sd);
                out[(r, s)] = z;
                out[(s, r)] = -z.conj();
            }
        }
    }

    fn beta(&mut self, j: usize, _k: usize, out: &mut [Complex64]) {
        let n = &mut self.columns[j];
        for v in out {
            *v = self.field.offdiag_normal(n, self.sd);
        }
    }
}

/// Stored increments, replayable on the original grid or on a coarser one.
#[derive(Debug, Clone)]
pub struct RecordedDriver {
    kappa: Vec<CMat>,
    /// `beta[j][k]` is the increment of column `j` over step `k`.
    beta: Vec<Vec<Vec<Complex64>>>,
}

impl RecordedDriver {
    /// Draws `n_steps` increments of `κ` (p×p) and of `columns` columns of `β`.
    pub fn record(source: &mut impl SolvableDriver, p: usize, columns: usize, n_steps: usize) -> Self {
        let mut kappa = Vec::with_capacity(n_steps);
        let mut m = CMat::zeros(p, p);
        for k in 0..n_steps {
            source.kappa(k, &mut m);
            kappa.push(m.clone());
        }
        let beta = (0..columns)
            .map(|j| {
                (0..n_steps)
                    .map(|k| {
                        let mut v = vec![Complex64::zero(); p];
                        source.beta(j, k, &mut v);
                        v
                    })
                    .collect()
            })
            .collect();
        Self { kappa, beta }
    }

    /// Same Brownian paths sampled every `factor` steps.
    pub fn coarsen(&self, factor: usize) -> Self {
        let kappa = coarsen_increments(&self.kappa, factor);
        let beta = self
            .beta
            .iter()
            .map(|col| {
                col.chunks(factor)
                    .map(|c| {
                        let mut v = c[0].clone();
                        for w in &c[1..] {
                            v.iter_mut().zip(w).for_each(|(a, b)| *a += b);
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Self { kappa, beta }
    }
}

impl SolvableDriver for RecordedDriver {
    fn kappa(&mut self, k: usize, out: &mut CMat) {
        *out = self.kappa[k].clone();
    }

    fn beta(&mut self, j: usize, k: usize, out: &mut [Complex64]) {
        out.copy_from_slice(&self.beta[j][k]);
    }
}

fn mat_vec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.rows()).map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `out += s · x y*`.
fn add_outer(out: &mut CMat, x: &[Complex64], y: &[Complex64], s: f64) {
    for i in 0..x.len() {
        for j in 0..y.len() {
            out[(i, j)] += x[i] * y[j].conj() * s;
        }
    }
}

/// `l κ l*` for the p×p blocks.
fn sandwich(l: &CMat, k: &CMat) -> CMat {
    l.matmul(k).mul_adjoint(l)
}

/// Simulates `(l, b, c)` for every `q` in `qs` at once, sharing `l`, `κ` and
/// the leading `β` columns. Snapshots are taken at the grid indices in
/// `record`; the result is indexed `[level][record position]`.
///
/// With `alarm = Some(tol)`, fails when `‖c+c*−bb*‖ > tol·(1+‖bb*‖)` at a
/// recorded time.
pub fn simulate_su_solvable_nested(
    qs: &[usize],
    lpath: &TriangularPath,
    driver: &mut impl SolvableDriver,
    scheme: StratonovichScheme,
    record: &[usize],
    alarm: Option<f64>,
) -> Result<Vec<Vec<SolvableSnapshot>>> {
    let p = lpath.p;
    if qs.iter().any(|&q| q < p) {
        return Err(Error::InvalidParameter("every q must be at least p"));
    }
    if qs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("q levels must be nondecreasing"));
    }
    let n_steps = lpath.grid.n_steps();
    if record.iter().any(|&k| k > n_steps) {
        return Err(Error::InvalidParameter("record index beyond the grid"));
    }
    let n_cols = qs.last().map_or(0, |&q| q - p);
    let mut b_cols = vec![vec![Complex64::zero(); p]; n_cols];
    let mut c_kappa = CMat::zeros(p, p);
    let mut c_cols = vec![CMat::zeros(p, p); qs.len()];
    let mut out: Vec<Vec<SolvableSnapshot>> = vec![Vec::with_capacity(record.len()); qs.len()];
    let mut dk = CMat::zeros(p, p);
    let mut db = vec![Complex64::zero(); p];

    let snapshot = |k: usize, c_kappa: &CMat, c_cols: &[CMat], b_cols: &[Vec<Complex64>], out: &mut Vec<Vec<SolvableSnapshot>>| -> Result<()> {
        let mut c = c_kappa.clone();
        let mut bb = CMat::zeros(p, p);
        let mut col = 0;
        for (level, &q) in qs.iter().enumerate() {
            c = c.add(&c_cols[level]);
            while col < q - p {
                add_outer(&mut bb, &b_cols[col], &b_cols[col], 1.0);
                col += 1;
            }
            let snap = SolvableSnapshot { k, l: lpath.frames[k].clone(), c: c.clone(), bb: bb.clone() };
            if let Some(tol) = alarm {
                let bound = tol * (1.0 + bb.max_abs());
                let drift = snap.invariant_defect();
                if drift > bound {
                    return Err(Error::InvariantDrift { drift, bound });
                }
            }
            out[level].push(snap);
        }
        Ok(())
    };

    let mut rec = record.iter().peekable();
    while rec.peek() == Some(&&0) {
        snapshot(0, &c_kappa, &c_cols, &b_cols, &mut out)?;
        rec.next();
    }
    for k in 0..n_steps {
        let l0 = &lpath.frames[k];
        let l1 = &lpath.frames[k + 1];
        let lm = l0.add(l1).scale(0.5);
        driver.kappa(k, &mut dk);
        match scheme {
            StratonovichScheme::Heun => {
                c_kappa = c_kappa.add(&sandwich(l0, &dk).add(&sandwich(l1, &dk)).scale(0.5));
            }
            StratonovichScheme::Midpoint => c_kappa = c_kappa.add(&sandwich(&lm, &dk)),
        }
        let mut level = 0;
        for (j, b) in b_cols.iter_mut().enumerate() {
            while j >= qs[level] - p {
                level += 1;
            }
            driver.beta(j, k, &mut db);
            match scheme {
                StratonovichScheme::Heun => {
                    let w0 = mat_vec(l0, &db);
                    let w1 = mat_vec(l1, &db);
                    add_outer(&mut c_cols[level], b, &w0, 0.5);
                    for i in 0..p {
                        b[i] += 0.5 * (w0[i] + w1[i]);
                    }
                    add_outer(&mut c_cols[level], b, &w1, 0.5);
                }
                StratonovichScheme::Midpoint => {
                    let w = mat_vec(&lm, &db);
                    let mid: Vec<Complex64> = (0..p).map(|i| b[i] + 0.5 * w[i]).collect();
                    add_outer(&mut c_cols[level], &mid, &w, 1.0);
                    for i in 0..p {
                        b[i] += w[i];
                    }
                }
            }
        }
        while rec.peek() == Some(&&(k + 1)) {
            snapshot(k + 1, &c_kappa, &c_cols, &b_cols, &mut out)?;
            rec.next();
        }
    }
    Ok(out)
}

/// Full trajectory `(l, b, c)` for a single `q`.
pub fn simulate_su_solvable(
    q: usize,
    lpath: &TriangularPath,
    driver: &mut impl SolvableDriver,
    scheme: StratonovichScheme,
    alarm: Option<f64>,
) -> Result<Vec<SuSolvableState>> {
    let p = lpath.p;
    if q < p {
        return Err(Error::InvalidParameter("q must be at least p"));
    }
    let cols = q - p;
    let mut states = Vec::with_capacity(lpath.frames.len());
    let mut b = CMat::zeros(p, cols);
    let mut c = CMat::zeros(p, p);
    states.push(SuSolvableState { l: lpath.frames[0].clone(), b: b.clone(), c: c.clone() });
    let mut dk = CMat::zeros(p, p);
    let mut db = vec![Complex64::zero(); p];
    for k in 0..lpath.grid.n_steps() {
        let l0 = &lpath.frames[k];
        let l1 = &lpath.frames[k + 1];
        let lm = l0.add(l1).scale(0.5);
        driver.kappa(k, &mut dk);
        match scheme {
            StratonovichScheme::Heun => c = c.add(&sandwich(l0, &dk).add(&sandwich(l1, &dk)).scale(0.5)),
            StratonovichScheme::Midpoint => c = c.add(&sandwich(&lm, &dk)),
        }
        for j in 0..cols {
            driver.beta(j, k, &mut db);
            let bj: Vec<Complex64> = (0..p).map(|i| b[(i, j)]).collect();
            let new_bj: Vec<Complex64> = match scheme {
                StratonovichScheme::Heun => {
                    let w0 = mat_vec(l0, &db);
                    let w1 = mat_vec(l1, &db);
                    let nb: Vec<Complex64> = (0..p).map(|i| bj[i] + 0.5 * (w0[i] + w1[i])).collect();
                    add_outer(&mut c, &bj, &w0, 0.5);
                    add_outer(&mut c, &nb, &w1, 0.5);
                    nb
                }
                StratonovichScheme::Midpoint => {
                    let w = mat_vec(&lm, &db);
                    let mid: Vec<Complex64> = (0..p).map(|i| bj[i] + 0.5 * w[i]).collect();
                    add_outer(&mut c, &mid, &w, 1.0);
                    (0..p).map(|i| bj[i] + w[i]).collect()
                }
            };
            for i in 0..p {
                b[(i, j)] = new_bj[i];
            }
        }
        let state = SuSolvableState { l: l1.clone(), b: b.clone(), c: c.clone() };
        if let Some(tol) = alarm {
            let bound = tol * (1.0 + state.b.mul_adjoint(&state.b).max_abs());
            let drift = state.invariant_defect();
            if drift > bound {
                return Err(Error::InvariantDrift { drift, bound });
            }
        }
        states.push(state);
    }
    Ok(states)
}

/// `½ SingVal(l + l*⁻¹ + c l*⁻¹)`, i.e. `cosh Rad(S(l,b,c))` componentwise.
pub fn half_singular_values(l: &CMat, c: &CMat) -> Result<RadialVector> {
    let l_inv_adj = lower_triangular_inverse(l).adjoint();
    let m = l.add(&l_inv_adj).add(&c.matmul(&l_inv_adj));
    let sv = singular_values(&m)?;
    Ok(RadialVector(sv.0.into_iter().map(|s| 0.5 * s).collect()))
}

/// `Rad(S)` from `cosh Rad = ½ SingVal(l + l*⁻¹ + c l*⁻¹)`.
pub fn radial_part(l: &CMat, c: &CMat) -> Result<RadialVector> {
    let h = half_singular_values(l, c)?;
    let mut r = Vec::with_capacity(h.0.len());
    for x in h.0 {
        if x < 1.0 - 1e-12 {
            return Err(Error::CoshDomain(x));
        }
        let x = x.max(1.0);
        let u = x - 1.0;
        r.push((u + (u * (u + 2.0)).sqrt()).ln_1p());
    }
    Ok(RadialVector(r))
}

/// [`radial_part`] along a trajectory.
pub fn finite_q_radial(states: &[SuSolvableState]) -> Result<Vec<RadialVector>> {
    states.iter().map(|s| radial_part(&s.l, &s.c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{eta_functional, ScalarPath};

    fn rng() -> RngStream {
        RngStream::new(11, 2)
    }

    #[test]
    fn singular_values_basic() {
        assert_eq!(singular_values(&CMat::identity(3)).unwrap().0, vec![1.0; 3]);
        let d = singular_values(&CMat::diagonal(&[3.0, -4.0])).unwrap();
        assert!((d.0[0] - 4.0).abs() < 1e-14 && (d.0[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn frames_stay_in_group() {
        for field in [Field::Real, Field::Complex] {
            let g = TimeGrid::new(1.0, 200).unwrap();
            let path = sample_triangular_bm(3, field, g, &[0.1, 0.0, -0.2], Noise::Gaussian(rng())).unwrap();
            assert_eq!(path.frames[0], CMat::identity(3));
            for f in &path.frames {
                for i in 0..3 {
                    assert!(f[(i, i)].re > 0.0 && f[(i, i)].im == 0.0);
                    for j in i + 1..3 {
                        assert_eq!(f[(i, j)], Complex64::zero());
                    }
                }
            }
            // det l_t = exp(Σ λ^{rr}_t + t Σ drift)
            let k = 200;
            let lam = path.driver(k);
            let det: f64 = (0..3).map(|i| path.frames[k][(i, i)].re).product();
            let tr: f64 = (0..3).map(|i| lam[(i, i)].re).sum::<f64>() + g.t(k) * (-0.1);
            assert!((det.ln() - tr).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_case_is_exponential_and_eta_matches() {
        let g = TimeGrid::new(1.0, 500).unwrap();
        let path = sample_triangular_bm(1, Field::Real, g, &[0.0], Noise::Gaussian(rng())).unwrap();
        let b: Vec<f64> = (0..=500).map(|k| path.driver(k)[(0, 0)].re).collect();
        for (f, bk) in path.frames.iter().zip(&b) {
            assert!((f[(0, 0)].re - bk.exp()).abs() < 1e-12 * bk.exp());
        }
        let eta = eta_functional(&ScalarPath::new(g, b));
        let em = eta_matrix(&path).unwrap();
        for k in 1..=500 {
            assert!((em[k].0[0] / eta.values[k] - 1.0).abs() < 1e-12);
        }
        assert!((em[1].0[0] / g.dt() - 1.0).abs() < 0.2);
    }

    #[test]
    fn eta_matrix_is_ordered() {
        let g = TimeGrid::new(1.0, 200).unwrap();
        let path = sample_triangular_bm(3, Field::Complex, g, &[0.0; 3], Noise::Gaussian(rng())).unwrap();
        for v in eta_matrix(&path).unwrap().iter().skip(1) {
            assert!(v.0.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    /// β_{0,0} grows linearly, every other noise is off.
    struct LinearBeta;
    impl SolvableDriver for LinearBeta {
        fn kappa(&mut self, _k: usize, out: &mut CMat) {
            *out = CMat::zeros(out.rows(), out.cols());
        }
        fn beta(&mut self, j: usize, _k: usize, out: &mut [Complex64]) {
            out.iter_mut().for_each(|v| *v = Complex64::zero());
            if j == 0 {
                out[0] = Complex64::new(0.01, 0.0);
            }
        }
    }

    #[test]
    fn deterministic_invariant_is_exact() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let path = sample_triangular_bm(2, Field::Complex, g, &[0.0; 2], Noise::Zero).unwrap();
        for scheme in [StratonovichScheme::Heun, StratonovichScheme::Midpoint] {
            let states = simulate_su_solvable(4, &path, &mut LinearBeta, scheme, Some(1e-14)).unwrap();
            assert_eq!(states[0].l, CMat::identity(2));
            assert_eq!(states[0].c, CMat::zeros(2, 2));
            assert!(states.iter().all(|s| s.invariant_defect() < 1e-15));
        }
    }

    #[test]
    fn midpoint_preserves_invariant_with_noise() {
        let g = TimeGrid::new(1.0, 200).unwrap();
        let path = sample_triangular_bm(2, Field::Complex, g, &[0.0; 2], Noise::Gaussian(rng())).unwrap();
        let mut drv = GaussianDriver::new(Field::Complex, g, 8, rng());
        let states = simulate_su_solvable(10, &path, &mut drv, StratonovichScheme::Midpoint, Some(1e-10)).unwrap();
        assert!(states.last().unwrap().invariant_defect() < 1e-10);
    }

    #[test]
    fn nested_matches_single_level() {
        let g = TimeGrid::new(0.5, 50).unwrap();
        let path = sample_triangular_bm(2, Field::Complex, g, &[0.0; 2], Noise::Gaussian(rng())).unwrap();
        let record = [0, 25, 50];
        let mut d1 = GaussianDriver::new(Field::Complex, g, 10, rng());
        let nested =
            simulate_su_solvable_nested(&[5, 12], &path, &mut d1, StratonovichScheme::Heun, &record, None).unwrap();
        for (level, q) in [5usize, 12].into_iter().enumerate() {
            let mut d2 = GaussianDriver::new(Field::Complex, g, q - 2, rng());
            let single = simulate_su_solvable(q, &path, &mut d2, StratonovichScheme::Heun, None).unwrap();
            for (snap, &k) in nested[level].iter().zip(&record) {
                assert!(snap.c.sub(&single[k].c).max_abs() < 1e-12);
                assert!(snap.bb.sub(&single[k].b.mul_adjoint(&single[k].b)).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_part_at_origin_and_alarm() {
        let r = radial_part(&CMat::identity(2), &CMat::zeros(2, 2)).unwrap();
        assert_eq!(r.0, vec![0.0, 0.0]);
        let g = TimeGrid::new(1.0, 20).unwrap();
        let path = sample_triangular_bm(2, Field::Complex, g, &[0.0; 2], Noise::Gaussian(rng())).unwrap();
        let mut drv = GaussianDriver::new(Field::Complex, g, 30, rng());
        let err = simulate_su_solvable(32, &path, &mut drv, StratonovichScheme::Heun, Some(1e-16)).unwrap_err();
        assert!(matches!(err, Error::InvariantDrift { .. }));
    }

    #[test]
    fn recorded_driver_replays_and_coarsens() {
        let g = TimeGrid::new(1.0, 40).unwrap();
        let path = sample_triangular_bm(2, Field::Complex, g, &[0.0; 2], Noise::Gaussian(rng())).unwrap();
        let mut rec = RecordedDriver::record(&mut GaussianDriver::new(Field::Complex, g, 3, rng()), 2, 3, 40);
        let mut live = GaussianDriver::new(Field::Complex, g, 3, rng());
        let a = simulate_su_solvable(5, &path, &mut rec, StratonovichScheme::Heun, None).unwrap();
        let b = simulate_su_solvable(5, &path, &mut live, StratonovichScheme::Heun, None).unwrap();
        assert_eq!(a, b);

        let coarse = rec.coarsen(4);
        assert_eq!(coarse.kappa.len(), 10);
        let sum: Complex64 = (0..4).map(|k| rec.beta[1][k][0]).sum();
        assert!((coarse.beta[1][0][0] - sum).norm() < 1e-15);
        let lc = coarsen_increments(&path.increments, 4);
        let gc = TimeGrid::new(1.0, 10).unwrap();
        let pc = triangular_bm_from_increments(2, Field::Complex, gc, &[0.0; 2], lc).unwrap();
        assert!(pc.driver(10).sub(&path.driver(40)).max_abs() < 1e-14);
        // the diagonal of l is exp(λ^{rr}) on any grid
        assert!((pc.frames[10][(1, 1)] - path.frames[40][(1, 1)]).norm() < 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        // l^{21}_t = e^{λ^{11}_t} ∫ e^{λ^{22}_s − λ^{11}_s} δλ^{21}_s
        let n = 4000;
        let g = TimeGrid::new(1.0, n).unwrap();
        let path = sample_triangular_bm(2, Field::Real, g, &[0.0; 2], Noise::Gaussian(rng())).unwrap();
        let mut integral = 0.0;
        let mut lam = CMat::zeros(2, 2);
        for inc in &path.increments {
            let before = (lam[(1, 1)].re - lam[(0, 0)].re).exp();
            lam = lam.add(inc);
            let after = (lam[(1, 1)].re - lam[(0, 0)].re).exp();
            integral += 0.5 * (before + after) * inc[(1, 0)].re;
        }
        let closed = lam[(0, 0)].re.exp() * integral;
        let got = path.frames[n][(1, 0)].re;
        assert!((got - closed).abs() < 1e-2 * (1.0 + closed.abs()), "{got} vs {closed}");
    }
}
