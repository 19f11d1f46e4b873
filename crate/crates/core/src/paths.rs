//! Scalar path engine: Brownian paths, exponential functionals, the Pitman
//! transform and the radial part of the horocyclic hyperbolic process.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::rng::RngStream;
use crate::specialfn::{macdonald_k_dx_scaled, macdonald_k_scaled};
use crate::{Error, Result};

/// Stream tag for the `β^{(k)}` noises of [`hyperbolic_radial`].
pub const BETA_TAG: u64 = 0xB37A;

/// Uniform grid `t_k = k·dt` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter("time horizon must be positive"));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step"));
        }
        Ok(Self { horizon, n_steps })
    }

    /// Grid with step as close to `dt` as an integer step count allows.
    pub fn with_step(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive"));
        }
        Self::new(horizon, (horizon / dt).round().max(1.0) as usize)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Index of the grid point nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.n_steps)
    }
}

/// Values of a scalar process on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_steps() + 1, "path length must match the grid");
        Self { grid, values }
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn at(&self, t: f64) -> f64 {
        self.values[self.grid.index_of(t)]
    }
}

/// Source of Gaussian increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Gaussian(RngStream),
    /// Every Gaussian draw is replaced by 0.
    Zero,
}

impl Noise {
    fn fill(&self, out: &mut [f64]) {
        match self {
            Noise::Gaussian(s) => s.normals().fill(out),
            Noise::Zero => out.iter_mut().for_each(|v| *v = 0.0),
        }
    }
}

/// Brownian motion with drift `drift`, started at 0.
pub fn sample_bm(grid: TimeGrid, drift: f64, noise: Noise) -> ScalarPath {
    let mut z = vec![0.0; grid.n_steps()];
    noise.fill(&mut z);
    bm_from_normals(grid, drift, &z)
}

/// Brownian path built from given standard normal increments.
pub fn bm_from_normals(grid: TimeGrid, drift: f64, z: &[f64]) -> ScalarPath {
    assert_eq!(z.len(), grid.n_steps());
    let dt = grid.dt();
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(z.len() + 1);
    let mut b = 0.0;
    values.push(b);
    for &zi in z {
        b += drift * dt + sd * zi;
        values.push(b);
    }
    ScalarPath::new(grid, values)
}

/// Above this `max|B|` the functional is accumulated in log space.
const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln ∫_0^t e^{μB_s − B_t} ds` at each grid point (trapezoid rule); the
/// value at `t = 0` is `−∞`.
pub fn log_exponential_functional(b: &ScalarPath, mu: f64) -> Vec<f64> {
    let v = &b.values;
    let half_dt = 0.5 * b.grid.dt();
    let mut out = Vec::with_capacity(v.len());
    out.push(f64::NEG_INFINITY);
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) > LOG_DOMAIN_THRESHOLD;
    if big {
        let ln_half_dt = half_dt.ln();
        let mut acc = f64::NEG_INFINITY;
        for k in 1..v.len() {
            acc = log_add_exp(acc, ln_half_dt + log_add_exp(mu * v[k - 1], mu * v[k]));
            out.push(acc - v[k]);
        }
    } else {
        let mut acc = 0.0;
        let mut prev = (mu * v[0]).exp();
        for &bk in &v[1..] {
            let cur = (mu * bk).exp();
            acc += half_dt * (prev + cur);
            prev = cur;
            out.push(acc.ln() - bk);
        }
    }
    out
}

/// `∫_0^t e^{μB_s − B_t} ds` at each grid point.
pub fn exponential_functional(b: &ScalarPath, mu: f64) -> ScalarPath {
    let values = log_exponential_functional(b, mu).into_iter().map(f64::exp).collect();
    ScalarPath::new(b.grid, values)
}

/// `η_t = ∫_0^t e^{2B_s − B_t} ds`.
pub fn eta_functional(b: &ScalarPath) -> ScalarPath {
    exponential_functional(b, 2.0)
}

/// `2 max_{s≤t} B_s − B_t`.
pub fn pitman_transform(b: &ScalarPath) -> ScalarPath {
    let mut m = f64::NEG_INFINITY;
    let values = b
        .values
        .iter()
        .map(|&x| {
            m = m.max(x);
            2.0 * m - x
        })
        .collect();
    ScalarPath::new(b.grid, values)
}

/// `arcosh(1 + u)` for `u ≥ 0`, accurate for small `u`.
fn arcosh1p(u: f64) -> Result<f64> {
    if u < 0.0 {
        if u < -1e-12 {
            return Err(Error::CoshDomain(1.0 + u));
        }
        return Ok(0.0);
    }
    Ok((u + (u * (u + 2.0)).sqrt()).ln_1p())
}

/// Radial part `d(o, S_t)` of the horocyclic model of real hyperbolic space
/// of dimension `q`, driven by `B` and `q−1` further Brownian motions:
///
/// `cosh d = cosh B_t + ½ e^{−B_t} Σ_{k<q} (∫_0^t e^{B_s} dβ^{(k)}_s)²`,
///
/// with the stochastic integrals taken by the left-point rule. Stream `k`
/// is `rng.child(BETA_TAG, k)`, so paths for different `q` share noise.
pub fn hyperbolic_radial(q: u64, b: &ScalarPath, noise: Noise) -> Result<ScalarPath> {
    Ok(hyperbolic_radial_nested(&[q], b, noise)?.pop().unwrap())
}

/// [`hyperbolic_radial`] for several `q` at once, sharing the `β` streams.
/// Output order follows `qs`.
pub fn hyperbolic_radial_nested(qs: &[u64], b: &ScalarPath, noise: Noise) -> Result<Vec<ScalarPath>> {
    if qs.iter().any(|&q| q < 2) {
        return Err(Error::InvalidParameter("q must be at least 2"));
    }
    let n = b.grid.n_steps();
    let sd = b.grid.dt().sqrt();
    let eb: Vec<f64> = b.values.iter().map(|x| x.exp()).collect();
    let mut order: Vec<usize> = (0..qs.len()).collect();
    order.sort_by_key(|&i| qs[i]);
    let mut out: Vec<Option<ScalarPath>> = vec![None; qs.len()];
    let mut sum_sq = vec![0.0; n + 1];
    let mut z = vec![0.0; n];
    let mut done = 0u64;
    let radial = |sum_sq: &[f64]| -> Result<ScalarPath> {
        let mut values = Vec::with_capacity(n + 1);
        for (k, &bk) in b.values.iter().enumerate() {
            let half = 0.5 * bk;
            let u = 2.0 * half.sinh().powi(2) + 0.5 * (-bk).exp() * sum_sq[k];
            values.push(arcosh1p(u)?);
        }
        Ok(ScalarPath::new(b.grid, values))
    };
    for &i in &order {
        let target = qs[i] - 1;
        while done < target {
            match noise {
                Noise::Gaussian(s) => s.child(BETA_TAG, done).normals().fill(&mut z),
                Noise::Zero => z.iter_mut().for_each(|v| *v = 0.0),
            }
            let mut j = 0.0;
            for k in 0..n {
                j += eb[k] * sd * z[k];
                sum_sq[k + 1] += j * j;
            }
            done += 1;
        }
        out[i] = Some(radial(&sum_sq)?);
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// `d/dr ln K_λ(e^{−r}) = −e^{−r} K_λ'(e^{−r}) / K_λ(e^{−r})`.
pub fn my_drift(r: f64, lambda: f64) -> Result<f64> {
    let x = (-r).exp();
    Ok(-x * macdonald_k_dx_scaled(lambda, x)? / macdonald_k_scaled(lambda, x)?)
}

/// [`my_drift`] tabulated on a uniform grid with cubic interpolation;
/// arguments outside the table fall back to direct evaluation.
#[derive(Debug, Clone)]
pub struct DriftTable {
    lambda: f64,
    r_min: f64,
    h: f64,
    values: Vec<f64>,
}

impl DriftTable {
    pub fn new(lambda: f64, r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > r_min) || n < 4 {
            return Err(Error::InvalidParameter("drift table needs r_max > r_min and n >= 4"));
        }
        let h = (r_max - r_min) / n as f64;
        let values = (0..=n).map(|i| my_drift(r_min + i as f64 * h, lambda)).collect::<Result<_>>()?;
        Ok(Self { lambda, r_min, h, values })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let s = (r - self.r_min) / self.h;
        let last = self.values.len() - 1;
        if !(s >= 1.0 && s <= (last - 2) as f64) {
            return my_drift(r, self.lambda);
        }
        // Catmull–Rom style cubic through four neighbours (Lagrange form)
        let i = (s.floor() as usize).min(last - 2);
        let t = s - i as f64;
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        Ok(l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3)
    }
}

/// Euler–Maruyama path of `dX = drift(X)dt + dW`, `X_0 = x0`.
pub fn euler_diffusion(
    drift: impl Fn(f64) -> Result<f64>,
    grid: TimeGrid,
    x0: f64,
    noise: Noise,
) -> Result<ScalarPath> {
    let n = grid.n_steps();
    let mut z = vec![0.0; n];
    noise.fill(&mut z);
    let dt = grid.dt();
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = x0;
    values.push(x);
    for (k, &zk) in z.iter().enumerate() {
        x += drift(x)? * dt + sd * zk;
        if !(x.abs() <= 1e6) {
            return Err(Error::BlowUp { step: k + 1, value: x });
        }
        values.push(x);
    }
    Ok(ScalarPath::new(grid, values))
}
