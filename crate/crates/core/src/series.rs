//! Eigenfunction series of the Toda and trigonometric Calogero–Moser–Sutherland
//! operators, rank-one spherical functions and the `SU(p,q)` determinant.
//!
//! Both operators have the form `d²/dr² − V(r)` with `V(r) = Σ_{k≥1} v_k e^{−2kr}`.
//! Writing `Ψ = Σ_n b_n e^{(λ−n)r}` and matching powers of `e^{−r}` in
//! `HΨ = λ²Ψ` gives
//!
//! ```text
//! (n² − 2nλ) b_n = Σ_{k≥1} v_k b_{n−2k},   b_0 = 1,
//! ```
//!
//! so odd coefficients vanish. For the Toda operator only `v_1 = 1` is nonzero.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::linalg::{det_real, solve_real};
use crate::specialfn::{
    gamma, ln_a_normalizer, ln_c_function, macdonald_k, ChamberVector, Multiplicities,
    NormalizerVariant,
};
use crate::{Error, Result};

/// Distance from a nonzero half-integer below which `λ` is rejected.
pub const RESONANCE_GUARD: f64 = 1e-6;

const MAX_TERMS: usize = 1 << 14;

/// Which operator a series diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `d²/dr² − e^{−2r}`.
    Toda,
    /// `d²/dr² − m_α(m_α+2m_2α−2)/(4 sinh² r) − m_2α(m_2α−2)/sinh² 2r`.
    Cms(Multiplicities),
}

/// Truncated coefficients `b_0..b_N` of `Ψ(λ, r) = Σ b_n e^{(λ−n)r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub lambda: f64,
    pub kind: SeriesKind,
    coeffs: Vec<f64>,
}

impl SeriesExpansion {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last stored coefficient.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn check_resonance(lambda: f64) -> Result<()> {
    let two = 2.0 * lambda;
    let nearest = two.round();
    if nearest != 0.0 && (two - nearest).abs() < 2.0 * RESONANCE_GUARD {
        return Err(Error::Resonance(lambda));
    }
    Ok(())
}

/// Coefficients `v_k`, `k = 1..=kmax`, of `V(r) = Σ v_k e^{−2kr}` (index 0 unused).
pub fn potential_coefficients(kind: SeriesKind, kmax: usize) -> Vec<f64> {
    let mut v = vec![0.0; kmax + 1];
    match kind {
        SeriesKind::Toda => {
            if kmax >= 1 {
                v[1] = 1.0;
            }
        }
        SeriesKind::Cms(m) => {
            let (ma, m2) = (m.m_alpha as f64, m.m_2alpha as f64);
            let a = ma * (ma + 2.0 * m2 - 2.0);
            let b = m2 * (m2 - 2.0);
            for (k, vk) in v.iter_mut().enumerate().skip(1) {
                // 1/(4 sinh² r) = Σ k e^{−2kr};  1/sinh² 2r = 4 Σ j e^{−4jr}
                *vk = a * k as f64;
                if k % 2 == 0 {
                    *vk += 4.0 * b * (k / 2) as f64;
                }
            }
        }
    }
    v
}

/// The potential `V(r)` in closed form.
pub fn potential(kind: SeriesKind, r: f64) -> f64 {
    match kind {
        SeriesKind::Toda => (-2.0 * r).exp(),
        SeriesKind::Cms(m) => cms_potential(r, m),
    }
}

/// `m_α(m_α+2m_2α−2)/(4 sinh² r) + m_2α(m_2α−2)/sinh² 2r`.
pub fn cms_potential(r: f64, mult: Multiplicities) -> f64 {
    let (ma, m2) = (mult.m_alpha as f64, mult.m_2alpha as f64);
    let s1 = r.sinh();
    let s2 = (2.0 * r).sinh();
    let mut v = 0.0;
    let a = ma * (ma + 2.0 * m2 - 2.0);
    if a != 0.0 {
        v += a / (4.0 * s1 * s1);
    }
    let b = m2 * (m2 - 2.0);
    if b != 0.0 {
        v += b / (s2 * s2);
    }
    v
}

/// `sup_{r ∈ grid} |V_CMS(r + ln m_α) − e^{−2r}|` over `n + 1` equispaced
/// points of `[r_min, r_max]`.
pub fn inozemtsev_gap(mult: Multiplicities, r_min: f64, r_max: f64, n: usize) -> Result<f64> {
    if mult.m_alpha == 0 {
        return Err(Error::InvalidParameter("inozemtsev shift needs m_alpha > 0"));
    }
    let shift = (mult.m_alpha as f64).ln();
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let r = r_min + (r_max - r_min) * i as f64 / n.max(1) as f64;
        sup = sup.max((cms_potential(r + shift, mult) - (-2.0 * r).exp()).abs());
    }
    Ok(sup)
}

fn build_series(lambda: f64, kind: SeriesKind, n_max: usize) -> Result<SeriesExpansion> {
    check_resonance(lambda)?;
    if n_max % 2 != 0 || n_max == 0 {
        return Err(Error::InvalidParameter("series truncation must be a positive even integer"));
    }
    let v = potential_coefficients(kind, n_max / 2);
    let mut b = vec![0.0; n_max + 1];
    b[0] = 1.0;
    for n in (2..=n_max).step_by(2) {
        let nf = n as f64;
        let mut s = 0.0;
        for k in 1..=n / 2 {
            s += v[k] * b[n - 2 * k];
        }
        b[n] = s / (nf * nf - 2.0 * nf * lambda);
    }
    Ok(SeriesExpansion { lambda, kind, coeffs: b })
}

/// Toda series `Ψ_T(λ, ·)` truncated at `N` (even).
pub fn toda_series(lambda: f64, n: usize) -> Result<SeriesExpansion> {
    build_series(lambda, SeriesKind::Toda, n)
}

/// CMS series `Ψ_CMS(λ, q, ·)` truncated at `N` (even).
pub fn cms_series(lambda: f64, mult: Multiplicities, n: usize) -> Result<SeriesExpansion> {
    build_series(lambda, SeriesKind::Cms(mult), n)
}

/// `(Σ_n b_n e^{−nr}, estimated relative tail)`; `Ψ = e^{λr}` times the sum.
fn reduced_sum(s: &SeriesExpansion, r: f64) -> (f64, f64) {
    let z = (-2.0 * r).exp();
    let mut zn = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut prev = 0.0;
    for (i, &b) in s.coeffs.iter().enumerate().step_by(2) {
        let t = b * zn;
        sum += t;
        if i > 0 {
            prev = last;
        }
        last = t;
        zn *= z;
    }
    let ratio = if prev != 0.0 { (last / prev).abs() } else { 0.0 };
    let tail = if last == 0.0 {
        0.0
    } else if ratio < 1.0 {
        last.abs() * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    (sum, if sum != 0.0 { tail / sum.abs() } else { tail })
}

/// `Σ_{n≤N} b_n e^{(λ−n)r}`, failing when the estimated relative tail exceeds `tol`.
pub fn eval_series_tol(s: &SeriesExpansion, r: f64, tol: f64) -> Result<f64> {
    let (sum, tail) = reduced_sum(s, r);
    if !(tail <= tol) {
        return Err(Error::Truncation { tail, tol });
    }
    Ok((s.lambda * r).exp() * sum)
}

/// [`eval_series_tol`] with relative tolerance `1e−12`.
pub fn eval_series(s: &SeriesExpansion, r: f64) -> Result<f64> {
    eval_series_tol(s, r, 1e-12)
}

/// Reduced sum `Σ b_n e^{−nr}` with the truncation doubled until the last
/// retained term is below `1e−16` relative and the term ratio is below 1/2.
fn adaptive_reduced(lambda: f64, kind: SeriesKind, r: f64) -> Result<f64> {
    let mut n = 32;
    loop {
        let s = build_series(lambda, kind, n)?;
        let z = (-2.0 * r).exp();
        let mut zn = 1.0;
        let mut sum = 0.0;
        let mut terms = [0.0; 2];
        for &b in s.coeffs.iter().step_by(2) {
            let t = b * zn;
            sum += t;
            terms = [terms[1], t];
            zn *= z;
        }
        let small = terms[1].abs() <= 1e-16 * sum.abs().max(f64::MIN_POSITIVE);
        let ratio_ok = terms[0] == 0.0 || (terms[1] / terms[0]).abs() < 0.5;
        if small && ratio_ok {
            return Ok(sum);
        }
        if n >= MAX_TERMS {
            return Err(Error::Truncation { tail: terms[1].abs() / sum.abs(), tol: 1e-16 });
        }
        n *= 2;
    }
}

/// `Ψ(λ, r)` for the given operator, with adaptive truncation.
pub fn psi(lambda: f64, kind: SeriesKind, r: f64) -> Result<f64> {
    Ok((lambda * r).exp() * adaptive_reduced(lambda, kind, r)?)
}

/// `|HΨ − λ²Ψ|` at `r`, with `Ψ'' ` differentiated term by term and `V` in closed form.
pub fn residual(s: &SeriesExpansion, r: f64) -> f64 {
    let lambda = s.lambda;
    let mut psi = 0.0;
    let mut second = 0.0;
    for (n, &b) in s.coeffs.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let e = lambda - n as f64;
        let t = b * (e * r).exp();
        psi += t;
        second += e * e * t;
    }
    (second - potential(s.kind, r) * psi - lambda * lambda * psi).abs()
}

/// `ln δ_q(r) = m_α ln(2 sinh r) + m_2α ln(2 sinh 2r)` for `r > 0`.
pub fn ln_delta_q(r: f64, mult: Multiplicities) -> f64 {
    let mut v = 0.0;
    if mult.m_alpha > 0 {
        v += mult.m_alpha as f64 * (2.0 * r.sinh()).ln();
    }
    if mult.m_2alpha > 0 {
        v += mult.m_2alpha as f64 * (2.0 * (2.0 * r).sinh()).ln();
    }
    v
}

/// `δ_q(r) = (e^r − e^{−r})^{m_α} (e^{2r} − e^{−2r})^{m_2α}`.
pub fn delta_q(r: f64, mult: Multiplicities) -> f64 {
    let a = r.exp() - (-r).exp();
    let b = (2.0 * r).exp() - (-2.0 * r).exp();
    a.powi(mult.m_alpha as i32) * b.powi(mult.m_2alpha as i32)
}

/// `e^{ln_scale} · (c(λ)Ψ_CMS(λ,r) + c(−λ)Ψ_CMS(−λ,r))`, combined in log space.
fn scaled_spherical(lambda: f64, mult: Multiplicities, r: f64, ln_scale: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::InvalidParameter("spherical series needs lambda != 0"));
    }
    let kind = SeriesKind::Cms(mult);
    let mut total = 0.0;
    for l in [lambda, -lambda] {
        let (ln_c, sign) = ln_c_function(l, mult)?;
        total += sign * (ln_scale + ln_c + l * r).exp() * adaptive_reduced(l, kind, r)?;
    }
    Ok(total)
}

/// `δ_q^{1/2}(r) φ̃_λ(r) = c(λ)Ψ_CMS(λ,q,r) + c(−λ)Ψ_CMS(−λ,q,r)`.
pub fn rank1_spherical(lambda: f64, mult: Multiplicities, r: f64) -> Result<f64> {
    scaled_spherical(lambda, mult, r, 0.0)
}

/// The spherical function `φ̃_λ(r)` itself, for `r > 0`.
pub fn spherical_function(lambda: f64, mult: Multiplicities, r: f64) -> Result<f64> {
    scaled_spherical(lambda, mult, r, -0.5 * ln_delta_q(r, mult))
}

/// `a(q) · (δ_q^{1/2}φ̃_λ)(r + ln m_α)`, which tends to `K_λ(e^{−r})`.
pub fn shifted_spherical(
    lambda: f64,
    mult: Multiplicities,
    r: f64,
    variant: NormalizerVariant,
) -> Result<f64> {
    let ln_a = ln_a_normalizer(mult, variant)?;
    scaled_spherical(lambda, mult, r + (mult.m_alpha as f64).ln(), ln_a)
}

/// `g_q(λ, r) = a(q)(δ_q^{1/2}φ̃_λ)(ln m_α + r) − K_λ(e^{−r})`, squared normalizer.
pub fn g_q_error(lambda: f64, r: f64, mult: Multiplicities) -> Result<f64> {
    g_q_error_with(lambda, r, mult, NormalizerVariant::Squared)
}

/// [`g_q_error`] with an explicit normalizer variant.
pub fn g_q_error_with(
    lambda: f64,
    r: f64,
    mult: Multiplicities,
    variant: NormalizerVariant,
) -> Result<f64> {
    Ok(shifted_spherical(lambda, mult, r, variant)? - macdonald_k(lambda, (-r).exp())?)
}

/// `n`-th λ-derivative at 0 of `g_q`, via [`even_derivative_at_zero`].
pub fn g_q_derivative_at_zero(n: u32, r: f64, mult: Multiplicities) -> Result<f64> {
    if n % 2 == 1 {
        return Ok(0.0);
    }
    even_derivative_at_zero(|l| g_q_error(l, r, mult), n)
}

/// `Γ(λ)2^{λ−1}Ψ_T(λ,r) + Γ(−λ)2^{−λ−1}Ψ_T(−λ,r)`, which equals `K_λ(e^{−r})`.
pub fn toda_combination(lambda: f64, r: f64) -> Result<f64> {
    let mut total = 0.0;
    for l in [lambda, -lambda] {
        total += gamma(l)? * ((l - 1.0) * LN_2).exp() * psi(l, SeriesKind::Toda, r)?;
    }
    Ok(total)
}

/// Steps used by [`even_derivative_at_zero`], coarse then fine.
pub const EVEN_STENCIL_STEPS: [f64; 2] = [1e-2, 5e-3];

fn even_fit(f: &impl Fn(f64) -> Result<f64>, n: u32, h: f64, points: usize) -> Result<f64> {
    // f(λ) ≈ Σ_j a_j λ^{2j} through λ = h, 2h, …
    let mut a = Vec::with_capacity(points * points);
    let mut y = Vec::with_capacity(points);
    for k in 1..=points {
        let l = k as f64 * h;
        let l2 = l * l;
        let mut p = 1.0;
        for _ in 0..points {
            a.push(p);
            p *= l2;
        }
        y.push(f(l)?);
    }
    let coef = solve_real(points, &a, &y).ok_or(Error::Degenerate("even stencil"))?;
    let j = (n / 2) as usize;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(coef[j] * fact)
}

/// `n`-th derivative at 0 of an even function known only away from 0.
///
/// Fits an even polynomial through `λ = kh`, `k = 1..n/2+3`, for both steps in
/// [`EVEN_STENCIL_STEPS`], and Richardson-extrapolates the pair.
pub fn even_derivative_at_zero(f: impl Fn(f64) -> Result<f64>, n: u32) -> Result<f64> {
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let points = n as usize / 2 + 3;
    let [h1, h2] = EVEN_STENCIL_STEPS;
    let d1 = even_fit(&f, n, h1, points)?;
    let d2 = even_fit(&f, n, h2, points)?;
    // leading error of coefficient j scales like h^{2(points−j)}
    let order = 2 * (points - n as usize / 2) as i32;
    let ratio = (h1 / h2).powi(order);
    Ok((ratio * d2 - d1) / (ratio - 1.0))
}

/// `A(p,q) = (−1)^{p(p−1)/2} 2^{2p(p−1)} ∏_{j=1}^{p−1} (q−p+j)^{p−j} j!`.
pub fn hoogenboom_prefactor(p: u32, q: u32) -> f64 {
    let sign = if (p * (p.saturating_sub(1)) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut v = sign * 2f64.powi((2 * p * p.saturating_sub(1)) as i32);
    let mut fact = 1.0;
    for j in 1..p {
        fact *= j as f64;
        v *= ((q - p + j) as f64).powi((p - j) as i32) * fact;
    }
    v
}

fn su_rank_one(p: u32, q: u32) -> Result<Multiplicities> {
    if p == 0 || q < p {
        return Err(Error::InvalidParameter("need 1 <= p <= q"));
    }
    Ok(Multiplicities::new(2 * (q - p), 1))
}

/// `φ_λ^{(p,q)}(D_p(r))` for `SU(p,q)` from rank-one spherical functions of
/// `SU(1, q−p+1)`:
///
/// `A(p,q) det[φ̃_{λ_i}(r_j)] / ∏_{i<j} (cosh 2r_i − cosh 2r_j)(λ_i² − λ_j²)`.
pub fn hoogenboom_det(lambdas: &[f64], q: u32, r: &ChamberVector) -> Result<f64> {
    let p = lambdas.len();
    if r.len() != p {
        return Err(Error::InvalidParameter("lambda and r must have the same length"));
    }
    if !r.is_strict() {
        return Err(Error::Degenerate("r must be strictly decreasing"));
    }
    if lambdas.iter().any(|l| *l == l.round()) {
        return Err(Error::Degenerate("lambda_i must not be integers"));
    }
    let mult = su_rank_one(p as u32, q)?;
    let rs = r.as_slice();
    let mut m = Vec::with_capacity(p * p);
    for &li in lambdas {
        for &rj in rs {
            m.push(spherical_function(li, mult, rj)?);
        }
    }
    let mut denom = 1.0;
    for i in 0..p {
        for j in i + 1..p {
            let dl = lambdas[i] * lambdas[i] - lambdas[j] * lambdas[j];
            if dl == 0.0 {
                return Err(Error::Degenerate("lambda_i^2 must be pairwise distinct"));
            }
            denom *= ((2.0 * rs[i]).cosh() - (2.0 * rs[j]).cosh()) * dl;
        }
    }
    Ok(hoogenboom_prefactor(p as u32, q) * det_real(p, &m) / denom)
}

/// Entries `a(q−p+1)·∂^{2j}_λ (δ^{1/2}φ̃_λ)(r_i)|_{λ=0}` of the matrix whose
/// determinant is proportional to `δ^{1/2}φ_0^{(p,q)}`, row-major `p×p`.
///
/// The rank-one data are those of `SU(1, q−p+1)`; the normalizer makes every
/// entry converge, after the shift `r → r + ln 2(q−p)`, to `∂^{2j}_λ K_λ(e^{−r_i})`.
pub fn n_matrix(p: u32, q: u32, r: &ChamberVector) -> Result<Vec<f64>> {
    let mult = su_rank_one(p, q)?;
    if r.len() != p as usize {
        return Err(Error::InvalidParameter("r must have p coordinates"));
    }
    let ln_a = ln_a_normalizer(mult, NormalizerVariant::Squared)?;
    let mut m = Vec::with_capacity((p * p) as usize);
    for &ri in r.as_slice() {
        for j in 0..p {
            m.push(even_derivative_at_zero(
                |l| scaled_spherical(l, mult, ri, ln_a),
                2 * j,
            )?);
        }
    }
    Ok(m)
}

/// `det` of [`n_matrix`].
pub fn n_det(p: u32, q: u32, r: &ChamberVector) -> Result<f64> {
    Ok(det_real(p as usize, &n_matrix(p, q, r)?))
}
