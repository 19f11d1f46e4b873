//! Exact Markov kernels for radial walks on the homogeneous tree `T_q`.
//!
//! Every probability is a [`BigRational`]. The ground state `φ̃_0` contains
//! `q^{−n/2}`, which is carried as a [`QSurd`] so that the ground-state
//! transform stays exactly rational.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest reachable support [`exact_distribution`] will track.
pub const STATE_CAP: usize = 1_000_000;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `coef · (√q)^e` with `e ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSurd {
    q: u64,
    coef: BigRational,
    odd: bool,
}

impl QSurd {
    /// `coef · q^{half_power/2}`, brought to normal form.
    pub fn new(coef: BigRational, half_power: i64, q: u64) -> Self {
        let whole = half_power.div_euclid(2);
        let odd = half_power.rem_euclid(2) == 1;
        let qb = BigRational::from_integer(BigInt::from(q));
        let factor = if whole >= 0 {
            num_traits::pow(qb, whole as usize)
        } else {
            num_traits::pow(qb, (-whole) as usize).recip()
        };
        Self { q, coef: coef * factor, odd }
    }

    pub fn coef(&self) -> &BigRational {
        &self.coef
    }

    /// Whether a `√q` factor remains.
    pub fn has_root(&self) -> bool {
        self.odd && !self.coef.is_zero()
    }

    /// The exact rational value, if the `√q` factor is absent.
    pub fn to_rational(&self) -> Option<BigRational> {
        (!self.has_root()).then(|| self.coef.clone())
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coef.to_f64().unwrap_or(f64::NAN);
        if self.odd {
            c * libm::sqrt(self.q as f64)
        } else {
            c
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        let mut coef = &self.coef * &other.coef;
        if self.odd && other.odd {
            coef *= BigRational::from_integer(BigInt::from(self.q));
        }
        Self { q: self.q, coef, odd: self.odd ^ other.odd }
    }

    pub fn div(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        let mut coef = &self.coef / &other.coef;
        // a/(b√q) = a√q/(bq)
        if other.odd && !self.odd {
            coef /= BigRational::from_integer(BigInt::from(self.q));
        }
        Self { q: self.q, coef, odd: self.odd ^ other.odd }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self { q: self.q, coef: &self.coef * r, odd: self.odd }
    }

    /// Sum of two surds of the same parity; `None` otherwise.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.q, other.q);
        if self.coef.is_zero() {
            return Some(other.clone());
        }
        if other.coef.is_zero() {
            return Some(self.clone());
        }
        (self.odd == other.odd).then(|| Self {
            q: self.q,
            coef: &self.coef + &other.coef,
            odd: self.odd,
        })
    }
}

/// A Markov kernel with finitely many exact transitions per state.
pub trait ExactKernel {
    type State: Ord + Clone + Debug;
    fn transitions(&self, from: &Self::State) -> Vec<(Self::State, BigRational)>;
}

/// Radial part of simple random walk on `T_q`, on `ℕ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialKernel {
    pub q: u64,
}

/// Ground-state transform `R^(0)(n,m) = R(n,m)φ̃_0(m)/(ρφ̃_0(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundStateKernel {
    pub q: u64,
}

/// The discrete Bessel(3) chain on `ℕ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bessel3Kernel;

/// Height chain on `ℤ`: down with `1/(q+1)`, up with `q/(q+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightKernel {
    pub q: u64,
}

/// Node `(x, y)` of the graph `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphNode {
    pub x: i64,
    pub y: i64,
}

impl GraphNode {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Tree distance to the root of the tree vertex this node stands for.
    pub fn distance(&self) -> i64 {
        self.x.max(-self.y)
    }

    /// Membership in the sub-graph reachable by the Pitman walk.
    pub fn in_pitman_graph(&self) -> bool {
        self.x >= self.y.abs() && (self.x - self.y).rem_euclid(2) == 0
    }
}

/// The chain `P_G` on `G` for finite `q`, or its `q → ∞` limit `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKernel {
    Finite(u64),
    Limit,
}

impl ExactKernel for RadialKernel {
    type State = u64;
    fn transitions(&self, &n: &u64) -> Vec<(u64, BigRational)> {
        let q = self.q as i64;
        if n == 0 {
            return vec![(1, BigRational::one())];
        }
        vec![(n - 1, rat(1, q + 1)), (n + 1, rat(q, q + 1))]
    }
}

/// `φ̃_0(n) = (1 + n(q−1)/(q+1)) q^{−n/2}`.
pub fn phi0_tree(n: u64, q: u64) -> QSurd {
    let qi = q as i64;
    let coef = BigRational::one() + rat(n as i64 * (qi - 1), qi + 1);
    QSurd::new(coef, -(n as i64), q)
}

/// `ρ = 2√q/(q+1)`.
pub fn spectral_radius(q: u64) -> QSurd {
    QSurd::new(rat(2, q as i64 + 1), 1, q)
}

impl ExactKernel for GroundStateKernel {
    type State = u64;
    fn transitions(&self, n: &u64) -> Vec<(u64, BigRational)> {
        let base = RadialKernel { q: self.q }.transitions(n);
        let denom = spectral_radius(self.q).mul(&phi0_tree(*n, self.q));
        base.into_iter()
            .map(|(m, p)| {
                let w = phi0_tree(m, self.q).scale(&p).div(&denom);
                let exact = w.to_rational().expect("sqrt(q) must cancel in the ground-state kernel");
                (m, exact)
            })
            .collect()
    }
}

impl ExactKernel for Bessel3Kernel {
    type State = u64;
    fn transitions(&self, &n: &u64) -> Vec<(u64, BigRational)> {
        if n == 0 {
            return vec![(1, BigRational::one())];
        }
        let n1 = n as i64 + 1;
        vec![(n - 1, rat(n as i64, 2 * n1)), (n + 1, rat(n as i64 + 2, 2 * n1))]
    }
}

impl ExactKernel for HeightKernel {
    type State = i64;
    fn transitions(&self, &n: &i64) -> Vec<(i64, BigRational)> {
        let q = self.q as i64;
        vec![(n - 1, rat(1, q + 1)), (n + 1, rat(q, q + 1))]
    }
}

impl ExactKernel for GraphKernel {
    type State = GraphNode;
    fn transitions(&self, s: &GraphNode) -> Vec<(GraphNode, BigRational)> {
        let half = rat(1, 2);
        if s.x == s.y {
            let k = s.x;
            let up = (GraphNode::new(k + 1, k + 1), half);
            match *self {
                GraphKernel::Finite(q) => {
                    let q = q as i64;
                    vec![
                        (GraphNode::new(k - 1, k - 1), rat(1, 2 * q)),
                        up,
                        (GraphNode::new(k + 1, k - 1), rat(q - 1, 2 * q)),
                    ]
                }
                GraphKernel::Limit => vec![up, (GraphNode::new(k + 1, k - 1), rat(1, 2))],
            }
        } else {
            vec![
                (GraphNode::new(s.x - 1, s.y + 1), half.clone()),
                (GraphNode::new(s.x + 1, s.y - 1), half),
            ]
        }
    }
}

/// Finite-support probability law with exact masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution<S: Ord> {
    masses: BTreeMap<S, BigRational>,
}

impl<S: Ord + Clone> ExactDistribution<S> {
    pub fn point_mass(s: S) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(s, BigRational::one());
        Self { masses }
    }

    /// Builds a law from `(state, mass)` pairs, merging repeats and dropping zeros.
    pub fn from_masses(pairs: impl IntoIterator<Item = (S, BigRational)>) -> Self {
        let mut masses: BTreeMap<S, BigRational> = BTreeMap::new();
        for (s, p) in pairs {
            *masses.entry(s).or_insert_with(BigRational::zero) += p;
        }
        masses.retain(|_, p| !p.is_zero());
        Self { masses }
    }

    pub fn mass(&self, s: &S) -> BigRational {
        self.masses.get(s).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.masses.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &BigRational)> {
        self.masses.iter()
    }

    /// Image law under `f`.
    pub fn map<T: Ord + Clone>(&self, mut f: impl FnMut(&S) -> T) -> ExactDistribution<T> {
        ExactDistribution::from_masses(self.masses.iter().map(|(s, p)| (f(s), p.clone())))
    }

    /// True when every mass is nonnegative and the total is exactly one.
    pub fn is_probability(&self) -> bool {
        self.masses.values().all(|p| !p.is_negative()) && self.total().is_one()
    }
}

/// Exact law after `n` steps of `kernel` started at `start`.
pub fn exact_distribution<K: ExactKernel>(
    kernel: &K,
    start: K::State,
    n: usize,
) -> Result<ExactDistribution<K::State>> {
    exact_distribution_capped(kernel, start, n, STATE_CAP)
}

/// [`exact_distribution`] with an explicit support cap.
pub fn exact_distribution_capped<K: ExactKernel>(
    kernel: &K,
    start: K::State,
    n: usize,
    cap: usize,
) -> Result<ExactDistribution<K::State>> {
    let mut cur: BTreeMap<K::State, BigRational> = BTreeMap::new();
    cur.insert(start, BigRational::one());
    for _ in 0..n {
        let mut next: BTreeMap<K::State, BigRational> = BTreeMap::new();
        for (s, p) in &cur {
            for (t, w) in kernel.transitions(s) {
                if w.is_zero() {
                    continue;
                }
                *next.entry(t).or_insert_with(BigRational::zero) += p * w;
            }
            if next.len() > cap {
                return Err(Error::StateExplosion(cap));
            }
        }
        cur = next;
    }
    Ok(ExactDistribution { masses: cur })
}

fn counts_to_law(counts: BTreeMap<u64, u64>, n: usize) -> ExactDistribution<u64> {
    let denom = num_traits::pow(BigInt::from(2), n);
    ExactDistribution::from_masses(
        counts.into_iter().map(|(k, c)| (k, BigRational::new(BigInt::from(c), denom.clone()))),
    )
}

/// Law of `2M_n − Σ_n` for simple symmetric walk `Σ` and its running
/// maximum `M` (with `M_0 = Σ_0 = 0`), by dynamic programming over `(Σ, M)`.
pub fn pitman_walk_distribution(n: usize) -> Result<ExactDistribution<u64>> {
    if n > 62 {
        return Err(Error::InvalidParameter("path counts must fit in 64 bits"));
    }
    let mut cur: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    cur.insert((0, 0), 1);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (&(s, m), &c) in &cur {
            for step in [-1, 1] {
                let s2 = s + step;
                *next.entry((s2, m.max(s2))).or_insert(0) += c;
            }
        }
        cur = next;
    }
    let mut counts = BTreeMap::new();
    for ((s, m), c) in cur {
        *counts.entry((2 * m - s) as u64).or_insert(0) += c;
    }
    Ok(counts_to_law(counts, n))
}

/// Same law as [`pitman_walk_distribution`] by enumerating all `2^n` paths.
pub fn pitman_walk_enumerated(n: usize) -> Result<ExactDistribution<u64>> {
    if n > 24 {
        return Err(Error::InvalidParameter("enumeration is limited to n <= 24"));
    }
    let mut counts = BTreeMap::new();
    for bits in 0u64..(1u64 << n) {
        let (mut s, mut m) = (0i64, 0i64);
        for k in 0..n {
            s += if bits >> k & 1 == 1 { 1 } else { -1 };
            m = m.max(s);
        }
        *counts.entry((2 * m - s) as u64).or_insert(0) += 1;
    }
    Ok(counts_to_law(counts, n))
}

/// `|R^(0)(n,n+1) − B(n,n+1)|` as an exact rational.
pub fn kernel_gap(q: u64, n: u64) -> BigRational {
    let up = |t: Vec<(u64, BigRational)>| {
        t.into_iter().find(|(m, _)| *m == n + 1).map(|(_, p)| p).unwrap_or_else(BigRational::zero)
    };
    let a = up(GroundStateKernel { q }.transitions(&n));
    let b = up(Bessel3Kernel.transitions(&n));
    (a - b).abs()
}

/// `max_{n ≤ n_max} |R^(0)(n,n+1) − B(n,n+1)|`.
pub fn kernel_gap_max(q: u64, n_max: u64) -> BigRational {
    (0..=n_max).map(|n| kernel_gap(q, n)).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_sum<K: ExactKernel>(k: &K, s: &K::State) -> BigRational {
        k.transitions(s).into_iter().fold(BigRational::zero(), |a, (_, p)| a + p)
    }

    #[test]
    fn radial_kernel_entries() {
        let k = RadialKernel { q: 3 };
        assert_eq!(k.transitions(&0), vec![(1, BigRational::one())]);
        assert_eq!(k.transitions(&3), vec![(2, rat(1, 4)), (4, rat(3, 4))]);
        for n in 0..=50 {
            assert!(row_sum(&k, &n).is_one());
        }
    }

    #[test]
    fn phi0_values_and_eigen_identity() {
        assert_eq!(phi0_tree(0, 5).to_rational(), Some(BigRational::one()));
        assert_eq!(phi0_tree(2, 4).to_rational(), Some(rat(11, 5) / BigRational::from_integer(4.into())));
        for q in [2u64, 3, 7] {
            let r = RadialKernel { q };
            let rho = spectral_radius(q);
            for n in 0..=30u64 {
                let lhs = r
                    .transitions(&n)
                    .into_iter()
                    .map(|(m, p)| phi0_tree(m, q).scale(&p))
                    .reduce(|a, b| a.checked_add(&b).unwrap())
                    .unwrap();
                assert_eq!(lhs, rho.mul(&phi0_tree(n, q)), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn ground_state_kernel_entries() {
        for q in [2u64, 3, 10] {
            let k = GroundStateKernel { q };
            assert_eq!(k.transitions(&0), vec![(1, BigRational::one())]);
            let up = k.transitions(&1).into_iter().find(|(m, _)| *m == 2).unwrap().1;
            assert_eq!(up, rat(3 * q as i64 - 1, 4 * q as i64));
            for n in 0..=40 {
                assert!(row_sum(&k, &n).is_one());
            }
        }
    }

    #[test]
    fn bessel3_entries() {
        let b = Bessel3Kernel;
        assert_eq!(b.transitions(&0), vec![(1, BigRational::one())]);
        assert_eq!(b.transitions(&1), vec![(0, rat(1, 4)), (2, rat(3, 4))]);
        for n in 0..=50 {
            assert!(row_sum(&b, &n).is_one());
        }
    }

    #[test]
    fn height_eigenfunction() {
        // f(n) = q^{−n/2}: H f = ρ f exactly
        for q in [2u64, 5] {
            let h = HeightKernel { q };
            for n in -10i64..=10 {
                let lhs = h
                    .transitions(&n)
                    .into_iter()
                    .map(|(m, p)| QSurd::new(p, -m, q))
                    .reduce(|a, b| a.checked_add(&b).unwrap())
                    .unwrap();
                assert_eq!(lhs, spectral_radius(q).mul(&QSurd::new(BigRational::one(), -n, q)));
            }
        }
    }

    #[test]
    fn graph_kernel_entries() {
        let g = GraphKernel::Finite(3);
        let t = g.transitions(&GraphNode::new(0, 0));
        assert!(t.contains(&(GraphNode::new(1, 1), rat(1, 2))));
        assert!(t.contains(&(GraphNode::new(-1, -1), rat(1, 6))));
        assert!(t.contains(&(GraphNode::new(1, -1), rat(1, 3))));
        let l = GraphKernel::Limit.transitions(&GraphNode::new(0, 0));
        assert!(l.iter().all(|(s, _)| *s != GraphNode::new(-1, -1)));
        let off = g.transitions(&GraphNode::new(4, 0));
        assert_eq!(off, vec![(GraphNode::new(3, 1), rat(1, 2)), (GraphNode::new(5, -1), rat(1, 2))]);
    }

    #[test]
    fn small_laws() {
        let d0 = exact_distribution(&Bessel3Kernel, 0, 0).unwrap();
        assert_eq!(d0, ExactDistribution::point_mass(0));
        let d2 = exact_distribution(&Bessel3Kernel, 0, 2).unwrap();
        assert_eq!(d2, ExactDistribution::from_masses([(0, rat(1, 4)), (2, rat(3, 4))]));
        assert_eq!(pitman_walk_distribution(1).unwrap(), ExactDistribution::point_mass(1));
        assert_eq!(pitman_walk_distribution(2).unwrap(), d2);
        assert_eq!(pitman_walk_enumerated(2).unwrap(), d2);
        let g = exact_distribution(&GraphKernel::Finite(2), GraphNode::new(0, 0), 50).unwrap();
        assert!(g.is_probability());
    }

    #[test]
    fn state_cap_triggers() {
        // a kernel with exponentially many reachable states
        struct Doubling;
        impl ExactKernel for Doubling {
            type State = u64;
            fn transitions(&self, s: &u64) -> Vec<(u64, BigRational)> {
                vec![(2 * s, rat(1, 2)), (2 * s + 1, rat(1, 2))]
            }
        }
        assert!(matches!(exact_distribution_capped(&Doubling, 0, 25, 1000), Err(Error::StateExplosion(1000))));
        assert_eq!(exact_distribution_capped(&Doubling, 0, 9, 1000).unwrap().support_len(), 512);
    }

    #[test]
    fn kernel_gap_closed_form() {
        // R^(0)(n,n+1) − B(n,n+1) = −1/((n+1)(q(n+1)−n+1)) for n ≥ 1
        for q in [4u64, 9] {
            assert!(kernel_gap(q, 0).is_zero());
            for n in 1..=10u64 {
                let want = rat(1, ((n + 1) * (q * (n + 1) - n + 1)) as i64);
                assert_eq!(kernel_gap(q, n), want);
            }
            assert_eq!(kernel_gap_max(q, 10), rat(1, 4 * q as i64));
        }
    }
}
