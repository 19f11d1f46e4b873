//! Statistical checks for simulated batches.
//!
//! Every test returns a [`TestReport`] whose verdict is `statistic ≤
//! threshold`. Multi-part tests (several bins or test functions) report the
//! worst part as the statistic and keep every part in `parts`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::specialfn::macdonald_k_scaled;
use crate::{Error, Result};

/// Two-sided band for z-scores.
pub const Z_BAND: f64 = 3.0;

/// Minimum batch size for [`ks_two_sample`].
pub const KS_MIN_BATCH: usize = 100;

/// Kurtosis of `e^{λB}` above which [`conditional_law_test`] attaches a warning.
pub const KURTOSIS_CAP: f64 = 1000.0;

/// How a batch was generated.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchMeta {
    pub seed_range: (u64, u64),
    pub dt: f64,
    pub q: Option<u64>,
    pub t: f64,
}

/// Exchangeable replicates, each a fixed-width real vector.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleBatch {
    pub values: Vec<Vec<f64>>,
    pub meta: BatchMeta,
}

impl SampleBatch {
    pub fn new(values: Vec<Vec<f64>>, meta: BatchMeta) -> Self {
        Self { values, meta }
    }

    /// One-column batch.
    pub fn scalars(values: Vec<f64>, meta: BatchMeta) -> Self {
        Self { values: values.into_iter().map(|v| vec![v]).collect(), meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Column `j`; fails if some replicate is narrower.
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|r| r.get(j).copied().ok_or(Error::InvalidParameter("replicate narrower than expected")))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Pass,
    Reject,
}

/// One bin or one test function of a composite test.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestPart {
    pub label: String,
    pub statistic: f64,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub se: Option<f64>,
    pub parts: Vec<TestPart>,
    pub warning: Option<String>,
}

impl TestReport {
    fn new(statistic: f64, threshold: f64, se: Option<f64>, parts: Vec<TestPart>) -> Self {
        let verdict = if statistic <= threshold { Verdict::Pass } else { Verdict::Reject };
        Self { statistic, threshold, verdict, se, parts, warning: None }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // the alternating series converges slowly here; use the theta-dual form
        let s = (1..=20)
            .map(|k| {
                let k = (2 * k - 1) as f64;
                (-k * k * core::f64::consts::PI * core::f64::consts::PI / (8.0 * x * x)).exp()
            })
            .sum::<f64>();
        return 1.0 - (2.0 * core::f64::consts::PI).sqrt() / x * s;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// `x` with `P(K > x) = level`.
pub fn kolmogorov_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain { what: "kolmogorov level", value: level });
    }
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `sup |F_a − F_b|` over sorted inputs.
fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

fn sorted(mut v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN in sample"));
    }
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(v)
}

/// Scaled two-sample KS statistic `√(nm/(n+m))·D`.
fn ks_scaled(a: Vec<f64>, b: Vec<f64>) -> Result<f64> {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let d = ks_distance(&sorted(a)?, &sorted(b)?);
    Ok((n * m / (n + m)).sqrt() * d)
}

/// Two-sample Kolmogorov–Smirnov test on column 0, with the asymptotic threshold.
pub fn ks_two_sample(a: &SampleBatch, b: &SampleBatch, level: f64) -> Result<TestReport> {
    let need = KS_MIN_BATCH;
    for batch in [a, b] {
        if batch.len() < need {
            return Err(Error::UndersizedBatch { got: batch.len(), need });
        }
    }
    let stat = ks_scaled(a.column(0)?, b.column(0)?)?;
    Ok(TestReport::new(stat, kolmogorov_quantile(level)?, None, Vec::new()))
}

/// Twice-differentiable test function for [`generator_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianBump {
    pub center: f64,
    pub width: f64,
}

impl GaussianBump {
    pub fn value(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        (-0.5 * u * u).exp()
    }

    pub fn d1(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        -u / self.width * self.value(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.width;
        (u * u - 1.0) / (self.width * self.width) * self.value(x)
    }
}

fn mean_se(d: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// z-score of `f(X_{t+h}) − f(X_t) − h(½f″ + drift·f′)(X_t)` over replicates
/// `[X_t, X_{t+h}]`.
pub fn generator_test(
    batch: &SampleBatch,
    drift: &dyn Fn(f64) -> Result<f64>,
    f: &GaussianBump,
    h: f64,
) -> Result<TestReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("h must be positive"));
    }
    if batch.len() < 2 {
        return Err(Error::UndersizedBatch { got: batch.len(), need: 2 });
    }
    let x0 = batch.column(0)?;
    let x1 = batch.column(1)?;
    let mut d = Vec::with_capacity(x0.len());
    for (&a, &b) in x0.iter().zip(&x1) {
        d.push(f.value(b) - f.value(a) - h * (0.5 * f.d2(a) + drift(a)? * f.d1(a)));
    }
    let (mean, se) = mean_se(&d);
    if !(se > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let z = mean / se;
    let part = TestPart { label: String::from("z"), statistic: z, estimate: Some(mean), se: Some(se) };
    Ok(TestReport::new(z.abs(), Z_BAND, Some(se), vec![part]))
}

/// Markov test on replicates `[η_early, η_mid, η_end]`.
///
/// Paths are sorted by `η_mid` and cut into `bins` equal-count bins. Inside a
/// bin, consecutive paths form pairs and each pair is split by which member has
/// the larger `η_early`. A Markov process forgets `η_early` once `η_mid` is
/// known, so the two halves share the law of `η_end`; each bin is compared by
/// KS at level `level / bins`.
pub fn markov_property_test(batch: &SampleBatch, bins: usize, level: f64) -> Result<TestReport> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive"));
    }
    let mut rows: Vec<[f64; 3]> = batch
        .values
        .iter()
        .map(|r| match r.as_slice() {
            [a, b, c, ..] => Ok([*a, *b, *c]),
            _ => Err(Error::InvalidParameter("replicate narrower than expected")),
        })
        .collect::<Result<_>>()?;
    if rows.iter().flatten().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN in sample"));
    }
    rows.sort_by(|x, y| x[1].partial_cmp(&y[1]).unwrap());
    let per_bin = rows.len() / bins;
    let need = 2 * KS_MIN_BATCH;
    let threshold = kolmogorov_quantile(level / bins as f64)?;
    let mut parts = Vec::with_capacity(bins);
    let mut worst = 0.0f64;
    for bin in 0..bins {
        let chunk = &rows[bin * per_bin..(bin + 1) * per_bin];
        if chunk.len() < need {
            return Err(Error::SparseBin { bin, got: chunk.len() });
        }
        let (mut hi, mut lo) = (Vec::new(), Vec::new());
        for pair in chunk.chunks_exact(2) {
            let (a, b) = if pair[0][0] >= pair[1][0] { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
            hi.push(a[2]);
            lo.push(b[2]);
        }
        let stat = ks_scaled(hi, lo)?;
        worst = worst.max(stat);
        parts.push(TestPart { label: format!("bin{bin}"), statistic: stat, estimate: None, se: None });
    }
    Ok(TestReport::new(worst, threshold, None, parts))
}

/// Bounded test function of `η` for [`conditional_law_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EtaTestFn {
    /// `1{lo ≤ η < hi}`.
    Indicator { lo: f64, hi: f64 },
    /// Gaussian bump in `log η`.
    LogBump(GaussianBump),
}

impl EtaTestFn {
    pub fn eval(&self, eta: f64) -> f64 {
        match *self {
            EtaTestFn::Indicator { lo, hi } => f64::from(u8::from(eta >= lo && eta < hi)),
            EtaTestFn::LogBump(b) => b.value(eta.ln()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EtaTestFn::Indicator { lo, hi } => format!("1[{lo},{hi})"),
            EtaTestFn::LogBump(b) => format!("bump({},{})", b.center, b.width),
        }
    }
}

/// `K_λ(x)/K_0(x)`.
pub fn macdonald_ratio(lambda: f64, x: f64) -> Result<f64> {
    Ok(macdonald_k_scaled(lambda, x)? / macdonald_k_scaled(0.0, x)?)
}

/// Checks `E[(e^{λB_t} − K_λ(1/η_t)/K_0(1/η_t))·g(η_t)] = 0` for each `g`
/// over replicates `[B_t, η_t]`.
pub fn conditional_law_test(batch: &SampleBatch, lambda: f64, tests: &[EtaTestFn]) -> Result<TestReport> {
    if batch.len() < 2 {
        return Err(Error::UndersizedBatch { got: batch.len(), need: 2 });
    }
    if tests.is_empty() {
        return Err(Error::InvalidParameter("at least one test function is required"));
    }
    let b = batch.column(0)?;
    let eta = batch.column(1)?;
    let mut resid = Vec::with_capacity(b.len());
    let mut expo = Vec::with_capacity(b.len());
    for (&bt, &et) in b.iter().zip(&eta) {
        if !(et > 0.0) {
            return Err(Error::Domain { what: "eta", value: et });
        }
        let e = (lambda * bt).exp();
        expo.push(e);
        resid.push(e - macdonald_ratio(lambda, 1.0 / et)?);
    }
    let mut parts = Vec::with_capacity(tests.len());
    let mut worst = 0.0f64;
    for g in tests {
        let d: Vec<f64> = resid.iter().zip(&eta).map(|(r, &e)| r * g.eval(e)).collect();
        let (mean, se) = mean_se(&d);
        if !(se > 0.0) {
            return Err(Error::DegenerateVariance);
        }
        let z = mean / se;
        worst = worst.max(z.abs());
        parts.push(TestPart { label: g.label(), statistic: z, estimate: Some(mean), se: Some(se) });
    }
    let mut report = TestReport::new(worst, Z_BAND, None, parts);
    let k = kurtosis(&expo);
    if k > KURTOSIS_CAP {
        report.warning = Some(format!("heavy tail: kurtosis of exp(lambda*B) is {k:.1}"));
    }
    Ok(report)
}

/// Non-excess sample kurtosis.
pub fn kurtosis(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{eta_functional, exponential_functional, sample_bm, Noise, TimeGrid};
    use crate::RngStream;

    fn normals(seed: u64, n: usize, shift: f64) -> SampleBatch {
        let mut z = RngStream::new(seed, 0).normals();
        SampleBatch::scalars((0..n).map(|_| z.next() + shift).collect(), BatchMeta::default())
    }

    #[test]
    fn kolmogorov_table_values() {
        // standard critical values of the Kolmogorov distribution
        assert!((kolmogorov_quantile(0.05).unwrap() - 1.3581).abs() < 1e-3);
        assert!((kolmogorov_quantile(0.01).unwrap() - 1.6276).abs() < 1e-3);
        assert!((kolmogorov_sf(0.2) - 1.0).abs() < 1e-6);
        assert!((kolmogorov_sf(0.29999) - kolmogorov_sf(0.30001)).abs() < 1e-4);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a = normals(1, 1000, 0.0);
        let r = ks_two_sample(&a, &a, 0.01).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed());
        let r = ks_two_sample(&normals(1, 10_000, 0.0), &normals(2, 10_000, 0.5), 0.01).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        assert!(matches!(
            ks_two_sample(&normals(1, 99, 0.0), &a, 0.01),
            Err(Error::UndersizedBatch { got: 99, need: 100 })
        ));
    }

    #[test]
    fn ks_handles_ties() {
        let a = SampleBatch::scalars((0..200).map(|i| (i % 4) as f64).collect(), BatchMeta::default());
        let b = SampleBatch::scalars((0..200).map(|i| (i % 4) as f64).rev().collect(), BatchMeta::default());
        assert_eq!(ks_two_sample(&a, &b, 0.01).unwrap().statistic, 0.0);
    }

    #[test]
    fn bump_derivatives() {
        let f = GaussianBump { center: 0.3, width: 0.7 };
        let h = 1e-4;
        for x in [-1.0, 0.0, 0.5, 2.0] {
            let d1 = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
            let d2 = (f.value(x + h) - 2.0 * f.value(x) + f.value(x - h)) / (h * h);
            assert!((d1 - f.d1(x)).abs() < 1e-7);
            assert!((d2 - f.d2(x)).abs() < 1e-5);
        }
    }

    fn bm_pairs(seed: u64, n: usize, h: f64, ou: bool) -> SampleBatch {
        let mut z = RngStream::new(seed, 3).normals();
        let values = (0..n)
            .map(|_| {
                let x0 = if ou { z.next() * 0.5f64.sqrt() } else { z.next() };
                let x1 = if ou {
                    x0 * (-h).exp() + ((1.0 - (-2.0 * h).exp()) / 2.0).sqrt() * z.next()
                } else {
                    x0 + h.sqrt() * z.next()
                };
                vec![x0, x1]
            })
            .collect();
        SampleBatch::new(values, BatchMeta::default())
    }

    #[test]
    fn generator_test_calibration_and_power() {
        let f = GaussianBump { center: 0.0, width: 1.0 };
        let zero = |_: f64| Ok(0.0);
        let ok = generator_test(&bm_pairs(5, 100_000, 1e-3, false), &zero, &f, 1e-3).unwrap();
        assert!(ok.passed(), "{ok:?}");
        let bad = generator_test(&bm_pairs(5, 100_000, 1e-3, true), &zero, &f, 1e-3).unwrap();
        assert!(!bad.passed(), "{bad:?}");
        let ou = |x: f64| Ok(-x);
        assert!(generator_test(&bm_pairs(5, 100_000, 1e-3, true), &ou, &f, 1e-3).unwrap().passed());
        let flat = SampleBatch::new(vec![vec![1.0, 1.0]; 10], BatchMeta::default());
        assert!(matches!(generator_test(&flat, &zero, &f, 1e-3), Err(Error::DegenerateVariance)));
    }

    fn markov_batch(mu: f64, n: usize) -> SampleBatch {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let values = (0..n as u64)
            .map(|i| {
                let b = sample_bm(g, 0.0, Noise::Gaussian(RngStream::new(i, 9)));
                let e = exponential_functional(&b, mu);
                vec![e.values[25], e.values[50], e.values[100]]
            })
            .collect();
        SampleBatch::new(values, BatchMeta::default())
    }

    #[test]
    fn markov_test_separates_mu() {
        let r2 = markov_property_test(&markov_batch(2.0, 20_000), 5, 0.01).unwrap();
        assert!(r2.passed(), "{r2:?}");
        let r3 = markov_property_test(&markov_batch(3.0, 20_000), 5, 0.01).unwrap();
        assert!(!r3.passed(), "{r3:?}");
        assert!(markov_property_test(&markov_batch(2.0, 1000), 5, 0.01).is_ok());
        assert!(matches!(markov_property_test(&markov_batch(2.0, 500), 5, 0.01), Err(Error::SparseBin { .. })));
    }

    #[test]
    fn conditional_law_trivial_at_zero() {
        let g = TimeGrid::new(1.0, 50).unwrap();
        let values = (0..100)
            .map(|i| {
                let b = sample_bm(g, 0.0, Noise::Gaussian(RngStream::new(i, 4)));
                vec![b.last(), eta_functional(&b).last()]
            })
            .collect();
        let batch = SampleBatch::new(values, BatchMeta::default());
        let r = conditional_law_test(&batch, 0.0, &[EtaTestFn::Indicator { lo: 0.0, hi: 1e9 }]);
        // the residual is identically zero at λ = 0
        assert!(matches!(r, Err(Error::DegenerateVariance)));
        assert!((macdonald_ratio(0.0, 0.7).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kurtosis_of_normal_is_three() {
        let b = normals(7, 200_000, 0.0);
        assert!((kurtosis(&b.column(0).unwrap()) - 3.0).abs() < 0.05);
    }
}
