//! Dense linear algebra for the tiny matrices (p ≤ 6) and the thin
//! p×(q−p) blocks used by the matrix processes.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, Zero};

use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self { rows, cols, data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · other*` without materializing the adjoint.
    pub fn mul_adjoint(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "mul_adjoint shape mismatch");
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                out[(i, j)] = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_zero()))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant of a real square matrix (row-major) by partial-pivot elimination.
pub fn det_real(n: usize, entries: &[f64]) -> f64 {
    assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap())
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor != 0.0 {
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
            }
        }
    }
    det
}

/// Solves the real system `a·x = b` (row-major `a`) by partial-pivot
/// elimination. Returns `None` for an exactly singular matrix.
pub fn solve_real(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).unwrap())
            .unwrap();
        if m[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
            }
            x.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            for j in col..n {
                m[row * n + j] -= f * m[col * n + j];
            }
            x[row] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal, by forward
/// substitution. The result is lower triangular with exact zeros above.
pub fn lower_triangular_inverse(l: &CMat) -> CMat {
    let n = l.rows();
    let mut inv = CMat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = l[(j, j)].inv();
        for i in j + 1..n {
            let mut s = Complex64::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Solves `l · X = rhs` for lower-triangular `l`.
pub fn lower_triangular_solve(l: &CMat, rhs: &CMat) -> CMat {
    let n = l.rows();
    assert_eq!(rhs.rows(), n);
    let mut x = rhs.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik.is_zero() {
                continue;
            }
            for j in 0..rhs.cols() {
                let v = x[(k, j)];
                x[(i, j)] -= lik * v;
            }
        }
        let d = l[(i, i)];
        for j in 0..rhs.cols() {
            x[(i, j)] /= d;
        }
    }
    x
}

/// Product of two lower-triangular matrices touching only the lower triangle.
fn lower_mul(a: &CMat, b: &CMat) -> CMat {
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

/// Exponential of a lower-triangular matrix.
///
/// Scaling and squaring with a Taylor kernel, restricted to the lower
/// triangle so the upper triangle stays exactly zero; the diagonal is then
/// set to `exp(a_ii)`, its exact value.
pub fn expm_lower_triangular(a: &CMat) -> CMat {
    let n = a.rows();
    debug_assert!(a.is_lower_triangular());
    let norm = a.max_abs() * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a.scale(scale);
    let mut result = CMat::identity(n);
    let mut term = CMat::identity(n);
    for k in 1..=18 {
        term = lower_mul(&term, &scaled).scale(1.0 / k as f64);
        if term.max_abs() == 0.0 {
            break;
        }
        result = result.add(&term);
        if term.max_abs() < 1e-18 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = lower_mul(&result, &result);
    }
    for i in 0..n {
        result[(i, i)] = a[(i, i)].exp();
    }
    result
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted in decreasing order.
pub fn hermitian_eigenvalues(h: &CMat) -> Result<Vec<f64>> {
    let n = h.rows();
    assert_eq!(n, h.cols());
    let mut a = h.clone();
    // symmetrize against round-off in the input
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // apq = mag·e^{iφ}; rotate in the (p,q) plane after removing the phase.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Unitary J with columns p, q: J_pp = c, J_qp = -s·conj(phase), J_pq = s·phase, J_qq = c
                let jpp = Complex64::new(c, 0.0);
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                let jqq = Complex64::new(c, 0.0);
                // A ← J* A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::zero();
                a[(q, p)] = Complex64::zero();
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    Err(Error::JacobiNonconvergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_permutation_and_singular() {
        assert_eq!(det_real(2, &[0.0, 1.0, 1.0, 0.0]), -1.0);
        assert_eq!(det_real(2, &[1.0, 2.0, 2.0, 4.0]), 0.0);
        let d = det_real(3, &[2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 1.0]);
        // cofactor expansion: 2(3-2) - 0 + 1(1-3) = 0
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn solve_small_system() {
        let x = solve_real(3, &[0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 4.0, 0.0, 1.0], &[5.0, 5.0, 7.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(solve_real(2, &[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_on_2x2_complex() {
        // [[2, i],[−i, 2]] has eigenvalues 3 and 1
        let h = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => Complex64::new(2.0, 0.0),
            (0, 1) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, -1.0),
        });
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangular_inverse_roundtrip() {
        let l = CMat::from_fn(3, 3, |i, j| {
            if j > i {
                Complex64::zero()
            } else if i == j {
                Complex64::new(1.0 + i as f64, 0.0)
            } else {
                Complex64::new(0.3 * (i + j) as f64, -0.2)
            }
        });
        let prod = l.matmul(&lower_triangular_inverse(&l));
        assert!(prod.sub(&CMat::identity(3)).max_abs() < 1e-14);
        let rhs = CMat::from_real(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = lower_triangular_solve(&l, &rhs);
        assert!(l.matmul(&x).sub(&rhs).max_abs() < 1e-13);
    }

    #[test]
    fn expm_matches_two_by_two_closed_form() {
        let (a, b, c) = (0.3, -0.4, 0.7);
        let m = CMat::from_real(2, 2, &[a, 0.0, c, b]);
        let e = expm_lower_triangular(&m);
        let off = c * (a.exp() - b.exp()) / (a - b);
        assert!((e[(1, 0)].re - off).abs() < 1e-14);
        assert_eq!(e[(0, 1)], Complex64::zero());
        assert_eq!(e[(0, 0)].re, a.exp());
    }
}
