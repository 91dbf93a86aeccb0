//! Dense linear-algebra kit sized for desk-scale chains: a cyclic Jacobi
//! eigensolver for symmetric matrices, LU with partial pivoting, operator
//! power iteration, and compensated summation.

use crate::{Error, Result};

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.row(i)) {
                    *o += vi * a;
                }
            }
        }
        out
    }

    pub fn mat_mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a != 0.0 {
                    let orow = other.row(k);
                    let dst = &mut out.data[i * n..(i + 1) * n];
                    for (d, &b) in dst.iter_mut().zip(orow) {
                        *d += a * b;
                    }
                }
            }
        }
        out
    }
}

/// Neumaier compensated summation. Keeps dot products and probability sums
/// accurate enough for the 1e-12 tolerances used throughout.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Streaming version of [`neumaier_sum`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Eigendecomposition of a symmetric matrix. `values` are sorted in
/// descending order and `vectors` holds the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi for symmetric matrices. `tol` bounds the final off-diagonal
/// Frobenius norm relative to the matrix scale.
pub fn jacobi_eigen(a: &DenseMatrix, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = a.n();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    if n <= 1 {
        return Ok(SymmetricEigen { values: m.data().to_vec(), vectors: v });
    }

    let fro = m.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = tol * fro.max(1.0);

    let off_norm = |m: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = m.at(i, j);
                s += 2.0 * x * x;
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&m);
    let mut sweeps = 0usize;
    while off > target {
        if sweeps >= max_sweeps {
            return Err(Error::EigenNotConverged { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq.abs() <= target / (n as f64) {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                *m.at_mut(p, p) = app - t * apq;
                *m.at_mut(q, q) = aqq + t * apq;
                *m.at_mut(p, q) = 0.0;
                *m.at_mut(q, p) = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m.at(i, p);
                        let aiq = m.at(i, q);
                        *m.at_mut(i, p) = c * aip - s * aiq;
                        *m.at_mut(p, i) = m.at(i, p);
                        *m.at_mut(i, q) = s * aip + c * aiq;
                        *m.at_mut(q, i) = m.at(i, q);
                    }
                }
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    *v.at_mut(i, p) = c * vip - s * viq;
                    *v.at_mut(i, q) = s * vip + c * viq;
                }
            }
        }
        off = off_norm(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.at(j, j).partial_cmp(&m.at(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.at(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            *vectors.at_mut(i, k) = v.at(i, src);
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// LU factorization with partial pivoting (Doolittle).
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    let n = a.n();
    let mut lu = a.data().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[col * n + col].abs();
        for r in col + 1..n {
            let v = lu[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-250 {
            return Err(Error::SingularMatrix { col, pivot: pivot_val });
        }
        if pivot_row != col {
            perm.swap(col, pivot_row);
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
        }
        let inv = 1.0 / lu[col * n + col];
        for r in col + 1..n {
            let factor = lu[r * n + col] * inv;
            lu[r * n + col] = factor;
            if factor != 0.0 {
                for j in col + 1..n {
                    lu[r * n + j] -= factor * lu[col * n + j];
                }
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

impl LuFactors {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Inverse via LU; used for the fundamental-matrix hitting-time solve.
pub fn invert(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.n();
    let lu = lu_factor(a)?;
    let mut out = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = lu.solve(&e);
        e[j] = 0.0;
        for i in 0..n {
            *out.at_mut(i, j) = col[i];
        }
    }
    Ok(out)
}

fn seeded_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    // Cheap deterministic pseudo-random start; quality is irrelevant as long
    // as the vector is not orthogonal to the dominant eigenspace.
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = crate::rng::splitmix64(state);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
        for (x, c) in v.iter_mut().zip(b) {
            *x -= dot * c;
        }
    }
}

/// Power iteration for the dominant eigenpair of a symmetric operator,
/// deflating the supplied orthonormal directions.
pub fn dominant_eigenpair(
    n: usize,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    deflate: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut v = seeded_unit_vector(n, 0x5EED);
    orthogonalize(&mut v, deflate);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let mut w = apply(&v);
        orthogonalize(&mut w, deflate);
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let res: f64 = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi) * (wi - lambda * vi))
            .sum::<f64>()
            .sqrt();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Ok((0.0, v));
        }
        for x in &mut w {
            *x /= norm;
        }
        v = w;
        if res <= tol * lambda.abs().max(1.0) {
            return Ok((lambda, v));
        }
    }
    Err(Error::EigenNotConverged { sweeps: max_iter, off_norm: f64::NAN.min(lambda) })
}

/// Spectral-radius estimate of a (possibly non-symmetric) operator via the
/// asymptotic growth rate of repeated application. Handles complex conjugate
/// pairs, where straight power iteration would oscillate.
pub fn growth_rate(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>, iters: usize) -> f64 {
    let mut v = seeded_unit_vector(n, 0xBEEF);
    let mut log_growth = 0.0f64;
    let window = 64.min(iters / 2).max(1);
    let mut tail: Vec<f64> = Vec::with_capacity(window);
    for k in 0..iters {
        let w = apply(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        let step = norm.ln();
        log_growth += step;
        if k + window >= iters {
            tail.push(step);
        }
        v = w;
        for x in &mut v {
            *x /= norm;
        }
    }
    let _ = log_growth;
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_small_symmetric() {
        let a = DenseMatrix::from_fn(3, |i, j| {
            [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]][i][j]
        });
        let eig = jacobi_eigen(&a, 1e-12, 64).unwrap();
        // Tridiagonal Toeplitz: 2 + 2cos(kπ/4), k=1..3.
        let expected = [
            2.0 + std::f64::consts::SQRT_2,
            2.0,
            2.0 - std::f64::consts::SQRT_2,
        ];
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        // Reconstruction: A = V Λ Vᵀ.
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += eig.vectors.at(i, k) * eig.values[k] * eig.vectors.at(j, k);
                }
                assert!((s - a.at(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lu_solves_small_system() {
        let a = DenseMatrix::from_fn(3, |i, j| {
            [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]][i][j]
        });
        let lu = lu_factor(&a).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve(&b);
        let back = a.mul_vec(&x);
        for (g, w) in back.iter().zip(b) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = DenseMatrix::from_fn(2, |i, _| if i == 0 { 1.0 } else { 2.0 });
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn invert_round_trips() {
        let a = DenseMatrix::from_fn(4, |i, j| if i == j { 2.0 } else { 0.25 });
        let inv = invert(&a).unwrap();
        let prod = a.mat_mul(&inv);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.at(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn power_iteration_matches_jacobi() {
        let a = DenseMatrix::from_fn(8, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        let eig = jacobi_eigen(&a, 1e-12, 64).unwrap();
        let (top, _) = dominant_eigenpair(8, |v| a.mul_vec(v), &[], 1e-12, 100_000).unwrap();
        assert!((top - eig.values[0]).abs() < 1e-8);
    }

    #[test]
    fn neumaier_handles_cancellation() {
        let s = neumaier_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
