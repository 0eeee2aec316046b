//! Small structured linear-algebra kernels: symmetric tridiagonal matrices,
//! their Cholesky factors, general banded LU with partial pivoting, and a
//! complex tridiagonal LU used by the Crank–Nicolson step.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix. `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Leading principal `n x n` block.
    pub fn leading(&self, n: usize) -> Self {
        assert!(n <= self.len());
        Self {
            diag: self.diag[..n].to_vec(),
            off: self.off[..n.saturating_sub(1)].to_vec(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SymTridiag) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + alpha * b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    pub fn matvec_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = x[i] * self.diag[i];
            if i > 0 {
                s += x[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                s += x[i + 1] * self.off[i];
            }
            y[i] = s;
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.len();
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = self.off[i];
                a[(i + 1, i)] = self.off[i];
            }
        }
        a
    }

    /// Number of negative pivots of `self - sigma * b` (Sylvester inertia).
    /// For a positive definite `b` this counts eigenvalues of the pencil
    /// below `sigma`.
    pub fn count_below(&self, b: &SymTridiag, sigma: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut d_prev = 1.0;
        let mut e_prev = 0.0;
        for i in 0..n {
            let a = self.diag[i] - sigma * b.diag[i];
            let mut d = if i == 0 { a } else { a - e_prev * e_prev / d_prev };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
            if i + 1 < n {
                e_prev = self.off[i] - sigma * b.off[i];
            }
            d_prev = d;
        }
        count
    }
}

/// Cholesky factor `A = L L^T` of a symmetric positive definite tridiagonal
/// matrix; `L` is lower bidiagonal.
#[derive(Debug, Clone)]
pub struct TridiagCholesky {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn new(a: &SymTridiag) -> Result<Self> {
        let n = a.len();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut p = a.diag[i];
            if i > 0 {
                p -= sub[i - 1] * sub[i - 1];
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::LinearAlgebra(format!(
                    "matrix not positive definite (pivot {p:e} at row {i})"
                )));
            }
            diag[i] = p.sqrt();
            if i + 1 < n {
                sub[i] = a.off[i] / diag[i];
            }
        }
        Ok(Self { diag, sub })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// In-place `x <- L^{-1} x`.
    pub fn forward(&self, x: &mut [f64]) {
        let n = self.len();
        x[0] /= self.diag[0];
        for i in 1..n {
            x[i] = (x[i] - self.sub[i - 1] * x[i - 1]) / self.diag[i];
        }
    }

    /// In-place `x <- L^{-T} x`.
    pub fn backward(&self, x: &mut [f64]) {
        let n = self.len();
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sub[i] * x[i + 1]) / self.diag[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    pub fn solve_complex(&self, b: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = b.iter().map(|z| z.re).collect();
        let im: Vec<f64> = b.iter().map(|z| z.im).collect();
        let re = self.solve(&re);
        let im = self.solve(&im);
        re.into_iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }

    /// Dense congruence `L^{-1} A L^{-T}` of a symmetric matrix.
    pub fn congruence(&self, a: &Mat<f64>) -> Mat<f64> {
        let n = self.len();
        assert_eq!((a.nrows(), a.ncols()), (n, n));
        // Columns are contiguous: Y = L^{-1} A, then C = L^{-1} Y^T.
        let mut y = a.to_owned();
        for j in 0..n {
            self.forward(y.col_mut(j).try_as_col_major_mut().expect("contiguous").as_slice_mut());
        }
        let mut c = y.transpose().to_owned();
        for j in 0..n {
            self.forward(c.col_mut(j).try_as_col_major_mut().expect("contiguous").as_slice_mut());
        }
        c
    }
}

/// General band matrix with `kl` sub- and `ku` super-diagonals, stored row
/// wise with room for the pivoting fill-in of an LU factorization.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `value` at `(i, j)`; panics outside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += value;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    /// LU factorization with partial pivoting (consumes the matrix).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut pivots = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * 1e-3;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) || !best.is_finite() {
                return Err(Error::LinearAlgebra(format!(
                    "zero pivot in banded LU at column {k}"
                )));
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = self.slot(i, k);
                let l = self.data[sik] / pivot;
                self.data[sik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let skj = self.slot(k, j);
                        let sij = self.slot(i, j);
                        self.data[sij] -= l * self.data[skj];
                    }
                }
            }
        }
        Ok(BandedLu { a: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    a: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.n;
        let kl = self.a.kl;
        let reach = self.a.kl + self.a.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.a.get(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.a.get(k, j) * x[j];
            }
            x[k] = s / self.a.get(k, k);
        }
        x
    }
}

/// LU factorization (no pivoting) of a complex symmetric tridiagonal matrix
/// whose Hermitian part is positive definite, as in `M + i dt/2 A`.
#[derive(Debug, Clone)]
pub struct ComplexTridiagLu {
    /// `U` diagonal.
    diag: Vec<Complex64>,
    /// `U` super-diagonal (equal to the original off-diagonal).
    upper: Vec<Complex64>,
    /// `L` multipliers.
    lower: Vec<Complex64>,
}

impl ComplexTridiagLu {
    pub fn new(diag: &[Complex64], off: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let mut lower = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        d[0] = diag[0];
        for i in 1..n {
            if d[i - 1].norm() == 0.0 {
                return Err(Error::LinearAlgebra(format!(
                    "zero pivot in complex tridiagonal LU at row {}",
                    i - 1
                )));
            }
            lower[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - lower[i - 1] * off[i - 1];
        }
        if d[n - 1].norm() == 0.0 {
            return Err(Error::LinearAlgebra("zero final pivot".into()));
        }
        Ok(Self {
            diag: d,
            upper: off.to_vec(),
            lower,
        })
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.diag.len();
        for i in 1..n {
            let prev = x[i - 1];
            x[i] -= self.lower[i - 1] * prev;
        }
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] = (x[i] - self.upper[i] * next) / self.diag[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        }
    }

    #[test]
    fn cholesky_solves_tridiagonal_system() {
        let a = laplacian(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 0.3).collect();
        let b = a.matvec(&x);
        let got = TridiagCholesky::new(&a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = laplacian(4);
        a.diag[2] = -3.0;
        assert!(TridiagCholesky::new(&a).is_err());
    }

    #[test]
    fn congruence_matches_dense_product() {
        let m = SymTridiag {
            diag: vec![4.0, 5.0, 6.0],
            off: vec![1.0, -0.5],
        };
        let chol = TridiagCholesky::new(&m).unwrap();
        let rows = [[1.0, 2.0, 0.5], [2.0, -1.0, 3.0], [0.5, 3.0, 2.0]];
        let a = Mat::from_fn(3, 3, |i, j| rows[i][j]);
        let c = chol.congruence(&a);
        // L C L^T must reproduce A.
        let mut l = Mat::<f64>::zeros(3, 3);
        l[(0, 0)] = chol.diag[0];
        l[(1, 1)] = chol.diag[1];
        l[(2, 2)] = chol.diag[2];
        l[(1, 0)] = chol.sub[0];
        l[(2, 1)] = chol.sub[1];
        let back = &l * &c * l.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // eigenvalues of the 1D Laplacian: 2 - 2 cos(k pi / (n + 1))
        let n = 10;
        let a = laplacian(n);
        let id = SymTridiag {
            diag: vec![1.0; n],
            off: vec![0.0; n - 1],
        };
        let eig: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        for (k, &lam) in eig.iter().enumerate() {
            assert_eq!(a.count_below(&id, lam - 1e-9), k);
            assert_eq!(a.count_below(&id, lam + 1e-9), k + 1);
        }
    }

    #[test]
    fn banded_lu_needs_pivoting() {
        // zero leading diagonal forces a row swap
        let mut a = BandedMatrix::zeros(4, 1, 1);
        let dense = [
            [0.0, 2.0, 0.0, 0.0],
            [1.0, 1.0, 3.0, 0.0],
            [0.0, 4.0, 0.0, 1.0],
            [0.0, 0.0, 2.0, 5.0],
        ];
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    a.add(i, j, v);
                }
            }
        }
        let x = [1.0, -2.0, 0.5, 3.0];
        let b = a.matvec(&x);
        let got = a.factor().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn banded_lu_reports_singular() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 1.0);
        a.add(2, 2, 1.0);
        assert!(a.factor().is_err());
    }

    proptest! {
        #[test]
        fn banded_lu_round_trip(
            seed in proptest::collection::vec(-1.0f64..1.0, 7 * 40),
            rhs in proptest::collection::vec(-1.0f64..1.0, 40),
        ) {
            let n = 40;
            let (kl, ku) = (3, 2);
            let mut a = BandedMatrix::zeros(n, kl, ku);
            let mut k = 0;
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v = seed[k % seed.len()] + if i == j { 4.0 } else { 0.0 };
                    a.add(i, j, v);
                    k += 1;
                }
            }
            let b = a.matvec(&rhs);
            let x = a.clone().factor().unwrap().solve(&b);
            for (g, e) in x.iter().zip(&rhs) {
                prop_assert!((g - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complex_tridiagonal_solve() {
        let n = 5;
        let diag: Vec<Complex64> = (0..n).map(|i| Complex64::new(3.0, 0.2 * i as f64)).collect();
        let off = vec![Complex64::new(0.5, -1.0); n - 1];
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += off[i] * x[i + 1];
            }
        }
        let lu = ComplexTridiagLu::new(&diag, &off).unwrap();
        lu.solve_in_place(&mut b);
        for (g, e) in b.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
    }
}
