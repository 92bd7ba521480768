//! Symmetric banded matrices (lower band stored row-wise).

use nalgebra::{DMatrix, DVector};

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SymBand<T = f64> {
    n: usize,
    bw: usize,
    // row i holds (i, i), (i, i-1), ..., (i, i-bw)
    data: Vec<T>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![T::zero(); n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bw && i < self.n).then(|| i * (self.bw + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)` (and by symmetry `(j, i)`).
    ///
    /// Panics when the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band {}", self.bw));
        self.data[s] += v;
    }

    /// Removes the first and last rows/columns.
    pub fn strip_boundary(&self) -> Self {
        assert!(self.n >= 2);
        let n = self.n - 2;
        let mut out = Self::zeros(n, self.bw);
        for i in 0..n {
            for j in i.saturating_sub(self.bw)..=i {
                out.data[i * (self.bw + 1) + (i - j)] = self.get(i + 1, j + 1);
            }
        }
        out
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        Self {
            n: self.n,
            bw: self.bw,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            y[i] += row[0] * x[i];
            for (d, &a) in row.iter().enumerate().take(self.bw.min(i) + 1).skip(1) {
                let j = i - d;
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        self.matvec(x)
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Banded Cholesky; `false` when a pivot is not strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        let bw = self.bw;
        let mut l = self.data.clone();
        let idx = |i: usize, j: usize| i * (bw + 1) + (i - j);
        for i in 0..self.n {
            for j in i.saturating_sub(bw)..=i {
                let mut s = l[idx(i, j)];
                for k in i.saturating_sub(bw).max(j.saturating_sub(bw))..j {
                    s -= l[idx(i, k)] * l[idx(j, k)];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return false;
                    }
                    l[idx(i, i)] = s.sqrt();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        true
    }

    /// Number of negative pivots of the LDL^T factorization of `self - shift * other`,
    /// which by Sylvester's law of inertia counts the eigenvalues of the pencil
    /// `(self, other)` below `shift` when `other` is positive definite.
    pub fn count_below(&self, other: &Self, shift: T) -> usize {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        let bw = self.bw;
        let w = bw + 1;
        let n = self.n;
        // a[i][d] = A(i, i-d); overwritten by L(i, i-d) for d > 0 and D(i) for d = 0
        let mut a: Vec<T> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&k, &m)| k - shift * m)
            .collect();
        let tiny = T::from_f64(f64::MIN_POSITIVE);
        let mut negatives = 0;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                // L(i,j) D(j) = A(i,j) - sum_k L(i,k) D(k) L(j,k)
                let mut s = a[i * w + (i - j)];
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= a[i * w + (i - k)] * a[k * w] * a[j * w + (j - k)];
                }
                a[i * w + (i - j)] = s / a[j * w];
            }
            let mut d = a[i * w];
            for k in lo..i {
                let lik = a[i * w + (i - k)];
                d -= lik * lik * a[k * w];
            }
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < T::zero() {
                negatives += 1;
            }
            a[i * w] = d;
        }
        negatives
    }
}

impl SymBand<f64> {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn quad_form_vec(&self, x: &DVector<f64>) -> f64 {
        self.quad_form(x.as_slice())
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// Widens to another precision entrywise.
    pub fn cast<U: Real>(&self) -> SymBand<U> {
        SymBand {
            n: self.n,
            bw: self.bw,
            data: self.data.iter().map(|&v| U::from_f64(v)).collect(),
        }
    }
}
