//! Generalized symmetric-definite eigenproblems `K v = mu M v`.
//!
//! Full spectra come from a dense solve: `M = L L^T`, then the standard
//! problem `L^-1 K L^-T w = mu w`, then `v = L^-T w`. Single low eigenvalues
//! can instead be located to any working precision by bisection on the
//! inertia of `K - sigma M` (Sylvester's law), which needs only banded
//! factorizations.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::assembly::Pencil;
use crate::banded::SymBand;
use crate::error::{Error, Result};
use crate::real::Real;

const EIGEN_MAX_ITERATIONS: usize = 0; // nalgebra: 0 means iterate until convergence
const BISECTION_MAX_STEPS: usize = 400;

#[derive(Debug, Clone)]
enum Vectors {
    Dense(DMatrix<f64>),
    /// Columns of the 1D spectrum; 2D vectors are formed on demand.
    Kronecker(DMatrix<f64>),
}

/// Ascending eigenvalues with M-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Vectors,
    index_map: Option<Vec<(usize, usize)>>,
}

impl Spectrum {
    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector of the `i`-th (0-based) eigenvalue.
    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        match &self.vectors {
            Vectors::Dense(v) => v.column(i).into_owned(),
            Vectors::Kronecker(v) => {
                let (j, k) = self.index_map.as_ref().expect("2D spectrum has an index map")[i];
                let a = v.column(j - 1);
                let b = v.column(k - 1);
                a.kronecker(&b)
            }
        }
    }

    /// Dense eigenvector matrix (1D spectra and explicit 2D solves).
    pub fn dense_vectors(&self) -> Option<&DMatrix<f64>> {
        match &self.vectors {
            Vectors::Dense(v) => Some(v),
            Vectors::Kronecker(_) => None,
        }
    }

    /// For composed 2D spectra, the 1-based 1D mode pair `(j, k)` of each entry.
    pub fn index_map(&self) -> Option<&[(usize, usize)]> {
        self.index_map.as_deref()
    }
}

/// Dense solve of `K v = mu M v`; eigenvectors M-normalized with their
/// largest-magnitude entry positive, eigenvalues ascending.
pub fn solve_dense(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = check_square(k, m)?;
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let a = reduce(&l, k)?;
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;
    let lt = l.transpose();
    let v = lt
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        if !eig.eigenvalues[i].is_finite() {
            return Err(Error::EigenFailure(format!("non-finite eigenvalue at index {c}")));
        }
        vals.push(eig.eigenvalues[i]);
        let mut col = v.column(i).into_owned();
        let norm = (col.dot(&(m * &col))).sqrt();
        col /= norm;
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vecs.set_column(c, &col);
    }
    Ok((vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_dense(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(k, m)?;
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let a = reduce(&chol.l(), k)?;
    let mut vals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn check_square(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<usize> {
    let n = k.nrows();
    if k.shape() != (n, n) || m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "K is {:?}, M is {:?}",
            k.shape(),
            m.shape()
        )));
    }
    Ok(n)
}

// L^-1 K L^-T, symmetrized
fn reduce(l: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let singular = || Error::EigenFailure("singular Cholesky factor".into());
    let x = l.solve_lower_triangular(k).ok_or_else(singular)?;
    let a = l.solve_lower_triangular(&x.transpose()).ok_or_else(singular)?;
    Ok((&a + a.transpose()) * 0.5)
}

/// Full spectrum of a 1D pencil.
pub fn solve_pencil(pencil: &Pencil) -> Result<Spectrum> {
    let (eigenvalues, v) = solve_dense(&pencil.dense_stiffness(), &pencil.dense_mass())?;
    Ok(Spectrum {
        dim: 1,
        eigenvalues,
        vectors: Vectors::Dense(v),
        index_map: None,
    })
}

/// Spectrum of an explicit 2D pencil `(K2, M2)`.
pub fn solve_explicit_2d(k2: &DMatrix<f64>, m2: &DMatrix<f64>) -> Result<Spectrum> {
    let (eigenvalues, v) = solve_dense(k2, m2)?;
    Ok(Spectrum {
        dim: 2,
        eigenvalues,
        vectors: Vectors::Dense(v),
        index_map: None,
    })
}

/// 2D spectrum from a 1D one: `mu_jk = mu_j + mu_k` with eigenvectors
/// `v_j (x) v_k`, ascending, ties ordered by `(j, k)`.
pub fn compose_2d(spec: &Spectrum) -> Result<Spectrum> {
    let base = match (&spec.vectors, spec.dim) {
        (Vectors::Dense(v), 1) => v.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "composition needs a 1D spectrum".into(),
            ))
        }
    };
    let mu = &spec.eigenvalues;
    let n = mu.len();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            entries.push((mu[j] + mu[k], j + 1, k + 1));
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    Ok(Spectrum {
        dim: 2,
        eigenvalues: entries.iter().map(|e| e.0).collect(),
        vectors: Vectors::Kronecker(base),
        index_map: Some(entries.iter().map(|e| (e.1, e.2)).collect()),
    })
}

/// `i`-th (0-based) eigenvalue of the banded pencil `(k, m)` by inertia
/// bisection, resolved to the working precision of `T`.
///
/// `guess` seeds the bracket; `m` must be positive definite.
pub fn eigenvalue_by_bisection<T: Real>(k: &SymBand<T>, m: &SymBand<T>, index: usize, guess: f64) -> Result<T> {
    if index >= k.dim() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue index {index} out of range for dimension {}",
            k.dim()
        )));
    }
    if !(guess > 0.0 && guess.is_finite()) {
        return Err(Error::InvalidArgument(format!("bisection guess must be positive, got {guess}")));
    }
    let two = T::from_f64(2.0);
    let mut lo = T::from_f64(guess * 0.5);
    let mut hi = T::from_f64(guess * 2.0);
    let mut steps = 0;
    while k.count_below(m, lo) > index {
        lo /= two;
        steps += 1;
        if steps > BISECTION_MAX_STEPS {
            return Err(Error::EigenFailure(format!("no lower bracket for eigenvalue {index}")));
        }
    }
    while k.count_below(m, hi) <= index {
        hi *= two;
        steps += 1;
        if steps > BISECTION_MAX_STEPS {
            return Err(Error::EigenFailure(format!("no upper bracket for eigenvalue {index}")));
        }
    }
    let tol = T::from_f64(4.0 * T::NEWTON_TOL);
    let half = T::from_f64(0.5);
    for _ in 0..BISECTION_MAX_STEPS {
        let mid = (lo + hi) * half;
        if hi - lo <= tol * hi || !(mid > lo && mid < hi) {
            return Ok(mid);
        }
        if k.count_below(m, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::EigenFailure(format!("bisection for eigenvalue {index} did not converge")))
}

/// Lowest `count` eigenvalues of a pencil by inertia bisection, seeded with
/// the exact Laplace eigenvalues `j^2 pi^2`.
pub fn low_eigenvalues<T: Real>(pencil: &Pencil<T>, count: usize) -> Result<Vec<T>> {
    if !pencil.mass().is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    (0..count)
        .map(|i| {
            let j = (i + 1) as f64;
            eigenvalue_by_bisection(pencil.stiffness(), pencil.mass(), i, j * j * std::f64::consts::PI.powi(2))
        })
        .collect()
}
