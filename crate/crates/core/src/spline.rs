//! B-spline spaces on `[0, 1]` with open knot vectors.
//!
//! A space of degree `p` and continuity `C^k` repeats every interior
//! breakpoint `p - k` times and each end knot `p + 1` times, so the first and
//! last functions interpolate the boundary values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Element layout of the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSpec {
    Uniform { n_elements: usize },
    /// Alternating `2h/3`, `4h/3` elements (small first), `h = 1 / n_elements`.
    TwoSize { n_elements: usize },
    /// Symmetric about `x = 1/2`; element sizes grow by `alpha` from the
    /// center outward and are normalized to unit total length.
    Stretched { n_elements: usize, alpha: f64 },
    Explicit { breakpoints: Vec<f64> },
}

impl MeshSpec {
    pub fn uniform(n_elements: usize) -> Self {
        MeshSpec::Uniform { n_elements }
    }

    pub fn two_size(n_elements: usize) -> Self {
        MeshSpec::TwoSize { n_elements }
    }

    pub fn stretched(n_elements: usize, alpha: f64) -> Self {
        MeshSpec::Stretched { n_elements, alpha }
    }

    pub fn n_elements(&self) -> usize {
        match self {
            MeshSpec::Uniform { n_elements }
            | MeshSpec::TwoSize { n_elements }
            | MeshSpec::Stretched { n_elements, .. } => *n_elements,
            MeshSpec::Explicit { breakpoints } => breakpoints.len().saturating_sub(1),
        }
    }

    /// Element size of the uniform mesh with the same element count.
    pub fn reference_h(&self) -> f64 {
        1.0 / self.n_elements() as f64
    }

    /// Same layout with a different element count.
    pub fn resized(&self, n_elements: usize) -> Result<Self> {
        match self {
            MeshSpec::Uniform { .. } => Ok(MeshSpec::Uniform { n_elements }),
            MeshSpec::TwoSize { .. } => Ok(MeshSpec::TwoSize { n_elements }),
            MeshSpec::Stretched { alpha, .. } => Ok(MeshSpec::Stretched {
                n_elements,
                alpha: *alpha,
            }),
            MeshSpec::Explicit { .. } => Err(Error::InvalidMesh(
                "explicit breakpoints cannot be refined by element count".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_elements();
        if n == 0 {
            return Err(Error::InvalidMesh("need at least one element".into()));
        }
        match self {
            MeshSpec::TwoSize { n_elements } if n_elements % 2 != 0 => Err(Error::InvalidMesh(
                format!("two-size mesh needs an even element count, got {n_elements}"),
            )),
            MeshSpec::Stretched { alpha, .. } if !(alpha.is_finite() && *alpha > 0.0) => {
                Err(Error::InvalidMesh(format!("stretch ratio must be positive, got {alpha}")))
            }
            MeshSpec::Explicit { breakpoints } => {
                if breakpoints[0] != 0.0 || breakpoints[n] != 1.0 {
                    return Err(Error::InvalidMesh("breakpoints must span [0, 1]".into()));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidMesh(
                        "breakpoints must be strictly ascending".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Breakpoints `0 = x_0 < ... < x_n = 1` in the requested precision.
    pub fn breakpoints<T: Real>(&self) -> Result<Vec<T>> {
        self.validate()?;
        let n = self.n_elements();
        let bps = match self {
            MeshSpec::Uniform { .. } => (0..=n).map(|i| T::ratio(i, n)).collect(),
            MeshSpec::TwoSize { .. } => (0..=n)
                .map(|i| T::ratio(3 * i - (i % 2), 3 * n))
                .collect(),
            MeshSpec::Stretched { alpha, .. } => {
                let alpha = T::from_f64(*alpha);
                let half = n / 2;
                let mut outward = Vec::with_capacity(half + 1);
                let mut s = T::one();
                for _ in 0..=half {
                    outward.push(s);
                    s *= alpha;
                }
                let mut sizes: Vec<T> = Vec::with_capacity(n);
                if n.is_multiple_of(2) {
                    sizes.extend(outward[..half].iter().rev());
                    sizes.extend(&outward[..half]);
                } else {
                    // odd count: a unit center element, growth starts next to it
                    sizes.extend(outward[1..=half].iter().rev());
                    sizes.push(T::one());
                    sizes.extend(&outward[1..=half]);
                }
                let total = sizes.iter().fold(T::zero(), |a, &s| a + s);
                let mut bps = Vec::with_capacity(n + 1);
                let mut acc = T::zero();
                bps.push(acc);
                for s in &sizes[..n - 1] {
                    acc += *s;
                    bps.push(acc / total);
                }
                bps.push(T::one());
                bps
            }
            MeshSpec::Explicit { breakpoints } => {
                breakpoints.iter().map(|&b| T::from_f64(b)).collect()
            }
        };
        Ok(bps)
    }
}

/// B-spline space of degree `p` and continuity `C^k` over a mesh.
#[derive(Debug, Clone)]
pub struct SplineSpace<T = f64> {
    degree: usize,
    continuity: usize,
    knots: Vec<T>,
    breakpoints: Vec<T>,
    mesh: MeshSpec,
}

/// Builds the open-knot-vector space of degree `p`, continuity `C^k`.
pub fn build_space<T: Real>(p: usize, k: usize, mesh: &MeshSpec) -> Result<SplineSpace<T>> {
    if p == 0 {
        return Err(Error::InvalidDegree(p));
    }
    if k >= p {
        return Err(Error::InvalidContinuity { p, k });
    }
    let breakpoints = mesh.breakpoints::<T>()?;
    let mult = p - k;
    let n = breakpoints.len() - 1;
    let mut knots = Vec::with_capacity(2 * (p + 1) + mult * (n - 1));
    knots.extend(std::iter::repeat_n(breakpoints[0], p + 1));
    for b in &breakpoints[1..n] {
        knots.extend(std::iter::repeat_n(*b, mult));
    }
    knots.extend(std::iter::repeat_n(breakpoints[n], p + 1));
    Ok(SplineSpace {
        degree: p,
        continuity: k,
        knots,
        breakpoints,
        mesh: mesh.clone(),
    })
}

impl<T: Real> SplineSpace<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn continuity(&self) -> usize {
        self.continuity
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn mesh(&self) -> &MeshSpec {
        &self.mesh
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Total number of basis functions.
    pub fn n_dof(&self) -> usize {
        (self.degree - self.continuity) * (self.n_elements() - 1) + self.degree + 1
    }

    /// Dimension after removing the two boundary functions.
    pub fn reduced_dim(&self) -> usize {
        self.n_dof() - 2
    }

    /// Index of the first basis function that is nonzero on element `e`.
    pub fn element_first_index(&self, e: usize) -> usize {
        e * (self.degree - self.continuity)
    }

    /// Element bounds `[x_e, x_{e+1}]`.
    pub fn element_bounds(&self, e: usize) -> (T, T) {
        (self.breakpoints[e], self.breakpoints[e + 1])
    }

    /// Element containing `x` (right-continuous, `x = 1` maps to the last one).
    pub fn find_element(&self, x: T) -> Result<usize> {
        let (lo, hi) = (self.breakpoints[0], self.breakpoints[self.n_elements()]);
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain(x.to_f64()));
        }
        let n = self.n_elements();
        // first breakpoint strictly greater than x, minus one
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        Ok(idx.saturating_sub(1).min(n - 1))
    }

    /// Values and first derivatives of the `p + 1` functions that may be
    /// nonzero on element `e`, evaluated at `x` (which should lie in the
    /// element's closure).
    pub fn eval_on_element(&self, e: usize, x: T, values: &mut [T], derivs: &mut [T]) {
        let p = self.degree;
        let span = p + e * (p - self.continuity);
        let t = &self.knots;
        // ndu[j][r]: lower triangle holds knot differences, upper the basis values
        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        ndu[0][0] = T::one();
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = T::zero();
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        for r in 0..=p {
            values[r] = ndu[r][p];
        }
        let pp = T::from_usize(p);
        for r in 0..=p {
            let mut d = T::zero();
            if r >= 1 {
                d += ndu[r - 1][p - 1] / ndu[p][r - 1];
            }
            if r < p {
                d -= ndu[r][p - 1] / ndu[p][r];
            }
            derivs[r] = pp * d;
        }
    }

    /// `(first_index, values)` of the `p + 1` possibly nonzero functions at `x`.
    pub fn eval_basis(&self, x: T) -> Result<(usize, Vec<T>)> {
        let e = self.find_element(x)?;
        let mut v = vec![T::zero(); self.degree + 1];
        let mut d = vec![T::zero(); self.degree + 1];
        self.eval_on_element(e, x, &mut v, &mut d);
        Ok((self.element_first_index(e), v))
    }

    /// `(first_index, derivatives)` of the `p + 1` possibly nonzero functions at `x`.
    pub fn eval_basis_deriv(&self, x: T) -> Result<(usize, Vec<T>)> {
        let e = self.find_element(x)?;
        let mut v = vec![T::zero(); self.degree + 1];
        let mut d = vec![T::zero(); self.degree + 1];
        self.eval_on_element(e, x, &mut v, &mut d);
        Ok((self.element_first_index(e), d))
    }

    /// Samples `sum_i c_i phi_i(x)` for coefficients over the full basis.
    pub fn eval_combination(&self, coeffs: &[T], x: T) -> Result<T> {
        let (first, vals) = self.eval_basis(x)?;
        Ok(vals
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (r, &v)| acc + v * coeffs[first + r]))
    }
}
