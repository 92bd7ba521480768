//! Exact modes, mode pairing and the per-mode eigen-error budget.
//!
//! For a discrete eigenpair `(mu, v)` normalized by `(v, v)_h = 1` and the
//! exact pair `(lambda, u)`:
//!
//! ```text
//! |u - v|_E^2 / lambda = (mu - lambda) / lambda + |u - v|_0^2
//!                      + (|v|_E^2 - |v|_{E,h}^2) / lambda + (1 - |v|_0^2)
//! ```
//!
//! Continuous norms of `v` use the full-Gauss Gramians, which are exact for
//! polynomial splines; `(u, v)` is integrated element by element and
//! `a(u, v) = lambda (u, v)`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::Pencil;
use crate::eigen::{compose_2d, Spectrum};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spline::SplineSpace;

/// Extra Gauss points per element, beyond `p`, for the sine products.
const PRODUCT_EXTRA_POINTS: usize = 10;
const PRODUCT_REFINEMENT_TOL: f64 = 1e-11;

/// Eigenpair of the continuous Laplacian with Dirichlet conditions on the
/// unit interval (`k == None`) or square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMode {
    pub j: usize,
    pub k: Option<usize>,
    pub lambda: f64,
}

impl ExactMode {
    pub fn one(j: usize) -> Self {
        let jf = j as f64;
        Self {
            j,
            k: None,
            lambda: jf * jf * PI * PI,
        }
    }

    pub fn two(j: usize, k: usize) -> Self {
        let (jf, kf) = (j as f64, k as f64);
        Self {
            j,
            k: Some(k),
            lambda: (jf * jf + kf * kf) * PI * PI,
        }
    }

    pub fn dim(&self) -> usize {
        if self.k.is_some() {
            2
        } else {
            1
        }
    }

    /// `j^2 + k^2` (or `j^2`): exact eigenvalue over `pi^2`.
    pub fn index_norm(&self) -> usize {
        self.j * self.j + self.k.map_or(0, |k| k * k)
    }

    /// `sqrt(2) sin(j pi x)`, or the 1D factor in `x` for a 2D mode.
    pub fn eval(&self, x: f64) -> f64 {
        SQRT_2 * (self.j as f64 * PI * x).sin()
    }

    /// `2 sin(j pi x) sin(k pi y)`.
    pub fn eval_2d(&self, x: f64, y: f64) -> f64 {
        let k = self.k.unwrap_or(1) as f64;
        2.0 * (self.j as f64 * PI * x).sin() * (k * PI * y).sin()
    }
}

/// 1D: modes `1..=count`. 2D: every `(j, k)` with `j, k <= count`, ascending
/// in `lambda`, ties ordered by `(j, k)`.
pub fn exact_modes(dim: usize, count: usize) -> Result<Vec<ExactMode>> {
    if count == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    match dim {
        1 => Ok((1..=count).map(ExactMode::one).collect()),
        2 => {
            let mut modes: Vec<ExactMode> = (1..=count)
                .flat_map(|j| (1..=count).map(move |k| ExactMode::two(j, k)))
                .collect();
            modes.sort_by_key(|m| (m.index_norm(), m.j, m.k));
            Ok(modes)
        }
        _ => Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}"))),
    }
}

struct Sampled {
    // per quadrature point: (x, weight, first full basis index, basis values)
    points: Vec<(f64, f64, usize, Vec<f64>)>,
}

impl Sampled {
    fn new(space: &SplineSpace, m: usize) -> Result<Self> {
        let rule = gauss_legendre::<f64>(m)?;
        let p = space.degree();
        let mut d = vec![0.0; p + 1];
        let mut points = Vec::with_capacity(space.n_elements() * m);
        for e in 0..space.n_elements() {
            let (a, b) = space.element_bounds(e);
            let first = space.element_first_index(e);
            for (x, w) in rule.mapped(a, b) {
                let mut v = vec![0.0; p + 1];
                space.eval_on_element(e, x, &mut v, &mut d);
                points.push((x, w, first, v));
            }
        }
        Ok(Self { points })
    }

    // (u_j, v) for reduced coefficients (full index = reduced + 1)
    fn inner(&self, j: usize, coeffs: &[f64]) -> f64 {
        let n = coeffs.len();
        let freq = j as f64 * PI;
        let mut sum = 0.0;
        for (x, w, first, vals) in &self.points {
            let mut v = 0.0;
            for (i, &b) in vals.iter().enumerate() {
                let full = first + i;
                if full >= 1 && full <= n {
                    v += coeffs[full - 1] * b;
                }
            }
            sum += w * (freq * x).sin() * v;
        }
        SQRT_2 * sum
    }

    // rows j = 1..=count: (u_j, phi_i) over the reduced basis
    fn projection(&self, count: usize, n: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(count, n);
        for (x, w, first, vals) in &self.points {
            for j in 1..=count {
                let u = SQRT_2 * (j as f64 * PI * x).sin() * w;
                for (i, &b) in vals.iter().enumerate() {
                    let full = first + i;
                    if full >= 1 && full <= n {
                        s[(j - 1, full - 1)] += u * b;
                    }
                }
            }
        }
        s
    }
}

/// Continuous inner products of sine modes with splines of one space,
/// integrated with `p + 10` Gauss points per element and accepted only when
/// doubling the point count changes the result by less than `1e-11`
/// (relative, with unit floor).
pub struct SineProjector {
    coarse: Sampled,
    fine: Sampled,
    n: usize,
}

impl SineProjector {
    pub fn new(space: &SplineSpace) -> Result<Self> {
        let m = space.degree() + PRODUCT_EXTRA_POINTS;
        Ok(Self {
            coarse: Sampled::new(space, m)?,
            fine: Sampled::new(space, 2 * m)?,
            n: space.reduced_dim(),
        })
    }

    /// `(u_j, v)` for the spline with reduced coefficients `coeffs`.
    pub fn inner(&self, j: usize, coeffs: &[f64]) -> Result<f64> {
        if coeffs.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                self.n,
                coeffs.len()
            )));
        }
        let a = self.coarse.inner(j, coeffs);
        let b = self.fine.inner(j, coeffs);
        check_refinement(j, a, b)?;
        Ok(b)
    }

    /// Matrix `P[j-1, c] = (u_j, v_c)` for modes `j <= count` and the columns
    /// of `vectors`.
    pub fn project(&self, count: usize, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let a = self.coarse.projection(count, self.n) * vectors;
        let b = self.fine.projection(count, self.n) * vectors;
        for j in 0..count {
            for c in 0..b.ncols() {
                check_refinement(j + 1, a[(j, c)], b[(j, c)])?;
            }
        }
        Ok(b)
    }
}

fn check_refinement(mode: usize, coarse: f64, fine: f64) -> Result<()> {
    let change = (coarse - fine).abs() / fine.abs().max(1.0);
    if change < PRODUCT_REFINEMENT_TOL {
        Ok(())
    } else {
        Err(Error::InnerProductRefinement { mode, change })
    }
}

/// `((u, v), a(u, v))` for a 1D mode and the spline with reduced
/// coefficients `coeffs`.
pub fn spline_sine_products(space: &SplineSpace, mode: &ExactMode, coeffs: &[f64]) -> Result<(f64, f64)> {
    if mode.dim() != 1 {
        return Err(Error::InvalidArgument(
            "2D products factor into two 1D products".into(),
        ));
    }
    let l2 = SineProjector::new(space)?.inner(mode.j, coeffs)?;
    Ok((l2, mode.lambda * l2))
}

/// Outcome of [`sign_align`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Kept,
    Flipped,
    /// `(u, v) == 0`: left unchanged.
    Orthogonal,
}

/// Flips `v` so that `(u, v) >= 0`, given `inner = (u, v)`.
pub fn sign_align(v: &DVector<f64>, inner: f64) -> (DVector<f64>, Alignment) {
    if inner > 0.0 {
        (v.clone(), Alignment::Kept)
    } else if inner < 0.0 {
        (-v, Alignment::Flipped)
    } else {
        (v.clone(), Alignment::Orthogonal)
    }
}

/// Discrete mode (sorted position) to exact mode (list position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePairing {
    pub exact_for: Vec<usize>,
}

/// Pairs by sorted position; in 2D, inside each cluster of equal exact
/// eigenvalues, greedily by largest `|(u, v)|`.
///
/// `projections` holds the 1D products `(u_j, v_j')` (rows exact `j`,
/// columns discrete `j'`) and is needed only for composed 2D spectra.
pub fn pair_modes(spectrum: &Spectrum, exact: &[ExactMode], projections: Option<&DMatrix<f64>>) -> Result<ModePairing> {
    if spectrum.len() != exact.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} discrete modes vs {} exact modes",
            spectrum.len(),
            exact.len()
        )));
    }
    let mut exact_for: Vec<usize> = (0..exact.len()).collect();
    let (Some(map), Some(proj)) = (spectrum.index_map(), projections) else {
        return Ok(ModePairing { exact_for });
    };
    let ip = |d: usize, e: usize| {
        let (j2, k2) = map[d];
        let ex = &exact[e];
        let k = ex.k.unwrap_or(1);
        (proj[(ex.j - 1, j2 - 1)] * proj[(k - 1, k2 - 1)]).abs()
    };
    let mut start = 0;
    while start < exact.len() {
        let mut end = start + 1;
        while end < exact.len() && exact[end].index_norm() == exact[start].index_norm() {
            end += 1;
        }
        if end - start > 1 {
            let mut free_d: Vec<usize> = (start..end).collect();
            let mut free_e: Vec<usize> = (start..end).collect();
            while !free_d.is_empty() {
                let mut best = (0, 0, -1.0);
                for (a, &d) in free_d.iter().enumerate() {
                    for (b, &e) in free_e.iter().enumerate() {
                        let v = ip(d, e);
                        if v > best.2 {
                            best = (a, b, v);
                        }
                    }
                }
                let d = free_d.remove(best.0);
                exact_for[d] = free_e.remove(best.1);
            }
        }
        start = end;
    }
    Ok(ModePairing { exact_for })
}

/// Terms of the eigen-error budget for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// 1-based position in the sorted discrete spectrum.
    pub mode: usize,
    pub exact: ExactMode,
    pub mu: f64,
    /// `(u, v)` after sign alignment.
    pub inner: f64,
    pub alignment: Alignment,
    pub ev_rel_err: f64,
    pub ef_l2_err: f64,
    pub ef_energy_rel_err: f64,
    pub energy_mismatch: f64,
    pub l2_mismatch: f64,
    pub residual: f64,
}

struct Norms {
    mu: f64,
    lambda: f64,
    inner: f64,
    l2: f64,
    energy: f64,
    energy_h: f64,
}

impl Norms {
    fn budget(&self, mode: usize, exact: ExactMode, alignment: Alignment) -> ErrorBudget {
        let Norms {
            mu,
            lambda,
            inner,
            l2,
            energy,
            energy_h,
        } = *self;
        let ev_rel_err = (mu - lambda) / lambda;
        let ef_l2_err = 1.0 - 2.0 * inner + l2;
        let ef_energy_rel_err = (lambda - 2.0 * lambda * inner + energy) / lambda;
        let energy_mismatch = (energy - energy_h) / lambda;
        let l2_mismatch = 1.0 - l2;
        let residual =
            (ef_energy_rel_err - (ev_rel_err + ef_l2_err + energy_mismatch + l2_mismatch)).abs();
        ErrorBudget {
            mode,
            exact,
            mu,
            inner,
            alignment,
            ev_rel_err,
            ef_l2_err,
            ef_energy_rel_err,
            energy_mismatch,
            l2_mismatch,
            residual,
        }
    }
}

fn check_pencils(scheme: &Pencil, exact: &Pencil, space: &SplineSpace) -> Result<()> {
    if scheme.dim() != exact.dim() || scheme.dim() != space.reduced_dim() {
        return Err(Error::DimensionMismatch(
            "scheme pencil, exact pencil and space disagree".into(),
        ));
    }
    Ok(())
}

/// Budget of every mode of a 1D spectrum of `scheme`; `exact` is the
/// full-Gauss pencil of the same space.
pub fn budget_1d(space: &SplineSpace, scheme: &Pencil, exact: &Pencil, spectrum: &Spectrum) -> Result<Vec<ErrorBudget>> {
    check_pencils(scheme, exact, space)?;
    let modes = exact_modes(1, spectrum.len())?;
    let projector = SineProjector::new(space)?;
    let mut out = Vec::with_capacity(modes.len());
    for (i, mode) in modes.into_iter().enumerate() {
        let v = spectrum.eigenvector(i);
        let ip = projector.inner(mode.j, v.as_slice())?;
        let (v, alignment) = sign_align(&v, ip);
        let x = v.as_slice();
        let norms = Norms {
            mu: spectrum.eigenvalues()[i],
            lambda: mode.lambda,
            inner: ip.abs(),
            l2: exact.mass().quad_form(x),
            energy: exact.stiffness().quad_form(x),
            energy_h: scheme.stiffness().quad_form(x),
        };
        out.push(norms.budget(i + 1, mode, alignment));
    }
    Ok(out)
}

/// Composed 2D spectrum with its budgets.
pub struct Budget2d {
    pub spectrum: Spectrum,
    pub pairing: ModePairing,
    pub budgets: Vec<ErrorBudget>,
}

/// Budget of every mode of the Kronecker-composed 2D spectrum, from the 1D
/// spectrum of `scheme` on `space` (same space in both directions).
pub fn budget_2d(space: &SplineSpace, scheme: &Pencil, exact: &Pencil, spec1d: &Spectrum) -> Result<Budget2d> {
    check_pencils(scheme, exact, space)?;
    let n = spec1d.len();
    let vecs = spec1d
        .dense_vectors()
        .ok_or_else(|| Error::InvalidArgument("2D budgets need a 1D spectrum".into()))?;
    let proj = SineProjector::new(space)?.project(n, vecs)?;
    let spectrum = compose_2d(spec1d)?;
    let modes = exact_modes(2, n)?;
    let pairing = pair_modes(&spectrum, &modes, Some(&proj))?;
    let (mut m, mut e, mut a, mut h) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let v = vecs.column(c);
        let x = v.as_slice();
        m[c] = exact.mass().quad_form(x);
        e[c] = exact.stiffness().quad_form(x);
        a[c] = scheme.stiffness().quad_form(x);
        h[c] = scheme.mass().quad_form(x);
    }
    let map = spectrum.index_map().expect("composed spectrum");
    let mut budgets = Vec::with_capacity(n * n);
    for (d, &(j2, k2)) in map.iter().enumerate() {
        let mode = modes[pairing.exact_for[d]];
        let (c1, c2) = (j2 - 1, k2 - 1);
        let ip = proj[(mode.j - 1, c1)] * proj[(mode.k.unwrap() - 1, c2)];
        let alignment = sign_align(&DVector::zeros(0), ip).1;
        let norms = Norms {
            mu: spectrum.eigenvalues()[d],
            lambda: mode.lambda,
            inner: ip.abs(),
            l2: m[c1] * m[c2],
            energy: e[c1] * m[c2] + m[c1] * e[c2],
            energy_h: a[c1] * h[c2] + h[c1] * a[c2],
        };
        budgets.push(norms.budget(d + 1, mode, alignment));
    }
    Ok(Budget2d {
        spectrum,
        pairing,
        budgets,
    })
}

/// One output row: abscissae plus the budget terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub l_over_n: f64,
    pub kh_over_pi: f64,
    pub ev_rel_err: f64,
    pub ef_l2_err: f64,
    pub ef_energy_rel_err: f64,
    pub energy_mismatch: f64,
    pub l2_mismatch: f64,
    pub budget_residual: f64,
}

/// Rows for a list of budgets; `N` is the number of discrete modes and
/// `h` the reference element size.
pub fn spectrum_rows(budgets: &[ErrorBudget], h: f64) -> Vec<SpectrumRow> {
    let n = budgets.len() as f64;
    budgets
        .iter()
        .map(|b| SpectrumRow {
            l_over_n: b.mode as f64 / n,
            kh_over_pi: b.mu.max(0.0).sqrt() * h / PI,
            ev_rel_err: b.ev_rel_err,
            ef_l2_err: b.ef_l2_err,
            ef_energy_rel_err: b.ef_energy_rel_err,
            energy_mismatch: b.energy_mismatch,
            l2_mismatch: b.l2_mismatch,
            budget_residual: b.residual,
        })
        .collect()
}

/// Sample of a discrete eigenfunction next to its exact counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionSample {
    pub x: f64,
    pub discrete: f64,
    pub exact: f64,
}

/// Discrete mode `j` (1-based) of a 1D spectrum, sign-aligned with
/// `sqrt(2) sin(j pi x)`, on `points` uniformly spaced abscissae.
pub fn sample_eigenfunction(space: &SplineSpace, spectrum: &Spectrum, j: usize, points: usize) -> Result<Vec<EigenfunctionSample>> {
    if j == 0 || j > spectrum.len() || spectrum.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "mode {j} not available in a spectrum of {} modes",
            spectrum.len()
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument("need at least two sample points".into()));
    }
    let mode = ExactMode::one(j);
    let v = spectrum.eigenvector(j - 1);
    let (ip, _) = spline_sine_products(space, &mode, v.as_slice())?;
    let (v, _) = sign_align(&v, ip);
    let mut full = vec![0.0; space.n_dof()];
    full[1..space.n_dof() - 1].copy_from_slice(v.as_slice());
    (0..points)
        .map(|i| {
            let x = i as f64 / (points - 1) as f64;
            Ok(EigenfunctionSample {
                x,
                discrete: space.eval_combination(&full, x)?,
                exact: mode.eval(x),
            })
        })
        .collect()
}
