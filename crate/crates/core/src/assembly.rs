//! Mass and stiffness assembly under Gauss, Lobatto and blended quadrature.
//!
//! `assemble_1d` integrates element by element with the chosen rule and
//! removes the two boundary functions (homogeneous Dirichlet conditions).
//! Blending combines two such pencils; the 2D pencil is the Kronecker
//! structure `M2 = M (x) M`, `K2 = K (x) M + M (x) K`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::banded::SymBand;
use crate::error::{Error, Result};
use crate::quadrature::RuleKind;
use crate::real::Real;
use crate::spline::{MeshSpec, SplineSpace};

/// Element count per direction above which the 2D operator stays structured.
pub const DENSE_2D_MAX_ELEMENTS: usize = 40;

/// Largest 2D dimension (`N^2`) accepted in any form.
pub const MAX_2D_DIM: usize = 4_000_000;

/// Quadrature scheme used for the mass matrix (and, trivially, the stiffness).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Gauss,
    Lobatto,
    /// `tau * Lobatto + (1 - tau) * Gauss`.
    Blended { tau: f64 },
}

impl Scheme {
    /// Weight on the Lobatto operator.
    pub fn tau(&self) -> f64 {
        match self {
            Scheme::Gauss => 0.0,
            Scheme::Lobatto => 1.0,
            Scheme::Blended { tau } => *tau,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scheme::Gauss => "gauss".into(),
            Scheme::Lobatto => "lobatto".into(),
            Scheme::Blended { tau } => format!("blended(tau={tau})"),
        }
    }
}

/// Dirichlet-reduced pencil `(K, M)` of a 1D spline space.
#[derive(Debug, Clone)]
pub struct Pencil<T = f64> {
    mass: SymBand<T>,
    stiffness: SymBand<T>,
    scheme: Scheme,
    points: usize,
    degree: usize,
    continuity: usize,
    mesh: MeshSpec,
}

impl<T: Real> Pencil<T> {
    pub fn mass(&self) -> &SymBand<T> {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymBand<T> {
        &self.stiffness
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Quadrature points per element.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn continuity(&self) -> usize {
        self.continuity
    }

    pub fn mesh(&self) -> &MeshSpec {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }
}

impl Pencil<f64> {
    pub fn dense_mass(&self) -> DMatrix<f64> {
        self.mass.to_dense()
    }

    pub fn dense_stiffness(&self) -> DMatrix<f64> {
        self.stiffness.to_dense()
    }
}

/// Assembles mass and stiffness on the full (unreduced) basis.
pub fn assemble_unreduced<T: Real>(
    space: &SplineSpace<T>,
    rule_kind: RuleKind,
    m: usize,
) -> Result<(SymBand<T>, SymBand<T>)> {
    if m < 2 {
        return Err(Error::InvalidPointCount {
            rule: rule_kind.name(),
            m,
        });
    }
    let rule = rule_kind.rule::<T>(m)?;
    let p = space.degree();
    let n = space.n_dof();
    let mut mass = SymBand::zeros(n, p);
    let mut stiff = SymBand::zeros(n, p);
    let mut vals = vec![T::zero(); p + 1];
    let mut ders = vec![T::zero(); p + 1];
    for e in 0..space.n_elements() {
        let (a, b) = space.element_bounds(e);
        let first = space.element_first_index(e);
        for (x, w) in rule.mapped(a, b) {
            space.eval_on_element(e, x, &mut vals, &mut ders);
            for i in 0..=p {
                for j in 0..=i {
                    mass.add(first + i, first + j, w * vals[i] * vals[j]);
                    stiff.add(first + i, first + j, w * ders[i] * ders[j]);
                }
            }
        }
    }
    Ok((mass, stiff))
}

/// Dirichlet-reduced pencil of `space` under an `m`-point rule.
pub fn assemble_1d<T: Real>(space: &SplineSpace<T>, rule_kind: RuleKind, m: usize) -> Result<Pencil<T>> {
    let (mass, stiff) = assemble_unreduced(space, rule_kind, m)?;
    if mass.dim() < 3 {
        return Err(Error::InvalidMesh(
            "space has no interior degrees of freedom".into(),
        ));
    }
    Ok(Pencil {
        mass: mass.strip_boundary(),
        stiffness: stiff.strip_boundary(),
        scheme: match rule_kind {
            RuleKind::GaussLegendre => Scheme::Gauss,
            RuleKind::GaussLobatto => Scheme::Lobatto,
        },
        points: m,
        degree: space.degree(),
        continuity: space.continuity(),
        mesh: space.mesh().clone(),
    })
}

/// `tau * lobatto + (1 - tau) * gauss`, with the blended mass checked for
/// positive definiteness.
pub fn blend_pencils<T: Real>(tau: f64, lobatto: &Pencil<T>, gauss: &Pencil<T>) -> Result<Pencil<T>> {
    if lobatto.dim() != gauss.dim()
        || lobatto.points != gauss.points
        || lobatto.degree != gauss.degree
        || lobatto.continuity != gauss.continuity
        || lobatto.mesh != gauss.mesh
    {
        return Err(Error::DimensionMismatch(
            "blended pencils must come from the same space and point count".into(),
        ));
    }
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
    }
    let a = T::from_f64(tau);
    let b = T::one() - a;
    let mass = lobatto.mass.combine(a, &gauss.mass, b);
    if !mass.is_positive_definite() {
        return Err(Error::IndefiniteBlend { tau });
    }
    Ok(Pencil {
        mass,
        stiffness: lobatto.stiffness.combine(a, &gauss.stiffness, b),
        scheme: Scheme::Blended { tau },
        ..gauss.clone()
    })
}

/// Pencil of `space` under `scheme` with `p + 1` points per element.
pub fn assemble_scheme<T: Real>(space: &SplineSpace<T>, scheme: Scheme) -> Result<Pencil<T>> {
    let m = space.degree() + 1;
    match scheme {
        Scheme::Gauss => assemble_1d(space, RuleKind::GaussLegendre, m),
        Scheme::Lobatto => assemble_1d(space, RuleKind::GaussLobatto, m),
        Scheme::Blended { tau } => {
            let lobatto = assemble_1d(space, RuleKind::GaussLobatto, m)?;
            let gauss = assemble_1d(space, RuleKind::GaussLegendre, m)?;
            blend_pencils(tau, &lobatto, &gauss)
        }
    }
}

/// How the 2D operator is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form2d {
    /// Explicit up to [`DENSE_2D_MAX_ELEMENTS`] elements per direction.
    Auto,
    Explicit,
    Structured,
}

/// Tensor-product pencil on the unit square.
#[derive(Debug, Clone)]
pub struct Pencil2d {
    base: Pencil,
    explicit: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

/// Builds `M (x) M` and `K (x) M + M (x) K` from a 1D pencil.
pub fn assemble_2d(pencil: &Pencil, form: Form2d) -> Result<Pencil2d> {
    let n = pencil.dim();
    let dim = n
        .checked_mul(n)
        .filter(|&d| d <= MAX_2D_DIM)
        .ok_or(Error::DimensionCap {
            dim: n.saturating_mul(n),
            cap: MAX_2D_DIM,
        })?;
    let small = pencil.mesh.n_elements() <= DENSE_2D_MAX_ELEMENTS;
    let explicit = match form {
        Form2d::Auto => small,
        Form2d::Structured => false,
        Form2d::Explicit if small => true,
        Form2d::Explicit => {
            return Err(Error::DimensionCap {
                dim: pencil.mesh.n_elements(),
                cap: DENSE_2D_MAX_ELEMENTS,
            })
        }
    };
    log::debug!("2D operator of dimension {dim}, explicit: {explicit}");
    let explicit = explicit.then(|| {
        let m = pencil.dense_mass();
        let k = pencil.dense_stiffness();
        let m2 = m.kronecker(&m);
        let k2 = k.kronecker(&m) + m.kronecker(&k);
        (m2, k2)
    });
    Ok(Pencil2d {
        base: pencil.clone(),
        explicit,
    })
}

impl Pencil2d {
    pub fn base(&self) -> &Pencil {
        &self.base
    }

    /// `N^2`, with `N` the reduced 1D dimension.
    pub fn dim(&self) -> usize {
        self.base.dim() * self.base.dim()
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    /// Explicit `(M2, K2)` when the operator was materialized.
    pub fn explicit(&self) -> Option<(&DMatrix<f64>, &DMatrix<f64>)> {
        self.explicit.as_ref().map(|(m, k)| (m, k))
    }

    /// `(A (x) B) x` for banded 1D factors; `x` indexed `i * N + j`.
    fn kron_apply(a: &SymBand, b: &SymBand, x: &[f64]) -> Vec<f64> {
        let n = a.dim();
        // rows: Y = X B^T, then columns: Z = A Y
        let mut y = vec![0.0; n * n];
        for i in 0..n {
            let row = b.matvec(&x[i * n..(i + 1) * n]);
            y[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        let mut z = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = y[i * n + j];
            }
            for (i, v) in a.matvec(&col).into_iter().enumerate() {
                z[i * n + j] = v;
            }
        }
        z
    }

    pub fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        let m = self.base.mass();
        Self::kron_apply(m, m, x)
    }

    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        let (m, k) = (self.base.mass(), self.base.stiffness());
        let mut y = Self::kron_apply(k, m, x);
        for (yi, zi) in y.iter_mut().zip(Self::kron_apply(m, k, x)) {
            *yi += zi;
        }
        y
    }
}

/// Nonzero `(row, col, value)` entries of a banded matrix, row-major.
pub fn triplets(a: &SymBand) -> Vec<(usize, usize, f64)> {
    let n = a.dim();
    let bw = a.bandwidth();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
            let v = a.get(i, j);
            if v != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Writes `K` then `M` as `matrix row col value` lines.
pub fn write_triplets<W: Write>(pencil: &Pencil, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# matrix row col value")?;
    for (name, a) in [("K", pencil.stiffness()), ("M", pencil.mass())] {
        for (i, j, v) in triplets(a) {
            writeln!(w, "{name} {i} {j} {v:?}")?;
        }
    }
    Ok(())
}
