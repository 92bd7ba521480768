//! Dispersion analysis: convergence rates, leading error coefficients and
//! searches for the blending parameter.
//!
//! Superconvergent schemes push relative eigenvalue errors far below `f64`
//! resolution (1e-20 and smaller at `n = 1000`), so the low modes can be
//! computed in double-double by inertia bisection ([`Precision::Extended`]).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_1d, assemble_scheme, blend_pencils, Pencil, Scheme};
use crate::eigen::{eigenvalue_by_bisection, eigenvalues_dense, low_eigenvalues};
use crate::error::{Error, Result};
use crate::analysis::ExactMode;
use crate::quadrature::RuleKind;
use crate::real::{DoubleDouble, Real};
use crate::spline::{build_space, MeshSpec};

/// Errors at or below this are dropped from `f64` rate fits.
pub const RATE_FLOOR_DOUBLE: f64 = 1e-13;
/// Errors at or below this are dropped from double-double rate fits.
pub const RATE_FLOOR_EXTENDED: f64 = 1e-24;
/// Mesh and modes used for leading coefficients.
pub const LEADING_ELEMENTS: usize = 1000;
pub const LEADING_MODES: usize = 5;
/// Largest accepted relative spread of the coefficient samples.
pub const LEADING_FLATNESS: f64 = 0.05;
pub const ZERO_AT_TOL: f64 = 1e-6;
pub const BAND_AVERAGE_TOL: f64 = 1e-4;
const BAND_SCAN_POINTS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    #[default]
    Extended,
}

impl Precision {
    pub fn rate_floor(self) -> f64 {
        match self {
            Precision::Double => RATE_FLOOR_DOUBLE,
            Precision::Extended => RATE_FLOOR_EXTENDED,
        }
    }
}

/// Degree, continuity and mesh layout of a 1D discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub degree: usize,
    pub continuity: usize,
    pub mesh: MeshSpec,
}

impl Discretization {
    pub fn new(degree: usize, continuity: usize, mesh: MeshSpec) -> Self {
        Self {
            degree,
            continuity,
            mesh,
        }
    }

    pub fn pencil<T: Real>(&self, scheme: Scheme) -> Result<Pencil<T>> {
        let space = build_space::<T>(self.degree, self.continuity, &self.mesh)?;
        assemble_scheme(&space, scheme)
    }

    fn resized(&self, n: usize) -> Result<Self> {
        Ok(Self {
            mesh: self.mesh.resized(n)?,
            ..self.clone()
        })
    }
}

/// One low mode on one mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub mode: ExactMode,
    /// `omega h` with `omega = sqrt(lambda)` and `h` the reference size.
    pub omega: f64,
    /// `sqrt(mu) h`.
    pub discrete_omega: f64,
    pub abs_err: f64,
    pub rel_ev_err: f64,
}

fn sample<T: Real>(mode: ExactMode, mu: T, h: T) -> DispersionSample {
    let pi2 = T::pi() * T::pi();
    let lambda = T::from_usize(mode.index_norm()) * pi2;
    let omega = lambda.sqrt() * h;
    let discrete = mu.sqrt() * h;
    DispersionSample {
        mode,
        omega: omega.to_f64(),
        discrete_omega: discrete.to_f64(),
        abs_err: (discrete - omega).to_f64(),
        rel_ev_err: ((mu - lambda) / lambda).to_f64(),
    }
}

fn low_mus<T: Real>(disc: &Discretization, scheme: Scheme, count: usize) -> Result<Vec<T>> {
    low_eigenvalues(&disc.pencil::<T>(scheme)?, count)
}

/// Samples for the given modes (1D or 2D, composed from 1D eigenvalues).
pub fn dispersion_samples(disc: &Discretization, scheme: Scheme, modes: &[ExactMode], precision: Precision) -> Result<Vec<DispersionSample>> {
    let count = modes.iter().map(|m| m.j.max(m.k.unwrap_or(0))).max().unwrap_or(0);
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = disc.mesh.n_elements();
    match precision {
        Precision::Extended => {
            let mus = low_mus::<DoubleDouble>(disc, scheme, count)?;
            Ok(compose_samples(modes, &mus, DoubleDouble::ratio(1, n)))
        }
        Precision::Double => {
            let pen = disc.pencil::<f64>(scheme)?;
            let mus = eigenvalues_dense(&pen.dense_stiffness(), &pen.dense_mass())?;
            if mus.len() < count {
                return Err(Error::InvalidArgument(format!(
                    "mode {count} exceeds the {} discrete modes",
                    mus.len()
                )));
            }
            Ok(compose_samples(modes, &mus, 1.0 / n as f64))
        }
    }
}

fn compose_samples<T: Real>(modes: &[ExactMode], mus: &[T], h: T) -> Vec<DispersionSample> {
    modes
        .iter()
        .map(|m| {
            let mu = match m.k {
                None => mus[m.j - 1],
                Some(k) => mus[m.j - 1] + mus[k - 1],
            };
            sample(*m, mu, h)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n_elements: usize,
    pub h: f64,
    pub error: f64,
    /// False when dropped below the floor.
    pub used: bool,
}

/// Least-squares slope of `log |error|` against `log h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub mode: ExactMode,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub r_squared: f64,
    pub floor: f64,
}

/// Fits `points` (`n`, `h`, `error`), dropping `|error| <= floor`.
pub fn fit_slope(mode: ExactMode, raw: &[(usize, f64, f64)], floor: f64) -> Result<RateFit> {
    let points: Vec<RatePoint> = raw
        .iter()
        .map(|&(n_elements, h, error)| RatePoint {
            n_elements,
            h,
            error,
            used: error.abs() > floor && error.is_finite(),
        })
        .collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.h.ln(), p.error.abs().ln()))
        .collect();
    if xy.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} of {} errors above the floor {floor:e}",
            xy.len(),
            points.len()
        )));
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all mesh sizes coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        mode,
        points,
        slope,
        r_squared,
        floor,
    })
}

/// Convergence rate of the relative eigenvalue error of `mode` over the
/// given element counts (same mesh layout as `disc`).
pub fn convergence_rate(disc: &Discretization, scheme: Scheme, mode: ExactMode, element_counts: &[usize], precision: Precision) -> Result<RateFit> {
    if element_counts.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 meshes, got {}",
            element_counts.len()
        )));
    }
    let top = mode.j.max(mode.k.unwrap_or(0));
    let coarsest = *element_counts.iter().min().unwrap();
    if top == 0 || 4 * top > coarsest {
        return Err(Error::InvalidArgument(format!(
            "mode index {top} not resolvable on {coarsest} elements (need j <= n/4)"
        )));
    }
    let mut raw = Vec::with_capacity(element_counts.len());
    for &n in element_counts {
        let d = disc.resized(n)?;
        let s = dispersion_samples(&d, scheme, &[mode], precision)?[0];
        log::debug!("n={n} mode {mode:?}: rel err {:e}", s.rel_ev_err);
        raw.push((n, 1.0 / n as f64, s.rel_ev_err));
    }
    fit_slope(mode, &raw, precision.rate_floor())
}

/// Leading coefficient `c` in `omega^h h - Omega ~ c Omega^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingFit {
    pub coefficient: f64,
    pub power: u32,
    /// `(Omega, abs_err / Omega^r)` per mode.
    pub samples: Vec<(f64, f64)>,
    pub spread: f64,
}

/// Leading coefficient from modes `1..=5` on `n = 1000` elements of the
/// layout of `disc`, extrapolated to `Omega -> 0` by a fit in `Omega^2`.
pub fn leading_coefficient(disc: &Discretization, scheme: Scheme, power: u32, precision: Precision) -> Result<LeadingFit> {
    let d = disc.resized(LEADING_ELEMENTS)?;
    let modes: Vec<ExactMode> = (1..=LEADING_MODES).map(ExactMode::one).collect();
    let samples: Vec<(f64, f64)> = dispersion_samples(&d, scheme, &modes, precision)?
        .iter()
        .map(|s| (s.omega, s.abs_err / s.omega.powi(power as i32)))
        .collect();
    let cs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let (lo, hi) = cs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    let spread = if mean == 0.0 { f64::INFINITY } else { (hi - lo) / mean.abs() };
    if !(spread <= LEADING_FLATNESS) {
        return Err(Error::InconclusiveFit {
            spread,
            limit: LEADING_FLATNESS,
        });
    }
    // c(Omega) = c0 + c2 Omega^2
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 * s.0).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&cs).map(|(x, c)| (x - mx) * (c - mean)).sum();
    let coefficient = mean - sxy / sxx * mx;
    Ok(LeadingFit {
        coefficient,
        power,
        samples,
        spread,
    })
}

/// Criterion for choosing the blending parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Cancel the leading dispersion term (order `2p + 1`).
    LeadingTermCancel,
    /// Zero eigenvalue error at the mode whose wavenumber `k h / pi` is
    /// closest to the target.
    ZeroAt { kh_over_pi: f64 },
    /// Minimize the mean `|rel_ev_err|` over modes with `lo <= l/N <= hi`.
    BandAverage { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendSearch {
    pub tau: f64,
    pub objective: Objective,
    /// Gauss and Lobatto leading coefficients (`LeadingTermCancel`).
    pub coefficients: Option<(f64, f64)>,
    /// 1-based targeted mode (`ZeroAt`).
    pub target_mode: Option<usize>,
    /// `|rel_ev_err|` at the targeted mode after a full re-solve (`ZeroAt`).
    pub post_check: Option<f64>,
    /// Objective value at `tau` (`BandAverage`).
    pub objective_value: Option<f64>,
    pub warning: Option<String>,
}

impl BlendSearch {
    fn new(tau: f64, objective: Objective) -> Self {
        Self {
            tau,
            objective,
            coefficients: None,
            target_mode: None,
            post_check: None,
            objective_value: None,
            warning: None,
        }
    }
}

/// Searches for `tau` under `objective`; `bracket` bounds the root or
/// minimizer for `ZeroAt` and `BandAverage`.
pub fn blend_search(disc: &Discretization, objective: Objective, bracket: (f64, f64)) -> Result<BlendSearch> {
    match objective {
        Objective::LeadingTermCancel => {
            let r = 2 * disc.degree as u32 + 1;
            let g = leading_coefficient(disc, Scheme::Gauss, r, Precision::Extended)?.coefficient;
            let l = leading_coefficient(disc, Scheme::Lobatto, r, Precision::Extended)?.coefficient;
            if g == l {
                return Err(Error::NoRoot { lo: g, hi: l });
            }
            let mut out = BlendSearch::new(g / (g - l), objective);
            out.coefficients = Some((g, l));
            Ok(out)
        }
        Objective::ZeroAt { kh_over_pi } => zero_at(disc, kh_over_pi, bracket),
        Objective::BandAverage { lo, hi } => band_average(disc, lo, hi, bracket),
    }
}

struct BlendFamily {
    lobatto: Pencil,
    gauss: Pencil,
}

impl BlendFamily {
    fn new(disc: &Discretization) -> Result<Self> {
        let space = build_space::<f64>(disc.degree, disc.continuity, &disc.mesh)?;
        let m = disc.degree + 1;
        Ok(Self {
            lobatto: assemble_1d(&space, RuleKind::GaussLobatto, m)?,
            gauss: assemble_1d(&space, RuleKind::GaussLegendre, m)?,
        })
    }

    fn at(&self, tau: f64) -> Result<Pencil> {
        blend_pencils(tau, &self.lobatto, &self.gauss)
    }

    fn rel_err(&self, tau: f64, mode: usize) -> Result<f64> {
        let pen = self.at(tau)?;
        let lambda = (mode as f64 * PI).powi(2);
        let mu = eigenvalue_by_bisection(pen.stiffness(), pen.mass(), mode - 1, lambda)?;
        Ok((mu - lambda) / lambda)
    }

    fn all_rel_errs(&self, tau: f64) -> Result<Vec<f64>> {
        let pen = self.at(tau)?;
        let mus = eigenvalues_dense(&pen.dense_stiffness(), &pen.dense_mass())?;
        Ok(mus
            .iter()
            .enumerate()
            .map(|(i, mu)| {
                let lambda = ((i + 1) as f64 * PI).powi(2);
                (mu - lambda) / lambda
            })
            .collect())
    }
}

fn zero_at(disc: &Discretization, target: f64, (mut lo, mut hi): (f64, f64)) -> Result<BlendSearch> {
    let fam = BlendFamily::new(disc)?;
    let n_modes = fam.gauss.dim();
    let h = disc.mesh.reference_h();
    // exact wavenumber of mode l is l pi, so k h / pi = l h
    let mode = (1..=n_modes)
        .min_by(|&a, &b| {
            let da = (a as f64 * h - target).abs();
            let db = (b as f64 * h - target).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::InvalidArgument("empty spectrum".into()))?;
    let mut flo = fam.rel_err(lo, mode)?;
    let fhi = fam.rel_err(hi, mode)?;
    if flo == 0.0 || fhi == 0.0 {
        let tau = if flo == 0.0 { lo } else { hi };
        return finish_zero_at(&fam, tau, mode, target);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { lo, hi });
    }
    while hi - lo > ZERO_AT_TOL {
        let mid = 0.5 * (lo + hi);
        let f = fam.rel_err(mid, mode)?;
        if f == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f.signum() == flo.signum() {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
    }
    finish_zero_at(&fam, 0.5 * (lo + hi), mode, target)
}

fn finish_zero_at(fam: &BlendFamily, tau: f64, mode: usize, target: f64) -> Result<BlendSearch> {
    let check = fam.all_rel_errs(tau)?[mode - 1].abs();
    let mut out = BlendSearch::new(tau, Objective::ZeroAt { kh_over_pi: target });
    out.target_mode = Some(mode);
    out.post_check = Some(check);
    if check >= ZERO_AT_TOL {
        let msg = format!("error at mode {mode} is {check:e} after re-solve");
        log::warn!("{msg}");
        out.warning = Some(msg);
    }
    Ok(out)
}

fn band_average(disc: &Discretization, lo: f64, hi: f64, (a, b): (f64, f64)) -> Result<BlendSearch> {
    if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) || !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "band [{lo}, {hi}] or bracket [{a}, {b}] is invalid"
        )));
    }
    let fam = BlendFamily::new(disc)?;
    let n = fam.gauss.dim();
    let band: Vec<usize> = (1..=n)
        .filter(|&l| {
            let x = l as f64 / n as f64;
            x >= lo && x <= hi
        })
        .collect();
    if band.is_empty() {
        return Err(Error::InvalidArgument(format!("no modes with l/N in [{lo}, {hi}]")));
    }
    let objective = |tau: f64| -> f64 {
        match fam.all_rel_errs(tau) {
            Ok(errs) => band.iter().map(|&l| errs[l - 1].abs()).sum::<f64>() / band.len() as f64,
            Err(_) => f64::INFINITY,
        }
    };
    let grid: Vec<f64> = (0..BAND_SCAN_POINTS)
        .map(|i| a + (b - a) * i as f64 / (BAND_SCAN_POINTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| objective(t)).collect();
    let minima = (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i - 1] > vals[i];
            let right = i + 1 == vals.len() || vals[i + 1] > vals[i];
            left && right && vals[i].is_finite()
        })
        .count();
    let best = (0..vals.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    if !vals[best].is_finite() {
        return Err(Error::IndefiniteBlend { tau: grid[best] });
    }
    let warning = (minima > 1).then(|| {
        let msg = format!("band objective has {minima} local minima on [{a}, {b}]; minimized locally");
        log::warn!("{msg}");
        msg
    });
    let (mut x0, mut x3) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = x3 - g * (x3 - x0);
    let mut x2 = x0 + g * (x3 - x0);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while x3 - x0 > BAND_AVERAGE_TOL {
        if f1 <= f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - g * (x3 - x0);
            f1 = objective(x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + g * (x3 - x0);
            f2 = objective(x2);
        }
    }
    let tau = 0.5 * (x0 + x3);
    let mut out = BlendSearch::new(tau, Objective::BandAverage { lo, hi });
    out.objective_value = Some(objective(tau));
    out.warning = warning;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRole {
    /// Cancels the leading dispersion term.
    Optimal,
    Alternative,
}

/// Mesh family a catalogued value applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    Uniform,
    TwoSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEntry {
    pub degree: usize,
    pub continuity: usize,
    pub mesh: MeshFamily,
    /// Weight on the Lobatto operator.
    pub tau: f64,
    pub role: TauRole,
    pub note: String,
}

fn entry(degree: usize, continuity: usize, mesh: MeshFamily, tau: f64, role: TauRole, note: &str) -> TauEntry {
    TauEntry {
        degree,
        continuity,
        mesh,
        tau,
        role,
        note: note.into(),
    }
}

/// Catalogue of reference blending parameters.
pub fn tau_table() -> Vec<TauEntry> {
    use MeshFamily::*;
    use TauRole::*;
    let mut t: Vec<TauEntry> = (1..=8)
        .map(|p| {
            entry(p, 0, Uniform, p as f64 / (p + 1) as f64, Optimal, "C0 elements: tau = p/(p+1)")
        })
        .collect();
    t.extend([
        entry(2, 1, Uniform, 2.0 / 3.0, Optimal, "Lobatto:Gauss = 2:1"),
        entry(3, 2, Uniform, 5.0 / 2.0, Optimal, "non-convex blend"),
        entry(4, 1, Uniform, 4.0 / 5.0, Optimal, "convergence order 10"),
        entry(2, 1, Uniform, 5.0 / 6.0, Alternative, "smaller errors in the middle of the spectrum"),
        entry(2, 1, Uniform, 15.0 / 16.0, Alternative, "smaller errors in the middle of the spectrum"),
        entry(
            2,
            1,
            Uniform,
            0.79105,
            Alternative,
            "zero eigenvalue error at kh/pi = 0.4 with n = 1000; quoted as 0.20895 when the weight is put on the Gauss rule",
        ),
        entry(3, 2, Uniform, 5.0, Alternative, "better high-frequency behaviour"),
        entry(3, 2, Uniform, 3.0, Alternative, "non-convex alternative"),
        entry(3, 1, Uniform, 3.0 / 4.0, Alternative, "C0 cubic optimum; no gain in order"),
        entry(3, 1, Uniform, 7.0 / 12.0, Alternative, "first 80% of eigenvalues within 2%"),
        entry(2, 1, TwoSize, 1.27, Optimal, "approximate, mesh-specific"),
    ]);
    t
}

/// Optimal reference `tau` for a space, if catalogued (any degree for `C0`).
pub fn reference_tau(degree: usize, continuity: usize, mesh: MeshFamily) -> Option<f64> {
    if continuity == 0 && mesh == MeshFamily::Uniform && degree >= 1 {
        return Some(degree as f64 / (degree + 1) as f64);
    }
    tau_table()
        .into_iter()
        .find(|e| e.degree == degree && e.continuity == continuity && e.mesh == mesh && e.role == TauRole::Optimal)
        .map(|e| e.tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform(p: usize, k: usize, n: usize) -> Discretization {
        Discretization::new(p, k, MeshSpec::uniform(n))
    }

    #[test]
    fn linear_closed_form_rates() {
        // (6/h^2)(1 - cos t)/(2 + cos t) relative error ~ t^2/12
        let d = uniform(1, 0, 8);
        let fit = convergence_rate(&d, Scheme::Gauss, ExactMode::one(1), &[8, 16, 32, 64, 128], Precision::Double).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.05, "{}", fit.slope);
        assert!(fit.r_squared > 0.999);
        for p in &fit.points {
            let t = PI * p.h;
            let closed = 6.0 / (p.h * p.h) * (1.0 - t.cos()) / (2.0 + t.cos());
            assert_relative_eq!(p.error, (closed - PI * PI) / (PI * PI), max_relative = 1e-6);
        }
    }

    #[test]
    fn double_and_extended_agree_when_resolvable() {
        let d = uniform(2, 1, 16);
        let m = [ExactMode::one(1), ExactMode::one(3)];
        let a = dispersion_samples(&d, Scheme::Gauss, &m, Precision::Double).unwrap();
        let b = dispersion_samples(&d, Scheme::Gauss, &m, Precision::Extended).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.rel_ev_err, y.rel_ev_err, max_relative = 1e-6);
            assert_relative_eq!(x.omega, (x.mode.j as f64) * PI / 16.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let m = ExactMode::one(1);
        let raw = [(8, 0.125, 1e-20), (16, 0.0625, 1e-21), (32, 0.03125, 1e-22), (64, 0.015625, 0.0)];
        assert!(matches!(fit_slope(m, &raw, 1e-13), Err(Error::DegenerateFit(_))));
        let fit = fit_slope(m, &raw[..3], 1e-30).unwrap();
        assert!(fit.points.iter().all(|p| p.used));
        assert!((fit.slope - 1.0 / 2f64.log10()).abs() < 1e-9);
        let d = uniform(1, 0, 8);
        assert!(convergence_rate(&d, Scheme::Gauss, m, &[8, 16, 32], Precision::Double).is_err());
        assert!(convergence_rate(&d, Scheme::Gauss, ExactMode::one(3), &[8, 16, 32, 64], Precision::Double).is_err());
    }

    #[test]
    fn linear_leading_coefficients() {
        let d = uniform(1, 0, 10);
        let g = leading_coefficient(&d, Scheme::Gauss, 3, Precision::Extended).unwrap();
        // consistent mass overshoots the frequency, lumped mass undershoots it
        assert_relative_eq!(g.coefficient, 1.0 / 24.0, max_relative = 1e-3);
        let l = leading_coefficient(&d, Scheme::Lobatto, 3, Precision::Extended).unwrap();
        assert_relative_eq!(l.coefficient, -1.0 / 24.0, max_relative = 1e-3);
        // wrong power: coefficient samples scale like 1/Omega
        assert!(matches!(
            leading_coefficient(&d, Scheme::Gauss, 4, Precision::Extended),
            Err(Error::InconclusiveFit { .. })
        ));
    }

    #[test]
    fn leading_coefficient_is_affine_in_tau() {
        let d = uniform(2, 1, 10);
        let c = |tau: f64| {
            leading_coefficient(&d, Scheme::Blended { tau }, 5, Precision::Extended)
                .unwrap()
                .coefficient
        };
        let (c0, c1, ch) = (c(0.0), c(1.0), c(0.5));
        assert!(c0 > 0.0 && c1 < 0.0);
        assert_relative_eq!(ch, 0.5 * (c0 + c1), max_relative = 1e-3);
    }

    #[test]
    fn zero_at_brackets() {
        let d = uniform(1, 0, 50);
        // Gauss overshoots and Lobatto undershoots every mode of linear elements
        let r = blend_search(&d, Objective::ZeroAt { kh_over_pi: 0.4 }, (0.0, 1.0)).unwrap();
        assert_eq!(r.target_mode, Some(20));
        assert!(r.post_check.unwrap() < 1e-6);
        assert!(matches!(
            blend_search(&d, Objective::ZeroAt { kh_over_pi: 0.4 }, (0.0, 0.1)),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn band_average_linear() {
        let d = uniform(1, 0, 60);
        let r = blend_search(&d, Objective::BandAverage { lo: 0.0, hi: 0.3 }, (0.0, 1.0)).unwrap();
        // low band of linear elements: close to the leading-term optimum 1/2
        assert!((r.tau - 0.5).abs() < 0.05, "{}", r.tau);
        assert!(r.objective_value.unwrap() < 1e-3);
    }

    #[test]
    fn table_lookups() {
        assert_eq!(reference_tau(6, 0, MeshFamily::Uniform), Some(6.0 / 7.0));
        assert_eq!(reference_tau(11, 0, MeshFamily::Uniform), Some(11.0 / 12.0));
        assert_eq!(reference_tau(4, 1, MeshFamily::Uniform), Some(0.8));
        assert_eq!(reference_tau(3, 2, MeshFamily::Uniform), Some(2.5));
        assert_eq!(reference_tau(2, 1, MeshFamily::TwoSize), Some(1.27));
        assert_eq!(reference_tau(5, 3, MeshFamily::Uniform), None);
        let t = tau_table();
        for v in [5.0 / 6.0, 5.0, 7.0 / 12.0, 15.0 / 16.0, 3.0] {
            assert!(t.iter().any(|e| e.tau == v && e.role == TauRole::Alternative));
        }
    }
}
