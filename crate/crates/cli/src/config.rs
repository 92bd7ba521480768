use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use iga_dispersion::assembly::{Scheme, DENSE_2D_MAX_ELEMENTS, MAX_2D_DIM};
use iga_dispersion::dispersion::{Objective, Precision};
use iga_dispersion::spline::MeshSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_DEGREE: usize = 2;
pub const DEFAULT_ELEMENTS_1D: usize = 1000;
pub const DEFAULT_ELEMENTS_2D: usize = 100;
pub const DEFAULT_POINTS: usize = 2048;
pub const DEFAULT_SIZES: [usize; 5] = [8, 16, 32, 64, 128];
pub const L_OVER_N_CONVENTION: &str = "l/N with N the number of discrete modes after Dirichlet reduction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Per-mode error budget rows against l/N (CSV header fixed).
    Spectrum,
    /// Full per-mode budget records including the paired exact mode.
    Budget,
    /// Convergence rate of one mode under mesh refinement.
    Converge,
    /// Search for the blending parameter under an objective.
    BlendSearch,
    /// Sample a discrete eigenfunction next to the exact one.
    Eigenfunction,
    /// Catalog of reference blending parameters.
    TauTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Uniform,
    TwoSize,
    Stretched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Gauss,
    Lobatto,
    Blended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    LeadingTermCancel,
    ZeroAt,
    BandAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionKind {
    Double,
    Extended,
}

/// Raw options; every field is optional so a JSON config and the command
/// line can be layered.
#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(name = "iga-disp", version, allow_negative_numbers = true, about = "Dispersion and eigen-error budgets of B-spline discretizations")]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Command to run (may also come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Spline degree.
    #[arg(long = "p")]
    pub p: Option<usize>,

    /// Inter-element continuity (default p-1).
    #[arg(long)]
    pub continuity: Option<usize>,

    /// Spatial dimension, 1 or 2.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Elements (per direction in 2D).
    #[arg(long = "n")]
    #[serde(alias = "n")]
    pub n_elements: Option<usize>,

    #[arg(long, value_enum)]
    pub mesh: Option<MeshKind>,

    /// Growth ratio of the stretched mesh.
    #[arg(long)]
    pub alpha: Option<f64>,

    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,

    /// Lobatto weight of the blended scheme.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Mode index j (converge, eigenfunction).
    #[arg(long)]
    pub mode: Option<usize>,

    /// Second mode index k for 2D convergence.
    #[arg(long)]
    pub mode_k: Option<usize>,

    /// Element counts of the refinement sequence.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    #[arg(long, value_enum)]
    pub precision: Option<PrecisionKind>,

    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveKind>,

    /// Target kh/pi of the zero-at objective.
    #[arg(long)]
    pub target: Option<f64>,

    /// l/N band `lo,hi` of the band-average objective.
    #[arg(long, value_delimiter = ',')]
    pub band: Option<Vec<f64>>,

    /// Search bracket `lo,hi` for tau.
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,

    /// Sample count of the eigenfunction command.
    #[arg(long)]
    pub points: Option<usize>,

    /// Output path; stdout when absent (no sidecar).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Solve 2D spectra densely as a cross-check (at most 40 elements).
    #[arg(long)]
    pub dense_2d: bool,

    /// Write the 1D pencil as `K i j v` / `M i j v` triplets.
    #[arg(long)]
    pub dump_pencil: Option<PathBuf>,
}

impl Options {
    /// Loads the config file (if any) and lets flags override it.
    pub fn layered(self) -> Result<Options, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_config(&path)?;
        Ok(Options {
            command: self.command.or(file.command),
            config: self.config,
            p: self.p.or(file.p),
            continuity: self.continuity.or(file.continuity),
            dim: self.dim.or(file.dim),
            n_elements: self.n_elements.or(file.n_elements),
            mesh: self.mesh.or(file.mesh),
            alpha: self.alpha.or(file.alpha),
            scheme: self.scheme.or(file.scheme),
            tau: self.tau.or(file.tau),
            mode: self.mode.or(file.mode),
            mode_k: self.mode_k.or(file.mode_k),
            sizes: self.sizes.or(file.sizes),
            precision: self.precision.or(file.precision),
            objective: self.objective.or(file.objective),
            target: self.target.or(file.target),
            band: self.band.or(file.band),
            bracket: self.bracket.or(file.bracket),
            points: self.points.or(file.points),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            dense_2d: self.dense_2d || file.dense_2d,
            dump_pencil: self.dump_pencil.or(file.dump_pencil),
        })
    }
}

fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {}: {e}", path.display())))
}

/// Fully defaulted and validated configuration; echoed in the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub p: usize,
    pub continuity: usize,
    pub dim: usize,
    pub n_elements: usize,
    pub mesh: MeshSpec,
    pub scheme: Scheme,
    pub tau: Option<f64>,
    pub mode: usize,
    pub mode_k: Option<usize>,
    pub sizes: Vec<usize>,
    pub precision: Precision,
    pub objective: Objective,
    pub bracket: (f64, f64),
    pub points: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub dense_2d: bool,
    pub dump_pencil: Option<PathBuf>,
    pub l_over_n: &'static str,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn pair(field: &str, v: Option<Vec<f64>>, default: (f64, f64)) -> Result<(f64, f64), CliError> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 2 && v[0].is_finite() && v[1].is_finite() && v[0] < v[1] => Ok((v[0], v[1])),
        Some(v) => Err(invalid(field, format!("expected `lo,hi` with lo < hi, got {v:?}"))),
    }
}

impl Resolved {
    pub fn from_options(o: Options) -> Result<Resolved, CliError> {
        let command = o.command.ok_or_else(|| invalid("command", "missing (give it as the first argument or in the config)"))?;
        let p = o.p.unwrap_or(DEFAULT_DEGREE);
        if p == 0 {
            return Err(invalid("p", "degree must be at least 1"));
        }
        let continuity = o.continuity.unwrap_or(p - 1);
        if continuity > p - 1 {
            return Err(invalid("continuity", format!("need 0 <= continuity <= p-1 = {}, got {continuity}", p - 1)));
        }
        let dim = o.dim.unwrap_or(1);
        if dim != 1 && dim != 2 {
            return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        let n_elements = o
            .n_elements
            .unwrap_or(if dim == 1 { DEFAULT_ELEMENTS_1D } else { DEFAULT_ELEMENTS_2D });
        if n_elements == 0 {
            return Err(invalid("n_elements", "must be positive"));
        }
        let mesh = match (o.mesh.unwrap_or(MeshKind::Uniform), o.alpha) {
            (MeshKind::Stretched, Some(a)) => MeshSpec::stretched(n_elements, a),
            (MeshKind::Stretched, None) => return Err(invalid("alpha", "required for the stretched mesh")),
            (_, Some(_)) => return Err(invalid("alpha", "only valid with mesh = stretched")),
            (MeshKind::Uniform, None) => MeshSpec::uniform(n_elements),
            (MeshKind::TwoSize, None) => MeshSpec::two_size(n_elements),
        };
        mesh.validate().map_err(|e| invalid("mesh", e))?;

        let scheme = match (o.scheme.unwrap_or(SchemeKind::Gauss), o.tau) {
            (SchemeKind::Blended, Some(tau)) if tau.is_finite() => Scheme::Blended { tau },
            (SchemeKind::Blended, Some(tau)) => return Err(invalid("tau", format!("must be finite, got {tau}"))),
            (SchemeKind::Blended, None) => return Err(invalid("tau", "required when scheme = blended")),
            (_, Some(_)) => return Err(invalid("tau", "only valid with scheme = blended")),
            (SchemeKind::Gauss, None) => Scheme::Gauss,
            (SchemeKind::Lobatto, None) => Scheme::Lobatto,
        };

        let mode = o.mode.unwrap_or(1);
        if mode == 0 {
            return Err(invalid("mode", "modes are 1-based"));
        }
        if o.mode_k == Some(0) {
            return Err(invalid("mode_k", "modes are 1-based"));
        }
        if o.mode_k.is_some() && dim != 2 {
            return Err(invalid("mode_k", "only valid with dim = 2"));
        }
        let mode_k = if dim == 2 { Some(o.mode_k.unwrap_or(mode)) } else { None };

        let sizes = o.sizes.unwrap_or_else(|| DEFAULT_SIZES.to_vec());
        if sizes.contains(&0) {
            return Err(invalid("sizes", "element counts must be positive"));
        }
        let precision = match o.precision.unwrap_or(PrecisionKind::Extended) {
            PrecisionKind::Double => Precision::Double,
            PrecisionKind::Extended => Precision::Extended,
        };

        let objective = match o.objective.unwrap_or(ObjectiveKind::LeadingTermCancel) {
            ObjectiveKind::LeadingTermCancel => Objective::LeadingTermCancel,
            ObjectiveKind::ZeroAt => {
                let t = o.target.ok_or_else(|| invalid("target", "required for objective = zero-at"))?;
                if !(t > 0.0 && t <= 1.0) {
                    return Err(invalid("target", format!("kh/pi must lie in (0, 1], got {t}")));
                }
                Objective::ZeroAt { kh_over_pi: t }
            }
            ObjectiveKind::BandAverage => {
                let (lo, hi) = pair("band", o.band.clone(), (0.0, 1.0))?;
                if lo < 0.0 || hi > 1.0 {
                    return Err(invalid("band", "must lie within [0, 1]"));
                }
                Objective::BandAverage { lo, hi }
            }
        };
        let bracket = pair("bracket", o.bracket, (0.0, 1.0))?;

        let points = o.points.unwrap_or(DEFAULT_POINTS);
        if points < 2 {
            return Err(invalid("points", "need at least 2 samples"));
        }

        let format = match (command, o.format) {
            (Command::BlendSearch | Command::TauTable, Some(Format::Csv)) => {
                return Err(invalid("format", "this command writes json only"))
            }
            (Command::BlendSearch | Command::TauTable, _) => Format::Json,
            (_, f) => f.unwrap_or(Format::Csv),
        };

        if dim == 2 {
            match command {
                Command::Eigenfunction | Command::BlendSearch => {
                    return Err(invalid("dim", "this command is 1D only"))
                }
                _ => {}
            }
            let n1 = p + 1 + (p - continuity) * (n_elements - 1) - 2;
            if n1.saturating_mul(n1) > MAX_2D_DIM {
                return Err(invalid("n_elements", format!("2D size {} exceeds {MAX_2D_DIM}", n1 * n1)));
            }
        }
        if o.dense_2d {
            if dim != 2 {
                return Err(invalid("dense_2d", "only valid with dim = 2"));
            }
            if n_elements > DENSE_2D_MAX_ELEMENTS {
                return Err(invalid(
                    "n_elements",
                    format!("dense 2D path is capped at {DENSE_2D_MAX_ELEMENTS} elements per direction, got {n_elements}"),
                ));
            }
        }

        Ok(Resolved {
            command,
            p,
            continuity,
            dim,
            n_elements,
            mesh,
            scheme,
            tau: scheme_tau(scheme),
            mode,
            mode_k,
            sizes,
            precision,
            objective,
            bracket,
            points,
            format,
            out: o.out,
            dense_2d: o.dense_2d,
            dump_pencil: o.dump_pencil,
            l_over_n: L_OVER_N_CONVENTION,
        })
    }
}

fn scheme_tau(s: Scheme) -> Option<f64> {
    match s {
        Scheme::Blended { tau } => Some(tau),
        _ => None,
    }
}
