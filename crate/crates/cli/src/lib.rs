pub mod config;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use iga_dispersion::analysis::{budget_1d, budget_2d, sample_eigenfunction, spectrum_rows, ErrorBudget, ExactMode};
use iga_dispersion::assembly::{assemble_2d, assemble_scheme, write_triplets, Form2d, Pencil, Scheme};
use iga_dispersion::dispersion::{blend_search, convergence_rate, tau_table, Discretization};
use iga_dispersion::eigen::{solve_explicit_2d, solve_pencil};
use iga_dispersion::spline::{build_space, SplineSpace};
use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};

use config::{Command, Format, Options, Resolved};
use output::Table;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or unwritable output (exit 2).
    Config(String),
    /// Failure of the numerics (exit 3).
    Numerical(iga_dispersion::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl From<iga_dispersion::Error> for CliError {
    fn from(e: iga_dispersion::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

enum Artifact {
    Csv(Table),
    Json(Value),
}

struct Outcome {
    artifact: Artifact,
    summary: Value,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn unwritable(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("out: cannot write {}: {e}", path.display()))
}

/// Files created by this run; removed again unless the run completes.
#[derive(Default)]
pub struct Created(Vec<PathBuf>);

impl Created {
    fn create(&mut self, path: &Path) -> Result<File, CliError> {
        let f = File::create(path).map_err(|e| unwritable(path, e))?;
        self.0.push(path.to_path_buf());
        Ok(f)
    }

    pub fn new() -> Self {
        Created(Vec::new())
    }

    pub fn discard(self) {
        for p in self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Runs one command; files created before a failure are left in `created`.
pub fn run(opts: Options, created: &mut Created) -> Result<(), CliError> {
    let cfg = Resolved::from_options(opts.layered()?)?;
    info!("resolved config: {cfg:?}");

    // Open outputs before computing so an unwritable path fails fast.
    let out = match &cfg.out {
        Some(path) => Some((created.create(path)?, created.create(&sidecar_path(path))?)),
        None => None,
    };
    let dump = match &cfg.dump_pencil {
        Some(path) => Some(created.create(path)?),
        None => None,
    };

    let outcome = compute(&cfg, dump)?;
    info!("summary: {}", outcome.summary);

    match out {
        Some((file, side)) => {
            let path = cfg.out.as_deref().unwrap();
            write_artifact(&outcome.artifact, file).map_err(|e| unwritable(path, e))?;
            let echo = json!({ "config": to_json(&cfg), "result": outcome.summary });
            write_json(&echo, side).map_err(|e| unwritable(path, e))?;
        }
        None => write_artifact(&outcome.artifact, std::io::stdout().lock())
            .map_err(|e| CliError::Config(format!("out: cannot write stdout: {e}")))?,
    }
    Ok(())
}

fn write_json<W: Write>(v: &Value, w: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    w.flush()
}

fn write_artifact<W: Write>(a: &Artifact, w: W) -> std::io::Result<()> {
    match a {
        Artifact::Csv(t) => t.write_csv(BufWriter::new(w)).map_err(std::io::Error::other),
        Artifact::Json(v) => write_json(v, w),
    }
}

fn discretization(cfg: &Resolved) -> Discretization {
    Discretization::new(cfg.p, cfg.continuity, cfg.mesh.clone())
}

fn pencils(cfg: &Resolved) -> Result<(SplineSpace, Pencil, Pencil), CliError> {
    let space = build_space(cfg.p, cfg.continuity, &cfg.mesh)?;
    let exact = assemble_scheme(&space, Scheme::Gauss)?;
    let pencil = assemble_scheme(&space, cfg.scheme)?;
    Ok((space, pencil, exact))
}

fn compute(cfg: &Resolved, dump: Option<File>) -> Result<Outcome, CliError> {
    if let Some(file) = dump {
        let (_, pencil, _) = pencils(cfg)?;
        let path = cfg.dump_pencil.as_deref().unwrap();
        write_triplets(&pencil, BufWriter::new(file)).map_err(|e| unwritable(path, e))?;
    }
    match cfg.command {
        Command::Spectrum | Command::Budget => budgets(cfg),
        Command::Converge => {
            let mode = match cfg.mode_k {
                Some(k) => ExactMode::two(cfg.mode, k),
                None => ExactMode::one(cfg.mode),
            };
            let fit = convergence_rate(&discretization(cfg), cfg.scheme, mode, &cfg.sizes, cfg.precision)?;
            let summary = json!({ "slope": fit.slope, "r_squared": fit.r_squared, "floor": fit.floor });
            let artifact = match cfg.format {
                Format::Csv => Artifact::Csv(Table::rates(&fit.points)),
                Format::Json => Artifact::Json(to_json(&fit)),
            };
            Ok(Outcome { artifact, summary })
        }
        Command::BlendSearch => {
            let r = blend_search(&discretization(cfg), cfg.objective, cfg.bracket)?;
            if let Some(w) = &r.warning {
                warn!("{w}");
            }
            let v = to_json(&r);
            Ok(Outcome {
                artifact: Artifact::Json(v.clone()),
                summary: v,
            })
        }
        Command::Eigenfunction => {
            let (space, pencil, _) = pencils(cfg)?;
            let spectrum = solve_pencil(&pencil)?;
            let samples = sample_eigenfunction(&space, &spectrum, cfg.mode, cfg.points)?;
            let summary = json!({ "mu": spectrum.eigenvalues()[cfg.mode - 1] });
            let artifact = match cfg.format {
                Format::Csv => Artifact::Csv(Table::eigenfunction(&samples)),
                Format::Json => Artifact::Json(to_json(&samples)),
            };
            Ok(Outcome { artifact, summary })
        }
        Command::TauTable => {
            let table = tau_table();
            Ok(Outcome {
                summary: json!({ "entries": table.len() }),
                artifact: Artifact::Json(to_json(&table)),
            })
        }
    }
}

fn budgets(cfg: &Resolved) -> Result<Outcome, CliError> {
    let (space, pencil, exact) = pencils(cfg)?;
    let spec1 = solve_pencil(&pencil)?;
    let mut summary = serde_json::Map::new();
    let list: Vec<ErrorBudget> = if cfg.dim == 1 {
        budget_1d(&space, &pencil, &exact, &spec1)?
    } else {
        let b2 = budget_2d(&space, &pencil, &exact, &spec1)?;
        if cfg.dense_2d {
            let p2 = assemble_2d(&pencil, Form2d::Explicit)?;
            let (m2, k2) = p2.explicit().expect("explicit form");
            let dense = solve_explicit_2d(k2, m2)?;
            let diff = dense
                .eigenvalues()
                .iter()
                .zip(b2.spectrum.eigenvalues())
                .map(|(a, b)| (a - b).abs() / b.abs())
                .fold(0.0, f64::max);
            if diff > 1e-8 {
                warn!("dense and composed 2D spectra differ by {diff:e}");
            }
            summary.insert("dense_2d_max_rel_diff".into(), json!(diff));
        }
        b2.budgets
    };
    let worst = list.iter().map(|b| b.residual.abs()).fold(0.0, f64::max);
    summary.insert("modes".into(), json!(list.len()));
    summary.insert("max_budget_residual".into(), json!(worst));
    let artifact = match (cfg.command, cfg.format) {
        (Command::Spectrum, Format::Csv) => Artifact::Csv(Table::spectrum(&spectrum_rows(&list, cfg.mesh.reference_h()))),
        (Command::Spectrum, Format::Json) => Artifact::Json(to_json(&spectrum_rows(&list, cfg.mesh.reference_h()))),
        (_, Format::Csv) => Artifact::Csv(Table::budget(&list)),
        (_, Format::Json) => Artifact::Json(to_json(&list)),
    };
    Ok(Outcome {
        artifact,
        summary: Value::Object(summary),
    })
}
