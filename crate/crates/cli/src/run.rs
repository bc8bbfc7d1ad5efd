//! Command execution and artifact output.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use freeboundary::mesh::io;
use freeboundary::minimizer::seed::{seed_surface, SeedKind};
use freeboundary::minimizer::{
    critical_annulus, minimize_logged, orthogonality_angle, write_log_csv, AnnulusOptions,
    IterRecord,
};
use freeboundary::verifier::lemmas::{lemma_a_report, sample_field, write_field_csv, SampleSpec};
use freeboundary::verifier::{
    check_boundary_term_limit, check_corollary1, check_corollary2, check_equality_tangency,
    check_first_variation, check_isoperimetric, check_main_theorem, check_monotonicity,
    render_table, suite_passed, to_json, Attestation,
};
use freeboundary::{AmbientVector, AttestedSurface, Error, VerificationReport};
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig};
use crate::fixtures::fixture_catalog;
use crate::suite::{run_full_suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_STALL: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Core(Error::Stall { .. }) => EXIT_STALL,
            _ => EXIT_PRECONDITION,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Exit status and the text printed on stdout.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub artifacts: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Attestation file stored next to a mesh.
pub fn sidecar_path(mesh: &Path) -> PathBuf {
    let mut s = mesh.as_os_str().to_owned();
    s.push(".stats.json");
    PathBuf::from(s)
}

/// Loads a mesh with its sidecar attestation, or as a raw mesh without one.
pub fn load_attested(mesh: &Path) -> Result<AttestedSurface> {
    let surface = io::load(mesh)?;
    let side = sidecar_path(mesh);
    if !side.exists() {
        return Ok(AttestedSurface::raw(surface));
    }
    let text = fs::read_to_string(&side).map_err(io_err(&side))?;
    let att: Attestation = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(AttestedSurface::new(surface, att)?)
}

pub fn save_attested(a: &AttestedSurface, mesh: &Path) -> Result<()> {
    io::save(a.surface(), mesh)?;
    let json = serde_json::to_string_pretty(a.attestation()).map_err(Error::from)?;
    write_file(&sidecar_path(mesh), &json)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Verify => verify(cfg),
        Command::FieldSample => field_sample(cfg),
        Command::Report => report(cfg),
    }
}

fn analytic_tag(kind: &SeedKind) -> Option<&'static str> {
    match kind {
        SeedKind::Disk { .. } => Some("equatorial disk"),
        SeedKind::TiltedDisk { .. } => Some("flat disk through the origin"),
        SeedKind::Chord { offset, .. } if *offset == 0.0 => Some("diameter"),
        SeedKind::GreatCircle { .. } => Some("great circle"),
        SeedKind::CliffordTorus { .. } => Some("Clifford torus"),
        SeedKind::Helicoid { .. } => Some("helicoid piece through the origin"),
        _ => None,
    }
}

fn write_log(path: &Path, log: &[IterRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_log_csv(log, &mut BufWriter::new(file))?;
    Ok(())
}

fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let kind = SeedKind::from_name(&cfg.seed, &cfg.seed_params)?;
    ensure_dir(&cfg.output_dir)?;
    let name = cfg.output_name();
    let mesh_path = cfg.output_dir.join(format!("{name}.noff"));
    let log_path = cfg.output_dir.join(format!("{name}.log.csv"));
    let mut artifacts = vec![mesh_path.clone(), sidecar_path(&mesh_path)];

    let attested = if cfg.analytic {
        let tag = analytic_tag(&kind).ok_or_else(|| {
            RunError::Input(format!("seed '{}' has no analytic attestation", cfg.seed))
        })?;
        AttestedSurface::analytic(seed_surface(&kind)?, tag)
    } else if let SeedKind::Annulus {
        radius,
        rings,
        segments,
    } = kind
    {
        let opts = AnnulusOptions {
            grad_tol: cfg.solver.grad_tol,
            ..AnnulusOptions::default()
        };
        let (s, stats) = critical_annulus(radius, rings, segments, &opts)?;
        let record = IterRecord {
            iter: stats.iterations,
            area: stats.final_area,
            grad_norm: stats.final_grad_norm,
            max_angle: orthogonality_angle(&s).unwrap_or(f64::NAN),
        };
        write_log(&log_path, &[record])?;
        artifacts.push(log_path.clone());
        AttestedSurface::from_solver(s, stats, false)
    } else {
        let seed = seed_surface(&kind)?;
        if seed.is_closed() {
            return Err(RunError::Input(format!(
                "seed '{}' is closed; only analytic = true applies",
                cfg.seed
            )));
        }
        let mut log = Vec::new();
        let result = minimize_logged(&seed, &cfg.solver, &mut log);
        write_log(&log_path, &log)?;
        artifacts.push(log_path.clone());
        let (s, stats) = result?;
        AttestedSurface::from_solver(s, stats, cfg.solver.fixed_boundary)
    };
    save_attested(&attested, &mesh_path)?;
    let stdout = format!(
        "{}\narea {:.12}\n{}\n",
        mesh_path.display(),
        attested.surface().surface_measure(),
        attested.attestation().describe()
    );
    let status = match attested.attestation() {
        Attestation::Solver { stats, .. } if !stats.converged => EXIT_STALL,
        _ => EXIT_OK,
    };
    Ok(Outcome {
        status,
        stdout,
        artifacts,
    })
}

fn run_check(cfg: &RunConfig, a: &AttestedSurface, check: &str) -> Result<VerificationReport> {
    let n = a.surface().ambient_dim();
    let point = |coords: &[f64], field: &str| -> Result<AmbientVector> {
        if coords.len() != n {
            return Err(ConfigError::Field {
                field: field.into(),
                message: format!("needs {n} coordinates, got {}", coords.len()),
            }
            .into());
        }
        Ok(AmbientVector::from(coords.to_vec()))
    };
    let y = || point(&cfg.y, "y");
    let tol = cfg.tol_disc;
    Ok(match check {
        "main" => check_main_theorem(a, tol)?,
        "tangency" => check_equality_tangency(a, &y()?, tol)?,
        "first_variation" => check_first_variation(a, &y()?, cfg.radius, cfg.tolerance)?,
        "boundary_limit" => check_boundary_term_limit(a, &y()?, &cfg.limit_radii, cfg.tolerance)?,
        "monotonicity" => {
            let center = if cfg.center.is_empty() {
                AmbientVector::zeros(n)
            } else {
                point(&cfg.center, "center")?
            };
            check_monotonicity(a, &center, &cfg.mono_radii)?
        }
        "corollary1" => check_corollary1(a, tol)?,
        "corollary2" => {
            let k = if cfg.cone_k == 0 {
                a.surface().k() + 1
            } else {
                cfg.cone_k
            };
            check_corollary2(a, k, tol)?
        }
        "isoperimetric" => check_isoperimetric(a, tol)?,
        other => {
            return Err(ConfigError::Field {
                field: "checks".into(),
                message: format!("unknown check '{other}'"),
            }
            .into())
        }
    })
}

fn finish_reports(
    reports: &[VerificationReport],
    json_path: PathBuf,
    mut artifacts: Vec<PathBuf>,
) -> Result<Outcome> {
    write_file(&json_path, &to_json(reports)?)?;
    artifacts.insert(0, json_path);
    Ok(Outcome {
        status: if suite_passed(reports) {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        stdout: render_table(reports),
        artifacts,
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let mesh = cfg.mesh.as_ref().expect("validated");
    let a = load_attested(mesh)?;
    if cfg.checks.is_empty() {
        return Err(ConfigError::Field {
            field: "checks".into(),
            message: "no checks requested".into(),
        }
        .into());
    }
    let reports = cfg
        .checks
        .iter()
        .map(|c| run_check(cfg, &a, c))
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(&cfg.output_dir)?;
    let stem = mesh.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
    finish_reports(
        &reports,
        cfg.output_dir.join(format!("{stem}.report.json")),
        Vec::new(),
    )
}

fn field_sample(cfg: &RunConfig) -> Result<Outcome> {
    let spec = SampleSpec {
        tol: cfg.quad_tol,
        ..SampleSpec::new(cfg.k, cfg.samples, cfg.rng_seed)
    };
    let rows = sample_field(&spec)?;
    ensure_dir(&cfg.output_dir)?;
    let csv = cfg.output_dir.join(format!("field_k{}.csv", cfg.k));
    let file = fs::File::create(&csv).map_err(io_err(&csv))?;
    write_field_csv(&rows, spec.n, &mut BufWriter::new(file))?;
    let report = lemma_a_report(&spec, &rows);
    finish_reports(
        &[report],
        cfg.output_dir.join(format!("field_k{}.report.json", cfg.k)),
        vec![csv],
    )
}

/// Table of the fixture catalog.
pub fn fixture_table() -> String {
    let mut out = format!(
        "{:<20} {:>9}  {:<16} {}\n",
        "fixture", "tol_disc", "expected fail", "description"
    );
    for f in fixture_catalog() {
        out.push_str(&format!(
            "{:<20} {:>9.1e}  {:<16} {}\n",
            f.name,
            f.tol_disc,
            f.expected_fail.join(","),
            f.description
        ));
    }
    out
}

fn report(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.list_fixtures {
        return Ok(Outcome {
            status: EXIT_OK,
            stdout: fixture_table(),
            artifacts: Vec::new(),
        });
    }
    let suite = SuiteConfig {
        rng_seed: cfg.rng_seed,
        sample_scale: cfg.sample_scale,
        quad_tol: cfg.quad_tol,
        fixtures: cfg.fixtures.clone(),
        lemmas: cfg.lemmas,
    };
    let reports = run_full_suite(&suite).map_err(RunError::Input)?;
    ensure_dir(&cfg.output_dir)?;
    let table = cfg.output_dir.join("suite_report.txt");
    write_file(&table, &render_table(&reports))?;
    finish_reports(
        &reports,
        cfg.output_dir.join("suite_report.json"),
        vec![table],
    )
}
