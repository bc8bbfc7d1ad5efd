use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freeboundary_cli::config::{read_pairs, Command, RunConfig};
use freeboundary_cli::run::{run, EXIT_PRECONDITION};

#[derive(Parser)]
#[command(
    name = "freeboundary",
    version,
    about = "Free-boundary minimal surfaces in the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a seed and drive it to a critical point.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        refine: Option<String>,
        #[arg(long)]
        name: Option<String>,
        /// Write the seed with an analytic attestation instead of solving.
        #[arg(long)]
        analytic: bool,
        #[arg(long)]
        fixed_boundary: bool,
        #[arg(long)]
        sobolev_weight: Option<String>,
        #[arg(long)]
        max_iters: Option<String>,
        #[arg(long)]
        grad_tol: Option<String>,
    },
    /// Run checks on a mesh and its attestation sidecar.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mesh: Option<String>,
        /// Comma-separated: main, tangency, first_variation, boundary_limit,
        /// monotonicity, corollary1, corollary2, isoperimetric.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        #[arg(long)]
        radius: Option<String>,
        #[arg(long)]
        tol_disc: Option<String>,
    },
    /// Sample the field and report the divergence-trace gap.
    FieldSample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        rng: Option<String>,
    },
    /// Run the full suite over the fixture catalog.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rng: Option<String>,
        #[arg(long)]
        fixtures: Option<String>,
        #[arg(long)]
        sample_scale: Option<String>,
        #[arg(long)]
        list_fixtures: bool,
    },
}

fn pairs(
    common: &Common,
    flags: Vec<(&str, Option<String>)>,
) -> Result<Vec<(String, String)>, String> {
    let mut out = match &common.config {
        Some(p) => read_pairs(p).map_err(|e| e.to_string())?,
        None => Vec::new(),
    };
    if let Some(o) = &common.out {
        out.push(("output_dir".into(), o.clone()));
    }
    out.extend(
        flags
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
    );
    for s in &common.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got '{s}'"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn flag(on: bool) -> Option<String> {
    on.then(|| "true".to_string())
}

fn config(cmd: Cmd) -> Result<RunConfig, String> {
    let (command, p) = match cmd {
        Cmd::Solve {
            common,
            seed,
            refine,
            name,
            analytic,
            fixed_boundary,
            sobolev_weight,
            max_iters,
            grad_tol,
        } => (
            Command::Solve,
            pairs(
                &common,
                vec![
                    ("seed", seed),
                    ("refine", refine),
                    ("name", name),
                    ("analytic", flag(analytic)),
                    ("fixed_boundary", flag(fixed_boundary)),
                    ("sobolev_weight", sobolev_weight),
                    ("max_iters", max_iters),
                    ("grad_tol", grad_tol),
                ],
            )?,
        ),
        Cmd::Verify {
            common,
            mesh,
            checks,
            y,
            center,
            radius,
            tol_disc,
        } => (
            Command::Verify,
            pairs(
                &common,
                vec![
                    ("mesh", mesh),
                    ("checks", checks),
                    ("y", y),
                    ("center", center),
                    ("radius", radius),
                    ("tol_disc", tol_disc),
                ],
            )?,
        ),
        Cmd::FieldSample {
            common,
            k,
            samples,
            rng,
        } => (
            Command::FieldSample,
            pairs(&common, vec![("k", k), ("samples", samples), ("rng", rng)])?,
        ),
        Cmd::Report {
            common,
            rng,
            fixtures,
            sample_scale,
            list_fixtures,
        } => (
            Command::Report,
            pairs(
                &common,
                vec![
                    ("rng", rng),
                    ("fixtures", fixtures),
                    ("sample_scale", sample_scale),
                    ("list_fixtures", flag(list_fixtures)),
                ],
            )?,
        ),
    };
    RunConfig::from_pairs(command, &p).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PRECONDITION as u8);
        }
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
