//! Run configuration: a `key = value` file with flag overrides.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use freeboundary::minimizer::SolveOptions;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
}

fn field_err(field: &str, message: impl Display) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    FieldSample,
    Report,
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_pairs(&text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Seed kind for `solve`.
    pub seed: String,
    /// Numeric seed parameters (`refine`, `radius`, `rings`, ...).
    pub seed_params: HashMap<String, f64>,
    /// Write the seed with an analytic attestation instead of solving.
    pub analytic: bool,
    pub solver: SolveOptions,
    pub mesh: Option<PathBuf>,
    pub checks: Vec<String>,
    /// Point for the boundary-based checks; snapped to the nearest boundary vertex.
    pub y: Vec<f64>,
    /// Center for the monotonicity check; the origin when empty.
    pub center: Vec<f64>,
    pub radius: f64,
    pub limit_radii: Vec<f64>,
    pub mono_radii: Vec<f64>,
    pub tol_disc: f64,
    pub tolerance: f64,
    /// Cone dimension for the closed-surface corollary; `mesh k + 1` when 0.
    pub cone_k: usize,
    pub k: usize,
    pub samples: usize,
    pub rng_seed: u64,
    pub quad_tol: f64,
    /// Fixture names for `report`; all fixtures when empty.
    pub fixtures: Vec<String>,
    /// Divides the randomized sample counts of `report`.
    pub sample_scale: usize,
    /// Run the field suites in `report`.
    pub lemmas: bool,
    /// Print the fixture catalog instead of running `report`.
    pub list_fixtures: bool,
    pub output_dir: PathBuf,
    pub name: Option<String>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            seed: "disk".into(),
            seed_params: HashMap::new(),
            analytic: false,
            solver: SolveOptions::default(),
            mesh: None,
            checks: vec!["main".into(), "isoperimetric".into()],
            y: vec![1.0, 0.0, 0.0],
            center: Vec::new(),
            radius: 0.3,
            limit_radii: vec![0.4, 0.2, 0.1, 0.05],
            mono_radii: (1..=9).map(|i| i as f64 / 10.0).collect(),
            tol_disc: 2e-3,
            tolerance: 5e-2,
            cone_k: 0,
            k: 3,
            samples: 100_000,
            rng_seed: 42,
            quad_tol: freeboundary::field::DEFAULT_TOL,
            fixtures: Vec::new(),
            sample_scale: 1,
            lemmas: true,
            list_fixtures: false,
            output_dir: PathBuf::from("."),
            name: None,
        }
    }

    /// Later pairs (flags) override earlier ones (file) before anything is
    /// parsed. Every error names the offending field.
    pub fn from_pairs(command: Command, pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut c = Self::defaults(command);
        let mut seed_params = BTreeMap::new();
        let last: BTreeMap<&str, &str> = pairs
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        for (key, value) in last {
            c.apply(key, value, &mut seed_params)?;
        }
        c.seed_params = seed_params.into_iter().collect();
        c.validate()?;
        Ok(c)
    }

    fn apply(
        &mut self,
        key: &str,
        value: &str,
        seed_params: &mut BTreeMap<String, f64>,
    ) -> Result<(), ConfigError> {
        match key {
            "seed" => self.seed = value.to_string(),
            "refine" | "cylinder_radius" | "rings" | "segments" | "lift" | "angle" | "offset"
            | "amplitude" | "height" => {
                let name = if key == "cylinder_radius" {
                    "radius"
                } else {
                    key
                };
                seed_params.insert(name.to_string(), num(key, value)?);
            }
            "analytic" => self.analytic = boolean(key, value)?,
            "max_iters" => self.solver.max_iters = num(key, value)?,
            "grad_tol" => self.solver.grad_tol = num(key, value)?,
            "fixed_boundary" => self.solver.fixed_boundary = boolean(key, value)?,
            "allow_boundary_sliding" => self.solver.allow_boundary_sliding = boolean(key, value)?,
            "sobolev_weight" => self.solver.sobolev_weight = num(key, value)?,
            "initial_step" => self.solver.step_rule.initial_step = Some(num(key, value)?),
            "shrink" => self.solver.step_rule.shrink = num(key, value)?,
            "sufficient_decrease" => self.solver.step_rule.sufficient_decrease = num(key, value)?,
            "max_halvings" => self.solver.step_rule.max_halvings = num(key, value)?,
            "spectral" => self.solver.step_rule.spectral = boolean(key, value)?,
            "mesh" => self.mesh = Some(PathBuf::from(value)),
            "checks" => self.checks = words(value),
            "y" => self.y = list(key, value)?,
            "center" => self.center = list(key, value)?,
            "radius" => self.radius = num(key, value)?,
            "limit_radii" => self.limit_radii = list(key, value)?,
            "mono_radii" => self.mono_radii = list(key, value)?,
            "tol_disc" => self.tol_disc = num(key, value)?,
            "tolerance" => self.tolerance = num(key, value)?,
            "cone_k" => self.cone_k = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "rng" | "rng_seed" => self.rng_seed = num(key, value)?,
            "quad_tol" => self.quad_tol = num(key, value)?,
            "fixtures" => self.fixtures = words(value),
            "sample_scale" => self.sample_scale = num(key, value)?,
            "lemmas" => self.lemmas = boolean(key, value)?,
            "list_fixtures" => self.list_fixtures = boolean(key, value)?,
            "output_dir" | "out" => self.output_dir = PathBuf::from(value),
            "name" => self.name = Some(value.to_string()),
            _ => return Err(field_err(key, "unknown field")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("grad_tol", self.solver.grad_tol),
            ("radius", self.radius),
            ("tol_disc", self.tol_disc),
            ("tolerance", self.tolerance),
            ("quad_tol", self.quad_tol),
            ("shrink", self.solver.step_rule.shrink),
            (
                "sufficient_decrease",
                self.solver.step_rule.sufficient_decrease,
            ),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(field_err(field, format!("must be positive, got {v}")));
            }
        }
        if let Some(h) = self.solver.step_rule.initial_step {
            if !(h > 0.0) {
                return Err(field_err(
                    "initial_step",
                    format!("must be positive, got {h}"),
                ));
            }
        }
        for (field, v) in [
            ("shrink", self.solver.step_rule.shrink),
            (
                "sufficient_decrease",
                self.solver.step_rule.sufficient_decrease,
            ),
        ] {
            if v >= 1.0 {
                return Err(field_err(field, format!("must be below 1, got {v}")));
            }
        }
        if !(self.solver.sobolev_weight >= 0.0) {
            return Err(field_err("sobolev_weight", "must be non-negative"));
        }
        for (field, v) in [
            ("max_iters", self.solver.max_iters),
            ("samples", self.samples),
            ("sample_scale", self.sample_scale),
            ("k", self.k),
        ] {
            if v == 0 {
                return Err(field_err(field, "must be at least 1"));
            }
        }
        for (field, radii) in [
            ("limit_radii", &self.limit_radii),
            ("mono_radii", &self.mono_radii),
        ] {
            if radii.iter().any(|&r| !(r > 0.0)) {
                return Err(field_err(field, "radii must be positive"));
            }
        }
        if self.command == Command::Verify && self.mesh.is_none() {
            return Err(field_err("mesh", "verify needs a mesh"));
        }
        Ok(())
    }

    /// File stem for `solve` outputs.
    pub fn output_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.seed.clone())
    }
}

fn num<T: FromStr>(field: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| field_err(field, format!("cannot parse '{value}': {e}")))
}

fn boolean(field: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(field_err(
            field,
            format!("expected a boolean, got '{other}'"),
        )),
    }
}

fn words(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: Display,
{
    words(value).iter().map(|w| num(field, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn file_then_flags() {
        let mut p = parse_pairs("# solver\nseed = annulus\nrings = 17 # coarse\n\ngrad_tol=1e-9\n")
            .unwrap();
        p.extend(pairs(&[("rings", "33")]));
        let c = RunConfig::from_pairs(Command::Solve, &p).unwrap();
        assert_eq!(c.seed, "annulus");
        assert_eq!(c.seed_params["rings"], 33.0);
        assert_eq!(c.solver.grad_tol, 1e-9);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_pairs(Command::Solve, &pairs(&[("grad_tol", "-1")])).unwrap_err();
        assert!(e.to_string().contains("grad_tol"), "{e}");
        let e = RunConfig::from_pairs(Command::Solve, &pairs(&[("refine", "five")])).unwrap_err();
        assert!(e.to_string().contains("refine"), "{e}");
        let e = RunConfig::from_pairs(Command::Solve, &pairs(&[("bogus", "1")])).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RunConfig::from_pairs(Command::Verify, &[]).unwrap_err();
        assert!(e.to_string().contains("mesh"), "{e}");
        assert_eq!(
            parse_pairs("no equals sign"),
            Err(ConfigError::Syntax { line: 1 })
        );
    }

    #[test]
    fn lists_parse() {
        let c = RunConfig::from_pairs(
            Command::Verify,
            &pairs(&[
                ("mesh", "a.noff"),
                ("y", "0, 1, 0"),
                ("checks", "main, tangency"),
            ]),
        )
        .unwrap();
        assert_eq!(c.y, vec![0.0, 1.0, 0.0]);
        assert_eq!(c.checks, vec!["main", "tangency"]);
    }
}
