//! The full verification suite over the fixture catalog.

use std::collections::BTreeMap;
use std::sync::Arc;

use freeboundary::verifier::lemmas::{
    derivative_suite, lemma_a_suite, lemma_b_suite, lemma_c_suite, SampleSpec,
};
use freeboundary::verifier::{
    check_boundary_term_limit, check_corollary1, check_corollary2, check_equality_tangency,
    check_first_variation, check_isoperimetric, check_main_theorem, check_monotonicity,
    first_variation_refinement, run_suite, Job,
};
use freeboundary::{
    AmbientVector, AttestedSurface, Error, Result, SimplicialSurface, VerificationReport,
};

use crate::fixtures::{fixture_catalog, Fixture};

/// Radius of the balls in the first-variation balance.
pub const BALANCE_RADIUS: f64 = 0.3;
/// Shrinking radii for the boundary-term limit.
pub const LIMIT_RADII: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
/// Largest allowed ratio between first-variation residuals of successive levels.
pub const REFINEMENT_RATIO: f64 = 0.7;
pub const LIMIT_TOLERANCE: f64 = 5e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub rng_seed: u64,
    /// Divides every randomized sample count.
    pub sample_scale: usize,
    pub quad_tol: f64,
    /// Fixture names to include; all when empty.
    pub fixtures: Vec<String>,
    /// Include the randomized and sequence-based field suites.
    pub lemmas: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            rng_seed: 42,
            sample_scale: 1,
            quad_tol: freeboundary::field::DEFAULT_TOL,
            fixtures: Vec::new(),
            lemmas: true,
        }
    }
}

type Built = BTreeMap<&'static str, (Fixture, std::result::Result<Arc<AttestedSurface>, String>)>;

pub fn build_fixtures(names: &[String]) -> std::result::Result<Built, String> {
    let catalog = fixture_catalog();
    if let Some(bad) = names
        .iter()
        .find(|n| !catalog.iter().any(|f| f.name == n.as_str()))
    {
        return Err(format!("unknown fixture '{bad}'"));
    }
    Ok(catalog
        .into_iter()
        .filter(|f| names.is_empty() || names.iter().any(|n| n == f.name))
        .map(|f| {
            let built = f.build().map(Arc::new).map_err(|e| e.to_string());
            (f.name, (f, built))
        })
        .collect())
}

/// First boundary vertex, the default base point for boundary checks.
fn boundary_point(s: &SimplicialSurface) -> Result<AmbientVector> {
    (0..s.vertices().len())
        .find(|&v| s.is_boundary_vertex(v))
        .map(|v| s.vertices()[v].clone())
        .ok_or_else(|| Error::Precondition("surface has no boundary".into()))
}

/// Vertex on the middle ring of the catenoid, where the neck is narrowest.
pub fn catenoid_waist(s: &SimplicialSurface) -> AmbientVector {
    let (_, rings, segments) = crate::fixtures::CATENOID;
    s.vertices()[(rings / 2) * segments].clone()
}

/// Neighbour of the lifted vertex with the largest first coordinate.
pub fn spike_center(s: &SimplicialSurface) -> AmbientVector {
    let apex = (0..s.vertices().len())
        .max_by(|&a, &b| s.vertices()[a].coords()[2].total_cmp(&s.vertices()[b].coords()[2]))
        .expect("spike has vertices");
    let mut best: Option<usize> = None;
    for cell in s.cells().iter().filter(|c| c.contains(&apex)) {
        for &v in cell.iter().filter(|&&v| v != apex) {
            let x = |i: usize| s.vertices()[i].coords()[0];
            if best.is_none_or(|b| x(v) > x(b) || (x(v) == x(b) && v < b)) {
                best = Some(v);
            }
        }
    }
    s.vertices()[best.expect("apex has neighbours")].clone()
}

pub fn disk_radii() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

pub fn catenoid_radii() -> Vec<f64> {
    (1..=12).map(|i| i as f64 * 0.05).collect()
}

pub fn spike_radii() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.04).collect()
}

struct Jobs<'a> {
    built: &'a Built,
    jobs: Vec<Job>,
}

impl Jobs<'_> {
    /// Queues a check on one fixture. A fixture that failed to build turns
    /// into a job that reports the build error.
    fn on(
        &mut self,
        check: &str,
        name: &str,
        run: impl Fn(&AttestedSurface, f64) -> Result<VerificationReport> + Send + Sync + 'static,
    ) {
        let Some((fixture, built)) = self.built.get(name) else {
            return;
        };
        let tol = fixture.tol_disc;
        let job = match built {
            Ok(a) => {
                let a = Arc::clone(a);
                Job::new(check, name, move || run(&a, tol))
            }
            Err(msg) => {
                let msg = msg.clone();
                Job::new(check, name, move || {
                    Err(Error::Precondition(format!(
                        "fixture failed to build: {msg}"
                    )))
                })
            }
        };
        self.jobs
            .push(job.expect_fail(fixture.expects_failure(check)));
    }
}

fn balance(a: &AttestedSurface, tol: f64) -> Result<VerificationReport> {
    check_first_variation(a, &boundary_point(a.surface())?, BALANCE_RADIUS, tol)
}

/// Every job of the suite for the given fixtures.
pub fn suite_jobs(built: &Built, cfg: &SuiteConfig) -> Vec<Job> {
    let mut j = Jobs {
        built,
        jobs: Vec::new(),
    };
    let free = [
        "disk-L3",
        "disk-L4",
        "disk-L5",
        "disk-L6",
        "perturbed-disk-L5",
        "tilted-disk-L4",
        "chord",
        "catenoid",
    ];
    for name in free {
        j.on("main_theorem", name, check_main_theorem);
        j.on("isoperimetric", name, check_isoperimetric);
    }
    for name in ["disk-L5", "tilted-disk-L4", "chord", "catenoid"] {
        j.on("equality_tangency", name, |a, tol| {
            check_equality_tangency(a, &boundary_point(a.surface())?, tol)
        });
    }
    for name in ["disk-L4", "disk-L5", "disk-L6", "catenoid"] {
        j.on("first_variation", name, balance);
    }
    let levels: Vec<Arc<AttestedSurface>> = ["disk-L4", "disk-L5", "disk-L6"]
        .iter()
        .filter_map(|n| built.get(n).and_then(|(_, b)| b.as_ref().ok()).cloned())
        .collect();
    if levels.len() == 3 {
        let tols: Vec<f64> = ["disk-L4", "disk-L5", "disk-L6"]
            .iter()
            .map(|n| built[n].0.tol_disc)
            .collect();
        j.jobs.push(Job::new(
            "first_variation_refinement",
            "disk-L4..L6",
            move || {
                let reports = levels
                    .iter()
                    .zip(&tols)
                    .map(|(a, &t)| balance(a, t))
                    .collect::<Result<Vec<_>>>()?;
                first_variation_refinement(&reports, REFINEMENT_RATIO)
            },
        ));
    }
    for name in ["disk-L6", "chord"] {
        j.on("boundary_term_limit", name, |a, _| {
            check_boundary_term_limit(
                a,
                &boundary_point(a.surface())?,
                &LIMIT_RADII,
                LIMIT_TOLERANCE,
            )
        });
    }
    j.on("monotonicity", "disk-L5", |a, _| {
        check_monotonicity(a, &AmbientVector::zeros(3), &disk_radii())
    });
    j.on("monotonicity", "catenoid", |a, _| {
        check_monotonicity(a, &catenoid_waist(a.surface()), &catenoid_radii())
    });
    j.on("monotonicity", "spike-negative", |a, _| {
        check_monotonicity(a, &spike_center(a.surface()), &spike_radii())
    });
    for name in ["helicoid-L5", "disk-L5", "tilted-disk-L4"] {
        j.on("corollary1", name, check_corollary1);
    }
    for name in ["great-circle", "clifford-torus", "small-circle"] {
        j.on("corollary2", name, |a, tol| {
            check_corollary2(a, a.surface().k() + 1, tol)
        });
    }
    if cfg.lemmas {
        lemma_jobs(&mut j.jobs, cfg);
    }
    j.jobs
}

fn lemma_jobs(jobs: &mut Vec<Job>, cfg: &SuiteConfig) {
    let count = |n: usize| (n / cfg.sample_scale).max(1);
    let spec = |k: usize, samples: usize, seed: u64| SampleSpec {
        tol: cfg.quad_tol,
        ..SampleSpec::new(k, count(samples), seed)
    };
    for k in 1..=4 {
        let s = spec(k, 100_000, cfg.rng_seed);
        jobs.push(Job::new("lemma_a_suite", &format!("k={k}"), move || {
            lemma_a_suite(&s)
        }));
    }
    for k in 2..=4 {
        let s = spec(k, 10_000, cfg.rng_seed);
        jobs.push(Job::new("lemma_b_suite", &format!("k={k}"), move || {
            lemma_b_suite(&s)
        }));
    }
    for k in 2..=3 {
        let s = spec(k, 1_000, cfg.rng_seed);
        jobs.push(Job::new(
            "derivative_oracle",
            &format!("k={k}"),
            move || derivative_suite(&s),
        ));
    }
    let tol = cfg.quad_tol;
    for (k, threshold) in [(2, 1e-5), (3, 0.05)] {
        jobs.push(Job::new("lemma_c", &format!("k={k}"), move || {
            lemma_c_suite(k, k + 1, 20, threshold, tol)
        }));
    }
}

/// Builds the fixtures and runs the suite.
pub fn run_full_suite(cfg: &SuiteConfig) -> std::result::Result<Vec<VerificationReport>, String> {
    let built = build_fixtures(&cfg.fixtures)?;
    Ok(run_suite(suite_jobs(&built, cfg)))
}
