//! Named fixtures with their discretization allowances.

use freeboundary::minimizer::{critical_annulus, minimize, seed, AnnulusOptions};
use freeboundary::{AttestedSurface, Result, SolveOptions};

/// Catenoid seed used by the catalog.
pub const CATENOID: (f64, usize, usize) = (0.75, 65, 256);

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    /// Allowance for the discretization error of the area-type bounds.
    pub tol_disc: f64,
    /// Checks this fixture is built to fail.
    pub expected_fail: &'static [&'static str],
    build: fn() -> Result<AttestedSurface>,
}

impl Fixture {
    pub fn build(&self) -> Result<AttestedSurface> {
        (self.build)()
    }

    pub fn expects_failure(&self, check: &str) -> bool {
        self.expected_fail.contains(&check)
    }
}

fn solved_disk(level: u32) -> Result<AttestedSurface> {
    let opts = SolveOptions::default();
    let (s, stats) = minimize(&seed::disk(level)?, &opts)?;
    Ok(AttestedSurface::from_solver(s, stats, false))
}

fn perturbed_disk() -> Result<AttestedSurface> {
    let opts = SolveOptions {
        sobolev_weight: 10.0,
        ..SolveOptions::default()
    };
    let (s, stats) = minimize(&seed::perturbed_disk(5, 0.2)?, &opts)?;
    Ok(AttestedSurface::from_solver(s, stats, false))
}

fn catenoid() -> Result<AttestedSurface> {
    let (radius, rings, segments) = CATENOID;
    let (s, stats) = critical_annulus(radius, rings, segments, &AnnulusOptions::default())?;
    Ok(AttestedSurface::from_solver(s, stats, false))
}

/// Every committed fixture, in a fixed order.
pub fn fixture_catalog() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "disk-L3",
            description: "equatorial disk, 512 triangles, solver attested",
            tol_disc: 1e-2,
            expected_fail: &[],
            build: || solved_disk(3),
        },
        Fixture {
            name: "disk-L4",
            description: "equatorial disk, 2048 triangles, solver attested",
            tol_disc: 4e-3,
            expected_fail: &[],
            build: || solved_disk(4),
        },
        Fixture {
            name: "disk-L5",
            description: "equatorial disk, 8192 triangles, solver attested",
            tol_disc: 2e-3,
            expected_fail: &[],
            build: || solved_disk(5),
        },
        Fixture {
            name: "disk-L6",
            description: "equatorial disk, 32768 triangles, solver attested",
            tol_disc: 1e-3,
            expected_fail: &[],
            build: || solved_disk(6),
        },
        Fixture {
            name: "perturbed-disk-L5",
            description: "disk relaxed from a symmetric two-vertex lift of 0.2",
            tol_disc: 2e-3,
            expected_fail: &[],
            build: perturbed_disk,
        },
        Fixture {
            name: "tilted-disk-L4",
            description: "flat disk through the origin tilted by 0.5 rad",
            tol_disc: 4e-3,
            expected_fail: &[],
            build: || {
                Ok(AttestedSurface::analytic(
                    seed::tilted_disk(4, 0.5)?,
                    "flat disk through the origin",
                ))
            },
        },
        Fixture {
            name: "chord",
            description: "diameter of the unit disk in 8 segments",
            tol_disc: 1e-12,
            expected_fail: &[],
            build: || Ok(AttestedSurface::analytic(seed::chord(8, 0.0)?, "diameter")),
        },
        Fixture {
            name: "catenoid",
            description: "discrete critical catenoid, 65 rings of 256",
            tol_disc: 5e-3,
            expected_fail: &[],
            build: catenoid,
        },
        Fixture {
            name: "helicoid-L5",
            description: "helicoid of pitch 1/2 through the origin, free contact angle",
            tol_disc: 1e-2,
            expected_fail: &[],
            build: || {
                Ok(AttestedSurface::analytic(
                    seed::helicoid(5, 0.5)?,
                    "helicoid piece through the origin",
                ))
            },
        },
        Fixture {
            name: "great-circle",
            description: "equator of S^2, 256 segments",
            tol_disc: 1e-3,
            expected_fail: &[],
            build: || {
                Ok(AttestedSurface::analytic(
                    seed::great_circle(256)?,
                    "great circle",
                ))
            },
        },
        Fixture {
            name: "clifford-torus",
            description: "Clifford torus in S^3, 64 x 64 grid",
            tol_disc: 2e-2,
            expected_fail: &[],
            build: || {
                Ok(AttestedSurface::analytic(
                    seed::clifford_torus(64)?,
                    "Clifford torus",
                ))
            },
        },
        Fixture {
            name: "small-circle",
            description: "circle of S^2 at height 0.5; not minimal, so unattested",
            tol_disc: 1e-3,
            expected_fail: &["corollary2"],
            build: || Ok(AttestedSurface::raw(seed::small_circle(256, 0.5)?)),
        },
        Fixture {
            name: "spike-negative",
            description: "disk with one vertex near (0.3, 0) lifted by 0.3; not minimal",
            tol_disc: 1e-2,
            expected_fail: &["monotonicity"],
            build: || Ok(AttestedSurface::raw(seed::spike(3, 0.3)?)),
        },
    ]
}

pub fn find(name: &str) -> Option<Fixture> {
    fixture_catalog().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use freeboundary::minimizer::seed::{circle_length, clifford_torus_area, disk_area};
    use std::f64::consts::PI;

    #[test]
    fn catalog_names_and_flags() {
        let names: Vec<&str> = fixture_catalog().iter().map(|f| f.name).collect();
        for n in [
            "disk-L3",
            "disk-L4",
            "disk-L5",
            "disk-L6",
            "chord",
            "catenoid",
            "great-circle",
            "clifford-torus",
            "spike-negative",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        assert_eq!(find("disk-L5").unwrap().tol_disc, 2e-3);
        assert!(find("chord").unwrap().tol_disc <= 1e-12);
        assert!(find("spike-negative")
            .unwrap()
            .expects_failure("monotonicity"));
        assert!(!find("disk-L5").unwrap().expects_failure("monotonicity"));
    }

    /// Each allowance covers the gap between the mesh and the smooth surface
    /// it discretizes.
    #[test]
    fn allowances_cover_discretization_error() {
        for (level, name) in [
            (3, "disk-L3"),
            (4, "disk-L4"),
            (5, "disk-L5"),
            (6, "disk-L6"),
        ] {
            assert!(
                PI - disk_area(level) < find(name).unwrap().tol_disc,
                "{name}"
            );
        }
        assert!(2.0 * PI - circle_length(256, 0.0) < find("great-circle").unwrap().tol_disc);
        assert!(2.0 * PI * PI - clifford_torus_area(64) < find("clifford-torus").unwrap().tol_disc);
        // (1/c) ∫ 2 sqrt(1 - u^2) sqrt(u^2 + c^2) du over [-1, 1], c = 1/2.
        let helicoid = find("helicoid-L5").unwrap();
        let a = helicoid.build().unwrap();
        assert!(4.317605098244317 - a.surface().surface_measure() < helicoid.tol_disc);
        let chord = find("chord").unwrap().build().unwrap();
        assert!((chord.surface().surface_measure() - 2.0).abs() < 1e-12);
    }
}
