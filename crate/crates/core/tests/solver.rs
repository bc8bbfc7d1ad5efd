use std::f64::consts::PI;

use freeboundary::minimizer::{self, critical_annulus, seed, AnnulusOptions, SolveOptions};
use freeboundary::AmbientVector;

/// Axisymmetric minimal profile `r(z)` with `r r'' = 1 + r'^2`, `r(0) = a`,
/// `r'(0) = 0`, integrated by RK4 until it leaves the unit ball. Returns the
/// contact defect `r' z - r` (zero when the profile is radial at the sphere)
/// and the area of the surface of revolution between the two contact points.
fn shoot(a: f64) -> (f64, f64) {
    let h = 1e-5;
    let f = |s: [f64; 3]| {
        [
            s[1],
            (1.0 + s[1] * s[1]) / s[0],
            2.0 * PI * s[0] * (1.0 + s[1] * s[1]).sqrt(),
        ]
    };
    let (mut z, mut s) = (0.0, [a, 0.0, 0.0]);
    loop {
        let k1 = f(s);
        let k2 = f(std::array::from_fn(|i| s[i] + 0.5 * h * k1[i]));
        let k3 = f(std::array::from_fn(|i| s[i] + 0.5 * h * k2[i]));
        let k4 = f(std::array::from_fn(|i| s[i] + h * k3[i]));
        let next: [f64; 3] =
            std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if next[0] * next[0] + (z + h) * (z + h) >= 1.0 {
            // Linear interpolation to the sphere.
            let g0 = s[0] * s[0] + z * z - 1.0;
            let g1 = next[0] * next[0] + (z + h) * (z + h) - 1.0;
            let t = g0 / (g0 - g1);
            let p: [f64; 3] = std::array::from_fn(|i| s[i] + t * (next[i] - s[i]));
            let zc = z + t * h;
            return (p[1] * zc - p[0], 2.0 * p[2]);
        }
        s = next;
        z += h;
    }
}

/// Area of the smooth critical catenoid by bisection on the waist radius.
fn shooting_area() -> f64 {
    let (mut lo, mut hi) = (0.3, 0.6);
    let sign_lo = shoot(lo).0.signum();
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid).0.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shoot(0.5 * (lo + hi)).1
}

#[test]
fn shooting_matches_discrete_catenoid() {
    let oracle = shooting_area();
    assert!(oracle > PI + 0.1);
    let (mesh, stats) = critical_annulus(0.75, 65, 256, &AnnulusOptions::default()).unwrap();
    assert!(stats.converged);
    assert!(stats.boundary_orthogonality_max_angle.unwrap() < 1f64.to_radians());
    assert!((mesh.surface_measure() - oracle).abs() / oracle < 1e-2);
    let identity =
        (2.0 * mesh.surface_measure() - mesh.boundary_measure()).abs() / mesh.boundary_measure();
    assert!(identity < 1e-2);
}

#[test]
fn catenoid_orthogonality_improves_under_refinement() {
    let angles: Vec<f64> = [(17, 64), (33, 128), (65, 256)]
        .into_iter()
        .map(|(rings, segments)| {
            let (_, stats) =
                critical_annulus(0.75, rings, segments, &AnnulusOptions::default()).unwrap();
            assert!(stats.converged);
            stats.boundary_orthogonality_max_angle.unwrap()
        })
        .collect();
    assert!(angles.windows(2).all(|w| w[1] < w[0]), "{angles:?}");
}

#[test]
fn catenoid_is_unstable_under_free_descent() {
    let (mesh, _) = critical_annulus(0.75, 17, 64, &AnnulusOptions::default()).unwrap();
    let start = mesh.surface_measure();
    let shifted: Vec<AmbientVector> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| {
            let mut q = p.clone();
            if !mesh.is_boundary_vertex(v) {
                q.coords_mut()[2] += 0.01;
            }
            q
        })
        .collect();
    let opts = SolveOptions {
        max_iters: 3000,
        ..Default::default()
    };
    let descended = match minimizer::minimize(&mesh.with_positions(shifted).unwrap(), &opts) {
        Ok((s, _)) => s.surface_measure(),
        Err(freeboundary::Error::Stall { stats }) => stats.final_area,
        Err(e) => panic!("{e}"),
    };
    assert!(descended < start - 1e-3, "{descended} vs {start}");
}

#[test]
fn perturbed_disk_returns_to_flat() {
    let start = seed::perturbed_disk(5, 0.2).unwrap();
    assert_eq!(start.cells().len(), 8192);
    assert!(start.surface_measure() > PI + 0.01);
    let (out, stats) = minimizer::minimize(&start, &SolveOptions::default()).unwrap();
    assert!(stats.converged);
    assert!((out.surface_measure() - PI).abs() <= 2e-3 * PI);
    // Rotations preserve area, so the limit is a flat disk through the origin
    // in some plane, not necessarily the starting one.
    let normal = out.tangent_frame(0).unwrap();
    let flatness = out
        .vertices()
        .iter()
        .map(|v| normal.normal_deficit(v.coords()).sqrt())
        .fold(0.0, f64::max);
    assert!(flatness < 1e-6, "{flatness}");
}

#[test]
fn sobolev_direction_converges_faster() {
    let start = seed::perturbed_disk(4, 0.2).unwrap();
    let plain = minimizer::minimize(&start, &SolveOptions::default())
        .unwrap()
        .1;
    let sob = minimizer::minimize(
        &start,
        &SolveOptions {
            sobolev_weight: 10.0,
            ..Default::default()
        },
    )
    .unwrap()
    .1;
    assert!(plain.converged && sob.converged);
    assert!(sob.iterations < plain.iterations);
    for s in [&sob, &plain] {
        assert!((s.final_area - seed::disk_area(4)).abs() < 1e-8, "{s:?}");
    }
}
