//! Initial meshes for the solver and for the analytic fixtures.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{sorted_pair, SimplicialSurface};
use crate::vector::AmbientVector;

/// Named seed with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedKind {
    Disk {
        level: u32,
    },
    TiltedDisk {
        level: u32,
        angle: f64,
    },
    PerturbedDisk {
        level: u32,
        lift: f64,
    },
    Annulus {
        radius: f64,
        rings: usize,
        segments: usize,
    },
    Chord {
        segments: usize,
        offset: f64,
    },
    Saddle {
        level: u32,
        amplitude: f64,
    },
    Helicoid {
        level: u32,
        pitch: f64,
    },
    Spike {
        level: u32,
        lift: f64,
    },
    GreatCircle {
        segments: usize,
    },
    SmallCircle {
        segments: usize,
        height: f64,
    },
    CliffordTorus {
        segments: usize,
    },
}

impl SeedKind {
    /// Builds a seed from its name and `key = value` parameters; missing
    /// parameters take their defaults.
    pub fn from_name(name: &str, params: &HashMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let level = || -> Result<u32> {
            let l = get("refine", 5.0);
            if !(0.0..=8.0).contains(&l) || l.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "refine must be an integer in 0..=8, got {l}"
                )));
            }
            Ok(l as u32)
        };
        let count = |key: &str, default: f64, min: usize| -> Result<usize> {
            let c = get(key, default);
            if c.fract() != 0.0 || c < min as f64 {
                return Err(Error::Domain(format!(
                    "{key} must be an integer >= {min}, got {c}"
                )));
            }
            Ok(c as usize)
        };
        Ok(match name {
            "disk" => SeedKind::Disk { level: level()? },
            "tilted_disk" => SeedKind::TiltedDisk {
                level: level()?,
                angle: get("angle", 0.5),
            },
            "perturbed_disk" => SeedKind::PerturbedDisk {
                level: level()?,
                lift: get("lift", 0.2),
            },
            "annulus" => SeedKind::Annulus {
                radius: get("radius", 0.75),
                rings: count("rings", 65.0, 3)?,
                segments: count("segments", 256.0, 3)?,
            },
            "chord" => SeedKind::Chord {
                segments: count("segments", 1.0, 1)?,
                offset: get("offset", 0.0),
            },
            "saddle" => SeedKind::Saddle {
                level: level()?,
                amplitude: get("amplitude", 0.3),
            },
            "helicoid" => SeedKind::Helicoid {
                level: level()?,
                pitch: get("pitch", 0.5),
            },
            "spike" => SeedKind::Spike {
                level: level()?,
                lift: get("lift", 0.3),
            },
            "great_circle" => SeedKind::GreatCircle {
                segments: count("segments", 256.0, 3)?,
            },
            "small_circle" => SeedKind::SmallCircle {
                segments: count("segments", 256.0, 3)?,
                height: get("height", 0.5),
            },
            "clifford_torus" => SeedKind::CliffordTorus {
                segments: count("segments", 64.0, 3)?,
            },
            other => return Err(Error::Domain(format!("unknown seed kind '{other}'"))),
        })
    }
}

pub fn seed_surface(kind: &SeedKind) -> Result<SimplicialSurface> {
    match *kind {
        SeedKind::Disk { level } => disk(level),
        SeedKind::TiltedDisk { level, angle } => tilted_disk(level, angle),
        SeedKind::PerturbedDisk { level, lift } => perturbed_disk(level, lift),
        SeedKind::Annulus {
            radius,
            rings,
            segments,
        } => annulus(radius, rings, segments),
        SeedKind::Chord { segments, offset } => chord(segments, offset),
        SeedKind::Saddle { level, amplitude } => saddle(level, amplitude),
        SeedKind::Helicoid { level, pitch } => helicoid(level, pitch),
        SeedKind::Spike { level, lift } => spike(level, lift),
        SeedKind::GreatCircle { segments } => great_circle(segments),
        SeedKind::SmallCircle { segments, height } => small_circle(segments, height),
        SeedKind::CliffordTorus { segments } => clifford_torus(segments),
    }
}

fn v3(x: f64, y: f64, z: f64) -> AmbientVector {
    AmbientVector::from([x, y, z])
}

/// Planar disk triangulation: an octagon fan refined `level` times by edge
/// midpoints, boundary midpoints pushed out to the unit circle. Vertex 0 is
/// the center. Returns `(positions in the plane, triangles)`.
fn disk_layout(level: u32) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut pts = vec![[0.0, 0.0]];
    pts.extend((0..8).map(|j| {
        let a = TAU * j as f64 / 8.0;
        [a.cos(), a.sin()]
    }));
    let mut tris: Vec<[usize; 3]> = (0..8).map(|j| [0, 1 + j, 1 + (j + 1) % 8]).collect();
    for _ in 0..level {
        let mut incidence: HashMap<[usize; 2], usize> = HashMap::new();
        for t in &tris {
            for e in 0..3 {
                *incidence
                    .entry(sorted_pair(t[e], t[(e + 1) % 3]))
                    .or_default() += 1;
            }
        }
        let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 2]>| -> usize {
            let key = sorted_pair(a, b);
            *midpoint.entry(key).or_insert_with(|| {
                let mut m = [(pts[a][0] + pts[b][0]) * 0.5, (pts[a][1] + pts[b][1]) * 0.5];
                if incidence[&key] == 1 {
                    let r = m[0].hypot(m[1]);
                    m = [m[0] / r, m[1] / r];
                }
                pts.push(m);
                pts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = mid(a, b, &mut pts);
            let bc = mid(b, c, &mut pts);
            let ca = mid(c, a, &mut pts);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        tris = next;
    }
    (pts, tris)
}

fn from_layout(
    layout: (Vec<[f64; 2]>, Vec<[usize; 3]>),
    place: impl Fn([f64; 2]) -> AmbientVector,
) -> Result<SimplicialSurface> {
    let (pts, tris) = layout;
    let vertices = pts.into_iter().map(place).collect();
    SimplicialSurface::new(2, vertices, tris.into_iter().map(|t| t.to_vec()).collect())
}

/// Equatorial disk in `R^3` with `8 * 4^level` triangles.
pub fn disk(level: u32) -> Result<SimplicialSurface> {
    from_layout(disk_layout(level), |[x, y]| v3(x, y, 0.0))
}

/// Exact area of [`disk`] at `level`: the inscribed regular polygon.
pub fn disk_area(level: u32) -> f64 {
    let n = 8.0 * 2f64.powi(level as i32);
    0.5 * n * (TAU / n).sin()
}

/// Disk through the origin rotated by `angle` about the first axis.
pub fn tilted_disk(level: u32, angle: f64) -> Result<SimplicialSurface> {
    let (c, s) = (angle.cos(), angle.sin());
    from_layout(disk_layout(level), |[x, y]| v3(x, c * y, s * y))
}

/// Disk with the interior vertices nearest `(1/2, 0)` and `(-1/2, 0)` moved
/// out of the plane by `lift` and `-lift` on the level-2 mesh, then refined
/// to `level`, so the perturbation is a pair of piecewise-linear bumps whose
/// width does not shrink with the mesh. The perturbed mesh is invariant under
/// `x -> -x`, which rules out the vertical translation, the one direction in
/// which the flat disk loses area.
pub fn perturbed_disk(level: u32, lift: f64) -> Result<SimplicialSurface> {
    let base_level = level.min(2);
    let flat = disk(base_level)?;
    let mut pos = flat.vertices().to_vec();
    for (target, dz) in [(0.5, lift), (-0.5, -lift)] {
        let v = nearest_interior(&flat, &v3(target, 0.0, 0.0));
        pos[v][2] = dz;
    }
    let mut s = flat.with_positions(pos)?;
    for _ in base_level..level {
        s = refine(&s)?;
    }
    Ok(s)
}

/// Splits every triangle of a 2-surface into four at its edge midpoints;
/// midpoints of boundary edges are pushed radially onto the sphere.
pub fn refine(s: &SimplicialSurface) -> Result<SimplicialSurface> {
    if s.k() != 2 {
        return Err(Error::Domain("refine expects a 2-surface".into()));
    }
    let mut boundary_edge: HashMap<[usize; 2], ()> = HashMap::new();
    for f in s.boundary_faces() {
        boundary_edge.insert(sorted_pair(f.vertices[0], f.vertices[1]), ());
    }
    let mut vertices = s.vertices().to_vec();
    let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<AmbientVector>| -> usize {
        let key = sorted_pair(a, b);
        *midpoint.entry(key).or_insert_with(|| {
            let mut m = (&vertices[a] + &vertices[b]).scaled(0.5);
            if boundary_edge.contains_key(&key) {
                m = m.scaled(1.0 / m.norm());
            }
            vertices.push(m);
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(s.cells().len() * 4);
    for c in s.cells() {
        let (a, b, cc) = (c[0], c[1], c[2]);
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, cc, &mut vertices);
        let ca = mid(cc, a, &mut vertices);
        cells.extend([
            vec![a, ab, ca],
            vec![ab, b, bc],
            vec![ca, bc, cc],
            vec![ab, bc, ca],
        ]);
    }
    SimplicialSurface::new(2, vertices, cells)
}

fn nearest_interior(s: &SimplicialSurface, target: &AmbientVector) -> usize {
    (0..s.vertices().len())
        .filter(|&i| !s.is_boundary_vertex(i))
        .min_by(|&a, &b| {
            let da = s.vertices()[a].distance(target);
            let db = s.vertices()[b].distance(target);
            da.total_cmp(&db)
        })
        .expect("disk has interior vertices")
}

/// Disk with the interior vertex nearest `(0.3, 0)` lifted by `lift`; a
/// non-minimal surface whose density ratio about the center decreases.
pub fn spike(level: u32, lift: f64) -> Result<SimplicialSurface> {
    let flat = disk(level)?;
    let apex = nearest_interior(&flat, &v3(0.3, 0.0, 0.0));
    let mut pos = flat.vertices().to_vec();
    pos[apex][2] = lift;
    flat.with_positions(pos)
}

/// Piece of the saddle `z = a (x^2 - y^2)` spanning the boundary curve
/// `(cos t, sin t, a cos 2t)` pulled radially onto the sphere. The map
/// `(x, y, z) -> (-y, x, -z)` preserves the mesh.
pub fn saddle(level: u32, amplitude: f64) -> Result<SimplicialSurface> {
    from_layout(disk_layout(level), |[x, y]| {
        let z = amplitude * (x * x - y * y);
        let scale = 1.0 / (1.0 + z * z).sqrt();
        v3(x * scale, y * scale, z * scale)
    })
}

/// Piece of the helicoid `(u cos v, u sin v, c v)` inside the ball, where
/// `c` is the pitch. The domain `u^2 + c^2 v^2 <= 1` is the disk layout
/// scaled by `1/c` in `v`, so boundary vertices lie exactly on the sphere and
/// vertex 0 sits at the origin.
pub fn helicoid(level: u32, pitch: f64) -> Result<SimplicialSurface> {
    if !(pitch > 0.0) {
        return Err(Error::Domain(format!(
            "helicoid pitch must be positive, got {pitch}"
        )));
    }
    from_layout(disk_layout(level), |[u, w]| {
        let v = w / pitch;
        v3(u * v.cos(), u * v.sin(), w)
    })
}

/// Vertex index of ring `i`, position `j` in an [`annulus`] mesh.
pub fn annulus_index(segments: usize, ring: usize, j: usize) -> usize {
    ring * segments + j % segments
}

/// Angle of position `j` on ring `i`; odd rings are offset by half a step.
pub fn annulus_angle(segments: usize, ring: usize, j: usize) -> f64 {
    TAU * (j as f64 + 0.5 * (ring % 2) as f64) / segments as f64
}

/// Cylinder of the given radius about the third axis, cut by the sphere,
/// with `rings` circles of `segments` vertices. Adjacent rings are staggered
/// by half a step, so the triangulation is symmetric under reflection in
/// every plane containing the axis and a vertex.
pub fn annulus(radius: f64, rings: usize, segments: usize) -> Result<SimplicialSurface> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Domain(format!(
            "annulus radius must lie in (0, 1), got {radius}"
        )));
    }
    if rings < 2 || segments < 3 {
        return Err(Error::Domain(
            "annulus needs at least 2 rings and 3 segments".into(),
        ));
    }
    let h = (1.0 - radius * radius).sqrt();
    let mut vertices = Vec::with_capacity(rings * segments);
    for i in 0..rings {
        let z = -h + 2.0 * h * i as f64 / (rings - 1) as f64;
        for j in 0..segments {
            let a = annulus_angle(segments, i, j);
            vertices.push(v3(radius * a.cos(), radius * a.sin(), z));
        }
    }
    SimplicialSurface::new(2, vertices, annulus_cells(rings, segments))
}

pub(crate) fn annulus_cells(rings: usize, segments: usize) -> Vec<Vec<usize>> {
    let idx = |i, j| annulus_index(segments, i, j);
    let mut cells = Vec::with_capacity(2 * (rings - 1) * segments);
    for i in 0..rings - 1 {
        for j in 0..segments {
            if i % 2 == 0 {
                // Ring i at integer steps, ring i + 1 at half steps.
                cells.push(vec![idx(i, j), idx(i, j + 1), idx(i + 1, j)]);
                cells.push(vec![idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            } else {
                cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
                cells.push(vec![idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            }
        }
    }
    cells
}

/// Chord of the unit circle at distance `offset` from the origin, split into
/// `segments` pieces.
pub fn chord(segments: usize, offset: f64) -> Result<SimplicialSurface> {
    if segments == 0 || !(offset.abs() < 1.0) {
        return Err(Error::Domain(
            "chord needs segments >= 1 and |offset| < 1".into(),
        ));
    }
    let half = (1.0 - offset * offset).sqrt();
    let vertices = (0..=segments)
        .map(|i| {
            let t = -half + 2.0 * half * i as f64 / segments as f64;
            AmbientVector::from([t, offset])
        })
        .collect();
    let cells = (0..segments).map(|i| vec![i, i + 1]).collect();
    SimplicialSurface::new(1, vertices, cells)
}

fn closed_polygon(vertices: Vec<AmbientVector>) -> Result<SimplicialSurface> {
    let m = vertices.len();
    let cells = (0..m).map(|i| vec![i, (i + 1) % m]).collect();
    SimplicialSurface::new(1, vertices, cells)
}

/// Regular polygon inscribed in the equator of `S^2`, projected onto the sphere
/// at its vertices.
pub fn great_circle(segments: usize) -> Result<SimplicialSurface> {
    small_circle(segments, 0.0)
}

/// Regular polygon inscribed in the circle of `S^2` at the given height.
pub fn small_circle(segments: usize, height: f64) -> Result<SimplicialSurface> {
    if segments < 3 || !(height.abs() < 1.0) {
        return Err(Error::Domain(
            "circle needs segments >= 3 and |height| < 1".into(),
        ));
    }
    let rho = (1.0 - height * height).sqrt();
    closed_polygon(
        (0..segments)
            .map(|j| {
                let a = TAU * j as f64 / segments as f64;
                v3(rho * a.cos(), rho * a.sin(), height)
            })
            .collect(),
    )
}

/// Exact length of [`small_circle`].
pub fn circle_length(segments: usize, height: f64) -> f64 {
    let rho = (1.0 - height * height).sqrt();
    2.0 * segments as f64 * rho * (PI / segments as f64).sin()
}

/// Clifford torus `(cos u, sin u, cos v, sin v) / sqrt 2` in `S^3`, as a
/// `segments x segments` grid of flat squares split into triangles.
pub fn clifford_torus(segments: usize) -> Result<SimplicialSurface> {
    if segments < 3 {
        return Err(Error::Domain("torus needs at least 3 segments".into()));
    }
    let m = segments;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut vertices = Vec::with_capacity(m * m);
    for i in 0..m {
        let u = TAU * i as f64 / m as f64;
        for j in 0..m {
            let w = TAU * j as f64 / m as f64;
            vertices.push(AmbientVector::from([
                s * u.cos(),
                s * u.sin(),
                s * w.cos(),
                s * w.sin(),
            ]));
        }
    }
    let idx = |i: usize, j: usize| (i % m) * m + j % m;
    let mut cells = Vec::with_capacity(2 * m * m);
    for i in 0..m {
        for j in 0..m {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialSurface::new(2, vertices, cells)
}

/// Exact area of [`clifford_torus`].
pub fn clifford_torus_area(segments: usize) -> f64 {
    let m = segments as f64;
    2.0 * m * m * (PI / m).sin().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disk_counts_and_area() {
        let d = disk(5).unwrap();
        assert_eq!(d.cells().len(), 8192);
        assert_abs_diff_eq!(d.surface_measure(), disk_area(5), epsilon = 1e-12);
        assert!((d.surface_measure() - PI).abs() <= 1e-3);
        assert!((d.boundary_measure() - TAU).abs() <= 1e-3);
        assert_eq!(d.vertices()[0].coords(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn tilted_disk_keeps_area() {
        let t = tilted_disk(3, 0.7).unwrap();
        assert_abs_diff_eq!(t.surface_measure(), disk_area(3), epsilon = 1e-12);
    }

    #[test]
    fn chord_lengths() {
        assert_abs_diff_eq!(
            chord(1, 0.0).unwrap().surface_measure(),
            2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            chord(8, 0.5).unwrap().surface_measure(),
            3f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn annulus_is_valid_with_boundary_on_sphere() {
        let a = annulus(0.75, 64, 32).unwrap();
        assert_eq!(a.boundary_faces().len(), 64);
        for (i, p) in a.vertices().iter().enumerate() {
            if a.is_boundary_vertex(i) {
                assert!((p.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn closed_fixtures() {
        let c = great_circle(256).unwrap();
        assert!(c.is_closed());
        assert_abs_diff_eq!(
            c.surface_measure(),
            circle_length(256, 0.0),
            epsilon = 1e-12
        );
        let t = clifford_torus(16).unwrap();
        assert!(t.is_closed());
        assert_abs_diff_eq!(
            t.surface_measure(),
            clifford_torus_area(16),
            epsilon = 1e-12
        );
    }

    #[test]
    fn saddle_vertices_in_ball() {
        let s = saddle(3, 0.3).unwrap();
        assert!(s.vertices().iter().all(|p| p.norm() <= 1.0 + 1e-15));
    }

    #[test]
    fn helicoid_meets_sphere_and_origin() {
        // (1/c) ∫ 2 sqrt(1 - u^2) sqrt(u^2 + c^2) du over [-1, 1], c = 1/2.
        let smooth = 4.317605098244317;
        let mut errors = Vec::new();
        for level in 2..=5 {
            let h = helicoid(level, 0.5).unwrap();
            assert_eq!(h.vertices()[0].norm(), 0.0);
            for v in 0..h.vertices().len() {
                if h.is_boundary_vertex(v) {
                    assert_abs_diff_eq!(h.vertices()[v].norm(), 1.0, epsilon = 1e-15);
                }
            }
            errors.push(smooth - h.surface_measure());
        }
        assert!(errors.iter().all(|&e| e > 0.0));
        assert!(errors.windows(2).all(|w| w[1] < 0.3 * w[0]));
    }

    #[test]
    fn names_and_errors() {
        let mut p = HashMap::new();
        p.insert("refine".to_string(), 2.0);
        assert_eq!(
            SeedKind::from_name("disk", &p).unwrap(),
            SeedKind::Disk { level: 2 }
        );
        assert!(SeedKind::from_name("torus", &p).is_err());
        p.insert("refine".to_string(), 2.5);
        assert!(SeedKind::from_name("disk", &p).is_err());
    }
}
