//! Quadrature over the parts of a surface outside a ball `B_r(y)` and over the
//! curve where the surface crosses `∂B_r(y)`.
//!
//! Cells are cut along their edges at the exact crossing points with the
//! sphere `|x - y| = r`. Pieces outside the ball are simplices; each crossing
//! is a segment (`k = 2`) or a point (`k = 1`) carrying the unit normal `ν`
//! that lies in the cell and points into the ball.

use crate::error::Result;
use crate::field::{eval_w, lemma_a_gap};
use crate::mesh::SimplicialSurface;
use crate::vector::AmbientVector;

/// Part of a cell on one side of the cut, as a simplex.
pub(crate) struct Piece {
    pub cell: usize,
    pub verts: Vec<AmbientVector>,
}

pub(crate) struct Crossing {
    /// Segment endpoints (`k = 2`) or the single point (`k = 1`).
    pub verts: Vec<AmbientVector>,
    pub nu: AmbientVector,
}

#[derive(Default)]
pub(crate) struct Cut {
    pub outside: Vec<Piece>,
    pub crossings: Vec<Crossing>,
}

/// Point where the edge from `u` (outside) to `v` (inside) enters the ball.
fn entry_point(u: &AmbientVector, v: &AmbientVector, y: &AmbientVector, r: f64) -> AmbientVector {
    let d = u - y;
    let e = v - u;
    let a = e.norm_squared();
    let b = d.dot(&e);
    let c = (d.norm_squared() - r * r).max(0.0);
    let t = c / (-b + (b * b - a * c).max(0.0).sqrt());
    let mut p = u.clone();
    p.axpy(t.clamp(0.0, 1.0), &e);
    p
}

/// Unit vector perpendicular to `q - p` in the plane through `p`, `q` and
/// `toward`, on the side of `toward`.
fn in_plane_normal(p: &AmbientVector, q: &AmbientVector, toward: &AmbientVector) -> AmbientVector {
    let e = q - p;
    let mut w = toward - p;
    w.axpy(-w.dot(&e) / e.norm_squared(), &e);
    w.normalized()
        .unwrap_or_else(|| AmbientVector::zeros(p.dim()))
}

pub(crate) fn cut(s: &SimplicialSurface, y: &AmbientVector, r: f64) -> Cut {
    let mut out = Cut::default();
    for (ci, cell) in s.cells().iter().enumerate() {
        let pts: Vec<&AmbientVector> = cell.iter().map(|&v| &s.vertices()[v]).collect();
        let outside: Vec<bool> = pts.iter().map(|p| p.distance(y) >= r).collect();
        let n_out = outside.iter().filter(|&&o| o).count();
        if n_out == pts.len() {
            out.outside.push(Piece {
                cell: ci,
                verts: pts.iter().map(|&p| p.clone()).collect(),
            });
            continue;
        }
        if n_out == 0 {
            continue;
        }
        match pts.len() {
            2 => {
                let (u, v) = if outside[0] {
                    (pts[0], pts[1])
                } else {
                    (pts[1], pts[0])
                };
                let p = entry_point(u, v, y, r);
                let nu = (v - u).normalized().expect("cells are non-degenerate");
                out.outside.push(Piece {
                    cell: ci,
                    verts: vec![u.clone(), p.clone()],
                });
                out.crossings.push(Crossing { verts: vec![p], nu });
            }
            _ => {
                // Rotate so the lone vertex (the one on its own side) comes first.
                let lone_is_out = n_out == 1;
                let lone = (0..3).find(|&i| outside[i] == lone_is_out).unwrap();
                let a = pts[lone];
                let b = pts[(lone + 1) % 3];
                let c = pts[(lone + 2) % 3];
                if lone_is_out {
                    let pb = entry_point(a, b, y, r);
                    let pc = entry_point(a, c, y, r);
                    let nu = in_plane_normal(&pb, &pc, b);
                    out.outside.push(Piece {
                        cell: ci,
                        verts: vec![a.clone(), pb.clone(), pc.clone()],
                    });
                    out.crossings.push(Crossing {
                        verts: vec![pb, pc],
                        nu,
                    });
                } else {
                    let pb = entry_point(b, a, y, r);
                    let pc = entry_point(c, a, y, r);
                    let nu = in_plane_normal(&pb, &pc, a);
                    out.outside.push(Piece {
                        cell: ci,
                        verts: vec![b.clone(), c.clone(), pc.clone()],
                    });
                    out.outside.push(Piece {
                        cell: ci,
                        verts: vec![b.clone(), pc.clone(), pb.clone()],
                    });
                    out.crossings.push(Crossing {
                        verts: vec![pb, pc],
                        nu,
                    });
                }
            }
        }
    }
    out
}

pub(crate) fn simplex_volume(verts: &[AmbientVector]) -> f64 {
    match verts.len() {
        2 => verts[0].distance(&verts[1]),
        _ => {
            let a = &verts[1] - &verts[0];
            let b = &verts[2] - &verts[0];
            let (aa, bb, ab) = (a.norm_squared(), b.norm_squared(), a.dot(&b));
            0.5 * (aa * bb - ab * ab).max(0.0).sqrt()
        }
    }
}

fn barycenter(verts: &[AmbientVector]) -> AmbientVector {
    let mut b = AmbientVector::zeros(verts[0].dim());
    for v in verts {
        b.axpy(1.0, v);
    }
    b.scaled(1.0 / verts.len() as f64)
}

/// Midpoint subdivision of a simplex into 2 (segment) or 4 (triangle) parts.
fn split(verts: &[AmbientVector]) -> Vec<Vec<AmbientVector>> {
    let mid = |i: usize, j: usize| (&verts[i] + &verts[j]).scaled(0.5);
    match verts.len() {
        2 => {
            let m = mid(0, 1);
            vec![vec![verts[0].clone(), m.clone()], vec![m, verts[1].clone()]]
        }
        _ => {
            let (ab, bc, ca) = (mid(0, 1), mid(1, 2), mid(2, 0));
            vec![
                vec![verts[0].clone(), ab.clone(), ca.clone()],
                vec![ab.clone(), verts[1].clone(), bc.clone()],
                vec![ca.clone(), bc.clone(), verts[2].clone()],
                vec![ab, bc, ca],
            ]
        }
    }
}

/// Barycentric-rule integral of `k/2 - div_Σ W` over the outside pieces.
pub(crate) struct GapIntegral {
    pub value: f64,
    /// Difference to the same rule on once-subdivided pieces.
    pub error: f64,
    /// Smallest integrand value over all nodes of both rules.
    pub min_gap: f64,
    pub outside_measure: f64,
}

pub(crate) fn gap_integral(
    s: &SimplicialSurface,
    pieces: &[Piece],
    y: &AmbientVector,
    tol: f64,
) -> Result<GapIntegral> {
    use rayon::prelude::*;
    let k = s.k();
    let frames = (0..s.cells().len())
        .map(|c| s.tangent_frame(c))
        .collect::<Result<Vec<_>>>()?;
    // (coarse, fine, min gap, measure) per piece, summed in piece order.
    let parts = pieces
        .par_iter()
        .map(|p| -> Result<[f64; 4]> {
            let frame = &frames[p.cell];
            let vol = simplex_volume(&p.verts);
            let g = lemma_a_gap(&barycenter(&p.verts), y, k, frame, tol)?;
            let mut fine = 0.0;
            let mut min_gap = g;
            for sub in split(&p.verts) {
                let gs = lemma_a_gap(&barycenter(&sub), y, k, frame, tol)?;
                fine += gs * simplex_volume(&sub);
                min_gap = min_gap.min(gs);
            }
            Ok([g * vol, fine, min_gap, vol])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = GapIntegral {
        value: 0.0,
        error: 0.0,
        min_gap: f64::INFINITY,
        outside_measure: 0.0,
    };
    let mut fine = 0.0;
    for [c, f, m, v] in parts {
        acc.value += c;
        fine += f;
        acc.min_gap = acc.min_gap.min(m);
        acc.outside_measure += v;
    }
    acc.error = (fine - acc.value).abs();
    Ok(acc)
}

/// `∫ <W, ν>` over the crossing and the crossing's measure.
pub(crate) fn crossing_flux(
    crossings: &[Crossing],
    y: &AmbientVector,
    k: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut flux = 0.0;
    let mut measure = 0.0;
    let g = 0.5 / 3f64.sqrt();
    for c in crossings {
        match c.verts.len() {
            1 => {
                flux += eval_w(&c.verts[0], y, k, tol)?.w.dot(&c.nu);
                measure += 1.0;
            }
            _ => {
                let len = c.verts[0].distance(&c.verts[1]);
                let e = &c.verts[1] - &c.verts[0];
                for t in [0.5 - g, 0.5 + g] {
                    let mut x = c.verts[0].clone();
                    x.axpy(t, &e);
                    flux += 0.5 * len * eval_w(&x, y, k, tol)?.w.dot(&c.nu);
                }
                measure += len;
            }
        }
    }
    Ok((flux, measure))
}

/// `∫_{∂Σ ∖ B_r(y)} <W, x>` with the boundary vertices as nodes, weighted by
/// half their incident boundary edge lengths (`k = 2`) or by one (`k = 1`).
pub(crate) fn boundary_flux(
    s: &SimplicialSurface,
    y: &AmbientVector,
    r: f64,
    tol: f64,
) -> Result<f64> {
    let mut weight = vec![0.0; s.vertices().len()];
    for f in s.boundary_faces() {
        match f.vertices.len() {
            1 => weight[f.vertices[0]] += 1.0,
            _ => {
                let len = s.vertices()[f.vertices[0]].distance(&s.vertices()[f.vertices[1]]);
                for &v in &f.vertices {
                    weight[v] += 0.5 * len;
                }
            }
        }
    }
    let mut total = 0.0;
    for (v, &w) in weight.iter().enumerate() {
        let x = &s.vertices()[v];
        if w > 0.0 && x.distance(y) >= r {
            total += w * eval_w(x, y, s.k(), tol)?.w.dot(x);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimizer::seed;

    fn lens(r: f64) -> f64 {
        // Area of the unit disk inside a circle of radius r centred on its rim.
        let a = 2.0 * (r / 2.0).acos();
        let b = 2.0 * (1.0 - r * r / 2.0).acos();
        0.5 * r * r * (a - a.sin()) + 0.5 * (b - b.sin())
    }

    #[test]
    fn outside_measure_matches_clip() {
        let s = seed::disk(4).unwrap();
        let y = AmbientVector::from([1.0, 0.0, 0.0]);
        let c = cut(&s, &y, 0.3);
        let total: f64 = c.outside.iter().map(|p| simplex_volume(&p.verts)).sum();
        let clip = s.clip_measure(&y, 0.3);
        assert!((total + clip.value - s.surface_measure()).abs() < clip.error + 1e-3);
        assert!((total - (seed::disk_area(4) - lens(0.3))).abs() < 2e-3);
    }

    #[test]
    fn crossing_normals_point_at_centre() {
        let s = seed::disk(3).unwrap();
        let y = AmbientVector::from([1.0, 0.0, 0.0]);
        for c in cut(&s, &y, 0.4).crossings {
            let m = (&c.verts[0] + &c.verts[1]).scaled(0.5);
            assert!((c.nu.norm() - 1.0).abs() < 1e-12);
            assert!(c.nu.dot(&(&y - &m)) > 0.0);
            for v in &c.verts {
                assert!((v.distance(&y) - 0.4).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chord_crossing() {
        let s = seed::chord(8, 0.0).unwrap();
        let y = AmbientVector::from([1.0, 0.0]);
        let c = cut(&s, &y, 0.3);
        assert_eq!(c.crossings.len(), 1);
        let (flux, count) = crossing_flux(&c.crossings, &y, 1, 1e-10).unwrap();
        assert_eq!(count, 1.0);
        assert!((flux - (1.0 - 0.15)).abs() < 1e-9);
    }

    #[test]
    fn boundary_flux_vanishes_on_sphere() {
        let s = seed::tilted_disk(3, 0.4).unwrap();
        let y = s.vertices()[s.boundary_faces()[0].vertices[0]].clone();
        let v = boundary_flux(&s, &y, 0.2, 1e-10).unwrap();
        assert!(v.abs() < 1e-8 * s.boundary_measure());
    }
}
