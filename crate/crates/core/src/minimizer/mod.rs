//! Discrete free-boundary area minimization.
//!
//! [`minimize`] runs projected gradient descent on the total k-measure.
//! Boundary vertices stay on the unit sphere (their gradient is projected to
//! the sphere tangent plane and the new position is renormalized); interior
//! vertices that leave the ball are pulled back onto it. Steps are accepted by
//! an Armijo test on the exact per-cell area change, so the area never grows.
//! After the first iteration the trial step is the Barzilai-Borwein step
//! `<s, s> / <s, d>` built from the last position and gradient differences.
//!
//! Saddle-type critical points (the critical catenoid is one) are not reached
//! by descent; [`critical_annulus`] solves for them in a symmetry-reduced
//! parametrization.

mod annulus;
pub mod seed;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{triangle_area, SimplicialSurface, MIN_CELL_VOLUME};
use crate::vector::{dot, AmbientVector};

pub use annulus::{critical_annulus, AnnulusOptions};
pub use seed::{seed_surface, SeedKind};

/// Relative size of the rounding error in a total-area difference.
const ROUNDOFF: f64 = 1e-13;

/// Boundary vertices must start this close to the sphere.
pub const BOUNDARY_SEED_SLACK: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    /// First trial step; `None` uses `mean_edge_length / max_vertex_degree`.
    pub initial_step: Option<f64>,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Consecutive rejected trials before the solve is declared stalled.
    pub max_halvings: u32,
    /// Use the Barzilai-Borwein step as the first trial after iteration 0.
    pub spectral: bool,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            initial_step: None,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_halvings: 60,
            spectral: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once the largest per-vertex gradient norm is at most this.
    pub grad_tol: f64,
    pub step_rule: StepRule,
    pub project_every_step: bool,
    /// Keep boundary vertices where they are (Plateau problem).
    pub fixed_boundary: bool,
    /// Let boundary vertices of a 2-surface move along the boundary curve.
    /// Off by default: sliding along the curve is free in the smooth limit,
    /// but the inscribed polygon loses area when its vertices bunch up, so
    /// descent would collapse boundary cells.
    pub allow_boundary_sliding: bool,
    /// Weight `σ` of the Sobolev preconditioner: the descent direction solves
    /// `(I + σ L) d = g` with `L` the graph Laplacian of the edges, which
    /// damps the mesh-scale oscillations that collapse cells. Zero uses `g`.
    pub sobolev_weight: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            grad_tol: 1e-8,
            step_rule: StepRule::default(),
            project_every_step: true,
            fixed_boundary: false,
            allow_boundary_sliding: false,
            sobolev_weight: 0.0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::Domain("grad_tol must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        let r = &self.step_rule;
        if !(r.shrink > 0.0 && r.shrink < 1.0) {
            return Err(Error::Domain("shrink factor must lie in (0, 1)".into()));
        }
        if !(r.sufficient_decrease > 0.0 && r.sufficient_decrease < 1.0) {
            return Err(Error::Domain(
                "sufficient-decrease constant must lie in (0, 1)".into(),
            ));
        }
        if !(self.sobolev_weight >= 0.0) {
            return Err(Error::Domain("sobolev_weight must be non-negative".into()));
        }
        if let Some(h) = r.initial_step {
            if !(h > 0.0) {
                return Err(Error::Domain("initial step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_area: f64,
    pub final_grad_norm: f64,
    /// Radians; absent for closed surfaces.
    pub boundary_orthogonality_max_angle: Option<f64>,
    pub grad_tol: f64,
    pub converged: bool,
}

/// One row of the solver log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub area: f64,
    pub grad_norm: f64,
    pub max_angle: f64,
}

pub fn write_log_csv(records: &[IterRecord], w: &mut impl Write) -> Result<()> {
    writeln!(w, "iter,area,grad_norm,max_angle")?;
    for r in records {
        writeln!(
            w,
            "{},{:?},{:?},{:?}",
            r.iter, r.area, r.grad_norm, r.max_angle
        )?;
    }
    Ok(())
}

/// Gradient of one cell's volume with respect to each of its vertices.
fn cell_gradient(verts: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = verts[0].len();
    match verts.len() {
        2 => {
            let d: Vec<f64> = (0..n).map(|i| verts[0][i] - verts[1][i]).collect();
            let len = dot(&d, &d).sqrt();
            let g0: Vec<f64> = d.iter().map(|x| x / len).collect();
            let g1 = g0.iter().map(|x| -x).collect();
            vec![g0, g1]
        }
        _ => (0..3)
            .map(|a| {
                // grad_a = |w|^2 h / (4 A), h the component of a - b normal to w = c - b.
                let (b, c) = (verts[(a + 1) % 3], verts[(a + 2) % 3]);
                let w: Vec<f64> = (0..n).map(|i| c[i] - b[i]).collect();
                let mut h: Vec<f64> = (0..n).map(|i| verts[a][i] - b[i]).collect();
                let w2 = dot(&w, &w);
                let s = dot(&h, &w) / w2;
                h.iter_mut().zip(&w).for_each(|(hi, wi)| *hi -= s * wi);
                // |h| |w| = 2 A, so grad_a = |w| h / (2 |h|) = w2 h / (4 A).
                let scale = 0.5 * w2.sqrt() / dot(&h, &h).sqrt();
                h.iter().map(|x| x * scale).collect()
            })
            .collect(),
    }
}

fn cell_volume_of(verts: &[&[f64]]) -> f64 {
    let n = verts[0].len();
    let u = AmbientVector::from(
        (0..n)
            .map(|i| verts[1][i] - verts[0][i])
            .collect::<Vec<_>>(),
    );
    match verts.len() {
        2 => u.norm(),
        _ => {
            let v = AmbientVector::from(
                (0..n)
                    .map(|i| verts[2][i] - verts[0][i])
                    .collect::<Vec<_>>(),
            );
            triangle_area(&u, &v)
        }
    }
}

/// Working copy of the vertex positions, flattened.
struct State<'a> {
    s: &'a SimplicialSurface,
    n: usize,
    /// Boundary neighbours of each boundary vertex whose gradient loses its
    /// component along the boundary curve.
    slide: Vec<Option<[usize; 2]>>,
}

impl<'a> State<'a> {
    fn new(s: &'a SimplicialSurface) -> Self {
        Self {
            s,
            n: s.ambient_dim(),
            slide: Vec::new(),
        }
    }

    fn without_sliding(s: &'a SimplicialSurface) -> Self {
        let mut slide = vec![None; s.vertices().len()];
        if s.k() == 2 {
            let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); s.vertices().len()];
            for f in s.boundary_faces() {
                let [a, b] = [f.vertices[0], f.vertices[1]];
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
            for (v, nb) in nbrs.into_iter().enumerate() {
                if let [a, b] = nb[..] {
                    slide[v] = Some([a, b]);
                }
            }
        }
        Self {
            s,
            n: s.ambient_dim(),
            slide,
        }
    }

    fn cell_verts<'x>(&self, x: &'x [f64], cell: usize) -> Vec<&'x [f64]> {
        self.s.cells()[cell]
            .iter()
            .map(|&v| &x[v * self.n..(v + 1) * self.n])
            .collect()
    }

    fn volumes(&self, x: &[f64]) -> Vec<f64> {
        (0..self.s.cells().len())
            .into_par_iter()
            .map(|c| cell_volume_of(&self.cell_verts(x, c)))
            .collect()
    }

    /// Unprojected gradient; per-cell contributions are computed in parallel
    /// and accumulated in cell order.
    fn raw_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let per_cell: Vec<Result<Vec<Vec<f64>>>> = (0..self.s.cells().len())
            .into_par_iter()
            .map(|c| {
                let verts = self.cell_verts(x, c);
                let vol = cell_volume_of(&verts);
                if !(vol > MIN_CELL_VOLUME) {
                    return Err(Error::DegenerateCell {
                        cell: c,
                        volume: vol,
                    });
                }
                Ok(cell_gradient(&verts))
            })
            .collect();
        let mut g = vec![0.0; x.len()];
        for (c, contrib) in per_cell.into_iter().enumerate() {
            for (&v, gv) in self.s.cells()[c].iter().zip(contrib?) {
                for i in 0..self.n {
                    g[v * self.n + i] += gv[i];
                }
            }
        }
        Ok(g)
    }

    fn project_gradient(&self, x: &[f64], g: &mut [f64], fixed_boundary: bool) {
        let n = self.n;
        for v in 0..self.s.vertices().len() {
            if !self.s.is_boundary_vertex(v) {
                continue;
            }
            let gv = &mut g[v * n..(v + 1) * n];
            if fixed_boundary {
                gv.iter_mut().for_each(|c| *c = 0.0);
                continue;
            }
            let xv = &x[v * n..(v + 1) * n];
            let s = dot(gv, xv) / dot(xv, xv);
            gv.iter_mut().zip(xv).for_each(|(gi, xi)| *gi -= s * xi);
            if let Some(Some([a, b])) = self.slide.get(v) {
                let mut t: Vec<f64> = (0..n).map(|i| x[b * n + i] - x[a * n + i]).collect();
                let s = dot(&t, xv) / dot(xv, xv);
                t.iter_mut().zip(xv).for_each(|(ti, xi)| *ti -= s * xi);
                let t2 = dot(&t, &t);
                if t2 > 0.0 {
                    let s = dot(gv, &t) / t2;
                    gv.iter_mut().zip(&t).for_each(|(gi, ti)| *gi -= s * ti);
                }
            }
        }
    }

    /// Keeps only the normal part of each interior vertex gradient. The normal
    /// of a 2-surface vertex in `R^3` is the sum of its oriented cell normals,
    /// so cells are expected to be coherently oriented; for curves the
    /// component along the summed unit edge directions is removed. Other
    /// dimensions are left unchanged.
    /// Conjugate-gradient solve of `(I + σ L) d = g`, re-projected onto the
    /// constraint tangent space.
    fn sobolev(
        &self,
        x: &[f64],
        g: &[f64],
        edges: &[[usize; 2]],
        sigma: f64,
        fixed: bool,
    ) -> Vec<f64> {
        let n = self.n;
        let apply = |v: &[f64]| {
            let mut out = v.to_vec();
            for &[a, b] in edges {
                for i in 0..n {
                    let diff = sigma * (v[a * n + i] - v[b * n + i]);
                    out[a * n + i] += diff;
                    out[b * n + i] -= diff;
                }
            }
            out
        };
        let mut d = g.to_vec();
        let mut r: Vec<f64> = g.iter().zip(apply(&d)).map(|(a, b)| a - b).collect();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let stop = 1e-20 * dot(g, g);
        for _ in 0..200 {
            if rr <= stop {
                break;
            }
            let ap = apply(&p);
            let alpha = rr / dot(&p, &ap);
            for i in 0..d.len() {
                d[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let next = dot(&r, &r);
            let beta = next / rr;
            rr = next;
            for i in 0..p.len() {
                p[i] = r[i] + beta * p[i];
            }
        }
        self.project_gradient(x, &mut d, fixed);
        d
    }

    fn gradient(&self, x: &[f64], fixed_boundary: bool) -> Result<Vec<f64>> {
        let mut g = self.raw_gradient(x)?;
        self.project_gradient(x, &mut g, fixed_boundary);
        Ok(g)
    }

    /// Maps trial positions back onto the constraint set.
    fn project_positions(&self, x: &mut [f64], fixed_boundary: bool) {
        let n = self.n;
        for v in 0..self.s.vertices().len() {
            let xv = &mut x[v * n..(v + 1) * n];
            let r = dot(xv, xv).sqrt();
            let on_boundary = self.s.is_boundary_vertex(v);
            if on_boundary && fixed_boundary {
                continue;
            }
            if on_boundary || r > 1.0 {
                xv.iter_mut().for_each(|c| *c /= r);
            }
        }
    }

    fn max_vertex_norm(&self, g: &[f64]) -> f64 {
        g.chunks(self.n)
            .map(|c| dot(c, c).sqrt())
            .fold(0.0, f64::max)
    }

    fn positions(&self, x: &[f64]) -> Vec<AmbientVector> {
        x.chunks(self.n)
            .map(|c| AmbientVector::from(c.to_vec()))
            .collect()
    }
}

fn solver_state<'a>(s: &'a SimplicialSurface, opts: &SolveOptions) -> State<'a> {
    if opts.allow_boundary_sliding {
        State::new(s)
    } else {
        State::without_sliding(s)
    }
}

fn flatten(s: &SimplicialSurface) -> Vec<f64> {
    s.vertices()
        .iter()
        .flat_map(|v| v.coords().iter().copied())
        .collect()
}

/// Gradient of the total k-measure with respect to every vertex. Boundary
/// vertex gradients are projected to the tangent plane of the sphere.
pub fn area_gradient(s: &SimplicialSurface) -> Result<Vec<AmbientVector>> {
    let state = State::new(s);
    let x = flatten(s);
    Ok(state.positions(&state.gradient(&x, false)?))
}

/// Largest per-vertex norm of the gradient the solver descends along.
pub fn gradient_norm(s: &SimplicialSurface, opts: &SolveOptions) -> Result<f64> {
    let state = solver_state(s, opts);
    let fixed_boundary = opts.fixed_boundary;
    let x = flatten(s);
    Ok(state.max_vertex_norm(&state.gradient(&x, fixed_boundary)?))
}

/// Largest angle between the outward conormal and the radial direction at the
/// barycenters of the boundary faces.
pub fn orthogonality_angle(s: &SimplicialSurface) -> Result<f64> {
    if s.is_closed() {
        return Err(Error::Precondition("closed surface has no boundary".into()));
    }
    let mut worst: f64 = 0.0;
    for f in 0..s.boundary_faces().len() {
        let c = s.outward_conormal(f)?;
        let radial = s
            .face_barycenter(f)?
            .normalized()
            .ok_or_else(|| Error::Domain("boundary face centred at the origin".into()))?;
        let along = c.dot(&radial);
        let mut perp = c.clone();
        perp.axpy(-along, &radial);
        worst = worst.max(perp.norm().atan2(along));
    }
    Ok(worst)
}

fn stats_for(
    s: &SimplicialSurface,
    iterations: usize,
    grad_norm: f64,
    opts: &SolveOptions,
) -> SolveStats {
    SolveStats {
        iterations,
        final_area: s.surface_measure(),
        final_grad_norm: grad_norm,
        boundary_orthogonality_max_angle: orthogonality_angle(s).ok(),
        grad_tol: opts.grad_tol,
        converged: grad_norm <= opts.grad_tol,
    }
}

pub fn minimize(
    s: &SimplicialSurface,
    opts: &SolveOptions,
) -> Result<(SimplicialSurface, SolveStats)> {
    minimize_logged(s, opts, &mut Vec::new())
}

/// [`minimize`] that also appends one [`IterRecord`] per iteration to `log`.
pub fn minimize_logged(
    s: &SimplicialSurface,
    opts: &SolveOptions,
    log: &mut Vec<IterRecord>,
) -> Result<(SimplicialSurface, SolveStats)> {
    opts.validate()?;
    for (v, p) in s.vertices().iter().enumerate() {
        if s.is_boundary_vertex(v) && (p.norm() - 1.0).abs() > BOUNDARY_SEED_SLACK {
            return Err(Error::Precondition(format!(
                "boundary vertex {v} is {} away from the sphere",
                (p.norm() - 1.0).abs()
            )));
        }
    }
    let state = solver_state(s, opts);
    let mut x = flatten(s);
    state.project_positions(&mut x, opts.fixed_boundary);
    let rule = &opts.step_rule;
    let base_step = rule.initial_step.unwrap_or_else(|| {
        let deg = s.vertex_degrees().into_iter().max().unwrap_or(1).max(1);
        s.mean_edge_length() / deg as f64
    });

    let edges = s.edges();
    let mut volumes = state.volumes(&x);
    let mut g = state.gradient(&x, opts.fixed_boundary)?;
    // Descent direction and the last accepted (position, direction) pair.
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iter = 0;
    let record = |x: &[f64], volumes: &[f64], g: &[f64], iter: usize, log: &mut Vec<IterRecord>| {
        let current = s.with_positions(state.positions(x)).ok();
        log.push(IterRecord {
            iter,
            area: volumes.iter().sum(),
            grad_norm: state.max_vertex_norm(g),
            max_angle: current
                .and_then(|c| orthogonality_angle(&c).ok())
                .unwrap_or(f64::NAN),
        });
    };

    loop {
        let gnorm = state.max_vertex_norm(&g);
        record(&x, &volumes, &g, iter, log);
        if gnorm <= opts.grad_tol || iter >= opts.max_iters {
            break;
        }
        let mut d = if opts.sobolev_weight > 0.0 {
            state.sobolev(&x, &g, &edges, opts.sobolev_weight, opts.fixed_boundary)
        } else {
            g.clone()
        };
        let mut slope = dot(&g, &d);
        if !(slope > 0.0) {
            // The preconditioner solve lost positivity to rounding.
            d = g.clone();
            slope = dot(&g, &d);
        }
        let mut step = match (&previous, rule.spectral) {
            (Some((xp, dp)), true) => {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..x.len() {
                    let si = x[i] - xp[i];
                    ss += si * si;
                    sy += si * (d[i] - dp[i]);
                }
                if sy > 0.0 && ss > 0.0 {
                    ss / sy
                } else {
                    base_step
                }
            }
            _ => base_step,
        };

        let area: f64 = volumes.iter().sum();
        let roundoff = ROUNDOFF * area;
        let mut accepted = None;
        for _ in 0..rule.max_halvings {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - step * di).collect();
            if opts.project_every_step {
                state.project_positions(&mut trial, opts.fixed_boundary);
            }
            let trial_volumes = state.volumes(&trial);
            if trial_volumes.iter().all(|&v| v > MIN_CELL_VOLUME) {
                let delta: f64 = trial_volumes.iter().zip(&volumes).map(|(a, b)| a - b).sum();
                let wanted = rule.sufficient_decrease * step * slope;
                if delta <= -wanted {
                    accepted = Some((trial, trial_volumes, None));
                    break;
                }
                // Below roundoff the area cannot certify progress; accept a
                // step that leaves the area unchanged to rounding and lowers
                // the gradient.
                if wanted < roundoff && delta <= roundoff {
                    let gt = state.gradient(&trial, opts.fixed_boundary)?;
                    if state.max_vertex_norm(&gt) < gnorm {
                        accepted = Some((trial, trial_volumes, Some(gt)));
                        break;
                    }
                }
            }
            step *= rule.shrink;
        }
        let Some((trial, trial_volumes, gt)) = accepted else {
            let current = s.with_positions(state.positions(&x))?;
            return Err(Error::Stall {
                stats: Box::new(stats_for(&current, iter, gnorm, opts)),
            });
        };
        g = match gt {
            Some(gt) => gt,
            None => state.gradient(&trial, opts.fixed_boundary)?,
        };
        previous = Some((std::mem::replace(&mut x, trial), d));
        volumes = trial_volumes;
        iter += 1;
    }

    let out = s.with_positions(state.positions(&x))?;
    let gnorm = state.max_vertex_norm(&g);
    let stats = stats_for(&out, iter, gnorm, opts);
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_ball_volume;
    use proptest::prelude::*;

    #[test]
    fn flat_disk_is_critical() {
        let disk = seed::disk(3).unwrap();
        for g in area_gradient(&disk).unwrap() {
            assert!(g.norm() <= 1e-12, "{g:?}");
        }
        assert!(orthogonality_angle(&disk).unwrap() <= 1e-12);
    }

    #[test]
    fn diameter_is_critical() {
        let chord = seed::chord(1, 0.0).unwrap();
        for g in area_gradient(&chord).unwrap() {
            assert!(g.norm() <= 1e-15);
        }
        assert_eq!(orthogonality_angle(&chord).unwrap(), 0.0);
    }

    #[test]
    fn offset_chord_meets_circle_at_thirty_degrees() {
        let chord = seed::chord(4, 0.5).unwrap();
        let angle = orthogonality_angle(&chord).unwrap();
        assert!(
            (angle - std::f64::consts::FRAC_PI_6).abs() <= 1e-12,
            "{angle}"
        );
    }

    #[test]
    fn closed_surface_has_no_orthogonality_angle() {
        let circle = seed::great_circle(16).unwrap();
        assert!(orthogonality_angle(&circle).is_err());
    }

    #[test]
    fn flat_disk_needs_no_iterations() {
        let disk = seed::disk(3).unwrap();
        let (out, stats) = minimize(&disk, &SolveOptions::default()).unwrap();
        assert_eq!(stats.iterations, 0);
        assert!(stats.converged);
        assert!((out.surface_measure() - disk.surface_measure()).abs() <= 1e-10);
    }

    #[test]
    fn perturbed_disk_descends_monotonically() {
        let start = seed::perturbed_disk(3, 0.2).unwrap();
        let mut log = Vec::new();
        let (out, stats) = minimize_logged(&start, &SolveOptions::default(), &mut log).unwrap();
        assert!(stats.converged, "{stats:?}");
        for w in log.windows(2) {
            assert!(w[1].area <= w[0].area + 1e-14, "{:?}", w);
        }
        let flat = seed::disk(3).unwrap().surface_measure();
        assert!((out.surface_measure() - flat).abs() <= 1e-6);
        for p in out.vertices() {
            assert!(p.norm() <= 1.0 + 1e-12);
        }
        for (i, p) in out.vertices().iter().enumerate() {
            if out.is_boundary_vertex(i) {
                assert!((p.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fixed_boundary_keeps_boundary() {
        let start = seed::saddle(2, 0.3).unwrap();
        let opts = SolveOptions {
            fixed_boundary: true,
            ..Default::default()
        };
        let (out, stats) = minimize(&start, &opts).unwrap();
        assert!(stats.converged);
        for (i, p) in out.vertices().iter().enumerate() {
            if out.is_boundary_vertex(i) {
                assert_eq!(p, &start.vertices()[i]);
            }
        }
        assert!(out.surface_measure() > unit_ball_volume(2).unwrap());
    }

    #[test]
    fn closed_surface_minimizes_off_the_sphere_constraint() {
        // Interior vertices of a closed polygon are free; the log still records angles as NaN.
        let circle = seed::small_circle(32, 0.0).unwrap();
        let mut log = Vec::new();
        let opts = SolveOptions {
            max_iters: 3,
            ..Default::default()
        };
        let (_, stats) = minimize_logged(&circle, &opts, &mut log).unwrap();
        assert!(stats.boundary_orthogonality_max_angle.is_none());
        assert!(log[0].max_angle.is_nan());
    }

    #[test]
    fn rejects_far_boundary_and_bad_options() {
        let bad = SolveOptions {
            grad_tol: 0.0,
            ..Default::default()
        };
        assert!(minimize(&seed::disk(1).unwrap(), &bad).is_err());
    }

    #[test]
    fn log_csv_header() {
        let mut buf = Vec::new();
        write_log_csv(
            &[IterRecord {
                iter: 0,
                area: 1.0,
                grad_norm: 0.5,
                max_angle: 0.0,
            }],
            &mut buf,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iter,area,grad_norm,max_angle\n0,1.0,0.5,0.0\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn raw_gradient_matches_finite_differences(
            noise in proptest::collection::vec(-0.05f64..0.05, 17 * 3),
            k in 1usize..=2,
        ) {
            let s = if k == 1 { seed::chord(16, 0.2).unwrap() } else { seed::disk(1).unwrap() };
            let st = State::new(&s);
            let mut x = flatten(&s);
            x.iter_mut().zip(noise.iter().cycle()).for_each(|(xi, d)| *xi += d);
            let g = st.raw_gradient(&x).unwrap();
            let h = 1e-6;
            for j in 0..x.len() {
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let fd = (st.volumes(&xp).iter().sum::<f64>() - st.volumes(&xm).iter().sum::<f64>()) / (2.0 * h);
                prop_assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "{fd} vs {}", g[j]);
            }
        }
    }
}
