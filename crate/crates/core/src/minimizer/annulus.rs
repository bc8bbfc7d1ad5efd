//! Symmetry-reduced solver for rotationally symmetric annuli.
//!
//! On an [`annulus`](super::seed::annulus) mesh every ring keeps its angular
//! positions and is described by a radius and a height; a boundary ring is
//! described by its polar angle on the sphere. The mesh is invariant under the
//! rotations and reflections that fix the ring pattern, so a zero of the
//! reduced gradient is a critical point of the full area functional. The
//! reduced gradient is the full gradient contracted with the ring tangent
//! directions; its zero is found by Levenberg-Marquardt on `|G|^2 / 2` with a
//! finite-difference Jacobian, which converges to saddles as well as minima.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::seed::{annulus, annulus_angle, annulus_index};
use super::{cell_gradient, flatten, orthogonality_angle, SolveStats, State};
use crate::error::{Error, Result};
use crate::mesh::{SimplicialSurface, MIN_CELL_VOLUME};
use crate::vector::AmbientVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusOptions {
    pub max_iters: usize,
    /// Target for the largest per-vertex norm of the full projected gradient.
    pub grad_tol: f64,
    /// Central-difference step for the reduced Jacobian.
    pub fd_step: f64,
}

impl Default for AnnulusOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

struct Reduced<'a> {
    mesh: &'a SimplicialSurface,
    rings: usize,
    segments: usize,
}

impl Reduced<'_> {
    fn dofs(&self) -> usize {
        2 * (self.rings - 2) + 2
    }

    /// `(r, z)` of every ring.
    fn profile(&self, p: &[f64]) -> Vec<(f64, f64)> {
        let last = self.rings - 1;
        (0..self.rings)
            .map(|i| match i {
                0 => (p[0].cos(), p[0].sin()),
                _ if i == last => (p[p.len() - 1].cos(), p[p.len() - 1].sin()),
                _ => (p[2 * i - 1], p[2 * i]),
            })
            .collect()
    }

    fn positions(&self, p: &[f64]) -> Vec<f64> {
        let m = self.segments;
        let mut x = vec![0.0; 3 * self.rings * m];
        for (i, (r, z)) in self.profile(p).into_iter().enumerate() {
            for j in 0..m {
                let a = annulus_angle(m, i, j);
                let v = annulus_index(m, i, j);
                x[3 * v..3 * v + 3].copy_from_slice(&[r * a.cos(), r * a.sin(), z]);
            }
        }
        x
    }

    fn initial(&self) -> Vec<f64> {
        let x = flatten(self.mesh);
        let m = self.segments;
        let ring = |i: usize| {
            let v = annulus_index(m, i, 0);
            (x[3 * v].hypot(x[3 * v + 1]), x[3 * v + 2])
        };
        let mut p = Vec::with_capacity(self.dofs());
        let (r0, z0) = ring(0);
        p.push(z0.atan2(r0));
        for i in 1..self.rings - 1 {
            let (r, z) = ring(i);
            p.extend([r, z]);
        }
        let (rl, zl) = ring(self.rings - 1);
        p.push(zl.atan2(rl));
        p
    }

    fn admissible(&self, p: &[f64]) -> bool {
        let prof = self.profile(p);
        if prof.iter().any(|&(r, z)| !(r > 0.0) || r * r + z * z > 1.0) {
            return false;
        }
        let st = State::new(self.mesh);
        st.volumes(&self.positions(p))
            .iter()
            .all(|&v| v > MIN_CELL_VOLUME)
    }

    /// Reduced gradient. All cells of a strip between two rings are congruent,
    /// so the strip contributes `segments` times the contribution of its two
    /// cells at position 0.
    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let m = self.segments;
        let prof = self.profile(p);
        let at = |v: usize| {
            let (i, j) = (v / m, v % m);
            let a = annulus_angle(m, i, j);
            let (r, z) = prof[i];
            ([r * a.cos(), r * a.sin(), z], a)
        };
        let mut gr = vec![0.0; self.rings];
        let mut gz = vec![0.0; self.rings];
        for i in 0..self.rings - 1 {
            for c in [2 * i * m, 2 * i * m + 1] {
                let cell = &self.mesh.cells()[c];
                let pts: Vec<([f64; 3], f64)> = cell.iter().map(|&v| at(v)).collect();
                let verts: Vec<&[f64]> = pts.iter().map(|(x, _)| &x[..]).collect();
                for ((&v, gv), (_, a)) in cell.iter().zip(cell_gradient(&verts)).zip(&pts) {
                    let ring = v / m;
                    gr[ring] += gv[0] * a.cos() + gv[1] * a.sin();
                    gz[ring] += gv[2];
                }
            }
        }
        let mf = m as f64;
        let last = self.rings - 1;
        let mut out = vec![0.0; self.dofs()];
        for i in 0..self.rings {
            let (r, z) = (mf * gr[i], mf * gz[i]);
            match i {
                0 => out[0] = -p[0].sin() * r + p[0].cos() * z,
                _ if i == last => {
                    let psi = p[p.len() - 1];
                    out[self.dofs() - 1] = -psi.sin() * r + psi.cos() * z;
                }
                _ => {
                    out[2 * i - 1] = r;
                    out[2 * i] = z;
                }
            }
        }
        out
    }

    /// Largest per-vertex norm of the full projected gradient implied by a
    /// reduced gradient: by symmetry each vertex of ring `i` carries `1/m` of
    /// the ring's share, with no angular component.
    fn vertex_norm(&self, g: &[f64]) -> f64 {
        let m = self.segments as f64;
        let mut worst = g[0].abs().max(g[g.len() - 1].abs());
        for pair in g[1..g.len() - 1].chunks(2) {
            worst = worst.max(pair[0].hypot(pair[1]));
        }
        worst / m
    }

    fn jacobian(&self, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let d = self.dofs();
        let mut jac = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut plus = p.to_vec();
            plus[k] += h;
            let mut minus = p.to_vec();
            minus[k] -= h;
            let gp = self.gradient(&plus);
            let gm = self.gradient(&minus);
            for i in 0..d {
                jac[(i, k)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        Ok((&jac + jac.transpose()) * 0.5)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves for a critical annulus starting from an annulus seed of the given
/// cylinder radius and size. From the default seed this converges to the
/// discrete critical catenoid.
pub fn critical_annulus(
    radius: f64,
    rings: usize,
    segments: usize,
    opts: &AnnulusOptions,
) -> Result<(SimplicialSurface, SolveStats)> {
    if !(opts.grad_tol > 0.0 && opts.fd_step > 0.0) || opts.max_iters == 0 {
        return Err(Error::Domain(
            "annulus options need positive tolerances and iterations".into(),
        ));
    }
    if rings < 3 {
        return Err(Error::Domain("annulus solve needs at least 3 rings".into()));
    }
    let mesh = annulus(radius, rings, segments)?;
    let red = Reduced {
        mesh: &mesh,
        rings,
        segments,
    };
    let mut p = red.initial();
    let mut g = red.gradient(&p);
    let mut lambda: Option<f64> = None;
    let mut iterations = 0;

    let finish = |p: &[f64], iterations: usize| -> Result<(SimplicialSurface, SolveStats)> {
        let pos: Vec<AmbientVector> = red
            .positions(p)
            .chunks(3)
            .map(|c| AmbientVector::from(c.to_vec()))
            .collect();
        let out = mesh.with_positions(pos)?;
        let gnorm = super::gradient_norm(&out, &super::SolveOptions::default())?;
        let stats = SolveStats {
            iterations,
            final_area: out.surface_measure(),
            final_grad_norm: gnorm,
            boundary_orthogonality_max_angle: orthogonality_angle(&out).ok(),
            grad_tol: opts.grad_tol,
            converged: gnorm <= opts.grad_tol,
        };
        Ok((out, stats))
    };

    while red.vertex_norm(&g) > opts.grad_tol && iterations < opts.max_iters {
        let jac = red.jacobian(&p, opts.fd_step)?;
        let jtj = jac.transpose() * &jac;
        let rhs = -(jac.transpose() * DVector::from_column_slice(&g));
        let mut lam = lambda.unwrap_or(1e-6 * jtj.diagonal().max());
        let gn = norm(&g);
        let mut accepted = false;
        while lam < 1e30 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lam;
            }
            if let Some(step) = a.cholesky().map(|c| c.solve(&rhs)) {
                let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                if red.admissible(&trial) {
                    let gt = red.gradient(&trial);
                    if norm(&gt) < gn {
                        p = trial;
                        g = gt;
                        accepted = true;
                        lam /= 3.0;
                        break;
                    }
                }
            }
            lam *= 4.0;
        }
        iterations += 1;
        lambda = Some(lam);
        if !accepted {
            let (_, stats) = finish(&p, iterations)?;
            return Err(Error::Stall {
                stats: Box::new(stats),
            });
        }
    }
    finish(&p, iterations)
}
