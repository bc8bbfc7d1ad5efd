use serde::{Deserialize, Serialize};

use super::report::surface_digest;
use crate::error::{Error, Result};
use crate::mesh::SimplicialSurface;
use crate::minimizer::SolveStats;

/// Evidence that a mesh is minimal, bound to the mesh by its digest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attestation {
    /// Output of the solver.
    Solver {
        stats: SolveStats,
        /// Boundary held fixed during the solve (a Plateau problem rather
        /// than a free-boundary one).
        #[serde(default)]
        fixed_boundary: bool,
        mesh_digest: String,
    },
    /// A mesh of a known surface, named by `tag`.
    Analytic { tag: String, mesh_digest: String },
    /// No evidence at all; refused wherever minimality is required.
    Raw { mesh_digest: String },
}

impl Attestation {
    pub fn mesh_digest(&self) -> &str {
        match self {
            Self::Solver { mesh_digest, .. }
            | Self::Analytic { mesh_digest, .. }
            | Self::Raw { mesh_digest } => mesh_digest,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Solver {
                stats,
                fixed_boundary,
                ..
            } => format!(
                "solver: {} iterations, grad norm {:e}{}",
                stats.iterations,
                stats.final_grad_norm,
                if *fixed_boundary {
                    ", fixed boundary"
                } else {
                    ""
                }
            ),
            Self::Analytic { tag, .. } => format!("analytic: {tag}"),
            Self::Raw { .. } => "raw mesh: no minimality evidence".into(),
        }
    }
}

/// A mesh together with its minimality evidence.
#[derive(Clone, Debug)]
pub struct AttestedSurface {
    surface: SimplicialSurface,
    attestation: Attestation,
    digest: String,
}

impl AttestedSurface {
    /// Pairs a mesh with an attestation; fails if the attestation was issued
    /// for a different mesh.
    pub fn new(surface: SimplicialSurface, attestation: Attestation) -> Result<Self> {
        let digest = surface_digest(&surface);
        if attestation.mesh_digest() != digest {
            return Err(Error::Precondition(
                "attestation digest does not match the mesh".into(),
            ));
        }
        Ok(Self {
            surface,
            attestation,
            digest,
        })
    }

    pub fn from_solver(
        surface: SimplicialSurface,
        stats: SolveStats,
        fixed_boundary: bool,
    ) -> Self {
        let digest = surface_digest(&surface);
        Self {
            surface,
            attestation: Attestation::Solver {
                stats,
                fixed_boundary,
                mesh_digest: digest.clone(),
            },
            digest,
        }
    }

    pub fn analytic(surface: SimplicialSurface, tag: &str) -> Self {
        let digest = surface_digest(&surface);
        Self {
            surface,
            attestation: Attestation::Analytic {
                tag: tag.to_string(),
                mesh_digest: digest.clone(),
            },
            digest,
        }
    }

    pub fn raw(surface: SimplicialSurface) -> Self {
        let digest = surface_digest(&surface);
        Self {
            surface,
            attestation: Attestation::Raw {
                mesh_digest: digest.clone(),
            },
            digest,
        }
    }

    pub fn surface(&self) -> &SimplicialSurface {
        &self.surface
    }

    pub fn attestation(&self) -> &Attestation {
        &self.attestation
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Refuses meshes that are not critical points. With `free_boundary`
    /// the contact with the sphere must be free as well.
    pub(crate) fn require_critical(&self, free_boundary: bool) -> Result<()> {
        match &self.attestation {
            Attestation::Raw { .. } => Err(Error::Precondition(
                "raw mesh carries no minimality attestation".into(),
            )),
            Attestation::Solver { stats, .. } if !stats.converged => {
                Err(Error::Precondition(format!(
                    "solver did not converge (grad norm {:e} > {:e})",
                    stats.final_grad_norm, stats.grad_tol
                )))
            }
            Attestation::Solver {
                fixed_boundary: true,
                ..
            } if free_boundary => Err(Error::Precondition(
                "mesh was solved with a fixed boundary; a free boundary is required".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimizer::seed;

    fn stats(converged: bool) -> SolveStats {
        SolveStats {
            iterations: 1,
            final_area: 2.0,
            final_grad_norm: if converged { 0.0 } else { 1.0 },
            boundary_orthogonality_max_angle: Some(0.0),
            grad_tol: 1e-8,
            converged,
        }
    }

    #[test]
    fn digest_mismatch_is_refused() {
        let a = seed::chord(2, 0.0).unwrap();
        let b = seed::chord(4, 0.0).unwrap();
        let att = AttestedSurface::analytic(a, "diameter")
            .attestation()
            .clone();
        assert!(AttestedSurface::new(b, att).is_err());
    }

    #[test]
    fn criticality_gates() {
        let s = seed::chord(2, 0.0).unwrap();
        assert!(AttestedSurface::from_solver(s.clone(), stats(false), false)
            .require_critical(false)
            .is_err());
        let fixed = AttestedSurface::from_solver(s.clone(), stats(true), true);
        assert!(fixed.require_critical(false).is_ok());
        assert!(fixed.require_critical(true).is_err());
        assert!(AttestedSurface::analytic(s.clone(), "diameter")
            .require_critical(true)
            .is_ok());
        assert!(AttestedSurface::raw(s).require_critical(false).is_err());
    }

    #[test]
    fn attestation_json_round_trip() {
        let s = seed::chord(2, 0.0).unwrap();
        let a = AttestedSurface::from_solver(s, stats(true), false);
        let json = serde_json::to_string(a.attestation()).unwrap();
        let back: Attestation = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, a.attestation());
    }
}
