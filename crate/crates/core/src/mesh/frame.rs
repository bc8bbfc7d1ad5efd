use crate::error::{Error, Result};
use crate::vector::{dot, AmbientVector};

/// Orthonormality tolerance for frame vectors.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// `k` orthonormal vectors in `R^n` spanning a tangent plane.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoFrame {
    vectors: Vec<AmbientVector>,
}

impl OrthoFrame {
    /// Wraps vectors that are already orthonormal to [`FRAME_TOLERANCE`].
    pub fn new(vectors: Vec<AmbientVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Domain("a frame needs at least one vector".into()));
        }
        let n = vectors[0].dim();
        if vectors.iter().any(|v| v.dim() != n) {
            return Err(Error::Domain("frame vectors differ in dimension".into()));
        }
        if vectors.len() > n {
            return Err(Error::Domain(format!(
                "{} vectors cannot be orthonormal in R^{n}",
                vectors.len()
            )));
        }
        let frame = Self { vectors };
        let defect = frame.orthonormality_defect();
        if defect > FRAME_TOLERANCE {
            return Err(Error::Invariant(format!(
                "frame is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(frame)
    }

    /// Orthonormalizes spanning vectors by modified Gram-Schmidt with one
    /// re-orthogonalization pass.
    pub fn gram_schmidt(spanning: &[AmbientVector]) -> Result<Self> {
        let mut out: Vec<AmbientVector> = Vec::with_capacity(spanning.len());
        for (i, v) in spanning.iter().enumerate() {
            let scale = v.norm();
            let mut w = v.clone();
            for _ in 0..2 {
                for e in &out {
                    let c = w.dot(e);
                    w.axpy(-c, e);
                }
            }
            let len = w.norm();
            if len == 0.0 || len <= 1e-12 * scale {
                return Err(Error::Domain(format!(
                    "spanning vector {i} is linearly dependent on its predecessors"
                )));
            }
            out.push(w.scaled(1.0 / len));
        }
        Self::new(out)
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[AmbientVector] {
        &self.vectors
    }

    /// Largest `|<e_i, e_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, v: &AmbientVector) -> AmbientVector {
        let mut p = AmbientVector::zeros(v.dim());
        for e in &self.vectors {
            p.axpy(v.dot(e), e);
        }
        p
    }

    /// `|v|^2 - sum_i <v, e_i>^2`, computed as the squared norm of the normal
    /// residual so the result is never negative.
    pub fn normal_deficit(&self, v: &[f64]) -> f64 {
        let mut r = v.to_vec();
        for e in &self.vectors {
            let c = dot(v, e.coords());
            for (ri, ei) in r.iter_mut().zip(e.coords()) {
                *ri -= c * ei;
            }
        }
        dot(&r, &r)
    }

    /// Applies an orthogonal `k x k` matrix (row-major) to the frame vectors.
    pub fn remix(&self, q: &[f64]) -> Result<Self> {
        let k = self.k();
        if q.len() != k * k {
            return Err(Error::Domain("mixing matrix has the wrong size".into()));
        }
        let n = self.ambient_dim();
        let vectors = (0..k)
            .map(|i| {
                let mut v = AmbientVector::zeros(n);
                for j in 0..k {
                    v.axpy(q[i * k + j], &self.vectors[j]);
                }
                v
            })
            .collect();
        Self::new(vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_of_scaled_axes() {
        let f = OrthoFrame::gram_schmidt(&[
            AmbientVector::from([1.0, 0.0, 0.0]),
            AmbientVector::from([0.0, 2.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(f.vectors()[0].coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(f.vectors()[1].coords(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn dependent_vectors_rejected() {
        let r = OrthoFrame::gram_schmidt(&[
            AmbientVector::from([1.0, 1.0]),
            AmbientVector::from([2.0, 2.0]),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn non_orthonormal_rejected() {
        let r = OrthoFrame::new(vec![
            AmbientVector::from([1.0, 0.0]),
            AmbientVector::from([0.1, 1.0]),
        ]);
        assert!(matches!(r, Err(Error::Invariant(_))));
    }

    #[test]
    fn deficit_is_normal_part() {
        let f = OrthoFrame::new(vec![AmbientVector::from([1.0, 0.0, 0.0])]).unwrap();
        assert_eq!(f.normal_deficit(&[3.0, 4.0, 0.0]), 16.0);
    }
}
