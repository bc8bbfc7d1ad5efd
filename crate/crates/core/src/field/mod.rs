//! The calibration field `W` attached to a boundary point `y` of the unit sphere:
//!
//! ```text
//! W(x) = x/2 - (x - y)/|x - y|^k - (k - 2)/2 * int_0^1 (t x - y)/|t x - y|^k dt
//! ```
//!
//! together with its radial component, directional derivatives, tangential
//! divergence over an orthonormal `k`-frame, and the remainder of its leading
//! singular term near `y`. The parameter `k` is independent of any mesh.
//!
//! Integrals are computed with [`quadrature`]. Their error target is scaled
//! by `max(1, |x - y|^(1 - p))`, where `|t x - y|^(-p)` bounds the integrand.
//! The scale follows from `|t x - y|^2 >= t |x - y|^2 + (1 - t)^2`, which caps
//! the integrand by `|x - y|^(-p)` on a window of width `|x - y|` near `t = 1`.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::mesh::OrthoFrame;
use crate::vector::{dot, AmbientVector};

pub use quadrature::{quad_integrate, quad_integrate_scaled, QuadResult};

/// Points closer than this to `y` are rejected.
pub const GUARD_RADIUS: f64 = 1e-8;
/// Default relative quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

const SPHERE_SLACK: f64 = 1e-9;
const BALL_SLACK: f64 = 1e-9;

/// One evaluation of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub w: AmbientVector,
    /// Tangential divergence over the supplied frame, if any.
    pub trace: Option<f64>,
    /// Estimated absolute quadrature error of the evaluation.
    pub quad_err: f64,
    pub k: usize,
}

/// Validates `(x, y, k)` and returns `|x - y|`.
fn check_inputs(x: &AmbientVector, y: &AmbientVector, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("the field needs k >= 1".into()));
    }
    if x.dim() != y.dim() {
        return Err(Error::Domain(format!(
            "x has dimension {} but y has dimension {}",
            x.dim(),
            y.dim()
        )));
    }
    let ny = y.norm();
    if (ny - 1.0).abs() > SPHERE_SLACK {
        return Err(Error::Domain(format!(
            "y must lie on the unit sphere (|y| = {ny})"
        )));
    }
    let nx = x.norm();
    if !(nx <= 1.0 + BALL_SLACK) {
        return Err(Error::Domain(format!(
            "x must lie in the closed unit ball (|x| = {nx})"
        )));
    }
    let d = x.distance(y);
    if d < GUARD_RADIUS {
        return Err(Error::Singularity {
            distance: d,
            guard: GUARD_RADIUS,
        });
    }
    Ok(d)
}

fn check_frame(frame: &OrthoFrame, x: &AmbientVector) -> Result<()> {
    if frame.ambient_dim() != x.dim() {
        return Err(Error::Domain("frame and point differ in dimension".into()));
    }
    Ok(())
}

/// Error scale for integrands bounded by `|t x - y|^(-p)`.
fn magnitude_scale(d: f64, p: i32) -> f64 {
    if p <= 1 {
        1.0
    } else {
        d.powi(1 - p).max(1.0)
    }
}

/// Coefficient `(k - 2)/2` of the integral term.
fn integral_coefficient(k: usize) -> f64 {
    (k as f64 - 2.0) / 2.0
}

/// `int_0^1 (t x - y)/|t x - y|^k dt` with its error estimate.
fn potential_integral(x: &[f64], y: &[f64], k: usize, d: f64, tol: f64) -> Result<QuadResult> {
    let n = x.len();
    quad_integrate_scaled(
        n,
        |t, out| {
            let mut r2 = 0.0;
            for i in 0..n {
                let z = t * x[i] - y[i];
                out[i] = z;
                r2 += z * z;
            }
            let inv = r2.powf(-0.5 * k as f64);
            out.iter_mut().for_each(|o| *o *= inv);
        },
        tol,
        magnitude_scale(d, k as i32 - 1),
    )
}

/// Evaluates `W(x)`. For `k = 2` the integral term has coefficient zero and
/// is skipped.
pub fn eval_w(x: &AmbientVector, y: &AmbientVector, k: usize, tol: f64) -> Result<FieldSample> {
    let d = check_inputs(x, y, k)?;
    let mut w = x.scaled(0.5);
    let diff = x - y;
    w.axpy(-d.powi(-(k as i32)), &diff);
    let mut quad_err = 0.0;
    if k != 2 {
        let q = potential_integral(x.coords(), y.coords(), k, d, tol)?;
        let c = integral_coefficient(k);
        for (wi, qi) in w.coords_mut().iter_mut().zip(&q.value) {
            *wi -= c * qi;
        }
        quad_err = c.abs() * q.error;
    }
    Ok(FieldSample {
        w,
        trace: None,
        quad_err,
        k,
    })
}

/// Evaluates `W(x)` together with its tangential divergence over `frame`.
pub fn eval_w_with_frame(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    frame: &OrthoFrame,
    tol: f64,
) -> Result<FieldSample> {
    let mut sample = eval_w(x, y, k, tol)?;
    let (gap, err) = gap_with_error(x, y, k, frame, tol)?;
    sample.trace = Some(k as f64 / 2.0 - gap);
    sample.quad_err += err;
    Ok(sample)
}

/// Closed form of `<W(x), x>`: `(1 - |x|^2)(|x - y|^(-k) - 1)/2`.
pub fn radial_component(x: &AmbientVector, y: &AmbientVector, k: usize) -> Result<f64> {
    let d = check_inputs(x, y, k)?;
    Ok(0.5 * (1.0 - x.norm_squared()) * (d.powi(-(k as i32)) - 1.0))
}

/// `k/2 - sum_i <D_{e_i} W, e_i>` as a sum of two terms that are non-negative
/// whenever `k >= 2`; returns the value and its quadrature error estimate.
fn gap_with_error(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    frame: &OrthoFrame,
    tol: f64,
) -> Result<(f64, f64)> {
    let d = check_inputs(x, y, k)?;
    check_frame(frame, x)?;
    let kf = k as f64;
    let diff = x - y;
    let mut gap = kf * frame.normal_deficit(diff.coords()) / d.powi(k as i32 + 2);
    let mut err = 0.0;
    if k != 2 {
        let n = x.dim();
        let (xs, ys) = (x.coords(), y.coords());
        let mut z = vec![0.0; n];
        let q = quad_integrate_scaled(
            1,
            |t, out| {
                let mut r2 = 0.0;
                for i in 0..n {
                    z[i] = t * xs[i] - ys[i];
                    r2 += z[i] * z[i];
                }
                out[0] = t * kf * frame.normal_deficit(&z) * r2.powf(-0.5 * (kf + 2.0));
            },
            tol,
            magnitude_scale(d, k as i32),
        )?;
        let c = integral_coefficient(k);
        gap += c * q.value[0];
        err = c.abs() * q.error;
    }
    Ok((gap, err))
}

/// Tangential divergence `sum_i <D_{e_i} W, e_i>` over an orthonormal frame.
pub fn div_trace(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    frame: &OrthoFrame,
    tol: f64,
) -> Result<f64> {
    Ok(k as f64 / 2.0 - gap_with_error(x, y, k, frame, tol)?.0)
}

/// `k/2 - div_trace`.
pub fn lemma_a_gap(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    frame: &OrthoFrame,
    tol: f64,
) -> Result<f64> {
    Ok(gap_with_error(x, y, k, frame, tol)?.0)
}

/// `D_v W(x)` from the analytic derivative of each term.
pub fn directional_derivative(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    v: &AmbientVector,
    tol: f64,
) -> Result<AmbientVector> {
    let d = check_inputs(x, y, k)?;
    if v.dim() != x.dim() {
        return Err(Error::Domain("direction has the wrong dimension".into()));
    }
    let kf = k as f64;
    let diff = x - y;
    let mut out = v.scaled(0.5);
    // - [ v/|x-y|^k - k (x-y) <x-y, v>/|x-y|^(k+2) ]
    out.axpy(-d.powi(-(k as i32)), v);
    out.axpy(kf * diff.dot(v) * d.powi(-(k as i32) - 2), &diff);
    if k != 2 {
        let n = x.dim();
        let (xs, ys, vs) = (x.coords(), y.coords(), v.coords());
        let q = quad_integrate_scaled(
            n,
            |t, o| {
                let mut r2 = 0.0;
                let mut zv = 0.0;
                for i in 0..n {
                    let z = t * xs[i] - ys[i];
                    o[i] = z;
                    r2 += z * z;
                    zv += z * vs[i];
                }
                let inv_k = r2.powf(-0.5 * kf);
                let inv_k2 = inv_k / r2;
                for i in 0..n {
                    o[i] = t * (vs[i] * inv_k - kf * o[i] * zv * inv_k2);
                }
            },
            tol,
            magnitude_scale(d, k as i32),
        )?;
        let c = integral_coefficient(k);
        for (oi, qi) in out.coords_mut().iter_mut().zip(&q.value) {
            *oi -= c * qi;
        }
    }
    Ok(out)
}

/// `|W(x) + (x - y)/|x - y|^k| * |x - y|^(k - 1)`, evaluated from the regular
/// part `x/2 - (k-2)/2 int (t x - y)/|t x - y|^k dt` to avoid cancellation.
pub fn lemma_c_remainder(x: &AmbientVector, y: &AmbientVector, k: usize, tol: f64) -> Result<f64> {
    let d = check_inputs(x, y, k)?;
    let mut regular = x.scaled(0.5);
    if k != 2 {
        let q = potential_integral(x.coords(), y.coords(), k, d, tol)?;
        let c = integral_coefficient(k);
        for (ri, qi) in regular.coords_mut().iter_mut().zip(&q.value) {
            *ri -= c * qi;
        }
    }
    Ok(regular.norm() * d.powi(k as i32 - 1))
}

/// Sum of `<D_{e_i} W, e_i>` assembled from [`directional_derivative`]; an
/// independent route to [`div_trace`].
pub fn trace_from_derivatives(
    x: &AmbientVector,
    y: &AmbientVector,
    k: usize,
    frame: &OrthoFrame,
    tol: f64,
) -> Result<f64> {
    check_frame(frame, x)?;
    frame
        .vectors()
        .iter()
        .map(|e| {
            Ok(dot(
                directional_derivative(x, y, k, e, tol)?.coords(),
                e.coords(),
            ))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from(c.to_vec())
    }

    fn frame(vs: &[&[f64]]) -> OrthoFrame {
        OrthoFrame::new(vs.iter().map(|c| v(c)).collect()).unwrap()
    }

    #[test]
    fn potential_integrand_constant_at_origin() {
        // x = 0 makes (t x - y)/|t x - y|^3 = -y for all t.
        let q = potential_integral(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 3, 1.0, 1e-12).unwrap();
        assert_eq!(q.value, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn w_closed_form_k2() {
        let y = v(&[1.0, 0.0]);
        let s = eval_w(&v(&[0.0, 0.0]), &y, 2, DEFAULT_TOL).unwrap();
        assert_eq!(s.w.coords(), &[1.0, 0.0]);
        assert_eq!(s.quad_err, 0.0);
        let s = eval_w(&v(&[0.5, 0.0]), &y, 2, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(s.w[0], 2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.w[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn w_at_origin_k3() {
        let s = eval_w(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0]), 3, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(s.w[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.w[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn input_errors() {
        let y = v(&[1.0, 0.0]);
        assert!(matches!(
            eval_w(&v(&[1.0 - 1e-9, 0.0]), &y, 3, DEFAULT_TOL),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            eval_w(&v(&[0.0, 0.0]), &v(&[0.9, 0.0]), 3, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(eval_w(&v(&[0.0, 0.0, 0.0]), &y, 3, DEFAULT_TOL).is_err());
        assert!(eval_w(&v(&[2.0, 0.0]), &y, 3, DEFAULT_TOL).is_err());
    }

    #[test]
    fn radial_examples() {
        let y = v(&[1.0, 0.0]);
        let x = v(&[0.5, 0.0]);
        assert_abs_diff_eq!(
            radial_component(&x, &y, 2).unwrap(),
            9.0 / 8.0,
            epsilon = 1e-15
        );
        let w = eval_w(&x, &y, 2, DEFAULT_TOL).unwrap().w;
        assert_abs_diff_eq!(w.dot(&x), 9.0 / 8.0, epsilon = 1e-15);
        assert_eq!(radial_component(&v(&[0.0, 0.0]), &y, 3).unwrap(), 0.0);
        let on_sphere = v(&[0.6, 0.8]);
        assert_abs_diff_eq!(
            radial_component(&on_sphere, &y, 4).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn trace_examples() {
        let y = v(&[1.0, 0.0, 0.0]);
        let origin = v(&[0.0, 0.0, 0.0]);
        let perp = frame(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_abs_diff_eq!(
            div_trace(&origin, &y, 2, &perp, DEFAULT_TOL).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lemma_a_gap(&origin, &y, 2, &perp, DEFAULT_TOL).unwrap(),
            2.0,
            epsilon = 1e-15
        );

        // x - y in the span of the frame.
        let tangential = frame(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let x = v(&[0.3, 0.2, 0.0]);
        assert_abs_diff_eq!(
            div_trace(&x, &y, 2, &tangential, DEFAULT_TOL).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lemma_a_gap(&x, &y, 2, &tangential, DEFAULT_TOL).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        // k = 3, frame orthogonal to e_1 in R^4.
        let y4 = v(&[1.0, 0.0, 0.0, 0.0]);
        let perp3 = frame(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        let t = div_trace(&v(&[0.0; 4]), &y4, 3, &perp3, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(t, -2.25, epsilon = 1e-12);
    }

    #[test]
    fn derivative_k2_along_axis() {
        // W(s e_1) = s/2 e_1 - e_1/(s - 1) for y = e_1, so d/ds at 0 is 3/2.
        let d = directional_derivative(
            &v(&[0.0, 0.0]),
            &v(&[1.0, 0.0]),
            2,
            &v(&[1.0, 0.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn remainder_examples() {
        let y = v(&[1.0, 0.0, 0.0]);
        let r = lemma_c_remainder(&v(&[0.0, 0.0, 0.0]), &y, 3, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-13);
        let x = v(&[0.5, 0.0, 0.0]);
        let r2 = lemma_c_remainder(&x, &y, 2, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(r2, 0.25 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn frame_sample_carries_trace() {
        let y = v(&[1.0, 0.0, 0.0]);
        let perp = frame(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let s = eval_w_with_frame(&v(&[0.0, 0.0, 0.0]), &y, 2, &perp, DEFAULT_TOL).unwrap();
        assert_eq!(s.trace, Some(-1.0));
    }
}
