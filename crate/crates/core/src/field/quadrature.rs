//! Globally adaptive composite Simpson quadrature on `[0, 1]` for
//! vector-valued integrands.
//!
//! Each panel carries five samples; the panel error is `|S2 - S1| / 15` in the
//! max norm, where `S1` is the one-panel and `S2` the two-panel Simpson value,
//! and the panel contributes the extrapolated `S2 + (S2 - S1) / 15`. The panel
//! with the largest error is bisected until the summed error meets the target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Bisection budget before the integration is declared failed.
pub const MAX_SUBDIVISIONS: usize = 1_000_000;

/// Panels narrower than this are not split further.
const MIN_PANEL_WIDTH: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Estimated absolute error, max norm over components.
    pub error: f64,
    pub subdivisions: usize,
}

struct Panel {
    a: f64,
    b: f64,
    // Offsets into the sample arena for a, a+h/4, a+h/2, a+3h/4, b.
    samples: [usize; 5],
    error: f64,
}

struct Ranked {
    error: f64,
    panel: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.panel.cmp(&self.panel))
    }
}

struct Integrator<F> {
    dim: usize,
    f: F,
    arena: Vec<f64>,
    panels: Vec<Panel>,
}

impl<F: FnMut(f64, &mut [f64])> Integrator<F> {
    fn sample(&mut self, t: f64) -> usize {
        let start = self.arena.len();
        self.arena.resize(start + self.dim, 0.0);
        (self.f)(t, &mut self.arena[start..]);
        start
    }

    fn at(&self, slot: usize, i: usize) -> f64 {
        self.arena[slot + i]
    }

    /// Pushes a panel whose end and mid samples already exist.
    fn panel(&mut self, a: f64, b: f64, fa: usize, fm: usize, fb: usize) -> Result<usize> {
        let h = b - a;
        let fl = self.sample(a + 0.25 * h);
        let fr = self.sample(a + 0.75 * h);
        let s = [fa, fl, fm, fr, fb];
        let mut error = 0.0_f64;
        for i in 0..self.dim {
            let v: [f64; 5] = std::array::from_fn(|j| self.at(s[j], i));
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!(
                    "integrand is not finite on [{a}, {b}]"
                )));
            }
            let s1 = h / 6.0 * (v[0] + 4.0 * v[2] + v[4]);
            let s2 = h / 12.0 * (v[0] + 4.0 * v[1] + 2.0 * v[2] + 4.0 * v[3] + v[4]);
            error = error.max((s2 - s1).abs() / 15.0);
        }
        self.panels.push(Panel {
            a,
            b,
            samples: s,
            error,
        });
        Ok(self.panels.len() - 1)
    }

    fn panel_value(&self, p: &Panel, out: &mut [f64]) {
        let h = p.b - p.a;
        for (i, o) in out.iter_mut().enumerate() {
            let v: [f64; 5] = std::array::from_fn(|j| self.at(p.samples[j], i));
            let s1 = h / 6.0 * (v[0] + 4.0 * v[2] + v[4]);
            let s2 = h / 12.0 * (v[0] + 4.0 * v[1] + 2.0 * v[2] + 4.0 * v[3] + v[4]);
            *o += s2 + (s2 - s1) / 15.0;
        }
    }
}

/// Integrates `f` over `[0, 1]` to absolute error `tol` (max norm).
///
/// `f(t, out)` writes the `dim` components of the integrand at `t`.
pub fn quad_integrate<F>(dim: usize, f: F, tol: f64) -> Result<QuadResult>
where
    F: FnMut(f64, &mut [f64]),
{
    quad_integrate_scaled(dim, f, tol, 1.0)
}

/// As [`quad_integrate`] with error target `tol * scale`, for integrands
/// whose magnitude is known to be of order `scale`.
pub fn quad_integrate_scaled<F>(dim: usize, f: F, tol: f64, scale: f64) -> Result<QuadResult>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(tol > 0.0) || !(scale > 0.0) {
        return Err(Error::Domain(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let target = tol * scale;
    let mut it = Integrator {
        dim,
        f,
        arena: Vec::with_capacity(dim * 64),
        panels: Vec::with_capacity(32),
    };
    let fa = it.sample(0.0);
    let fm = it.sample(0.5);
    let fb = it.sample(1.0);
    let root = it.panel(0.0, 1.0, fa, fm, fb)?;

    let mut heap = BinaryHeap::new();
    let mut total = it.panels[root].error;
    heap.push(Ranked {
        error: total,
        panel: root,
    });
    let mut active = vec![true];
    let mut subdivisions = 0;

    while total > target {
        let Some(Ranked { panel, .. }) = heap.pop() else {
            break;
        };
        if subdivisions >= MAX_SUBDIVISIONS {
            return Err(Error::Quadrature {
                subdivisions,
                estimate: total,
                target,
            });
        }
        let (a, b, s, err) = {
            let p = &it.panels[panel];
            (p.a, p.b, p.samples, p.error)
        };
        if b - a < MIN_PANEL_WIDTH {
            return Err(Error::Quadrature {
                subdivisions,
                estimate: total,
                target,
            });
        }
        let m = 0.5 * (a + b);
        active[panel] = false;
        let left = it.panel(a, m, s[0], s[1], s[2])?;
        let right = it.panel(m, b, s[2], s[3], s[4])?;
        active.push(true);
        active.push(true);
        subdivisions += 1;
        let (el, er) = (it.panels[left].error, it.panels[right].error);
        total += el + er - err;
        heap.push(Ranked {
            error: el,
            panel: left,
        });
        heap.push(Ranked {
            error: er,
            panel: right,
        });
        // Re-sum occasionally so cancellation in the running total cannot stall.
        if subdivisions % 256 == 0 {
            total = heap.iter().map(|r| r.error).sum();
        }
    }

    let mut value = vec![0.0; dim];
    let mut error = 0.0;
    for (p, _) in it.panels.iter().zip(&active).filter(|(_, &on)| on) {
        it.panel_value(p, &mut value);
        error += p.error;
    }
    Ok(QuadResult {
        value,
        error,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_and_constant() {
        let r = quad_integrate(1, |t, o| o[0] = t, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value[0], 0.5, epsilon = 1e-15);
        let r = quad_integrate(2, |_, o| o.copy_from_slice(&[3.5, -1.0]), 1e-12).unwrap();
        assert_abs_diff_eq!(r.value[0], 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.value[1], -1.0, epsilon = 1e-15);
        assert!(r.error <= 1e-12);
    }

    #[test]
    fn smooth_oscillatory() {
        let r = quad_integrate(1, |t, o| o[0] = (10.0 * t).cos(), 1e-11).unwrap();
        assert_abs_diff_eq!(r.value[0], (10.0f64).sin() / 10.0, epsilon = 1e-10);
        assert!(r.error <= 1e-11);
    }

    #[test]
    fn sharp_peak_at_endpoint() {
        // integral of 1/(eps^2 + (1-t)^2) = atan(1/eps)/eps
        let eps = 1e-4;
        let r = quad_integrate_scaled(
            1,
            |t, o| o[0] = 1.0 / (eps * eps + (1.0 - t).powi(2)),
            1e-10,
            1.0 / eps,
        )
        .unwrap();
        let exact = (1.0 / eps).atan() / eps;
        assert!((r.value[0] - exact).abs() <= 1e-10 / eps * 10.0);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(quad_integrate(1, |t, o| o[0] = 1.0 / (t - 0.5), 1e-8).is_err());
    }

    #[test]
    fn unreachable_tolerance_fails() {
        // Discontinuous integrand with an absurd tolerance exhausts the panel width.
        let r = quad_integrate(
            1,
            |t, o| o[0] = if t < 1.0 / 3.0 { 0.0 } else { 1.0 },
            1e-300,
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(quad_integrate(1, |_, o| o[0] = 1.0, 0.0).is_err());
    }
}
