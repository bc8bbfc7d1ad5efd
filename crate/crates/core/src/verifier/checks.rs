use super::attest::AttestedSurface;
use super::integrals::{boundary_flux, crossing_flux, cut, gap_integral};
use super::report::{inputs_digest, VerificationReport};
use crate::error::{Error, Result};
use crate::field::{DEFAULT_TOL, GUARD_RADIUS};
use crate::mesh::{unit_ball_volume, unit_sphere_measure, SPHERE_TOLERANCE};
use crate::minimizer::orthogonality_angle;
use crate::vector::AmbientVector;

/// Bound on the pointwise Lemma-type integrand below zero.
pub const GAP_FLOOR: f64 = 1e-9;
/// Allowed size of `∫_{∂Σ} <W, x>` per unit boundary measure.
pub const SPHERE_TERM_TOL: f64 = 1e-8;
/// Tangency defect that counts as tangent.
pub const TANGENT_TOL: f64 = 1e-9;
/// Tangency defect that counts as bounded away from tangent.
pub const NON_TANGENT_FLOOR: f64 = 1e-6;
/// Relative tolerance of the identity `k |Σ| = |∂Σ|`.
pub const IDENTITY_TOL: f64 = 1e-2;

fn ball(k: usize) -> f64 {
    unit_ball_volume(k as i64).expect("k >= 1")
}

fn require_boundary(a: &AttestedSurface) -> Result<()> {
    if a.surface().is_closed() {
        return Err(Error::Precondition("surface has no boundary".into()));
    }
    Ok(())
}

/// Boundary vertex nearest to `y`; `y` must lie within one edge length of it.
fn snap_to_boundary(a: &AttestedSurface, y: &AmbientVector) -> Result<AmbientVector> {
    let s = a.surface();
    require_boundary(a)?;
    if y.dim() != s.ambient_dim() {
        return Err(Error::Domain("point has the wrong dimension".into()));
    }
    let (v, d) = (0..s.vertices().len())
        .filter(|&v| s.is_boundary_vertex(v))
        .map(|v| (v, s.vertices()[v].distance(y)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("surfaces with boundary have boundary vertices");
    if d > s.max_edge_length() {
        return Err(Error::Precondition(format!(
            "point is {d:e} away from the nearest boundary vertex"
        )));
    }
    Ok(s.vertices()[v].clone())
}

fn params(y: &AmbientVector, rest: &[f64]) -> Vec<f64> {
    y.coords().iter().chain(rest).copied().collect()
}

/// `|Σ| >= |B^k| - tol_disc` for a critical free-boundary surface.
pub fn check_main_theorem(a: &AttestedSurface, tol_disc: f64) -> Result<VerificationReport> {
    a.require_critical(true)?;
    require_boundary(a)?;
    let s = a.surface();
    let area = s.surface_measure();
    let bound = ball(s.k());
    let angle = orthogonality_angle(s)?;
    Ok(
        VerificationReport::new("main_theorem", inputs_digest(a.digest(), &[tol_disc]))
            .measure("area", area)
            .measure("area_gap", area - bound)
            .measure("orthogonality_angle", angle)
            .target("unit_ball_volume", bound)
            .target("tol_disc", tol_disc)
            .note(a.attestation().describe())
            .decide((bound - area).max(0.0), tol_disc),
    )
}

/// Compares near-equality of the area bound with tangency of `x - y` at the
/// cell barycenters.
pub fn check_equality_tangency(
    a: &AttestedSurface,
    y: &AmbientVector,
    tol_disc: f64,
) -> Result<VerificationReport> {
    let y = snap_to_boundary(a, y)?;
    let s = a.surface();
    let mut defect: f64 = 0.0;
    for c in 0..s.cells().len() {
        let d = &s.barycenter(c) - &y;
        let len = d.norm();
        if len < GUARD_RADIUS {
            continue;
        }
        let frame = s.tangent_frame(c)?;
        defect = defect.max(frame.normal_deficit(d.coords()).sqrt() / len);
    }
    let gap = s.surface_measure() - ball(s.k());
    let near_equality = gap <= tol_disc;
    let (residual, tol) = if near_equality {
        (defect, TANGENT_TOL)
    } else {
        ((NON_TANGENT_FLOOR - defect).max(0.0), 0.0)
    };
    Ok(VerificationReport::new(
        "equality_tangency",
        inputs_digest(a.digest(), &params(&y, &[tol_disc])),
    )
    .measure("tangency_defect", defect)
    .measure("area_gap", gap)
    .measure("near_equality", if near_equality { 1.0 } else { 0.0 })
    .target("tol_disc", tol_disc)
    .note(if near_equality {
        "near equality: tangency expected"
    } else {
        "strict inequality: tangency defect expected to be positive"
    })
    .note("rigidity: diagnostic only")
    .decide(residual, tol))
}

/// Both sides of the divergence identity on `Σ ∖ B_r(y)`.
pub fn check_first_variation(
    a: &AttestedSurface,
    y: &AmbientVector,
    r: f64,
    tolerance: f64,
) -> Result<VerificationReport> {
    a.require_critical(true)?;
    if !(r > GUARD_RADIUS) || !(r < 1.0) {
        return Err(Error::Domain(format!(
            "radius {r} must lie in ({GUARD_RADIUS:e}, 1)"
        )));
    }
    let y = snap_to_boundary(a, y)?;
    let s = a.surface();
    let k = s.k();
    let pieces = cut(s, &y, r);
    let gi = gap_integral(s, &pieces.outside, &y, DEFAULT_TOL)?;
    let (flux, crossing) = crossing_flux(&pieces.crossings, &y, k, DEFAULT_TOL)?;
    let bflux = boundary_flux(s, &y, r, DEFAULT_TOL)?;
    let lhs = gi.value;
    let rhs = 0.5 * k as f64 * gi.outside_measure - flux - bflux;
    let bm = s.boundary_measure();
    let mut report = VerificationReport::new(
        "first_variation",
        inputs_digest(a.digest(), &params(&y, &[r, tolerance])),
    )
    .measure("lhs", lhs)
    .measure("rhs", rhs)
    .measure("outside_measure", gi.outside_measure)
    .measure("crossing_flux", flux)
    .measure("crossing_measure", crossing)
    .measure("sphere_term", bflux)
    .measure("min_gap", gi.min_gap)
    .measure("quadrature_error", gi.error)
    .target("r", r);
    let mut residual = (lhs - rhs).abs();
    if gi.min_gap < -GAP_FLOOR {
        report = report.note(format!("integrand below zero: {:e}", gi.min_gap));
        residual = f64::INFINITY;
    }
    if bflux.abs() > SPHERE_TERM_TOL * bm {
        report = report.note(format!("sphere term too large: {bflux:e}"));
        residual = f64::INFINITY;
    }
    Ok(report.decide(residual, tolerance))
}

/// Convergence of [`check_first_variation`] residuals over a refinement
/// sequence: every ratio of consecutive residuals must be at most `max_ratio`.
pub fn first_variation_refinement(
    levels: &[VerificationReport],
    max_ratio: f64,
) -> Result<VerificationReport> {
    if levels.len() < 2 {
        return Err(Error::Inconclusive(
            "a refinement study needs at least two levels".into(),
        ));
    }
    let digest = levels
        .iter()
        .map(|r| r.inputs_digest.as_str())
        .collect::<Vec<_>>()
        .join(",");
    let mut report = VerificationReport::new(
        "first_variation_refinement",
        inputs_digest(&digest, &[max_ratio]),
    )
    .target("max_ratio", max_ratio);
    let mut worst: f64 = 0.0;
    for (i, r) in levels.iter().enumerate() {
        report = report.measure(&format!("residual_{i}"), r.residual);
        if i > 0 {
            let ratio = r.residual / levels[i - 1].residual;
            report = report.measure(&format!("ratio_{i}"), ratio);
            worst = worst.max(if ratio.is_nan() { f64::INFINITY } else { ratio });
        }
    }
    Ok(report.decide(worst, max_ratio))
}

/// `∫_{Σ ∩ ∂B_r(y)} <W, ν>` over shrinking radii against `(k/2) |B^k|`.
pub fn check_boundary_term_limit(
    a: &AttestedSurface,
    y: &AmbientVector,
    radii: &[f64],
    tolerance: f64,
) -> Result<VerificationReport> {
    if radii.len() < 3 {
        return Err(Error::Inconclusive(
            "at least three radii are needed to extrapolate".into(),
        ));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("radii must be strictly decreasing".into()));
    }
    if radii.iter().any(|&r| !(r > GUARD_RADIUS)) {
        return Err(Error::Domain("radii must exceed the guard radius".into()));
    }
    let y = snap_to_boundary(a, y)?;
    let s = a.surface();
    let k = s.k();
    let target = 0.5 * k as f64 * ball(k);
    let half_sphere = 0.5 * unit_sphere_measure(k as i64)?;
    let mut report = VerificationReport::new(
        "boundary_term_limit",
        inputs_digest(a.digest(), &params(&y, radii)),
    )
    .target("limit", target);
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let c = cut(s, &y, r);
        let (flux, measure) = crossing_flux(&c.crossings, &y, k, DEFAULT_TOL)?;
        let density = measure / (half_sphere * r.powi(k as i32 - 1));
        report = report
            .measure(&format!("flux@{r}"), flux)
            .measure(&format!("density@{r}"), density);
        values.push(flux);
    }
    let errors: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    // Richardson step on the two smallest radii with error ~ r^k.
    let n = values.len();
    let q = (radii[n - 2] / radii[n - 1]).powi(k as i32);
    let extrapolated = values[n - 1] + (values[n - 1] - values[n - 2]) / (q - 1.0);
    let last = errors[n - 1];
    report = report
        .measure("final_error", last)
        .measure("extrapolated", extrapolated)
        .measure("monotone", if monotone { 1.0 } else { 0.0 });
    if !monotone {
        report = report.note("error does not decrease monotonically");
    }
    Ok(report.decide(if monotone { last } else { f64::INFINITY }, tolerance))
}

/// `r -> |Σ ∩ B_r(y)| / r^k` must not decrease beyond the clipping error bars.
pub fn check_monotonicity(
    a: &AttestedSurface,
    y: &AmbientVector,
    radii: &[f64],
) -> Result<VerificationReport> {
    let s = a.surface();
    if y.dim() != s.ambient_dim() {
        return Err(Error::Domain("point has the wrong dimension".into()));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("radii must be strictly increasing".into()));
    }
    let dist = s.distance_to_boundary(y);
    if let Some(r) = radii.iter().find(|&&r| r > dist) {
        return Err(Error::Precondition(format!(
            "radius {r} reaches the boundary (distance {dist})"
        )));
    }
    let k = s.k() as i32;
    let mut report =
        VerificationReport::new("monotonicity", inputs_digest(a.digest(), &params(y, radii)));
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in radii {
        let c = s.clip_measure(y, r);
        let scale = r.powi(k);
        ratios.push((c.value / scale, c.error / scale));
        report = report
            .measure(&format!("ratio@{r}"), c.value / scale)
            .measure(&format!("ratio_error@{r}"), c.error / scale);
    }
    let mut worst_raw = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for w in ratios.windows(2) {
        let drop = w[0].0 - w[1].0;
        worst_raw = worst_raw.max(drop);
        worst = worst.max(drop - w[0].1 - w[1].1);
    }
    Ok(report
        .measure("max_drop", worst_raw.max(0.0))
        .note(a.attestation().describe())
        .decide(worst, 1e-12))
}

/// `|Σ| >= |B^k| - tol_disc` for a critical surface through the origin with
/// boundary on the sphere; the contact angle is not constrained.
pub fn check_corollary1(a: &AttestedSurface, tol_disc: f64) -> Result<VerificationReport> {
    a.require_critical(false)?;
    require_boundary(a)?;
    let s = a.surface();
    let nearest = s
        .vertices()
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    if nearest > 1e-6 {
        return Err(Error::Precondition(format!(
            "no vertex within 1e-6 of the origin (nearest at {nearest:e})"
        )));
    }
    let area = s.surface_measure();
    let bound = ball(s.k());
    Ok(
        VerificationReport::new("corollary1", inputs_digest(a.digest(), &[tol_disc]))
            .measure("area", area)
            .measure("area_gap", area - bound)
            .measure("origin_distance", nearest)
            .target("unit_ball_volume", bound)
            .target("tol_disc", tol_disc)
            .note(a.attestation().describe())
            .decide((bound - area).max(0.0), tol_disc),
    )
}

/// `|Γ| >= k |B^k|` for a closed minimal `(k-1)`-surface `Γ` in the sphere.
pub fn check_corollary2(
    a: &AttestedSurface,
    k: usize,
    tol_disc: f64,
) -> Result<VerificationReport> {
    let s = a.surface();
    if !s.is_closed() {
        return Err(Error::Precondition("mesh has boundary".into()));
    }
    if s.k() + 1 != k {
        return Err(Error::Domain(format!(
            "a {}-dimensional mesh spans a cone of dimension {}, not {k}",
            s.k(),
            s.k() + 1
        )));
    }
    if let Some(v) = s
        .vertices()
        .iter()
        .find(|v| (v.norm() - 1.0).abs() > SPHERE_TOLERANCE)
    {
        return Err(Error::Precondition(format!(
            "vertex off the sphere (|x| = {})",
            v.norm()
        )));
    }
    a.require_critical(false)?;
    let measure = s.surface_measure();
    let bound = k as f64 * ball(k);
    Ok(VerificationReport::new(
        "corollary2",
        inputs_digest(a.digest(), &[k as f64, tol_disc]),
    )
    .measure("measure", measure)
    .measure("gap", measure - bound)
    .target("sphere_measure", bound)
    .target("tol_disc", tol_disc)
    .note(a.attestation().describe())
    .decide((bound - measure).max(0.0), tol_disc))
}

/// The identity `k |Σ| = |∂Σ|` and the bound on `|∂Σ|^k / |Σ|^(k-1)`.
///
/// The residual is the larger of the identity defect over its 1% budget and
/// the ratio shortfall over its allowance, so the tolerance is 1.
pub fn check_isoperimetric(a: &AttestedSurface, tol_disc: f64) -> Result<VerificationReport> {
    a.require_critical(true)?;
    require_boundary(a)?;
    let s = a.surface();
    let k = s.k();
    let kf = k as f64;
    let area = s.surface_measure();
    let bdry = s.boundary_measure();
    let identity = (kf * area - bdry).abs() / bdry;
    let ratio = bdry.powi(k as i32) / area.powi(k as i32 - 1);
    let bound = unit_sphere_measure(k as i64)?.powi(k as i32) / ball(k).powi(k as i32 - 1);
    let allowance = bound * tol_disc / ball(k);
    let shortfall = (bound - ratio).max(0.0);
    Ok(
        VerificationReport::new("isoperimetric", inputs_digest(a.digest(), &[tol_disc]))
            .measure("identity_rel", identity)
            .measure("ratio", ratio)
            .measure("ratio_excess_rel", ratio / bound - 1.0)
            .target("ratio_bound", bound)
            .target("identity_tol", IDENTITY_TOL)
            .target("ratio_allowance", allowance)
            .note(a.attestation().describe())
            .decide((identity / IDENTITY_TOL).max(shortfall / allowance), 1.0),
    )
}
