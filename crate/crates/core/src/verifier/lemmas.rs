//! Randomized suites for the pointwise properties of `W`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::report::{inputs_digest, RngRecord, VerificationReport};
use crate::error::{Error, Result};
use crate::field::{
    directional_derivative, eval_w, eval_w_with_frame, lemma_a_gap, lemma_c_remainder,
    radial_component,
};
use crate::mesh::OrthoFrame;
use crate::vector::AmbientVector;

pub const RNG_NAME: &str = "ChaCha8";

/// Sampling parameters shared by the suites.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub k: usize,
    /// Ambient dimension; at least `k`.
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Smallest admissible `|x - y|`.
    pub min_distance: f64,
    pub tol: f64,
}

impl SampleSpec {
    pub fn new(k: usize, samples: usize, seed: u64) -> Self {
        Self {
            k,
            n: k + 1,
            samples,
            seed,
            min_distance: 1e-6,
            tol: crate::field::DEFAULT_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(Error::Domain(format!(
                "need 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.samples == 0
            || !(self.tol > 0.0)
            || !(self.min_distance >= crate::field::GUARD_RADIUS)
        {
            return Err(Error::Domain(
                "samples, tolerance and distance floor must be positive".into(),
            ));
        }
        Ok(())
    }

    fn rng(&self) -> RngRecord {
        RngRecord {
            generator: RNG_NAME.into(),
            seed: self.seed,
        }
    }

    fn digest(&self, name: &str) -> String {
        inputs_digest(
            name,
            &[
                self.k as f64,
                self.n as f64,
                self.samples as f64,
                self.seed as f64,
                self.min_distance,
                self.tol,
            ],
        )
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> AmbientVector {
    AmbientVector::from(
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect::<Vec<_>>(),
    )
}

fn on_sphere(rng: &mut ChaCha8Rng, n: usize) -> AmbientVector {
    loop {
        if let Some(v) = gaussian(rng, n).normalized() {
            return v;
        }
    }
}

fn in_ball(rng: &mut ChaCha8Rng, n: usize) -> AmbientVector {
    let r = rng.random::<f64>().powf(1.0 / n as f64);
    on_sphere(rng, n).scaled(r)
}

fn frame(rng: &mut ChaCha8Rng, n: usize, k: usize) -> OrthoFrame {
    loop {
        let spanning: Vec<_> = (0..k).map(|_| gaussian(rng, n)).collect();
        if let Ok(f) = OrthoFrame::gram_schmidt(&spanning) {
            return f;
        }
    }
}

/// One random input: `x` in the ball, `y` on the sphere, a random frame.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub x: AmbientVector,
    pub y: AmbientVector,
    pub frame: OrthoFrame,
}

/// Draws `spec.samples` points. With `on_boundary`, `x` is drawn on the sphere.
pub fn draw_points(spec: &SampleSpec, on_boundary: bool) -> Result<Vec<SamplePoint>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.samples);
    while out.len() < spec.samples {
        let y = on_sphere(&mut rng, spec.n);
        let x = if on_boundary {
            on_sphere(&mut rng, spec.n)
        } else {
            in_ball(&mut rng, spec.n)
        };
        let f = frame(&mut rng, spec.n, spec.k);
        if x.distance(&y) >= spec.min_distance {
            out.push(SamplePoint { x, y, frame: f });
        }
    }
    Ok(out)
}

/// One CSV row of the field sampler.
#[derive(Clone, Debug)]
pub struct FieldRow {
    pub x: AmbientVector,
    pub y: AmbientVector,
    pub k: usize,
    pub w: AmbientVector,
    pub trace: f64,
    pub gap: f64,
    pub quad_err: f64,
}

/// Evaluates `W`, its trace and the gap at every sample.
pub fn sample_field(spec: &SampleSpec) -> Result<Vec<FieldRow>> {
    draw_points(spec, false)?
        .par_iter()
        .map(|p| {
            let s = eval_w_with_frame(&p.x, &p.y, spec.k, &p.frame, spec.tol)?;
            let gap = lemma_a_gap(&p.x, &p.y, spec.k, &p.frame, spec.tol)?;
            Ok(FieldRow {
                x: p.x.clone(),
                y: p.y.clone(),
                k: spec.k,
                w: s.w,
                trace: s.trace.expect("frame supplied"),
                gap,
                quad_err: s.quad_err,
            })
        })
        .collect()
}

/// Writes rows with columns `x_1..x_n, y_1..y_n, k, w_1..w_n, trace, gap, quad_err`.
pub fn write_field_csv(rows: &[FieldRow], n: usize, w: &mut impl Write) -> Result<()> {
    let mut header: Vec<String> = Vec::new();
    for p in ["x", "y"] {
        header.extend((1..=n).map(|i| format!("{p}_{i}")));
    }
    header.push("k".into());
    header.extend((1..=n).map(|i| format!("w_{i}")));
    header.extend(["trace", "gap", "quad_err"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cols: Vec<String> = Vec::new();
        cols.extend(r.x.coords().iter().map(|v| format!("{v:?}")));
        cols.extend(r.y.coords().iter().map(|v| format!("{v:?}")));
        cols.push(r.k.to_string());
        cols.extend(r.w.coords().iter().map(|v| format!("{v:?}")));
        cols.extend([r.trace, r.gap, r.quad_err].map(|v| format!("{v:?}")));
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

/// Smallest gap over the rows, against the floor `-1e-9`.
pub fn lemma_a_report(spec: &SampleSpec, rows: &[FieldRow]) -> VerificationReport {
    let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let max_err = rows.iter().map(|r| r.quad_err).fold(0.0, f64::max);
    let mut report = VerificationReport::new("lemma_a_suite", spec.digest("lemma_a_suite"))
        .measure("min_gap", min_gap)
        .measure("max_quad_err", max_err)
        .measure("samples", rows.len() as f64)
        .measure("k", spec.k as f64)
        .target("gap_floor", -1e-9)
        .decide((-min_gap).max(0.0), 1e-9);
    report.rng = Some(spec.rng());
    report
}

/// Runs [`sample_field`] and reports Lemma A.
pub fn lemma_a_suite(spec: &SampleSpec) -> Result<VerificationReport> {
    Ok(lemma_a_report(spec, &sample_field(spec)?))
}

/// `|<W, x> - radial_component|` inside the ball (budget `1e-8`) and on the
/// sphere (budget `1e-10`); the residual is the worse of the two ratios.
pub fn lemma_b_suite(spec: &SampleSpec) -> Result<VerificationReport> {
    let defect = |pts: Vec<SamplePoint>| -> Result<f64> {
        let v = pts
            .par_iter()
            .map(|p| {
                let w = eval_w(&p.x, &p.y, spec.k, spec.tol)?.w;
                Ok((w.dot(&p.x) - radial_component(&p.x, &p.y, spec.k)?).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(v.into_iter().fold(0.0, f64::max))
    };
    let inner = defect(draw_points(spec, false)?)?;
    let sphere_spec = SampleSpec {
        seed: spec.seed.wrapping_add(1),
        ..spec.clone()
    };
    let outer_pts = draw_points(&sphere_spec, true)?;
    let outer = outer_pts
        .par_iter()
        .map(|p| Ok(eval_w(&p.x, &p.y, spec.k, spec.tol)?.w.dot(&p.x).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut report = VerificationReport::new("lemma_b_suite", spec.digest("lemma_b_suite"))
        .measure("max_identity_defect", inner)
        .measure("max_sphere_value", outer)
        .measure("samples", 2.0 * spec.samples as f64)
        .measure("k", spec.k as f64)
        .target("identity_budget", 1e-8)
        .target("sphere_budget", 1e-10)
        .decide((inner / 1e-8).max(outer / 1e-10), 1.0);
    report.rng = Some(spec.rng());
    Ok(report)
}

/// Step sizes tried by the derivative oracle.
pub const FD_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

/// Analytic directional derivative against central differences of `W`.
///
/// The error of one sample is `|fd - D_v W| / max(|D_v W|, 1)` at the best of
/// [`FD_STEPS`]; points stay at least `0.05` from `y` and `1e-3` inside the
/// sphere so every stencil is admissible.
pub fn derivative_suite(spec: &SampleSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pts = Vec::with_capacity(spec.samples);
    while pts.len() < spec.samples {
        let y = on_sphere(&mut rng, spec.n);
        let x = in_ball(&mut rng, spec.n).scaled(1.0 - 1e-3);
        let v = on_sphere(&mut rng, spec.n);
        if x.distance(&y) >= 0.05 {
            pts.push((x, y, v));
        }
    }
    let errs = pts
        .par_iter()
        .map(|(x, y, v)| {
            let exact = directional_derivative(x, y, spec.k, v, spec.tol)?;
            let scale = exact.norm().max(1.0);
            let mut best = f64::INFINITY;
            for h in FD_STEPS {
                let mut xp = x.clone();
                xp.axpy(h, v);
                let mut xm = x.clone();
                xm.axpy(-h, v);
                let mut fd =
                    &eval_w(&xp, y, spec.k, spec.tol)?.w - &eval_w(&xm, y, spec.k, spec.tol)?.w;
                fd = fd.scaled(0.5 / h);
                best = best.min((&fd - &exact).norm() / scale);
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let mut report = VerificationReport::new("derivative_oracle", spec.digest("derivative_oracle"))
        .measure("max_rel_error", worst)
        .measure("samples", errs.len() as f64)
        .measure("k", spec.k as f64)
        .target("max_rel_error", 1e-6)
        .decide(worst, 1e-6);
    report.rng = Some(spec.rng());
    Ok(report)
}

/// Approach sequences towards `y = e_1` in `R^n`, `n >= 2`, indexed by
/// `j`: radial `(1 - 2^-j) y`; inside the ball along the parabola
/// `(1 - s^2) y + s e_2`; and on the sphere along `cos s y + sin s e_2`,
/// with `s = 2^-j`.
pub fn approach_sequences(n: usize, j: i32) -> [AmbientVector; 3] {
    let s = 2f64.powi(-j);
    let y = AmbientVector::basis(n, 0);
    let e2 = AmbientVector::basis(n, 1);
    let mut parabola = y.scaled(1.0 - s * s);
    parabola.axpy(s, &e2);
    let mut arc = y.scaled(s.cos());
    arc.axpy(s.sin(), &e2);
    [y.scaled(1.0 - s), parabola, arc]
}

/// Remainders along [`approach_sequences`] for `j = 1..=max_j`; the residual
/// is the largest remainder at `max_j` over its threshold.
pub fn lemma_c_suite(
    k: usize,
    n: usize,
    max_j: i32,
    threshold: f64,
    tol: f64,
) -> Result<VerificationReport> {
    if n < 2 || max_j < 1 {
        return Err(Error::Domain("need n >= 2 and at least one step".into()));
    }
    let y = AmbientVector::basis(n, 0);
    let names = ["radial", "parabola", "arc"];
    let mut report = VerificationReport::new(
        "lemma_c",
        inputs_digest(
            "lemma_c",
            &[k as f64, n as f64, max_j as f64, threshold, tol],
        ),
    )
    .target("threshold", threshold)
    .measure("k", k as f64);
    let mut worst: f64 = 0.0;
    for (i, name) in names.iter().enumerate() {
        let mut last = f64::NAN;
        for j in 1..=max_j {
            let x = approach_sequences(n, j)[i].clone();
            last = lemma_c_remainder(&x, &y, k, tol)?;
            if j % 5 == 0 || j == max_j {
                report = report.measure(&format!("{name}@{j}"), last);
            }
        }
        worst = worst.max(last);
    }
    Ok(report.decide(worst / threshold, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_admissible_and_reproducible() {
        let spec = SampleSpec::new(3, 200, 7);
        let a = draw_points(&spec, false).unwrap();
        let b = draw_points(&spec, false).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.x, q.x);
            assert!(p.x.norm() <= 1.0 && (p.y.norm() - 1.0).abs() < 1e-12);
            assert!(p.frame.orthonormality_defect() < 1e-12);
        }
        for p in draw_points(&spec, true).unwrap() {
            assert!((p.x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn approach_points_stay_in_ball() {
        for j in 1..30 {
            for x in approach_sequences(3, j) {
                assert!(x.norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn csv_has_expected_columns() {
        let spec = SampleSpec::new(2, 3, 1);
        let rows = sample_field(&spec).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&rows, spec.n, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "x_1,x_2,x_3,y_1,y_2,y_3,k,w_1,w_2,w_3,trace,gap,quad_err"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn small_suites_pass_for_k2() {
        let spec = SampleSpec::new(2, 500, 3);
        assert!(lemma_a_suite(&spec).unwrap().passed);
        assert!(lemma_b_suite(&spec).unwrap().passed);
        assert!(
            derivative_suite(&SampleSpec::new(2, 100, 3))
                .unwrap()
                .passed
        );
    }
}
