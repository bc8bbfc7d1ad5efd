use rayon::prelude::*;

use super::SimplicialSurface;
use crate::vector::AmbientVector;

/// Maximum subdivision depth used for cells that straddle the clipping sphere.
pub const DEFAULT_CLIP_DEPTH: u32 = 12;

/// Clipped measure and an upper bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClipMeasure {
    pub value: f64,
    pub error: f64,
}

/// Affine chart of one cell, `x(p) = a + sum_i p_i e_i`, with the squared
/// distance to the clipping centre written as a quadratic in `p`.
struct Chart {
    gram: [[f64; 2]; 2],
    linear: [f64; 2],
    constant: f64,
}

impl Chart {
    fn new(s: &SimplicialSurface, cell: usize, y: &AmbientVector) -> Self {
        let edges = s.cell_edges(cell);
        let a = &s.vertices()[s.cells()[cell][0]];
        let ay = a - y;
        let mut gram = [[0.0; 2]; 2];
        let mut linear = [0.0; 2];
        for (i, ei) in edges.iter().enumerate() {
            linear[i] = ay.dot(ei);
            for (j, ej) in edges.iter().enumerate() {
                gram[i][j] = ei.dot(ej);
            }
        }
        Self {
            gram,
            linear,
            constant: ay.norm_squared(),
        }
    }

    fn quad(&self, d: [f64; 2]) -> f64 {
        let g = &self.gram;
        g[0][0] * d[0] * d[0] + 2.0 * g[0][1] * d[0] * d[1] + g[1][1] * d[1] * d[1]
    }

    fn distance(&self, p: [f64; 2]) -> f64 {
        let d2 =
            self.constant + 2.0 * (self.linear[0] * p[0] + self.linear[1] * p[1]) + self.quad(p);
        d2.max(0.0).sqrt()
    }

    fn length(&self, d: [f64; 2]) -> f64 {
        self.quad(d).max(0.0).sqrt()
    }
}

struct Clipper<'a> {
    chart: &'a Chart,
    r: f64,
    max_depth: u32,
    value: f64,
    error: f64,
}

impl Clipper<'_> {
    /// Returns `Some(true)` if the node is inside, `Some(false)` if outside,
    /// `None` if it straddles the sphere. Classification uses a bounding ball
    /// around the node centroid.
    fn classify(&self, nodes: &[[f64; 2]]) -> (Option<bool>, f64) {
        let m = nodes.len() as f64;
        let c = [
            nodes.iter().map(|p| p[0]).sum::<f64>() / m,
            nodes.iter().map(|p| p[1]).sum::<f64>() / m,
        ];
        let radius = nodes
            .iter()
            .map(|p| self.chart.length([p[0] - c[0], p[1] - c[1]]))
            .fold(0.0, f64::max);
        let dc = self.chart.distance(c);
        if dc + radius < self.r {
            (Some(true), dc)
        } else if dc - radius >= self.r {
            (Some(false), dc)
        } else {
            (None, dc)
        }
    }

    fn triangle(&mut self, p: [[f64; 2]; 3], volume: f64, depth: u32) {
        match self.classify(&p) {
            (Some(true), _) => self.value += volume,
            (Some(false), _) => {}
            (None, dc) if depth == self.max_depth => {
                if dc < self.r {
                    self.value += volume;
                }
                self.error += volume;
            }
            (None, _) => {
                let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
                let ab = mid(p[0], p[1]);
                let bc = mid(p[1], p[2]);
                let ca = mid(p[2], p[0]);
                let v = volume * 0.25;
                self.triangle([p[0], ab, ca], v, depth + 1);
                self.triangle([ab, p[1], bc], v, depth + 1);
                self.triangle([ca, bc, p[2]], v, depth + 1);
                self.triangle([ab, bc, ca], v, depth + 1);
            }
        }
    }

    fn segment(&mut self, p: [[f64; 2]; 2], volume: f64, depth: u32) {
        match self.classify(&p) {
            (Some(true), _) => self.value += volume,
            (Some(false), _) => {}
            (None, dc) if depth == self.max_depth => {
                if dc < self.r {
                    self.value += volume;
                }
                self.error += volume;
            }
            (None, _) => {
                let m = [(p[0][0] + p[1][0]) * 0.5, 0.0];
                let v = volume * 0.5;
                self.segment([p[0], m], v, depth + 1);
                self.segment([m, p[1]], v, depth + 1);
            }
        }
    }
}

fn clip_cell(
    s: &SimplicialSurface,
    cell: usize,
    y: &AmbientVector,
    r: f64,
    depth: u32,
) -> (f64, f64) {
    let chart = Chart::new(s, cell, y);
    let mut clipper = Clipper {
        chart: &chart,
        r,
        max_depth: depth,
        value: 0.0,
        error: 0.0,
    };
    let volume = s.cell_volume(cell);
    match s.k() {
        1 => clipper.segment([[0.0, 0.0], [1.0, 0.0]], volume, 0),
        _ => clipper.triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], volume, 0),
    }
    (clipper.value, clipper.error)
}

/// Measure of `s` inside the open ball `B_r(y)`. Straddling cells are split
/// recursively up to `depth` levels; at the finest level each piece is
/// classified by its centroid and its full measure is charged to the error
/// bound. Per-cell results are summed in cell order.
pub(crate) fn clip_measure(
    s: &SimplicialSurface,
    y: &AmbientVector,
    r: f64,
    depth: u32,
) -> ClipMeasure {
    if !(r > 0.0) {
        return ClipMeasure {
            value: 0.0,
            error: 0.0,
        };
    }
    let per_cell: Vec<(f64, f64)> = (0..s.cells().len())
        .into_par_iter()
        .map(|c| clip_cell(s, c, y, r, depth))
        .collect();
    let (value, error) = per_cell
        .iter()
        .fold((0.0, 0.0), |(v, e), (cv, ce)| (v + cv, e + ce));
    ClipMeasure { value, error }
}
