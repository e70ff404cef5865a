//! Level-set extraction: 1D half-value crossings and 2D marching squares.

use crate::field::ScalarField;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ContourError {
    #[error("no crossing of the level {level} in the sampled values")]
    NoCrossing { level: f64 },
    #[error("marching squares needs a 2D field, got {0} axes")]
    NotPlanar(usize),
}

/// Interpolant used to place a crossing between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Local cubic through the four samples bracketing the crossing.
    Cubic,
}

const BISECTION_TOL: f64 = 1e-12;

/// Lagrange interpolant through `(xs[i], ys[i])` evaluated at `x`.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut w = ys[i];
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w;
    }
    acc
}

fn crossing_in_interval(values: &[f64], spacing: f64, k: usize, level: f64, interp: Interpolation) -> f64 {
    let (a, b) = (values[k] - level, values[k + 1] - level);
    if a == 0.0 {
        return k as f64 * spacing;
    }
    if b == 0.0 {
        return (k + 1) as f64 * spacing;
    }
    match interp {
        Interpolation::Linear => (k as f64 + a / (a - b)) * spacing,
        Interpolation::Cubic => {
            let n = values.len();
            let width = n.min(4);
            let start = (k as isize - 1).clamp(0, (n - width) as isize) as usize;
            let xs: Vec<f64> = (start..start + width).map(|i| i as f64).collect();
            let ys = &values[start..start + width];
            let f = |x: f64| lagrange(&xs, ys, x) - level;
            let (mut lo, mut hi) = (k as f64, (k + 1) as f64);
            let flo = f(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if hi - lo < BISECTION_TOL {
                    break;
                }
                if (f(mid) > 0.0) == (flo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi) * spacing
        }
    }
}

/// All positions (sample `k` at `k * spacing`) where the sampled values cross
/// `level`.
pub fn level_crossings(values: &[f64], spacing: f64, level: f64, interp: Interpolation) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..values.len() {
        let a = values[k] - level;
        if a == 0.0 {
            out.push(k as f64 * spacing);
            continue;
        }
        if let Some(&next) = values.get(k + 1) {
            let b = next - level;
            if b != 0.0 && (a < 0.0) != (b < 0.0) {
                out.push(crossing_in_interval(values, spacing, k, level, interp));
            }
        }
    }
    out
}

/// Position of the first 0.5 crossing, placed on a local cubic interpolant.
pub fn half_crossing(values: &[f64], spacing: f64) -> Result<f64, ContourError> {
    level_crossings(values, spacing, 0.5, Interpolation::Cubic)
        .first()
        .copied()
        .ok_or(ContourError::NoCrossing { level: 0.5 })
}

pub type Point = [f64; 2];

/// Line segments approximating a level set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourSegmentSet {
    pub segments: Vec<[Point; 2]>,
}

impl ContourSegmentSet {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|[a, b]| (b[0] - a[0]).hypot(b[1] - a[1])).sum()
    }

    /// `(min, max)` of the endpoints along `axis`.
    pub fn extent(&self, axis: usize) -> Option<(f64, f64)> {
        let mut it = self.segments.iter().flat_map(|s| s.iter().map(move |p| p[axis]));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }
}

/// Marching squares over the cell centers of a 2D field, with linear edge
/// interpolation. Saddles are resolved by comparing the mean of the four
/// corners against the level. Samples are not wrapped across periodic
/// boundaries.
pub fn marching_squares(field: &ScalarField, level: f64) -> Result<ContourSegmentSet, ContourError> {
    let grid = field.grid();
    if grid.ndim() != 2 {
        return Err(ContourError::NotPlanar(grid.ndim()));
    }
    let (nx, ny) = (grid.extent(0), grid.extent(1));
    let dx = grid.spacing();
    let v = field.values();
    let mut out = ContourSegmentSet::default();
    let edge_point = |pa: Point, va: f64, pb: Point, vb: f64| -> Point {
        let t = if va == vb { 0.5 } else { (level - va) / (vb - va) };
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    };
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let bl = v[i + nx * j];
            let br = v[i + 1 + nx * j];
            let tr = v[i + 1 + nx * (j + 1)];
            let tl = v[i + nx * (j + 1)];
            let case = (bl >= level) as u8 | ((br >= level) as u8) << 1 | ((tr >= level) as u8) << 2 | ((tl >= level) as u8) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let x0 = (i as f64 + 0.5) * dx;
            let y0 = (j as f64 + 0.5) * dx;
            let (pbl, pbr, ptr, ptl) = ([x0, y0], [x0 + dx, y0], [x0 + dx, y0 + dx], [x0, y0 + dx]);
            let bottom = || edge_point(pbl, bl, pbr, br);
            let right = || edge_point(pbr, br, ptr, tr);
            let top = || edge_point(ptl, tl, ptr, tr);
            let left = || edge_point(pbl, bl, ptl, tl);
            let center_above = 0.25 * (bl + br + tr + tl) >= level;
            let mut push = |a: Point, b: Point| out.segments.push([a, b]);
            match case {
                1 | 14 => push(left(), bottom()),
                2 | 13 => push(bottom(), right()),
                3 | 12 => push(left(), right()),
                4 | 11 => push(right(), top()),
                6 | 9 => push(bottom(), top()),
                7 | 8 => push(left(), top()),
                5 => {
                    if center_above {
                        push(left(), top());
                        push(bottom(), right());
                    } else {
                        push(left(), bottom());
                        push(right(), top());
                    }
                }
                10 => {
                    if center_above {
                        push(left(), bottom());
                        push(right(), top());
                    } else {
                        push(bottom(), right());
                        push(left(), top());
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    #[test]
    fn exact_node_hit() {
        assert_eq!(half_crossing(&[0.0, 0.5, 1.0], 1.0).unwrap(), 1.0);
        assert_eq!(half_crossing(&[0.0, 0.5, 1.0], 2.0).unwrap(), 2.0);
    }

    #[test]
    fn cubic_reproduces_linear_ramp() {
        let ramp = [0.0, 0.0, 0.25, 0.5 - 1e-3, 0.75, 1.0, 1.0];
        let lin = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let x = half_crossing(&lin, 1.0).unwrap();
        assert!((x - 1.5).abs() < 1e-9, "{x}");
        // crossing between samples 3 and 4 of a slightly perturbed ramp
        let y = half_crossing(&ramp, 1.0).unwrap();
        assert!(y > 3.0 && y < 3.1);
    }

    #[test]
    fn missing_crossing_is_an_error() {
        assert_eq!(half_crossing(&[0.1, 0.2, 0.3], 1.0), Err(ContourError::NoCrossing { level: 0.5 }));
    }

    #[test]
    fn two_crossings_found_in_order() {
        let v = [0.0, 0.2, 0.8, 1.0, 0.7, 0.1];
        let xs = level_crossings(&v, 1.0, 0.5, Interpolation::Linear);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - 1.5).abs() < 1e-12);
        assert!((xs[1] - (4.0 + 0.2 / 0.6)).abs() < 1e-12);
    }

    #[test]
    fn constant_below_level_is_empty() {
        let g = Grid::uniform(&[8, 8], 1.0, Boundary::Periodic).unwrap();
        let set = marching_squares(&ScalarField::constant(g, 0.2), 0.5).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.extent(0), None);
    }

    #[test]
    fn rejects_non_planar_fields() {
        let g = Grid::uniform(&[8], 1.0, Boundary::Periodic).unwrap();
        assert_eq!(marching_squares(&ScalarField::zeros(g), 0.5), Err(ContourError::NotPlanar(1)));
    }

    #[test]
    fn saddle_cases_follow_center_value() {
        let g = Grid::uniform(&[3, 3], 1.0, Boundary::ZeroGradient).unwrap();
        // checkerboard corners around the lower-left square, center mean above 0.5
        let mut vals = vec![0.0; 9];
        vals[0] = 1.0;
        vals[4] = 1.0;
        vals[1] = 0.4;
        vals[3] = 0.4;
        let f = ScalarField::from_values(g, vals).unwrap();
        let set = marching_squares(&f, 0.5).unwrap();
        // first two segments belong to the saddle square
        assert!(set.len() >= 2);
        let [a, b] = set.segments[0];
        // left-top pairing when the center is above the level
        assert!((a[0] - 0.5).abs() < 1e-12 && (b[1] - 1.5).abs() < 1e-12);
    }
}
