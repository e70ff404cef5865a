//! A circular grain shrinking by curvature flow: `A(t) - A(0) = -2πMγ t`.

use super::{cells, distance, BenchError};
use crate::field::{PhaseId, SparsePhaseField};
use crate::grid::{Boundary, Grid};
use crate::model::{profile, PhysicalParams, State};
use crate::stencil::integrate_phase;
use std::f64::consts::PI;

pub const INNER: PhaseId = 0;
pub const OUTER: PhaseId = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SingleGrainSpec {
    pub length: f64,
    pub dx: f64,
    pub radius: f64,
    pub width: f64,
    pub mobility: f64,
    pub gamma: f64,
    pub end_time: f64,
    pub capacity: usize,
}

impl Default for SingleGrainSpec {
    fn default() -> Self {
        SingleGrainSpec { length: 256.0, dx: 1.0, radius: 110.0, width: 2.5, mobility: 1.0, gamma: 1.0, end_time: 5750.0, capacity: 3 }
    }
}

impl SingleGrainSpec {
    /// Both grains are the same phase; the chemistry entries are inert.
    pub fn params(&self) -> Result<PhysicalParams, BenchError> {
        Ok(PhysicalParams::uniform(
            2,
            self.gamma,
            self.mobility,
            self.width,
            vec![0.0; 2],
            vec![1.0; 2],
            vec![0.5; 2],
        )?)
    }

    pub fn grid(&self) -> Result<Grid, BenchError> {
        let n = cells(self.length, self.dx)?;
        Ok(Grid::uniform(&[n, n], self.dx, Boundary::Periodic)?)
    }

    /// Exact area rate `-2πMγ`.
    pub fn exact_rate(&self) -> f64 {
        -2.0 * PI * self.mobility * self.gamma
    }

    /// Time at which the sharp-interface grain vanishes.
    pub fn lifetime(&self) -> f64 {
        self.radius * self.radius / (2.0 * self.mobility * self.gamma)
    }

    pub fn build(&self) -> Result<State, BenchError> {
        if self.radius + PI * self.width / 2.0 > self.length / 2.0 {
            return Err(BenchError::Geometry(format!("grain of radius {} does not fit", self.radius)));
        }
        let grid = self.grid()?;
        let center = grid.domain_center();
        let phases = SparsePhaseField::from_fn(grid, self.capacity, 2, |cell| {
            let v = profile(self.radius - distance(&grid.center(cell)[..2], &center[..2]), self.width);
            vec![(INNER, v), (OUTER, 1.0 - v)]
        })?;
        Ok(State { phases, concentration: None, time: 0.0 })
    }
}

pub fn area(state: &State) -> f64 {
    integrate_phase(&state.phases, INNER)
}

/// Mean over samples with `t > 0` of the second-order finite-difference
/// derivative of `values` (centered inside, one-sided at the ends).
pub fn area_rate(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len();
    assert!(n >= 3 && values.len() == n, "need at least three samples");
    let derivative = |i: usize| -> f64 {
        // Three-point Lagrange derivative on a non-uniform stencil.
        let (a, b, c) = match i {
            0 => (0, 1, 2),
            i if i == n - 1 => (n - 3, n - 2, n - 1),
            i => (i - 1, i, i + 1),
        };
        let (ta, tb, tc) = (times[a], times[b], times[c]);
        let t = times[i];
        values[a] * (2.0 * t - tb - tc) / ((ta - tb) * (ta - tc))
            + values[b] * (2.0 * t - ta - tc) / ((tb - ta) * (tb - tc))
            + values[c] * (2.0 * t - ta - tb) / ((tc - ta) * (tc - tb))
    };
    let picked: Vec<f64> = (0..n).filter(|&i| times[i] > 0.0).map(derivative).collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}
