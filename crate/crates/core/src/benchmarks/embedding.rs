//! A disk of α embedded in β. Curvature drives shrinkage until mass transfer
//! builds up the Laplace pressure `γκ` as a grand-potential difference.

use super::{cells, distance, standard_params, BenchError};
use crate::field::{PhaseId, ScalarField, SparsePhaseField};
use crate::grid::{Boundary, Grid};
use crate::model::{grand_potential, profile, PhysicalParams, State};
use crate::stencil::{integrate, integrate_phase};
use std::f64::consts::PI;

pub const INNER: PhaseId = 0;
pub const OUTER: PhaseId = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpec {
    /// Side length of the square periodic domain.
    pub length: f64,
    pub dx: f64,
    pub radius: f64,
    pub width: f64,
    pub diffusivity: f64,
    pub capacity: usize,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        EmbeddingSpec { length: 128.0, dx: 1.0, radius: 32.0, width: 3.0, diffusivity: 100.0, capacity: 3 }
    }
}

impl EmbeddingSpec {
    pub fn params(&self) -> Result<PhysicalParams, BenchError> {
        Ok(standard_params(self.width, self.diffusivity)?)
    }

    pub fn grid(&self) -> Result<Grid, BenchError> {
        let n = cells(self.length, self.dx)?;
        Ok(Grid::uniform(&[n, n], self.dx, Boundary::Periodic)?)
    }

    /// Diffusion time `length² / D`.
    pub fn diffusion_time(&self) -> f64 {
        self.length * self.length / self.diffusivity
    }

    /// Total solute of the sharp-interface configuration.
    pub fn sharp_target(&self, p: &PhysicalParams) -> f64 {
        let inner = PI * self.radius * self.radius;
        let outer = self.length * self.length - inner;
        inner * p.c_eq[INNER as usize] + outer * p.c_eq[OUTER as usize]
    }

    pub fn build(&self) -> Result<State, BenchError> {
        let p = self.params()?;
        if self.radius + PI * self.width / 2.0 > self.length / 2.0 {
            return Err(BenchError::Geometry(format!(
                "radius {} with interface width {} does not fit a domain of {}",
                self.radius, self.width, self.length
            )));
        }
        let grid = self.grid()?;
        let center = grid.domain_center();
        let phases = SparsePhaseField::from_fn(grid, self.capacity, 2, |cell| {
            let v = profile(self.radius - distance(&grid.center(cell)[..2], &center[..2]), self.width);
            vec![(INNER, v), (OUTER, 1.0 - v)]
        })?;
        let c = ScalarField::from_fn(grid, |cell| {
            p.c_eq[INNER as usize] * phases.value(cell, INNER) + p.c_eq[OUTER as usize] * phases.value(cell, OUTER)
        });
        let mut state = State { phases, concentration: Some(c), time: 0.0 };
        concentration_shift(&mut state, self.sharp_target(&p));
        Ok(state)
    }
}

/// Shifts every concentration value uniformly so that `∫c dV = target`.
pub fn concentration_shift(state: &mut State, target: f64) {
    if let Some(c) = state.concentration.as_mut() {
        let shift = (target - integrate(c)) / c.grid().domain_volume();
        for v in c.values_mut() {
            *v += shift;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceMeasure {
    /// Equivalent radius of the inner phase.
    pub radius: f64,
    /// `γ / r`.
    pub pressure: f64,
    /// Grand-potential difference of the bulk phases at the mean chemical
    /// potential.
    pub dpsi: f64,
    pub error: f64,
}

/// Compares the grand-potential jump with the capillary pressure `γ/r`.
pub fn laplace_error(state: &State, p: &PhysicalParams, gamma: f64) -> LaplaceMeasure {
    let radius = (integrate_phase(&state.phases, INNER) / PI).sqrt();
    let pressure = gamma / radius;
    let mu_mean = state.chemical_potential(p).map(|mu| integrate(&mu) / mu.grid().domain_volume()).unwrap_or(0.0);
    let dpsi = grand_potential(mu_mean, OUTER as usize, p) - grand_potential(mu_mean, INNER as usize, p);
    LaplaceMeasure { radius, pressure, dpsi, error: (pressure - dpsi).abs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_and_shift() {
        let spec = EmbeddingSpec { width: 2.5, ..Default::default() };
        let s = spec.build().unwrap();
        let g = *s.grid();
        let center = g.index(&[64, 64]);
        assert_eq!(s.phases.value(center, INNER), 1.0);
        let area = integrate_phase(&s.phases, INNER);
        assert!((area / (PI * 32.0 * 32.0) - 1.0).abs() < 0.01);
        let p = spec.params().unwrap();
        let total = integrate(s.concentration.as_ref().unwrap());
        assert!((total - spec.sharp_target(&p)).abs() < 1e-9 * total);
    }

    #[test]
    fn shift_by_known_amount() {
        let spec = EmbeddingSpec::default();
        let mut s = spec.build().unwrap();
        let before = s.concentration.clone().unwrap();
        let v = s.grid().domain_volume();
        let target = integrate(&before) + 0.1 * v;
        concentration_shift(&mut s, target);
        for (a, b) in s.concentration.unwrap().values().iter().zip(before.values()) {
            assert!((a - b - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_potential_leaves_only_curvature() {
        let spec = EmbeddingSpec::default();
        let p = spec.params().unwrap();
        let mut s = spec.build().unwrap();
        s.concentration = None;
        let m = laplace_error(&s, &p, 1.0);
        assert_eq!(m.dpsi, 0.0);
        assert_eq!(m.error, m.pressure);
    }
}
