//! Solutal Stefan problem: a planar β/α interface advancing as `X = A√t`
//! into a supersaturated α.

use super::{cells, BenchError, C0_ALPHA, C0_BETA};
use crate::contour::half_crossing;
use crate::field::{PhaseId, ScalarField, SparsePhaseField};
use crate::grid::{Boundary, Grid};
use crate::model::{profile, thin_interface_mobility, ModelParams, PhysicalParams, State};

pub const ALPHA: PhaseId = 0;
pub const BETA: PhaseId = 1;

/// Residual of the growth-constant equation, `A - f(A)`.
fn growth_residual(a: f64, d: f64, c_a: f64, c_b: f64, c_ab: f64, c_ba: f64) -> f64 {
    let s = (4.0 * d).sqrt();
    let g = (-a * a / (4.0 * d)).exp();
    let e = libm::erf(a / s);
    let jump = c_ba - c_ab;
    let f = (4.0 * d / std::f64::consts::PI).sqrt()
        * ((c_a - c_ab) / jump * g / (1.0 - e) + (c_b - c_ba) / jump * g / (1.0 + e));
    a - f
}

/// Growth constant `A` of the similarity solution, found by safeguarded
/// secant/bisection on `[-4√D, 4√D]`.
pub fn stefan_growth_constant(d: f64, c_a: f64, c_b: f64, c_ab: f64, c_ba: f64) -> Result<f64, BenchError> {
    let f = |a: f64| growth_residual(a, d, c_a, c_b, c_ab, c_ba);
    let (mut lo, mut hi) = (-4.0 * d.sqrt(), 4.0 * d.sqrt());
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(BenchError::NoRoot { lo, hi });
    }
    let mut use_secant = true;
    for _ in 0..200 {
        let width = hi - lo;
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let x = if use_secant && secant > lo && secant < hi { secant } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx.abs() < 1e-12 || width < 1e-15 {
            return Ok(x);
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        use_secant = hi - lo < 0.5 * width;
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares `A*` of `X = A*√t` over samples with `t > 0`.
pub fn stefan_fit(times: &[f64], positions: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &x) in times.iter().zip(positions) {
        if t > 0.0 {
            num += x * t.sqrt();
            den += t;
        }
    }
    num / den
}

#[derive(Debug, Clone, PartialEq)]
pub struct StefanSpec {
    pub length: f64,
    pub dx: f64,
    /// Initial extent of β from the left boundary.
    pub height: f64,
    pub width: f64,
    pub diffusivity: f64,
    pub gibbs_k: f64,
    /// Far-field concentration of β, held at the left boundary.
    pub c_beta: f64,
    /// Far-field concentration of α, held at the right boundary.
    pub c_alpha: f64,
    pub capacity: usize,
}

impl Default for StefanSpec {
    fn default() -> Self {
        StefanSpec {
            length: 1800.0,
            dx: 1.0,
            height: 400.0,
            width: 2.5,
            diffusivity: 1.0,
            gibbs_k: 1.0,
            c_beta: 0.98,
            c_alpha: 0.2,
            capacity: 3,
        }
    }
}

impl StefanSpec {
    pub fn params(&self) -> Result<PhysicalParams, BenchError> {
        Ok(PhysicalParams::uniform(
            2,
            1.0,
            1.0,
            self.width,
            vec![self.diffusivity; 2],
            vec![self.gibbs_k; 2],
            vec![C0_ALPHA, C0_BETA],
        )?)
    }

    /// Model matrices with the thin-interface mobility.
    pub fn model(&self, p: &PhysicalParams) -> ModelParams {
        let l = thin_interface_mobility(1.0 / self.gibbs_k, self.diffusivity, self.width, C0_BETA - C0_ALPHA);
        ModelParams::derive(p).with_uniform_mobility(l)
    }

    pub fn grid(&self) -> Result<Grid, BenchError> {
        let n = cells(self.length, self.dx)?;
        Ok(Grid::uniform(&[n], self.dx, Boundary::Dirichlet)?)
    }

    /// Analytic growth constant with equilibrium interface concentrations.
    pub fn growth_constant(&self) -> Result<f64, BenchError> {
        stefan_growth_constant(self.diffusivity, self.c_alpha, self.c_beta, C0_ALPHA, C0_BETA)
    }

    pub fn build(&self) -> Result<State, BenchError> {
        let grid = self.grid()?;
        let phases = SparsePhaseField::from_fn(grid, self.capacity, 2, |cell| {
            let b = profile(self.height - grid.center(cell)[0], self.width);
            vec![(ALPHA, 1.0 - b), (BETA, b)]
        })?;
        let mut c = ScalarField::from_fn(grid, |cell| {
            phases.value(cell, ALPHA) * self.c_alpha + phases.value(cell, BETA) * self.c_beta
        });
        c.set_dirichlet(0, self.c_beta, self.c_alpha);
        Ok(State { phases, concentration: Some(c), time: 0.0 })
    }

    /// Displacement of the `φ_α = 0.5` point from its initial position.
    pub fn displacement(&self, state: &State) -> Result<f64, BenchError> {
        let phi = state.phases.phase(ALPHA);
        let dx = state.grid().spacing();
        Ok(half_crossing(phi.values(), dx)? + 0.5 * dx - self.height)
    }

    /// Largest concentration difference per cell between the boundary and
    /// the adjacent cell, on either end.
    pub fn far_field_gradient(&self, state: &State) -> f64 {
        let c = match &state.concentration {
            Some(c) => c,
            None => return 0.0,
        };
        let v = c.values();
        let n = v.len();
        let left = 2.0 * (v[0] - self.c_beta);
        let right = 2.0 * (v[n - 1] - self.c_alpha);
        left.abs().max(right.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_constant_reference() {
        let a = stefan_growth_constant(1.0, 0.2, 0.98, 0.02, 0.98).unwrap();
        assert!((a - 0.2412).abs() < 1e-4, "{a}");
        assert!(growth_residual(a, 1.0, 0.2, 0.98, 0.02, 0.98).abs() < 1e-12);
    }

    #[test]
    fn no_supersaturation() {
        let a = stefan_growth_constant(1.0, 0.02, 0.98, 0.02, 0.98).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn diffusivity_scaling() {
        let a1 = stefan_growth_constant(1.0, 0.2, 0.98, 0.02, 0.98).unwrap();
        let a4 = stefan_growth_constant(4.0, 0.2, 0.98, 0.02, 0.98).unwrap();
        assert!((a4 / a1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_generator() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 100.0).collect();
        let x: Vec<f64> = t.iter().map(|t| 0.2412 * t.sqrt()).collect();
        assert!((stefan_fit(&t, &x) - 0.2412).abs() < 1e-12);
        let flat = vec![3.0; 30];
        assert!(stefan_fit(&t, &flat).is_finite());
    }

    #[test]
    fn initial_state() {
        let spec = StefanSpec::default();
        let s = spec.build().unwrap();
        let c = s.concentration.as_ref().unwrap();
        assert_eq!(c.values()[10], 0.98);
        assert_eq!(s.phases.value(10, BETA), 1.0);
        assert!(spec.displacement(&s).unwrap().abs() < 1e-9);
    }
}
