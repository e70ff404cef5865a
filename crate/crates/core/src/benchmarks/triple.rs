//! A lens of α on the grain boundary between two β grains. The lens relaxes
//! towards a vesica piscis whose dihedral angle is fixed by the ratio of
//! interface energies.

use super::{cells, distance, BenchError, C0_ALPHA, C0_BETA, STANDARD_K};
use crate::contour::{level_crossings, marching_squares, Interpolation};
use crate::field::{PhaseId, ScalarField, SparsePhaseField};
use crate::grid::{Boundary, Grid};
use crate::model::{profile, PairMatrix, PhysicalParams, State};
use std::f64::consts::PI;

pub const GRAIN1: PhaseId = 0;
pub const GRAIN2: PhaseId = 1;
pub const PARTICLE: PhaseId = 2;

/// Domain `length[0] × length[1]`. The grain boundary runs along axis 0,
/// with grain 1 below the center line of axis 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleJunctionSpec {
    pub length: [f64; 2],
    pub dx: f64,
    pub radius: f64,
    pub width: f64,
    /// Grain-boundary energy γ_ββ.
    pub gamma_gb: f64,
    /// Particle/grain energy γ_αβ.
    pub gamma_ab: f64,
    pub diffusivity: f64,
    pub capacity: usize,
}

impl Default for TripleJunctionSpec {
    fn default() -> Self {
        TripleJunctionSpec {
            length: [192.0, 96.0],
            dx: 1.0,
            radius: 32.0,
            width: 3.0,
            gamma_gb: 1.0,
            gamma_ab: 2.0,
            diffusivity: 100.0,
            capacity: 3,
        }
    }
}

impl TripleJunctionSpec {
    pub fn params(&self) -> Result<PhysicalParams, BenchError> {
        let mut gamma = PairMatrix::uniform(3, self.gamma_ab);
        gamma.set(GRAIN1 as usize, GRAIN2 as usize, self.gamma_gb);
        let p = PhysicalParams {
            n_phases: 3,
            gamma,
            mobility: PairMatrix::uniform(3, 1.0),
            width: self.width,
            diffusivity: vec![self.diffusivity; 3],
            gibbs_k: vec![STANDARD_K; 3],
            c_eq: vec![C0_BETA, C0_BETA, C0_ALPHA],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid, BenchError> {
        let n = [cells(self.length[0], self.dx)?, cells(self.length[1], self.dx)?];
        Ok(Grid::uniform(&n, self.dx, Boundary::ZeroGradient)?)
    }

    /// Diffusion time over the long side.
    pub fn diffusion_time(&self) -> f64 {
        self.length[0] * self.length[0] / self.diffusivity
    }

    pub fn theta_eq(&self) -> Result<f64, BenchError> {
        theta_eq(self.gamma_gb, self.gamma_ab)
    }

    pub fn build(&self) -> Result<State, BenchError> {
        let p = self.params()?;
        let grid = self.grid()?;
        let center = grid.domain_center();
        let phases = SparsePhaseField::from_fn(grid, self.capacity, 3, |cell| {
            let x = grid.center(cell);
            let pa = profile(self.radius - distance(&x[..2], &center[..2]), self.width);
            let g1 = profile(center[1] - x[1], self.width);
            let rest = 1.0 - pa;
            vec![(GRAIN1, g1 * rest), (GRAIN2, (1.0 - g1) * rest), (PARTICLE, pa)]
        })?;
        let c = ScalarField::from_fn(grid, |cell| {
            phases.entries(cell).map(|(id, v)| v * p.c_eq[id as usize]).sum()
        });
        let mut state = State { phases, concentration: Some(c), time: 0.0 };
        let inner = PI * self.radius * self.radius;
        let total = self.length[0] * self.length[1];
        let target = inner * C0_ALPHA + (total - inner) * C0_BETA;
        super::concentration_shift(&mut state, target);
        Ok(state)
    }
}

/// Equilibrium dihedral angle `2 arccos(γ_ββ / 2γ_αβ)`.
pub fn theta_eq(gamma_gb: f64, gamma_ab: f64) -> Result<f64, BenchError> {
    let x = gamma_gb / (2.0 * gamma_ab);
    if !(0.0..=1.0).contains(&x) {
        return Err(BenchError::AngleDomain { gb: gamma_gb, ab: gamma_ab });
    }
    Ok(2.0 * x.acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMethod {
    /// Linear crossings along the two center lines of the domain.
    Centerline,
    /// Extents of the marching-squares 0.5 contour.
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralMeasure {
    /// Extent of the lens along the grain boundary.
    pub length: f64,
    /// Extent across the grain boundary.
    pub thickness: f64,
    pub theta: f64,
}

impl DihedralMeasure {
    fn new(length: f64, thickness: f64) -> Self {
        DihedralMeasure { length, thickness, theta: 4.0 * (thickness / length).atan() }
    }
}

/// Samples of `field` along `axis` on the line through the domain center,
/// interpolating linearly between the two nearest rows.
fn center_line(field: &ScalarField, axis: usize) -> Vec<f64> {
    let g = field.grid();
    let other = 1 - axis;
    let n = g.extent(other);
    let pos = n as f64 / 2.0 - 0.5;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let w = pos - lo as f64;
    (0..g.extent(axis))
        .map(|i| {
            let mut a = [0; 2];
            let mut b = [0; 2];
            a[axis] = i;
            b[axis] = i;
            a[other] = lo;
            b[other] = hi;
            let (va, vb) = (field.values()[g.index(&a)], field.values()[g.index(&b)]);
            (1.0 - w) * va + w * vb
        })
        .collect()
}

fn span(values: &[f64], dx: f64) -> Result<f64, BenchError> {
    let x = level_crossings(values, dx, 0.5, Interpolation::Linear);
    match (x.first(), x.last()) {
        (Some(a), Some(b)) if x.len() >= 2 => Ok(b - a),
        _ => Err(BenchError::Contour(crate::contour::ContourError::NoCrossing { level: 0.5 })),
    }
}

/// Current dihedral angle of the particle lens, `4 arctan(S/L)`.
pub fn dihedral_angle(state: &State, method: AngleMethod) -> Result<DihedralMeasure, BenchError> {
    let phi = state.phases.phase(PARTICLE);
    let dx = phi.grid().spacing();
    match method {
        AngleMethod::Centerline => {
            let length = span(&center_line(&phi, 0), dx)?;
            let thickness = span(&center_line(&phi, 1), dx)?;
            Ok(DihedralMeasure::new(length, thickness))
        }
        AngleMethod::Contour => {
            let seg = marching_squares(&phi, 0.5)?;
            let missing = || BenchError::Contour(crate::contour::ContourError::NoCrossing { level: 0.5 });
            let (x0, x1) = seg.extent(0).ok_or_else(missing)?;
            let (y0, y1) = seg.extent(1).ok_or_else(missing)?;
            Ok(DihedralMeasure::new(x1 - x0, y1 - y0))
        }
    }
}
