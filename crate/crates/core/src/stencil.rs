//! Second-order finite-difference operators on cell-centered fields.

use crate::field::{FaceCoefficients, PhaseId, ScalarField, SparsePhaseField};
use crate::grid::Side;

/// Σ_axes (u_{i+1} - 2 u_i + u_{i-1}) / Δx².
pub fn laplacian(field: &ScalarField, cell: usize) -> f64 {
    let grid = field.grid();
    let u = field.values()[cell];
    let mut acc = 0.0;
    for axis in 0..grid.ndim() {
        acc += field.across(cell, axis, Side::Upper) - 2.0 * u + field.across(cell, axis, Side::Lower);
    }
    acc / (grid.spacing() * grid.spacing())
}

/// Σ_axes (F_{i+1/2} - F_{i-1/2}) / Δx with F_{i+1/2} = k_{i+1/2} (u_{i+1} - u_i) / Δx.
pub fn flux_divergence(coeff: &FaceCoefficients, field: &ScalarField, cell: usize) -> f64 {
    let grid = field.grid();
    let dx = grid.spacing();
    let u = field.values()[cell];
    let mut acc = 0.0;
    for axis in 0..grid.ndim() {
        let up = coeff.get(cell, axis, Side::Upper) * (field.across(cell, axis, Side::Upper) - u);
        let down = coeff.get(cell, axis, Side::Lower) * (u - field.across(cell, axis, Side::Lower));
        acc += up - down;
    }
    acc / (dx * dx)
}

/// Σ_cells value · Δx^d.
pub fn integrate(field: &ScalarField) -> f64 {
    field.values().iter().sum::<f64>() * field.grid().cell_volume()
}

/// Volume integral of one phase of a multiphase field.
pub fn integrate_phase(field: &SparsePhaseField, phase: PhaseId) -> f64 {
    let n = field.grid().cell_count();
    let sum: f64 = (0..n).map(|c| field.value(c, phase)).sum();
    sum * field.grid().cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid};

    #[test]
    fn constant_field_has_zero_laplacian() {
        for b in [Boundary::Periodic, Boundary::ZeroGradient] {
            let g = Grid::uniform(&[5, 4, 3], 0.7, b).unwrap();
            let f = ScalarField::constant(g, 3.25);
            for c in 0..g.cell_count() {
                assert_eq!(laplacian(&f, c), 0.0);
            }
        }
    }

    #[test]
    fn linear_ramp_interior_is_annihilated() {
        let g = Grid::uniform(&[8], 0.5, Boundary::ZeroGradient).unwrap();
        let f = ScalarField::from_fn(g, |i| i as f64 * 0.5);
        for c in 1..7 {
            assert!(laplacian(&f, c).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_stencils() {
        let g = Grid::uniform(&[3], 1.0, Boundary::ZeroGradient).unwrap();
        let f = ScalarField::from_values(g, vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(laplacian(&f, 1), 1.0);

        let u = ScalarField::from_values(g, vec![0.0, 0.0, 1.0]).unwrap();
        let mut k = FaceCoefficients::constant(g, 0.0);
        k.set(1, 0, Side::Lower, 1.0);
        k.set(1, 0, Side::Upper, 2.0);
        assert_eq!(flux_divergence(&k, &u, 1), 2.0);
    }

    #[test]
    fn constant_coefficient_reduces_to_scaled_laplacian() {
        let g = Grid::uniform(&[6, 5], 0.5, Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |i| ((i * 37) % 11) as f64 * 0.1);
        let k = FaceCoefficients::constant(g, 2.5);
        let zero = FaceCoefficients::constant(g, 0.0);
        for c in 0..g.cell_count() {
            assert!((flux_divergence(&k, &f, c) - 2.5 * laplacian(&f, c)).abs() < 1e-12);
            assert_eq!(flux_divergence(&zero, &f, c), 0.0);
        }
    }

    #[test]
    fn integrals() {
        let g = Grid::uniform(&[128, 128], 1.0, Boundary::Periodic).unwrap();
        assert_eq!(integrate(&ScalarField::constant(g, 1.0)), 16384.0);
        assert_eq!(integrate(&ScalarField::zeros(g)), 0.0);
    }
}
