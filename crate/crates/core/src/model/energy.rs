//! Discrete free energy `F = ∫ a + w + f dV`.

use super::kks::{gibbs_energy, kks_partition};
use super::params::{ModelParams, PhysicalParams};
use super::system::State;
use crate::grid::{Neighbor, Side};

/// Gradient products are taken on faces (one-sided differences between the
/// two adjacent cells); the potential and chemical terms are cell sums.
/// Non-periodic boundary faces carry no gradient.
pub fn free_energy(state: &State, m: &ModelParams, p: &PhysicalParams) -> f64 {
    let phases = &state.phases;
    let grid = *phases.grid();
    let n = p.n_phases;
    let dx = grid.spacing();
    let mut grad = vec![0.0; n];
    let mut ids = Vec::with_capacity(2 * phases.capacity());
    let mut total = 0.0;
    for cell in 0..grid.cell_count() {
        for axis in 0..grid.ndim() {
            let Neighbor::Cell(j) = grid.neighbor(cell, axis, Side::Upper) else { continue };
            ids.clear();
            ids.extend(phases.layout().ids(cell).iter().chain(phases.layout().ids(j)).map(|&i| i as usize));
            ids.sort_unstable();
            ids.dedup();
            for &a in &ids {
                grad[a] = (phases.value(j, a as u16) - phases.value(cell, a as u16)) / dx;
            }
            for (x, &a) in ids.iter().enumerate() {
                for &b in &ids[..x] {
                    total -= m.a.get(a, b) * grad[a] * grad[b];
                }
            }
        }
        let entries: Vec<_> = phases.entries(cell).collect();
        for (x, &(a, va)) in entries.iter().enumerate() {
            for &(b, vb) in &entries[..x] {
                total += m.b.get(a as usize, b as usize) * va * vb;
            }
        }
        if let Some(c) = &state.concentration {
            let mut h = vec![0.0; n];
            for &(a, v) in &entries {
                h[a as usize] = v;
            }
            if let Ok(part) = kks_partition(c.values()[cell], &h, p) {
                for &(a, v) in &entries {
                    total += v * gibbs_energy(part.c_phase[a as usize], a as usize, p);
                }
            }
        }
    }
    total * grid.cell_volume()
}
