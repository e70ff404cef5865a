//! Field storage: dense scalar fields and the sparse multiphase field.
//!
//! The multiphase field keeps, per cell, up to `capacity` entries of
//! `(phase id, value)`. Entries are sorted by phase id. Besides the phases with
//! a positive value, a cell also lists (with value 0) every phase that is
//! positive in one of its face neighbors; this narrow band is what lets a phase
//! advance into a cell during a step.

use crate::grid::{Boundary, Grid, Neighbor, Side, MAX_DIM};
use thiserror::Error;

pub type PhaseId = u16;

/// Marker for an unused slot.
pub const NO_PHASE: PhaseId = PhaseId::MAX;

/// Tolerance on the per-cell sum of phase values.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("value count {got} does not match the grid's {expected} cells")]
    Length { expected: usize, got: usize },
    #[error("cell {cell}: {count} entries exceed the capacity {capacity}")]
    Capacity { cell: usize, count: usize, capacity: usize },
    #[error("cell {cell}: phase {phase} listed twice")]
    DuplicatePhase { cell: usize, phase: PhaseId },
    #[error("cell {cell}: phase id {phase} out of range for {n_phases} phases")]
    PhaseRange { cell: usize, phase: PhaseId, n_phases: usize },
    #[error("cell {cell}: value {value} of phase {phase} outside [0, 1]")]
    ValueRange { cell: usize, phase: PhaseId, value: f64 },
    #[error("cell {cell}: phase values sum to {sum}")]
    Sum { cell: usize, sum: f64 },
}

/// One value per cell, plus fixed face values for Dirichlet axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    dirichlet: [[f64; 2]; MAX_DIM],
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.cell_count()], dirichlet: [[0.0; 2]; MAX_DIM] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.cell_count() {
            return Err(FieldError::Length { expected: grid.cell_count(), got: values.len() });
        }
        Ok(ScalarField { grid, values, dirichlet: [[0.0; 2]; MAX_DIM] })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(&mut f).collect();
        ScalarField { grid, values, dirichlet: [[0.0; 2]; MAX_DIM] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Boundary value on the given face of a Dirichlet axis.
    pub fn dirichlet_value(&self, axis: usize, side: Side) -> f64 {
        self.dirichlet[axis][side as usize]
    }

    pub fn set_dirichlet(&mut self, axis: usize, lower: f64, upper: f64) {
        self.dirichlet[axis] = [lower, upper];
    }

    pub fn dirichlet_values(&self) -> [[f64; 2]; MAX_DIM] {
        self.dirichlet
    }

    pub fn with_dirichlet(mut self, dirichlet: [[f64; 2]; MAX_DIM]) -> Self {
        self.dirichlet = dirichlet;
        self
    }

    /// Value on the far side of a face: an interior cell or the ghost value.
    #[inline]
    pub fn across(&self, cell: usize, axis: usize, side: Side) -> f64 {
        match self.grid.neighbor(cell, axis, side) {
            Neighbor::Cell(j) => self.values[j],
            Neighbor::Boundary(Boundary::Dirichlet) => 2.0 * self.dirichlet[axis][side as usize] - self.values[cell],
            Neighbor::Boundary(_) => self.values[cell],
        }
    }
}

/// Per-face coefficients for flux-form operators.
///
/// Along each axis a grid line of `n` cells has `n + 1` faces; face `k` sits
/// between cells `k - 1` and `k`. On periodic axes faces `0` and `n` coincide
/// and carry the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceCoefficients {
    grid: Grid,
    per_axis: Vec<Vec<f64>>,
}

impl FaceCoefficients {
    fn face_count(grid: &Grid, axis: usize) -> usize {
        grid.cell_count() / grid.extent(axis) * (grid.extent(axis) + 1)
    }

    /// Face index of the face on `side` of `cell` along `axis`.
    #[inline]
    pub fn face_index(grid: &Grid, cell: usize, axis: usize, side: Side) -> usize {
        let n = grid.extent(axis);
        let stride = grid.stride(axis);
        let i = (cell / stride) % n;
        let below = cell % stride;
        let above = cell / (stride * n);
        let k = match side {
            Side::Lower => i,
            Side::Upper => i + 1,
        };
        below + stride * (k + (n + 1) * above)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let per_axis = (0..grid.ndim()).map(|a| vec![value; Self::face_count(&grid, a)]).collect();
        FaceCoefficients { grid, per_axis }
    }

    /// Face value is the arithmetic mean of the two adjacent cell values; a
    /// boundary face takes the value of its interior cell.
    pub fn arithmetic_mean(cells: &ScalarField) -> Self {
        let grid = *cells.grid();
        let mut out = Self::constant(grid, 0.0);
        let v = cells.values();
        for axis in 0..grid.ndim() {
            for cell in 0..grid.cell_count() {
                for side in [Side::Lower, Side::Upper] {
                    let other = match grid.neighbor(cell, axis, side) {
                        Neighbor::Cell(j) => v[j],
                        Neighbor::Boundary(_) => v[cell],
                    };
                    let f = Self::face_index(&grid, cell, axis, side);
                    out.per_axis[axis][f] = 0.5 * (v[cell] + other);
                }
            }
        }
        out
    }

    pub fn get(&self, cell: usize, axis: usize, side: Side) -> f64 {
        self.per_axis[axis][Self::face_index(&self.grid, cell, axis, side)]
    }

    pub fn set(&mut self, cell: usize, axis: usize, side: Side, value: f64) {
        let f = Self::face_index(&self.grid, cell, axis, side);
        self.per_axis[axis][f] = value;
        if self.grid.boundary(axis) == Boundary::Periodic {
            let n = self.grid.extent(axis);
            let i = (cell / self.grid.stride(axis)) % n;
            let twin = match side {
                Side::Lower if i == 0 => Some(Self::face_index(&self.grid, cell + (n - 1) * self.grid.stride(axis), axis, Side::Upper)),
                Side::Upper if i + 1 == n => Some(Self::face_index(&self.grid, cell - (n - 1) * self.grid.stride(axis), axis, Side::Lower)),
                _ => None,
            };
            if let Some(t) = twin {
                self.per_axis[axis][t] = value;
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Which phases each cell stores.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLayout {
    grid: Grid,
    capacity: usize,
    n_phases: usize,
    counts: Vec<u8>,
    ids: Vec<PhaseId>,
}

impl PhaseLayout {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_phases(&self) -> usize {
        self.n_phases
    }

    #[inline]
    pub fn count(&self, cell: usize) -> usize {
        self.counts[cell] as usize
    }

    /// Stored phase ids of a cell, sorted ascending.
    #[inline]
    pub fn ids(&self, cell: usize) -> &[PhaseId] {
        let base = cell * self.capacity;
        &self.ids[base..base + self.counts[cell] as usize]
    }

    /// Slot index of `phase` in `cell`, if stored.
    #[inline]
    pub fn slot_of(&self, cell: usize, phase: PhaseId) -> Option<usize> {
        let base = cell * self.capacity;
        (0..self.counts[cell] as usize).find(|&s| self.ids[base + s] == phase)
    }

    /// Value of `phase` in `cell` read from a slot-value array.
    #[inline]
    pub fn lookup(&self, values: &[f64], cell: usize, phase: PhaseId) -> f64 {
        let base = cell * self.capacity;
        for s in 0..self.counts[cell] as usize {
            if self.ids[base + s] == phase {
                return values[base + s];
            }
        }
        0.0
    }

    /// Recomputes the stored phase lists of `cells` from the current values:
    /// positive phases of the cell and of its face neighbors are kept (the
    /// latter with value 0 if new), everything else is evicted. Positive
    /// entries never move between cells, so cells may be processed in any
    /// order. Returns true if any list changed.
    pub fn rebuild(&mut self, values: &mut [f64], cells: impl IntoIterator<Item = usize>) -> bool {
        let cap = self.capacity;
        let mut changed = false;
        let mut nb = [0usize; 2 * MAX_DIM];
        let mut cand: Vec<(PhaseId, f64, f64)> = Vec::with_capacity(8);
        for cell in cells {
            cand.clear();
            let base = cell * cap;
            for s in 0..self.counts[cell] as usize {
                let v = values[base + s];
                if v > 0.0 {
                    cand.push((self.ids[base + s], v, 0.0));
                }
            }
            let k = self.grid.face_neighbors(cell, &mut nb);
            for &j in &nb[..k] {
                if j == cell {
                    continue;
                }
                let jb = j * cap;
                for s in 0..self.counts[j] as usize {
                    let v = values[jb + s];
                    if v > 0.0 {
                        let id = self.ids[jb + s];
                        match cand.iter_mut().find(|c| c.0 == id) {
                            Some(c) => c.2 = c.2.max(v),
                            None => cand.push((id, 0.0, v)),
                        }
                    }
                }
            }
            if cand.len() > cap {
                cand.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)));
                cand.truncate(cap);
            }
            cand.sort_by_key(|c| c.0);
            let same = cand.len() == self.counts[cell] as usize
                && cand.iter().enumerate().all(|(s, c)| self.ids[base + s] == c.0 && values[base + s] == c.1);
            if same {
                continue;
            }
            changed = true;
            for s in 0..cap {
                match cand.get(s) {
                    Some(c) => {
                        self.ids[base + s] = c.0;
                        values[base + s] = c.1;
                    }
                    None => {
                        self.ids[base + s] = NO_PHASE;
                        values[base + s] = 0.0;
                    }
                }
            }
            self.counts[cell] = cand.len() as u8;
        }
        changed
    }
}

/// Multiphase field with a fixed number of stored phases per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePhaseField {
    layout: PhaseLayout,
    values: Vec<f64>,
    nz: Vec<u8>,
}

impl SparsePhaseField {
    /// Every cell filled with `phase` at value 1.
    pub fn filled(grid: Grid, capacity: usize, n_phases: usize, phase: PhaseId) -> Self {
        assert!(capacity >= 1 && capacity < u8::MAX as usize, "capacity out of range");
        assert!((phase as usize) < n_phases, "phase id out of range");
        let n = grid.cell_count();
        let mut ids = vec![NO_PHASE; n * capacity];
        let mut values = vec![0.0; n * capacity];
        for c in 0..n {
            ids[c * capacity] = phase;
            values[c * capacity] = 1.0;
        }
        SparsePhaseField {
            layout: PhaseLayout { grid, capacity, n_phases, counts: vec![1; n], ids },
            values,
            nz: vec![1; n],
        }
    }

    /// Builds a field from per-cell entries and then fills in the narrow band.
    /// Zero-valued entries returned by `f` are dropped.
    pub fn from_fn(
        grid: Grid,
        capacity: usize,
        n_phases: usize,
        mut f: impl FnMut(usize) -> Vec<(PhaseId, f64)>,
    ) -> Result<Self, FieldError> {
        let mut field = Self::filled(grid, capacity, n_phases, 0);
        for cell in 0..grid.cell_count() {
            let entries: Vec<_> = f(cell).into_iter().filter(|e| e.1 != 0.0).collect();
            field.set_cell(cell, &entries)?;
        }
        field.rebuild_band();
        field.refresh_nz();
        Ok(field)
    }

    pub fn layout(&self) -> &PhaseLayout {
        &self.layout
    }

    pub fn grid(&self) -> &Grid {
        &self.layout.grid
    }

    pub fn capacity(&self) -> usize {
        self.layout.capacity
    }

    pub fn n_phases(&self) -> usize {
        self.layout.n_phases
    }

    pub fn count(&self, cell: usize) -> usize {
        self.layout.count(cell)
    }

    pub fn nz(&self, cell: usize) -> usize {
        self.nz[cell] as usize
    }

    pub fn set_nz(&mut self, nz: Vec<u8>) {
        assert_eq!(nz.len(), self.nz.len());
        self.nz = nz;
    }

    /// Slot values, `capacity` per cell; slots beyond a cell's count hold 0.
    pub fn slot_values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize, phase: PhaseId) -> f64 {
        self.layout.lookup(&self.values, cell, phase)
    }

    pub fn entries(&self, cell: usize) -> impl Iterator<Item = (PhaseId, f64)> + '_ {
        let base = cell * self.layout.capacity;
        self.layout.ids(cell).iter().enumerate().map(move |(s, &id)| (id, self.values[base + s]))
    }

    /// Replaces the entries of one cell. Entries are sorted by id.
    pub fn set_cell(&mut self, cell: usize, entries: &[(PhaseId, f64)]) -> Result<(), FieldError> {
        let cap = self.layout.capacity;
        if entries.len() > cap {
            return Err(FieldError::Capacity { cell, count: entries.len(), capacity: cap });
        }
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|e| e.0);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FieldError::DuplicatePhase { cell, phase: w[0].0 });
            }
        }
        for &(id, _) in &sorted {
            if id as usize >= self.layout.n_phases {
                return Err(FieldError::PhaseRange { cell, phase: id, n_phases: self.layout.n_phases });
            }
        }
        let base = cell * cap;
        for s in 0..cap {
            let (id, v) = sorted.get(s).copied().unwrap_or((NO_PHASE, 0.0));
            self.layout.ids[base + s] = id;
            self.values[base + s] = v;
        }
        self.layout.counts[cell] = sorted.len() as u8;
        Ok(())
    }

    /// Inserts neighbor phases and evicts unneeded zero entries everywhere.
    pub fn rebuild_band(&mut self) {
        let n = self.grid().cell_count();
        self.layout.rebuild(&mut self.values, 0..n);
    }

    /// N_z per cell: phases positive in the cell or in any face neighbor.
    pub fn refresh_nz(&mut self) {
        let grid = *self.grid();
        let mut nb = [0usize; 2 * MAX_DIM];
        for cell in 0..grid.cell_count() {
            let k = grid.face_neighbors(cell, &mut nb);
            let base = cell * self.layout.capacity;
            let mut n = 0;
            for (s, &id) in self.layout.ids(cell).iter().enumerate() {
                let present = self.values[base + s] > 0.0
                    || nb[..k].iter().any(|&j| self.layout.lookup(&self.values, j, id) > 0.0);
                n += present as u8;
            }
            self.nz[cell] = n;
        }
    }

    /// Dense copy of one phase.
    pub fn phase(&self, phase: PhaseId) -> ScalarField {
        let grid = *self.grid();
        ScalarField::from_fn(grid, |c| self.value(c, phase))
    }

    /// Checks the per-cell simplex and bookkeeping invariants.
    pub fn validate(&self) -> Result<(), FieldError> {
        let cap = self.layout.capacity;
        for cell in 0..self.grid().cell_count() {
            let ids = self.layout.ids(cell);
            let mut sum = 0.0;
            for (s, &id) in ids.iter().enumerate() {
                if id as usize >= self.layout.n_phases {
                    return Err(FieldError::PhaseRange { cell, phase: id, n_phases: self.layout.n_phases });
                }
                if ids[..s].contains(&id) {
                    return Err(FieldError::DuplicatePhase { cell, phase: id });
                }
                let v = self.values[cell * cap + s];
                if !(0.0..=1.0).contains(&v) {
                    return Err(FieldError::ValueRange { cell, phase: id, value: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
                return Err(FieldError::Sum { cell, sum });
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(layout: PhaseLayout, values: Vec<f64>, nz: Vec<u8>) -> Self {
        debug_assert_eq!(values.len(), layout.counts.len() * layout.capacity);
        SparsePhaseField { layout, values, nz }
    }
}
