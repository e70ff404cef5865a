//! The semi-discrete KKS system: narrow-band phase rates plus conservative
//! diffusion of the concentration, packed into one flat state vector
//! `[phase slots (capacity per cell) | concentration (one per cell)]`.

use super::kks::simplex_project;
use super::params::{ModelParams, PhysicalParams};
use crate::field::{FieldError, PhaseLayout, ScalarField, SparsePhaseField};
use crate::grid::{Boundary, Grid, Side, MAX_DIM};
use crate::integrators::{NormAccumulator, OdeSystem, StepError, Tolerances};
use std::ops::Range;
use thiserror::Error;

/// Largest supported per-cell capacity.
pub const MAX_CAPACITY: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("state has {got} phases but the parameters describe {expected}")]
    PhaseCount { expected: usize, got: usize },
    #[error("concentration grid does not match the phase grid")]
    GridMismatch,
    #[error("capacity {0} exceeds the supported maximum {MAX_CAPACITY}")]
    Capacity(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Phase field plus optional concentration at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub phases: SparsePhaseField,
    pub concentration: Option<ScalarField>,
    pub time: f64,
}

impl State {
    pub fn grid(&self) -> &Grid {
        self.phases.grid()
    }

    /// Per-cell chemical potential from the local partition.
    pub fn chemical_potential(&self, p: &PhysicalParams) -> Option<ScalarField> {
        let c = self.concentration.as_ref()?;
        let grid = *self.grid();
        Some(ScalarField::from_fn(grid, |cell| {
            let (mut comp, mut base) = (0.0, 0.0);
            for (id, v) in self.phases.entries(cell) {
                comp += v / p.gibbs_k[id as usize];
                base += v * p.c_eq[id as usize];
            }
            (c.values()[cell] - base) / comp
        }))
    }
}

#[derive(Debug, Clone)]
pub struct KksSystem {
    grid: Grid,
    layout: PhaseLayout,
    cap: usize,
    n: usize,
    cells: usize,
    ndim: usize,
    inv_dx2: f64,
    nbr: Vec<[u32; 2 * MAX_DIM]>,
    /// Dirichlet values of the concentration per axis and side; `None` for
    /// other boundary kinds.
    dirichlet: [[Option<f64>; 2]; MAX_DIM],
    a: Vec<f64>,
    b: Vec<f64>,
    l: Vec<f64>,
    inv_k: Vec<f64>,
    c0: Vec<f64>,
    d_over_k: Vec<f64>,
    chemistry: bool,
    active: Vec<Range<usize>>,
    active_cells: usize,
    pos_mask: Vec<u16>,
    mu: Vec<f64>,
    mob: Vec<f64>,
    base: Vec<f64>,
    comp: Vec<f64>,
    stamp: Vec<u32>,
    epoch: u32,
    touched: Vec<usize>,
}

impl KksSystem {
    /// Builds the system and the packed state vector.
    pub fn new(state: &State, p: &PhysicalParams, m: &ModelParams) -> Result<(Self, Vec<f64>), SystemError> {
        let phases = &state.phases;
        if phases.n_phases() != p.n_phases {
            return Err(SystemError::PhaseCount { expected: p.n_phases, got: phases.n_phases() });
        }
        let cap = phases.capacity();
        if cap > MAX_CAPACITY {
            return Err(SystemError::Capacity(cap));
        }
        let grid = *phases.grid();
        if let Some(c) = &state.concentration {
            if c.grid() != &grid {
                return Err(SystemError::GridMismatch);
            }
        }
        let cells = grid.cell_count();
        let mut nbr = vec![[0u32; 2 * MAX_DIM]; cells];
        let mut tmp = [0usize; 2 * MAX_DIM];
        for (c, row) in nbr.iter_mut().enumerate() {
            let k = grid.face_neighbors(c, &mut tmp);
            for f in 0..k {
                row[f] = tmp[f] as u32;
            }
        }
        let mut dirichlet = [[None; 2]; MAX_DIM];
        if let Some(c) = &state.concentration {
            for axis in 0..grid.ndim() {
                if grid.boundary(axis) == Boundary::Dirichlet {
                    dirichlet[axis] = [Some(c.dirichlet_value(axis, Side::Lower)), Some(c.dirichlet_value(axis, Side::Upper))];
                }
            }
        }
        let n = p.n_phases;
        let chemistry = state.concentration.is_some();
        let mut u = phases.slot_values().to_vec();
        if let Some(c) = &state.concentration {
            u.extend_from_slice(c.values());
        }
        let mut sys = KksSystem {
            grid,
            layout: phases.layout().clone(),
            cap,
            n,
            cells,
            ndim: grid.ndim(),
            inv_dx2: 1.0 / (grid.spacing() * grid.spacing()),
            nbr,
            dirichlet,
            a: m.a.as_slice().to_vec(),
            b: m.b.as_slice().to_vec(),
            l: m.l.as_slice().to_vec(),
            inv_k: p.gibbs_k.iter().map(|k| 1.0 / k).collect(),
            c0: p.c_eq.clone(),
            d_over_k: (0..n).map(|a| p.diffusivity[a] / p.gibbs_k[a]).collect(),
            chemistry,
            active: Vec::new(),
            active_cells: 0,
            pos_mask: vec![0; cells],
            mu: vec![0.0; if chemistry { cells } else { 0 }],
            mob: vec![0.0; if chemistry { cells } else { 0 }],
            base: vec![0.0; if chemistry { cells } else { 0 }],
            comp: vec![0.0; if chemistry { cells } else { 0 }],
            stamp: vec![0; cells],
            epoch: 0,
            touched: Vec::new(),
        };
        for c in 0..cells {
            sys.pos_mask[c] = sys.mask(&u, c);
        }
        sys.refresh_active();
        Ok((sys, u))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layout(&self) -> &PhaseLayout {
        &self.layout
    }

    pub fn has_chemistry(&self) -> bool {
        self.chemistry
    }

    pub fn phase_len(&self) -> usize {
        self.cells * self.cap
    }

    /// Number of cells whose phases may evolve.
    pub fn active_cells(&self) -> usize {
        self.active_cells
    }

    /// Unpacks a state vector.
    pub fn state(&self, u: &[f64], time: f64) -> State {
        let nphase = self.phase_len();
        let mut phases = SparsePhaseField::from_parts(self.layout.clone(), u[..nphase].to_vec(), vec![0; self.cells]);
        phases.refresh_nz();
        let concentration = self.chemistry.then(|| {
            let mut bc = [[0.0; 2]; MAX_DIM];
            for axis in 0..MAX_DIM {
                for side in 0..2 {
                    bc[axis][side] = self.dirichlet[axis][side].unwrap_or(0.0);
                }
            }
            ScalarField::from_values(self.grid, u[nphase..].to_vec()).expect("length").with_dirichlet(bc)
        });
        State { phases, concentration, time }
    }

    /// Value of `phase` in `cell` read from a state vector.
    #[inline]
    pub fn value(&self, u: &[f64], cell: usize, phase: u16) -> f64 {
        self.layout.lookup(u, cell, phase)
    }

    fn mask(&self, u: &[f64], cell: usize) -> u16 {
        let base = cell * self.cap;
        let mut m = 0;
        for s in 0..self.layout.count(cell) {
            if u[base + s] > 0.0 {
                m |= 1 << s;
            }
        }
        m
    }

    fn refresh_active(&mut self) {
        self.active.clear();
        self.active_cells = 0;
        let cap = self.cap;
        let mut start: Option<usize> = None;
        for c in 0..self.cells {
            let on = self.layout.count(c) >= 2;
            match (on, start) {
                (true, None) => start = Some(c),
                (false, Some(s)) => {
                    self.active.push(s * cap..c * cap);
                    start = None;
                }
                _ => {}
            }
            self.active_cells += on as usize;
        }
        if let Some(s) = start {
            self.active.push(s * cap..self.cells * cap);
        }
        if self.chemistry {
            let off = self.cells * cap;
            self.active.push(off..off + self.cells);
        }
    }

    /// Phase-slot ranges that are active, in cell units.
    fn active_phase_cells(&self) -> impl Iterator<Item = usize> + '_ {
        let cap = self.cap;
        let limit = self.cells * cap;
        self.active.iter().filter(move |r| r.start < limit).flat_map(move |r| r.start / cap..r.end / cap)
    }

    fn partition(&mut self, u: &[f64]) {
        let cap = self.cap;
        let off = self.cells * cap;
        for c in 0..self.cells {
            let base = c * cap;
            let ids = self.layout.ids(c);
            let (mut comp, mut b, mut mob) = (0.0, 0.0, 0.0);
            for (s, &id) in ids.iter().enumerate() {
                let v = u[base + s];
                let id = id as usize;
                comp += v * self.inv_k[id];
                b += v * self.c0[id];
                mob += v * self.d_over_k[id];
            }
            self.comp[c] = comp;
            self.base[c] = b;
            self.mob[c] = mob;
            self.mu[c] = (u[off + c] - b) / comp;
        }
    }

    fn concentration_rates(&self, u: &[f64], out: &mut [f64]) {
        let off = self.cells * self.cap;
        let nf = 2 * self.ndim;
        for c in 0..self.cells {
            let (mu, m) = (self.mu[c], self.mob[c]);
            let nb = &self.nbr[c];
            let mut acc = 0.0;
            for f in 0..nf {
                let j = nb[f] as usize;
                if j != c {
                    acc += 0.5 * (m + self.mob[j]) * (self.mu[j] - mu);
                } else if let Some(cb) = self.dirichlet[f / 2][f % 2] {
                    let ghost = 2.0 * cb - u[off + c];
                    let mu_g = (ghost - self.base[c]) / self.comp[c];
                    acc += m * (mu_g - mu);
                }
            }
            out[off + c] = acc * self.inv_dx2;
        }
    }

    #[inline]
    fn phase_rates_cell(&self, u: &[f64], out: &mut [f64], c: usize) {
        let cap = self.cap;
        let base = c * cap;
        let ids = self.layout.ids(c);
        let cnt = ids.len();
        let nb = &self.nbr[c];
        let mut lap = [0.0; MAX_CAPACITY];
        let mut present = [false; MAX_CAPACITY];
        let mut nz = 0usize;
        for s in 0..cnt {
            let id = ids[s];
            let v = u[base + s];
            let mut acc = 0.0;
            let mut pos = v > 0.0;
            for axis in 0..self.ndim {
                let lo = self.layout.lookup(u, nb[2 * axis] as usize, id);
                let up = self.layout.lookup(u, nb[2 * axis + 1] as usize, id);
                pos |= lo > 0.0 || up > 0.0;
                acc += lo + up - 2.0 * v;
            }
            lap[s] = acc * self.inv_dx2;
            present[s] = pos;
            nz += pos as usize;
        }
        let mut delta = [0.0; MAX_CAPACITY];
        let n = self.n;
        for s in 0..cnt {
            let row = ids[s] as usize * n;
            let mut acc = 0.0;
            for t in 0..cnt {
                if t != s {
                    let col = row + ids[t] as usize;
                    acc += self.a[col] * lap[t] + self.b[col] * u[base + t];
                }
            }
            if self.chemistry {
                let id = ids[s] as usize;
                let mu = self.mu[c];
                acc += -mu * mu * 0.5 * self.inv_k[id] - mu * self.c0[id];
            }
            delta[s] = acc;
        }
        let inv_nz = 1.0 / nz.max(1) as f64;
        for s in 0..cnt {
            if !present[s] {
                out[base + s] = 0.0;
                continue;
            }
            let row = ids[s] as usize * n;
            let mut acc = 0.0;
            for t in 0..cnt {
                if t != s && present[t] {
                    acc += self.l[row + ids[t] as usize] * (delta[s] - delta[t]);
                }
            }
            out[base + s] = -acc * inv_nz;
        }
        for s in cnt..cap {
            out[base + s] = 0.0;
        }
    }

    /// Full-domain rates (zero in inactive cells) as a fresh vector.
    pub fn evaluate(&mut self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.rhs(u, &mut out);
        out
    }
}

impl OdeSystem for KksSystem {
    fn len(&self) -> usize {
        self.cells * self.cap + if self.chemistry { self.cells } else { 0 }
    }

    fn active(&self) -> &[Range<usize>] {
        &self.active
    }

    fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        if self.chemistry {
            self.partition(u);
            self.concentration_rates(u, out);
        }
        let limit = self.cells * self.cap;
        let cap = self.cap;
        for r in &self.active {
            if r.start >= limit {
                continue;
            }
            for c in r.start / cap..r.end / cap {
                self.phase_rates_cell(u, out, c);
            }
        }
    }

    fn project(&self, u: &mut [f64], mut violations: Option<&mut Vec<Range<usize>>>) -> Result<(), StepError> {
        let cap = self.cap;
        for c in self.active_phase_cells() {
            let base = c * cap;
            let cnt = self.layout.count(c);
            match simplex_project(&mut u[base..base + cnt]) {
                Ok(true) => {
                    if let Some(v) = violations.as_deref_mut() {
                        v.push(base..base + cnt);
                    }
                }
                Ok(false) => {}
                Err(_) => return Err(StepError::DegenerateCell { cell: c }),
            }
        }
        Ok(())
    }

    fn filter_error(&self, trial: &[f64], err: &mut [f64]) {
        let cap = self.cap;
        for c in self.active_phase_cells() {
            let base = c * cap;
            for i in base..base + self.layout.count(c) {
                if !(0.0..=1.0).contains(&trial[i]) {
                    err[i] = 0.0;
                }
            }
        }
    }

    fn error_norm(&self, err: &[f64], u0: &[f64], u1: &[f64], tol: &Tolerances) -> f64 {
        let cap = self.cap;
        let mut acc = NormAccumulator::default();
        acc.count(2 * (self.cells - self.active_cells) as u64);
        for c in self.active_phase_cells() {
            let base = c * cap;
            let mut nontrivial = 0;
            for i in base..base + self.layout.count(c) {
                if err[i] != 0.0 {
                    acc.add(err[i], u0[i], u1[i], tol.phi_rel, tol.phi_abs);
                    nontrivial += 1;
                }
            }
            acc.count(if nontrivial == 0 { 2 } else { nontrivial });
        }
        if self.chemistry {
            let off = self.cells * cap;
            for i in off..off + self.cells {
                acc.add(err[i], u0[i], u1[i], tol.c_rel, tol.c_abs);
            }
            acc.count(self.cells as u64);
        }
        acc.finish()
    }

    fn after_accept(&mut self, u: &mut [f64]) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let mut touched = std::mem::take(&mut self.touched);
        touched.clear();
        let cap = self.cap;
        let limit = self.cells * cap;
        let nf = 2 * self.ndim;
        for r in &self.active {
            if r.start >= limit {
                continue;
            }
            for c in r.start / cap..r.end / cap {
                if self.mask(u, c) == self.pos_mask[c] {
                    continue;
                }
                if self.stamp[c] != self.epoch {
                    self.stamp[c] = self.epoch;
                    touched.push(c);
                }
                for f in 0..nf {
                    let j = self.nbr[c][f] as usize;
                    if self.stamp[j] != self.epoch {
                        self.stamp[j] = self.epoch;
                        touched.push(j);
                    }
                }
            }
        }
        if !touched.is_empty() {
            touched.sort_unstable();
            self.layout.rebuild(&mut u[..limit], touched.iter().copied());
            for &c in &touched {
                self.pos_mask[c] = self.mask(u, c);
            }
            self.refresh_active();
        }
        self.touched = touched;
    }
}

/// Phase rates of every stored slot, laid out like the state's slot values.
pub fn phase_rhs(state: &State, p: &PhysicalParams, m: &ModelParams) -> Result<Vec<f64>, SystemError> {
    let (mut sys, u) = KksSystem::new(state, p, m)?;
    let out = sys.evaluate(&u);
    Ok(out[..sys.phase_len()].to_vec())
}

/// Concentration rate per cell.
pub fn concentration_rhs(state: &State, p: &PhysicalParams, m: &ModelParams) -> Result<Option<ScalarField>, SystemError> {
    let (mut sys, u) = KksSystem::new(state, p, m)?;
    if !sys.chemistry {
        return Ok(None);
    }
    let out = sys.evaluate(&u);
    let off = sys.phase_len();
    Ok(Some(ScalarField::from_values(sys.grid, out[off..].to_vec())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kks::profile;
    use crate::integrators::{feuler_step, Workspace};

    fn two_phase(width: f64) -> (PhysicalParams, ModelParams) {
        let p = PhysicalParams::uniform(2, 1.0, 1.0, width, vec![1.0; 2], vec![500.0; 2], vec![0.02, 0.98]).unwrap();
        let m = ModelParams::derive(&p);
        (p, m)
    }

    fn planar(n: usize, dx: f64, width: f64, chem: bool) -> State {
        let grid = Grid::uniform(&[n], dx, Boundary::Periodic).unwrap();
        let mid = 0.5 * n as f64 * dx;
        let phases = SparsePhaseField::from_fn(grid, 3, 2, |c| {
            let x = grid.center(c)[0];
            // two interfaces on a periodic line
            let d = (0.25 * n as f64 * dx) - (x - mid).abs();
            let v = profile(d, width);
            vec![(0, 1.0 - v), (1, v)]
        })
        .unwrap();
        let concentration = chem.then(|| ScalarField::from_fn(grid, |c| 0.02 + 0.96 * phases.value(c, 1)));
        State { phases, concentration, time: 0.0 }
    }

    /// Largest rate over cells whose whole stencil lies inside an interface.
    fn max_rate(dx: f64) -> f64 {
        let width = 2.5;
        let n = (80.0 / dx) as usize;
        let (p, m) = two_phase(width);
        let state = planar(n, dx, width, false);
        let rates = phase_rhs(&state, &p, &m).unwrap();
        let grid = *state.grid();
        let inside = |c: usize| {
            let x = grid.center(c)[0];
            let d = (0.25 * n as f64 * dx) - (x - 40.0).abs();
            d.abs() < std::f64::consts::FRAC_PI_2 * width - dx
        };
        (0..n).filter(|&c| inside(c)).flat_map(|c| rates[3 * c..3 * c + 2].to_vec()).fold(0.0f64, |a, r| a.max(r.abs()))
    }

    #[test]
    fn equilibrium_profile_is_nearly_stationary() {
        let coarse = max_rate(0.5);
        let fine = max_rate(0.25);
        assert!(coarse < 5e-3, "{coarse}");
        let order = (coarse / fine).log2();
        assert!(order > 1.5, "order {order}");
    }

    #[test]
    fn rates_sum_to_zero_and_bulk_is_quiet() {
        let (p, m) = two_phase(2.5);
        let state = planar(64, 1.0, 2.5, true);
        let rates = phase_rhs(&state, &p, &m).unwrap();
        for c in 0..64 {
            let s: f64 = rates[3 * c..3 * c + 3].iter().sum();
            assert!(s.abs() < 1e-12);
        }
        // far from both interfaces nothing moves
        assert_eq!(rates[3 * 32], 0.0);
    }

    #[test]
    fn periodic_concentration_is_conserved() {
        let (p, m) = two_phase(2.5);
        let state = planar(64, 1.0, 2.5, true);
        let mut state = state;
        if let Some(c) = state.concentration.as_mut() {
            for (i, v) in c.values_mut().iter_mut().enumerate() {
                *v += 0.01 * (i as f64 * 0.3).sin();
            }
        }
        let (mut sys, mut u) = KksSystem::new(&state, &p, &m).unwrap();
        let off = sys.phase_len();
        let before: f64 = u[off..].iter().sum();
        let mut ws = Workspace::new();
        for _ in 0..50 {
            feuler_step(&mut sys, &mut u, 1e-4, &mut ws).unwrap();
            sys.after_accept(&mut u);
        }
        let after: f64 = u[off..].iter().sum();
        assert!(((after - before) / before).abs() < 1e-12);
        sys.state(&u, 0.0).phases.validate().unwrap();
    }

    #[test]
    fn single_phase_concentration_reduces_to_heat_equation() {
        let p = PhysicalParams::uniform(2, 1.0, 1.0, 2.5, vec![2.0; 2], vec![7.0, 3.0], vec![0.3, 0.6]).unwrap();
        let m = ModelParams::derive(&p);
        let grid = Grid::uniform(&[12], 1.0, Boundary::Periodic).unwrap();
        let phases = SparsePhaseField::filled(grid, 3, 2, 0);
        let c = ScalarField::from_fn(grid, |i| (i as f64 * 0.7).cos());
        let state = State { phases, concentration: Some(c.clone()), time: 0.0 };
        let rate = concentration_rhs(&state, &p, &m).unwrap().unwrap();
        for i in 0..12 {
            let expect = 2.0 * crate::stencil::laplacian(&c, i);
            assert!((rate.values()[i] - expect).abs() < 1e-12);
        }
    }
}
