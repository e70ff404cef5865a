//! Cell-centered regular Cartesian grids with per-axis boundary handling.
//!
//! Cells are numbered with the first axis varying fastest:
//! `index = x + nx * (y + ny * z)`. Cell `i` along an axis has its center at
//! `(i + 0.5) * spacing`.

use thiserror::Error;

/// Largest supported dimensionality.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid must have between 1 and {MAX_DIM} axes, got {0}")]
    Dimension(usize),
    #[error("axis {axis} has extent {extent}; at least 3 cells are required")]
    Extent { axis: usize, extent: usize },
    #[error("grid spacing must be positive and finite, got {0}")]
    Spacing(f64),
    #[error("expected {expected} boundary kinds, got {got}")]
    BoundaryCount { expected: usize, got: usize },
}

/// Boundary treatment along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Indices wrap around.
    Periodic,
    /// Ghost cell mirrors the adjacent interior cell.
    ZeroGradient,
    /// Ghost value `2 u_b - u_i`, so the face value equals the boundary value.
    Dirichlet,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::ZeroGradient => "zero-gradient",
            Boundary::Dirichlet => "dirichlet",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "periodic" => Some(Boundary::Periodic),
            "zero-gradient" | "neumann" => Some(Boundary::ZeroGradient),
            "dirichlet" => Some(Boundary::Dirichlet),
            _ => None,
        }
    }
}

/// Which side of a cell along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Result of stepping from a cell to its face neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    /// An interior cell (periodic wrap already applied).
    Cell(usize),
    /// The face lies on a non-periodic domain boundary.
    Boundary(Boundary),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    ndim: usize,
    extents: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    spacing: f64,
    boundaries: [Boundary; MAX_DIM],
}

impl Grid {
    pub fn new(extents: &[usize], spacing: f64, boundaries: &[Boundary]) -> Result<Self, GridError> {
        let ndim = extents.len();
        if ndim == 0 || ndim > MAX_DIM {
            return Err(GridError::Dimension(ndim));
        }
        if boundaries.len() != ndim {
            return Err(GridError::BoundaryCount { expected: ndim, got: boundaries.len() });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GridError::Spacing(spacing));
        }
        let mut ext = [1; MAX_DIM];
        let mut bnd = [Boundary::Periodic; MAX_DIM];
        for (axis, (&e, &b)) in extents.iter().zip(boundaries).enumerate() {
            if e < 3 {
                return Err(GridError::Extent { axis, extent: e });
            }
            ext[axis] = e;
            bnd[axis] = b;
        }
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for axis in 0..MAX_DIM {
            strides[axis] = s;
            s *= ext[axis];
        }
        Ok(Grid { ndim, extents: ext, strides, spacing, boundaries: bnd })
    }

    /// Grid with the same boundary kind on every axis.
    pub fn uniform(extents: &[usize], spacing: f64, boundary: Boundary) -> Result<Self, GridError> {
        let b = vec![boundary; extents.len()];
        Self::new(extents, spacing, &b)
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extents[axis]
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.ndim]
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self, axis: usize) -> Boundary {
        self.boundaries[axis]
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries[..self.ndim]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn cell_count(&self) -> usize {
        self.extents.iter().product()
    }

    /// Δx^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.ndim as i32)
    }

    pub fn domain_volume(&self) -> f64 {
        self.cell_count() as f64 * self.cell_volume()
    }

    /// Physical length of the domain along `axis`.
    pub fn length(&self, axis: usize) -> f64 {
        self.extents[axis] as f64 * self.spacing
    }

    pub fn coords(&self, index: usize) -> [usize; MAX_DIM] {
        let mut c = [0; MAX_DIM];
        let mut rem = index;
        for axis in 0..self.ndim {
            c[axis] = rem % self.extents[axis];
            rem /= self.extents[axis];
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Cell center position; unused axes are 0.
    pub fn center(&self, index: usize) -> [f64; MAX_DIM] {
        let c = self.coords(index);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.ndim {
            x[axis] = (c[axis] as f64 + 0.5) * self.spacing;
        }
        x
    }

    /// Domain center `(L_1/2, ..., L_d/2)`.
    pub fn domain_center(&self) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for (axis, xa) in x.iter_mut().enumerate().take(self.ndim) {
            *xa = 0.5 * self.length(axis);
        }
        x
    }

    pub fn neighbor(&self, index: usize, axis: usize, side: Side) -> Neighbor {
        let n = self.extents[axis];
        let stride = self.strides[axis];
        let i = (index / stride) % n;
        match side {
            Side::Lower if i == 0 => match self.boundaries[axis] {
                Boundary::Periodic => Neighbor::Cell(index + (n - 1) * stride),
                b => Neighbor::Boundary(b),
            },
            Side::Lower => Neighbor::Cell(index - stride),
            Side::Upper if i + 1 == n => match self.boundaries[axis] {
                Boundary::Periodic => Neighbor::Cell(index - (n - 1) * stride),
                b => Neighbor::Boundary(b),
            },
            Side::Upper => Neighbor::Cell(index + stride),
        }
    }

    /// Face neighbor with non-periodic boundaries mirrored onto the cell itself.
    #[inline]
    pub fn neighbor_or_self(&self, index: usize, axis: usize, side: Side) -> usize {
        match self.neighbor(index, axis, side) {
            Neighbor::Cell(j) => j,
            Neighbor::Boundary(_) => index,
        }
    }

    /// All `2 d` face neighbors, mirrored at non-periodic boundaries.
    /// Order: axis 0 lower, axis 0 upper, axis 1 lower, ...
    #[inline]
    pub fn face_neighbors(&self, index: usize, out: &mut [usize; 2 * MAX_DIM]) -> usize {
        for axis in 0..self.ndim {
            out[2 * axis] = self.neighbor_or_self(index, axis, Side::Lower);
            out[2 * axis + 1] = self.neighbor_or_self(index, axis, Side::Upper);
        }
        2 * self.ndim
    }

    /// Same grid with a different spacing.
    pub fn with_spacing(&self, spacing: f64) -> Result<Self, GridError> {
        Self::new(self.extents(), spacing, self.boundaries())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_thin_axes_and_bad_spacing() {
        assert_eq!(
            Grid::uniform(&[2, 5], 1.0, Boundary::Periodic),
            Err(GridError::Extent { axis: 0, extent: 2 })
        );
        assert_eq!(Grid::uniform(&[4], 0.0, Boundary::Periodic), Err(GridError::Spacing(0.0)));
        assert_eq!(Grid::uniform(&[], 1.0, Boundary::Periodic), Err(GridError::Dimension(0)));
        assert!(matches!(
            Grid::new(&[4, 4], 1.0, &[Boundary::Periodic]),
            Err(GridError::BoundaryCount { .. })
        ));
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::uniform(&[4, 5, 3], 0.5, Boundary::Periodic).unwrap();
        for i in 0..g.cell_count() {
            assert_eq!(g.index(&g.coords(i)[..3]), i);
        }
        assert_eq!(g.center(0), [0.25, 0.25, 0.25]);
        assert_eq!(g.domain_volume(), 60.0 * 0.125);
    }

    #[test]
    fn neighbors_wrap_or_hit_boundary() {
        let g = Grid::new(&[4, 3], 1.0, &[Boundary::Periodic, Boundary::Dirichlet]).unwrap();
        assert_eq!(g.neighbor(0, 0, Side::Lower), Neighbor::Cell(3));
        assert_eq!(g.neighbor(3, 0, Side::Upper), Neighbor::Cell(0));
        assert_eq!(g.neighbor(1, 1, Side::Lower), Neighbor::Boundary(Boundary::Dirichlet));
        assert_eq!(g.neighbor(1, 1, Side::Upper), Neighbor::Cell(5));
        assert_eq!(g.neighbor_or_self(9, 1, Side::Upper), 9);
    }
}
