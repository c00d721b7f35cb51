//! Uniform structured grids with ghost layers, line access and boundary filling.

use crate::error::SolverError;

/// Ghost width required by the widest stencil (WENO5 interface flux / HJ-WENO).
pub const GHOSTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Node layout. Periodic problems use vertex-based nodes so that
/// refinement levels nest (coarse i <-> fine 2i); the reflective shock tube
/// uses cell centres so that the wall sits half a cell from the first node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Vertex,
    CellCentered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dim: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub dx: f64,
    pub dy: f64,
    pub layout: Layout,
}

impl Grid {
    pub fn new_1d(nx: usize, xmin: f64, xmax: f64, layout: Layout) -> Result<Self, SolverError> {
        // ghost layers are filled from the first/last GHOSTS interior nodes
        if nx < GHOSTS {
            return Err(SolverError::Grid(format!(
                "nx = {nx} is narrower than the ghost layer (need >= {GHOSTS})"
            )));
        }
        if !(xmax > xmin) {
            return Err(SolverError::Grid("empty x-extent".into()));
        }
        Ok(Grid {
            nx,
            ny: 1,
            dim: 1,
            xmin,
            xmax,
            ymin: 0.0,
            ymax: 0.0,
            dx: (xmax - xmin) / nx as f64,
            dy: 1.0,
            layout,
        })
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        (xmin, xmax): (f64, f64),
        (ymin, ymax): (f64, f64),
        layout: Layout,
    ) -> Result<Self, SolverError> {
        if nx < GHOSTS || ny < GHOSTS {
            return Err(SolverError::Grid(format!(
                "{nx}x{ny} is narrower than the ghost layer (need >= {GHOSTS})"
            )));
        }
        if !(xmax > xmin) || !(ymax > ymin) {
            return Err(SolverError::Grid("empty extent".into()));
        }
        Ok(Grid {
            nx,
            ny,
            dim: 2,
            xmin,
            xmax,
            ymin,
            ymax,
            dx: (xmax - xmin) / nx as f64,
            dy: (ymax - ymin) / ny as f64,
            layout,
        })
    }

    pub fn is_2d(&self) -> bool {
        self.dim == 2
    }

    fn gy(&self) -> usize {
        if self.is_2d() {
            GHOSTS
        } else {
            0
        }
    }

    /// Row stride (total nodes per row, ghosts included).
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOSTS
    }

    pub fn rows(&self) -> usize {
        self.ny + 2 * self.gy()
    }

    /// Storage length of one field.
    pub fn len(&self) -> usize {
        self.stride() * self.rows()
    }

    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of node (i, j); negative / overflowing indices address ghosts.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let ii = (i + GHOSTS as isize) as usize;
        let jj = (j + self.gy() as isize) as usize;
        ii + jj * self.stride()
    }

    pub fn n(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    pub fn h(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.dx,
            Axis::Y => self.dy,
        }
    }

    /// Flat-index step between neighbours along `axis`.
    pub fn step(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => 1,
            Axis::Y => self.stride(),
        }
    }

    pub fn axes(&self) -> &'static [Axis] {
        if self.is_2d() {
            &[Axis::X, Axis::Y]
        } else {
            &[Axis::X]
        }
    }

    fn offset(&self) -> f64 {
        match self.layout {
            Layout::Vertex => 0.0,
            Layout::CellCentered => 0.5,
        }
    }

    pub fn x(&self, i: isize) -> f64 {
        self.xmin + (i as f64 + self.offset()) * self.dx
    }

    pub fn y(&self, j: isize) -> f64 {
        if self.is_2d() {
            self.ymin + (j as f64 + self.offset()) * self.dy
        } else {
            0.0
        }
    }

    pub fn lx(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn ly(&self) -> f64 {
        self.ymax - self.ymin
    }

    /// Volume element of one node (dx in 1D, dx*dy in 2D).
    pub fn cell_volume(&self) -> f64 {
        if self.is_2d() {
            self.dx * self.dy
        } else {
            self.dx
        }
    }

    /// Interior nodes in x-fastest order.
    pub fn interior(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    pub fn new_field(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    /// Start offsets of all interior lines along `axis` (ghost-inclusive start).
    pub fn lines(&self, axis: Axis) -> Vec<usize> {
        match axis {
            Axis::X => (0..self.ny as isize)
                .map(|j| self.idx(-(GHOSTS as isize), j))
                .collect(),
            Axis::Y => (0..self.nx as isize)
                .map(|i| self.idx(i, -(GHOSTS as isize)))
                .collect(),
        }
    }

    /// Same node set on a grid refined by `factor` (used for nesting checks).
    pub fn refined(&self, factor: usize) -> Result<Grid, SolverError> {
        if self.is_2d() {
            Grid::new_2d(
                self.nx * factor,
                self.ny * factor,
                (self.xmin, self.xmax),
                (self.ymin, self.ymax),
                self.layout,
            )
        } else {
            Grid::new_1d(self.nx * factor, self.xmin, self.xmax, self.layout)
        }
    }

    pub fn sum_interior(&self, f: &[f64]) -> f64 {
        self.interior().map(|(i, j)| f[self.idx(i, j)]).sum()
    }

    pub fn mean_interior(&self, f: &[f64]) -> f64 {
        self.sum_interior(f) / self.interior_len() as f64
    }
}

/// How ghost nodes along one axis are filled for a scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GhostFill {
    /// Periodic wrap; `jump` is added per period crossed (for potentials with a
    /// linear background part).
    Periodic { jump: f64 },
    /// Mirror about the wall (cell-centred layout), multiplied by `sign`.
    Mirror { sign: f64 },
    /// First-order extrapolation: g_{-k} = v_0 - k (v_1 - v_0).
    Extrapolate,
}

impl GhostFill {
    pub const PERIODIC: GhostFill = GhostFill::Periodic { jump: 0.0 };
}

/// Fill the ghost layers of `f` along `axis`. For 2D, filling along X touches
/// only interior rows; filling along Y afterwards covers the corners.
pub fn fill_ghosts(
    grid: &Grid,
    f: &mut [f64],
    axis: Axis,
    fill: GhostFill,
) -> Result<(), SolverError> {
    if axis == Axis::Y && !grid.is_2d() {
        return Ok(());
    }
    if let GhostFill::Mirror { .. } = fill {
        if grid.layout != Layout::CellCentered {
            return Err(SolverError::Boundary(
                "mirror boundaries require a cell-centred grid".into(),
            ));
        }
    }
    let n = grid.n(axis) as isize;
    let g = GHOSTS as isize;
    let st = grid.step(axis) as isize;
    let starts: Vec<usize> = match axis {
        Axis::X => (0..grid.ny as isize).map(|j| grid.idx(0, j)).collect(),
        Axis::Y => (-g..grid.nx as isize + g).map(|i| grid.idx(i, 0)).collect(),
    };
    for s in starts {
        let at = |k: isize| (s as isize + k * st) as usize;
        for k in 1..=g {
            let (lo, hi) = match fill {
                GhostFill::Periodic { jump } => (f[at(n - k)] - jump, f[at(k - 1)] + jump),
                GhostFill::Mirror { sign } => (sign * f[at(k - 1)], sign * f[at(n - k)]),
                GhostFill::Extrapolate => {
                    let kf = k as f64;
                    (
                        f[at(0)] - kf * (f[at(1)] - f[at(0)]),
                        f[at(n - 1)] + kf * (f[at(n - 1)] - f[at(n - 2)]),
                    )
                }
            };
            f[at(-k)] = lo;
            f[at(n - 1 + k)] = hi;
        }
    }
    Ok(())
}
