//! Runtime parameters, conserved/primitive node states and the epsilon-scaled EOS.
//!
//! Conserved vector layout (structure of arrays on fields):
//! `[rho, q_x, q_y, q_z, B_x, B_y, B_z, E]`.

use crate::error::SolverError;
use crate::grid::{fill_ghosts, Axis, GhostFill, Grid};
use crate::operators::curl_to_b;

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const MZ: usize = 3;
pub const BX: usize = 4;
pub const BY: usize = 5;
pub const BZ: usize = 6;
pub const EN: usize = 7;
pub const NVAR: usize = 8;

pub type Node = [f64; NVAR];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonParams {
    pub eps: f64,
    pub gamma: f64,
}

impl EpsilonParams {
    pub fn new(eps: f64, gamma: f64) -> Result<Self, SolverError> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(SolverError::Parameter(format!(
                "epsilon must be >= 0, got {eps}"
            )));
        }
        if !(gamma > 1.0) {
            return Err(SolverError::Parameter(format!(
                "gamma must be > 1, got {gamma}"
            )));
        }
        Ok(EpsilonParams { eps, gamma })
    }

    pub fn eps2(&self) -> f64 {
        self.eps * self.eps
    }

    /// Explicit pressure weight: 1 for eps < 1, 1/eps^2 otherwise.
    pub fn pressure_alpha(&self) -> f64 {
        if self.eps < 1.0 {
            1.0
        } else {
            1.0 / self.eps2()
        }
    }

    /// Weight (1 - alpha eps^2) of the implicit pressure gradient; exactly 0 for eps >= 1.
    pub fn implicit_weight(&self) -> f64 {
        if self.eps < 1.0 {
            1.0 - self.eps2()
        } else {
            0.0
        }
    }

    pub fn has_implicit_pressure(&self) -> bool {
        self.eps < 1.0
    }

    /// min(1/eps, 1) without dividing by zero.
    pub fn sound_cap(&self) -> f64 {
        if self.eps <= 1.0 {
            1.0
        } else {
            1.0 / self.eps
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 3],
    pub b: [f64; 3],
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: [f64; 3], b: [f64; 3], p: f64) -> Self {
        Primitive { rho, u, b, p }
    }

    /// Ordered as (rho, u, v, w, Bx, By, Bz, p).
    pub fn to_array(&self) -> Node {
        [
            self.rho, self.u[0], self.u[1], self.u[2], self.b[0], self.b[1], self.b[2], self.p,
        ]
    }

    pub fn from_array(w: &Node) -> Self {
        Primitive {
            rho: w[0],
            u: [w[1], w[2], w[3]],
            b: [w[4], w[5], w[6]],
            p: w[7],
        }
    }

    pub fn b2(&self) -> f64 {
        dot(&self.b, &self.b)
    }

    pub fn u2(&self) -> f64 {
        dot(&self.u, &self.u)
    }
}

#[inline]
pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn domain(what: &str) -> SolverError {
    SolverError::NonPhysical {
        i: 0,
        j: 0,
        what: what.into(),
    }
}

/// E = p/(gamma-1) + eps^2/2 (rho |u|^2 + |B|^2).
pub fn eos_total_energy(w: &Primitive, eps: &EpsilonParams) -> Result<f64, SolverError> {
    if !(w.rho > 0.0) {
        return Err(domain(&format!("density {} <= 0", w.rho)));
    }
    Ok(w.p / (eps.gamma - 1.0) + 0.5 * eps.eps2() * (w.rho * w.u2() + w.b2()))
}

/// p = (gamma-1)[E - eps^2/2 (|q|^2/rho + |B|^2)]; nonpositive results are reported.
pub fn pressure_from_conserved(v: &Node, eps: &EpsilonParams) -> Result<f64, SolverError> {
    if !(v[RHO] > 0.0) {
        return Err(domain(&format!("density {} <= 0", v[RHO])));
    }
    let p = pressure_unchecked(v, eps);
    if !(p > 0.0) {
        return Err(domain(&format!("pressure {p} <= 0")));
    }
    Ok(p)
}

#[inline]
pub fn pressure_unchecked(v: &Node, eps: &EpsilonParams) -> f64 {
    let q2 = v[MX] * v[MX] + v[MY] * v[MY] + v[MZ] * v[MZ];
    let b2 = v[BX] * v[BX] + v[BY] * v[BY] + v[BZ] * v[BZ];
    (eps.gamma - 1.0) * (v[EN] - 0.5 * eps.eps2() * (q2 / v[RHO] + b2))
}

pub fn prim_to_cons(w: &Primitive, eps: &EpsilonParams) -> Result<Node, SolverError> {
    let e = eos_total_energy(w, eps)?;
    Ok([
        w.rho,
        w.rho * w.u[0],
        w.rho * w.u[1],
        w.rho * w.u[2],
        w.b[0],
        w.b[1],
        w.b[2],
        e,
    ])
}

pub fn cons_to_prim(v: &Node, eps: &EpsilonParams) -> Result<Primitive, SolverError> {
    let p = pressure_from_conserved(v, eps)?;
    Ok(cons_to_prim_with_p(v, p))
}

#[inline]
pub fn cons_to_prim_with_p(v: &Node, p: f64) -> Primitive {
    let r = v[RHO];
    Primitive {
        rho: r,
        u: [v[MX] / r, v[MY] / r, v[MZ] / r],
        b: [v[BX], v[BY], v[BZ]],
        p,
    }
}

/// Arithmetic mean of interior nodal values.
pub fn mean_pressure(p: &[f64], grid: &Grid) -> f64 {
    grid.mean_interior(p)
}

/// Boundary treatment of the conserved variables along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisBc {
    Periodic,
    /// Wall: mirror rho, p, tangential u, normal B; negate normal u and tangential B.
    Reflective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub x: AxisBc,
    pub y: AxisBc,
    /// Ghost fill of A_z along x and y.
    pub az: [GhostFill; 2],
}

impl Boundary {
    pub fn periodic() -> Self {
        Boundary {
            x: AxisBc::Periodic,
            y: AxisBc::Periodic,
            az: [GhostFill::PERIODIC; 2],
        }
    }

    pub fn axis(&self, axis: Axis) -> AxisBc {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Fill for a conserved component (or any scalar with the given parity
    /// under reflection across a wall normal to `axis`).
    pub fn fill_for(&self, axis: Axis, comp: usize) -> GhostFill {
        match self.axis(axis) {
            AxisBc::Periodic => GhostFill::PERIODIC,
            AxisBc::Reflective => GhostFill::Mirror {
                sign: reflect_sign(axis, comp),
            },
        }
    }

    /// Ghost fill for even scalars (pressure, enthalpy, p2).
    pub fn fill_even(&self, axis: Axis) -> GhostFill {
        self.fill_for(axis, RHO)
    }

    /// Ghost fill for the `axis` component of a flux-like vector (odd under the mirror).
    pub fn fill_normal(&self, axis: Axis) -> GhostFill {
        self.fill_for(axis, MX + axis.index())
    }
}

/// Parity of conserved component `comp` under reflection across a wall normal to `axis`.
pub fn reflect_sign(axis: Axis, comp: usize) -> f64 {
    let n = axis.index();
    match comp {
        MX | MY | MZ if comp - MX == n => -1.0,
        BX | BY | BZ if comp - BX != n => -1.0,
        _ => 1.0,
    }
}

/// Conserved state on a grid, plus the vector potential (2D) and the carried
/// pressure perturbation p2 = (p - pbar)/eps^2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    pub grid: Grid,
    pub u: [Vec<f64>; NVAR],
    pub az: Option<Vec<f64>>,
    pub p2: Vec<f64>,
}

impl ConservedField {
    pub fn zeros(grid: &Grid) -> Self {
        ConservedField {
            grid: grid.clone(),
            u: std::array::from_fn(|_| grid.new_field()),
            az: if grid.is_2d() {
                Some(grid.new_field())
            } else {
                None
            },
            p2: grid.new_field(),
        }
    }

    #[inline]
    pub fn node(&self, k: usize) -> Node {
        std::array::from_fn(|c| self.u[c][k])
    }

    #[inline]
    pub fn set_node(&mut self, k: usize, v: &Node) {
        for c in 0..NVAR {
            self.u[c][k] = v[c];
        }
    }

    pub fn fill_ghosts(&mut self, bc: &Boundary) -> Result<(), SolverError> {
        for &axis in self.grid.axes() {
            for c in 0..NVAR {
                fill_ghosts(&self.grid, &mut self.u[c], axis, bc.fill_for(axis, c))?;
            }
        }
        if let Some(a) = self.az.as_mut() {
            for &axis in self.grid.axes() {
                fill_ghosts(&self.grid, a, axis, bc.az[axis.index()])?;
            }
        }
        Ok(())
    }

    /// Fill all ghosts and, in 2D, re-derive B_x, B_y = curl A_z (interior and ghosts).
    pub fn sync(&mut self, bc: &Boundary) -> Result<(), SolverError> {
        self.fill_ghosts(bc)?;
        if let Some(a) = &self.az {
            let (bx, by) = curl_to_b(a, &self.grid);
            for (i, j) in self.grid.interior() {
                let k = self.grid.idx(i, j);
                self.u[BX][k] = bx[k];
                self.u[BY][k] = by[k];
            }
            for &axis in self.grid.axes() {
                for c in [BX, BY] {
                    fill_ghosts(&self.grid, &mut self.u[c], axis, bc.fill_for(axis, c))?;
                }
            }
        }
        Ok(())
    }

    /// Pressure on every node (ghosts included; ghosts must be filled).
    pub fn pressure(&self, eps: &EpsilonParams) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| pressure_unchecked(&self.node(k), eps))
            .collect()
    }

    /// First interior node violating rho > 0 or p > 0.
    pub fn check_admissible(&self, eps: &EpsilonParams) -> Result<(), SolverError> {
        let g = &self.grid;
        for (i, j) in g.interior() {
            let v = self.node(g.idx(i, j));
            if !(v[RHO] > 0.0) {
                return Err(SolverError::NonPhysical {
                    i,
                    j,
                    what: format!("density {}", v[RHO]),
                });
            }
            let p = pressure_unchecked(&v, eps);
            if !(p > 0.0) {
                return Err(SolverError::NonPhysical {
                    i,
                    j,
                    what: format!("pressure {p}"),
                });
            }
        }
        Ok(())
    }

    pub fn total(&self, comp: usize) -> f64 {
        self.grid.sum_interior(&self.u[comp]) * self.grid.cell_volume()
    }
}
