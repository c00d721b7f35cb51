//! Pressure-perturbation Helmholtz problem  m p - w div(H grad p) = rhs.
//!
//! grad is the right-biased linear 5th-order difference D_R and div its
//! adjoint D_L = -D_R^T, the same pair the implicit momentum and energy
//! updates use, so the discrete energy update is exactly consistent with the
//! solved pressure and -D_L H D_R = D_R^T H D_R is symmetric positive
//! semidefinite with only the constants in its kernel (a centred pair would
//! also annihilate checkerboards and leave them undamped). Solved matrix-free
//! by diagonally preconditioned CG on the complement of the constants; the
//! constant component is solved exactly.

use crate::error::SolverError;
use crate::grid::{fill_ghosts, Grid};
use crate::state::Boundary;
use crate::weno::{div_biased_axis, Bias};

#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    /// Enthalpy coefficient on every node (ghosts are filled by the solver).
    pub h: Vec<f64>,
    pub w: f64,
    pub m: f64,
    pub rhs: Vec<f64>,
    pub bc: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Matrix-free operator L p = m p - w sum_axes D_L(H D_R p).
pub struct HelmholtzOperator<'a> {
    grid: &'a Grid,
    h: Vec<f64>,
    w: f64,
    m: f64,
    bc: Boundary,
    kernel: Vec<Vec<f64>>,
    diag: Vec<f64>,
    scratch: Vec<f64>,
    grad: Vec<f64>,
}

/// D_R weights on offsets -2..=3 (times 1/h).
const DR: [f64; 6] = [
    3.0 / 60.0,
    -30.0 / 60.0,
    -20.0 / 60.0,
    60.0 / 60.0,
    -15.0 / 60.0,
    2.0 / 60.0,
];

pub fn assemble<'a>(
    problem: &HelmholtzProblem,
    grid: &'a Grid,
) -> Result<HelmholtzOperator<'a>, SolverError> {
    if !(problem.w >= 0.0) || !(problem.m >= 0.0) {
        return Err(SolverError::Parameter(format!(
            "negative weights w = {}, m = {}",
            problem.w, problem.m
        )));
    }
    let mut h = problem.h.clone();
    for (i, j) in grid.interior() {
        let v = h[grid.idx(i, j)];
        if !(v > 0.0) {
            return Err(SolverError::NonPhysical {
                i,
                j,
                what: format!("enthalpy coefficient {v}"),
            });
        }
    }
    for &axis in grid.axes() {
        fill_ghosts(grid, &mut h, axis, problem.bc.fill_even(axis))?;
    }
    let mut diag = grid.new_field();
    for (i, j) in grid.interior() {
        let k = grid.idx(i, j);
        let mut s = 0.0;
        for &axis in grid.axes() {
            let st = grid.step(axis);
            let hh = grid.h(axis) * grid.h(axis);
            // (D_R^T H D_R)_kk = sum_o DR[o]^2 H_{k-o} / h^2
            for (o, c) in (-2isize..=3).zip(DR) {
                let kk = (k as isize - o * st as isize) as usize;
                s += c * c * h[kk] / hh;
            }
        }
        diag[k] = problem.m + problem.w * s;
    }
    Ok(HelmholtzOperator {
        grid,
        h,
        w: problem.w,
        m: problem.m,
        bc: problem.bc,
        kernel: kernel_modes(grid, &problem.bc),
        diag,
        scratch: grid.new_field(),
        grad: grid.new_field(),
    })
}

/// Kernel of D_L H D_R: the constants, unless a wall pins them.
fn kernel_modes(grid: &Grid, bc: &Boundary) -> Vec<Vec<f64>> {
    let _ = bc;
    let mut v = grid.new_field();
    for (i, j) in grid.interior() {
        v[grid.idx(i, j)] = 1.0;
    }
    vec![v]
}

impl<'a> HelmholtzOperator<'a> {
    /// y = L x on interior nodes (x's ghosts are overwritten).
    pub fn apply(&mut self, x: &mut [f64], y: &mut [f64]) -> Result<(), SolverError> {
        let g = self.grid;
        for &axis in g.axes() {
            fill_ghosts(g, x, axis, self.bc.fill_even(axis))?;
        }
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            y[k] = self.m * x[k];
        }
        if self.w == 0.0 {
            return Ok(());
        }
        for &axis in g.axes() {
            div_biased_axis(g, axis, x, Bias::Right, &mut self.grad, false);
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                self.grad[k] *= self.h[k];
            }
            for &a in g.axes() {
                fill_ghosts(
                    g,
                    &mut self.grad,
                    a,
                    if a == axis {
                        self.bc.fill_normal(a)
                    } else {
                        self.bc.fill_even(a)
                    },
                )?;
            }
            div_biased_axis(g, axis, &self.grad, Bias::Left, &mut self.scratch, false);
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                y[k] -= self.w * self.scratch[k];
            }
        }
        Ok(())
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grid
            .interior()
            .map(|(i, j)| {
                let k = self.grid.idx(i, j);
                a[k] * b[k]
            })
            .sum()
    }

    fn max_abs(&self, a: &[f64]) -> f64 {
        self.grid
            .interior()
            .map(|(i, j)| a[self.grid.idx(i, j)].abs())
            .fold(0.0, f64::max)
    }

    fn project(&self, v: &mut [f64]) {
        for km in &self.kernel {
            let c = self.dot(v, km) / self.grid.interior_len() as f64;
            for (i, j) in self.grid.interior() {
                let k = self.grid.idx(i, j);
                v[k] -= c * km[k];
            }
        }
    }

    /// Solve L p = rhs; returns p (ghosts unfilled) and solver statistics.
    pub fn solve(&mut self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats), SolverError> {
        let g = self.grid;
        let n = g.interior_len();
        let bnorm = self.max_abs(rhs);
        let mut x = g.new_field();
        if bnorm == 0.0 {
            return Ok((
                x,
                SolveStats {
                    iterations: 0,
                    residual: 0.0,
                },
            ));
        }
        if self.w == 0.0 {
            if !(self.m > 0.0) {
                return Err(SolverError::Parameter(
                    "degenerate operator: m = w = 0".into(),
                ));
            }
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                x[k] = rhs[k] / self.m;
            }
            return Ok((
                x,
                SolveStats {
                    iterations: 0,
                    residual: 0.0,
                },
            ));
        }
        // kernel part
        let mut r = g.new_field();
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            r[k] = rhs[k];
        }
        let mut xk = g.new_field();
        if self.m > 0.0 {
            for km in &self.kernel {
                let c = self.dot(rhs, km) / n as f64 / self.m;
                for (i, j) in g.interior() {
                    let k = g.idx(i, j);
                    xk[k] += c * km[k];
                }
            }
        }
        self.project(&mut r);

        let cap = 10 * n;
        let mut z = g.new_field();
        let mut pdir = g.new_field();
        let mut ap = g.new_field();
        let precond = |r: &[f64], z: &mut [f64], diag: &[f64]| {
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                z[k] = r[k] / diag[k];
            }
        };
        precond(&r, &mut z, &self.diag);
        self.project(&mut z);
        pdir.copy_from_slice(&z);
        let mut rz = self.dot(&r, &z);
        let mut res = self.max_abs(&r) / bnorm;
        let mut it = 0;
        while res > tol {
            if it >= cap {
                return Err(SolverError::Convergence {
                    iterations: it,
                    residual: res,
                });
            }
            self.apply(&mut pdir, &mut ap)?;
            let pap = self.dot(&pdir, &ap);
            if !(pap > 0.0) {
                return Err(SolverError::Convergence {
                    iterations: it,
                    residual: res,
                });
            }
            let alpha = rz / pap;
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                x[k] += alpha * pdir[k];
                r[k] -= alpha * ap[k];
            }
            self.project(&mut r);
            precond(&r, &mut z, &self.diag);
            self.project(&mut z);
            let rz_new = self.dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                pdir[k] = z[k] + beta * pdir[k];
            }
            res = self.max_abs(&r) / bnorm;
            it += 1;
        }
        self.project(&mut x);
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            x[k] += xk[k];
        }
        Ok((
            x,
            SolveStats {
                iterations: it,
                residual: res,
            },
        ))
    }
}

/// Assemble and solve in one call.
pub fn solve(
    problem: &HelmholtzProblem,
    grid: &Grid,
    tol: f64,
) -> Result<(Vec<f64>, SolveStats), SolverError> {
    let mut op = assemble(problem, grid)?;
    op.solve(&problem.rhs, tol)
}
