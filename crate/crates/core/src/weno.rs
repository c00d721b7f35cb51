//! WENO5 reconstruction, Lax-Friedrichs splitting, component-wise and
//! characteristic-wise flux divergences, and HJ-WENO gradients.
//!
//! Line kernels take ghost-inclusive buffers of length n + 2*GHOSTS and write
//! n interior values. Interface k of a line sits between interior nodes k-1 and k.

use crate::eigen::eigen_basis;
use crate::error::SolverError;
use crate::flux::{explicit_flux, full_flux};
use crate::grid::{Axis, Grid, GHOSTS};
use crate::state::{
    cons_to_prim_with_p, pressure_unchecked, ConservedField, EpsilonParams, Node, EN, NVAR,
};

pub const WENO_EPS: f64 = 1e-6;
const D: [f64; 3] = [0.1, 0.6, 0.3];

/// Five consecutive values ordered upwind to downwind.
pub type Stencil5 = [f64; 5];

#[inline(always)]
fn candidates(a: f64, b: f64, c: f64, d: f64, e: f64) -> [f64; 3] {
    [
        (2.0 * a - 7.0 * b + 11.0 * c) / 6.0,
        (-b + 5.0 * c + 2.0 * d) / 6.0,
        (2.0 * c + 5.0 * d - e) / 6.0,
    ]
}

#[inline(always)]
fn smoothness(a: f64, b: f64, c: f64, d: f64, e: f64) -> [f64; 3] {
    let s = |x: f64| x * x;
    [
        13.0 / 12.0 * s(a - 2.0 * b + c) + 0.25 * s(a - 4.0 * b + 3.0 * c),
        13.0 / 12.0 * s(b - 2.0 * c + d) + 0.25 * s(b - d),
        13.0 / 12.0 * s(c - 2.0 * d + e) + 0.25 * s(3.0 * c - 4.0 * d + e),
    ]
}

/// Nonlinear weights (Jiang-Shu, power 2).
pub fn weights(s: &Stencil5) -> [f64; 3] {
    let b = smoothness(s[0], s[1], s[2], s[3], s[4]);
    let a: [f64; 3] = std::array::from_fn(|k| D[k] / ((WENO_EPS + b[k]) * (WENO_EPS + b[k])));
    let sum = a[0] + a[1] + a[2];
    [a[0] / sum, a[1] / sum, a[2] / sum]
}

/// WENO5 value at the right interface of the centre node.
#[inline(always)]
pub fn weno5_raw(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let q = candidates(a, b, c, d, e);
    let bt = smoothness(a, b, c, d, e);
    let a0 = D[0] / ((WENO_EPS + bt[0]) * (WENO_EPS + bt[0]));
    let a1 = D[1] / ((WENO_EPS + bt[1]) * (WENO_EPS + bt[1]));
    let a2 = D[2] / ((WENO_EPS + bt[2]) * (WENO_EPS + bt[2]));
    (a0 * q[0] + a1 * q[1] + a2 * q[2]) / (a0 + a1 + a2)
}

pub fn weno5(s: &Stencil5) -> f64 {
    weno5_raw(s[0], s[1], s[2], s[3], s[4])
}

/// Optimal-weight (linear, 5th-order upwind) reconstruction.
pub fn weno5_linear(s: &Stencil5) -> f64 {
    let q = candidates(s[0], s[1], s[2], s[3], s[4]);
    D[0] * q[0] + D[1] * q[1] + D[2] * q[2]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitFluxPair {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

/// f+- = (f +- alpha v)/2.
pub fn lf_split(f: &[f64], v: &[f64], lf_alpha: f64) -> Result<SplitFluxPair, SolverError> {
    if !(lf_alpha >= 0.0) {
        return Err(SolverError::Parameter(format!(
            "negative LF alpha {lf_alpha}"
        )));
    }
    Ok(SplitFluxPair {
        plus: f
            .iter()
            .zip(v)
            .map(|(f, v)| 0.5 * (f + lf_alpha * v))
            .collect(),
        minus: f
            .iter()
            .zip(v)
            .map(|(f, v)| 0.5 * (f - lf_alpha * v))
            .collect(),
    })
}

/// Interface fluxes of the LF-split WENO scheme for one line.
/// `fhat[k]` is the flux at interface k (between interior nodes k-1 and k), k = 0..=n.
pub fn interface_flux_lf(f: &[f64], v: &[f64], alpha: f64, fhat: &mut [f64]) {
    let n = f.len() - 2 * GHOSTS;
    for k in 0..=n {
        let i = GHOSTS + k - 1; // left node of the interface
        let p = |m: usize| 0.5 * (f[m] + alpha * v[m]);
        let q = |m: usize| 0.5 * (f[m] - alpha * v[m]);
        fhat[k] = weno5_raw(p(i - 2), p(i - 1), p(i), p(i + 1), p(i + 2))
            + weno5_raw(q(i + 3), q(i + 2), q(i + 1), q(i), q(i - 1));
    }
}

/// Side a linear 5th-order interface reconstruction leans towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    /// Stencil i-2..i+2 for interface i+1/2.
    Left,
    /// Stencil i-1..i+3.
    Right,
}

/// Interface values of the optimal-weight WENO5 reconstruction biased to `bias`.
/// The two resulting differences are adjoint: D_right = -D_left^T on periodic lines.
pub fn interface_flux_biased(f: &[f64], bias: Bias, fhat: &mut [f64]) {
    let n = f.len() - 2 * GHOSTS;
    for k in 0..=n {
        let i = GHOSTS + k - 1;
        fhat[k] = match bias {
            Bias::Left => {
                (2.0 * f[i - 2] - 13.0 * f[i - 1] + 47.0 * f[i] + 27.0 * f[i + 1] - 3.0 * f[i + 2])
                    / 60.0
            }
            Bias::Right => {
                (-3.0 * f[i - 1] + 27.0 * f[i] + 47.0 * f[i + 1] - 13.0 * f[i + 2] + 2.0 * f[i + 3])
                    / 60.0
            }
        };
    }
}

/// Lax-Friedrichs dissipation flux (alpha/2)(v_L - v_R) with nonlinear WENO states.
pub fn interface_dissipation(v: &[f64], alpha: f64, fhat: &mut [f64]) {
    let n = v.len() - 2 * GHOSTS;
    for k in 0..=n {
        let i = GHOSTS + k - 1;
        let vl = weno5_raw(v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2]);
        let vr = weno5_raw(v[i + 3], v[i + 2], v[i + 1], v[i], v[i - 1]);
        fhat[k] = 0.5 * alpha * (vl - vr);
    }
}

#[inline]
fn difference(fhat: &[f64], h: f64, out: &mut [f64]) {
    for i in 0..out.len() {
        out[i] = (fhat[i + 1] - fhat[i]) / h;
    }
}

/// Run `kernel(inputs, out)` over every interior line along `axis` and add
/// (`acc`) or write the result into `out` at interior nodes.
pub fn sweep<F>(
    grid: &Grid,
    axis: Axis,
    inputs: &[&[f64]],
    out: &mut [f64],
    acc: bool,
    mut kernel: F,
) where
    F: FnMut(&[Vec<f64>], &mut [f64]),
{
    let n = grid.n(axis);
    let len = n + 2 * GHOSTS;
    let st = grid.step(axis);
    let mut bufs: Vec<Vec<f64>> = inputs.iter().map(|_| vec![0.0; len]).collect();
    let mut res = vec![0.0; n];
    for s in grid.lines(axis) {
        for (b, f) in bufs.iter_mut().zip(inputs) {
            for m in 0..len {
                b[m] = f[s + m * st];
            }
        }
        kernel(&bufs, &mut res);
        for m in 0..n {
            let k = s + (m + GHOSTS) * st;
            if acc {
                out[k] += res[m];
            } else {
                out[k] = res[m];
            }
        }
    }
}

/// Component-wise WENO divergence d/dx_axis of flux `f` with LF variable `v`.
pub fn div_w_axis(
    grid: &Grid,
    axis: Axis,
    f: &[f64],
    v: &[f64],
    alpha: f64,
    out: &mut [f64],
    acc: bool,
) {
    let h = grid.h(axis);
    let mut fhat = vec![0.0; grid.n(axis) + 1];
    sweep(grid, axis, &[f, v], out, acc, |b, r| {
        interface_flux_lf(&b[0], &b[1], alpha, &mut fhat);
        difference(&fhat, h, r);
    });
}

/// Linear 5th-order biased derivative along `axis`.
pub fn div_biased_axis(grid: &Grid, axis: Axis, f: &[f64], bias: Bias, out: &mut [f64], acc: bool) {
    let h = grid.h(axis);
    let mut fhat = vec![0.0; grid.n(axis) + 1];
    sweep(grid, axis, &[f], out, acc, |b, r| {
        interface_flux_biased(&b[0], bias, &mut fhat);
        difference(&fhat, h, r);
    });
}

/// Divergence of the LF dissipation flux along `axis`.
pub fn dissipation_axis(
    grid: &Grid,
    axis: Axis,
    v: &[f64],
    alpha: f64,
    out: &mut [f64],
    acc: bool,
) {
    let h = grid.h(axis);
    let mut fhat = vec![0.0; grid.n(axis) + 1];
    sweep(grid, axis, &[v], out, acc, |b, r| {
        interface_dissipation(&b[0], alpha, &mut fhat);
        difference(&fhat, h, r);
    });
}

/// Which physical flux feeds the characteristic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// Explicit part of the semi-implicit splitting (alpha * p in momentum).
    Explicit,
    /// Full epsilon-system flux (p / eps^2), for the explicit baselines.
    Full,
}

/// Characteristic-wise WENO interface fluxes for one line of node states.
///
/// The epsilon system is standard MHD in (rho, q, B, E/s) with pressure p/s for
/// s = eps^2, so the projection uses the standard eigenbasis at pressure p/`scale`
/// with the energy row of R (column of L) scaled by `scale` (1 keeps the plain basis).
/// Returns the number of interfaces that fell back to component-wise splitting.
pub fn interface_flux_cw(
    vs: &[Node],
    fs: &[Node],
    eps: &EpsilonParams,
    scale: f64,
    axis: Axis,
    alpha: f64,
    fhat: &mut [Node],
) -> usize {
    let n = vs.len() - 2 * GHOSTS;
    let mut fallbacks = 0;
    for k in 0..=n {
        let i = GHOSTS + k - 1;
        let avg: Node = std::array::from_fn(|c| 0.5 * (vs[i][c] + vs[i + 1][c]));
        let mut p = pressure_unchecked(&avg, eps);
        if !(p > 0.0) {
            p = 0.5 * (pressure_unchecked(&vs[i], eps) + pressure_unchecked(&vs[i + 1], eps));
        }
        let basis =
            eigen_basis(&cons_to_prim_with_p(&avg, p / scale), eps.gamma, axis).map(|mut eb| {
                if scale != 1.0 {
                    for w in 0..NVAR {
                        eb.r[EN][w] *= scale;
                        eb.l[w][EN] /= scale;
                    }
                }
                eb
            });
        let out = &mut fhat[k];
        match basis {
            Ok(eb) => {
                let mut wv = [[0.0; NVAR]; 6];
                let mut wf = [[0.0; NVAR]; 6];
                for m in 0..6 {
                    let (v, f) = (&vs[i - 2 + m], &fs[i - 2 + m]);
                    for w in 0..NVAR {
                        let row = &eb.l[w];
                        let mut sv = 0.0;
                        let mut sf = 0.0;
                        for c in 0..NVAR {
                            sv += row[c] * v[c];
                            sf += row[c] * f[c];
                        }
                        wv[m][w] = sv;
                        wf[m][w] = sf;
                    }
                }
                let mut ch = [0.0; NVAR];
                for w in 0..NVAR {
                    let p = |m: usize| 0.5 * (wf[m][w] + alpha * wv[m][w]);
                    let q = |m: usize| 0.5 * (wf[m][w] - alpha * wv[m][w]);
                    ch[w] = weno5_raw(p(0), p(1), p(2), p(3), p(4))
                        + weno5_raw(q(5), q(4), q(3), q(2), q(1));
                }
                for c in 0..NVAR {
                    let row = &eb.r[c];
                    let mut s = 0.0;
                    for w in 0..NVAR {
                        s += row[w] * ch[w];
                    }
                    out[c] = s;
                }
            }
            Err(e) => {
                log::debug!("characteristic decomposition failed ({e}); component-wise fallback");
                fallbacks += 1;
                for c in 0..NVAR {
                    let p = |m: usize| 0.5 * (fs[m][c] + alpha * vs[m][c]);
                    let q = |m: usize| 0.5 * (fs[m][c] - alpha * vs[m][c]);
                    out[c] = weno5_raw(p(i - 2), p(i - 1), p(i), p(i + 1), p(i + 2))
                        + weno5_raw(q(i + 3), q(i + 2), q(i + 1), q(i), q(i - 1));
                }
            }
        }
    }
    fallbacks
}

/// Characteristic-wise divergence summed over all grid axes, written to `out`
/// (all eight rows; callers keep the rows they evolve). Ghosts of `field` and
/// `p` must be filled. Returns the number of component-wise fallbacks.
pub fn div_cw(
    field: &ConservedField,
    p: &[f64],
    eps: &EpsilonParams,
    kind: FluxKind,
    alphas: [f64; 2],
    out: &mut [Vec<f64>; NVAR],
) -> usize {
    let grid = &field.grid;
    for o in out.iter_mut() {
        o.iter_mut().for_each(|x| *x = 0.0);
    }
    let scale = match kind {
        FluxKind::Full if eps.eps > 0.0 => eps.eps2(),
        _ => 1.0 / eps.pressure_alpha(),
    };
    let mut fallbacks = 0;
    for &axis in grid.axes() {
        let n = grid.n(axis);
        let len = n + 2 * GHOSTS;
        let st = grid.step(axis);
        let h = grid.h(axis);
        let mut vs = vec![[0.0; NVAR]; len];
        let mut fs = vec![[0.0; NVAR]; len];
        let mut fhat = vec![[0.0; NVAR]; n + 1];
        for s in grid.lines(axis) {
            for m in 0..len {
                let k = s + m * st;
                vs[m] = field.node(k);
                fs[m] = match kind {
                    FluxKind::Explicit => explicit_flux(&vs[m], p[k], eps, axis),
                    FluxKind::Full => full_flux(&vs[m], p[k], eps, axis),
                };
            }
            fallbacks +=
                interface_flux_cw(&vs, &fs, eps, scale, axis, alphas[axis.index()], &mut fhat);
            for m in 0..n {
                let k = s + (m + GHOSTS) * st;
                for c in 0..NVAR {
                    out[c][k] += (fhat[m + 1][c] - fhat[m][c]) / h;
                }
            }
        }
    }
    fallbacks
}

/// HJ-WENO one-sided derivatives (v_x^-, v_x^+) on the n interior nodes of a line.
pub fn hj_gradients(v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len() - 2 * GHOSTS;
    let mut minus = vec![0.0; n];
    let mut plus = vec![0.0; n];
    hj_gradients_into(v, h, &mut minus, &mut plus);
    (minus, plus)
}

pub fn hj_gradients_into(v: &[f64], h: f64, minus: &mut [f64], plus: &mut [f64]) {
    let n = v.len() - 2 * GHOSTS;
    let d = |j: usize| (v[j + 1] - v[j]) / h; // forward difference at node j
    for k in 0..n {
        let i = k + GHOSTS;
        minus[k] = weno5_raw(d(i - 3), d(i - 2), d(i - 1), d(i), d(i + 1));
        plus[k] = weno5_raw(d(i + 2), d(i + 1), d(i), d(i - 1), d(i - 2));
    }
}

/// Lax-Friedrichs numerical Hamiltonian HT((u- + u+)/2) - beta (u+ - u-)/2.
pub fn lf_hamiltonian<H: Fn(f64) -> f64>(ht: H, um: f64, up: f64, beta: f64) -> f64 {
    ht(0.5 * (um + up)) - beta * 0.5 * (up - um)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Cell averages of x^k over [j - 1/2, j + 1/2] (unit spacing).
    fn cell_avg_pow(j: f64, k: i32) -> f64 {
        let (a, b) = (j - 0.5, j + 0.5);
        (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64
    }

    #[test]
    fn constants_reproduced() {
        for c in [0.0, 1.0, -3.7, 1e8] {
            assert!((weno5(&[c; 5]) - c).abs() <= 1e-15 * c.abs());
            assert!((weno5_linear(&[c; 5]) - c).abs() <= 1e-15 * c.abs());
        }
    }

    #[test]
    fn linear_weights_exact_to_degree_four() {
        // reconstruction from cell averages is exact for polynomials of degree <= 4
        for k in 0..=4 {
            let s: Stencil5 = std::array::from_fn(|m| cell_avg_pow(m as f64 - 2.0, k));
            let exact = 0.5f64.powi(k);
            assert!((weno5_linear(&s) - exact).abs() < 1e-12, "degree {k}");
        }
    }

    #[test]
    fn nonlinear_weno_exact_for_low_degree() {
        // smoothness indicators are equal for quadratics, so the weights are optimal
        for k in 0..=2 {
            let s: Stencil5 = std::array::from_fn(|m| cell_avg_pow(m as f64 - 2.0, k));
            assert!((weno5(&s) - 0.5f64.powi(k)).abs() < 1e-12, "degree {k}");
        }
    }

    fn sine_l1(n: usize) -> f64 {
        // reconstruct f' from f = sin via flux differences: f_hat differences / h equal
        // the derivative of the primitive function; use cell averages of cos as point data.
        let h = 1.0 / n as f64;
        let mut err = 0.0;
        for i in 0..n {
            let x = i as f64 * h;
            let s: Stencil5 = std::array::from_fn(|m| {
                let xm = x + (m as f64 - 2.0) * h;
                ((2.0 * PI * (xm + 0.5 * h)).sin() - (2.0 * PI * (xm - 0.5 * h)).sin())
                    / (2.0 * PI * h)
            });
            err += (weno5(&s) - (2.0 * PI * (x + 0.5 * h)).cos()).abs();
        }
        err / n as f64
    }

    #[test]
    fn smooth_reconstruction_is_fifth_order() {
        let e: Vec<f64> = [10, 20, 40, 80, 160].iter().map(|&n| sine_l1(n)).collect();
        let order = (e[3] / e[4]).log2();
        assert!(order >= 4.8, "order {order}, errors {e:?}");
    }

    #[test]
    fn lf_split_examples() {
        let f = [1.0, -2.0, 0.5];
        let v = [3.0, 1.0, -1.0];
        let s = lf_split(&f, &v, 0.0).unwrap();
        assert_eq!(s.plus, vec![0.5, -1.0, 0.25]);
        assert_eq!(s.minus, s.plus);
        let s = lf_split(&[0.0; 3], &v, 2.0).unwrap();
        assert_eq!(s.plus, vec![3.0, 1.0, -1.0]);
        assert_eq!(s.minus, vec![-3.0, -1.0, 1.0]);
        let s = lf_split(&f, &v, 1.3).unwrap();
        for i in 0..3 {
            assert_eq!(s.plus[i] + s.minus[i], f[i]);
        }
        assert!(lf_split(&f, &v, -1.0).is_err());
    }

    #[test]
    fn biased_fluxes_match_linear_reconstructions_and_are_adjoint() {
        let f: Vec<f64> = (0..12).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let (mut fl, mut fr) = (vec![0.0; 7], vec![0.0; 7]);
        interface_flux_biased(&f, Bias::Left, &mut fl);
        interface_flux_biased(&f, Bias::Right, &mut fr);
        for k in 0..7 {
            let i = GHOSTS + k - 1;
            assert!(
                (fl[k] - weno5_linear(&[f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]])).abs()
                    < 1e-14
            );
            assert!(
                (fr[k] - weno5_linear(&[f[i + 3], f[i + 2], f[i + 1], f[i], f[i - 1]])).abs()
                    < 1e-14
            );
        }
        // <D_L a, b> = -<a, D_R b> on a periodic line
        let g = Grid::new_1d(12, 0.0, 1.0, crate::grid::Layout::Vertex).unwrap();
        let mut a: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.7).cos()).collect();
        let mut b: Vec<f64> = (0..g.len())
            .map(|k| (k as f64 * 1.3).sin() + 0.1 * k as f64)
            .collect();
        for v in [&mut a, &mut b] {
            crate::grid::fill_ghosts(&g, v, Axis::X, crate::grid::GhostFill::PERIODIC).unwrap();
        }
        let (mut da, mut db) = (g.new_field(), g.new_field());
        div_biased_axis(&g, Axis::X, &a, Bias::Left, &mut da, false);
        div_biased_axis(&g, Axis::X, &b, Bias::Right, &mut db, false);
        let dot = |x: &[f64], y: &[f64]| {
            g.interior()
                .map(|(i, j)| x[g.idx(i, j)] * y[g.idx(i, j)])
                .sum::<f64>()
        };
        assert!((dot(&da, &b) + dot(&a, &db)).abs() < 1e-12);
        // the checkerboard is not in the kernel
        let mut c: Vec<f64> = (0..g.len())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        crate::grid::fill_ghosts(&g, &mut c, Axis::X, crate::grid::GhostFill::PERIODIC).unwrap();
        div_biased_axis(&g, Axis::X, &c, Bias::Right, &mut db, false);
        assert!(g.interior().all(|(i, j)| db[g.idx(i, j)].abs() > 1.0));
    }

    #[test]
    fn hj_linear_and_smooth() {
        let n = 16;
        let h = 0.1;
        let v: Vec<f64> = (0..n + 6).map(|i| 3.0 * i as f64 * h - 1.0).collect();
        let (m, p) = hj_gradients(&v, h);
        for k in 0..n {
            assert!((m[k] - 3.0).abs() < 1e-12 && (p[k] - 3.0).abs() < 1e-12);
        }
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let v: Vec<f64> = (0..n + 6)
                .map(|i| (2.0 * PI * (i as f64 - 3.0) * h).sin())
                .collect();
            let (m, p) = hj_gradients(&v, h);
            (0..n)
                .map(|k| {
                    let ex = 2.0 * PI * (2.0 * PI * k as f64 * h).cos();
                    (m[k] - ex).abs().max((p[k] - ex).abs())
                })
                .sum::<f64>()
                / n as f64
        };
        let order = (err(80) / err(160)).log2();
        assert!(order > 4.7, "HJ order {order}");
    }

    #[test]
    fn hj_kink_brackets_slopes() {
        // v = |x| sampled with the kink at node 0
        let h = 0.1;
        let v: Vec<f64> = (0..26).map(|i| ((i as f64 - 13.0) * h).abs()).collect();
        let (m, p) = hj_gradients(&v, h);
        for k in 0..20 {
            for g in [m[k], p[k]] {
                assert!(g >= -1.01 && g <= 1.01, "{g}");
            }
        }
        let kink = 10; // interior index of x = 0
        assert!((m[kink] + 1.0).abs() < 0.02 && (p[kink] - 1.0).abs() < 0.02);
    }

    #[test]
    fn lf_hamiltonian_examples() {
        assert_eq!(lf_hamiltonian(|u| 2.0 * u * u, 1.5, 1.5, 7.0), 4.5);
        let c = -0.4;
        let v = lf_hamiltonian(|u| c * u, 0.2, 0.6, 0.9);
        assert!((v - (c * 0.4 - 0.9 * 0.2)).abs() < 1e-15);
        // field-loop velocity: beta = |u| = 2/sqrt(5) at one node
        let u0 = -2.0 / 5f64.sqrt();
        let beta = u0.abs();
        let h = lf_hamiltonian(|a| u0 * a, 1.0, 3.0, beta);
        assert!((h - (u0 * 2.0 - beta)).abs() < 1e-15);
    }

    #[test]
    fn free_stream_and_telescoping() {
        let n = 20;
        let f = vec![2.5; n + 6];
        let v = vec![-1.0; n + 6];
        let mut fh = vec![0.0; n + 1];
        interface_flux_lf(&f, &v, 3.0, &mut fh);
        let mut out = vec![0.0; n];
        difference(&fh, 0.05, &mut out);
        assert!(out.iter().all(|x| x.abs() < 1e-13));
        // discontinuous data: sum of divergence * h telescopes
        let f: Vec<f64> = (0..n + 6)
            .map(|i| if i == 11 { 5.0 } else { 1.0 + 0.01 * i as f64 })
            .collect();
        interface_flux_lf(&f, &f, 1.0, &mut fh);
        difference(&fh, 0.05, &mut out);
        assert!(out.iter().all(|x| x.is_finite()));
        let s: f64 = out.iter().sum::<f64>() * 0.05;
        assert!((s - (fh[n] - fh[0])).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn weights_form_partition_of_unity(s in proptest::array::uniform5(-100.0f64..100.0)) {
            let w = weights(&s);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let r = weno5(&s);
            let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(r.is_finite() && r >= lo - 2.0 * (hi - lo) && r <= hi + 2.0 * (hi - lo));
        }
    }

    #[test]
    fn scaled_basis_diagonalises_eps_system() {
        use crate::flux::full_flux;
        use crate::state::{prim_to_cons, Primitive, BX};
        let eps = EpsilonParams::new(0.3, 5.0 / 3.0).unwrap();
        let w = Primitive::new(1.2, [0.3, -0.2, 0.1], [0.8, 0.5, -0.4], 0.7);
        let v = prim_to_cons(&w, &eps).unwrap();
        let s = eps.eps2();
        for axis in [Axis::X, Axis::Y] {
            let mut eb = eigen_basis(&cons_to_prim_with_p(&v, w.p / s), eps.gamma, axis).unwrap();
            for k in 0..NVAR {
                eb.r[EN][k] *= s;
                eb.l[k][EN] /= s;
            }
            let f = |v: &Node| full_flux(v, pressure_unchecked(v, &eps), &eps, axis);
            for wave in 0..NVAR {
                let r: Node = std::array::from_fn(|c| eb.r[c][wave]);
                if r[BX + axis.index()].abs() > 1e-12 {
                    continue; // divergence wave carries the Powell term
                }
                let h = 1e-6;
                let fp = f(&std::array::from_fn(|c| v[c] + h * r[c]));
                let fm = f(&std::array::from_fn(|c| v[c] - h * r[c]));
                let size =
                    r.iter().fold(1.0f64, |m, x| m.max(x.abs())) * (1.0 + eb.lambda[wave].abs());
                for c in 0..NVAR {
                    let jr = (fp[c] - fm[c]) / (2.0 * h);
                    assert!(
                        (jr - eb.lambda[wave] * r[c]).abs() < 1e-6 * size,
                        "wave {wave} comp {c}"
                    );
                }
            }
        }
    }
}
