//! Semi-implicit IMEX Runge-Kutta time stepping and time-step control.
//!
//! The right-hand side H(U_E, U_I) has parts evaluated at the explicit stage
//! state (characteristic WENO flux of rho, q, B; magnetic energy flux; HJ term
//! of A_z) and semi-implicit parts: the pressure-perturbation gradient in the
//! momentum and the enthalpy flux Hbar q_I in the energy, coupled by one linear
//! elliptic solve per stage.

use crate::eigen::max_signal_speed;
use crate::elliptic::{assemble, HelmholtzProblem};
use crate::error::SolverError;
use crate::flux::magnetic_energy_flux;
use crate::grid::{fill_ghosts, Axis, Grid, GHOSTS};
use crate::state::{
    mean_pressure, Boundary, ConservedField, EpsilonParams, BX, BY, EN, MX, NVAR, RHO,
};
use crate::weno::{
    dissipation_axis, div_biased_axis, div_cw, div_w_axis, hj_gradients_into, lf_hamiltonian,
    sweep, Bias, FluxKind,
};

pub const DEFAULT_CFL: f64 = 0.25;
pub const DT_MAX: f64 = 0.1;
pub const ELLIPTIC_TOL: f64 = 1e-12;

const REGISTRY: &str = include_str!("tableaux.txt");
const ORDER_TOL: f64 = 1e-12;

/// Double Butcher tableau of an IMEX Runge-Kutta pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    pub name: String,
    pub s: usize,
    /// Explicit matrix (strictly lower triangular) and weights.
    pub at: Vec<Vec<f64>>,
    pub bt: Vec<f64>,
    /// Implicit matrix (lower triangular) and weights.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub ct: Vec<f64>,
    pub c: Vec<f64>,
    pub stiffly_accurate: bool,
}

impl ButcherPair {
    pub fn new(
        name: &str,
        at: Vec<Vec<f64>>,
        bt: Vec<f64>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let s = b.len();
        let bad = |why: String| SolverError::Tableau {
            name: name.into(),
            why,
        };
        if s == 0 {
            return Err(bad("no stages".into()));
        }
        if at.len() != s
            || a.len() != s
            || bt.len() != s
            || at.iter().chain(&a).any(|r| r.len() != s)
        {
            return Err(bad(format!("inconsistent shapes for s = {s}")));
        }
        let ct = at.iter().map(|r| r.iter().sum()).collect();
        let c = a.iter().map(|r| r.iter().sum()).collect();
        let stiffly_accurate = a[s - 1] == b;
        Ok(ButcherPair {
            name: name.into(),
            s,
            at,
            bt,
            a,
            b,
            ct,
            c,
            stiffly_accurate,
        })
    }

    /// The pair reproducing the first-order semi-implicit scheme.
    pub fn first_order() -> Self {
        ButcherPair::new(
            "first-order",
            vec![vec![0.0]],
            vec![1.0],
            vec![vec![1.0]],
            vec![1.0],
        )
        .unwrap()
    }

    /// `first-order` or any registry entry.
    pub fn by_name(name: &str) -> Result<Self, SolverError> {
        if name == "first-order" {
            return Ok(Self::first_order());
        }
        registry()?
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| SolverError::Tableau {
                name: name.into(),
                why: "unknown tableau".into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableauReport {
    /// Highest order (at most 3) whose IMEX order conditions all hold.
    pub order: usize,
    pub stiffly_accurate: bool,
    pub violations: Vec<String>,
}

impl TableauReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn dotv(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| dotv(r, v)).collect()
}

/// Residuals of the coupled order conditions, grouped by order.
fn order_residuals(t: &ButcherPair) -> [Vec<f64>; 3] {
    let ws = [&t.b, &t.bt];
    let ns = [&t.c, &t.ct];
    let ms = [&t.a, &t.at];
    let mut r: [Vec<f64>; 3] = Default::default();
    for w in ws {
        r[0].push(w.iter().sum::<f64>() - 1.0);
        for n in ns {
            r[1].push(dotv(w, n) - 0.5);
            for n2 in ns {
                let nn: Vec<f64> = n.iter().zip(n2.iter()).map(|(x, y)| x * y).collect();
                r[2].push(dotv(w, &nn) - 1.0 / 3.0);
            }
            for m in ms {
                r[2].push(dotv(w, &matvec(m, n)) - 1.0 / 6.0);
            }
        }
    }
    r
}

pub fn validate_tableau(t: &ButcherPair) -> TableauReport {
    let mut v = Vec::new();
    let s = t.s;
    for i in 0..s {
        for j in 0..s {
            if j >= i && t.at[i][j] != 0.0 {
                v.push(format!(
                    "explicit entry ({i},{j}) = {} on or above the diagonal",
                    t.at[i][j]
                ));
            }
            if j > i && t.a[i][j] != 0.0 {
                v.push(format!(
                    "implicit entry ({i},{j}) = {} above the diagonal",
                    t.a[i][j]
                ));
            }
        }
        if t.a[i][i] < 0.0 {
            v.push(format!("negative diagonal a_{i}{i} = {}", t.a[i][i]));
        }
        let (ct, c): (f64, f64) = (t.at[i].iter().sum(), t.a[i].iter().sum());
        if (ct - t.ct[i]).abs() > 1e-14 || (c - t.c[i]).abs() > 1e-14 {
            v.push(format!("node {i} inconsistent with its row sums"));
        }
    }
    let sa = t.a[s - 1]
        .iter()
        .zip(&t.b)
        .all(|(x, y)| (x - y).abs() <= 1e-14);
    if sa != t.stiffly_accurate {
        v.push(format!(
            "stiffly_accurate flag is {} but b {} the last row of A",
            t.stiffly_accurate,
            if sa { "equals" } else { "differs from" }
        ));
    }
    let res = order_residuals(t);
    let order = res
        .iter()
        .take_while(|r| r.iter().all(|x| x.abs() <= ORDER_TOL))
        .count();
    TableauReport {
        order,
        stiffly_accurate: sa,
        violations: v,
    }
}

/// Parse a registry text: blank-line separated blocks `name`, `s`, s rows of
/// the explicit matrix, explicit weights, s rows of the implicit matrix,
/// implicit weights. `#` starts a comment line. Each pair is validated and
/// must be stiffly accurate.
pub fn parse_registry(text: &str) -> Result<Vec<ButcherPair>, SolverError> {
    let mut blocks: Vec<Vec<&str>> = vec![vec![]];
    for line in text.lines().map(str::trim) {
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(vec![]);
            }
        } else {
            blocks.last_mut().unwrap().push(line);
        }
    }
    blocks.retain(|b| !b.is_empty());
    blocks.iter().map(|b| parse_block(b)).collect()
}

fn parse_block(lines: &[&str]) -> Result<ButcherPair, SolverError> {
    let name = lines[0];
    let bad = |why: String| SolverError::Tableau {
        name: name.into(),
        why,
    };
    let s: usize = lines
        .get(1)
        .ok_or_else(|| bad("missing stage count".into()))?
        .parse()
        .map_err(|e| bad(format!("stage count: {e}")))?;
    if lines.len() != 2 * s + 4 {
        return Err(bad(format!(
            "expected {} lines for s = {s}, found {}",
            2 * s + 4,
            lines.len()
        )));
    }
    let rows = lines[2..]
        .iter()
        .map(|l| {
            let r: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("{e} in `{l}`")))?;
            if r.len() != s {
                return Err(bad(format!("row `{l}` does not have {s} entries")));
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let t = ButcherPair::new(
        name,
        rows[..s].to_vec(),
        rows[s].clone(),
        rows[s + 1..2 * s + 1].to_vec(),
        rows[2 * s + 1].clone(),
    )?;
    let report = validate_tableau(&t);
    if !report.is_valid() {
        return Err(bad(report.violations.join("; ")));
    }
    if !t.stiffly_accurate {
        return Err(bad("registry pairs must be stiffly accurate".into()));
    }
    Ok(t)
}

/// The shipped registry.
pub fn registry() -> Result<Vec<ButcherPair>, SolverError> {
    parse_registry(REGISTRY)
}

/// Time-step law: CFL (dt ~ dx) or the accuracy-study law dt ~ dx^(5/3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtLaw {
    Cfl,
    Accuracy,
}

/// dt = cfl / sum_axes(speed_axis / h_axis), with h replaced by h^(5/3) for the
/// accuracy law; zero speeds fall back to `dt_max`.
pub fn dt_from_speeds(
    grid: &Grid,
    speeds: [f64; 2],
    cfl: f64,
    law: DtLaw,
    dt_max: f64,
) -> Result<f64, SolverError> {
    if !(cfl > 0.0) || !(dt_max > 0.0) {
        return Err(SolverError::Parameter(format!(
            "cfl = {cfl}, dt_max = {dt_max}"
        )));
    }
    let rate: f64 = grid
        .axes()
        .iter()
        .map(|&a| {
            let h = grid.h(a);
            let h = match law {
                DtLaw::Cfl => h,
                DtLaw::Accuracy => h.powf(5.0 / 3.0),
            };
            speeds[a.index()] / h
        })
        .sum();
    let dt = if rate > 0.0 { cfl / rate } else { dt_max };
    Ok(dt.min(dt_max))
}

/// Time step from the capped signal speeds max(|u_k| + c_f_hat).
pub fn compute_dt(
    field: &ConservedField,
    eps: &EpsilonParams,
    cfl: f64,
    law: DtLaw,
) -> Result<f64, SolverError> {
    let mut s = [0.0; 2];
    for &a in field.grid.axes() {
        s[a.index()] = max_signal_speed(field, eps, a)?;
    }
    dt_from_speeds(&field.grid, s, cfl, law, DT_MAX)
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub elliptic_iterations: usize,
    pub fallbacks: usize,
}

/// Terms of H depending only on the explicit stage state.
struct ExplicitPart {
    /// -div F1 on the rho, q and B rows it evolves (other rows zero).
    f1: [Vec<f64>; NVAR],
    /// -div F2, the eps^2 magnetic energy flux.
    f2: Vec<f64>,
    /// -G, the A_z transport term (2D).
    g: Option<Vec<f64>>,
    p: Vec<f64>,
    alphas: [f64; 2],
    fallbacks: usize,
}

/// Terms of H evaluated with the implicit stage state.
struct SemiImplicitPart {
    /// -(1 - alpha eps^2) grad p2 per axis (empty when eps >= 1).
    q: Vec<Vec<f64>>,
    /// -div(Hbar q_I) with its upwinding.
    e: Vec<f64>,
}

struct StageRhs {
    ex: ExplicitPart,
    si: SemiImplicitPart,
}

impl StageRhs {
    /// out += coef * H on interior nodes.
    fn accumulate(&self, out: &mut ConservedField, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let g = out.grid.clone();
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            for c in 0..NVAR {
                out.u[c][k] += coef * self.ex.f1[c][k];
            }
            out.u[EN][k] += coef * (self.ex.f2[k] + self.si.e[k]);
            for (d, sq) in self.si.q.iter().enumerate() {
                out.u[MX + d][k] += coef * sq[k];
            }
        }
        if let (Some(a), Some(gz)) = (out.az.as_mut(), &self.ex.g) {
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                a[k] += coef * gz[k];
            }
        }
    }
}

/// Cached stage right-hand sides; stage i is only read after it is pushed.
struct StageWorkspace {
    stages: Vec<StageRhs>,
}

impl StageWorkspace {
    /// base + dt * sum_j coefs[j] H_j over the stages computed so far.
    fn combine(
        &self,
        base: &ConservedField,
        dt: f64,
        coefs: &[f64],
    ) -> Result<ConservedField, SolverError> {
        if coefs.len() > self.stages.len() {
            return Err(SolverError::Parameter(format!(
                "stage sum needs {} cached stages, only {} available",
                coefs.len(),
                self.stages.len()
            )));
        }
        let mut out = base.clone();
        for (h, &c) in self.stages.iter().zip(coefs) {
            h.accumulate(&mut out, dt * c);
        }
        Ok(out)
    }
}

fn explicit_part(ue: &ConservedField, eps: &EpsilonParams) -> Result<ExplicitPart, SolverError> {
    let g = &ue.grid;
    let p = ue.pressure(eps);
    let mut alphas = [0.0; 2];
    for &axis in g.axes() {
        alphas[axis.index()] = max_signal_speed(ue, eps, axis)?;
    }
    let mut f1: [Vec<f64>; NVAR] = std::array::from_fn(|_| g.new_field());
    let fallbacks = div_cw(ue, &p, eps, FluxKind::Explicit, alphas, &mut f1);
    for row in f1.iter_mut() {
        row.iter_mut().for_each(|x| *x = -*x);
    }
    let mut drop = vec![EN, BX];
    if g.is_2d() {
        drop.push(BY);
    }
    for c in drop {
        f1[c].iter_mut().for_each(|x| *x = 0.0);
    }

    let mut f2 = g.new_field();
    let e2 = eps.eps2();
    if e2 > 0.0 {
        for &axis in g.axes() {
            let fm: Vec<f64> = (0..g.len())
                .map(|k| magnetic_energy_flux(&ue.node(k), e2, axis))
                .collect();
            div_w_axis(g, axis, &fm, &fm, 0.0, &mut f2, axis != Axis::X);
        }
        f2.iter_mut().for_each(|x| *x = -*x);
    }

    let gz = ue.az.as_ref().map(|a| hj_transport(a, ue));
    Ok(ExplicitPart {
        f1,
        f2,
        g: gz,
        p,
        alphas,
        fallbacks,
    })
}

/// -G: minus the Lax-Friedrichs HJ-WENO approximation of u . grad A_z (local
/// speeds |u|, |v|).
pub(crate) fn hj_transport(a: &[f64], ue: &ConservedField) -> Vec<f64> {
    let g = &ue.grid;
    let mut out = g.new_field();
    for &axis in g.axes() {
        let vel: Vec<f64> = ue.u[MX + axis.index()]
            .iter()
            .zip(&ue.u[RHO])
            .map(|(q, r)| q / r)
            .collect();
        let h = g.h(axis);
        let n = g.n(axis);
        let (mut m, mut p) = (vec![0.0; n], vec![0.0; n]);
        sweep(g, axis, &[a, &vel], &mut out, axis != Axis::X, |b, r| {
            hj_gradients_into(&b[0], h, &mut m, &mut p);
            for k in 0..n {
                let u = b[1][k + GHOSTS];
                r[k] = -lf_hamiltonian(|s| u * s, m[k], p[k], u.abs());
            }
        });
    }
    out
}

/// sum_axes d/dx_axis(Hbar q_axis) with its upwinding: for eps < 1 the linear
/// left-biased difference D_L (adjoint of the pressure gradient) plus LF
/// dissipation of E_E, else nonlinear WENO-LF.
fn enthalpy_divergence(
    field: &ConservedField,
    hbar: &[f64],
    e_expl: &[f64],
    alphas: [f64; 2],
    linear: bool,
    out: &mut [f64],
) {
    let g = &field.grid;
    for &axis in g.axes() {
        let d = axis.index();
        let hq: Vec<f64> = hbar
            .iter()
            .zip(&field.u[MX + d])
            .map(|(h, q)| h * q)
            .collect();
        if linear {
            div_biased_axis(g, axis, &hq, Bias::Left, out, axis != Axis::X);
            dissipation_axis(g, axis, e_expl, alphas[d], out, true);
        } else {
            div_w_axis(g, axis, &hq, e_expl, alphas[d], out, axis != Axis::X);
        }
    }
}

/// Adds coef * (explicit part of H) to `star` (rho, q, B, A and the F2 energy term).
fn add_explicit(star: &mut ConservedField, ex: &ExplicitPart, coef: f64) {
    if coef == 0.0 {
        return;
    }
    let g = star.grid.clone();
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        for c in 0..NVAR {
            star.u[c][k] += coef * ex.f1[c][k];
        }
        star.u[EN][k] += coef * ex.f2[k];
    }
    if let (Some(a), Some(gz)) = (star.az.as_mut(), &ex.g) {
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            a[k] += coef * gz[k];
        }
    }
}

/// (p - pbar)/eps^2 on interior nodes (eps >= 1 pathway, no cancellation issue).
pub(crate) fn p2_from_pressure(field: &ConservedField, eps: &EpsilonParams) -> Vec<f64> {
    let g = &field.grid;
    let p = field.pressure(eps);
    let pbar = mean_pressure(&p, g);
    let mut p2 = g.new_field();
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        p2[k] = (p[k] - pbar) / eps.eps2();
    }
    p2
}

/// The p2 that keeps the explicit momentum tendency discretely divergence-free,
/// D_L(Hbar (F_q - (1 - eps^2) D_R p2)) = 0: the incompressible pressure of
/// well-prepared data, free of the fast acoustic part of (p - pbar)/eps^2.
/// Needs a singular-compatible (periodic) grid; eps >= 1 falls back to the EOS.
pub fn balanced_p2(
    field: &ConservedField,
    eps: &EpsilonParams,
    bc: &Boundary,
) -> Result<Vec<f64>, SolverError> {
    let mut ue = field.clone();
    ue.sync(bc)?;
    if !eps.has_implicit_pressure() {
        return Ok(p2_from_pressure(&ue, eps));
    }
    let g = ue.grid.clone();
    let ex = explicit_part(&ue, eps)?;
    let hbar: Vec<f64> = (0..g.len())
        .map(|k| (ue.u[EN][k] + ex.p[k]) / ue.u[RHO][k])
        .collect();
    let mut rhs = g.new_field();
    for &axis in g.axes() {
        let d = axis.index();
        let mut f = ex.f1[MX + d].clone();
        for &ax in g.axes() {
            fill_ghosts(&g, &mut f, ax, bc.fill_for(ax, MX + d))?;
        }
        let hf: Vec<f64> = hbar.iter().zip(&f).map(|(h, f)| -h * f).collect();
        div_biased_axis(&g, axis, &hf, Bias::Left, &mut rhs, true);
    }
    let problem = HelmholtzProblem {
        h: hbar,
        w: eps.implicit_weight(),
        m: 0.0,
        rhs,
        bc: *bc,
    };
    let (mut p2, _) = assemble(&problem, &g)?.solve(&problem.rhs, ELLIPTIC_TOL)?;
    for &axis in g.axes() {
        fill_ghosts(&g, &mut p2, axis, bc.fill_even(axis))?;
    }
    Ok(p2)
}

struct ImplicitStage {
    ui: ConservedField,
    si: SemiImplicitPart,
    p2: Vec<f64>,
    iterations: usize,
}

/// Implicit stage: `star` holds rho_I, B_I/A_I, q** and E** (interior); `dt_a`
/// is dt * a_ii. Solves for p2 (eps < 1), corrects q and updates E.
fn implicit_stage(
    mut star: ConservedField,
    ue: &ConservedField,
    ex: &ExplicitPart,
    eps: &EpsilonParams,
    bc: &Boundary,
    dt_a: f64,
    p2_prev: &[f64],
) -> Result<ImplicitStage, SolverError> {
    let g = star.grid.clone();
    star.sync(bc)?;
    let hbar: Vec<f64> = (0..g.len())
        .map(|k| (ue.u[EN][k] + ex.p[k]) / star.u[RHO][k])
        .collect();
    let implicit = eps.has_implicit_pressure();
    let e2 = eps.eps2();
    let gm1 = eps.gamma - 1.0;
    let mut iterations = 0;
    let mut si_q = Vec::new();
    let mut p2 = g.new_field();
    if implicit {
        if dt_a > 0.0 {
            let mut div = g.new_field();
            enthalpy_divergence(&star, &hbar, &ue.u[EN], ex.alphas, true, &mut div);
            let pbar = mean_pressure(&ex.p, &g);
            let mut rhs = g.new_field();
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                // kinetic and magnetic energy of the explicit stage close the EOS
                let v = ue.node(k);
                let q2 = v[MX] * v[MX] + v[MX + 1] * v[MX + 1] + v[MX + 2] * v[MX + 2];
                let b2 = v[BX] * v[BX] + v[BX + 1] * v[BX + 1] + v[BX + 2] * v[BX + 2];
                rhs[k] = star.u[EN][k] - dt_a * div[k] - pbar / gm1 - 0.5 * e2 * (q2 / v[RHO] + b2);
            }
            let problem = HelmholtzProblem {
                h: hbar.clone(),
                w: eps.implicit_weight() * dt_a * dt_a,
                m: e2 / gm1,
                rhs,
                bc: *bc,
            };
            let (x, stats) = assemble(&problem, &g)?.solve(&problem.rhs, ELLIPTIC_TOL)?;
            p2 = x;
            iterations = stats.iterations;
        } else {
            p2.copy_from_slice(p2_prev);
        }
        for &axis in g.axes() {
            fill_ghosts(&g, &mut p2, axis, bc.fill_even(axis))?;
        }
        for &axis in g.axes() {
            let d = axis.index();
            let mut grad = g.new_field();
            div_biased_axis(&g, axis, &p2, Bias::Right, &mut grad, false);
            grad.iter_mut().for_each(|x| *x *= -eps.implicit_weight());
            if dt_a > 0.0 {
                for (i, j) in g.interior() {
                    let k = g.idx(i, j);
                    star.u[MX + d][k] += dt_a * grad[k];
                }
            }
            si_q.push(grad);
        }
        if dt_a > 0.0 {
            star.fill_ghosts(bc)?;
        }
    }
    let mut div = g.new_field();
    enthalpy_divergence(&star, &hbar, &ue.u[EN], ex.alphas, implicit, &mut div);
    div.iter_mut().for_each(|x| *x = -*x);
    if dt_a > 0.0 {
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            star.u[EN][k] += dt_a * div[k];
        }
        for &axis in g.axes() {
            fill_ghosts(&g, &mut star.u[EN], axis, bc.fill_for(axis, EN))?;
        }
    }
    if !implicit {
        p2 = p2_from_pressure(&star, eps);
    }
    Ok(ImplicitStage {
        ui: star,
        si: SemiImplicitPart { q: si_q, e: div },
        p2,
        iterations,
    })
}

fn check_dt(dt: f64) -> Result<(), SolverError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(SolverError::Parameter(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

fn finish(
    mut out: ConservedField,
    p2: Vec<f64>,
    eps: &EpsilonParams,
    bc: &Boundary,
) -> Result<ConservedField, SolverError> {
    out.p2 = p2;
    for v in out.p2.iter_mut() {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    out.sync(bc)?;
    out.check_admissible(eps)?;
    Ok(out)
}

/// First-order semi-implicit step: (1) explicit rho, A (B) and the predictors
/// q*, E*; (2) elliptic solve for p2^{n+1}; (3) momentum correction and energy
/// update. For eps >= 1 the implicit pressure term vanishes.
pub fn si_first_order_step(
    un: &ConservedField,
    eps: &EpsilonParams,
    bc: &Boundary,
    dt: f64,
) -> Result<(ConservedField, StepStats), SolverError> {
    check_dt(dt)?;
    let mut ue = un.clone();
    ue.sync(bc)?;
    let ex = explicit_part(&ue, eps)?;
    let mut star = un.clone();
    add_explicit(&mut star, &ex, dt);
    let st = implicit_stage(star, &ue, &ex, eps, bc, dt, &un.p2)?;
    let stats = StepStats {
        elliptic_iterations: st.iterations,
        fallbacks: ex.fallbacks,
    };
    Ok((finish(st.ui, st.p2, eps, bc)?, stats))
}

/// One IMEX Runge-Kutta step with the given pair.
pub fn imex_step(
    un: &ConservedField,
    t: &ButcherPair,
    eps: &EpsilonParams,
    bc: &Boundary,
    dt: f64,
) -> Result<(ConservedField, StepStats), SolverError> {
    check_dt(dt)?;
    let mut ws = StageWorkspace {
        stages: Vec::with_capacity(t.s),
    };
    let mut stats = StepStats::default();
    let mut p2 = un.p2.clone();
    let mut last = None;
    for i in 0..t.s {
        let mut ue = ws.combine(un, dt, &t.at[i][..i])?;
        ue.sync(bc)?;
        let ex = explicit_part(&ue, eps)?;
        let mut star = ws.combine(un, dt, &t.a[i][..i])?;
        let dt_a = dt * t.a[i][i];
        add_explicit(&mut star, &ex, dt_a);
        let st = implicit_stage(star, &ue, &ex, eps, bc, dt_a, &p2)?;
        stats.elliptic_iterations += st.iterations;
        stats.fallbacks += ex.fallbacks;
        p2 = st.p2;
        ws.stages.push(StageRhs { ex, si: st.si });
        last = Some(st.ui);
    }
    let out = if t.stiffly_accurate {
        last.expect("at least one stage")
    } else {
        let out = ws.combine(un, dt, &t.b)?;
        if !eps.has_implicit_pressure() {
            let mut o = out.clone();
            o.sync(bc)?;
            p2 = p2_from_pressure(&o, eps);
        }
        out
    };
    Ok((finish(out, p2, eps, bc)?, stats))
}
