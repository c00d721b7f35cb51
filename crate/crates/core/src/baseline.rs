//! Explicit reference schemes: third-order SSP Runge-Kutta with
//! characteristic-wise WENO5 on the full epsilon-system flux. "ERK" evolves B
//! directly; "ERKC" evolves A_z with HJ-WENO and re-derives B = curl A_z.
//! Both share every spatial kernel with the semi-implicit solver; the LF
//! dissipation uses the capped fast speed, the time step the physical one.

use crate::eigen::{max_physical_speed, max_signal_speed};
use crate::error::SolverError;
use crate::integrator::{
    compute_dt, dt_from_speeds, hj_transport, imex_step, p2_from_pressure, ButcherPair, DtLaw,
    StepStats, DT_MAX,
};
use crate::state::{Boundary, ConservedField, EpsilonParams, BX, BY, NVAR};
use crate::weno::{div_cw, FluxKind};

/// Time derivative of the conserved rows (and of A_z with CT).
#[derive(Debug, Clone)]
pub struct ExplicitRhs {
    pub u: [Vec<f64>; NVAR],
    pub az: Option<Vec<f64>>,
    pub fallbacks: usize,
}

fn need_eps(eps: &EpsilonParams) -> Result<(), SolverError> {
    if eps.eps > 0.0 {
        Ok(())
    } else {
        Err(SolverError::Unsupported(
            "explicit schemes need eps > 0".into(),
        ))
    }
}

/// -div F(U) of the full epsilon system (ghosts of `field` filled).
pub fn erk_rhs(
    field: &ConservedField,
    eps: &EpsilonParams,
    with_ct: bool,
) -> Result<ExplicitRhs, SolverError> {
    need_eps(eps)?;
    let g = &field.grid;
    let p = field.pressure(eps);
    let mut alphas = [0.0; 2];
    for &axis in g.axes() {
        alphas[axis.index()] = max_signal_speed(field, eps, axis)?;
    }
    let mut u: [Vec<f64>; NVAR] = std::array::from_fn(|_| g.new_field());
    let fallbacks = div_cw(field, &p, eps, FluxKind::Full, alphas, &mut u);
    for row in u.iter_mut() {
        row.iter_mut().for_each(|x| *x = -*x);
    }
    let az = match (&field.az, with_ct && g.is_2d()) {
        (Some(a), true) => {
            for c in [BX, BY] {
                u[c].iter_mut().for_each(|x| *x = 0.0);
            }
            Some(hj_transport(a, field))
        }
        (None, true) => {
            return Err(SolverError::Parameter(
                "constrained transport needs A_z".into(),
            ))
        }
        _ => None,
    };
    Ok(ExplicitRhs { u, az, fallbacks })
}

fn complete(f: &mut ConservedField, bc: &Boundary, with_ct: bool) -> Result<(), SolverError> {
    if with_ct {
        f.sync(bc)
    } else {
        f.az = None;
        f.fill_ghosts(bc)
    }
}

/// a * u0 + b * (u + dt L(u)) on interior nodes.
fn combine(
    u0: &ConservedField,
    a: f64,
    u: &ConservedField,
    r: &ExplicitRhs,
    b: f64,
    dt: f64,
) -> ConservedField {
    let g = &u.grid;
    let mut out = u.clone();
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        for c in 0..NVAR {
            out.u[c][k] = a * u0.u[c][k] + b * (u.u[c][k] + dt * r.u[c][k]);
        }
    }
    if let (Some(o), Some(a0), Some(ra)) = (out.az.as_mut(), &u0.az, &r.az) {
        let ua = u.az.as_ref().unwrap();
        for (i, j) in g.interior() {
            let k = g.idx(i, j);
            o[k] = a * a0[k] + b * (ua[k] + dt * ra[k]);
        }
    }
    out
}

/// One Shu-Osher SSP-RK3 step.
pub fn ssp_rk3_step(
    field: &ConservedField,
    eps: &EpsilonParams,
    bc: &Boundary,
    dt: f64,
    with_ct: bool,
) -> Result<(ConservedField, StepStats), SolverError> {
    need_eps(eps)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::Parameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let mut stats = StepStats::default();
    let mut u0 = field.clone();
    complete(&mut u0, bc, with_ct)?;
    let r = erk_rhs(&u0, eps, with_ct)?;
    stats.fallbacks += r.fallbacks;
    let mut u1 = combine(&u0, 0.0, &u0, &r, 1.0, dt);
    complete(&mut u1, bc, with_ct)?;
    let r = erk_rhs(&u1, eps, with_ct)?;
    stats.fallbacks += r.fallbacks;
    let mut u2 = combine(&u0, 0.75, &u1, &r, 0.25, dt);
    complete(&mut u2, bc, with_ct)?;
    let r = erk_rhs(&u2, eps, with_ct)?;
    stats.fallbacks += r.fallbacks;
    let mut u3 = combine(&u0, 1.0 / 3.0, &u2, &r, 2.0 / 3.0, dt);
    complete(&mut u3, bc, with_ct)?;
    u3.p2 = p2_from_pressure(&u3, eps);
    u3.check_admissible(eps)?;
    Ok((u3, stats))
}

/// Explicit time step from the physical (uncapped) fast speed.
pub fn explicit_dt(
    field: &ConservedField,
    eps: &EpsilonParams,
    cfl: f64,
    law: DtLaw,
) -> Result<f64, SolverError> {
    need_eps(eps)?;
    let mut s = [0.0; 2];
    for &a in field.grid.axes() {
        s[a.index()] = max_physical_speed(field, eps, a)?;
    }
    dt_from_speeds(&field.grid, s, cfl, law, DT_MAX)
}

/// Time integrator selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Imex(ButcherPair),
    Erk,
    Erkc,
}

impl Scheme {
    /// `imex` (with a tableau name), `erk` or `erkc`.
    pub fn from_name(scheme: &str, tableau: &str) -> Result<Self, SolverError> {
        match scheme {
            "imex" => Ok(Scheme::Imex(ButcherPair::by_name(tableau)?)),
            "erk" => Ok(Scheme::Erk),
            "erkc" => Ok(Scheme::Erkc),
            s => Err(SolverError::Parameter(format!(
                "unknown scheme `{s}` (imex | erk | erkc)"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scheme::Imex(t) => format!("imex/{}", t.name),
            Scheme::Erk => "erk".into(),
            Scheme::Erkc => "erkc".into(),
        }
    }

    pub fn step(
        &self,
        field: &ConservedField,
        eps: &EpsilonParams,
        bc: &Boundary,
        dt: f64,
    ) -> Result<(ConservedField, StepStats), SolverError> {
        match self {
            Scheme::Imex(t) => imex_step(field, t, eps, bc, dt),
            Scheme::Erk => ssp_rk3_step(field, eps, bc, dt, false),
            Scheme::Erkc => ssp_rk3_step(field, eps, bc, dt, true),
        }
    }

    pub fn time_step(
        &self,
        field: &ConservedField,
        eps: &EpsilonParams,
        cfl: f64,
        law: DtLaw,
    ) -> Result<f64, SolverError> {
        match self {
            Scheme::Imex(_) => compute_dt(field, eps, cfl, law),
            _ => explicit_dt(field, eps, cfl, law),
        }
    }
}
