//! Physical fluxes of the epsilon-scaled ideal MHD system along a coordinate axis.

use crate::grid::Axis;
use crate::state::{EpsilonParams, Node, BX, EN, MX, NVAR, RHO};

/// Full flux of the epsilon system: momentum carries p/eps^2 (eps > 0 required).
#[inline]
pub fn full_flux(v: &Node, p: f64, eps: &EpsilonParams, axis: Axis) -> Node {
    flux_with_pressure(v, p, p / eps.eps2(), eps.eps2(), axis)
}

/// Explicit-part flux: momentum carries alpha*p (alpha-switch); energy row is the
/// full epsilon-system energy flux (only used inside characteristic projections).
#[inline]
pub fn explicit_flux(v: &Node, p: f64, eps: &EpsilonParams, axis: Axis) -> Node {
    flux_with_pressure(v, p, eps.pressure_alpha() * p, eps.eps2(), axis)
}

/// Generic flux with momentum pressure `pm` and magnetic weight `e2` in the energy row.
#[inline]
pub fn flux_with_pressure(v: &Node, p: f64, pm: f64, e2: f64, axis: Axis) -> Node {
    let n = axis.index();
    let r = v[RHO];
    let u = [v[MX] / r, v[MX + 1] / r, v[MX + 2] / r];
    let b = [v[BX], v[BX + 1], v[BX + 2]];
    let un = u[n];
    let bn = b[n];
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let ub = u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
    let mut f = [0.0; NVAR];
    f[RHO] = v[MX + n];
    for d in 0..3 {
        f[MX + d] = v[MX + d] * un - b[d] * bn;
        f[BX + d] = un * b[d] - bn * u[d];
    }
    f[MX + n] += pm + 0.5 * b2;
    f[BX + n] = 0.0;
    f[EN] = (v[EN] + p + 0.5 * e2 * b2) * un - e2 * bn * ub;
    f
}

/// Normal component of the eps^2-weighted magnetic energy flux
/// eps^2 (|B|^2/2 u - (u.B) B).
#[inline]
pub fn magnetic_energy_flux(v: &Node, eps2: f64, axis: Axis) -> f64 {
    let n = axis.index();
    let r = v[RHO];
    let u = [v[MX] / r, v[MX + 1] / r, v[MX + 2] / r];
    let b = [v[BX], v[BX + 1], v[BX + 2]];
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let ub = u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
    eps2 * (0.5 * b2 * u[n] - ub * b[n])
}
