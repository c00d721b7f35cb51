//! Wave speeds, epsilon-capped signal speeds and the characteristic basis.
//!
//! The basis is the 8-wave (Powell) eigensystem of the eps = 1 equations,
//! waves ordered (u-cf, u-ca, u-cs, u, u, u+cs, u+ca, u+cf); the fifth wave is
//! the divergence wave carried with speed u_n. Right vectors are written in
//! primitive variables (rho, u, v, w, Bx, By, Bz, p) with the alpha_f/alpha_s
//! normalisation, left vectors in closed form, then both are mapped to
//! conservative variables.

use crate::error::SolverError;
use crate::grid::Axis;
use crate::state::{
    cons_to_prim_with_p, pressure_unchecked, ConservedField, EpsilonParams, Node, Primitive, NVAR,
};

pub type Mat8 = [[f64; NVAR]; NVAR];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub a: f64,
    pub ca: f64,
    pub cf: f64,
    pub cs: f64,
}

/// Speeds from sound speed squared `a2`, |B|^2/rho and B_n^2/rho.
fn speeds(a2: f64, b2: f64, bn2: f64) -> WaveSpeeds {
    let bt2 = (b2 - bn2).max(0.0);
    let disc = ((a2 - b2) * (a2 - b2) + 4.0 * a2 * bt2).sqrt();
    let cf2 = 0.5 * (a2 + b2 + disc);
    let cs2 = if cf2 > 0.0 { a2 * bn2 / cf2 } else { 0.0 };
    WaveSpeeds {
        a: a2.sqrt(),
        ca: bn2.sqrt(),
        cf: cf2.sqrt(),
        cs: cs2.sqrt(),
    }
}

fn check(w: &Primitive) -> Result<(), SolverError> {
    if !(w.rho > 0.0) || !(w.p > 0.0) {
        return Err(SolverError::NonPhysical {
            i: 0,
            j: 0,
            what: format!("rho = {}, p = {}", w.rho, w.p),
        });
    }
    Ok(())
}

/// Speeds of the epsilon system: a = sqrt(gamma p / rho) / eps.
pub fn wave_speeds(w: &Primitive, n: Axis, eps: &EpsilonParams) -> Result<WaveSpeeds, SolverError> {
    check(w)?;
    if !(eps.eps > 0.0) {
        return Err(SolverError::Parameter("wave_speeds needs eps > 0".into()));
    }
    let a2 = eps.gamma * w.p / w.rho / eps.eps2();
    let bn = w.b[n.index()];
    Ok(speeds(a2, w.b2() / w.rho, bn * bn / w.rho))
}

/// Speeds with the sound speed capped: a_hat = min(1/eps, 1) sqrt(gamma p / rho).
pub fn capped_wave_speeds(
    w: &Primitive,
    n: Axis,
    eps: &EpsilonParams,
) -> Result<WaveSpeeds, SolverError> {
    check(w)?;
    let cap = eps.sound_cap();
    let a2 = cap * cap * eps.gamma * w.p / w.rho;
    let bn = w.b[n.index()];
    Ok(speeds(a2, w.b2() / w.rho, bn * bn / w.rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub r: Mat8,
    pub l: Mat8,
    pub lambda: [f64; NVAR],
}

const PERM_Y: [usize; NVAR] = [0, 2, 1, 3, 5, 4, 6, 7];

/// Characteristic basis of the eps = 1 flux Jacobian along `axis`, evaluated at
/// primitive state `w` (typically the arithmetic mean of the two interface states).
pub fn eigen_basis(w: &Primitive, gamma: f64, axis: Axis) -> Result<EigenBasis, SolverError> {
    check(w)?;
    let mut ws = *w;
    if axis == Axis::Y {
        ws.u.swap(0, 1);
        ws.b.swap(0, 1);
    }
    let mut eb = eigen_basis_x(&ws, gamma);
    if axis == Axis::Y {
        let (r, l) = (eb.r, eb.l);
        for i in 0..NVAR {
            for k in 0..NVAR {
                eb.r[i][k] = r[PERM_Y[i]][k];
                eb.l[k][i] = l[k][PERM_Y[i]];
            }
        }
    }
    let finite =
        eb.r.iter()
            .chain(eb.l.iter())
            .flatten()
            .all(|x| x.is_finite());
    if !finite {
        return Err(SolverError::NonPhysical {
            i: 0,
            j: 0,
            what: "non-finite eigenvectors".into(),
        });
    }
    Ok(eb)
}

fn eigen_basis_x(w: &Primitive, gamma: f64) -> EigenBasis {
    let rho = w.rho;
    let [u, v, ww] = w.u;
    let [bx, by, bz] = w.b;
    let sr = rho.sqrt();
    let a2 = gamma * w.p / rho;
    let bt2 = by * by + bz * bz;
    let sp = speeds(a2, (bx * bx + bt2) / rho, bx * bx / rho);
    let (a, ca, cf, cs) = (sp.a, sp.ca, sp.cf, sp.cs);
    let (cf2, cs2) = (cf * cf, cs * cs);

    let (mut af, mut as_) = ((a2 - cs2).max(0.0).sqrt(), (cf2 - a2).max(0.0).sqrt());
    let norm = (af * af + as_ * as_).sqrt();
    if norm <= 1e-12 * (a2 + (bx * bx + bt2) / rho).sqrt() {
        if a2 >= bx * bx / rho {
            af = 1.0;
            as_ = 0.0;
        } else {
            af = 0.0;
            as_ = 1.0;
        }
    } else {
        af /= norm;
        as_ /= norm;
    }
    let (bty, btz) = if bt2 < 1e-12 {
        (
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        )
    } else {
        let bt = bt2.sqrt();
        (by / bt, bz / bt)
    };
    let sg = if bx >= 0.0 { 1.0 } else { -1.0 };

    // primitive right vectors, columns in wave order
    let mut rp = [[0.0; NVAR]; NVAR];
    let mut lp = [[0.0; NVAR]; NVAR];
    let set_col = |m: &mut Mat8, k: usize, c: [f64; NVAR]| {
        for i in 0..NVAR {
            m[i][k] = c[i];
        }
    };
    for (k, s) in [(0usize, -1.0), (7, 1.0)] {
        set_col(
            &mut rp,
            k,
            [
                rho * af,
                s * af * cf,
                -s * as_ * cs * bty * sg,
                -s * as_ * cs * btz * sg,
                0.0,
                as_ * sr * a * bty,
                as_ * sr * a * btz,
                af * rho * a2,
            ],
        );
        let h = 0.5 / a2;
        lp[k] = [
            0.0,
            h * s * af * cf,
            -h * s * as_ * cs * bty * sg,
            -h * s * as_ * cs * btz * sg,
            0.0,
            h * as_ * a * bty / sr,
            h * as_ * a * btz / sr,
            h * af / rho,
        ];
    }
    for (k, s) in [(2usize, -1.0), (5, 1.0)] {
        set_col(
            &mut rp,
            k,
            [
                rho * as_,
                s * as_ * cs,
                s * af * cf * bty * sg,
                s * af * cf * btz * sg,
                0.0,
                -af * sr * a * bty,
                -af * sr * a * btz,
                as_ * rho * a2,
            ],
        );
        let h = 0.5 / a2;
        lp[k] = [
            0.0,
            h * s * as_ * cs,
            h * s * af * cf * bty * sg,
            h * s * af * cf * btz * sg,
            0.0,
            -h * af * a * bty / sr,
            -h * af * a * btz / sr,
            h * as_ / rho,
        ];
    }
    for (k, s) in [(1usize, -1.0), (6, 1.0)] {
        set_col(
            &mut rp,
            k,
            [
                0.0,
                0.0,
                -btz,
                bty,
                0.0,
                s * sg * sr * btz,
                -s * sg * sr * bty,
                0.0,
            ],
        );
        lp[k] = [
            0.0,
            0.0,
            -0.5 * btz,
            0.5 * bty,
            0.0,
            0.5 * s * sg * btz / sr,
            -0.5 * s * sg * bty / sr,
            0.0,
        ];
    }
    set_col(&mut rp, 3, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    lp[3] = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0 / a2];
    set_col(&mut rp, 4, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    lp[4] = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];

    // map to conservative variables (eps = 1 energy)
    let g1 = gamma - 1.0;
    let uu = [u, v, ww];
    let bb = [bx, by, bz];
    let half_u2 = 0.5 * (u * u + v * v + ww * ww);
    let mut r = [[0.0; NVAR]; NVAR];
    let mut l = [[0.0; NVAR]; NVAR];
    for k in 0..NVAR {
        let c: [f64; NVAR] = std::array::from_fn(|i| rp[i][k]);
        r[0][k] = c[0];
        let mut e = half_u2 * c[0] + c[7] / g1;
        for d in 0..3 {
            r[1 + d][k] = uu[d] * c[0] + rho * c[1 + d];
            r[4 + d][k] = c[4 + d];
            e += rho * uu[d] * c[1 + d] + bb[d] * c[4 + d];
        }
        r[7][k] = e;

        let lr = lp[k];
        let lpg = lr[7] * g1;
        l[k][0] = lr[0] - (lr[1] * u + lr[2] * v + lr[3] * ww) / rho + lpg * half_u2;
        for d in 0..3 {
            l[k][1 + d] = lr[1 + d] / rho - lpg * uu[d];
            l[k][4 + d] = lr[4 + d] - lpg * bb[d];
        }
        l[k][7] = lpg;
    }
    let lambda = [u - cf, u - ca, u - cs, u, u, u + cs, u + ca, u + cf];
    EigenBasis { r, l, lambda }
}

/// Max over interior nodes of |u_axis| + capped fast speed along `axis`.
/// Ghosts need not be filled.
pub fn max_signal_speed(
    field: &ConservedField,
    eps: &EpsilonParams,
    axis: Axis,
) -> Result<f64, SolverError> {
    signal_speed(field, eps, axis, true)
}

/// Same with the uncapped (physical) fast speed; requires eps > 0.
pub fn max_physical_speed(
    field: &ConservedField,
    eps: &EpsilonParams,
    axis: Axis,
) -> Result<f64, SolverError> {
    signal_speed(field, eps, axis, false)
}

fn signal_speed(
    field: &ConservedField,
    eps: &EpsilonParams,
    axis: Axis,
    capped: bool,
) -> Result<f64, SolverError> {
    let g = &field.grid;
    let mut m: f64 = 0.0;
    for (i, j) in g.interior() {
        let v: Node = field.node(g.idx(i, j));
        let w = cons_to_prim_with_p(&v, pressure_unchecked(&v, eps));
        let s = if capped {
            capped_wave_speeds(&w, axis, eps)
        } else {
            wave_speeds(&w, axis, eps)
        }
        .map_err(|e| match e {
            SolverError::NonPhysical { what, .. } => SolverError::NonPhysical { i, j, what },
            e => e,
        })?;
        m = m.max(w.u[axis.index()].abs() + s.cf);
    }
    Ok(m)
}
