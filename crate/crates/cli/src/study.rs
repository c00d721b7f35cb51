use std::fmt::Write as _;

use anyhow::{bail, Result};
use log::info;

use allmach_core::grid::Layout;
use allmach_core::state::NVAR;
use allmach_core::ConservedField;

use crate::output::CONSERVED_NAMES;
use crate::{RunConfig, Simulation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// Mean absolute error.
    pub l1: f64,
    /// Root-mean-square error.
    pub l2: f64,
    pub linf: f64,
}

pub fn error_norms(diff: impl Iterator<Item = f64>) -> Norms {
    let (mut n, mut s1, mut s2, mut m) = (0usize, 0.0, 0.0, 0.0f64);
    for d in diff {
        let a = d.abs();
        n += 1;
        s1 += a;
        s2 += a * a;
        m = m.max(a);
    }
    let n = n.max(1) as f64;
    Norms {
        l1: s1 / n,
        l2: (s2 / n).sqrt(),
        linf: m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The problem's closed-form solution.
    Exact,
    /// A run at this nx (same aspect ratio), restricted to the coarse nodes.
    Fine(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub variable: String,
    pub resolutions: Vec<usize>,
    pub norms: Vec<Norms>,
    /// L1 orders log(e_coarse/e_fine)/log(n_fine/n_coarse) per consecutive pair
    /// (log2 on doubled grids).
    pub orders: Vec<f64>,
}

impl ErrorReport {
    pub fn l1(&self) -> Vec<f64> {
        self.norms.iter().map(|n| n.l1).collect()
    }

    pub fn last_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }
}

fn solve_at(cfg: &RunConfig, nx: usize) -> Result<ConservedField> {
    let spec = cfg.spec()?;
    let mut c = cfg.clone();
    c.nx = Some(nx);
    c.ny = match (cfg.nx, cfg.ny) {
        (Some(bx), Some(by)) if spec.dim == 2 => {
            if (nx * by) % bx != 0 {
                bail!("nx = {nx} does not keep the {bx}:{by} aspect ratio");
            }
            Some(nx * by / bx)
        }
        _ => None,
    };
    let mut sim = Simulation::new(&c)?;
    sim.run_to_end()?;
    info!("{} nx = {nx}: {} steps", spec.name, sim.step);
    Ok(sim.field)
}

/// Errors of every conserved variable over a resolution sweep.
pub fn convergence_study(
    cfg: &RunConfig,
    resolutions: &[usize],
    reference: Reference,
) -> Result<Vec<ErrorReport>> {
    let spec = cfg.spec()?;
    if resolutions.is_empty() {
        bail!("no resolutions given");
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        bail!("resolutions must increase: {resolutions:?}");
    }
    let fine = match reference {
        Reference::Exact => {
            if !spec.has_exact() {
                bail!(
                    "{} has no exact solution; give a fine reference resolution",
                    spec.name
                );
            }
            None
        }
        Reference::Fine(nf) => {
            if spec.layout != Layout::Vertex {
                bail!(
                    "{} uses cell-centred nodes, which do not nest under refinement",
                    spec.name
                );
            }
            if let Some(n) = resolutions.iter().find(|&&n| n >= nf || nf % n != 0) {
                bail!("resolution {n} does not nest in the reference resolution {nf}");
            }
            Some((nf, solve_at(cfg, nf)?))
        }
    };
    let mut norms = vec![Vec::new(); NVAR];
    for &n in resolutions {
        let f = solve_at(cfg, n)?;
        let g = &f.grid;
        let diffs: Vec<Vec<f64>> = match &fine {
            None => {
                let e = spec.exact_field(g, spec.t_final)?;
                (0..NVAR)
                    .map(|c| {
                        g.interior()
                            .map(|(i, j)| f.u[c][g.idx(i, j)] - e.u[c][g.idx(i, j)])
                            .collect()
                    })
                    .collect()
            }
            Some((nf, r)) => {
                let s = (nf / n) as isize;
                (0..NVAR)
                    .map(|c| {
                        g.interior()
                            .map(|(i, j)| {
                                let jf = if g.is_2d() { j * s } else { 0 };
                                f.u[c][g.idx(i, j)] - r.u[c][r.grid.idx(i * s, jf)]
                            })
                            .collect()
                    })
                    .collect()
            }
        };
        for c in 0..NVAR {
            norms[c].push(error_norms(diffs[c].iter().copied()));
        }
    }
    Ok((0..NVAR)
        .map(|c| {
            let orders = resolutions
                .windows(2)
                .zip(norms[c].windows(2))
                .map(|(n, e)| (e[0].l1 / e[1].l1).ln() / (n[1] as f64 / n[0] as f64).ln())
                .collect();
            ErrorReport {
                variable: CONSERVED_NAMES[c].into(),
                resolutions: resolutions.to_vec(),
                norms: norms[c].clone(),
                orders,
            }
        })
        .collect())
}

/// Plain-text order tables, one block per variable.
pub fn format_reports(reports: &[ErrorReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{}", r.variable);
        let _ = writeln!(
            s,
            "{:>6}{:>14}{:>14}{:>14}{:>8}",
            "N", "L1", "L2", "Linf", "order"
        );
        for (k, (n, e)) in r.resolutions.iter().zip(&r.norms).enumerate() {
            let order = if k == 0 {
                "-".to_string()
            } else {
                format!("{:.2}", r.orders[k - 1])
            };
            let _ = writeln!(
                s,
                "{n:>6}{:>14.4e}{:>14.4e}{:>14.4e}{order:>8}",
                e.l1, e.l2, e.linf
            );
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_known_vector() {
        let n = error_norms([3.0, -4.0, 0.0, 1.0].into_iter());
        assert_eq!(n.l1, 2.0);
        assert!((n.l2 - (26.0f64 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(n.linf, 4.0);
    }

    #[test]
    fn rejects_non_nesting_references() {
        let cfg = RunConfig::new("eps_accuracy1d");
        assert!(convergence_study(&cfg, &[30], Reference::Fine(80)).is_err());
        assert!(convergence_study(&cfg, &[40, 20], Reference::Fine(80)).is_err());
        assert!(
            convergence_study(&RunConfig::new("shock_tube"), &[20], Reference::Fine(40)).is_err()
        );
        assert!(
            convergence_study(&RunConfig::new("orszag_tang"), &[16], Reference::Exact).is_err()
        );
    }
}
