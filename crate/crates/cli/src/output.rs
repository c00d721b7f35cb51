use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use allmach_core::grid::Axis;
use allmach_core::operators::{central_d4, curl_to_b};
use allmach_core::problems::{mach_ratio, vorticity_field};
use allmach_core::state::{BX, BY, EN, NVAR, RHO};
use allmach_core::{ConservedField, EpsilonParams};

use crate::study::error_norms;
use crate::RunOutcome;

pub const CONSERVED_NAMES: [&str; NVAR] = ["rho", "rho_u", "rho_v", "rho_w", "Bx", "By", "Bz", "E"];

fn divergence_field(field: &ConservedField) -> Vec<f64> {
    let g = &field.grid;
    match &field.az {
        Some(a) => {
            let (bx, by) = curl_to_b(a, g);
            let dx = central_d4(&bx, g, Axis::X);
            let dy = central_d4(&by, g, Axis::Y);
            dx.iter().zip(&dy).map(|(a, b)| a + b).collect()
        }
        None if g.is_2d() => {
            let dx = central_d4(&field.u[BX], g, Axis::X);
            let dy = central_d4(&field.u[BY], g, Axis::Y);
            dx.iter().zip(&dy).map(|(a, b)| a + b).collect()
        }
        None => central_d4(&field.u[BX], g, Axis::X),
    }
}

/// One CSV table of the interior nodes, x fastest, values at 17 significant
/// digits. 2D dumps add y, Az and the vorticity.
pub fn emit_fields(field: &ConservedField, eps: &EpsilonParams, path: &Path) -> Result<()> {
    let g = &field.grid;
    let two_d = g.is_2d();
    let p = field.pressure(eps);
    let div = divergence_field(field);
    let mach = mach_ratio(field, eps);
    let vort = two_d.then(|| vorticity_field(field));

    let mut header = vec!["x"];
    if two_d {
        header.push("y");
    }
    header.extend(["rho", "u", "v", "w", "Bx", "By", "Bz", "p", "E"]);
    if two_d {
        header.push("Az");
    }
    header.push("divB");
    if two_d {
        header.push("vorticity");
    }
    header.push("M_ratio");

    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        let rho = field.u[RHO][k];
        row.clear();
        let mut push = |v: f64| row.push(format!("{v:.16e}"));
        push(g.x(i));
        if two_d {
            push(g.y(j));
        }
        push(rho);
        for c in 1..4 {
            push(field.u[c][k] / rho);
        }
        for c in BX..EN {
            push(field.u[c][k]);
        }
        push(p[k]);
        push(field.u[EN][k]);
        if let Some(a) = &field.az {
            push(a[k]);
        }
        push(div[k]);
        if let Some(v) = &vort {
            push(v[k]);
        }
        push(mach[k]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Header and rows of a dump written by [`emit_fields`].
pub fn read_fields(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok((header, rows))
}

/// Final norms (against the exact solution when one exists) and the
/// conservation ledger.
pub fn write_summary(run: &RunOutcome, eps: &EpsilonParams, path: &Path) -> Result<()> {
    let g = &run.field.grid;
    let last = run.diagnostics.last().expect("initial diagnostics row");
    let mut s = String::new();
    writeln!(s, "problem      {}", run.spec.name)?;
    writeln!(s, "scheme       {}", run.scheme)?;
    writeln!(s, "grid         {} x {}", g.nx, g.ny)?;
    writeln!(s, "epsilon      {}", eps.eps)?;
    writeln!(s, "gamma        {}", eps.gamma)?;
    writeln!(s, "t_final      {}", last.t)?;
    writeln!(s, "steps        {}", last.step)?;
    writeln!(s, "elliptic_its {}", run.totals.elliptic_iterations)?;
    writeln!(s, "fallbacks    {}", run.totals.fallbacks)?;
    writeln!(s, "max_divB     {:.6e}", run.max_div_b())?;
    writeln!(
        s,
        "min_rho      {:.6e}",
        run.diagnostics
            .iter()
            .map(|d| d.min_rho)
            .fold(f64::INFINITY, f64::min)
    )?;
    writeln!(
        s,
        "min_p        {:.6e}",
        run.diagnostics
            .iter()
            .map(|d| d.min_p)
            .fold(f64::INFINITY, f64::min)
    )?;
    writeln!(s, "\nconservation (domain totals)")?;
    writeln!(
        s,
        "{:<8}{:>26}{:>26}{:>14}",
        "var", "initial", "final", "rel_change"
    )?;
    let fin = run.final_totals();
    for c in 0..NVAR {
        let (a, b) = (run.initial_totals[c], fin[c]);
        let rel = if a != 0.0 { (b - a) / a.abs() } else { b - a };
        writeln!(
            s,
            "{:<8}{:>26.16e}{:>26.16e}{:>14.3e}",
            CONSERVED_NAMES[c], a, b, rel
        )?;
    }
    if run.spec.has_exact() {
        let exact = run.spec.exact_field(g, last.t)?;
        writeln!(s, "\nerror vs exact solution")?;
        writeln!(s, "{:<8}{:>14}{:>14}{:>14}", "var", "L1", "L2", "Linf")?;
        for c in 0..NVAR {
            let n = error_norms(g.interior().map(|(i, j)| {
                let k = g.idx(i, j);
                run.field.u[c][k] - exact.u[c][k]
            }));
            writeln!(
                s,
                "{:<8}{:>14.6e}{:>14.6e}{:>14.6e}",
                CONSERVED_NAMES[c], n.l1, n.l2, n.linf
            )?;
        }
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
