//! Run orchestration, convergence studies and field output for allmach-core.

mod output;
mod study;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::{debug, info};

use allmach_core::integrator::DEFAULT_CFL;
use allmach_core::problems::divergence_b;
use allmach_core::state::{NVAR, RHO};
use allmach_core::{
    make_problem, ConservedField, DtLaw, EpsilonParams, Grid, ProblemSpec, Scheme, SolverError,
    StepStats,
};

pub use output::{emit_fields, read_fields, write_summary, CONSERVED_NAMES};
pub use study::{convergence_study, error_norms, format_reports, ErrorReport, Norms, Reference};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    /// imex | erk | erkc
    pub scheme: String,
    pub tableau: String,
    /// Resolution; the problem's reference resolution when unset.
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: f64,
    pub epsilon: Option<f64>,
    pub t_final: Option<f64>,
    pub dt_law: Option<DtLaw>,
    pub out: Option<PathBuf>,
    /// Dump the fields every this many steps (final fields are always dumped).
    pub dump_every: Option<usize>,
}

impl RunConfig {
    pub fn new(problem: &str) -> Self {
        RunConfig {
            problem: problem.into(),
            scheme: "imex".into(),
            tableau: "ars443".into(),
            nx: None,
            ny: None,
            cfl: DEFAULT_CFL,
            epsilon: None,
            t_final: None,
            dt_law: None,
            out: None,
            dump_every: None,
        }
    }

    /// Problem spec with the epsilon / final-time overrides applied.
    pub fn spec(&self) -> Result<ProblemSpec> {
        let mut spec = make_problem(&self.problem)?;
        if let Some(e) = self.epsilon {
            spec = spec.with_eps(e);
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                bail!("final time must be positive, got {t}");
            }
            spec.t_final = t;
        }
        spec.eps_params()?;
        Ok(spec)
    }

    pub fn resolution(&self, spec: &ProblemSpec) -> Result<(usize, usize)> {
        let nx = self.nx.unwrap_or(spec.resolution.0);
        let ny = if spec.dim == 1 {
            1
        } else {
            self.ny
                .unwrap_or(spec.resolution.1 * nx / spec.resolution.0)
        };
        if nx == 0 || ny == 0 {
            bail!("resolutions must be positive (nx = {nx}, ny = {ny})");
        }
        Ok((nx, ny))
    }
}

pub fn parse_dt_law(s: &str) -> Result<DtLaw> {
    match s {
        "cfl" => Ok(DtLaw::Cfl),
        "accuracy" | "accuracy-5/3" => Ok(DtLaw::Accuracy),
        _ => bail!("unknown dt law `{s}` (cfl | accuracy)"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub div_b: f64,
    pub mass: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub elliptic_iterations: usize,
}

impl StepDiagnostics {
    pub const HEADER: &'static str = "step,t,dt,divB_max,mass,min_rho,min_p,elliptic_iterations";

    fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.step,
            self.t,
            self.dt,
            self.div_b,
            self.mass,
            self.min_rho,
            self.min_p,
            self.elliptic_iterations
        )
    }
}

/// A problem being advanced in time.
pub struct Simulation {
    pub spec: ProblemSpec,
    pub scheme: Scheme,
    pub eps: EpsilonParams,
    pub field: ConservedField,
    pub t: f64,
    pub step: usize,
    pub totals: StepStats,
    cfl: f64,
    law: DtLaw,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let spec = cfg.spec()?;
        let (nx, ny) = cfg.resolution(&spec)?;
        if !(cfg.cfl > 0.0) {
            bail!("cfl must be positive, got {}", cfg.cfl);
        }
        let scheme = Scheme::from_name(&cfg.scheme, &cfg.tableau)?;
        let grid = spec.grid(nx, ny)?;
        let field = spec.initial_field(&grid)?;
        Ok(Simulation {
            eps: spec.eps_params()?,
            law: cfg.dt_law.unwrap_or(spec.dt_law),
            cfl: cfg.cfl,
            scheme,
            field,
            spec,
            t: 0.0,
            step: 0,
            totals: StepStats::default(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.field.grid
    }

    pub fn done(&self) -> bool {
        self.t >= self.spec.t_final * (1.0 - 1e-14)
    }

    /// Next step size, truncated to land on the final time.
    pub fn next_dt(&self) -> Result<f64, SolverError> {
        let dt = self
            .scheme
            .time_step(&self.field, &self.eps, self.cfl, self.law)?;
        Ok(dt.min(self.spec.t_final - self.t))
    }

    /// Take one step; physical failures are reported with the step index.
    pub fn advance(&mut self) -> Result<StepDiagnostics, SolverError> {
        let dt = self.next_dt()?;
        let (next, stats) = self
            .scheme
            .step(&self.field, &self.eps, &self.spec.bc, dt)
            .map_err(|e| match e {
                SolverError::NonPhysical { i, j, what } => SolverError::Positivity {
                    step: self.step + 1,
                    i,
                    j,
                    what,
                },
                e => e,
            })?;
        self.field = next;
        self.step += 1;
        self.t = if self.spec.t_final - self.t - dt <= 1e-14 * self.spec.t_final {
            self.spec.t_final
        } else {
            self.t + dt
        };
        self.totals.elliptic_iterations += stats.elliptic_iterations;
        self.totals.fallbacks += stats.fallbacks;
        let d = self.diagnostics(dt, stats.elliptic_iterations);
        debug!(
            "step {} t = {:.6e} dt = {:.3e} divB = {:.2e}",
            d.step, d.t, d.dt, d.div_b
        );
        Ok(d)
    }

    pub fn diagnostics(&self, dt: f64, elliptic_iterations: usize) -> StepDiagnostics {
        let g = self.grid();
        let p = self.field.pressure(&self.eps);
        let min = |v: &[f64]| {
            g.interior()
                .map(|(i, j)| v[g.idx(i, j)])
                .fold(f64::INFINITY, f64::min)
        };
        StepDiagnostics {
            step: self.step,
            t: self.t,
            dt,
            div_b: divergence_b(&self.field),
            mass: self.field.total(RHO),
            min_rho: min(&self.field.u[RHO]),
            min_p: min(&p),
            elliptic_iterations,
        }
    }

    pub fn run_to_end(&mut self) -> Result<Vec<StepDiagnostics>, SolverError> {
        let mut out = Vec::new();
        while !self.done() {
            out.push(self.advance()?);
        }
        Ok(out)
    }
}

pub struct RunOutcome {
    pub spec: ProblemSpec,
    pub scheme: String,
    pub field: ConservedField,
    pub initial_totals: [f64; NVAR],
    pub diagnostics: Vec<StepDiagnostics>,
    pub totals: StepStats,
}

impl RunOutcome {
    pub fn max_div_b(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.div_b).fold(0.0, f64::max)
    }

    pub fn final_totals(&self) -> [f64; NVAR] {
        std::array::from_fn(|c| self.field.total(c))
    }
}

/// Time-step the configured problem to its final time. With an output
/// directory, writes `diagnostics.csv`, field dumps and `summary.txt`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let mut sim = Simulation::new(cfg)?;
    let initial_totals = std::array::from_fn(|c| sim.field.total(c));
    let mut diagnostics = vec![sim.diagnostics(0.0, 0)];
    let mut log_file = match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut w = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
            writeln!(w, "{}", StepDiagnostics::HEADER)?;
            writeln!(w, "{}", diagnostics[0].csv_row())?;
            Some(w)
        }
        None => None,
    };
    info!(
        "{} on {}x{}, eps = {}, T = {}, scheme {}",
        sim.spec.name,
        sim.grid().nx,
        sim.grid().ny,
        sim.eps.eps,
        sim.spec.t_final,
        sim.scheme.label()
    );
    while !sim.done() {
        let d = sim
            .advance()
            .with_context(|| format!("{} at t = {}", sim.spec.name, sim.t))?;
        if let Some(w) = log_file.as_mut() {
            writeln!(w, "{}", d.csv_row())?;
        }
        if let (Some(dir), Some(k)) = (&cfg.out, cfg.dump_every) {
            if k > 0 && sim.step % k == 0 && !sim.done() {
                emit_fields(
                    &sim.field,
                    &sim.eps,
                    &dir.join(format!("fields_{:06}.csv", sim.step)),
                )?;
            }
        }
        diagnostics.push(d);
    }
    if let Some(mut w) = log_file {
        w.flush()?;
    }
    let outcome = RunOutcome {
        scheme: sim.scheme.label(),
        totals: sim.totals,
        spec: sim.spec,
        field: sim.field,
        initial_totals,
        diagnostics,
    };
    if let Some(dir) = &cfg.out {
        emit_fields(&outcome.field, &sim.eps, &dir.join("fields_final.csv"))?;
        write_summary(&outcome, &sim.eps, &dir.join("summary.txt"))?;
    }
    info!(
        "{} steps, max div B {:.3e}",
        outcome.diagnostics.len() - 1,
        outcome.max_div_b()
    );
    Ok(outcome)
}
