use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use allmach_cli::{convergence_study, format_reports, parse_dt_law, run, Reference, RunConfig};
use allmach_core::integrator::DEFAULT_CFL;
use allmach_core::PROBLEMS;

#[derive(Parser)]
#[command(
    name = "allmach",
    version,
    about = "All-Mach-number semi-implicit WENO MHD solver"
)]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark problem to its final time.
    Run(RunArgs),
    /// Error and order table over a resolution sweep.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated nx values, increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        /// `exact` or a fine reference nx.
        #[arg(long, default_value = "exact")]
        reference: String,
    },
    /// List the problem names.
    Problems,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    /// imex | erk | erkc
    #[arg(long, default_value = "imex")]
    scheme: String,
    #[arg(long, default_value = "ars443")]
    tableau: String,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_CFL)]
    cfl: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// cfl | accuracy (dt ~ dx^(5/3)); defaults per problem.
    #[arg(long)]
    dt_law: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_every: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            problem: self.problem.clone(),
            scheme: self.scheme.clone(),
            tableau: self.tableau.clone(),
            nx: self.nx,
            ny: self.ny,
            cfl: self.cfl,
            epsilon: self.epsilon,
            t_final: self.t_final,
            dt_law: self.dt_law.as_deref().map(parse_dt_law).transpose()?,
            out: self.out.clone(),
            dump_every: self.dump_every,
        })
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let out = run(&cfg)?;
            let last = out.diagnostics.last().expect("diagnostics");
            println!(
                "{}: {} steps to t = {}, max div B {:.3e}, min rho {:.4e}, min p {:.4e}",
                out.spec.name,
                last.step,
                last.t,
                out.max_div_b(),
                out.diagnostics
                    .iter()
                    .map(|d| d.min_rho)
                    .fold(f64::INFINITY, f64::min),
                out.diagnostics
                    .iter()
                    .map(|d| d.min_p)
                    .fold(f64::INFINITY, f64::min),
            );
        }
        Command::Converge {
            run,
            resolutions,
            reference,
        } => {
            let cfg = run.config()?;
            let reference = match reference.as_str() {
                "exact" => Reference::Exact,
                n => match n.parse() {
                    Ok(n) => Reference::Fine(n),
                    Err(_) => bail!("reference must be `exact` or a resolution, got `{n}`"),
                },
            };
            let table = format_reports(&convergence_study(&cfg, &resolutions, reference)?);
            print!("{table}");
            if let Some(dir) = &cfg.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("convergence.txt"), &table)?;
            }
        }
        Command::Problems => PROBLEMS.iter().for_each(|p| println!("{p}")),
    }
    Ok(())
}
