use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mhd_rv::bench::config::{parse_cells, parse_energy, parse_startup, FileConfig};
use mhd_rv::bench::{self, output, BenchmarkConfig, Problem, Quantity};
use mhd_rv::{Error, Result};

#[derive(Parser)]
#[command(name = "mhd-rv", version, about = "Continuous Galerkin ideal MHD with residual-based viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark.
    Run(RunArgs),
    /// Run a smooth benchmark on a list of meshes and print the convergence table.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Cells per axis for each mesh, e.g. 30,60,120.
        #[arg(long)]
        cells_list: Option<String>,
    },
    /// Recompute the printed convergence rates from the printed errors.
    CheckTables {
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// smooth_vortex | smooth_wave | brio_wu | orszag_tang_2d | rotor
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    /// Cells per axis: n or nx,ny.
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Diffusive step bound τ ≤ C h²/D on top of the CFL step; 0 disables it.
    #[arg(long)]
    viscous_cfl: Option<f64>,
    /// rv | first_order | none
    #[arg(long)]
    stab: Option<String>,
    /// none | projection | pseudo[:steps=S,dt=T] | glm[:cr=C]
    #[arg(long)]
    clean: Option<String>,
    /// Magnetic energy update after cleaning: internal | total
    #[arg(long)]
    energy: Option<String>,
    /// Viscosity on the first step: first_order | zero
    #[arg(long)]
    startup: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Allow γ to differ from the problem's value.
    #[arg(long)]
    unsafe_override: bool,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<(BenchmarkConfig, FileConfig)> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let name = self.problem.as_deref().or(file.problem.as_deref()).ok_or_else(|| Error::config("--problem is required"))?;
        let problem: Problem = name.parse()?;
        let mut c = BenchmarkConfig::new(problem);
        c.apply_file(&FileConfig {
            problem: None,
            ..file.clone()
        })?;
        if let Some(k) = self.degree {
            c.degree = k;
        }
        if let Some(s) = &self.cells {
            c.cells = parse_cells(s)?;
        }
        if let Some(t) = self.tfinal {
            c.final_time = t;
        }
        if let Some(v) = self.cfl {
            c.cfl = v;
        }
        if let Some(v) = self.viscous_cfl {
            c.viscous_cfl = (v > 0.0).then_some(v);
        }
        if let Some(s) = &self.stab {
            c.stabilization = s.parse()?;
        }
        if let Some(s) = &self.clean {
            c.cleaning.method = s.parse()?;
        }
        if let Some(s) = &self.energy {
            c.cleaning.energy = parse_energy(s)?;
        }
        if let Some(s) = &self.startup {
            c.startup = parse_startup(s)?;
        }
        if let Some(g) = self.gamma {
            c.gamma = g;
        }
        if self.unsafe_override {
            c.allow_override = true;
        }
        if let Some(o) = &self.out {
            c.output = Some(o.clone());
        }
        c.validate()?;
        Ok((c, file))
    }
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let (config, _) = args.resolve()?;
    let outcome = bench::run_benchmark(&config)?;
    let last = outcome.diagnostics.last().expect("initial record");
    println!(
        "{} P{} cells={:?} stab={} clean={}: t={:.6} steps={} min_rho={:.6e} min_p={:.6e} div_b={:.6e} wall={:.2}s",
        config.problem,
        config.degree,
        config.cells_per_axis()?,
        config.stabilization,
        config.cleaning.method,
        outcome.time,
        last.step,
        outcome.min_rho(),
        outcome.min_p(),
        last.div_b,
        outcome.wall_time
    );
    if let Some(r) = &outcome.errors {
        for (q, n) in &r.entries {
            println!(
                "  {:>3}  L1 {:.4e}  L2 {:.4e}  Linf {:.4e}  (relative L1 {:.4e})",
                q.name(),
                n.l1,
                n.l2,
                n.linf,
                n.relative_l1()
            );
        }
    }
    if let Some(dir) = &config.output {
        bench::write_outputs(&outcome, dir)?;
    }
    match &outcome.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => {
            eprintln!("run aborted at t = {:e}: {e}", outcome.time);
            Ok(ExitCode::from(2))
        }
    }
}

fn sweep(args: &RunArgs, cells_list: Option<&str>) -> Result<ExitCode> {
    let (config, file) = args.resolve()?;
    let cells = match (cells_list, &file.cells_list) {
        (Some(s), _) => parse_cells(s)?,
        (None, Some(c)) => c.clone(),
        (None, None) => return Err(Error::config("--cells-list is required")),
    };
    let (_, rows) = bench::sweep(&config, &cells)?;
    println!("{:>6} {:>8} {:>4} {:>12} {:>6} {:>12} {:>6}", "cells", "dofs", "q", "L1", "rate", "L2", "rate");
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    for r in rows.iter().filter(|r| r.quantity == Quantity::Density.name() || r.quantity == Quantity::Velocity.name()) {
        println!(
            "{:>6} {:>8} {:>4} {:>12.4e} {:>6} {:>12.4e} {:>6}",
            r.cells,
            r.dofs,
            r.quantity,
            r.l1,
            rate(r.rate_l1),
            r.l2,
            rate(r.rate_l2)
        );
    }
    if let Some(dir) = &config.output {
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
        output::write_convergence(&dir.join("convergence.csv"), &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn check_tables(tol: f64) -> ExitCode {
    let checks = bench::check_tables(tol);
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        println!(
            "FAIL {} {} row {}: printed {:.2}, recomputed {:.4} (mesh-halving {:.4})",
            c.problem, c.label, c.row, c.printed, c.recomputed, c.halving
        );
    }
    println!("{} of {} printed rates reproduced within {tol}", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep { run, cells_list } => sweep(run, cells_list.as_deref()),
        Command::CheckTables { tol } => Ok(check_tables(*tol)),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
