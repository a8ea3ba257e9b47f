//! Benchmark problems and the run harness.

pub mod config;
pub mod norms;
pub mod output;
pub mod problems;
pub mod tables;

use std::path::Path;
use std::time::Instant;

pub use config::{BenchmarkConfig, FileConfig};
pub use norms::{error_norms, ErrorReport, Norms, Quantity};
pub use output::ConvergenceRow;
pub use problems::Problem;
pub use tables::{check_tables, convergence_rate, RateCheck};

use crate::assembly::ConservedField;
use crate::error::{Error, Result};
use crate::fe_space::FESpace;
use crate::integrator::{Solver, StepDiagnostics};

/// Result of one run. When the solver aborts, `state` is the last accepted
/// step and `failure` holds the error.
#[derive(Debug)]
pub struct RunOutcome {
    pub config: BenchmarkConfig,
    pub space: FESpace,
    pub state: ConservedField,
    pub time: f64,
    pub diagnostics: Vec<StepDiagnostics>,
    pub errors: Option<ErrorReport>,
    pub failure: Option<Error>,
    pub wall_time: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Largest ratio μ/μ^L seen over all steps (RV runs only).
    pub max_viscosity_ratio: f64,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn min_rho(&self) -> f64 {
        self.diagnostics.iter().fold(f64::INFINITY, |m, d| m.min(d.min_rho))
    }

    pub fn min_p(&self) -> f64 {
        self.diagnostics.iter().fold(f64::INFINITY, |m, d| m.min(d.min_p))
    }
}

pub fn initial_field(config: &BenchmarkConfig, space: &FESpace) -> ConservedField {
    let (problem, gamma) = (config.problem, config.gamma);
    ConservedField::interpolate(space, false, |x| problem.initial_condition(x, gamma))
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<RunOutcome> {
    config.validate()?;
    let space = config.build_space()?;
    let u0 = initial_field(config, &space);
    let bcs = config.problem.boundary_conditions(config.gamma);
    let mut solver = Solver::new(space, config.solver_config(), bcs, u0)?;
    let initial_mass = solver.total_mass();
    let mut diagnostics = vec![solver.initial_diagnostics()?];
    let mut max_ratio: f64 = 0.0;
    let start = Instant::now();
    let result = solver.run_until(config.final_time, |s, d| {
        diagnostics.push(d.clone());
        if let Some(v) = s.last_viscosity() {
            for (m, l) in v.mu.iter().zip(&v.mu_low) {
                if *l > 0.0 {
                    max_ratio = max_ratio.max(m / l);
                }
            }
        }
        Ok(())
    });
    let wall_time = start.elapsed().as_secs_f64();
    let failure = result.err();
    let errors = if failure.is_none() && config.problem.has_exact_solution() {
        let (problem, gamma, t) = (config.problem, config.gamma, solver.time());
        let mut r = error_norms(solver.space(), solver.state(), gamma, t, |x| problem.exact_solution(x, t, gamma))?;
        r.wall_time = wall_time;
        Some(r)
    } else {
        None
    };
    let final_mass = solver.total_mass();
    Ok(RunOutcome {
        config: config.clone(),
        space: solver.space().clone(),
        state: solver.state().clone(),
        time: solver.time(),
        diagnostics,
        errors,
        failure,
        wall_time,
        initial_mass,
        final_mass,
        max_viscosity_ratio: max_ratio,
    })
}

/// Writes the time series, final fields and (for smooth problems) errors.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
    output::write_timeseries(&dir.join("timeseries.csv"), &outcome.diagnostics)?;
    let title = format!(
        "{} P{} t={:.16e}{}",
        outcome.config.problem,
        outcome.config.degree,
        outcome.time,
        if outcome.completed() { "" } else { " (last good step)" }
    );
    output::write_fields(dir, &outcome.space, &outcome.state, outcome.config.gamma, &title)?;
    if let Some(r) = &outcome.errors {
        output::write_errors(&dir.join("errors.csv"), r)?;
    }
    Ok(())
}

/// Rows of a convergence table, rates computed from the DOF counts.
pub fn convergence_rows(cells: &[usize], reports: &[ErrorReport], dim: usize) -> Vec<ConvergenceRow> {
    let mut rows = Vec::new();
    for (i, (n, r)) in cells.iter().zip(reports).enumerate() {
        for (q, e) in &r.entries {
            let prev = i.checked_sub(1).map(|j| (&reports[j], reports[j].get(*q)));
            rows.push(ConvergenceRow {
                cells: *n,
                dofs: r.dofs,
                quantity: q.name(),
                l1: e.l1,
                l2: e.l2,
                rate_l1: prev.and_then(|(p, pe)| convergence_rate(pe.l1, e.l1, p.dofs, r.dofs, dim)),
                rate_l2: prev.and_then(|(p, pe)| convergence_rate(pe.l2, e.l2, p.dofs, r.dofs, dim)),
            });
        }
    }
    rows
}

/// Runs `config` on each mesh of `cells`. Fails on the first aborted run.
pub fn sweep(config: &BenchmarkConfig, cells: &[usize]) -> Result<(Vec<RunOutcome>, Vec<ConvergenceRow>)> {
    if !config.problem.has_exact_solution() {
        return Err(Error::config(format!("problem '{}' has no exact solution to sweep against", config.problem)));
    }
    let mut outcomes = Vec::new();
    for &n in cells {
        let mut c = config.clone();
        c.cells = vec![n];
        let o = run_benchmark(&c)?;
        if let Some(e) = &o.failure {
            return Err(Error::config(format!("run on {n} cells aborted at t = {:e}: {e}", o.time)));
        }
        outcomes.push(o);
    }
    let reports: Vec<ErrorReport> = outcomes.iter().filter_map(|o| o.errors.clone()).collect();
    let rows = convergence_rows(cells, &reports, config.problem.dim());
    Ok((outcomes, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divclean::CleaningMethod;

    #[test]
    fn short_wave_run_writes_everything() {
        let mut c = BenchmarkConfig::new(Problem::SmoothWave);
        c.cells = vec![6];
        c.final_time = 0.02;
        c.cleaning.method = CleaningMethod::Glm { c_r: 0.3 };
        let o = run_benchmark(&c).unwrap();
        assert!(o.completed());
        assert!((o.time - 0.02).abs() < 1e-14);
        assert_eq!(o.diagnostics[0].step, 0);
        assert!(o.errors.is_some());
        assert!(o.max_viscosity_ratio <= 1.0 + 1e-12);
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&o, dir.path()).unwrap();
        for name in ["timeseries.csv", "errors.csv", "final_fields.csv", "final_fields.vtk"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let ts = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
        assert_eq!(ts.lines().count(), o.diagnostics.len() + 1);
    }

    #[test]
    fn reruns_are_bitwise_identical() {
        let mut c = BenchmarkConfig::new(Problem::BrioWu);
        c.cells = vec![50];
        c.final_time = 0.02;
        let a = run_benchmark(&c).unwrap();
        let b = run_benchmark(&c).unwrap();
        assert_eq!(output::timeseries_csv(&a.diagnostics), output::timeseries_csv(&b.diagnostics));
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn rows_carry_dof_rates() {
        let report = |dofs: usize, e: f64| ErrorReport {
            time: 0.0,
            dofs,
            measure: 1.0,
            wall_time: 0.0,
            entries: Quantity::ALL
                .into_iter()
                .map(|q| {
                    (
                        q,
                        Norms {
                            l1: e,
                            l2: e,
                            ..Norms::default()
                        },
                    )
                })
                .collect(),
        };
        let rows = convergence_rows(&[30, 60], &[report(961, 6.90e-3), report(3721, 1.73e-3)], 2);
        assert_eq!(rows.len(), 8);
        assert!(rows[0].rate_l1.is_none());
        assert!((rows[4].rate_l1.unwrap() - 2.04377).abs() < 1e-5);
    }
}
