use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::problems::Problem;
use crate::divclean::{CleaningConfig, EnergyUpdate};
use crate::error::{Error, Result};
use crate::fe_space::FESpace;
use crate::integrator::{SolverConfig, DEFAULT_VISCOUS_CFL};
use crate::mesh::Mesh;
use crate::stabilization::{RvParameters, Stabilization, StartupViscosity};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub problem: Problem,
    pub degree: usize,
    /// Cells per axis; one entry is used for both axes in 2D.
    pub cells: Vec<usize>,
    pub gamma: f64,
    pub final_time: f64,
    pub cfl: f64,
    pub viscous_cfl: Option<f64>,
    pub rv: RvParameters,
    pub startup: StartupViscosity,
    pub stabilization: Stabilization,
    pub cleaning: CleaningConfig,
    /// Allows γ different from the problem's value.
    pub allow_override: bool,
    pub output: Option<PathBuf>,
}

impl BenchmarkConfig {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            degree: 1,
            cells: vec![problem.default_cells()],
            gamma: problem.gamma(),
            final_time: problem.final_time(),
            cfl: 0.3,
            viscous_cfl: Some(DEFAULT_VISCOUS_CFL),
            rv: RvParameters::default(),
            startup: StartupViscosity::FirstOrder,
            stabilization: Stabilization::Rv,
            cleaning: CleaningConfig::default(),
            allow_override: false,
            output: None,
        }
    }

    pub fn cells_per_axis(&self) -> Result<Vec<usize>> {
        let dim = self.problem.dim();
        match (dim, self.cells.as_slice()) {
            (1, [n]) => Ok(vec![*n]),
            (2, [n]) => Ok(vec![*n, *n]),
            (2, [nx, ny]) => Ok(vec![*nx, *ny]),
            _ => Err(Error::config(format!(
                "problem '{}' is {dim}D but {} cell counts were given",
                self.problem,
                self.cells.len()
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.degree) {
            return Err(Error::config(format!("degree {} is not in 1..=3", self.degree)));
        }
        let cells = self.cells_per_axis()?;
        if cells.iter().any(|&n| n == 0) {
            return Err(Error::config("cell counts must be positive"));
        }
        if self.problem.periodic()[0] && cells.iter().any(|&n| n < 2) {
            return Err(Error::config("periodic problems need at least two cells per axis"));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::config("final time must be positive"));
        }
        if self.gamma != self.problem.gamma() && !self.allow_override {
            return Err(Error::config(format!(
                "problem '{}' uses gamma = {}; pass the unsafe override to change it",
                self.problem,
                self.problem.gamma()
            )));
        }
        self.solver_config().validate()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            gamma: self.gamma,
            cfl: self.cfl,
            viscous_cfl: self.viscous_cfl,
            stabilization: self.stabilization,
            rv: self.rv,
            startup: self.startup,
            cleaning: self.cleaning,
            ..SolverConfig::default()
        }
    }

    pub fn build_space(&self) -> Result<FESpace> {
        let mesh = Mesh::structured(self.problem.domain(), &self.cells_per_axis()?, self.problem.dim())?
            .with_periodic(self.problem.periodic())?;
        FESpace::new(mesh, self.degree)
    }

    /// Applies the keys of a TOML file on top of the current values.
    pub fn apply_file(&mut self, file: &FileConfig) -> Result<()> {
        if let Some(p) = &file.problem {
            let problem: Problem = p.parse()?;
            if problem != self.problem {
                *self = Self::new(problem);
            }
        }
        if let Some(k) = file.degree {
            self.degree = k;
        }
        if let Some(c) = &file.cells {
            self.cells = c.clone();
        }
        if let Some(t) = file.tfinal {
            self.final_time = t;
        }
        if let Some(c) = file.cfl {
            self.cfl = c;
        }
        if let Some(c) = file.viscous_cfl {
            self.viscous_cfl = (c > 0.0).then_some(c);
        }
        if let Some(g) = file.gamma {
            self.gamma = g;
        }
        if let Some(u) = file.unsafe_override {
            self.allow_override = u;
        }
        if let Some(s) = &file.stab {
            self.stabilization = s.parse()?;
        }
        if let Some(c) = &file.clean {
            self.cleaning.method = c.parse()?;
        }
        if let Some(e) = &file.energy {
            self.cleaning.energy = parse_energy(e)?;
        }
        if let Some(s) = &file.startup {
            self.startup = parse_startup(s)?;
        }
        if let Some(v) = file.c_max {
            self.rv.c_max = v;
        }
        if let Some(v) = file.c_r {
            self.rv.c_r = v;
        }
        if let Some(v) = file.c_l {
            self.rv.c_l = v;
        }
        if let Some(o) = &file.out {
            self.output = Some(o.clone());
        }
        Ok(())
    }
}

pub fn parse_energy(s: &str) -> Result<EnergyUpdate> {
    match s {
        "internal" => Ok(EnergyUpdate::PreserveInternal),
        "total" => Ok(EnergyUpdate::PreserveTotal),
        other => Err(Error::config(format!("unknown energy update '{other}' (internal|total)"))),
    }
}

pub fn parse_startup(s: &str) -> Result<StartupViscosity> {
    match s {
        "first_order" => Ok(StartupViscosity::FirstOrder),
        "zero" => Ok(StartupViscosity::Zero),
        other => Err(Error::config(format!("unknown startup viscosity '{other}' (first_order|zero)"))),
    }
}

/// Comma-separated cell counts, e.g. `40` or `40,20`.
pub fn parse_cells(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            usize::from_str(p.trim()).map_err(|_| Error::config(format!("'{p}' is not a cell count")))
        })
        .collect()
}

/// Key-value run file. Every key mirrors a command-line flag.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub degree: Option<usize>,
    pub cells: Option<Vec<usize>>,
    pub cells_list: Option<Vec<usize>>,
    pub tfinal: Option<f64>,
    pub cfl: Option<f64>,
    pub viscous_cfl: Option<f64>,
    pub gamma: Option<f64>,
    pub unsafe_override: Option<bool>,
    pub stab: Option<String>,
    pub clean: Option<String>,
    pub energy: Option<String>,
    pub startup: Option<String>,
    pub c_max: Option<f64>,
    pub c_r: Option<f64>,
    pub c_l: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }
}

impl FromStr for FileConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
