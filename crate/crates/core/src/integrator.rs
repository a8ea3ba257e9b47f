//! Explicit Runge-Kutta time stepping with a CFL step, viscosity frozen over
//! each step, divergence cleaning and strong boundary corrections.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{
    assemble_mass, flux_divergence_rhs_into, viscous_rhs_add, ConservedField, GlmTerms, MassSolver, ViscousOptions,
};
use crate::divclean::{consistent_update, divergence_integral, glm_coefficients, CleaningConfig, CleaningMethod, DivergenceCleaner};
use crate::error::{Error, PositivityKind, Result};
use crate::fe_space::{mesh_size_field, FESpace};
use crate::mesh::Side;
use crate::physics::{ConservedState, BX, BY, MX, MY, NPHYS, RHO};
use crate::stabilization::{
    first_order_viscosity, nodal_wave_speeds, ResidualViscosity, RvParameters, SolutionHistory, Stabilization,
    StartupViscosity, ViscosityField,
};

/// Explicit Butcher tableau (strictly lower triangular `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn rk4() -> Self {
        Self {
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn forward_euler() -> Self {
        Self {
            a: vec![vec![]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.b.len();
        if r == 0 || self.a.len() != r || self.c.len() != r {
            return Err(Error::config("inconsistent Butcher tableau dimensions"));
        }
        if self.a.iter().enumerate().any(|(i, row)| row.len() != i) {
            return Err(Error::config("Butcher tableau must be explicit"));
        }
        if (self.b.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
            return Err(Error::config("Butcher weights must sum to one"));
        }
        Ok(())
    }
}

/// Minimal vector-space interface for the RK update.
pub trait RkState: Clone {
    /// self += a·x
    fn add_scaled(&mut self, a: f64, x: &Self);
}

impl RkState for Vec<f64> {
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
}

impl RkState for f64 {
    fn add_scaled(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
}

impl RkState for ConservedField {
    fn add_scaled(&mut self, a: f64, x: &Self) {
        self.axpy(a, x);
    }
}

/// U^{n+1} = U^n + τ Σ b_l K_l with K_l = f(l, W_l), W_l = U^n + τ Σ_{m<l} a_lm K_m.
pub fn rk_step<S, F>(tableau: &ButcherTableau, u: &S, tau: f64, mut f: F) -> Result<S>
where
    S: RkState,
    F: FnMut(usize, &S) -> Result<S>,
{
    let mut ks: Vec<S> = Vec::with_capacity(tableau.stages());
    for (l, row) in tableau.a.iter().enumerate() {
        let mut w = u.clone();
        for (a, k) in row.iter().zip(&ks) {
            if *a != 0.0 {
                w.add_scaled(tau * a, k);
            }
        }
        let k = f(l, &w).map_err(|e| e.context(format!("Runge-Kutta stage {}", l + 1)))?;
        ks.push(k);
    }
    let mut out = u.clone();
    for (b, k) in tableau.b.iter().zip(&ks) {
        out.add_scaled(tau * b, k);
    }
    Ok(out)
}

/// τ = CFL·min h / max λ.
pub fn cfl_timestep(h: &[f64], lambda: &[f64], cfl: f64) -> Result<f64> {
    let hmin = h.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let lmax = lambda.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(lmax > 0.0) || !lmax.is_finite() {
        return Err(Error::config("all wave speeds vanish; a static vacuum state has no CFL time step"));
    }
    if !(cfl > 0.0) || !(hmin > 0.0) {
        return Err(Error::config("CFL number and mesh size must be positive"));
    }
    Ok(cfl * hmin / lmax)
}

pub type BoundaryData = Arc<dyn Fn([f64; 2], f64) -> ConservedState + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet(BoundaryData),
    Neumann,
    Slip,
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryCondition::Periodic => "Periodic",
            BoundaryCondition::Dirichlet(_) => "Dirichlet",
            BoundaryCondition::Neumann => "Neumann",
            BoundaryCondition::Slip => "Slip",
        };
        f.write_str(s)
    }
}

/// One condition per side, indexed by `Side::index`.
#[derive(Debug, Clone)]
pub struct BoundaryConditionSet {
    sides: [BoundaryCondition; 4],
}

impl BoundaryConditionSet {
    pub fn uniform(bc: BoundaryCondition) -> Self {
        Self {
            sides: [bc.clone(), bc.clone(), bc.clone(), bc],
        }
    }

    pub fn periodic() -> Self {
        Self::uniform(BoundaryCondition::Periodic)
    }

    pub fn with(mut self, side: Side, bc: BoundaryCondition) -> Self {
        self.sides[side.index()] = bc;
        self
    }

    pub fn get(&self, side: Side) -> &BoundaryCondition {
        &self.sides[side.index()]
    }

    /// Periodic conditions must match the mesh identification exactly.
    pub fn validate(&self, space: &FESpace) -> Result<()> {
        let mesh = space.mesh();
        for &side in mesh.sides() {
            let periodic = matches!(self.get(side), BoundaryCondition::Periodic);
            if periodic != mesh.is_periodic_side(side) {
                return Err(Error::config(format!(
                    "side '{}' is {}periodic in the mesh but {}periodic in the boundary conditions",
                    side.name(),
                    if mesh.is_periodic_side(side) { "" } else { "not " },
                    if periodic { "" } else { "not " },
                )));
            }
        }
        Ok(())
    }

    pub fn viscous_options(&self) -> ViscousOptions {
        let mut opts = ViscousOptions::default();
        for side in Side::ALL {
            opts.neumann[side.index()] = matches!(self.get(side), BoundaryCondition::Neumann);
        }
        opts
    }
}

/// Strong correction after a full step: Dirichlet overwrite, then slip
/// projection m ← m − (m·n)n.
pub fn apply_boundary_conditions(space: &FESpace, u: &mut ConservedField, bcs: &BoundaryConditionSet, t: f64) {
    let coords = space.dof_coordinates();
    let mesh = space.mesh();
    for &side in mesh.sides() {
        if mesh.is_periodic_side(side) {
            continue;
        }
        match bcs.get(side) {
            BoundaryCondition::Dirichlet(data) => {
                for &i in space.side_dofs(side) {
                    let mut s = data(coords[i], t);
                    s.psi = None;
                    u.set_state(i, &s);
                }
            }
            BoundaryCondition::Slip => {
                let n = side.outward_normal();
                for &i in space.side_dofs(side) {
                    let m = [u.comp(MX)[i], u.comp(MY)[i]];
                    let mn = m[0] * n[0] + m[1] * n[1];
                    u.comp_mut(MX)[i] = m[0] - mn * n[0];
                    u.comp_mut(MY)[i] = m[1] - mn * n[1];
                }
            }
            BoundaryCondition::Neumann | BoundaryCondition::Periodic => {}
        }
    }
}

/// Momentum projection onto the plane orthogonal to `n` (unit normal).
pub fn slip_projection(m: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    let mn = m[0] * n[0] + m[1] * n[1];
    [m[0] - mn * n[0], m[1] - mn * n[1]]
}

/// Diffusive step constant used unless disabled.
pub const DEFAULT_VISCOUS_CFL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub gamma: f64,
    pub cfl: f64,
    pub stabilization: Stabilization,
    pub rv: RvParameters,
    pub startup: StartupViscosity,
    pub cleaning: CleaningConfig,
    /// Relative tolerance of the consistent mass solves.
    pub mass_tol: f64,
    /// Optional diffusive bound τ ≤ C h_i²/D_i on top of the CFL step, with
    /// D_i = μ_i max(1, 2/ρ_i, (γ−1)/ρ_i) the largest diffusivity of the
    /// viscous operator at node i.
    pub viscous_cfl: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            cfl: 0.3,
            stabilization: Stabilization::Rv,
            rv: RvParameters::default(),
            startup: StartupViscosity::FirstOrder,
            cleaning: CleaningConfig::default(),
            mass_tol: 1e-13,
            viscous_cfl: Some(DEFAULT_VISCOUS_CFL),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::config("gamma must exceed 1"));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::config("CFL number must be positive"));
        }
        if !(self.mass_tol > 0.0) {
            return Err(Error::config("mass solver tolerance must be positive"));
        }
        if self.viscous_cfl.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::config("viscous CFL number must be positive"));
        }
        self.rv.validate()?;
        self.cleaning.method.validate()
    }
}

/// min_i C h_i²/D_i over nodes with positive viscosity.
pub fn viscous_timestep(u: &ConservedField, mu: &[f64], h: &[f64], gamma: f64, c: f64) -> f64 {
    let rho = u.comp(RHO);
    (0..mu.len())
        .filter(|&i| mu[i] > 0.0)
        .map(|i| {
            let d = mu[i] * (1.0f64).max(2.0 / rho[i]).max((gamma - 1.0) / rho[i]);
            c * h[i] * h[i] / d
        })
        .fold(f64::INFINITY, f64::min)
}

/// Per-step record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub tau: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_mu: f64,
    pub div_b: f64,
    pub viscosity_evaluations: usize,
}

pub struct Solver {
    space: FESpace,
    config: SolverConfig,
    bcs: BoundaryConditionSet,
    tableau: ButcherTableau,
    mass: MassSolver,
    h: Vec<f64>,
    hmin: f64,
    rv: Option<ResidualViscosity>,
    cleaner: Option<DivergenceCleaner>,
    viscous: ViscousOptions,
    history: SolutionHistory,
    u: ConservedField,
    t: f64,
    tau: f64,
    step: usize,
    viscosity_evaluations: usize,
    last_viscosity: Option<ViscosityField>,
}

impl Solver {
    pub fn new(space: FESpace, config: SolverConfig, bcs: BoundaryConditionSet, u0: ConservedField) -> Result<Self> {
        config.validate()?;
        bcs.validate(&space)?;
        let glm = config.cleaning.method.is_glm();
        if u0.ndofs() != space.ndofs() {
            return Err(Error::Dimension {
                expected: space.ndofs(),
                got: u0.ndofs(),
            });
        }
        let u0 = match (glm, u0.has_psi()) {
            (true, false) => {
                let mut comps = u0.comps().to_vec();
                comps.push(vec![0.0; space.ndofs()]);
                ConservedField::from_components(comps)?
            }
            (false, true) => ConservedField::from_components(u0.comps()[..NPHYS].to_vec())?,
            _ => u0,
        };
        u0.check_finite()?;
        let mass = MassSolver::new(assemble_mass(&space, false)?, config.mass_tol);
        let h = mesh_size_field(&space)?;
        let hmin = h.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let rv = match config.stabilization {
            Stabilization::Rv => Some(ResidualViscosity::new(&space, config.rv)?.with_startup(config.startup)),
            _ => None,
        };
        let cleaner = match config.cleaning.method {
            CleaningMethod::Projection | CleaningMethod::Pseudo { .. } => {
                Some(DivergenceCleaner::new(&space, config.cleaning.poisson_tol)?)
            }
            _ => None,
        };
        let lambda = nodal_wave_speeds(&u0, config.gamma, space.dim())?;
        let tau = cfl_timestep(&h, &lambda, config.cfl)?;
        let mut history = SolutionHistory::new();
        history.push(0.0, u0.clone())?;
        Ok(Self {
            viscous: bcs.viscous_options(),
            space,
            config,
            bcs,
            tableau: ButcherTableau::rk4(),
            mass,
            h,
            hmin,
            rv,
            cleaner,
            history,
            u: u0,
            t: 0.0,
            tau,
            step: 0,
            viscosity_evaluations: 0,
            last_viscosity: None,
        })
    }

    pub fn space(&self) -> &FESpace {
        &self.space
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &ConservedField {
        &self.u
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    /// Step size proposed for the next advance (before clipping).
    pub fn next_timestep(&self) -> f64 {
        self.tau
    }

    pub fn mesh_size(&self) -> &[f64] {
        &self.h
    }

    pub fn viscosity_evaluations(&self) -> usize {
        self.viscosity_evaluations
    }

    /// Viscosity used by the most recent step.
    pub fn last_viscosity(&self) -> Option<&ViscosityField> {
        self.last_viscosity.as_ref()
    }

    /// Σ_i (M ρ)_i = ∫ρ_h.
    pub fn total_mass(&self) -> f64 {
        self.mass.row_sums().iter().zip(self.u.comp(RHO)).map(|(m, r)| m * r).sum()
    }

    pub fn divergence_monitor(&self) -> f64 {
        divergence_integral(&self.space, self.u.comp(BX), self.u.comp(BY))
    }

    fn viscosity(&mut self, lambda: &[f64]) -> Result<ViscosityField> {
        self.viscosity_evaluations += 1;
        match self.config.stabilization {
            Stabilization::None => Ok(ViscosityField::zeros(self.space.ndofs())),
            Stabilization::FirstOrder => {
                let mu = first_order_viscosity(&self.h, lambda, self.config.rv.c_max);
                Ok(ViscosityField {
                    mu: mu.clone(),
                    mu_low: mu.clone(),
                    mu_high: mu,
                })
            }
            Stabilization::Rv => {
                let rv = self.rv.as_ref().expect("residual viscosity is set up for RV runs");
                rv.evaluate(&self.space, &self.history, self.config.gamma, &self.h, lambda)
            }
        }
    }

    /// Advances by `tau` (or the CFL step when `None`).
    pub fn advance(&mut self, tau: Option<f64>) -> Result<StepDiagnostics> {
        let context = format!("time step {} at t = {:e}", self.step + 1, self.t);
        self.advance_inner(tau).map_err(|e| e.context(context))
    }

    fn advance_inner(&mut self, tau: Option<f64>) -> Result<StepDiagnostics> {
        let tau = tau.unwrap_or(self.tau);
        if !(tau > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        let gamma = self.config.gamma;
        let dim = self.space.dim();

        // (1) viscosity from the history ending at U^n
        let lambda = nodal_wave_speeds(&self.u, gamma, dim)?;
        let visc = self.viscosity(&lambda)?;
        let any_viscosity = visc.mu.iter().any(|&m| m > 0.0);
        let tau = match self.config.viscous_cfl {
            Some(c) if any_viscosity => tau.min(viscous_timestep(&self.u, &visc.mu, &self.h, gamma, c)),
            _ => tau,
        };

        // (2) RK solve with frozen viscosity and GLM coefficients
        let glm_data = match self.config.cleaning.method {
            CleaningMethod::Glm { c_r } => Some(glm_coefficients(&self.u, gamma, dim, &self.h, c_r)?),
            _ => None,
        };
        let glm = glm_data.as_ref().map(|(c_h, damping)| GlmTerms {
            c_h: *c_h,
            damping,
        });
        let space = &self.space;
        let mass = &self.mass;
        let viscous = &self.viscous;
        let mut rhs = ConservedField::zeros(self.u.ndofs(), self.u.has_psi());
        let mut u_new = rk_step(&self.tableau, &self.u, tau, |_, w| {
            flux_divergence_rhs_into(space, w, gamma, glm.as_ref(), &mut rhs)?;
            if any_viscosity {
                viscous_rhs_add(space, w, &visc.mu, gamma, viscous, &mut rhs)?;
            }
            let mut k = ConservedField::zeros(w.ndofs(), w.has_psi());
            mass.solve_field(&rhs, &mut k)?;
            Ok(k)
        })?;

        // (3) cleaning
        if let Some(cleaner) = &self.cleaner {
            let b = [u_new.comp(BX), u_new.comp(BY)];
            let cleaned = match self.config.cleaning.method {
                CleaningMethod::Projection => cleaner.poisson_project(b)?,
                CleaningMethod::Pseudo { steps, tau: pseudo_tau } => {
                    cleaner.pseudo_timestep_clean(b, steps, pseudo_tau.unwrap_or(self.hmin * self.hmin))?
                }
                _ => unreachable!("cleaner exists only for projection and pseudo stepping"),
            };
            u_new = consistent_update(&u_new, [&cleaned.b[0], &cleaned.b[1]], self.config.cleaning.energy);
        }

        // (4) strong boundary conditions
        let t_new = self.t + tau;
        apply_boundary_conditions(&self.space, &mut u_new, &self.bcs, t_new);
        u_new.check_finite()?;

        // (5) admissibility, new CFL step, history
        let prims = u_new.primitives(gamma)?;
        let min_rho = prims.iter().fold(f64::INFINITY, |m, w| m.min(w.rho));
        let min_p = prims.iter().fold(f64::INFINITY, |m, w| m.min(w.p));
        if !(min_p > 0.0) {
            let node = prims.iter().position(|w| !(w.p > 0.0)).unwrap_or(0);
            return Err(Error::Positivity {
                kind: PositivityKind::Pressure,
                value: prims[node].p,
                location: crate::error::Location::Node(node),
            });
        }
        let lambda_new = nodal_wave_speeds(&u_new, gamma, dim)?;
        let tau_next = cfl_timestep(&self.h, &lambda_new, self.config.cfl)?;

        self.history.push(t_new, u_new.clone())?;
        self.u = u_new;
        self.t = t_new;
        self.tau = tau_next;
        self.step += 1;
        let max_mu = visc.max();
        self.last_viscosity = Some(visc);
        Ok(StepDiagnostics {
            step: self.step,
            t: self.t,
            tau,
            min_rho,
            min_p,
            max_mu,
            div_b: self.divergence_monitor(),
            viscosity_evaluations: self.viscosity_evaluations,
        })
    }

    /// Advances to `t_final`, clipping the last step, calling `observer`
    /// after every step.
    pub fn run_until(&mut self, t_final: f64, mut observer: impl FnMut(&Solver, &StepDiagnostics) -> Result<()>) -> Result<()> {
        // steps shorter than this are absorbed into the previous one
        let slack = 1e-12 * t_final.abs().max(1.0);
        while self.t < t_final - slack {
            let remaining = t_final - self.t;
            let tau = if self.tau >= remaining - slack { remaining } else { self.tau };
            let d = self.advance(Some(tau))?;
            observer(self, &d)?;
        }
        Ok(())
    }

    /// Initial-time record (step 0).
    pub fn initial_diagnostics(&self) -> Result<StepDiagnostics> {
        let prims = self.u.primitives(self.config.gamma)?;
        Ok(StepDiagnostics {
            step: 0,
            t: self.t,
            tau: 0.0,
            min_rho: prims.iter().fold(f64::INFINITY, |m, w| m.min(w.rho)),
            min_p: prims.iter().fold(f64::INFINITY, |m, w| m.min(w.p)),
            max_mu: 0.0,
            div_b: self.divergence_monitor(),
            viscosity_evaluations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, Mesh};
    use std::f64::consts::TAU;

    #[test]
    fn cfl_examples() {
        let tau = cfl_timestep(&[0.01, 0.02], &[1.0, 2.0], 0.3).unwrap();
        assert!((tau - 0.0015).abs() < 1e-17);
        let tau2 = cfl_timestep(&[0.01, 0.02], &[1.0, 2.0], 0.6).unwrap();
        assert_eq!(tau2, 2.0 * tau);
        assert!(matches!(cfl_timestep(&[0.1], &[0.0], 0.3), Err(Error::Config(_))));
    }

    #[test]
    fn tableau_consistency() {
        let t = ButcherTableau::rk4();
        t.validate().unwrap();
        assert_eq!(t.stages(), 4);
        ButcherTableau::forward_euler().validate().unwrap();
        let mut bad = ButcherTableau::rk4();
        bad.b[0] = 0.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rk4_scalar_surrogate() {
        let t = ButcherTableau::rk4();
        let y = rk_step(&t, &1.0f64, 0.1, |_, y| Ok(-*y)).unwrap();
        let taylor = 1.0 - 0.1 + 0.005 - 0.1f64.powi(3) / 6.0 + 0.1f64.powi(4) / 24.0;
        assert!((y - taylor).abs() < 1e-15);
        assert!((y - 0.904_837_5).abs() < 1e-8);
        let zero = rk_step(&t, &vec![1.0, 2.0], 0.3, |_, y| Ok(vec![0.0; y.len()])).unwrap();
        assert_eq!(zero, vec![1.0, 2.0]);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let t = ButcherTableau::rk4();
        let err = |n: usize| {
            let tau = 1.0 / n as f64;
            let mut y = 1.0f64;
            for _ in 0..n {
                y = rk_step(&t, &y, tau, |_, y| Ok(-*y)).unwrap();
            }
            (y - (-1.0f64).exp()).abs()
        };
        let ratio = err(10) / err(20);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn slip_examples() {
        assert_eq!(slip_projection([1.0, 1.0], [0.0, 1.0]), [1.0, 0.0]);
        let s = 0.5f64.sqrt();
        let m = slip_projection([1.0, 0.0], [s, s]);
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_and_slip_corrections() {
        let line = FESpace::new(Mesh::structured(Domain::interval(0.0, 1.0), &[8], 1).unwrap(), 1).unwrap();
        let mut u = ConservedField::interpolate(&line, false, |_| {
            ConservedState::from_primitives(1.0, [0.3, 0.1], 1.0, [0.75, 1.0], 2.0)
        });
        let right: BoundaryData = Arc::new(|_, _| ConservedState::from_primitives(0.125, [0.0; 2], 0.1, [0.75, -1.0], 2.0));
        let bcs = BoundaryConditionSet::uniform(BoundaryCondition::Neumann).with(Side::Right, BoundaryCondition::Dirichlet(right));
        bcs.validate(&line).unwrap();
        apply_boundary_conditions(&line, &mut u, &bcs, 0.0);
        let r = line.side_dofs(Side::Right)[0];
        assert_eq!(u.comp(RHO)[r], 0.125);
        assert_eq!(u.comp(BY)[r], -1.0);
        assert_eq!(u.comp(RHO)[0], 1.0);

        let sq = Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[3, 3], 2).unwrap();
        let space = FESpace::new(sq, 2).unwrap();
        let mut u = ConservedField::interpolate(&space, false, |_| {
            ConservedState::from_primitives(1.0, [1.0, 1.0], 1.0, [0.0; 2], 1.4)
        });
        let bcs = BoundaryConditionSet::uniform(BoundaryCondition::Neumann).with(Side::Top, BoundaryCondition::Slip);
        apply_boundary_conditions(&space, &mut u, &bcs, 0.0);
        for &i in space.side_dofs(Side::Top) {
            assert_eq!([u.comp(MX)[i], u.comp(MY)[i]], [1.0, 0.0]);
        }
        assert!(BoundaryConditionSet::periodic().validate(&space).is_err());
    }

    fn periodic_space(n: usize, k: usize) -> FESpace {
        let m = Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[n, n], 2)
            .unwrap()
            .with_periodic([true, true])
            .unwrap();
        FESpace::new(m, k).unwrap()
    }

    #[test]
    fn constant_state_is_steady() {
        for method in ["none", "projection", "pseudo:steps=3", "glm"] {
            let space = periodic_space(4, 2);
            let s = ConservedState::from_primitives(1.3, [0.4, -0.2], 0.8, [0.3, 0.5], 5.0 / 3.0);
            let u0 = ConservedField::interpolate(&space, false, |_| s);
            let config = SolverConfig {
                gamma: 5.0 / 3.0,
                cleaning: CleaningConfig {
                    method: method.parse().unwrap(),
                    ..CleaningConfig::default()
                },
                ..SolverConfig::default()
            };
            let mut solver = Solver::new(space, config, BoundaryConditionSet::periodic(), u0).unwrap();
            for _ in 0..3 {
                solver.advance(None).unwrap();
            }
            let reference = s.to_components();
            for (c, r) in reference.iter().enumerate() {
                for v in solver.state().comp(c) {
                    assert!((v - r).abs() < 1e-13, "{method}: component {c}: {v} vs {r}");
                }
            }
            assert!(solver.last_viscosity().unwrap().mu_high.iter().all(|&m| m.abs() < 1e-13));
            assert_eq!(solver.viscosity_evaluations(), 3);
        }
    }

    #[test]
    fn smooth_run_respects_viscosity_bound_and_mass() {
        let space = periodic_space(8, 1);
        let u0 = ConservedField::interpolate(&space, false, |x| {
            ConservedState::from_primitives(1.0 + 0.5 * (TAU * (x[0] + x[1])).sin(), [1.0, 1.0], 1.0, [0.1, 0.1], 1.4)
        });
        let mut solver = Solver::new(space, SolverConfig::default(), BoundaryConditionSet::periodic(), u0).unwrap();
        let m0 = solver.total_mass();
        let mut first = true;
        solver
            .run_until(0.05, |s, d| {
                let v = s.last_viscosity().unwrap();
                if first {
                    assert_eq!(v.mu, v.mu_low);
                    first = false;
                }
                assert!(v.mu.iter().zip(&v.mu_low).all(|(m, l)| m <= l));
                assert_eq!(d.viscosity_evaluations, d.step);
                Ok(())
            })
            .unwrap();
        assert!((solver.time() - 0.05).abs() < 1e-15);
        assert!(((solver.total_mass() - m0) / m0).abs() < 1e-11);
    }

    #[test]
    fn refinement_shrinks_step() {
        let make = |n| {
            let space = periodic_space(n, 1);
            let u0 = ConservedField::interpolate(&space, false, |x| {
                ConservedState::from_primitives(1.0 + 0.2 * (TAU * x[0]).sin(), [0.5, 0.0], 1.0, [0.1, 0.0], 1.4)
            });
            Solver::new(space, SolverConfig::default(), BoundaryConditionSet::periodic(), u0).unwrap()
        };
        assert!(make(16).next_timestep() <= 0.5 * make(8).next_timestep() * (1.0 + 1e-12));
    }
}
