//! Residual-based artificial viscosity.
//!
//! μ_i = min(μ^L_i, μ^H_i) with the first-order floor μ^L_i = C_max h_i λ_i
//! and the high-order part μ^H_i = C_R h_i² R̃_i, where R̃ is the largest
//! normalized residual over the physical components.

use std::collections::VecDeque;

use crate::assembly::{assemble_mass, at_location, ConservedField, MassSolver};
use crate::error::{Error, Location, Result};
use crate::fe_space::FESpace;
use crate::physics::{self, Flux, NPHYS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvParameters {
    pub c_max: f64,
    pub c_r: f64,
    pub c_l: f64,
    pub epsilon: f64,
}

impl Default for RvParameters {
    fn default() -> Self {
        Self {
            c_max: 0.5,
            c_r: 1.0,
            c_l: 0.4,
            epsilon: 2.2e-16,
        }
    }
}

impl RvParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_max > 0.0) {
            return Err(Error::config("C_max must be positive"));
        }
        if !(self.c_r > 0.0) {
            return Err(Error::config("C_R must be positive"));
        }
        if !(self.c_l > 0.0 && self.c_l < 1.0) {
            return Err(Error::config("C_l must lie in (0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Which viscosity the solver adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    /// Residual-based viscosity capped by the first-order viscosity.
    Rv,
    /// First-order viscosity only.
    FirstOrder,
    /// Plain Galerkin.
    None,
}

impl std::str::FromStr for Stabilization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rv" => Ok(Stabilization::Rv),
            "first_order" => Ok(Stabilization::FirstOrder),
            "none" | "galerkin" => Ok(Stabilization::None),
            other => Err(Error::config(format!("unknown stabilization '{other}'"))),
        }
    }
}

impl std::fmt::Display for Stabilization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stabilization::Rv => "rv",
            Stabilization::FirstOrder => "first_order",
            Stabilization::None => "none",
        })
    }
}

/// Viscosity used on the very first step, before any history exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartupViscosity {
    FirstOrder,
    Zero,
}

/// Nodal viscosity with both branches of the blend kept for diagnostics.
/// Mass diffusion, heat conduction and resistivity all equal μ.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityField {
    pub mu: Vec<f64>,
    pub mu_low: Vec<f64>,
    pub mu_high: Vec<f64>,
}

impl ViscosityField {
    pub fn zeros(n: usize) -> Self {
        Self {
            mu: vec![0.0; n],
            mu_low: vec![0.0; n],
            mu_high: vec![0.0; n],
        }
    }

    pub fn nu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kappa(&self) -> &[f64] {
        &self.mu
    }

    pub fn eta(&self) -> &[f64] {
        &self.mu
    }

    pub fn max(&self) -> f64 {
        self.mu.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Up to three past solutions with their times, newest last.
#[derive(Debug, Clone, Default)]
pub struct SolutionHistory {
    snaps: VecDeque<(f64, ConservedField)>,
}

impl SolutionHistory {
    pub const CAPACITY: usize = 3;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, u: ConservedField) -> Result<()> {
        if let Some((last, _)) = self.snaps.back() {
            if !(t > *last) {
                return Err(Error::Contract(format!("history time {t} does not follow {last}")));
            }
        }
        if self.snaps.len() == Self::CAPACITY {
            self.snaps.pop_front();
        }
        self.snaps.push_back((t, u));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snaps.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snaps.iter().map(|(t, _)| *t).collect()
    }

    pub fn latest(&self) -> Option<&ConservedField> {
        self.snaps.back().map(|(_, u)| u)
    }

    pub fn get(&self, k: usize) -> &ConservedField {
        &self.snaps[k].1
    }

    /// Nodal BDF time derivative of component `c` at the newest time:
    /// variable-step BDF2 with three snapshots, BDF1 with two.
    pub fn time_derivative(&self, c: usize) -> Result<Vec<f64>> {
        let times = self.times();
        let comps: Vec<&[f64]> = self.snaps.iter().map(|(_, u)| u.comp(c)).collect();
        bdf(&times, &comps)
    }
}

/// Backward difference approximation of dq/dt at the last of `times`.
pub fn bdf(times: &[f64], values: &[&[f64]]) -> Result<Vec<f64>> {
    match times.len() {
        2 => {
            let tau = times[1] - times[0];
            Ok(values[1].iter().zip(values[0]).map(|(a, b)| (a - b) / tau).collect())
        }
        3 => {
            let tau = times[2] - times[1];
            let r = tau / (times[1] - times[0]);
            let c1 = (1.0 + 2.0 * r) / (1.0 + r);
            let c2 = r * r / (1.0 + r);
            Ok((0..values[2].len())
                .map(|i| (c1 * (values[2][i] - values[1][i]) - c2 * (values[1][i] - values[0][i])) / tau)
                .collect())
        }
        n => Err(Error::Contract(format!("BDF needs two or three snapshots, got {n}"))),
    }
}

/// μ^L_i = C_max h_i λ_i.
pub fn first_order_viscosity(h: &[f64], lambda_max: &[f64], c_max: f64) -> Vec<f64> {
    h.iter().zip(lambda_max).map(|(h, l)| c_max * h * l).collect()
}

/// n(w)_i = S̄(w)(1 − C_l (local jump over I(i))/(global jump)), with
/// S̄(w) = max|w − mean(w)| and the arithmetic nodal mean.
pub fn normalization(w: &[f64], adjacency: &[Vec<usize>], c_l: f64) -> Vec<f64> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    // deviations are measured from w[0] so that adding a constant to w
    // leaves every intermediate quantity unchanged
    let w0 = w[0];
    let mean = w.iter().map(|v| v - w0).sum::<f64>() / n as f64;
    let sbar = w.iter().fold(0.0f64, |m, v| m.max(((v - w0) - mean).abs()));
    let (lo, hi) = w.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let global = hi - lo;
    if !(global > 0.0) {
        return vec![((1.0 - c_l) * sbar).abs(); n];
    }
    adjacency
        .iter()
        .map(|adj| {
            let (a, b) = adj
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &j| (a.min(w[j]), b.max(w[j])));
            sbar * (1.0 - c_l * (b - a) / global)
        })
        .collect()
}

/// R̃_i = max over components of R(q)_i n(q)_i / (n(q)_i² + ε).
pub fn normalized_residual(residuals: &[Vec<f64>], norms: &[Vec<f64>], epsilon: f64) -> Vec<f64> {
    let n = residuals.first().map_or(0, |r| r.len());
    let mut out = vec![0.0f64; n];
    for (r, nq) in residuals.iter().zip(norms) {
        for i in 0..n {
            let ratio = r[i] * nq[i] / (nq[i] * nq[i] + epsilon);
            out[i] = out[i].max(ratio);
        }
    }
    out
}

/// μ = min(μ^L, C_R h² R̃).
pub fn blend_viscosity(mu_low: &[f64], rtilde: &[f64], h: &[f64], c_r: f64) -> ViscosityField {
    let mu_high: Vec<f64> = rtilde.iter().zip(h).map(|(r, h)| c_r * h * h * r).collect();
    let mu = mu_low.iter().zip(&mu_high).map(|(l, hi)| l.min(*hi)).collect();
    ViscosityField {
        mu,
        mu_low: mu_low.to_vec(),
        mu_high,
    }
}

/// Nodal λ_max over the coordinate directions; Ψ is ignored.
pub fn nodal_wave_speeds(u: &ConservedField, gamma: f64, dim: usize) -> Result<Vec<f64>> {
    (0..u.ndofs())
        .map(|i| {
            let s = u.state(i);
            let w = physics::primitives(&s, gamma).map_err(|e| at_location(e, Location::Node(i)))?;
            physics::max_wave_speed_prim(w.rho, w.u, w.p, s.b, gamma, dim).map_err(|e| at_location(e, Location::Node(i)))
        })
        .collect()
}

enum Projector {
    Lumped(Vec<f64>),
    Consistent(MassSolver),
}

/// Computes residuals and the blended viscosity for one space. The residual
/// projection is lumped for P1/P3 and consistent for P2.
pub struct ResidualViscosity {
    params: RvParameters,
    projector: Projector,
    startup: StartupViscosity,
}

impl ResidualViscosity {
    pub fn new(space: &FESpace, params: RvParameters) -> Result<Self> {
        params.validate()?;
        let projector = if space.degree() == 2 {
            Projector::Consistent(MassSolver::new(assemble_mass(space, false)?, 1e-10))
        } else {
            Projector::Lumped(assemble_mass(space, true)?.diagonal())
        };
        Ok(Self {
            params,
            projector,
            startup: StartupViscosity::FirstOrder,
        })
    }

    pub fn with_startup(mut self, startup: StartupViscosity) -> Self {
        self.startup = startup;
        self
    }

    pub fn params(&self) -> &RvParameters {
        &self.params
    }

    /// Nodal R(q) for every physical component from the BDF derivative and
    /// the divergence of the nodally interpolated flux. The absolute value
    /// is taken at quadrature points, before projection.
    pub fn component_residuals(&self, space: &FESpace, dqdt: &[Vec<f64>], fluxes: &[Flux]) -> Result<Vec<Vec<f64>>> {
        let n = space.ndofs();
        let quad = space.quad();
        let dim = space.dim();
        let mut acc = vec![vec![0.0; n]; NPHYS];
        let mut strong = [0.0; NPHYS];
        for cell in 0..space.num_cells() {
            let dofs = space.cell_dofs(cell);
            for q in 0..quad.nq() {
                let vals = quad.values(q);
                let grads = space.grads(cell, q);
                let w = space.jxw(cell, q);
                strong.iter_mut().for_each(|s| *s = 0.0);
                for ((&d, &v), g) in dofs.iter().zip(vals).zip(grads) {
                    let f = &fluxes[d];
                    for c in 0..NPHYS {
                        let mut div = f[c][0] * g[0];
                        if dim == 2 {
                            div += f[c][1] * g[1];
                        }
                        strong[c] += dqdt[c][d] * v + div;
                    }
                }
                for c in 0..NPHYS {
                    let a = w * strong[c].abs();
                    for (&d, &v) in dofs.iter().zip(vals) {
                        acc[c][d] += a * v;
                    }
                }
            }
        }
        match &self.projector {
            Projector::Lumped(m) => {
                for r in acc.iter_mut() {
                    for (x, mi) in r.iter_mut().zip(m) {
                        *x /= mi;
                    }
                }
                Ok(acc)
            }
            Projector::Consistent(solver) => {
                let mut out = vec![vec![0.0; n]; NPHYS];
                for (r, o) in acc.iter().zip(out.iter_mut()) {
                    solver.solve(r, o).map_err(|e| e.context("residual projection"))?;
                    // the consistent projection of a nonnegative function can
                    // dip below zero near steep gradients
                    o.iter_mut().for_each(|x| *x = x.max(0.0));
                }
                Ok(out)
            }
        }
    }

    /// Viscosity at the newest time level of `history`.
    pub fn evaluate(
        &self,
        space: &FESpace,
        history: &SolutionHistory,
        gamma: f64,
        h: &[f64],
        lambda: &[f64],
    ) -> Result<ViscosityField> {
        let mu_low = first_order_viscosity(h, lambda, self.params.c_max);
        let u = history
            .latest()
            .ok_or_else(|| Error::Contract("viscosity requested with empty history".into()))?;
        if history.len() < 2 {
            let mu = match self.startup {
                StartupViscosity::FirstOrder => mu_low.clone(),
                StartupViscosity::Zero => vec![0.0; mu_low.len()],
            };
            return Ok(ViscosityField {
                mu,
                mu_high: mu_low.clone(),
                mu_low,
            });
        }
        let dqdt = (0..NPHYS).map(|c| history.time_derivative(c)).collect::<Result<Vec<_>>>()?;
        let fluxes = crate::assembly::nodal_fluxes(u, gamma)?;
        let residuals = self.component_residuals(space, &dqdt, &fluxes)?;
        let norms: Vec<Vec<f64>> = (0..NPHYS)
            .map(|c| normalization(u.comp(c), space.adjacency(), self.params.c_l))
            .collect();
        let rtilde = normalized_residual(&residuals, &norms, self.params.epsilon);
        Ok(blend_viscosity(&mu_low, &rtilde, h, self.params.c_r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, Mesh};
    use crate::physics::ConservedState;
    use proptest::prelude::*;

    fn path_adjacency(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(n - 1);
                (lo..=hi).collect()
            })
            .collect()
    }

    #[test]
    fn first_order_examples() {
        assert_eq!(first_order_viscosity(&[0.1, 0.2], &[0.0, 0.0], 0.5), vec![0.0, 0.0]);
        assert!((first_order_viscosity(&[0.01], &[2.0], 0.5)[0] - 0.01).abs() < 1e-17);
        let a = first_order_viscosity(&[0.03, 0.07], &[1.3, 2.9], 0.5);
        let b = first_order_viscosity(&[0.06, 0.14], &[1.3, 2.9], 0.5);
        assert_eq!(b, a.iter().map(|x| 2.0 * x).collect::<Vec<_>>());
    }

    #[test]
    fn normalization_examples() {
        let adj = path_adjacency(4);
        assert_eq!(normalization(&[3.0; 4], &adj, 0.4), vec![0.0; 4]);
        // node 2 sees {1, 0, 2}
        let w = [0.0, 1.0, 0.0, 2.0];
        let n = normalization(&w, &adj, 0.4);
        assert!((n[2] - 0.75).abs() < 1e-15);
        // isolated node with no local jump
        let adj1: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![3]];
        let n = normalization(&w, &adj1, 0.4);
        assert!(n.iter().all(|&v| (v - 1.25).abs() < 1e-15));
    }

    #[test]
    fn normalized_residual_examples() {
        assert_eq!(normalized_residual(&[vec![0.0; 3]], &[vec![1.0; 3]], 2.2e-16), vec![0.0; 3]);
        let r = normalized_residual(&[vec![0.0, 2.0], vec![1.0, 0.0]], &[vec![1.0, 1.0], vec![2.0, 1.0]], 0.0);
        assert_eq!(r, vec![0.5, 2.0]);
        let r = normalized_residual(&[vec![1.0]], &[vec![1.0]], 2.2e-16);
        assert!((r[0] - 1.0 / (1.0 + 2.2e-16)).abs() < 1e-16);
        // a zero normalization does not divide by zero
        let r = normalized_residual(&[vec![5.0]], &[vec![0.0]], 2.2e-16);
        assert_eq!(r, vec![0.0]);
    }

    #[test]
    fn blend_examples() {
        let v = blend_viscosity(&[0.01, 0.01], &[0.0, 1e12], &[0.01, 0.01], 1.0);
        assert_eq!(v.mu, vec![0.0, 0.01]);
        let v = blend_viscosity(&[0.01], &[50.0], &[0.01], 1.0);
        assert!((v.mu_high[0] - 5e-3).abs() < 1e-17);
        assert!((v.mu[0] - 5e-3).abs() < 1e-17);
    }

    #[test]
    fn bdf_examples() {
        let tau = 0.1;
        let q = |t: f64| t * t;
        let vals: Vec<Vec<f64>> = [0.0, tau, 2.0 * tau].iter().map(|&t| vec![q(t)]).collect();
        let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        let d2 = bdf(&[0.0, tau, 2.0 * tau], &refs).unwrap();
        assert!((d2[0] - 4.0 * tau).abs() < 1e-14);
        let d1 = bdf(&[tau, 2.0 * tau], &refs[1..]).unwrap();
        assert!(((d1[0] - 4.0 * tau).abs() - tau).abs() < 1e-14);
        // variable steps: exact for quadratics
        let ts = [0.0, 0.1, 0.25];
        let vals: Vec<Vec<f64>> = ts.iter().map(|&t| vec![1.0 + 2.0 * t - 3.0 * t * t]).collect();
        let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        let d = bdf(&ts, &refs).unwrap();
        assert!((d[0] - (2.0 - 6.0 * 0.25)).abs() < 1e-13);
        assert!(bdf(&[0.0], &refs[..1]).is_err());
    }

    #[test]
    fn history_rotation() {
        let mut h = SolutionHistory::new();
        for k in 0..5 {
            h.push(k as f64, ConservedField::zeros(2, false)).unwrap();
        }
        assert_eq!(h.times(), vec![2.0, 3.0, 4.0]);
        assert!(h.push(4.0, ConservedField::zeros(2, false)).is_err());
    }

    fn space_1d(n: usize, k: usize) -> FESpace {
        let m = Mesh::structured(Domain::interval(0.0, 1.0), &[n], 1).unwrap().with_periodic([true, false]).unwrap();
        FESpace::new(m, k).unwrap()
    }

    #[test]
    fn steady_constant_state_has_zero_residual() {
        for k in 1..=3 {
            let space = space_1d(8, k);
            let s = ConservedState::from_primitives(1.0, [0.5, 0.1], 1.0, [0.3, 0.2], 1.4);
            let u = ConservedField::interpolate(&space, false, |_| s);
            let mut h = SolutionHistory::new();
            for t in [0.0, 0.1, 0.25] {
                h.push(t, u.clone()).unwrap();
            }
            let rv = ResidualViscosity::new(&space, RvParameters::default()).unwrap();
            let hh = vec![0.1; space.ndofs()];
            let lambda = nodal_wave_speeds(&u, 1.4, 1).unwrap();
            let v = rv.evaluate(&space, &h, 1.4, &hh, &lambda).unwrap();
            assert!(v.mu.iter().all(|&m| m.abs() < 1e-12), "k={k}");
        }
    }

    #[test]
    fn frozen_field_with_no_flux_has_zero_residual() {
        let space = space_1d(6, 1);
        let rv = ResidualViscosity::new(&space, RvParameters::default()).unwrap();
        let n = space.ndofs();
        let zeros = vec![vec![0.0; n]; NPHYS];
        let r = rv.component_residuals(&space, &zeros, &vec![[[0.0; 2]; NPHYS]; n]).unwrap();
        assert!(r.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn startup_uses_first_order_viscosity() {
        let space = space_1d(6, 1);
        let u = ConservedField::interpolate(&space, false, |x| {
            ConservedState::from_primitives(1.0 + 0.5 * x[0], [0.0; 2], 1.0, [0.75, 1.0], 2.0)
        });
        let mut h = SolutionHistory::new();
        h.push(0.0, u.clone()).unwrap();
        let rv = ResidualViscosity::new(&space, RvParameters::default()).unwrap();
        let hh = vec![0.05; space.ndofs()];
        let lambda = nodal_wave_speeds(&u, 2.0, 1).unwrap();
        let v = rv.evaluate(&space, &h, 2.0, &hh, &lambda).unwrap();
        assert_eq!(v.mu, v.mu_low);
        let zero = ResidualViscosity::new(&space, RvParameters::default())
            .unwrap()
            .with_startup(StartupViscosity::Zero);
        assert!(zero.evaluate(&space, &h, 2.0, &hh, &lambda).unwrap().mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn parameter_validation() {
        assert!(RvParameters::default().validate().is_ok());
        for bad in [
            RvParameters { c_l: 1.0, ..Default::default() },
            RvParameters { c_max: 0.0, ..Default::default() },
            RvParameters { c_r: -1.0, ..Default::default() },
            RvParameters { epsilon: 0.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    fn field_and_adjacency() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<usize>>)> {
        (3usize..30).prop_flat_map(|n| (proptest::collection::vec(-10.0f64..10.0, n), Just(path_adjacency(n))))
    }

    proptest! {
        #[test]
        fn normalization_shift_invariance((w, adj) in field_and_adjacency(), c in -100.0f64..100.0) {
            // shift by an exactly representable constant so the comparison can be exact
            let c = (c * 8.0).round() / 8.0;
            let w: Vec<f64> = w.iter().map(|x| (x * 1024.0).round() / 1024.0).collect();
            let shifted: Vec<f64> = w.iter().map(|x| x + c).collect();
            prop_assert_eq!(normalization(&w, &adj, 0.4), normalization(&shifted, &adj, 0.4));
        }

        #[test]
        fn normalization_homogeneity((w, adj) in field_and_adjacency(), c in -50.0f64..50.0) {
            prop_assume!(c.abs() > 1e-3);
            let a = normalization(&w, &adj, 0.4);
            let b = normalization(&w.iter().map(|x| c * x).collect::<Vec<_>>(), &adj, 0.4);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((y - c.abs() * x).abs() <= 1e-14 * (c.abs() * x.abs()).max(1e-300) * 4.0);
            }
        }

        #[test]
        fn normalization_bracket((w, adj) in field_and_adjacency(), c_l in 0.01f64..0.99) {
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let sbar = w.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
            for v in normalization(&w, &adj, c_l) {
                prop_assert!(v >= (1.0 - c_l) * sbar * (1.0 - 1e-14) && v <= sbar * (1.0 + 1e-14));
            }
        }

        #[test]
        fn guarded_ratio_scaling(r in 1e-3f64..10.0, n in 1e-4f64..10.0, c in 1e-2f64..1e2) {
            let a = normalized_residual(&[vec![r]], &[vec![n]], 2.2e-16)[0];
            let b = normalized_residual(&[vec![c * r]], &[vec![c * n]], 2.2e-16)[0];
            prop_assert!((a - b).abs() <= 1e-8 * a);
        }

        #[test]
        fn blend_is_bounded_by_floor(
            low in proptest::collection::vec(0.0f64..1.0, 10),
            rt in proptest::collection::vec(0.0f64..1e6, 10),
        ) {
            let h = vec![0.01; 10];
            let v = blend_viscosity(&low, &rt, &h, 1.0);
            for i in 0..10 {
                prop_assert!(v.mu[i] >= 0.0 && v.mu[i] <= low[i]);
            }
        }
    }
}
