//! Mass matrices and the weak-form right-hand sides.
//!
//! The semi-discrete system is M dU/dt = F(U) with
//! F(U) = (F_E + F_B, ∇Φ) − (n·(F_E + F_B), Φ)_Γ − (F_V, ∇Φ) + (n·F_V, Φ)_Γn
//! plus the GLM coupling terms when hyperbolic cleaning is active. The
//! inviscid boundary integral is taken over non-periodic sides, the viscous
//! one only over sides flagged as Neumann.

use crate::error::{Error, Location, Result};
use crate::fe_space::FESpace;
use crate::linalg::{cg_solve, BandedCholesky, CgOptions, CgStats, CsrMatrix};
use crate::mesh::Side;
use crate::physics::{self, ConservedState, Flux, PrimitiveState, BX, BY, ENERGY, MX, MY, NPHYS, PSI, RHO};

/// Nodal coefficients of every conserved component over one space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    comps: Vec<Vec<f64>>,
}

impl ConservedField {
    /// Zero field with the six physical components, plus Ψ when `glm`.
    pub fn zeros(ndofs: usize, glm: bool) -> Self {
        let ncomp = if glm { NPHYS + 1 } else { NPHYS };
        Self {
            comps: vec![vec![0.0; ndofs]; ncomp],
        }
    }

    pub fn from_components(comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != NPHYS && comps.len() != NPHYS + 1 {
            return Err(Error::Dimension {
                expected: NPHYS,
                got: comps.len(),
            });
        }
        let n = comps[0].len();
        if let Some(c) = comps.iter().find(|c| c.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: c.len(),
            });
        }
        Ok(Self { comps })
    }

    /// Nodal interpolant of a state-valued function.
    pub fn interpolate(space: &FESpace, glm: bool, f: impl Fn([f64; 2]) -> ConservedState) -> Self {
        let mut u = Self::zeros(space.ndofs(), glm);
        for (i, &x) in space.dof_coordinates().iter().enumerate() {
            let mut s = f(x);
            if glm && s.psi.is_none() {
                s.psi = Some(0.0);
            }
            u.set_state(i, &s);
        }
        u
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn ndofs(&self) -> usize {
        self.comps[0].len()
    }

    pub fn has_psi(&self) -> bool {
        self.comps.len() > NPHYS
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn state(&self, i: usize) -> ConservedState {
        ConservedState {
            rho: self.comps[RHO][i],
            m: [self.comps[MX][i], self.comps[MY][i]],
            energy: self.comps[ENERGY][i],
            b: [self.comps[BX][i], self.comps[BY][i]],
            psi: self.comps.get(PSI).map(|p| p[i]),
        }
    }

    pub fn set_state(&mut self, i: usize, s: &ConservedState) {
        self.comps[RHO][i] = s.rho;
        self.comps[MX][i] = s.m[0];
        self.comps[MY][i] = s.m[1];
        self.comps[ENERGY][i] = s.energy;
        self.comps[BX][i] = s.b[0];
        self.comps[BY][i] = s.b[1];
        if let (Some(p), Some(v)) = (self.comps.get_mut(PSI), s.psi) {
            p[i] = v;
        }
    }

    pub fn fill(&mut self, value: f64) {
        for c in &mut self.comps {
            c.iter_mut().for_each(|x| *x = value);
        }
    }

    /// self += a·x
    pub fn axpy(&mut self, a: f64, x: &ConservedField) {
        for (c, xc) in self.comps.iter_mut().zip(&x.comps) {
            for (v, xv) in c.iter_mut().zip(xc) {
                *v += a * xv;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn check_finite(&self) -> Result<()> {
        for (c, comp) in self.comps.iter().enumerate() {
            if let Some(i) = comp.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { component: c, node: i });
            }
        }
        Ok(())
    }

    /// Nodal primitive variables; positivity faults carry the node index.
    pub fn primitives(&self, gamma: f64) -> Result<Vec<PrimitiveState>> {
        (0..self.ndofs())
            .map(|i| {
                let s = self.state(i);
                physics::primitives(&s, gamma).map_err(|e| at_location(e, Location::Node(i)))
            })
            .collect()
    }
}

pub(crate) fn at_location(e: Error, location: Location) -> Error {
    match e {
        Error::Positivity { kind, value, .. } => Error::Positivity { kind, value, location },
        other => other,
    }
}

/// Consistent mass matrix M_ij = ∫Φ_iΦ_j, or its row-sum lumping
/// m_i = ∫Φ_i when `lumped`.
pub fn assemble_mass(space: &FESpace, lumped: bool) -> Result<CsrMatrix> {
    let mut m = CsrMatrix::from_pattern(space.ndofs(), space.adjacency().to_vec())?;
    let quad = space.quad();
    for c in 0..space.num_cells() {
        let dofs = space.cell_dofs(c);
        for q in 0..quad.nq() {
            let w = space.jxw(c, q);
            let v = quad.values(q);
            for (a, &i) in dofs.iter().enumerate() {
                for (b, &j) in dofs.iter().enumerate() {
                    m.add(i, j, w * v[a] * v[b]);
                }
            }
        }
    }
    m.mark_symmetric(1e-12)?;
    if lumped {
        Ok(CsrMatrix::from_diagonal(&m.row_sums()))
    } else {
        Ok(m)
    }
}

/// Diagonal mass by diagonal scaling (HRZ): each element diagonal is scaled
/// to the element measure. Stays positive for every degree, unlike row-sum
/// lumping of P2 triangles whose vertex entries vanish.
pub fn assemble_scaled_diagonal_mass(space: &FESpace) -> Vec<f64> {
    let quad = space.quad();
    let n = space.nloc();
    let mut diag = vec![0.0; space.ndofs()];
    let mut local = vec![0.0; n];
    for c in 0..space.num_cells() {
        local.iter_mut().for_each(|x| *x = 0.0);
        let mut measure = 0.0;
        for q in 0..quad.nq() {
            let w = space.jxw(c, q);
            measure += w;
            for (a, &v) in quad.values(q).iter().enumerate() {
                local[a] += w * v * v;
            }
        }
        let total: f64 = local.iter().sum();
        for (&i, &l) in space.cell_dofs(c).iter().zip(&local) {
            diag[i] += l * measure / total;
        }
    }
    diag
}

/// Solves M x = rhs for an assembled mass matrix: by division when M is
/// diagonal, by banded Cholesky when the band is narrow, by
/// Jacobi-preconditioned CG otherwise.
#[derive(Debug, Clone)]
pub struct MassSolver {
    matrix: CsrMatrix,
    lumped: Option<Vec<f64>>,
    banded: Option<BandedCholesky>,
    row_sums: Vec<f64>,
    diagonal: Vec<f64>,
    opts: CgOptions,
}

impl MassSolver {
    pub fn new(matrix: CsrMatrix, tol: f64) -> Self {
        let lumped = matrix.is_diagonal().then(|| matrix.diagonal());
        let row_sums = matrix.row_sums();
        let diagonal = matrix.diagonal();
        // a direct band solve costs ~4·bw flops per row, CG ~2·nnz/n per iteration
        let n = matrix.nrows().max(1);
        let banded = (lumped.is_none() && 4 * matrix.bandwidth() <= 20 * (matrix.nnz() / n + 5))
            .then(|| BandedCholesky::factor(&matrix).ok())
            .flatten();
        Self {
            matrix,
            lumped,
            banded,
            diagonal,
            row_sums,
            opts: CgOptions {
                tol,
                ..CgOptions::default()
            },
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_lumped(&self) -> bool {
        self.lumped.is_some()
    }

    /// Row sums ∫Φ_i, used as quadrature weights for nodal sums.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<CgStats> {
        if let Some(d) = &self.lumped {
            for ((xi, r), m) in x.iter_mut().zip(rhs).zip(d) {
                *xi = r / m;
            }
            return Ok(CgStats {
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        if let Some(b) = &self.banded {
            x.copy_from_slice(rhs);
            b.solve_in_place(x);
            return Ok(CgStats {
                iterations: 0,
                relative_residual: 0.0,
            });
        }
        // Jacobi guess; P2 vertex row sums vanish, so they cannot be used here
        for ((xi, r), m) in x.iter_mut().zip(rhs).zip(&self.diagonal) {
            *xi = r / m;
        }
        cg_solve(&self.matrix, rhs, x, &self.opts)
    }

    pub fn solve_field(&self, rhs: &ConservedField, out: &mut ConservedField) -> Result<()> {
        for c in 0..rhs.ncomp() {
            self.solve(rhs.comp(c), out.comp_mut(c))
                .map_err(|e| e.context(format!("mass solve for component {}", physics::COMPONENT_NAMES[c])))?;
        }
        Ok(())
    }
}

pub fn apply_mass_inverse(m: &CsrMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let solver = MassSolver::new(m.clone(), tol);
    let mut x = vec![0.0; rhs.len()];
    solver.solve(rhs, &mut x)?;
    Ok(x)
}

/// GLM data frozen over one time step.
#[derive(Debug, Clone, Copy)]
pub struct GlmTerms<'a> {
    pub c_h: f64,
    /// Nodal damping rate c_r·c_h/h_h.
    pub damping: &'a [f64],
}

#[inline]
fn interp_state(space: &FESpace, u: &ConservedField, dofs: &[usize], vals: &[f64]) -> [f64; NPHYS] {
    let mut s = [0.0; NPHYS];
    for (c, sc) in s.iter_mut().enumerate() {
        let comp = u.comp(c);
        *sc = dofs.iter().zip(vals).map(|(&d, &v)| comp[d] * v).sum();
    }
    let _ = space;
    s
}

#[inline]
fn flux_at(s: &[f64; NPHYS], gamma: f64) -> Result<Flux> {
    let (m, b) = ([s[MX], s[MY]], [s[BX], s[BY]]);
    let w = physics::primitives_raw(s[RHO], m, s[ENERGY], b, gamma)?;
    Ok(physics::total_flux(&w, m, s[ENERGY], b))
}

/// Galerkin term: writes −(∇·(F_E + F_B), Φ_i) into `out`, integrated by
/// parts with the boundary flux on non-periodic sides. With GLM the Ψ
/// row −(c_h ∇·B + damping·Ψ, Φ_i) and the sources −(∇Ψ, Φ_i) (induction)
/// and −(B·∇Ψ, Φ_i) (energy) are added.
pub fn flux_divergence_rhs_into(
    space: &FESpace,
    u: &ConservedField,
    gamma: f64,
    glm: Option<&GlmTerms>,
    out: &mut ConservedField,
) -> Result<()> {
    if glm.is_some() && !u.has_psi() {
        return Err(Error::Contract("GLM terms requested for a field without Ψ".into()));
    }
    out.fill(0.0);
    let quad = space.quad();
    let dim = space.dim();
    let mut loc = Vec::with_capacity(space.nloc());
    let mut acc = vec![[0.0; NPHYS]; space.nloc()];
    for cell in 0..space.num_cells() {
        let dofs = space.cell_dofs(cell);
        loc.clear();
        loc.extend(dofs.iter().map(|&d| std::array::from_fn::<f64, NPHYS, _>(|c| u.comp(c)[d])));
        acc.iter_mut().for_each(|a| *a = [0.0; NPHYS]);
        for q in 0..quad.nq() {
            let vals = quad.values(q);
            let grads = space.grads(cell, q);
            let w = space.jxw(cell, q);
            let mut s = [0.0; NPHYS];
            for (l, &v) in loc.iter().zip(vals) {
                for c in 0..NPHYS {
                    s[c] += l[c] * v;
                }
            }
            let f = flux_at(&s, gamma).map_err(|e| at_location(e, Location::Cell(cell)))?;
            for (a, g) in acc.iter_mut().zip(grads) {
                for c in 0..NPHYS {
                    let mut v = f[c][0] * g[0];
                    if dim == 2 {
                        v += f[c][1] * g[1];
                    }
                    a[c] += w * v;
                }
            }
            if let Some(glm) = glm {
                let psi = u.comp(PSI);
                let mut grad_psi = [0.0; 2];
                let mut div_b = 0.0;
                let mut psi_q = 0.0;
                let mut damp_q = 0.0;
                for ((&d, g), &v) in dofs.iter().zip(grads).zip(vals) {
                    grad_psi[0] += psi[d] * g[0];
                    grad_psi[1] += psi[d] * g[1];
                    div_b += u.comp(BX)[d] * g[0] + u.comp(BY)[d] * g[1];
                    psi_q += psi[d] * v;
                    damp_q += glm.damping[d] * v;
                }
                let src_e = -(s[BX] * grad_psi[0] + s[BY] * grad_psi[1]);
                let src_psi = -(glm.c_h * div_b + damp_q * psi_q);
                for (&d, &v) in dofs.iter().zip(vals) {
                    out.comp_mut(ENERGY)[d] += w * src_e * v;
                    out.comp_mut(BX)[d] -= w * grad_psi[0] * v;
                    out.comp_mut(BY)[d] -= w * grad_psi[1] * v;
                    out.comp_mut(PSI)[d] += w * src_psi * v;
                }
            }
        }
        for (&d, a) in dofs.iter().zip(&acc) {
            for (c, v) in a.iter().enumerate() {
                out.comp_mut(c)[d] += v;
            }
        }
    }

    let nloc = space.nloc();
    let mut vals = vec![0.0; nloc];
    let mut rg = vec![[0.0; 2]; nloc];
    for facet in space.facets() {
        if space.mesh().is_periodic_side(facet.side) {
            continue;
        }
        let dofs = space.cell_dofs(facet.cell);
        let n = facet.normal;
        for (p, &w) in facet.ref_points.iter().zip(&facet.weights) {
            space.basis().eval(*p, &mut vals, &mut rg);
            let s = interp_state(space, u, dofs, &vals);
            let f = flux_at(&s, gamma).map_err(|e| at_location(e, Location::Cell(facet.cell)))?;
            for c in 0..NPHYS {
                let fn_ = f[c][0] * n[0] + f[c][1] * n[1];
                let oc = out.comp_mut(c);
                for (&d, &v) in dofs.iter().zip(&vals) {
                    oc[d] -= w * fn_ * v;
                }
            }
        }
    }
    Ok(())
}

pub fn flux_divergence_rhs(space: &FESpace, u: &ConservedField, gamma: f64, glm: Option<&GlmTerms>) -> Result<ConservedField> {
    let mut out = ConservedField::zeros(u.ndofs(), u.has_psi());
    flux_divergence_rhs_into(space, u, gamma, glm, &mut out)?;
    Ok(out)
}

/// Options of the artificial viscous term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscousOptions {
    /// Bulk viscosity λ (added as λ ∇·u I to the stress).
    pub bulk: f64,
    /// Sides on which the boundary integral (n·F_V, Φ)_Γ is assembled.
    pub neumann: [bool; 4],
}

impl Default for ViscousOptions {
    fn default() -> Self {
        Self {
            bulk: 0.0,
            neumann: [false; 4],
        }
    }
}

impl ViscousOptions {
    pub fn is_neumann(&self, side: Side) -> bool {
        self.neumann[side.index()]
    }
}

struct NodalViscousData {
    u: [Vec<f64>; 2],
    t: Vec<f64>,
}

fn nodal_viscous_data(u: &ConservedField, gamma: f64) -> Result<NodalViscousData> {
    let n = u.ndofs();
    let mut d = NodalViscousData {
        u: [vec![0.0; n], vec![0.0; n]],
        t: vec![0.0; n],
    };
    for (i, w) in u.primitives(gamma)?.into_iter().enumerate() {
        d.u[0][i] = w.u[0];
        d.u[1][i] = w.u[1];
        d.t[i] = w.t;
    }
    Ok(d)
}

/// Viscous flux F_V at a point. `gu[i][j]` = ∂_j u_i, `gb[i][j]` = ∂_j B_i.
#[allow(clippy::too_many_arguments)]
fn viscous_flux(
    mu: f64,
    bulk: f64,
    grho: [f64; 2],
    u: [f64; 2],
    gu: [[f64; 2]; 2],
    gt: [f64; 2],
    b: [f64; 2],
    gb: [[f64; 2]; 2],
) -> Flux {
    let div_u = gu[0][0] + gu[1][1];
    let mut tau = [[0.0; 2]; 2];
    let mut curl = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            tau[i][j] = mu * (gu[i][j] + gu[j][i]);
            curl[i][j] = gb[i][j] - gb[j][i];
        }
        tau[i][i] += bulk * div_u;
    }
    let mut f = [[0.0; 2]; NPHYS];
    for j in 0..2 {
        f[RHO][j] = mu * grho[j];
        f[MX][j] = tau[0][j];
        f[MY][j] = tau[1][j];
        f[ENERGY][j] = u[0] * tau[0][j] + u[1] * tau[1][j] + mu * gt[j] + mu * (b[0] * curl[0][j] + b[1] * curl[1][j]);
        f[BX][j] = mu * curl[0][j];
        f[BY][j] = mu * curl[1][j];
    }
    f
}

/// Adds −(F_V, ∇Φ_i) + (n·F_V, Φ_i)_Γn to `out`, with ν = κ = η = μ given
/// nodally. Velocity and temperature are formed at the nodes and then
/// interpolated.
pub fn viscous_rhs_add(
    space: &FESpace,
    u: &ConservedField,
    mu: &[f64],
    gamma: f64,
    opts: &ViscousOptions,
    out: &mut ConservedField,
) -> Result<()> {
    if let Some(i) = mu.iter().position(|&m| !(m >= 0.0)) {
        return Err(Error::Contract(format!("viscosity {} at node {i} is negative or not finite", mu[i])));
    }
    if mu.iter().all(|&m| m == 0.0) {
        return Ok(());
    }
    let nodal = nodal_viscous_data(u, gamma)?;
    let quad = space.quad();
    let dim = space.dim();
    // gathered per cell: mu, rho, u0, u1, T, B0, B1
    let fields: [&[f64]; 7] = [mu, u.comp(RHO), &nodal.u[0], &nodal.u[1], &nodal.t, u.comp(BX), u.comp(BY)];
    let eval = |loc: &[[f64; 7]], vals: &[f64], grads: &[[f64; 2]]| {
        let mut v = [0.0; 7];
        let mut g = [[0.0; 2]; 7];
        for ((l, &p), gr) in loc.iter().zip(vals).zip(grads) {
            for f in 0..7 {
                v[f] += l[f] * p;
                g[f][0] += l[f] * gr[0];
                g[f][1] += l[f] * gr[1];
            }
        }
        viscous_flux(v[0], opts.bulk, g[1], [v[2], v[3]], [g[2], g[3]], g[4], [v[5], v[6]], [g[5], g[6]])
    };
    let gather = |dofs: &[usize], loc: &mut Vec<[f64; 7]>| {
        loc.clear();
        loc.extend(dofs.iter().map(|&d| fields.map(|f| f[d])));
    };
    let mut loc = Vec::with_capacity(space.nloc());
    let mut acc = vec![[0.0; NPHYS]; space.nloc()];
    for cell in 0..space.num_cells() {
        let dofs = space.cell_dofs(cell);
        gather(dofs, &mut loc);
        acc.iter_mut().for_each(|a| *a = [0.0; NPHYS]);
        for q in 0..quad.nq() {
            let grads = space.grads(cell, q);
            let w = space.jxw(cell, q);
            let f = eval(&loc, quad.values(q), grads);
            for (a, g) in acc.iter_mut().zip(grads) {
                for c in 0..NPHYS {
                    let mut v = f[c][0] * g[0];
                    if dim == 2 {
                        v += f[c][1] * g[1];
                    }
                    a[c] -= w * v;
                }
            }
        }
        for (&d, a) in dofs.iter().zip(&acc) {
            for (c, v) in a.iter().enumerate() {
                out.comp_mut(c)[d] += v;
            }
        }
    }

    let nloc = space.nloc();
    let mut vals = vec![0.0; nloc];
    let mut rg = vec![[0.0; 2]; nloc];
    let mut grads = vec![[0.0; 2]; nloc];
    for facet in space.facets() {
        if !opts.is_neumann(facet.side) || space.mesh().is_periodic_side(facet.side) {
            continue;
        }
        let dofs = space.cell_dofs(facet.cell);
        let map = space.cell_map(facet.cell);
        let n = facet.normal;
        for (p, &w) in facet.ref_points.iter().zip(&facet.weights) {
            space.basis().eval(*p, &mut vals, &mut rg);
            for (g, r) in grads.iter_mut().zip(&rg) {
                *g = map.push_grad(*r);
            }
            gather(dofs, &mut loc);
            let f = eval(&loc, &vals, &grads);
            for c in 0..NPHYS {
                let fn_ = f[c][0] * n[0] + f[c][1] * n[1];
                let oc = out.comp_mut(c);
                for (&d, &v) in dofs.iter().zip(&vals) {
                    oc[d] += w * fn_ * v;
                }
            }
        }
    }
    Ok(())
}

pub fn viscous_rhs(space: &FESpace, u: &ConservedField, mu: &[f64], gamma: f64, opts: &ViscousOptions) -> Result<ConservedField> {
    let mut out = ConservedField::zeros(u.ndofs(), u.has_psi());
    viscous_rhs_add(space, u, mu, gamma, opts, &mut out)?;
    Ok(out)
}

/// Physical flux F(U_a) at every node.
pub fn nodal_fluxes(u: &ConservedField, gamma: f64) -> Result<Vec<Flux>> {
    (0..u.ndofs())
        .map(|i| {
            let s = u.state(i);
            let w = physics::primitives(&s, gamma).map_err(|e| at_location(e, Location::Node(i)))?;
            Ok(physics::total_flux(&w, s.m, s.energy, s.b))
        })
        .collect()
}
