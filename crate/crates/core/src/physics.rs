//! Ideal MHD state algebra: conversions, fluxes, wave speeds, GLM source.
//!
//! Vector quantities always carry two components, also in 1D where only
//! x-derivatives are taken; the transverse components are needed for
//! planar shock tubes.

use crate::error::{Error, Location, PositivityKind, Result};

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const ENERGY: usize = 3;
pub const BX: usize = 4;
pub const BY: usize = 5;
pub const PSI: usize = 6;

/// Number of physical conserved components (ρ, m, E, B).
pub const NPHYS: usize = 6;

/// Flux of each physical component (rows) in each direction (columns).
pub type Flux = [[f64; 2]; NPHYS];

pub const COMPONENT_NAMES: [&str; 7] = ["rho", "mx", "my", "E", "Bx", "By", "psi"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState {
    pub rho: f64,
    pub m: [f64; 2],
    pub energy: f64,
    pub b: [f64; 2],
    /// GLM scalar, present only when hyperbolic cleaning is active.
    pub psi: Option<f64>,
}

impl ConservedState {
    pub fn from_components(c: &[f64]) -> Self {
        Self {
            rho: c[RHO],
            m: [c[MX], c[MY]],
            energy: c[ENERGY],
            b: [c[BX], c[BY]],
            psi: c.get(PSI).copied(),
        }
    }

    pub fn to_components(&self) -> Vec<f64> {
        let mut v = vec![self.rho, self.m[0], self.m[1], self.energy, self.b[0], self.b[1]];
        if let Some(psi) = self.psi {
            v.push(psi);
        }
        v
    }

    pub fn from_primitives(rho: f64, u: [f64; 2], p: f64, b: [f64; 2], gamma: f64) -> Self {
        let kinetic = 0.5 * rho * (u[0] * u[0] + u[1] * u[1]);
        let magnetic = 0.5 * (b[0] * b[0] + b[1] * b[1]);
        Self {
            rho,
            m: [rho * u[0], rho * u[1]],
            energy: p / (gamma - 1.0) + kinetic + magnetic,
            b,
            psi: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
    /// Temperature p/ρ.
    pub t: f64,
    /// Internal energy per unit volume.
    pub e: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub a2: f64,
    pub b: f64,
    pub cf: f64,
    pub cs: f64,
    /// Sorted eigenvalues of the flux Jacobian along the direction.
    pub lambda: [f64; 8],
}

fn positivity(kind: PositivityKind, value: f64) -> Error {
    Error::Positivity {
        kind,
        value,
        location: Location::Unknown,
    }
}

/// Primitive variables from raw conserved values.
#[inline]
pub fn primitives_raw(rho: f64, m: [f64; 2], energy: f64, b: [f64; 2], gamma: f64) -> Result<PrimitiveState> {
    if !(rho > 0.0) {
        return Err(positivity(PositivityKind::Density, rho));
    }
    let u = [m[0] / rho, m[1] / rho];
    let e = energy - 0.5 * (m[0] * u[0] + m[1] * u[1]) - 0.5 * (b[0] * b[0] + b[1] * b[1]);
    if !(e > 0.0) {
        return Err(positivity(PositivityKind::InternalEnergy, e));
    }
    let p = (gamma - 1.0) * e;
    Ok(PrimitiveState {
        rho,
        u,
        p,
        t: p / rho,
        e,
        gamma,
    })
}

pub fn primitives(s: &ConservedState, gamma: f64) -> Result<PrimitiveState> {
    primitives_raw(s.rho, s.m, s.energy, s.b, gamma)
}

/// Hydrodynamic flux: (m; m⊗u + pI; u(E+p); 0).
pub fn euler_flux(s: &ConservedState, gamma: f64) -> Result<Flux> {
    let w = primitives(s, gamma)?;
    let mut f = [[0.0; 2]; NPHYS];
    for j in 0..2 {
        f[RHO][j] = s.m[j];
        f[MX][j] = s.m[0] * w.u[j];
        f[MY][j] = s.m[1] * w.u[j];
        f[ENERGY][j] = w.u[j] * (s.energy + w.p);
    }
    f[MX][0] += w.p;
    f[MY][1] += w.p;
    Ok(f)
}

/// Maxwell stress β = −½|B|²I + B⊗B.
pub fn maxwell_stress(b: [f64; 2]) -> [[f64; 2]; 2] {
    let half = 0.5 * (b[0] * b[0] + b[1] * b[1]);
    [[b[0] * b[0] - half, b[0] * b[1]], [b[1] * b[0], b[1] * b[1] - half]]
}

/// The tensor u⊗B − B⊗u.
pub fn induction_tensor(u: [f64; 2], b: [f64; 2]) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            t[i][j] = u[i] * b[j] - b[i] * u[j];
        }
    }
    t
}

/// Magnetic flux: (0; −β; −u·β; induction). The induction row of
/// component B_i in direction j is u_j B_i − u_i B_j.
pub fn magnetic_flux(s: &ConservedState, gamma: f64) -> Result<Flux> {
    let w = primitives(s, gamma)?;
    Ok(magnetic_flux_prim(w.u, s.b))
}

fn magnetic_flux_prim(u: [f64; 2], b: [f64; 2]) -> Flux {
    let beta = maxwell_stress(b);
    let ind = induction_tensor(u, b);
    let mut f = [[0.0; 2]; NPHYS];
    for j in 0..2 {
        f[MX][j] = -beta[0][j];
        f[MY][j] = -beta[1][j];
        f[ENERGY][j] = -(u[0] * beta[0][j] + u[1] * beta[1][j]);
        f[BX][j] = ind[j][0];
        f[BY][j] = ind[j][1];
    }
    f
}

/// Combined flux F_E + F_B from conserved values and already computed
/// primitives.
#[inline]
pub fn total_flux(w: &PrimitiveState, m: [f64; 2], energy: f64, b: [f64; 2]) -> Flux {
    let u = w.u;
    let b2 = 0.5 * (b[0] * b[0] + b[1] * b[1]);
    let ptot = w.p + b2;
    let ub = u[0] * b[0] + u[1] * b[1];
    let mut f = [[0.0; 2]; NPHYS];
    for j in 0..2 {
        f[RHO][j] = m[j];
        f[MX][j] = m[0] * u[j] - b[0] * b[j];
        f[MY][j] = m[1] * u[j] - b[1] * b[j];
        f[ENERGY][j] = u[j] * (energy + ptot) - b[j] * ub;
        f[BX][j] = u[j] * b[0] - u[0] * b[j];
        f[BY][j] = u[j] * b[1] - u[1] * b[j];
    }
    f[MX][0] += ptot;
    f[MY][1] += ptot;
    f
}

/// Characteristic speeds along the unit vector `e`.
pub fn wave_speeds(s: &ConservedState, gamma: f64, e: [f64; 2]) -> Result<WaveSpeeds> {
    if !(s.rho > 0.0) {
        return Err(positivity(PositivityKind::Density, s.rho));
    }
    let u = [s.m[0] / s.rho, s.m[1] / s.rho];
    let e_int = s.energy - 0.5 * s.rho * (u[0] * u[0] + u[1] * u[1]) - 0.5 * (s.b[0] * s.b[0] + s.b[1] * s.b[1]);
    let p = (gamma - 1.0) * e_int;
    wave_speeds_prim(s.rho, u, p, s.b, gamma, e)
}

pub fn wave_speeds_prim(rho: f64, u: [f64; 2], p: f64, b: [f64; 2], gamma: f64, e: [f64; 2]) -> Result<WaveSpeeds> {
    if !(rho > 0.0) {
        return Err(positivity(PositivityKind::Density, rho));
    }
    if p < 0.0 || p.is_nan() {
        return Err(positivity(PositivityKind::Pressure, p));
    }
    let a2 = gamma * p / rho;
    let bn = (b[0] * e[0] + b[1] * e[1]) / rho.sqrt();
    let va2 = (b[0] * b[0] + b[1] * b[1]) / rho;
    let sum = a2 + va2;
    let disc = (sum * sum - 4.0 * a2 * bn * bn).max(0.0).sqrt();
    let cf = (0.5 * (sum + disc)).sqrt();
    // cf·cs = a|b_n| avoids the cancellation in (sum − disc)
    let cs = if cf > 0.0 { (a2.sqrt() * bn.abs() / cf).min(bn.abs()) } else { 0.0 };
    let un = u[0] * e[0] + u[1] * e[1];
    let ab = bn.abs();
    Ok(WaveSpeeds {
        a2,
        b: bn,
        cf,
        cs,
        lambda: [un - cf, un - ab, un - cs, un, un, un + cs, un + ab, un + cf],
    })
}

/// max |λ| over the coordinate directions of a `dim`-dimensional problem.
pub fn max_wave_speed(s: &ConservedState, gamma: f64, dim: usize) -> Result<f64> {
    let w = primitives(s, gamma)?;
    max_wave_speed_prim(w.rho, w.u, w.p, s.b, gamma, dim)
}

#[inline]
pub fn max_wave_speed_prim(rho: f64, u: [f64; 2], p: f64, b: [f64; 2], gamma: f64, dim: usize) -> Result<f64> {
    let mut lmax = 0.0f64;
    for d in 0..dim {
        let mut e = [0.0; 2];
        e[d] = 1.0;
        let w = wave_speeds_prim(rho, u, p, b, gamma, e)?;
        lmax = lmax.max(w.lambda[0].abs()).max(w.lambda[7].abs());
    }
    Ok(lmax)
}

/// GLM source −(0; 0; B·∇Ψ; ∇Ψ; 0) over all seven components.
pub fn glm_source(s: &ConservedState, grad_psi: [f64; 2]) -> Result<[f64; 7]> {
    if s.psi.is_none() {
        return Err(Error::Contract("GLM source requested without a GLM scalar".into()));
    }
    let mut g = [0.0; 7];
    g[ENERGY] = -(s.b[0] * grad_psi[0] + s.b[1] * grad_psi[1]);
    g[BX] = -grad_psi[0];
    g[BY] = -grad_psi[1];
    Ok(g)
}
