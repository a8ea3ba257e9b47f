use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrator::{BoundaryCondition, BoundaryConditionSet};
use crate::mesh::{Domain, Side};
use crate::physics::ConservedState;

/// Vortex strength of the smooth vortex.
pub const VORTEX_STRENGTH: f64 = 5.389489439;
/// Background pressure of the smooth vortex. With the given strength the
/// centre pressure p₀ + δp(0) is about 5e-12.
pub const VORTEX_BACKGROUND_PRESSURE: f64 = 1.0;
pub const ROTOR_U0: f64 = 2.0;
pub const ROTOR_R0: f64 = 0.1;
pub const ROTOR_R1: f64 = 0.115;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    SmoothVortex,
    SmoothWave,
    BrioWu,
    OrszagTang,
    Rotor,
}

impl Problem {
    pub const ALL: [Problem; 5] = [
        Problem::SmoothVortex,
        Problem::SmoothWave,
        Problem::BrioWu,
        Problem::OrszagTang,
        Problem::Rotor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::SmoothVortex => "smooth_vortex",
            Problem::SmoothWave => "smooth_wave",
            Problem::BrioWu => "brio_wu",
            Problem::OrszagTang => "orszag_tang_2d",
            Problem::Rotor => "rotor",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Problem::BrioWu => 1,
            _ => 2,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            Problem::SmoothVortex => Domain::rectangle([-10.0, -10.0], [10.0, 10.0]),
            Problem::SmoothWave => Domain::rectangle([0.0, 0.0], [2.0 * PI, 2.0 * PI]),
            Problem::BrioWu => Domain::interval(0.0, 1.0),
            Problem::OrszagTang | Problem::Rotor => Domain::rectangle([0.0, 0.0], [1.0, 1.0]),
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            Problem::SmoothVortex | Problem::OrszagTang => 5.0 / 3.0,
            Problem::SmoothWave | Problem::Rotor => 1.4,
            Problem::BrioWu => 2.0,
        }
    }

    pub fn final_time(self) -> f64 {
        match self {
            Problem::SmoothVortex => 0.05,
            Problem::SmoothWave => 0.1,
            Problem::BrioWu => 0.2,
            Problem::OrszagTang => 1.0,
            Problem::Rotor => 0.15,
        }
    }

    /// Cells per axis used when none are given.
    pub fn default_cells(self) -> usize {
        match self {
            Problem::SmoothVortex => 60,
            Problem::SmoothWave => 30,
            Problem::BrioWu => 600,
            Problem::OrszagTang => 40,
            Problem::Rotor => 100,
        }
    }

    pub fn periodic(self) -> [bool; 2] {
        match self {
            Problem::SmoothVortex | Problem::SmoothWave | Problem::OrszagTang => [true, true],
            Problem::BrioWu | Problem::Rotor => [false, false],
        }
    }

    pub fn has_exact_solution(self) -> bool {
        matches!(self, Problem::SmoothVortex | Problem::SmoothWave)
    }

    pub fn boundary_conditions(self, gamma: f64) -> BoundaryConditionSet {
        match self {
            Problem::SmoothVortex | Problem::SmoothWave | Problem::OrszagTang => BoundaryConditionSet::periodic(),
            Problem::BrioWu => {
                let left = Arc::new(move |_: [f64; 2], _: f64| brio_wu_state(0.25, gamma));
                let right = Arc::new(move |_: [f64; 2], _: f64| brio_wu_state(0.75, gamma));
                BoundaryConditionSet::uniform(BoundaryCondition::Neumann)
                    .with(Side::Left, BoundaryCondition::Dirichlet(left))
                    .with(Side::Right, BoundaryCondition::Dirichlet(right))
            }
            Problem::Rotor => BoundaryConditionSet::uniform(BoundaryCondition::Neumann),
        }
    }

    pub fn initial_condition(self, x: [f64; 2], gamma: f64) -> ConservedState {
        match self {
            Problem::SmoothVortex => vortex_state(x, 0.0, gamma),
            Problem::SmoothWave => wave_state(x, 0.0, gamma),
            Problem::BrioWu => brio_wu_state(x[0], gamma),
            Problem::OrszagTang => orszag_tang_state(x, gamma),
            Problem::Rotor => rotor_state(x, gamma),
        }
    }

    pub fn exact_solution(self, x: [f64; 2], t: f64, gamma: f64) -> Result<ConservedState> {
        match self {
            Problem::SmoothVortex => Ok(vortex_state(x, t, gamma)),
            Problem::SmoothWave => Ok(wave_state(x, t, gamma)),
            _ => Err(Error::config(format!("problem '{}' has no exact solution", self.name()))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smooth_vortex" | "vortex" => Ok(Problem::SmoothVortex),
            "smooth_wave" | "wave" => Ok(Problem::SmoothWave),
            "brio_wu" => Ok(Problem::BrioWu),
            "orszag_tang_2d" | "orszag_tang" => Ok(Problem::OrszagTang),
            "rotor" => Ok(Problem::Rotor),
            other => Err(Error::config(format!(
                "unknown problem '{other}' (expected one of smooth_vortex, smooth_wave, brio_wu, orszag_tang_2d, rotor)"
            ))),
        }
    }
}

fn wrap(v: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    lo + (v - lo).rem_euclid(len)
}

fn vortex_state(x: [f64; 2], t: f64, gamma: f64) -> ConservedState {
    let mu = VORTEX_STRENGTH;
    let r1 = wrap(x[0] - t, -10.0, 10.0);
    let r2 = wrap(x[1] - t, -10.0, 10.0);
    let r2sq = r1 * r1 + r2 * r2;
    let g = (0.5 * (1.0 - r2sq)).exp();
    let du = mu / (PI * 2f64.sqrt()) * g;
    let db = mu / (2.0 * PI) * g;
    let dp = -mu * mu * (1.0 + r2sq) * (1.0 - r2sq).exp() / (8.0 * PI * PI);
    ConservedState::from_primitives(
        1.0,
        [1.0 - du * r2, 1.0 + du * r1],
        VORTEX_BACKGROUND_PRESSURE + dp,
        [0.1 - db * r2, 0.1 + db * r1],
        gamma,
    )
}

fn wave_state(x: [f64; 2], t: f64, gamma: f64) -> ConservedState {
    let rho = 1.0 + 0.99 * (x[0] + x[1] - 2.0 * t).sin();
    ConservedState::from_primitives(rho, [1.0, 1.0], 1.0, [0.1, 0.1], gamma)
}

fn brio_wu_state(x: f64, gamma: f64) -> ConservedState {
    if x < 0.5 {
        ConservedState::from_primitives(1.0, [0.0, 0.0], 1.0, [0.75, 1.0], gamma)
    } else {
        ConservedState::from_primitives(0.125, [0.0, 0.0], 0.1, [0.75, -1.0], gamma)
    }
}

fn orszag_tang_state(x: [f64; 2], gamma: f64) -> ConservedState {
    let s4 = (4.0 * PI).sqrt();
    let (sx, sy) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
    ConservedState::from_primitives(
        25.0 / (36.0 * PI),
        [-sy, sx],
        5.0 / (12.0 * PI),
        [-sy / s4, (4.0 * PI * x[0]).sin() / s4],
        gamma,
    )
}

fn rotor_state(x: [f64; 2], gamma: f64) -> ConservedState {
    let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
    let r = (dx * dx + dy * dy).sqrt();
    let b = [5.0 / (4.0 * PI).sqrt(), 0.0];
    let (rho, u) = if r < ROTOR_R0 {
        (10.0, [-ROTOR_U0 / ROTOR_R0 * dy, ROTOR_U0 / ROTOR_R0 * dx])
    } else if r < ROTOR_R1 {
        let f = (ROTOR_R1 - r) / (ROTOR_R1 - ROTOR_R0);
        (1.0 + 9.0 * f, [-f * ROTOR_U0 / r * dy, f * ROTOR_U0 / r * dx])
    } else {
        (1.0, [0.0, 0.0])
    };
    ConservedState::from_primitives(rho, u, 1.0, b, gamma)
}
