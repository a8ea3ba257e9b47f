use crate::assembly::ConservedField;
use crate::error::Result;
use crate::fe_space::{quadrature_rule, CellType, FESpace, QuadData};
use crate::physics::{primitives, ConservedState, BX, BY, ENERGY, MX, MY, RHO};

/// Quantities for which errors are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Density,
    Velocity,
    Pressure,
    Magnetic,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::Density, Quantity::Velocity, Quantity::Pressure, Quantity::Magnetic];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Density => "rho",
            Quantity::Velocity => "u",
            Quantity::Pressure => "p",
            Quantity::Magnetic => "B",
        }
    }

    fn components(self) -> usize {
        match self {
            Quantity::Density | Quantity::Pressure => 1,
            Quantity::Velocity | Quantity::Magnetic => 2,
        }
    }

    fn eval(self, s: &ConservedState, gamma: f64) -> Result<[f64; 2]> {
        Ok(match self {
            Quantity::Density => [s.rho, 0.0],
            Quantity::Velocity => [s.m[0] / s.rho, s.m[1] / s.rho],
            Quantity::Pressure => [primitives(s, gamma)?.p, 0.0],
            Quantity::Magnetic => s.b,
        })
    }
}

/// Absolute norms of the error and the same norms of the exact solution.
/// Vector quantities use the pointwise Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub exact_l1: f64,
    pub exact_l2: f64,
    pub exact_linf: f64,
}

impl Norms {
    pub fn relative_l1(&self) -> f64 {
        self.l1 / self.exact_l1
    }

    pub fn relative_l2(&self) -> f64 {
        self.l2 / self.exact_l2
    }

    pub fn relative_linf(&self) -> f64 {
        self.linf / self.exact_linf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub time: f64,
    /// Scalar Lagrange node count (before periodic identification).
    pub dofs: usize,
    pub measure: f64,
    pub wall_time: f64,
    pub entries: Vec<(Quantity, Norms)>,
}

impl ErrorReport {
    pub fn get(&self, q: Quantity) -> &Norms {
        &self.entries.iter().find(|(k, _)| *k == q).expect("every quantity is reported").1
    }
}

/// Error norms against `exact` with a rule of order 2k+4.
pub fn error_norms(
    space: &FESpace,
    u: &ConservedField,
    gamma: f64,
    time: f64,
    exact: impl Fn([f64; 2]) -> Result<ConservedState>,
) -> Result<ErrorReport> {
    let k = space.degree();
    let rule = quadrature_rule(CellType::for_dim(space.dim())?, 2 * k + 4)?;
    let quad = QuadData::new(space.basis(), rule);
    let mut norms = [Norms::default(); 4];
    let mut measure = 0.0;
    for cell in 0..space.num_cells() {
        let map = space.cell_map(cell);
        let dofs = space.cell_dofs(cell);
        for q in 0..quad.nq() {
            let w = quad.rule.weights[q] * map.det.abs();
            let x = map.map(quad.rule.points[q]);
            let vals = quad.values(q);
            let mut c = [0.0; 6];
            for (comp, cv) in [RHO, MX, MY, ENERGY, BX, BY].into_iter().zip(c.iter_mut()) {
                let f = u.comp(comp);
                *cv = dofs.iter().zip(vals).map(|(&d, &v)| f[d] * v).sum();
            }
            let sh = ConservedState::from_components(&c);
            let se = exact(x)?;
            measure += w;
            for (quantity, n) in Quantity::ALL.into_iter().zip(norms.iter_mut()) {
                let a = quantity.eval(&sh, gamma)?;
                let b = quantity.eval(&se, gamma)?;
                let nc = quantity.components();
                let e = (0..nc).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
                let ex = (0..nc).map(|i| b[i] * b[i]).sum::<f64>().sqrt();
                n.l1 += w * e;
                n.l2 += w * e * e;
                n.linf = n.linf.max(e);
                n.exact_l1 += w * ex;
                n.exact_l2 += w * ex * ex;
                n.exact_linf = n.exact_linf.max(ex);
            }
        }
    }
    for n in norms.iter_mut() {
        n.l2 = n.l2.sqrt();
        n.exact_l2 = n.exact_l2.sqrt();
    }
    Ok(ErrorReport {
        time,
        dofs: space.lattice_node_count(),
        measure,
        wall_time: 0.0,
        entries: Quantity::ALL.into_iter().zip(norms).collect(),
    })
}
