//! CSV and legacy VTK writers. Floats are written with 17 significant digits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::norms::ErrorReport;
use crate::assembly::ConservedField;
use crate::error::Result;
use crate::fe_space::FESpace;
use crate::integrator::StepDiagnostics;
use crate::physics::{primitives_raw, BX, BY, ENERGY, MX, MY, PSI, RHO};

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| crate::Error::from(e).context(path.display().to_string()))
}

pub fn timeseries_csv(rows: &[StepDiagnostics]) -> String {
    let mut s = String::from("step,t,tau,min_rho,min_p,max_mu,div_b,viscosity_evaluations\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.step,
            f(r.t),
            f(r.tau),
            f(r.min_rho),
            f(r.min_p),
            f(r.max_mu),
            f(r.div_b),
            r.viscosity_evaluations
        );
    }
    s
}

pub fn errors_csv(report: &ErrorReport) -> String {
    let mut s = String::from("quantity,dofs,time,l1,l2,linf,rel_l1,rel_l2,rel_linf,wall_time\n");
    for (q, n) in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            q.name(),
            report.dofs,
            f(report.time),
            f(n.l1),
            f(n.l2),
            f(n.linf),
            f(n.relative_l1()),
            f(n.relative_l2()),
            f(n.relative_linf()),
            f(report.wall_time)
        );
    }
    s
}

/// One line of a sweep: the errors of one mesh and the rates from the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dofs: usize,
    pub quantity: &'static str,
    pub l1: f64,
    pub l2: f64,
    pub rate_l1: Option<f64>,
    pub rate_l2: Option<f64>,
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let rate = |r: Option<f64>| r.map(f).unwrap_or_default();
    let mut s = String::from("cells,dofs,quantity,l1,l2,rate_l1,rate_l2\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.cells,
            r.dofs,
            r.quantity,
            f(r.l1),
            f(r.l2),
            rate(r.rate_l1),
            rate(r.rate_l2)
        );
    }
    s
}

/// Nodal values sorted by position, one row per DOF.
pub fn fields_csv(space: &FESpace, u: &ConservedField, gamma: f64) -> String {
    let mut s = String::from("x,y,rho,mx,my,E,bx,by,p");
    if u.has_psi() {
        s.push_str(",psi");
    }
    s.push('\n');
    let x = space.dof_coordinates();
    let mut order: Vec<usize> = (0..space.ndofs()).collect();
    order.sort_by(|&a, &b| x[a][1].total_cmp(&x[b][1]).then(x[a][0].total_cmp(&x[b][0])));
    for i in order {
        let c = |k: usize| u.comp(k)[i];
        let p = pressure(u, i, gamma);
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            f(x[i][0]),
            f(x[i][1]),
            f(c(RHO)),
            f(c(MX)),
            f(c(MY)),
            f(c(ENERGY)),
            f(c(BX)),
            f(c(BY)),
            f(p)
        );
        if u.has_psi() {
            let _ = write!(s, ",{}", f(c(PSI)));
        }
        s.push('\n');
    }
    s
}

fn pressure(u: &ConservedField, i: usize, gamma: f64) -> f64 {
    let c = |k: usize| u.comp(k)[i];
    primitives_raw(c(RHO), [c(MX), c(MY)], c(ENERGY), [c(BX), c(BY)], gamma)
        .map(|w| w.p)
        .unwrap_or(f64::NAN)
}

/// Sub-cells of the reference lattice as local node triples (pairs in 1D).
fn sub_cells(space: &FESpace) -> Vec<Vec<usize>> {
    let k = space.degree();
    let lattice = space.basis().node_lattice();
    if space.dim() == 1 {
        let mut by_pos: Vec<usize> = (0..lattice.len()).collect();
        by_pos.sort_by_key(|&a| lattice[a][1]);
        return by_pos.windows(2).map(|w| w.to_vec()).collect();
    }
    let index: HashMap<(usize, usize), usize> =
        lattice.iter().enumerate().map(|(a, l)| ((l[1], l[2]), a)).collect();
    let at = |i: usize, j: usize| index[&(i, j)];
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k - j {
            out.push(vec![at(i, j), at(i + 1, j), at(i, j + 1)]);
            if i + j + 2 <= k {
                out.push(vec![at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
    }
    out
}

/// Legacy ASCII unstructured grid. Points are duplicated per cell so that
/// periodic images are drawn at their geometric position; each cell is
/// split into k² triangles (k segments in 1D).
pub fn fields_vtk(space: &FESpace, u: &ConservedField, gamma: f64, title: &str) -> String {
    let nloc = space.nloc();
    let ncells = space.num_cells();
    let subs = sub_cells(space);
    let ref_nodes = space.basis().nodes();
    let npts = nloc * ncells;
    let mut s = format!("# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {npts} double\n");
    for cell in 0..ncells {
        let map = space.cell_map(cell);
        for &xi in ref_nodes {
            let x = map.map(xi);
            let _ = writeln!(s, "{} {} 0", f(x[0]), f(x[1]));
        }
    }
    let nsub = subs.len() * ncells;
    let per = subs[0].len();
    let _ = writeln!(s, "CELLS {nsub} {}", nsub * (per + 1));
    for cell in 0..ncells {
        for sub in &subs {
            let _ = write!(s, "{per}");
            for &a in sub {
                let _ = write!(s, " {}", cell * nloc + a);
            }
            s.push('\n');
        }
    }
    let _ = writeln!(s, "CELL_TYPES {nsub}");
    let vtk_type = if per == 2 { 3 } else { 5 };
    for _ in 0..nsub {
        let _ = writeln!(s, "{vtk_type}");
    }

    let nodal: Vec<usize> = (0..ncells).flat_map(|c| space.cell_dofs(c).to_vec()).collect();
    let _ = writeln!(s, "POINT_DATA {npts}");
    let mut scalar = |name: &str, v: &dyn Fn(usize) -> f64| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for &i in &nodal {
            let _ = writeln!(s, "{}", f(v(i)));
        }
    };
    scalar("density", &|i| u.comp(RHO)[i]);
    scalar("pressure", &|i| pressure(u, i, gamma));
    scalar("energy", &|i| u.comp(ENERGY)[i]);
    if u.has_psi() {
        scalar("psi", &|i| u.comp(PSI)[i]);
    }
    for (name, a, b, by_rho) in [("velocity", MX, MY, true), ("magnetic_field", BX, BY, false)] {
        let _ = writeln!(s, "VECTORS {name} double");
        for &i in &nodal {
            let d = if by_rho { u.comp(RHO)[i] } else { 1.0 };
            let _ = writeln!(s, "{} {} 0", f(u.comp(a)[i] / d), f(u.comp(b)[i] / d));
        }
    }
    s
}

pub fn write_timeseries(path: &Path, rows: &[StepDiagnostics]) -> Result<()> {
    write(path, &timeseries_csv(rows))
}

pub fn write_errors(path: &Path, report: &ErrorReport) -> Result<()> {
    write(path, &errors_csv(report))
}

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    write(path, &convergence_csv(rows))
}

pub fn write_fields(dir: &Path, space: &FESpace, u: &ConservedField, gamma: f64, title: &str) -> Result<()> {
    write(&dir.join("final_fields.csv"), &fields_csv(space, u, gamma))?;
    write(&dir.join("final_fields.vtk"), &fields_vtk(space, u, gamma, title))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, Mesh};
    use crate::physics::ConservedState;

    fn field(space: &FESpace) -> ConservedField {
        ConservedField::interpolate(space, false, |x| {
            ConservedState::from_primitives(1.0 + x[0], [0.5, 0.0], 1.0, [0.1, 0.2], 1.4)
        })
    }

    #[test]
    fn sub_triangles_tile_the_reference_cell() {
        for k in 1..=3 {
            let space = FESpace::new(Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[1, 1], 2).unwrap(), k).unwrap();
            let subs = sub_cells(&space);
            assert_eq!(subs.len(), k * k);
            let nodes = space.basis().nodes();
            let area: f64 = subs
                .iter()
                .map(|t| {
                    let [a, b, c] = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
                    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
                })
                .inspect(|&a| assert!(a > 0.0, "sub-triangles keep the orientation"))
                .sum();
            assert!((area - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn vtk_counts() {
        let space = FESpace::new(Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[2, 2], 2).unwrap(), 3).unwrap();
        let text = fields_vtk(&space, &field(&space), 1.4, "test");
        let ncells = space.num_cells();
        assert!(text.contains(&format!("POINTS {} double", 10 * ncells)));
        assert!(text.contains(&format!("CELLS {} {}", 9 * ncells, 36 * ncells)));
        assert!(text.contains("VECTORS magnetic_field double"));

        let line = FESpace::new(Mesh::structured(Domain::interval(0.0, 1.0), &[5], 1).unwrap(), 2).unwrap();
        let text = fields_vtk(&line, &field(&line), 1.4, "line");
        assert!(text.contains("CELLS 10 30"));
    }

    #[test]
    fn fields_csv_is_sorted_and_full_precision() {
        let line = FESpace::new(Mesh::structured(Domain::interval(0.0, 1.0), &[4], 1).unwrap(), 3).unwrap();
        let text = fields_csv(&line, &field(&line), 1.4);
        let xs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(xs.len(), 13);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        // 1/3 survives the round trip
        assert_eq!(xs[1], 1.0 / 12.0);
    }
}
