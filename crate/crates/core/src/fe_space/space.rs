use std::collections::HashMap;

use super::basis::{LagrangeBasis, TRIANGLE_EDGES, TRIANGLE_VERTICES};
use super::quadrature::{gauss_legendre, quadrature_rule, CellType, QuadratureRule};
use crate::assembly::assemble_mass;
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, CgOptions};
use crate::mesh::{Mesh, Side};

/// Affine reference-to-physical map of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMap {
    pub origin: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// Inverse Jacobian: `inverse[r][c]` is ∂ξ_r/∂x_c.
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
    /// Circumradius h_K.
    pub h: f64,
}

impl CellMap {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    pub fn pull_back(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let a = &self.inverse;
        [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn push_grad(&self, g: [f64; 2]) -> [f64; 2] {
        let a = &self.inverse;
        [a[0][0] * g[0] + a[1][0] * g[1], a[0][1] * g[0] + a[1][1] * g[1]]
    }
}

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct QuadData {
    pub rule: QuadratureRule,
    nloc: usize,
    values: Vec<f64>,
    ref_grads: Vec<[f64; 2]>,
}

impl QuadData {
    pub fn new(basis: &LagrangeBasis, rule: QuadratureRule) -> Self {
        let nloc = basis.num_local();
        let nq = rule.len();
        let mut values = vec![0.0; nq * nloc];
        let mut ref_grads = vec![[0.0; 2]; nq * nloc];
        for (q, &p) in rule.points.iter().enumerate() {
            basis.eval(p, &mut values[q * nloc..(q + 1) * nloc], &mut ref_grads[q * nloc..(q + 1) * nloc]);
        }
        Self {
            rule,
            nloc,
            values,
            ref_grads,
        }
    }

    pub fn nq(&self) -> usize {
        self.rule.len()
    }

    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q * self.nloc..(q + 1) * self.nloc]
    }

    pub fn ref_grads(&self, q: usize) -> &[[f64; 2]] {
        &self.ref_grads[q * self.nloc..(q + 1) * self.nloc]
    }
}

/// Quadrature on one boundary facet, expressed in the owning cell.
#[derive(Debug, Clone)]
pub struct FacetQuadrature {
    pub cell: usize,
    pub side: Side,
    pub normal: [f64; 2],
    pub ref_points: Vec<[f64; 2]>,
    /// Physical weights (facet measure included).
    pub weights: Vec<f64>,
}

/// Continuous Lagrange space of degree k over a mesh, with periodic
/// identification inherited from the mesh.
#[derive(Debug, Clone)]
pub struct FESpace {
    mesh: Mesh,
    basis: LagrangeBasis,
    ndofs: usize,
    cell_dofs: Vec<usize>,
    dof_coords: Vec<[f64; 2]>,
    adjacency: Vec<Vec<usize>>,
    maps: Vec<CellMap>,
    quad: QuadData,
    grads: Vec<[f64; 2]>,
    jxw: Vec<f64>,
    facets: Vec<FacetQuadrature>,
    side_dofs: [Vec<usize>; 4],
}

impl FESpace {
    /// Space with the default volume quadrature of exactness 2k+1.
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        Self::with_quadrature_order(mesh, degree, 2 * degree + 1)
    }

    pub fn with_quadrature_order(mesh: Mesh, degree: usize, order: usize) -> Result<Self> {
        let dim = mesh.dim();
        let basis = LagrangeBasis::new(dim, degree)?;
        let cell_type = CellType::for_dim(dim)?;
        let k = degree;
        let nloc = basis.num_local();
        let ncells = mesh.num_cells();
        let periodic = mesh.periodic_axes();
        let period = [k * mesh.cells_per_axis()[0], k * mesh.cells_per_axis()[1]];

        let mut maps = Vec::with_capacity(ncells);
        for c in 0..ncells {
            let g = mesh.cell_geometry(c)?;
            maps.push(CellMap {
                origin: g.vertices[0],
                jacobian: g.jacobian,
                inverse: g.inverse,
                det: g.det,
                h: g.circumradius(),
            });
        }

        // global numbering by position on the refined vertex lattice
        let mut raw_keys = Vec::with_capacity(ncells * nloc);
        for c in 0..ncells {
            let verts = mesh.cell(c);
            for l in basis.node_lattice() {
                let mut key = [0usize; 2];
                for (v, &w) in verts.iter().zip(l.iter()) {
                    let lat = mesh.lattice()[*v];
                    key[0] += w * lat[0];
                    key[1] += w * lat[1];
                }
                raw_keys.push(key);
            }
        }
        let wrap = |key: [usize; 2]| {
            let mut w = key;
            for a in 0..2 {
                if periodic[a] && w[a] >= period[a] {
                    w[a] -= period[a];
                }
            }
            w
        };
        let mut keys: Vec<[usize; 2]> = raw_keys.iter().map(|&k| wrap(k)).collect();
        keys.sort_by_key(|k| (k[1], k[0]));
        keys.dedup();
        let index: HashMap<[usize; 2], usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let ndofs = keys.len();

        let mut cell_dofs = Vec::with_capacity(ncells * nloc);
        let mut dof_coords = vec![[f64::NAN; 2]; ndofs];
        for c in 0..ncells {
            for (j, node) in basis.nodes().iter().enumerate() {
                let raw = raw_keys[c * nloc + j];
                let w = wrap(raw);
                let dof = index[&w];
                cell_dofs.push(dof);
                if raw == w && dof_coords[dof][0].is_nan() {
                    dof_coords[dof] = maps[c].map(*node);
                }
            }
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); ndofs];
        for c in 0..ncells {
            let dofs = &cell_dofs[c * nloc..(c + 1) * nloc];
            for &i in dofs {
                adjacency[i].extend_from_slice(dofs);
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }

        let rule = quadrature_rule(cell_type, order)?;
        let quad = QuadData::new(&basis, rule);
        let nq = quad.nq();
        let mut grads = Vec::with_capacity(ncells * nq * nloc);
        let mut jxw = Vec::with_capacity(ncells * nq);
        for m in &maps {
            for q in 0..nq {
                jxw.push(quad.rule.weights[q] * m.det);
                for g in quad.ref_grads(q) {
                    grads.push(m.push_grad(*g));
                }
            }
        }

        let (line_x, line_w) = gauss_legendre(k + 1);
        let mut facets = Vec::new();
        for f in mesh.boundary_facets() {
            let (ref_points, weights) = if dim == 1 {
                (vec![[f.local_facet as f64, 0.0]], vec![1.0])
            } else {
                let [a, b] = TRIANGLE_EDGES[f.local_facet];
                let (pa, pb) = (TRIANGLE_VERTICES[a], TRIANGLE_VERTICES[b]);
                let pts = line_x
                    .iter()
                    .map(|&s| [(1.0 - s) * pa[0] + s * pb[0], (1.0 - s) * pa[1] + s * pb[1]])
                    .collect();
                (pts, line_w.iter().map(|w| w * f.measure).collect())
            };
            facets.push(FacetQuadrature {
                cell: f.cell,
                side: f.side,
                normal: f.normal,
                ref_points,
                weights,
            });
        }

        let mut side_dofs: [Vec<usize>; 4] = Default::default();
        for (raw, &dof) in raw_keys.iter().zip(&cell_dofs) {
            for side in mesh.sides() {
                let a = side.axis();
                if periodic[a] {
                    continue;
                }
                let at = if side.is_upper() { period[a] } else { 0 };
                if raw[a] == at {
                    side_dofs[side.index()].push(dof);
                }
            }
        }
        for s in side_dofs.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }

        Ok(Self {
            mesh,
            basis,
            ndofs,
            cell_dofs,
            dof_coords,
            adjacency,
            maps,
            quad,
            grads,
            jxw,
            facets,
            side_dofs,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    /// Number of Lagrange nodes before periodic identification. This is the
    /// DOF count used when reporting convergence tables.
    pub fn lattice_node_count(&self) -> usize {
        let k = self.degree();
        let n = self.mesh.cells_per_axis();
        (0..self.dim()).map(|a| k * n[a] + 1).product()
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }

    pub fn nloc(&self) -> usize {
        self.basis.num_local()
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let n = self.nloc();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    pub fn dof_coordinates(&self) -> &[[f64; 2]] {
        &self.dof_coords
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn cell_map(&self, cell: usize) -> &CellMap {
        &self.maps[cell]
    }

    pub fn quad(&self) -> &QuadData {
        &self.quad
    }

    /// Physical basis gradients at volume quadrature point `q` of `cell`.
    #[inline]
    pub fn grads(&self, cell: usize, q: usize) -> &[[f64; 2]] {
        let n = self.nloc();
        let start = (cell * self.quad.nq() + q) * n;
        &self.grads[start..start + n]
    }

    /// Quadrature weight times Jacobian determinant.
    #[inline]
    pub fn jxw(&self, cell: usize, q: usize) -> f64 {
        self.jxw[cell * self.quad.nq() + q]
    }

    pub fn facets(&self) -> &[FacetQuadrature] {
        &self.facets
    }

    /// DOFs lying on a non-periodic side of the domain.
    pub fn side_dofs(&self, side: Side) -> &[usize] {
        &self.side_dofs[side.index()]
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|&x| f(x)).collect()
    }

    /// Physical coordinates of volume quadrature point `q` of `cell`.
    pub fn quad_point(&self, cell: usize, q: usize) -> [f64; 2] {
        self.maps[cell].map(self.quad.rule.points[q])
    }

    /// Finite element function value at volume quadrature point `q`.
    #[inline]
    pub fn value_at(&self, coeffs: &[f64], cell: usize, q: usize) -> f64 {
        self.cell_dofs(cell).iter().zip(self.quad.values(q)).map(|(&d, &v)| coeffs[d] * v).sum()
    }

    /// Finite element function gradient at volume quadrature point `q`.
    #[inline]
    pub fn grad_at(&self, coeffs: &[f64], cell: usize, q: usize) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (&d, gr) in self.cell_dofs(cell).iter().zip(self.grads(cell, q)) {
            g[0] += coeffs[d] * gr[0];
            g[1] += coeffs[d] * gr[1];
        }
        g
    }

    /// Value and gradient of a finite element function at a reference point.
    pub fn eval_in_cell(&self, coeffs: &[f64], cell: usize, xi: [f64; 2]) -> (f64, [f64; 2]) {
        let n = self.nloc();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        self.basis.eval(xi, &mut v, &mut g);
        let map = &self.maps[cell];
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for (j, &d) in self.cell_dofs(cell).iter().enumerate() {
            value += coeffs[d] * v[j];
            let pg = map.push_grad(g[j]);
            grad[0] += coeffs[d] * pg[0];
            grad[1] += coeffs[d] * pg[1];
        }
        (value, grad)
    }

    /// Cell containing `x` and the reference coordinates of `x` in it.
    /// Coordinates are wrapped along periodic axes first.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let mesh = &self.mesh;
        let dom = mesh.domain();
        let mut x = x;
        for a in 0..self.dim() {
            if mesh.periodic_axes()[a] {
                let l = dom.extent(a);
                x[a] = dom.lower[a] + (x[a] - dom.lower[a]).rem_euclid(l);
            }
        }
        let tol = 1e-12;
        let cell = if self.dim() == 1 {
            let v = mesh.vertices();
            if x[0] < v[0][0] - tol || x[0] > v[v.len() - 1][0] + tol {
                return None;
            }
            let i = v.partition_point(|p| p[0] <= x[0]);
            i.clamp(1, v.len() - 1) - 1
        } else {
            let n = mesh.cells_per_axis();
            let mut ij = [0usize; 2];
            let mut frac = [0.0; 2];
            for a in 0..2 {
                let s = (x[a] - dom.lower[a]) / dom.extent(a) * n[a] as f64;
                if s < -tol || s > n[a] as f64 + tol {
                    return None;
                }
                let i = (s.floor().max(0.0) as usize).min(n[a] - 1);
                ij[a] = i;
                frac[a] = s - i as f64;
            }
            let base = 2 * (ij[1] * n[0] + ij[0]);
            if frac[1] <= frac[0] {
                base
            } else {
                base + 1
            }
        };
        let mut xi = self.maps[cell].pull_back(x);
        // clip round-off excursions outside the reference cell
        xi[0] = xi[0].max(0.0);
        if self.dim() == 1 {
            xi[0] = xi[0].min(1.0);
            xi[1] = 0.0;
        } else {
            xi[1] = xi[1].max(0.0);
            let s = xi[0] + xi[1];
            if s > 1.0 {
                xi = [xi[0] / s, xi[1] / s];
            }
        }
        Some((cell, xi))
    }

    /// Value of a finite element function at an arbitrary point.
    pub fn eval_at_point(&self, coeffs: &[f64], x: [f64; 2]) -> Option<f64> {
        self.locate(x).map(|(c, xi)| self.eval_in_cell(coeffs, c, xi).0)
    }
}

/// Node adjacency sets I(i): all DOFs sharing a cell with DOF i.
pub fn node_adjacency(space: &FESpace) -> &[Vec<usize>] {
    space.adjacency()
}

/// Nodal mesh function h_h: the L² projection of h_K/k onto the space,
/// solved with the consistent mass matrix.
pub fn mesh_size_field(space: &FESpace) -> Result<Vec<f64>> {
    let k = space.degree() as f64;
    let mut rhs = vec![0.0; space.ndofs()];
    for c in 0..space.num_cells() {
        let hk = space.cell_map(c).h / k;
        for q in 0..space.quad().nq() {
            let w = space.jxw(c, q) * hk;
            for (&d, &v) in space.cell_dofs(c).iter().zip(space.quad().values(q)) {
                rhs[d] += w * v;
            }
        }
    }
    let mass = assemble_mass(space, false)?;
    let mut h: Vec<f64> = rhs.iter().zip(mass.row_sums()).map(|(r, m)| r / m).collect();
    let opts = CgOptions {
        tol: 1e-12,
        ..CgOptions::default()
    };
    cg_solve(&mass, &rhs, &mut h, &opts).map_err(|e| e.context("mesh-size projection"))?;
    if let Some(i) = h.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Geometry(format!("mesh function is non-positive at DOF {i}")));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::mesh::Domain;

    fn square(n: usize, periodic: bool) -> Mesh {
        let m = Mesh::structured(Domain::rectangle([0.0, 0.0], [1.0, 1.0]), &[n, n], 2).unwrap();
        if periodic {
            m.with_periodic([true, true]).unwrap()
        } else {
            m
        }
    }

    fn line(n: usize, periodic: bool) -> Mesh {
        let m = Mesh::structured(Domain::interval(0.0, 1.0), &[n], 1).unwrap();
        if periodic {
            m.with_periodic([true, false]).unwrap()
        } else {
            m
        }
    }

    #[test]
    fn dof_counts() {
        for k in 1..=3 {
            let s = FESpace::new(square(4, false), k).unwrap();
            assert_eq!(s.ndofs(), (4 * k + 1) * (4 * k + 1));
            assert_eq!(s.lattice_node_count(), s.ndofs());
            let p = FESpace::new(square(4, true), k).unwrap();
            assert_eq!(p.ndofs(), 16 * k * k);
            let l = FESpace::new(line(5, true), k).unwrap();
            assert_eq!(l.ndofs(), 5 * k);
        }
    }

    #[test]
    fn dofs_shared_between_cells_have_one_coordinate() {
        for k in 1..=3 {
            let s = FESpace::new(square(3, false), k).unwrap();
            let nodes = s.basis().nodes().to_vec();
            for c in 0..s.num_cells() {
                for (j, &d) in s.cell_dofs(c).iter().enumerate() {
                    let x = s.cell_map(c).map(nodes[j]);
                    let y = s.dof_coordinates()[d];
                    assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn adjacency_contains_self_and_is_symmetric() {
        let s = FESpace::new(square(3, true), 2).unwrap();
        for (i, adj) in s.adjacency().iter().enumerate() {
            assert!(adj.contains(&i));
            for &j in adj {
                assert!(s.adjacency()[j].contains(&i));
            }
        }
    }

    #[test]
    fn adjacency_sizes() {
        let s = FESpace::new(line(6, false), 1).unwrap();
        assert_eq!(node_adjacency(&s)[3], vec![2, 3, 4]);
        let p = FESpace::new(line(6, true), 1).unwrap();
        assert_eq!(node_adjacency(&p)[0], vec![0, 1, 5]);
        // interior vertex of the uniform-diagonal triangulation touches six
        // cells: count by brute force over cells containing it
        let q = FESpace::new(square(4, false), 1).unwrap();
        let v = 2 * 5 + 2;
        let mut oracle: Vec<usize> = (0..q.num_cells())
            .filter(|&c| q.cell_dofs(c).contains(&v))
            .flat_map(|c| q.cell_dofs(c).to_vec())
            .collect();
        oracle.sort_unstable();
        oracle.dedup();
        assert_eq!(oracle.len(), 7);
        assert_eq!(q.adjacency()[v], oracle);
    }

    #[test]
    fn interpolation_of_degree_k_polynomials_is_exact() {
        for k in 1..=3 {
            let s = FESpace::new(square(3, false), k).unwrap();
            let f = |x: [f64; 2]| 0.3 + x[0].powi(k as i32) - 2.0 * x[0] * x[1].powi(k as i32 - 1) + x[1];
            let u = s.interpolate(f);
            for c in 0..s.num_cells() {
                for q in 0..s.quad().nq() {
                    let x = s.quad_point(c, q);
                    assert!((s.value_at(&u, c, q) - f(x)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn side_dofs_lie_on_their_sides() {
        let s = FESpace::new(square(3, false), 3).unwrap();
        for side in Side::ALL {
            let dofs = s.side_dofs(side);
            assert_eq!(dofs.len(), 10);
            let target = if side.is_upper() { 1.0 } else { 0.0 };
            for &d in dofs {
                assert!((s.dof_coordinates()[d][side.axis()] - target).abs() < 1e-14);
            }
        }
        let p = FESpace::new(square(3, true), 1).unwrap();
        assert!(Side::ALL.iter().all(|&side| p.side_dofs(side).is_empty()));
    }

    #[test]
    fn locate_and_point_evaluation() {
        let s = FESpace::new(square(5, false), 2).unwrap();
        let f = |x: [f64; 2]| 1.0 + x[0] * x[1];
        let u = s.interpolate(f);
        for &p in &[[0.13, 0.77], [0.5, 0.5], [0.99, 0.01], [0.3, 0.3]] {
            let (c, xi) = s.locate(p).unwrap();
            let back = s.cell_map(c).map(xi);
            assert!((back[0] - p[0]).abs() < 1e-13 && (back[1] - p[1]).abs() < 1e-13);
            assert!((s.eval_at_point(&u, p).unwrap() - f(p)).abs() < 1e-13);
        }
        let l = FESpace::new(Mesh::interval_from_points(&[0.0, 0.1, 0.3, 0.4]).unwrap(), 1).unwrap();
        let v = l.interpolate(|x| 2.0 * x[0]);
        assert!((l.eval_at_point(&v, [0.25, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(l.eval_at_point(&v, [0.5, 0.0]).is_none());
    }

    #[test]
    fn mesh_size_field_uniform() {
        let m = Mesh::structured(Domain::interval(0.0, 1.0), &[10], 1).unwrap();
        let h1 = mesh_size_field(&FESpace::new(m.clone(), 1).unwrap()).unwrap();
        assert!(h1.iter().all(|&h| (h - 0.05).abs() < 1e-12));
        let h2 = mesh_size_field(&FESpace::new(m, 2).unwrap()).unwrap();
        assert!(h2.iter().all(|&h| (h - 0.025).abs() < 1e-12));
        let s = FESpace::new(square(4, true), 3).unwrap();
        let h = mesh_size_field(&s).unwrap();
        let expect = (2f64.sqrt() / 8.0) / 3.0;
        assert!(h.iter().all(|&v| (v - expect).abs() < 1e-12));
    }

    #[test]
    fn mesh_size_field_alternating_against_dense_solve() {
        let mut pts = vec![0.0];
        for i in 0..8 {
            let last = *pts.last().unwrap();
            pts.push(last + if i % 2 == 0 { 0.1 } else { 0.2 });
        }
        let s = FESpace::new(Mesh::interval_from_points(&pts).unwrap(), 1).unwrap();
        let h = mesh_size_field(&s).unwrap();
        // tridiagonal P1 mass system assembled by hand
        let n = pts.len();
        let mut m = DenseMatrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for e in 0..n - 1 {
            let len = pts[e + 1] - pts[e];
            m[(e, e)] += len / 3.0;
            m[(e + 1, e + 1)] += len / 3.0;
            m[(e, e + 1)] += len / 6.0;
            m[(e + 1, e)] += len / 6.0;
            rhs[e] += len / 2.0 * (len / 2.0);
            rhs[e + 1] += len / 2.0 * (len / 2.0);
        }
        let oracle = m.solve(&rhs).unwrap();
        for i in 0..n {
            assert!((h[i] - oracle[i]).abs() < 1e-11, "{i}: {} vs {}", h[i], oracle[i]);
        }
    }

    #[test]
    fn mesh_size_field_bounds_on_random_meshes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let mut pts = vec![0.0];
            for _ in 0..15 {
                let last = *pts.last().unwrap();
                pts.push(last + rng.gen_range(0.08..0.12));
            }
            let s = FESpace::new(Mesh::interval_from_points(&pts).unwrap(), 1).unwrap();
            let h = mesh_size_field(&s).unwrap();
            let hk: Vec<f64> = (0..s.num_cells()).map(|c| s.cell_map(c).h).collect();
            let (lo, hi) = hk.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            let (hmin, hmax) = h.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            assert!(hmin >= 0.9 * lo && hmax <= 1.1 * hi, "[{hmin}, {hmax}] vs [{lo}, {hi}]");
        }
    }
}
