//! Structured simplicial meshes: uniform interval meshes in 1D and
//! right-triangulated rectangles in 2D, plus periodic vertex pairing.

use crate::error::{Error, Result};

/// Axis-aligned box. In 1D only the first coordinate is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Self {
        Self {
            lower: [a, 0.0],
            upper: [b, 0.0],
        }
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self { lower, upper }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn measure(&self, dim: usize) -> f64 {
        (0..dim).map(|a| self.extent(a)).product()
    }
}

/// Boundary pieces of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Side::Right | Side::Top)
    }

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

/// A boundary facet: an end point in 1D, an edge in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub cell: usize,
    /// Local facet index. In 1D facet f is vertex f; on a triangle facet f
    /// joins local vertices f and (f + 1) % 3.
    pub local_facet: usize,
    pub side: Side,
    pub normal: [f64; 2],
    pub measure: f64,
}

/// Master/slave identification of vertices on opposite periodic sides.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMap {
    axes: [bool; 2],
    master: Vec<usize>,
}

impl PeriodicMap {
    pub fn axes(&self) -> [bool; 2] {
        self.axes
    }

    /// Master vertex of `v` (itself if `v` is independent).
    pub fn master(&self, v: usize) -> usize {
        self.master[v]
    }

    pub fn independent_count(&self) -> usize {
        self.master.iter().enumerate().filter(|(v, m)| v == *m).count()
    }
}

/// Geometric data of one simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    pub measure: f64,
    /// Columns are the edge vectors v1 − v0 (and v2 − v0).
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub inverse: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn new(vertices: &[[f64; 2]]) -> Result<Self> {
        match vertices.len() {
            2 => {
                let len = vertices[1][0] - vertices[0][0];
                if !(len > 0.0) {
                    return Err(Error::Geometry(format!(
                        "segment [{}, {}] is degenerate or reversed",
                        vertices[0][0], vertices[1][0]
                    )));
                }
                Ok(Self {
                    dim: 1,
                    vertices: vertices.to_vec(),
                    measure: len,
                    jacobian: [[len, 0.0], [0.0, 1.0]],
                    det: len,
                    inverse: [[1.0 / len, 0.0], [0.0, 1.0]],
                })
            }
            3 => {
                let [a, b, c] = [vertices[0], vertices[1], vertices[2]];
                let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let scale = edge_lengths(vertices).iter().fold(0.0f64, |m, &l| m.max(l));
                if !(det > 1e-14 * scale * scale) {
                    return Err(Error::Geometry(format!(
                        "triangle {vertices:?} is degenerate or clockwise (det = {det:e})"
                    )));
                }
                let inverse = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
                Ok(Self {
                    dim: 2,
                    vertices: vertices.to_vec(),
                    measure: 0.5 * det,
                    jacobian: j,
                    det,
                    inverse,
                })
            }
            n => Err(Error::Geometry(format!("unsupported simplex with {n} vertices"))),
        }
    }

    /// Maps a reference point to physical coordinates.
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let o = self.vertices[0];
        if self.dim == 1 {
            [o[0] + self.jacobian[0][0] * xi[0], o[1]]
        } else {
            let j = &self.jacobian;
            [o[0] + j[0][0] * xi[0] + j[0][1] * xi[1], o[1] + j[1][0] * xi[0] + j[1][1] * xi[1]]
        }
    }

    /// Radius of the smallest sphere through all vertices.
    pub fn circumradius(&self) -> f64 {
        circumradius(self)
    }

    /// Radius of the inscribed sphere.
    pub fn inradius(&self) -> f64 {
        if self.dim == 1 {
            0.5 * self.measure
        } else {
            let perimeter: f64 = edge_lengths(&self.vertices).iter().sum();
            2.0 * self.measure / perimeter
        }
    }
}

fn edge_lengths(v: &[[f64; 2]]) -> [f64; 3] {
    let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    [d(v[1], v[2]), d(v[2], v[0]), d(v[0], v[1])]
}

/// Circumradius: half the length of a segment, abc/(4·area) for a triangle.
pub fn circumradius(cell: &CellGeometry) -> f64 {
    if cell.dim == 1 {
        0.5 * cell.measure
    } else {
        let [a, b, c] = edge_lengths(&cell.vertices);
        a * b * c / (4.0 * cell.measure)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    domain: Domain,
    cells_per_axis: [usize; 2],
    vertices: Vec<[f64; 2]>,
    /// Integer position of each vertex in the structured vertex grid.
    lattice: Vec<[usize; 2]>,
    cells: Vec<[usize; 3]>,
    boundary: Vec<BoundaryFacet>,
    periodic: Option<PeriodicMap>,
}

impl Mesh {
    /// Uniform structured mesh of an axis-aligned box. In 2D every rectangle
    /// is cut along its lower-left to upper-right diagonal.
    pub fn structured(domain: Domain, cells_per_axis: &[usize], dim: usize) -> Result<Self> {
        build_structured_mesh(domain, cells_per_axis, dim)
    }

    /// 1D mesh with the given strictly increasing breakpoints.
    pub fn interval_from_points(points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::config("an interval mesh needs at least two points"));
        }
        let n = points.len() - 1;
        let vertices: Vec<[f64; 2]> = points.iter().map(|&x| [x, 0.0]).collect();
        let lattice = (0..=n).map(|i| [i, 0]).collect();
        let cells: Vec<[usize; 3]> = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
        let boundary = vec![
            BoundaryFacet {
                cell: 0,
                local_facet: 0,
                side: Side::Left,
                normal: Side::Left.outward_normal(),
                measure: 1.0,
            },
            BoundaryFacet {
                cell: n - 1,
                local_facet: 1,
                side: Side::Right,
                normal: Side::Right.outward_normal(),
                measure: 1.0,
            },
        ];
        let mesh = Self {
            dim: 1,
            domain: Domain::interval(points[0], points[n]),
            cells_per_axis: [n, 1],
            vertices,
            lattice,
            cells,
            boundary,
            periodic: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Returns a copy with periodic identification on the selected axes.
    pub fn with_periodic(mut self, axes: [bool; 2]) -> Result<Self> {
        if axes == [false, false] {
            self.periodic = None;
        } else {
            self.periodic = Some(periodic_pairing(&self, axes)?);
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells_per_axis(&self) -> [usize; 2] {
        self.cells_per_axis
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn lattice(&self) -> &[[usize; 2]] {
        &self.lattice
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices_per_cell(&self) -> usize {
        self.dim + 1
    }

    pub fn cell(&self, k: usize) -> &[usize] {
        &self.cells[k][..self.dim + 1]
    }

    pub fn cell_coordinates(&self, k: usize) -> Vec<[f64; 2]> {
        self.cell(k).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_geometry(&self, k: usize) -> Result<CellGeometry> {
        CellGeometry::new(&self.cell_coordinates(k))
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn periodic_map(&self) -> Option<&PeriodicMap> {
        self.periodic.as_ref()
    }

    pub fn periodic_axes(&self) -> [bool; 2] {
        self.periodic.as_ref().map_or([false, false], |p| p.axes)
    }

    pub fn is_periodic_side(&self, side: Side) -> bool {
        self.periodic_axes()[side.axis()]
    }

    /// Sides that exist for this dimension.
    pub fn sides(&self) -> &'static [Side] {
        if self.dim == 1 {
            &Side::ALL[..2]
        } else {
            &Side::ALL
        }
    }

    /// Checks cell orientation and that the cells tile the domain.
    pub fn validate(&self) -> Result<()> {
        let mut total = 0.0;
        for k in 0..self.num_cells() {
            total += self.cell_geometry(k)?.measure;
        }
        let expected = self.domain.measure(self.dim);
        if (total - expected).abs() > 1e-12 * expected {
            return Err(Error::Geometry(format!(
                "cell measures sum to {total}, domain measure is {expected}"
            )));
        }
        Ok(())
    }
}

/// Builds a uniform structured mesh: `nx` segments in 1D, `2·nx·ny` right
/// triangles in 2D.
pub fn build_structured_mesh(domain: Domain, cells_per_axis: &[usize], dim: usize) -> Result<Mesh> {
    match dim {
        1 | 2 => {}
        3 => return Err(Error::config("3D meshes are not supported")),
        d => return Err(Error::config(format!("unsupported dimension {d}"))),
    }
    if cells_per_axis.len() < dim {
        return Err(Error::config(format!(
            "need {dim} cell counts, got {}",
            cells_per_axis.len()
        )));
    }
    for axis in 0..dim {
        if cells_per_axis[axis] == 0 {
            return Err(Error::config(format!("cell count on axis {axis} must be positive")));
        }
        if !(domain.extent(axis) > 0.0) {
            return Err(Error::config(format!("domain extent on axis {axis} must be positive")));
        }
    }

    if dim == 1 {
        let n = cells_per_axis[0];
        let (a, b) = (domain.lower[0], domain.upper[0]);
        let points: Vec<f64> = (0..=n)
            .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
            .collect();
        let mut mesh = Mesh::interval_from_points(&points)?;
        mesh.domain = domain;
        return Ok(mesh);
    }

    let (nx, ny) = (cells_per_axis[0], cells_per_axis[1]);
    let coord = |axis: usize, i: usize, n: usize| {
        if i == n {
            domain.upper[axis]
        } else {
            domain.lower[axis] + domain.extent(axis) * i as f64 / n as f64
        }
    };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut lattice = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([coord(0, i, nx), coord(1, j, ny)]);
            lattice.push([i, j]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(2 * nx * ny);
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            let lower = cells.len();
            cells.push([v00, v10, v11]);
            let upper = cells.len();
            cells.push([v00, v11, v01]);
            let mut facet = |cell: usize, local_facet: usize, side: Side, a: usize, b: usize| {
                let (p, q) = (vertices[a], vertices[b]);
                boundary.push(BoundaryFacet {
                    cell,
                    local_facet,
                    side,
                    normal: side.outward_normal(),
                    measure: ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(),
                });
            };
            if j == 0 {
                facet(lower, 0, Side::Bottom, v00, v10);
            }
            if i + 1 == nx {
                facet(lower, 1, Side::Right, v10, v11);
            }
            if j + 1 == ny {
                facet(upper, 1, Side::Top, v11, v01);
            }
            if i == 0 {
                facet(upper, 2, Side::Left, v01, v00);
            }
        }
    }
    let mesh = Mesh {
        dim: 2,
        domain,
        cells_per_axis: [nx, ny],
        vertices,
        lattice,
        cells,
        boundary,
        periodic: None,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Pairs every vertex on an upper side with the vertex on the opposite lower
/// side that has the same transverse coordinates. Corner vertices collapse
/// onto the lower-left corner when both axes are periodic.
pub fn periodic_pairing(mesh: &Mesh, axes: [bool; 2]) -> Result<PeriodicMap> {
    if mesh.dim == 1 && axes[1] {
        return Err(Error::Pairing("a 1D mesh has no second axis".into()));
    }
    let n = mesh.num_vertices();
    let mut master: Vec<usize> = (0..n).collect();
    let domain = mesh.domain;
    for axis in 0..mesh.dim {
        if !axes[axis] {
            continue;
        }
        let h = domain.extent(axis) / mesh.cells_per_axis[axis] as f64;
        let tol = 1e-9 * h;
        let on = |v: usize, value: f64| (mesh.vertices[v][axis] - value).abs() <= tol;
        let lower: Vec<usize> = (0..n).filter(|&v| on(v, domain.lower[axis])).collect();
        let upper: Vec<usize> = (0..n).filter(|&v| on(v, domain.upper[axis])).collect();
        if lower.len() != upper.len() {
            return Err(Error::Pairing(format!(
                "axis {axis}: {} vertices on the lower side, {} on the upper side",
                lower.len(),
                upper.len()
            )));
        }
        let other = 1 - axis;
        for &s in &upper {
            let target = mesh.vertices[s][other];
            let m = lower
                .iter()
                .copied()
                .find(|&m| mesh.dim == 1 || (mesh.vertices[m][other] - target).abs() <= tol)
                .ok_or_else(|| {
                    Error::Pairing(format!(
                        "axis {axis}: vertex {s} at {:?} has no partner on the opposite side",
                        mesh.vertices[s]
                    ))
                })?;
            master[s] = m;
        }
    }
    // resolve chains such as top-right -> top-left -> bottom-left
    for v in 0..n {
        let mut m = master[v];
        while master[m] != m {
            m = master[m];
        }
        master[v] = m;
    }
    Ok(PeriodicMap { axes, master })
}
