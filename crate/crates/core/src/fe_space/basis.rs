//! Lagrange bases of degree 1–3 on the reference interval and triangle.
//!
//! Local numbering: vertices first, then edge nodes, then the cell node
//! (P3 triangle). Triangle edges are (0,1), (1,2), (2,0); nodes on an edge
//! are listed starting from its first vertex. In 1D the interior nodes
//! follow the two end points from left to right.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 3;

/// Reference-cell positions of the triangle vertices.
pub const TRIANGLE_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Local triangle edges as pairs of local vertices.
pub const TRIANGLE_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    dim: usize,
    degree: usize,
    /// Reference coordinates of the local nodes.
    nodes: Vec<[f64; 2]>,
    /// Integer barycentric coordinates (summing to `degree`) of each node.
    lattice: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::config(format!("unsupported polynomial degree {degree}")));
        }
        let k = degree;
        let mut lattice = Vec::new();
        match dim {
            1 => {
                lattice.push([k, 0, 0]);
                lattice.push([0, k, 0]);
                for j in 1..k {
                    lattice.push([k - j, j, 0]);
                }
            }
            2 => {
                for v in 0..3 {
                    let mut l = [0; 3];
                    l[v] = k;
                    lattice.push(l);
                }
                for [a, b] in TRIANGLE_EDGES {
                    for j in 1..k {
                        let mut l = [0; 3];
                        l[a] = k - j;
                        l[b] = j;
                        lattice.push(l);
                    }
                }
                if k == 3 {
                    lattice.push([1, 1, 1]);
                }
            }
            d => return Err(Error::config(format!("unsupported dimension {d}"))),
        }
        let nodes = lattice
            .iter()
            .map(|l| [l[1] as f64 / k as f64, if dim == 2 { l[2] as f64 / k as f64 } else { 0.0 }])
            .collect();
        Ok(Self {
            dim,
            degree,
            nodes,
            lattice,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Barycentric lattice coordinates of the local nodes, in units of 1/k.
    pub fn node_lattice(&self) -> &[[usize; 3]] {
        &self.lattice
    }

    /// Basis values and reference gradients at `xi`.
    pub fn eval(&self, xi: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        if self.dim == 1 {
            self.eval_interval(xi[0], values, grads);
        } else {
            self.eval_triangle(xi, values, grads);
        }
    }

    fn eval_interval(&self, x: f64, values: &mut [f64], grads: &mut [[f64; 2]]) {
        let xs: Vec<f64> = self.nodes.iter().map(|n| n[0]).collect();
        for (i, &xi) in xs.iter().enumerate() {
            let mut v = 1.0;
            let mut d = 0.0;
            for (j, &xj) in xs.iter().enumerate() {
                if j == i {
                    continue;
                }
                let f = (x - xj) / (xi - xj);
                d = d * f + v / (xi - xj);
                v *= f;
            }
            values[i] = v;
            grads[i] = [d, 0.0];
        }
    }

    fn eval_triangle(&self, xi: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
        let dl: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        // value and d/dλ of each one-variable factor, combined by the chain rule
        let grad = |c: [f64; 3]| [c[0] * dl[0][0] + c[1] * dl[1][0] + c[2] * dl[2][0], c[0] * dl[0][1] + c[1] * dl[1][1] + c[2] * dl[2][1]];
        for (i, n) in self.lattice.iter().enumerate() {
            let (v, dv) = match self.degree {
                1 => {
                    let a = argmax(n);
                    let mut c = [0.0; 3];
                    c[a] = 1.0;
                    (l[a], c)
                }
                2 => {
                    if let Some(a) = n.iter().position(|&x| x == 2) {
                        let mut c = [0.0; 3];
                        c[a] = 4.0 * l[a] - 1.0;
                        (l[a] * (2.0 * l[a] - 1.0), c)
                    } else {
                        let (a, b) = pair(n);
                        let mut c = [0.0; 3];
                        c[a] = 4.0 * l[b];
                        c[b] = 4.0 * l[a];
                        (4.0 * l[a] * l[b], c)
                    }
                }
                _ => match *n {
                    [1, 1, 1] => (
                        27.0 * l[0] * l[1] * l[2],
                        [27.0 * l[1] * l[2], 27.0 * l[0] * l[2], 27.0 * l[0] * l[1]],
                    ),
                    _ => {
                        if let Some(a) = n.iter().position(|&x| x == 3) {
                            let x = l[a];
                            let mut c = [0.0; 3];
                            c[a] = 0.5 * (27.0 * x * x - 18.0 * x + 2.0);
                            (0.5 * x * (3.0 * x - 1.0) * (3.0 * x - 2.0), c)
                        } else {
                            // nearer vertex a (weight 2), farther b (weight 1)
                            let a = n.iter().position(|&x| x == 2).unwrap();
                            let b = n.iter().position(|&x| x == 1).unwrap();
                            let (la, lb) = (l[a], l[b]);
                            let mut c = [0.0; 3];
                            c[a] = 4.5 * lb * (6.0 * la - 1.0);
                            c[b] = 4.5 * la * (3.0 * la - 1.0);
                            (4.5 * la * lb * (3.0 * la - 1.0), c)
                        }
                    }
                },
            };
            values[i] = v;
            grads[i] = grad(dv);
        }
    }
}

fn argmax(n: &[usize; 3]) -> usize {
    (0..3).max_by_key(|&i| n[i]).unwrap()
}

fn pair(n: &[usize; 3]) -> (usize, usize) {
    let nz: Vec<usize> = (0..3).filter(|&i| n[i] > 0).collect();
    (nz[0], nz[1])
}

/// Values and reference gradients of all local basis functions at a
/// reference point.
pub fn basis_eval(dim: usize, degree: usize, ref_point: [f64; 2]) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let basis = LagrangeBasis::new(dim, degree)?;
    let tol = 1e-12;
    let inside = match dim {
        1 => ref_point[0] >= -tol && ref_point[0] <= 1.0 + tol,
        _ => ref_point[0] >= -tol && ref_point[1] >= -tol && ref_point[0] + ref_point[1] <= 1.0 + tol,
    };
    if !inside {
        return Err(Error::config(format!("reference point {ref_point:?} lies outside the reference cell")));
    }
    let n = basis.num_local();
    let mut values = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    basis.eval(ref_point, &mut values, &mut grads);
    Ok((values, grads))
}
