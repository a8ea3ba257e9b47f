//! Sparse kernels: compressed-sparse-row storage, matrix-vector products,
//! Jacobi-preconditioned conjugate gradients, and a small dense LU solver
//! used by test oracles.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Builds a zero-valued matrix from per-row column lists. The lists are
    /// sorted and deduplicated.
    pub fn from_pattern(ncols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            if let Some(&last) = cols.last() {
                if last >= ncols {
                    return Err(Error::Dimension {
                        expected: ncols,
                        got: last + 1,
                    });
                }
            }
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); nrows];
        for &(i, j, _) in triplets {
            if i >= nrows {
                return Err(Error::Dimension {
                    expected: nrows,
                    got: i + 1,
                });
            }
            rows[i].push(j);
        }
        let mut a = Self::from_pattern(ncols, rows)?;
        for &(i, j, v) in triplets {
            a.add(i, j, v);
        }
        Ok(a)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| vec![i]).collect();
        let mut a = Self::from_pattern(n, rows).expect("identity pattern is valid");
        a.values.iter_mut().for_each(|v| *v = 1.0);
        a.symmetric = true;
        a
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut a = Self::identity(diag.len());
        a.values.copy_from_slice(diag);
        a
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Flags the matrix as symmetric after checking a sample of entries.
    pub fn mark_symmetric(&mut self, tol: f64) -> Result<()> {
        let stride = (self.nrows / 64).max(1);
        // entries that vanish in exact arithmetic are compared on the matrix scale
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in (0..self.nrows).step_by(stride) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let aij = self.values[k];
                let aji = self.get(j, i);
                if (aij - aji).abs() > tol * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Contract(format!(
                        "matrix not symmetric at ({i}, {j}): {aij} vs {aji}"
                    )));
                }
            }
        }
        self.symmetric = true;
        Ok(())
    }

    /// True if every stored entry lies on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]].iter().all(|&j| j == i))
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|p| lo + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds `v` to entry (i, j). Panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[p] += v;
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest |i − j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.nrows)
            .flat_map(|i| self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// y = A x
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::Dimension {
                expected: self.ncols,
                got: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::Dimension {
                expected: self.nrows,
                got: y.len(),
            });
        }
        for (yi, w) in y.iter_mut().zip(self.row_ptr.windows(2)) {
            let (lo, hi) = (w[0], w[1]);
            *yi = self.values[lo..hi]
                .iter()
                .zip(&self.col_idx[lo..hi])
                .map(|(v, &j)| v * x[j])
                .sum();
        }
        Ok(())
    }

    /// y = Aᵀ x
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::Dimension {
                expected: self.nrows,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(i, self.col_idx[k])] += self.values[k];
            }
        }
        d
    }
}

/// Anything that can apply a square linear map.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Diagonal entries, used by the Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y).expect("operator dimension mismatch");
    }

    fn diagonal(&self) -> Vec<f64> {
        CsrMatrix::diagonal(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target ‖b − Ax‖ ≤ tol‖b‖.
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
    /// Remove the arithmetic mean from the right-hand side and every iterate;
    /// used for operators whose null space is the constants.
    pub deflate_mean: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            preconditioner: Preconditioner::Jacobi,
            deflate_mean: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. `x` holds the initial guess on entry and the solution on exit.
pub fn cg_solve<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<CgStats> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len() });
    }
    if x.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len() });
    }

    let mut rhs = b.to_vec();
    if opts.deflate_mean {
        remove_mean(&mut rhs);
        remove_mean(x);
    }
    let bnorm = norm(&rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let inv_diag: Option<Vec<f64>> = match opts.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let d = a.diagonal();
            if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::Contract(format!(
                    "Jacobi preconditioner needs a positive diagonal (row {i} has {})",
                    d[i]
                )));
            }
            Some(d.iter().map(|v| 1.0 / v).collect())
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| {
        match &inv_diag {
            Some(inv) => z.iter_mut().zip(r.iter().zip(inv)).for_each(|(z, (r, d))| *z = r * d),
            None => z.copy_from_slice(r),
        }
        if opts.deflate_mean {
            remove_mean(z);
        }
    };

    let mut ax = vec![0.0; n];
    a.apply(x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    if opts.deflate_mean {
        remove_mean(&mut r);
    }
    let mut rnorm = norm(&r);
    if rnorm <= opts.tol * bnorm {
        return Ok(CgStats {
            iterations: 0,
            relative_residual: rnorm / bnorm,
        });
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 1..=opts.max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Contract(format!(
                "operator is not positive definite along the search direction (pᵀAp = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        // The energy functional ½xᵀAx − bᵀx drops by ½ α rᵀz per iteration.
        debug_assert!(alpha * rz >= 0.0, "CG energy norm increased");
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if opts.deflate_mean {
            remove_mean(&mut r);
        }
        rnorm = norm(&r);
        if rnorm <= opts.tol * bnorm {
            if opts.deflate_mean {
                remove_mean(x);
            }
            return Ok(CgStats {
                iterations: iter,
                relative_residual: rnorm / bnorm,
            });
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver {
        iterations: opts.max_iter,
        residual: rnorm / bnorm,
    })
}

/// Row-major dense matrix for small oracle computations.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| dot(&self.data[i * self.ncols..(i + 1) * self.ncols], x))
            .collect()
    }

    /// Solves A x = b by LU factorization with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.nrows;
        if self.ncols != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.ncols,
            });
        }
        if b.len() != n {
            return Err(Error::Dimension { expected: n, got: b.len() });
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .expect("non-empty range");
            if a[pivot * n + col] == 0.0 {
                return Err(Error::Contract("singular matrix in dense solve".into()));
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                x.swap(col, pivot);
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f != 0.0 {
                    for k in col..n {
                        a[row * n + k] -= f * a[col * n + k];
                    }
                    x[row] -= f * x[col];
                }
            }
        }
        for row in (0..n).rev() {
            let mut s = x[row];
            for k in row + 1..n {
                s -= a[row * n + k] * x[k];
            }
            x[row] = s / a[row * n + row];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Cholesky factor L (A = L Lᵀ) of a symmetric positive definite banded
/// matrix, stored row by row over the band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension { expected: n, got: a.ncols() });
        }
        let bw = a.bandwidth();
        let w = bw + 1;
        // row i holds L[i][i-bw..=i] at l[i*w..(i+1)*w]
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j <= i {
                    l[i * w + j + bw - i] = a.values[k];
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let start = lo.max(j.saturating_sub(bw));
                let mut s = l[i * w + j + bw - i];
                for k in start..j {
                    s -= l[i * w + k + bw - i] * l[j * w + k + bw - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Contract(format!("matrix is not positive definite (pivot {s:e} at row {i})")));
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + j + bw - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Overwrites `x` (holding b) with A⁻¹ b.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (bw, w) = (self.bw, self.bw + 1);
        let x = &mut x[..self.n];
        for (i, row) in self.l.chunks_exact(w).enumerate() {
            let m = i.min(bw);
            let (head, tail) = x.split_at_mut(i);
            let mut s = tail[0];
            for (a, b) in row[bw - m..bw].iter().zip(&head[i - m..]) {
                s -= a * b;
            }
            tail[0] = s / row[bw];
        }
        for (i, row) in self.l.chunks_exact(w).enumerate().rev() {
            let m = i.min(bw);
            let (head, tail) = x.split_at_mut(i);
            tail[0] /= row[bw];
            let xi = tail[0];
            for (a, b) in row[bw - m..bw].iter().zip(&mut head[i - m..]) {
                *b -= a * xi;
            }
        }
    }
}
