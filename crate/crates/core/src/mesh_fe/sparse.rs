//! Compressed-row matrices and a Jacobi-preconditioned conjugate gradient solver.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh_fe::mesh::UniformQuadMesh;

const PAR_ROWS: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix over the Q1 node-connectivity pattern: row `i` holds every
    /// node that shares a cell with node `i`.
    pub fn q1_pattern(mesh: &UniformQuadMesh) -> Self {
        let n = mesh.num_nodes();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(9 * n);
        row_ptr.push(0);
        for node in 0..n {
            col_idx.extend(mesh.node_stencil(node));
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet index out of range");
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to an existing entry. Panics if `(i, j)` is outside the pattern.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    /// Scatters a 4x4 element matrix of `cell`.
    pub fn add_cell_matrix(&mut self, mesh: &UniformQuadMesh, cell: usize, local: &[[f64; 4]; 4]) {
        let nodes = mesh.cell_nodes(cell);
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                self.add_to(i, j, local[a][b]);
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Adds `d` to the diagonal. Every diagonal entry must be in the pattern.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate() {
            self.add_to(i, i, v);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * other` for matrices sharing the same pattern.
    pub fn add_scaled(&mut self, alpha: f64, other: &CsrMatrix) {
        assert!(
            self.row_ptr == other.row_ptr && self.col_idx == other.col_idx,
            "add_scaled needs identical sparsity patterns"
        );
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += alpha * b);
    }

    /// Matrix with the same pattern and row sums moved onto the diagonal.
    pub fn lumped(&self) -> CsrMatrix {
        let sums = self.row_sums();
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = 0.0);
        out.add_diagonal(&sums);
        out
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[s..e]
            .iter()
            .zip(&self.values[s..e])
            .map(|(&j, &a)| a * x[j])
            .sum()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        if self.n >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            y.iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                worst = worst.max((self.values[k] - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() >= PAR_ROWS {
        // Fixed chunking keeps the reduction order independent of thread count.
        a.par_chunks(4096)
            .zip(b.par_chunks(4096))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    } else {
        a.iter().zip(b).map(|(p, q)| p * q).sum()
    }
}

/// Solves `A x = b` for symmetric positive definite `A` with Jacobi-preconditioned CG.
///
/// Stops when `||b - A x|| / ||b|| <= tol`. A non-positive curvature
/// `p^T A p <= 0` or an exhausted iteration budget is reported as
/// [`Error::CgNotConverged`].
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    cg_solve_with_floor(a, b, x0, tol, 0.0, max_iter)
}

/// [`cg_solve`] that also accepts `||b - A x|| <= abs_tol`, for right-hand
/// sides that are themselves at round-off level.
pub fn cg_solve_with_floor(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    abs_tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let b_norm = dot(b, b).sqrt();
    if b_norm <= abs_tol {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut r = a.mul_vec(&x);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let stop = (tol * b_norm).max(abs_tol) / b_norm;
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= stop {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: rel,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::CgNotConverged {
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= stop {
            return Ok(CgSolution {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        z.iter_mut()
            .zip(&r)
            .zip(&inv_diag)
            .for_each(|((zi, ri), di)| *zi = ri * di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn identity_solves_in_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        let sol = cg_solve(&a, &b, None, 1e-12, 10).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, b);
    }

    #[test]
    fn laplacian_matches_dense_solve() {
        let n = 40;
        let a = laplacian_1d(n);
        let b = vec![1.0; n];
        let sol = cg_solve(&a, &b, None, 1e-10, 10 * n).unwrap();
        let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
        let x = dense_solve(dense, b.clone());
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (u, v) in sol.x.iter().zip(&x) {
            assert!((u - v).abs() <= 1e-8 * scale);
        }
        let r = a.mul_vec(&sol.x);
        let res: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(res / (n as f64).sqrt() <= 1e-10);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let err = cg_solve(&a, &[1.0, 1.0], None, 1e-12, 50).unwrap_err();
        assert!(matches!(err, Error::CgNotConverged { .. }));
    }

    #[test]
    fn q1_pattern_is_symmetric() {
        let m = UniformQuadMesh::unit_square(3).unwrap();
        let a = CsrMatrix::q1_pattern(&m);
        for i in 0..a.n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                assert!(a.position(j, i).is_some());
            }
        }
        assert_eq!(a.row_ptr[a.n + 1 - 1] - a.row_ptr[a.n - 1], 4);
    }

    #[test]
    fn lumping_preserves_row_sums() {
        let a = laplacian_1d(6);
        let l = a.lumped();
        assert_eq!(l.row_sums(), a.row_sums());
        assert_eq!(l.get(0, 1), 0.0);
    }
}
