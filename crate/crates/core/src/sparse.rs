//! Compressed sparse row storage and a restarted Lanczos solver for the
//! lowest eigenpair of a real symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{IddmError, Result};

/// Real symmetric matrix stored with both triangles in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed
    /// and explicit zeros dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(column, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Largest |A_ij − A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual target relative to max(1, |θ|).
    pub tolerance: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 120,
            max_restarts: 60,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lowest eigenpair by Lanczos with full reorthogonalization, restarted from
/// the current Ritz vector until the residual ‖Hx − θx‖ meets the tolerance.
pub fn lowest_eigenpair(
    matrix: &CsrMatrix,
    start: &[f64],
    options: &LanczosOptions,
) -> Result<Eigenpair> {
    let dim = matrix.dim();
    if dim == 0 || start.len() != dim {
        return Err(IddmError::invalid(
            "start",
            "length must match the matrix dimension",
        ));
    }
    let breakdown = 1e-13 * matrix.norm_bound().max(1.0);
    let m_max = options.krylov_dim.clamp(1, dim);

    let mut v = start.to_vec();
    let n0 = norm(&v);
    if n0 == 0.0 {
        return Err(IddmError::invalid("start", "zero vector"));
    }
    v.iter_mut().for_each(|x| *x /= n0);

    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;
    for _ in 0..=options.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut diag = Vec::with_capacity(m_max);
        let mut off: Vec<f64> = Vec::with_capacity(m_max);
        loop {
            let j = basis.len() - 1;
            matrix.matvec_into(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            diag.push(a);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-off[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            if basis.len() == m_max || b <= breakdown {
                break;
            }
            off.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let m = diag.len();
        let tri = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        let (k, _) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let y = eig.eigenvectors.column(k);

        let mut x = vec![0.0; dim];
        for (q, &c) in basis.iter().zip(y.iter()) {
            axpy(c, q, &mut x);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|xi| *xi /= nx);

        matrix.matvec_into(&x, &mut w);
        let value = dot(&x, &w);
        axpy(-value, &x, &mut w);
        let residual = norm(&w);
        last_residual = residual;
        if residual <= options.tolerance * value.abs().max(1.0) {
            return Ok(Eigenpair {
                value,
                vector: x,
                residual,
            });
        }
        v = x;
    }
    Err(IddmError::ConvergenceFailure(format!(
        "Lanczos residual {last_residual:e} above tolerance {:e} after {} restarts",
        options.tolerance, options.max_restarts
    )))
}
