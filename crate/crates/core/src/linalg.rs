//! Thin wrappers around `faer` for the dense symmetric systems and the
//! tridiagonal weighted mass matrices.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix; `off[i]` is the `(i, i+1)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Drops the first and last rows and columns (the boundary nodes).
    pub fn interior(&self) -> Tridiag {
        let n = self.dim();
        Tridiag {
            diag: self.diag[1..n - 1].to_vec(),
            off: self.off[1..n - 2].to_vec(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `mat += scale * self`.
    pub fn add_to(&self, mat: &mut Mat<f64>, scale: f64) {
        let n = self.dim();
        for i in 0..n {
            mat[(i, i)] += scale * self.diag[i];
        }
        for i in 0..n - 1 {
            mat[(i, i + 1)] += scale * self.off[i];
            mat[(i + 1, i)] += scale * self.off[i];
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.dim()])
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.dim(), self.dim());
        self.add_to(&mut m, 1.0);
        m
    }

    /// Cholesky factor as `(diag, sub)` of the lower bidiagonal `L`.
    pub fn cholesky(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut prev = 0.0;
        for i in 0..n {
            let v = self.diag[i] - prev * prev;
            if !(v > 0.0) {
                return Err(Error::NotPositiveDefinite(format!(
                    "tridiagonal pivot {i} = {v:e}"
                )));
            }
            d[i] = v.sqrt();
            if i + 1 < n {
                l[i] = self.off[i] / d[i];
                prev = l[i];
            }
        }
        Ok((d, l))
    }
}

pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate().take(a.ncols()) {
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_col(b: &[f64]) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn from_col(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn cholesky_solve(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
    let x = llt.solve(to_col(b));
    Ok(from_col(&x))
}

/// Whether a symmetric matrix admits a Cholesky factorization.
pub fn is_positive_definite(a: &Mat<f64>) -> bool {
    a.llt(Side::Lower).is_ok()
}

/// Solves `a x = b` with partial pivoting.
pub fn lu_solve(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let lu = a.partial_piv_lu();
    from_col(&lu.solve(to_col(b)))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of the pencil `(a, b)` with `b` tridiagonal SPD, ascending.
///
/// Reduces to `L^{-1} a L^{-T}` using the bidiagonal Cholesky factor of `b`.
pub fn generalized_eigenvalues_tridiag(a: &Mat<f64>, b: &Tridiag) -> Result<Vec<f64>> {
    let n = a.nrows();
    let (d, l) = b.cholesky()?;
    let mut c = a.clone();
    // columns: C <- L^{-1} C
    for j in 0..n {
        let mut col = c.col_mut(j);
        col[0] /= d[0];
        for i in 1..n {
            let v = (col[i] - l[i - 1] * col[i - 1]) / d[i];
            col[i] = v;
        }
    }
    // rows: C <- C L^{-T}
    for j in 0..n {
        if j == 0 {
            for i in 0..n {
                c[(i, 0)] /= d[0];
            }
        } else {
            for i in 0..n {
                let v = (c[(i, j)] - l[j - 1] * c[(i, j - 1)]) / d[j];
                c[(i, j)] = v;
            }
        }
    }
    // symmetrize against rounding
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    symmetric_eigenvalues(&c)
}
