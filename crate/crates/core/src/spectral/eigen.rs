//! Eigenvalues of small dense Hermitian matrices by cyclic Jacobi rotations on
//! the real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const MAX_SWEEPS: usize = 100;

/// Residual bound relative to the Frobenius norm.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Largest `‖Gv - λv‖ / ‖G‖` over the computed pairs.
    pub residual: f64,
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a real symmetric matrix. Returns eigenvalues and the
/// matrix whose columns are the eigenvectors.
pub fn symmetric_jacobi(mut a: Vec<Vec<f64>>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return invalid("matrix must be square");
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm = frobenius(&a);
    if norm == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= 1e-15 * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = c * x - s * y;
                    a[q][k] = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
    }
    if !converged && off(&a) > 1e-12 * norm {
        return Err(Error::EigenFailure(format!("Jacobi sweeps did not converge for dimension {n}")));
    }
    Ok(((0..n).map(|i| a[i][i]).collect(), v))
}

/// Eigenvalues of a Hermitian matrix given row by row.
pub fn hermitian_eigenvalues(g: &[Vec<Complex64>]) -> Result<HermitianEigen> {
    let n = g.len();
    if g.iter().any(|row| row.len() != n) {
        return invalid("matrix must be square");
    }
    let gnorm = g.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for i in 0..n {
        for j in 0..n {
            if (g[i][j] - g[j][i].conj()).norm() > 1e-12 * gnorm.max(1e-300) {
                return invalid("matrix is not Hermitian");
            }
        }
    }
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (g[i][j] + g[j][i].conj());
            r[i][j] = h.re;
            r[i + n][j + n] = h.re;
            r[i][j + n] = -h.im;
            r[i + n][j] = h.im;
        }
    }
    let (vals, vecs) = symmetric_jacobi(r.clone())?;
    let rnorm = frobenius(&r);
    let mut residual: f64 = 0.0;
    if rnorm > 0.0 {
        for (k, &lam) in vals.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..2 * n {
                let mut acc = -lam * vecs[i][k];
                for j in 0..2 * n {
                    acc += r[i][j] * vecs[j][k];
                }
                s += acc * acc;
            }
            residual = residual.max(s.sqrt() / rnorm);
        }
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::EigenFailure(format!("residual {residual:e} above {RESIDUAL_TOL:e}")));
    }
    let mut sorted = vals;
    sorted.sort_by(|a, b| b.total_cmp(a));
    // Every eigenvalue of the complex matrix appears twice.
    let values = sorted.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    Ok(HermitianEigen { values, residual })
}
