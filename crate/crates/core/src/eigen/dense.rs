use nalgebra::DMatrix;

use super::EigenResult;
use crate::fem::FemPair;
use crate::{Error, Result};

const DENSE_LIMIT: usize = 2000;

/// Full generalized symmetric eigendecomposition through a dense Cholesky
/// reduction.  Test oracle; refuses dimensions above 2000.
pub fn dense_oracle(pair: &FemPair) -> Result<EigenResult> {
    let n = pair.dim();
    if n > DENSE_LIMIT {
        return Err(Error::Size(format!("dense oracle limited to {DENSE_LIMIT} dofs, got {n}")));
    }
    let k = pair.stiffness.to_dense();
    let m = pair.mass.to_dense();
    let chol = nalgebra::Cholesky::new(m)
        .ok_or_else(|| Error::SolverInput("mass matrix not positive definite".into()))?;
    let l = chol.l();
    // A = L^-1 K L^-T, symmetric.
    let t1 = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::SolverInput("singular Cholesky factor".into()))?;
    let a = l
        .solve_lower_triangular(&t1.transpose())
        .ok_or_else(|| Error::SolverInput("singular Cholesky factor".into()))?;
    let a = symmetrize(a);
    let eig = nalgebra::SymmetricEigen::new(a);

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();

    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        let u = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::SolverInput("singular Cholesky factor".into()))?;
        // Normalize in M to match the iterative solver's convention.
        let mu = pair.mass.quad(u.as_slice()).sqrt();
        vectors.set_column(c, &(u / mu));
    }

    let kx = pair.stiffness.mul_dense(&vectors);
    let mx = pair.mass.mul_dense(&vectors);
    let residuals: Vec<f64> = (0..n)
        .map(|c| {
            let r = kx.column(c) - mx.column(c) * values[c];
            r.norm() / ((1.0 + values[c].abs()) * mx.column(c).norm().max(1e-300))
        })
        .collect();

    let lambda_max = *values.last().unwrap_or(&0.0);
    Ok(EigenResult {
        values,
        vectors,
        residuals,
        iterations: 1,
        converged: true,
        lambda_max,
    })
}

fn symmetrize(mut a: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}
