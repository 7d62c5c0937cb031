//! Lowest eigenpairs of the sparse generalized symmetric problem
//! `K u = lambda M u`: a seeded block Rayleigh-quotient iteration with
//! locking (the executable form of the min-max principle) plus a dense
//! reduction oracle for cross-checks at small sizes.

mod dense;
mod solver;
#[cfg(test)]
mod tests;

pub use dense::dense_oracle;
pub use solver::solve_lowest;

use serde::Serialize;

use crate::fem::FemPair;
use crate::{Error, Result};

/// Preconditioner choice for the block iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precond {
    None,
    Diagonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverOpts {
    pub n_eigs: usize,
    /// Working block size; `None` picks `n_eigs + guard` automatically.
    pub block_size: Option<usize>,
    /// Relative residual tolerance (see `EigenResult::residuals`).
    pub tol: f64,
    pub max_iter: usize,
    pub precond: Precond,
    pub seed: u64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts {
            n_eigs: 6,
            block_size: None,
            tol: 1e-8,
            max_iter: 800,
            precond: Precond::Diagonal,
            seed: 0x0b5e55ed,
        }
    }
}

impl SolverOpts {
    pub fn for_n(n_eigs: usize) -> Self {
        SolverOpts { n_eigs, ..Default::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Ascending eigenvalues with mass-orthonormal eigenvectors.
///
/// Residuals are `||K u - lambda M u|| / ((1 + lambda) ||M u||)`, which keeps
/// the tolerance meaningful across the spectrum.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// Column i is the eigenvector of `values[i]`.
    pub vectors: nalgebra::DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Truncation level: the largest returned eigenvalue.
    pub lambda_max: f64,
}

impl EigenResult {
    pub fn n_pairs(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// Index ranges of eigenvalue clusters (relative gap below `rel_tol`).
    pub fn clusters(&self, rel_tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.values.len() {
            let split = i == self.values.len() || {
                let a = self.values[i - 1];
                let b = self.values[i];
                (b - a).abs() > rel_tol * b.abs().max(1.0)
            };
            if split {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Check the returned pairs against their contract: ordering,
    /// M-orthonormality and the discrete reverse embedding
    /// `u^T K u <= lambda_max u^T M u (1 + 10 tol)`.
    pub fn verify_contract(&self, pair: &FemPair, tol: f64) -> Result<()> {
        for w in self.values.windows(2) {
            if w[1] < w[0] - 1e-12 {
                return Err(Error::SolverInput("eigenvalues not ascending".into()));
            }
        }
        let k = self.n_pairs();
        let mv = pair.mass.mul_dense(&self.vectors);
        let gram = self.vectors.transpose() * &mv;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > 10.0 * tol {
                    return Err(Error::SolverInput(format!(
                        "M-orthonormality defect {:.3e} at ({i}, {j})",
                        (gram[(i, j)] - want).abs()
                    )));
                }
            }
        }
        for i in 0..k {
            let u = self.vector(i);
            let e = pair.stiffness.quad(&u);
            let m = pair.mass.quad(&u);
            if e > self.lambda_max * m * (1.0 + 10.0 * tol) + 10.0 * tol {
                return Err(Error::SolverInput(format!(
                    "reverse embedding violated for pair {i}: {e} > {} * {m}",
                    self.lambda_max
                )));
            }
        }
        Ok(())
    }

    /// Emit `index,lambda,residual` CSV with a versioned schema header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# schema: openbook-eigs v1\nindex,lambda,residual\n");
        for i in 0..self.n_pairs() {
            s.push_str(&format!("{},{:.16e},{:.3e}\n", i, self.values[i], self.residuals[i]));
        }
        s
    }
}

/// Rayleigh quotient `u^T K u / u^T M u`.
pub fn rayleigh(pair: &FemPair, u: &[f64]) -> Result<f64> {
    let m = pair.mass.quad(u);
    if m <= 0.0 {
        return Err(Error::SolverInput("rayleigh: zero or negative M-norm".into()));
    }
    Ok(pair.stiffness.quad(u) / m)
}

/// Index-wise absolute and relative gaps between two sorted spectra.
pub fn match_spectra(a: &EigenResult, b: &EigenResult, n: usize) -> Result<Vec<(f64, f64)>> {
    if a.n_pairs() < n || b.n_pairs() < n {
        return Err(Error::Size(format!(
            "match_spectra needs {n} pairs, have {} and {}",
            a.n_pairs(),
            b.n_pairs()
        )));
    }
    if !a.converged || !b.converged {
        return Err(Error::Size("match_spectra requires converged results".into()));
    }
    Ok((0..n)
        .map(|i| {
            let gap = (a.values[i] - b.values[i]).abs();
            let scale = a.values[i].abs().max(b.values[i].abs()).max(1e-12);
            (gap, gap / scale)
        })
        .collect())
}
