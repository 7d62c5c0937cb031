use rayon::prelude::*;

use crate::{Error, Result};

/// Symmetric sparse matrix in compressed-row layout.  Both triangles are
/// stored so row access and products stay cheap; construction symmetrizes and
/// merges duplicate entries, dropping exact off-diagonal zeros.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseSym {
    /// Build from (row, col, value) triplets.  Entries are accumulated; an
    /// off-diagonal triplet contributes to both (i, j) and (j, i), so callers
    /// should emit each unordered pair once (or emit full element matrices
    /// with `from_full_triplets`).
    pub fn from_full_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Assembly(format!("triplet ({i}, {j}) out of range for n = {n}")));
            }
            entries.push((i, j, v));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            let mut k2 = k + 1;
            while k2 < entries.len() && entries[k2].0 == i && entries[k2].1 == j {
                v += entries[k2].2;
                k2 += 1;
            }
            if v != 0.0 || i == j {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
            }
            k = k2;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let m = SparseSym { n, row_ptr, col, val };
        if !m.is_symmetric(0.0) {
            return Err(Error::Assembly("assembled matrix is not structurally symmetric".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    /// Exact symmetry certificate: every stored (i, j, v) has a matching
    /// (j, i, v) within `tol` (0.0 demands bitwise equality).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (cj, vj) = self.row(j);
                match cj.binary_search(&i) {
                    Ok(p) => {
                        let d = (vj[p] - v).abs();
                        if d > tol {
                            return false;
                        }
                    }
                    Err(_) => return false,
                }
            }
        }
        true
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        // Row-parallel only when the matrix is large enough to beat the
        // scheduling overhead; per-row results are deterministic either way.
        if self.n >= 30_000 {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| {
                let mut acc = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.val[k] * x[self.col[k]];
                }
                *yi = acc;
            });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.val[k] * x[self.col[k]];
                }
                *yi = acc;
            }
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `A * X` for a dense block, column-parallel (deterministic).
    pub fn mul_dense(&self, x: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
        assert_eq!(x.nrows(), self.n);
        let cols: Vec<Vec<f64>> = if self.n >= 30_000 {
            (0..x.ncols())
                .into_par_iter()
                .map(|c| {
                    let xc: Vec<f64> = x.column(c).iter().copied().collect();
                    self.matvec_alloc(&xc)
                })
                .collect()
        } else {
            (0..x.ncols())
                .map(|c| {
                    let xc: Vec<f64> = x.column(c).iter().copied().collect();
                    self.matvec_alloc(&xc)
                })
                .collect()
        };
        let mut out = nalgebra::DMatrix::zeros(self.n, x.ncols());
        for (c, colv) in cols.iter().enumerate() {
            out.column_mut(c).copy_from_slice(colv);
        }
        out
    }

    /// Quadratic form u^T A u.
    pub fn quad(&self, u: &[f64]) -> f64 {
        let au = self.matvec_alloc(u);
        u.iter().zip(au).map(|(a, b)| a * b).sum()
    }

    /// Bilinear form u^T A v.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let av = self.matvec_alloc(v);
        u.iter().zip(av).map(|(a, b)| a * b).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            if let Ok(p) = cols.binary_search(&i) {
                d[i] = vals[p];
            }
        }
        d
    }

    pub fn sum_entries(&self) -> f64 {
        self.val.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (_, vals) = self.row(i);
                vals.iter().sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.val.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// MatrixMarket coordinate export (lower triangle, 1-based).
    pub fn write_matrix_market<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .filter(move |(j, _)| **j <= i)
                    .map(move |(&j, &v)| (i, j, v))
                    .collect::<Vec<_>>()
            })
            .collect();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, v) in lower {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    /// Conjugate gradients for SPD systems; used for the mass-definiteness
    /// probe and small auxiliary solves.
    pub fn cg_solve(&self, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut p = r.clone();
        let bnorm = norm(b).max(1e-300);
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        for _ in 0..max_iter {
            if rr.sqrt() <= rel_tol * bnorm {
                return Ok(x);
            }
            let ap = self.matvec_alloc(&p);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(Error::SolverInput("cg: matrix is not positive definite".into()));
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
        }
        if rr.sqrt() <= rel_tol * bnorm * 10.0 {
            Ok(x)
        } else {
            Err(Error::NonConverged(format!(
                "cg stalled at relative residual {:.3e}",
                rr.sqrt() / bnorm
            )))
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseSym {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        SparseSym::from_full_triplets(n, &t).unwrap()
    }

    #[test]
    fn assembles_and_merges() {
        let a = laplace_1d(5);
        assert_eq!(a.dim(), 5);
        assert!(a.is_symmetric(0.0));
        let rs = a.row_sums();
        for s in rs {
            assert!(s.abs() < 1e-15, "graph laplacian rows sum to zero");
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let a = laplace_1d(7);
        let d = a.to_dense();
        let x: Vec<f64> = (0..7).map(|i| (i as f64).sin() + 0.3).collect();
        let y = a.matvec_alloc(&x);
        let xd = nalgebra::DVector::from_vec(x);
        let yd = &d * &xd;
        for i in 0..7 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn cg_solves_spd() {
        let mut t = Vec::new();
        let n = 40;
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseSym::from_full_triplets(n, &t).unwrap();
        let xtrue: Vec<f64> = (0..n).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let b = a.matvec_alloc(&xtrue);
        let x = a.cg_solve(&b, 1e-12, 500).unwrap();
        for i in 0..n {
            assert!((x[i] - xtrue[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_market_roundtrip_header() {
        let a = laplace_1d(3);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        assert!(s.lines().count() >= 2 + a.nnz() / 2);
    }
}
