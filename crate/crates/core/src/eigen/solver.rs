use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EigenResult, Precond, SolverOpts};
use crate::fem::{FemPair, SparseSym};
use crate::{Error, Result};

/// Block preconditioned Rayleigh-quotient minimization with locking of
/// converged pairs.  Deterministic given the seed: random start block from a
/// seeded ChaCha stream, sequential orthogonalization, fixed reduction order.
pub fn solve_lowest(pair: &FemPair, opts: &SolverOpts) -> Result<EigenResult> {
    let n = pair.dim();
    if opts.n_eigs == 0 {
        return Err(Error::SolverInput("n_eigs must be at least 1".into()));
    }
    if opts.n_eigs * 4 > n {
        return Err(Error::SolverInput(format!(
            "n_eigs = {} too large for dimension {n} (need n_eigs < n/4)",
            opts.n_eigs
        )));
    }
    let m_min = pair.mass_min_eig_estimate()?;
    if m_min <= 0.0 {
        return Err(Error::SolverInput(format!("mass matrix not positive definite ({m_min})")));
    }

    let guard = (opts.n_eigs / 2).clamp(3, 8);
    let block = opts.block_size.unwrap_or(opts.n_eigs + guard).min(n / 3).max(opts.n_eigs);

    let kmat = &pair.stiffness;
    let mmat = &pair.mass;
    let prec = Preconditioner::build(pair, opts.precond);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    // A deterministic constant column helps lambda_0 = 0 converge immediately.
    x.column_mut(0).fill(1.0);

    let mut locked: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut p: Option<DMatrix<f64>> = None;
    let mut iterations = 0;
    let mut last_theta: Vec<f64> = Vec::new();
    let mut last_res: Vec<f64> = Vec::new();

    while iterations < opts.max_iter {
        iterations += 1;

        // Assemble the trial basis S = [X | W | P], M-orthonormal and
        // M-orthogonal to the locked vectors.
        let mut basis = OrthoBasis::new(n, mmat, &locked);
        for c in 0..x.ncols() {
            basis.push(x.column(c).into_owned());
        }
        if basis.cols.is_empty() {
            return Err(Error::NonConverged("trial basis collapsed".into()));
        }

        // Residual block for the current Ritz approximations.
        if !last_theta.is_empty() {
            let xm = basis.matrix();
            let kx = kmat.mul_dense(&xm);
            let mx = mmat.mul_dense(&xm);
            let a_small = symmetrize(xm.transpose() * &kx);
            let eig = nalgebra::SymmetricEigen::new(a_small);
            let (theta, ycols) = sorted_pairs(&eig);
            let ritz = &xm * &ycols;
            let kritz = &kx * &ycols;
            let mritz = &mx * &ycols;
            for c in 0..ritz.ncols().min(block) {
                let r = kritz.column(c) - mritz.column(c) * theta[c];
                let w = prec.apply(&r);
                basis.push(w);
            }
        } else {
            // First sweep: preconditioned residuals of the start block.
            let xm = basis.matrix();
            let kx = kmat.mul_dense(&xm);
            for c in 0..kx.ncols() {
                basis.push(prec.apply(&kx.column(c).into_owned()));
            }
        }
        if let Some(pm) = &p {
            for c in 0..pm.ncols() {
                basis.push(pm.column(c).into_owned());
            }
        }

        let s = basis.matrix();
        let ks = kmat.mul_dense(&s);
        let a_small = symmetrize(s.transpose() * &ks);
        let eig = nalgebra::SymmetricEigen::new(a_small);
        let (theta, y) = sorted_pairs(&eig);

        let keep = block.min(theta.len());
        let yk = y.columns(0, keep).into_owned();
        let x_new = &s * &yk;
        let kx_new = &ks * &yk;
        let mx_new = mmat.mul_dense(&x_new);

        // Residual norms for the leading pairs.
        let mut res = Vec::with_capacity(keep);
        for c in 0..keep {
            let r = kx_new.column(c) - mx_new.column(c) * theta[c];
            let mn = mx_new.column(c).norm().max(1e-300);
            res.push(r.norm() / ((1.0 + theta[c].abs()) * mn));
        }

        // Direction block for the next sweep: the S-components of the new X
        // with the previous-X part removed.
        let mut yp = yk.clone();
        for r in 0..x.ncols().min(yp.nrows()) {
            for c in 0..yp.ncols() {
                yp[(r, c)] = 0.0;
            }
        }
        let p_new = &s * &yp;

        // Lock converged leading pairs.
        let mut advance = 0;
        while advance < keep
            && res[advance] <= opts.tol
            && locked.len() < opts.n_eigs
        {
            locked.push((theta[advance], x_new.column(advance).into_owned()));
            advance += 1;
        }

        if locked.len() >= opts.n_eigs {
            last_theta = theta;
            last_res = res;
            break;
        }

        let active = keep - advance;
        if active == 0 {
            return Err(Error::NonConverged("active block emptied before convergence".into()));
        }
        x = x_new.columns(advance, active).into_owned();
        p = Some(p_new.columns(advance, active).into_owned());
        last_theta = theta;
        last_res = res;
    }

    let converged = locked.len() >= opts.n_eigs;
    if !converged {
        // Partial result: pad with the best current Ritz pairs, flagged.
        log::warn!(
            "eigensolver hit max_iter = {} with {} of {} pairs converged",
            opts.max_iter,
            locked.len(),
            opts.n_eigs
        );
    }
    let mut values: Vec<f64> = locked.iter().map(|(t, _)| *t).collect();
    let mut vectors: Vec<DVector<f64>> = locked.into_iter().map(|(_, v)| v).collect();
    if !converged {
        let need = opts.n_eigs - values.len();
        for c in 0..need.min(x.ncols()) {
            values.push(last_theta.get(c).copied().unwrap_or(f64::NAN));
            vectors.push(x.column(c).into_owned());
        }
    }

    let mut vm = DMatrix::zeros(n, values.len());
    for (c, v) in vectors.iter().enumerate() {
        vm.set_column(c, v);
    }
    let residuals = final_residuals(kmat, mmat, &values, &vm);
    let _ = last_res;
    let lambda_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(EigenResult { values, vectors: vm, residuals, iterations, converged, lambda_max })
}

fn final_residuals(
    k: &SparseSym,
    m: &SparseSym,
    values: &[f64],
    vectors: &DMatrix<f64>,
) -> Vec<f64> {
    let kx = k.mul_dense(vectors);
    let mx = m.mul_dense(vectors);
    (0..values.len())
        .map(|c| {
            let r = kx.column(c) - mx.column(c) * values[c];
            r.norm() / ((1.0 + values[c].abs()) * mx.column(c).norm().max(1e-300))
        })
        .collect()
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

/// Eigenpairs of a small symmetric matrix, ascending.
fn sorted_pairs(eig: &nalgebra::SymmetricEigen<f64, nalgebra::Dyn>) -> (Vec<f64>, DMatrix<f64>) {
    let k = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(k, k);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

enum Preconditioner {
    Identity,
    Diagonal(Vec<f64>),
}

impl Preconditioner {
    fn build(pair: &FemPair, p: Precond) -> Self {
        match p {
            Precond::None => Preconditioner::Identity,
            Precond::Diagonal => {
                // Mass-scaled diagonal of the pencil: robust for the
                // zero-row-sum stiffness of Neumann problems.
                let kd = pair.stiffness.diag();
                let md = pair.mass.diag();
                let d = kd
                    .iter()
                    .zip(&md)
                    .map(|(k, m)| {
                        let v = k + m;
                        if v.abs() > 1e-300 {
                            1.0 / v
                        } else {
                            1.0
                        }
                    })
                    .collect();
                Preconditioner::Diagonal(d)
            }
        }
    }

    fn apply(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            Preconditioner::Identity => r.clone(),
            Preconditioner::Diagonal(d) => {
                DVector::from_iterator(r.len(), r.iter().zip(d).map(|(a, b)| a * b))
            }
        }
    }
}

/// Incrementally M-orthonormalized column set with locked-space deflation.
struct OrthoBasis<'a> {
    n: usize,
    m: &'a SparseSym,
    locked: &'a [(f64, DVector<f64>)],
    cols: Vec<DVector<f64>>,
    mcols: Vec<DVector<f64>>,
    mlocked: Vec<DVector<f64>>,
}

impl<'a> OrthoBasis<'a> {
    fn new(n: usize, m: &'a SparseSym, locked: &'a [(f64, DVector<f64>)]) -> Self {
        let mlocked = locked
            .iter()
            .map(|(_, v)| DVector::from_vec(m.matvec_alloc(v.as_slice())))
            .collect();
        OrthoBasis { n, m, locked, cols: Vec::new(), mcols: Vec::new(), mlocked }
    }

    fn push(&mut self, mut v: DVector<f64>) {
        // Two MGS passes against locked then accepted columns.
        for _ in 0..2 {
            for (i, (_, lv)) in self.locked.iter().enumerate() {
                let c = self.mlocked[i].dot(&v);
                v -= lv * c;
            }
            for (i, bc) in self.cols.iter().enumerate() {
                let c = self.mcols[i].dot(&v);
                v -= bc * c;
            }
        }
        let mv = DVector::from_vec(self.m.matvec_alloc(v.as_slice()));
        let nrm2 = mv.dot(&v);
        // Drop near-dependent directions.
        if nrm2 <= 1e-20 {
            return;
        }
        let nrm = nrm2.sqrt();
        let vn = v / nrm;
        let mvn = mv / nrm;
        self.cols.push(vn);
        self.mcols.push(mvn);
    }

    fn matrix(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n, self.cols.len());
        for (c, v) in self.cols.iter().enumerate() {
            s.set_column(c, v);
        }
        s
    }
}
