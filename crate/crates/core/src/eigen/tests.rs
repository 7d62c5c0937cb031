use super::*;
use crate::fem::{DofProvenance, FemPair, SparseSym};

/// P1 mass/stiffness pair on the interval [0, len] with n_elem elements.
pub(crate) fn interval_pair(len: f64, n_elem: usize) -> FemPair {
    let n = n_elem + 1;
    let h = len / n_elem as f64;
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    for e in 0..n_elem {
        let (a, b) = (e, e + 1);
        for (i, j, v) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
            kt.push((i, j, v / h));
        }
        for (i, j, v) in [(a, a, 2.0), (b, b, 2.0), (a, b, 1.0), (b, a, 1.0)] {
            mt.push((i, j, v * h / 6.0));
        }
    }
    FemPair {
        stiffness: SparseSym::from_full_triplets(n, &kt).unwrap(),
        mass: SparseSym::from_full_triplets(n, &mt).unwrap(),
        dof_tags: vec![DofProvenance::Volume; n],
    }
}

/// A seeded random symmetric positive-semidefinite pencil shaped like a 1D
/// mesh with jittered element lengths.
fn random_mesh_pair(n_nodes: usize, seed: u64) -> FemPair {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    for e in 0..n_nodes - 1 {
        let h: f64 = rng.gen_range(0.5..1.5);
        let (a, b) = (e, e + 1);
        for (i, j, v) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
            kt.push((i, j, v / h));
        }
        for (i, j, v) in [(a, a, 2.0), (b, b, 2.0), (a, b, 1.0), (b, a, 1.0)] {
            mt.push((i, j, v * h / 6.0));
        }
    }
    FemPair {
        stiffness: SparseSym::from_full_triplets(n_nodes, &kt).unwrap(),
        mass: SparseSym::from_full_triplets(n_nodes, &mt).unwrap(),
        dof_tags: vec![DofProvenance::Volume; n_nodes],
    }
}

#[test]
fn dense_oracle_diagonal_pair() {
    let k = SparseSym::from_full_triplets(2, &[(0, 0, 0.0), (1, 1, 2.0)]).unwrap();
    let m = SparseSym::from_full_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
    let pair = FemPair { stiffness: k, mass: m, dof_tags: vec![DofProvenance::Volume; 2] };
    let r = dense_oracle(&pair).unwrap();
    assert!((r.values[0] - 0.0).abs() < 1e-14);
    assert!((r.values[1] - 2.0).abs() < 1e-14);
}

#[test]
fn dense_oracle_interval_matches_dispersion_and_continuum() {
    // Discrete P1 Neumann eigenvalues on a uniform interval obey
    // lambda_h = (6/h^2) (1 - cos(k h pi/len... )) / (2 + cos(.)).
    let len = std::f64::consts::PI;
    let n_elem = 16;
    let pair = interval_pair(len, n_elem);
    let r = dense_oracle(&pair).unwrap();
    let h = len / n_elem as f64;
    for k in 0..4 {
        let kh = k as f64 * h; // wavenumber k since len = pi
        let pred = 6.0 / (h * h) * (1.0 - kh.cos()) / (2.0 + kh.cos());
        assert!(
            (r.values[k] - pred).abs() <= 1e-10 * pred.max(1.0),
            "dispersion mismatch at k={k}: {} vs {pred}",
            r.values[k]
        );
    }
    // Continuum value 1 recovered within the discretization error budget.
    assert!((r.values[1] - 1.0).abs() < 0.02, "lambda_1 = {}", r.values[1]);
    assert!(r.values[0].abs() < 1e-10);
}

#[test]
fn dense_oracle_rejects_large() {
    let pair = interval_pair(1.0, 2100);
    assert!(matches!(dense_oracle(&pair), Err(crate::Error::Size(_))));
}

#[test]
fn block_solver_matches_dense_oracle() {
    for seed in [1u64, 2, 3] {
        let pair = random_mesh_pair(200, seed);
        let opts = SolverOpts { n_eigs: 8, tol: 1e-10, ..Default::default() };
        let it = solve_lowest(&pair, &opts).unwrap();
        assert!(it.converged);
        let de = dense_oracle(&pair).unwrap();
        for i in 0..8 {
            let scale = de.values[i].abs().max(1.0);
            assert!(
                (it.values[i] - de.values[i]).abs() <= 1e-8 * scale,
                "pair {i}: {} vs {} (seed {seed})",
                it.values[i],
                de.values[i]
            );
        }
        it.verify_contract(&pair, opts.tol).unwrap();
    }
}

#[test]
fn block_solver_constant_mode_and_ordering() {
    let pair = interval_pair(2.0, 60);
    let r = solve_lowest(&pair, &SolverOpts::for_n(5)).unwrap();
    assert!(r.values[0].abs() <= 1e-10, "lambda_0 = {}", r.values[0]);
    // Near-constant ground vector.
    let v0 = r.vector(0);
    let mean: f64 = v0.iter().sum::<f64>() / v0.len() as f64;
    for v in &v0 {
        assert!((v - mean).abs() < 1e-5 * mean.abs().max(1e-10));
    }
    for w in r.values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
}

#[test]
fn seeded_determinism_is_bitwise() {
    let pair = random_mesh_pair(150, 9);
    let opts = SolverOpts { n_eigs: 6, tol: 1e-9, ..Default::default() };
    let a = solve_lowest(&pair, &opts).unwrap();
    let b = solve_lowest(&pair, &opts).unwrap();
    for i in 0..6 {
        assert_eq!(a.values[i].to_bits(), b.values[i].to_bits(), "eigenvalue {i} not bitwise equal");
    }
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn rayleigh_quotient_contract() {
    let pair = interval_pair(std::f64::consts::PI, 40);
    let r = solve_lowest(&pair, &SolverOpts::for_n(4).with_tol(1e-10)).unwrap();
    // Eigenvector reproduces its eigenvalue.
    for i in 0..4 {
        let u = r.vector(i);
        let q = rayleigh(&pair, &u).unwrap();
        assert!((q - r.values[i]).abs() <= 1e-8 * (1.0 + r.values[i]));
    }
    // Constants give zero.
    let ones = vec![1.0; pair.dim()];
    assert!(rayleigh(&pair, &ones).unwrap().abs() < 1e-12);
    // Any vector sits at or above the bottom of the spectrum.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u: Vec<f64> = (0..pair.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(rayleigh(&pair, &u).unwrap() >= r.values[0] - 1e-12);
    }
    // Zero M-norm is rejected.
    let zero = vec![0.0; pair.dim()];
    assert!(matches!(rayleigh(&pair, &zero), Err(crate::Error::SolverInput(_))));
}

#[test]
fn match_spectra_gaps() {
    let mk = |vals: Vec<f64>| {
        let n = vals.len();
        EigenResult {
            values: vals,
            vectors: nalgebra::DMatrix::zeros(1, n),
            residuals: vec![0.0; n],
            iterations: 0,
            converged: true,
            lambda_max: 0.0,
        }
    };
    let a = mk(vec![0.0, 1.0, 2.0]);
    let same = match_spectra(&a, &a, 3).unwrap();
    for (abs, rel) in same {
        assert_eq!(abs, 0.0);
        assert_eq!(rel, 0.0);
    }
    let b = mk(vec![0.0, 1.1, 2.3]);
    let gaps = match_spectra(&a, &b, 3).unwrap();
    assert!((gaps[1].0 - 0.1).abs() < 1e-12);
    assert!((gaps[2].0 - 0.3).abs() < 1e-12);
    assert!(matches!(match_spectra(&a, &b, 4), Err(crate::Error::Size(_))));
}

#[test]
fn subspace_monotonicity_of_ritz_values() {
    // Appending a trial vector never increases the k-th Ritz value.
    use rand::{Rng, SeedableRng};
    let pair = random_mesh_pair(60, 21);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let n = pair.dim();
    let ritz = |cols: &[Vec<f64>]| -> Vec<f64> {
        let mut s = nalgebra::DMatrix::zeros(n, cols.len());
        for (c, v) in cols.iter().enumerate() {
            s.column_mut(c).copy_from_slice(v);
        }
        let ks = pair.stiffness.mul_dense(&s);
        let ms = pair.mass.mul_dense(&s);
        let a = s.transpose() * ks;
        let b = s.transpose() * ms;
        let chol = nalgebra::Cholesky::new(b).unwrap();
        let t = chol.l().solve_lower_triangular(&a).unwrap();
        let red = chol.l().solve_lower_triangular(&t.transpose()).unwrap();
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(red).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    };
    let mut cols: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let before = ritz(&cols);
    cols.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let after = ritz(&cols);
    for k in 0..before.len() {
        assert!(after[k] <= before[k] + 1e-9, "Ritz value {k} increased");
    }
}

#[test]
fn clusters_group_close_values() {
    let r = EigenResult {
        values: vec![0.0, 1.0, 1.0 + 1e-9, 2.5],
        vectors: nalgebra::DMatrix::zeros(1, 4),
        residuals: vec![0.0; 4],
        iterations: 0,
        converged: true,
        lambda_max: 2.5,
    };
    let c = r.clusters(1e-6);
    assert_eq!(c, vec![0..1, 1..3, 3..4]);
}

#[test]
fn csv_schema_is_versioned() {
    let r = EigenResult {
        values: vec![0.0, 1.5],
        vectors: nalgebra::DMatrix::zeros(1, 2),
        residuals: vec![1e-12, 2e-12],
        iterations: 3,
        converged: true,
        lambda_max: 1.5,
    };
    let csv = r.to_csv();
    assert!(csv.starts_with("# schema: openbook-eigs v1\nindex,lambda,residual\n"));
    assert_eq!(csv.lines().count(), 4);
}
