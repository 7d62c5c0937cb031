//! P1 finite elements on a metric graph of 1D edges with a radial weight and
//! a potential: the workhorse behind the star-graph verification and the
//! axisymmetric reduction.  Continuity at shared vertices is encoded by
//! shared degrees of freedom; the 1D Kirchhoff condition is natural.

use crate::eigen::{dense_oracle, solve_lowest, SolverOpts};
use crate::fem::{DofProvenance, FemPair, SparseSym};
use crate::Result;

pub(crate) enum End1D {
    /// Glued to the numbered graph vertex.
    Vertex(usize),
    /// Natural (Neumann) end.
    Free,
    /// Essential zero (axis condition for azimuthal index >= 1).
    Clamped,
}

pub(crate) struct Edge1D<'a> {
    pub length: f64,
    pub n: usize,
    /// Measure weight rho(sigma).
    pub rho: &'a dyn Fn(f64) -> f64,
    /// Potential q(sigma) added to the stiffness as q u v rho.
    pub q: &'a dyn Fn(f64) -> f64,
    pub ends: [End1D; 2],
}

const GAUSS3: [(f64, f64); 3] = [
    (0.112701665379258, 0.277777777777778),
    (0.5, 0.444444444444444),
    (0.887298334620742, 0.277777777777778),
];

/// Assemble the generalized pair for a set of edges; returns the pair and the
/// number of degrees of freedom.
pub(crate) fn assemble_graph(edges: &[Edge1D], n_vertices: usize) -> Result<FemPair> {
    // Dof layout: graph vertices first, then interior nodes per edge.
    let mut next = n_vertices;
    let mut kt: Vec<(usize, usize, f64)> = Vec::new();
    let mut mt: Vec<(usize, usize, f64)> = Vec::new();
    let mut clamped: Vec<usize> = Vec::new();

    for e in edges {
        let h = e.length / e.n as f64;
        // Node dof ids along the edge, usize::MAX marks a clamped node.
        let mut ids = Vec::with_capacity(e.n + 1);
        for j in 0..=e.n {
            let id = if j == 0 {
                match e.ends[0] {
                    End1D::Vertex(v) => v,
                    End1D::Free => {
                        next += 1;
                        next - 1
                    }
                    End1D::Clamped => usize::MAX,
                }
            } else if j == e.n {
                match e.ends[1] {
                    End1D::Vertex(v) => v,
                    End1D::Free => {
                        next += 1;
                        next - 1
                    }
                    End1D::Clamped => usize::MAX,
                }
            } else {
                next += 1;
                next - 1
            };
            ids.push(id);
        }
        for el in 0..e.n {
            let x0 = el as f64 * h;
            let mut ke = [[0.0f64; 2]; 2];
            let mut me = [[0.0f64; 2]; 2];
            for (t, w) in GAUSS3 {
                let x = x0 + t * h;
                let rho = (e.rho)(x);
                let q = (e.q)(x);
                let phi = [1.0 - t, t];
                let dphi = [-1.0 / h, 1.0 / h];
                for i in 0..2 {
                    for j in 0..2 {
                        // Parenthesized basis products keep the element
                        // matrices bitwise symmetric.
                        ke[i][j] += w * h * rho * (dphi[i] * dphi[j] + q * (phi[i] * phi[j]));
                        me[i][j] += w * h * rho * (phi[i] * phi[j]);
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    let (a, b) = (ids[el + i], ids[el + j]);
                    if a == usize::MAX || b == usize::MAX {
                        continue;
                    }
                    kt.push((a, b, ke[i][j]));
                    mt.push((a, b, me[i][j]));
                }
            }
        }
        for id in ids {
            if id == usize::MAX {
                clamped.push(id);
            }
        }
    }
    let n = next;
    Ok(FemPair {
        stiffness: SparseSym::from_full_triplets(n, &kt)?,
        mass: SparseSym::from_full_triplets(n, &mt)?,
        dof_tags: vec![DofProvenance::Volume; n],
    })
}

/// Lowest `count` eigenvalues of the edge system.
pub(crate) fn solve_graph(edges: &[Edge1D], n_vertices: usize, count: usize) -> Result<Vec<f64>> {
    let pair = assemble_graph(edges, n_vertices)?;
    let n = pair.dim();
    let values = if n <= 1200 {
        dense_oracle(&pair)?.values
    } else {
        solve_lowest(
            &pair,
            &SolverOpts { n_eigs: count.min(n / 5), tol: 1e-10, max_iter: 3000, ..Default::default() },
        )?
        .values
    };
    Ok(values.into_iter().take(count).collect())
}
