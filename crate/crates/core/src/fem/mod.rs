//! Sparse stiffness/mass assembly: metric-weighted P1 Laplace-Beltrami on
//! surface meshes (the limit quadratic form, with binding continuity through
//! shared degrees of freedom and the Kirchhoff condition natural in the weak
//! form) and standard P1 tetrahedral Laplacian on volume meshes (Neumann is
//! natural; no boundary conditions are imposed anywhere).

pub mod sparse;
mod surface;
mod volume;

pub use sparse::SparseSym;
pub use surface::assemble_surface;
pub use volume::{assemble_volume, assemble_volume_region, VolumeRestriction};

use crate::Result;

/// Where a degree of freedom lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofProvenance {
    PageInterior { page: usize },
    Binding { binding: usize },
    Volume,
}

/// A quadratic form (stiffness) together with the L2 inner product (mass) on
/// the same degrees of freedom.
#[derive(Debug, Clone)]
pub struct FemPair {
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    pub dof_tags: Vec<DofProvenance>,
}

impl FemPair {
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// `max_i |(K 1)_i| / max |K|`: zero for an exact constant kernel.
    pub fn constant_kernel_defect(&self) -> f64 {
        let ones = vec![1.0; self.dim()];
        let k1 = self.stiffness.matvec_alloc(&ones);
        let m = self.stiffness.max_abs().max(1e-300);
        k1.iter().fold(0.0f64, |a, v| a.max(v.abs())) / m
    }

    /// Total of all mass entries = integral of 1 over the mesh.
    pub fn mass_total(&self) -> f64 {
        self.mass.sum_entries()
    }

    /// Smallest-eigenvalue estimate of the mass matrix by inverse power
    /// iteration with CG solves.  Positive for a usable L2 inner product.
    pub fn mass_min_eig_estimate(&self) -> Result<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 2654435761) % 97) as f64 / 97.0).collect();
        let nx = sparse::norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut lambda = 0.0;
        for _ in 0..8 {
            let y = self.mass.cg_solve(&x, 1e-8, 2000)?;
            let ny = sparse::norm(&y);
            x = y.iter().map(|v| v / ny).collect();
            lambda = self.mass.quad(&x);
        }
        Ok(lambda)
    }
}
