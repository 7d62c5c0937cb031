use nalgebra::Matrix3;

use super::{DofProvenance, FemPair, SparseSym};
use crate::mesh::{RegionTag, VolumeMesh};
use crate::{Error, Result};

/// Which tetrahedra participate in an assembly.
#[derive(Clone, Copy)]
pub enum VolumeRestriction {
    All,
    Region(RegionTag),
    Pages,
    Bindings,
}

impl VolumeRestriction {
    fn admits(&self, tag: RegionTag) -> bool {
        match self {
            VolumeRestriction::All => true,
            VolumeRestriction::Region(r) => *r == tag,
            VolumeRestriction::Pages => matches!(tag, RegionTag::Page(_)),
            VolumeRestriction::Bindings => matches!(tag, RegionTag::Binding(_)),
        }
    }
}

/// Standard P1 tetrahedral stiffness/mass in ambient coordinates; Neumann is
/// natural so no boundary conditions are imposed.
pub fn assemble_volume(mesh: &VolumeMesh) -> Result<FemPair> {
    assemble_volume_region(mesh, VolumeRestriction::All)
}

/// Assembly over a subset of regions (matrices keep the full dof numbering;
/// rows of excluded nodes are empty in the stiffness and zero in the mass).
pub fn assemble_volume_region(
    mesh: &VolumeMesh,
    restriction: VolumeRestriction,
) -> Result<FemPair> {
    let n = mesh.n_nodes();
    let mut kt: Vec<(usize, usize, f64)> = Vec::new();
    let mut mt: Vec<(usize, usize, f64)> = Vec::new();
    let scale: f64 = mesh.nodes.iter().fold(1.0f64, |m, p| m.max(p.norm()));

    for (ci, t) in mesh.tets.iter().enumerate() {
        if !restriction.admits(t.region) {
            continue;
        }
        let [a, b, c, d] = t.v;
        let p0 = mesh.nodes[a];
        let j = Matrix3::from_columns(&[
            mesh.nodes[b] - p0,
            mesh.nodes[c] - p0,
            mesh.nodes[d] - p0,
        ]);
        let det = j.determinant();
        let vol = det / 6.0;
        if vol <= 1e-14 * scale.powi(3) {
            return Err(Error::Assembly(format!(
                "inverted or sliver tetrahedron at cell {ci} (volume {vol})"
            )));
        }
        let jinv_t = j
            .try_inverse()
            .ok_or_else(|| Error::Assembly(format!("singular jacobian at cell {ci}")))?
            .transpose();
        // Gradients of the barycentric basis.
        let g1 = jinv_t.column(0).into_owned();
        let g2 = jinv_t.column(1).into_owned();
        let g3 = jinv_t.column(2).into_owned();
        let g0 = -(g1 + g2 + g3);
        let grads = [g0, g1, g2, g3];
        for i in 0..4 {
            for k in 0..4 {
                kt.push((t.v[i], t.v[k], vol * grads[i].dot(&grads[k])));
                let mij = if i == k { vol / 10.0 } else { vol / 20.0 };
                mt.push((t.v[i], t.v[k], mij));
            }
        }
    }

    let stiffness = SparseSym::from_full_triplets(n, &kt)?;
    let mass = SparseSym::from_full_triplets(n, &mt)?;
    Ok(FemPair { stiffness, mass, dof_tags: vec![DofProvenance::Volume; n] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{solve_lowest, SolverOpts};
    use crate::geometry::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn unit_right_tet_stiffness_matches_hand_computation() {
        // Build a mesh holding exactly the reference tetrahedron.
        use crate::mesh::{SurfaceMeshOptions, Tet, VolumeMesh};
        let spec = fixtures::flat_square(1.0);
        let surface =
            crate::mesh::triangulate_pages(&spec, &SurfaceMeshOptions::plain(0.6)).unwrap();
        let nodes = vec![
            nalgebra::Vector3::new(0.0, 0.0, 0.0),
            nalgebra::Vector3::new(1.0, 0.0, 0.0),
            nalgebra::Vector3::new(0.0, 1.0, 0.0),
            nalgebra::Vector3::new(0.0, 0.0, 1.0),
        ];
        let mesh = VolumeMesh {
            surface,
            eps: 0.1,
            layers: 2,
            nodes,
            tets: vec![Tet { v: [0, 1, 2, 3], region: RegionTag::Page(0) }],
            surf_to_vol: vec![],
            fiber_columns: vec![],
            column_of_surf: vec![],
            bindings: vec![],
            gamma_nodes: vec![],
        };
        let pair = assemble_volume(&mesh).unwrap();
        let k = pair.stiffness.to_dense();
        // Hand-computed: V = 1/6; grad phi_0 = (-1,-1,-1), grad phi_i = e_i.
        let expect = [
            [0.5, -1.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0],
            [-1.0 / 6.0, 1.0 / 6.0, 0.0, 0.0],
            [-1.0 / 6.0, 0.0, 1.0 / 6.0, 0.0],
            [-1.0 / 6.0, 0.0, 0.0, 1.0 / 6.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(k[(i, j)], expect[i][j], epsilon = 1e-14);
            }
        }
        assert_relative_eq!(pair.mass_total(), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn thin_box_low_modes_match_2d_square() {
        // Box [0,1]^2 x [0, 0.1]: first nonzero eigenvalues are the square's
        // {pi^2, pi^2, 2 pi^2, 4 pi^2, 4 pi^2}; the transverse modes start
        // near (pi / 0.1)^2 and stay far above.
        let spec = fixtures::flat_square(1.0);
        let mesh = crate::mesh::assemble_volume_mesh(&spec, 0.05, 0.05, 2).unwrap();
        assert_relative_eq!(mesh.total_volume(), 0.1, epsilon = 1e-10);
        let pair = assemble_volume(&mesh).unwrap();
        assert_relative_eq!(pair.mass_total(), mesh.total_volume(), max_relative = 1e-10);
        assert!(pair.constant_kernel_defect() < 1e-12);
        let r = solve_lowest(&pair, &SolverOpts { n_eigs: 6, tol: 1e-8, ..Default::default() })
            .unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        let expect = [0.0, pi2, pi2, 2.0 * pi2, 4.0 * pi2, 4.0 * pi2];
        for i in 1..6 {
            assert_relative_eq!(r.values[i], expect[i], max_relative = 0.02);
        }
    }
}
