use super::{DofProvenance, FemPair, SparseSym};
use crate::mesh::{SurfaceMesh, TRI_QUAD};
use crate::{Error, Result};

/// Metric-weighted P1 Laplace-Beltrami pair on a surface mesh.
///
/// Element integrals are evaluated in chart space with the 3-point interior
/// quadrature rule: stiffness `grad^T g^-1 grad sqrt(det g)` and mass
/// `phi_i phi_j sqrt(det g)`.  Shared binding nodes implement continuity; the
/// junction (Kirchhoff) condition is natural in the weak form, so no extra
/// binding equations appear.
pub fn assemble_surface(mesh: &SurfaceMesh) -> Result<FemPair> {
    if mesh.metric_cache.len() != mesh.tris.len() {
        return Err(Error::Assembly("missing metric cache".into()));
    }
    let n = mesh.n_nodes();
    let mut kt: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.tris.len() * 9);
    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.tris.len() * 9);

    for (ti, t) in mesh.tris.iter().enumerate() {
        let a2 = crate::mesh::chart_area2_of(&t.chart);
        if a2 <= 0.0 {
            return Err(Error::Assembly(format!(
                "chart-degenerate triangle {ti} on page {} (area2 = {a2})",
                t.page
            )));
        }
        // P1 gradients in chart coordinates.
        let (p0, p1, p2) = (t.chart[0], t.chart[1], t.chart[2]);
        let grads = [
            [(p1.y - p2.y) / a2, (p2.x - p1.x) / a2],
            [(p2.y - p0.y) / a2, (p0.x - p2.x) / a2],
            [(p0.y - p1.y) / a2, (p1.x - p0.x) / a2],
        ];
        let mut ke = [[0.0f64; 3]; 3];
        let mut me = [[0.0f64; 3]; 3];
        for (q, (bary, w)) in TRI_QUAD.iter().enumerate() {
            let ms = mesh.metric_cache[ti][q];
            let [ee, ff, gg] = ms.g;
            let det = ee * gg - ff * ff;
            if det <= 0.0 {
                return Err(Error::Immersion(format!(
                    "degenerate metric at a quadrature point of triangle {ti}"
                )));
            }
            // g^-1 sqrt(det g), scaled by the quadrature weight and area.
            let scale = w * a2 / 2.0 / ms.sqrt_det;
            let (i00, i01, i11) = (gg * scale, -ff * scale, ee * scale);
            let mscale = w * a2 / 2.0 * ms.sqrt_det;
            for i in 0..3 {
                for j in 0..3 {
                    ke[i][j] += grads[i][0] * (i00 * grads[j][0] + i01 * grads[j][1])
                        + grads[i][1] * (i01 * grads[j][0] + i11 * grads[j][1]);
                    me[i][j] += mscale * (bary[i] * bary[j]);
                }
            }
        }
        // Mirror the element stiffness so (i, j) and (j, i) agree bitwise.
        for i in 0..3 {
            for j in (i + 1)..3 {
                let v = 0.5 * (ke[i][j] + ke[j][i]);
                ke[i][j] = v;
                ke[j][i] = v;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                kt.push((t.v[i], t.v[j], ke[i][j]));
                mt.push((t.v[i], t.v[j], me[i][j]));
            }
        }
    }

    let stiffness = SparseSym::from_full_triplets(n, &kt)?;
    let mass = SparseSym::from_full_triplets(n, &mt)?;
    let dof_tags = (0..n)
        .map(|i| match mesh.node_sleeve[i] {
            Some((m, d)) if d <= 1e-12 => DofProvenance::Binding { binding: m },
            _ => {
                // Attribute to the first page grid that owns the node.
                let page = mesh
                    .grids
                    .iter()
                    .find(|g| g.node_ids.iter().any(|col| col.contains(&i)))
                    .map(|g| g.page)
                    .unwrap_or(0);
                DofProvenance::PageInterior { page }
            }
        })
        .collect();
    Ok(FemPair { stiffness, mass, dof_tags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::mesh::{triangulate_pages, SurfaceMeshOptions};
    use approx::assert_relative_eq;

    #[test]
    fn single_flat_triangle_reference_mass() {
        // One cell of the unit square gives two right triangles; check the
        // P1 element mass area/12 * [[2,1,1],[1,2,1],[1,1,2]] through row sums
        // and the exact total.
        let spec = fixtures::flat_square(1.0);
        let mesh = triangulate_pages(&spec, &SurfaceMeshOptions::plain(1.0)).unwrap();
        assert_eq!(mesh.tris.len(), 2);
        let pair = assemble_surface(&mesh).unwrap();
        assert_relative_eq!(pair.mass_total(), 1.0, epsilon = 1e-14);
        // Row sum of the mass for the node shared by both triangles at the
        // diagonal: each element contributes area/3 per row.
        let rs = pair.mass.row_sums();
        let total: f64 = rs.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        // Diagonal entries of a reference triangle: area/6.
        let d = pair.mass.diag();
        assert!(d.iter().any(|&v| (v - 0.5 / 6.0).abs() < 1e-12));
    }

    #[test]
    fn stiffness_constants_in_kernel_everywhere() {
        for spec in [
            fixtures::flat_book(3, 1.0, 1.0),
            fixtures::disk_hemispheres(),
            fixtures::two_spheres(0.5),
        ] {
            let mesh = triangulate_pages(&spec, &SurfaceMeshOptions::plain(0.4)).unwrap();
            let pair = assemble_surface(&mesh).unwrap();
            assert!(
                pair.constant_kernel_defect() <= 1e-12,
                "constants not in kernel: {}",
                pair.constant_kernel_defect()
            );
            assert!(pair.stiffness.is_symmetric(0.0));
            assert_relative_eq!(pair.mass_total(), mesh.total_area(), max_relative = 1e-8);
        }
    }

    #[test]
    fn mass_positive_definite() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let mesh = triangulate_pages(&spec, &SurfaceMeshOptions::plain(0.3)).unwrap();
        let pair = assemble_surface(&mesh).unwrap();
        let est = pair.mass_min_eig_estimate().unwrap();
        assert!(est > 0.0, "mass min eig estimate {est}");
    }
}
