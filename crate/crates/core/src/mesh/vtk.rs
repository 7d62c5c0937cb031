//! Legacy ASCII VTK export for surface and volume meshes: UNSTRUCTURED_GRID
//! with triangle (5) or tetrahedron (10) cells and region tags as CELL_DATA.

use std::io::Write;
use std::path::Path;

use super::{RegionTag, SurfaceMesh, VolumeMesh};
use crate::Result;

fn write_header<W: Write>(w: &mut W, title: &str) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    Ok(())
}

fn write_points<W: Write>(w: &mut W, nodes: &[super::V3]) -> Result<()> {
    writeln!(w, "POINTS {} double", nodes.len())?;
    for p in nodes {
        writeln!(w, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.z)?;
    }
    Ok(())
}

pub fn write_surface<W: Write>(mesh: &SurfaceMesh, w: &mut W) -> Result<()> {
    write_header(w, "open book surface mesh")?;
    write_points(w, &mesh.nodes)?;
    let tris: Vec<_> = mesh.tris.iter().filter(|t| !t.degenerate).collect();
    writeln!(w, "CELLS {} {}", tris.len(), tris.len() * 4)?;
    for t in &tris {
        writeln!(w, "3 {} {} {}", t.v[0], t.v[1], t.v[2])?;
    }
    writeln!(w, "CELL_TYPES {}", tris.len())?;
    for _ in &tris {
        writeln!(w, "5")?;
    }
    writeln!(w, "CELL_DATA {}", tris.len())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for t in &tris {
        writeln!(w, "{}", t.page)?;
    }
    Ok(())
}

pub fn write_volume<W: Write>(mesh: &VolumeMesh, w: &mut W) -> Result<()> {
    write_header(w, "fattened open book volume mesh")?;
    write_points(w, &mesh.nodes)?;
    writeln!(w, "CELLS {} {}", mesh.tets.len(), mesh.tets.len() * 5)?;
    for t in &mesh.tets {
        writeln!(w, "4 {} {} {} {}", t.v[0], t.v[1], t.v[2], t.v[3])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.tets.len())?;
    for _ in &mesh.tets {
        writeln!(w, "10")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.tets.len())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    let n_pages = mesh.surface.spec.pages.len();
    for t in &mesh.tets {
        let tag = match t.region {
            RegionTag::Page(k) => k as i64,
            RegionTag::Binding(m) => (n_pages + m) as i64,
        };
        writeln!(w, "{tag}")?;
    }
    Ok(())
}

pub fn export_surface_vtk(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_surface(mesh, &mut buf)?;
    crate::config::write_atomic(path, &buf)
}

pub fn export_volume_vtk(mesh: &VolumeMesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_volume(mesh, &mut buf)?;
    crate::config::write_atomic(path, &buf)
}

/// Minimal legacy-VTK reader used by round-trip tests: returns
/// (points, cells, cell_types, region tags).
pub fn parse_legacy(
    text: &str,
) -> Option<(Vec<[f64; 3]>, Vec<Vec<usize>>, Vec<u8>, Vec<i64>)> {
    let mut lines = text.lines();
    if lines.next()? != "# vtk DataFile Version 3.0" {
        return None;
    }
    let mut points = Vec::new();
    let mut cells = Vec::new();
    let mut types = Vec::new();
    let mut regions = Vec::new();
    let mut rest: Vec<&str> = lines.collect();
    rest.reverse();
    while let Some(line) = rest.pop() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("POINTS") => {
                let n: usize = it.next()?.parse().ok()?;
                for _ in 0..n {
                    let l = rest.pop()?;
                    let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
                    points.push([v[0], v[1], v[2]]);
                }
            }
            Some("CELLS") => {
                let n: usize = it.next()?.parse().ok()?;
                for _ in 0..n {
                    let l = rest.pop()?;
                    let v: Vec<usize> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
                    cells.push(v[1..].to_vec());
                }
            }
            Some("CELL_TYPES") => {
                let n: usize = it.next()?.parse().ok()?;
                for _ in 0..n {
                    types.push(rest.pop()?.trim().parse().ok()?);
                }
            }
            Some("SCALARS") => {
                rest.pop()?; // LOOKUP_TABLE
                for _ in 0..cells.len() {
                    regions.push(rest.pop()?.trim().parse().ok()?);
                }
            }
            _ => {}
        }
    }
    Some((points, cells, types, regions))
}
