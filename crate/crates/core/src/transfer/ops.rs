use std::collections::HashMap;

use crate::mesh::{FootRef, VolumeMesh};
use crate::{Error, Result};

/// Rectangular sparse map in compressed-row layout.
#[derive(Debug, Clone)]
pub struct SparseMap {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseMap {
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        assert_eq!(rows.len(), nrows);
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_by_key(|e| e.0);
            // Merge duplicate columns.
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for (c, v) in r {
                if c >= ncols {
                    return Err(Error::Assembly(format!("column {c} out of range")));
                }
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                col.push(c);
                val.push(v);
            }
            row_ptr[i + 1] = col.len();
        }
        Ok(SparseMap { nrows, ncols, row_ptr, col, val })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.val.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Number of structurally nonzero rows.
    pub fn occupied_rows(&self) -> usize {
        (0..self.nrows).filter(|&i| self.row_ptr[i + 1] > self.row_ptr[i]).count()
    }
}

/// The discrete transfer pair and its building blocks.
pub struct TransferOps {
    pub eps: f64,
    /// Averaging map J: volume dofs -> surface dofs, scaled by sqrt(2 eps).
    pub to_surface: SparseMap,
    /// Extension map K: surface dofs -> volume dofs, scaled by 1/sqrt(2 eps).
    pub to_volume: SparseMap,
    /// Fiber averages N on page-region surface rows (rows sum to one).
    pub fiber_average: SparseMap,
    /// Mollified cross-section averages P on binding-node rows.
    pub cross_section_average: SparseMap,
    pub mollifier_radius_factor: f64,
}

/// The fixed radial bump, exp(1 - 1/(1 - r^2)) inside the unit disk.
pub fn mollifier(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Trapezoid weights over a uniform fiber column: the discrete
/// (1/2eps) integral over the normal interval.
fn trapezoid_weights(n_levels: usize) -> Vec<f64> {
    let l = n_levels - 1;
    (0..n_levels)
        .map(|j| if j == 0 || j == l { 0.5 / l as f64 } else { 1.0 / l as f64 })
        .collect()
}

/// Fiber-average rows for every page-region surface node.
pub fn build_fiber_average(vmesh: &VolumeMesh) -> Result<SparseMap> {
    let n_surf = vmesh.surface.n_nodes();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_surf];
    for c in &vmesh.fiber_columns {
        let w = trapezoid_weights(c.vol_nodes.len());
        rows[c.surf_node] = c.vol_nodes.iter().zip(w).map(|(&v, w)| (v, w)).collect();
    }
    SparseMap::from_rows(n_surf, vmesh.n_nodes(), rows)
}

/// Sleeve-node lookup: surface node -> (binding, station, slot, dist index).
fn sleeve_lookup(vmesh: &VolumeMesh) -> HashMap<usize, (usize, usize, usize, usize)> {
    let mut map = HashMap::new();
    for (bi, bd) in vmesh.bindings.iter().enumerate() {
        for (si, rows) in bd.surf_rows.iter().enumerate() {
            for (slot, row) in rows.iter().enumerate() {
                for (di, &surf) in row.iter().enumerate() {
                    map.entry(surf).or_insert((bi, si, slot, di));
                }
            }
        }
    }
    map
}

/// Mollified cross-section average rows, one per binding-surface node: nodes
/// of the station's cross-section within `c_r * eps` of the binding point,
/// weighted by the radial bump and normalized to sum one.
pub fn build_mollified_average(vmesh: &VolumeMesh, m: usize, c_r: f64) -> Result<SparseMap> {
    let n_surf = vmesh.surface.n_nodes();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_surf];
    let bd = vmesh
        .bindings
        .iter()
        .find(|b| b.binding == m)
        .ok_or_else(|| Error::Geometry(format!("binding {m} not present in the volume mesh")))?;
    let radius = c_r * vmesh.eps;
    for (si, st) in bd.stations.iter().enumerate() {
        let center_surf = vmesh.surface.binding_nodes[m][si.min(vmesh.surface.binding_nodes[m].len() - 1)];
        let mut row = Vec::new();
        let mut total = 0.0;
        for (li, node) in st.cs.nodes.iter().enumerate() {
            let r = node.pos.norm() / radius;
            if r < 1.0 {
                let w = mollifier(r);
                if w > 0.0 {
                    row.push((st.vol_ids[li], w));
                    total += w;
                }
            }
        }
        if row.is_empty() {
            return Err(Error::Resolution(format!(
                "empty mollifier stencil at binding {m} station {si} (radius {radius})"
            )));
        }
        for e in row.iter_mut() {
            e.1 /= total;
        }
        rows[center_surf] = row;
    }
    SparseMap::from_rows(n_surf, vmesh.n_nodes(), rows)
}

/// Extension rows: fiber-constant on fattened pages, sector pullback along
/// the foliation on fattened bindings, both scaled by (2 eps)^(-1/2).
pub fn build_extension(vmesh: &VolumeMesh) -> Result<SparseMap> {
    let n_vol = vmesh.n_nodes();
    let n_surf = vmesh.surface.n_nodes();
    let scale = 1.0 / (2.0 * vmesh.eps).sqrt();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_vol];

    for c in &vmesh.fiber_columns {
        for &v in &c.vol_nodes {
            rows[v] = vec![(c.surf_node, scale)];
        }
    }

    for bd in &vmesh.bindings {
        for (si, st) in bd.stations.iter().enumerate() {
            let center_surf =
                vmesh.surface.binding_nodes[bd.binding][si.min(vmesh.surface.binding_nodes[bd.binding].len() - 1)];
            for (li, node) in st.cs.nodes.iter().enumerate() {
                let vid = st.vol_ids[li];
                if !rows[vid].is_empty() {
                    continue; // interface fibers already covered by a page column
                }
                match node.foot {
                    FootRef::Center => rows[vid] = vec![(center_surf, scale)],
                    FootRef::Trace { slot, dist } => {
                        let grid = &bd.sleeve_dists;
                        let surf_row = &bd.surf_rows[si][slot];
                        // Bracket the foot distance in the sleeve grid.
                        let hi = grid
                            .iter()
                            .position(|&d| d >= dist - 1e-12 * vmesh.eps)
                            .unwrap_or(grid.len() - 1);
                        if hi == 0 || (grid[hi] - dist).abs() < 1e-9 * vmesh.eps {
                            rows[vid] = vec![(surf_row[hi], scale)];
                        } else {
                            let lo = hi - 1;
                            let t = (dist - grid[lo]) / (grid[hi] - grid[lo]);
                            rows[vid] = vec![
                                (surf_row[lo], scale * (1.0 - t)),
                                (surf_row[hi], scale * t),
                            ];
                        }
                    }
                }
            }
        }
    }

    for (v, r) in rows.iter().enumerate() {
        if r.is_empty() {
            return Err(Error::Foliation(format!(
                "volume node {v} has no foliation foot point"
            )));
        }
    }
    SparseMap::from_rows(n_vol, n_surf, rows)
}

/// Averaging rows: sqrt(2 eps) times the fiber average on page-region nodes,
/// the mollified cross-section average on binding nodes, and the linear
/// sleeve blend between them in the transition band (the discrete stand-in
/// for the zero-average extension correction, supported within the sleeves).
pub fn build_averaging(
    vmesh: &VolumeMesh,
    fiber: &SparseMap,
    mollified: &[SparseMap],
) -> Result<SparseMap> {
    let n_surf = vmesh.surface.n_nodes();
    let n_vol = vmesh.n_nodes();
    let scale = (2.0 * vmesh.eps).sqrt();
    let lookup = sleeve_lookup(vmesh);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_surf];

    for surf in 0..n_surf {
        // Page-region nodes carry a fiber average row.
        let (ncols, nvals) = fiber.row(surf);
        if !ncols.is_empty() {
            rows[surf] = ncols.iter().zip(nvals).map(|(&c, &v)| (c, scale * v)).collect();
            continue;
        }
        let Some(&(bi, si, slot, di)) = lookup.get(&surf) else {
            return Err(Error::Geometry(format!(
                "surface node {surf} is neither page-region nor sleeve"
            )));
        };
        let bd = &vmesh.bindings[bi];
        let band = *bd.sleeve_dists.last().unwrap();
        let dist = bd.sleeve_dists[di];
        let w = (1.0 - dist / band).clamp(0.0, 1.0);
        let center_surf = vmesh.surface.binding_nodes[bd.binding]
            [si.min(vmesh.surface.binding_nodes[bd.binding].len() - 1)];
        let (pcols, pvals) = mollified[bi].row(center_surf);
        let mut row: Vec<(usize, f64)> =
            pcols.iter().zip(pvals).map(|(&c, &v)| (c, scale * w * v)).collect();
        if w < 1.0 {
            // Bent fiber average through the two adjacent sector sweeps.
            let st = &bd.stations[si];
            let mut half_cols: Vec<Vec<usize>> = Vec::new();
            for (sec_i, sec) in st.cs.sectors.iter().enumerate() {
                let s_here = if sec.left_slot == slot && (!st.cs.single_page || sec_i == 0) {
                    Some(sec.len1.min(band) - dist)
                } else if sec.right_slot == slot && (!st.cs.single_page || sec_i == 1) {
                    if st.cs.single_page {
                        Some(band - dist)
                    } else {
                        Some(band + dist)
                    }
                } else {
                    None
                };
                let Some(s) = s_here else { continue };
                if let Some(a) = sec
                    .s_values
                    .iter()
                    .position(|v| (v - s).abs() < 1e-8 * band.max(1e-12))
                {
                    half_cols.push(sec.node_grid[a].iter().map(|&li| st.vol_ids[li]).collect());
                }
            }
            if half_cols.len() != 2 {
                return Err(Error::Geometry(format!(
                    "sleeve node {surf}: expected 2 sweep half-columns, found {}",
                    half_cols.len()
                )));
            }
            for col in half_cols {
                let tw = trapezoid_weights(col.len());
                for (v, w_t) in col.into_iter().zip(tw) {
                    row.push((v, scale * (1.0 - w) * 0.5 * w_t));
                }
            }
        }
        rows[surf] = row;
    }
    SparseMap::from_rows(n_surf, n_vol, rows)
}

/// Build the full transfer pair.  `c_r` defaults to half the measured
/// inscribed-disk factor of the cross-sections.
pub fn build_transfer(vmesh: &VolumeMesh, c_r: Option<f64>) -> Result<TransferOps> {
    let c_r = c_r.unwrap_or_else(|| {
        let c1 = vmesh
            .bindings
            .iter()
            .flat_map(|b| b.stations.iter())
            .map(|s| s.cs.star.c1)
            .fold(f64::INFINITY, f64::min);
        if c1.is_finite() {
            (c1 / 2.0).max(0.2)
        } else {
            0.45
        }
    });
    let fiber = build_fiber_average(vmesh)?;
    let mut mollified = Vec::new();
    for bd in &vmesh.bindings {
        mollified.push(build_mollified_average(vmesh, bd.binding, c_r)?);
    }
    let to_surface = build_averaging(vmesh, &fiber, &mollified)?;
    let to_volume = build_extension(vmesh)?;
    // Collapse the per-binding mollified maps into one for reporting.
    let n_surf = vmesh.surface.n_nodes();
    let mut prow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_surf];
    for pm in &mollified {
        for i in 0..n_surf {
            let (c, v) = pm.row(i);
            if !c.is_empty() {
                prow[i] = c.iter().zip(v).map(|(&a, &b)| (a, b)).collect();
            }
        }
    }
    let cross_section_average = SparseMap::from_rows(n_surf, vmesh.n_nodes(), prow)?;
    Ok(TransferOps {
        eps: vmesh.eps,
        to_surface,
        to_volume,
        fiber_average: fiber,
        cross_section_average,
        mollifier_radius_factor: c_r,
    })
}
