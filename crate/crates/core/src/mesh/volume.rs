use std::collections::HashMap;

use super::cross_section::{build_cross_section, CrossSection, CrossSectionParams};
use super::{NodePool, SurfaceMesh, SurfaceMeshOptions, V3};
use crate::geometry::OpenBookSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    Page(usize),
    Binding(usize),
}

#[derive(Debug, Clone)]
pub struct Tet {
    pub v: [usize; 4],
    pub region: RegionTag,
}

/// Offset copies of one page-region surface node across the z-levels,
/// ordered from -eps to +eps along the page normal.
#[derive(Debug, Clone)]
pub struct FiberColumn {
    pub surf_node: usize,
    pub page: usize,
    pub vol_nodes: Vec<usize>,
}

/// One station of a fattened binding: the cross-section geometry plus the
/// global ids of its nodes.
#[derive(Debug, Clone)]
pub struct BindingStation {
    pub station: f64,
    pub cs: CrossSection,
    pub vol_ids: Vec<usize>,
}

/// Per-binding bookkeeping inside a volume mesh.
#[derive(Debug, Clone)]
pub struct BindingData {
    pub binding: usize,
    pub closed: bool,
    pub stations: Vec<BindingStation>,
    pub sleeve_dists: Vec<f64>,
    /// `[station][slot][dist_idx]` -> surface node id of the sleeve grid.
    pub surf_rows: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone)]
pub struct VolumeMeshOptions {
    pub eps: f64,
    pub h: f64,
    /// Even z-level count (>= 2) across the fattened thickness.
    pub layers: usize,
}

/// Structured, conforming tetrahedral mesh of the fattened domain.
#[derive(Debug, Clone)]
pub struct VolumeMesh {
    pub surface: SurfaceMesh,
    pub eps: f64,
    pub layers: usize,
    pub nodes: Vec<V3>,
    pub tets: Vec<Tet>,
    /// surface node id -> volume node id (every surface node is a mesh node).
    pub surf_to_vol: Vec<usize>,
    pub fiber_columns: Vec<FiberColumn>,
    /// surface node id -> index into `fiber_columns` (page-region nodes).
    pub column_of_surf: Vec<Option<usize>>,
    pub bindings: Vec<BindingData>,
    /// Interface node sets, one per (binding, slot): the shared fiber nodes.
    pub gamma_nodes: Vec<Vec<Vec<usize>>>,
}

impl VolumeMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn tet_volume(&self, t: &Tet) -> f64 {
        let [a, b, c, d] = t.v;
        let u = self.nodes[b] - self.nodes[a];
        let v = self.nodes[c] - self.nodes[a];
        let w = self.nodes[d] - self.nodes[a];
        u.cross(&v).dot(&w) / 6.0
    }

    pub fn total_volume(&self) -> f64 {
        self.tets.iter().map(|t| self.tet_volume(t)).sum()
    }

    pub fn region_volume(&self, tag: RegionTag) -> f64 {
        self.tets.iter().filter(|t| t.region == tag).map(|t| self.tet_volume(t)).sum()
    }

    /// Every face belongs to at most two tets, and the boundary faces form a
    /// closed surface (each boundary edge shared by exactly two boundary
    /// faces).
    pub fn watertight(&self) -> Result<usize> {
        let mut faces: HashMap<[usize; 3], usize> = HashMap::new();
        for t in &self.tets {
            let [a, b, c, d] = t.v;
            for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
                let mut f = f;
                f.sort_unstable();
                *faces.entry(f).or_insert(0) += 1;
            }
        }
        let mut boundary = Vec::new();
        for (f, c) in &faces {
            if *c > 2 {
                return Err(Error::Conformity(format!("face {f:?} shared by {c} tets")));
            }
            if *c == 1 {
                boundary.push(*f);
            }
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &boundary {
            for e in [(f[0], f[1]), (f[0], f[2]), (f[1], f[2])] {
                *edges.entry(e).or_insert(0) += 1;
            }
        }
        for (e, c) in edges {
            if c != 2 {
                return Err(Error::Conformity(format!(
                    "boundary edge {e:?} belongs to {c} boundary faces"
                )));
            }
        }
        Ok(boundary.len())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "volume_mesh",
            "eps": self.eps,
            "layers": self.layers,
            "nodes": self.nodes.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
            "tets": self.tets.iter().map(|t| t.v).collect::<Vec<_>>(),
            "regions": self
                .tets
                .iter()
                .map(|t| match t.region {
                    RegionTag::Page(k) => serde_json::json!(["page", k]),
                    RegionTag::Binding(m) => serde_json::json!(["binding", m]),
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Prism -> 3 tets with quad-face diagonals through each face's smallest
/// global id; neighboring prisms always agree on shared faces.
fn split_prism(v: [usize; 6]) -> [[usize; 4]; 3] {
    const ROT: [[usize; 6]; 6] = [
        [0, 1, 2, 3, 4, 5],
        [1, 2, 0, 4, 5, 3],
        [2, 0, 1, 5, 3, 4],
        [3, 5, 4, 0, 2, 1],
        [4, 3, 5, 1, 0, 2],
        [5, 4, 3, 2, 1, 0],
    ];
    let min_pos = (0..6).min_by_key(|&i| v[i]).unwrap();
    let r = &ROT[min_pos];
    let w = [v[r[0]], v[r[1]], v[r[2]], v[r[3]], v[r[4]], v[r[5]]];
    if w[1].min(w[5]) < w[2].min(w[4]) {
        [[w[0], w[1], w[2], w[5]], [w[0], w[1], w[5], w[4]], [w[0], w[4], w[5], w[3]]]
    } else {
        [[w[0], w[1], w[2], w[4]], [w[0], w[4], w[2], w[5]], [w[0], w[4], w[5], w[3]]]
    }
}

struct VolumeBuilder {
    pool: NodePool,
    tets: Vec<Tet>,
    scale: f64,
}

impl VolumeBuilder {
    fn new(scale: f64) -> Self {
        VolumeBuilder { pool: NodePool::new(1e-10), tets: Vec::new(), scale }
    }

    fn push_prism(&mut self, v: [usize; 6], region: RegionTag, nodes_hint: &[V3]) -> Result<()> {
        let _ = nodes_hint;
        for tet in split_prism(v) {
            // Skip collapsed tets from degenerate columns (poles).
            let mut uniq = tet;
            uniq.sort_unstable();
            if uniq.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let vol = {
                let a = self.pool.nodes[tet[0]];
                let u = self.pool.nodes[tet[1]] - a;
                let v2 = self.pool.nodes[tet[2]] - a;
                let w = self.pool.nodes[tet[3]] - a;
                u.cross(&v2).dot(&w) / 6.0
            };
            let floor = 1e-14 * self.scale.powi(3);
            if vol.abs() <= floor {
                continue;
            }
            let t = if vol < 0.0 { [tet[0], tet[2], tet[1], tet[3]] } else { tet };
            self.tets.push(Tet { v: t, region });
        }
        Ok(())
    }
}

/// Build the page-slab part: every page-region surface node is copied to the
/// uniform z-levels along its normal; prisms over the page-region triangles
/// are split into tetrahedra.
pub fn extrude_pages(surface: &SurfaceMesh, eps: f64, layers: usize) -> Result<VolumeMesh> {
    let mut pv = begin_volume(surface, eps, layers)?;
    finish_volume(surface, &mut pv)
}

struct PartialVolume {
    builder: VolumeBuilder,
    fiber_columns: Vec<FiberColumn>,
    column_of_surf: Vec<Option<usize>>,
    eps: f64,
    layers: usize,
}

fn begin_volume(surface: &SurfaceMesh, eps: f64, layers: usize) -> Result<PartialVolume> {
    if layers < 2 || layers % 2 != 0 {
        return Err(Error::Resolution(format!("layers must be an even count >= 2, got {layers}")));
    }
    if eps <= 0.0 {
        return Err(Error::Fattening("eps must be positive".into()));
    }
    if let Some(se) = surface.opts.sleeve_eps {
        if (se - eps).abs() > 1e-12 {
            return Err(Error::Conformity(format!(
                "surface mesh was built for eps = {se}, extrusion requested {eps}"
            )));
        }
    } else if !surface.spec.bindings.is_empty() {
        return Err(Error::Conformity(
            "surface mesh lacks sleeve-adapted grids; build it with SurfaceMeshOptions::for_eps"
                .into(),
        ));
    }

    let scale: f64 = surface
        .nodes
        .iter()
        .fold(0.0f64, |m, p| m.max(p.norm()))
        .max(1.0);
    let mut builder = VolumeBuilder::new(scale);

    // Fiber columns over page-region nodes.
    let spec = &surface.spec;
    let mut column_of_surf: Vec<Option<usize>> = vec![None; surface.n_nodes()];
    let mut fiber_columns: Vec<FiberColumn> = Vec::new();
    for g in &surface.grids {
        let chart = &spec.pages[g.page];
        for i1 in 0..g.n1() {
            for i2 in 0..g.n2() {
                let s = g.node_ids[i1][i2];
                if column_of_surf[s].is_some() {
                    continue;
                }
                if surface.in_sleeve(s, eps) {
                    continue;
                }
                // Normal with a nudge fallback at chart degeneracies (poles).
                let y0 = super::V2::new(g.y1[i1], g.y2[i2]);
                let normal = match chart.fundamental_forms(y0) {
                    Ok(f) => f.normal,
                    Err(_) => {
                        let mid = super::V2::new(
                            0.5 * (chart.domain[0][0] + chart.domain[0][1]),
                            0.5 * (chart.domain[1][0] + chart.domain[1][1]),
                        );
                        let nudge = (mid - y0) * 1e-6;
                        chart
                            .fundamental_forms(y0 + nudge)
                            .map_err(|e| {
                                Error::Fattening(format!(
                                    "cannot evaluate normal near a degenerate chart point: {e}"
                                ))
                            })?
                            .normal
                    }
                };
                // Fiber crossing guard: curvature times eps must stay below 1.
                if let Ok(f) = chart.fundamental_forms(y0) {
                    let (k1, k2) = f.principal_curvatures();
                    let kmax = k1.abs().max(k2.abs());
                    if kmax * eps >= 1.0 {
                        return Err(Error::Fattening(format!(
                            "normal fibers cross: curvature {kmax} * eps {eps} >= 1 on page {}",
                            g.page
                        )));
                    }
                }
                let base = surface.nodes[s];
                let mut vol_nodes = Vec::with_capacity(layers + 1);
                for j in 0..=layers {
                    let z = -eps + 2.0 * eps * j as f64 / layers as f64;
                    vol_nodes.push(builder.pool.insert(base + normal * z));
                }
                column_of_surf[s] = Some(fiber_columns.len());
                fiber_columns.push(FiberColumn { surf_node: s, page: g.page, vol_nodes });
            }
        }
    }

    // Prisms over page-region triangles.
    for t in surface.tris.iter().filter(|t| !t.degenerate) {
        let cols: Option<Vec<usize>> = t.v.iter().map(|&v| column_of_surf[v]).collect();
        let Some(cols) = cols else { continue };
        for j in 0..layers {
            let v = [
                fiber_columns[cols[0]].vol_nodes[j],
                fiber_columns[cols[1]].vol_nodes[j],
                fiber_columns[cols[2]].vol_nodes[j],
                fiber_columns[cols[0]].vol_nodes[j + 1],
                fiber_columns[cols[1]].vol_nodes[j + 1],
                fiber_columns[cols[2]].vol_nodes[j + 1],
            ];
            builder.push_prism(v, RegionTag::Page(t.page), &[])?;
        }
    }

    Ok(PartialVolume { builder, fiber_columns, column_of_surf, eps, layers })
}

fn finish_volume(surface: &SurfaceMesh, pv: &mut PartialVolume) -> Result<VolumeMesh> {
    // Surface nodes must all be volume nodes.
    let mut surf_to_vol = vec![usize::MAX; surface.n_nodes()];
    for (i, p) in surface.nodes.iter().enumerate() {
        match pv.builder.pool.find(p) {
            Some(id) => surf_to_vol[i] = id,
            None => {
                return Err(Error::Conformity(format!(
                    "surface node {i} at {p:?} is not a volume node"
                )))
            }
        }
    }
    Ok(VolumeMesh {
        surface: surface.clone(),
        eps: pv.eps,
        layers: pv.layers,
        nodes: std::mem::take(&mut pv.builder.pool.nodes),
        tets: std::mem::take(&mut pv.builder.tets),
        surf_to_vol,
        fiber_columns: std::mem::take(&mut pv.fiber_columns),
        column_of_surf: std::mem::take(&mut pv.column_of_surf),
        bindings: Vec::new(),
        gamma_nodes: Vec::new(),
    })
}

/// Cross-section stations and extrusion for one binding, on its own node
/// pool.  Station count must match the page meshes' binding segmentation when
/// the result is merged into a full volume mesh.
pub fn extrude_binding(
    spec: &OpenBookSpec,
    m: usize,
    eps: f64,
    n_stations: usize,
    layers: usize,
) -> Result<VolumeMesh> {
    let h = spec.bindings[m].length() / n_stations as f64;
    let surface = super::triangulate_pages(spec, &SurfaceMeshOptions::for_eps(h, eps))?;
    if surface.binding_stations[m].len() != n_stations && spec.bindings[m].closed() {
        return Err(Error::Conformity(format!(
            "station count {n_stations} does not match the surface segmentation {}",
            surface.binding_stations[m].len()
        )));
    }
    let mut builder = VolumeBuilder::new(2.0 * spec.bindings[m].length());
    let data = build_binding_solid(&surface, m, eps, layers, &mut builder)?;
    let nodes = builder.pool.nodes;
    let tets = builder.tets;
    Ok(VolumeMesh {
        surface,
        eps,
        layers,
        nodes,
        tets,
        surf_to_vol: Vec::new(),
        fiber_columns: Vec::new(),
        column_of_surf: Vec::new(),
        bindings: vec![data],
        gamma_nodes: Vec::new(),
    })
}

fn sleeve_grid_of(surface: &SurfaceMesh, m: usize, eps: f64) -> Result<Vec<f64>> {
    let a_m = surface.sleeve_widths[m];
    let band = a_m * eps;
    // Pull the sleeve rows from any incident page grid.
    for g in &surface.grids {
        for (mm, _, dists) in &g.binding_dists {
            if *mm != m {
                continue;
            }
            let mut d: Vec<f64> =
                dists.iter().copied().filter(|d| *d <= band + 1e-9 * band).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * band.max(1e-12));
            if d.len() >= 2 {
                return Ok(d);
            }
        }
    }
    Err(Error::Conformity(format!("no sleeve grid rows found for binding {m}")))
}

fn build_binding_solid(
    surface: &SurfaceMesh,
    m: usize,
    eps: f64,
    layers: usize,
    builder: &mut VolumeBuilder,
) -> Result<BindingData> {
    let spec = &surface.spec;
    let closed = spec.bindings[m].closed();
    let sleeve_dists = sleeve_grid_of(surface, m, eps)?;
    let params = CrossSectionParams {
        eps,
        sleeve_dists: Some(sleeve_dists.clone()),
        t_levels: layers / 2,
        arc_deg: 15.0,
    };

    let station_vals = surface.binding_stations[m].clone();
    let mut stations: Vec<BindingStation> = Vec::with_capacity(station_vals.len());
    for &t in &station_vals {
        let cs = build_cross_section(spec, m, t, &params)?;
        if let Some(prev) = stations.first() {
            if prev.cs.nodes.len() != cs.nodes.len() || prev.cs.tris != cs.tris {
                return Err(Error::Conformity(format!(
                    "cross-section topology changes between stations of binding {m}"
                )));
            }
        }
        let vol_ids: Vec<usize> =
            (0..cs.nodes.len()).map(|i| builder.pool.insert(cs.node3(i))).collect();
        stations.push(BindingStation { station: t, cs, vol_ids });
    }

    // Extrude between consecutive stations (wrapping when closed).
    let n = stations.len();
    let pairs: Vec<(usize, usize)> = if closed {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    } else {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    };
    for (ia, ib) in pairs {
        let (sa, sb) = (&stations[ia], &stations[ib]);
        for t in &sa.cs.tris {
            let v = [
                sa.vol_ids[t[0]],
                sa.vol_ids[t[1]],
                sa.vol_ids[t[2]],
                sb.vol_ids[t[0]],
                sb.vol_ids[t[1]],
                sb.vol_ids[t[2]],
            ];
            builder.push_prism(v, RegionTag::Binding(m), &[])?;
        }
    }

    // Surface sleeve rows per station and slot.
    let inc = spec.incidence_for(m).expect("validated");
    let mut surf_rows: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for (si, _) in stations.iter().enumerate() {
        let mut rows_per_slot = Vec::with_capacity(inc.entries.len());
        for entry in &inc.entries {
            let g = &surface.grids[entry.page];
            let (_, smap) = g
                .col_station
                .iter()
                .find(|(mm, _)| *mm == m)
                .ok_or_else(|| Error::Conformity(format!("page {} lacks station map", entry.page)))?;
            let col = smap
                .iter()
                .position(|&s| s == si)
                .ok_or_else(|| Error::Conformity(format!("station {si} missing on page {}", entry.page)))?;
            let (_, _, dists) = g
                .binding_dists
                .iter()
                .find(|(mm, sd, _)| *mm == m && *sd == entry.side)
                .ok_or_else(|| Error::Conformity("missing binding distances".into()))?;
            let mut row_nodes = Vec::with_capacity(sleeve_dists.len());
            for want in &sleeve_dists {
                let i2 = dists
                    .iter()
                    .position(|d| (d - want).abs() < 1e-9 * (1.0 + want))
                    .ok_or_else(|| {
                        Error::Conformity(format!(
                            "sleeve distance {want} missing from page {} grid",
                            entry.page
                        ))
                    })?;
                row_nodes.push(g.node_ids[col][i2]);
            }
            rows_per_slot.push(row_nodes);
        }
        surf_rows.push(rows_per_slot);
    }

    Ok(BindingData { binding: m, closed, stations, sleeve_dists, surf_rows })
}

/// Full fattened-domain mesh: page slabs and binding solids merged with node
/// identification on the interfaces.
pub fn assemble_volume_mesh(
    spec: &OpenBookSpec,
    eps: f64,
    h: f64,
    layers: usize,
) -> Result<VolumeMesh> {
    let opts = if spec.bindings.is_empty() {
        SurfaceMeshOptions::plain(h)
    } else {
        SurfaceMeshOptions::for_eps(h, eps)
    };
    let surface = super::triangulate_pages(spec, &opts)?;
    assemble_volume_mesh_on(&surface, eps, layers)
}

/// As `assemble_volume_mesh` but on an existing (eps-adapted) surface mesh.
pub fn assemble_volume_mesh_on(
    surface: &SurfaceMesh,
    eps: f64,
    layers: usize,
) -> Result<VolumeMesh> {
    let spec = &surface.spec;
    let mut pv = begin_volume(surface, eps, layers)?;

    let mut bindings = Vec::new();
    for m in 0..spec.bindings.len() {
        bindings.push(build_binding_solid(surface, m, eps, layers, &mut pv.builder)?);
    }

    let mut vm = finish_volume(surface, &mut pv)?;
    vm.bindings = bindings;

    // Interface conformity: the binding-side fiber nodes on each interface
    // must coincide with the page-side sleeve-edge fiber columns.
    let mut gamma_all = Vec::new();
    for bd in &vm.bindings {
        let inc = spec.incidence_for(bd.binding).expect("validated");
        let mut per_slot: Vec<Vec<usize>> = vec![Vec::new(); inc.entries.len()];
        for st in &bd.stations {
            for (slot, gnodes) in st.cs.gamma_nodes.iter().enumerate() {
                for &local in gnodes {
                    per_slot[slot].push(st.vol_ids[local]);
                }
            }
        }
        for (slot, entry) in inc.entries.iter().enumerate() {
            // Page-side set: fibers over the sleeve-edge surface nodes.
            let mut page_side: Vec<usize> = Vec::new();
            for st in &bd.surf_rows {
                let edge_surf = *st[slot].last().expect("sleeve grid non-empty");
                if let Some(ci) = vm.column_of_surf[edge_surf] {
                    page_side.extend(&vm.fiber_columns[ci].vol_nodes);
                }
            }
            let mut a = per_slot[slot].clone();
            let mut b = page_side;
            a.sort_unstable();
            a.dedup();
            b.sort_unstable();
            b.dedup();
            if a != b {
                return Err(Error::Conformity(format!(
                    "interface nodes mismatch on Gamma(page {}, binding {}): {} vs {} nodes",
                    entry.page,
                    bd.binding,
                    a.len(),
                    b.len()
                )));
            }
        }
        gamma_all.push(per_slot);
    }
    vm.gamma_nodes = gamma_all;

    // Disjointness of distinct fattened pages, sampled through tet AABBs.
    check_page_disjointness(&vm)?;

    Ok(vm)
}

fn check_page_disjointness(vm: &VolumeMesh) -> Result<()> {
    // Coarse per-page AABBs; refine to sampled point-in-tet checks only when
    // boxes overlap.
    let n_pages = vm.surface.spec.pages.len();
    let mut boxes: Vec<Option<(V3, V3)>> = vec![None; n_pages];
    for t in &vm.tets {
        let RegionTag::Page(k) = t.region else { continue };
        for &vid in &t.v {
            let p = vm.nodes[vid];
            let e = boxes[k].get_or_insert((p, p));
            e.0 = V3::new(e.0.x.min(p.x), e.0.y.min(p.y), e.0.z.min(p.z));
            e.1 = V3::new(e.1.x.max(p.x), e.1.y.max(p.y), e.1.z.max(p.z));
        }
    }
    for a in 0..n_pages {
        for b in (a + 1)..n_pages {
            let (Some(ba), Some(bb)) = (boxes[a], boxes[b]) else { continue };
            let overlap = ba.0.x <= bb.1.x
                && bb.0.x <= ba.1.x
                && ba.0.y <= bb.1.y
                && bb.0.y <= ba.1.y
                && ba.0.z <= bb.1.z
                && bb.0.z <= ba.1.z;
            if !overlap {
                continue;
            }
            // Sampled refinement: centroids of page-a tets inside page-b tets.
            let tets_b: Vec<&Tet> =
                vm.tets.iter().filter(|t| t.region == RegionTag::Page(b)).collect();
            for t in vm.tets.iter().filter(|t| t.region == RegionTag::Page(a)) {
                let c = (vm.nodes[t.v[0]] + vm.nodes[t.v[1]] + vm.nodes[t.v[2]] + vm.nodes[t.v[3]])
                    / 4.0;
                for tb in &tets_b {
                    if point_in_tet(vm, tb, &c) {
                        return Err(Error::Geometry(format!(
                            "fattened pages {a} and {b} overlap near ({:.4}, {:.4}, {:.4})",
                            c.x, c.y, c.z
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn point_in_tet(vm: &VolumeMesh, t: &Tet, p: &V3) -> bool {
    let a = vm.nodes[t.v[0]];
    let b = vm.nodes[t.v[1]];
    let c = vm.nodes[t.v[2]];
    let d = vm.nodes[t.v[3]];
    let vol = (b - a).cross(&(c - a)).dot(&(d - a));
    if vol.abs() < 1e-300 {
        return false;
    }
    let bary = [
        (b - *p).cross(&(c - *p)).dot(&(d - *p)),
        (*p - a).cross(&(c - a)).dot(&(d - a)),
        (b - a).cross(&(*p - a)).dot(&(d - a)),
        (b - a).cross(&(c - a)).dot(&(*p - a)),
    ];
    bary.iter().all(|v| v * vol >= -1e-12 * vol.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::mesh::{triangulate_pages, SurfaceMeshOptions};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn flat_slab_volume_exact_and_layer_invariant() {
        let spec = fixtures::flat_square(1.0);
        let surface = triangulate_pages(&spec, &SurfaceMeshOptions::plain(0.25)).unwrap();
        let eps = 0.05;
        let v2 = extrude_pages(&surface, eps, 2).unwrap();
        let v4 = extrude_pages(&surface, eps, 4).unwrap();
        assert_relative_eq!(v2.total_volume(), 2.0 * eps, epsilon = 1e-12);
        assert_relative_eq!(v4.total_volume(), 2.0 * eps, epsilon = 1e-12);
        v2.watertight().unwrap();
        // Fiber columns are collinear with the page normal.
        for c in &v2.fiber_columns {
            let a = v2.nodes[c.vol_nodes[0]];
            let b = v2.nodes[*c.vol_nodes.last().unwrap()];
            let dir = (b - a).normalize();
            assert!(dir.cross(&nalgebra::Vector3::z()).norm() < 1e-10);
        }
    }

    #[test]
    fn sphere_shell_volume_matches_quadrature() {
        // Offset shell over the unit sphere: volume per area element is
        // int_{-eps}^{eps} (1+z)^2 dz = 2 eps + 2 eps^3 / 3.  The quadrature
        // oracle uses the facet area of the triangulated sphere; the metric
        // (chart) area bounds it from above by the O(h^2) facet deficit.
        let spec = fixtures::single_sphere();
        let surface = triangulate_pages(&spec, &SurfaceMeshOptions::plain(0.12)).unwrap();
        let eps = 0.08;
        let vm = extrude_pages(&surface, eps, 4).unwrap();
        let facet_area: f64 = surface
            .tris
            .iter()
            .filter(|t| !t.degenerate)
            .map(|t| {
                let a = surface.nodes[t.v[0]];
                let b = surface.nodes[t.v[1]];
                let c = surface.nodes[t.v[2]];
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum();
        let shell_factor = 2.0 * eps + 2.0 * eps.powi(3) / 3.0;
        assert_relative_eq!(vm.total_volume(), facet_area * shell_factor, max_relative = 0.01);
        assert_relative_eq!(vm.total_volume(), surface.total_area() * shell_factor, max_relative = 0.02);
        vm.watertight().unwrap();
    }

    #[test]
    fn straight_binding_extrusion_is_prismatic() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let eps = 0.1;
        let vm = extrude_binding(&spec, 0, eps, 8, 4).unwrap();
        let cs_area = vm.bindings[0].stations[0].cs.area();
        assert_relative_eq!(vm.total_volume(), cs_area * 1.0, epsilon = 1e-10);
    }

    #[test]
    fn circular_binding_extrusion_matches_pappus_quadrature() {
        let spec = fixtures::disk_hemispheres();
        let eps = 0.05;
        let vm = extrude_binding(&spec, 0, eps, 64, 4).unwrap();
        // Exact rotational volume: int_omega (1 + z1 / R) dA * L, by
        // quadrature over the cross-section triangulation (R = 1).
        let cs = &vm.bindings[0].stations[0].cs;
        let mut weighted = 0.0;
        for t in &cs.tris {
            let a = cs.nodes[t[0]].pos;
            let b = cs.nodes[t[1]].pos;
            let c = cs.nodes[t[2]].pos;
            let area = 0.5 * ((b - a).x * (c - a).y - (c - a).x * (b - a).y);
            let z1c = (a.x + b.x + c.x) / 3.0;
            weighted += area * (1.0 + z1c / 1.0);
        }
        let expect = weighted * spec.bindings[0].length();
        assert_relative_eq!(vm.total_volume(), expect, max_relative = 0.02);
        // Loose sanity against the naive area * length.
        assert_relative_eq!(
            vm.total_volume(),
            cs.area() * spec.bindings[0].length(),
            max_relative = 0.05
        );
    }

    #[test]
    fn eps_scaling_keeps_structure() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let a = extrude_binding(&spec, 0, 0.1, 8, 4).unwrap();
        let b = extrude_binding(&spec, 0, 0.05, 8, 4).unwrap();
        assert_eq!(a.n_nodes(), b.n_nodes());
        assert_eq!(a.tets.len(), b.tets.len());
        // In-plane coordinates scale by two (station frames are shared).
        let st_a = &a.bindings[0].stations[0];
        let st_b = &b.bindings[0].stations[0];
        for (na, nb) in st_a.cs.nodes.iter().zip(&st_b.cs.nodes) {
            assert_relative_eq!(na.pos, nb.pos * 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn assembled_flat_book_is_watertight_and_conforming() {
        let spec = fixtures::flat_book(3, PI, 1.0);
        let eps = 0.1;
        let vm = assemble_volume_mesh(&spec, eps, 0.25, 4).unwrap();
        let boundary_faces = vm.watertight().unwrap();
        assert!(boundary_faces > 0);
        // Interface sets were checked during assembly; all surface nodes are
        // volume nodes.
        for (i, &v) in vm.surf_to_vol.iter().enumerate() {
            assert!((vm.surface.nodes[i] - vm.nodes[v]).norm() < 1e-10);
        }
        // Halving eps with the same h and layers preserves the cell structure.
        let vm2 = assemble_volume_mesh(&spec, eps / 2.0, 0.25, 4).unwrap();
        assert_eq!(vm.watertight().unwrap(), vm2.watertight().unwrap());
    }

    #[test]
    fn assembled_volume_matches_monte_carlo_membership() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let eps = 0.08;
        let vm = assemble_volume_mesh(&spec, eps, 0.2, 4).unwrap();
        // Analytic membership in the fiber model of the fattened book:
        // fibers over the pages plus the binding cross-section, with
        // reflective (sharp) ends in the binding direction -- exactly the
        // region the paper's construction fatten, and what test mode means.
        let angles = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        let inside = |p: &V3| -> bool {
            if !(0.0..=1.0).contains(&p.x) {
                return false;
            }
            let q = nalgebra::Vector2::new(p.y, p.z);
            if q.norm() <= eps {
                return true;
            }
            angles.iter().any(|alpha| {
                let v = q.x * alpha.cos() + q.y * alpha.sin();
                let w = -q.x * alpha.sin() + q.y * alpha.cos();
                (0.0..=1.0).contains(&v) && w.abs() <= eps
            })
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 600_000;
        let mut hits = 0usize;
        let (y0, y1) = (-1.2, 1.2);
        let (z0, z1) = (-1.2, 1.2);
        for _ in 0..n {
            let p = V3::new(
                rng.gen_range(0.0..1.0),
                rng.gen_range(y0..y1),
                rng.gen_range(z0..z1),
            );
            if inside(&p) {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64 * (y1 - y0) * (z1 - z0);
        assert_relative_eq!(vm.total_volume(), mc, max_relative = 0.01);
    }

    #[test]
    fn curved_fixture_assembles_conformally() {
        let spec = fixtures::disk_hemispheres();
        let vm = assemble_volume_mesh(&spec, 0.06, 0.3, 4).unwrap();
        vm.watertight().unwrap();
        // Region volumes: three page slabs roughly 2 eps area each plus a
        // binding solid.
        let vol_pages: f64 = (0..3).map(|k| vm.region_volume(RegionTag::Page(k))).sum();
        let vol_binding = vm.region_volume(RegionTag::Binding(0));
        assert!(vol_pages > 0.0 && vol_binding > 0.0);
        assert_relative_eq!(
            vm.total_volume(),
            vol_pages + vol_binding,
            epsilon = 1e-12
        );
    }
}
