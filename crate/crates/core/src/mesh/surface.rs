use std::collections::HashMap;

use super::{NodePool, V2, V3};
use crate::geometry::{OpenBookSpec, Side};
use crate::{Error, Result};

/// Interior degree-2 quadrature rule on the reference triangle
/// (barycentric (2/3, 1/6, 1/6) and permutations, weights 1/3).
pub const TRI_QUAD: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// First fundamental form data at one quadrature point of a triangle.
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    pub g: [f64; 3],
    pub sqrt_det: f64,
}

/// A surface triangle: global node ids, owning page, chart-space vertex
/// coordinates, and a flag for cells whose 3D image is collapsed (polar
/// degeneracies); those still carry metric area and enter assembly but are
/// excluded from topology checks and extrusion.
#[derive(Debug, Clone)]
pub struct Tri {
    pub v: [usize; 3],
    pub page: usize,
    pub chart: [V2; 3],
    pub degenerate: bool,
}

/// Structured grid bookkeeping for one page.
#[derive(Debug, Clone)]
pub struct PageGrid {
    pub page: usize,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// `node_ids[i1][i2]`; entries may repeat where the chart collapses.
    pub node_ids: Vec<Vec<usize>>,
    pub wrap_y1: bool,
    /// Geodesic distance of each y2 grid line from each incident binding:
    /// `(binding id, side, distances per y2 index)`.
    pub binding_dists: Vec<(usize, Side, Vec<f64>)>,
    /// Station index for each y1 column, per binding side on this page.
    pub col_station: Vec<(usize, Vec<usize>)>,
}

impl PageGrid {
    pub fn n1(&self) -> usize {
        self.y1.len()
    }
    pub fn n2(&self) -> usize {
        self.y2.len()
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceMeshOptions {
    /// Target edge length (geodesic units).
    pub h: f64,
    /// When set, transverse grids place lines exactly at the sleeve edges
    /// `a_m * eps` and subdivide the sleeves.
    pub sleeve_eps: Option<f64>,
    /// Sleeve subdivision count; `None` = `max(4, ceil(2 a_m))`.
    pub sleeve_divisions: Option<usize>,
}

impl SurfaceMeshOptions {
    pub fn plain(h: f64) -> Self {
        SurfaceMeshOptions { h, sleeve_eps: None, sleeve_divisions: None }
    }

    pub fn for_eps(h: f64, eps: f64) -> Self {
        SurfaceMeshOptions { h, sleeve_eps: Some(eps), sleeve_divisions: None }
    }
}

/// Conforming triangulation of the stratified surface.  Binding nodes are
/// single shared objects referenced by all incident pages' triangles.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub spec: OpenBookSpec,
    pub nodes: Vec<V3>,
    pub tris: Vec<Tri>,
    pub grids: Vec<PageGrid>,
    /// Ordered node cycle on each binding, one node per station.
    pub binding_nodes: Vec<Vec<usize>>,
    /// Arclength station values per binding (closed: length n, open: n+1).
    pub binding_stations: Vec<Vec<f64>>,
    /// Per node: nearest incident binding and geodesic distance, when on a
    /// page that touches a binding.
    pub node_sleeve: Vec<Option<(usize, f64)>>,
    /// Metric at the three quadrature points of each triangle.
    pub metric_cache: Vec<[MetricSample; 3]>,
    /// Metric-weighted area of each triangle (quadrature).
    pub tri_area: Vec<f64>,
    pub sleeve_widths: Vec<f64>,
    pub opts: SurfaceMeshOptions,
}

impl SurfaceMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_area(&self) -> f64 {
        self.tri_area.iter().sum()
    }

    /// Is the node inside the sleeve band of some binding at width `eps`?
    pub fn in_sleeve(&self, node: usize, eps: f64) -> bool {
        match self.node_sleeve[node] {
            Some((m, d)) => d < self.sleeve_widths[m] * eps - 1e-12,
            None => false,
        }
    }

    /// Within each page, every edge belongs to at most two non-degenerate
    /// triangles.  (Binding edges are shared by one triangle per incident
    /// page, which is exactly the continuity coupling.)
    pub fn edge_conformity_ok(&self) -> bool {
        let mut count: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for t in self.tris.iter().filter(|t| !t.degenerate) {
            for e in 0..3 {
                let (a, b) = (t.v[e], t.v[(e + 1) % 3]);
                let key = (t.page, a.min(b), a.max(b));
                *count.entry(key).or_insert(0) += 1;
            }
        }
        count.values().all(|&c| c <= 2)
    }

    /// Euler characteristic of one page's (non-degenerate) submesh.
    pub fn euler_characteristic(&self, page: usize) -> isize {
        let mut verts = std::collections::HashSet::new();
        let mut edges = std::collections::HashSet::new();
        let mut faces = 0isize;
        for t in self.tris.iter().filter(|t| t.page == page && !t.degenerate) {
            faces += 1;
            for &v in &t.v {
                verts.insert(v);
            }
            for e in 0..3 {
                let (a, b) = (t.v[e], t.v[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        verts.len() as isize - edges.len() as isize + faces
    }

    /// Serialize nodes, cells and tags to a JSON document (test fixtures).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "surface_mesh",
            "nodes": self.nodes.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
            "triangles": self.tris.iter().map(|t| t.v).collect::<Vec<_>>(),
            "page_tags": self.tris.iter().map(|t| t.page).collect::<Vec<_>>(),
            "degenerate": self.tris.iter().map(|t| t.degenerate).collect::<Vec<_>>(),
        })
    }
}

/// Station count for a binding at target edge length `h`.
fn station_count(spec: &OpenBookSpec, m: usize, h: f64) -> usize {
    let len = spec.bindings[m].length();
    let n = (len / h).ceil() as usize;
    if spec.bindings[m].closed() {
        n.max(8)
    } else {
        n.max(2)
    }
}

/// Grid values along the transverse coordinate of a page, in chart units,
/// with sleeve refinement near binding sides when `sleeve_eps` is set.
fn transverse_values(
    spec: &OpenBookSpec,
    page: usize,
    opts: &SurfaceMeshOptions,
    sleeve_widths: &[f64],
) -> Result<Vec<f64>> {
    let chart = &spec.pages[page];
    let [lo, hi] = chart.domain[1];
    let speed = chart.transverse_speed(Side::Y2Min, 0.5);
    let total = (hi - lo) * speed;
    if opts.h > total {
        return Err(Error::Resolution(format!(
            "h = {} exceeds the transverse extent {total} of page {page}",
            opts.h
        )));
    }

    // Geodesic distances measured from the lower end.
    let mut cuts: Vec<f64> = vec![0.0, total];
    let mut sleeve_at = [0.0f64, 0.0f64]; // band widths at lo / hi ends
    if let Some(eps) = opts.sleeve_eps {
        for (m, entry) in spec.bindings_of_page(page) {
            let a_m = sleeve_widths[m];
            let band = a_m * eps;
            let divisions =
                opts.sleeve_divisions.unwrap_or(((2.0 * a_m).ceil() as usize).max(4));
            let from_lo = matches!(entry.side, Side::Y2Min);
            if band >= total / 2.0 {
                return Err(Error::Fattening(format!(
                    "sleeve band {band} does not fit page {page} (extent {total})"
                )));
            }
            for j in 0..=divisions {
                let d = band * j as f64 / divisions as f64;
                cuts.push(if from_lo { d } else { total - d });
            }
            sleeve_at[if from_lo { 0 } else { 1 }] = band;
        }
    }
    // Fill the interior with ~h spacing between the sleeve bands.
    let (a, b) = (sleeve_at[0], total - sleeve_at[1]);
    let n_int = ((b - a) / opts.h).ceil().max(1.0) as usize;
    for j in 0..=n_int {
        cuts.push(a + (b - a) * j as f64 / n_int as f64);
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * total.max(1.0));
    Ok(cuts.into_iter().map(|d| lo + d / speed).collect())
}

/// Build a conforming surface triangulation: structured tensor grids per page
/// in chart space, grid lines aligned to binding sides so binding node cycles
/// are shared across incident pages.
pub fn triangulate_pages(spec: &OpenBookSpec, opts: &SurfaceMeshOptions) -> Result<SurfaceMesh> {
    if opts.h <= 0.0 {
        return Err(Error::Resolution("h must be positive".into()));
    }
    let mut sleeve_widths = vec![2.0; spec.bindings.len()];
    for m in 0..spec.bindings.len() {
        sleeve_widths[m] = spec.sleeve_width(m)?;
    }

    // Station grids per binding.
    let stations: Vec<Vec<f64>> = (0..spec.bindings.len())
        .map(|m| {
            let n = station_count(spec, m, opts.h);
            let len = spec.bindings[m].length();
            let last = if spec.bindings[m].closed() { n } else { n + 1 };
            (0..last).map(|i| len * i as f64 / n as f64).collect()
        })
        .collect();

    let mut pool = NodePool::new(1e-10);
    let mut grids = Vec::new();
    let mut tris: Vec<Tri> = Vec::new();

    for (k, chart) in spec.pages.iter().enumerate() {
        let bindings = spec.bindings_of_page(k);

        // Along-binding cell count: forced by station grids when present.
        let mut n1_cells: Option<usize> = None;
        for (m, _) in &bindings {
            let cells = if spec.bindings[*m].closed() {
                stations[*m].len()
            } else {
                stations[*m].len() - 1
            };
            match n1_cells {
                None => n1_cells = Some(cells),
                Some(c) if c != cells => {
                    return Err(Error::Conformity(format!(
                        "page {k} is forced to {c} and {cells} stations by different bindings"
                    )));
                }
                _ => {}
            }
        }
        let n1_cells = n1_cells.unwrap_or_else(|| {
            ((chart.max_line_length(Side::Y2Min) / opts.h).ceil() as usize).max(1)
        });
        let y1: Vec<f64> = (0..=n1_cells)
            .map(|i| {
                chart.domain[0][0]
                    + (chart.domain[0][1] - chart.domain[0][0]) * i as f64 / n1_cells as f64
            })
            .collect();

        let y2 = transverse_values(spec, k, opts, &sleeve_widths)?;

        // Wrap detection: the last y1 column coincides with the first.
        let wrap_y1 = {
            let mid = 0.5 * (chart.domain[1][0] + chart.domain[1][1]);
            let p0 = chart.position(V2::new(y1[0], mid));
            let p1 = chart.position(V2::new(*y1.last().unwrap(), mid));
            (p0 - p1).norm() < 1e-9
        };

        // Snap binding-side rows to the exact binding curve and resolve the
        // column -> station map.
        let mut col_station: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut side_rows: Vec<(usize, usize)> = Vec::new(); // (y2 row index, binding m)
        for (m, entry) in &bindings {
            let b = &spec.bindings[*m];
            let align = spec.side_alignment(*m, entry)?;
            let n_st = if b.closed() { stations[*m].len() } else { stations[*m].len() - 1 };
            let step = b.length() / n_st as f64;
            let mut map = Vec::with_capacity(y1.len());
            for (i, _) in y1.iter().enumerate() {
                let f = i as f64 / n1_cells as f64;
                let t = align.t_of_fraction(f, b.length(), b.closed());
                let sf = t / step;
                let s = sf.round() as usize;
                if (sf - s as f64).abs() > 1e-6 {
                    return Err(Error::Conformity(format!(
                        "page {k} column {i} does not land on a station of binding {m} (offset {})",
                        sf - s as f64
                    )));
                }
                map.push(s % stations[*m].len().max(1));
            }
            col_station.push((*m, map));
            let row = match entry.side {
                Side::Y2Min => 0,
                Side::Y2Max => y2.len() - 1,
                _ => unreachable!("validated: binding sides are y2-extremal"),
            };
            side_rows.push((row, *m));
        }

        // Node grid with wrap reuse and snapping.
        let n1 = y1.len();
        let n2 = y2.len();
        let mut node_ids = vec![vec![usize::MAX; n2]; n1];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                if wrap_y1 && i1 == n1 - 1 {
                    node_ids[i1][i2] = node_ids[0][i2];
                    continue;
                }
                // Snap binding rows onto the curve so shared nodes are exact.
                let mut pos = chart.position(V2::new(y1[i1], y2[i2]));
                for (row, m) in &side_rows {
                    if i2 == *row {
                        let (cm, cmap) =
                            col_station.iter().find(|(mm, _)| mm == m).expect("map built above");
                        let t = stations[*cm][cmap[i1].min(stations[*cm].len() - 1)];
                        pos = spec.bindings[*cm].point(t);
                    }
                }
                node_ids[i1][i2] = pool.insert(pos);
            }
        }

        // Triangles: split each cell along the (i1, i2) -> (i1+1, i2+1) diagonal.
        for i1 in 0..n1 - 1 {
            for i2 in 0..n2 - 1 {
                let corners = [(i1, i2), (i1 + 1, i2), (i1 + 1, i2 + 1), (i1, i2 + 1)];
                let ids: Vec<usize> = corners.iter().map(|&(a, b)| node_ids[a][b]).collect();
                let ys: Vec<V2> = corners.iter().map(|&(a, b)| V2::new(y1[a], y2[b])).collect();
                for t in [[0usize, 1, 2], [0, 2, 3]] {
                    let v = [ids[t[0]], ids[t[1]], ids[t[2]]];
                    let degenerate = v[0] == v[1] || v[1] == v[2] || v[0] == v[2];
                    tris.push(Tri {
                        v,
                        page: k,
                        chart: [ys[t[0]], ys[t[1]], ys[t[2]]],
                        degenerate,
                    });
                }
            }
        }

        let binding_dists = bindings
            .iter()
            .map(|(m, entry)| {
                let speed = chart.transverse_speed(entry.side, 0.5);
                let edge = match entry.side {
                    Side::Y2Min => chart.domain[1][0],
                    _ => chart.domain[1][1],
                };
                let d: Vec<f64> = y2.iter().map(|v| (v - edge).abs() * speed).collect();
                (*m, entry.side, d)
            })
            .collect();

        grids.push(PageGrid { page: k, y1, y2, node_ids, wrap_y1, binding_dists, col_station });
    }

    // Binding node cycles from any incident page's side row.
    let mut binding_nodes: Vec<Vec<usize>> = vec![Vec::new(); spec.bindings.len()];
    for (m, b) in spec.bindings.iter().enumerate() {
        let mut cycle = vec![usize::MAX; stations[m].len()];
        for t in (0..stations[m].len()).collect::<Vec<_>>() {
            let id = pool
                .find(&b.point(stations[m][t]))
                .ok_or_else(|| Error::Conformity(format!("binding {m} station {t} has no node")))?;
            cycle[t] = id;
        }
        binding_nodes[m] = cycle;
    }

    // Per-node sleeve distances.
    let mut node_sleeve: Vec<Option<(usize, f64)>> = vec![None; pool.len()];
    for g in &grids {
        for (m, _, dists) in &g.binding_dists {
            for i1 in 0..g.n1() {
                for i2 in 0..g.n2() {
                    let id = g.node_ids[i1][i2];
                    let d = dists[i2];
                    match node_sleeve[id] {
                        Some((_, old)) if old <= d => {}
                        _ => node_sleeve[id] = Some((*m, d)),
                    }
                }
            }
        }
    }

    // Metric cache and areas.
    let mut metric_cache = Vec::with_capacity(tris.len());
    let mut tri_area = Vec::with_capacity(tris.len());
    for t in &tris {
        let chart = &spec.pages[t.page];
        let mut samples = [MetricSample { g: [0.0; 3], sqrt_det: 0.0 }; 3];
        let mut area = 0.0;
        let a2 = chart_area2(&t.chart);
        for (q, (bary, w)) in TRI_QUAD.iter().enumerate() {
            let y = t.chart[0] * bary[0] + t.chart[1] * bary[1] + t.chart[2] * bary[2];
            let forms = chart.fundamental_forms(y).map_err(|e| {
                Error::Assembly(format!("metric evaluation failed on page {}: {e}", t.page))
            })?;
            let (ee, ff, gg) = forms.first;
            let det = ee * gg - ff * ff;
            let s = MetricSample { g: [ee, ff, gg], sqrt_det: det.sqrt() };
            samples[q] = s;
            area += w * s.sqrt_det * a2 / 2.0;
        }
        metric_cache.push(samples);
        tri_area.push(area);
    }
    for (t, &a) in tris.iter().zip(&tri_area) {
        if a <= 0.0 {
            return Err(Error::Assembly(format!(
                "triangle on page {} has non-positive metric area {a}",
                t.page
            )));
        }
    }

    Ok(SurfaceMesh {
        spec: spec.clone(),
        nodes: pool.nodes,
        tris,
        grids,
        binding_nodes,
        binding_stations: stations,
        node_sleeve,
        metric_cache,
        tri_area,
        sleeve_widths,
        opts: opts.clone(),
    })
}

/// Twice the signed chart-space area.
pub(crate) fn chart_area2(chart: &[V2; 3]) -> f64 {
    let (a, b, c) = (chart[0], chart[1], chart[2]);
    (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)
}
