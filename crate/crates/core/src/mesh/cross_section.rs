use super::{V2, V3};
use crate::geometry::OpenBookSpec;
use crate::{Error, Result};

/// Where a fattened-binding point projects on the surface: the binding curve
/// itself, or a point of a sleeve trace at geodesic distance `dist` from the
/// binding along the page attached at incidence slot `slot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FootRef {
    Center,
    Trace { slot: usize, dist: f64 },
}

/// One node of a cross-section mesh, in normal-plane coordinates.
#[derive(Debug, Clone)]
pub struct CsNode {
    pub pos: V2,
    pub foot: FootRef,
    /// Foliation parameter: 0 on the surface, 1 on the outer boundary.
    pub t_frac: f64,
}

/// Role tags used by reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsNodeRole {
    Center,
    OnTrace,
    Interior,
}

/// The in-plane trace of one incident page inside the cross-section plane:
/// the page's transverse geodesic sampled at the sleeve grid distances.
#[derive(Debug, Clone)]
pub struct TraceGeom {
    pub slot: usize,
    pub page: usize,
    /// Geodesic distances from the binding, ascending, last = a_m * eps.
    pub dists: Vec<f64>,
    pub points: Vec<V2>,
    /// Unit in-plane tangents pointing away from the binding.
    pub tangents: Vec<V2>,
    /// Direction angle of the initial tangent.
    pub angle: f64,
}

/// A foliated sector between two consecutive page traces (or one of the two
/// half-sectors of a single-page binding).  `gamma1` is the inner boundary
/// (sleeve + binding + sleeve), `gamma2` the outer boundary on the free
/// surface; the sweep `gamma1(s) + t (gamma2(sigma(s)) - gamma1(s))`
/// parameterizes the sector.
#[derive(Debug, Clone)]
pub struct SectorGeom {
    pub left_slot: usize,
    pub right_slot: usize,
    /// Arclength grid on gamma1 with foot references and positions.
    pub s_values: Vec<f64>,
    pub feet: Vec<FootRef>,
    pub inner_pts: Vec<V2>,
    /// Outer boundary polyline with cumulative arclength.
    pub gamma2: Vec<V2>,
    pub gamma2_s: Vec<f64>,
    pub len1: f64,
    pub len2: f64,
    /// Local node ids, `node_grid[s][t]`, t = 0..=t_levels.
    pub node_grid: Vec<Vec<usize>>,
    pub t_levels: usize,
}

impl SectorGeom {
    /// Point on gamma2 at arclength w.
    pub fn gamma2_at(&self, w: f64) -> V2 {
        polyline_at(&self.gamma2, &self.gamma2_s, w)
    }

    /// Image of the inner point at arclength s under the boundary map.
    pub fn phi(&self, s: f64) -> V2 {
        self.gamma2_at(s * self.len2 / self.len1)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum CsRegion {
    DiskCore,
    Slab(usize),
    Sector(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct StarCertificate {
    /// Inscribed-disk factor: the polygon is star-shaped with respect to the
    /// disk of radius `c1 * eps` about the binding point (sampled test).
    pub c1: f64,
    /// Circumscribed factor: all vertices within `c2 * eps`.
    pub c2: f64,
}

/// A triangulated cross-section of a fattened binding at one station.
#[derive(Debug, Clone)]
pub struct CrossSection {
    pub binding: usize,
    pub station: f64,
    pub center3: V3,
    pub frame: (V3, V3),
    pub eps: f64,
    pub a_m: f64,
    pub traces: Vec<TraceGeom>,
    /// Slots sorted counterclockwise by trace angle.
    pub order: Vec<usize>,
    pub sectors: Vec<SectorGeom>,
    pub nodes: Vec<CsNode>,
    pub tris: Vec<[usize; 3]>,
    pub tri_region: Vec<CsRegion>,
    /// Foliation sector owning each triangle.
    pub tri_sector: Vec<usize>,
    /// Per slot: interface fiber node ids ordered along the +left-normal from
    /// -eps to +eps (length = 2 t_levels + 1).
    pub gamma_nodes: Vec<Vec<usize>>,
    pub star: StarCertificate,
    pub single_page: bool,
}

#[derive(Debug, Clone)]
pub struct CrossSectionParams {
    pub eps: f64,
    /// Sleeve grid distances (ascending, starting at 0, ending at a_m eps).
    pub sleeve_dists: Option<Vec<f64>>,
    /// Foliation levels between surface and outer boundary.
    pub t_levels: usize,
    /// Maximum arc step in degrees when sampling disk arcs.
    pub arc_deg: f64,
}

impl CrossSectionParams {
    pub fn new(eps: f64) -> Self {
        CrossSectionParams { eps, sleeve_dists: None, t_levels: 2, arc_deg: 15.0 }
    }
}

fn rot90ccw(v: V2) -> V2 {
    V2::new(-v.y, v.x)
}

fn polyline_cumlen(pts: &[V2]) -> Vec<f64> {
    let mut s = vec![0.0];
    for w in pts.windows(2) {
        s.push(s.last().unwrap() + (w[1] - w[0]).norm());
    }
    s
}

/// Sample a polyline with cumulative-arclength table `cum` at arclength `w`.
pub(crate) fn polyline_sample(pts: &[V2], cum: &[f64], w: f64) -> V2 {
    polyline_at(pts, cum, w)
}

fn polyline_at(pts: &[V2], cum: &[f64], w: f64) -> V2 {
    let total = *cum.last().unwrap();
    let w = w.clamp(0.0, total);
    let i = match cum.binary_search_by(|v| v.partial_cmp(&w).unwrap()) {
        Ok(i) => i.min(pts.len() - 1),
        Err(i) => i - 1,
    };
    if i + 1 >= pts.len() {
        return pts[pts.len() - 1];
    }
    let seg = cum[i + 1] - cum[i];
    if seg <= 0.0 {
        return pts[i];
    }
    let f = (w - cum[i]) / seg;
    pts[i] * (1.0 - f) + pts[i + 1] * f
}

fn seg_intersect(p1: V2, p2: V2, q1: V2, q2: V2) -> Option<(f64, V2)> {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = r.x * s.y - r.y * s.x;
    if denom.abs() < 1e-14 {
        return None;
    }
    let qp = q1 - p1;
    let t = (qp.x * s.y - qp.y * s.x) / denom;
    let u = (qp.x * r.y - qp.y * r.x) / denom;
    if (-1e-9..=1.0 + 1e-9).contains(&t) && (-1e-9..=1.0 + 1e-9).contains(&u) {
        Some((t, p1 + r * t))
    } else {
        None
    }
}

/// Build a cross-section with default parameters.
pub fn cross_section(spec: &OpenBookSpec, m: usize, t: f64, eps: f64) -> Result<CrossSection> {
    build_cross_section(spec, m, t, &CrossSectionParams::new(eps))
}

pub fn build_cross_section(
    spec: &OpenBookSpec,
    m: usize,
    station: f64,
    params: &CrossSectionParams,
) -> Result<CrossSection> {
    let eps = params.eps;
    if eps <= 0.0 {
        return Err(Error::Fattening("eps must be positive".into()));
    }
    let binding = &spec.bindings[m];
    let inc = spec
        .incidence_for(m)
        .ok_or_else(|| Error::Validation(format!("binding {m} has no incidence")))?;
    let a_m = spec.sleeve_width(m)?;
    let center3 = binding.point(station);
    let (ez1, ez2) = binding.frame(station);
    let tangent3 = binding.tangent(station);

    let dists = match &params.sleeve_dists {
        Some(d) => {
            let band = a_m * eps;
            if (d.last().copied().unwrap_or(0.0) - band).abs() > 1e-9 * band {
                return Err(Error::Conformity(format!(
                    "sleeve grid must end at a_m eps = {band}, got {:?}",
                    d.last()
                )));
            }
            d.clone()
        }
        None => {
            let n = ((2.0 * a_m).ceil() as usize).max(4);
            (0..=n).map(|j| a_m * eps * j as f64 / n as f64).collect()
        }
    };

    // Page traces in the normal plane.
    let mut traces = Vec::new();
    for (slot, entry) in inc.entries.iter().enumerate() {
        let chart = &spec.pages[entry.page];
        let align = spec.side_alignment(m, entry)?;
        let f = align.fraction_of_t(station, binding.length(), binding.closed());
        let mut points = Vec::with_capacity(dists.len());
        let mut tangents = Vec::with_capacity(dists.len());
        for &d in &dists {
            let y = chart.offset_from_side(entry.side, f, d);
            let (pos, jac, _) = chart.eval_unchecked(y);
            let rel = pos - center3;
            let off_plane = rel.dot(&tangent3).abs();
            if off_plane > 1e-7 * (1.0 + rel.norm()) {
                return Err(Error::Geometry(format!(
                    "trace of page {} leaves the normal plane at distance {d} (offset {off_plane})",
                    entry.page
                )));
            }
            points.push(V2::new(rel.dot(&ez1), rel.dot(&ez2)));
            let speed = chart.transverse_speed(entry.side, f);
            let t3 = jac[entry.side.fixed_coord()] * (entry.side.inward_sign() / speed);
            let t2 = V2::new(t3.dot(&ez1), t3.dot(&ez2));
            let n = t2.norm();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::Geometry(format!(
                    "trace tangent of page {} is not unit in-plane (|t| = {n})",
                    entry.page
                )));
            }
            tangents.push(t2 / n);
        }
        let angle = tangents[0].y.atan2(tangents[0].x);
        traces.push(TraceGeom { slot, page: entry.page, dists: dists.clone(), points, tangents, angle });
    }

    // Counterclockwise ordering of traces.  Angles are compared relative to
    // trace 0 so the atan2 branch cut cannot permute the order between
    // stations (transversality keeps traces off each other).
    let base = traces[0].angle;
    let rel = |a: f64| (a - base).rem_euclid(std::f64::consts::TAU);
    let mut order: Vec<usize> = (0..traces.len()).collect();
    order.sort_by(|&a, &b| rel(traces[a].angle).partial_cmp(&rel(traces[b].angle)).unwrap());

    let single_page = traces.len() == 1;
    let sector_defs: Vec<(usize, usize)> = if single_page {
        vec![(0, 0), (0, 0)]
    } else {
        (0..order.len()).map(|i| (order[i], order[(i + 1) % order.len()])).collect()
    };

    let mut nodes: Vec<CsNode> = Vec::new();
    let mut node_lookup: Vec<(V2, usize)> = Vec::new();
    let tol = 1e-10 * (1.0 + eps);
    let mut intern = |pos: V2, foot: FootRef, t_frac: f64, nodes: &mut Vec<CsNode>| -> usize {
        // Dedup only surface nodes (t = 0); interior sweep nodes are unique.
        if t_frac == 0.0 {
            for (p, id) in &node_lookup {
                if (p - pos).norm() <= tol {
                    return *id;
                }
            }
        }
        let id = nodes.len();
        nodes.push(CsNode { pos, foot, t_frac });
        if t_frac == 0.0 {
            node_lookup.push((pos, id));
        }
        id
    };

    // Pass 1: outer boundaries per sector, plus the pullback refinement of
    // every gamma2 vertex onto the inner path.  Trace subdivisions are then
    // UNIONED across the two sectors flanking each trace so the shared
    // surface nodes conform (no hanging nodes on the sleeves).
    struct SectorDraft {
        ls: usize,
        rs: usize,
        g2: Vec<V2>,
        gamma2_s: Vec<f64>,
        len1: f64,
        len2: f64,
    }
    let band = a_m * eps;
    let mut drafts: Vec<SectorDraft> = Vec::new();
    let mut slot_dists: Vec<Vec<f64>> = vec![dists.clone(); traces.len()];
    for (si, &(ls, rs)) in sector_defs.iter().enumerate() {
        let left = &traces[ls];
        let right = &traces[rs];

        // Sector-facing side normals.
        let upper = !single_page || si == 0;
        let nl: Vec<V2> = left
            .tangents
            .iter()
            .map(|t| if upper { rot90ccw(*t) } else { -rot90ccw(*t) })
            .collect();
        let nr: Vec<V2> = right
            .tangents
            .iter()
            .map(|t| if upper { -rot90ccw(*t) } else { rot90ccw(*t) })
            .collect();
        let side_l: Vec<V2> =
            left.points.iter().zip(&nl).map(|(p, n)| p + n * eps).collect();
        let side_r: Vec<V2> =
            right.points.iter().zip(&nr).map(|(p, n)| p + n * eps).collect();

        // Outer boundary gamma2: walk the left side from its interface corner
        // toward the binding; joined to the right side either at a crossing
        // or through a disk arc.
        let mut g2: Vec<V2> = Vec::new();
        if single_page {
            // Corner -> tangency -> quarter arc to the antipodal point.
            for a in (0..side_l.len()).rev() {
                g2.push(side_l[a]);
            }
            let a0 = nl[0].y.atan2(nl[0].x);
            let back = -left.tangents[0];
            let mut a1 = back.y.atan2(back.x);
            // Choose the rotation direction away from the page.
            while (a1 - a0) * if upper { 1.0 } else { -1.0 } < 0.0 {
                a1 += if upper { std::f64::consts::TAU } else { -std::f64::consts::TAU };
            }
            let steps = (((a1 - a0).abs().to_degrees() / params.arc_deg).ceil() as usize).max(1);
            for q in 1..=steps {
                let a = a0 + (a1 - a0) * q as f64 / steps as f64;
                g2.push(V2::new(a.cos(), a.sin()) * eps);
            }
        } else {
            // Find the last crossing between the two side polylines walking
            // from the corners inward.
            let mut cross: Option<(usize, usize, V2)> = None;
            'outer: for ia in (0..side_l.len() - 1).rev() {
                for ib in (0..side_r.len() - 1).rev() {
                    if let Some((_, x)) =
                        seg_intersect(side_l[ia], side_l[ia + 1], side_r[ib], side_r[ib + 1])
                    {
                        cross = Some((ia, ib, x));
                        break 'outer;
                    }
                }
            }
            match cross {
                Some((ia, ib, x)) => {
                    for a in ((ia + 1)..side_l.len()).rev() {
                        g2.push(side_l[a]);
                    }
                    g2.push(x);
                    for b in (ib + 1)..side_r.len() {
                        g2.push(side_r[b]);
                    }
                }
                None => {
                    // Wide gap: tangency points joined by a disk arc.
                    for a in (0..side_l.len()).rev() {
                        g2.push(side_l[a]);
                    }
                    let a0 = nl[0].y.atan2(nl[0].x);
                    let mut a1 = nr[0].y.atan2(nr[0].x);
                    while a1 < a0 - 1e-12 {
                        a1 += std::f64::consts::TAU;
                    }
                    let steps =
                        (((a1 - a0).abs().to_degrees() / params.arc_deg).ceil() as usize).max(1);
                    for q in 1..=steps {
                        let a = a0 + (a1 - a0) * q as f64 / steps as f64;
                        g2.push(V2::new(a.cos(), a.sin()) * eps);
                    }
                    for b in 1..side_r.len() {
                        g2.push(side_r[b]);
                    }
                }
            }
        }
        // Drop exactly repeated points (collinear sides may coincide at a
        // tangency shared by both legs).
        g2.dedup_by(|a, b| (*a - *b).norm() < 1e-13 * eps.max(1e-12));
        let gamma2_s = polyline_cumlen(&g2);
        let len2 = *gamma2_s.last().unwrap();
        if len2 <= 0.0 {
            return Err(Error::Geometry(format!(
                "sector {si} of binding {m} has an empty outer boundary; \
                 transversality too weak for the sampled slabs"
            )));
        }
        let len1 = if single_page { band } else { 2.0 * band };

        // Pull every gamma2 vertex back to the inner path and record the
        // landing distance on the owning trace.
        let scale = len1 / len2;
        for w in gamma2_s[1..gamma2_s.len() - 1].iter() {
            let s = w * scale;
            if single_page {
                let d = band - s;
                if d > 0.0 && d < band {
                    slot_dists[ls].push(d);
                }
            } else if s < band {
                let d = band - s;
                if d > 0.0 {
                    slot_dists[ls].push(d);
                }
            } else {
                let d = s - band;
                if d > 0.0 && d < band {
                    slot_dists[rs].push(d);
                }
            }
        }
        drafts.push(SectorDraft { ls, rs, g2, gamma2_s, len1, len2 });
    }
    for d in slot_dists.iter_mut() {
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d.dedup_by(|a, b| (*a - *b).abs() < 1e-6 * band.max(1e-12));
    }

    // Pass 2: sweep grids from the shared per-trace subdivisions.
    let mut sectors = Vec::new();
    for draft in drafts {
        let SectorDraft { ls, rs, g2, gamma2_s, len1, len2 } = draft;
        let tiny = 1e-9 * band;
        let mut s_values: Vec<f64> = Vec::new();
        let mut feet: Vec<FootRef> = Vec::new();
        for &d in slot_dists[ls].iter().rev().filter(|&&d| d > tiny) {
            s_values.push(band - d);
            feet.push(FootRef::Trace { slot: ls, dist: d });
        }
        s_values.push(band);
        feet.push(FootRef::Center);
        if !single_page {
            for &d in slot_dists[rs].iter().filter(|&&d| d > tiny) {
                s_values.push(band + d);
                feet.push(FootRef::Trace { slot: rs, dist: d });
            }
        }

        // Inner positions from the traces.
        let inner_pts: Vec<V2> = feet
            .iter()
            .map(|f| match f {
                FootRef::Center => V2::zeros(),
                FootRef::Trace { slot, dist } => {
                    let tr = &traces[*slot];
                    // dists double as the arclength table of the trace.
                    polyline_at(&tr.points, &tr.dists, *dist)
                }
            })
            .collect();

        // Sweep node grid.
        let t_levels = params.t_levels.max(1);
        let mut node_grid = vec![vec![0usize; t_levels + 1]; s_values.len()];
        for (a, &s) in s_values.iter().enumerate() {
            let outer = polyline_at(&g2, &gamma2_s, s * len2 / len1);
            for b in 0..=t_levels {
                let tf = b as f64 / t_levels as f64;
                let pos = inner_pts[a] * (1.0 - tf) + outer * tf;
                node_grid[a][b] = intern(pos, feet[a], tf, &mut nodes);
            }
        }

        sectors.push(SectorGeom {
            left_slot: ls,
            right_slot: rs,
            s_values,
            feet,
            inner_pts,
            gamma2: g2,
            gamma2_s,
            len1,
            len2,
            node_grid,
            t_levels,
        });
    }

    // Triangulate sweep quads.  The 2D diagonal choice is free (the extruded
    // prisms resolve their own faces by global ids); prefer the lowest-id
    // diagonal but avoid splits that create collinear triangles, which occur
    // where the sweep fans around the binding point.
    let mut tris = Vec::new();
    let mut tri_sector = Vec::new();
    let area2_of = |t: &[usize; 3], nodes: &[CsNode]| -> f64 {
        let a = nodes[t[0]].pos;
        let b = nodes[t[1]].pos;
        let c = nodes[t[2]].pos;
        (b - a).x * (c - a).y - (c - a).x * (b - a).y
    };
    let floor = 1e-10 * eps * eps;
    for (si, sec) in sectors.iter().enumerate() {
        for a in 0..sec.s_values.len() - 1 {
            for b in 0..sec.t_levels {
                let q = [
                    sec.node_grid[a][b],
                    sec.node_grid[a + 1][b],
                    sec.node_grid[a + 1][b + 1],
                    sec.node_grid[a][b + 1],
                ];
                if q[0] == q[1] {
                    // Collapsed first row at the shared center node.
                    tris.push([q[0], q[2], q[3]]);
                    tri_sector.push(si);
                    continue;
                }
                let split_a = ([q[0], q[1], q[2]], [q[0], q[2], q[3]]);
                let split_b = ([q[0], q[1], q[3]], [q[1], q[2], q[3]]);
                let prefer_a = q[0].min(q[2]) < q[1].min(q[3]);
                let ok = |s: &([usize; 3], [usize; 3])| {
                    area2_of(&s.0, &nodes).abs() > floor && area2_of(&s.1, &nodes).abs() > floor
                };
                let (t1, t2) = if prefer_a && ok(&split_a) {
                    split_a
                } else if ok(&split_b) {
                    split_b
                } else if ok(&split_a) {
                    split_a
                } else {
                    return Err(Error::Geometry(format!(
                        "degenerate sweep quad near ({:.3e}, {:.3e})",
                        nodes[q[0]].pos.x, nodes[q[0]].pos.y
                    )));
                };
                tris.push(t1);
                tri_sector.push(si);
                tris.push(t2);
                tri_sector.push(si);
            }
        }
    }
    // Orientation.
    for t in &mut tris {
        if area2_of(t, &nodes) < 0.0 {
            t.swap(1, 2);
        }
    }

    // Region tags.
    let tri_region: Vec<CsRegion> = tris
        .iter()
        .zip(&tri_sector)
        .map(|(t, &si)| {
            let c = (nodes[t[0]].pos + nodes[t[1]].pos + nodes[t[2]].pos) / 3.0;
            classify_region(&traces, eps, a_m, c, si)
        })
        .collect();

    // Interface fiber node lists per slot, ordered along +rot90ccw(tangent).
    let mut gamma_nodes = vec![Vec::new(); traces.len()];
    for (slot, gamma) in gamma_nodes.iter_mut().enumerate() {
        // Sector with this slot on its left has the +n half; on its right the -n half.
        let plus = sectors
            .iter()
            .enumerate()
            .find(|(si, s)| s.left_slot == slot && (!single_page || *si == 0));
        let minus = sectors
            .iter()
            .enumerate()
            .find(|(si, s)| s.right_slot == slot && (!single_page || *si == 1));
        let (pi, plus) = plus.ok_or_else(|| Error::Geometry("missing +side sector".into()))?;
        let (mi, minus) = minus.ok_or_else(|| Error::Geometry("missing -side sector".into()))?;
        let _ = (pi, mi);
        // Outer end of the trace: s = 0 on the left leg of `plus`, s = len1 on
        // the right leg of `minus` (single-page: s = 0 on both).
        let plus_col = &plus.node_grid[0];
        let minus_col = if single_page {
            &minus.node_grid[0]
        } else {
            minus.node_grid.last().unwrap()
        };
        for b in (1..=minus.t_levels).rev() {
            gamma.push(minus_col[b]);
        }
        for b in 0..=plus.t_levels {
            gamma.push(plus_col[b]);
        }
    }

    let star = star_certificate(&traces, eps, a_m, &nodes);

    Ok(CrossSection {
        binding: m,
        station,
        center3,
        frame: (ez1, ez2),
        eps,
        a_m,
        traces,
        order,
        sectors,
        nodes,
        tris,
        tri_region,
        tri_sector,
        gamma_nodes,
        star,
        single_page,
    })
}

fn classify_region(traces: &[TraceGeom], eps: f64, a_m: f64, p: V2, sector: usize) -> CsRegion {
    let _ = a_m;
    if p.norm() <= eps {
        return CsRegion::DiskCore;
    }
    for tr in traces {
        if let Some((d, _)) = perp_dist_to_polyline(&tr.points, p, 1e-6) {
            if d <= eps + 1e-12 {
                return CsRegion::Slab(tr.slot);
            }
        }
    }
    CsRegion::Sector(sector)
}

/// (distance to polyline, arclength of the foot point).
fn dist_to_polyline(pts: &[V2], p: V2) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut s0 = 0.0;
    for w in pts.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len <= 0.0 {
            continue;
        }
        let t = ((p - w[0]).dot(&d) / (len * len)).clamp(0.0, 1.0);
        let q = w[0] + d * t;
        let dist = (p - q).norm();
        if dist < best.0 {
            best = (dist, s0 + t * len);
        }
        s0 += len;
    }
    best
}

/// Distance to the polyline counting only perpendicular feet inside a
/// segment (parameter tolerance `t_tol`): the band around the polyline ends
/// with flat caps (the interface fibers), not disks.  Feet are clamped to the
/// segment, so tolerated overshoot just measures to the segment end.
fn perp_dist_to_polyline(pts: &[V2], p: V2, t_tol: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut s0 = 0.0;
    for w in pts.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len <= 0.0 {
            continue;
        }
        let t_raw = (p - w[0]).dot(&d) / (len * len);
        if (-t_tol..=1.0 + t_tol).contains(&t_raw) {
            let t = t_raw.clamp(0.0, 1.0);
            let q = w[0] + d * t;
            let dist = (p - q).norm();
            if best.map(|b| dist < b.0).unwrap_or(true) {
                best = Some((dist, s0 + t * len));
            }
        }
        s0 += len;
    }
    best
}

impl CrossSection {
    /// Analytic membership test: inside the eps-disk or within eps of a
    /// sleeve trace (flat interface caps: only perpendicular feet count).
    pub fn contains(&self, p: V2) -> bool {
        self.contains_slack(p, 1e-10)
    }

    /// Membership with a relative slack on the band width, absorbing the
    /// chord sagitta of sampled curved traces in boundary certificates.
    pub fn contains_slack(&self, p: V2, rel: f64) -> bool {
        let band = self.eps * (1.0 + rel);
        let t_tol = (rel * 10.0).max(1e-9);
        if p.norm() <= band {
            return true;
        }
        for tr in &self.traces {
            if let Some((d, _)) = perp_dist_to_polyline(&tr.points, p, t_tol) {
                if d <= band {
                    return true;
                }
            }
        }
        false
    }

    /// Area of the triangulation.
    pub fn area(&self) -> f64 {
        self.tris
            .iter()
            .map(|t| {
                let a = self.nodes[t[0]].pos;
                let b = self.nodes[t[1]].pos;
                let c = self.nodes[t[2]].pos;
                0.5 * ((b - a).x * (c - a).y - (c - a).x * (b - a).y)
            })
            .sum()
    }

    /// 3D position of a cross-section node.
    pub fn node3(&self, id: usize) -> V3 {
        let p = self.nodes[id].pos;
        self.center3 + self.frame.0 * p.x + self.frame.1 * p.y
    }

    /// All boundary vertices (outer sweep rows).
    pub fn boundary_vertices(&self) -> Vec<V2> {
        let mut out = Vec::new();
        for sec in &self.sectors {
            for col in &sec.node_grid {
                out.push(self.nodes[col[sec.t_levels]].pos);
            }
        }
        out
    }
}

fn star_certificate(traces: &[TraceGeom], eps: f64, a_m: f64, nodes: &[CsNode]) -> StarCertificate {
    let _ = a_m;
    // 2% slack over the band: sampled curved traces make the swept boundary
    // exceed the exact band by the chord sagitta.
    let slack = eps * 1.02;
    let contains = |p: V2| -> bool {
        if p.norm() <= slack {
            return true;
        }
        for tr in traces {
            if let Some((d, _)) = perp_dist_to_polyline(&tr.points, p, 0.2) {
                if d <= slack {
                    return true;
                }
            }
        }
        false
    };
    let mut c2: f64 = 0.0;
    for n in nodes {
        c2 = c2.max(n.pos.norm() / eps);
    }
    let mut c1 = 0.0;
    'radius: for frac in [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1] {
        let rho = frac * eps;
        for n in nodes {
            for q in 0..12 {
                let a = std::f64::consts::TAU * q as f64 / 12.0;
                let d = V2::new(a.cos(), a.sin()) * rho;
                // Sample the segment from the disk point to the vertex.
                for s in 1..=12 {
                    let f = s as f64 / 12.0;
                    let p = d * (1.0 - f) + n.pos * f;
                    if !contains(p) {
                        continue 'radius;
                    }
                }
            }
        }
        c1 = frac;
        break;
    }
    StarCertificate { c1, c2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn four_page_cross_section_area_matches_monte_carlo() {
        let spec = fixtures::flat_book(4, 1.0, 1.0);
        let eps = 0.1;
        let cs = cross_section(&spec, 0, 0.5, eps).unwrap();
        assert_relative_eq!(cs.a_m, 2.0);
        // Interface fibers: length 2 eps at in-plane distance a_m eps.
        for g in &cs.gamma_nodes {
            let first = cs.nodes[g[0]].pos;
            let last = cs.nodes[g[g.len() - 1]].pos;
            assert_relative_eq!((first - last).norm(), 2.0 * eps, epsilon = 1e-12);
            let mid = (first + last) / 2.0;
            assert_relative_eq!(mid.norm(), cs.a_m * eps, epsilon = 1e-12);
        }
        // Monte-Carlo membership area.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let r = (cs.a_m + 1.5) * eps;
        let n = 400_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let p = V2::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
            if cs.contains(p) {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64 * (2.0 * r) * (2.0 * r);
        assert_relative_eq!(cs.area(), mc, max_relative = 0.01);
    }

    #[test]
    fn single_page_cross_section_closed_form_area() {
        let spec = fixtures::single_page_strip(1.0, 1.0);
        let eps = 0.08;
        let cs = cross_section(&spec, 0, 0.5, eps).unwrap();
        assert!(cs.single_page);
        assert_eq!(cs.sectors.len(), 2);
        // Slab + half disk.
        let expect = 2.0 * eps * cs.a_m * eps + PI * eps * eps / 2.0;
        assert_relative_eq!(cs.area(), expect, max_relative = 0.01);
        // The two foliations share their limit at the binding point: both
        // outer boundaries end at the antipodal point -eps * tangent.
        let e1 = *cs.sectors[0].gamma2.last().unwrap();
        let e2 = *cs.sectors[1].gamma2.last().unwrap();
        assert_relative_eq!(e1, e2, epsilon = 1e-9);
    }

    #[test]
    fn homothety_under_eps_halving() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let a = cross_section(&spec, 0, 0.3, 0.1).unwrap();
        let b = cross_section(&spec, 0, 0.3, 0.05).unwrap();
        assert_eq!(a.nodes.len(), b.nodes.len());
        for (na, nb) in a.nodes.iter().zip(&b.nodes) {
            assert_relative_eq!(na.pos, nb.pos * 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_certificate_holds_on_fixtures() {
        for (spec, eps) in [
            (fixtures::flat_book(3, 1.0, 1.0), 0.1),
            (fixtures::flat_book(4, 1.0, 1.0), 0.07),
            (fixtures::single_page_strip(1.0, 1.0), 0.1),
            (fixtures::disk_hemispheres(), 0.05),
            (fixtures::two_spheres(0.5), 0.04),
        ] {
            let l = spec.bindings[0].length();
            for q in 0..4 {
                let cs = cross_section(&spec, 0, l * q as f64 / 4.0, eps).unwrap();
                assert!(cs.star.c1 >= 0.3, "c1 = {} too small", cs.star.c1);
                assert!(
                    cs.star.c2 <= cs.a_m + 2.0,
                    "c2 = {} exceeds (1 + a_m) + 1",
                    cs.star.c2
                );
            }
        }
    }

    #[test]
    fn region_tags_and_sector_ownership() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let cs = cross_section(&spec, 0, 0.5, 0.1).unwrap();
        let mut disk = 0;
        let mut slab = 0;
        for r in &cs.tri_region {
            match r {
                CsRegion::DiskCore => disk += 1,
                CsRegion::Slab(_) => slab += 1,
                CsRegion::Sector(_) => {}
            }
        }
        // The cross-section is exactly the eps-disk union the sleeve slabs.
        assert!(disk > 0 && slab > 0, "disk {disk} slab {slab}");
        // Every triangle belongs to a foliation sector, and all sectors own
        // triangles.
        assert_eq!(cs.tri_sector.len(), cs.tris.len());
        for si in 0..cs.sectors.len() {
            assert!(cs.tri_sector.iter().any(|&s| s == si), "sector {si} owns no triangles");
        }
    }

    #[test]
    fn oversized_eps_is_rejected_by_sleeve_fit() {
        let spec = fixtures::flat_book(3, 1.0, 0.3);
        // Sleeve band 2 * eps = 0.4 exceeds half the page depth 0.3.
        let err = crate::mesh::triangulate_pages(
            &spec,
            &crate::mesh::SurfaceMeshOptions::for_eps(0.1, 0.2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Fattening(_)));
    }
}
