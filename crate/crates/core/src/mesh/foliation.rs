use super::cross_section::CrossSection;
use super::V2;
use crate::{Error, Result};

/// Discrete realization of a sector foliation: the arclength-proportional
/// boundary-to-boundary map from the inner path (sleeve + binding + sleeve)
/// onto the sector's outer boundary, with the connecting vector field
/// `v(y) = phi(y) - y`.
#[derive(Debug, Clone)]
pub struct FoliationMap {
    pub sector: usize,
    /// Arclength scale factor `len2 / len1`.
    pub stretch: f64,
    /// Sampled (y, v(y)) pairs along the inner path.
    pub samples: Vec<(V2, V2)>,
    /// Measured `max |v| / eps`.
    pub max_v_over_eps: f64,
    /// Measured bound on |dv/ds| difference quotients.
    pub max_diff_quotient: f64,
    /// Worst angle (radians) between v and +-eps N at the sleeve ends.
    pub endpoint_angle: f64,
}

/// Build and validate the foliation of sector `i` of a cross-section.
pub fn sector_foliation(cs: &CrossSection, i: usize) -> Result<FoliationMap> {
    let sec = cs
        .sectors
        .get(i)
        .ok_or_else(|| Error::Geometry(format!("sector {i} does not exist at this station")))?;
    let eps = cs.eps;
    let band = cs.a_m * eps;

    let inner_at = |s: f64| -> V2 {
        if cs.single_page {
            let d = (band - s).max(0.0);
            trace_point(cs, sec.left_slot, d)
        } else if s <= band {
            trace_point(cs, sec.left_slot, band - s)
        } else {
            trace_point(cs, sec.right_slot, s - band)
        }
    };

    // Fine sampling: 4x the stored grid.
    let n = sec.s_values.len() * 4;
    let mut samples = Vec::with_capacity(n + 1);
    let mut max_v: f64 = 0.0;
    for j in 0..=n {
        let s = sec.len1 * j as f64 / n as f64;
        let y = inner_at(s);
        let v = sec.phi(s) - y;
        max_v = max_v.max(v.norm());
        samples.push((y, v));
    }

    // Difference quotients of v along the inner arclength.
    let mut max_dq: f64 = 0.0;
    let ds = sec.len1 / n as f64;
    for w in samples.windows(2) {
        max_dq = max_dq.max((w[1].1 - w[0].1).norm() / ds);
    }

    // Endpoint matching: at the sleeve's outer edge the field must align with
    // +-eps times the page normal.
    let mut endpoint_angle: f64 = 0.0;
    for (s, slot) in [(0.0, sec.left_slot), (sec.len1, sec.right_slot)] {
        if cs.single_page && s > 0.0 {
            continue;
        }
        let y = inner_at(s);
        let v = sec.phi(s) - y;
        let tr = &cs.traces[slot];
        let tangent = *tr.tangents.last().unwrap();
        let normal = V2::new(-tangent.y, tangent.x);
        let cosang = (v.dot(&normal) / (v.norm() * normal.norm())).clamp(-1.0, 1.0);
        let ang = cosang.acos().min((std::f64::consts::PI - cosang.acos()).abs());
        endpoint_angle = endpoint_angle.max(ang);
        if ((v.norm() - eps) / eps).abs() > 1e-6 {
            return Err(Error::Foliation(format!(
                "endpoint field length {} != eps at s = {s}",
                v.norm()
            )));
        }
    }

    // Segment property: y + z v(y) stays inside the cross-section.  The 2%
    // slack absorbs the chord sagitta of sampled curved traces.
    for (j, (y, v)) in samples.iter().enumerate() {
        for q in 1..8 {
            let z = q as f64 / 8.0;
            let p = y + v * z;
            if !cs.contains_slack(p, 0.02) {
                return Err(Error::Foliation(format!(
                    "segment property violated at sample {j}: point ({:.6}, {:.6}) leaves the sector",
                    p.x, p.y
                )));
            }
        }
    }

    Ok(FoliationMap {
        sector: i,
        stretch: sec.len2 / sec.len1,
        samples,
        max_v_over_eps: max_v / eps,
        max_diff_quotient: max_dq,
        endpoint_angle,
    })
}

fn trace_point(cs: &CrossSection, slot: usize, dist: f64) -> V2 {
    let tr = &cs.traces[slot];
    if dist <= 0.0 {
        return V2::zeros();
    }
    // dists double as the polyline arclength table.
    super::cross_section::polyline_sample(&tr.points, &tr.dists, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::mesh::cross_section;

    #[test]
    fn symmetric_four_page_bisector_is_radial() {
        let spec = fixtures::flat_book(4, 1.0, 1.0);
        let cs = cross_section(&spec, 0, 0.5, 0.1).unwrap();
        let f = sector_foliation(&cs, 0).unwrap();
        // v at the binding point (middle of the inner path) points along the
        // sector's angular bisector.
        let mid = f.samples.len() / 2;
        let (y, v) = f.samples[mid];
        assert!(y.norm() < 1e-9, "middle sample is the binding point");
        let dir = v.normalize();
        let left = cs.traces[cs.sectors[0].left_slot].angle;
        let right = cs.traces[cs.sectors[0].right_slot].angle;
        let bis = (left + right) / 2.0;
        let bisector = V2::new(bis.cos(), bis.sin());
        assert!((dir - bisector).norm() < 1e-6, "v at center not radial: {dir:?}");
    }

    #[test]
    fn field_bound_is_eps_uniform() {
        let spec = fixtures::flat_book(3, 1.0, 1.0);
        let mut c1 = Vec::new();
        let mut c2 = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let cs = cross_section(&spec, 0, 0.5, eps).unwrap();
            let f = sector_foliation(&cs, 0).unwrap();
            c1.push(f.max_v_over_eps);
            c2.push(f.max_diff_quotient);
        }
        for w in c1.windows(2) {
            assert!((w[1] - w[0]).abs() / w[0] < 0.1, "c1 varies with eps: {c1:?}");
        }
        for w in c2.windows(2) {
            assert!((w[1] - w[0]).abs() / w[0] < 0.1, "c2 varies with eps: {c2:?}");
        }
    }

    #[test]
    fn endpoints_align_with_page_normals() {
        for spec in [fixtures::flat_book(3, 1.0, 1.0), fixtures::single_page_strip(1.0, 1.0)] {
            let cs = cross_section(&spec, 0, 0.5, 0.08).unwrap();
            for i in 0..cs.sectors.len() {
                let f = sector_foliation(&cs, i).unwrap();
                assert!(f.endpoint_angle < 1e-6, "endpoint angle {}", f.endpoint_angle);
            }
        }
    }

    #[test]
    fn curved_binding_foliation_valid() {
        let spec = fixtures::disk_hemispheres();
        let cs = cross_section(&spec, 0, 1.0, 0.05).unwrap();
        for i in 0..cs.sectors.len() {
            let f = sector_foliation(&cs, i).unwrap();
            assert!(f.max_v_over_eps < 4.0);
        }
    }
}
