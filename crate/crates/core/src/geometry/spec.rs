use serde::Serialize;

use super::{BindingCurve, ParamChart, Side, V3};
use crate::{Error, Result};

/// One page attached to a binding: which boundary side of the page's chart
/// lies on the curve, and whether the side parameter runs along +t or -t.
#[derive(Debug, Clone)]
pub struct IncidenceEntry {
    pub page: usize,
    pub side: Side,
    pub direction: i8,
}

/// All pages meeting one binding.
#[derive(Debug, Clone)]
pub struct Incidence {
    pub binding: usize,
    pub entries: Vec<IncidenceEntry>,
}

/// Resolved parameter alignment between a page side and its binding:
/// `t(f) = wrap(offset + sign * f * L)` for side fraction `f in [0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct SideAlignment {
    pub sign: f64,
    pub offset: f64,
}

impl SideAlignment {
    pub fn t_of_fraction(&self, f: f64, len: f64, closed: bool) -> f64 {
        let t = self.offset + self.sign * f * len;
        if closed {
            t.rem_euclid(len)
        } else {
            t
        }
    }

    pub fn fraction_of_t(&self, t: f64, len: f64, closed: bool) -> f64 {
        let f = self.sign * (t - self.offset) / len;
        if closed {
            f.rem_euclid(1.0)
        } else {
            f
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecOptions {
    /// Permit straight-segment bindings with Neumann ends.
    pub test_mode: bool,
    /// Transversality floor in radians.
    pub theta_min: f64,
    /// Uniform sample count for per-binding minima/maxima.
    pub samples: usize,
}

impl Default for SpecOptions {
    fn default() -> Self {
        SpecOptions {
            test_mode: false,
            theta_min: 10.0_f64.to_radians(),
            samples: 256,
        }
    }
}

/// Declarative open book structure: pages, bindings, incidences, options.
#[derive(Debug, Clone)]
pub struct OpenBookSpec {
    pub pages: Vec<ParamChart>,
    pub bindings: Vec<BindingCurve>,
    pub incidences: Vec<Incidence>,
    pub options: SpecOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl ValidationReport {
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(CheckResult { name: name.into(), pass, detail });
        self.pass &= pass;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Epsilon0Report {
    pub value: f64,
    pub curvature_bound: f64,
    pub distance_bound: f64,
    pub reach_bound: f64,
    pub extent_bound: f64,
    pub certificate_halvings: u32,
}

impl OpenBookSpec {
    pub fn incidence_for(&self, m: usize) -> Option<&Incidence> {
        self.incidences.iter().find(|i| i.binding == m)
    }

    pub fn bindings_of_page(&self, k: usize) -> Vec<(usize, &IncidenceEntry)> {
        let mut out = Vec::new();
        for inc in &self.incidences {
            for e in &inc.entries {
                if e.page == k {
                    out.push((inc.binding, e));
                }
            }
        }
        out
    }

    fn project_to_binding(&self, m: usize, p: &V3) -> f64 {
        let b = &self.bindings[m];
        match &b.kind {
            super::BindingKind::Circle { center, e1, e2, radius } => {
                let d = p - center;
                let a = d.dot(e2).atan2(d.dot(e1));
                (a * radius).rem_euclid(b.length())
            }
            super::BindingKind::Segment { start, end } => {
                (p - start).dot(&(end - start).normalize())
            }
        }
    }

    /// Resolve the parameter alignment of an incidence entry with its binding.
    pub fn side_alignment(&self, m: usize, entry: &IncidenceEntry) -> Result<SideAlignment> {
        let chart = &self.pages[entry.page];
        let b = &self.bindings[m];
        let len = b.length();
        let p0 = chart.position(chart.side_point(entry.side, 0.0));
        let pq = chart.position(chart.side_point(entry.side, 0.25));
        let t0 = self.project_to_binding(m, &p0);
        let tq = self.project_to_binding(m, &pq);
        let forward = if b.closed() {
            (tq - t0).rem_euclid(len) < len / 2.0
        } else {
            tq > t0
        };
        let sign = if forward { 1.0 } else { -1.0 };
        let align = SideAlignment { sign, offset: t0 };
        // The side must coincide with the curve pointwise.
        for i in 0..=16 {
            let f = i as f64 / 16.0;
            let ps = chart.position(chart.side_point(entry.side, f));
            let t = align.t_of_fraction(f, len, b.closed());
            if (ps - b.point(t)).norm() > 1e-8 * len.max(1.0) {
                return Err(Error::Geometry(format!(
                    "page {} side {:?} does not coincide with binding {m} at fraction {f}",
                    entry.page, entry.side
                )));
            }
        }
        Ok(align)
    }

    /// Unit tangent vector at `gamma_m(t)` pointing into the page of `entry`.
    pub fn inward_tangent(&self, m: usize, entry: &IncidenceEntry, t: f64) -> Result<V3> {
        let chart = &self.pages[entry.page];
        let b = &self.bindings[m];
        let align = self.side_alignment(m, entry)?;
        let f = align.fraction_of_t(t, b.length(), b.closed());
        let y = chart.side_point(entry.side, f);
        let (_, jac, _) = chart.eval_unchecked(y);
        let dir = jac[entry.side.fixed_coord()] * entry.side.inward_sign();
        Ok(dir.normalize())
    }

    /// Pairwise angles between the inward tangents of all pages at `t`.
    pub fn pairwise_angles(&self, m: usize, t: f64) -> Result<Vec<(usize, usize, f64)>> {
        let inc = self
            .incidence_for(m)
            .ok_or_else(|| Error::Validation(format!("binding {m} has no incidence")))?;
        let mut tangents = Vec::new();
        for e in &inc.entries {
            tangents.push((e.page, self.inward_tangent(m, e, t)?));
        }
        let mut out = Vec::new();
        for i in 0..tangents.len() {
            for j in (i + 1)..tangents.len() {
                let c = tangents[i].1.dot(&tangents[j].1).clamp(-1.0, 1.0);
                out.push((tangents[i].0, tangents[j].0, c.acos()));
            }
        }
        Ok(out)
    }

    /// `theta'_m`: the minimum pairwise angle over a uniform t-sample.
    pub fn theta_prime(&self, m: usize) -> Result<f64> {
        let inc = self
            .incidence_for(m)
            .ok_or_else(|| Error::Validation(format!("binding {m} has no incidence")))?;
        if inc.entries.len() < 2 {
            return Err(Error::Transversality(format!(
                "binding {m} has fewer than two pages; theta' is undefined"
            )));
        }
        let len = self.bindings[m].length();
        let n = self.options.samples;
        let mut theta: f64 = f64::INFINITY;
        for i in 0..n {
            let t = len * i as f64 / n as f64;
            for (_, _, a) in self.pairwise_angles(m, t)? {
                theta = theta.min(a);
            }
        }
        if !(theta > 0.0) {
            return Err(Error::Transversality(format!(
                "binding {m}: measured theta'_m = {theta} is not positive"
            )));
        }
        Ok(theta)
    }

    /// Sleeve width `a_m`: `1 + cot(theta'_m / 2)` when the minimum pairwise
    /// angle is below pi/2, else 2.  A binding with a single page gets 2 by
    /// convention.
    pub fn sleeve_width(&self, m: usize) -> Result<f64> {
        let inc = self
            .incidence_for(m)
            .ok_or_else(|| Error::Validation(format!("binding {m} has no incidence")))?;
        if inc.entries.is_empty() {
            return Err(Error::Validation(format!("binding {m} has no pages")));
        }
        if inc.entries.len() == 1 {
            return Ok(2.0);
        }
        let theta = self.theta_prime(m)?;
        Ok(sleeve_width_of_angle(theta))
    }

    /// Full validity report; never errors.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport { checks: Vec::new(), pass: true };

        // Immersion on a sample grid, per page.
        for (k, chart) in self.pages.iter().enumerate() {
            let ok = chart.immersion_ok(24);
            rep.push(
                "immersion",
                ok,
                format!("page {k} ({}) det(g) > 0 on interior sample grid: {ok}", chart.tag),
            );
        }

        // Bindings must be closed unless test mode allows segments.
        for (m, b) in self.bindings.iter().enumerate() {
            let ok = b.closed() || self.options.test_mode;
            rep.push(
                "closed_bindings",
                ok,
                if ok {
                    format!("binding {m} ok (closed = {}, test_mode = {})", b.closed(), self.options.test_mode)
                } else {
                    format!("binding {m} is a segment but test_mode is off")
                },
            );
        }

        // Dangling bindings and incidence sides.
        for (m, _) in self.bindings.iter().enumerate() {
            match self.incidence_for(m) {
                None => rep.push("incidence", false, format!("binding {m} dangling: no incidence")),
                Some(inc) if inc.entries.is_empty() => {
                    rep.push("incidence", false, format!("binding {m} dangling: zero pages"))
                }
                Some(inc) => {
                    let mut ok = true;
                    let mut detail = String::new();
                    for e in &inc.entries {
                        if e.page >= self.pages.len() {
                            ok = false;
                            detail = format!("entry references missing page {}", e.page);
                        } else if e.side.fixed_coord() != 1 {
                            ok = false;
                            detail = format!(
                                "page {} attaches along side {:?}; binding sides must be y2-extremal",
                                e.page, e.side
                            );
                        }
                    }
                    if ok {
                        detail = format!("binding {m}: {} pages", inc.entries.len());
                    }
                    rep.push("incidence", ok, detail);
                }
            }
        }

        // Boundary matching.
        for inc in &self.incidences {
            for e in &inc.entries {
                if e.page >= self.pages.len() {
                    continue;
                }
                match self.side_alignment(inc.binding, e) {
                    Ok(_) => rep.push(
                        "boundary_match",
                        true,
                        format!("page {} side {:?} lies on binding {}", e.page, e.side, inc.binding),
                    ),
                    Err(err) => rep.push("boundary_match", false, err.to_string()),
                }
            }
        }

        // Transversality with the configured floor.
        for (m, _) in self.bindings.iter().enumerate() {
            let inc = match self.incidence_for(m) {
                Some(i) if !i.entries.is_empty() => i,
                _ => continue,
            };
            if inc.entries.len() == 1 {
                rep.push("transversality", true, format!("binding {m}: single page"));
                continue;
            }
            match self.theta_prime(m) {
                Ok(theta) => {
                    let ok = theta >= self.options.theta_min;
                    rep.push(
                        "transversality",
                        ok,
                        format!(
                            "binding {m}: theta'_m = {:.4} rad ({:.2} deg), floor {:.4}",
                            theta,
                            theta.to_degrees(),
                            self.options.theta_min
                        ),
                    );
                }
                Err(err) => rep.push("transversality", false, err.to_string()),
            }
        }

        // Connectivity of the page-binding incidence graph.
        let ok = self.connected();
        rep.push("connectivity", ok, format!("page-binding incidence graph connected: {ok}"));

        rep
    }

    fn connected(&self) -> bool {
        let n = self.pages.len() + self.bindings.len();
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for inc in &self.incidences {
            for e in &inc.entries {
                if e.page < self.pages.len() && inc.binding < self.bindings.len() {
                    let a = find(&mut parent, e.page);
                    let b = find(&mut parent, self.pages.len() + inc.binding);
                    parent[a] = b;
                }
            }
        }
        // Bindings with no incidence disconnect the structure anyway; only
        // require that all pages plus referenced bindings form one component.
        let root = find(&mut parent, 0);
        for k in 1..self.pages.len() {
            if find(&mut parent, k) != root {
                return false;
            }
        }
        for inc in &self.incidences {
            if find(&mut parent, self.pages.len() + inc.binding) != root {
                return false;
            }
        }
        true
    }

    /// Conservative feasible fattening width: normal fibers of length
    /// `eps <= eps0` over the de-sleeved pages stay disjoint, at the sampling
    /// resolution.  Combines a curvature bound, a non-adjacent separation
    /// bound, a same-page reach heuristic, and a sampled disjointness
    /// certificate.
    pub fn epsilon0(&self) -> Result<Epsilon0Report> {
        let report = self.validate();
        if !report.pass {
            let bad: Vec<_> =
                report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            return Err(Error::Validation(format!(
                "epsilon0 requires a validating spec; failing checks: {bad:?}"
            )));
        }

        let curvature_bound = {
            let mut k: f64 = 0.0;
            for chart in &self.pages {
                k = k.max(chart.max_principal_curvature(24));
            }
            if k > 0.0 {
                1.0 / (2.0 * k)
            } else {
                f64::INFINITY
            }
        };

        // Page samples with provenance and normals.
        let grid = 14usize;
        let mut samples: Vec<(usize, V3, V3, f64)> = Vec::new(); // (page, pos, normal, dist to nearest incident binding)
        for (k, chart) in self.pages.iter().enumerate() {
            let sides: Vec<Side> =
                self.bindings_of_page(k).iter().map(|(_, e)| e.side).collect();
            for i in 0..grid {
                for j in 0..grid {
                    let y = chart.interior_sample(i, j, grid);
                    let forms = match chart.fundamental_forms(y) {
                        Ok(f) => f,
                        Err(_) => continue,
                    };
                    let mut d = f64::INFINITY;
                    for s in &sides {
                        let c = s.fixed_coord();
                        let edge = match s {
                            Side::Y1Min | Side::Y2Min => chart.domain[c][0],
                            Side::Y1Max | Side::Y2Max => chart.domain[c][1],
                        };
                        let speed = chart.transverse_speed(*s, 0.5);
                        d = d.min((y[c] - edge).abs() * speed);
                    }
                    samples.push((k, chart.position(y), forms.normal, d));
                }
            }
        }

        // Minimum distance between samples of non-adjacent strata.
        let adjacent = |a: usize, b: usize| -> bool {
            if a == b {
                return true;
            }
            self.incidences.iter().any(|inc| {
                inc.entries.iter().any(|e| e.page == a) && inc.entries.iter().any(|e| e.page == b)
            })
        };
        let mut d_min = f64::INFINITY;
        for i in 0..samples.len() {
            for j in (i + 1)..samples.len() {
                if adjacent(samples[i].0, samples[j].0) {
                    continue;
                }
                d_min = d_min.min((samples[i].1 - samples[j].1).norm());
            }
        }
        // Page vs non-incident binding.
        for (m, b) in self.bindings.iter().enumerate() {
            let incident: Vec<usize> = self
                .incidence_for(m)
                .map(|i| i.entries.iter().map(|e| e.page).collect())
                .unwrap_or_default();
            for s in &samples {
                if incident.contains(&s.0) {
                    continue;
                }
                for q in 0..32 {
                    let t = b.length() * q as f64 / 32.0;
                    d_min = d_min.min((s.1 - b.point(t)).norm());
                }
            }
        }

        // Same-page reach heuristic: 3D-close pairs that are chart-far.
        let mut reach_bound = f64::INFINITY;
        for (k, chart) in self.pages.iter().enumerate() {
            let pts: Vec<(super::V2, V3)> = (0..grid)
                .flat_map(|i| (0..grid).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let y = chart.interior_sample(i, j, grid);
                    (y, chart.position(y))
                })
                .collect();
            let _ = k;
            // Chart-space metric scale for a crude geodesic lower bound.
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let d3 = (pts[i].1 - pts[j].1).norm();
                    let (_, jac, _) = chart.eval_unchecked(pts[i].0);
                    let dy = pts[j].0 - pts[i].0;
                    let chart_d = (jac[0] * dy.x + jac[1] * dy.y).norm();
                    if chart_d >= 3.0 * d3 && d3 > 0.0 {
                        reach_bound = reach_bound.min(d3 / 2.0);
                    }
                }
            }
        }

        let extent_bound = {
            let mut e = f64::INFINITY;
            for (k, chart) in self.pages.iter().enumerate() {
                for (m, entry) in self.bindings_of_page(k) {
                    let a_m = self.sleeve_width(m)?;
                    e = e.min(chart.transverse_extent(entry.side) / (2.0 * a_m));
                }
            }
            for b in &self.bindings {
                e = e.min(b.length() / 4.0);
            }
            if self.bindings.is_empty() {
                for chart in &self.pages {
                    e = e.min(chart.transverse_extent(Side::Y2Min) / 4.0);
                    e = e.min(chart.transverse_extent(Side::Y1Min) / 4.0);
                }
            }
            e
        };

        let mut eps = curvature_bound
            .min(d_min / 4.0)
            .min(reach_bound)
            .min(extent_bound);
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::Geometry("could not bound epsilon0 from samples".into()));
        }

        // Sampled disjointness certificate for fibers outside the sleeves.
        let mut halvings = 0u32;
        loop {
            if self.fibers_disjoint_at(&samples, eps)? {
                break;
            }
            eps *= 0.5;
            halvings += 1;
            if halvings > 40 {
                return Err(Error::Geometry(
                    "fiber disjointness certificate failed down to eps ~ 0".into(),
                ));
            }
        }

        Ok(Epsilon0Report {
            value: eps,
            curvature_bound,
            distance_bound: d_min / 4.0,
            reach_bound,
            extent_bound,
            certificate_halvings: halvings,
        })
    }

    fn fibers_disjoint_at(&self, samples: &[(usize, V3, V3, f64)], eps: f64) -> Result<bool> {
        // Keep samples outside every sleeve at this eps.
        let mut kept: Vec<&(usize, V3, V3, f64)> = Vec::new();
        for s in samples {
            let mut outside = true;
            for (m, _) in self.bindings_of_page(s.0) {
                let a_m = self.sleeve_width(m)?;
                if s.3 < a_m * eps {
                    outside = false;
                    break;
                }
            }
            if outside {
                kept.push(s);
            }
        }
        let tol = 1e-9;
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                let (ka, pa, na, _) = kept[i];
                let (kb, pb, nb, _) = kept[j];
                let d3 = (pa - pb).norm();
                if ka == kb {
                    // Only flag genuinely non-local same-page pairs.
                    if d3 > 4.0 * eps || d3 < 2.0 * eps {
                        continue;
                    }
                    // Neighbor samples on a curved page legitimately sit close;
                    // skip pairs whose normals nearly agree (local patch).
                    if na.dot(nb) > 0.9 {
                        continue;
                    }
                } else if d3 > 4.0 * eps {
                    continue;
                }
                let d = segment_distance(
                    pa - na * eps,
                    pa + na * eps,
                    pb - nb * eps,
                    pb + nb * eps,
                );
                if d <= tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// The two-case sleeve width formula as a pure function of `theta'`.
pub fn sleeve_width_of_angle(theta: f64) -> f64 {
    if theta < std::f64::consts::FRAC_PI_2 {
        1.0 + 1.0 / (theta / 2.0).tan()
    } else {
        2.0
    }
}

/// Minimum distance between two 3D segments.
fn segment_distance(p1: V3, q1: V3, p2: V3, q2: V3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-30 && e <= 1e-30 {
        return r.norm();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut sv = if denom > 1e-30 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut tv = (b * sv + f) / e;
            if tv < 0.0 {
                tv = 0.0;
                sv = (-c / a).clamp(0.0, 1.0);
            } else if tv > 1.0 {
                tv = 1.0;
                sv = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = sv;
            t = tv;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn sleeve_width_formula_cases() {
        assert_relative_eq!(sleeve_width_of_angle(FRAC_PI_2), 2.0);
        assert_relative_eq!(
            sleeve_width_of_angle(FRAC_PI_3),
            1.0 + 3.0_f64.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(sleeve_width_of_angle(2.0 * PI / 3.0), 2.0);
    }

    #[test]
    fn sleeve_width_monotone_nonincreasing() {
        let mut prev = f64::INFINITY;
        for i in 1..=200 {
            let theta = PI * i as f64 / 201.0;
            let a = sleeve_width_of_angle(theta);
            assert!(a <= prev + 1e-12, "a_m must not increase with theta'");
            if theta >= FRAC_PI_2 {
                assert_relative_eq!(a, 2.0);
            }
            prev = a;
        }
    }

    #[test]
    fn flat_book_validates_and_measures_angles() {
        let spec = fixtures::flat_book(3, PI, 1.0);
        let rep = spec.validate();
        assert!(rep.pass, "flat book should validate: {:#?}", rep.checks);
        let theta = spec.theta_prime(0).unwrap();
        assert_relative_eq!(theta, 2.0 * PI / 3.0, epsilon = 1e-9);
        assert_relative_eq!(spec.sleeve_width(0).unwrap(), 2.0);
    }

    #[test]
    fn shallow_angle_fails_transversality() {
        let spec = fixtures::flat_wedge(0.5_f64.to_radians(), 1.0, 1.0);
        let rep = spec.validate();
        assert!(!rep.pass);
        let t = rep
            .checks
            .iter()
            .find(|c| c.name == "transversality" && !c.pass)
            .expect("transversality check should fail");
        assert!(t.detail.contains("theta'_m"));
    }

    #[test]
    fn dangling_binding_fails() {
        let mut spec = fixtures::flat_book(2, 1.0, 1.0);
        spec.incidences[0].entries.clear();
        let rep = spec.validate();
        assert!(!rep.pass);
        assert!(rep.checks.iter().any(|c| c.name == "incidence" && !c.pass && c.detail.contains("dangling")));
    }

    #[test]
    fn epsilon0_flat_book_not_curvature_limited() {
        let spec = fixtures::flat_book(3, PI, 1.0);
        let rep = spec.epsilon0().unwrap();
        assert!(rep.value > 0.0);
        assert!(rep.curvature_bound.is_infinite(), "flat pages have zero curvature");
        assert!(rep.value <= rep.extent_bound + 1e-12);
    }

    #[test]
    fn epsilon0_sphere_curvature_bound() {
        let spec = fixtures::single_sphere();
        let rep = spec.epsilon0().unwrap();
        assert!(rep.value <= 0.5 + 1e-9, "unit sphere kappa = 1 forces eps0 <= 1/2");
        assert!(rep.value > 0.0);
    }

    #[test]
    fn epsilon0_two_spheres_positive() {
        let spec = fixtures::two_spheres(0.5);
        let rep = spec.epsilon0().unwrap();
        assert!(rep.value > 0.0);
        assert!(rep.value <= 0.5);
    }

    #[test]
    fn epsilon0_requires_valid_spec() {
        let spec = fixtures::flat_wedge(0.5_f64.to_radians(), 1.0, 1.0);
        assert!(matches!(spec.epsilon0(), Err(Error::Validation(_))));
    }

    #[test]
    fn disk_hemispheres_validates() {
        let spec = fixtures::disk_hemispheres();
        let rep = spec.validate();
        assert!(rep.pass, "{:#?}", rep.checks);
        // Disk meets each hemisphere at pi/2; hemispheres meet each other at pi.
        assert_relative_eq!(spec.theta_prime(0).unwrap(), FRAC_PI_2, epsilon = 1e-6);
        assert_relative_eq!(spec.sleeve_width(0).unwrap(), 2.0);
    }

    #[test]
    fn two_spheres_angles() {
        let spec = fixtures::two_spheres(0.5);
        // Tangent planes of unit spheres centered +-0.5 apart meet at 60 deg,
        // so the sharpest pairwise page angle is pi/3.
        assert_relative_eq!(spec.theta_prime(0).unwrap(), FRAC_PI_3, epsilon = 1e-6);
        assert_relative_eq!(
            spec.sleeve_width(0).unwrap(),
            1.0 + 3.0_f64.sqrt(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn single_page_sleeve_width_convention() {
        let spec = fixtures::single_page_strip(1.0, 1.0);
        assert_relative_eq!(spec.sleeve_width(0).unwrap(), 2.0);
    }
}
