use serde::{Deserialize, Serialize};

use super::{V2, V3};
use crate::{Error, Result};

/// Boundary side of the parameter rectangle `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Y1Min,
    Y1Max,
    Y2Min,
    Y2Max,
}

impl Side {
    /// Coordinate index that is constant along this side.
    pub fn fixed_coord(self) -> usize {
        match self {
            Side::Y1Min | Side::Y1Max => 0,
            Side::Y2Min | Side::Y2Max => 1,
        }
    }

    /// Coordinate index that runs along this side.
    pub fn running_coord(self) -> usize {
        1 - self.fixed_coord()
    }

    /// +1 if the inward transverse direction increases the fixed coordinate.
    pub fn inward_sign(self) -> f64 {
        match self {
            Side::Y1Min | Side::Y2Min => 1.0,
            Side::Y1Max | Side::Y2Max => -1.0,
        }
    }
}

/// Analytic chart catalog.  Each kind carries hand-coded first and second
/// derivatives so second fundamental forms are exact; arbitrary user-defined
/// immersions are deliberately not supported.
#[derive(Debug, Clone)]
pub enum ChartKind {
    /// `X(y) = origin + y1 e1 + y2 e2` with `e1, e2` orthonormal.
    FlatRectangle { origin: V3, e1: V3, e2: V3 },
    /// `X(y) = center + R (sin y2 (cos y1 f0 + sin y1 f1) + cos y2 f2)`;
    /// `y1` is azimuth, `y2` polar angle from the `f2` axis.
    SphericalCap { center: V3, radius: f64, frame: [V3; 3] },
    /// `X(y) = center + y2 (cos y1 e1 + sin y1 e2)`; `y2` is the radius.
    /// Covers both the disk (inner radius 0) and annulus catalog kinds.
    PlanarRadial { center: V3, e1: V3, e2: V3 },
    /// `X(y) = center + R (cos y1 f0 + sin y1 f1) + y2 f2`.
    CylinderSegment { center: V3, radius: f64, frame: [V3; 3] },
}

/// First and second fundamental forms at a chart point, with the unit normal.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    /// (E, F, G)
    pub first: (f64, f64, f64),
    /// (e, f, g)
    pub second: (f64, f64, f64),
    pub normal: V3,
}

impl FundamentalForms {
    pub fn det_first(&self) -> f64 {
        let (e, f, g) = self.first;
        e * g - f * f
    }

    pub fn metric(&self) -> nalgebra::Matrix2<f64> {
        let (e, f, g) = self.first;
        nalgebra::Matrix2::new(e, f, f, g)
    }

    pub fn second_matrix(&self) -> nalgebra::Matrix2<f64> {
        let (e, f, g) = self.second;
        nalgebra::Matrix2::new(e, f, f, g)
    }

    /// Principal curvatures: eigenvalues of the shape operator `g^-1 II`.
    pub fn principal_curvatures(&self) -> (f64, f64) {
        let s = self.metric().try_inverse().unwrap_or_else(nalgebra::Matrix2::zeros)
            * self.second_matrix();
        // Shape operator is self-adjoint wrt g; its eigenvalues are real.
        let tr = s.trace();
        let det = s.determinant();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

/// A catalog chart together with its parameter rectangle and an orientation
/// flag for the unit normal.
#[derive(Debug, Clone)]
pub struct ParamChart {
    pub kind: ChartKind,
    /// `[[y1_min, y1_max], [y2_min, y2_max]]`, closed bounds.
    pub domain: [[f64; 2]; 2],
    /// +1 or -1; multiplies the unit normal.
    pub orientation: f64,
    /// Catalog tag as authored (kept for reports), e.g. "hemisphere".
    pub tag: String,
}

impl ParamChart {
    pub fn flat_rectangle(origin: V3, e1: V3, e2: V3, y1: [f64; 2], y2: [f64; 2]) -> Self {
        ParamChart {
            kind: ChartKind::FlatRectangle { origin, e1, e2 },
            domain: [y1, y2],
            orientation: 1.0,
            tag: "flat_rectangle".into(),
        }
    }

    pub fn spherical_cap(
        center: V3,
        radius: f64,
        frame: [V3; 3],
        azimuth: [f64; 2],
        polar: [f64; 2],
    ) -> Self {
        ParamChart {
            kind: ChartKind::SphericalCap { center, radius, frame },
            domain: [azimuth, polar],
            orientation: 1.0,
            tag: "spherical_cap".into(),
        }
    }

    /// Upper (`polar in [0, pi/2]`) or lower (`[pi/2, pi]`) half sphere about
    /// the `axis` through `center`.
    pub fn hemisphere(center: V3, radius: f64, axis: V3, upper: bool) -> Self {
        let (u, v) = super::orthonormal_complement(&axis);
        let polar = if upper {
            [0.0, std::f64::consts::FRAC_PI_2]
        } else {
            [std::f64::consts::FRAC_PI_2, std::f64::consts::PI]
        };
        let mut c = Self::spherical_cap(
            center,
            radius,
            [u, v, axis.normalize()],
            [0.0, std::f64::consts::TAU],
            polar,
        );
        c.tag = "hemisphere".into();
        c
    }

    pub fn planar_disk(center: V3, e1: V3, e2: V3, radius: f64) -> Self {
        ParamChart {
            kind: ChartKind::PlanarRadial { center, e1, e2 },
            domain: [[0.0, std::f64::consts::TAU], [0.0, radius]],
            orientation: 1.0,
            tag: "planar_disk".into(),
        }
    }

    pub fn planar_annulus(center: V3, e1: V3, e2: V3, r_inner: f64, r_outer: f64) -> Self {
        let mut c = Self::planar_disk(center, e1, e2, r_outer);
        c.domain[1][0] = r_inner;
        c.tag = "planar_annulus".into();
        c
    }

    pub fn cylinder_segment(center: V3, radius: f64, frame: [V3; 3], z: [f64; 2]) -> Self {
        ParamChart {
            kind: ChartKind::CylinderSegment { center, radius, frame },
            domain: [[0.0, std::f64::consts::TAU], z],
            orientation: 1.0,
            tag: "cylinder_segment".into(),
        }
    }

    pub fn contains(&self, y: V2) -> bool {
        let tol = 1e-12 * self.domain_scale().max(1.0);
        y.x >= self.domain[0][0] - tol
            && y.x <= self.domain[0][1] + tol
            && y.y >= self.domain[1][0] - tol
            && y.y <= self.domain[1][1] + tol
    }

    fn domain_scale(&self) -> f64 {
        (self.domain[0][1] - self.domain[0][0]).abs()
            + (self.domain[1][1] - self.domain[1][0]).abs()
    }

    fn check_domain(&self, y: V2) -> Result<()> {
        let tol = 1e-12 * self.domain_scale().max(1.0);
        for c in 0..2 {
            let v = y[c];
            if v < self.domain[c][0] - tol || v > self.domain[c][1] + tol {
                return Err(Error::Domain(format!(
                    "chart coordinate y{} = {v} outside [{}, {}]",
                    c + 1,
                    self.domain[c][0],
                    self.domain[c][1]
                )));
            }
        }
        Ok(())
    }

    /// Analytic evaluation of `X`, `DX` and `D^2 X`.  The hessian is returned
    /// as `[X_11, X_12, X_22]` (symmetric in the mixed entry).
    pub fn eval(&self, y: V2) -> Result<(V3, [V3; 2], [V3; 3])> {
        self.check_domain(y)?;
        Ok(self.eval_unchecked(y))
    }

    pub(crate) fn eval_unchecked(&self, y: V2) -> (V3, [V3; 2], [V3; 3]) {
        let (u, v) = (y.x, y.y);
        match &self.kind {
            ChartKind::FlatRectangle { origin, e1, e2 } => (
                origin + e1 * u + e2 * v,
                [*e1, *e2],
                [V3::zeros(), V3::zeros(), V3::zeros()],
            ),
            ChartKind::SphericalCap { center, radius, frame } => {
                let (f0, f1, f2) = (frame[0], frame[1], frame[2]);
                let az = f0 * u.cos() + f1 * u.sin();
                let daz = f0 * (-u.sin()) + f1 * u.cos();
                let r = *radius;
                let pos = center + (az * v.sin() + f2 * v.cos()) * r;
                let xu = daz * (r * v.sin());
                let xv = (az * v.cos() - f2 * v.sin()) * r;
                let xuu = az * (-r * v.sin());
                let xuv = daz * (r * v.cos());
                let xvv = (az * v.sin() + f2 * v.cos()) * (-r);
                (pos, [xu, xv], [xuu, xuv, xvv])
            }
            ChartKind::PlanarRadial { center, e1, e2 } => {
                let rad = e1 * u.cos() + e2 * u.sin();
                let drad = e1 * (-u.sin()) + e2 * u.cos();
                let pos = center + rad * v;
                (pos, [drad * v, rad], [rad * (-v), drad, V3::zeros()])
            }
            ChartKind::CylinderSegment { center, radius, frame } => {
                let (f0, f1, f2) = (frame[0], frame[1], frame[2]);
                let rad = f0 * u.cos() + f1 * u.sin();
                let drad = f0 * (-u.sin()) + f1 * u.cos();
                let r = *radius;
                (
                    center + rad * r + f2 * v,
                    [drad * r, f2],
                    [rad * (-r), V3::zeros(), V3::zeros()],
                )
            }
        }
    }

    pub fn position(&self, y: V2) -> V3 {
        self.eval_unchecked(y).0
    }

    /// First and second fundamental forms.  `e, f, g` are evaluated through
    /// the derivative of the unit normal (`-DX . DN`), with `DN` obtained
    /// from the quotient rule on `X_u x X_v`.
    pub fn fundamental_forms(&self, y: V2) -> Result<FundamentalForms> {
        self.check_domain(y)?;
        let (_, jac, hess) = self.eval_unchecked(y);
        let (xu, xv) = (jac[0], jac[1]);
        let ee = xu.dot(&xu);
        let ff = xu.dot(&xv);
        let gg = xv.dot(&xv);
        if ee * gg - ff * ff <= 0.0 {
            return Err(Error::Immersion(format!(
                "degenerate first fundamental form at y = ({}, {}): EG - F^2 = {}",
                y.x,
                y.y,
                ee * gg - ff * ff
            )));
        }
        let c = xu.cross(&xv);
        let norm = c.norm();
        let n = c / norm * self.orientation;
        let cu = hess[0].cross(&xv) + xu.cross(&hess[1]);
        let cv = hess[1].cross(&xv) + xu.cross(&hess[2]);
        let nu = (cu - c * (c.dot(&cu) / (norm * norm))) / norm * self.orientation;
        let nv = (cv - c * (c.dot(&cv) / (norm * norm))) / norm * self.orientation;
        Ok(FundamentalForms {
            first: (ee, ff, gg),
            second: (-xu.dot(&nu), -xu.dot(&nv), -xv.dot(&nv)),
            normal: n,
        })
    }

    /// Unit normal (orientation applied).
    pub fn normal(&self, y: V2) -> Result<V3> {
        Ok(self.fundamental_forms(y)?.normal)
    }

    /// Largest |principal curvature| over an interior sample grid.
    /// Samples stay off the domain boundary so polar-type coordinate
    /// degeneracies (disk center, sphere pole) are not hit.
    pub fn max_principal_curvature(&self, n: usize) -> f64 {
        let mut kmax: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let y = self.interior_sample(i, j, n);
                if let Ok(forms) = self.fundamental_forms(y) {
                    let (k1, k2) = forms.principal_curvatures();
                    kmax = kmax.max(k1.abs()).max(k2.abs());
                }
            }
        }
        kmax
    }

    pub(crate) fn interior_sample(&self, i: usize, j: usize, n: usize) -> V2 {
        let f = |k: usize| (k as f64 + 0.5) / n as f64;
        V2::new(
            self.domain[0][0] + (self.domain[0][1] - self.domain[0][0]) * f(i),
            self.domain[1][0] + (self.domain[1][1] - self.domain[1][0]) * f(j),
        )
    }

    /// Immersion check on an interior sample grid.
    pub fn immersion_ok(&self, n: usize) -> bool {
        for i in 0..n {
            for j in 0..n {
                let y = self.interior_sample(i, j, n);
                let (_, jac, _) = self.eval_unchecked(y);
                let (xu, xv) = (jac[0], jac[1]);
                let det = xu.dot(&xu) * xv.dot(&xv) - xu.dot(&xv).powi(2);
                if det <= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Point on a boundary side at running fraction `f` in [0, 1].
    pub fn side_point(&self, side: Side, f: f64) -> V2 {
        let fixed = side.fixed_coord();
        let run = side.running_coord();
        let mut y = V2::zeros();
        y[fixed] = match side {
            Side::Y1Min | Side::Y2Min => self.domain[fixed][0],
            Side::Y1Max | Side::Y2Max => self.domain[fixed][1],
        };
        y[run] = self.domain[run][0] + (self.domain[run][1] - self.domain[run][0]) * f;
        y
    }

    /// Speed |X_t| of the transverse coordinate line at a boundary-side point.
    /// Constant along the line for every catalog kind, which makes chart grid
    /// lines unit-speed geodesics after rescaling.
    pub fn transverse_speed(&self, side: Side, f: f64) -> f64 {
        let y = self.side_point(side, f);
        let (_, jac, _) = self.eval_unchecked(y);
        jac[side.fixed_coord()].norm()
    }

    /// Chart point at geodesic distance `dist` from the given boundary side,
    /// along the transverse grid line through `side_point(side, f)`.
    pub fn offset_from_side(&self, side: Side, f: f64, dist: f64) -> V2 {
        let mut y = self.side_point(side, f);
        let speed = self.transverse_speed(side, f);
        y[side.fixed_coord()] += side.inward_sign() * dist / speed;
        y
    }

    /// Extent (geodesic length) of the chart transverse to the given side.
    pub fn transverse_extent(&self, side: Side) -> f64 {
        let c = side.fixed_coord();
        let speed = self.transverse_speed(side, 0.5);
        (self.domain[c][1] - self.domain[c][0]) * speed
    }

    /// Arclength of the given boundary side.
    pub fn side_length(&self, side: Side) -> f64 {
        self.line_length(side, 0.0)
    }

    /// Arclength of the coordinate line parallel to `side` at inward fraction
    /// `frac` of the transverse extent.
    pub fn line_length(&self, side: Side, frac: f64) -> f64 {
        let fixed = side.fixed_coord();
        let run = side.running_coord();
        let base = match side {
            Side::Y1Min | Side::Y2Min => self.domain[fixed][0],
            Side::Y1Max | Side::Y2Max => self.domain[fixed][1],
        };
        let other = self.domain[fixed][0] + self.domain[fixed][1] - base;
        let fixed_val = base + (other - base) * frac;
        let n = 24;
        let mut len = 0.0;
        let mut prev: Option<crate::geometry::V3> = None;
        for i in 0..=n {
            let f = i as f64 / n as f64;
            let mut y = V2::zeros();
            y[fixed] = fixed_val;
            y[run] = self.domain[run][0] + (self.domain[run][1] - self.domain[run][0]) * f;
            let p = self.position(y);
            if let Some(q) = prev {
                len += (p - q).norm();
            }
            prev = Some(p);
        }
        len
    }

    /// Longest running-coordinate line parallel to the given side (polar-type
    /// charts collapse at one end, so boundary lengths alone mislead).
    pub fn max_line_length(&self, side: Side) -> f64 {
        [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&f| self.line_length(side, f))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn unit_sphere() -> ParamChart {
        ParamChart::spherical_cap(
            V3::zeros(),
            1.0,
            [V3::x(), V3::y(), V3::z()],
            [0.0, std::f64::consts::TAU],
            [0.0, PI],
        )
    }

    #[test]
    fn flat_rectangle_is_identity_embedding() {
        let c = ParamChart::flat_rectangle(V3::zeros(), V3::x(), V3::y(), [0.0, 1.0], [0.0, 1.0]);
        let (pos, jac, hess) = c.eval(V2::new(0.3, 0.7)).unwrap();
        assert_relative_eq!(pos, V3::new(0.3, 0.7, 0.0));
        assert_relative_eq!(jac[0], V3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(jac[1], V3::new(0.0, 1.0, 0.0));
        for h in hess {
            assert_eq!(h, V3::zeros());
        }
        let forms = c.fundamental_forms(V2::new(0.11, 0.93)).unwrap();
        assert_eq!(forms.first, (1.0, 0.0, 1.0));
        assert_eq!(forms.second, (0.0, 0.0, 0.0));
    }

    #[test]
    fn sphere_cap_point_and_forms() {
        let c = unit_sphere();
        let (pos, _, _) = c.eval(V2::new(0.0, FRAC_PI_2)).unwrap();
        assert_relative_eq!(pos, V3::new(1.0, 0.0, 0.0), epsilon = 1e-14);
        let forms = c.fundamental_forms(V2::new(0.0, FRAC_PI_3)).unwrap();
        assert_relative_eq!(forms.first.0, 0.75, epsilon = 1e-13);
        assert_relative_eq!(forms.first.1, 0.0, epsilon = 1e-13);
        assert_relative_eq!(forms.first.2, 1.0, epsilon = 1e-13);
        assert!((forms.normal.norm() - 1.0).abs() < 1e-10);
        // Unit sphere: |principal curvatures| = 1.  Coincident eigenvalues are
        // only sqrt(machine-eps) accurate through the discriminant.
        let (k1, k2) = forms.principal_curvatures();
        assert_relative_eq!(k1.abs(), 1.0, epsilon = 1e-7);
        assert_relative_eq!(k2.abs(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn cylinder_point_and_forms() {
        let c = ParamChart::cylinder_segment(
            V3::zeros(),
            2.0,
            [V3::x(), V3::y(), V3::z()],
            [0.0, 1.0],
        );
        let (pos, _, _) = c.eval(V2::new(FRAC_PI_2, 0.5)).unwrap();
        assert_relative_eq!(pos, V3::new(0.0, 2.0, 0.5), epsilon = 1e-14);
        let forms = c.fundamental_forms(V2::new(1.234, 0.3)).unwrap();
        assert_relative_eq!(forms.first.0, 4.0, epsilon = 1e-13);
        assert_relative_eq!(forms.first.1, 0.0, epsilon = 1e-13);
        assert_relative_eq!(forms.first.2, 1.0, epsilon = 1e-13);
        assert_relative_eq!(forms.second.0.abs(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(forms.second.1, 0.0, epsilon = 1e-12);
        assert_relative_eq!(forms.second.2, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_domain_is_rejected_with_coordinate() {
        let c = unit_sphere();
        let err = c.eval(V2::new(0.0, 4.0)).unwrap_err();
        assert!(matches!(err, crate::Error::Domain(_)));
        assert!(err.to_string().contains("y2"));
    }

    /// Central finite differences of X against the analytic jacobian/hessian.
    fn fd_check(chart: &ParamChart, y: V2) {
        let h = 1e-4;
        let scale = {
            let (_, jac, _) = chart.eval_unchecked(y);
            jac[0].norm().max(jac[1].norm()).max(1.0)
        };
        for c in 0..2 {
            let mut dy = V2::zeros();
            dy[c] = h;
            let (pp, _, _) = chart.eval_unchecked(y + dy);
            let (pm, _, _) = chart.eval_unchecked(y - dy);
            let fd = (pp - pm) / (2.0 * h);
            let (_, jac, _) = chart.eval_unchecked(y);
            assert!(
                (fd - jac[c]).norm() <= 1e-6 * scale,
                "jacobian mismatch at {y:?} coord {c}"
            );
        }
        // Hessian entries.
        let (p0, _, hess) = chart.eval_unchecked(y);
        for (c1, c2, idx) in [(0, 0, 0), (0, 1, 1), (1, 1, 2)] {
            let mut d1 = V2::zeros();
            let mut d2 = V2::zeros();
            d1[c1] = h;
            d2[c2] = h;
            let fd = if c1 == c2 {
                let (pp, _, _) = chart.eval_unchecked(y + d1);
                let (pm, _, _) = chart.eval_unchecked(y - d1);
                (pp + pm - p0 * 2.0) / (h * h)
            } else {
                let (ppp, _, _) = chart.eval_unchecked(y + d1 + d2);
                let (ppm, _, _) = chart.eval_unchecked(y + d1 - d2);
                let (pmp, _, _) = chart.eval_unchecked(y - d1 + d2);
                let (pmm, _, _) = chart.eval_unchecked(y - d1 - d2);
                (ppp - ppm - pmp + pmm) / (4.0 * h * h)
            };
            assert!(
                (fd - hess[idx]).norm() <= 1e-6 * scale.max(hess[idx].norm()),
                "hessian mismatch at {y:?} entry ({c1},{c2})"
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let charts = vec![
            ParamChart::flat_rectangle(
                V3::new(0.2, -0.1, 0.4),
                V3::x(),
                (V3::y() + V3::z()).normalize(),
                [0.0, 2.0],
                [0.0, 1.0],
            ),
            unit_sphere(),
            ParamChart::planar_disk(V3::new(0.0, 0.0, 1.0), V3::x(), V3::y(), 1.5),
            ParamChart::planar_annulus(V3::zeros(), V3::y(), V3::z(), 0.5, 1.2),
            ParamChart::cylinder_segment(V3::zeros(), 0.8, [V3::y(), V3::z(), V3::x()], [0.0, 2.0]),
            ParamChart::hemisphere(V3::new(1.0, 2.0, 3.0), 2.0, V3::z(), true),
        ];
        for chart in &charts {
            for _ in 0..100 {
                // Stay a step away from the boundary so central differences fit.
                let m = 4.0 * 1e-4;
                let y = V2::new(
                    rng.gen_range(chart.domain[0][0] + m..chart.domain[0][1] - m),
                    rng.gen_range(chart.domain[1][0] + m..chart.domain[1][1] - m),
                );
                fd_check(chart, y);
            }
        }
    }

    #[test]
    fn second_form_agrees_with_hessian_route() {
        // -DX.DN must equal N.D2X for an immersion with unit normal.
        let charts = vec![
            unit_sphere(),
            ParamChart::cylinder_segment(V3::zeros(), 1.3, [V3::x(), V3::y(), V3::z()], [0.0, 1.0]),
            ParamChart::planar_annulus(V3::zeros(), V3::x(), V3::y(), 0.3, 1.0),
        ];
        for chart in charts {
            for i in 0..5 {
                for j in 0..5 {
                    let y = chart.interior_sample(i, j, 5);
                    let forms = chart.fundamental_forms(y).unwrap();
                    let (_, _, hess) = chart.eval_unchecked(y);
                    let n = forms.normal;
                    assert_relative_eq!(forms.second.0, n.dot(&hess[0]), epsilon = 1e-10);
                    assert_relative_eq!(forms.second.1, n.dot(&hess[1]), epsilon = 1e-10);
                    assert_relative_eq!(forms.second.2, n.dot(&hess[2]), epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn transverse_speed_constant_along_grid_lines() {
        let chart = unit_sphere();
        let s0 = chart.transverse_speed(Side::Y2Max, 0.1);
        let s1 = chart.transverse_speed(Side::Y2Max, 0.9);
        assert_relative_eq!(s0, s1, epsilon = 1e-12);
        assert_relative_eq!(s0, 1.0, epsilon = 1e-12);
    }
}
