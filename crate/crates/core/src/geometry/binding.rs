use super::{orthonormal_complement, V3};

/// Catalog of binding curves.  Bindings are arclength-parameterized; circles
/// are the closed catalog kind, straight segments exist only in test mode
/// (reflective Neumann ends) so separable analytic oracles are available.
#[derive(Debug, Clone)]
pub enum BindingKind {
    /// `gamma(t) = center + R (cos(t/R) e1 + sin(t/R) e2)`, `t in [0, 2 pi R)`.
    Circle { center: V3, e1: V3, e2: V3, radius: f64 },
    /// `gamma(t) = start + t dir`, `t in [0, |end - start|]`.  Test mode only.
    Segment { start: V3, end: V3 },
}

#[derive(Debug, Clone)]
pub struct BindingCurve {
    pub kind: BindingKind,
}

impl BindingCurve {
    pub fn circle(center: V3, normal: V3, radius: f64) -> Self {
        let (e1, e2) = orthonormal_complement(&normal);
        BindingCurve { kind: BindingKind::Circle { center, e1, e2, radius } }
    }

    pub fn circle_in_plane(center: V3, e1: V3, e2: V3, radius: f64) -> Self {
        BindingCurve { kind: BindingKind::Circle { center, e1, e2, radius } }
    }

    pub fn segment(start: V3, end: V3) -> Self {
        BindingCurve { kind: BindingKind::Segment { start, end } }
    }

    pub fn closed(&self) -> bool {
        matches!(self.kind, BindingKind::Circle { .. })
    }

    pub fn length(&self) -> f64 {
        match &self.kind {
            BindingKind::Circle { radius, .. } => std::f64::consts::TAU * radius,
            BindingKind::Segment { start, end } => (end - start).norm(),
        }
    }

    pub fn point(&self, t: f64) -> V3 {
        match &self.kind {
            BindingKind::Circle { center, e1, e2, radius } => {
                let a = t / radius;
                center + (e1 * a.cos() + e2 * a.sin()) * *radius
            }
            BindingKind::Segment { start, end } => {
                start + (end - start).normalize() * t
            }
        }
    }

    /// Unit tangent `gamma'(t)`.
    pub fn tangent(&self, t: f64) -> V3 {
        match &self.kind {
            BindingKind::Circle { e1, e2, radius, .. } => {
                let a = t / radius;
                e1 * (-a.sin()) + e2 * a.cos()
            }
            BindingKind::Segment { start, end } => (end - start).normalize(),
        }
    }

    /// Orthonormal normal-plane frame `(e_z1, e_z2)` at `t`, smooth and
    /// periodic for closed curves.  For circles `e_z1` is the outward radial
    /// direction and `e_z2` the plane normal.
    pub fn frame(&self, t: f64) -> (V3, V3) {
        match &self.kind {
            BindingKind::Circle { e1, e2, radius, .. } => {
                let a = t / radius;
                (e1 * a.cos() + e2 * a.sin(), e1.cross(e2))
            }
            BindingKind::Segment { start, end } => {
                let (u, v) = orthonormal_complement(&(end - start));
                (u, v)
            }
        }
    }

    /// In-plane coordinates of `p` in the normal-plane frame at `t`.
    pub fn in_plane(&self, t: f64, p: &V3) -> (f64, f64) {
        let c = self.point(t);
        let (ez1, ez2) = self.frame(t);
        ((p - c).dot(&ez1), (p - c).dot(&ez2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_speed_and_frame_orthonormality() {
        let curves = vec![
            BindingCurve::circle(V3::new(0.5, -1.0, 2.0), V3::new(1.0, 1.0, 0.2), 1.7),
            BindingCurve::segment(V3::zeros(), V3::new(0.0, 0.0, 3.0)),
        ];
        for c in curves {
            let l = c.length();
            let h = 1e-6 * l;
            for i in 0..64 {
                let t = l * (i as f64 + 0.5) / 64.0;
                let fd = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
                assert!((fd.norm() - 1.0).abs() < 1e-8, "not unit speed");
                assert!((fd - c.tangent(t)).norm() < 1e-6);
                let (ez1, ez2) = c.frame(t);
                assert!((ez1.norm() - 1.0).abs() < 1e-8);
                assert!((ez2.norm() - 1.0).abs() < 1e-8);
                assert!(ez1.dot(&ez2).abs() < 1e-8);
                assert!(ez1.dot(&c.tangent(t)).abs() < 1e-8);
                assert!(ez2.dot(&c.tangent(t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn periodic_closure_of_closed_frames() {
        let c = BindingCurve::circle(V3::zeros(), V3::z(), 2.0);
        let l = c.length();
        let (a0, b0) = c.frame(0.0);
        let (a1, b1) = c.frame(l);
        assert_relative_eq!(a0, a1, epsilon = 1e-8);
        assert_relative_eq!(b0, b1, epsilon = 1e-8);
        assert!((c.point(0.0) - c.point(l)).norm() < 1e-8);
    }
}
