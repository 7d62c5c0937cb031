//! Declarative model of an open book structure: analytic chart catalog for
//! pages, closed binding curves with normal-plane frames, incidence data with
//! transversality angles, sleeve widths and feasibility bounds.

mod binding;
mod chart;
pub mod fixtures;
mod spec;

pub use binding::{BindingCurve, BindingKind};
pub use chart::{ChartKind, FundamentalForms, ParamChart, Side};
pub use spec::{
    CheckResult, Epsilon0Report, Incidence, IncidenceEntry, OpenBookSpec, SideAlignment,
    SpecOptions, ValidationReport,
};

pub(crate) type V3 = nalgebra::Vector3<f64>;
pub(crate) type V2 = nalgebra::Vector2<f64>;

/// Two unit vectors completing `dir` to an orthonormal right-handed triple.
/// Deterministic in the input.
pub fn frame_complement(dir: &V3) -> (V3, V3) {
    orthonormal_complement(dir)
}

pub(crate) fn orthonormal_complement(dir: &V3) -> (V3, V3) {
    let d = dir.normalize();
    let seed = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        V3::new(1.0, 0.0, 0.0)
    } else if d.y.abs() <= d.z.abs() {
        V3::new(0.0, 1.0, 0.0)
    } else {
        V3::new(0.0, 0.0, 1.0)
    };
    let u = (seed - d * seed.dot(&d)).normalize();
    let v = d.cross(&u);
    (u, v)
}
