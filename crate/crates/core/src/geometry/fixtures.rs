//! Built-in example geometries used by tests, the CLI `--case` fixtures and
//! the convergence studies.

use std::f64::consts::PI;

use super::{BindingCurve, Incidence, IncidenceEntry, OpenBookSpec, ParamChart, Side, SpecOptions, V3};

/// `k` flat rectangular pages (length `l` along the binding, depth `a`)
/// hanging off the segment binding `[(0,0,0), (l,0,0)]` at equally spaced
/// dihedral angles.  Test mode (Neumann binding ends).
pub fn flat_book(k: usize, l: f64, a: f64) -> OpenBookSpec {
    let mut pages = Vec::new();
    let mut entries = Vec::new();
    for j in 0..k {
        let alpha = 2.0 * PI * j as f64 / k as f64;
        let e2 = V3::new(0.0, alpha.cos(), alpha.sin());
        pages.push(ParamChart::flat_rectangle(V3::zeros(), V3::x(), e2, [0.0, l], [0.0, a]));
        entries.push(IncidenceEntry { page: j, side: Side::Y2Min, direction: 1 });
    }
    OpenBookSpec {
        pages,
        bindings: vec![BindingCurve::segment(V3::zeros(), V3::new(l, 0.0, 0.0))],
        incidences: vec![Incidence { binding: 0, entries }],
        options: SpecOptions { test_mode: true, ..Default::default() },
    }
}

/// Two flat pages meeting at the given dihedral angle; used to exercise the
/// transversality floor.
pub fn flat_wedge(angle: f64, l: f64, a: f64) -> OpenBookSpec {
    let mut spec = flat_book(2, l, a);
    let e2 = V3::new(0.0, angle.cos(), angle.sin());
    spec.pages[1] = ParamChart::flat_rectangle(V3::zeros(), V3::x(), e2, [0.0, l], [0.0, a]);
    spec
}

/// A single flat page attached to a segment binding (test mode): the minimal
/// single-page open book.
pub fn single_page_strip(l: f64, a: f64) -> OpenBookSpec {
    flat_book(1, l, a)
}

/// A single free square page with no bindings at all.
pub fn flat_square(side: f64) -> OpenBookSpec {
    OpenBookSpec {
        pages: vec![ParamChart::flat_rectangle(
            V3::zeros(),
            V3::x(),
            V3::y(),
            [0.0, side],
            [0.0, side],
        )],
        bindings: vec![],
        incidences: vec![],
        options: SpecOptions { test_mode: true, ..Default::default() },
    }
}

/// The full unit sphere as a one-page book without bindings.
pub fn single_sphere() -> OpenBookSpec {
    OpenBookSpec {
        pages: vec![ParamChart::spherical_cap(
            V3::zeros(),
            1.0,
            [V3::x(), V3::y(), V3::z()],
            [0.0, std::f64::consts::TAU],
            [0.0, PI],
        )],
        bindings: vec![],
        incidences: vec![],
        options: SpecOptions::default(),
    }
}

/// Unit disk in the plane `z = 0` plus the upper and lower unit hemispheres,
/// all sharing the unit circle binding.  The closed-binding workhorse.
pub fn disk_hemispheres() -> OpenBookSpec {
    let disk = ParamChart::planar_disk(V3::zeros(), V3::x(), V3::y(), 1.0);
    let upper = ParamChart::hemisphere(V3::zeros(), 1.0, V3::z(), true);
    let lower = ParamChart::hemisphere(V3::zeros(), 1.0, V3::z(), false);
    OpenBookSpec {
        pages: vec![disk, upper, lower],
        bindings: vec![BindingCurve::circle_in_plane(V3::zeros(), V3::x(), V3::y(), 1.0)],
        incidences: vec![Incidence {
            binding: 0,
            entries: vec![
                IncidenceEntry { page: 0, side: Side::Y2Max, direction: 1 },
                IncidenceEntry { page: 1, side: Side::Y2Max, direction: 1 },
                IncidenceEntry { page: 2, side: Side::Y2Min, direction: 1 },
            ],
        }],
        options: SpecOptions::default(),
    }
}

/// Two unit spheres centered at `(0, 0, -offset)` and `(0, 0, +offset)`
/// meeting transversally in the circle `z = 0`, `rho = sqrt(1 - offset^2)`:
/// four spherical-cap pages and one circular binding.
pub fn two_spheres(offset: f64) -> OpenBookSpec {
    assert!(offset > 0.0 && offset < 1.0, "spheres must intersect transversally");
    let frame = [V3::x(), V3::y(), V3::z()];
    let tau = std::f64::consts::TAU;
    let tb = offset.acos();
    let ca = V3::new(0.0, 0.0, -offset);
    let cb = V3::new(0.0, 0.0, offset);
    let pages = vec![
        ParamChart::spherical_cap(ca, 1.0, frame, [0.0, tau], [0.0, tb]),
        ParamChart::spherical_cap(ca, 1.0, frame, [0.0, tau], [tb, PI]),
        ParamChart::spherical_cap(cb, 1.0, frame, [0.0, tau], [0.0, PI - tb]),
        ParamChart::spherical_cap(cb, 1.0, frame, [0.0, tau], [PI - tb, PI]),
    ];
    let r = (1.0 - offset * offset).sqrt();
    OpenBookSpec {
        pages,
        bindings: vec![BindingCurve::circle_in_plane(V3::zeros(), V3::x(), V3::y(), r)],
        incidences: vec![Incidence {
            binding: 0,
            entries: vec![
                IncidenceEntry { page: 0, side: Side::Y2Max, direction: 1 },
                IncidenceEntry { page: 1, side: Side::Y2Min, direction: 1 },
                IncidenceEntry { page: 2, side: Side::Y2Max, direction: 1 },
                IncidenceEntry { page: 3, side: Side::Y2Min, direction: 1 },
            ],
        }],
        options: SpecOptions::default(),
    }
}

/// Look up a named fixture (the CLI `--case` values).
pub fn by_name(name: &str) -> Option<OpenBookSpec> {
    match name {
        "flat-book" | "flat3" => Some(flat_book(3, PI, 1.0)),
        "flat-star" => Some(flat_book(3, PI, 1.0)),
        "single-page" => Some(single_page_strip(PI, 1.0)),
        "square" => Some(flat_square(1.0)),
        "disk-hemispheres" => Some(disk_hemispheres()),
        "two-spheres" => Some(two_spheres(0.5)),
        "sphere" => Some(single_sphere()),
        _ => None,
    }
}
