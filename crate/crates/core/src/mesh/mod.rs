//! Conforming triangulations of the stratified surface (shared binding nodes
//! encode continuity across pages) and structured, conforming tetrahedral
//! meshes of the fattened domain: page offset slabs, binding cross-section
//! extrusions and sector foliations, glued node-to-node on the interfaces.

mod cross_section;
mod foliation;
mod pool;
mod surface;
mod volume;
pub mod vtk;

pub use cross_section::{
    build_cross_section, cross_section, CrossSection, CrossSectionParams, CsNode, CsNodeRole,
    CsRegion, FootRef, SectorGeom, StarCertificate,
};
pub use foliation::{sector_foliation, FoliationMap};
pub use pool::NodePool;
pub use surface::{
    triangulate_pages, MetricSample, PageGrid, SurfaceMesh, SurfaceMeshOptions, Tri, TRI_QUAD,
};
pub use volume::{
    assemble_volume_mesh, assemble_volume_mesh_on, extrude_binding, extrude_pages, BindingData,
    BindingStation, FiberColumn, RegionTag, Tet, VolumeMesh, VolumeMeshOptions,
};

pub(crate) use crate::geometry::{V2, V3};

/// Twice the signed chart-space area of a triangle.
pub fn chart_area2_of(chart: &[V2; 3]) -> f64 {
    surface::chart_area2(chart)
}
