//! Numerical laboratory for spectra of uniformly fattened open book structures.
//!
//! An open book structure is a compact stratified surface in R^3 made of smooth
//! 2D pages meeting transversally along closed 1D bindings, with no point
//! strata.  Fattening it to the solid eps-neighborhood `M_eps` yields a Neumann
//! Laplacian whose low eigenvalues approach, as eps -> 0, those of a
//! Laplace-Beltrami operator on the surface with Kirchhoff junction conditions
//! at the bindings.  This crate builds both operators as sparse finite element
//! systems from analytic geometry catalogs, solves them, and audits the
//! inequality machinery (fiber averages, mollified cross-section averages,
//! extension/averaging transfer maps, Poincare constants, metric perturbations)
//! that drives the convergence.
//!
//! Module map:
//! * [`geometry`]  - declarative open book specs, chart catalog, validity checks
//! * [`mesh`]      - conforming surface triangulations and structured volume meshes
//! * [`fem`]       - P1 stiffness/mass assembly (metric-weighted surface, tet volume)
//! * [`eigen`]     - sparse block eigensolver plus dense oracle
//! * [`transfer`]  - discrete averaging (volume->surface) and extension
//!   (surface->volume) operators with inequality audits
//! * [`oracle`]    - independent semi-analytic spectra for fixture geometries
//! * [`study`]     - the eps-sweep convergence experiment driver
//! * [`cli`]       - command line entry points

pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod oracle;
pub mod study;
pub mod transfer;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
