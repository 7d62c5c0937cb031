//! Discrete realizations of the averaging operator (volume -> surface) and
//! the extension operator (surface -> volume) from the convergence machinery,
//! their building blocks (fiber averages, mollified cross-section averages,
//! sector pullbacks), and numerical audits of the inequalities the proof
//! machinery asserts about them.

mod audit;
mod ops;
mod shortening;

pub use audit::{
    audit_binding_smallness, audit_metric, audit_poincare, audit_transfer, merge_sweep,
    AuditRecord, AuditReport,
};
pub use ops::{
    build_averaging, build_extension, build_fiber_average, build_mollified_average,
    build_transfer, SparseMap, TransferOps,
};
pub use shortening::{shortening_map, ShorteningMap};
