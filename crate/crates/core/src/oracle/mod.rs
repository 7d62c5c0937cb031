//! Independent semi-analytic spectra for fixture geometries: star-graph
//! transverse modes (Kirchhoff junction), separable flat-book spectra, and
//! azimuthal 1D reductions for axisymmetric books.  These oracles never share
//! code with the 2D/3D assembly path; their only numerics are closed forms,
//! bisection and a small 1D finite element system solved densely.

mod axisym;
mod bessel;
mod graph1d;
mod star;

pub use axisym::axisym_spectrum;
pub use bessel::bessel_j_root;
pub use star::{flat_book_spectrum, star_graph_spectrum};

use serde::Serialize;

/// A reference spectrum with multiplicities expanded, ascending.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSpectrum {
    pub values: Vec<f64>,
    /// secular-equation | separable | axisymmetric-1d
    pub method: String,
    /// Estimated absolute accuracy of the values.
    pub accuracy: f64,
}

impl OracleSpectrum {
    pub fn new(mut values: Vec<f64>, method: &str, accuracy: f64) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        OracleSpectrum { values, method: method.into(), accuracy }
    }

    /// Same CSV schema as eigensolver results.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# schema: openbook-eigs v1\nindex,lambda,residual\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{:.16e},{:.3e}\n", i, v, self.accuracy));
        }
        s
    }
}
