//! The convergence experiment driver: compute the fattened spectra over an
//! eps sweep with mesh-error control, compare index-wise to the limit
//! spectrum, fit rates and bundle audit reports.

mod run;

pub use run::{run_convergence, StudyReport};

use serde::Serialize;

use crate::geometry::OpenBookSpec;
use crate::{Error, Result};

/// Everything needed to run one convergence study.
#[derive(Debug, Clone)]
pub struct StudyPlan {
    pub spec: OpenBookSpec,
    /// Fattening widths, descending.
    pub eps: Vec<f64>,
    pub n_eigs: usize,
    /// Base surface edge length; the refinement ladder halves it.
    pub h: f64,
    /// Number of ladder rungs (>= 1; 2 enables Richardson extrapolation).
    pub ladder: usize,
    /// Override for the z-layer count; `None` = max(4, ceil(8 eps / h)).
    pub layers: Option<usize>,
    pub audits: Vec<String>,
    pub seed: u64,
}

impl StudyPlan {
    pub fn layers_for(&self, eps: f64, h: f64) -> usize {
        let l = self.layers.unwrap_or(((8.0 * eps / h).ceil() as usize).max(4));
        if l % 2 == 0 {
            l
        } else {
            l + 1
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.eps.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Config("eps must be descending".into()));
            }
        }
        if self.eps.is_empty() {
            return Err(Error::Config("eps list must not be empty".into()));
        }
        if self.n_eigs == 0 {
            return Err(Error::Config("n_eigs must be positive".into()));
        }
        Ok(())
    }
}

/// Second-order Richardson extrapolation for P1 eigenvalues on nested meshes:
/// `lambda* = lambda_{h/2} + (lambda_{h/2} - lambda_h) / 3`.
///
/// Returns `(extrapolated value, error estimate, nested)`.  When the pair is
/// not nested (the fine value exceeds the coarse one beyond tolerance) the
/// raw fine value is returned with a warning flag.
pub fn richardson(coarse: f64, fine: f64) -> (f64, f64, bool) {
    let diff = fine - coarse;
    let err = diff.abs() / 3.0;
    if diff > 1e-9 * coarse.abs().max(1.0) {
        // Negative estimated order; refinement did not reduce the value.
        (fine, err, false)
    } else {
        (fine + diff / 3.0, err, true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    /// Standard error of the slope.
    pub width: f64,
    pub n_points: usize,
    /// Nonpositive values were dropped before fitting.
    pub filtered: bool,
}

/// Least-squares slope of log(value) against log(eps).
pub fn fit_rate(series: &[(f64, f64)]) -> Result<RateFit> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut filtered = false;
    for &(eps, v) in series {
        if eps > 0.0 && v > 0.0 {
            pts.push((eps.ln(), v.ln()));
        } else {
            filtered = true;
        }
    }
    if pts.len() < 3 {
        return Err(Error::Size(format!(
            "rate fit needs at least 3 positive pairs, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    // Residual variance -> standard error of the slope.
    let ss_res: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let dof = (pts.len() as f64 - 2.0).max(1.0);
    let width = (ss_res / dof / sxx).sqrt();
    Ok(RateFit { slope, width, n_points: pts.len(), filtered })
}
