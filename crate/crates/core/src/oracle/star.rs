//! Transverse modes of a k-edge star with Neumann tips and a Kirchhoff
//! center, and the separable flat-book spectrum built on them.
//!
//! With edges of length `a`, an eigenfunction restricted to edge e is
//! `A_e cos(omega (a - x))` (Neumann tip), continuity forces the `A_e cos(omega a)`
//! to agree and the Kirchhoff sum gives `sin(omega a) sum A_e = 0`.  The secular
//! equation therefore factors: `sin(omega a) = 0` (equal amplitudes, simple) and
//! `cos(omega a) = 0` (zero-sum amplitudes, multiplicity k - 1).

use super::graph1d::{solve_graph, Edge1D, End1D};
use super::OracleSpectrum;
use crate::{Error, Result};

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-15 * hi.max(1.0) {
            return Some(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Eigenvalues of -d^2/dt^2 on a k-star of edge length `a`, Kirchhoff center,
/// Neumann tips: bisection on the two secular factors, cross-checked against
/// a dense 1D finite element model of the same star.
pub fn star_graph_spectrum(k: usize, a: f64, count: usize) -> Result<OracleSpectrum> {
    if k < 1 || a <= 0.0 {
        return Err(Error::SolverInput(format!("invalid star: k = {k}, a = {a}")));
    }
    // k = 2 joins into a single Neumann interval of length 2a; expressing it
    // through the factors below is still exact (cos roots are its odd modes).
    let mut vals: Vec<f64> = vec![0.0];
    let mut n = 1usize;
    let mut residual: f64 = 0.0;
    while vals.len() < count + 4 {
        // sin(omega a) = 0 family, simple.
        let target = n as f64 * std::f64::consts::PI / a;
        if let Some(w) = bisect_root(|w| (w * a).sin(), target - 0.4 / a, target + 0.4 / a) {
            vals.push(w * w);
            residual = residual.max((w * a).sin().abs());
        }
        // cos(omega a) = 0 family, multiplicity k - 1.
        if k >= 2 {
            let target = (n as f64 - 0.5) * std::f64::consts::PI / a;
            if let Some(w) = bisect_root(|w| (w * a).cos(), target - 0.4 / a, target + 0.4 / a) {
                for _ in 0..k - 1 {
                    vals.push(w * w);
                }
                residual = residual.max((w * a).cos().abs());
            }
        }
        n += 1;
    }
    let spectrum = OracleSpectrum::new(vals, "secular-equation", residual.max(1e-15));
    let truncated =
        OracleSpectrum { values: spectrum.values[..count].to_vec(), ..spectrum.clone() };

    // Never trust the closed form bare: verify against a dense 1D FEM star.
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let edges: Vec<Edge1D> = (0..k)
        .map(|_| Edge1D {
            length: a,
            n: 240,
            rho: &one,
            q: &zero,
            ends: [End1D::Vertex(0), End1D::Free],
        })
        .collect();
    let fem = solve_graph(&edges, 1, count.min(10))?;
    for (i, fv) in fem.iter().enumerate() {
        let sv = truncated.values[i];
        let tol = 2e-4 * (1.0 + sv) + 1e-9;
        if (fv - sv).abs() > tol * (1.0 + sv) {
            return Err(Error::SolverInput(format!(
                "secular root {i} ({sv}) disagrees with the 1D FEM check ({fv})"
            )));
        }
    }
    Ok(truncated)
}

/// Separable flat-book spectrum: longitudinal cosine modes on a binding of
/// length `l` (Neumann ends) added to the star's transverse modes.
pub fn flat_book_spectrum(k: usize, l: f64, a: f64, count: usize) -> Result<OracleSpectrum> {
    let star = star_graph_spectrum(k, a, count + 2)?;
    let mut vals = Vec::new();
    let lam_max = star.values[count.min(star.values.len() - 1)]
        + (count as f64 * std::f64::consts::PI / l).powi(2)
        + 1.0;
    for mu in &star.values {
        let mut m = 0usize;
        loop {
            let lam = mu + (m as f64 * std::f64::consts::PI / l).powi(2);
            if lam > lam_max {
                break;
            }
            vals.push(lam);
            m += 1;
        }
    }
    let mut s = OracleSpectrum::new(vals, "separable", star.accuracy);
    s.values.truncate(count);
    if s.values.len() < count {
        return Err(Error::Size(format!(
            "separable pool too small: {} < {count}",
            s.values.len()
        )));
    }
    Ok(s)
}
