//! The 1D "shortening" reparameterization that retracts a page's transverse
//! coordinate (0, a) onto (a_m eps, a): identity slope at both ends, slope
//! deviation O(eps), monotone.  Realized as the identity minus the primitive
//! of a smooth plateau bump.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ShorteningMap {
    pub a: f64,
    pub band: f64,
    ramp: f64,
    amp: f64,
}

/// Smoothstep ramp (C^1) on [0, 1].
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Plateau bump: 0 at both ends with zero slope, 1 on the interior plateau.
fn bump(t: f64, a: f64, ramp: f64) -> f64 {
    if t <= 0.0 || t >= a {
        0.0
    } else if t < ramp {
        smoothstep(t / ramp)
    } else if t > a - ramp {
        smoothstep((a - t) / ramp)
    } else {
        1.0
    }
}

impl ShorteningMap {
    /// phi(t) at t in (0, a).
    pub fn eval(&self, t: f64) -> f64 {
        // phi(t) = t + band * (1 - I(t)/I(a)), with I the bump primitive;
        // evaluate the primitive by high-order quadrature on the pieces.
        let integral = |upto: f64| -> f64 {
            // Composite Simpson; the integrand is C^1 and cheap.
            let n = 64;
            let h = upto / n as f64;
            if upto <= 0.0 {
                return 0.0;
            }
            let mut s = bump(0.0, self.a, self.ramp) + bump(upto, self.a, self.ramp);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * bump(i as f64 * h, self.a, self.ramp);
            }
            s * h / 3.0
        };
        let total = integral(self.a);
        t + self.band * (1.0 - integral(t) / total)
    }

    /// d phi / dt at t.
    pub fn slope(&self, t: f64) -> f64 {
        1.0 - self.amp * bump(t, self.a, self.ramp)
    }
}

/// Build the map (0, a) -> (band, a) where band = a_m * eps.
pub fn shortening_map(a: f64, a_m: f64, eps: f64) -> Result<ShorteningMap> {
    let band = a_m * eps;
    if a <= band {
        return Err(Error::Geometry(format!(
            "page depth {a} does not exceed the sleeve band {band}"
        )));
    }
    // Ramp short enough that the plateau keeps the slope above zero.
    let mut ramp = a / 8.0;
    if a - ramp <= band {
        ramp = (a - band) / 2.0;
    }
    // Bump primitive total with the plateau: a - ramp (trapezoid of ramps).
    let total = a - ramp;
    let amp = band / total;
    if amp >= 1.0 {
        return Err(Error::Geometry(format!(
            "cannot keep the shortening monotone: band {band} vs depth {a}"
        )));
    }
    Ok(ShorteningMap { a, band, ramp, amp })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_pinning_and_band_uniformity() {
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let m = shortening_map(1.0, 2.0, eps).unwrap();
            // phi -> identity pointwise as eps -> 0; deviation <= band.
            for i in 0..=64 {
                let t = i as f64 / 64.0;
                let dev = (m.eval(t) - t).abs();
                assert!(dev <= m.band + 1e-12, "deviation {dev} exceeds band {}", m.band);
            }
            assert!((m.eval(0.0) - m.band).abs() < 1e-10, "phi(0) = band");
            assert!((m.eval(1.0) - 1.0).abs() < 1e-10, "phi(a) = a");
            assert!((m.slope(0.0) - 1.0).abs() < 1e-12);
            assert!((m.slope(1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_deviation_scales_linearly() {
        let mut series = Vec::new();
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let m = shortening_map(1.0, 2.0, eps).unwrap();
            let max_dev = (0..=200)
                .map(|i| (m.slope(i as f64 / 200.0) - 1.0).abs())
                .fold(0.0f64, f64::max);
            series.push((eps, max_dev));
        }
        let fit = crate::study::fit_rate(&series).unwrap();
        assert!(
            (fit.slope - 1.0).abs() <= 0.1,
            "slope {} not within 0.1 of linear",
            fit.slope
        );
    }

    #[test]
    fn monotone_at_all_samples() {
        for (a, a_m, eps) in [(1.0, 2.0, 0.2), (0.5, 2.7320508, 0.1), (0.3, 2.0, 0.12)] {
            let m = shortening_map(a, a_m, eps).unwrap();
            for i in 0..=500 {
                let t = a * i as f64 / 500.0;
                assert!(m.slope(t) >= 0.0, "negative slope at {t}");
            }
            // Values are increasing too.
            let mut prev = m.eval(0.0);
            for i in 1..=100 {
                let t = a * i as f64 / 100.0;
                let v = m.eval(t);
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn infeasible_band_is_rejected() {
        assert!(matches!(shortening_map(0.3, 2.0, 0.2), Err(Error::Geometry(_))));
    }
}
