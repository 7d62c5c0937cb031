//! Bessel J via the integral representation with composite Simpson, plus a
//! bisection root finder; used for the Neumann disk oracle.

/// J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = 256; // even
    let h = std::f64::consts::PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0 / std::f64::consts::PI
}

/// The k-th positive root of J_n (k = 1, 2, ...), by scan plus bisection.
pub fn bessel_j_root(n: u32, k: usize) -> f64 {
    let mut found = 0;
    let mut x = 1e-3;
    let step = 0.05;
    let mut prev = bessel_j(n, x);
    loop {
        let x2 = x + step;
        let cur = bessel_j(n, x2);
        if prev * cur < 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (x, x2);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_j(n, lo) * bessel_j(n, mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        prev = cur;
        x = x2;
        assert!(x < 1e4, "runaway Bessel root scan");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_and_j1_reference_values() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-12);
        assert!((bessel_j(0, 2.404825557695773)).abs() < 1e-10, "first J0 zero");
        assert!((bessel_j(1, 3.831705970207512)).abs() < 1e-10, "first J1 zero");
    }

    #[test]
    fn j1_roots_from_finder() {
        // J0' = -J1: the Neumann disk radial wavenumbers are J1 roots.
        let r1 = bessel_j_root(1, 1);
        let r2 = bessel_j_root(1, 2);
        assert!((r1 - 3.831705970207512).abs() < 1e-8);
        assert!((r2 - 7.015586669815619).abs() < 1e-8);
    }
}
