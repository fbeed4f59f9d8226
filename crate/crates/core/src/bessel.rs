//! Bessel function of the first kind, order one.
//!
//! Power series for |x| <= 12, Hankel asymptotic expansion beyond. At the
//! switchover both branches agree to better than 1e-11; the series loses at
//! most three digits to cancellation there.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_LIMIT: f64 = 12.0;

/// J1(x) for real x.
pub fn j1(x: f64) -> f64 {
    if x < 0.0 {
        return -j1(-x);
    }
    if x <= SERIES_LIMIT {
        x * j1_over_x_series(x)
    } else {
        j1_asymptotic(x)
    }
}

/// J1(x)/x, finite at the origin where it tends to 1/2.
pub fn j1_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j1_over_x_series(ax)
    } else {
        j1_asymptotic(ax) / ax
    }
}

// sum_k (-1)^k (x/2)^(2k) / (2 k! (k+1)!)
fn j1_over_x_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5;
    let mut sum = term;
    for k in 0..200 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + 2.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j1_asymptotic(x: f64) -> f64 {
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k), mu = 4 nu^2 = 4
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() >= last {
            break;
        }
        last = a.abs();
        // signs: P collects (-1)^j a_{2j}, Q collects (-1)^j a_{2j+1}
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bessel's integral, J1(x) = (1/pi) int_0^pi cos(t - x sin t) dt. The
    // integrand is even and 2pi-periodic, so the trapezoidal rule over a full
    // period converges geometrically.
    fn j1_integral(x: f64) -> f64 {
        let n = 4096;
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = -PI + i as f64 * h;
                (t - x * t.sin()).cos()
            })
            .sum();
        s * h / (2.0 * PI)
    }

    #[test]
    fn matches_integral_representation() {
        let mut x = 0.0;
        while x <= 120.0 {
            let err = (j1(x) - j1_integral(x)).abs();
            assert!(err <= 1e-10, "x = {x}: err {err:e}");
            x += 0.173;
        }
    }

    #[test]
    fn branches_agree_at_switchover() {
        for x in [11.5, 12.0, 12.5, 13.0] {
            let series = x * j1_over_x_series(x);
            let asym = j1_asymptotic(x);
            assert!((series - asym).abs() < 1e-10, "x={x}: {series} vs {asym}");
        }
    }

    #[test]
    fn known_values() {
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j1(-1.0) + 0.440_050_585_744_933_5).abs() < 1e-15);
        assert_eq!(j1(0.0), 0.0);
        assert_eq!(j1_over_x(0.0), 0.5);
        // first zero
        assert!(j1(3.831_705_970_207_512).abs() < 1e-14);
    }
}
