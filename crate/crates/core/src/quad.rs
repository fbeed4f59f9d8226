//! Quadrature rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed-order Gauss-Legendre rule mapped to arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }
}

/// Trapezoidal weights for `n` equispaced nodes of spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 1 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::new(64);
        // degree 127 is the exactness limit; check a few monomials
        for p in [0, 1, 2, 17, 100, 127] {
            let got: f64 = rule.integrate(0.0, 1.0, |x| x.powi(p));
            let want = 1.0 / (p as f64 + 1.0);
            assert!((got - want).abs() < 1e-13, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 64] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let w = trapezoid_weights(80, 0.5);
        assert!((w.iter().sum::<f64>() - 39.5).abs() < 1e-14);
        assert_eq!(w[0], 0.25);
        assert_eq!(w[1], 0.5);
    }
}
