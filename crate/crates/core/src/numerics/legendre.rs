//! Gauss-Legendre quadrature, Legendre polynomials and angular-momentum
//! coupling coefficients.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `p[l][k] = P_l(nodes[k])`.
    pub p: Vec<Vec<f64>>,
}

impl LegendreTable {
    pub fn l_max(&self) -> usize {
        self.p.len() - 1
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `P_0(x) .. P_{l_max}(x)` by the three-term recurrence.
pub fn legendre_values(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    if l_max >= 1 {
        p.push(x);
    }
    for l in 2..=l_max {
        let v = ((2 * l - 1) as f64 * x * p[l - 1] - (l - 1) as f64 * p[l - 2]) / l as f64;
        p.push(v);
    }
    p
}

pub fn legendre_table(l_max: usize, nodes: usize) -> Result<LegendreTable> {
    if nodes < l_max + 1 {
        return Err(Error::InvalidInput(format!("{nodes} nodes cannot resolve l_max = {l_max}")));
    }
    let (x, w) = gauss_legendre(nodes);
    let mut p = vec![vec![0.0; nodes]; l_max + 1];
    for (k, &xk) in x.iter().enumerate() {
        for (l, v) in legendre_values(l_max, xk).into_iter().enumerate() {
            p[l][k] = v;
        }
    }
    Ok(LegendreTable { nodes: x, weights: w, p })
}

fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner 3j symbol by the Racah formula. Angular momenta are integers.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    let delta = ln_factorial(j1 + j2 - j3) + ln_factorial(j1 - j2 + j3) + ln_factorial(-j1 + j2 + j3)
        - ln_factorial(j1 + j2 + j3 + 1);
    let pre = 0.5
        * (delta
            + ln_factorial(j1 + m1)
            + ln_factorial(j1 - m1)
            + ln_factorial(j2 + m2)
            + ln_factorial(j2 - m2)
            + ln_factorial(j3 + m3)
            + ln_factorial(j3 - m3));
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let ln_den = ln_factorial(k)
            + ln_factorial(j1 + j2 - j3 - k)
            + ln_factorial(j1 - m1 - k)
            + ln_factorial(j2 + m2 - k)
            + ln_factorial(j3 - j2 + m1 + k)
            + ln_factorial(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - ln_den).exp();
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * sum
}

/// `∫ Y_{l1 m1} Y_{l2 m2} Y_{l3 m3} dΩ` for complex spherical harmonics.
pub fn gaunt(l1: i64, m1: i64, l2: i64, m2: i64, l3: i64, m3: i64) -> f64 {
    if (l1 + l2 + l3) % 2 == 1 {
        return 0.0;
    }
    let pre = (((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI)).sqrt();
    pre * wigner_3j(l1, l2, l3, 0, 0, 0) * wigner_3j(l1, l2, l3, m1, m2, m3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_orthogonality() {
        let t = legendre_table(4, 10).unwrap();
        let dot = |a: usize, b: usize| -> f64 { (0..10).map(|k| t.weights[k] * t.p[a][k] * t.p[b][k]).sum() };
        assert!((dot(2, 2) - 0.4).abs() < 1e-12);
        assert!(dot(1, 3).abs() < 1e-12);
        assert_eq!(legendre_values(2, 1.0)[2], 1.0);
    }

    #[test]
    fn too_few_nodes() {
        assert!(legendre_table(5, 5).is_err());
    }

    #[test]
    fn weights_sum_to_two_at_high_order() {
        let (x, w) = gauss_legendre(128);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-13);
    }

    #[test]
    fn three_j_known_values() {
        // (1 1 0; 0 0 0) = -1/√3, (1 1 2; 0 0 0) = √(2/15)
        assert!((wigner_3j(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((wigner_3j(1, 1, 2, 0, 0, 0) - (2.0 / 15.0f64).sqrt()).abs() < 1e-14);
        // (1 1 1; 1 -1 0) = 1/√6
        assert!((wigner_3j(1, 1, 1, 1, -1, 0) - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn gaunt_with_y00() {
        // ∫ Y00 Y_lm Y_l,-m dΩ = (-1)^m / √(4π)
        for l in 0..5 {
            for m in -l..=l {
                let g = gaunt(0, 0, l, m, l, -m);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((g - sign / (4.0 * PI).sqrt()).abs() < 1e-13);
            }
        }
    }
}
