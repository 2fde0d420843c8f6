//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues followed by inverse iteration for the vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalSystem {
    pub diagonal: Vec<f64>,
    /// `off_diagonal[i]` couples rows `i` and `i + 1`.
    pub off_diagonal: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit Euclidean norm.
    pub vector: Vec<f64>,
}

const MAX_INVERSE_ITERATIONS: usize = 8;

impl TridiagonalSystem {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {}", diagonal.len())));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidInput(format!(
                "off-diagonal length {} does not match dimension {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off_diagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off_diagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..self.dim() {
            let e2 = if i > 0 { self.off_diagonal[i - 1].powi(2) } else { 0.0 };
            q = self.diagonal[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (zero based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn norm_estimate(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * v[i];
                if i > 0 {
                    s += self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off_diagonal[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(T - shift) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let guard = f64::EPSILON * self.norm_estimate().max(1.0);
        // rows stored as (sub, diag, sup, sup2) after pivoting
        let mut d: Vec<f64> = self.diagonal.iter().map(|x| x - shift).collect();
        let mut up: Vec<f64> = self.off_diagonal.clone();
        up.push(0.0);
        let mut up2 = vec![0.0; n];
        let mut lo: Vec<f64> = self.off_diagonal.clone();
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if lo[i].abs() > d[i].abs() {
                // swap rows i and i+1
                std::mem::swap(&mut d[i], &mut lo[i]);
                let (a, b2) = (up[i], d[i + 1]);
                up[i] = b2;
                d[i + 1] = a;
                let (a, b2) = (up2[i], up[i + 1]);
                up2[i] = b2;
                up[i + 1] = a;
                rhs.swap(i, i + 1);
            }
            if d[i].abs() < guard {
                d[i] = guard;
            }
            let m = lo[i] / d[i];
            d[i + 1] -= m * up[i];
            up[i + 1] -= m * up2[i];
            rhs[i + 1] -= m * rhs[i];
            lo[i] = 0.0;
        }
        if d[n - 1].abs() < guard {
            d[n - 1] = guard;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= up[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= up2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }

    /// Lowest `n_states` eigenpairs in ascending order.
    pub fn lowest(&self, n_states: usize) -> Result<Vec<Eigenpair>> {
        let n = self.dim();
        if n_states > n {
            return Err(Error::InvalidInput(format!("requested {n_states} states from a {n}-dimensional system")));
        }
        let values: Vec<f64> = (0..n_states).map(|k| self.eigenvalue(k)).collect();
        let norm = self.norm_estimate().max(1.0);
        let cluster_gap = 1e-7 * norm;
        let mut pairs: Vec<Eigenpair> = Vec::with_capacity(n_states);
        for (k, &lambda) in values.iter().enumerate() {
            let cluster_start = pairs
                .iter()
                .rposition(|p| (lambda - p.value).abs() > cluster_gap)
                .map_or(0, |i| i + 1);
            // deterministic, non-degenerate start vector
            let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * (k + 3)) as f64).sin()).collect();
            normalize(&mut v);
            let mut residual = f64::INFINITY;
            for _ in 0..MAX_INVERSE_ITERATIONS {
                v = self.shifted_solve(lambda, &v);
                for p in &pairs[cluster_start..] {
                    let dot: f64 = p.vector.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(&p.vector).for_each(|(x, y)| *x -= dot * y);
                }
                normalize(&mut v);
                let tv = self.apply(&v);
                residual = tv.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
                if residual < 1e-10 * norm {
                    break;
                }
            }
            if residual > 1e-9 * norm {
                return Err(Error::NumericFailure { residual, iterations: MAX_INVERSE_ITERATIONS });
            }
            // fix the sign so the first significant component is positive
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            pairs.push(Eigenpair { value: lambda, vector: v });
        }
        Ok(pairs)
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Lowest `n_states` eigenpairs of a symmetric tridiagonal matrix.
pub fn solve_tridiagonal_eigen(sys: &TridiagonalSystem, n_states: usize) -> Result<Vec<Eigenpair>> {
    sys.lowest(n_states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let sys = TridiagonalSystem::new(vec![1.0, 3.0], vec![1.0]).unwrap();
        let p = sys.lowest(2).unwrap();
        let s = 2f64.sqrt();
        assert!((p[0].value - (2.0 - s)).abs() < 1e-12);
        assert!((p[1].value - (2.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_diagonal() {
        let sys = TridiagonalSystem::new(vec![2.0, 2.0], vec![0.0]).unwrap();
        let p = sys.lowest(2).unwrap();
        assert!((p[0].value - 2.0).abs() < 1e-12 && (p[1].value - 2.0).abs() < 1e-12);
        let dot: f64 = p[0].vector.iter().zip(&p[1].vector).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    fn oscillator(n: usize) -> TridiagonalSystem {
        let h = 20.0 / n as f64;
        let diag: Vec<f64> = (1..=n).map(|i| 1.0 / (h * h) + 0.5 * (i as f64 * h).powi(2)).collect();
        TridiagonalSystem::new(diag, vec![-0.5 / (h * h); n - 1]).unwrap()
    }

    #[test]
    fn oscillator_s_states() {
        let fine = oscillator(2000).lowest(3).unwrap();
        let coarse = oscillator(1000).lowest(3).unwrap();
        for k in 0..3 {
            let exact = 1.5 + 2.0 * k as f64;
            // raw second-order error grows with the level; extrapolated values are h^4 accurate
            assert!((fine[k].value - exact).abs() < 1e-4 * exact, "{} vs {exact}", fine[k].value);
            let extrapolated = (4.0 * fine[k].value - coarse[k].value) / 3.0;
            assert!((extrapolated - exact).abs() < 1e-6, "{extrapolated} vs {exact}");
        }
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = fine[a].vector.iter().zip(&fine[b].vector).map(|(x, y)| x * y).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn too_many_states() {
        let sys = TridiagonalSystem::new(vec![1.0, 2.0], vec![0.5]).unwrap();
        assert!(sys.lowest(3).is_err());
        assert!(TridiagonalSystem::new(vec![1.0], vec![]).is_err());
    }
}
