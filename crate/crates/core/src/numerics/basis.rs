//! Orthonormal radial basis `η_i(r) = p_i(r) e^{-a r²/2}` built by
//! Gram-Schmidt against the weight `r² e^{-a r²}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::grid::{FunctionKind, RadialFunction, RadialGrid};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    /// Gaussian exponent `a` in `e^{-a r²/2}`.
    pub exponent: f64,
    pub functions: Vec<RadialFunction>,
}

impl OrthonormalBasis {
    pub fn order(&self) -> usize {
        self.functions.len()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.functions[0].grid()
    }

    /// Largest `|4π∫η_i η_j r² dr − δ_ij|` with the first offending pair.
    pub fn orthogonality_defect(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.order() {
            for j in 0..=i {
                let dev = (spherical_dot(&self.functions[i], &self.functions[j]) - if i == j { 1.0 } else { 0.0 }).abs();
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        worst
    }
}

/// `4π ∫ f g r² dr`.
pub fn spherical_dot(f: &RadialFunction, g: &RadialFunction) -> f64 {
    let grid = f.grid();
    let v: Vec<f64> = f
        .values()
        .iter()
        .zip(g.values())
        .zip(grid.points())
        .map(|((a, b), r)| a * b * r * r)
        .collect();
    FOUR_PI * grid.integrate(&v)
}

/// Basis with Gaussian factor `e^{-omega_r r²/2}`, `omega_r = omega / 2`.
pub fn build_orthonormal_basis(omega: f64, order: usize, grid: Arc<RadialGrid>) -> Result<OrthonormalBasis> {
    build_basis_with_exponent(0.5 * omega, order, grid)
}

pub fn build_basis_with_exponent(exponent: f64, order: usize, grid: Arc<RadialGrid>) -> Result<OrthonormalBasis> {
    if order == 0 {
        return Err(Error::InvalidInput("basis order must be at least 1".into()));
    }
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::InvalidInput(format!("basis exponent must be positive, got {exponent}")));
    }
    let r = grid.points().to_vec();
    let measure: Vec<f64> = grid.weights().iter().zip(&r).map(|(w, r)| FOUR_PI * w * r * r).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&measure).map(|((x, y), m)| x * y * m).sum() };

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(order);
    let mut v: Vec<f64> = r.iter().map(|r| (-0.5 * exponent * r * r).exp()).collect();
    for k in 0..order {
        if k > 0 {
            // next polynomial degree: multiply the previous function by r
            v = vectors[k - 1].iter().zip(&r).map(|(f, r)| f * r).collect();
        }
        for _pass in 0..2 {
            for prev in &vectors {
                let c = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegradedBasis { i: k, j: k, deviation: 1.0 });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        // positive leading coefficient at large r
        vectors.push(v.clone());
    }
    let functions = vectors
        .into_iter()
        .map(|vals| RadialFunction::new(grid.clone(), vals, FunctionKind::Full))
        .collect::<Result<Vec<_>>>()?;
    let basis = OrthonormalBasis { exponent, functions };
    let (dev, i, j) = basis.orthogonality_defect();
    if dev > 1e-6 {
        return Err(Error::DegradedBasis { i, j, deviation: dev });
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::GridConfig;

    fn grid(omega: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::for_omega(omega, &GridConfig::default()).unwrap())
    }

    #[test]
    fn single_gaussian_normalized() {
        let b = build_orthonormal_basis(0.5, 1, grid(0.5)).unwrap();
        assert!((spherical_dot(&b.functions[0], &b.functions[0]) - 1.0).abs() < 1e-8);
        // analytic normalization of e^{-a r²/2}: (a/π)^{3/4}
        let a: f64 = 0.25;
        let expected = (a / std::f64::consts::PI).powf(0.75);
        assert!((b.functions[0].values()[0] - expected).abs() < 1e-6);
    }

    #[test]
    fn first_two_orthogonal() {
        let b = build_orthonormal_basis(1.3, 2, grid(1.3)).unwrap();
        assert!(spherical_dot(&b.functions[0], &b.functions[1]).abs() < 1e-8);
    }

    #[test]
    fn order_twenty_audit() {
        let b = build_orthonormal_basis(0.5, 20, grid(0.5)).unwrap();
        assert!(b.orthogonality_defect().0 < 1e-6);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(build_orthonormal_basis(0.5, 0, grid(0.5)).is_err());
    }
}
