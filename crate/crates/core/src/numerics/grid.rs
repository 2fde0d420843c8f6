//! Uniform radial mesh, composite quadrature and sampled radial functions.
//!
//! The mesh excludes the origin: `r_i = i h` for `i = 1..=n`. Quadrature
//! treats the origin as an implicit node so that integrands vanishing at
//! `r = 0` (anything carrying an `r^k` factor, `k >= 1`) integrate to fourth
//! order without storing it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extent and density of the radial mesh, expressed in oscillator lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// `r_max = r_max_scale / sqrt(omega)`.
    pub r_max_scale: f64,
    pub n_points: usize,
    /// Two-electron quantities live on every `pair_stride`-th node ...
    pub pair_stride: usize,
    /// ... out to `pair_extent / sqrt(omega)`.
    pub pair_extent: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { r_max_scale: 20.0, n_points: 4000, pair_stride: 8, pair_extent: 10.0 }
    }
}

impl GridConfig {
    pub fn doubled(self) -> Self {
        Self { n_points: 2 * self.n_points, ..self }
    }

    pub fn fine_grid(&self, omega: f64) -> Result<RadialGrid> {
        RadialGrid::for_omega(omega, self)
    }

    /// Coarse grid for two-electron kernels; its node `k` is node
    /// `k * pair_stride` of the fine grid.
    pub fn pair_grid(&self, fine: &RadialGrid, omega: f64) -> Result<RadialGrid> {
        let step = self.pair_stride as f64 * fine.spacing();
        let max_points = (self.pair_extent / omega.sqrt() / step).round() as usize;
        fine.subsample(self.pair_stride, max_points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    h: f64,
    points: Vec<f64>,
    /// Composite Simpson weights for the nodes `r_1..r_n`.
    weights: Vec<f64>,
    /// Weight the rule would give the implicit origin node.
    origin_weight: f64,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
        }
        if n_points < 8 {
            return Err(Error::InvalidInput(format!("need at least 8 grid points, got {n_points}")));
        }
        let h = r_max / n_points as f64;
        let points = (1..=n_points).map(|i| i as f64 * h).collect();
        let all = simpson_weights(n_points, h);
        Ok(Self { h, points, weights: all[1..].to_vec(), origin_weight: all[0] })
    }

    pub fn for_omega(omega: f64, config: &GridConfig) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidInput(format!("omega must be positive, got {omega}")));
        }
        Self::uniform(config.r_max_scale / omega.sqrt(), config.n_points)
    }

    /// Every `stride`-th node of `self`, truncated to at most `max_points`.
    /// Node `k` of the result coincides with node `k * stride` of `self`.
    pub fn subsample(&self, stride: usize, max_points: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidInput("stride must be positive".into()));
        }
        let n = (self.len() / stride).min(max_points);
        Self::uniform(n as f64 * stride as f64 * self.h, n)
    }

    /// Values of `values` (sampled on `self`) at the nodes of a grid made by
    /// [`RadialGrid::subsample`] with the same stride.
    pub fn restrict(values: &[f64], stride: usize, n: usize) -> Vec<f64> {
        (1..=n).map(|k| values[k * stride - 1]).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.len() == other.len() && (self.h - other.h).abs() <= 1e-14 * self.h
    }

    /// `∫_0^{r_max} f dr` for an integrand that vanishes at the origin.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `∫_0^{r_max} f dr` where `f(0) = origin_value`.
    pub fn integrate_with_origin(&self, values: &[f64], origin_value: f64) -> f64 {
        self.origin_weight * origin_value + self.integrate(values)
    }

    /// `∫ f(r) r^power dr` over `[0, r_max]`.
    pub fn integrate_radial(&self, f: &RadialFunction, power: i32) -> Result<f64> {
        if power < 0 {
            return Err(Error::InvalidInput(format!("weight power must be non-negative, got {power}")));
        }
        f.check_finite()?;
        let values: Vec<f64> = f.values.iter().zip(&self.points).map(|(v, r)| v * r.powi(power)).collect();
        if power == 0 {
            Ok(self.integrate_with_origin(&values, extrapolate_origin(&f.values)))
        } else {
            Ok(self.integrate(&values))
        }
    }

    /// Running integral `∫_0^{r_i} f dr` at every node, fourth order.
    pub fn cumulative(&self, values: &[f64], origin_value: f64) -> Vec<f64> {
        let n = self.len();
        let q = |k: usize| if k == 0 { origin_value } else { values[k - 1] };
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        for a in 0..n {
            acc += interval_integral(&q, a, n, self.h);
            out.push(acc);
        }
        out
    }

    /// Multipole potential `V(r_i) = ∫ g(r') r_<^l / r_>^{l+1} dr'` for an
    /// integrand `g` that vanishes at the origin. Linear cost; the recursion
    /// only ever forms ratios `r/r'` close to one so large `l` is safe.
    pub fn multipole_potential(&self, g: &[f64], l: usize) -> Vec<f64> {
        let n = self.len();
        let r = |k: usize| k as f64 * self.h;
        let gv = |k: usize| if k == 0 { 0.0 } else { g[k - 1] };
        let lp = l as i32;

        let mut inner = vec![0.0; n + 1];
        for i in 1..=n {
            let ri = r(i);
            let q = |k: usize| if k == 0 { 0.0 } else { gv(k) * (r(k) / ri).powi(lp) };
            let piece = interval_integral(&q, i - 1, n, self.h) / ri;
            inner[i] = (r(i - 1) / ri).powi(lp + 1) * inner[i - 1] + piece;
        }

        let mut outer = vec![0.0; n + 1];
        for i in (1..n).rev() {
            let ri = r(i);
            let q = |k: usize| if k == 0 { 0.0 } else { gv(k) * (ri / r(k)).powi(lp + 1) };
            let piece = if i == 1 {
                // one-sided stencil keeps the origin out of the ratio
                self.h / 24.0 * (9.0 * q(1) + 19.0 * q(2) - 5.0 * q(3) + q(4))
            } else {
                interval_integral(&q, i, n, self.h)
            };
            outer[i] = piece / ri + (ri / r(i + 1)).powi(lp) * outer[i + 1];
        }

        (1..=n).map(|i| inner[i] + outer[i]).collect()
    }

    /// Single-point multipole integral `∫ g(r') r_<^k / r_>^{k+1} dr'` at
    /// node `index` (zero based). The integral is split at `r` so each side
    /// sees a smooth kernel.
    pub fn multipole_at(&self, g: &[f64], index: usize, k: usize) -> f64 {
        let n = self.len();
        let i = index + 1;
        let ri = i as f64 * self.h;
        let kp = k as i32;
        let gv = |j: usize| if j == 0 || j > n { 0.0 } else { g[j - 1] };
        let inner_q = |j: usize| if j == 0 { 0.0 } else { gv(j) * (j as f64 / i as f64).powi(kp) };
        let outer_q = |j: usize| if j == 0 { 0.0 } else { gv(j) * (i as f64 / j as f64).powi(kp + 1) };
        let mut inner = 0.0;
        for a in 0..i {
            inner += interval_integral(&inner_q, a, n, self.h);
        }
        let mut outer = 0.0;
        for a in i..n {
            outer += if a == 1 {
                self.h / 24.0 * (9.0 * outer_q(1) + 19.0 * outer_q(2) - 5.0 * outer_q(3) + outer_q(4))
            } else {
                interval_integral(&outer_q, a, n, self.h)
            };
        }
        (inner + outer) / ri
    }
}

/// Composite Simpson weights on `n` uniform intervals (nodes `0..=n`); the
/// last three intervals use the 3/8 rule when `n` is odd.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let simpson_end = if n % 2 == 0 { n } else { n - 3 };
    for k in (0..simpson_end).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if n % 2 == 1 {
        let k = n - 3;
        w[k] += 3.0 * h / 8.0;
        w[k + 1] += 9.0 * h / 8.0;
        w[k + 2] += 9.0 * h / 8.0;
        w[k + 3] += 3.0 * h / 8.0;
    }
    w
}

/// `∫_{x_a}^{x_{a+1}} q dx` from four neighbouring nodes (cubic Lagrange).
/// `q(k)` is the value at node `k`, `k = 0..=n`.
pub(crate) fn interval_integral(q: &impl Fn(usize) -> f64, a: usize, n: usize, h: f64) -> f64 {
    let c = h / 24.0;
    if a == 0 {
        c * (9.0 * q(0) + 19.0 * q(1) - 5.0 * q(2) + q(3))
    } else if a + 1 == n {
        c * (q(n - 3) - 5.0 * q(n - 2) + 19.0 * q(n - 1) + 9.0 * q(n))
    } else {
        c * (-q(a - 1) + 13.0 * q(a) + 13.0 * q(a + 1) - q(a + 2))
    }
}

/// Cubic extrapolation of nodes 1..4 to the origin.
pub fn extrapolate_origin(values: &[f64]) -> f64 {
    4.0 * values[0] - 6.0 * values[1] + 4.0 * values[2] - values[3]
}

/// Fourth-order second derivative on the grid. `origin_value` is f(0) and
/// `odd` selects the parity used for the ghost node at `-h`.
pub fn second_derivative(values: &[f64], h: f64, origin_value: f64, odd: bool) -> Vec<f64> {
    let n = values.len();
    let at = |k: isize| -> f64 {
        match k {
            k if k < 0 => {
                let mirror = values[(-k - 1) as usize];
                if odd { -mirror } else { mirror }
            }
            0 => origin_value,
            k if (k as usize) <= n => values[k as usize - 1],
            _ => 0.0,
        }
    };
    let h2 = h * h;
    (1..=n as isize)
        .map(|i| {
            if i as usize + 1 >= n {
                (at(i - 1) - 2.0 * at(i) + at(i + 1)) / h2
            } else {
                (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h2)
            }
        })
        .collect()
}

/// Fourth-order first derivative with the same boundary conventions.
pub fn first_derivative(values: &[f64], h: f64, origin_value: f64, odd: bool) -> Vec<f64> {
    let n = values.len();
    let at = |k: isize| -> f64 {
        match k {
            k if k < 0 => {
                let mirror = values[(-k - 1) as usize];
                if odd { -mirror } else { mirror }
            }
            0 => origin_value,
            k if (k as usize) <= n => values[k as usize - 1],
            _ => 0.0,
        }
    };
    (1..=n as isize)
        .map(|i| {
            if i as usize + 1 >= n {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            } else {
                (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h)
            }
        })
        .collect()
}

/// What a sampled radial function represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionKind {
    /// Full radial function R(r).
    Full,
    /// Reduced form u(r) = r R(r).
    Reduced,
    Density,
    Potential,
}

#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    kind: FunctionKind,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, kind: FunctionKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        let f = Self { grid, values, kind };
        f.check_finite()?;
        if kind == FunctionKind::Density {
            let min = f.values.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -1e-12 {
                return Err(Error::InvalidDensity { min });
            }
        }
        Ok(f)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, kind: FunctionKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, kind)
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::InvalidInput(format!("non-finite value at grid index {i}"))),
            None => Ok(()),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `4π ∫ f r² dr`, the spherical volume integral.
    pub fn volume_integral(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().zip(self.grid.points()).map(|(f, r)| f * r * r).collect();
        4.0 * std::f64::consts::PI * self.grid.integrate(&v)
    }
}

/// `∫ f(r) r^weight_power dr` over the function's own grid.
pub fn integrate_radial(f: &RadialFunction, weight_power: i32) -> Result<f64> {
    f.grid.integrate_radial(f, weight_power)
}

/// Samples on a uniform mesh that includes the origin, with cubic
/// interpolation in between. Beyond the last node the function is zero.
#[derive(Debug, Clone)]
pub struct UniformSamples {
    h: f64,
    values: Vec<f64>,
}

impl UniformSamples {
    pub fn new(h: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 4, "need at least four samples");
        Self { h, values }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn r_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.h
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.values.len();
        let x = r / self.h;
        if x >= (n - 1) as f64 {
            return if x == (n - 1) as f64 { self.values[n - 1] } else { 0.0 };
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let t = x - i as f64;
        let (f0, f1, f2, f3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        // Lagrange cubic through nodes i-1, i, i+1, i+2 evaluated at i + t
        let a = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let b = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let d = (t + 1.0) * t * (t - 1.0) / 6.0;
        a * f0 + b * f1 + c * f2 + d * f3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_moment() {
        let grid = Arc::new(RadialGrid::uniform(10.0, 4000).unwrap());
        let f = RadialFunction::from_fn(grid, FunctionKind::Full, |r| (-r * r).exp()).unwrap();
        let v = integrate_radial(&f, 2).unwrap();
        assert!((v - PI.sqrt() / 4.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn zero_function() {
        let grid = Arc::new(RadialGrid::uniform(3.0, 100).unwrap());
        let f = RadialFunction::from_fn(grid, FunctionKind::Full, |_| 0.0).unwrap();
        assert_eq!(integrate_radial(&f, 2).unwrap(), 0.0);
    }

    #[test]
    fn linear_function_with_origin_extrapolation() {
        let grid = Arc::new(RadialGrid::uniform(1.0, 101).unwrap());
        let f = RadialFunction::from_fn(grid, FunctionKind::Full, |r| r).unwrap();
        assert!((integrate_radial(&f, 0).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cubic_polynomials_exact() {
        for n in [40, 41] {
            let grid = RadialGrid::uniform(2.0, n).unwrap();
            let values: Vec<f64> = grid.points().iter().map(|r| r * r * r - 2.0 * r * r + 0.5 * r).collect();
            let exact = 4.0 - 2.0 * 8.0 / 3.0 + 0.25 * 4.0;
            assert!((grid.integrate(&values) - exact).abs() < 1e-10 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn non_finite_rejected() {
        let grid = Arc::new(RadialGrid::uniform(1.0, 10).unwrap());
        let mut v = vec![1.0; 10];
        v[3] = f64::NAN;
        assert!(RadialFunction::new(grid, v, FunctionKind::Full).is_err());
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let grid = RadialGrid::uniform(6.0, 600).unwrap();
        let v: Vec<f64> = grid.points().iter().map(|r| (-r).exp()).collect();
        let c = grid.cumulative(&v, 1.0);
        for (i, r) in grid.points().iter().enumerate() {
            assert!((c[i] - (1.0 - (-r).exp())).abs() < 1e-9);
        }
    }

    #[test]
    fn multipole_of_gaussian_shell() {
        // V(r) for l = 0 with g = 4π r² n, n a unit Gaussian: erf(√a r)/r
        let grid = RadialGrid::uniform(12.0, 2400).unwrap();
        let a: f64 = 1.3;
        let norm = (a / PI).powf(1.5);
        let g: Vec<f64> = grid.points().iter().map(|r| 4.0 * PI * r * r * norm * (-a * r * r).exp()).collect();
        let v = grid.multipole_potential(&g, 0);
        for (i, &r) in grid.points().iter().enumerate().step_by(97) {
            let exact = erf(a.sqrt() * r) / r;
            assert!((v[i] - exact).abs() < 1e-8, "r={r} {} {}", v[i], exact);
        }
    }

    #[test]
    fn interpolation_of_smooth_function() {
        let h = 0.01;
        let s = UniformSamples::new(h, (0..1000).map(|k| (k as f64 * h).sin()).collect());
        for r in [0.003, 0.5, 3.3333, 9.95] {
            assert!((s.eval(r) - r.sin()).abs() < 1e-9);
        }
        assert_eq!(s.eval(20.0), 0.0);
    }

    fn erf(x: f64) -> f64 {
        // positive-term series: erf x = 2/√π e^{-x²} Σ 2^k x^{2k+1} / (2k+1)!!
        let mut term = x;
        let mut sum = 0.0;
        let mut k = 0.0;
        while term > 1e-18 * sum || k < 1.0 {
            sum += term;
            k += 1.0;
            term *= 2.0 * x * x / (2.0 * k + 1.0);
        }
        2.0 / PI.sqrt() * (-x * x).exp() * sum
    }
}
