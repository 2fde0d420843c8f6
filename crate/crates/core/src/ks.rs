//! Radial Kohn-Sham machinery for the two-electron singlet: LDA exchange and
//! correlation, Hartree potential, the self-consistent loop, KS inversion of
//! a given density and the derived exchange-correlation energies.

use std::f64::consts::PI;
use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactWavefunction, HookeProblem};
use crate::numerics::grid::{second_derivative, FunctionKind, RadialFunction, RadialGrid};
use crate::numerics::tridiag::TridiagonalSystem;

const FOUR_PI: f64 = 4.0 * PI;

/// Unpolarized Perdew-Wang 1992 fit of the correlation energy per electron,
/// `ε_c = -2A(1 + α1 rs) ln[1 + 1/(2A(β1 rs^½ + β2 rs + β3 rs^{3/2} + β4 rs^{p+1}))]`.
/// Constants from Phys. Rev. B 45, 13244, Table I (ε_c(rs, 0) column).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pw92Constants {
    pub a: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub p: f64,
}

impl Default for Pw92Constants {
    fn default() -> Self {
        Self { a: 0.031091, alpha1: 0.21370, beta1: 7.5957, beta2: 3.5876, beta3: 1.6382, beta4: 0.49294, p: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CorrelationVariant {
    #[default]
    PerdewWang92,
    /// `ε_c = -0.44 / (rs + 7.8)`.
    Wigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LdaFunctional {
    pub correlation: CorrelationVariant,
    pub pw92: Pw92Constants,
}

impl LdaFunctional {
    pub fn wigner() -> Self {
        Self { correlation: CorrelationVariant::Wigner, ..Self::default() }
    }

    pub fn label(&self) -> &'static str {
        match self.correlation {
            CorrelationVariant::PerdewWang92 => "lda-x+pw92",
            CorrelationVariant::Wigner => "lda-x+wigner",
        }
    }

    /// Exchange energy per electron `−(3/4)(3/π)^{1/3} n^{1/3}`.
    pub fn eps_x(n: f64) -> f64 {
        -0.75 * (3.0 / PI).cbrt() * n.cbrt()
    }

    /// `d(n ε_x)/dn = −(3/π)^{1/3} n^{1/3}`.
    pub fn v_x(n: f64) -> f64 {
        -(3.0 / PI).cbrt() * n.cbrt()
    }

    /// Correlation energy per electron and `dε_c/drs`.
    pub fn eps_c(&self, rs: f64) -> (f64, f64) {
        match self.correlation {
            CorrelationVariant::PerdewWang92 => {
                let c = &self.pw92;
                let sq = rs.sqrt();
                let q0 = -2.0 * c.a * (1.0 + c.alpha1 * rs);
                let q1 = 2.0 * c.a * (c.beta1 * sq + c.beta2 * rs + c.beta3 * rs * sq + c.beta4 * rs.powf(c.p + 1.0));
                let q1p = c.a
                    * (c.beta1 / sq + 2.0 * c.beta2 + 3.0 * c.beta3 * sq + 2.0 * (c.p + 1.0) * c.beta4 * rs.powf(c.p));
                let log = (1.0 / q1).ln_1p();
                let eps = q0 * log;
                let deps = -2.0 * c.a * c.alpha1 * log - q0 * q1p / (q1 * q1 + q1);
                (eps, deps)
            }
            CorrelationVariant::Wigner => {
                let eps = -0.44 / (rs + 7.8);
                (eps, 0.44 / (rs + 7.8).powi(2))
            }
        }
    }

    fn rs(n: f64) -> f64 {
        (3.0 / (FOUR_PI * n)).cbrt()
    }

    /// `ε_xc(n)`, zero for an empty region.
    pub fn eps_xc(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        Self::eps_x(n) + self.eps_c(Self::rs(n)).0
    }

    /// `v_xc(n) = v_x + ε_c − (rs/3) dε_c/drs`.
    pub fn v_xc(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        let rs = Self::rs(n);
        let (ec, dec) = self.eps_c(rs);
        Self::v_x(n) + ec - rs / 3.0 * dec
    }

    /// `E_xc = ∫ n ε_xc d³r`.
    pub fn energy(&self, n: &RadialFunction) -> f64 {
        let grid = n.grid();
        let v: Vec<f64> = n.values().iter().zip(grid.points()).map(|(&d, r)| d * self.eps_xc(d) * r * r).collect();
        FOUR_PI * grid.integrate(&v)
    }
}

fn check_density(n: &RadialFunction) -> Result<()> {
    let min = n.values().iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(Error::InvalidDensity { min });
    }
    Ok(())
}

/// Pointwise LDA exchange-correlation potential.
pub fn lda_vxc(n: &RadialFunction, functional: &LdaFunctional) -> Result<RadialFunction> {
    check_density(n)?;
    let v = n.values().iter().map(|&d| functional.v_xc(d)).collect();
    RadialFunction::new(n.grid().clone(), v, FunctionKind::Potential)
}

/// `v_H(r) = (1/r) ∫_0^r n 4πr'² dr' + ∫_r^∞ n 4πr' dr'`.
pub fn hartree_potential(n: &RadialFunction) -> Result<RadialFunction> {
    check_density(n)?;
    let grid = n.grid();
    let g: Vec<f64> = n.values().iter().zip(grid.points()).map(|(d, r)| FOUR_PI * d * r * r).collect();
    RadialFunction::new(grid.clone(), grid.multipole_potential(&g, 0), FunctionKind::Potential)
}

/// `E_H = ½ ∫ v_H n d³r`.
pub fn hartree_energy(n: &RadialFunction, v_h: &RadialFunction) -> f64 {
    0.5 * expectation(n, v_h)
}

/// `∫ v n d³r`.
pub fn expectation(n: &RadialFunction, v: &RadialFunction) -> f64 {
    let grid = n.grid();
    let vals: Vec<f64> = n
        .values()
        .iter()
        .zip(v.values())
        .zip(grid.points())
        .map(|((d, p), r)| d * p * r * r)
        .collect();
    FOUR_PI * grid.integrate(&vals)
}

pub fn external_potential(grid: &Arc<RadialGrid>, omega: f64) -> RadialFunction {
    RadialFunction::from_fn(grid.clone(), FunctionKind::Potential, |r| 0.5 * omega * omega * r * r)
        .expect("finite oscillator potential")
}

/// Second-order central-difference radial Hamiltonian
/// `−½u″ + [v + l(l+1)/2r²] u` with `u(0) = u(r_max + h) = 0`.
pub fn radial_hamiltonian(grid: &RadialGrid, potential: &[f64], l: usize) -> Result<TridiagonalSystem> {
    let h = grid.spacing();
    let cent = (l * (l + 1)) as f64 / 2.0;
    let diag = grid.points().iter().zip(potential).map(|(r, v)| 1.0 / (h * h) + v + cent / (r * r)).collect();
    TridiagonalSystem::new(diag, vec![-0.5 / (h * h); grid.len() - 1])
}

/// Lowest `count` radial states in potential `v`, normalized `∫u² dr = 1`.
pub fn radial_states(grid: &Arc<RadialGrid>, potential: &[f64], l: usize, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let sys = radial_hamiltonian(grid, potential, l)?;
    let pairs = sys.lowest(count)?;
    Ok(pairs
        .into_iter()
        .map(|p| {
            let norm = grid.integrate(&p.vector.iter().map(|u| u * u).collect::<Vec<_>>());
            (p.value, p.vector.iter().map(|u| u / norm.sqrt()).collect())
        })
        .collect())
}

/// Density `2|φ|²` of a doubly occupied s orbital `φ = u / (r √4π)`.
pub fn orbital_density(grid: &Arc<RadialGrid>, u: &[f64]) -> Result<RadialFunction> {
    let v = u.iter().zip(grid.points()).map(|(u, r)| u * u / (2.0 * PI * r * r)).collect();
    RadialFunction::new(grid.clone(), v, FunctionKind::Density)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScfConfig {
    pub mixing: f64,
    pub tol: f64,
    pub max_iterations: usize,
    /// Number of past residuals in the Pulay extrapolation; 0 gives plain
    /// linear mixing.
    pub pulay_depth: usize,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self { mixing: 0.3, tol: 1e-9, max_iterations: 500, pulay_depth: 6 }
    }
}

/// Which pieces of the effective potential are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interaction {
    Full,
    /// Bare oscillator: Hartree and exchange-correlation removed.
    None,
}

#[derive(Debug, Clone)]
pub struct ScfState {
    pub omega: f64,
    pub density: RadialFunction,
    /// Reduced orbital `u_00`, `∫u² dr = 1`.
    pub orbital: RadialFunction,
    pub epsilon: f64,
    pub v_h: RadialFunction,
    pub v_xc: RadialFunction,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

fn l1_change(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    let den: f64 = b.iter().map(|x| x.abs()).sum();
    num / den
}

/// Self-consistent LDA ground state on `grid`, starting from `initial` or the
/// bare-oscillator density.
pub fn scf_solve(
    problem: &HookeProblem,
    grid: &Arc<RadialGrid>,
    functional: &LdaFunctional,
    config: &ScfConfig,
    interaction: Interaction,
    initial: Option<&RadialFunction>,
) -> Result<ScfState> {
    if !(config.mixing > 0.0 && config.mixing <= 1.0) {
        return Err(Error::InvalidInput(format!("mixing must lie in (0, 1], got {}", config.mixing)));
    }
    let omega = problem.omega;
    let v_ext = external_potential(grid, omega);
    let mut density = match initial {
        Some(n) => {
            if !n.grid().same_as(grid) {
                return Err(Error::GridMismatch("initial density lives on a different grid".into()));
            }
            n.clone()
        }
        None => RadialFunction::from_fn(grid.clone(), FunctionKind::Density, |r| {
            2.0 * (omega / PI).powf(1.5) * (-omega * r * r).exp()
        })?,
    };
    let zero = RadialFunction::from_fn(grid.clone(), FunctionKind::Potential, |_| 0.0)?;
    let mut history: Vec<f64> = Vec::new();
    let mut pulay: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    for iteration in 1..=config.max_iterations {
        let (v_h, v_xc) = match interaction {
            Interaction::Full => {
                let mut v_h = hartree_potential(&density)?;
                if problem.coulomb != 1.0 {
                    v_h = RadialFunction::new(grid.clone(), v_h.values().iter().map(|v| v * problem.coulomb).collect(), FunctionKind::Potential)?;
                }
                (v_h, lda_vxc(&density, functional)?)
            }
            Interaction::None => (zero.clone(), zero.clone()),
        };
        let v: Vec<f64> = (0..grid.len()).map(|i| v_ext.values()[i] + v_h.values()[i] + v_xc.values()[i]).collect();
        let (epsilon, u) = radial_states(grid, &v, 0, 1)?.remove(0);
        let new_density = orbital_density(grid, &u)?;
        let residual = l1_change(new_density.values(), density.values());
        history.push(residual);
        if residual < config.tol || interaction == Interaction::None {
            return Ok(ScfState {
                omega,
                orbital: RadialFunction::new(grid.clone(), u, FunctionKind::Reduced)?,
                density: new_density,
                epsilon,
                v_h,
                v_xc,
                iterations: iteration,
                residual,
                residual_history: history,
            });
        }
        let f: Vec<f64> = new_density.values().iter().zip(density.values()).map(|(n, o)| n - o).collect();
        pulay.push_back((density.values().to_vec(), f));
        if pulay.len() > config.pulay_depth.max(1) {
            pulay.pop_front();
        }
        let mixed = pulay_mix(&pulay, config.mixing);
        density = RadialFunction::new(grid.clone(), mixed, FunctionKind::Density)?;
    }
    Err(Error::NonConvergence { residuals: history })
}

/// Direct inversion in the iterative subspace: the combination of stored
/// inputs whose residuals have the smallest norm, followed by a damped step.
fn pulay_mix(store: &VecDeque<(Vec<f64>, Vec<f64>)>, mixing: f64) -> Vec<f64> {
    let m = store.len();
    let mut coeffs = vec![0.0; m];
    coeffs[m - 1] = 1.0;
    if m > 1 {
        let mut b = DMatrix::<f64>::zeros(m + 1, m + 1);
        let mut rhs = DVector::<f64>::zeros(m + 1);
        for i in 0..m {
            for j in 0..=i {
                let d: f64 = store[i].1.iter().zip(&store[j].1).map(|(a, b)| a * b).sum();
                b[(i, j)] = d;
                b[(j, i)] = d;
            }
            b[(i, m)] = 1.0;
            b[(m, i)] = 1.0;
        }
        rhs[m] = 1.0;
        if let Some(sol) = b.lu().solve(&rhs) {
            if sol.iter().all(|c| c.is_finite()) {
                coeffs = sol.iter().take(m).copied().collect();
            }
        }
    }
    let len = store[0].0.len();
    (0..len)
        .map(|k| {
            let v: f64 = store.iter().zip(&coeffs).map(|((n, f), c)| c * (n[k] + mixing * f[k])).sum();
            v.max(0.0)
        })
        .collect()
}

/// `E = 2ε − E_H − ∫v_xc n + E_xc`.
pub fn lda_total_energy(state: &ScfState, functional: &LdaFunctional) -> f64 {
    let e_h = hartree_energy(&state.density, &state.v_h);
    2.0 * state.epsilon - e_h - expectation(&state.density, &state.v_xc) + functional_energy(state, functional)
}

fn functional_energy(state: &ScfState, functional: &LdaFunctional) -> f64 {
    if state.v_xc.values().iter().all(|v| *v == 0.0) {
        0.0
    } else {
        functional.energy(&state.density)
    }
}

/// Kinetic energy of the doubly occupied orbital with the same discrete
/// Laplacian as the Hamiltonian: `T_s = −∫ u u″ dr`.
pub fn discrete_kinetic(grid: &RadialGrid, u: &[f64]) -> f64 {
    let h = grid.spacing();
    let n = u.len();
    let s: f64 = (0..n)
        .map(|i| {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            -u[i] * (left - 2.0 * u[i] + right) / (h * h)
        })
        .sum();
    let norm: f64 = u.iter().map(|x| x * x).sum();
    s / norm
}

/// `T_s + ∫v_ext n + E_H + E_xc`, the second route to the LDA energy.
pub fn lda_energy_by_parts(state: &ScfState, functional: &LdaFunctional) -> f64 {
    let grid = state.density.grid();
    let t_s = discrete_kinetic(grid, state.orbital.values());
    let v_ext = external_potential(grid, state.omega);
    t_s + expectation(&state.density, &v_ext)
        + hartree_energy(&state.density, &state.v_h)
        + functional_energy(state, functional)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InversionGauge {
    /// Use the given orbital energy; v_xc then carries its natural asymptote.
    Eigenvalue(f64),
    /// Shift so v_xc averages to zero over the outer tenth of the trusted
    /// window (least-squares constant fit).
    AsymptoticZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XcSource {
    Lda,
    ExactInversion,
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub epsilon: f64,
    /// KS potential `v_s = v_ext + v_H + v_xc`.
    pub v_s: RadialFunction,
    pub v_h: RadialFunction,
    pub v_xc: RadialFunction,
    /// Last grid index (exclusive) where the density is trusted.
    pub window_end: usize,
    /// Non-interacting kinetic energy `T_s` of the inverted orbital.
    pub t_s: f64,
    /// Set when the density underflows before the grid ends.
    pub truncated: bool,
}

/// Recovers the KS potential reproducing `n` (two electrons in one orbital)
/// by inverting the discrete radial equation. Outside the trusted window the
/// exchange-correlation potential continues as `c/r`.
pub fn invert_ks(n: &RadialFunction, omega: f64, gauge: InversionGauge, hartree: bool) -> Result<Inversion> {
    check_density(n)?;
    let grid = n.grid();
    let h = grid.spacing();
    let r = grid.points();
    let n_max = n.values().iter().copied().fold(0.0, f64::max);
    let floor = 1e-12 * n_max;
    let window_end = n.values().iter().position(|&d| d <= floor).unwrap_or(grid.len());
    if window_end < 8 {
        return Err(Error::InvalidDensity { min: n_max });
    }
    let u: Vec<f64> = n.values().iter().zip(r).map(|(d, r)| r * (2.0 * PI * d.max(0.0)).sqrt()).collect();
    // second-order stencil, matching the discrete KS Hamiltonian
    let lap: Vec<f64> = (0..window_end)
        .map(|i| {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < u.len() { u[i + 1] } else { 0.0 };
            (left - 2.0 * u[i] + right) / (h * h)
        })
        .collect();
    let v_h = if hartree {
        hartree_potential(n)?
    } else {
        RadialFunction::from_fn(grid.clone(), FunctionKind::Potential, |_| 0.0)?
    };
    let shape: Vec<f64> = (0..window_end).map(|i| 0.5 * lap[i] / u[i]).collect();
    let epsilon = match gauge {
        InversionGauge::Eigenvalue(e) => e,
        InversionGauge::AsymptoticZero => {
            let start = window_end - (window_end / 10).max(1);
            let mean: f64 = (start..window_end)
                .map(|i| shape[i] - 0.5 * omega * omega * r[i] * r[i] - v_h.values()[i])
                .sum::<f64>()
                / (window_end - start) as f64;
            -mean
        }
    };
    let mut v_xc = vec![0.0; grid.len()];
    for i in 0..window_end {
        v_xc[i] = epsilon + shape[i] - 0.5 * omega * omega * r[i] * r[i] - v_h.values()[i];
    }
    let edge = window_end - 1;
    let c = v_xc[edge] * r[edge];
    for i in window_end..grid.len() {
        v_xc[i] = c / r[i];
    }
    let v_s: Vec<f64> = (0..grid.len()).map(|i| 0.5 * omega * omega * r[i] * r[i] + v_h.values()[i] + v_xc[i]).collect();
    let d2 = second_derivative(&u, h, 0.0, true);
    let t_s = -grid.integrate(&u.iter().zip(&d2).map(|(a, b)| a * b).collect::<Vec<_>>());
    Ok(Inversion {
        epsilon,
        v_s: RadialFunction::new(grid.clone(), v_s, FunctionKind::Potential)?,
        v_h,
        v_xc: RadialFunction::new(grid.clone(), v_xc, FunctionKind::Potential)?,
        window_end,
        t_s,
        truncated: window_end < grid.len(),
    })
}

#[derive(Debug, Clone)]
pub struct XcRecord {
    pub e_xc: f64,
    pub v_xc: RadialFunction,
    pub source: XcSource,
    pub e_total: f64,
    /// `|E_xc / E|`.
    pub indicator: f64,
}

/// Exact KS inversion of the exact density, gauged by the ionization
/// condition `ε = E(2) − E(1) = E − 3ω/2`.
pub fn invert_exact(psi: &ExactWavefunction, n_exact: &RadialFunction) -> Result<Inversion> {
    let eps = psi.total_energy - psi.problem.com_energy();
    invert_ks(n_exact, psi.problem.omega, InversionGauge::Eigenvalue(eps), psi.problem.coulomb != 0.0)
}

/// `E_xc = E − T_s − ∫v_ext n − E_H` for the exact state.
pub fn exact_exc(psi: &ExactWavefunction, n_exact: &RadialFunction, inversion: &Inversion) -> Result<XcRecord> {
    let grid = n_exact.grid();
    let v_ext = external_potential(grid, psi.problem.omega);
    let e_h = if psi.problem.coulomb == 0.0 { 0.0 } else { hartree_energy(n_exact, &inversion.v_h) };
    let e_xc = psi.total_energy - inversion.t_s - expectation(n_exact, &v_ext) - e_h;
    Ok(XcRecord {
        e_xc,
        v_xc: inversion.v_xc.clone(),
        source: XcSource::ExactInversion,
        e_total: psi.total_energy,
        indicator: (e_xc / psi.total_energy).abs(),
    })
}

pub fn lda_exc(state: &ScfState, functional: &LdaFunctional) -> XcRecord {
    let e_xc = functional_energy(state, functional);
    let e_total = lda_total_energy(state, functional);
    XcRecord { e_xc, v_xc: state.v_xc.clone(), source: XcSource::Lda, e_total, indicator: (e_xc / e_total).abs() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityErrorMetric {
    /// `100 Σ|n_a − n_b| / Σ n_b` over raw grid samples.
    pub percent: f64,
    /// Same ratio with the `4π r² dr` volume measure.
    pub weighted_percent: f64,
}

pub fn density_percent_error(n_a: &RadialFunction, n_b: &RadialFunction) -> Result<DensityErrorMetric> {
    if !n_a.grid().same_as(n_b.grid()) {
        return Err(Error::GridMismatch("densities live on different grids".into()));
    }
    let grid = n_a.grid();
    let raw_num: f64 = n_a.values().iter().zip(n_b.values()).map(|(a, b)| (a - b).abs()).sum();
    let raw_den: f64 = n_b.values().iter().sum();
    let diff: Vec<f64> = n_a.values().iter().zip(n_b.values()).zip(grid.points()).map(|((a, b), r)| (a - b).abs() * r * r).collect();
    let base: Vec<f64> = n_b.values().iter().zip(grid.points()).map(|(b, r)| b * r * r).collect();
    if raw_den <= 0.0 {
        return Err(Error::InvalidInput("reference density has zero weight".into()));
    }
    Ok(DensityErrorMetric { percent: 100.0 * raw_num / raw_den, weighted_percent: 100.0 * grid.integrate(&diff) / grid.integrate(&base) })
}
