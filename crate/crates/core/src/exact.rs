//! Exact ground state of Hooke's atom by separation into centre-of-mass and
//! relative motion.
//!
//! The relative radial equation (reduced mass ½) reads
//! `-u'' + (ω_r² r² + λ/r) u = ε u` with `ω_r = ω/2` and Coulomb strength `λ`
//! (1 for the physical atom, 0 for the non-interacting test hook). The
//! centre-of-mass part is the Gaussian `e^{-ω R²}` with energy `3ω/2`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::grid::{FunctionKind, GridConfig, RadialFunction, RadialGrid, UniformSamples};
use crate::two_electron::{ProjectionConfig, SectorWavefunction, TruncationReport};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HookeProblem {
    pub omega: f64,
    /// Strength of the electron-electron repulsion.
    pub coulomb: f64,
}

impl HookeProblem {
    pub fn new(omega: f64) -> Result<Self> {
        Self::with_coulomb(omega, 1.0)
    }

    pub fn non_interacting(omega: f64) -> Result<Self> {
        Self::with_coulomb(omega, 0.0)
    }

    pub fn with_coulomb(omega: f64, coulomb: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidInput(format!("omega must be positive, got {omega}")));
        }
        if !(coulomb.is_finite() && coulomb >= 0.0) {
            return Err(Error::InvalidInput(format!("coulomb strength must be non-negative, got {coulomb}")));
        }
        Ok(Self { omega, coulomb })
    }

    pub fn electron_count(&self) -> usize {
        2
    }

    pub fn omega_rel(&self) -> f64 {
        0.5 * self.omega
    }

    pub fn com_energy(&self) -> f64 {
        1.5 * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub grid: GridConfig,
    pub projection: ProjectionConfig,
    /// Power-series terms kept for the reported coefficients.
    pub max_terms: usize,
    /// Highest polynomial degree tried when looking for a terminating series.
    pub max_termination_degree: usize,
    /// Integration steps between the origin and the shooting radius.
    pub shoot_steps: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            projection: ProjectionConfig::default(),
            max_terms: 400,
            max_termination_degree: 10,
            shoot_steps: 40_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelativeMotionSolution {
    pub problem: HookeProblem,
    pub epsilon_rel: f64,
    /// Reduced radial function `u(r)` with `∫u² dr = 1`, sampled out to twice
    /// the single-particle grid extent.
    pub u_rel: RadialFunction,
    pub series_coefficients: Vec<f64>,
    pub closed_form: bool,
    /// Polynomial degree when the series terminates.
    pub termination_degree: Option<usize>,
}

impl RelativeMotionSolution {
    /// `⟨r^k⟩` over the relative coordinate.
    pub fn moment(&self, k: i32) -> f64 {
        let grid = self.u_rel.grid();
        let v: Vec<f64> = self.u_rel.values().iter().zip(grid.points()).map(|(u, r)| u * u * r.powi(k)).collect();
        grid.integrate(&v)
    }

    /// `φ_rel(r) = u(r) / r` interpolated on a mesh that includes `r = 0`.
    fn radial_samples(&self) -> UniformSamples {
        let u = self.u_rel.values();
        let grid = self.u_rel.grid();
        let mut phi = Vec::with_capacity(u.len() + 1);
        phi.push(0.0);
        phi.extend(u.iter().zip(grid.points()).map(|(u, r)| u / r));
        phi[0] = 4.0 * phi[1] - 6.0 * phi[2] + 4.0 * phi[3] - phi[4];
        UniformSamples::new(grid.spacing(), phi)
    }
}

/// Coefficients of `u = e^{-ω_r r²/2} Σ_k a_k r^{k+1}` at trial energy `eps`.
pub fn series_coefficients(omega_rel: f64, coulomb: f64, eps: f64, terms: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(terms);
    a.push(1.0);
    for j in 0..terms.saturating_sub(1) {
        let prev = if j >= 1 { a[j - 1] } else { 0.0 };
        let next = (coulomb * a[j] + (omega_rel * (2 * j + 1) as f64 - eps) * prev) / ((j + 1) * (j + 2)) as f64;
        a.push(next);
    }
    a
}

/// Looks for a terminating, node-less series of degree `1..=max_degree`.
pub fn find_termination(problem: &HookeProblem, max_degree: usize) -> Option<(usize, f64)> {
    let w = problem.omega_rel();
    if problem.coulomb == 0.0 {
        return Some((0, 3.0 * w));
    }
    for degree in 1..=max_degree {
        let eps = w * (2 * degree + 3) as f64;
        let a = series_coefficients(w, problem.coulomb, eps, degree + 1);
        // a_{N+1} vanishes when its two recurrence terms cancel
        let t1 = problem.coulomb * a[degree];
        let t2 = (w * (2 * degree + 1) as f64 - eps) * a[degree - 1];
        if (t1 + t2).abs() <= 1e-10 * (t1.abs() + t2.abs()) && polynomial_positive(&a, 60.0 / w.sqrt()) {
            return Some((degree, eps));
        }
    }
    None
}

fn polynomial_positive(a: &[f64], extent: f64) -> bool {
    (1..=2000).all(|k| {
        let r = extent * k as f64 / 2000.0;
        a.iter().rev().fold(0.0, |acc, c| acc * r + c) > 0.0
    })
}

/// Outward Numerov integration from the origin at energy `eps`, returning the
/// node count and the sign of `u` at the last step. Stops early once the
/// solution has clearly diverged.
fn shoot(problem: &HookeProblem, eps: f64, h: f64, steps: usize) -> (usize, f64) {
    let w = problem.omega_rel();
    let lam = problem.coulomb;
    let f = |r: f64| w * w * r * r + lam / r - eps;
    let a = series_coefficients(w, lam, eps, 4);
    let mut u_prev_c = -h * h * lam / 12.0; // c_0 u_0 with u'(0) = 1
    let mut u = (-0.5 * w * h * h).exp() * (h + a[1] * h * h + a[2] * h.powi(3) + a[3] * h.powi(4));
    let mut f_cur = f(h);
    let mut nodes = 0;
    for i in 1..steps {
        let r_next = (i + 1) as f64 * h;
        let f_next = f(r_next);
        let u_next = (2.0 * u * (1.0 + 5.0 * h * h * f_cur / 12.0) - u_prev_c) / (1.0 - h * h * f_next / 12.0);
        if u_next * u < 0.0 {
            nodes += 1;
        }
        u_prev_c = u * (1.0 - h * h * f_cur / 12.0);
        u = u_next;
        f_cur = f_next;
        if u.abs() > 1e200 {
            break;
        }
    }
    (nodes, u.signum())
}

/// Radius beyond which the ground state is negligible for shooting.
fn shooting_radius(omega: f64) -> f64 {
    (2.0 / (omega * omega)).cbrt() + 12.0 / omega.sqrt()
}

/// Ground-state relative energy by bisection on the node count of the
/// outward solution.
pub fn shoot_relative_eigenvalue(problem: &HookeProblem, steps: usize, tol: f64) -> Result<f64> {
    let w = problem.omega_rel();
    let h = shooting_radius(problem.omega) / steps as f64;
    let below = |eps: f64| {
        let (nodes, sign) = shoot(problem, eps, h, steps);
        nodes == 0 && sign > 0.0
    };
    let mut lo = 0.0;
    let mut hi = 1.01 * (3.0 * w + 2.0 * problem.coulomb * (w / PI).sqrt()) + 1e-12;
    if !below(lo) {
        return Err(Error::SearchFailure { lo, hi });
    }
    let mut expansions = 0;
    while below(hi) {
        expansions += 1;
        if expansions > 20 {
            return Err(Error::SearchFailure { lo, hi });
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ground state of the relative motion with the default grid settings.
pub fn solve_relative_motion(problem: &HookeProblem, max_terms: usize) -> Result<RelativeMotionSolution> {
    solve_relative_motion_with(problem, &ExactConfig { max_terms, ..ExactConfig::default() })
}

pub fn solve_relative_motion_with(problem: &HookeProblem, config: &ExactConfig) -> Result<RelativeMotionSolution> {
    let omega = problem.omega;
    let w = problem.omega_rel();
    let r_max = 2.0 * config.grid.r_max_scale / omega.sqrt();
    let n_store = 4 * config.grid.n_points;
    let grid = Arc::new(RadialGrid::uniform(r_max, n_store)?);

    let termination = find_termination(problem, config.max_termination_degree);
    let (epsilon_rel, values, closed_form, degree) = match termination {
        Some((degree, eps)) => {
            let a = series_coefficients(w, problem.coulomb, eps, degree + 1);
            let values: Vec<f64> = grid
                .points()
                .iter()
                .map(|&r| r * a.iter().rev().fold(0.0, |acc, c| acc * r + c) * (-0.5 * w * r * r).exp())
                .collect();
            (eps, values, true, Some(degree))
        }
        None => {
            let eps = shoot_relative_eigenvalue(problem, config.shoot_steps, 1e-14)?;
            let h_target = shooting_radius(omega) / config.shoot_steps as f64;
            let refine = (grid.spacing() / h_target).ceil().max(1.0) as usize;
            let fine = numerov_state(problem, eps, grid.spacing() / refine as f64, n_store * refine);
            let values = (1..=n_store).map(|k| fine[k * refine]).collect();
            (eps, values, false, None)
        }
    };
    let norm: f64 = grid.integrate(&values.iter().map(|u: &f64| u * u).collect::<Vec<_>>());
    let values: Vec<f64> = values.iter().map(|u| u / norm.sqrt()).collect();
    let u_rel = RadialFunction::new(grid, values, FunctionKind::Reduced)?;
    let series = series_coefficients(w, problem.coulomb, epsilon_rel, config.max_terms);
    Ok(RelativeMotionSolution {
        problem: *problem,
        epsilon_rel,
        u_rel,
        series_coefficients: series,
        closed_form,
        termination_degree: degree,
    })
}

/// Bound state at a converged energy: outward integration to the outer
/// classical turning point, inward integration from the far end, matched in
/// value. Index `k` of the result is `r = k h`.
fn numerov_state(problem: &HookeProblem, eps: f64, h: f64, n: usize) -> Vec<f64> {
    let w = problem.omega_rel();
    let lam = problem.coulomb;
    let f = |r: f64| if r == 0.0 { 0.0 } else { w * w * r * r + lam / r - eps };
    let c = |r: f64| 1.0 - h * h * f(r) / 12.0;
    let turning = {
        let mut r = (eps / (w * w)).sqrt();
        for _ in 0..100 {
            // outer root of ω_r² r² + λ/r = ε by fixed-point iteration
            r = ((eps - lam / r).max(0.0) / (w * w)).sqrt().max(1e-3 * r);
        }
        r
    };
    let m = ((turning / h).round() as usize).clamp(4, n - 4);

    let mut u = vec![0.0; n + 1];
    let a = series_coefficients(w, lam, eps, 4);
    u[1] = (-0.5 * w * h * h).exp() * (h + a[1] * h * h + a[2] * h.powi(3) + a[3] * h.powi(4));
    let mut prev_c = -h * h * lam / 12.0;
    for i in 1..m {
        let r = i as f64 * h;
        let next = (2.0 * u[i] * (1.0 + 5.0 * h * h * f(r) / 12.0) - prev_c) / c(r + h);
        prev_c = u[i] * c(r);
        u[i + 1] = next;
    }
    let matched = u[m];

    let mut inward = vec![0.0; n + 1];
    inward[n] = 0.0;
    inward[n - 1] = 1e-200;
    for i in (m + 1..n).rev() {
        let r = i as f64 * h;
        inward[i - 1] = (2.0 * inward[i] * (1.0 + 5.0 * h * h * f(r) / 12.0) - inward[i + 1] * c(r + h)) / c(r - h);
        if inward[i - 1].abs() > 1e200 {
            inward[i - 1..].iter_mut().for_each(|v| *v *= 1e-200);
        }
    }
    let scale = matched / inward[m];
    for i in m + 1..=n {
        u[i] = inward[i] * scale;
    }
    u
}

/// A two-electron state `Φ(R) φ(r12)` with a Gaussian centre-of-mass factor
/// `|Φ|² = (a/π)^{3/2} e^{-a R²}` and a tabulated relative function.
#[derive(Debug, Clone)]
pub struct RelComState {
    pub com_exponent: f64,
    /// Reduced relative function with `∫ u² dr = 1`.
    pub u_rel: RadialFunction,
    phi: UniformSamples,
}

impl RelComState {
    pub fn new(com_exponent: f64, u_rel: RadialFunction) -> Result<Self> {
        if !(com_exponent.is_finite() && com_exponent > 0.0) {
            return Err(Error::InvalidInput(format!("centre-of-mass exponent must be positive, got {com_exponent}")));
        }
        let grid = u_rel.grid().clone();
        let norm = grid.integrate(&u_rel.values().iter().map(|u| u * u).collect::<Vec<_>>());
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidTrial(format!("relative function has norm {norm}")));
        }
        let values: Vec<f64> = u_rel.values().iter().map(|u| u / norm.sqrt()).collect();
        let u_rel = RadialFunction::new(grid.clone(), values, FunctionKind::Reduced)?;
        let mut phi = Vec::with_capacity(grid.len() + 1);
        phi.push(0.0);
        phi.extend(u_rel.values().iter().zip(grid.points()).map(|(u, r)| u / r));
        phi[0] = 4.0 * phi[1] - 6.0 * phi[2] + 4.0 * phi[3] - phi[4];
        Ok(Self { com_exponent, u_rel, phi: UniformSamples::new(grid.spacing(), phi) })
    }

    fn from_solution(rel: &RelativeMotionSolution) -> Self {
        Self { com_exponent: 2.0 * rel.problem.omega, u_rel: rel.u_rel.clone(), phi: rel.radial_samples() }
    }

    /// Normalized `ψ(r1, r2, cos θ12)`.
    pub fn psi(&self, r1: f64, r2: f64, x: f64) -> f64 {
        let a = self.com_exponent;
        let r12 = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * x).max(0.0).sqrt();
        let big_r2 = 0.25 * (r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * x).max(0.0);
        (a / PI).powf(0.75) * (-0.5 * a * big_r2).exp() * self.phi.eval(r12) / FOUR_PI.sqrt()
    }

    pub fn relative_moment(&self, k: i32) -> f64 {
        let grid = self.u_rel.grid();
        let v: Vec<f64> = self.u_rel.values().iter().zip(grid.points()).map(|(u, r)| u * u * r.powi(k)).collect();
        grid.integrate(&v)
    }

    /// `⟨1/r12⟩`.
    pub fn coulomb_energy(&self) -> f64 {
        self.relative_moment(-1)
    }

    /// `⟨½ω²(r1² + r2²)⟩ = ω²(⟨R²⟩ + ⟨r12²⟩/4)`.
    pub fn external_energy(&self, omega: f64) -> f64 {
        let r2_com = 1.5 / self.com_exponent;
        omega * omega * (r2_com + 0.25 * self.relative_moment(2))
    }

    /// Kinetic energy: centre of mass (mass 2) plus relative (mass ½).
    pub fn kinetic_energy(&self) -> f64 {
        let grid = self.u_rel.grid();
        let u = self.u_rel.values();
        let h = grid.spacing();
        let mut du = crate::numerics::grid::first_derivative(u, h, 0.0, true);
        // u is not odd about the origin (Coulomb cusp): one-sided stencil at r = h
        du[0] = (-3.0 * 0.0 - 10.0 * u[0] + 18.0 * u[1] - 6.0 * u[2] + u[3]) / (12.0 * h);
        let du0 = (48.0 * u[0] - 36.0 * u[1] + 16.0 * u[2] - 3.0 * u[3]) / (12.0 * h);
        let rel = grid.integrate_with_origin(&du.iter().map(|d| d * d).collect::<Vec<_>>(), du0 * du0);
        0.375 * self.com_exponent + rel
    }

    /// Density on `grid` by convolving the relative and centre-of-mass
    /// distributions analytically over angles.
    pub fn density(&self, grid: Arc<RadialGrid>) -> Result<RadialFunction> {
        let a = self.com_exponent;
        let ugrid = self.u_rel.grid();
        let uh = ugrid.spacing();
        let nu = ugrid.len();
        let weights = ugrid.weights();
        // u ρ_rel(u) with ρ_rel normalized in three dimensions
        let g: Vec<f64> = self.u_rel.values().iter().zip(ugrid.points()).map(|(v, u)| v * v / (FOUR_PI * u)).collect();
        // e^{-42} cutoff on the centre-of-mass Gaussian
        let half_width = 2.0 * 6.5 / a.sqrt();
        let peak = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let support = g.iter().rposition(|v| v.abs() > 1e-40 * peak).map_or(0.0, |j| (j + 1) as f64 * uh);
        let r1_cut = 0.5 * (support + half_width);
        let pref = 2.0 * (a / PI).powf(1.5) * 2.0 * PI / a;
        let values: Vec<f64> = grid
            .points()
            .par_iter()
            .map(|&r1| {
                if r1 > r1_cut {
                    return 0.0;
                }
                let lo = (((2.0 * r1 - half_width) / uh).floor().max(1.0)) as usize;
                let hi = (((2.0 * r1 + half_width) / uh).ceil() as usize).min(nu);
                let mut s = 0.0;
                for j in lo..=hi {
                    let u = j as f64 * uh;
                    let bracket = -(-a * (r1 - 0.5 * u).powi(2)).exp() * (-2.0 * a * r1 * u).exp_m1();
                    s += weights[j - 1] * g[j - 1] * bracket;
                }
                pref * s / r1
            })
            .collect();
        RadialFunction::new(grid, values, FunctionKind::Density)
    }

    pub fn sectors(&self, grid: Arc<RadialGrid>, config: &ProjectionConfig) -> Result<(SectorWavefunction, TruncationReport)> {
        SectorWavefunction::project(grid, config, |r1, r2, x| self.psi(r1, r2, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub total: f64,
    pub kinetic: f64,
    pub coulomb: f64,
    pub external: f64,
}

#[derive(Debug, Clone)]
pub struct ExactWavefunction {
    pub problem: HookeProblem,
    pub rel: RelativeMotionSolution,
    /// Frequency of the centre-of-mass oscillator (mass 2).
    pub omega_com: f64,
    pub total_energy: f64,
    pub state: RelComState,
    pub fine_grid: Arc<RadialGrid>,
    pub pair_grid: Arc<RadialGrid>,
    pub sectors: SectorWavefunction,
    pub truncation: TruncationReport,
}

impl ExactWavefunction {
    pub fn energy_parts(&self) -> EnergyParts {
        let coulomb = self.problem.coulomb * self.state.coulomb_energy();
        let external = self.state.external_energy(self.problem.omega);
        EnergyParts { total: self.total_energy, kinetic: self.total_energy - coulomb - external, coulomb, external }
    }
}

/// Combines the relative solution with the centre-of-mass ground state and
/// projects the product onto Legendre sectors.
pub fn assemble_exact_wavefunction(rel: RelativeMotionSolution, config: &ExactConfig) -> Result<ExactWavefunction> {
    let problem = rel.problem;
    let fine = Arc::new(config.grid.fine_grid(problem.omega)?);
    let pair = Arc::new(config.grid.pair_grid(&fine, problem.omega)?);
    let state = RelComState::from_solution(&rel);
    let (sectors, truncation) = state.sectors(pair.clone(), &config.projection)?;
    Ok(ExactWavefunction {
        problem,
        omega_com: problem.omega,
        total_energy: rel.epsilon_rel + problem.com_energy(),
        rel,
        state,
        fine_grid: fine,
        pair_grid: pair,
        sectors,
        truncation,
    })
}

pub fn solve_exact(problem: &HookeProblem, config: &ExactConfig) -> Result<ExactWavefunction> {
    let rel = solve_relative_motion_with(problem, config)?;
    assemble_exact_wavefunction(rel, config)
}

/// `n(r)` on the single-particle grid, `∫ n d³r = 2`.
pub fn exact_density(psi: &ExactWavefunction) -> Result<RadialFunction> {
    psi.state.density(psi.fine_grid.clone())
}

/// `⟨1/r12⟩ / ⟨½ω²(r1² + r2²)⟩`.
pub fn interaction_ratio(psi: &ExactWavefunction) -> f64 {
    let parts = psi.energy_parts();
    parts.coulomb / parts.external
}

/// `Q = ⟨T + V_ee⟩` of a sector wavefunction.
pub fn expectation_t_plus_vee(psi: &SectorWavefunction) -> f64 {
    psi.t_plus_vee()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_half() {
        let p = HookeProblem::new(0.5).unwrap();
        let (deg, eps) = find_termination(&p, 10).unwrap();
        assert_eq!(deg, 1);
        assert!((eps - 1.25).abs() < 1e-14);
        let a = series_coefficients(0.25, 1.0, eps, 5);
        assert!((a[1] - 0.5).abs() < 1e-15 && a[2].abs() < 1e-15);
    }

    #[test]
    fn magic_tenth() {
        let p = HookeProblem::new(0.1).unwrap();
        let (deg, eps) = find_termination(&p, 10).unwrap();
        assert_eq!(deg, 2);
        assert!((eps - 0.35).abs() < 1e-12);
    }

    #[test]
    fn generic_omega_not_magic() {
        assert!(find_termination(&HookeProblem::new(0.3).unwrap(), 10).is_none());
    }

    #[test]
    fn shooting_agrees_with_termination() {
        let p = HookeProblem::new(0.5).unwrap();
        let eps = shoot_relative_eigenvalue(&p, 40_000, 1e-14).unwrap();
        assert!((eps - 1.25).abs() < 1e-8, "{eps}");
    }

    #[test]
    fn non_interacting_limit() {
        let p = HookeProblem::non_interacting(1000.0).unwrap();
        let rel = solve_relative_motion(&p, 400).unwrap();
        assert!((rel.epsilon_rel - 1500.0).abs() < 1e-6 * 1500.0);
        let eps = shoot_relative_eigenvalue(&p, 40_000, 1e-14).unwrap();
        assert!((eps - 1500.0).abs() < 1e-6 * 1500.0, "{eps}");
    }

    #[test]
    fn invalid_omega() {
        assert!(HookeProblem::new(0.0).is_err());
        assert!(HookeProblem::new(-1.0).is_err());
    }
}
