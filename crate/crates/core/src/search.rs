//! Search for an interacting two-electron state whose density reproduces a
//! target (typically LDA) density while keeping `Q = ⟨T + V_ee⟩` low.
//!
//! Two trial families are supported: a separable relative/centre-of-mass
//! form with a polynomial relative factor (EA1), and a general expansion
//! `Σ a_ijk η_i(r1) η_j(r2) P_k(cos θ12)` in a Gaussian-polynomial basis
//! (EA2). Optimization alternates per-individual gradient descent with
//! elitist selection, mutation and fresh random individuals.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{build_rdm, linear_entropy, von_neumann_entropy, SchmidtSpectrum};
use crate::error::{Error, Result};
use crate::exact::RelComState;
use crate::ks::{discrete_kinetic, expectation, external_potential, ScfState};
use crate::numerics::basis::build_basis_with_exponent;
use crate::numerics::grid::{first_derivative, FunctionKind, RadialFunction, RadialGrid};
use crate::numerics::legendre::wigner_3j;
use crate::two_electron::{OrbitalPair, ProjectionConfig};

const FOUR_PI: f64 = 4.0 * PI;
/// Basis functions per electron in the EA2 expansion.
pub const EA2_RADIAL: usize = 4;
/// Legendre sectors in the EA2 expansion.
pub const EA2_SECTORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialForm {
    Ea1,
    Ea2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    /// Density mismatch alone.
    F,
    /// `f + weight · Q`, with `f` a fraction (not a percentage).
    FPlusQ { weight: f64 },
}

impl Objective {
    fn value(self, f: f64, q: f64) -> f64 {
        match self {
            Self::F => f,
            Self::FPlusQ { weight } => f + weight * q,
        }
    }
}

/// `ψ(r, R) = p(r) e^{−ω_r r²/2} e^{−2ω_R R²}` with `p(r) = Σ a_i r^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEa1 {
    pub omega_r: f64,
    pub omega_com: f64,
    pub coeffs: Vec<f64>,
}

impl TrialEa1 {
    pub fn poly(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a)
    }

    /// Reduced relative function `r p(r) e^{−ω_r r²/2}` on `grid`.
    pub fn relative_function(&self, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
        if !(self.omega_r > 0.0 && self.omega_com > 0.0) {
            return Err(Error::InvalidTrial(format!(
                "exponents must be positive (ω_r = {}, ω_R = {})",
                self.omega_r, self.omega_com
            )));
        }
        RadialFunction::from_fn(grid.clone(), FunctionKind::Reduced, |r| r * self.poly(r) * (-0.5 * self.omega_r * r * r).exp())
            .map_err(|e| Error::InvalidTrial(e.to_string()))
    }

    pub fn state(&self, grid: &Arc<RadialGrid>) -> Result<RelComState> {
        RelComState::new(4.0 * self.omega_com, self.relative_function(grid)?)
    }
}

/// Coefficients `a_ijk`, stored for `i ≤ j` only so exchange symmetry holds
/// by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEa2 {
    pub coeffs: Vec<f64>,
}

impl TrialEa2 {
    pub const PARAMS: usize = EA2_SECTORS * EA2_RADIAL * (EA2_RADIAL + 1) / 2;

    fn index(i: usize, j: usize, k: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let pair = i * EA2_RADIAL - i * (i + 1) / 2 + j;
        k * EA2_RADIAL * (EA2_RADIAL + 1) / 2 + pair
    }

    pub fn a(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[Self::index(i, j, k)]
    }

    /// Single `a_000` term.
    pub fn rank_one() -> Self {
        let mut coeffs = vec![0.0; Self::PARAMS];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    /// Sector coefficient matrices `C^k = a_k / 4π` for physically
    /// normalized orbitals `R_i = √(4π) η_i`.
    pub fn sector_coefficients(&self) -> Vec<DMatrix<f64>> {
        (0..EA2_SECTORS)
            .map(|k| DMatrix::from_fn(EA2_RADIAL, EA2_RADIAL, |i, j| self.a(i, j, k) / FOUR_PI))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Trial {
    Ea1(TrialEa1),
    Ea2(TrialEa2),
}

impl Trial {
    pub fn form(&self) -> TrialForm {
        match self {
            Self::Ea1(_) => TrialForm::Ea1,
            Self::Ea2(_) => TrialForm::Ea2,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Ea1(t) => [t.omega_r, t.omega_com].into_iter().chain(t.coeffs.iter().copied()).collect(),
            Self::Ea2(t) => t.coeffs.clone(),
        }
    }

    pub fn from_params(form: TrialForm, p: &[f64]) -> Result<Self> {
        match form {
            TrialForm::Ea1 => {
                if p.len() < 3 {
                    return Err(Error::InvalidTrial("EA1 needs two exponents and at least one coefficient".into()));
                }
                Ok(Self::Ea1(TrialEa1 { omega_r: p[0], omega_com: p[1], coeffs: p[2..].to_vec() }))
            }
            TrialForm::Ea2 => {
                if p.len() != TrialEa2::PARAMS {
                    return Err(Error::InvalidTrial(format!("EA2 needs {} coefficients, got {}", TrialEa2::PARAMS, p.len())));
                }
                Ok(Self::Ea2(TrialEa2 { coeffs: p.to_vec() }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population: usize,
    pub generations: usize,
    pub elite_keep: usize,
    pub mutation_scale: f64,
    pub descent_steps: usize,
    pub objective: Objective,
    /// Acceptance threshold on `f`.
    pub threshold: f64,
    pub seed: u64,
    /// Highest power in the EA1 polynomial.
    pub poly_degree: usize,
    /// Fresh random individuals per generation.
    pub fresh: usize,
    /// The objective is evaluated on every `eval_stride`-th target node;
    /// reported `f` always uses the full target grid.
    pub eval_stride: usize,
}

impl SearchConfig {
    pub fn ea1(seed: u64) -> Self {
        Self {
            population: 12,
            generations: 30,
            elite_keep: 4,
            mutation_scale: 0.1,
            descent_steps: 4,
            objective: Objective::F,
            threshold: 0.041,
            seed,
            poly_degree: 6,
            fresh: 3,
            eval_stride: 4,
        }
    }

    pub fn ea2(seed: u64) -> Self {
        Self {
            population: 16,
            generations: 30,
            elite_keep: 4,
            mutation_scale: 0.1,
            descent_steps: 10,
            objective: Objective::FPlusQ { weight: 0.01 },
            threshold: 0.01,
            seed,
            poly_degree: 6,
            fresh: 4,
            eval_stride: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population == 0 || self.elite_keep == 0 || self.elite_keep > self.population {
            return Err(Error::InvalidInput(format!(
                "need population ≥ elite_keep ≥ 1, got {} and {}",
                self.population, self.elite_keep
            )));
        }
        if self.eval_stride == 0 || !(self.mutation_scale >= 0.0) {
            return Err(Error::InvalidInput("eval_stride must be positive and mutation_scale non-negative".into()));
        }
        Ok(())
    }
}

/// Precomputed pieces of the EA2 objective.
#[derive(Debug, Clone)]
struct Ea2Tables {
    /// `R_a = √(4π) η_a` on the target grid.
    orbitals: Vec<Vec<f64>>,
    /// Kinetic matrices per sector, `½∫u_a′u_b′ + k(k+1)/2 ∫u_a u_b / r²`.
    kinetic: Vec<DMatrix<f64>>,
    /// `(ac|L|bd) = ∫∫ R_a R_c r1² r_<^L/r_>^{L+1} R_b R_d r2²`, flattened.
    coulomb: Vec<f64>,
    /// `(l, l', L, weight)` with the angular factor `3j² · (2 if l ≠ l')`.
    terms: Vec<(usize, usize, usize, f64)>,
}

impl Ea2Tables {
    fn build(omega: f64, grid: &Arc<RadialGrid>) -> Result<Self> {
        let basis = build_basis_with_exponent(omega, EA2_RADIAL, grid.clone())?;
        let orbitals: Vec<Vec<f64>> = basis.functions.iter().map(|f| f.values().iter().map(|v| v * FOUR_PI.sqrt()).collect()).collect();
        let r = grid.points();
        let h = grid.spacing();
        let us: Vec<Vec<f64>> = orbitals.iter().map(|o| o.iter().zip(r).map(|(v, r)| v * r).collect()).collect();
        let derivs: Vec<(Vec<f64>, f64)> = us
            .iter()
            .map(|u| {
                let mut du = first_derivative(u, h, 0.0, true);
                // R(0) ≠ 0 and R′(0) ≠ 0 in general: one-sided stencils at the origin
                du[0] = (-10.0 * u[0] + 18.0 * u[1] - 6.0 * u[2] + u[3]) / (12.0 * h);
                let du0 = (48.0 * u[0] - 36.0 * u[1] + 16.0 * u[2] - 3.0 * u[3]) / (12.0 * h);
                (du, du0)
            })
            .collect();
        let kinetic = (0..EA2_SECTORS)
            .map(|k| {
                let cent = (k * (k + 1)) as f64;
                DMatrix::from_fn(EA2_RADIAL, EA2_RADIAL, |a, b| {
                    let (da, da0) = &derivs[a];
                    let (db, db0) = &derivs[b];
                    let grad: Vec<f64> = da.iter().zip(db).map(|(x, y)| x * y).collect();
                    let t = 0.5 * grid.integrate_with_origin(&grad, da0 * db0);
                    let c: Vec<f64> = orbitals[a].iter().zip(&orbitals[b]).map(|(x, y)| x * y).collect();
                    let ra0 = 4.0 * orbitals[a][0] - 6.0 * orbitals[a][1] + 4.0 * orbitals[a][2] - orbitals[a][3];
                    let rb0 = 4.0 * orbitals[b][0] - 6.0 * orbitals[b][1] + 4.0 * orbitals[b][2] - orbitals[b][3];
                    t + 0.5 * cent * grid.integrate_with_origin(&c, ra0 * rb0)
                })
            })
            .collect();
        let n = EA2_RADIAL;
        let l_top = 2 * (EA2_SECTORS - 1);
        let mut coulomb = vec![0.0; (l_top + 1) * n * n * n * n];
        let pair = |a: usize, c: usize| -> Vec<f64> { (0..r.len()).map(|i| orbitals[a][i] * orbitals[c][i] * r[i] * r[i]).collect() };
        for big_l in 0..=l_top {
            for a in 0..n {
                for c in 0..n {
                    let g_ac = pair(a, c);
                    for b in 0..n {
                        for d in 0..n {
                            let g_bd = pair(b, d);
                            let pot = grid.multipole_potential(&g_bd, big_l);
                            let v = grid.integrate(&g_ac.iter().zip(&pot).map(|(x, y)| x * y).collect::<Vec<_>>());
                            coulomb[Self::slot(big_l, a, c, b, d)] = v;
                        }
                    }
                }
            }
        }
        let mut terms = Vec::new();
        for l in 0..EA2_SECTORS {
            for lp in l..EA2_SECTORS {
                for big_l in ((lp - l)..=(l + lp)).step_by(2) {
                    let c = wigner_3j(l as i64, lp as i64, big_l as i64, 0, 0, 0).powi(2);
                    if c > 0.0 {
                        terms.push((l, lp, big_l, if l == lp { c } else { 2.0 * c }));
                    }
                }
            }
        }
        Ok(Self { orbitals, kinetic, coulomb, terms })
    }

    fn slot(big_l: usize, a: usize, c: usize, b: usize, d: usize) -> usize {
        let n = EA2_RADIAL;
        (((big_l * n + a) * n + c) * n + b) * n + d
    }

    /// `(norm, ⟨T⟩, ⟨V_ee⟩)` of the unnormalized expansion.
    fn energies(&self, c: &[DMatrix<f64>]) -> (f64, f64, f64) {
        let mut norm = 0.0;
        let mut kin = 0.0;
        for (k, ck) in c.iter().enumerate() {
            let pref = FOUR_PI * FOUR_PI / (2 * k + 1) as f64;
            norm += pref * ck.norm_squared();
            kin += 2.0 * pref * (ck * &self.kinetic[k] * ck).trace();
        }
        let n = EA2_RADIAL;
        let mut vee = 0.0;
        for &(l, lp, big_l, w) in &self.terms {
            let (x, y) = (&c[l], &c[lp]);
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let xab = x[(a, b)];
                    if xab == 0.0 {
                        continue;
                    }
                    for cc in 0..n {
                        for d in 0..n {
                            s += xab * y[(cc, d)] * self.coulomb[Self::slot(big_l, a, cc, b, d)];
                        }
                    }
                }
            }
            vee += w * s;
        }
        (norm, kin, FOUR_PI * FOUR_PI * vee)
    }
}

/// Everything fixed during one search: target, grids and EA2 tables.
#[derive(Debug, Clone)]
pub struct SearchContext {
    pub omega: f64,
    pub form: TrialForm,
    target: RadialFunction,
    eval_grid: Arc<RadialGrid>,
    eval_target: Vec<f64>,
    stride: usize,
    rel_grid: Arc<RadialGrid>,
    ea2: Option<Ea2Tables>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub f: f64,
    pub q: f64,
    pub objective: f64,
}

impl SearchContext {
    pub fn new(omega: f64, target: &RadialFunction, form: TrialForm, eval_stride: usize) -> Result<Self> {
        let total: f64 = target.values().iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("target density has zero total weight".into()));
        }
        let grid = target.grid().clone();
        let eval_grid = Arc::new(grid.subsample(eval_stride, grid.len())?);
        let eval_target = RadialGrid::restrict(target.values(), eval_stride, eval_grid.len());
        let rel_grid = Arc::new(RadialGrid::uniform(grid.r_max(), 1200)?);
        let ea2 = match form {
            TrialForm::Ea1 => None,
            TrialForm::Ea2 => Some(Ea2Tables::build(omega, &grid)?),
        };
        Ok(Self { omega, form, target: target.clone(), eval_grid, eval_target, stride: eval_stride, rel_grid, ea2 })
    }

    pub fn target(&self) -> &RadialFunction {
        &self.target
    }

    fn tables(&self) -> Result<&Ea2Tables> {
        self.ea2.as_ref().ok_or_else(|| Error::InvalidInput("context was built for EA1 trials".into()))
    }

    /// EA2 trial as a normalized orbital-pair state on the target grid.
    pub fn ea2_pair(&self, t: &TrialEa2) -> Result<OrbitalPair> {
        let tables = self.tables()?;
        let orbitals = vec![tables.orbitals.clone(); EA2_SECTORS];
        OrbitalPair::new(self.target.grid().clone(), orbitals, t.sector_coefficients())?
            .normalized()
            .map_err(|e| Error::InvalidTrial(e.to_string()))
    }

    fn density_on(&self, trial: &Trial, grid: &Arc<RadialGrid>, stride: usize) -> Result<Vec<f64>> {
        match trial {
            Trial::Ea1(t) => Ok(t.state(&self.rel_grid)?.density(grid.clone())?.into_values()),
            Trial::Ea2(t) => {
                let full = self.ea2_pair(t)?.density()?;
                Ok(RadialGrid::restrict(full.values(), stride, grid.len()))
            }
        }
    }

    /// Density of the normalized trial on the target grid.
    pub fn trial_density(&self, trial: &Trial) -> Result<RadialFunction> {
        let grid = self.target.grid().clone();
        let values = self.density_on(trial, &grid, 1)?;
        RadialFunction::new(grid, values, FunctionKind::Density)
    }

    /// `Q = ⟨T + V_ee⟩` of the normalized trial.
    pub fn q(&self, trial: &Trial) -> Result<f64> {
        match trial {
            Trial::Ea1(t) => {
                let s = t.state(&self.rel_grid)?;
                Ok(s.kinetic_energy() + s.coulomb_energy())
            }
            Trial::Ea2(t) => {
                let (norm, kin, vee) = self.tables()?.energies(&t.sector_coefficients());
                if !(norm > 0.0) {
                    return Err(Error::InvalidTrial("EA2 expansion has zero norm".into()));
                }
                Ok((kin + vee) / norm)
            }
        }
    }

    fn evaluate_fast(&self, trial: &Trial, objective: Objective) -> Result<Evaluation> {
        let dens = self.density_on(trial, &self.eval_grid, self.stride)?;
        let f = raw_mismatch(&self.eval_target, &dens);
        let q = match objective {
            Objective::F => f64::NAN,
            Objective::FPlusQ { .. } => self.q(trial)?,
        };
        Ok(Evaluation { f, q, objective: objective.value(f, if q.is_nan() { 0.0 } else { q }) })
    }

    /// Full-grid `f`, `Q` and objective.
    pub fn evaluate(&self, trial: &Trial, objective: Objective) -> Result<Evaluation> {
        let f = fitness_f(&self.trial_density(trial)?, &self.target)?;
        let q = self.q(trial)?;
        Ok(Evaluation { f, q, objective: objective.value(f, q) })
    }
}

fn raw_mismatch(target: &[f64], trial: &[f64]) -> f64 {
    let num: f64 = target.iter().zip(trial).map(|(a, b)| (a - b).abs()).sum();
    num / target.iter().sum::<f64>()
}

/// `f = Σ|n_target − n_trial| / Σ n_target` over raw grid samples.
pub fn fitness_f(trial: &RadialFunction, target: &RadialFunction) -> Result<f64> {
    if !trial.grid().same_as(target.grid()) {
        return Err(Error::GridMismatch("trial and target densities live on different grids".into()));
    }
    let total: f64 = target.values().iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("target density has zero total weight".into()));
    }
    Ok(raw_mismatch(target.values(), trial.values()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOutcome {
    pub value: f64,
    pub steps_taken: usize,
    pub converged: bool,
}

/// Backtracking gradient descent with a forward-difference gradient.
/// `step` carries the trial step length between calls.
pub fn gradient_descent<F>(params: &mut [f64], objective: F, steps: usize, step: &mut f64) -> DescentOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let mut value = objective(params);
    let mut taken = 0;
    for _ in 0..steps {
        if !value.is_finite() {
            break;
        }
        let grad: Vec<f64> = (0..params.len())
            .map(|i| {
                let h = 1e-6 * params[i].abs().max(1e-3);
                let mut p = params.to_vec();
                p[i] += h;
                (objective(&p) - value) / h
            })
            .collect();
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if !(g2 > 0.0) || !g2.is_finite() {
            return DescentOutcome { value, steps_taken: taken, converged: true };
        }
        let mut alpha = *step;
        loop {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - alpha * g).collect();
            let v = objective(&trial);
            if v.is_finite() && v <= value - 1e-4 * alpha * g2 {
                params.copy_from_slice(&trial);
                value = v;
                taken += 1;
                *step = alpha * 2.0;
                break;
            }
            alpha *= 0.5;
            if alpha * g2.sqrt() < 1e-14 {
                *step = alpha.max(1e-12);
                return DescentOutcome { value, steps_taken: taken, converged: true };
            }
        }
    }
    DescentOutcome { value, steps_taken: taken, converged: false }
}

/// One gradient-descent step on a trial.
pub fn gradient_descent_step(ctx: &SearchContext, trial: &Trial, objective: Objective, step: &mut f64) -> Result<(Trial, DescentOutcome)> {
    let form = trial.form();
    let mut p = trial.params();
    let out = gradient_descent(&mut p, |x| objective_at(ctx, form, x, objective), 1, step);
    Ok((Trial::from_params(form, &p)?, out))
}

fn objective_at(ctx: &SearchContext, form: TrialForm, p: &[f64], objective: Objective) -> f64 {
    Trial::from_params(form, p)
        .and_then(|t| ctx.evaluate_fast(&t, objective))
        .map(|e| e.objective)
        .unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial {
    pub trial: Trial,
    pub f: f64,
    pub q: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    /// Up to ten best trials, sorted by objective.
    pub best: Vec<ScoredTrial>,
    pub accepted: bool,
    pub threshold: f64,
    pub seed: u64,
    /// Best objective after each generation.
    pub history: Vec<f64>,
}

impl SearchResult {
    /// Among the best matches below the threshold, the one with lowest `Q`;
    /// falls back to the best match overall.
    pub fn preferred(&self) -> &ScoredTrial {
        self.best
            .iter()
            .filter(|s| s.f <= self.threshold)
            .min_by(|a, b| a.q.total_cmp(&b.q))
            .unwrap_or(&self.best[0])
    }
}

/// Resumable search state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub form: TrialForm,
    pub seed: u64,
    pub generation: usize,
    pub population: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
    pub hall: Vec<(Vec<f64>, f64)>,
    pub history: Vec<f64>,
}

impl SearchCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_params(form: TrialForm, omega: f64, degree: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match form {
        TrialForm::Ea1 => {
            let mut p = vec![omega * rng.random_range(0.25..1.0), omega * rng.random_range(0.25..1.0), 1.0];
            for i in 1..=degree {
                p.push(rng.random_range(-0.5..0.5) * omega.sqrt().powi(i as i32) / (i * i) as f64);
            }
            p
        }
        TrialForm::Ea2 => {
            let mut p: Vec<f64> = (0..TrialEa2::PARAMS).map(|_| rng.random_range(-0.1..0.1)).collect();
            p[0] = 1.0;
            p
        }
    }
}

fn mutate(params: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    params
        .iter()
        .map(|&p| {
            let sigma = scale * p.abs().max(1e-3);
            p + Normal::new(0.0, sigma).map(|d| d.sample(rng)).unwrap_or(0.0)
        })
        .collect()
}

/// Runs the generational search from scratch. `planted` individuals join
/// the first generation ahead of the random ones.
pub fn evolutionary_search(config: &SearchConfig, ctx: &SearchContext, planted: &[Trial]) -> Result<SearchResult> {
    config.validate()?;
    let mut rng = stream(config.seed, u64::MAX);
    let mut population: Vec<Vec<f64>> = planted.iter().map(|t| t.params()).take(config.population).collect();
    while population.len() < config.population {
        population.push(random_params(ctx.form, ctx.omega, config.poly_degree, &mut rng));
    }
    let checkpoint = SearchCheckpoint {
        form: ctx.form,
        seed: config.seed,
        generation: 0,
        steps: vec![initial_step(ctx.form); population.len()],
        population,
        hall: Vec::new(),
        history: Vec::new(),
    };
    resume_search(config, ctx, checkpoint, |_| Ok(()))
}

fn initial_step(form: TrialForm) -> f64 {
    match form {
        TrialForm::Ea1 => 1e-2,
        TrialForm::Ea2 => 1e-2,
    }
}

/// Continues a search from `state`; `on_generation` sees the state after
/// every completed generation (e.g. to write a checkpoint).
pub fn resume_search(
    config: &SearchConfig,
    ctx: &SearchContext,
    mut state: SearchCheckpoint,
    mut on_generation: impl FnMut(&SearchCheckpoint) -> Result<()>,
) -> Result<SearchResult> {
    config.validate()?;
    if state.form != ctx.form {
        return Err(Error::InvalidInput("checkpoint and context use different trial forms".into()));
    }
    let form = ctx.form;
    loop {
        let g = state.generation;
        let descended: Vec<(Vec<f64>, f64, f64)> = state
            .population
            .par_iter()
            .zip(state.steps.par_iter())
            .map(|(p, &s)| {
                let mut p = p.clone();
                let mut step = s;
                let out = gradient_descent(&mut p, |x| objective_at(ctx, form, x, config.objective), config.descent_steps, &mut step);
                (p, out.value, step)
            })
            .collect();
        let mut ranked: Vec<(Vec<f64>, f64, f64)> = descended.into_iter().filter(|(_, v, _)| v.is_finite()).collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (p, v, _) in &ranked {
            if !state.hall.iter().any(|(q, _)| q == p) {
                state.hall.push((p.clone(), *v));
            }
        }
        state.hall.sort_by(|a, b| a.1.total_cmp(&b.1));
        state.hall.truncate(10);
        state.history.push(state.hall.first().map_or(f64::INFINITY, |h| h.1));
        state.generation += 1;
        if g >= config.generations {
            break;
        }
        let elites: Vec<(Vec<f64>, f64)> = ranked.iter().take(config.elite_keep).map(|(p, _, s)| (p.clone(), *s)).collect();
        let mut next: Vec<Vec<f64>> = elites.iter().map(|e| e.0.clone()).collect();
        let mut steps: Vec<f64> = elites.iter().map(|e| e.1).collect();
        let fresh = config.fresh.min(config.population - next.len());
        let mut k = 0u64;
        while next.len() < config.population - fresh && !elites.is_empty() {
            let mut rng = stream(config.seed, (g as u64) << 32 | k);
            let parent = &elites[(k as usize) % elites.len()];
            next.push(mutate(&parent.0, config.mutation_scale, &mut rng));
            steps.push(parent.1);
            k += 1;
        }
        while next.len() < config.population {
            let mut rng = stream(config.seed, (g as u64) << 32 | k);
            next.push(random_params(form, ctx.omega, config.poly_degree, &mut rng));
            steps.push(initial_step(form));
            k += 1;
        }
        state.population = next;
        state.steps = steps;
        on_generation(&state)?;
    }
    let best = state
        .hall
        .iter()
        .map(|(p, _)| {
            let trial = Trial::from_params(form, p)?;
            let e = ctx.evaluate(&trial, config.objective)?;
            Ok(ScoredTrial { trial, f: e.f, q: e.q, objective: e.objective })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = best;
    best.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    let accepted = best.iter().any(|s| s.f <= config.threshold);
    Ok(SearchResult { best, accepted, threshold: config.threshold, seed: config.seed, history: state.history })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub nodeless: bool,
    /// `Q + ∫ v_ext n` of the trial.
    pub trial_energy: f64,
    /// Same quantity for the Kohn-Sham product state.
    pub product_energy: f64,
}

impl GroundStateReport {
    pub fn passed(&self) -> bool {
        self.nodeless && self.trial_energy <= self.product_energy
    }
}

/// `Q + ∫v_ext n` for the doubly occupied Kohn-Sham orbital: `T_s + J`,
/// with `J = E_H / 2` the orbital's Coulomb self-interaction.
pub fn ks_product_energy(state: &ScfState) -> f64 {
    let grid = state.density.grid();
    let t_s = discrete_kinetic(grid, state.orbital.values());
    let e_h = crate::ks::hartree_energy(&state.density, &state.v_h);
    t_s + 0.5 * e_h + expectation(&state.density, &external_potential(grid, state.omega))
}

/// Node-less check plus energy comparison with the product state.
pub fn ground_state_checks(ctx: &SearchContext, trial: &Trial, product_energy: f64) -> Result<GroundStateReport> {
    let nodeless = match trial {
        Trial::Ea1(t) => {
            let phi = t.relative_function(&ctx.rel_grid)?;
            let peak = phi.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let signs: Vec<f64> = phi.values().iter().zip(ctx.rel_grid.points()).filter(|(v, _)| v.abs() > 1e-10 * peak).map(|(_, r)| t.poly(*r)).collect();
            signs.iter().all(|p| *p > 0.0) || signs.iter().all(|p| *p < 0.0)
        }
        Trial::Ea2(t) => {
            let pair = ctx.ea2_pair(t)?;
            let orb = pair.orbitals(0);
            let stride = 16;
            let idx: Vec<usize> = (0..orb[0].len()).step_by(stride).collect();
            let table = crate::numerics::legendre::legendre_table(EA2_SECTORS - 1, 12)?;
            let mut peak = 0.0f64;
            let mut values = Vec::new();
            for &i in &idx {
                for &j in &idx {
                    for (kx, _) in table.nodes.iter().enumerate() {
                        let mut psi = 0.0;
                        for (k, c) in pair.coefficients().iter().enumerate() {
                            let f: f64 = (0..EA2_RADIAL).flat_map(|a| (0..EA2_RADIAL).map(move |b| (a, b))).map(|(a, b)| c[(a, b)] * orb[a][i] * orb[b][j]).sum();
                            psi += f * table.p[k][kx];
                        }
                        peak = peak.max(psi.abs());
                        values.push(psi);
                    }
                }
            }
            let sig: Vec<f64> = values.into_iter().filter(|v| v.abs() > 1e-8 * peak).collect();
            sig.iter().all(|v| *v > 0.0) || sig.iter().all(|v| *v < 0.0)
        }
    };
    let density = ctx.trial_density(trial)?;
    let v_ext = external_potential(density.grid(), ctx.omega);
    let trial_energy = ctx.q(trial)? + expectation(&density, &v_ext);
    Ok(GroundStateReport { nodeless, trial_energy, product_energy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialEntanglement {
    pub linear: f64,
    pub von_neumann_bits: f64,
}

/// Entanglement of a trial. EA1 goes through sector projection on
/// `pair_grid`; EA2 reads the Schmidt spectrum from its coefficients.
pub fn trial_entanglement(ctx: &SearchContext, trial: &Trial, pair_grid: Arc<RadialGrid>, projection: &ProjectionConfig) -> Result<TrialEntanglement> {
    match trial {
        Trial::Ea1(t) => {
            let (sectors, _) = t.state(&ctx.rel_grid)?.sectors(pair_grid, projection)?;
            let rdm = build_rdm(&sectors.normalized()?)?;
            let (_, s) = von_neumann_entropy(&rdm)?;
            Ok(TrialEntanglement { linear: linear_entropy(&rdm), von_neumann_bits: s })
        }
        Trial::Ea2(t) => {
            let spec = SchmidtSpectrum::from_orbital_pair(&ctx.ea2_pair(t)?);
            Ok(TrialEntanglement { linear: spec.linear_entropy(), von_neumann_bits: spec.von_neumann_bits() })
        }
    }
}
