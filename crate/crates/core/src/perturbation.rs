//! Rayleigh-Schrödinger perturbation theory around a one-body reference:
//! the Kohn-Sham Hamiltonian (exact or LDA exchange-correlation) or the bare
//! oscillator. Excited configurations are built from per-`l` radial orbitals
//! of the frozen ground-state potential; only singlet configurations coupled
//! to zero total angular momentum survive, and the first-order state is
//! assembled directly in Legendre-sector form.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{build_rdm, ReducedDensityMatrix, SchmidtSpectrum};
use crate::error::{Error, Result};
use crate::exact::HookeProblem;
use crate::ks::{radial_states, Inversion, ScfState};
use crate::numerics::grid::{FunctionKind, RadialFunction, RadialGrid};
use crate::numerics::legendre::gaunt;
use crate::two_electron::OrbitalPair;

const FOUR_PI: f64 = 4.0 * PI;
const DEGENERATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZerothOrder {
    ExactVxc,
    LdaVxc,
    BareOscillator,
}

impl ZerothOrder {
    pub fn label(self) -> &'static str {
        match self {
            Self::ExactVxc => "ks-pert-exact",
            Self::LdaVxc => "ks-pert-lda",
            Self::BareOscillator => "standard-pert",
        }
    }
}

/// Ground-state mean field `v_H + v_xc` frozen into the zeroth-order
/// Hamiltonian and subtracted again in the perturbation.
#[derive(Debug, Clone)]
pub struct MeanField {
    pub source: ZerothOrder,
    pub potential: RadialFunction,
}

impl MeanField {
    pub fn bare(grid: Arc<RadialGrid>) -> Result<Self> {
        Ok(Self {
            source: ZerothOrder::BareOscillator,
            potential: RadialFunction::from_fn(grid, FunctionKind::Potential, |_| 0.0)?,
        })
    }

    pub fn from_scf(state: &ScfState) -> Result<Self> {
        Ok(Self { source: ZerothOrder::LdaVxc, potential: sum(&state.v_h, &state.v_xc)? })
    }

    pub fn from_inversion(inv: &Inversion) -> Result<Self> {
        Ok(Self { source: ZerothOrder::ExactVxc, potential: sum(&inv.v_h, &inv.v_xc)? })
    }
}

fn sum(a: &RadialFunction, b: &RadialFunction) -> Result<RadialFunction> {
    let v = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
    RadialFunction::new(a.grid().clone(), v, FunctionKind::Potential)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub l_max: usize,
    /// Radial states `n = 0..=n_max` per `l`.
    pub n_max: usize,
    /// Share of the first-order weight in the last sector above which a
    /// truncation warning is attached.
    pub tail_share: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { l_max: 6, n_max: 20, tail_share: 1e-2 }
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub energy: f64,
    /// Reduced orbital `u = r R`, `∫u² dr = 1`.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct KsSpectrum {
    pub source: ZerothOrder,
    pub omega: f64,
    grid: Arc<RadialGrid>,
    mean_field: Vec<f64>,
    /// `levels[l][n]`.
    levels: Vec<Vec<Level>>,
}

impl KsSpectrum {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n_max(&self) -> usize {
        self.levels[0].len() - 1
    }

    pub fn level(&self, n: usize, l: usize) -> &Level {
        &self.levels[l][n]
    }

    pub fn energy(&self, n: usize, l: usize) -> f64 {
        self.levels[l][n].energy
    }

    pub fn mean_field(&self) -> &[f64] {
        &self.mean_field
    }

    /// Full radial function `R_nl = u/r`.
    pub fn radial(&self, n: usize, l: usize) -> Vec<f64> {
        self.levels[l][n].u.iter().zip(self.grid.points()).map(|(u, r)| u / r).collect()
    }

    /// Largest `|∫R_a R_b r² dr − δ_ab|` within any `l`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for sector in &self.levels {
            for (a, la) in sector.iter().enumerate() {
                for lb in &sector[..=a] {
                    let prod: Vec<f64> = la.u.iter().zip(&lb.u).map(|(x, y)| x * y).collect();
                    let target = if std::ptr::eq(la, lb) { 1.0 } else { 0.0 };
                    worst = worst.max((self.grid.integrate(&prod) - target).abs());
                }
            }
        }
        worst
    }

    /// Smallest gap between distinct `(n, l)` levels that share a shell
    /// index `2n + l`; oscillator degeneracies give zero.
    pub fn smallest_shell_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for l1 in 0..self.levels.len() {
            for n1 in 0..self.levels[l1].len() {
                for l2 in (l1 + 1)..self.levels.len() {
                    if (2 * n1 + l1 < l2) || (2 * n1 + l1 - l2) % 2 != 0 {
                        continue;
                    }
                    let n2 = (2 * n1 + l1 - l2) / 2;
                    if n2 < self.levels[l2].len() {
                        let gap = (self.energy(n1, l1) - self.energy(n2, l2)).abs();
                        best = Some(best.map_or(gap, |b| b.min(gap)));
                    }
                }
            }
        }
        best
    }
}

/// Per-`l` radial spectra of `−½u″ + [½ω²r² + v + l(l+1)/2r²]u = εu`.
/// For the bare oscillator the eigenvalues are Richardson-extrapolated from
/// the grid and its every-other-node subgrid; the Kohn-Sham sources keep the
/// fine-grid values so `ε_00` matches the potential's own ground state.
pub fn ks_spectrum(problem: &HookeProblem, field: &MeanField, l_max: usize, n_max: usize) -> Result<KsSpectrum> {
    let grid = field.potential.grid().clone();
    let omega = problem.omega;
    let v: Vec<f64> = grid
        .points()
        .iter()
        .zip(field.potential.values())
        .map(|(r, m)| 0.5 * omega * omega * r * r + m)
        .collect();
    let coarse = Arc::new(grid.subsample(2, grid.len() / 2)?);
    let v_coarse = RadialGrid::restrict(&v, 2, coarse.len());
    let richardson = field.source == ZerothOrder::BareOscillator;
    let levels = (0..=l_max)
        .into_par_iter()
        .map(|l| -> Result<Vec<Level>> {
            let fine = radial_states(&grid, &v, l, n_max + 1)?;
            let coarse_values = if richardson {
                radial_states(&coarse, &v_coarse, l, n_max + 1)?.into_iter().map(|(e, _)| e).collect()
            } else {
                vec![0.0; n_max + 1]
            };
            Ok(fine
                .into_iter()
                .zip(coarse_values)
                .map(|((e, u), ec)| Level { energy: if richardson { (4.0 * e - ec) / 3.0 } else { e }, u })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KsSpectrum { source: field.source, omega, grid, mean_field: field.potential.values().to_vec(), levels })
}

/// Radial Coulomb integrals against the doubly occupied ground orbital,
/// `I_l(n1, n2) = ∫∫ u_00 u_{n1 l}(r1) r_<^l/r_>^{l+1} u_00 u_{n2 l}(r2)`.
#[derive(Debug, Clone)]
pub struct CoulombTable {
    /// `integrals[l]` is symmetric in `(n1, n2)`.
    pub integrals: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombMultipole {
    pub l: usize,
    pub n1: usize,
    pub n2: usize,
    /// Product-state integral, present when `n1 == n2`.
    pub a: Option<f64>,
    /// Symmetrized pair integral; equals `2A` on the diagonal.
    pub b: f64,
}

impl CoulombTable {
    pub fn entry(&self, l: usize, n1: usize, n2: usize) -> CoulombMultipole {
        let i = self.integrals[l][(n1, n2)];
        CoulombMultipole { l, n1, n2, a: (n1 == n2).then_some(i), b: 2.0 * i }
    }
}

fn pair_density(spectrum: &KsSpectrum, n: usize, l: usize) -> Vec<f64> {
    let u0 = &spectrum.level(0, 0).u;
    u0.iter().zip(&spectrum.level(n, l).u).map(|(a, b)| a * b).collect()
}

/// Two-orbital Coulomb integral `∫∫ g_a(r1) r_<^k/r_>^{k+1} g_b(r2)` in
/// linear time through the multipole potential of `g_b`.
/// Both orders are averaged so the result is exactly symmetric in `a, b`.
pub fn radial_coulomb(grid: &RadialGrid, g_a: &[f64], g_b: &[f64], k: usize) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        let pot = grid.multipole_potential(y, k);
        grid.integrate(&x.iter().zip(&pot).map(|(p, q)| p * q).collect::<Vec<_>>())
    };
    0.5 * (one_way(g_a, g_b) + one_way(g_b, g_a))
}

pub fn coulomb_radial_integrals(spectrum: &KsSpectrum) -> CoulombTable {
    let grid = spectrum.grid.clone();
    let nn = spectrum.n_max() + 1;
    let integrals = (0..=spectrum.l_max())
        .into_par_iter()
        .map(|l| {
            let g: Vec<Vec<f64>> = (0..nn).map(|n| pair_density(spectrum, n, l)).collect();
            let pots: Vec<Vec<f64>> = g.iter().map(|g| grid.multipole_potential(g, l)).collect();
            let mut m = DMatrix::zeros(nn, nn);
            for a in 0..nn {
                for b in 0..=a {
                    let ab = grid.integrate(&g[a].iter().zip(&pots[b]).map(|(x, y)| x * y).collect::<Vec<_>>());
                    let ba = grid.integrate(&g[b].iter().zip(&pots[a]).map(|(x, y)| x * y).collect::<Vec<_>>());
                    m[(a, b)] = 0.5 * (ab + ba);
                    m[(b, a)] = m[(a, b)];
                }
            }
            m
        })
        .collect();
    CoulombTable { integrals }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigurationKind {
    /// `φ_nlm(r1) φ_nl−m(r2)` summed over `m`.
    Product,
    /// `[φ_n1lm(r1) φ_n2l−m(r2) + (1↔2)]/√2` summed over `m`, `n1 < n2`.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub kind: ConfigurationKind,
    pub l: usize,
    pub n1: usize,
    pub n2: usize,
    /// `E_0 − E_k`.
    pub denominator: f64,
    /// Sector coefficient added to `C^l_{n1 n2}` (and its transpose).
    pub coefficient: f64,
    /// `Σ_m |⟨Ψ_k|H'|Ψ_0⟩|²`.
    pub coupling_sq: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationExpansion {
    pub source: ZerothOrder,
    pub omega: f64,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub contributions: Vec<Contribution>,
    /// Zeroth plus first order, unnormalized.
    pub pair: OrbitalPair,
    /// `‖Ψ^(0) + Ψ^(1)‖²`.
    pub norm_sq: f64,
    /// First-order weight share carried by the last `l` sector.
    pub tail_share: f64,
    pub truncation_warning: Option<String>,
}

impl PerturbationExpansion {
    pub fn first_order_energy(&self) -> f64 {
        self.e0 + self.e1
    }

    pub fn second_order_energy(&self) -> f64 {
        self.e0 + self.e1 + self.e2
    }
}

fn check_denominator(d: f64, label: impl FnOnce() -> String) -> Result<()> {
    if d.abs() < DEGENERATE {
        return Err(Error::DegenerateDenominator { denominator: d, label: label() });
    }
    Ok(())
}

/// `⟨φ_00| v |φ_n0⟩` with `v = v_H + v_xc`.
fn mean_field_element(spectrum: &KsSpectrum, n: usize) -> f64 {
    let u0 = &spectrum.level(0, 0).u;
    let un = &spectrum.level(n, 0).u;
    let g: Vec<f64> = (0..u0.len()).map(|i| u0[i] * spectrum.mean_field[i] * un[i]).collect();
    spectrum.grid.integrate(&g)
}

/// First-order state and energies through second order.
pub fn first_order_expansion(spectrum: &KsSpectrum, problem: &HookeProblem, config: &PerturbationConfig) -> Result<PerturbationExpansion> {
    if spectrum.l_max() < config.l_max || spectrum.n_max() < config.n_max {
        return Err(Error::InvalidInput(format!(
            "spectrum covers l ≤ {}, n ≤ {} but l ≤ {}, n ≤ {} requested",
            spectrum.l_max(),
            spectrum.n_max(),
            config.l_max,
            config.n_max
        )));
    }
    let lam = problem.coulomb;
    let table = coulomb_radial_integrals(spectrum);
    let nn = config.n_max + 1;
    let e0 = 2.0 * spectrum.energy(0, 0);
    let v00 = mean_field_element(spectrum, 0);
    let j = table.integrals[0][(0, 0)];
    let e1 = -2.0 * v00 + lam * j;

    let mut coefficients: Vec<DMatrix<f64>> = (0..=config.l_max).map(|_| DMatrix::zeros(nn, nn)).collect();
    coefficients[0][(0, 0)] = 1.0 / FOUR_PI;
    let mut contributions = Vec::new();
    let mut e2 = 0.0;
    for l in 0..=config.l_max {
        let deg = (2 * l + 1) as f64;
        for n1 in 0..nn {
            for n2 in n1..nn {
                if l == 0 && n2 == 0 {
                    continue;
                }
                let ek = spectrum.energy(n1, l) + spectrum.energy(n2, l);
                let denom = e0 - ek;
                check_denominator(denom, || format!("l={l} n1={n1} n2={n2}"))?;
                let integral = lam * table.integrals[l][(n1, n2)];
                let (kind, coefficient, coupling_sq) = if n1 == n2 {
                    let a = integral;
                    (ConfigurationKind::Product, a / (FOUR_PI * denom), a * a / deg)
                } else {
                    let b = 2.0 * integral;
                    if l == 0 && n1 == 0 {
                        let v = mean_field_element(spectrum, n2);
                        let m = b / 2f64.sqrt() - 2f64.sqrt() * v;
                        (ConfigurationKind::Pair, (b - 2.0 * v) / (8.0 * PI * denom), m * m)
                    } else {
                        (ConfigurationKind::Pair, b / (8.0 * PI * denom), b * b / (2.0 * deg))
                    }
                };
                coefficients[l][(n1, n2)] += coefficient;
                if n1 != n2 {
                    coefficients[l][(n2, n1)] += coefficient;
                }
                e2 += coupling_sq / denom;
                contributions.push(Contribution { kind, l, n1, n2, denominator: denom, coefficient, coupling_sq });
            }
        }
    }

    let first_weight: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .map(|(l, c)| {
            let mut c = c.clone();
            if l == 0 {
                c[(0, 0)] = 0.0;
            }
            FOUR_PI * FOUR_PI / (2 * l + 1) as f64 * c.norm_squared()
        })
        .collect();
    let total_first: f64 = first_weight.iter().sum();
    let tail_share = if total_first > 0.0 { first_weight[config.l_max] / total_first } else { 0.0 };
    let truncation_warning = (tail_share > config.tail_share).then(|| {
        format!("sector l={} carries {:.3e} of the first-order weight", config.l_max, tail_share)
    });

    let orbitals: Vec<Vec<Vec<f64>>> = (0..=config.l_max).map(|l| (0..nn).map(|n| spectrum.radial(n, l)).collect()).collect();
    let pair = OrbitalPair::new(spectrum.grid.clone(), orbitals, coefficients)?;
    let norm_sq = pair.norm();
    Ok(PerturbationExpansion {
        source: spectrum.source,
        omega: spectrum.omega,
        e0,
        e1,
        e2,
        contributions,
        pair,
        norm_sq,
        tail_share,
        truncation_warning,
    })
}

/// Density and reduced density matrix of the renormalized first-order
/// state; the matrix lives on `pair_grid`, whose node `k` must be node
/// `k·stride` of the orbital grid.
pub fn perturbed_density_and_rdm(
    expansion: &PerturbationExpansion,
    pair_grid: Arc<RadialGrid>,
    stride: usize,
) -> Result<(RadialFunction, ReducedDensityMatrix)> {
    let pair = expansion.pair.normalized()?;
    let density = pair.density()?;
    let sectors = pair.to_sectors(pair_grid, stride)?;
    // the truncated pair grid may clip a sliver of the tail
    let rdm = build_rdm(&sectors.normalized()?)?;
    Ok((density, rdm))
}

/// Schmidt spectrum of the renormalized first-order state, straight from
/// the orbital coefficients.
pub fn perturbed_schmidt_spectrum(expansion: &PerturbationExpansion) -> Result<SchmidtSpectrum> {
    Ok(SchmidtSpectrum::from_orbital_pair(&expansion.pair.normalized()?))
}

/// `100 (E_appx − E) / E`.
pub fn energy_percent_error(e_appx: f64, e_exact: f64) -> Result<f64> {
    if e_exact == 0.0 || !e_exact.is_finite() || !e_appx.is_finite() {
        return Err(Error::InvalidInput(format!("cannot form a relative error against E = {e_exact}")));
    }
    Ok(100.0 * (e_appx - e_exact) / e_exact)
}

/// Single-electron state `φ_nlm = R_nl Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orbital {
    pub n: usize,
    pub l: usize,
    pub m: i64,
}

impl Orbital {
    pub fn new(n: usize, l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::InvalidInput(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { n, l, m })
    }

    fn is_ground(self) -> bool {
        self.n == 0 && self.l == 0 && self.m == 0
    }
}

/// Two-electron spatial configuration built from a pair of orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Configuration {
    /// `φ_a(r1) φ_b(r2)`.
    Product(Orbital, Orbital),
    /// `[φ_a(r1) φ_b(r2) + φ_b(r1) φ_a(r2)]/√2`.
    Singlet(Orbital, Orbital),
    /// `[φ_a(r1) φ_b(r2) − φ_b(r1) φ_a(r2)]/√2`.
    Triplet(Orbital, Orbital),
}

/// `⟨φ_000 φ_000 | H' | φ_a(r1) φ_b(r2)⟩` from the multipole expansion of
/// `1/r12` with Gaunt coefficients for every `(k, q)`, plus the one-body
/// mean-field term. Orbital orthonormality enters through the labels.
pub fn product_matrix_element(spectrum: &KsSpectrum, problem: &HookeProblem, a: Orbital, b: Orbital) -> Result<f64> {
    for o in [a, b] {
        if o.l > spectrum.l_max() || o.n > spectrum.n_max() {
            return Err(Error::InvalidInput(format!("orbital {o:?} lies outside the spectrum")));
        }
    }
    let grid = &spectrum.grid;
    let mut coulomb = 0.0;
    for k in 0..=(a.l + b.l) {
        let mut angular = 0.0;
        for q in -(k as i64)..=(k as i64) {
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            // ∫ Y00* Y_kq* Y_a dΩ1 and ∫ Y00* Y_kq Y_b dΩ2
            let ang1 = sign * gaunt(0, 0, k as i64, -q, a.l as i64, a.m);
            let ang2 = gaunt(0, 0, k as i64, q, b.l as i64, b.m);
            angular += ang1 * ang2;
        }
        if angular != 0.0 {
            let ga = pair_density(spectrum, a.n, a.l);
            let gb = pair_density(spectrum, b.n, b.l);
            coulomb += FOUR_PI / (2 * k + 1) as f64 * angular * radial_coulomb(grid, &ga, &gb, k);
        }
    }
    let y00 = 1.0 / FOUR_PI.sqrt();
    // ∫ Y00* Y_lm dΩ through the same coupling table
    let overlap = |o: Orbital| gaunt(0, 0, 0, 0, o.l as i64, o.m) / (y00 * y00) * y00;
    let one_body = |x: Orbital, y: Orbital| {
        if !y.is_ground() {
            return 0.0;
        }
        let ang = overlap(x);
        if ang == 0.0 {
            0.0
        } else {
            ang * mean_field_element(spectrum, x.n)
        }
    };
    let v = one_body(a, b) + one_body(b, a);
    Ok(problem.coulomb * coulomb - v)
}

pub fn matrix_element(spectrum: &KsSpectrum, problem: &HookeProblem, config: Configuration) -> Result<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match config {
        Configuration::Product(a, b) => product_matrix_element(spectrum, problem, a, b),
        Configuration::Singlet(a, b) => {
            Ok(s * (product_matrix_element(spectrum, problem, a, b)? + product_matrix_element(spectrum, problem, b, a)?))
        }
        Configuration::Triplet(a, b) => {
            Ok(s * (product_matrix_element(spectrum, problem, a, b)? - product_matrix_element(spectrum, problem, b, a)?))
        }
    }
}

/// Whether the closed-form case analysis predicts a nonzero element.
pub fn selection_rule_allows(config: Configuration) -> bool {
    match config {
        Configuration::Triplet(..) => false,
        Configuration::Product(a, b) | Configuration::Singlet(a, b) => {
            if a.is_ground() && b.is_ground() {
                return true;
            }
            a.l == b.l && a.m == -b.m
        }
    }
}
