//! Singlet two-electron spatial wavefunctions in two interchangeable forms.
//!
//! [`SectorWavefunction`] stores `ψ(r1, r2, θ12) = Σ_l F_l(r1, r2) P_l(cos θ12)`
//! on a radial grid. [`OrbitalPair`] stores the same object in a low-rank
//! orbital basis, `F_l = Σ_ab C^l_ab R_a(r1) R_b(r2)`, with orbitals normalized
//! as `∫ R_a R_b r² dr = δ_ab` within each `l`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::grid::{second_derivative, FunctionKind, RadialFunction, RadialGrid};
use crate::numerics::legendre::{legendre_table, wigner_3j};

const FOUR_PI: f64 = 4.0 * PI;

/// Angular truncation and quadrature used when projecting onto sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Minimum number of sectors kept.
    pub l_max: usize,
    /// Hard cap when extending the expansion.
    pub l_cap: usize,
    /// Gauss-Legendre nodes in `cos θ12`.
    pub nodes: usize,
    /// The expansion is extended until the last kept sector's norm share
    /// falls below this value.
    pub share_tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { l_max: 8, l_cap: 40, nodes: 128, share_tol: 1e-8 }
    }
}

/// What was dropped when the angular expansion was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub l_max: usize,
    /// Norm share of the last kept sector.
    pub last_share: f64,
    /// Norm share carried by the projected but discarded sectors.
    pub dropped_share: f64,
}

#[derive(Debug, Clone)]
pub struct SectorWavefunction {
    grid: Arc<RadialGrid>,
    sectors: Vec<DMatrix<f64>>,
}

impl SectorWavefunction {
    pub fn new(grid: Arc<RadialGrid>, sectors: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = grid.len();
        if sectors.is_empty() {
            return Err(Error::InvalidInput("at least one sector required".into()));
        }
        let mut out = Vec::with_capacity(sectors.len());
        for (l, f) in sectors.into_iter().enumerate() {
            if f.nrows() != n || f.ncols() != n {
                return Err(Error::GridMismatch(format!("sector {l} is {}x{}, grid has {n} points", f.nrows(), f.ncols())));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite entry in sector {l}")));
            }
            let asym = (&f - f.transpose()).amax();
            if asym > 1e-10 * f.amax().max(1e-300) {
                return Err(Error::InvalidInput(format!("sector {l} is not exchange symmetric (defect {asym:e})")));
            }
            out.push((&f + f.transpose()) * 0.5);
        }
        Ok(Self { grid, sectors: out })
    }

    /// Projects `psi(r1, r2, cos θ12)` onto Legendre sectors. `psi` must be
    /// symmetric under `r1 ↔ r2`; only the upper triangle is evaluated.
    pub fn project<F>(grid: Arc<RadialGrid>, config: &ProjectionConfig, psi: F) -> Result<(Self, TruncationReport)>
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        let l_cap = config.l_cap.max(config.l_max);
        let table = legendre_table(l_cap, config.nodes.max(l_cap + 1))?;
        let n = grid.len();
        let r = grid.points();
        let rows: Vec<Vec<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![vec![0.0; n]; l_cap + 1];
                let mut samples = vec![0.0; table.nodes.len()];
                for j in i..n {
                    for (k, &x) in table.nodes.iter().enumerate() {
                        samples[k] = psi(r[i], r[j], x) * table.weights[k];
                    }
                    for (l, sector_row) in row.iter_mut().enumerate() {
                        let s: f64 = samples.iter().zip(&table.p[l]).map(|(a, b)| a * b).sum();
                        sector_row[j] = 0.5 * (2 * l + 1) as f64 * s;
                    }
                }
                row
            })
            .collect();
        let mut sectors = vec![DMatrix::zeros(n, n); l_cap + 1];
        for (i, row) in rows.into_iter().enumerate() {
            for (l, values) in row.into_iter().enumerate() {
                for j in i..n {
                    sectors[l][(i, j)] = values[j];
                    sectors[l][(j, i)] = values[j];
                }
            }
        }
        let full = Self { grid, sectors };
        let shares = full.sector_shares();
        let mut keep = config.l_max.min(l_cap);
        while keep < l_cap && shares[keep] >= config.share_tol {
            keep += 1;
        }
        let dropped_share = shares[keep + 1..].iter().sum();
        let last_share = shares[keep];
        let mut sectors = full.sectors;
        sectors.truncate(keep + 1);
        Ok((Self { grid: full.grid, sectors }, TruncationReport { l_max: keep, last_share, dropped_share }))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn sector(&self, l: usize) -> &DMatrix<f64> {
        &self.sectors[l]
    }

    pub fn sectors(&self) -> &[DMatrix<f64>] {
        &self.sectors
    }

    /// `Σ_w F(i,j) G(i,j) r_i² r_j²` with quadrature weights.
    fn weighted_dot(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let mu = self.measure();
        let n = self.grid.len();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += mu[i] * mu[j] * a[(i, j)] * b[(i, j)];
            }
        }
        s
    }

    /// Quadrature weight times `r²` at each node.
    fn measure(&self) -> Vec<f64> {
        self.grid.weights().iter().zip(self.grid.points()).map(|(w, r)| w * r * r).collect()
    }

    /// Per-sector contributions `(4π)²/(2l+1) ∫∫ F_l² r1² r2²` to the norm.
    pub fn sector_norms(&self) -> Vec<f64> {
        self.sectors
            .iter()
            .enumerate()
            .map(|(l, f)| FOUR_PI * FOUR_PI / (2 * l + 1) as f64 * self.weighted_dot(f, f))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.sector_norms().iter().sum()
    }

    pub fn sector_shares(&self) -> Vec<f64> {
        let norms = self.sector_norms();
        let total: f64 = norms.iter().sum();
        norms.iter().map(|x| x / total).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid.clone(), sectors: self.sectors.iter().map(|f| f * factor).collect() }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(format!("cannot normalize a state with norm {norm}")));
        }
        Ok(self.scaled(1.0 / norm.sqrt()))
    }

    /// Electron density `n(r) = 2 Σ_l 4π/(2l+1) ∫ F_l(r, r')² r'² dr'`.
    pub fn density(&self) -> Result<RadialFunction> {
        let n = self.grid.len();
        let mu = self.measure();
        let mut dens = vec![0.0; n];
        for (l, f) in self.sectors.iter().enumerate() {
            let c = 2.0 * FOUR_PI / (2 * l + 1) as f64;
            for (i, d) in dens.iter_mut().enumerate() {
                let s: f64 = (0..n).map(|j| f[(i, j)] * f[(i, j)] * mu[j]).sum();
                *d += c * s;
            }
        }
        RadialFunction::new(self.grid.clone(), dens, FunctionKind::Density)
    }

    /// Kinetic energy from a fourth-order finite-difference Laplacian in each
    /// sector, centrifugal term included.
    pub fn kinetic_energy(&self) -> f64 {
        let grid = &self.grid;
        let n = grid.len();
        let h = grid.spacing();
        let r = grid.points();
        let w = grid.weights();
        let mut total = 0.0;
        for (l, f) in self.sectors.iter().enumerate() {
            let odd = l % 2 == 0;
            let cent = (l * (l + 1)) as f64 / 2.0;
            let mut sector = 0.0;
            for j in 0..n {
                let g: Vec<f64> = (0..n).map(|i| r[i] * r[j] * f[(i, j)]).collect();
                let d2 = second_derivative(&g, h, 0.0, odd);
                let s: f64 = (0..n).map(|i| w[i] * g[i] * (-0.5 * d2[i] + cent / (r[i] * r[i]) * g[i])).sum();
                sector += w[j] * s;
            }
            total += FOUR_PI * FOUR_PI / (2 * l + 1) as f64 * sector;
        }
        2.0 * total
    }

    /// `⟨1/r12⟩` through the multipole expansion of the Coulomb kernel.
    pub fn coulomb_energy(&self) -> f64 {
        let grid = &self.grid;
        let n = grid.len();
        let mu = self.measure();
        let r2: Vec<f64> = grid.points().iter().map(|r| r * r).collect();
        let l_max = self.l_max();
        let mut terms = Vec::new();
        for l in 0..=l_max {
            for lp in l..=l_max {
                for k in (lp - l..=l + lp).step_by(2) {
                    let c = wigner_3j(l as i64, lp as i64, k as i64, 0, 0, 0).powi(2);
                    if c > 0.0 {
                        terms.push((l, lp, k, if l == lp { c } else { 2.0 * c }));
                    }
                }
            }
        }
        let total: f64 = terms
            .par_iter()
            .map(|&(l, lp, k, c)| {
                let (a, b) = (&self.sectors[l], &self.sectors[lp]);
                let mut s = 0.0;
                for i in 0..n {
                    let g: Vec<f64> = (0..n).map(|j| a[(i, j)] * b[(i, j)] * r2[j]).collect();
                    s += mu[i] * grid.multipole_at(&g, i, k);
                }
                c * s
            })
            .sum();
        FOUR_PI * FOUR_PI * total
    }

    /// `⟨½ω²(r1² + r2²)⟩`.
    pub fn external_energy(&self, omega: f64) -> Result<f64> {
        let n = self.density()?;
        let v: Vec<f64> = n.values().iter().zip(self.grid.points()).map(|(d, r)| d * r.powi(4)).collect();
        Ok(0.5 * omega * omega * FOUR_PI * self.grid.integrate(&v))
    }

    /// `Q = ⟨T + V_ee⟩` for the normalized state.
    pub fn t_plus_vee(&self) -> f64 {
        (self.kinetic_energy() + self.coulomb_energy()) / self.norm()
    }
}

/// Low-rank form `F_l = R_l C_l R_lᵀ` with orthonormal radial orbitals.
#[derive(Debug, Clone)]
pub struct OrbitalPair {
    grid: Arc<RadialGrid>,
    /// `orbitals[l][a]` sampled on `grid`.
    orbitals: Vec<Vec<Vec<f64>>>,
    coefficients: Vec<DMatrix<f64>>,
}

impl OrbitalPair {
    pub fn new(grid: Arc<RadialGrid>, orbitals: Vec<Vec<Vec<f64>>>, coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        if orbitals.len() != coefficients.len() || orbitals.is_empty() {
            return Err(Error::InvalidInput("orbital and coefficient sector counts differ".into()));
        }
        for (l, (orb, c)) in orbitals.iter().zip(&coefficients).enumerate() {
            if c.nrows() != orb.len() || c.ncols() != orb.len() {
                return Err(Error::InvalidInput(format!("sector {l}: {} orbitals but {}x{} coefficients", orb.len(), c.nrows(), c.ncols())));
            }
            if orb.iter().any(|v| v.len() != grid.len()) {
                return Err(Error::GridMismatch(format!("sector {l} orbital length differs from grid")));
            }
            if (c - c.transpose()).amax() > 1e-12 * c.amax().max(1e-300) {
                return Err(Error::InvalidInput(format!("sector {l} coefficients are not symmetric")));
            }
        }
        Ok(Self { grid, orbitals, coefficients })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    pub fn orbitals(&self, l: usize) -> &[Vec<f64>] {
        &self.orbitals[l]
    }

    pub fn sector_norms(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(l, c)| FOUR_PI * FOUR_PI / (2 * l + 1) as f64 * c.norm_squared())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.sector_norms().iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(format!("cannot normalize a state with norm {norm}")));
        }
        let s = 1.0 / norm.sqrt();
        Ok(Self { coefficients: self.coefficients.iter().map(|c| c * s).collect(), ..self.clone() })
    }

    /// `n(r) = 2 Σ_l 4π/(2l+1) Σ_ac (C_l²)_ac R_a(r) R_c(r)`.
    pub fn density(&self) -> Result<RadialFunction> {
        let n = self.grid.len();
        let mut dens = vec![0.0; n];
        for (l, c) in self.coefficients.iter().enumerate() {
            let c2 = c * c;
            let pref = 2.0 * FOUR_PI / (2 * l + 1) as f64;
            let orb = &self.orbitals[l];
            for a in 0..orb.len() {
                for b in 0..orb.len() {
                    let k = pref * c2[(a, b)];
                    if k == 0.0 {
                        continue;
                    }
                    for (i, d) in dens.iter_mut().enumerate() {
                        *d += k * orb[a][i] * orb[b][i];
                    }
                }
            }
        }
        // roundoff can leave tiny negatives far in the tail
        dens.iter_mut().for_each(|d| *d = d.max(0.0));
        RadialFunction::new(self.grid.clone(), dens, FunctionKind::Density)
    }

    /// Sector form on `target`, whose nodes must coincide with every
    /// `stride`-th node of the orbital grid.
    pub fn to_sectors(&self, target: Arc<RadialGrid>, stride: usize) -> Result<SectorWavefunction> {
        let m = target.len();
        if m * stride > self.grid.len() || (target.spacing() - stride as f64 * self.grid.spacing()).abs() > 1e-12 * target.spacing() {
            return Err(Error::GridMismatch("target grid is not a subsample of the orbital grid".into()));
        }
        let sectors = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let orb = &self.orbitals[l];
                let r = DMatrix::from_fn(m, orb.len(), |i, a| orb[a][(i + 1) * stride - 1]);
                &r * c * r.transpose()
            })
            .collect();
        SectorWavefunction::new(target, sectors)
    }

    /// Schmidt weights per sector: eigenvalues of `(4π/(2l+1)) C_l`, squared.
    pub fn schmidt_amplitudes(&self) -> Vec<Vec<f64>> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let g = c * (FOUR_PI / (2 * l + 1) as f64);
                g.symmetric_eigenvalues().iter().copied().collect()
            })
            .collect()
    }
}
