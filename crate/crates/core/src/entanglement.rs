//! Reduced density matrices and entanglement measures.
//!
//! For a sector wavefunction the one-electron reduced density matrix splits
//! into kernels `ρ_l(r, r')`, each carrying a `(2l+1)`-fold degenerate
//! spectrum. Natural-orbital occupations solve
//! `4π ∫ ρ_l(r, r') χ(r') r'² dr' = λ χ(r)`.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::basis::OrthonormalBasis;
use crate::numerics::grid::{RadialFunction, RadialGrid};
use crate::two_electron::{OrbitalPair, SectorWavefunction};

const FOUR_PI: f64 = 4.0 * PI;
/// Eigenvalues in `[-CLIP, 0)` are treated as zero.
const CLIP: f64 = 1e-9;
/// Eigenvalues below `-REJECT` indicate a broken kernel.
const REJECT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    grid: Arc<RadialGrid>,
    /// `ρ_l(r_i, r_j)`.
    sectors: Vec<DMatrix<f64>>,
}

impl ReducedDensityMatrix {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn sectors(&self) -> &[DMatrix<f64>] {
        &self.sectors
    }

    pub fn degeneracy(l: usize) -> usize {
        2 * l + 1
    }

    fn sqrt_measure(&self) -> Vec<f64> {
        self.grid.weights().iter().zip(self.grid.points()).map(|(w, r)| w.sqrt() * r).collect()
    }

    /// Symmetric discretization `4π S ρ_l S`, `S = diag(√w_i r_i)`, whose
    /// eigenvalues are the natural occupations of sector `l`.
    pub fn symmetric_kernel(&self, l: usize) -> DMatrix<f64> {
        let s = self.sqrt_measure();
        let rho = &self.sectors[l];
        DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| FOUR_PI * s[i] * rho[(i, j)] * s[j])
    }

    /// `Σ_l (2l+1) 4π ∫ ρ_l(r, r) r² dr`.
    pub fn trace(&self) -> f64 {
        (0..self.sectors.len()).map(|l| Self::degeneracy(l) as f64 * self.symmetric_kernel(l).trace()).sum()
    }

    /// Per-sector contribution to `Tr ρ²`.
    pub fn purity_by_sector(&self) -> Vec<f64> {
        (0..self.sectors.len())
            .map(|l| Self::degeneracy(l) as f64 * self.symmetric_kernel(l).norm_squared())
            .collect()
    }
}

/// `ρ_l(r, r') = 4π/(2l+1)² ∫ F_l(r, r3) F_l(r', r3) r3² dr3`.
pub fn build_rdm(psi: &SectorWavefunction) -> Result<ReducedDensityMatrix> {
    let grid = psi.grid().clone();
    let measure: Vec<f64> = grid.weights().iter().zip(grid.points()).map(|(w, r)| w * r * r).collect();
    let sectors: Vec<DMatrix<f64>> = psi
        .sectors()
        .iter()
        .enumerate()
        .map(|(l, f)| {
            let fw = DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] * measure[j]);
            let mut rho = &fw * f.transpose() * (FOUR_PI / ((2 * l + 1) as f64).powi(2));
            rho = (&rho + rho.transpose()) * 0.5;
            rho
        })
        .collect();
    let rdm = ReducedDensityMatrix { grid, sectors };
    let trace = rdm.trace();
    if (trace - 1.0).abs() > 1e-4 {
        return Err(Error::Normalization { trace });
    }
    Ok(rdm)
}

/// `L = 1 − Σ_l (2l+1) Tr ρ_l²` by kernel self-contraction.
pub fn linear_entropy(rdm: &ReducedDensityMatrix) -> f64 {
    1.0 - rdm.purity_by_sector().iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumSource {
    SectorDiagonalization,
    BasisProjection,
    OrbitalCoefficients,
}

/// Natural-orbital occupations, each tagged with its angular momentum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    /// `(l, λ)` sorted by descending `λ`; each entry counts `2l+1` times.
    pub eigenvalues: Vec<(usize, f64)>,
    pub provenance: SpectrumSource,
}

impl SchmidtSpectrum {
    fn from_raw(raw: Vec<(usize, f64)>, provenance: SpectrumSource) -> Result<Self> {
        let mut eigenvalues = Vec::with_capacity(raw.len());
        for (l, v) in raw {
            if v < -REJECT {
                return Err(Error::NonPhysicalKernel { eigenvalue: v });
            }
            let v = if v < 0.0 && v >= -CLIP { 0.0 } else { v };
            eigenvalues.push((l, v));
        }
        eigenvalues.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(Self { eigenvalues, provenance })
    }

    /// Occupations from amplitudes `s` with `λ = s²`.
    fn from_amplitudes(amps: Vec<(usize, f64)>, provenance: SpectrumSource) -> Self {
        let mut eigenvalues: Vec<(usize, f64)> = amps.into_iter().map(|(l, s)| (l, s * s)).collect();
        eigenvalues.sort_by(|a, b| b.1.total_cmp(&a.1));
        Self { eigenvalues, provenance }
    }

    pub fn from_orbital_pair(pair: &OrbitalPair) -> Self {
        let amps = pair
            .schmidt_amplitudes()
            .into_iter()
            .enumerate()
            .flat_map(|(l, v)| v.into_iter().map(move |s| (l, s)))
            .collect();
        Self::from_amplitudes(amps, SpectrumSource::OrbitalCoefficients)
    }

    /// `Σ (2l+1) λ`.
    pub fn total_weight(&self) -> f64 {
        self.eigenvalues.iter().map(|(l, v)| (2 * l + 1) as f64 * v).sum()
    }

    pub fn linear_entropy(&self) -> f64 {
        1.0 - self.eigenvalues.iter().map(|(l, v)| (2 * l + 1) as f64 * v * v).sum::<f64>()
    }

    /// `−Σ (2l+1) λ log₂ λ`, in bits.
    pub fn von_neumann_bits(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|(_, v)| *v > 0.0)
            .map(|(l, v)| -((2 * l + 1) as f64) * v * v.log2())
            .sum()
    }

    /// The `k` largest occupations, degenerate copies expanded.
    pub fn leading(&self, k: usize) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|(l, v)| std::iter::repeat_n(*v, 2 * l + 1))
            .take(k)
            .collect()
    }
}

/// Diagonalizes every sector kernel; returns the spectrum and `S` in bits.
pub fn von_neumann_entropy(rdm: &ReducedDensityMatrix) -> Result<(SchmidtSpectrum, f64)> {
    let mut raw = Vec::new();
    for l in 0..rdm.sectors.len() {
        let eig = rdm.symmetric_kernel(l).symmetric_eigenvalues();
        raw.extend(eig.iter().map(|&v| (l, v)));
    }
    let spectrum = SchmidtSpectrum::from_raw(raw, SpectrumSource::SectorDiagonalization)?;
    let s = spectrum.von_neumann_bits();
    Ok((spectrum, s))
}

/// The `l = 0` sector projected onto an orthonormal basis living on the same
/// grid: `A_nn' = (4π)² ∫∫ η_n ρ_0 η_n' r² r'²`, then `A c = λ c`.
pub fn von_neumann_by_basis(rdm: &ReducedDensityMatrix, basis: &OrthonormalBasis) -> Result<SchmidtSpectrum> {
    if !basis.grid().same_as(rdm.grid()) {
        return Err(Error::GridMismatch("basis and density matrix use different grids".into()));
    }
    let (dev, i, j) = basis.orthogonality_defect();
    if dev > 1e-6 {
        return Err(Error::DegradedBasis { i, j, deviation: dev });
    }
    let grid = rdm.grid();
    let n = grid.len();
    let m = basis.order();
    let measure: Vec<f64> = grid.weights().iter().zip(grid.points()).map(|(w, r)| FOUR_PI * w * r * r).collect();
    let eta = DMatrix::from_fn(n, m, |i, k| basis.functions[k].values()[i] * measure[i]);
    let a = eta.transpose() * &rdm.sectors[0] * &eta;
    let a = (&a + a.transpose()) * 0.5;
    let raw = a.symmetric_eigenvalues().iter().map(|&v| (0, v)).collect();
    SchmidtSpectrum::from_raw(raw, SpectrumSource::BasisProjection)
}

/// `S_n = −∫ n ln n d³r` in nats, with `0 ln 0 = 0`.
pub fn information_entropy(n: &RadialFunction) -> Result<f64> {
    let min = n.values().iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(Error::InvalidDensity { min });
    }
    let grid = n.grid();
    let v: Vec<f64> = n
        .values()
        .iter()
        .zip(grid.points())
        .map(|(&d, r)| if d > 0.0 { -d * d.ln() * r * r } else { 0.0 })
        .collect();
    Ok(FOUR_PI * grid.integrate(&v))
}

/// Entropy estimate that keeps only the diagonal of the density matrix:
/// `S ≈ S_n/(N ln 2) + ln N / ln 2`.
pub fn diagonal_approx_s(s_n: f64, electrons: usize) -> f64 {
    let n = electrons as f64;
    s_n / (n * LN_2) + n.ln() / LN_2
}

/// Entropies of one state. `linear` and `von_neumann_bits` are
/// dimensionless/bits; `information_nats` is in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub omega: f64,
    pub linear: f64,
    pub von_neumann_bits: f64,
    pub information_nats: f64,
}

pub fn entropy_record(omega: f64, psi: &SectorWavefunction, density: &RadialFunction) -> Result<EntropyRecord> {
    let rdm = build_rdm(psi)?;
    let (_, s) = von_neumann_entropy(&rdm)?;
    Ok(EntropyRecord { omega, linear: linear_entropy(&rdm), von_neumann_bits: s, information_nats: information_entropy(density)? })
}
