//! Radial grids, quadrature, tridiagonal eigenproblems, orthonormal bases and
//! Legendre utilities shared by every solver.

pub mod basis;
pub mod grid;
pub mod legendre;
pub mod tridiag;

pub use basis::{build_orthonormal_basis, spherical_dot, OrthonormalBasis};
pub use grid::{integrate_radial, FunctionKind, GridConfig, RadialFunction, RadialGrid, UniformSamples};
pub use legendre::{gauss_legendre, legendre_table, LegendreTable};
pub use tridiag::{solve_tridiagonal_eigen, Eigenpair, TridiagonalSystem};
