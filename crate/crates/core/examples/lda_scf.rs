//! Self-consistent LDA against the exact solution: energies, density error
//! and the information entropy of both densities.
//!
//! ```text
//! cargo run --release --example lda_scf -- 0.5
//! ```

use hooke::entanglement::information_entropy;
use hooke::exact::{exact_density, solve_exact, ExactConfig, HookeProblem};
use hooke::ks::{density_percent_error, lda_total_energy, LdaFunctional, ScfConfig};
use hooke::perturbation::energy_percent_error;
use hooke::sweep::lda_with_fallback;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut omegas: Vec<f64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if omegas.is_empty() {
        omegas = vec![1e-3, 0.01, 0.1, 0.5, 10.0];
    }
    for omega in omegas {
        let problem = HookeProblem::new(omega)?;
        let psi = solve_exact(&problem, &ExactConfig::default())?;
        let n_exact = exact_density(&psi)?;
        println!("ω = {omega:.4e}   E_exact = {:.8}", psi.total_energy);
        for functional in [LdaFunctional::default(), LdaFunctional::wigner()] {
            let (state, restarted) = lda_with_fallback(&problem, &psi.fine_grid, &functional, &ScfConfig::default(), Some(&n_exact))?;
            let e = lda_total_energy(&state, &functional);
            let dn = density_percent_error(&state.density, &n_exact)?;
            println!(
                "  {:<6} E = {e:.8} ({:+.2} %)  ε = {:.6}  iterations {}{}  density error {:.3} %  S_n = {:.5} (exact {:.5})",
                functional.label(),
                energy_percent_error(e, psi.total_energy)?,
                state.epsilon,
                state.iterations,
                if restarted { " (restarted from exact density)" } else { "" },
                dn.percent,
                information_entropy(&state.density)?,
                information_entropy(&n_exact)?,
            );
        }
    }
    Ok(())
}
