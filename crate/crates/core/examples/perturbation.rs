//! First- and second-order perturbation theory around three zeroth-order
//! Hamiltonians: exact-v_xc Kohn-Sham, LDA Kohn-Sham and the bare oscillator.
//!
//! ```text
//! cargo run --release --example perturbation -- 0.1
//! ```

use hooke::exact::{exact_density, solve_exact, ExactConfig, HookeProblem};
use hooke::entanglement::{build_rdm, linear_entropy};
use hooke::ks::{density_percent_error, invert_exact, scf_solve, Interaction, LdaFunctional, ScfConfig};
use hooke::perturbation::{
    energy_percent_error, first_order_expansion, ks_spectrum, perturbed_schmidt_spectrum, MeanField,
    PerturbationConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let problem = HookeProblem::new(omega)?;
    let psi = solve_exact(&problem, &ExactConfig::default())?;
    let n_exact = exact_density(&psi)?;
    let l_exact = linear_entropy(&build_rdm(&psi.sectors)?);
    let scf = scf_solve(&problem, &psi.fine_grid, &LdaFunctional::default(), &ScfConfig::default(), Interaction::Full, None)?;

    let fields = [
        MeanField::from_inversion(&invert_exact(&psi, &n_exact)?)?,
        MeanField::from_scf(&scf)?,
        MeanField::bare(psi.fine_grid.clone())?,
    ];
    let config = PerturbationConfig::default();
    println!("ω = {omega}   E_exact = {:.8}   L_exact = {l_exact:.6}", psi.total_energy);
    println!("{:<15} {:>12} {:>9} {:>12} {:>9} {:>10} {:>9}", "source", "E0+E1", "err %", "E0+E1+E2", "err %", "L", "Δn %");
    for field in &fields {
        let spectrum = ks_spectrum(&problem, field, config.l_max, config.n_max)?;
        let exp = first_order_expansion(&spectrum, &problem, &config)?;
        let (e1, e2) = (exp.first_order_energy(), exp.second_order_energy());
        let l = perturbed_schmidt_spectrum(&exp)?.linear_entropy();
        let n_pert = exp.pair.normalized()?.density()?;
        let dn = density_percent_error(&n_pert, &n_exact)?;
        println!(
            "{:<15} {e1:>12.8} {:>9.3} {e2:>12.8} {:>9.3} {l:>10.6} {:>9.3}",
            field.source.label(),
            energy_percent_error(e1, psi.total_energy)?,
            energy_percent_error(e2, psi.total_energy)?,
            dn.percent
        );
        if let Some(w) = &exp.truncation_warning {
            eprintln!("  {w}");
        }
    }
    Ok(())
}
