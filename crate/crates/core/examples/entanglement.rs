//! Linear and von Neumann entropies of the exact ground state, with the
//! leading natural occupations and the information entropy of the density.
//!
//! ```text
//! cargo run --release --example entanglement -- 0.5 5
//! ```

use hooke::entanglement::{build_rdm, entropy_record, von_neumann_entropy};
use hooke::exact::{exact_density, solve_exact, ExactConfig, HookeProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut omegas: Vec<f64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if omegas.is_empty() {
        omegas = vec![1e-3, 0.01, 0.1, 0.5, 5.0];
    }
    for omega in omegas {
        let psi = solve_exact(&HookeProblem::new(omega)?, &ExactConfig::default())?;
        let n = exact_density(&psi)?;
        let rec = entropy_record(omega, &psi.sectors, &n)?;
        let (spectrum, _) = von_neumann_entropy(&build_rdm(&psi.sectors)?)?;
        let lead: Vec<String> = spectrum.leading(4).iter().map(|p| format!("{p:.5}")).collect();
        println!(
            "ω = {omega:<8.3e} L = {:.6}  S = {:.6} bits  S_n = {:.5} nats  S/L = {:.3}  occupations [{}]",
            rec.linear,
            rec.von_neumann_bits,
            rec.information_nats,
            rec.von_neumann_bits / rec.linear,
            lead.join(", ")
        );
        if psi.truncation.last_share > 1e-8 {
            eprintln!("  last kept sector (l = {}) carries {:.1e} of the norm", psi.truncation.l_max, psi.truncation.last_share);
        }
    }
    Ok(())
}
