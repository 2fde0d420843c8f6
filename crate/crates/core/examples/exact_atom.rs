//! Exact ground state of the two-electron oscillator at a few frequencies.
//!
//! ```text
//! cargo run --release --example exact_atom -- 0.5 0.1 1e-3
//! ```

use hooke::exact::{exact_density, find_termination, interaction_ratio, solve_exact, ExactConfig, HookeProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut omegas: Vec<f64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if omegas.is_empty() {
        omegas = vec![0.5, 0.1, 1.0, 1e-3];
    }
    println!("{:>10} {:>14} {:>10} {:>10} {:>10} {:>8} {:>9}", "ω", "E", "T", "V_ee", "V_ext", "ratio", "series");
    for omega in omegas {
        let problem = HookeProblem::new(omega)?;
        let psi = solve_exact(&problem, &ExactConfig::default())?;
        let parts = psi.energy_parts();
        let series = match find_termination(&problem, 10) {
            Some((degree, _)) => format!("deg {degree}"),
            None => "shooting".into(),
        };
        println!(
            "{omega:>10.4e} {:>14.10} {:>10.6} {:>10.6} {:>10.6} {:>8.4} {series:>9}",
            parts.total,
            parts.kinetic,
            parts.coulomb,
            parts.external,
            interaction_ratio(&psi)
        );
        let n = exact_density(&psi)?;
        let electrons = n.volume_integral();
        if (electrons - 2.0).abs() > 1e-6 {
            eprintln!("  warning: density integrates to {electrons}");
        }
    }
    Ok(())
}
