//! Exact exchange-correlation potential by inverting the Kohn-Sham equation
//! for the exact density, compared with the LDA potential.
//!
//! ```text
//! cargo run --release --example xc_inversion -- 0.5
//! ```

use hooke::exact::{exact_density, solve_exact, ExactConfig, HookeProblem};
use hooke::ks::{exact_exc, invert_exact, lda_exc, scf_solve, Interaction, LdaFunctional, ScfConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let omega: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let problem = HookeProblem::new(omega)?;
    let psi = solve_exact(&problem, &ExactConfig::default())?;
    let n = exact_density(&psi)?;
    let inv = invert_exact(&psi, &n)?;
    let exact = exact_exc(&psi, &n, &inv)?;
    let functional = LdaFunctional::default();
    let scf = scf_solve(&problem, &psi.fine_grid, &functional, &ScfConfig::default(), Interaction::Full, None)?;
    let lda = lda_exc(&scf, &functional);

    println!("ω = {omega}");
    println!("  T_s = {:.8}   ε_KS = {:.8}", inv.t_s, inv.epsilon);
    println!("  E_xc exact = {:.8}   LDA = {:.8}", exact.e_xc, lda.e_xc);
    println!("  |E_xc/E|   exact = {:.5}   LDA = {:.5}", exact.indicator, lda.indicator);
    if inv.truncated {
        println!("  inversion trusted up to r = {:.3}, continued as -c/r beyond", n.grid().points()[inv.window_end - 1]);
    }
    println!("\n{:>8} {:>14} {:>14} {:>14}", "r", "n(r)", "v_xc exact", "v_xc LDA");
    let r = n.grid().points();
    let r_show = 4.0 / omega.sqrt();
    let step = ((r_show / n.grid().spacing()) as usize / 16).max(1);
    for i in (step..r.len()).step_by(step).take_while(|&i| r[i] < r_show) {
        println!("{:>8.4} {:>14.6e} {:>14.6} {:>14.6}", r[i], n.values()[i], inv.v_xc.values()[i], lda.v_xc.values()[i]);
    }
    Ok(())
}
