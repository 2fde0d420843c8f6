//! Evolutionary search for an interacting wavefunction whose density matches
//! the LDA density at ω = 1.
//!
//! ```text
//! cargo run --release --example wf_search -- [ea1|ea2] [generations] [seed] [q-weight]
//! ```

use hooke::entanglement::{build_rdm, linear_entropy};
use hooke::exact::{solve_exact, ExactConfig, HookeProblem};
use hooke::ks::{scf_solve, Interaction, LdaFunctional, ScfConfig};
use hooke::search::{
    evolutionary_search, ground_state_checks, ks_product_energy, trial_entanglement, Objective, SearchConfig, SearchContext, TrialForm,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let form = match args.first().map(String::as_str) {
        Some("ea1") => TrialForm::Ea1,
        _ => TrialForm::Ea2,
    };
    let seed = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let mut config = match form {
        TrialForm::Ea1 => SearchConfig::ea1(seed),
        TrialForm::Ea2 => SearchConfig::ea2(seed),
    };
    if let Some(g) = args.get(1) {
        config.generations = g.parse()?;
    }
    if let Some(w) = args.get(3) {
        config.objective = Objective::FPlusQ { weight: w.parse()? };
    }

    let omega = 1.0;
    let problem = HookeProblem::new(omega)?;
    let exact = solve_exact(&problem, &ExactConfig::default())?;
    let lda = scf_solve(&problem, &exact.fine_grid, &LdaFunctional::default(), &ScfConfig::default(), Interaction::Full, None)?;

    let ctx = SearchContext::new(omega, &lda.density, form, config.eval_stride)?;
    let started = std::time::Instant::now();
    let result = evolutionary_search(&config, &ctx, &[])?;
    let best = result.preferred();
    println!("{form:?}: {} generations in {:.0} s, accepted = {}", config.generations, started.elapsed().as_secs_f64(), result.accepted);
    println!("  f = {:.3} %   Q = {:.5}", 100.0 * best.f, best.q);

    let ent = trial_entanglement(&ctx, &best.trial, exact.pair_grid.clone(), &Default::default())?;
    let l_exact = linear_entropy(&build_rdm(&exact.sectors)?);
    println!("  L = {:.5}   S = {:.5} bits   (exact L = {l_exact:.5})", ent.linear, ent.von_neumann_bits);

    let gs = ground_state_checks(&ctx, &best.trial, ks_product_energy(&lda))?;
    println!(
        "  node-less = {}   Q + <v_ext> = {:.5}   Kohn-Sham product = {:.5}",
        gs.nodeless, gs.trial_energy, gs.product_energy
    );
    Ok(())
}
