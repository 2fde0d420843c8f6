//! Small ω sweep written to CSV and JSON, followed by the side-by-side
//! entropy tables.
//!
//! ```text
//! cargo run --release --example sweep_report -- /tmp/hooke-report
//! ```

use std::path::PathBuf;

use hooke::sweep::{compare_report, log_omegas, run_sweep, Method, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hooke-report"));
    let methods = vec![Method::Exact, Method::LdaScf, Method::KsPertExact, Method::KsPertLda, Method::StandardPert];
    let mut spec = SweepSpec::new(log_omegas(0.01, 10.0, 7)?, methods);
    spec.output_dir = Some(out.clone());
    let records = run_sweep(&spec)?;
    for r in records.iter().filter(|r| r.failed()) {
        eprintln!("ω = {:.3e} {}: {}", r.omega, r.method, r.error.as_deref().unwrap_or(""));
    }

    let (linear, von_neumann) = compare_report(&records)?;
    for table in [&linear, &von_neumann] {
        println!("\n{}", table.quantity);
        print!("{:>10}", "ω");
        for (name, _) in &table.columns {
            print!(" {name:>14}");
        }
        println!();
        for (i, omega) in table.omegas.iter().enumerate() {
            print!("{omega:>10.3e}");
            for (_, col) in &table.columns {
                match col[i] {
                    Some(x) => print!(" {x:>14.6}"),
                    None => print!(" {:>14}", "-"),
                }
            }
            println!();
        }
    }
    println!("\nCSV tables and records.json in {}", out.display());
    Ok(())
}
