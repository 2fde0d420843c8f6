use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hooke::ks::LdaFunctional;
use hooke::search::Objective;
use hooke::sweep::{convert_units, default_omegas, log_omegas, run_sweep, Material, Method, SweepSpec, UnitInput};

/// Runs exact, LDA, search and perturbation methods over a set of
/// confinement frequencies and writes CSV tables plus a JSON archive.
#[derive(Debug, Parser)]
#[command(name = "hooke-sweep", version)]
struct Args {
    /// Comma-separated ω values.
    #[arg(long, value_delimiter = ',', conflicts_with = "omega_log")]
    omega_list: Option<Vec<f64>>,
    /// Log-spaced ω grid as min,max,n.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    omega_log: Option<Vec<String>>,
    /// Comma-separated subset of exact, lda-scf, ea1-search, ea2-search,
    /// ks-pert-exact, ks-pert-lda, standard-pert.
    #[arg(long, value_delimiter = ',', default_value = "exact,lda-scf,ks-pert-exact,ks-pert-lda,standard-pert")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 4000)]
    grid_points: usize,
    /// Grid extent in units of 1/√ω.
    #[arg(long, default_value_t = 20.0)]
    r_max_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "HOOKE_OUT", default_value = "hooke-out")]
    out: PathBuf,
    /// Highest angular momentum in the perturbation sums.
    #[arg(long, default_value_t = 6)]
    l_max: usize,
    /// Highest radial index in the perturbation sums.
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    #[arg(long, default_value_t = 0.041)]
    threshold_ea1: f64,
    #[arg(long, default_value_t = 0.01)]
    threshold_ea2: f64,
    /// Weight of Q in the EA2 objective f + w·Q.
    #[arg(long, default_value_t = 0.01)]
    q_weight: f64,
    /// pw92 or wigner correlation.
    #[arg(long, default_value = "pw92")]
    functional_variant: String,
    /// Concurrent ω points (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Print the ω of a dot of this width (nm) for --material and exit.
    #[arg(long)]
    dot_width_nm: Option<f64>,
    #[arg(long, default_value = "gaas")]
    material: Material,
}

fn omegas(args: &Args) -> Result<Vec<f64>, String> {
    if let Some(list) = &args.omega_list {
        let mut w = list.clone();
        w.sort_by(f64::total_cmp);
        w.dedup();
        return Ok(w);
    }
    if let Some(spec) = &args.omega_log {
        let [min, max, n] = spec.as_slice() else {
            return Err("--omega-log expects min,max,n".into());
        };
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s}: {e}"));
        let n = n.trim().parse::<usize>().map_err(|e| format!("{n}: {e}"))?;
        return log_omegas(parse(min)?, parse(max)?, n).map_err(|e| e.to_string());
    }
    Ok(default_omegas())
}

fn build_spec(args: &Args) -> Result<SweepSpec, String> {
    let mut spec = SweepSpec::new(omegas(args)?, args.methods.clone());
    spec.grid.n_points = args.grid_points;
    spec.grid.r_max_scale = args.r_max_scale;
    spec.seed = args.seed;
    spec.output_dir = Some(args.out.clone());
    spec.perturbation.l_max = args.l_max;
    spec.perturbation.n_max = args.n_max;
    spec.ea1.threshold = args.threshold_ea1;
    spec.ea2.threshold = args.threshold_ea2;
    spec.ea2.objective = Objective::FPlusQ { weight: args.q_weight };
    spec.functional = match args.functional_variant.as_str() {
        "pw92" => LdaFunctional::default(),
        "wigner" => LdaFunctional::wigner(),
        other => return Err(format!("unknown functional variant '{other}'")),
    };
    spec.workers = args.workers;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(width) = args.dot_width_nm {
        return match convert_units(args.material, UnitInput::DotWidthNm(width)) {
            Ok(u) => {
                println!("{:?}: 2λ = {} nm ↔ ω = {:.6} effective Hartrees", u.material, u.dot_width_nm, u.omega_eff);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    let spec = match build_spec(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_sweep(&spec) {
        Ok(records) => {
            let failed: Vec<_> = records.iter().filter(|r| r.failed()).collect();
            for r in &failed {
                eprintln!("ω = {:.6e} {}: {}", r.omega, r.method, r.error.as_deref().unwrap_or(""));
            }
            eprintln!("{} cells, {} failed, output in {}", records.len(), failed.len(), args.out.display());
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
