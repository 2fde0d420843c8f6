//! Batch runs over ω: every requested method at every ω, figure-family CSV
//! tables, a JSON archive, overview tables and effective-unit conversion.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{build_rdm, information_entropy, linear_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::exact::{exact_density, interaction_ratio, solve_exact, ExactConfig, ExactWavefunction, HookeProblem};
use crate::ks::{
    density_percent_error, exact_exc, invert_exact, lda_exc, lda_total_energy, scf_solve, Interaction, LdaFunctional, ScfConfig, ScfState,
};
use crate::numerics::grid::{GridConfig, RadialFunction};
use crate::perturbation::{
    energy_percent_error, first_order_expansion, ks_spectrum, perturbed_schmidt_spectrum, MeanField, PerturbationConfig,
};
use crate::search::{
    evolutionary_search, ground_state_checks, ks_product_energy, trial_entanglement, SearchConfig, SearchContext, TrialForm,
};
use crate::two_electron::ProjectionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    LdaScf,
    Ea1Search,
    Ea2Search,
    KsPertExact,
    KsPertLda,
    StandardPert,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Self::Exact, Self::LdaScf, Self::Ea1Search, Self::Ea2Search, Self::KsPertExact, Self::KsPertLda, Self::StandardPert];

    pub fn label(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::LdaScf => "lda-scf",
            Self::Ea1Search => "ea1-search",
            Self::Ea2Search => "ea2-search",
            Self::KsPertExact => "ks-pert-exact",
            Self::KsPertLda => "ks-pert-lda",
            Self::StandardPert => "standard-pert",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

/// `n` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_omegas(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min) || n < 2 {
        return Err(Error::InvalidInput(format!("need 0 < min < max and n ≥ 2, got ({min}, {max}, {n})")));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// 25 log-spaced points over `[1e-3, 1e2]` plus ω = 0.5.
pub fn default_omegas() -> Vec<f64> {
    let mut w = log_omegas(1e-3, 1e2, 25).expect("valid range");
    w.push(0.5);
    w.sort_by(f64::total_cmp);
    w
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub omegas: Vec<f64>,
    pub methods: Vec<Method>,
    pub grid: GridConfig,
    pub projection: ProjectionConfig,
    pub scf: ScfConfig,
    pub functional: LdaFunctional,
    pub perturbation: PerturbationConfig,
    pub ea1: SearchConfig,
    pub ea2: SearchConfig,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Concurrent ω points; 0 lets the pool decide.
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(omegas: Vec<f64>, methods: Vec<Method>) -> Self {
        Self {
            omegas,
            methods,
            grid: GridConfig::default(),
            projection: ProjectionConfig::default(),
            scf: ScfConfig::default(),
            functional: LdaFunctional::default(),
            perturbation: PerturbationConfig::default(),
            ea1: SearchConfig::ea1(0),
            ea2: SearchConfig::ea2(0),
            seed: 0,
            output_dir: None,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omegas.is_empty() {
            return Err(Error::InvalidInput("no ω values given".into()));
        }
        if let Some(w) = self.omegas.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!("ω must be positive, got {w}")));
        }
        if self.omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("ω values must be strictly increasing".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("no methods given".into()));
        }
        Ok(())
    }

    fn exact_config(&self) -> ExactConfig {
        ExactConfig { grid: self.grid, projection: self.projection, ..ExactConfig::default() }
    }

    fn search_config(&self, form: TrialForm) -> SearchConfig {
        let base = match form {
            TrialForm::Ea1 => self.ea1,
            TrialForm::Ea2 => self.ea2,
        };
        SearchConfig { seed: self.seed, ..base }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub seed: Option<u64>,
    pub functional: Option<String>,
    pub scf_iterations: Option<usize>,
    pub scf_residual: Option<f64>,
    /// The SCF was restarted from the exact density after failing from the
    /// bare-oscillator start.
    pub scf_restart: Option<bool>,
    /// LDA energy error with the other correlation variant.
    pub alt_functional_energy_error_pct: Option<f64>,
    /// Norm share of the last Legendre sector kept in the projection.
    pub truncation_share: Option<f64>,
    pub perturbation_tail_share: Option<f64>,
    pub truncation_warning: Option<String>,
    /// Density error of the first-order state before renormalization.
    pub density_error_raw_pct: Option<f64>,
    pub energy_second_order: Option<f64>,
    pub energy_second_order_error_pct: Option<f64>,
    /// Linear entropy through the Schmidt spectrum, as a cross-check of the
    /// kernel contraction.
    pub linear_from_spectrum: Option<f64>,
    pub search_f: Option<f64>,
    pub search_q: Option<f64>,
    pub search_accepted: Option<bool>,
    pub ground_state_ok: Option<bool>,
}

/// One (ω, method) cell. Missing quantities stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub omega: f64,
    pub method: Method,
    pub energy: Option<f64>,
    pub linear: Option<f64>,
    pub von_neumann_bits: Option<f64>,
    pub information_nats: Option<f64>,
    pub density_error_pct: Option<f64>,
    pub energy_error_pct: Option<f64>,
    pub e_xc: Option<f64>,
    pub indicator: Option<f64>,
    pub interaction_ratio: Option<f64>,
    pub diagnostics: Diagnostics,
    pub error: Option<String>,
}

impl RunRecord {
    fn empty(omega: f64, method: Method) -> Self {
        Self {
            omega,
            method,
            energy: None,
            linear: None,
            von_neumann_bits: None,
            information_nats: None,
            density_error_pct: None,
            energy_error_pct: None,
            e_xc: None,
            indicator: None,
            interaction_ratio: None,
            diagnostics: Diagnostics::default(),
            error: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Reference data shared by the cells at one ω.
struct Reference {
    problem: HookeProblem,
    exact: Result<(ExactWavefunction, RadialFunction)>,
    lda: Option<Result<(ScfState, bool)>>,
}

impl Reference {
    fn exact(&self) -> Result<&(ExactWavefunction, RadialFunction)> {
        self.exact.as_ref().map_err(|e| Error::InvalidInput(format!("exact reference unavailable: {e}")))
    }

    fn lda(&self) -> Result<&(ScfState, bool)> {
        match &self.lda {
            Some(Ok(s)) => Ok(s),
            Some(Err(e)) => Err(Error::InvalidInput(format!("LDA reference unavailable: {e}"))),
            None => Err(Error::InvalidInput("LDA reference was not computed".into())),
        }
    }

    fn energy_error(&self, e: f64) -> Option<f64> {
        self.exact().ok().and_then(|(psi, _)| energy_percent_error(e, psi.total_energy).ok())
    }

    fn density_error(&self, n: &RadialFunction) -> Option<f64> {
        self.exact().ok().and_then(|(_, ne)| density_percent_error(n, ne).ok()).map(|m| m.percent)
    }
}

/// LDA ground state; on non-convergence from the default start, retries
/// from `fallback`. The flag reports whether the retry was needed.
pub fn lda_with_fallback(
    problem: &HookeProblem,
    grid: &Arc<crate::numerics::grid::RadialGrid>,
    functional: &LdaFunctional,
    config: &ScfConfig,
    fallback: Option<&RadialFunction>,
) -> Result<(ScfState, bool)> {
    match scf_solve(problem, grid, functional, config, Interaction::Full, None) {
        Ok(s) => Ok((s, false)),
        Err(Error::NonConvergence { residuals }) => match fallback {
            Some(n) => scf_solve(problem, grid, functional, config, Interaction::Full, Some(n)).map(|s| (s, true)),
            None => Err(Error::NonConvergence { residuals }),
        },
        Err(e) => Err(e),
    }
}

fn needs_lda(methods: &[Method]) -> bool {
    methods.iter().any(|m| matches!(m, Method::LdaScf | Method::Ea1Search | Method::Ea2Search | Method::KsPertLda))
}

fn reference(spec: &SweepSpec, omega: f64) -> Result<Reference> {
    let problem = HookeProblem::new(omega)?;
    let exact = solve_exact(&problem, &spec.exact_config()).and_then(|psi| {
        let n = exact_density(&psi)?;
        Ok((psi, n))
    });
    let lda = needs_lda(&spec.methods).then(|| {
        let grid = Arc::new(spec.grid.fine_grid(omega)?);
        let fallback = exact.as_ref().ok().map(|(_, n)| n);
        lda_with_fallback(&problem, &grid, &spec.functional, &spec.scf, fallback)
    });
    Ok(Reference { problem, exact, lda })
}

fn exact_cell(r: &Reference, rec: &mut RunRecord) -> Result<()> {
    let (psi, n) = r.exact()?;
    rec.energy = Some(psi.total_energy);
    let rdm = build_rdm(&psi.sectors)?;
    let (spectrum, s) = von_neumann_entropy(&rdm)?;
    rec.linear = Some(linear_entropy(&rdm));
    rec.von_neumann_bits = Some(s);
    rec.information_nats = Some(information_entropy(n)?);
    rec.interaction_ratio = Some(interaction_ratio(psi));
    rec.diagnostics.linear_from_spectrum = Some(spectrum.linear_entropy());
    rec.diagnostics.truncation_share = Some(psi.truncation.last_share);
    let inv = invert_exact(psi, n)?;
    let xc = exact_exc(psi, n, &inv)?;
    rec.e_xc = Some(xc.e_xc);
    rec.indicator = Some(xc.indicator);
    Ok(())
}

fn lda_cell(spec: &SweepSpec, r: &Reference, rec: &mut RunRecord) -> Result<()> {
    let (state, restarted) = r.lda()?;
    let e = lda_total_energy(state, &spec.functional);
    rec.energy = Some(e);
    rec.energy_error_pct = r.energy_error(e);
    rec.density_error_pct = r.density_error(&state.density);
    rec.information_nats = Some(information_entropy(&state.density)?);
    let xc = lda_exc(state, &spec.functional);
    rec.e_xc = Some(xc.e_xc);
    rec.indicator = Some(xc.indicator);
    let d = &mut rec.diagnostics;
    d.functional = Some(spec.functional.label().to_string());
    d.scf_iterations = Some(state.iterations);
    d.scf_residual = Some(state.residual);
    d.scf_restart = Some(*restarted);
    let alt = match spec.functional.correlation {
        crate::ks::CorrelationVariant::PerdewWang92 => LdaFunctional::wigner(),
        crate::ks::CorrelationVariant::Wigner => LdaFunctional::default(),
    };
    let fallback = r.exact().ok().map(|(_, n)| n);
    if let Ok((alt_state, _)) = lda_with_fallback(&r.problem, state.density.grid(), &alt, &spec.scf, fallback) {
        d.alt_functional_energy_error_pct = r.energy_error(lda_total_energy(&alt_state, &alt));
    }
    Ok(())
}

fn search_cell(spec: &SweepSpec, r: &Reference, form: TrialForm, rec: &mut RunRecord) -> Result<()> {
    let (state, _) = r.lda()?;
    let config = spec.search_config(form);
    let ctx = SearchContext::new(r.problem.omega, &state.density, form, config.eval_stride)?;
    let result = evolutionary_search(&config, &ctx, &[])?;
    let best = result.preferred();
    let density = ctx.trial_density(&best.trial)?;
    rec.density_error_pct = r.density_error(&density);
    rec.information_nats = Some(information_entropy(&density)?);
    let checks = ground_state_checks(&ctx, &best.trial, ks_product_energy(state))?;
    let d = &mut rec.diagnostics;
    d.seed = Some(config.seed);
    d.search_f = Some(best.f);
    d.search_q = Some(best.q);
    d.search_accepted = Some(result.accepted);
    d.ground_state_ok = Some(checks.passed());
    let pair_grid = match r.exact() {
        Ok((psi, _)) => psi.pair_grid.clone(),
        Err(_) => Arc::new(spec.grid.pair_grid(state.density.grid(), r.problem.omega)?),
    };
    let ent = trial_entanglement(&ctx, &best.trial, pair_grid, &spec.projection)?;
    rec.linear = Some(ent.linear);
    rec.von_neumann_bits = Some(ent.von_neumann_bits);
    Ok(())
}

fn perturbation_cell(spec: &SweepSpec, r: &Reference, method: Method, rec: &mut RunRecord) -> Result<()> {
    let field = match method {
        Method::StandardPert => MeanField::bare(Arc::new(spec.grid.fine_grid(r.problem.omega)?))?,
        Method::KsPertExact => {
            let (psi, n) = r.exact()?;
            MeanField::from_inversion(&invert_exact(psi, n)?)?
        }
        Method::KsPertLda => MeanField::from_scf(&r.lda()?.0)?,
        _ => unreachable!("not a perturbation method"),
    };
    let cfg = spec.perturbation;
    let spectrum = ks_spectrum(&r.problem, &field, cfg.l_max, cfg.n_max)?;
    let exp = first_order_expansion(&spectrum, &r.problem, &cfg)?;
    let e1 = exp.first_order_energy();
    let e2 = exp.second_order_energy();
    rec.energy = Some(e1);
    rec.energy_error_pct = r.energy_error(e1);
    let schmidt = perturbed_schmidt_spectrum(&exp)?;
    rec.linear = Some(schmidt.linear_entropy());
    rec.von_neumann_bits = Some(schmidt.von_neumann_bits());
    let density = exp.pair.normalized()?.density()?;
    rec.density_error_pct = r.density_error(&density);
    rec.information_nats = Some(information_entropy(&density)?);
    let d = &mut rec.diagnostics;
    d.density_error_raw_pct = r.density_error(&exp.pair.density()?);
    d.energy_second_order = Some(e2);
    d.energy_second_order_error_pct = r.energy_error(e2);
    d.perturbation_tail_share = Some(exp.tail_share);
    d.truncation_warning = exp.truncation_warning.clone();
    Ok(())
}

fn run_cell(spec: &SweepSpec, r: &Reference, method: Method) -> RunRecord {
    let mut rec = RunRecord::empty(r.problem.omega, method);
    let outcome = match method {
        Method::Exact => exact_cell(r, &mut rec),
        Method::LdaScf => lda_cell(spec, r, &mut rec),
        Method::Ea1Search => search_cell(spec, r, TrialForm::Ea1, &mut rec),
        Method::Ea2Search => search_cell(spec, r, TrialForm::Ea2, &mut rec),
        Method::KsPertExact | Method::KsPertLda | Method::StandardPert => perturbation_cell(spec, r, method, &mut rec),
    };
    if let Err(e) = outcome {
        let mut failed = RunRecord::empty(r.problem.omega, method);
        failed.error = Some(e.to_string());
        return failed;
    }
    rec
}

fn run_omega(spec: &SweepSpec, omega: f64) -> Vec<RunRecord> {
    match reference(spec, omega) {
        Ok(r) => spec.methods.iter().map(|&m| run_cell(spec, &r, m)).collect(),
        Err(e) => spec
            .methods
            .iter()
            .map(|&m| {
                let mut rec = RunRecord::empty(omega, m);
                rec.error = Some(e.to_string());
                rec
            })
            .collect(),
    }
}

/// Runs every (ω, method) cell. Cell failures are recorded in place; the
/// returned records are ordered by ω, then by the order of `spec.methods`.
/// Outputs are written when `spec.output_dir` is set.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| spec.omegas.par_iter().flat_map_iter(|&w| run_omega(spec, w)).collect());
    if let Some(dir) = &spec.output_dir {
        write_outputs(dir, spec, &records)?;
    }
    Ok(records)
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

/// Column families written by [`write_outputs`], with the fields each one
/// carries after the leading `omega,method` columns.
pub const CSV_FAMILIES: [(&str, &[&str]); 5] = [
    ("entropy_vs_omega.csv", &["linear", "von_neumann_bits", "information_nats", "status"]),
    ("energy_error.csv", &["energy", "energy_error_pct", "energy_second_order", "energy_second_order_error_pct", "alt_functional_energy_error_pct", "status"]),
    ("density_error.csv", &["density_error_pct", "density_error_raw_pct", "search_f", "status"]),
    ("indicator.csv", &["e_xc", "indicator", "energy", "status"]),
    ("ratio.csv", &["interaction_ratio", "status"]),
];

fn family_row(family: usize, r: &RunRecord) -> Vec<String> {
    let d = &r.diagnostics;
    let status = if r.failed() { "error".to_string() } else { "ok".to_string() };
    let mut row = vec![cell(Some(r.omega)), r.method.to_string()];
    let values = match family {
        0 => vec![cell(r.linear), cell(r.von_neumann_bits), cell(r.information_nats)],
        1 => vec![
            cell(r.energy),
            cell(r.energy_error_pct),
            cell(d.energy_second_order),
            cell(d.energy_second_order_error_pct),
            cell(d.alt_functional_energy_error_pct),
        ],
        2 => vec![cell(r.density_error_pct), cell(d.density_error_raw_pct), cell(d.search_f)],
        3 => vec![cell(r.e_xc), cell(r.indicator), cell(r.energy)],
        _ => vec![cell(r.interaction_ratio)],
    };
    row.extend(values);
    row.push(status);
    row
}

fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(sig12(x))) {
                    *n = x;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Writes the CSV families, the overview tables and `records.json`.
pub fn write_outputs(dir: &Path, spec: &SweepSpec, records: &[RunRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, (name, cols)) in CSV_FAMILIES.iter().enumerate() {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        let header: Vec<&str> = ["omega", "method"].into_iter().chain(cols.iter().copied()).collect();
        w.write_record(&header)?;
        for r in records {
            w.write_record(family_row(i, r))?;
        }
        w.flush()?;
    }
    if let Ok((l, s)) = compare_report(records) {
        l.write_csv(&dir.join("overview_linear.csv"))?;
        s.write_csv(&dir.join("overview_von_neumann.csv"))?;
    }
    let mut archive = serde_json::json!({ "spec": spec, "records": records });
    round_json(&mut archive);
    std::fs::write(dir.join("records.json"), serde_json::to_string_pretty(&archive)?)?;
    Ok(())
}

/// Per-ω table with one column per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub quantity: String,
    pub omegas: Vec<f64>,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

impl ComparisonTable {
    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let header: Vec<&str> = std::iter::once("omega").chain(self.columns.iter().map(|(n, _)| n.as_str())).collect();
        w.write_record(&header)?;
        for (i, &omega) in self.omegas.iter().enumerate() {
            let row: Vec<String> = std::iter::once(cell(Some(omega))).chain(self.columns.iter().map(|(_, c)| cell(c[i]))).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Overview tables of `L` and `S` across methods. The `S` table carries an
/// extra `3.75*L(exact)` column when exact records are present.
pub fn compare_report(records: &[RunRecord]) -> Result<(ComparisonTable, ComparisonTable)> {
    let mut by_method: BTreeMap<Method, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method).or_default().push(r);
    }
    let Some(reference) = by_method.values().next() else {
        return Err(Error::InvalidInput("no records to compare".into()));
    };
    let mut omegas: Vec<f64> = reference.iter().map(|r| r.omega).collect();
    omegas.sort_by(f64::total_cmp);
    let mut misaligned = Vec::new();
    for (m, recs) in &by_method {
        let mut w: Vec<f64> = recs.iter().map(|r| r.omega).collect();
        w.sort_by(f64::total_cmp);
        if w != omegas {
            misaligned.push(m.to_string());
        }
    }
    if !misaligned.is_empty() {
        let mut names: Vec<String> = by_method.keys().map(|m| m.to_string()).collect();
        names.retain(|n| misaligned.contains(n) || n == &by_method.keys().next().unwrap().to_string());
        return Err(Error::Alignment(names));
    }
    let column = |m: Method, f: fn(&RunRecord) -> Option<f64>| -> Vec<Option<f64>> {
        omegas.iter().map(|w| by_method[&m].iter().find(|r| r.omega == *w).and_then(|r| f(r))).collect()
    };
    let mut l = ComparisonTable { quantity: "linear".into(), omegas: omegas.clone(), columns: Vec::new() };
    let mut s = ComparisonTable { quantity: "von_neumann_bits".into(), omegas: omegas.clone(), columns: Vec::new() };
    for &m in by_method.keys() {
        l.columns.push((m.to_string(), column(m, |r| r.linear)));
        s.columns.push((m.to_string(), column(m, |r| r.von_neumann_bits)));
    }
    if by_method.contains_key(&Method::Exact) {
        let scaled = column(Method::Exact, |r| r.linear.map(|x| 3.75 * x));
        s.columns.push(("3.75*L(exact)".into(), scaled));
    }
    Ok((l, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialConstants {
    pub effective_mass: f64,
    pub epsilon_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Material {
    GaAs,
    CdSe,
    Custom { effective_mass: f64, epsilon_r: f64 },
}

impl Material {
    pub fn constants(self) -> Result<MaterialConstants> {
        let table: BTreeMap<String, serde_json::Value> = serde_json::from_str(include_str!("../data/materials.json"))?;
        let lookup = |name: &str| -> Result<MaterialConstants> {
            let v = table.get(name).cloned().ok_or_else(|| Error::InvalidInput(format!("no constants for {name}")))?;
            Ok(serde_json::from_value(v)?)
        };
        let c = match self {
            Self::GaAs => lookup("GaAs")?,
            Self::CdSe => lookup("CdSe")?,
            Self::Custom { effective_mass, epsilon_r } => MaterialConstants { effective_mass, epsilon_r },
        };
        if !(c.effective_mass > 0.0 && c.epsilon_r > 0.0) {
            return Err(Error::InvalidInput("effective mass and permittivity must be positive".into()));
        }
        Ok(c)
    }

    /// Effective Bohr radius in nanometres.
    pub fn bohr_radius_nm(self) -> Result<f64> {
        let c = self.constants()?;
        Ok(BOHR_NM * c.epsilon_r / c.effective_mass)
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaas" => Ok(Self::GaAs),
            "cdse" => Ok(Self::CdSe),
            _ => Err(Error::InvalidInput(format!("unknown material '{s}'"))),
        }
    }
}

const BOHR_NM: f64 = 0.052_917_721_09;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveUnits {
    pub material: Material,
    /// Dot width `2λ` in nanometres.
    pub dot_width_nm: f64,
    /// Confinement in effective Hartrees.
    pub omega_eff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitInput {
    DotWidthNm(f64),
    Omega(f64),
}

/// Solves `λ = √(ħ/(m*ω))` in effective atomic units, where it reads
/// `λ = 1/√ω`, for whichever of width and ω is missing.
pub fn convert_units(material: Material, input: UnitInput) -> Result<EffectiveUnits> {
    let a = material.bohr_radius_nm()?;
    let (dot_width_nm, omega_eff) = match input {
        UnitInput::DotWidthNm(w) if w > 0.0 && w.is_finite() => {
            let lambda = 0.5 * w / a;
            (w, 1.0 / (lambda * lambda))
        }
        UnitInput::Omega(o) if o > 0.0 && o.is_finite() => (2.0 * a / o.sqrt(), o),
        _ => return Err(Error::InvalidInput(format!("unit conversion needs a positive input, got {input:?}"))),
    };
    Ok(EffectiveUnits { material, dot_width_nm, omega_eff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_shape() {
        let w = default_omegas();
        assert_eq!(w.len(), 26);
        assert!((w[0] - 1e-3).abs() < 1e-15 && (w[25] - 100.0).abs() < 1e-10);
        assert!(w.contains(&0.5));
        assert!(w.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn validation() {
        assert!(run_sweep(&SweepSpec::new(vec![], vec![Method::Exact])).is_err());
        assert!(run_sweep(&SweepSpec::new(vec![1.0], vec![])).is_err());
        assert!(SweepSpec::new(vec![1.0, 0.5], vec![Method::Exact]).validate().is_err());
        assert!(SweepSpec::new(vec![-1.0], vec![Method::Exact]).validate().is_err());
    }

    #[test]
    fn method_labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.label()));
        }
        assert!("lda".parse::<Method>().is_err());
    }

    #[test]
    fn exact_cell_at_half() {
        let recs = run_sweep(&SweepSpec::new(vec![0.5], vec![Method::Exact])).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert!((r.energy.unwrap() - 2.0).abs() < 1e-6);
        assert!(r.linear.unwrap() > 0.0 && r.von_neumann_bits.unwrap() > 0.0);
        assert!(r.energy_error_pct.is_none() && r.density_error_pct.is_none());
    }

    #[test]
    fn byte_identical_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let run = |sub: &str| {
            let mut spec = SweepSpec::new(vec![0.5, 2.0], vec![Method::Exact, Method::StandardPert]);
            spec.output_dir = Some(dir.path().join(sub));
            run_sweep(&spec).unwrap();
            std::fs::read(dir.path().join(sub).join("entropy_vs_omega.csv")).unwrap()
        };
        assert_eq!(run("a"), run("b"));
    }

    #[test]
    fn failed_cell_is_isolated() {
        let spec = SweepSpec::new(vec![1.0], vec![Method::Exact, Method::StandardPert]);
        let r = Reference { problem: HookeProblem::new(1.0).unwrap(), exact: Err(Error::InvalidInput("forced".into())), lda: None };
        let exact = run_cell(&spec, &r, Method::Exact);
        assert!(exact.failed() && exact.energy.is_none());
        let pert = run_cell(&spec, &r, Method::StandardPert);
        assert!(!pert.failed(), "{:?}", pert.error);
        assert!(pert.energy.is_some() && pert.energy_error_pct.is_none());
        let lda = run_cell(&spec, &r, Method::LdaScf);
        assert!(lda.failed());
    }

    #[test]
    fn csv_columns_depend_only_on_family() {
        let a = RunRecord::empty(1.0, Method::Exact);
        let b = RunRecord::empty(1.0, Method::Ea2Search);
        for (i, (_, cols)) in CSV_FAMILIES.iter().enumerate() {
            assert_eq!(family_row(i, &a).len(), cols.len() + 2);
            assert_eq!(family_row(i, &b).len(), cols.len() + 2);
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(cell(Some(2.0)), "2.00000000000e0");
        assert_eq!(cell(None), "");
    }

    #[test]
    fn comparison_alignment() {
        let mut recs = vec![RunRecord::empty(0.1, Method::Exact), RunRecord::empty(1.0, Method::Exact)];
        recs.push(RunRecord::empty(0.1, Method::StandardPert));
        match compare_report(&recs) {
            Err(Error::Alignment(names)) => assert!(names.contains(&"standard-pert".to_string())),
            other => panic!("{other:?}"),
        }
        recs.push(RunRecord::empty(1.0, Method::StandardPert));
        let (l, s) = compare_report(&recs).unwrap();
        assert_eq!(l.columns.len(), 2);
        assert_eq!(s.columns.len(), 3);
    }

    #[test]
    fn single_method_overview() {
        let mut r = RunRecord::empty(0.3, Method::KsPertLda);
        r.linear = Some(0.1);
        let (l, s) = compare_report(&[r]).unwrap();
        assert_eq!(l.columns.len(), 1);
        assert_eq!(s.columns.len(), 1);
        assert_eq!(l.column("ks-pert-lda").unwrap(), &[Some(0.1)]);
    }

    #[test]
    fn unit_round_trip() {
        for m in [Material::GaAs, Material::CdSe, Material::Custom { effective_mass: 0.1, epsilon_r: 5.0 }] {
            let a = convert_units(m, UnitInput::DotWidthNm(10.0)).unwrap();
            let b = convert_units(m, UnitInput::Omega(a.omega_eff)).unwrap();
            assert!((b.dot_width_nm - 10.0).abs() < 1e-10);
        }
        assert!(convert_units(Material::GaAs, UnitInput::DotWidthNm(0.0)).is_err());
        assert!(convert_units(Material::Custom { effective_mass: -1.0, epsilon_r: 1.0 }, UnitInput::Omega(1.0)).is_err());
    }
}
