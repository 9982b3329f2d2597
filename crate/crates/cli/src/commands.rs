//! Subcommand implementations: resolve settings, run, emit files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use entforge::entanglement::{
    analytic_threshold, predicted_entropy, predicted_lower_bound, REFERENCE_GAMMA,
};
use entforge::experiments::{
    calibrate_from_sweep, calibrate_gamma, find_threshold_refined, log_grid, run_generation,
    run_noise_series, run_noise_sweep, run_spectrum, ExperimentConfig, FitResult,
    GammaCalibration, GateCountConvention, NoiseSweep, Realizations, ThresholdResult,
};
use entforge::noise::BoundKind;
use entforge::sawtooth::{build_step_circuit, reference_gate_count, MapParams};
use entforge::validate;
use serde_json::{json, Value};

use crate::config::{ConfigError, Settings};
use crate::format::{Csv, Field};
use crate::manifest::{digest_file, GateCounts, RunManifest, SCHEMA_VERSION};

/// Largest qubit count for density-matrix commands without `--allow-large`.
pub const MIXED_STATE_LIMIT: usize = 8;
pub const MIXED_STATE_LIMIT_LARGE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Generate,
    Spectrum,
    NoiseSweep,
    Threshold,
    CalibrateGamma,
    Validate,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Generate => "generate",
            CommandKind::Spectrum => "spectrum",
            CommandKind::NoiseSweep => "noise-sweep",
            CommandKind::Threshold => "threshold",
            CommandKind::CalibrateGamma => "calibrate-gamma",
            CommandKind::Validate => "validate",
        }
    }

    fn default_qubits(&self) -> Vec<usize> {
        match self {
            CommandKind::Generate | CommandKind::Spectrum => vec![4, 6, 8, 10],
            CommandKind::NoiseSweep | CommandKind::Threshold => vec![4, 6, 8],
            CommandKind::CalibrateGamma => vec![4, 6],
            CommandKind::Validate => vec![],
        }
    }

    fn default_grid(&self) -> Vec<f64> {
        match self {
            CommandKind::CalibrateGamma => log_grid(1e-4, 1e-2, 9),
            _ => log_grid(1e-4, 1e-1, 19),
        }
        .expect("valid default grid")
    }

    fn uses_density_matrices(&self) -> bool {
        matches!(self, CommandKind::NoiseSweep | CommandKind::Threshold | CommandKind::CalibrateGamma)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Simulation(entforge::Error),
    Io(String),
    NoBracket(String),
    Invariant(String),
    Unconverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Simulation(_) | CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::NoBracket(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Unconverged(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Simulation(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::NoBracket(m) => write!(f, "no-bracket: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Unconverged(m) => write!(f, "unconverged: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<entforge::Error> for CliError {
    fn from(e: entforge::Error) -> Self {
        match e {
            entforge::Error::NoBracket { n_q } => CliError::NoBracket(format!(
                "the ε grid does not bracket the threshold at n_q = {n_q}; widen --eps-grid"
            )),
            other => CliError::Simulation(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Settings with every default filled in.
struct Resolved {
    kind: CommandKind,
    config: ExperimentConfig,
    settings: Settings,
    out: PathBuf,
    strict: bool,
    fraction: f64,
}

fn resolve(kind: CommandKind, settings: Settings) -> Result<Resolved, CliError> {
    let defaults = ExperimentConfig::default();
    let config = ExperimentConfig {
        k_param: settings.k_param.unwrap_or(defaults.k_param),
        steps: settings.steps.unwrap_or(defaults.steps),
        epsilon_grid: settings.eps_grid.clone().unwrap_or_else(|| kind.default_grid()),
        realizations: settings.realizations.unwrap_or(Realizations::Auto),
        master_seed: settings.seed.unwrap_or(0),
        qubit_range: settings.nq.clone().unwrap_or_else(|| kind.default_qubits()),
        haar_samples: settings.haar_samples.unwrap_or(defaults.haar_samples),
        initial_level: settings.initial_level.unwrap_or(defaults.initial_level),
        batches: settings.batches.unwrap_or(defaults.batches),
        refine_thresholds: settings.refine.unwrap_or(false),
    };
    let fraction = settings.fraction.unwrap_or(0.5);
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Usage(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    if config.steps == 0 && kind != CommandKind::Validate {
        return Err(CliError::Usage("steps must be positive".into()));
    }
    let checked = match kind {
        CommandKind::Spectrum => config.check_qubits(4),
        CommandKind::Generate | CommandKind::NoiseSweep | CommandKind::Threshold => config.check_qubits(2),
        _ => Ok(()),
    };
    checked.map_err(|e| CliError::Usage(e.to_string()))?;
    if kind.uses_density_matrices() {
        let limit = if settings.allow_large == Some(true) { MIXED_STATE_LIMIT_LARGE } else { MIXED_STATE_LIMIT };
        if let Some(&n) = config.qubit_range.iter().find(|&&n| n > limit) {
            return Err(CliError::Usage(format!(
                "n_q = {n} exceeds the density-matrix limit {limit} (use --allow-large for up to {MIXED_STATE_LIMIT_LARGE})"
            )));
        }
    }
    Ok(Resolved {
        kind,
        out: settings.out.clone().unwrap_or_else(|| PathBuf::from("entforge-out")),
        strict: settings.strict.unwrap_or(false),
        fraction,
        config,
        settings,
    })
}

/// Files written by one command, in emission order.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn csv(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        let path = self.dir.join(name);
        csv.write(&path).map_err(io_err(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).expect("JSON value serialises") + "\n";
        fs::write(&path, text).map_err(io_err(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

struct FitTable {
    csv: Csv,
    json: Vec<Value>,
}

impl FitTable {
    fn new() -> Self {
        Self {
            csv: Csv::new(&["dataset", "exponent_or_rate", "prefactor", "r_squared"]),
            json: Vec::new(),
        }
    }

    fn add(&mut self, dataset: &str, fit: &FitResult) {
        self.csv.row(&[
            dataset.into(),
            fit.exponent_or_rate.into(),
            fit.prefactor.into(),
            fit.r_squared.into(),
        ]);
        self.json.push(json!({
            "dataset": dataset,
            "exponent_or_rate": fit.exponent_or_rate,
            "prefactor": fit.prefactor,
            "r_squared": fit.r_squared,
            "point_count": fit.point_count,
        }));
    }
}

/// Outcome reported after the files are on disk.
enum Verdict {
    Ok,
    Fail(CliError),
}

pub fn dispatch(kind: CommandKind, settings: Settings, warnings: Vec<String>) -> Result<(), CliError> {
    let started = Instant::now();
    let run = resolve(kind, settings)?;
    let mut out = Outputs::new(&run.out)?;
    let mut warnings = warnings;
    let verdict = match kind {
        CommandKind::Generate => generate(&run, &mut out)?,
        CommandKind::Spectrum => spectrum(&run, &mut out)?,
        CommandKind::NoiseSweep => noise_sweep(&run, &mut out, &mut warnings)?,
        CommandKind::Threshold => threshold(&run, &mut out, &mut warnings)?,
        CommandKind::CalibrateGamma => calibrate(&run, &mut out)?,
        CommandKind::Validate => validation(&run, &mut out)?,
    };
    write_manifest(&run, &out, warnings, started.elapsed().as_secs_f64())?;
    match verdict {
        Verdict::Ok => Ok(()),
        Verdict::Fail(e) => Err(e),
    }
}

fn write_manifest(run: &Resolved, out: &Outputs, warnings: Vec<String>, seconds: f64) -> Result<(), CliError> {
    let outputs = out
        .files
        .iter()
        .map(|f| digest_file(&out.dir, f).map_err(io_err(&out.dir.join(f))))
        .collect::<Result<Vec<_>, _>>()?;
    let gate_counts = run
        .config
        .qubit_range
        .iter()
        .map(|&nq| {
            Ok(GateCounts {
                nq,
                actual: build_step_circuit(&MapParams::new(nq, run.config.k_param)?).gate_count(),
                reference: reference_gate_count(nq),
            })
        })
        .collect::<Result<Vec<_>, entforge::Error>>()?;
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        command: run.kind.name().to_string(),
        arguments: std::env::args().skip(1).collect(),
        settings: run.settings.clone(),
        config: run.config.clone(),
        master_seed: run.config.master_seed,
        gate_counts,
        gamma_convention: format!(
            "reference: gamma = {REFERENCE_GAMMA} with n_g = 3nq^2 + nq; calibrated: least-squares slope of -ln F against eps^2 n_g t, reported for both n_g conventions"
        ),
        warnings,
        wall_clock_seconds: seconds,
        outputs,
    };
    let path = out.dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    fs::write(&path, text).map_err(io_err(&path))
}

fn generate(run: &Resolved, out: &mut Outputs) -> Result<Verdict, CliError> {
    let result = run_generation(&run.config)?;
    let mut csv = Csv::new(&["nq", "t", "mean_entropy", "page_value", "gap"]);
    let mut fits = FitTable::new();
    let mut tau = Vec::new();
    for s in &result.series {
        for (t, e) in s.mean_entropy.iter().enumerate() {
            csv.row(&[s.n_qubits.into(), t.into(), (*e).into(), s.page_value.into(), s.gap(t).into()]);
        }
        fits.add(&format!("convergence_nq{}", s.n_qubits), &s.convergence);
        tau.push(json!({"nq": s.n_qubits, "tau": s.tau, "fluctuation_floor": s.fluctuation_floor}));
    }
    if let Some(f) = &result.tau_vs_qubits {
        fits.add("tau_vs_nq", f);
    }
    out.csv("generation.csv", &csv)?;
    out.csv("fits.csv", &fits.csv)?;
    out.json("summary.json", &json!({"command": "generate", "fits": fits.json, "tau": tau}))?;
    Ok(Verdict::Ok)
}

fn spectrum(run: &Resolved, out: &mut Outputs) -> Result<Verdict, CliError> {
    let result = run_spectrum(&run.config)?;
    let sample_header = ["nq", "bipartition_mask", "entropy"];
    let mut sawtooth = Csv::new(&sample_header);
    let mut haar = Csv::new(&sample_header);
    let mut stats = Csv::new(&["nq", "mean", "std", "rel_std", "family"]);
    let mut hist = Csv::new(&["nq", "family", "bin_center", "density"]);
    for (family, csv) in [(&result.sawtooth, &mut sawtooth), (&result.haar, &mut haar)] {
        for fam in family {
            for s in &fam.samples {
                csv.row(&[fam.n_qubits.into(), s.bipartition.a_mask().into(), s.value.into()]);
            }
            let st = &fam.stats;
            stats.row(&[
                fam.n_qubits.into(),
                st.mean.into(),
                st.std_dev.into(),
                st.relative_std.into(),
                fam.family.as_str().into(),
            ]);
            for (c, d) in fam.histogram.bin_centers().zip(&fam.histogram.densities) {
                hist.row(&[fam.n_qubits.into(), fam.family.as_str().into(), c.into(), (*d).into()]);
            }
        }
    }
    let mut fits = FitTable::new();
    fits.add("sawtooth_rel_std_vs_nq", &result.sawtooth_fit);
    fits.add("haar_rel_std_vs_nq", &result.haar_fit);
    out.csv("spectrum_samples.csv", &sawtooth)?;
    out.csv("spectrum_haar_samples.csv", &haar)?;
    out.csv("spectrum_stats.csv", &stats)?;
    out.csv("spectrum_histograms.csv", &hist)?;
    out.csv("fits.csv", &fits.csv)?;
    out.json("summary.json", &json!({"command": "spectrum", "steps": result.steps, "fits": fits.json}))?;
    Ok(Verdict::Ok)
}

/// Analytic entropy and lower-bound predictions on the run's grid.
fn predictions(config: &ExperimentConfig, calibration: Option<&GammaCalibration>) -> Result<Vec<Value>, CliError> {
    let mut rows = Vec::new();
    for &n in &config.qubit_range {
        let actual = build_step_circuit(&config.map_params(n)?).gate_count();
        let mut conventions = vec![("reference", REFERENCE_GAMMA, reference_gate_count(n), REFERENCE_GAMMA)];
        if let Some(c) = calibration {
            conventions.push((
                "calibrated",
                c.gamma(GateCountConvention::Actual),
                actual,
                c.gamma(GateCountConvention::Reference),
            ));
        }
        for (name, gamma, gate_count, gamma_lower) in conventions {
            for &eps in &config.epsilon_grid {
                let p = predicted_entropy(eps, n, config.steps, gamma, gate_count);
                rows.push(json!({
                    "nq": n,
                    "t": config.steps,
                    "eps": eps,
                    "convention": name,
                    "gamma": gamma,
                    "gate_count": gate_count,
                    "entropy_argument": p.argument,
                    "entropy_bound": p.value,
                    "in_regime": p.in_regime,
                    "gamma_lower_bound": gamma_lower,
                    "lower_bound": predicted_lower_bound(eps, n, config.steps, gamma_lower),
                }));
            }
        }
    }
    Ok(rows)
}

fn sweep_tables(sweep: &NoiseSweep, out: &mut Outputs) -> Result<(), CliError> {
    let mut csv = Csv::new(&["nq", "eps", "bound_kind", "mean", "std", "stderr", "n_realizations"]);
    let mut diag = Csv::new(&[
        "nq",
        "eps",
        "total_entropy",
        "mean_fidelity",
        "fano_bound",
        "lower_rel_std",
        "upper_rel_std",
        "bounds_ordered",
        "insufficient_realizations",
    ]);
    for s in &sweep.series {
        for (p, n_real) in std::iter::once((&s.reference, 1)).chain(s.points.iter().map(|p| (p, s.n_realizations))) {
            for kind in [BoundKind::Lower, BoundKind::Upper] {
                let b = p.bound(kind);
                let n_real: Field = if p.epsilon == 0.0 { 1usize.into() } else { n_real.into() };
                csv.row(&[
                    s.n_qubits.into(),
                    p.epsilon.into(),
                    kind.as_str().into(),
                    b.mean.into(),
                    b.std_dev.into(),
                    b.stderr.into(),
                    n_real,
                ]);
            }
            diag.row(&[
                s.n_qubits.into(),
                p.epsilon.into(),
                p.total_entropy.into(),
                p.mean_fidelity.into(),
                p.fano_bound.into(),
                p.lower.relative_std.into(),
                p.upper.relative_std.into(),
                p.bounds_ordered.into(),
                p.insufficient_realizations.into(),
            ]);
        }
    }
    out.csv("noise_sweep.csv", &csv)?;
    out.csv("noise_diagnostics.csv", &diag)
}

/// Invariant failures and convergence flags of a sweep.
fn sweep_verdict(run: &Resolved, sweep: &NoiseSweep, warnings: &mut Vec<String>) -> Verdict {
    for s in &sweep.series {
        for p in &s.points {
            if !p.bounds_ordered {
                return Verdict::Fail(CliError::Invariant(format!(
                    "E_m > E_M at n_q = {}, ε = {}",
                    s.n_qubits, p.epsilon
                )));
            }
            if p.total_entropy > p.fano_bound + 1e-9 {
                return Verdict::Fail(CliError::Invariant(format!(
                    "S(ρ) exceeds the Fano bound at n_q = {}, ε = {}",
                    s.n_qubits, p.epsilon
                )));
            }
        }
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let v = s.monotonicity_violations(kind, 2.0);
            if !v.is_empty() {
                warnings.push(format!(
                    "{} bound at n_q = {} rises by more than 2 standard errors after grid indices {v:?}",
                    kind.as_str(),
                    s.n_qubits
                ));
            }
        }
    }
    if sweep.any_insufficient() {
        let msg = "half-ensemble drift above 2% at some points; increase --realizations".to_string();
        if run.strict {
            return Verdict::Fail(CliError::Unconverged(msg));
        }
        warnings.push(msg);
    }
    for w in warnings.iter() {
        eprintln!("warning: {w}");
    }
    Verdict::Ok
}

fn rel_std_fits(sweep: &NoiseSweep, fits: &mut FitTable) {
    if sweep.series.len() < 3 {
        return;
    }
    let Some(idx) = sweep.epsilon_grid.iter().position(|&e| e > 0.0) else { return };
    for kind in [BoundKind::Lower, BoundKind::Upper] {
        let pts: Vec<_> = sweep
            .series
            .iter()
            .map(|s| (s.n_qubits as f64, s.points[idx].bound(kind).relative_std))
            .collect();
        if let Ok(f) = entforge::experiments::fit_exponential(&pts) {
            fits.add(&format!("{}_rel_std_vs_nq_eps{}", kind.as_str(), crate::format::g17(sweep.epsilon_grid[idx])), &f);
        }
    }
}

fn calibration_json(c: &GammaCalibration) -> Value {
    json!({
        "reference": {"gamma": c.gamma(GateCountConvention::Reference), "r_squared": c.reference_fit.r_squared},
        "actual": {"gamma": c.gamma(GateCountConvention::Actual), "r_squared": c.actual_fit.r_squared},
        "point_count": c.points.len(),
    })
}

fn noise_sweep(run: &Resolved, out: &mut Outputs, warnings: &mut Vec<String>) -> Result<Verdict, CliError> {
    let sweep = run_noise_sweep(&run.config)?;
    sweep_tables(&sweep, out)?;
    let calibration = calibrate_from_sweep(&sweep).ok();
    let mut fits = FitTable::new();
    if let Some(c) = &calibration {
        fits.add("gamma_reference", &c.reference_fit);
        fits.add("gamma_actual", &c.actual_fit);
    }
    rel_std_fits(&sweep, &mut fits);
    out.csv("fits.csv", &fits.csv)?;
    out.json(
        "summary.json",
        &json!({
            "command": "noise-sweep",
            "steps": sweep.steps,
            "fits": fits.json,
            "gamma": calibration.as_ref().map(calibration_json),
            "predictions": predictions(&run.config, calibration.as_ref())?,
        }),
    )?;
    Ok(sweep_verdict(run, &sweep, warnings))
}

fn threshold(run: &Resolved, out: &mut Outputs, warnings: &mut Vec<String>) -> Result<Verdict, CliError> {
    let sweep = run_noise_sweep(&run.config)?;
    sweep_tables(&sweep, out)?;
    let calibration = calibrate_from_sweep(&sweep).ok();
    let mut csv = Csv::new(&["nq", "t", "bound_kind", "eps_threshold", "method"]);
    let mut fits = FitTable::new();
    let mut results: Vec<ThresholdResult> = Vec::new();
    for kind in [BoundKind::Lower, BoundKind::Upper] {
        let simulate = run.config.refine_thresholds.then_some(|n: usize, eps: f64| {
            let cfg = ExperimentConfig { epsilon_grid: vec![eps], ..run.config.clone() };
            Ok(run_noise_series(&cfg, n)?.points[0].bound(kind).mean)
        });
        let r = find_threshold_refined(&sweep, kind, run.fraction, simulate)?;
        for p in &r.points {
            csv.row(&[p.n_qubits.into(), p.steps.into(), kind.as_str().into(), p.epsilon.into(), p.method.as_str().into()]);
        }
        if let Some(f) = &r.fit {
            fits.add(&format!("threshold_{}_t{}", kind.as_str(), sweep.steps), f);
        }
        results.push(r);
    }
    out.csv("thresholds.csv", &csv)?;
    out.csv("fits.csv", &fits.csv)?;
    let analytic: Vec<Value> = run
        .config
        .qubit_range
        .iter()
        .map(|&n| {
            json!({
                "nq": n,
                "t": run.config.steps,
                "reference": analytic_threshold(n, run.config.steps, REFERENCE_GAMMA),
                "calibrated": calibration.as_ref().map(|c| analytic_threshold(n, run.config.steps, c.gamma(GateCountConvention::Reference))),
            })
        })
        .collect();
    out.json(
        "summary.json",
        &json!({
            "command": "threshold",
            "steps": sweep.steps,
            "fraction": run.fraction,
            "fits": fits.json,
            "gamma": calibration.as_ref().map(calibration_json),
            "analytic_thresholds": analytic,
            "predictions": predictions(&run.config, calibration.as_ref())?,
        }),
    )?;
    Ok(sweep_verdict(run, &sweep, warnings))
}

fn calibrate(run: &Resolved, out: &mut Outputs) -> Result<Verdict, CliError> {
    let t = run.config.steps;
    let times: Vec<usize> = if t >= 2 { vec![t.div_ceil(2), t] } else { vec![t] };
    let cal = calibrate_gamma(&run.config, &times)?;
    let mut csv = Csv::new(&["nq", "t", "eps", "mean_fidelity", "neg_log_fidelity", "exposure_reference", "exposure_actual"]);
    for p in &cal.points {
        csv.row(&[
            p.n_qubits.into(),
            p.steps.into(),
            p.epsilon.into(),
            p.mean_fidelity.into(),
            p.neg_log_fidelity().into(),
            p.exposure(GateCountConvention::Reference).into(),
            p.exposure(GateCountConvention::Actual).into(),
        ]);
    }
    let mut fits = FitTable::new();
    fits.add("gamma_reference", &cal.reference_fit);
    fits.add("gamma_actual", &cal.actual_fit);
    out.csv("fidelity.csv", &csv)?;
    out.csv("fits.csv", &fits.csv)?;
    out.json(
        "summary.json",
        &json!({
            "command": "calibrate-gamma",
            "times": times,
            "fits": fits.json,
            "gamma": calibration_json(&cal),
            "predictions": predictions(&run.config, Some(&cal))?,
        }),
    )?;
    Ok(Verdict::Ok)
}

fn validation(run: &Resolved, out: &mut Outputs) -> Result<Verdict, CliError> {
    let report = validate::run_all(run.config.master_seed);
    let mut csv = Csv::new(&["check", "passed", "detail"]);
    for c in &report.checks {
        csv.row(&[c.name.as_str().into(), c.passed.into(), c.detail.as_str().into()]);
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    out.csv("validation.csv", &csv)?;
    if report.all_passed() {
        Ok(Verdict::Ok)
    } else {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Ok(Verdict::Fail(CliError::Invariant(format!("failed checks: {}", names.join(", ")))))
    }
}
