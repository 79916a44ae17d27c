use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{config_hash, load_config};
use super::output::{
    arrivals_csv, cycles_csv, fmt_float, json_text, trace_csv, validate_cycles_csv, write_file,
    RunManifest, SUMMARY_HEADER,
};
use super::CliError;
use crate::allocation::{entry_step, invariant_set, EntryReport, InvariantSet};
use crate::engine::{
    compare_runs, reconstruct_trace, relative_distance, run_deterministic, run_oracle,
    run_stochastic, states, StochasticConfig,
};
use crate::metrics::throughput_conservation;
use crate::model::{fixed_point, Equilibrium, SystemConfig, ValidatedConfig};
use crate::spectral::{certify, SpectralReport};

/// `‖U(k) − u*‖/‖u*‖` below which a sweep run counts as converged.
pub const SWEEP_CONVERGENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub cycles: usize,
    pub trace_samples: usize,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SimulateReport<'a> {
    manifest: &'a RunManifest,
    config: &'a SystemConfig,
    cycles: usize,
    equilibrium: Equilibrium,
    /// Last simulated cycle period.
    t_star_empirical: Option<f64>,
    u_final: Option<Vec<f64>>,
    w_final: Option<Vec<f64>>,
    relative_distance_final: Option<f64>,
    spectral: SpectralReport,
    invariant_sets_at_t_star: Vec<InvariantSet>,
    /// Per node; `None` when the queue never entered its set within the run.
    entry: Vec<Option<EntryReport>>,
    max_conservation_residual: f64,
    max_clearance_residual: f64,
    backoff_repeats: usize,
    late_tangency_cycles: usize,
}

/// Deterministic run: writes `cycles.csv`, `trace.csv` and `report.json`,
/// then re-reads `cycles.csv` and checks it.
pub fn cmd_simulate(args: &SimulateArgs, log: &mut dyn Write) -> Result<bool, CliError> {
    if args.trace_samples < 2 {
        return Err(CliError::Usage("--trace-samples must be at least 2".into()));
    }
    let cfg = load_config(&args.config)?;
    let manifest =
        RunManifest::new("simulate", config_hash(&cfg), None, &["cycles.csv", "trace.csv", "report.json"]);
    let records = run_deterministic(&cfg, args.cycles)?;
    let traces = records
        .iter()
        .map(|r| reconstruct_trace(r, &cfg, args.trace_samples))
        .collect::<Result<Vec<_>, _>>()?;

    let eq = fixed_point(&cfg);
    let spectral = certify(&cfg)?;
    let all_states = states(&records);
    let entry = (0..cfg.n())
        .map(|i| {
            let run: Vec<(f64, f64)> = records.iter().map(|r| (r.nodes[i].w, r.period)).collect();
            entry_step(&run, &cfg.nodes[i]).ok()
        })
        .collect();
    let last = records.last();
    let report = SimulateReport {
        manifest: &manifest,
        config: cfg.config(),
        cycles: records.len(),
        t_star_empirical: last.map(|r| r.period),
        u_final: last.map(|r| r.next_rates()),
        w_final: last.map(|r| r.next_queues()),
        relative_distance_final: all_states.last().map(|s| relative_distance(&s.rates(), &eq.u_star)),
        invariant_sets_at_t_star: cfg.nodes.iter().map(|p| invariant_set(eq.t_star, p)).collect(),
        equilibrium: eq,
        spectral,
        entry,
        max_conservation_residual: records
            .iter()
            .map(|r| throughput_conservation(&r.average_rates(), cfg.lambda))
            .fold(0.0, f64::max),
        max_clearance_residual: records.iter().map(|r| r.clearance_residual.abs()).fold(0.0, f64::max),
        backoff_repeats: records.iter().map(|r| r.backoff_repeats).sum(),
        late_tangency_cycles: records.iter().filter(|r| r.nodes.iter().any(|n| n.late_tangency)).count(),
    };

    let cycles_text = cycles_csv(&manifest, &records);
    write_file(&args.out, "cycles.csv", &cycles_text)?;
    write_file(&args.out, "trace.csv", &trace_csv(&manifest, &traces))?;
    write_file(&args.out, "report.json", &json_text(&report))?;

    let written = std::fs::read_to_string(args.out.join("cycles.csv"))
        .map_err(|source| CliError::Write { path: args.out.join("cycles.csv"), source })?;
    validate_cycles_csv(&written, Some(cfg.lambda)).map_err(CliError::Validation)?;

    let _ = writeln!(log, "simulated {} cycles of {} nodes", records.len(), cfg.n());
    let _ = writeln!(log, "T* = {}", fmt_float(report.equilibrium.t_star));
    if let Some(t) = report.t_star_empirical {
        let _ = writeln!(log, "T(last) = {}", fmt_float(t));
    }
    let _ = writeln!(log, "outputs written to {}", args.out.display());
    Ok(true)
}

#[derive(Debug, Serialize)]
struct SpectralOutput<'a> {
    manifest: &'a RunManifest,
    config: &'a SystemConfig,
    report: &'a SpectralReport,
}

/// Writes `report.json` with the spectrum of the aggregate map; passes iff
/// the map is Schur.
pub fn cmd_spectral(config: &std::path::Path, out: &std::path::Path, log: &mut dyn Write) -> Result<bool, CliError> {
    let cfg = load_config(config)?;
    let report = certify(&cfg)?;
    let manifest = RunManifest::new("spectral", config_hash(&cfg), None, &["report.json"]);
    write_file(out, "report.json", &json_text(&SpectralOutput { manifest: &manifest, config: cfg.config(), report: &report }))?;
    let eig: Vec<String> = report.eigenvalues.iter().map(|v| fmt_float(*v)).collect();
    let _ = writeln!(log, "eigenvalues: [{}]", eig.join(", "));
    let _ = writeln!(log, "spectral radius: {}", fmt_float(report.spectral_radius));
    let _ = writeln!(log, "deflated: {}", report.deflated);
    let _ = writeln!(log, "schur: {}", report.schur);
    Ok(report.schur)
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub config: PathBuf,
    pub dt: f64,
    pub cycles: usize,
    pub tol: f64,
}

/// Closed-form run against the forward-Euler oracle.
pub fn cmd_verify(args: &VerifyArgs, log: &mut dyn Write) -> Result<bool, CliError> {
    if !(args.dt > 0.0) {
        return Err(CliError::Usage("--dt must be positive".into()));
    }
    let cfg = load_config(&args.config)?;
    let exact = run_deterministic(&cfg, args.cycles)?;
    let oracle = run_oracle(&cfg, args.dt, args.cycles)?;
    let dev = compare_runs(&exact, &oracle);
    let _ = writeln!(log, "cycles: {}, dt: {}", args.cycles, fmt_float(args.dt));
    let _ = writeln!(log, "max relative deviation T: {}", fmt_float(dev.period));
    let _ = writeln!(log, "max relative deviation u: {}", fmt_float(dev.rate));
    let _ = writeln!(log, "max relative deviation w: {}", fmt_float(dev.queue));
    let pass = dev.max() <= args.tol;
    if pass {
        let _ = writeln!(log, "PASS (tolerance {})", fmt_float(args.tol));
    } else {
        let _ = writeln!(log, "FAIL (tolerance {})", fmt_float(args.tol));
        for (k, d) in dev.per_cycle.iter().enumerate() {
            let _ = writeln!(log, "  cycle {k}: {}", fmt_float(*d));
        }
        if let Some((k, what, node)) = &dev.worst {
            let _ = writeln!(log, "worst offender: {what} at cycle {k}, node {node}");
        }
    }
    Ok(pass)
}

#[derive(Debug, Clone)]
pub struct StochasticArgs {
    pub config: PathBuf,
    pub seed: u64,
    pub horizon: f64,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct StochasticReport<'a> {
    manifest: &'a RunManifest,
    config: &'a SystemConfig,
    seed: u64,
    horizon: f64,
    arrivals: usize,
    mean_interarrival: Option<f64>,
    expected_interarrival: f64,
    cycles: usize,
    mean_cycle_period: Option<f64>,
    t_star: f64,
    truncated: bool,
}

/// Exponential-arrival run: writes `cycles.csv`, `arrivals.csv` and
/// `report.json`.
pub fn cmd_stochastic(args: &StochasticArgs, log: &mut dyn Write) -> Result<bool, CliError> {
    if !(args.horizon > 0.0 && args.horizon.is_finite()) {
        return Err(CliError::Usage("--horizon must be positive".into()));
    }
    let cfg = load_config(&args.config)?;
    let run = run_stochastic(&cfg, &StochasticConfig { seed: args.seed, horizon: args.horizon });
    let manifest = RunManifest::new(
        "stochastic",
        config_hash(&cfg),
        Some(args.seed),
        &["cycles.csv", "arrivals.csv", "report.json"],
    );
    let report = StochasticReport {
        manifest: &manifest,
        config: cfg.config(),
        seed: args.seed,
        horizon: args.horizon,
        arrivals: run.arrivals.len(),
        mean_interarrival: run.mean_interarrival(),
        expected_interarrival: 1.0 / cfg.lambda,
        cycles: run.records.len(),
        mean_cycle_period: run.mean_cycle_period(),
        t_star: fixed_point(&cfg).t_star,
        truncated: run.truncated,
    };
    let cycles_text = cycles_csv(&manifest, &run.records);
    write_file(&args.out, "cycles.csv", &cycles_text)?;
    write_file(&args.out, "arrivals.csv", &arrivals_csv(&manifest, &run.arrivals))?;
    write_file(&args.out, "report.json", &json_text(&report))?;
    validate_cycles_csv(&cycles_text, None).map_err(CliError::Validation)?;

    let _ = writeln!(log, "{} arrivals, {} cycles", report.arrivals, report.cycles);
    if let Some(m) = report.mean_interarrival {
        let _ = writeln!(log, "mean inter-arrival {} (expected {})", fmt_float(m), fmt_float(report.expected_interarrival));
    }
    if let Some(m) = report.mean_cycle_period {
        let _ = writeln!(log, "mean cycle period {} (T* = {})", fmt_float(m), fmt_float(report.t_star));
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Multiply every growth rate.
    AlphaScale,
    /// Set every backoff factor.
    Beta,
    /// Set the arrival rate.
    Lambda,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::AlphaScale => "alpha-scale",
            SweepParam::Beta => "beta",
            SweepParam::Lambda => "lambda",
        }
    }

    fn apply(self, base: &SystemConfig, value: f64) -> SystemConfig {
        let mut cfg = base.clone();
        match self {
            SweepParam::AlphaScale => cfg.nodes.iter_mut().for_each(|p| p.alpha *= value),
            SweepParam::Beta => cfg.nodes.iter_mut().for_each(|p| p.beta = value),
            SweepParam::Lambda => cfg.lambda = value,
        }
        cfg
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "alpha-scale" => Ok(SweepParam::AlphaScale),
            "beta" => Ok(SweepParam::Beta),
            "lambda" => Ok(SweepParam::Lambda),
            other => Err(format!("unknown sweep parameter {other:?} (expected alpha-scale, beta or lambda)")),
        }
    }
}

/// Comma-separated list of values; an empty string is an empty sweep.
pub fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| CliError::Usage(format!("bad sweep value {v:?}: {e}"))))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub cycles: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub t_star: f64,
    pub spectral_radius: f64,
    pub schur: bool,
    /// First event index with `‖U(k) − u*‖/‖u*‖ < SWEEP_CONVERGENCE_TOL`.
    pub events_to_converge: Option<usize>,
    pub time_to_converge: Option<f64>,
    pub t_final: Option<f64>,
}

fn sweep_point(cfg: &ValidatedConfig, value: f64, cycles: usize) -> Result<SweepRow, CliError> {
    let eq = fixed_point(cfg);
    let spectral = certify(cfg)?;
    let records = run_deterministic(cfg, cycles)?;
    let converged = states(&records)
        .into_iter()
        .find(|s| relative_distance(&s.rates(), &eq.u_star) < SWEEP_CONVERGENCE_TOL);
    Ok(SweepRow {
        value,
        t_star: eq.t_star,
        spectral_radius: spectral.spectral_radius,
        schur: spectral.schur,
        events_to_converge: converged.as_ref().map(|s| s.k),
        time_to_converge: converged.as_ref().map(|s| s.t),
        t_final: records.last().map(|r| r.period),
    })
}

/// Run one deterministic experiment per value (in parallel) and write
/// `summary.csv`.
pub fn cmd_sweep(args: &SweepArgs, log: &mut dyn Write) -> Result<bool, CliError> {
    let base = load_config(&args.config)?;
    let cfgs = args
        .values
        .iter()
        .map(|&v| args.param.apply(base.config(), v).validate())
        .collect::<Result<Vec<_>, _>>()?;
    let rows = cfgs
        .par_iter()
        .zip(args.values.par_iter())
        .map(|(cfg, &v)| sweep_point(cfg, v, args.cycles))
        .collect::<Result<Vec<_>, _>>()?;

    let manifest = RunManifest::new("sweep", config_hash(&base), None, &["summary.csv"]);
    let mut text = manifest.csv_preamble();
    text.push_str(SUMMARY_HEADER);
    text.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            args.param.name(),
            fmt_float(r.value),
            fmt_float(r.t_star),
            fmt_float(r.spectral_radius),
            r.schur,
            r.events_to_converge.map(|k| k.to_string()).unwrap_or_default(),
            opt(r.time_to_converge),
            opt(r.t_final),
        ));
    }
    write_file(&args.out, "summary.csv", &text)?;
    let _ = writeln!(log, "{} sweep points over {}", rows.len(), args.param.name());
    Ok(rows.iter().all(|r| r.schur))
}
