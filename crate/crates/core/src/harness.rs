//! Monte Carlo experiment driver, CSV output and the validation suite.

use crate::altopt::{algorithm1, algorithm2, AltOptions, DesignResult};
use crate::error::{Error, Result};
use crate::oracle::{simulate_frames, verify_frequency_model};
use crate::quadforms::{self, WeightMatrices};
use crate::relayopt::solve_relay_qcqp;
use crate::sample;
use crate::scalar::fro2;
use crate::sysmodel::{channels_from_chain, channels_via_circulant, generate_channel, ChainMatrices, SystemConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Exact CSV header.
pub const CSV_HEADER: [&str; 8] = ["experiment", "trial", "sweep_value", "l_r", "metric_name", "metric_value", "iterations", "seed"];

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "FFRELAY_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    MseVsRelayPower,
    MseVsTaps,
    BerVsRelayPower,
    Convergence,
    RateVsRelayPower,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::MseVsRelayPower,
        Experiment::MseVsTaps,
        Experiment::BerVsRelayPower,
        Experiment::Convergence,
        Experiment::RateVsRelayPower,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::MseVsRelayPower => "mse_vs_relay_power",
            Experiment::MseVsTaps => "mse_vs_taps",
            Experiment::BerVsRelayPower => "ber_vs_relay_power",
            Experiment::Convergence => "convergence",
            Experiment::RateVsRelayPower => "rate_vs_relay_power",
            Experiment::Validate => "validate",
        }
    }

    /// Whether the sweep lists tap counts rather than relay powers in dB.
    pub fn sweeps_taps(self) -> bool {
        self == Experiment::MseVsTaps
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment {s:?}")))
    }
}

/// Relay budget for a sweep value in dB relative to the relay noise.
pub fn relay_power_from_db(sigma_r2: f64, db: f64) -> f64 {
    sigma_r2 * 10f64.powf(db / 10.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub base_config: SystemConfig<f64>,
    /// Relay powers in dB, or tap counts for `mse_vs_taps`.
    pub sweep: Vec<f64>,
    /// Relay tap counts run at every relay-power sweep point. Empty means the
    /// base configuration's `l_r`.
    pub taps: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub out_path: PathBuf,
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, base_config: SystemConfig<f64>, sweep: Vec<f64>, trials: usize, seed: u64, out_path: PathBuf) -> Self {
        let d = AltOptions::<f64>::default();
        Self { experiment, base_config, sweep, taps: Vec::new(), trials, seed, out_path, tol: d.tol, max_iters: d.max_iters, restarts: d.restarts }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment == Experiment::Validate {
            return Ok(());
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("sweep must not be empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sweep values must be finite".into()));
        }
        if self.experiment.sweeps_taps() && self.sweep.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return Err(Error::InvalidConfig("tap sweep values must be positive integers".into()));
        }
        if self.taps.contains(&0) {
            return Err(Error::InvalidConfig("tap counts must be positive".into()));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidConfig("tol, max_iters and restarts must be positive".into()));
        }
        self.base_config.validate()
    }

    fn tap_list(&self) -> Vec<usize> {
        if self.taps.is_empty() {
            vec![self.base_config.l_r]
        } else {
            self.taps.clone()
        }
    }

    /// Configuration for one sweep point and tap count. The prefix follows
    /// the tap count so every point stays circular.
    pub fn point_config(&self, sweep_value: f64, l_r: usize) -> SystemConfig<f64> {
        let base = &self.base_config;
        let mut cfg = base.with_relay_taps(l_r);
        cfg.n_cp = cfg.min_cp().max(base.n_cp);
        if !self.experiment.sweeps_taps() {
            cfg.p_r_max = relay_power_from_db(base.sigma_r2, sweep_value);
        }
        cfg
    }

    fn opts(&self, seed: u64) -> AltOptions<f64> {
        AltOptions { tol: self.tol, max_iters: self.max_iters, restarts: self.restarts, seed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: Experiment,
    pub trial: usize,
    pub sweep_value: f64,
    pub l_r: usize,
    pub metric_name: String,
    pub metric_value: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Mean and standard error of one metric at one sweep point.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub l_r: usize,
    pub metric_name: String,
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

struct Job {
    trial: usize,
    sweep_value: f64,
    l_r: usize,
}

fn jobs(spec: &ExperimentSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for trial in 0..spec.trials {
        for &sweep_value in &spec.sweep {
            if spec.experiment.sweeps_taps() {
                out.push(Job { trial, sweep_value, l_r: sweep_value as usize });
            } else {
                for l_r in spec.tap_list() {
                    out.push(Job { trial, sweep_value, l_r });
                }
            }
        }
    }
    out
}

/// Channel seed of trial `trial`; shared by every sweep point and tap count
/// so comparisons are paired.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    sample::child_seed(seed, trial as u64)
}

fn design(spec: &ExperimentSpec, cfg: &SystemConfig<f64>, ch_seed: u64) -> Result<DesignResult<f64>> {
    // Hop taps do not depend on the relay, so every point of a trial sees
    // the same channel.
    let ch = generate_channel(cfg, ch_seed);
    let opts = spec.opts(ch_seed);
    match spec.experiment {
        Experiment::RateVsRelayPower => algorithm2(cfg, &ch, &opts),
        _ => algorithm1(cfg, &ch, &WeightMatrices::identity(cfg.n, cfg.gamma), &opts),
    }
}

fn rows_for(spec: &ExperimentSpec, job: &Job) -> Result<Vec<ResultRow>> {
    let cfg = spec.point_config(job.sweep_value, job.l_r);
    let seed = trial_seed(spec.seed, job.trial);
    let res = design(spec, &cfg, seed)?;
    let row = |name: &str, value: f64, iterations: usize| ResultRow {
        experiment: spec.experiment,
        trial: job.trial,
        sweep_value: job.sweep_value,
        l_r: job.l_r,
        metric_name: name.to_string(),
        metric_value: value,
        iterations,
        seed,
    };
    let mut rows = Vec::new();
    if spec.experiment == Experiment::Convergence {
        for (step, pair) in res.trace.chunks(2).enumerate() {
            rows.push(row("mse_after_relay", pair[0], step + 1));
            if let Some(&v) = pair.get(1) {
                rows.push(row("mse_after_transceiver", v, step + 1));
            }
        }
        rows.push(row("converged", if res.converged { 1.0 } else { 0.0 }, res.iterations));
        return Ok(rows);
    }
    let m = &res.metrics;
    rows.push(row("sum_mse", m.sum_mse, res.iterations));
    rows.push(row("weighted_sum_mse", m.weighted_sum_mse, res.iterations));
    rows.push(row("mean_ber", m.mean_ber, res.iterations));
    rows.push(row("sum_rate_bits", m.sum_rate_bits, res.iterations));
    rows.push(row("relay_power", res.relay_power, res.iterations));
    Ok(rows)
}

/// Worker pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InternalConsistency(format!("thread pool: {e}")))
}

/// Runs every (trial, sweep point, tap count) and returns rows in that order.
pub fn collect_rows(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    if spec.experiment == Experiment::Validate {
        return Err(Error::InvalidConfig("the validate experiment produces a report, not rows".into()));
    }
    let jobs = jobs(spec);
    let pool = thread_pool()?;
    let per_job: Vec<Result<Vec<ResultRow>>> = pool.install(|| jobs.par_iter().map(|j| rows_for(spec, j)).collect());
    let mut rows = Vec::new();
    for r in per_job {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Mean and standard error per (sweep point, tap count, metric, iteration
/// for convergence rows), in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, usize, String)> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let name = if r.experiment == Experiment::Convergence && r.metric_name != "converged" {
            format!("{}@{}", r.metric_name, r.iterations)
        } else {
            r.metric_name.clone()
        };
        let key = (r.sweep_value, r.l_r, name);
        match keys.iter().position(|k| *k == key) {
            Some(i) => values[i].push(r.metric_value),
            None => {
                keys.push(key);
                values.push(vec![r.metric_value]);
            }
        }
    }
    keys.into_iter()
        .zip(values)
        .map(|((sweep_value, l_r, metric_name), v)| {
            let (mean, std_err) = crate::oracle::mean_se(&v);
            SummaryRow { sweep_value, l_r, metric_name, mean, std_err, count: v.len() }
        })
        .collect()
}

/// Writes rows with the fixed header.
pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.name().to_string(),
            r.trial.to_string(),
            r.sweep_value.to_string(),
            r.l_r.to_string(),
            r.metric_name.clone(),
            r.metric_value.to_string(),
            r.iterations.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `<dir>/<stem>.config.json` for an output CSV path.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    csv.with_file_name(format!("{stem}.config.json"))
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: Experiment,
    config: &'a SystemConfig<f64>,
    sweep: &'a [f64],
    taps: Vec<usize>,
    trials: usize,
    seed: u64,
    tol: f64,
    max_iters: usize,
    restarts: usize,
}

/// Runs the experiment, writes the CSV and its JSON sidecar.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let rows = collect_rows(spec)?;
    let file = std::fs::File::create(&spec.out_path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", spec.out_path.display()))))?;
    write_csv(std::io::BufWriter::new(file), &rows)?;
    let taps = if spec.experiment.sweeps_taps() { spec.sweep.iter().map(|&v| v as usize).collect() } else { spec.tap_list() };
    let sidecar = Sidecar {
        experiment: spec.experiment,
        config: &spec.base_config,
        sweep: &spec.sweep,
        taps,
        trials: spec.trials,
        seed: spec.seed,
        tol: spec.tol,
        max_iters: spec.max_iters,
        restarts: spec.restarts,
    };
    let path = sidecar_path(&spec.out_path);
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let summary = summarize(&rows);
    Ok(ExperimentOutput { rows, summary })
}

/// Human-readable summary table.
pub fn format_summary(spec: &ExperimentSpec, summary: &[SummaryRow]) -> String {
    let unit = if spec.experiment.sweeps_taps() { "taps" } else { "dB" };
    let mut s = format!("{} ({} trials, seed {})\n", spec.experiment, spec.trials, spec.seed);
    s.push_str(&format!("{:>10} {:>4} {:<28} {:>14} {:>12}\n", unit, "l_r", "metric", "mean", "std_err"));
    for r in summary {
        s.push_str(&format!("{:>10} {:>4} {:<28} {:>14.6e} {:>12.3e}\n", r.sweep_value, r.l_r, r.metric_name, r.mean, r.std_err));
    }
    s
}

/// One validation check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `true` when passing requires `value > threshold`.
    pub lower_bound: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        if self.lower_bound {
            self.value > self.threshold
        } else {
            self.value <= self.threshold
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let op = if c.lower_bound { ">" } else { "<=" };
            writeln!(f, "{} {:<34} {:.3e} {op} {:.1e}", if c.passed() { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold)?;
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Equivalence suite on seeded random instances: quadratic forms against
/// the direct chain, fast against literal assembly, circulant against chain
/// channels, the time-domain oracle, and the relay QCQP conditions.
pub fn validate(seed: u64) -> Result<ValidationReport> {
    let mut rng = sample::rng(seed);
    let mut cfgs: Vec<SystemConfig<f64>> = (0..6).map(|_| sample::small_config(&mut rng)).collect();
    cfgs.push(SystemConfig::reference().with_relay_taps(2));

    let (mut mse_dev, mut pow_dev, mut asm_dev, mut circ_dev, mut freq_dev, mut kkt_dev) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    let mut short_dev = f64::INFINITY;
    for (i, cfg) in cfgs.iter().enumerate() {
        let ch = generate_channel(cfg, sample::child_seed(seed, i as u64));
        let relay = sample::relay(cfg, &mut rng);
        let v = sample::precoders(cfg, &mut rng);
        let u = sample::receivers(cfg, &mut rng);
        let theta = sample::weights(cfg, &mut rng);
        let chain = ChainMatrices::new(cfg, &ch)?;

        let parts = quadforms::assemble_parts(cfg, &chain, &v, &u, &theta)?;
        let (per, _) = quadforms::weighted_mse_quadratic(&parts, &relay.to_vec())?;
        let direct = quadforms::weighted_mse_direct(cfg, &ch, &relay, &v, &u, &theta)?;
        for (a, b) in per.iter().zip(&direct) {
            mse_dev = mse_dev.max(rel(*a, *b));
        }
        let pi = quadforms::assemble_power_form(cfg, &chain, &v)?;
        let r = relay.to_vec();
        pow_dev = pow_dev.max(rel(quadforms::power_of(&pi, &r), quadforms::relay_power_direct(cfg, &ch, &relay, &v)?));

        if cfg.n * cfg.relay_dim() <= 400 {
            let q1 = quadforms::reference::assemble_q1(cfg, &chain, &v, &u, &theta)?;
            let pi_ref = quadforms::reference::assemble_power_form(cfg, &chain, &v)?;
            for n in 0..cfg.n {
                asm_dev = asm_dev.max(fro2(&(&q1[n] - &parts.q1[n])).sqrt() / fro2(&q1[n]).sqrt().max(1e-300));
            }
            asm_dev = asm_dev.max(fro2(&(&pi_ref - &pi)).sqrt() / fro2(&pi_ref).sqrt());
        }

        let fast = channels_from_chain(cfg, &chain, &relay)?;
        let circ = channels_via_circulant(cfg, &ch, &relay)?;
        for (a, b) in fast.iter().zip(&circ) {
            circ_dev = circ_dev.max(fro2(&(&a.h - b)).sqrt() / fro2(b).sqrt().max(1e-300));
        }
        freq_dev = freq_dev.max(verify_frequency_model(cfg, &ch, &relay)?);
        if cfg.min_cp() >= 2 {
            let mut short = cfg.clone();
            short.n_cp = cfg.min_cp() - 1;
            short_dev = short_dev.min(verify_frequency_model(&short, &ch, &relay)?);
        }

        let mut inst = parts.instance(pi, cfg.p_r_max);
        inst.p_r_max = 0.5 * quadforms::power_of(&inst.pi, &r);
        let sol = solve_relay_qcqp(&inst)?;
        let scale = inst.q.norm().max(1e-300);
        kkt_dev = kkt_dev.max(sol.kkt_residual / scale).max((-sol.constraint_slack / inst.p_r_max).max(0.0));
    }

    // Monte Carlo against analytic values on one designed system.
    let cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
    let ch = generate_channel(&cfg, sample::child_seed(seed, 1000));
    let theta = WeightMatrices::identity(cfg.n, cfg.gamma);
    let opts = AltOptions { max_iters: 5, seed, ..AltOptions::default() };
    let res = algorithm1(&cfg, &ch, &theta, &opts)?;
    let v = res.precoders();
    let u = res.receivers();
    let stats = simulate_frames(&cfg, &ch, &res.relay, &v, &u, &theta, 4000, sample::child_seed(seed, 1001))?;
    let z_mse = (stats.weighted_mse_mean - res.metrics.weighted_sum_mse).abs() / stats.weighted_mse_se;
    let z_pow = (stats.relay_power_mean - res.relay_power).abs() / stats.relay_power_se;

    let check = |name, value, threshold| Check { name, value, threshold, lower_bound: false };
    Ok(ValidationReport {
        checks: vec![
            check("weighted_mse_quadratic_vs_direct", mse_dev, 1e-8),
            check("relay_power_quadratic_vs_direct", pow_dev, 1e-8),
            check("fast_vs_literal_assembly", asm_dev, 1e-10),
            check("circulant_vs_chain_channels", circ_dev, 1e-9),
            check("time_domain_vs_frequency_model", freq_dev, 1e-9),
            Check { name: "short_prefix_deviation", value: short_dev, threshold: 1e-3, lower_bound: true },
            check("relay_qcqp_kkt", kkt_dev, 1e-7),
            check("oracle_mse_z_score", z_mse, 4.0),
            check("oracle_relay_power_z_score", z_pow, 4.0),
        ],
    })
}
