//! Repeated seeded experiments, aggregation, and report artifacts.
//!
//! An [`ExperimentConfig`] describes R independent ADAPT runs that differ
//! only in their seed (`seed + r`). Runs execute on the rayon pool and are
//! collected in repetition order, so outputs do not depend on scheduling.
//! Runs that stop early are carried forward at their final values, giving
//! every iteration R contributing samples.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::adapt::{run_adapt, AdaptConfig, AdaptSetup, Mode, RunTrace};
use crate::error::{Error, Result};
use crate::hamiltonian::{load_hamiltonian, Hamiltonian};
use crate::measurement::allocation::{AllocationMethod, EtaForm};
use crate::measurement::counting::{count_report, CountReport};
use crate::pools::PoolKind;
use crate::state::{NoiseChannels, NoiseSpec};
use crate::CHEMICAL_ACCURACY;

pub const SCHEMA_VERSION: u32 = 1;

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub hamiltonian: PathBuf,
    pub pool: PoolKind,
    pub mode: Mode,
    pub allocation: AllocationMethod,
    pub eta_form: EtaForm,
    /// Energy budget N; `None` means `shots_per_clique · m`.
    pub budget: Option<u64>,
    pub shots_per_clique: u64,
    pub probe_shots: u64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub noise_p: f64,
    pub noise_channels: NoiseChannels,
    pub repetitions: usize,
    pub seed: u64,
    pub reuse: bool,
    pub vqe_max_iterations: Option<usize>,
    pub output: PathBuf,
    /// Noise levels for the sweep command.
    pub noise_levels: Vec<f64>,
    /// Allocation methods compared by the sweep command.
    pub compare: Vec<AllocationMethod>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let adapt = AdaptConfig::default();
        ExperimentConfig {
            hamiltonian: PathBuf::new(),
            pool: PoolKind::Ceo,
            mode: adapt.mode,
            allocation: adapt.allocation,
            eta_form: adapt.eta_form,
            budget: None,
            shots_per_clique: adapt.shots_per_clique,
            probe_shots: adapt.probe_shots,
            epsilon: adapt.epsilon,
            max_iterations: adapt.max_iterations,
            noise_p: 0.0,
            noise_channels: NoiseChannels::ALL,
            repetitions: 200,
            seed: 0,
            reuse: true,
            vqe_max_iterations: None,
            output: PathBuf::from("results"),
            noise_levels: vec![1e-5, 1e-4, 1e-3],
            compare: vec![AllocationMethod::Uniform, AllocationMethod::Vpsr],
        }
    }
}

/// Raw file layout. Every value keeps its byte span for diagnostics.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    hamiltonian: Option<Spanned<String>>,
    pool: Option<Spanned<String>>,
    mode: Option<Spanned<String>>,
    allocation: Option<Spanned<String>>,
    eta_form: Option<Spanned<String>>,
    budget: Option<Spanned<i64>>,
    shots_per_clique: Option<Spanned<i64>>,
    probe_shots: Option<Spanned<i64>>,
    epsilon: Option<Spanned<f64>>,
    max_iterations: Option<Spanned<i64>>,
    noise_p: Option<Spanned<f64>>,
    noise_channels: Option<Spanned<String>>,
    repetitions: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    reuse: Option<bool>,
    vqe_max_iterations: Option<Spanned<i64>>,
    output: Option<Spanned<String>>,
    noise_levels: Option<Spanned<Vec<f64>>>,
    compare: Option<Spanned<Vec<String>>>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

struct Diag<'t> {
    text: &'t str,
    origin: String,
}

impl Diag<'_> {
    fn at<T>(&self, v: &Spanned<T>, msg: impl std::fmt::Display) -> Error {
        let (line, col) = line_col(self.text, v.span().start);
        Error::Config(format!("{}:{line}:{col}: {msg}", self.origin))
    }

    fn parse<T: std::str::FromStr>(&self, v: &Spanned<String>, what: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        v.get_ref()
            .parse()
            .map_err(|e| self.at(v, format!("invalid {what}: {e}")))
    }

    fn count(&self, v: &Spanned<i64>, what: &str, min: i64) -> Result<u64> {
        let n = *v.get_ref();
        if n < min {
            return Err(self.at(v, format!("{what} must be at least {min}, got {n}")));
        }
        Ok(n as u64)
    }
}

impl ExperimentConfig {
    /// Parses a TOML config. Relative paths resolve against `base_dir`.
    /// Errors carry `origin:line:column` of the offending value.
    pub fn from_toml_str(text: &str, origin: &str, base_dir: &Path) -> Result<Self> {
        let diag = Diag {
            text,
            origin: origin.to_string(),
        };
        let raw: ConfigFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    Error::Config(format!("{origin}:{line}:{col}: {msg}"))
                }
                None => Error::Config(format!("{origin}: {msg}")),
            }
        })?;
        let mut c = ExperimentConfig::default();
        if let Some(v) = &raw.hamiltonian {
            let p = PathBuf::from(v.get_ref());
            c.hamiltonian = if p.is_absolute() { p } else { base_dir.join(p) };
            if !c.hamiltonian.is_file() {
                return Err(diag.at(
                    v,
                    format!("hamiltonian file {} does not exist", c.hamiltonian.display()),
                ));
            }
        }
        if let Some(v) = &raw.pool {
            c.pool = diag.parse(v, "pool")?;
        }
        if let Some(v) = &raw.mode {
            c.mode = diag.parse(v, "mode")?;
        }
        if let Some(v) = &raw.allocation {
            c.allocation = diag.parse(v, "allocation")?;
        }
        if let Some(v) = &raw.eta_form {
            c.eta_form = diag.parse(v, "eta_form")?;
        }
        if let Some(v) = &raw.budget {
            c.budget = Some(diag.count(v, "budget", 1)?);
        }
        if let Some(v) = &raw.shots_per_clique {
            c.shots_per_clique = diag.count(v, "shots_per_clique", 1)?;
        }
        if let Some(v) = &raw.probe_shots {
            c.probe_shots = diag.count(v, "probe_shots", 2)?;
        }
        if let Some(v) = &raw.epsilon {
            if v.get_ref().is_nan() || *v.get_ref() <= 0.0 {
                return Err(diag.at(v, "epsilon must be positive"));
            }
            c.epsilon = *v.get_ref();
        }
        if let Some(v) = &raw.max_iterations {
            c.max_iterations = diag.count(v, "max_iterations", 1)? as usize;
        }
        if let Some(v) = &raw.noise_p {
            if !(0.0..=1.0).contains(v.get_ref()) {
                return Err(diag.at(v, "noise_p must lie in [0, 1]"));
            }
            c.noise_p = *v.get_ref();
        }
        if let Some(v) = &raw.noise_channels {
            c.noise_channels = diag.parse(v, "noise_channels")?;
        }
        if let Some(v) = &raw.repetitions {
            c.repetitions = diag.count(v, "repetitions", 1)? as usize;
        }
        if let Some(v) = &raw.seed {
            c.seed = diag.count(v, "seed", 0)?;
        }
        if let Some(v) = raw.reuse {
            c.reuse = v;
        }
        if let Some(v) = &raw.vqe_max_iterations {
            c.vqe_max_iterations = Some(diag.count(v, "vqe_max_iterations", 1)? as usize);
        }
        if let Some(v) = &raw.output {
            let p = PathBuf::from(v.get_ref());
            c.output = if p.is_absolute() { p } else { base_dir.join(p) };
        }
        if let Some(v) = &raw.noise_levels {
            if v.get_ref().iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(diag.at(v, "every noise level must lie in [0, 1]"));
            }
            c.noise_levels = v.get_ref().clone();
        }
        if let Some(v) = &raw.compare {
            c.compare = v
                .get_ref()
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| diag.at(v, format!("invalid compare list: {e}")))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, &path.display().to_string(), base)
    }

    /// Checks cross-field constraints that hold regardless of where values came from.
    pub fn validate(&self) -> Result<()> {
        if self.hamiltonian.as_os_str().is_empty() {
            return Err(Error::Config("no hamiltonian file given".into()));
        }
        if !self.hamiltonian.is_file() {
            return Err(Error::Config(format!(
                "hamiltonian file {} does not exist",
                self.hamiltonian.display()
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        NoiseSpec::new(self.noise_p, self.noise_channels)?;
        self.adapt_config(0).validate()
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            p: self.noise_p,
            channels: self.noise_channels,
        }
    }

    /// Per-run settings for repetition seed `seed`.
    pub fn adapt_config(&self, seed: u64) -> AdaptConfig {
        AdaptConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            mode: self.mode,
            allocation: self.allocation,
            eta_form: self.eta_form,
            shots_per_clique: self.shots_per_clique,
            energy_budget: self.budget,
            probe_shots: self.probe_shots,
            noise: self.noise(),
            seed,
            reuse: self.reuse,
            vqe_max_iterations: self.vqe_max_iterations,
        }
    }
}

/// One trace row after padding, with cumulative shot components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub repetition: usize,
    pub n: usize,
    /// True when the run had already stopped and this row repeats its end state.
    pub carried: bool,
    pub energy: f64,
    pub error: f64,
    pub gradient_norm: f64,
    pub selected: Option<usize>,
    pub vqe_shots: u64,
    pub grad_shots: u64,
    pub shots_saved: u64,
    pub cumulative_shots: u64,
    pub cumulative_vqe: u64,
    pub cumulative_grad: u64,
    pub cumulative_saved: u64,
}

pub const TRACE_HEADER: &str = "repetition,n,carried,energy,error,gradient_norm,selected,vqe_shots,grad_shots,shots_saved,cumulative_shots,cumulative_vqe,cumulative_grad,cumulative_saved";

impl TraceRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.repetition,
            self.n,
            self.carried as u8,
            num(self.energy),
            num(self.error),
            num(self.gradient_norm),
            self.selected.map(|s| s.to_string()).unwrap_or_default(),
            self.vqe_shots,
            self.grad_shots,
            self.shots_saved,
            self.cumulative_shots,
            self.cumulative_vqe,
            self.cumulative_grad,
            self.cumulative_saved
        )
    }
}

/// Shortest round-trip float text, with an exponent for extreme magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Pads a trace to `len` rows by carrying its last state forward.
pub fn padded_rows(repetition: usize, trace: &RunTrace, len: usize) -> Vec<TraceRow> {
    let mut out = Vec::with_capacity(len);
    let (mut cv, mut cg, mut cs) = (0, 0, 0);
    for r in &trace.rows {
        cv += r.vqe_shots;
        cg += r.grad_shots;
        cs += r.shots_saved;
        out.push(TraceRow {
            repetition,
            n: r.n,
            carried: false,
            energy: r.energy,
            error: r.error,
            gradient_norm: r.gradient_norm,
            selected: r.selected,
            vqe_shots: r.vqe_shots,
            grad_shots: r.grad_shots,
            shots_saved: r.shots_saved,
            cumulative_shots: r.cumulative_shots,
            cumulative_vqe: cv,
            cumulative_grad: cg,
            cumulative_saved: cs,
        });
    }
    while out.len() < len {
        let last = out.last().expect("trace has a reference row").clone();
        out.push(TraceRow {
            n: last.n + 1,
            carried: true,
            selected: None,
            vqe_shots: 0,
            grad_shots: 0,
            shots_saved: 0,
            ..last
        });
    }
    out
}

/// Mean, sample standard deviation, and standard error of the mean.
pub fn mean_std(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt(), (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub n: usize,
    pub repetitions: usize,
    /// Runs that were still iterating at this point.
    pub active: usize,
    pub mean_energy: f64,
    pub std_energy: f64,
    /// `|mean(E) − E_fci|`; the chemical-accuracy test uses this column.
    pub error_of_mean: f64,
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
    pub sem_abs_error: f64,
    pub mean_gradient_norm: f64,
    pub mean_cumulative_shots: f64,
    pub std_cumulative_shots: f64,
    pub mean_cumulative_vqe: f64,
    pub mean_cumulative_grad: f64,
    pub mean_cumulative_saved: f64,
}

pub const AGGREGATE_HEADER: &str = "n,repetitions,active,mean_energy,std_energy,error_of_mean,mean_abs_error,std_abs_error,sem_abs_error,mean_gradient_norm,mean_cumulative_shots,std_cumulative_shots,mean_cumulative_vqe,mean_cumulative_grad,mean_cumulative_saved";

impl AggregateRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.repetitions,
            self.active,
            num(self.mean_energy),
            num(self.std_energy),
            num(self.error_of_mean),
            num(self.mean_abs_error),
            num(self.std_abs_error),
            num(self.sem_abs_error),
            num(self.mean_gradient_norm),
            num(self.mean_cumulative_shots),
            num(self.std_cumulative_shots),
            num(self.mean_cumulative_vqe),
            num(self.mean_cumulative_grad),
            num(self.mean_cumulative_saved)
        )
    }
}

/// Aggregates padded per-repetition rows (all of equal length).
pub fn aggregate(rows: &[Vec<TraceRow>], fci: f64) -> Vec<AggregateRow> {
    let len = rows.first().map_or(0, Vec::len);
    (0..len)
        .map(|i| {
            let col = |f: &dyn Fn(&TraceRow) -> f64| rows.iter().map(|r| f(&r[i])).collect::<Vec<f64>>();
            let (me, se, _) = mean_std(&col(&|r| r.energy));
            let (ma, sa, sema) = mean_std(&col(&|r| r.error));
            let (mc, sc, _) = mean_std(&col(&|r| r.cumulative_shots as f64));
            AggregateRow {
                n: i,
                repetitions: rows.len(),
                active: rows.iter().filter(|r| !r[i].carried).count(),
                mean_energy: me,
                std_energy: se,
                error_of_mean: (me - fci).abs(),
                mean_abs_error: ma,
                std_abs_error: sa,
                sem_abs_error: sema,
                mean_gradient_norm: mean_std(&col(&|r| r.gradient_norm)).0,
                mean_cumulative_shots: mc,
                std_cumulative_shots: sc,
                mean_cumulative_vqe: mean_std(&col(&|r| r.cumulative_vqe as f64)).0,
                mean_cumulative_grad: mean_std(&col(&|r| r.cumulative_grad as f64)).0,
                mean_cumulative_saved: mean_std(&col(&|r| r.cumulative_saved as f64)).0,
            }
        })
        .collect()
}

/// Mean shot split at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSplit {
    pub iteration: usize,
    pub cumulative_shots: f64,
    pub vqe_shots: f64,
    pub gradient_shots: f64,
    pub saved_shots: f64,
}

impl ShotSplit {
    fn of(row: &AggregateRow) -> Self {
        ShotSplit {
            iteration: row.n,
            cumulative_shots: row.mean_cumulative_shots,
            vqe_shots: row.mean_cumulative_vqe,
            gradient_shots: row.mean_cumulative_grad,
            saved_shots: row.mean_cumulative_saved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub iteration: usize,
    pub mean_energy: f64,
    pub error_of_mean: f64,
    pub mean_abs_error: f64,
    pub sem_abs_error: f64,
    pub sem_energy: f64,
    pub shots: ShotSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub molecule: String,
    pub pool: PoolKind,
    pub mode: Mode,
    pub allocation: AllocationMethod,
    pub eta_form: EtaForm,
    pub repetitions: usize,
    pub seed: u64,
    pub energy_budget: u64,
    pub probe_shots: u64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub noise_p: f64,
    pub noise_channels: String,
    pub reuse: bool,
    /// Cached cliques skip both the probe and the main measurement.
    pub cached_cliques_skip_probe: bool,
    pub fci_energy: f64,
    pub chemical_accuracy: f64,
    pub reached_accuracy: bool,
    /// Mean shot split at the first iteration whose error of the mean is
    /// within chemical accuracy.
    pub shots_to_accuracy: Option<ShotSplit>,
    #[serde(rename = "final")]
    pub final_stats: FinalStats,
    pub runs_terminated_by_gradient: usize,
    pub optimizer_warnings: usize,
}

/// Everything produced by one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub traces: Vec<RunTrace>,
    pub rows: Vec<Vec<TraceRow>>,
    pub aggregate: Vec<AggregateRow>,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from(TRACE_HEADER);
        s.push('\n');
        for row in self.rows.iter().flatten() {
            let _ = writeln!(s, "{}", row.csv_row());
        }
        s
    }

    pub fn aggregate_csv(&self) -> String {
        let mut s = String::from(AGGREGATE_HEADER);
        s.push('\n');
        for row in &self.aggregate {
            let _ = writeln!(s, "{}", row.csv_row());
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes `trace.csv`, `aggregate.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |path: PathBuf| move |source| Error::Io { path, source };
        fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, body) in [
            ("trace.csv", self.trace_csv()),
            ("aggregate.csv", self.aggregate_csv()),
            ("summary.json", self.summary_json()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

/// Runs the R repetitions of `config` and aggregates them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let hamiltonian = load_hamiltonian(&config.hamiltonian)?;
    run_experiment_on(&hamiltonian, config)
}

/// As [`run_experiment`] with an already loaded Hamiltonian.
pub fn run_experiment_on(hamiltonian: &Hamiltonian, config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let setup = AdaptSetup::new(hamiltonian, config.pool)?;
    let traces = (0..config.repetitions)
        .into_par_iter()
        .map(|r| run_adapt(&setup, &config.adapt_config(config.seed.wrapping_add(r as u64))))
        .collect::<Result<Vec<_>>>()?;
    let len = traces.iter().map(|t| t.rows.len()).max().unwrap_or(1);
    let rows: Vec<Vec<TraceRow>> = traces.iter().enumerate().map(|(r, t)| padded_rows(r, t, len)).collect();
    let fci = hamiltonian.fci_energy();
    let agg = aggregate(&rows, fci);

    let first = agg.iter().find(|a| a.error_of_mean <= CHEMICAL_ACCURACY);
    let last = agg.last().expect("at least the reference row");
    let (_, _, sem_energy) = mean_std(&rows.iter().map(|r| r[len - 1].energy).collect::<Vec<_>>());
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        molecule: hamiltonian.molecule().to_string(),
        pool: config.pool,
        mode: config.mode,
        allocation: config.allocation,
        eta_form: config.eta_form,
        repetitions: config.repetitions,
        seed: config.seed,
        energy_budget: setup.energy_budget(&config.adapt_config(0)),
        probe_shots: config.probe_shots,
        epsilon: config.epsilon,
        max_iterations: config.max_iterations,
        noise_p: config.noise_p,
        noise_channels: config.noise_channels.to_string(),
        reuse: config.reuse,
        cached_cliques_skip_probe: true,
        fci_energy: fci,
        chemical_accuracy: CHEMICAL_ACCURACY,
        reached_accuracy: first.is_some(),
        shots_to_accuracy: first.map(ShotSplit::of),
        final_stats: FinalStats {
            iteration: last.n,
            mean_energy: last.mean_energy,
            error_of_mean: last.error_of_mean,
            mean_abs_error: last.mean_abs_error,
            sem_abs_error: last.sem_abs_error,
            sem_energy,
            shots: ShotSplit::of(last),
        },
        runs_terminated_by_gradient: traces.iter().filter(|t| t.terminated_by_gradient).count(),
        optimizer_warnings: traces.iter().map(|t| t.warnings.len()).sum(),
    };
    Ok(ExperimentResult {
        traces,
        rows,
        aggregate: agg,
        summary,
    })
}

/// One point of a noise sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub p: f64,
    pub allocation: AllocationMethod,
    pub result: ExperimentResult,
}

pub const SWEEP_HEADER: &str =
    "p,allocation,reached_accuracy,iteration_to_accuracy,shots_to_accuracy,final_error_of_mean,final_sem_energy,final_cumulative_shots";

impl SweepPoint {
    pub fn csv_row(&self) -> String {
        let s = &self.result.summary;
        let (it, shots) = match &s.shots_to_accuracy {
            Some(split) => (split.iteration.to_string(), num(split.cumulative_shots)),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            num(self.p),
            self.allocation,
            s.reached_accuracy,
            it,
            shots,
            num(s.final_stats.error_of_mean),
            num(s.final_stats.sem_energy),
            num(s.final_stats.shots.cumulative_shots)
        )
    }

    /// Directory name for this point's artifacts.
    pub fn dir_name(&self) -> String {
        format!("p{}_{}", num(self.p), self.allocation)
    }
}

/// Runs the experiment at every noise level and allocation method in the config.
pub fn noise_sweep(config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let hamiltonian = load_hamiltonian(&config.hamiltonian)?;
    let methods = if config.compare.is_empty() {
        vec![config.allocation]
    } else {
        config.compare.clone()
    };
    let mut points = Vec::new();
    for &p in &config.noise_levels {
        for &allocation in &methods {
            let cfg = ExperimentConfig {
                noise_p: p,
                allocation,
                mode: Mode::Shots,
                ..config.clone()
            };
            NoiseSpec::new(p, cfg.noise_channels)?;
            points.push(SweepPoint {
                p,
                allocation,
                result: run_experiment_on(&hamiltonian, &cfg)?,
            });
        }
    }
    Ok(points)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{}", p.csv_row());
    }
    s
}

/// Collects `*.json` Hamiltonians from a file or directory, sorted by path.
pub fn hamiltonian_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut out: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        out.sort();
        Ok(out)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        })
    }
}

/// Counting reports for every Hamiltonian under `path` and every pool.
pub fn count_reports(path: &Path, pools: &[PoolKind]) -> Result<Vec<CountReport>> {
    let mut out = Vec::new();
    for file in hamiltonian_paths(path)? {
        let h = load_hamiltonian(&file)?;
        for &kind in pools {
            out.push(count_report(&h, kind)?);
        }
    }
    Ok(out)
}

pub fn count_csv(reports: &[CountReport]) -> String {
    let mut s = String::from(CountReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Mean grouped and reused percentages of the naive count, per pool.
pub fn count_averages(reports: &[CountReport]) -> Vec<(PoolKind, f64, f64)> {
    PoolKind::ALL
        .iter()
        .filter_map(|&kind| {
            let sel: Vec<&CountReport> = reports.iter().filter(|r| r.pool == kind).collect();
            if sel.is_empty() {
                return None;
            }
            let n = sel.len() as f64;
            Some((
                kind,
                sel.iter().map(|r| r.grouped_pct()).sum::<f64>() / n,
                sel.iter().map(|r| r.reused_pct()).sum::<f64>() / n,
            ))
        })
        .collect()
}
