//! `shotwise` command-line harness.
//!
//! Every experiment setting can come from a TOML file (`--config`) or a flag;
//! flags override file values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use shotwise_core::adapt::Mode;
use shotwise_core::experiment::{
    count_averages, count_csv, count_reports, noise_sweep, run_experiment, sweep_csv, ExperimentConfig,
};
use shotwise_core::measurement::{allocate_with, AllocationMethod, AllocationRequest, EtaForm};
use shotwise_core::{build_pool, load_hamiltonian, pools::dump_pool, NoiseChannels, PoolKind};

#[derive(Parser)]
#[command(name = "shotwise", version, about = "Shot-efficient ADAPT-VQE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run R seeded repetitions and write trace.csv, aggregate.csv, summary.json.
    Run(ExperimentArgs),
    /// Count Pauli strings measured per gradient screen (naive, grouped, reused).
    Count(CountArgs),
    /// Print the shot allocation for given clique standard deviations.
    AllocateDemo(AllocateArgs),
    /// Repeat `run` at several noise levels and allocation methods.
    NoiseSweep(SweepArgs),
    /// List the operators of a pool with their Pauli expansions.
    DumpPool(DumpArgs),
}

#[derive(Args, Debug, Default)]
struct ExperimentArgs {
    /// TOML config file; flags given here override its values.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Hamiltonian JSON file.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// fermionic, qubit, qubit_excitation (qe), or ceo.
    #[arg(long)]
    pool: Option<PoolKind>,
    /// exact or shots.
    #[arg(long)]
    mode: Option<Mode>,
    /// uniform, vmsa, or vpsr.
    #[arg(long)]
    allocation: Option<AllocationMethod>,
    /// corrected or as_printed.
    #[arg(long)]
    eta_form: Option<EtaForm>,
    /// Energy budget N per evaluation.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    shots_per_clique: Option<u64>,
    /// Probe shots N0 per clique.
    #[arg(long)]
    probe_shots: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Maximum number of ADAPT iterations L.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    noise_p: Option<f64>,
    /// Comma-separated subset of gate,reset,phase,measurement, or all / none.
    #[arg(long)]
    noise_channels: Option<NoiseChannels>,
    #[arg(short = 'r', long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enable or disable measurement reuse.
    #[arg(long)]
    reuse: Option<bool>,
    #[arg(long)]
    vqe_max_iterations: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated noise probabilities.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Comma-separated allocation methods to compare at each level.
    #[arg(long, value_delimiter = ',')]
    compare: Option<Vec<AllocationMethod>>,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Hamiltonian JSON file or a directory of them.
    path: PathBuf,
    /// Comma-separated pools; an empty value gives a header-only table.
    #[arg(long, value_delimiter = ',', default_value = "fermionic,qubit,qubit_excitation,ceo")]
    pools: Vec<String>,
    /// Write the CSV here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AllocateArgs {
    /// Total budget N.
    #[arg(short = 'n', long)]
    budget: u64,
    /// Probe shots N0 per clique.
    #[arg(long, default_value_t = 32)]
    probe_shots: u64,
    /// Comma-separated per-clique standard deviations.
    #[arg(long, value_delimiter = ',', required = true)]
    sigmas: Vec<f64>,
    #[arg(long, default_value = "vpsr")]
    method: AllocationMethod,
    #[arg(long, default_value = "corrected")]
    eta_form: EtaForm,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long)]
    pool: PoolKind,
    /// Take qubit and electron counts from this Hamiltonian file.
    #[arg(long, conflicts_with_all = ["n_qubits", "n_electrons"])]
    hamiltonian: Option<PathBuf>,
    #[arg(long, requires = "n_electrons")]
    n_qubits: Option<usize>,
    #[arg(long, requires = "n_qubits")]
    n_electrons: Option<usize>,
}

impl ExperimentArgs {
    /// File values (if any) with flag overrides applied.
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            hamiltonian,
            pool,
            mode,
            allocation,
            eta_form,
            shots_per_clique,
            probe_shots,
            epsilon,
            max_iterations,
            noise_p,
            noise_channels,
            repetitions,
            seed,
            reuse,
            output
        );
        if let Some(b) = self.budget {
            c.budget = Some(b);
        }
        if let Some(v) = self.vqe_max_iterations {
            c.vqe_max_iterations = Some(v);
        }
        c.validate()?;
        Ok(c)
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(args: &ExperimentArgs) -> Result<()> {
    let config = args.resolve()?;
    let result = run_experiment(&config)?;
    result.write(&config.output)?;
    let s = &result.summary;
    match &s.shots_to_accuracy {
        Some(split) => {
            println!(
            "{} {} {}: chemical accuracy at iteration {} after {:.0} shots (vqe {:.0}, gradient {:.0}, saved {:.0})",
            s.molecule, s.pool, s.allocation, split.iteration, split.cumulative_shots, split.vqe_shots,
            split.gradient_shots, split.saved_shots
        )
        }
        None => println!(
            "{} {} {}: chemical accuracy not reached; final error of the mean {:.3e} Ha",
            s.molecule, s.pool, s.allocation, s.final_stats.error_of_mean
        ),
    }
    println!("wrote {}", config.output.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut config = args.experiment.resolve()?;
    if let Some(levels) = &args.levels {
        config.noise_levels = levels.clone();
    }
    if let Some(methods) = &args.compare {
        config.compare = methods.clone();
    }
    if config.noise_levels.is_empty() {
        bail!("no noise levels given");
    }
    let points = noise_sweep(&config)?;
    for p in &points {
        p.result.write(&config.output.join(p.dir_name()))?;
        println!(
            "p={} {}: {}",
            p.p,
            p.allocation,
            if p.result.summary.reached_accuracy {
                "chemical accuracy reached"
            } else {
                "chemical accuracy NOT reached"
            }
        );
    }
    write(&config.output.join("sweep.csv"), &sweep_csv(&points))?;
    println!("wrote {}", config.output.display());
    Ok(())
}

fn cmd_count(args: &CountArgs) -> Result<()> {
    let pools = args
        .pools
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<shotwise_core::Result<Vec<PoolKind>>>()?;
    let reports = count_reports(&args.path, &pools)?;
    let csv = count_csv(&reports);
    match &args.output {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    for (pool, grouped, reused) in count_averages(&reports) {
        eprintln!("mean over molecules, {pool}: grouped {grouped:.2}% of naive, reused {reused:.2}% of naive");
    }
    Ok(())
}

fn cmd_allocate(args: &AllocateArgs) -> Result<()> {
    let plan = allocate_with(&AllocationRequest {
        method: args.method,
        budget: args.budget,
        probe_shots: args.probe_shots,
        sigmas: &args.sigmas,
        clique_sizes: None,
        eta_form: args.eta_form,
    })?;
    println!("{plan}");
    Ok(())
}

fn cmd_dump(args: &DumpArgs) -> Result<()> {
    let (ne, nq) = match (&args.hamiltonian, args.n_electrons, args.n_qubits) {
        (Some(path), _, _) => {
            let h = load_hamiltonian(path)?;
            (h.n_electrons(), h.n_qubits())
        }
        (None, Some(ne), Some(nq)) => (ne, nq),
        _ => bail!("give --hamiltonian or both --n-electrons and --n-qubits"),
    };
    print!("{}", dump_pool(&build_pool(args.pool, ne, nq)?));
    Ok(())
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Run(a) => cmd_run(&a),
        Command::Count(a) => cmd_count(&a),
        Command::AllocateDemo(a) => cmd_allocate(&a),
        Command::NoiseSweep(a) => cmd_sweep(&a),
        Command::DumpPool(a) => cmd_dump(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
