//! Repeated runs, aggregation, written artifacts and configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use shotwise_core::adapt::Mode;
use shotwise_core::experiment::{
    mean_std, noise_sweep, run_experiment, ExperimentConfig, AGGREGATE_HEADER, TRACE_HEADER,
};
use shotwise_core::measurement::AllocationMethod;
use shotwise_core::PoolKind;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/hamiltonians")
        .join(format!("{name}.json"))
}

fn shots_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        hamiltonian: data("h2"),
        pool: PoolKind::Ceo,
        mode: Mode::Shots,
        allocation: AllocationMethod::Vpsr,
        budget: Some(5120),
        max_iterations: 2,
        repetitions: 6,
        seed,
        ..ExperimentConfig::default()
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<BTreeMap<String, String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect();
    (header, rows)
}

#[test]
fn single_exact_repetition_aggregates_to_itself() {
    let cfg = ExperimentConfig {
        hamiltonian: data("lih_reduced"),
        repetitions: 1,
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.aggregate.len(), result.traces[0].rows.len());
    for (agg, row) in result.aggregate.iter().zip(&result.traces[0].rows) {
        assert_eq!(agg.mean_energy, row.energy);
        assert_eq!(agg.std_energy, 0.0);
        assert_eq!(agg.mean_abs_error, row.error);
        assert_eq!(agg.mean_cumulative_shots, 0.0);
    }
    assert!(result.summary.reached_accuracy);
}

#[test]
fn reruns_are_byte_identical() {
    let a = run_experiment(&shots_config(9)).unwrap();
    let b = run_experiment(&shots_config(9)).unwrap();
    assert_eq!(a.trace_csv(), b.trace_csv());
    assert_eq!(a.aggregate_csv(), b.aggregate_csv());
    assert_eq!(a.summary_json(), b.summary_json());
    let c = run_experiment(&shots_config(10)).unwrap();
    assert_ne!(a.trace_csv(), c.trace_csv());
}

#[test]
fn aggregate_file_is_recomputable_from_trace_file() {
    let dir = scratch("recompute");
    let result = run_experiment(&shots_config(4)).unwrap();
    result.write(&dir).unwrap();
    let (th, trace) = parse_csv(&std::fs::read_to_string(dir.join("trace.csv")).unwrap());
    let (ah, agg) = parse_csv(&std::fs::read_to_string(dir.join("aggregate.csv")).unwrap());
    assert_eq!(th.join(","), TRACE_HEADER);
    assert_eq!(ah.join(","), AGGREGATE_HEADER);
    let fci = result.summary.fci_energy;
    for a in &agg {
        let n = &a["n"];
        let at_n: Vec<&BTreeMap<String, String>> = trace.iter().filter(|r| &r["n"] == n).collect();
        assert_eq!(at_n.len(), 6);
        let col = |k: &str| at_n.iter().map(|r| r[k].parse::<f64>().unwrap()).collect::<Vec<_>>();
        let get = |k: &str| a[k].parse::<f64>().unwrap();
        let (me, se, _) = mean_std(&col("energy"));
        assert!((me - get("mean_energy")).abs() <= 1e-12);
        assert!((se - get("std_energy")).abs() <= 1e-12);
        assert!(((me - fci).abs() - get("error_of_mean")).abs() <= 1e-12);
        let (ma, _, sem) = mean_std(&col("error"));
        assert!((ma - get("mean_abs_error")).abs() <= 1e-12);
        assert!((sem - get("sem_abs_error")).abs() <= 1e-12);
        let (mc, _, _) = mean_std(&col("cumulative_shots"));
        assert!((mc - get("mean_cumulative_shots")).abs() <= 1e-12 * mc.max(1.0));
        let active = at_n.iter().filter(|r| r["carried"] == "0").count();
        assert_eq!(active.to_string(), a["active"]);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["repetitions"], 6);
}

#[test]
fn trace_rows_keep_cumulative_columns_consistent() {
    let result = run_experiment(&shots_config(2)).unwrap();
    for rep in &result.rows {
        for r in rep {
            assert_eq!(r.cumulative_shots, r.cumulative_vqe + r.cumulative_grad);
            if r.carried {
                assert_eq!(r.vqe_shots + r.grad_shots + r.shots_saved, 0);
            }
        }
    }
    let s = &result.summary;
    let f = &s.final_stats.shots;
    assert!((f.cumulative_shots - f.vqe_shots - f.gradient_shots).abs() < 1e-6);
    if let Some(split) = &s.shots_to_accuracy {
        let row = &result.aggregate[split.iteration];
        assert!(row.error_of_mean <= s.chemical_accuracy);
        assert!(result.aggregate[..split.iteration]
            .iter()
            .all(|a| a.error_of_mean > s.chemical_accuracy));
        assert_eq!(split.cumulative_shots, row.mean_cumulative_shots);
    }
}

#[test]
fn zero_noise_sweep_matches_the_noiseless_run() {
    let cfg = ExperimentConfig {
        noise_levels: vec![0.0],
        compare: vec![AllocationMethod::Vpsr],
        ..shots_config(5)
    };
    let points = noise_sweep(&cfg).unwrap();
    assert_eq!(points.len(), 1);
    let plain = run_experiment(&shots_config(5)).unwrap();
    assert_eq!(points[0].result.trace_csv(), plain.trace_csv());
}

#[test]
fn toml_config_resolves_paths_and_reports_locations() {
    let dir = scratch("config");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(data("h2"), dir.join("h2.json")).unwrap();
    let text = "hamiltonian = \"h2.json\"\npool = \"qubit\"\nmode = \"shots\"\nallocation = \"vmsa\"\nbudget = 2048\nrepetitions = 3\n";
    let cfg = ExperimentConfig::from_toml_str(text, "exp.toml", &dir).unwrap();
    assert_eq!(cfg.hamiltonian, dir.join("h2.json"));
    assert_eq!(cfg.pool, PoolKind::Qubit);
    assert_eq!(cfg.allocation, AllocationMethod::Vmsa);
    assert_eq!(cfg.budget, Some(2048));
    assert_eq!(cfg.repetitions, 3);

    let err = ExperimentConfig::from_toml_str("pool = \"ceo\"\nrepetitons = 3\n", "exp.toml", &dir).unwrap_err();
    assert!(err.to_string().contains("exp.toml:2:"), "{err}");
    let err = ExperimentConfig::from_toml_str("epsilon = -1.0\n", "exp.toml", &dir).unwrap_err();
    assert!(err.to_string().contains("exp.toml:1:"), "{err}");
}
