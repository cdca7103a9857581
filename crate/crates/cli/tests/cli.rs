//! End-to-end checks of the `shotwise` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn shotwise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shotwise"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/hamiltonians")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// `(clique, shots)` pairs from the allocation table.
fn shots_column(text: &str) -> Vec<u64> {
    text.lines()
        .skip_while(|l| !l.starts_with("clique"))
        .skip(1)
        .take_while(|l| !l.starts_with("total"))
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn allocate_demo_reproduces_worked_examples() {
    let vpsr = stdout(&shotwise(&[
        "allocate-demo",
        "-n",
        "100",
        "--probe-shots",
        "10",
        "--sigmas",
        "3,1",
    ]));
    assert_eq!(shots_column(&vpsr), [58, 26]);
    assert!(vpsr.contains("eta         0.8"));
    let vmsa = stdout(&shotwise(&[
        "allocate-demo",
        "-n",
        "100",
        "--probe-shots",
        "10",
        "--sigmas",
        "3,1",
        "--method",
        "vmsa",
    ]));
    assert_eq!(shots_column(&vmsa), [70, 30]);
    let equal = stdout(&shotwise(&[
        "allocate-demo",
        "-n",
        "5120",
        "--sigmas",
        "1,1,1,1,1",
        "--method",
        "vmsa",
    ]));
    assert_eq!(shots_column(&equal), [1024; 5]);
}

#[test]
fn allocate_demo_rejects_an_unaffordable_probe() {
    let out = shotwise(&["allocate-demo", "-n", "10", "--probe-shots", "32", "--sigmas", "1,2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("probe cost"));
}

#[test]
fn count_prints_the_h2_rows() {
    let text = stdout(&shotwise(&["count", &data("h2.json")]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("molecule,n_qubits,h_terms,pool,full,grouped,reused"));
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().any(|l| l.starts_with("H2,4,15,qubit,88,13,24,")));
    assert!(lines.iter().any(|l| l.starts_with("H2,4,15,qubit_excitation,36,13,8,")));
    assert!(lines.iter().any(|l| l.starts_with("H2,4,15,ceo,60,13,16,")));
}

#[test]
fn count_with_no_pools_prints_only_the_header() {
    let text = stdout(&shotwise(&["count", &data("h2.json"), "--pools", ""]));
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            "hamiltonian = {:?}\npool = \"qubit\"\nmode = \"shots\"\nallocation = \"vmsa\"\nbudget = 2560\nrepetitions = 2\nmax_iterations = 1\noutput = \"out\"\n",
            data("h2.json")
        ),
    )
    .unwrap();
    let out = shotwise(&["run", "-c", config.to_str().unwrap(), "--pool", "ceo", "--seed", "7"]);
    stdout(&out);
    let summary: String = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("\"pool\": \"ceo\""), "{summary}");
    assert!(summary.contains("\"allocation\": \"vmsa\""));
    assert!(summary.contains("\"repetitions\": 2"));
    assert!(summary.contains("\"seed\": 7"));
    assert!(summary.contains("\"energy_budget\": 2560"));
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 2 * 2);
    assert!(dir.path().join("out/aggregate.csv").exists());
}

#[test]
fn config_errors_name_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "pool = \"ceo\"\nallocaton = \"vpsr\"\n").unwrap();
    let out = shotwise(&["run", "-c", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:2:"), "{err}");
    assert!(err.contains("allocaton"), "{err}");
}

#[test]
fn dump_pool_lists_operators_with_expansions() {
    let text = stdout(&shotwise(&[
        "dump-pool",
        "--pool",
        "qe",
        "--n-qubits",
        "4",
        "--n-electrons",
        "2",
    ]));
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("qubit_excitation(0,1->2,3)"));
    let from_file = stdout(&shotwise(&[
        "dump-pool",
        "--pool",
        "ceo",
        "--hamiltonian",
        &data("h2.json"),
    ]));
    assert_eq!(from_file.lines().count(), 5);
}

#[test]
fn noise_sweep_writes_one_directory_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let text = stdout(&shotwise(&[
        "noise-sweep",
        "--hamiltonian",
        &data("h2.json"),
        "--budget",
        "2560",
        "-r",
        "2",
        "--max-iterations",
        "1",
        "--levels",
        "0,1e-4",
        "--compare",
        "uniform,vpsr",
        "-o",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(text.lines().filter(|l| l.starts_with("p=")).count(), 4);
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for name in ["p0.0_uniform", "p0.0_vpsr", "p0.0001_uniform", "p0.0001_vpsr"] {
        assert!(out_dir.join(name).join("summary.json").exists(), "{name}");
    }
}
