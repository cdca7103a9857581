//! The ADAPT-VQE loop with measurement reuse and shot allocation.
//!
//! Each iteration `n ≥ 1` screens the pool on `|ψ^(n−1)⟩` with
//! `g_k = ⟨[H, A_k]⟩`, appends the operator with the largest |g_k| (unless
//! the gradient norm is below ε), then re-optimizes all parameters with BFGS
//! starting from the previous optimum and a zero for every new slot.
//!
//! In shot mode the energy of the optimized state is measured once more at
//! the final parameters. Those outcomes are the reported energy and are
//! cached under tag `n`; the next screen runs on the same state, so gradient
//! terms diagonal in a cached Hamiltonian-clique basis are read from the
//! cache and only the remaining terms are measured.
//!
//! With the CEO pool, selection follows a decision-via-gradient rule: the
//! single-parameter OVP(±) operators and QE singles are screened, and a
//! winning OVP is replaced by the two-parameter MVP of the same pair when
//! both OVP gradients exceed `10·ε`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::measurement::allocation::{AllocationMethod, EtaForm};
use crate::measurement::estimate::eigenvalue;
use crate::measurement::grouping::{group_qwc, GroupedObservable};
use crate::measurement::observe::{measure_observable, MeasureOptions, MeasureOutcome};
use crate::measurement::reuse::{build_reuse_map, ReuseCache, ReuseMap};
use crate::optimize::{minimize, BfgsOptions, BfgsResult, Evaluation, Termination};
use crate::pauli::{PauliString, PauliSum};
use crate::pools::{build_pool, OperatorKind, PoolKind, PoolOperator};
use crate::state::{expectation_exact, NoiseSpec, Preparation, ShotSampler, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Exact statevector expectations.
    Exact,
    /// Finite-shot estimates.
    Shots,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Shots => "shots",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "statevector" => Ok(Mode::Exact),
            "shots" | "shot" => Ok(Mode::Shots),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptConfig {
    /// Gradient-norm threshold ε.
    pub epsilon: f64,
    /// Maximum number of ADAPT iterations L.
    pub max_iterations: usize,
    pub mode: Mode,
    pub allocation: AllocationMethod,
    pub eta_form: EtaForm,
    /// Budget per Hamiltonian clique; the energy budget N defaults to this
    /// times the number of cliques and gradient budgets scale the same way.
    pub shots_per_clique: u64,
    /// Explicit energy budget N; overrides `shots_per_clique · m`.
    pub energy_budget: Option<u64>,
    /// Probe shots N0 per clique for VMSA and VPSR.
    pub probe_shots: u64,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Reuse cached energy outcomes in the gradient screen.
    pub reuse: bool,
    /// BFGS iteration cap; `None` uses the mode default.
    pub vqe_max_iterations: Option<usize>,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            epsilon: 1e-3,
            max_iterations: 30,
            mode: Mode::Exact,
            allocation: AllocationMethod::Uniform,
            eta_form: EtaForm::Corrected,
            shots_per_clique: 1024,
            energy_budget: None,
            probe_shots: 32,
            noise: NoiseSpec::none(),
            seed: 0,
            reuse: true,
            vqe_max_iterations: None,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.mode == Mode::Shots {
            if self.shots_per_clique == 0 && self.energy_budget.is_none() {
                return Err(Error::Config("shot budget must be positive".into()));
            }
            if self.allocation.uses_probe() && self.probe_shots < 2 {
                return Err(Error::Config(
                    "probe_shots must be at least 2 to estimate a variance".into(),
                ));
            }
        }
        Ok(())
    }

    fn bfgs_options(&self) -> BfgsOptions {
        let mut opts = match self.mode {
            Mode::Exact => BfgsOptions::exact(),
            Mode::Shots => BfgsOptions::noisy(),
        };
        if let Some(cap) = self.vqe_max_iterations {
            opts.max_iterations = cap;
        }
        opts
    }
}

/// Everything computed once before the loop starts.
#[derive(Debug, Clone)]
pub struct AdaptSetup<'h> {
    pub hamiltonian: &'h Hamiltonian,
    pub pool_kind: PoolKind,
    pub pool: Vec<PoolOperator>,
    /// Pool indices screened for gradients (the CEO MVPs are not screened,
    /// they are reached through their OVP pair).
    pub screened: Vec<usize>,
    /// `[H, G]` for every generator of every pool operator.
    pub commutators: Vec<Vec<PauliSum>>,
    pub h_grouped: GroupedObservable,
    /// Cliques over the union of all screened gradient terms.
    pub gradient_full: GroupedObservable,
    /// Cliques over the gradient terms no Hamiltonian clique covers.
    pub gradient_residual: GroupedObservable,
    pub reuse_map: ReuseMap,
}

impl<'h> AdaptSetup<'h> {
    pub fn new(hamiltonian: &'h Hamiltonian, pool_kind: PoolKind) -> Result<Self> {
        let pool = build_pool(pool_kind, hamiltonian.n_electrons(), hamiltonian.n_qubits())?;
        Self::with_pool(hamiltonian, pool_kind, pool)
    }

    pub fn with_pool(hamiltonian: &'h Hamiltonian, pool_kind: PoolKind, pool: Vec<PoolOperator>) -> Result<Self> {
        let n = hamiltonian.n_qubits();
        let h = &hamiltonian.operator;
        let commutators = pool
            .iter()
            .map(|op| {
                op.generators
                    .iter()
                    .map(|g| h.commutator(g))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let screened: Vec<usize> = pool
            .iter()
            .filter(|op| op.kind != OperatorKind::CeoMvp)
            .map(|op| op.id)
            .collect();

        // Union weight of a term: Σ_k |c_kt|, a proxy for its share of the
        // variance of the whole screen.
        let mut union = PauliSum::new(n);
        for &k in &screened {
            for c in &commutators[k] {
                for (p, coeff) in c.iter() {
                    union.add_term(*p, Complex64::new(coeff.norm(), 0.0))?;
                }
            }
        }
        let h_grouped = GroupedObservable::new(h);
        let reuse_map = build_reuse_map(&h_grouped.cliques, union.iter().map(|(p, _)| *p));
        let residual = PauliSum::from_terms(
            n,
            union
                .iter()
                .filter(|(p, _)| reuse_map[*p].is_none())
                .map(|(p, c)| (*p, *c)),
        )?;
        Ok(AdaptSetup {
            hamiltonian,
            pool_kind,
            pool,
            screened,
            commutators,
            h_grouped,
            gradient_full: GroupedObservable::new(&union),
            gradient_residual: GroupedObservable {
                n_qubits: n,
                constant: 0.0,
                cliques: group_qwc(&residual),
            },
            reuse_map,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Budget per clique used for every shot-based observable.
    pub fn shots_per_clique(&self, config: &AdaptConfig) -> u64 {
        match config.energy_budget {
            Some(n) => (n / self.h_grouped.n_cliques().max(1) as u64).max(1),
            None => config.shots_per_clique,
        }
    }

    pub fn energy_budget(&self, config: &AdaptConfig) -> u64 {
        config
            .energy_budget
            .unwrap_or(config.shots_per_clique * self.h_grouped.n_cliques() as u64)
    }
}

/// The growing ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzState {
    pub n_qubits: usize,
    /// Basis index of the reference determinant.
    pub reference: usize,
    pub operators: Vec<PoolOperator>,
    /// Parameters, concatenated in operator order.
    pub theta: Vec<f64>,
}

impl AnsatzState {
    pub fn new(n_qubits: usize, reference: usize) -> Self {
        AnsatzState {
            n_qubits,
            reference,
            operators: Vec::new(),
            theta: Vec::new(),
        }
    }

    pub fn push(&mut self, op: PoolOperator) {
        self.theta.extend(std::iter::repeat_n(0.0, op.n_parameters()));
        self.operators.push(op);
    }

    pub fn preparation<'a>(&'a self, theta: &'a [f64]) -> Result<Preparation<'a>> {
        Preparation::new(self.n_qubits, self.reference, &self.operators, theta)
    }

    pub fn state(&self) -> Result<Statevector> {
        self.preparation(&self.theta)?.state()
    }

    pub fn state_at(&self, theta: &[f64]) -> Result<Statevector> {
        self.preparation(theta)?.state()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientEntry {
    /// Pool index.
    pub operator: usize,
    /// One gradient per generator.
    pub g: Vec<f64>,
}

impl GradientEntry {
    pub fn score(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub entries: Vec<GradientEntry>,
    /// `sqrt(Σ g²)` over every screened generator.
    pub norm: f64,
    pub shots_spent: u64,
    pub shots_saved: u64,
}

impl GradientReport {
    fn from_entries(entries: Vec<GradientEntry>, shots_spent: u64, shots_saved: u64) -> Self {
        let norm = entries.iter().flat_map(|e| &e.g).map(|g| g * g).sum::<f64>().sqrt();
        GradientReport {
            entries,
            norm,
            shots_spent,
            shots_saved,
        }
    }

    pub fn gradient_of(&self, operator: usize) -> Option<&GradientEntry> {
        self.entries.iter().find(|e| e.operator == operator)
    }
}

/// Exact energy-measurement outcomes kept for reuse in exact mode: the
/// outcome distribution of every Hamiltonian clique basis.
#[derive(Debug, Clone, Default)]
struct ExactCache {
    tag: Option<usize>,
    distributions: BTreeMap<usize, Vec<f64>>,
}

impl ExactCache {
    fn store(&mut self, tag: usize, setup: &AdaptSetup<'_>, psi: &Statevector) -> Result<()> {
        self.tag = Some(tag);
        self.distributions.clear();
        for cl in &setup.h_grouped.cliques {
            self.distributions.insert(cl.id, psi.basis_probabilities(&cl.basis)?);
        }
        Ok(())
    }

    fn term_value(&self, tag: usize, clique: usize, term: &PauliString) -> Option<f64> {
        if self.tag != Some(tag) {
            return None;
        }
        let probs = self.distributions.get(&clique)?;
        Some(probs.iter().enumerate().map(|(b, p)| p * eigenvalue(term, b)).sum())
    }
}

/// Reuse state carried between iterations.
#[derive(Debug, Clone, Default)]
pub struct ReuseState {
    pub records: ReuseCache,
    exact: ExactCache,
}

fn assemble(setup: &AdaptSetup<'_>, term_value: &BTreeMap<PauliString, f64>) -> Vec<GradientEntry> {
    setup
        .screened
        .iter()
        .map(|&k| GradientEntry {
            operator: k,
            g: setup.commutators[k]
                .iter()
                .map(|c| c.iter().map(|(p, coeff)| coeff.re * term_value[p]).sum())
                .collect(),
        })
        .collect()
}

fn term_means(outcome: &MeasureOutcome, grouped: &GroupedObservable, into: &mut BTreeMap<PauliString, f64>) {
    for (cl, est) in grouped.cliques.iter().zip(&outcome.estimates) {
        for ((p, _), v) in cl.members.iter().zip(&est.term_means) {
            into.insert(*p, *v);
        }
    }
}

/// Gradient screen on the state `ansatz` (tagged `tag`).
pub fn compute_gradients(
    setup: &AdaptSetup<'_>,
    ansatz: &AnsatzState,
    config: &AdaptConfig,
    tag: usize,
    reuse: &ReuseState,
    rng: &mut ChaCha8Rng,
) -> Result<GradientReport> {
    match config.mode {
        Mode::Exact => {
            let psi = ansatz.state()?;
            if config.reuse && reuse.exact.tag == Some(tag) {
                let mut values = BTreeMap::new();
                for (t, hit) in &setup.reuse_map {
                    let v = match hit.and_then(|c| reuse.exact.term_value(tag, c, t)) {
                        Some(v) => v,
                        None => psi.expectation_pauli(t)?.re,
                    };
                    values.insert(*t, v);
                }
                Ok(GradientReport::from_entries(assemble(setup, &values), 0, 0))
            } else {
                let entries = setup
                    .screened
                    .iter()
                    .map(|&k| {
                        let g = setup.commutators[k]
                            .iter()
                            .map(|c| expectation_exact(&psi, c))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(GradientEntry { operator: k, g })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GradientReport::from_entries(entries, 0, 0))
            }
        }
        Mode::Shots => {
            let spc = setup.shots_per_clique(config);
            let sampler = ShotSampler::new(ansatz.preparation(&ansatz.theta)?, config.noise)?;
            let use_cache = config.reuse && reuse.records.tag() == Some(tag);
            let grouped = if use_cache {
                &setup.gradient_residual
            } else {
                &setup.gradient_full
            };
            let mut values = BTreeMap::new();
            let mut spent = 0;
            if grouped.n_cliques() > 0 {
                let opts = MeasureOptions {
                    method: config.allocation,
                    budget: spc * grouped.n_cliques() as u64,
                    probe_shots: config.probe_shots.min(spc),
                    eta_form: config.eta_form,
                    tag,
                };
                let outcome = measure_observable(&sampler, grouped, &opts, rng, None)?;
                spent = outcome.shots_spent;
                term_means(&outcome, grouped, &mut values);
            }
            let mut saved = 0;
            if use_cache {
                for (t, hit) in &setup.reuse_map {
                    if let Some(c) = hit {
                        let rec = reuse
                            .records
                            .get(*c, tag)
                            .expect("cache holds every Hamiltonian clique for its tag");
                        values.insert(*t, rec.term_mean(t).expect("reuse map guarantees coverage"));
                    }
                }
                saved = spc * (setup.gradient_full.n_cliques() - setup.gradient_residual.n_cliques()) as u64;
            }
            Ok(GradientReport::from_entries(assemble(setup, &values), spent, saved))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Pool index of the operator to append.
    Append(usize),
    Terminate,
}

/// Argmax of the operator scores (lowest pool index on ties), or terminate
/// when the gradient norm is at most ε. For CEO pools the winning OVP is
/// promoted to its MVP when both OVP gradients of the pair exceed `10·ε`.
pub fn select_operator(setup: &AdaptSetup<'_>, report: &GradientReport, config: &AdaptConfig) -> Selection {
    if report.norm.is_nan() || report.norm <= config.epsilon || report.entries.is_empty() {
        return Selection::Terminate;
    }
    let mut best = &report.entries[0];
    for e in &report.entries[1..] {
        if e.score() > best.score() {
            best = e;
        }
    }
    let winner = &setup.pool[best.operator];
    if let (Some(family), OperatorKind::CeoOvpPlus | OperatorKind::CeoOvpMinus) = (winner.family, winner.kind) {
        let member = |kind: OperatorKind| setup.pool.iter().find(|o| o.family == Some(family) && o.kind == kind);
        let score = |kind: OperatorKind| {
            member(kind)
                .and_then(|o| report.gradient_of(o.id))
                .map(|e| e.score())
                .unwrap_or(0.0)
        };
        let both = score(OperatorKind::CeoOvpPlus).min(score(OperatorKind::CeoOvpMinus));
        if both > 10.0 * config.epsilon {
            if let Some(mvp) = member(OperatorKind::CeoMvp) {
                return Selection::Append(mvp.id);
            }
        }
    }
    Selection::Append(best.operator)
}

/// Result of one inner optimization.
#[derive(Debug, Clone)]
pub struct VqeOutcome {
    /// Reported energy: exact in exact mode, a fresh measurement at the final
    /// parameters in shot mode.
    pub energy: f64,
    pub std_error: f64,
    pub theta: Vec<f64>,
    pub shots: u64,
    pub bfgs: BfgsResult,
    /// Outcomes of the final energy measurement (shot mode).
    pub records: Vec<crate::measurement::estimate::MeasurementRecord>,
}

fn measure_energy(
    setup: &AdaptSetup<'_>,
    ansatz: &AnsatzState,
    theta: &[f64],
    config: &AdaptConfig,
    tag: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MeasureOutcome> {
    let sampler = ShotSampler::new(ansatz.preparation(theta)?, config.noise)?;
    let spc = setup.shots_per_clique(config);
    let opts = MeasureOptions {
        method: config.allocation,
        budget: setup.energy_budget(config),
        probe_shots: config.probe_shots.min(spc),
        eta_form: config.eta_form,
        tag,
    };
    measure_observable(&sampler, &setup.h_grouped, &opts, rng, None)
}

/// Optimizes all parameters of `ansatz` starting from its current `theta`.
pub fn vqe_optimize(
    setup: &AdaptSetup<'_>,
    ansatz: &AnsatzState,
    config: &AdaptConfig,
    tag: usize,
    rng: &mut ChaCha8Rng,
) -> Result<VqeOutcome> {
    let opts = config.bfgs_options();
    let h = &setup.hamiltonian.operator;
    match config.mode {
        Mode::Exact => {
            let mut failure = None;
            let bfgs = minimize(
                |theta: &[f64]| match ansatz.state_at(theta).and_then(|psi| expectation_exact(&psi, h)) {
                    Ok(e) => Evaluation::exact(e),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Evaluation::exact(f64::INFINITY)
                    }
                },
                &ansatz.theta,
                &opts,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let energy = expectation_exact(&ansatz.state_at(&bfgs.x)?, h)?;
            Ok(VqeOutcome {
                energy,
                std_error: 0.0,
                theta: bfgs.x.clone(),
                shots: 0,
                bfgs,
                records: Vec::new(),
            })
        }
        Mode::Shots => {
            let mut failure = None;
            let bfgs = minimize(
                |theta: &[f64]| match measure_energy(setup, ansatz, theta, config, tag, rng) {
                    Ok(o) => Evaluation {
                        value: o.value,
                        std_error: o.std_error,
                        shots: o.shots_spent,
                    },
                    Err(e) => {
                        failure.get_or_insert(e);
                        Evaluation::exact(f64::INFINITY)
                    }
                },
                &ansatz.theta,
                &opts,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let last = measure_energy(setup, ansatz, &bfgs.x, config, tag, rng)?;
            Ok(VqeOutcome {
                energy: last.value,
                std_error: last.std_error,
                theta: bfgs.x.clone(),
                shots: bfgs.shots + last.shots_spent,
                bfgs,
                records: last.records,
            })
        }
    }
}

/// One row of the run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub energy: f64,
    pub error: f64,
    /// Gradient norm of the screen performed in this iteration (NaN at n = 0).
    pub gradient_norm: f64,
    /// Pool index of the appended operator, if any.
    pub selected: Option<usize>,
    pub selected_label: String,
    pub n_parameters: usize,
    pub vqe_shots: u64,
    pub grad_shots: u64,
    pub shots_saved: u64,
    pub cumulative_shots: u64,
    pub vqe_iterations: usize,
    /// False if the inner optimizer hit its iteration cap.
    pub vqe_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub molecule: String,
    pub pool: PoolKind,
    pub fci_energy: f64,
    pub rows: Vec<IterationRecord>,
    /// True when the loop stopped on the gradient threshold, false when it
    /// ran out of iterations.
    pub terminated_by_gradient: bool,
    pub theta: Vec<f64>,
    pub selected_labels: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunTrace {
    pub fn final_row(&self) -> &IterationRecord {
        self.rows.last().expect("trace always holds the reference row")
    }

    pub fn total_shots(&self) -> u64 {
        self.final_row().cumulative_shots
    }

    /// First iteration whose energy error is within `threshold`.
    pub fn first_within(&self, threshold: f64) -> Option<&IterationRecord> {
        self.rows.iter().find(|r| r.error <= threshold)
    }
}

/// Runs the full loop. Every random draw comes from one generator seeded
/// with `config.seed`, so identical inputs reproduce identical traces.
pub fn run_adapt(setup: &AdaptSetup<'_>, config: &AdaptConfig) -> Result<RunTrace> {
    config.validate()?;
    let ham = setup.hamiltonian;
    let fci = ham.fci_energy();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ansatz = AnsatzState::new(ham.n_qubits(), ham.hf_index());
    let mut reuse = ReuseState::default();
    let mut warnings = Vec::new();
    let mut rows = Vec::new();

    // Iteration 0: energy of the reference state.
    let (e0, shots0) = match config.mode {
        Mode::Exact => {
            let psi = ansatz.state()?;
            if config.reuse {
                reuse.exact.store(0, setup, &psi)?;
            }
            (expectation_exact(&psi, &ham.operator)?, 0)
        }
        Mode::Shots => {
            let out = measure_energy(setup, &ansatz, &[], config, 0, &mut rng)?;
            if config.reuse {
                reuse.records.store(0, out.records.clone());
            }
            (out.value, out.shots_spent)
        }
    };
    let mut cumulative = shots0;
    let mut energy = e0;
    rows.push(IterationRecord {
        n: 0,
        energy: e0,
        error: (e0 - fci).abs(),
        gradient_norm: f64::NAN,
        selected: None,
        selected_label: String::new(),
        n_parameters: 0,
        vqe_shots: shots0,
        grad_shots: 0,
        shots_saved: 0,
        cumulative_shots: cumulative,
        vqe_iterations: 0,
        vqe_converged: true,
    });

    let mut terminated_by_gradient = false;
    for n in 1..=config.max_iterations {
        let report = compute_gradients(setup, &ansatz, config, n - 1, &reuse, &mut rng)?;
        cumulative += report.shots_spent;
        let selection = select_operator(setup, &report, config);
        let Selection::Append(k) = selection else {
            rows.push(IterationRecord {
                n,
                energy,
                error: (energy - fci).abs(),
                gradient_norm: report.norm,
                selected: None,
                selected_label: String::new(),
                n_parameters: ansatz.theta.len(),
                vqe_shots: 0,
                grad_shots: report.shots_spent,
                shots_saved: report.shots_saved,
                cumulative_shots: cumulative,
                vqe_iterations: 0,
                vqe_converged: true,
            });
            terminated_by_gradient = true;
            break;
        };
        ansatz.push(setup.pool[k].clone());
        let vqe = vqe_optimize(setup, &ansatz, config, n, &mut rng)?;
        if vqe.bfgs.termination == Termination::MaxIterations {
            warnings.push(format!("iteration {n}: optimizer reached its iteration cap"));
        }
        ansatz.theta = vqe.theta.clone();
        energy = vqe.energy;
        cumulative += vqe.shots;
        if config.reuse {
            match config.mode {
                Mode::Exact => reuse.exact.store(n, setup, &ansatz.state()?)?,
                Mode::Shots => reuse.records.store(n, vqe.records.clone()),
            }
        }
        rows.push(IterationRecord {
            n,
            energy,
            error: (energy - fci).abs(),
            gradient_norm: report.norm,
            selected: Some(k),
            selected_label: setup.pool[k].label(),
            n_parameters: ansatz.theta.len(),
            vqe_shots: vqe.shots,
            grad_shots: report.shots_spent,
            shots_saved: report.shots_saved,
            cumulative_shots: cumulative,
            vqe_iterations: vqe.bfgs.iterations,
            vqe_converged: vqe.bfgs.termination != Termination::MaxIterations,
        });
    }

    Ok(RunTrace {
        molecule: ham.molecule().to_string(),
        pool: setup.pool_kind,
        fci_energy: fci,
        rows,
        terminated_by_gradient,
        theta: ansatz.theta.clone(),
        selected_labels: ansatz.operators.iter().map(|o| o.label()).collect(),
        warnings,
    })
}
