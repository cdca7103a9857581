//! Shot-based estimation of a grouped observable.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measurement::allocation::{allocate_with, AllocationMethod, AllocationPlan, AllocationRequest, EtaForm};
use crate::measurement::estimate::{estimate_from_histogram, CliqueEstimate, MeasurementRecord};
use crate::measurement::grouping::GroupedObservable;
use crate::measurement::reuse::ReuseCache;
use crate::state::ShotSource;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub method: AllocationMethod,
    /// Total budget N for all cliques of the observable.
    pub budget: u64,
    /// Probe shots N0 per clique for VMSA and VPSR.
    pub probe_shots: u64,
    pub eta_form: EtaForm,
    /// Tag of the state being measured, stored on the produced records and
    /// used to match cached records.
    pub tag: usize,
}

#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    /// Estimated expectation value, identity constant included.
    pub value: f64,
    /// Standard error of `value` from the per-clique sample variances.
    pub std_error: f64,
    /// Allocation over the measured cliques; `None` if all came from cache.
    pub plan: Option<AllocationPlan>,
    /// New records, one per measured clique.
    pub records: Vec<MeasurementRecord>,
    /// One estimate per clique of the observable.
    pub estimates: Vec<CliqueEstimate>,
    /// Per clique: evaluated from a cached record.
    pub from_cache: Vec<bool>,
    pub shots_spent: u64,
    pub shots_saved: u64,
}

/// Measures every clique of `obs` on `source`.
///
/// Without reuse, VMSA and VPSR first spend `N0` probe shots per clique to
/// estimate σ, allocate, then top each clique up to its `N_i`. Uniform skips
/// the probe.
///
/// The probe only informs the allocation. Since `N_i` depends on the probe
/// outcomes, folding them into the mean would bias it (a near-deterministic
/// clique whose probe happens to be constant keeps an extreme estimate), so
/// the mean comes from the top-up shots alone whenever there are at least two
/// of them. For the same reason an empirical σ of a degenerate probe is
/// raised to `range / N0`, with `range = 2 Σ|c|` the clique's eigenvalue
/// spread, so no clique is starved on the strength of a lucky probe.
///
/// With a cache, a clique whose members are all diagonal in the basis of a
/// record taken on the same state tag is evaluated from that record at no
/// cost (probe included). The remaining cliques share the budget
/// `⌊N · m_measured / m⌋`, and the difference is reported as saved.
pub fn measure_observable<S, R>(
    source: &S,
    obs: &GroupedObservable,
    opts: &MeasureOptions,
    rng: &mut R,
    cache: Option<&ReuseCache>,
) -> Result<MeasureOutcome>
where
    S: ShotSource,
    R: Rng + ?Sized,
{
    let m = obs.cliques.len();
    let mut estimates: Vec<Option<CliqueEstimate>> = vec![None; m];
    let mut from_cache = vec![false; m];
    if let Some(cache) = cache {
        for (i, cl) in obs.cliques.iter().enumerate() {
            if let Some(rec) = cache.find_covering(cl.members.iter().map(|(p, _)| p), opts.tag) {
                estimates[i] = Some(estimate_from_histogram(&rec.histogram, cl)?);
                from_cache[i] = true;
            }
        }
    }
    let todo: Vec<usize> = (0..m).filter(|&i| !from_cache[i]).collect();
    let budget = if todo.len() == m {
        opts.budget
    } else {
        opts.budget * todo.len() as u64 / m as u64
    };

    let mut records = Vec::with_capacity(todo.len());
    let mut plan = None;
    let mut spent = 0;
    if !todo.is_empty() {
        let probe = if opts.method.uses_probe() { opts.probe_shots } else { 0 };
        let mut hists = Vec::with_capacity(todo.len());
        let mut sigmas = Vec::with_capacity(todo.len());
        for &i in &todo {
            let cl = &obs.cliques[i];
            let h = source.sample(&cl.basis, probe, rng)?;
            sigmas.push(if probe >= 2 {
                let range = 2.0 * cl.members.iter().map(|(_, c)| c.abs()).sum::<f64>();
                estimate_from_histogram(&h, cl)?.std_dev().max(range / probe as f64)
            } else {
                0.0
            });
            hists.push(h);
        }
        let sizes: Vec<usize> = todo.iter().map(|&i| obs.cliques[i].len()).collect();
        let p = allocate_with(&AllocationRequest {
            method: opts.method,
            budget,
            probe_shots: probe,
            sigmas: &sigmas,
            clique_sizes: Some(&sizes),
            eta_form: opts.eta_form,
        })?;
        for (k, &i) in todo.iter().enumerate() {
            let cl = &obs.cliques[i];
            let n_i = p.shots[k];
            if n_i == 0 {
                return Err(Error::Allocation(format!(
                    "clique {} receives no shots from a budget of {budget}",
                    cl.id
                )));
            }
            let top_up = n_i.saturating_sub(probe);
            let extra = source.sample(&cl.basis, top_up, rng)?;
            let rec = if top_up >= 2 {
                MeasurementRecord::new(cl.id, cl.basis, extra, opts.tag)
            } else {
                let mut rec = MeasurementRecord::new(cl.id, cl.basis, std::mem::take(&mut hists[k]), opts.tag);
                rec.merge(&extra);
                rec
            };
            estimates[i] = Some(estimate_from_histogram(&rec.histogram, cl)?);
            spent += probe.min(n_i) + top_up;
            records.push(rec);
        }
        plan = Some(p);
    }

    let estimates: Vec<CliqueEstimate> = estimates
        .into_iter()
        .map(|e| e.expect("every clique estimated"))
        .collect();
    let value = obs.constant + estimates.iter().map(|e| e.mean).sum::<f64>();
    let std_error = estimates.iter().map(|e| e.std_error().powi(2)).sum::<f64>().sqrt();
    Ok(MeasureOutcome {
        value,
        std_error,
        plan,
        records,
        estimates,
        from_cache,
        shots_spent: spent,
        shots_saved: opts.budget - budget,
    })
}
