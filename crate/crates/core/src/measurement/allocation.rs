//! Distributing a shot budget over measurement cliques.
//!
//! - Uniform: `N_i = ⌊N/m⌋`, leftover shots go one each to the largest cliques.
//! - VMSA: `N_i = N0 + σ_i/Σσ · (N − N0·m)`, floored, leftover shots go one
//!   each to the cliques with the largest σ, so `Σ N_i = N`.
//! - VPSR: `N_i = N0 + η · σ_i/Σσ · (N − N0·m)`, floored, `Σ N_i ≤ N`, with
//!   `η = (Σσ)² / (m · Σσ²)` by default. [`EtaForm::AsPrinted`] selects the
//!   literal `Σσ² / (m · Σσ²) = 1/m` variant instead.
//!
//! A clique whose probe σ is zero receives only its `N0` probe shots; if all
//! σ are zero the uniform split is used.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMethod {
    Uniform,
    Vmsa,
    Vpsr,
}

impl AllocationMethod {
    pub const ALL: [AllocationMethod; 3] = [
        AllocationMethod::Uniform,
        AllocationMethod::Vmsa,
        AllocationMethod::Vpsr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AllocationMethod::Uniform => "uniform",
            AllocationMethod::Vmsa => "vmsa",
            AllocationMethod::Vpsr => "vpsr",
        }
    }

    /// Whether the method needs probe shots to estimate σ.
    pub fn uses_probe(self) -> bool {
        !matches!(self, AllocationMethod::Uniform)
    }
}

impl fmt::Display for AllocationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(AllocationMethod::Uniform),
            "vmsa" => Ok(AllocationMethod::Vmsa),
            "vpsr" => Ok(AllocationMethod::Vpsr),
            other => Err(Error::Allocation(format!("unknown allocation method {other:?}"))),
        }
    }
}

/// Which expression is used for the VPSR shrink factor η.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaForm {
    /// `(Σσ)² / (m · Σσ²)`, which is ≤ 1 by Cauchy–Schwarz.
    #[default]
    Corrected,
    /// `Σσ² / (m · Σσ²)`, identically `1/m`.
    AsPrinted,
}

impl FromStr for EtaForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "corrected" => Ok(EtaForm::Corrected),
            "as_printed" | "printed" => Ok(EtaForm::AsPrinted),
            other => Err(Error::Allocation(format!("unknown eta form {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub method: AllocationMethod,
    /// Total budget N.
    pub budget: u64,
    /// Probe shots per clique N0 (0 for uniform).
    pub probe_shots: u64,
    /// Shots per clique N_i, probe shots included.
    pub shots: Vec<u64>,
    pub sigmas: Vec<f64>,
    /// VPSR shrink factor.
    pub eta: Option<f64>,
    /// Estimator variance `Σ σ_i² / N_i` reached by this plan, reported for
    /// reference; it does not influence `shots`.
    pub delta: Option<f64>,
    /// True when every σ was zero and the uniform split was used instead.
    pub uniform_fallback: bool,
}

impl AllocationPlan {
    pub fn total(&self) -> u64 {
        self.shots.iter().sum()
    }
}

impl fmt::Display for AllocationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method      {}", self.method)?;
        writeln!(f, "budget N    {}", self.budget)?;
        writeln!(f, "probe N0    {}", self.probe_shots)?;
        if let Some(eta) = self.eta {
            writeln!(f, "eta         {eta}")?;
        }
        if let Some(delta) = self.delta {
            writeln!(f, "delta       {delta}")?;
        }
        if self.uniform_fallback {
            writeln!(f, "note        all sigma zero, uniform split used")?;
        }
        writeln!(f, "clique  sigma  shots")?;
        for (i, n) in self.shots.iter().enumerate() {
            let s = self.sigmas.get(i).copied().unwrap_or(f64::NAN);
            writeln!(f, "{i:>6}  {s}  {n}")?;
        }
        write!(f, "total       {}", self.total())
    }
}

/// Full allocation input.
#[derive(Debug, Clone)]
pub struct AllocationRequest<'a> {
    pub method: AllocationMethod,
    pub budget: u64,
    pub probe_shots: u64,
    pub sigmas: &'a [f64],
    /// Clique sizes, used to order leftover shots in the uniform split.
    pub clique_sizes: Option<&'a [usize]>,
    pub eta_form: EtaForm,
}

/// Allocation with the default η form and index-ordered uniform leftovers.
pub fn allocate(method: AllocationMethod, budget: u64, probe_shots: u64, sigmas: &[f64]) -> Result<AllocationPlan> {
    allocate_with(&AllocationRequest {
        method,
        budget,
        probe_shots,
        sigmas,
        clique_sizes: None,
        eta_form: EtaForm::Corrected,
    })
}

/// Indices sorted by descending key, ties by ascending index.
fn descending_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    idx
}

fn uniform_split(budget: u64, m: usize, sizes: Option<&[usize]>) -> Vec<u64> {
    let base = budget / m as u64;
    let mut shots = vec![base; m];
    let rem = (budget - base * m as u64) as usize;
    let keys: Vec<f64> = match sizes {
        Some(s) => s.iter().map(|&x| x as f64).collect(),
        None => vec![0.0; m],
    };
    for &i in descending_order(&keys).iter().take(rem) {
        shots[i] += 1;
    }
    shots
}

pub fn allocate_with(req: &AllocationRequest<'_>) -> Result<AllocationPlan> {
    let m = req.sigmas.len();
    if m == 0 {
        return Err(Error::Allocation("no cliques to allocate shots to".into()));
    }
    if let Some(sizes) = req.clique_sizes {
        if sizes.len() != m {
            return Err(Error::Allocation(format!(
                "{} clique sizes for {m} sigmas",
                sizes.len()
            )));
        }
    }
    if let Some(s) = req.sigmas.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::Allocation(format!("invalid standard deviation {s}")));
    }
    let mut plan = AllocationPlan {
        method: req.method,
        budget: req.budget,
        probe_shots: if req.method.uses_probe() { req.probe_shots } else { 0 },
        shots: Vec::new(),
        sigmas: req.sigmas.to_vec(),
        eta: None,
        delta: None,
        uniform_fallback: false,
    };
    if req.method == AllocationMethod::Uniform {
        plan.shots = uniform_split(req.budget, m, req.clique_sizes);
        plan.delta = achieved_variance(&plan);
        return Ok(plan);
    }

    let probe_cost = req.probe_shots.saturating_mul(m as u64);
    if probe_cost > req.budget {
        return Err(Error::Allocation(format!(
            "budget {} is smaller than the probe cost {} ({} cliques x {} shots)",
            req.budget, probe_cost, m, req.probe_shots
        )));
    }
    let sum: f64 = req.sigmas.iter().sum();
    let sum_sq: f64 = req.sigmas.iter().map(|s| s * s).sum();
    if sum == 0.0 {
        plan.uniform_fallback = true;
        plan.shots = uniform_split(req.budget, m, req.clique_sizes);
        if req.method == AllocationMethod::Vpsr {
            plan.eta = Some(1.0);
        }
        return Ok(plan);
    }

    let eta = match req.method {
        AllocationMethod::Vmsa => 1.0,
        _ => match req.eta_form {
            EtaForm::Corrected => (sum * sum / (m as f64 * sum_sq)).min(1.0),
            EtaForm::AsPrinted => sum_sq / (m as f64 * sum_sq),
        },
    };
    let spare = (req.budget - probe_cost) as f64;
    let mut shots: Vec<u64> = req
        .sigmas
        .iter()
        .map(|s| req.probe_shots + (eta * s / sum * spare).floor() as u64)
        .collect();
    if req.method == AllocationMethod::Vmsa {
        let assigned: u64 = shots.iter().sum();
        let rem = req.budget.saturating_sub(assigned) as usize;
        let order = descending_order(req.sigmas);
        for &i in order.iter().cycle().take(rem) {
            shots[i] += 1;
        }
    } else {
        plan.eta = Some(eta);
    }
    plan.shots = shots;
    plan.delta = achieved_variance(&plan);
    Ok(plan)
}

fn achieved_variance(plan: &AllocationPlan) -> Option<f64> {
    if plan.shots.contains(&0) {
        return None;
    }
    Some(
        plan.sigmas
            .iter()
            .zip(&plan.shots)
            .map(|(s, n)| s * s / *n as f64)
            .sum(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_even_split() {
        let plan = allocate(AllocationMethod::Uniform, 5120, 32, &[1.0; 5]).unwrap();
        assert_eq!(plan.shots, vec![1024; 5]);
    }

    #[test]
    fn uniform_leftovers_go_to_largest_cliques() {
        let plan = allocate_with(&AllocationRequest {
            method: AllocationMethod::Uniform,
            budget: 11,
            probe_shots: 0,
            sigmas: &[0.0; 3],
            clique_sizes: Some(&[1, 5, 3]),
            eta_form: EtaForm::Corrected,
        })
        .unwrap();
        assert_eq!(plan.shots, vec![3, 4, 4]);
    }

    #[test]
    fn vmsa_example() {
        let plan = allocate(AllocationMethod::Vmsa, 100, 10, &[3.0, 1.0]).unwrap();
        assert_eq!(plan.shots, vec![70, 30]);
    }

    #[test]
    fn vpsr_example() {
        let plan = allocate(AllocationMethod::Vpsr, 100, 10, &[3.0, 1.0]).unwrap();
        assert!((plan.eta.unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(plan.shots, vec![58, 26]);
        assert_eq!(plan.total(), 84);
    }

    #[test]
    fn printed_eta_is_one_over_m() {
        let plan = allocate_with(&AllocationRequest {
            method: AllocationMethod::Vpsr,
            budget: 100,
            probe_shots: 10,
            sigmas: &[3.0, 1.0],
            clique_sizes: None,
            eta_form: EtaForm::AsPrinted,
        })
        .unwrap();
        assert_eq!(plan.eta, Some(0.5));
        assert_eq!(plan.shots, vec![40, 20]);
    }

    #[test]
    fn zero_sigma_clique_keeps_probe_only() {
        let plan = allocate(AllocationMethod::Vmsa, 1000, 32, &[0.0, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(plan.shots[0], 32);
        assert_eq!(plan.total(), 1000);
    }

    #[test]
    fn all_zero_sigma_falls_back_to_uniform() {
        let plan = allocate(AllocationMethod::Vpsr, 100, 10, &[0.0, 0.0]).unwrap();
        assert!(plan.uniform_fallback);
        assert_eq!(plan.shots, vec![50, 50]);
    }

    #[test]
    fn errors() {
        assert!(allocate(AllocationMethod::Vmsa, 10, 10, &[1.0, 1.0]).is_err());
        assert!(allocate(AllocationMethod::Vmsa, 10, 1, &[]).is_err());
        assert!(allocate(AllocationMethod::Vmsa, 10, 1, &[-1.0]).is_err());
    }
}
