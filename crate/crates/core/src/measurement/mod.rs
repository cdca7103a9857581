//! Measurement layer: QWC grouping, clique estimators, shot allocation,
//! the reuse cache and Pauli-count reports.

pub mod allocation;
pub mod counting;
pub mod estimate;
pub mod grouping;
pub mod observe;
pub mod reuse;

pub use allocation::{allocate, allocate_with, AllocationMethod, AllocationPlan, AllocationRequest, EtaForm};
pub use counting::{count_report, CountReport};
pub use estimate::{estimate_clique, CliqueEstimate, MeasurementRecord};
pub use grouping::{group_qwc, GroupedObservable, MeasurementClique};
pub use observe::{measure_observable, MeasureOptions, MeasureOutcome};
pub use reuse::{build_reuse_map, ReuseCache, ReuseMap};
