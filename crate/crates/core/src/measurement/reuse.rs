//! Reusing energy-measurement outcomes for gradient screening.
//!
//! After the energy of `|ψ^(n)⟩` is measured, the records are kept. The next
//! gradient screen is evaluated on the same state, so any gradient term that
//! is diagonal in a cached clique basis can be read off those outcomes with
//! no new shots.

use std::collections::BTreeMap;

use crate::measurement::estimate::MeasurementRecord;
use crate::measurement::grouping::MeasurementClique;
use crate::pauli::PauliString;

/// Gradient term → id of the first Hamiltonian clique whose basis covers it.
pub type ReuseMap = BTreeMap<PauliString, Option<usize>>;

/// Computed once at setup.
pub fn build_reuse_map<I>(h_cliques: &[MeasurementClique], gradient_terms: I) -> ReuseMap
where
    I: IntoIterator<Item = PauliString>,
{
    gradient_terms
        .into_iter()
        .map(|t| {
            let hit = h_cliques.iter().find(|c| c.covers(&t)).map(|c| c.id);
            (t, hit)
        })
        .collect()
}

/// Records of the most recent energy measurement, keyed by clique id.
#[derive(Debug, Clone, Default)]
pub struct ReuseCache {
    tag: Option<usize>,
    records: BTreeMap<usize, MeasurementRecord>,
}

impl ReuseCache {
    pub fn new() -> Self {
        ReuseCache::default()
    }

    /// Replaces the cache contents with records of the state tagged `tag`.
    pub fn store(&mut self, tag: usize, records: impl IntoIterator<Item = MeasurementRecord>) {
        self.tag = Some(tag);
        self.records = records
            .into_iter()
            .filter(|r| r.tag == tag)
            .map(|r| (r.clique_id, r))
            .collect();
    }

    pub fn clear(&mut self) {
        self.tag = None;
        self.records.clear();
    }

    pub fn tag(&self) -> Option<usize> {
        self.tag
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Record for `clique_id` if it was taken on the state tagged `tag`.
    pub fn get(&self, clique_id: usize, tag: usize) -> Option<&MeasurementRecord> {
        if self.tag != Some(tag) {
            return None;
        }
        self.records.get(&clique_id)
    }

    /// First record (by clique id) in whose basis every term is diagonal.
    pub fn find_covering<'a>(
        &self,
        terms: impl Iterator<Item = &'a PauliString> + Clone,
        tag: usize,
    ) -> Option<&MeasurementRecord> {
        if self.tag != Some(tag) {
            return None;
        }
        self.records
            .values()
            .find(|r| terms.clone().all(|t| t.diagonal_in(&r.basis)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::grouping::group_qwc;
    use crate::pauli::PauliSum;
    use crate::state::Histogram;
    use num_complex::Complex64;

    #[test]
    fn mapping_rules() {
        let h =
            PauliSum::from_labels(&[("ZZII", Complex64::new(0.5, 0.0)), ("IIZZ", Complex64::new(0.2, 0.0))]).unwrap();
        let cliques = group_qwc(&h);
        let map = build_reuse_map(&cliques, ["ZZII".parse().unwrap(), "YYYY".parse().unwrap()]);
        assert_eq!(map[&"ZZII".parse().unwrap()], Some(0));
        assert_eq!(map[&"YYYY".parse().unwrap()], None);
    }

    #[test]
    fn cache_respects_tags() {
        let mut cache = ReuseCache::new();
        let basis: PauliString = "ZZ".parse().unwrap();
        cache.store(3, [MeasurementRecord::new(0, basis, Histogram::from([(0, 4)]), 3)]);
        assert!(cache.get(0, 3).is_some());
        assert!(cache.get(0, 2).is_none());
        let t: PauliString = "ZI".parse().unwrap();
        assert!(cache.find_covering([t].iter(), 3).is_some());
        assert!(cache.find_covering([t].iter(), 4).is_none());
    }
}
