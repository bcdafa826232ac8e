use std::collections::BTreeMap;

use super::{Binning, EstimateError};
use crate::crawl::{EgoNet, NodeObservation};

/// Share of privacy-aware nodes (`Q != 1111`) in one conditioning cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaCell {
    pub pa: f64,
    pub count: usize,
}

impl PaCell {
    fn of<'a>(it: impl IntoIterator<Item = &'a NodeObservation>) -> Option<PaCell> {
        let (mut aware, mut count) = (0usize, 0usize);
        for o in it {
            count += 1;
            aware += usize::from(o.privacy.is_privacy_aware());
        }
        (count > 0).then(|| PaCell { pa: aware as f64 / count as f64, count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaBin {
    pub low: f64,
    pub high: f64,
    pub cell: PaCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyAwareness {
    pub global: PaCell,
    pub by_region: BTreeMap<u16, PaCell>,
    /// `PA(k)`, over nodes whose friend list is visible. Empty bins are omitted.
    pub by_degree: Vec<PaBin>,
    /// Ego PA against the share of privacy-aware neighbors, in ten equal bins.
    pub by_neighbor_pa: Vec<PaBin>,
}

const NEIGHBOR_BINS: usize = 10;

pub fn privacy_awareness(
    samples: &[NodeObservation],
    egonets: &[EgoNet],
    degree_binning: Binning,
) -> Result<PrivacyAwareness, EstimateError> {
    let global = PaCell::of(samples).ok_or(EstimateError::EmptySample)?;

    let mut regions: BTreeMap<u16, Vec<&NodeObservation>> = BTreeMap::new();
    for o in samples {
        regions.entry(o.region).or_default().push(o);
    }
    let by_region = regions.into_iter().filter_map(|(r, v)| PaCell::of(v).map(|c| (r, c))).collect();

    let mut degree_cells: BTreeMap<i64, Vec<&NodeObservation>> = BTreeMap::new();
    for o in samples.iter().filter(|o| o.privacy.can_view_friends() && o.degree > 0) {
        degree_cells.entry(degree_binning.index(o.degree as f64)?).or_default().push(o);
    }
    let by_degree = degree_cells
        .into_iter()
        .filter_map(|(i, v)| {
            PaCell::of(v).map(|cell| PaBin { low: degree_binning.low(i), high: degree_binning.high(i), cell })
        })
        .collect();

    let mut neighbor_cells: Vec<Vec<&NodeObservation>> = vec![Vec::new(); NEIGHBOR_BINS];
    for e in egonets {
        let ego = e.ego_observation();
        let Some(nb) = PaCell::of(e.neighbors()) else { continue };
        if !ego.privacy.can_view_friends() {
            continue;
        }
        let b = ((nb.pa * NEIGHBOR_BINS as f64) as usize).min(NEIGHBOR_BINS - 1);
        neighbor_cells[b].push(ego);
    }
    let by_neighbor_pa = neighbor_cells
        .into_iter()
        .enumerate()
        .filter_map(|(b, v)| {
            let w = 1.0 / NEIGHBOR_BINS as f64;
            PaCell::of(v).map(|cell| PaBin { low: b as f64 * w, high: (b + 1) as f64 * w, cell })
        })
        .collect();

    Ok(PrivacyAwareness { global, by_region, by_degree, by_neighbor_pa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, PrivacySettings};

    fn o(degree: u32, region: u16, q: &str) -> NodeObservation {
        NodeObservation { node: NodeId(0), user_id: 0, degree, region, privacy: PrivacySettings::parse(q).unwrap() }
    }

    #[test]
    fn all_default_is_zero() {
        let s: Vec<_> = (1..50).map(|k| o(k, 0, "1111")).collect();
        let pa = privacy_awareness(&s, &[], Binning::LOG10).unwrap();
        assert_eq!(pa.global, PaCell { pa: 0.0, count: 49 });
        assert!(pa.by_degree.iter().all(|b| b.cell.pa == 0.0));
        assert!(pa.by_neighbor_pa.is_empty());
    }

    #[test]
    fn sixteen_of_hundred() {
        let s: Vec<_> = (0..100).map(|i| o(5, (i % 2) as u16, if i < 16 { "1011" } else { "1111" })).collect();
        let pa = privacy_awareness(&s, &[], Binning::Unit).unwrap();
        assert!((pa.global.pa - 0.16).abs() < 1e-15);
        assert_eq!(pa.by_region[&0].count, 50);
        assert_eq!(pa.by_degree.len(), 1);
        assert_eq!(pa.by_degree[0].low, 5.0);
    }

    #[test]
    fn degree_cells_skip_hidden_lists() {
        let s = vec![o(3, 0, "1101"), o(3, 0, "1110")];
        let pa = privacy_awareness(&s, &[], Binning::Unit).unwrap();
        assert_eq!(pa.global.count, 2);
        assert_eq!(pa.by_degree[0].cell, PaCell { pa: 1.0, count: 1 });
        assert_eq!(privacy_awareness(&[], &[], Binning::Unit), Err(EstimateError::EmptySample));
    }
}
