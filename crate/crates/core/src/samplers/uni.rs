use rand::Rng;

use super::SampleError;
use crate::crawl::{Frontend, NodeObservation, ProbeResult};

/// Outcome of user-id rejection sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniSample {
    pub nodes: Vec<NodeObservation>,
    pub probes: u64,
    pub nonexistent: u64,
    pub isolated: u64,
    pub hidden: u64,
}

impl UniSample {
    pub fn probes_per_accept(&self) -> f64 {
        self.probes as f64 / self.nodes.len().max(1) as f64
    }
}

/// Probes at most this many ids per requested sample before giving up.
pub const PROBE_CAP_FACTOR: u64 = 10_000;

/// Draws uniform ids from `[0, id_space)` and keeps those that exist, have
/// friends and show their friend list, until `target` are accepted.
pub fn uni_sample<R: Rng>(
    frontend: &Frontend<'_>,
    target: usize,
    id_space: u64,
    rng: &mut R,
) -> Result<UniSample, SampleError> {
    if id_space == 0 || id_space > 1 << 32 {
        return Err(SampleError::IdSpace(id_space));
    }
    let cap = PROBE_CAP_FACTOR * target as u64;
    let mut out = UniSample { nodes: Vec::with_capacity(target), probes: 0, nonexistent: 0, isolated: 0, hidden: 0 };
    while out.nodes.len() < target {
        if out.probes >= cap {
            return Err(SampleError::ProbeCapExceeded { probes: out.probes, accepted: out.nodes.len() });
        }
        let id = rng.random_range(0..id_space) as u32;
        out.probes += 1;
        match frontend.probe_id(id) {
            ProbeResult::Nonexistent => out.nonexistent += 1,
            ProbeResult::Isolated => out.isolated += 1,
            ProbeResult::Hidden => out.hidden += 1,
            ProbeResult::Valid(info) => out.nodes.push(info.observation()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::CacheMode;
    use crate::graph::{gen_synthetic, NodeAttributes, SyntheticModel};
    use crate::rng::seeded;

    #[test]
    fn full_occupancy_accepts_every_probe() {
        let mut g = gen_synthetic(SyntheticModel::ErdosRenyi { n: 64, p: 1.0 }, 0, false).unwrap();
        g.set_attributes((0..64).map(NodeAttributes::with_user_id).collect(), 0);
        let fe = Frontend::new(&g, CacheMode::Shared);
        let s = uni_sample(&fe, 500, 64, &mut seeded(1)).unwrap();
        assert_eq!(s.probes, 500);
        assert_eq!(s.nodes.len(), 500);
        assert_eq!(fe.ledger().probes, 500);
    }

    #[test]
    fn discards_isolated_and_hidden() {
        let mut g = crate::graph::SocialGraph::from_edges(4, &[(0, 1)]).unwrap();
        let mut attrs: Vec<NodeAttributes> = (0..4).map(NodeAttributes::with_user_id).collect();
        attrs[1].privacy = crate::graph::PrivacySettings::parse("1101").unwrap();
        g.set_attributes(attrs, 0);
        let fe = Frontend::new(&g, CacheMode::Shared);
        let s = uni_sample(&fe, 200, 8, &mut seeded(2)).unwrap();
        assert!(s.nodes.iter().all(|o| o.user_id == 0));
        assert!(s.isolated > 0 && s.hidden > 0 && s.nonexistent > 0);
        assert_eq!(s.probes, s.nonexistent + s.isolated + s.hidden + 200);
    }

    #[test]
    fn cap_aborts_empty_population() {
        let g = crate::graph::SocialGraph::from_edges(3, &[]).unwrap();
        let fe = Frontend::new(&g, CacheMode::Shared);
        assert_eq!(
            uni_sample(&fe, 2, 3, &mut seeded(0)),
            Err(SampleError::ProbeCapExceeded { probes: 20_000, accepted: 0 })
        );
        assert!(matches!(uni_sample(&fe, 2, 0, &mut seeded(0)), Err(SampleError::IdSpace(0))));
    }
}
