//! Shared fixtures for the criterion benches.

use osnwalk::graph::{gen_synthetic, plant_attributes, AttributePlantSpec, SocialGraph, SyntheticModel};

/// Barabasi-Albert graph with default planted attributes.
pub fn planted_ba(n: usize, m: usize, seed: u64) -> SocialGraph {
    let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n, m }, seed, true).expect("generate");
    plant_attributes(&g, &AttributePlantSpec::default(), seed + 1).expect("plant").0
}
