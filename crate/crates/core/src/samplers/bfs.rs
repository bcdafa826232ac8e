use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ChainCrawler, Method, SampleError, StepEvent, WalkTrace};
use crate::crawl::Fetch;
use crate::graph::NodeId;

/// Breadth-first crawl with a FIFO frontier.
///
/// Each expanded node's friends are enqueued in an order shuffled by the
/// chain's stream. Hidden nodes are fetched (and paid for) when dequeued,
/// counted in `skipped_invalid` and never expanded. Stops at `budget`
/// visited nodes or when the frontier empties (`exhausted`).
pub fn bfs_crawl<R: Rng>(
    crawler: &mut ChainCrawler<'_, '_>,
    seed: NodeId,
    budget: usize,
    rng: &mut R,
) -> Result<WalkTrace, SampleError> {
    if budget == 0 {
        return Err(SampleError::ZeroBudget);
    }
    if !crawler.frontend.check_seed(seed)? {
        return Err(SampleError::InvalidSeed(seed));
    }
    let mut trace = WalkTrace::new(crawler.chain_id(), Method::Bfs, seed, budget);
    let mut discovered = HashSet::from([seed]);
    let mut frontier = VecDeque::from([seed]);
    let mut order: Vec<NodeId> = Vec::new();
    while trace.len() < budget {
        let Some(u) = frontier.pop_front() else { break };
        let info = match crawler.fetch(u)? {
            Fetch::Valid(info) => info,
            Fetch::Invalid => {
                trace.skipped_invalid += 1;
                continue;
            }
        };
        trace.push(u, StepEvent::Move);
        order.clear();
        order.extend(info.friends.iter().map(|f| f.node));
        order.shuffle(rng);
        for &w in &order {
            if discovered.insert(w) {
                frontier.push_back(w);
            }
        }
    }
    trace.exhausted = frontier.is_empty();
    Ok(trace)
}
