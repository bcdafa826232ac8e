//! Multiple independent chains over one front-end.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::{bfs_crawl, mhrw_crawl, rw_crawl, Catalog, ChainCrawler, Method, SampleError, WalkTrace};
use crate::crawl::{CacheMode, CostLedger, Frontend, NodeObservation};
use crate::graph::{NodeId, SocialGraph};
use crate::rng::{family, StreamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// One rayon task per chain. Traces are bit-identical to `Sequential`.
    Parallel,
}

#[derive(Debug, Clone)]
pub struct ChainSet {
    pub method: Method,
    pub budget: usize,
    pub master_seed: u64,
    pub cache: CacheMode,
    pub traces: Vec<WalkTrace>,
    pub catalog: Catalog,
    /// Per-chain cost. With a shared cache, a page is charged to the
    /// lowest-numbered chain that requested it, so the split does not depend
    /// on thread scheduling and sums to `total_cost`.
    pub chain_costs: Vec<CostLedger>,
    pub total_cost: CostLedger,
}

impl ChainSet {
    pub fn seeds(&self) -> Vec<NodeId> {
        self.traces.iter().map(|t| t.seed).collect()
    }

    /// Pooled post-burn-in nodes, chain by chain.
    pub fn pooled(&self, burn_in: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.traces.iter().flat_map(move |t| t.nodes.iter().skip(burn_in).copied())
    }

    pub fn pooled_observations(&self, burn_in: usize) -> Vec<NodeObservation> {
        self.pooled(burn_in).map(|v| self.catalog.get(v).copied().expect("trace node in catalog")).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        let (p, a) = self.traces.iter().fold((0, 0), |(p, a), t| (p + t.proposals, a + t.accepted));
        if p == 0 {
            0.0
        } else {
            a as f64 / p as f64
        }
    }

    pub fn backtracks(&self) -> u64 {
        self.traces.iter().map(|t| t.backtracks).sum()
    }
}

/// Runs one chain per seed. Chain `i` draws from stream `i` of the method's
/// family under `master_seed`.
pub fn run_parallel_chains(
    frontend: &Frontend<'_>,
    method: Method,
    seeds: &[NodeId],
    budget: usize,
    master_seed: u64,
    execution: Execution,
) -> Result<ChainSet, SampleError> {
    if method == Method::Uni {
        return Err(SampleError::NotAChainMethod(method));
    }
    if seeds.is_empty() {
        return Err(SampleError::NoSeeds);
    }
    if budget == 0 {
        return Err(SampleError::ZeroBudget);
    }
    let mut seen = HashSet::new();
    for &s in seeds {
        if !seen.insert(s) {
            return Err(SampleError::DuplicateSeed(s));
        }
        if !frontend.check_seed(s)? {
            return Err(SampleError::InvalidSeed(s));
        }
    }
    let streams = StreamFamily::new(master_seed, method.stream_family());
    let before = frontend.ledger();
    let one = |(i, &seed): (usize, &NodeId)| {
        let mut crawler = ChainCrawler::new(frontend, i as u32);
        let mut rng = streams.split(i as u32);
        let trace = match method {
            Method::Bfs => bfs_crawl(&mut crawler, seed, budget, &mut rng),
            Method::Rw => rw_crawl(&mut crawler, seed, budget, &mut rng),
            Method::Mhrw => mhrw_crawl(&mut crawler, seed, budget, &mut rng),
            Method::Uni => unreachable!(),
        }?;
        Ok((trace, crawler.into_parts()))
    };
    let results: Vec<Result<_, SampleError>> = match execution {
        Execution::Sequential => seeds.iter().enumerate().map(one).collect(),
        Execution::Parallel => seeds.par_iter().enumerate().map(one).collect(),
    };
    let total_cost = frontend.ledger().since(&before);

    let mut traces = Vec::with_capacity(seeds.len());
    let mut catalog = Catalog::default();
    let mut chain_costs = Vec::with_capacity(seeds.len());
    let mut charged: HashSet<NodeId> = HashSet::new();
    for r in results {
        let (trace, (requests, touched, cat)) = r?;
        let downloads = match frontend.cache_mode() {
            CacheMode::Disabled => requests,
            CacheMode::Shared => touched.into_iter().filter(|v| charged.insert(*v)).count() as u64,
        };
        chain_costs.push(CostLedger::from_counts(requests, 0, requests - downloads));
        catalog.merge(cat);
        traces.push(trace);
    }
    Ok(ChainSet {
        method,
        budget,
        master_seed,
        cache: frontend.cache_mode(),
        traces,
        catalog,
        chain_costs,
        total_cost,
    })
}

/// `count` distinct crawlable nodes drawn uniformly from the seed stream.
pub fn select_seeds(g: &SocialGraph, count: usize, master_seed: u64) -> Result<Vec<NodeId>, SampleError> {
    if count == 0 {
        return Err(SampleError::NoSeeds);
    }
    let pool: Vec<NodeId> = g.nodes().filter(|&v| g.is_crawlable(v)).collect();
    if count > pool.len() {
        return Err(SampleError::TargetTooLarge { target: count, available: pool.len() });
    }
    let mut rng = StreamFamily::new(master_seed, family::SEEDS).split(0);
    Ok(index::sample(&mut rng, pool.len(), count).into_iter().map(|i| pool[i]).collect())
}

/// A `(chain, iteration)` slot in a chain set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub chain: u32,
    pub index: usize,
    pub node: NodeId,
}

/// Uniform sample without replacement of `target` post-burn-in positions,
/// pooled over all chains and returned in `(chain, index)` order.
pub fn subsample_trace<R: Rng>(
    set: &ChainSet,
    burn_in: usize,
    target: usize,
    rng: &mut R,
) -> Result<Vec<Position>, SampleError> {
    if burn_in >= set.budget {
        return Err(SampleError::BurnIn { burn_in, budget: set.budget });
    }
    let eligible: Vec<usize> = set.traces.iter().map(|t| t.len().saturating_sub(burn_in)).collect();
    let available: usize = eligible.iter().sum();
    if target > available {
        return Err(SampleError::TargetTooLarge { target, available });
    }
    let mut picks = index::sample(rng, available, target).into_vec();
    picks.sort_unstable();
    let mut out = Vec::with_capacity(target);
    let (mut chain, mut base) = (0usize, 0usize);
    for p in picks {
        while p >= base + eligible[chain] {
            base += eligible[chain];
            chain += 1;
        }
        let t = &set.traces[chain];
        let index = burn_in + (p - base);
        out.push(Position { chain: t.chain_id, index, node: t.nodes[index] });
    }
    Ok(out)
}
