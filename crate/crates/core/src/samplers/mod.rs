//! BFS, simple random walk, Metropolis-Hastings random walk and uniform
//! user-id rejection sampling. Every sampler sees the graph only through a
//! [`Frontend`](crate::crawl::Frontend).
//!
//! Iteration budgets count every step, repetitions included: a rejected
//! Metropolis-Hastings proposal or a backtrack away from a hidden friend
//! list still consumes one iteration and records the current node again.

mod bfs;
mod chains;
mod dump;
mod uni;
mod walk;

pub use bfs::bfs_crawl;
pub use chains::{run_parallel_chains, select_seeds, subsample_trace, ChainSet, Execution, Position};
pub use dump::{read_trace_dump, write_trace_dump};
pub use uni::{uni_sample, UniSample};
pub use walk::{acceptance_probability, mhrw_crawl, rw_crawl, transition_matrix};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crawl::{CrawlError, Fetch, Frontend, NodeObservation};
use crate::graph::NodeId;
use crate::rng::family;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SampleError {
    #[error(transparent)]
    Crawl(#[from] CrawlError),
    #[error("seed {0} is not crawlable (hidden friend list or no friends)")]
    InvalidSeed(NodeId),
    #[error("seed {0} appears more than once")]
    DuplicateSeed(NodeId),
    #[error("no seeds given")]
    NoSeeds,
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("chain {chain} stalled at iteration {iteration} on node {node}: every friend hides its list")]
    Stalled { chain: u32, iteration: usize, node: NodeId },
    #[error("{0} is not a chain method")]
    NotAChainMethod(Method),
    #[error("probe cap reached: {probes} probes for {accepted} accepted ids")]
    ProbeCapExceeded { probes: u64, accepted: usize },
    #[error("id space must be in [1, 2^32], got {0}")]
    IdSpace(u64),
    #[error("burn-in {burn_in} leaves no positions in a budget of {budget}")]
    BurnIn { burn_in: usize, budget: usize },
    #[error("asked for {target} positions but only {available} are eligible")]
    TargetTooLarge { target: usize, available: usize },
    #[error("trace dump line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bfs,
    Rw,
    Mhrw,
    Uni,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Bfs, Method::Rw, Method::Mhrw, Method::Uni];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bfs => "bfs",
            Method::Rw => "rw",
            Method::Mhrw => "mhrw",
            Method::Uni => "uni",
        }
    }

    pub(crate) fn stream_family(self) -> u32 {
        match self {
            Method::Bfs => family::BFS,
            Method::Rw => family::RW,
            Method::Mhrw => family::MHRW,
            Method::Uni => family::UNI,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}` (expected bfs, rw, mhrw or uni)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepEvent {
    Move,
    /// Rejected Metropolis-Hastings proposal.
    SelfLoop,
    /// Proposed friend hid its list; the walk stayed put.
    Backtrack,
}

impl StepEvent {
    pub fn tag(self) -> &'static str {
        match self {
            StepEvent::Move => "move",
            StepEvent::SelfLoop => "self",
            StepEvent::Backtrack => "backtrack",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "move" => Some(StepEvent::Move),
            "self" => Some(StepEvent::SelfLoop),
            "backtrack" => Some(StepEvent::Backtrack),
            _ => None,
        }
    }
}

/// One chain's ordered samples. Entry 0 is the seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkTrace {
    pub chain_id: u32,
    pub method: Method,
    pub seed: NodeId,
    pub nodes: Vec<NodeId>,
    pub events: Vec<StepEvent>,
    /// Proposals to nodes with visible friend lists (MHRW).
    pub proposals: u64,
    pub accepted: u64,
    pub backtracks: u64,
    /// BFS only: hidden nodes dequeued and skipped.
    pub skipped_invalid: u64,
    /// BFS only: the frontier ran dry.
    pub exhausted: bool,
}

impl WalkTrace {
    fn new(chain_id: u32, method: Method, seed: NodeId, budget: usize) -> Self {
        Self {
            chain_id,
            method,
            seed,
            nodes: Vec::with_capacity(budget),
            events: Vec::with_capacity(budget),
            proposals: 0,
            accepted: 0,
            backtracks: 0,
            skipped_invalid: 0,
            exhausted: false,
        }
    }

    fn push(&mut self, v: NodeId, e: StepEvent) {
        self.nodes.push(v);
        self.events.push(e);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Everything the crawl observed about the nodes it fetched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog(HashMap<NodeId, NodeObservation>);

impl Catalog {
    pub fn get(&self, v: NodeId) -> Option<&NodeObservation> {
        self.0.get(&v)
    }

    pub fn insert(&mut self, obs: NodeObservation) {
        self.0.entry(obs.node).or_insert(obs);
    }

    pub fn merge(&mut self, other: Catalog) {
        for (_, o) in other.0 {
            self.insert(o);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Observations for a sequence of nodes. Panics on nodes never fetched,
    /// which cannot happen for nodes taken from a trace built with this catalog.
    pub fn lookup<'a>(&'a self, nodes: impl IntoIterator<Item = &'a NodeId> + 'a) -> impl Iterator<Item = NodeObservation> + 'a {
        nodes.into_iter().map(move |v| self.0[v])
    }
}

/// Per-chain view of the front-end: counts this chain's requests and
/// records what it has seen.
pub struct ChainCrawler<'a, 'g> {
    frontend: &'a Frontend<'g>,
    chain_id: u32,
    requests: u64,
    touched: HashSet<NodeId>,
    catalog: Catalog,
}

impl<'a, 'g> ChainCrawler<'a, 'g> {
    pub fn new(frontend: &'a Frontend<'g>, chain_id: u32) -> Self {
        Self { frontend, chain_id, requests: 0, touched: HashSet::new(), catalog: Catalog::default() }
    }

    pub fn chain_id(&self) -> u32 {
        self.chain_id
    }

    pub fn fetch(&mut self, v: NodeId) -> Result<Fetch, SampleError> {
        let f = self.frontend.fetch_node(v)?;
        self.requests += 1;
        self.touched.insert(v);
        if let Fetch::Valid(info) = &f {
            self.catalog.insert(info.observation());
        }
        Ok(f)
    }

    fn valid_seed(&mut self, v: NodeId) -> Result<crate::crawl::BasicNodeInfo, SampleError> {
        if !self.frontend.check_seed(v)? {
            return Err(SampleError::InvalidSeed(v));
        }
        match self.fetch(v)? {
            Fetch::Valid(info) => Ok(info),
            Fetch::Invalid => Err(SampleError::InvalidSeed(v)),
        }
    }

    pub fn requests(&self) -> u64 {
        self.requests
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn into_parts(self) -> (u64, HashSet<NodeId>, Catalog) {
        (self.requests, self.touched, self.catalog)
    }
}
