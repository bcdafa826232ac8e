//! Simulated social-network front-end.
//!
//! [`Frontend`] is the only door samplers have into a [`SocialGraph`]. It
//! enforces the "view friends" privacy bit, charges every page fetch to a
//! [`CostLedger`], optionally dedups fetches through a cache shared by all
//! chains using the same front-end, and answers user-id existence probes.
//!
//! The cache affects cost only: fetch results are a pure function of the
//! node, so traces are identical with and without it.

mod egonet;

pub use egonet::EgoNet;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, PrivacySettings, SocialGraph};

/// Bytes charged per page that is actually downloaded.
pub const PAGE_BYTES: u64 = 220 * 1024;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CrawlError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} hides its friend list")]
    InvalidEgo(NodeId),
}

/// What a crawler learns about one friend from a friend-list page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FriendInfo {
    pub node: NodeId,
    pub user_id: u32,
    pub region: u16,
    pub privacy: PrivacySettings,
}

/// One "show friends" page.
///
/// The subject's own region and privacy are not printed on its own page; a
/// crawler reads them off any friend's listing. They are carried here so
/// callers need not repeat that indirection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicNodeInfo {
    pub node: NodeId,
    pub user_id: u32,
    pub region: u16,
    pub privacy: PrivacySettings,
    pub degree: usize,
    pub friends: Vec<FriendInfo>,
}

impl BasicNodeInfo {
    pub fn observation(&self) -> NodeObservation {
        NodeObservation {
            node: self.node,
            user_id: self.user_id,
            degree: self.degree as u32,
            region: self.region,
            privacy: self.privacy,
        }
    }
}

/// What a fetch of `v` would report about `v` itself, read off the graph.
pub fn observe(g: &SocialGraph, v: NodeId) -> NodeObservation {
    let a = g.attrs(v);
    NodeObservation { node: v, user_id: a.user_id, degree: g.degree(v) as u32, region: a.region, privacy: a.privacy }
}

/// The per-node facts estimators work from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeObservation {
    pub node: NodeId,
    pub user_id: u32,
    pub degree: u32,
    pub region: u16,
    pub privacy: PrivacySettings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fetch {
    Valid(BasicNodeInfo),
    /// Friend list hidden (`Q = **0*`).
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeResult {
    Nonexistent,
    /// Exists with zero friends.
    Isolated,
    /// Exists but hides its friend list.
    Hidden,
    Valid(BasicNodeInfo),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    /// Fetch requests, including those served from cache.
    pub fetches: u64,
    pub probes: u64,
    pub cache_hits: u64,
    pub simulated_bytes: u64,
}

impl CostLedger {
    pub fn from_counts(fetches: u64, probes: u64, cache_hits: u64) -> Self {
        Self { fetches, probes, cache_hits, simulated_bytes: PAGE_BYTES * (fetches - cache_hits) }
    }

    /// Pages actually downloaded.
    pub fn downloads(&self) -> u64 {
        self.fetches - self.cache_hits
    }

    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        Self::from_counts(
            self.fetches - earlier.fetches,
            self.probes - earlier.probes,
            self.cache_hits - earlier.cache_hits,
        )
    }

    pub fn merge(&self, other: &CostLedger) -> CostLedger {
        Self::from_counts(
            self.fetches + other.fetches,
            self.probes + other.probes,
            self.cache_hits + other.cache_hits,
        )
    }
}

impl fmt::Display for CostLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fetches={} probes={} cache_hits={} simulated_bytes={}",
            self.fetches, self.probes, self.cache_hits, self.simulated_bytes
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheMode {
    Shared,
    Disabled,
}

pub struct Frontend<'g> {
    graph: &'g SocialGraph,
    cache: Option<Vec<AtomicBool>>,
    by_user_id: HashMap<u32, NodeId>,
    fetches: AtomicU64,
    probes: AtomicU64,
    hits: AtomicU64,
}

impl<'g> Frontend<'g> {
    pub fn new(graph: &'g SocialGraph, cache: CacheMode) -> Self {
        let cache = match cache {
            CacheMode::Shared => Some((0..graph.node_count()).map(|_| AtomicBool::new(false)).collect()),
            CacheMode::Disabled => None,
        };
        let by_user_id = graph.nodes().map(|v| (graph.attrs(v).user_id, v)).collect();
        Self {
            graph,
            cache,
            by_user_id,
            fetches: AtomicU64::new(0),
            probes: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        }
    }

    pub fn cache_mode(&self) -> CacheMode {
        if self.cache.is_some() {
            CacheMode::Shared
        } else {
            CacheMode::Disabled
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn ledger(&self) -> CostLedger {
        // hits before fetches: a concurrent reader never sees hits > fetches
        let hits = self.hits.load(Ordering::SeqCst);
        let probes = self.probes.load(Ordering::SeqCst);
        let fetches = self.fetches.load(Ordering::SeqCst);
        CostLedger::from_counts(fetches, probes, hits)
    }

    /// Seeds are known before crawling starts; checking one costs nothing.
    pub fn check_seed(&self, v: NodeId) -> Result<bool, CrawlError> {
        if !self.graph.contains(v) {
            return Err(CrawlError::UnknownNode(v));
        }
        Ok(self.graph.is_crawlable(v))
    }

    fn info(&self, v: NodeId) -> BasicNodeInfo {
        let g = self.graph;
        let a = g.attrs(v);
        let friends = g
            .neighbors(v)
            .iter()
            .map(|&w| {
                let b = g.attrs(w);
                FriendInfo { node: w, user_id: b.user_id, region: b.region, privacy: b.privacy }
            })
            .collect::<Vec<_>>();
        BasicNodeInfo {
            node: v,
            user_id: a.user_id,
            region: a.region,
            privacy: a.privacy,
            degree: friends.len(),
            friends,
        }
    }

    /// Fetches the friend-list page of `v`. Hidden lists still cost a fetch.
    pub fn fetch_node(&self, v: NodeId) -> Result<Fetch, CrawlError> {
        if !self.graph.contains(v) {
            return Err(CrawlError::UnknownNode(v));
        }
        if let Some(cache) = &self.cache {
            if cache[v.index()].swap(true, Ordering::SeqCst) {
                self.hits.fetch_add(1, Ordering::SeqCst);
            }
        }
        self.fetches.fetch_add(1, Ordering::SeqCst);
        if !self.graph.attrs(v).privacy.can_view_friends() {
            return Ok(Fetch::Invalid);
        }
        Ok(Fetch::Valid(self.info(v)))
    }

    /// Asks whether `user_id` exists.
    pub fn probe_id(&self, user_id: u32) -> ProbeResult {
        self.probes.fetch_add(1, Ordering::SeqCst);
        let Some(&v) = self.by_user_id.get(&user_id) else {
            return ProbeResult::Nonexistent;
        };
        if self.graph.degree(v) == 0 {
            ProbeResult::Isolated
        } else if !self.graph.attrs(v).privacy.can_view_friends() {
            ProbeResult::Hidden
        } else {
            ProbeResult::Valid(self.info(v))
        }
    }

    /// Ego plus its visible neighbors and every edge among them.
    pub fn collect_egonet(&self, ego: NodeId) -> Result<EgoNet, CrawlError> {
        egonet::collect(self, ego)
    }
}
