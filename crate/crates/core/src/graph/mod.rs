//! Social graph data model.
//!
//! Nodes are dense `u32` indices. The 32-bit `user_id` that a crawler sees
//! is an attribute, not the storage key: real identifier spaces are sparse
//! and we want O(1) adjacency by index.

mod generators;
mod io;
mod plant;

pub use generators::{gen_synthetic, SyntheticModel};
pub use io::{
    load_attributes, load_edge_list, read_attributes, read_edge_list, write_attributes,
    write_edge_list,
};
pub use plant::{
    plant_attributes, user_id_degree_correlation, AttributePlantSpec, GroundTruth, PaFunction, PaRow, RegionMass,
    RegionModel, UserIdMode,
};

use std::borrow::Cow;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop on node `{token}`")]
    SelfLoop { line: usize, token: String },
    #[error("self-loop on node {0}")]
    SelfLoopIndex(u32),
    #[error("edge endpoint {0} out of range")]
    NodeOutOfRange(u32),
    #[error("duplicate user_id {user_id} (line {line})")]
    DuplicateUserId { line: usize, user_id: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph has {0} invariant violation(s)")]
    Invalid(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Four privacy bits, written most-significant first as `add_friend photo
/// view_friends send_message`. `1101` therefore hides the friend list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrivacySettings(u8);

impl PrivacySettings {
    pub const ADD_FRIEND: u8 = 0b1000;
    pub const PHOTO: u8 = 0b0100;
    pub const VIEW_FRIENDS: u8 = 0b0010;
    pub const SEND_MESSAGE: u8 = 0b0001;
    pub const DEFAULT: PrivacySettings = PrivacySettings(0b1111);

    pub fn new(bits: u8) -> Option<Self> {
        (bits <= 0b1111).then_some(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn can_view_friends(self) -> bool {
        self.0 & Self::VIEW_FRIENDS != 0
    }

    /// `Q != 1111`: the user changed at least one default.
    pub fn is_privacy_aware(self) -> bool {
        self != Self::DEFAULT
    }

    /// Parses the four-digit binary form, e.g. `"1101"`.
    pub fn parse(s: &str) -> Option<Self> {
        if s.len() != 4 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        u8::from_str_radix(s, 2).ok().map(Self)
    }
}

impl Default for PrivacySettings {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for PrivacySettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04b}", self.0)
    }
}

impl Serialize for PrivacySettings {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PrivacySettings {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad privacy bits `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAttributes {
    pub user_id: u32,
    /// 0 means "no regional network".
    pub region: u16,
    pub privacy: PrivacySettings,
}

impl NodeAttributes {
    pub fn with_user_id(user_id: u32) -> Self {
        Self { user_id, region: 0, privacy: PrivacySettings::DEFAULT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Asymmetric(NodeId, NodeId),
    SelfLoop(NodeId),
    DuplicateEdge(NodeId, NodeId),
    UnsortedAdjacency(NodeId),
    DuplicateUserId(u32),
    RegionOutOfRange(NodeId, u16),
}

/// Undirected simple graph in CSR form with per-node attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    attrs: Vec<NodeAttributes>,
    tokens: Option<Vec<String>>,
    region_count: u16,
}

impl SocialGraph {
    /// Builds a graph on `n` nodes from an undirected edge list. Duplicate
    /// and reversed edges collapse; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoopIndex(u));
            }
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::NodeOutOfRange(x));
                }
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![NodeId(0); offsets[n]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = NodeId(v);
            fill[u as usize] += 1;
            targets[fill[v as usize]] = NodeId(u);
            fill[v as usize] += 1;
        }
        // sort + dedup each adjacency run, then compact
        let mut compact = Vec::with_capacity(targets.len());
        let mut new_offsets = Vec::with_capacity(n + 1);
        new_offsets.push(0);
        for v in 0..n {
            let run = &mut targets[offsets[v]..offsets[v + 1]];
            run.sort_unstable();
            let start = compact.len();
            for &t in run.iter() {
                if compact.len() == start || *compact.last().unwrap() != t {
                    compact.push(t);
                }
            }
            new_offsets.push(compact.len());
        }
        compact.shrink_to_fit();
        let attrs = (0..n as u32).map(NodeAttributes::with_user_id).collect();
        Ok(Self { offsets: new_offsets, targets: compact, attrs, tokens: None, region_count: 0 })
    }

    pub(crate) fn with_tokens(mut self, tokens: Vec<String>) -> Self {
        debug_assert_eq!(tokens.len(), self.node_count());
        self.tokens = Some(tokens);
        self
    }

    pub fn node_count(&self) -> usize {
        self.attrs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.node_count() as u32).map(NodeId)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn attrs(&self, v: NodeId) -> &NodeAttributes {
        &self.attrs[v.index()]
    }

    pub fn attributes(&self) -> &[NodeAttributes] {
        &self.attrs
    }

    /// Replaces all attributes. `region_count` is the largest admissible region id.
    pub fn set_attributes(&mut self, attrs: Vec<NodeAttributes>, region_count: u16) {
        assert_eq!(attrs.len(), self.node_count(), "one attribute record per node");
        self.attrs = attrs;
        self.region_count = region_count;
    }

    pub fn region_count(&self) -> u16 {
        self.region_count
    }

    /// External name of a node: the edge-list token, or the decimal index
    /// for generated graphs.
    pub fn token(&self, v: NodeId) -> Cow<'_, str> {
        match &self.tokens {
            Some(t) => Cow::Borrowed(&t[v.index()]),
            None => Cow::Owned(v.0.to_string()),
        }
    }

    pub fn token_index(&self) -> HashMap<String, NodeId> {
        self.nodes().map(|v| (self.token(v).into_owned(), v)).collect()
    }

    pub fn isolated_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.degree(v) == 0).collect()
    }

    /// A node a crawler can stand on: friend list visible and at least one friend.
    pub fn is_crawlable(&self, v: NodeId) -> bool {
        self.degree(v) > 0 && self.attrs(v).privacy.can_view_friends()
    }

    /// Exhaustive invariant check. An empty result means the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for u in self.nodes() {
            let adj = self.neighbors(u);
            for (i, &w) in adj.iter().enumerate() {
                if w == u {
                    out.push(Violation::SelfLoop(u));
                }
                if i > 0 {
                    if adj[i - 1] == w {
                        out.push(Violation::DuplicateEdge(u, w));
                    } else if adj[i - 1] > w {
                        out.push(Violation::UnsortedAdjacency(u));
                    }
                }
                if !self.contains(w) || !self.neighbors(w).contains(&u) {
                    out.push(Violation::Asymmetric(u, w));
                }
            }
            let region = self.attrs(u).region;
            if region > self.region_count {
                out.push(Violation::RegionOutOfRange(u, region));
            }
        }
        let mut seen = HashSet::with_capacity(self.node_count());
        for a in &self.attrs {
            if !seen.insert(a.user_id) {
                out.push(Violation::DuplicateUserId(a.user_id));
            }
        }
        out
    }

    /// Connected components as a per-node label, labels in order of first node.
    pub fn components(&self) -> Vec<u32> {
        let n = self.node_count();
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(NodeId(s as u32));
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    if label[w.index()] == u32::MAX {
                        label[w.index()] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on the largest connected component, relabelled
    /// densely in original index order. Ties go to the component seen first.
    pub fn largest_component(&self) -> SocialGraph {
        let label = self.components();
        let Some(&max_label) = label.iter().max() else {
            return self.clone();
        };
        let mut sizes = vec![0usize; max_label as usize + 1];
        for &c in &label {
            sizes[c as usize] += 1;
        }
        let best = (0..sizes.len()).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b }) as u32;
        let keep: Vec<NodeId> = self.nodes().filter(|v| label[v.index()] == best).collect();
        self.induced(&keep)
    }

    /// Induced subgraph on `keep` (which must be sorted and unique).
    pub fn induced(&self, keep: &[NodeId]) -> SocialGraph {
        let mut remap = vec![u32::MAX; self.node_count()];
        for (i, v) in keep.iter().enumerate() {
            remap[v.index()] = i as u32;
        }
        let mut offsets = Vec::with_capacity(keep.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for &v in keep {
            // relabelling is monotone, so sorted order is preserved
            targets.extend(
                self.neighbors(v)
                    .iter()
                    .filter(|w| remap[w.index()] != u32::MAX)
                    .map(|w| NodeId(remap[w.index()])),
            );
            offsets.push(targets.len());
        }
        SocialGraph {
            offsets,
            targets,
            attrs: keep.iter().map(|&v| *self.attrs(v)).collect(),
            tokens: self
                .tokens
                .as_ref()
                .map(|t| keep.iter().map(|v| t[v.index()].clone()).collect()),
            region_count: self.region_count,
        }
    }

    /// Appends an isolated node with the given token and attributes.
    pub(crate) fn push_isolated(&mut self, token: String, attrs: NodeAttributes) -> NodeId {
        let id = NodeId(self.node_count() as u32);
        let tokens = self
            .tokens
            .get_or_insert_with(|| (0..self.attrs.len()).map(|i| i.to_string()).collect());
        tokens.push(token);
        self.attrs.push(attrs);
        self.offsets.push(*self.offsets.last().unwrap());
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_symmetrizes_and_dedups() {
        let g = SocialGraph::from_edges(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(NodeId(1)), &[NodeId(0), NodeId(2)]);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            SocialGraph::from_edges(2, &[(1, 1)]),
            Err(GraphError::SelfLoopIndex(1))
        ));
    }

    #[test]
    fn privacy_bits() {
        let q = PrivacySettings::parse("1101").unwrap();
        assert!(!q.can_view_friends());
        assert!(q.is_privacy_aware());
        assert_eq!(q.to_string(), "1101");
        assert!(PrivacySettings::DEFAULT.can_view_friends());
        assert!(!PrivacySettings::DEFAULT.is_privacy_aware());
        assert_eq!(PrivacySettings::default().bits(), 15);
        assert!(PrivacySettings::parse("11011").is_none());
        assert!(PrivacySettings::parse("12").is_none());
        assert!(PrivacySettings::new(16).is_none());
    }

    #[test]
    fn validate_catches_duplicate_user_ids_and_regions() {
        let mut g = SocialGraph::from_edges(2, &[(0, 1)]).unwrap();
        g.set_attributes(
            vec![
                NodeAttributes { user_id: 5, region: 3, privacy: PrivacySettings::DEFAULT },
                NodeAttributes { user_id: 5, region: 0, privacy: PrivacySettings::DEFAULT },
            ],
            2,
        );
        let v = g.validate();
        assert!(v.contains(&Violation::DuplicateUserId(5)));
        assert!(v.contains(&Violation::RegionOutOfRange(NodeId(0), 3)));
    }

    #[test]
    fn largest_component_relabels() {
        let g = SocialGraph::from_edges(6, &[(0, 1), (2, 3), (3, 4), (4, 2)]).unwrap();
        let lc = g.largest_component();
        assert_eq!(lc.node_count(), 3);
        assert_eq!(lc.edge_count(), 3);
        assert_eq!(lc.token(NodeId(0)), "0");
        assert_eq!(lc.attrs(NodeId(0)).user_id, 2);
        assert!(lc.is_connected());
        assert_eq!(g.isolated_nodes(), vec![NodeId(5)]);
    }
}
