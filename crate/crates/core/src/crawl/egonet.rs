use std::collections::HashSet;

use super::{CrawlError, Fetch, Frontend, NodeObservation};
use crate::graph::NodeId;

/// A node, its neighbors with visible friend lists, and all edges among them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoNet {
    pub ego: NodeId,
    /// Declared degree of the ego, hidden neighbors included.
    pub ego_degree: usize,
    /// Ego first, then valid neighbors in adjacency order.
    pub members: Vec<NodeObservation>,
    /// Canonical `(min, max)` pairs, sorted.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl EgoNet {
    pub fn ego_observation(&self) -> &NodeObservation {
        &self.members[0]
    }

    pub fn neighbors(&self) -> &[NodeObservation] {
        &self.members[1..]
    }

    /// Edges among neighbors, i.e. not touching the ego.
    pub fn neighbor_edge_count(&self) -> usize {
        self.edges.iter().filter(|&&(a, b)| a != self.ego && b != self.ego).count()
    }
}

pub(super) fn collect(fe: &Frontend<'_>, ego: NodeId) -> Result<EgoNet, CrawlError> {
    let Fetch::Valid(info) = fe.fetch_node(ego)? else {
        return Err(CrawlError::InvalidEgo(ego));
    };
    let mut members = vec![info.observation()];
    let mut lists = Vec::new();
    for f in &info.friends {
        if let Fetch::Valid(fi) = fe.fetch_node(f.node)? {
            members.push(fi.observation());
            lists.push(fi);
        }
    }
    let inside: HashSet<NodeId> = members.iter().map(|m| m.node).collect();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for fi in &lists {
        let a = fi.node;
        edges.push((a.min(ego), a.max(ego)));
        for g in &fi.friends {
            if g.node != ego && a < g.node && inside.contains(&g.node) {
                edges.push((a, g.node));
            }
        }
    }
    edges.sort_unstable();
    Ok(EgoNet { ego, ego_degree: info.degree, members, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::CacheMode;
    use crate::graph::{read_attributes, read_edge_list, SocialGraph};
    use std::io::Cursor;

    fn graph(edges: &str, attrs: &str) -> SocialGraph {
        let g = read_edge_list(Cursor::new(edges)).unwrap();
        read_attributes(Cursor::new(attrs), g).unwrap()
    }

    #[test]
    fn triangle_plus_ego_is_k4() {
        let g = graph("e a\ne b\ne c\na b\nb c\na c\n", "");
        let fe = Frontend::new(&g, CacheMode::Shared);
        let ego = fe.collect_egonet(NodeId(0)).unwrap();
        assert_eq!(ego.members.len(), 4);
        assert_eq!(ego.edges.len(), 6);
        assert_eq!(ego.neighbor_edge_count(), 3);
        assert_eq!(fe.ledger().fetches, 4);
    }

    #[test]
    fn hidden_neighbor_and_its_edges_dropped() {
        let g = graph("e a\ne b\ne c\na b\nb c\na c\n", "b 7 0 1101\n");
        let fe = Frontend::new(&g, CacheMode::Shared);
        let ego = fe.collect_egonet(NodeId(0)).unwrap();
        assert_eq!(ego.ego_degree, 3);
        assert_eq!(ego.members.len(), 3);
        assert!(ego.members.iter().all(|m| m.node != NodeId(2)));
        assert_eq!(ego.edges.len(), 3);
        assert!(ego.edges.iter().all(|&(a, b)| a != NodeId(2) && b != NodeId(2)));
    }

    #[test]
    fn cost_is_degree_plus_one() {
        let g = graph("e a\ne b\ne c\ne d\nx y\n", "");
        let fe = Frontend::new(&g, CacheMode::Shared);
        fe.collect_egonet(NodeId(0)).unwrap();
        assert_eq!(fe.ledger().fetches, 5);
        assert_eq!(fe.ledger().downloads(), 5);
    }

    #[test]
    fn hidden_ego_rejected() {
        let g = graph("e a\n", "e 1 0 0000\n");
        let fe = Frontend::new(&g, CacheMode::Shared);
        assert_eq!(fe.collect_egonet(NodeId(0)), Err(CrawlError::InvalidEgo(NodeId(0))));
    }
}
