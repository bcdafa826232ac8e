use std::collections::{BTreeMap, HashMap, HashSet};

use super::EstimateError;
use crate::crawl::EgoNet;
use crate::graph::{NodeId, SocialGraph};

/// Degrees below this get one bin each in the clustering curve.
const CURVE_UNIT_LIMIT: u32 = 64;
const CURVE_BINS_PER_DOUBLING: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub k_low: u32,
    /// Exclusive.
    pub k_high: u32,
    pub clustering: f64,
    pub egos: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringEstimate {
    /// Mean of the per-ego coefficients.
    pub global: f64,
    pub egos: usize,
    /// Egos with fewer than two visible neighbors.
    pub skipped: usize,
    pub curve: Vec<CurvePoint>,
}

fn curve_bin(k: u32) -> (u32, u32) {
    if k < CURVE_UNIT_LIMIT {
        return (k, k + 1);
    }
    let j = ((k as f64 / CURVE_UNIT_LIMIT as f64).log2() * CURVE_BINS_PER_DOUBLING).floor();
    let edge = |j: f64| (CURVE_UNIT_LIMIT as f64 * 2f64.powf(j / CURVE_BINS_PER_DOUBLING)).ceil() as u32;
    let (mut lo, mut hi) = (edge(j), edge(j + 1.0));
    // ceil rounding can push k just outside its bin
    if k < lo {
        hi = lo;
        lo = edge(j - 1.0);
    } else if k >= hi {
        lo = hi;
        hi = edge(j + 2.0);
    }
    (lo, hi)
}

fn summarize(per_ego: Vec<(u32, f64)>, skipped: usize) -> Result<ClusteringEstimate, EstimateError> {
    if per_ego.is_empty() {
        return Err(EstimateError::NoUsableEgo);
    }
    let global = per_ego.iter().map(|p| p.1).sum::<f64>() / per_ego.len() as f64;
    let mut bins: BTreeMap<(u32, u32), (f64, usize)> = BTreeMap::new();
    for &(k, c) in &per_ego {
        let e = bins.entry(curve_bin(k)).or_default();
        e.0 += c;
        e.1 += 1;
    }
    let curve = bins
        .into_iter()
        .map(|((k_low, k_high), (s, n))| CurvePoint { k_low, k_high, clustering: s / n as f64, egos: n })
        .collect();
    Ok(ClusteringEstimate { global, egos: per_ego.len(), skipped, curve })
}

/// `C_v = 2 m_v / (k_v (k_v - 1))` per ego, with `k_v` the neighbors present
/// in the ego network and `m_v` the edges among them. The curve is indexed
/// by the ego's declared degree.
pub fn clustering(egonets: &[EgoNet]) -> Result<ClusteringEstimate, EstimateError> {
    let mut per_ego = Vec::with_capacity(egonets.len());
    let mut skipped = 0;
    for e in egonets {
        let k = e.neighbors().len();
        if k < 2 {
            skipped += 1;
            continue;
        }
        let m = e.neighbor_edge_count();
        per_ego.push((e.ego_degree as u32, 2.0 * m as f64 / (k * (k - 1)) as f64));
    }
    summarize(per_ego, skipped)
}

/// Clustering over every node of the graph with at least two neighbors.
pub fn graph_clustering(g: &SocialGraph) -> Result<ClusteringEstimate, EstimateError> {
    let mut mark = vec![false; g.node_count()];
    let mut per_ego = Vec::new();
    let mut skipped = 0;
    for v in g.nodes() {
        let nb = g.neighbors(v);
        let k = nb.len();
        if k < 2 {
            skipped += 1;
            continue;
        }
        for w in nb {
            mark[w.index()] = true;
        }
        let mut twice_m = 0usize;
        for w in nb {
            twice_m += g.neighbors(*w).iter().filter(|x| mark[x.index()]).count();
        }
        for w in nb {
            mark[w.index()] = false;
        }
        per_ego.push((k as u32, twice_m as f64 / (k * (k - 1)) as f64));
    }
    summarize(per_ego, skipped)
}

/// Pearson correlation of endpoint degrees, each edge counted in both
/// orientations.
pub fn assortativity_from_pairs(pairs: &[(u32, u32)]) -> Result<f64, EstimateError> {
    if pairs.len() < 2 {
        return Err(EstimateError::TooFewEdges { got: pairs.len(), min: 2 });
    }
    let n = 2.0 * pairs.len() as f64;
    let mu = pairs.iter().map(|&(a, b)| a as f64 + b as f64).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for &(a, b) in pairs {
        let (x, y) = (a as f64 - mu, b as f64 - mu);
        num += 2.0 * x * y;
        den += x * x + y * y;
    }
    if den == 0.0 {
        return Err(EstimateError::ZeroVariance);
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Assortativity over the union of the ego networks' edges. An edge seen in
/// several ego networks counts once; degrees are the declared ones.
pub fn assortativity(egonets: &[EgoNet]) -> Result<f64, EstimateError> {
    let mut degree: HashMap<NodeId, u32> = HashMap::new();
    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::new();
    for e in egonets {
        for m in &e.members {
            degree.insert(m.node, m.degree);
        }
        edges.extend(e.edges.iter().copied());
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    let pairs: Vec<(u32, u32)> = edges.iter().map(|(a, b)| (degree[a], degree[b])).collect();
    assortativity_from_pairs(&pairs)
}

pub fn graph_assortativity(g: &SocialGraph) -> Result<f64, EstimateError> {
    let pairs: Vec<(u32, u32)> = g.edges().map(|(a, b)| (g.degree(a) as u32, g.degree(b) as u32)).collect();
    assortativity_from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::{CacheMode, Frontend};
    use crate::graph::{read_edge_list, SocialGraph};
    use std::io::Cursor;

    fn g(s: &str) -> SocialGraph {
        read_edge_list(Cursor::new(s)).unwrap()
    }

    fn egonets(g: &SocialGraph, egos: &[u32]) -> Vec<EgoNet> {
        let fe = Frontend::new(g, CacheMode::Shared);
        egos.iter().map(|&v| fe.collect_egonet(NodeId(v)).unwrap()).collect()
    }

    #[test]
    fn clustering_small_cases() {
        let tri = g("a b\nb c\nc a\n");
        assert_eq!(clustering(&egonets(&tri, &[0])).unwrap().global, 1.0);
        let star = g("c a\nc b\nc d\nc e\n");
        let est = clustering(&egonets(&star, &[0, 1])).unwrap();
        assert_eq!(est.global, 0.0);
        assert_eq!(est.skipped, 1);
        // K4 minus edge c-d, ego a has neighbors b, c, d with edges b-c, b-d
        let k4m = g("a b\na c\na d\nb c\nb d\n");
        let c = clustering(&egonets(&k4m, &[0])).unwrap().global;
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(clustering(&egonets(&star, &[1])), Err(EstimateError::NoUsableEgo));
    }

    #[test]
    fn curve_bins_cover_degrees() {
        let mut prev = (0, 1);
        assert_eq!(curve_bin(0), prev);
        for k in 1..100_000 {
            let (lo, hi) = curve_bin(k);
            assert!(lo <= k && k < hi, "{k}: {lo}..{hi}");
            assert!(lo == prev.0 || lo == prev.1);
            prev = (lo, hi);
        }
        assert_eq!(curve_bin(63), (63, 64));
    }

    #[test]
    fn assortativity_cases() {
        let star = g("c a\nc b\nc d\n");
        let r = assortativity(&egonets(&star, &[0])).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        let cycle = g("a b\nb c\nc d\nd a\n");
        assert_eq!(graph_assortativity(&cycle), Err(EstimateError::ZeroVariance));
        let cliques = g("a b\nb c\nc a\np q\np r\np s\np t\nq r\nq s\nq t\nr s\nr t\ns t\n");
        assert!((graph_assortativity(&cliques).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_egonets_count_edges_once() {
        let k4m = g("a b\na c\na d\nb c\nb d\ne a\n");
        let all: Vec<u32> = (0..5).collect();
        let nets = egonets(&k4m, &all);
        let doubled: Vec<EgoNet> = nets.iter().chain(nets.iter()).cloned().collect();
        assert_eq!(assortativity(&nets).unwrap(), graph_assortativity(&k4m).unwrap());
        assert_eq!(assortativity(&doubled).unwrap(), graph_assortativity(&k4m).unwrap());
    }
}
