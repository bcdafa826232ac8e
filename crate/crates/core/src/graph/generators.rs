//! Seeded random graph models.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GraphError, SocialGraph};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SyntheticModel {
    ErdosRenyi { n: usize, p: f64 },
    /// Preferential attachment starting from a complete core on `m` nodes.
    BarabasiAlbert { n: usize, m: usize },
    WattsStrogatz { n: usize, k: usize, beta: f64 },
    /// Two `G(n_per, p_in)` blocks joined by `bridges` random cross edges.
    /// Block membership is node index `< n_per` vs `>= n_per`.
    TwoCommunity { n_per: usize, p_in: f64, bridges: usize },
}

impl SyntheticModel {
    fn check(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::InvalidParameter(m));
        match *self {
            Self::ErdosRenyi { n, p } => {
                if n < 2 {
                    return bad(format!("erdos_renyi needs n >= 2, got {n}"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("erdos_renyi needs 0 <= p <= 1, got {p}"));
                }
            }
            Self::BarabasiAlbert { n, m } => {
                if n < 2 || m < 1 || m >= n {
                    return bad(format!("barabasi_albert needs n >= 2 and 1 <= m < n, got n={n} m={m}"));
                }
            }
            Self::WattsStrogatz { n, k, beta } => {
                if n < 2 || k % 2 != 0 || k >= n {
                    return bad(format!("watts_strogatz needs n >= 2, even k < n, got n={n} k={k}"));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return bad(format!("watts_strogatz needs 0 <= beta <= 1, got {beta}"));
                }
            }
            Self::TwoCommunity { n_per, p_in, bridges } => {
                if n_per < 2 || !(0.0..=1.0).contains(&p_in) || bridges > n_per * n_per {
                    return bad(format!(
                        "two_community needs n_per >= 2, 0 <= p_in <= 1, bridges <= n_per^2, got {n_per} {p_in} {bridges}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Generates a graph. With `largest_component` set, only the largest
/// connected component is kept (relabelled densely).
pub fn gen_synthetic(
    model: SyntheticModel,
    seed: u64,
    largest_component: bool,
) -> Result<SocialGraph, GraphError> {
    model.check()?;
    let mut rng = seeded(seed);
    let (n, edges) = match model {
        SyntheticModel::ErdosRenyi { n, p } => (n, erdos_renyi(n, p, 0, &mut rng)),
        SyntheticModel::BarabasiAlbert { n, m } => (n, barabasi_albert(n, m, &mut rng)),
        SyntheticModel::WattsStrogatz { n, k, beta } => (n, watts_strogatz(n, k, beta, &mut rng)),
        SyntheticModel::TwoCommunity { n_per, p_in, bridges } => {
            let mut edges = erdos_renyi(n_per, p_in, 0, &mut rng);
            edges.extend(erdos_renyi(n_per, p_in, n_per as u32, &mut rng));
            let mut cross = BTreeSet::new();
            while cross.len() < bridges {
                let a = rng.random_range(0..n_per as u32);
                let b = rng.random_range(n_per as u32..2 * n_per as u32);
                if cross.insert((a, b)) {
                    edges.push((a, b));
                }
            }
            (2 * n_per, edges)
        }
    };
    let g = SocialGraph::from_edges(n, &edges)?;
    Ok(if largest_component { g.largest_component() } else { g })
}

/// G(n, p) by geometric edge skipping; node ids are shifted by `offset`.
fn erdos_renyi<R: Rng>(n: usize, p: f64, offset: u32, rng: &mut R) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    if p <= 0.0 {
        return edges;
    }
    if p >= 1.0 {
        for v in 1..n as u32 {
            for w in 0..v {
                edges.push((w + offset, v + offset));
            }
        }
        return edges;
    }
    let lp = (1.0 - p).ln();
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / lp).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((w as u32 + offset, v as u32 + offset));
        }
    }
    edges
}

fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + m * (n - m));
    // every edge endpoint once: sampling from this list is degree-proportional
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * edges.capacity());
    for v in 1..m as u32 {
        for w in 0..v {
            edges.push((w, v));
            endpoints.extend([w, v]);
        }
    }
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for v in m as u32..n as u32 {
        targets.clear();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    edges
}

fn watts_strogatz<R: Rng>(n: usize, k: usize, beta: f64, rng: &mut R) -> Vec<(u32, u32)> {
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    let add = |adj: &mut Vec<BTreeSet<u32>>, a: usize, b: usize| {
        adj[a].insert(b as u32);
        adj[b].insert(a as u32);
    };
    for j in 1..=k / 2 {
        for u in 0..n {
            add(&mut adj, u, (u + j) % n);
        }
    }
    if beta > 0.0 {
        for j in 1..=k / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if !adj[u].contains(&(v as u32)) || rng.random::<f64>() >= beta {
                    continue;
                }
                if adj[u].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let w = rng.random_range(0..n);
                    if w != u && !adj[u].contains(&(w as u32)) {
                        break w;
                    }
                };
                adj[u].remove(&(v as u32));
                adj[v].remove(&(u as u32));
                add(&mut adj, u, w);
            }
        }
    }
    let mut edges = Vec::new();
    for (u, set) in adj.iter().enumerate() {
        edges.extend(set.iter().filter(|&&w| (u as u32) < w).map(|&w| (u as u32, w)));
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{write_edge_list, NodeId};

    #[test]
    fn complete_when_p_is_one() {
        let g = gen_synthetic(SyntheticModel::ErdosRenyi { n: 4, p: 1.0 }, 99, false).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(g.nodes().all(|v| g.degree(v) == 3));
    }

    #[test]
    fn er_edge_density_is_plausible() {
        let g = gen_synthetic(SyntheticModel::ErdosRenyi { n: 2000, p: 0.01 }, 5, false).unwrap();
        let expected = 0.01 * 2000.0 * 1999.0 / 2.0;
        let got = g.edge_count() as f64;
        // ~4.5 standard deviations
        assert!((got - expected).abs() < 4.5 * expected.sqrt(), "{got} vs {expected}");
    }

    #[test]
    fn ba_edge_count_and_min_degree() {
        // reference count: complete core on m nodes plus m edges per later node
        for (n, m) in [(50, 1), (200, 3), (1000, 5)] {
            let g = gen_synthetic(SyntheticModel::BarabasiAlbert { n, m }, 11, false).unwrap();
            assert_eq!(g.edge_count(), m * (m - 1) / 2 + m * (n - m), "n={n} m={m}");
            assert!(g.nodes().all(|v| g.degree(v) >= m));
            assert!(g.is_connected());
        }
    }

    #[test]
    fn ws_without_rewiring_is_ring_lattice() {
        let g = gen_synthetic(SyntheticModel::WattsStrogatz { n: 30, k: 4, beta: 0.0 }, 1, false).unwrap();
        assert!(g.nodes().all(|v| g.degree(v) == 4));
        assert!(g.has_edge(NodeId(0), NodeId(29)));
        assert!(g.has_edge(NodeId(0), NodeId(28)));
        assert!(!g.has_edge(NodeId(0), NodeId(3)));
    }

    #[test]
    fn ws_rewiring_preserves_edge_count() {
        let g = gen_synthetic(SyntheticModel::WattsStrogatz { n: 100, k: 6, beta: 0.3 }, 2, false).unwrap();
        assert_eq!(g.edge_count(), 300);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn two_community_structure() {
        let g = gen_synthetic(SyntheticModel::TwoCommunity { n_per: 50, p_in: 0.2, bridges: 3 }, 4, false)
            .unwrap();
        let cross = g.edges().filter(|(u, v)| (u.0 < 50) != (v.0 < 50)).count();
        assert_eq!(cross, 3);
    }

    #[test]
    fn parameter_errors() {
        use SyntheticModel::*;
        for m in [
            ErdosRenyi { n: 1, p: 0.5 },
            ErdosRenyi { n: 5, p: 1.5 },
            BarabasiAlbert { n: 5, m: 5 },
            BarabasiAlbert { n: 5, m: 0 },
            WattsStrogatz { n: 10, k: 3, beta: 0.1 },
            WattsStrogatz { n: 10, k: 4, beta: -0.1 },
            WattsStrogatz { n: 4, k: 4, beta: 0.0 },
        ] {
            assert!(matches!(gen_synthetic(m, 0, false), Err(GraphError::InvalidParameter(_))), "{m:?}");
        }
    }

    #[test]
    fn generators_are_valid_and_reproducible_over_many_seeds() {
        let models = [
            SyntheticModel::ErdosRenyi { n: 60, p: 0.08 },
            SyntheticModel::BarabasiAlbert { n: 80, m: 3 },
            SyntheticModel::WattsStrogatz { n: 60, k: 4, beta: 0.2 },
        ];
        for model in models {
            for seed in 0..100 {
                let g = gen_synthetic(model, seed, seed % 2 == 0).unwrap();
                assert!(g.validate().is_empty(), "{model:?} seed {seed}");
                let h = gen_synthetic(model, seed, seed % 2 == 0).unwrap();
                let (mut a, mut b) = (Vec::new(), Vec::new());
                write_edge_list(&g, &mut a).unwrap();
                write_edge_list(&h, &mut b).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
