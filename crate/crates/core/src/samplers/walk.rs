//! Simple and Metropolis-Hastings random walks.

use std::collections::HashSet;

use rand::Rng;

use super::{ChainCrawler, Method, SampleError, StepEvent, WalkTrace};
use crate::crawl::Fetch;
use crate::graph::{NodeId, SocialGraph};

/// Probability of accepting a move from a node of degree `k_u` to one of
/// degree `k_w`: `min(1, k_u / k_w)`.
#[inline]
pub fn acceptance_probability(k_u: usize, k_w: usize) -> f64 {
    if k_w <= k_u {
        1.0
    } else {
        k_u as f64 / k_w as f64
    }
}

/// Uniform-neighbor walk. A friend with a hidden list is excluded and the
/// step re-drawn among the remaining friends; the step still ends in a move.
pub fn rw_crawl<R: Rng>(
    crawler: &mut ChainCrawler<'_, '_>,
    seed: NodeId,
    budget: usize,
    rng: &mut R,
) -> Result<WalkTrace, SampleError> {
    if budget == 0 {
        return Err(SampleError::ZeroBudget);
    }
    let chain = crawler.chain_id();
    let mut cur = crawler.valid_seed(seed)?;
    let mut trace = WalkTrace::new(chain, Method::Rw, seed, budget);
    trace.push(seed, StepEvent::Move);
    let mut excluded: Vec<usize> = Vec::new();
    for iteration in 1..budget {
        excluded.clear();
        let next = loop {
            let k = cur.degree;
            if excluded.len() == k {
                return Err(SampleError::Stalled { chain, iteration, node: cur.node });
            }
            // r-th friend not yet excluded; `excluded` is kept sorted
            let mut idx = rng.random_range(0..k - excluded.len());
            for &e in &excluded {
                if e <= idx {
                    idx += 1;
                }
            }
            match crawler.fetch(cur.friends[idx].node)? {
                Fetch::Valid(info) => break info,
                Fetch::Invalid => {
                    trace.backtracks += 1;
                    let at = excluded.partition_point(|&e| e < idx);
                    excluded.insert(at, idx);
                }
            }
        };
        trace.push(next.node, StepEvent::Move);
        cur = next;
    }
    Ok(trace)
}

/// Metropolis-Hastings walk targeting the uniform distribution.
///
/// Each iteration proposes a uniform friend `w` of the current node `u`.
/// If `w` hides its friend list the walk stays at `u` (a backtrack). Otherwise
/// the move is accepted with probability `min(1, k_u / k_w)` using declared
/// degrees, and a rejection records `u` again. No random number is drawn
/// when `k_w <= k_u`, so on regular graphs the walk consumes its stream
/// exactly like [`rw_crawl`].
pub fn mhrw_crawl<R: Rng>(
    crawler: &mut ChainCrawler<'_, '_>,
    seed: NodeId,
    budget: usize,
    rng: &mut R,
) -> Result<WalkTrace, SampleError> {
    if budget == 0 {
        return Err(SampleError::ZeroBudget);
    }
    let chain = crawler.chain_id();
    let mut cur = crawler.valid_seed(seed)?;
    let mut trace = WalkTrace::new(chain, Method::Mhrw, seed, budget);
    trace.push(seed, StepEvent::Move);
    let mut known_hidden: HashSet<NodeId> = HashSet::new();
    for iteration in 1..budget {
        let k_u = cur.degree;
        let w = cur.friends[rng.random_range(0..k_u)].node;
        match crawler.fetch(w)? {
            Fetch::Invalid => {
                trace.backtracks += 1;
                known_hidden.insert(w);
                if cur.friends.iter().all(|f| known_hidden.contains(&f.node)) {
                    return Err(SampleError::Stalled { chain, iteration, node: cur.node });
                }
                trace.push(cur.node, StepEvent::Backtrack);
            }
            Fetch::Valid(info) => {
                trace.proposals += 1;
                let k_w = info.degree;
                if k_w <= k_u || rng.random::<f64>() <= acceptance_probability(k_u, k_w) {
                    trace.accepted += 1;
                    trace.push(w, StepEvent::Move);
                    cur = info;
                } else {
                    trace.push(cur.node, StepEvent::SelfLoop);
                }
            }
        }
    }
    Ok(trace)
}

/// Explicit one-step transition matrix of the walk on `g` (every node
/// treated as crawlable). Row `u` sums to 1; isolated nodes self-loop.
pub fn transition_matrix(g: &SocialGraph, method: Method) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut p = vec![vec![0.0; n]; n];
    for u in g.nodes() {
        let k_u = g.degree(u);
        let row = &mut p[u.index()];
        if k_u == 0 {
            row[u.index()] = 1.0;
            continue;
        }
        let mut out = 0.0;
        for &w in g.neighbors(u) {
            let pw = match method {
                Method::Mhrw => acceptance_probability(k_u, g.degree(w)) / k_u as f64,
                _ => 1.0 / k_u as f64,
            };
            row[w.index()] = pw;
            out += pw;
        }
        row[u.index()] = 1.0 - out;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::{CacheMode, Frontend};
    use crate::graph::{read_attributes, read_edge_list, SocialGraph};
    use crate::rng::seeded;
    use std::io::Cursor;

    fn graph(edges: &str) -> SocialGraph {
        read_edge_list(Cursor::new(edges)).unwrap()
    }

    fn freq(trace: &WalkTrace, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n];
        for v in &trace.nodes {
            c[v.index()] += 1.0;
        }
        c.iter().map(|x| x / trace.len() as f64).collect()
    }

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    }

    /// Power iteration on the lazy chain (same stationary vector, no periodicity).
    fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
        let n = p.len();
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..200_000 {
            let mut y = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    y[j] += x[i] * 0.5 * (p[i][j] + if i == j { 1.0 } else { 0.0 });
                }
            }
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            x = y;
            if d < 1e-15 {
                break;
            }
        }
        x
    }

    fn run(g: &SocialGraph, method: Method, seed: u32, budget: usize, rng_seed: u64) -> WalkTrace {
        let fe = Frontend::new(g, CacheMode::Shared);
        let mut c = ChainCrawler::new(&fe, 0);
        let mut rng = seeded(rng_seed);
        match method {
            Method::Rw => rw_crawl(&mut c, NodeId(seed), budget, &mut rng).unwrap(),
            Method::Mhrw => mhrw_crawl(&mut c, NodeId(seed), budget, &mut rng).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn path_mhrw_matrix_entries_and_uniform_stationary() {
        let g = graph("a b\nb c\n");
        let p = transition_matrix(&g, Method::Mhrw);
        assert_eq!(p[0][1], 0.5);
        assert_eq!(p[0][0], 0.5);
        assert_eq!(p[1][0], 0.5);
        assert_eq!(p[1][2], 0.5);
        for x in stationary(&p) {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn path_rw_frequencies_follow_degree() {
        // pi = k / 2|E| = (1/4, 1/2, 1/4); bipartite, so time averages over both parities
        let g = graph("a b\nb c\n");
        let pi = stationary(&transition_matrix(&g, Method::Rw));
        let expect = [0.25, 0.5, 0.25];
        for (x, e) in pi.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
        let f = freq(&run(&g, Method::Rw, 0, 100_000, 3), 3);
        assert!(tv(&f, &expect) < 0.01, "{f:?}");
    }

    #[test]
    fn star_rw_and_mhrw() {
        // S4: center + 3 leaves, |E| = 3
        let g = graph("c x\nc y\nc z\n");
        let rw = stationary(&transition_matrix(&g, Method::Rw));
        assert!((rw[0] - 0.5).abs() < 1e-12 && (rw[1] - 1.0 / 6.0).abs() < 1e-12);
        let p = transition_matrix(&g, Method::Mhrw);
        assert!((p[1][0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((p[1][1] - 2.0 / 3.0).abs() < 1e-15);
        let mh = stationary(&p);
        assert!(mh.iter().all(|x| (x - 0.25).abs() < 1e-12));
        let f = freq(&run(&g, Method::Mhrw, 1, 1_000_000, 5), 4);
        assert!(tv(&f, &[0.25; 4]) < 0.01, "{f:?}");
        let f = freq(&run(&g, Method::Rw, 1, 100_000, 5), 4);
        assert!(tv(&f, &[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) < 0.01);
    }

    #[test]
    fn triangle_rw_uniform_chi_square() {
        let g = graph("a b\nb c\nc a\n");
        let t = run(&g, Method::Rw, 0, 100_000, 8);
        let n = t.len() as f64;
        let mut counts = [0.0; 3];
        for v in &t.nodes {
            counts[v.index()] += 1.0;
        }
        let e = n / 3.0;
        let stat: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
        // chi-square(2) survival at p = 0.01 is 9.21
        assert!(stat < 9.21, "{stat}");
    }

    #[test]
    fn regular_graph_mhrw_equals_rw() {
        let g = graph("a b\nb c\nc d\nd e\ne a\na c\nb d\nc e\nd a\ne b\n"); // K5
        let rw = run(&g, Method::Rw, 0, 5000, 77);
        let mh = run(&g, Method::Mhrw, 0, 5000, 77);
        assert_eq!(rw.nodes, mh.nodes);
        assert_eq!(mh.accepted, mh.proposals);
    }

    #[test]
    fn consecutive_entries_are_adjacent_or_equal() {
        let g = graph("a b\nb c\nc d\nd a\na c\nd e\n");
        for m in [Method::Rw, Method::Mhrw] {
            let t = run(&g, m, 0, 2000, 1);
            assert_eq!(t.len(), 2000);
            for w in t.nodes.windows(2) {
                assert!(w[0] == w[1] || g.has_edge(w[0], w[1]));
            }
        }
    }

    #[test]
    fn hidden_friends_never_visited_and_backtracks_counted() {
        let g = graph("a b\nb c\nc a\nc h\nh a\n");
        let g = read_attributes(Cursor::new("h 100 0 1101\n"), g).unwrap();
        for m in [Method::Rw, Method::Mhrw] {
            let t = run(&g, m, 0, 5000, 2);
            assert!(t.nodes.iter().all(|&v| v != NodeId(3)));
            assert!(t.backtracks > 0);
            for w in t.nodes.windows(2) {
                assert!(w[0] == w[1] || g.has_edge(w[0], w[1]));
            }
        }
        // MHRW over the visible triangle stays uniform
        let t = run(&g, Method::Mhrw, 0, 300_000, 4);
        let f = freq(&t, 4);
        assert!(tv(&f, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) < 0.01, "{f:?}");
    }

    #[test]
    fn stall_and_seed_errors() {
        let g = graph("a h\n");
        let g = read_attributes(Cursor::new("h 1 0 0000\n"), g).unwrap();
        let fe = Frontend::new(&g, CacheMode::Shared);
        let mut rng = seeded(0);
        let mut c = ChainCrawler::new(&fe, 4);
        assert_eq!(
            rw_crawl(&mut c, NodeId(0), 10, &mut rng),
            Err(SampleError::Stalled { chain: 4, iteration: 1, node: NodeId(0) })
        );
        assert!(matches!(
            mhrw_crawl(&mut c, NodeId(0), 10, &mut rng),
            Err(SampleError::Stalled { iteration: 1, .. })
        ));
        assert_eq!(mhrw_crawl(&mut c, NodeId(1), 10, &mut rng), Err(SampleError::InvalidSeed(NodeId(1))));
        let before = fe.ledger();
        let mut c = ChainCrawler::new(&fe, 0);
        assert_eq!(rw_crawl(&mut c, NodeId(1), 10, &mut rng), Err(SampleError::InvalidSeed(NodeId(1))));
        assert_eq!(fe.ledger(), before, "seed validity is checked before any fetch");
    }

    #[test]
    fn acceptance_counters() {
        let g = graph("c x\nc y\nc z\n");
        let t = run(&g, Method::Mhrw, 1, 30_000, 9);
        assert_eq!(t.proposals, 29_999);
        let selfs = t.events.iter().filter(|e| **e == StepEvent::SelfLoop).count() as u64;
        assert_eq!(t.proposals - t.accepted, selfs);
        assert!(t.acceptance_rate() > 0.0 && t.acceptance_rate() < 1.0);
    }
}
