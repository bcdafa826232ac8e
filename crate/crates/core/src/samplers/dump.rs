//! Trace dump: one `chain_id iteration node_token event` line per iteration.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{Method, SampleError, StepEvent, WalkTrace};
use crate::graph::SocialGraph;

pub fn write_trace_dump<W: Write>(traces: &[WalkTrace], g: &SocialGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# chain_id iteration node event")?;
    for t in traces {
        for (i, (v, e)) in t.nodes.iter().zip(&t.events).enumerate() {
            writeln!(w, "{} {} {} {}", t.chain_id, i, g.token(*v), e.tag())?;
        }
    }
    Ok(())
}

/// Rebuilds traces from a dump. Counters are recomputed from the event tags;
/// `proposals` counts moves and self-loops after the seed.
pub fn read_trace_dump<R: BufRead>(reader: R, g: &SocialGraph, method: Method) -> Result<Vec<WalkTrace>, SampleError> {
    let index = g.token_index();
    let mut chains: BTreeMap<u32, WalkTrace> = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let bad = |msg: &str| SampleError::Parse { line: line_no, msg: msg.to_owned() };
        let line = line.map_err(|e| bad(&e.to_string()))?;
        let body = line.split('#').next().unwrap_or("");
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 4 {
            return Err(bad("expected `chain_id iteration node event`"));
        }
        let chain: u32 = f[0].parse().map_err(|_| bad("bad chain id"))?;
        let iteration: usize = f[1].parse().map_err(|_| bad("bad iteration"))?;
        let node = *index.get(f[2]).ok_or_else(|| bad("unknown node token"))?;
        let event = StepEvent::from_tag(f[3]).ok_or_else(|| bad("unknown event tag"))?;
        let t = chains.entry(chain).or_insert_with(|| WalkTrace::new(chain, method, node, 0));
        if iteration != t.len() {
            return Err(bad("iterations must be consecutive from 0 within a chain"));
        }
        if iteration > 0 {
            match event {
                StepEvent::Move => {
                    t.proposals += 1;
                    t.accepted += 1;
                }
                StepEvent::SelfLoop => t.proposals += 1,
                StepEvent::Backtrack => t.backtracks += 1,
            }
        }
        t.push(node, event);
    }
    let mut out: Vec<WalkTrace> = chains.into_values().collect();
    if method != Method::Mhrw {
        for t in &mut out {
            t.proposals = 0;
            t.accepted = 0;
        }
    }
    Ok(out)
}
