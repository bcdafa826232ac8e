//! Plain-text edge-list and attribute formats.
//!
//! Edge list: one `tok_a tok_b` pair per line, `#` starts a comment.
//! Attributes: one `token user_id region_id QQQQ` record per line.
//! Output uses LF endings and ASCII decimal throughout.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{GraphError, NodeAttributes, PrivacySettings, SocialGraph};
#[cfg(test)]
use super::NodeId;

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SocialGraph, GraphError> {
    read_edge_list(BufReader::new(File::open(path)?))
}

/// Node tokens map to dense ids in first-appearance order.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<SocialGraph, GraphError> {
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str| -> u32 {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = tokens.len() as u32;
        tokens.push(tok.to_owned());
        index.insert(tok.to_owned(), i);
        i
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let mut fields = strip_comment(&line).split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (None, _, _) => continue,
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: "expected exactly two node tokens".into(),
                })
            }
        };
        if a == b {
            return Err(GraphError::SelfLoop { line: lineno, token: a.to_owned() });
        }
        let (u, v) = (intern(a), intern(b));
        edges.push((u, v));
    }
    let g = SocialGraph::from_edges(tokens.len(), &edges)?;
    Ok(g.with_tokens(tokens))
}

/// Each edge once (`u < v` by index), sorted, as `token token\n`.
pub fn write_edge_list<W: Write>(g: &SocialGraph, mut w: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.token(u), g.token(v))?;
    }
    Ok(())
}

pub fn load_attributes(path: impl AsRef<Path>, g: SocialGraph) -> Result<SocialGraph, GraphError> {
    read_attributes(BufReader::new(File::open(path)?), g)
}

/// Attaches attribute records to `g`.
///
/// Tokens not present in the edge list become isolated nodes. Nodes with no
/// record keep region 0 and `Q = 1111` and receive the smallest user ids not
/// used by any record.
pub fn read_attributes<R: BufRead>(reader: R, mut g: SocialGraph) -> Result<SocialGraph, GraphError> {
    let mut index = g.token_index();
    let mut records: Vec<Option<NodeAttributes>> = vec![None; g.node_count()];
    let mut used = HashSet::new();
    let mut max_region = 0u16;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let fields: Vec<&str> = strip_comment(&line).split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |msg: &str| GraphError::Parse { line: lineno, msg: msg.to_owned() };
        if fields.len() != 4 {
            return Err(bad("expected `token user_id region_id privacy`"));
        }
        let user_id: u32 = fields[1].parse().map_err(|_| bad("user_id is not a 32-bit unsigned integer"))?;
        let region: u16 = fields[2].parse().map_err(|_| bad("region_id is not a small unsigned integer"))?;
        let privacy = PrivacySettings::parse(fields[3])
            .ok_or_else(|| bad("privacy value must be four binary digits in [0000, 1111]"))?;
        if !used.insert(user_id) {
            return Err(GraphError::DuplicateUserId { line: lineno, user_id });
        }
        max_region = max_region.max(region);
        let attrs = NodeAttributes { user_id, region, privacy };
        let v = match index.get(fields[0]) {
            Some(&v) => v,
            None => {
                let v = g.push_isolated(fields[0].to_owned(), attrs);
                index.insert(fields[0].to_owned(), v);
                records.push(None);
                v
            }
        };
        if records[v.index()].is_some() {
            return Err(bad("node listed twice"));
        }
        records[v.index()] = Some(attrs);
    }
    let mut fresh = 0u32;
    let attrs = records
        .into_iter()
        .map(|r| {
            r.unwrap_or_else(|| {
                while used.contains(&fresh) {
                    fresh += 1;
                }
                used.insert(fresh);
                NodeAttributes::with_user_id(fresh)
            })
        })
        .collect();
    g.set_attributes(attrs, max_region);
    Ok(g)
}

pub fn write_attributes<W: Write>(g: &SocialGraph, mut w: W) -> std::io::Result<()> {
    for v in g.nodes() {
        let a = g.attrs(v);
        writeln!(w, "{} {} {} {}", g.token(v), a.user_id, a.region, a.privacy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<SocialGraph, GraphError> {
        read_edge_list(Cursor::new(s))
    }

    #[test]
    fn path_graph() {
        let g = parse("a b\nb c\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        let deg: Vec<usize> = g.nodes().map(|v| g.degree(v)).collect();
        assert_eq!(deg, vec![1, 2, 1]);
        assert_eq!(g.token(NodeId(2)), "c");
    }

    #[test]
    fn reversed_duplicate_collapses() {
        let g = parse("a b\nb a\n").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn empty_and_comments() {
        let g = parse("").unwrap();
        assert_eq!(g.node_count(), 0);
        assert!(g.validate().is_empty());
        let g = parse("# header\n\na b # trailing\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_and_self_loop_report_line() {
        match parse("a b\nc\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse("a b\nb c d\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse("a b\n\nx x\n") {
            Err(GraphError::SelfLoop { line, token }) => assert_eq!((line, token.as_str()), (3, "x")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn attributes_read_and_default() {
        let g = parse("a b\nb c\n").unwrap();
        let g = read_attributes(Cursor::new("a 42 3 1111\nb 0 0 1101\n"), g).unwrap();
        let a = g.attrs(NodeId(0));
        assert_eq!((a.user_id, a.region, a.privacy), (42, 3, PrivacySettings::DEFAULT));
        assert!(!g.attrs(NodeId(1)).privacy.can_view_friends());
        // c had no record: default privacy, fresh id distinct from 0 and 42
        let c = g.attrs(NodeId(2));
        assert_eq!(c.privacy, PrivacySettings::DEFAULT);
        assert_eq!(c.region, 0);
        assert_eq!(c.user_id, 1);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn attributes_errors() {
        let g = parse("a b\n").unwrap();
        assert!(matches!(
            read_attributes(Cursor::new("a 42 0 1111\nb 42 0 1111\n"), g.clone()),
            Err(GraphError::DuplicateUserId { line: 2, user_id: 42 })
        ));
        assert!(matches!(
            read_attributes(Cursor::new("a 1 0 1121\n"), g.clone()),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_attributes(Cursor::new("a 1 0 16\n"), g),
            Err(GraphError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_token_becomes_isolated() {
        let g = parse("a b\n").unwrap();
        let g = read_attributes(Cursor::new("z 9 0 1111\n"), g).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.isolated_nodes(), vec![NodeId(2)]);
        assert_eq!(g.token(NodeId(2)), "z");
        assert!(g.validate().is_empty());
    }

    #[test]
    fn write_round_trip() {
        let g = parse("x y\ny z\nz x\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x y\nx z\ny z\n");
        let h = read_edge_list(Cursor::new(buf)).unwrap();
        assert_eq!(h.edge_count(), 3);
        let mut abuf = Vec::new();
        write_attributes(&g, &mut abuf).unwrap();
        assert_eq!(String::from_utf8(abuf).unwrap(), "x 0 0 1111\ny 1 0 1111\nz 2 0 1111\n");
    }
}
