//! Text formats for graphs, tree decompositions, change scripts, and
//! weight assignments.
//!
//! All formats are line-oriented. Blank lines and lines starting with `#`
//! are ignored. Parse errors carry 1-based line numbers; errors about the
//! file as a whole use line 0.

use crate::decomp::TreeDecomposition;
use crate::graph::{BulkChange, Graph};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, msg: impl Into<String>) -> Self {
        ParseError { line, msg: msg.into() }
    }
}

fn significant_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_node(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| ParseError::new(line, format!("expected node id, got `{tok}`")))
}

/// Parses a graph file: header `n <count> <directed|undirected>`, then one
/// `e u v` line per edge.
pub fn parse_graph(input: &str) -> Result<Graph, ParseError> {
    let mut lines = significant_lines(input);
    let (hline, header) = lines.next().ok_or_else(|| ParseError::new(0, "empty graph file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (n, directed) = match toks.as_slice() {
        ["n", count, kind] => {
            let n = count
                .parse::<usize>()
                .map_err(|_| ParseError::new(hline, format!("bad node count `{count}`")))?;
            let directed = match *kind {
                "directed" => true,
                "undirected" => false,
                other => {
                    return Err(ParseError::new(
                        hline,
                        format!("expected `directed` or `undirected`, got `{other}`"),
                    ))
                }
            };
            (n, directed)
        }
        _ => {
            return Err(ParseError::new(hline, "expected header `n <count> <directed|undirected>`"))
        }
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (lno, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["e", u, v] => {
                let u = parse_node(u, lno)?;
                let v = parse_node(v, lno)?;
                let key = if directed || u <= v { (u, v) } else { (v, u) };
                if !seen.insert(key) {
                    return Err(ParseError::new(lno, format!("duplicate edge {u} {v}")));
                }
                edges.push((u, v));
            }
            _ => return Err(ParseError::new(lno, format!("expected `e u v`, got `{line}`"))),
        }
    }
    Graph::with_edges(n, directed, edges).map_err(|e| ParseError::new(0, e.to_string()))
}

pub fn format_graph(g: &Graph) -> String {
    let kind = if g.is_directed() { "directed" } else { "undirected" };
    let mut out = format!("n {} {}\n", g.n(), kind);
    if g.is_directed() {
        for (u, v) in g.edges() {
            let _ = writeln!(out, "e {u} {v}");
        }
    } else {
        for (u, v) in g.undirected_edges() {
            let _ = writeln!(out, "e {u} {v}");
        }
    }
    out
}

/// Parses a decomposition file: `t <id> <parent-id|-1>` lines declaring the
/// tree, then `b <id> v1 v2 ...` lines filling the bags. Tree node ids must
/// be dense starting at 0.
pub fn parse_decomposition(input: &str) -> Result<TreeDecomposition, ParseError> {
    let mut parents: BTreeMap<usize, Option<usize>> = BTreeMap::new();
    let mut bags: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (lno, line) in significant_lines(input) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["t", id, parent] => {
                let id = parse_node(id, lno)?;
                let parent = if *parent == "-1" { None } else { Some(parse_node(parent, lno)?) };
                if parents.insert(id, parent).is_some() {
                    return Err(ParseError::new(lno, format!("duplicate tree node {id}")));
                }
            }
            ["b", id, verts @ ..] => {
                let id = parse_node(id, lno)?;
                let bag = bags.entry(id).or_default();
                for v in verts {
                    bag.insert(parse_node(v, lno)?);
                }
            }
            _ => {
                return Err(ParseError::new(
                    lno,
                    format!("expected `t <id> <parent|-1>` or `b <id> v...`, got `{line}`"),
                ))
            }
        }
    }
    let len = parents.len();
    if len == 0 {
        return Err(ParseError::new(0, "no tree nodes declared"));
    }
    let mut parent_vec = Vec::with_capacity(len);
    for i in 0..len {
        match parents.get(&i) {
            Some(p) => parent_vec.push(*p),
            None => {
                return Err(ParseError::new(0, format!("tree node ids not dense: {i} missing")))
            }
        }
    }
    for id in bags.keys() {
        if *id >= len {
            return Err(ParseError::new(0, format!("bag for undeclared tree node {id}")));
        }
    }
    let bag_vec = (0..len).map(|i| bags.remove(&i).unwrap_or_default()).collect();
    TreeDecomposition::new(parent_vec, bag_vec).map_err(|e| ParseError::new(0, e.to_string()))
}

pub fn format_decomposition(t: &TreeDecomposition) -> String {
    let mut out = String::new();
    for i in 0..t.len() {
        match t.parent(i) {
            Some(p) => {
                let _ = writeln!(out, "t {i} {p}");
            }
            None => {
                let _ = writeln!(out, "t {i} -1");
            }
        }
    }
    for i in 0..t.len() {
        let _ = write!(out, "b {i}");
        for v in t.bag(i) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Parses a change script: blocks delimited by `change` ... `end`, each
/// containing `+ u v` and `- u v` lines. Each block is one bulk change.
pub fn parse_change_script(input: &str) -> Result<Vec<BulkChange>, ParseError> {
    let mut script = Vec::new();
    let mut current: Option<BulkChange> = None;
    let mut last_line = 0;
    for (lno, line) in significant_lines(input) {
        last_line = lno;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (toks.as_slice(), current.as_mut()) {
            (["change"], None) => current = Some(BulkChange::new([], [])),
            (["change"], Some(_)) => {
                return Err(ParseError::new(lno, "nested `change` block"));
            }
            (["end"], Some(_)) => script.push(current.take().unwrap()),
            (["+", u, v], Some(c)) => {
                c.inserted.insert((parse_node(u, lno)?, parse_node(v, lno)?));
            }
            (["-", u, v], Some(c)) => {
                c.deleted.insert((parse_node(u, lno)?, parse_node(v, lno)?));
            }
            (_, None) => {
                return Err(ParseError::new(lno, format!("expected `change`, got `{line}`")))
            }
            (_, Some(_)) => {
                return Err(ParseError::new(
                    lno,
                    format!("expected `+ u v`, `- u v` or `end`, got `{line}`"),
                ))
            }
        }
    }
    if current.is_some() {
        return Err(ParseError::new(last_line, "unterminated `change` block"));
    }
    Ok(script)
}

pub fn format_change_script(script: &[BulkChange]) -> String {
    let mut out = String::new();
    for c in script {
        out.push_str("change\n");
        for (u, v) in &c.inserted {
            let _ = writeln!(out, "+ {u} {v}");
        }
        for (u, v) in &c.deleted {
            let _ = writeln!(out, "- {u} {v}");
        }
        out.push_str("end\n");
    }
    out
}

/// Parses a weight file: `w u v <integer>` lines. With `skew` set, each line
/// also defines the reverse orientation as the negation, and giving both
/// orientations explicitly is an error.
pub fn parse_weights(
    input: &str,
    skew: bool,
) -> Result<BTreeMap<(usize, usize), BigInt>, ParseError> {
    let mut weights = BTreeMap::new();
    for (lno, line) in significant_lines(input) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["w", u, v, value] => {
                let u = parse_node(u, lno)?;
                let v = parse_node(v, lno)?;
                let value: BigInt = value
                    .parse()
                    .map_err(|_| ParseError::new(lno, format!("bad weight `{value}`")))?;
                if skew && u == v {
                    return Err(ParseError::new(lno, "skew weight on a self-loop"));
                }
                if weights.insert((u, v), value.clone()).is_some() {
                    return Err(ParseError::new(lno, format!("duplicate weight for {u} {v}")));
                }
                if skew && weights.insert((v, u), -value).is_some() {
                    return Err(ParseError::new(
                        lno,
                        format!("both orientations of {u} {v} given under skew completion"),
                    ));
                }
            }
            _ => return Err(ParseError::new(lno, format!("expected `w u v <int>`, got `{line}`"))),
        }
    }
    Ok(weights)
}

/// Formats a weight map. With `skew` set, only the `u < v` orientation is
/// written; the reader reconstitutes the other half.
pub fn format_weights(weights: &BTreeMap<(usize, usize), BigInt>, skew: bool) -> String {
    let mut out = String::new();
    for ((u, v), w) in weights {
        if skew && u > v {
            continue;
        }
        let _ = writeln!(out, "w {u} {v} {w}");
    }
    out
}
