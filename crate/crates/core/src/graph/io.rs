//! Line-oriented graph format:
//!
//! ```text
//! # comment
//! p <n> <m>
//! e <u> <v>      (m lines, 0-based ids)
//! ```

use std::fmt::Write as _;

use super::{Graph, GraphError};

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut graph: Option<(Graph, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: &str| GraphError::Parse { line: line_no, msg: msg.to_string() };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let tag = fields.next().unwrap();
        let nums: Vec<usize> = fields
            .map(|f| f.parse::<usize>().map_err(|_| err(&format!("bad integer '{f}'"))))
            .collect::<Result<_, _>>()?;
        match (tag, nums.as_slice(), graph.as_mut()) {
            ("p", &[n, m], None) => graph = Some((Graph::empty(n), m)),
            ("p", _, Some(_)) => return Err(err("duplicate header")),
            ("p", _, None) => return Err(err("header must be 'p <n> <m>'")),
            ("e", &[u, v], Some((g, _))) => g.add_edge(u, v).map_err(|e| err(&e.to_string()))?,
            ("e", _, Some(_)) => return Err(err("edge must be 'e <u> <v>'")),
            ("e", _, None) => return Err(err("edge before header")),
            (other, _, _) => return Err(err(&format!("unknown record '{other}'"))),
        }
    }
    let (g, m) = graph.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    if g.edge_count() != m {
        return Err(GraphError::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", g.edge_count()),
        });
    }
    Ok(g)
}

/// Canonical form: header, then edges `u < v` in lexicographic order.
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("p {} {}\n", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}
