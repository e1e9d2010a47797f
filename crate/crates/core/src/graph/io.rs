use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Graph, GraphError};

/// Reads a whitespace-separated edge list. Lines starting with `#` or `%`
/// are comments; tokens after the first two on a line are ignored. Labels
/// are assigned dense indices in order of first appearance.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str, labels: &mut Vec<String>| -> usize {
        *index.entry(tok.to_string()).or_insert_with(|| {
            labels.push(tok.to_string());
            labels.len() - 1
        })
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b)) = (tokens.next(), tokens.next()) else {
            return Err(GraphError::Parse {
                line: i + 1,
                message: format!("expected two endpoints, found {trimmed:?}"),
            });
        };
        let u = intern(a, &mut labels);
        let v = intern(b, &mut labels);
        edges.push((u, v));
    }
    Graph::from_labeled_edges(labels, &edges)
}

/// Writes one `u v` line per edge using node labels. Isolated nodes are not
/// representable in this format and are dropped.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v))?;
    }
    Ok(())
}
