//! Alist interchange format for base parity-check matrices.
//!
//! Layout (all indices 1-based):
//!
//! ```text
//! n m
//! max_vn_degree max_cn_degree
//! <n VN degrees>
//! <m CN degrees>
//! <n lines: CN indices adjacent to each VN>
//! <m lines: VN indices adjacent to each CN>
//! ```
//!
//! Writers that pad short adjacency lines with zeros are accepted; zeros
//! are ignored. Only regular graphs are accepted here, since the toolkit's
//! constructions are (γ,p)-regular; irregular inputs are rejected with the
//! offending degrees.

use crate::graph::{BaseGraph, GraphError};
use std::path::Path;
use thiserror::Error;

/// Parse and validation errors for alist inputs.
#[derive(Debug, Error)]
pub enum AlistError {
    #[error("alist {source_name}: {msg}")]
    Malformed { source_name: String, msg: String },
    #[error("alist {source_name}: index {index} out of range 1..={max}")]
    IndexOutOfRange { source_name: String, index: usize, max: usize },
    #[error(
        "alist {source_name}: irregular graph rejected (VN degrees {vn_degrees:?}, CN degrees {cn_degrees:?})"
    )]
    Irregular { source_name: String, vn_degrees: Vec<usize>, cn_degrees: Vec<usize> },
    #[error("alist {source_name}: VN {vn} adjacency disagrees with the CN rows")]
    Inconsistent { source_name: String, vn: usize },
    #[error("alist {source_name}: {inner}")]
    Graph { source_name: String, inner: GraphError },
}

fn parse_ints(line: &str, what: &str, source_name: &str) -> Result<Vec<usize>, AlistError> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| AlistError::Malformed {
            source_name: source_name.into(),
            msg: format!("{what}: expected integers, got {line:?}"),
        })
}

/// Parses alist text into a validated base graph.
pub fn parse(text: &str, source_name: &str) -> Result<BaseGraph, AlistError> {
    let malformed = |msg: String| AlistError::Malformed { source_name: source_name.into(), msg };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| malformed(format!("unexpected end of input, wanted {what}")))
    };

    let header = parse_ints(next_line("the n m header")?, "header", source_name)?;
    let [n, m] = header[..] else {
        return Err(malformed("header must be exactly \"n m\"".into()));
    };
    if n == 0 || m == 0 {
        return Err(malformed(format!("degenerate dimensions n={n}, m={m}")));
    }
    let _max_degrees = parse_ints(next_line("the max-degree line")?, "max degrees", source_name)?;
    let vn_degrees = parse_ints(next_line("VN degrees")?, "VN degrees", source_name)?;
    let cn_degrees = parse_ints(next_line("CN degrees")?, "CN degrees", source_name)?;
    if vn_degrees.len() != n || cn_degrees.len() != m {
        return Err(malformed(format!(
            "expected {n} VN degrees and {m} CN degrees, got {} and {}",
            vn_degrees.len(),
            cn_degrees.len()
        )));
    }
    let gamma = vn_degrees[0];
    let p = cn_degrees[0];
    if vn_degrees.iter().any(|&d| d != gamma) || cn_degrees.iter().any(|&d| d != p) {
        return Err(AlistError::Irregular {
            source_name: source_name.into(),
            vn_degrees,
            cn_degrees,
        });
    }

    let mut vn_lists: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let raw = parse_ints(next_line("a VN adjacency line")?, "VN adjacency", source_name)?;
        let entries: Vec<usize> = raw.into_iter().filter(|&c| c != 0).collect();
        if entries.len() != gamma {
            return Err(malformed(format!(
                "VN {v} lists {} CNs, expected {gamma}",
                entries.len()
            )));
        }
        for &c in &entries {
            if c > m {
                return Err(AlistError::IndexOutOfRange {
                    source_name: source_name.into(),
                    index: c,
                    max: m,
                });
            }
        }
        vn_lists.push(entries.iter().map(|&c| c - 1).collect());
    }

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    for c in 0..m {
        let raw = parse_ints(next_line("a CN adjacency line")?, "CN adjacency", source_name)?;
        let entries: Vec<usize> = raw.into_iter().filter(|&v| v != 0).collect();
        if entries.len() != p {
            return Err(malformed(format!(
                "CN {c} lists {} VNs, expected {p}",
                entries.len()
            )));
        }
        for &v in &entries {
            if v > n {
                return Err(AlistError::IndexOutOfRange {
                    source_name: source_name.into(),
                    index: v,
                    max: n,
                });
            }
        }
        let mut row: Vec<usize> = entries.iter().map(|&v| v - 1).collect();
        row.sort_unstable();
        rows.push(row);
    }
    if lines.next().is_some() {
        return Err(malformed("trailing content after the CN adjacency lines".into()));
    }

    let graph = BaseGraph::new(n, gamma, p, rows)
        .map_err(|inner| AlistError::Graph { source_name: source_name.into(), inner })?;

    // Cross-check the redundant VN section against the CN rows.
    let derived = graph.vn_adjacency();
    for (v, mut listed) in vn_lists.into_iter().enumerate() {
        listed.sort_unstable();
        if listed != derived[v] {
            return Err(AlistError::Inconsistent { source_name: source_name.into(), vn: v });
        }
    }
    Ok(graph)
}

/// Reads and parses an alist file.
pub fn from_file(path: &Path) -> Result<BaseGraph, AlistError> {
    let source_name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| AlistError::Malformed {
        source_name: source_name.clone(),
        msg: e.to_string(),
    })?;
    parse(&text, &source_name)
}

/// Canonical alist text for a base graph: 1-based, ascending, no padding.
pub fn serialize(graph: &BaseGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", graph.n(), graph.m()));
    out.push_str(&format!("{} {}\n", graph.vn_degree(), graph.cn_degree()));
    let vn_degree = graph.vn_degree().to_string();
    out.push_str(&vec![vn_degree; graph.n()].join(" "));
    out.push('\n');
    let cn_degree = graph.cn_degree().to_string();
    out.push_str(&vec![cn_degree; graph.m()].join(" "));
    out.push('\n');
    for list in graph.vn_adjacency() {
        let cells: Vec<String> = list.iter().map(|c| (c + 1).to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    for row in graph.rows() {
        let cells: Vec<String> = row.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
