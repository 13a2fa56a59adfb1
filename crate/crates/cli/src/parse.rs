//! Strict parsers for the graph, updates, and queries file formats.
//!
//! Graph file: line 1 is `p dgraph <n> <m> <W>`, followed by exactly `m`
//! lines `e <u> <v> <w>`. Updates file: lines `add <u> <v> <w>`,
//! `del <u> <v>`, `rew <u> <v> <w>`, `delnode <v>`. Queries file: lines
//! `<u> <v>`. Everything ASCII and space-separated, nodes 1-indexed,
//! weights may carry a leading minus. Anything else is an error naming the
//! offending line.

use std::fmt;

use sensoracle_core::graph::{GraphSpec, UpdateBatch, UpdateOp};

/// A parse failure with its file kind and 1-based line number.
#[derive(Debug)]
pub struct ParseError {
    pub file: &'static str,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} file, line {}: {}",
            self.file, self.line, self.message
        )
    }
}

impl std::error::Error for ParseError {}

fn err(file: &'static str, line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        file,
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(
    file: &'static str,
    line: usize,
    token: &str,
    what: &str,
) -> Result<T, ParseError> {
    token
        .parse::<T>()
        .map_err(|_| err(file, line, format!("invalid {what} `{token}`")))
}

pub fn parse_graph(text: &str) -> Result<GraphSpec, ParseError> {
    const F: &str = "graph";
    let mut lines = text.lines().enumerate();
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| err(F, 1, "empty file, expected `p dgraph <n> <m> <W>`"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 5 || toks[0] != "p" || toks[1] != "dgraph" {
        return Err(err(
            F,
            line_no + 1,
            "expected header `p dgraph <n> <m> <W>`",
        ));
    }
    let n: usize = parse_num(F, line_no + 1, toks[2], "node count")?;
    let m: usize = parse_num(F, line_no + 1, toks[3], "edge count")?;
    let w: i64 = parse_num(F, line_no + 1, toks[4], "weight bound")?;
    let mut spec = GraphSpec::new(n, w).map_err(|e| err(F, line_no + 1, e.to_string()))?;

    let mut seen_edges = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            return Err(err(F, line_no, "unexpected blank line"));
        }
        if seen_edges == m {
            return Err(err(
                F,
                line_no,
                format!("unexpected extra line after {m} edges"),
            ));
        }
        if toks.len() != 4 || toks[0] != "e" {
            return Err(err(F, line_no, "expected edge line `e <u> <v> <w>`"));
        }
        let u: usize = parse_num(F, line_no, toks[1], "node")?;
        let v: usize = parse_num(F, line_no, toks[2], "node")?;
        let wt: i64 = parse_num(F, line_no, toks[3], "weight")?;
        spec.add_edge(u, v, wt)
            .map_err(|e| err(F, line_no, e.to_string()))?;
        seen_edges += 1;
    }
    if seen_edges != m {
        return Err(err(
            F,
            text.lines().count().max(1),
            format!("header declared {m} edges, found {seen_edges}"),
        ));
    }
    Ok(spec)
}

pub fn parse_updates(text: &str) -> Result<UpdateBatch, ParseError> {
    const F: &str = "updates";
    let mut ops = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            return Err(err(F, line_no, "unexpected blank line"));
        }
        let op = match (toks[0], toks.len()) {
            ("add", 4) => UpdateOp::Insert {
                u: parse_num(F, line_no, toks[1], "node")?,
                v: parse_num(F, line_no, toks[2], "node")?,
                w: parse_num(F, line_no, toks[3], "weight")?,
            },
            ("del", 3) => UpdateOp::Delete {
                u: parse_num(F, line_no, toks[1], "node")?,
                v: parse_num(F, line_no, toks[2], "node")?,
            },
            ("rew", 4) => UpdateOp::Reweight {
                u: parse_num(F, line_no, toks[1], "node")?,
                v: parse_num(F, line_no, toks[2], "node")?,
                w: parse_num(F, line_no, toks[3], "weight")?,
            },
            ("delnode", 2) => UpdateOp::DeleteNode {
                v: parse_num(F, line_no, toks[1], "node")?,
            },
            _ => {
                return Err(err(
                    F,
                    line_no,
                    "expected `add u v w`, `del u v`, `rew u v w`, or `delnode v`",
                ))
            }
        };
        ops.push(op);
    }
    Ok(UpdateBatch::new(ops))
}

pub fn parse_queries(text: &str) -> Result<Vec<(usize, usize)>, ParseError> {
    const F: &str = "queries";
    let mut queries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            return Err(err(F, line_no, "unexpected blank line"));
        }
        if toks.len() != 2 {
            return Err(err(F, line_no, "expected query line `<u> <v>`"));
        }
        let u: usize = parse_num(F, line_no, toks[0], "node")?;
        let v: usize = parse_num(F, line_no, toks[1], "node")?;
        queries.push((u, v));
    }
    Ok(queries)
}
