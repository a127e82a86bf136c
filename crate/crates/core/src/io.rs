//! Graph files and JSON reports.
//!
//! A graph is a JSON document plus a headerless CSV of node features:
//!
//! ```json
//! {"num_nodes":2,"num_classes":2,"edges":[[0,1]],"labels":[0,1],"features_path":"g.features.csv"}
//! ```
//!
//! `features_path` is resolved relative to the JSON file. Each undirected
//! edge is listed once; the canonical form lists it as `[s, t]` with
//! `s < t`, sorted. Floats are written in Rust's shortest round-trip form,
//! so writing a graph that was read from a canonical file reproduces it
//! byte for byte. All writes go through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    num_nodes: usize,
    num_classes: usize,
    edges: Vec<[usize; 2]>,
    labels: Vec<usize>,
    features_path: String,
}

fn schema(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema { path: path.to_path_buf(), message: message.into() }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Parses a JSON file, reporting syntax and schema errors with their line
/// and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| schema(path, format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| schema(path, format!("cannot serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn parse_features(path: &Path, text: &str, expected_rows: usize) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> =
            line.split(',')
                .map(|field| {
                    field.trim().parse::<f64>().map_err(|_| {
                        schema(path, format!("line {line_no}: cannot parse {field:?} as a number"))
                    })
                })
                .collect::<Result<_>>()?;
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(schema(path, format!("line {line_no}: non-finite feature {v}")));
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(schema(
                    path,
                    format!("line {line_no}: expected {w} columns, found {}", row.len()),
                ))
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    if rows != expected_rows {
        return Err(schema(
            path,
            Error::RowCountMismatch { expected: expected_rows, found: rows }.to_string(),
        ));
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), values).map_err(|e| schema(path, e.to_string()))
}

/// Reads and checks a graph file and its feature CSV.
///
/// Self-loops, duplicate edges (in either orientation), out-of-range nodes
/// or labels and a feature row count that differs from `num_nodes` are each
/// reported with the offending file and position.
pub fn validate_graph_file(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    if file.labels.len() != file.num_nodes {
        return Err(schema(path, format!("{} labels for {} nodes", file.labels.len(), file.num_nodes)));
    }
    let edges: Vec<(usize, usize)> = file.edges.iter().map(|&[s, t]| (s, t)).collect();
    for (i, &(s, t)) in edges.iter().enumerate() {
        if s == t {
            return Err(schema(path, format!("edges[{i}]: self-loop at node {s}")));
        }
    }
    let features_path = resolve(path, &file.features_path);
    let features = parse_features(&features_path, &read_to_string(&features_path)?, file.num_nodes)?;
    Graph::new(file.num_nodes, &edges, file.labels, file.num_classes, features).map_err(|e| match e {
        Error::DuplicateEdge(s, t) => {
            let i = edges
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| (a.min(b), a.max(b)) == (s.min(t), s.max(t)))
                .nth(1)
                .map_or(0, |(i, _)| i);
            schema(path, format!("edges[{i}]: duplicate edge ({s}, {t})"))
        }
        Error::NodeOutOfRange { node, num_nodes } => {
            let i = edges.iter().position(|&(a, b)| a == node || b == node).unwrap_or(0);
            schema(path, format!("edges[{i}]: node {node} out of range (num_nodes = {num_nodes})"))
        }
        Error::LabelOutOfRange { node, .. } => schema(path, format!("labels[{node}]: {e}")),
        other => schema(path, other.to_string()),
    })
}

fn resolve(json_path: &Path, relative: &str) -> PathBuf {
    match json_path.parent() {
        Some(dir) => dir.join(relative),
        None => PathBuf::from(relative),
    }
}

/// Feature CSV name used by [`write_graph`]: `<stem>.features.csv`.
pub fn features_file_name(json_path: &Path) -> String {
    let stem = json_path.file_stem().map_or("graph".into(), |s| s.to_string_lossy());
    format!("{stem}.features.csv")
}

/// Writes the canonical JSON and the feature CSV next to it.
pub fn write_graph(g: &Graph, json_path: &Path) -> Result<()> {
    let features_name = features_file_name(json_path);
    let mut csv = String::new();
    for row in g.features().rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    write_atomic(&resolve(json_path, &features_name), csv.as_bytes())?;

    let file = GraphFile {
        num_nodes: g.num_nodes(),
        num_classes: g.num_classes(),
        edges: g.edges().map(|(s, t)| [s, t]).collect(),
        labels: g.labels().to_vec(),
        features_path: features_name,
    };
    let mut text = serde_json::to_string(&file).map_err(|e| schema(json_path, e.to_string()))?;
    text.push('\n');
    write_atomic(json_path, text.as_bytes())
}
