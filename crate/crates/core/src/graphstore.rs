//! TUDataset loading, validation and canonical serialization.
//!
//! The on-disk format uses 1-based global node ids shared across all graphs of
//! a dataset. Internally every graph is self-contained with 0-based local ids.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::featsynth::FeatureMatrix;

/// One undirected structural graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    node_labels: Option<Vec<i64>>,
    node_attributes: Option<FeatureMatrix>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Pairs are normalized to `i < j`
    /// and sorted; self-loops, duplicates and out-of-range endpoints are
    /// rejected.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::Argument("a graph needs at least one node".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Argument(format!(
                    "edge ({a}, {b}) out of range for {num_nodes} nodes"
                )));
            }
            if a == b {
                return Err(Error::Argument(format!("self-loop on node {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        normalized.dedup();
        if normalized.len() != before {
            return Err(Error::Argument("duplicate undirected edge".into()));
        }
        Ok(Graph {
            num_nodes,
            edges: normalized,
            node_labels: None,
            node_attributes: None,
        })
    }

    pub fn with_node_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::Dimension(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_node_attributes(mut self, attributes: FeatureMatrix) -> Result<Self> {
        if attributes.rows() != self.num_nodes {
            return Err(Error::Dimension(format!(
                "{} attribute rows for {} nodes",
                attributes.rows(),
                self.num_nodes
            )));
        }
        self.node_attributes = Some(attributes);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Undirected edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_labels(&self) -> Option<&[i64]> {
        self.node_labels.as_deref()
    }

    pub fn node_attributes(&self) -> Option<&FeatureMatrix> {
        self.node_attributes.as_ref()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Artifacts dropped or noticed while reading one graph's edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphDiagnostics {
    pub self_loops_removed: usize,
    pub duplicate_edges_removed: usize,
    /// Directed lines whose reverse direction never appeared.
    pub asymmetric_edges: usize,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    graphs: Vec<Graph>,
    labels: Vec<usize>,
    label_alphabet: Vec<i64>,
    node_label_alphabet: Option<Vec<i64>>,
    diagnostics: Vec<GraphDiagnostics>,
}

impl Dataset {
    /// Assembles a dataset from in-memory graphs and raw class labels.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, raw_labels: &[i64]) -> Result<Self> {
        if graphs.len() != raw_labels.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} graphs",
                raw_labels.len(),
                graphs.len()
            )));
        }
        let (label_alphabet, labels) = remap_labels(raw_labels);
        let node_label_alphabet = node_label_alphabet(&graphs);
        let diagnostics = vec![GraphDiagnostics::default(); graphs.len()];
        Ok(Dataset {
            name: name.into(),
            graphs,
            labels,
            label_alphabet,
            node_label_alphabet,
            diagnostics,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Class labels remapped to `0..num_classes()`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sorted distinct raw class labels; position `c` holds the raw label of class `c`.
    pub fn label_alphabet(&self) -> &[i64] {
        &self.label_alphabet
    }

    pub fn num_classes(&self) -> usize {
        self.label_alphabet.len()
    }

    /// Sorted distinct node labels over all graphs, if node labels exist.
    pub fn node_label_alphabet(&self) -> Option<&[i64]> {
        self.node_label_alphabet.as_deref()
    }

    pub fn diagnostics(&self) -> &[GraphDiagnostics] {
        &self.diagnostics
    }
}

fn remap_labels(raw: &[i64]) -> (Vec<i64>, Vec<usize>) {
    let alphabet: Vec<i64> = raw
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = raw
        .iter()
        .map(|l| {
            alphabet
                .binary_search(l)
                .expect("label drawn from alphabet")
        })
        .collect();
    (alphabet, labels)
}

fn node_label_alphabet(graphs: &[Graph]) -> Option<Vec<i64>> {
    if graphs.is_empty() || graphs.iter().any(|g| g.node_labels.is_none()) {
        return None;
    }
    let set: BTreeSet<i64> = graphs
        .iter()
        .flat_map(|g| g.node_labels.as_deref().unwrap_or(&[]).iter().copied())
        .collect();
    Some(set.into_iter().collect())
}

/// Returns the `idx`-th graph by value.
pub fn graph_slice(ds: &Dataset, idx: usize) -> Result<Graph> {
    ds.graphs.get(idx).cloned().ok_or(Error::Index {
        index: idx,
        len: ds.graphs.len(),
    })
}

fn file_path(root: &Path, name: &str, suffix: &str) -> PathBuf {
    root.join(format!("{name}_{suffix}.txt"))
}

/// Non-blank lines with their 1-based line numbers. Trailing blank lines are
/// tolerated; a blank line followed by content is an error.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let file = file_label(path);
    let mut out = Vec::new();
    let mut first_blank: Option<usize> = None;
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() {
            first_blank.get_or_insert(i + 1);
            continue;
        }
        if let Some(blank) = first_blank {
            return Err(Error::Parse {
                file,
                line: blank,
                msg: "blank line inside data".into(),
            });
        }
        out.push((i + 1, line.to_string()));
    }
    Ok(out)
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn parse_token<T: std::str::FromStr>(tok: &str, file: &str, line: usize) -> Result<T> {
    tok.trim().parse().map_err(|_| Error::Parse {
        file: file.to_string(),
        line,
        msg: format!("cannot parse {:?}", tok.trim()),
    })
}

/// Loads `{root}/{name}_*.txt`.
pub fn parse_tudataset(root: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let root = root.as_ref();
    let a_path = file_path(root, name, "A");
    let ind_path = file_path(root, name, "graph_indicator");
    let lab_path = file_path(root, name, "graph_labels");
    for p in [&a_path, &ind_path, &lab_path] {
        if !p.is_file() {
            return Err(Error::Format {
                path: p.clone(),
                reason: "file not found".into(),
            });
        }
    }

    let lab_file = file_label(&lab_path);
    let raw_labels: Vec<i64> = read_lines(&lab_path)?
        .iter()
        .map(|(ln, s)| parse_token(s, &lab_file, *ln))
        .collect::<Result<_>>()?;
    let num_graphs = raw_labels.len();

    // node -> (graph, local index)
    let ind_file = file_label(&ind_path);
    let mut node_graph = Vec::new();
    let mut node_local = Vec::new();
    let mut counts = vec![0usize; num_graphs];
    for (ln, s) in read_lines(&ind_path)? {
        let gid: usize = parse_token(&s, &ind_file, ln)?;
        if gid == 0 || gid > num_graphs {
            return Err(Error::Parse {
                file: ind_file,
                line: ln,
                msg: format!("graph id {gid} outside 1..={num_graphs}"),
            });
        }
        node_graph.push(gid - 1);
        node_local.push(counts[gid - 1]);
        counts[gid - 1] += 1;
    }
    let total_nodes = node_graph.len();
    if let Some(g) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Format {
            path: ind_path,
            reason: format!("graph {} has no nodes", g + 1),
        });
    }

    let a_file = file_label(&a_path);
    let mut diagnostics = vec![GraphDiagnostics::default(); num_graphs];
    let mut seen_directed: HashSet<(usize, usize)> = HashSet::new();
    let mut per_graph: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (ln, s) in read_lines(&a_path)? {
        let mut parts = s.split(',');
        let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                file: a_file,
                line: ln,
                msg: "expected two comma-separated node ids".into(),
            });
        };
        let src: usize = parse_token(x, &a_file, ln)?;
        let dst: usize = parse_token(y, &a_file, ln)?;
        for id in [src, dst] {
            if id == 0 || id > total_nodes {
                return Err(Error::Parse {
                    file: a_file,
                    line: ln,
                    msg: format!("node id {id} outside 1..={total_nodes}"),
                });
            }
        }
        let (u, v) = (src - 1, dst - 1);
        let (gu, gv) = (node_graph[u], node_graph[v]);
        if gu != gv {
            return Err(Error::CrossGraphEdge {
                file: a_file,
                line: ln,
                src,
                dst,
                src_graph: gu + 1,
                dst_graph: gv + 1,
            });
        }
        if u == v {
            diagnostics[gu].self_loops_removed += 1;
            continue;
        }
        if !seen_directed.insert((u, v)) {
            diagnostics[gu].duplicate_edges_removed += 1;
            continue;
        }
        let (lu, lv) = (node_local[u], node_local[v]);
        per_graph[gu].push((lu.min(lv), lu.max(lv)));
    }
    for &(u, v) in &seen_directed {
        if !seen_directed.contains(&(v, u)) {
            diagnostics[node_graph[u]].asymmetric_edges += 1;
        }
    }

    let node_labels = {
        let path = file_path(root, name, "node_labels");
        if path.is_file() {
            let file = file_label(&path);
            let lines = read_lines(&path)?;
            expect_line_count(&path, lines.len(), total_nodes)?;
            Some(
                lines
                    .iter()
                    .map(|(ln, s)| parse_token::<i64>(s, &file, *ln))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        }
    };

    let node_attributes = {
        let path = file_path(root, name, "node_attributes");
        if path.is_file() {
            Some(read_attributes(&path, total_nodes)?)
        } else {
            None
        }
    };

    let mut graphs = Vec::with_capacity(num_graphs);
    let mut offsets = vec![Vec::new(); num_graphs];
    for (node, &g) in node_graph.iter().enumerate() {
        offsets[g].push(node);
    }
    for (g, mut edges) in per_graph.into_iter().enumerate() {
        // both directions of a pair collapse here; only repeated directed
        // lines were counted as duplicates above
        edges.sort_unstable();
        edges.dedup();
        let mut graph = Graph {
            num_nodes: counts[g],
            edges,
            node_labels: None,
            node_attributes: None,
        };
        if let Some(all) = &node_labels {
            graph.node_labels = Some(offsets[g].iter().map(|&n| all[n]).collect());
        }
        if let Some((cols, all)) = &node_attributes {
            let mut data = Vec::with_capacity(counts[g] * cols);
            for &n in &offsets[g] {
                data.extend_from_slice(&all[n * cols..(n + 1) * cols]);
            }
            graph.node_attributes = Some(FeatureMatrix::new(counts[g], *cols, data)?);
        }
        graphs.push(graph);
    }

    let mut ds = Dataset::new(name, graphs, &raw_labels)?;
    ds.diagnostics = diagnostics;
    Ok(ds)
}

fn expect_line_count(path: &Path, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected {want} lines (one per node), found {got}"),
        });
    }
    Ok(())
}

fn read_attributes(path: &Path, total_nodes: usize) -> Result<(usize, Vec<f64>)> {
    let file = file_label(path);
    let lines = read_lines(path)?;
    expect_line_count(path, lines.len(), total_nodes)?;
    let mut cols = None;
    let mut data = Vec::new();
    for (ln, s) in &lines {
        let row: Vec<f64> = s
            .split(',')
            .map(|t| parse_token(t, &file, *ln))
            .collect::<Result<_>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                file,
                line: *ln,
                msg: "non-finite attribute".into(),
            });
        }
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    file,
                    line: *ln,
                    msg: format!("expected {c} attributes, found {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
    }
    Ok((cols.unwrap_or(0), data))
}

/// Writes `ds` in canonical TUDataset form: every undirected edge as two
/// directed lines in ascending global id order, raw class labels, and node
/// labels/attributes when present.
pub fn write_tudataset(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let name = &ds.name;

    let mut a = String::new();
    let mut ind = String::new();
    let mut node_labels = String::new();
    let mut attrs = String::new();
    let mut offset = 0usize;
    for (g, graph) in ds.graphs.iter().enumerate() {
        let mut directed: Vec<(usize, usize)> = graph
            .edges
            .iter()
            .flat_map(|&(i, j)| [(i, j), (j, i)])
            .collect();
        directed.sort_unstable();
        for (i, j) in directed {
            let _ = writeln!(a, "{}, {}", offset + i + 1, offset + j + 1);
        }
        for _ in 0..graph.num_nodes {
            let _ = writeln!(ind, "{}", g + 1);
        }
        if let Some(labels) = &graph.node_labels {
            for l in labels {
                let _ = writeln!(node_labels, "{l}");
            }
        }
        if let Some(m) = &graph.node_attributes {
            for r in 0..m.rows() {
                let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
                let _ = writeln!(attrs, "{}", row.join(", "));
            }
        }
        offset += graph.num_nodes;
    }
    let labels: String = ds
        .labels
        .iter()
        .map(|&c| format!("{}\n", ds.label_alphabet[c]))
        .collect();

    fs::write(file_path(dir, name, "A"), a)?;
    fs::write(file_path(dir, name, "graph_indicator"), ind)?;
    fs::write(file_path(dir, name, "graph_labels"), labels)?;
    if ds.graphs.iter().all(|g| g.node_labels.is_some()) && !ds.graphs.is_empty() {
        fs::write(file_path(dir, name, "node_labels"), node_labels)?;
    }
    if ds.graphs.iter().all(|g| g.node_attributes.is_some()) && !ds.graphs.is_empty() {
        fs::write(file_path(dir, name, "node_attributes"), attrs)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphViolations {
    pub graph: usize,
    pub self_loops_removed: usize,
    pub duplicate_edges_removed: usize,
    pub asymmetric_edges: usize,
    pub isolated_nodes: usize,
}

impl GraphViolations {
    pub fn total(&self) -> usize {
        self.self_loops_removed
            + self.duplicate_edges_removed
            + self.asymmetric_edges
            + self.isolated_nodes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Only graphs with at least one violation are listed.
    pub graphs: Vec<GraphViolations>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn total_self_loops(&self) -> usize {
        self.graphs.iter().map(|g| g.self_loops_removed).sum()
    }

    pub fn total_duplicates(&self) -> usize {
        self.graphs.iter().map(|g| g.duplicate_edges_removed).sum()
    }

    pub fn total_asymmetric(&self) -> usize {
        self.graphs.iter().map(|g| g.asymmetric_edges).sum()
    }

    pub fn total_isolated(&self) -> usize {
        self.graphs.iter().map(|g| g.isolated_nodes).sum()
    }
}

pub fn validate(ds: &Dataset) -> ValidationReport {
    let graphs = ds
        .graphs
        .iter()
        .zip(&ds.diagnostics)
        .enumerate()
        .map(|(idx, (g, d))| GraphViolations {
            graph: idx,
            self_loops_removed: d.self_loops_removed,
            duplicate_edges_removed: d.duplicate_edges_removed,
            asymmetric_edges: d.asymmetric_edges,
            isolated_nodes: g.degrees().iter().filter(|&&k| k == 0).count(),
        })
        .filter(|v| v.total() > 0)
        .collect();
    ValidationReport { graphs }
}
