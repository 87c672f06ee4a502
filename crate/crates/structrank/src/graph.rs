//! Directed graphs, generators for line/complete structures, and edge-list I/O.
//!
//! Nodes are indexed `0..n` in the API; edge-list files, error messages and
//! CLI reports use 1-based ids. A node with no out-links is called dangling.

use std::collections::HashSet;
use std::io::BufRead;

use thiserror::Error;

/// 0-based node index.
pub type NodeId = usize;

/// Errors from graph construction, parsing and generation.
///
/// Node ids in messages are 1-based, matching the edge-list file format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {0} -> {1} references a node out of range")]
    TargetOutOfRange(usize, usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid structure: {0}")]
    InvalidSpec(String),
    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),
}

/// A finite directed graph without self-loops or parallel edges.
///
/// Out-links keep their insertion order; the structure is immutable after
/// construction, so downstream caches can key off [`DirectedGraph::fingerprint`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    out_links: Vec<Vec<NodeId>>,
}

impl DirectedGraph {
    /// Builds a graph on `n` nodes from 0-based `(source, target)` pairs.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut out_links = vec![Vec::new(); n];
        for &(src, dst) in edges {
            if src >= n || dst >= n {
                return Err(GraphError::TargetOutOfRange(src + 1, dst + 1));
            }
            out_links[src].push(dst);
        }
        let g = DirectedGraph { n, out_links };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph directly from per-node target lists.
    pub fn from_out_links(out_links: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        let g = DirectedGraph { n: out_links.len(), out_links };
        g.validate()?;
        Ok(g)
    }

    /// Re-checks the structural invariants: targets in range, no self-loops,
    /// no duplicate targets per node.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (src, targets) in self.out_links.iter().enumerate() {
            let mut seen = HashSet::new();
            for &dst in targets {
                if dst >= self.n {
                    return Err(GraphError::TargetOutOfRange(src + 1, dst + 1));
                }
                if dst == src {
                    return Err(GraphError::SelfLoop(src + 1));
                }
                if !seen.insert(dst) {
                    return Err(GraphError::DuplicateEdge(src + 1, dst + 1));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_links(&self, i: NodeId) -> &[NodeId] {
        &self.out_links[i]
    }

    pub fn out_degree(&self, i: NodeId) -> usize {
        self.out_links[i].len()
    }

    pub fn is_dangling(&self, i: NodeId) -> bool {
        self.out_links[i].is_empty()
    }

    /// Nodes with no out-links, in ascending order.
    pub fn dangling_nodes(&self) -> Vec<NodeId> {
        (0..self.n).filter(|&i| self.is_dangling(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.out_links.iter().map(Vec::len).sum()
    }

    /// All edges in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_links
            .iter()
            .enumerate()
            .flat_map(|(src, targets)| targets.iter().map(move |&dst| (src, dst)))
    }

    /// Marks every node reachable from `start` by one or more edge traversals.
    /// `start` itself is marked only if some cycle returns to it.
    pub fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack: Vec<NodeId> = self.out_links[start].clone();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend_from_slice(&self.out_links[v]);
            }
        }
        seen
    }

    /// True if some directed cycle passes through `i`.
    pub fn has_return_path(&self, i: NodeId) -> bool {
        self.reachable_from(i)[i]
    }

    /// True if `i` is dangling or some dangling node is reachable from `i`.
    pub fn drains_to_dangling(&self, i: NodeId) -> bool {
        if self.is_dangling(i) {
            return true;
        }
        let reach = self.reachable_from(i);
        (0..self.n).any(|v| reach[v] && self.is_dangling(v))
    }

    /// Structural hash of `(n, out_links)`; stable within one process run.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the adjacency stream; avoids RandomState so that equal
        // graphs hash equally across calls.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n as u64);
        for (src, dst) in self.edges() {
            eat(src as u64);
            eat(dst as u64);
        }
        h
    }
}

/// The structured-graph families with their size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    /// Chain `n -> n-1 -> ... -> 1`; node 1 is dangling.
    Line,
    /// Line plus the edge `1 -> 2`.
    LineWithBacklink,
    /// Line plus one extra node linking to line node `j`.
    LineWithAttachedNode,
    /// Line with the edge `(j+1) -> j` removed.
    LineSplit,
    /// Complete graph: every ordered pair is an edge.
    Complete,
    /// Complete graph plus an external sink that node 1 links to.
    CompleteWithOutLink,
    /// Line and complete graph; complete-graph node 1 links to line node `j`.
    CompleteToLine,
    /// Line and complete graph; line node `j` links to complete-graph node 1.
    LineToComplete,
    /// Line whose node `j` is itself a member of the complete graph.
    LineSharingNodeWithComplete,
}

/// A structured graph description: kind plus `n_line`, `n_complete` and the
/// 1-based line position `attach` (the `j` parameter). Fields that a kind
/// does not use are ignored by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub n_line: usize,
    pub n_complete: usize,
    pub attach: usize,
}

impl StructureSpec {
    pub fn line(n_line: usize) -> Self {
        Self { kind: StructureKind::Line, n_line, n_complete: 0, attach: 0 }
    }

    pub fn backlink(n_line: usize) -> Self {
        Self { kind: StructureKind::LineWithBacklink, n_line, n_complete: 0, attach: 0 }
    }

    pub fn attached(n_line: usize, attach: usize) -> Self {
        Self { kind: StructureKind::LineWithAttachedNode, n_line, n_complete: 0, attach }
    }

    pub fn split(n_line: usize, attach: usize) -> Self {
        Self { kind: StructureKind::LineSplit, n_line, n_complete: 0, attach }
    }

    pub fn complete(n_complete: usize) -> Self {
        Self { kind: StructureKind::Complete, n_line: 0, n_complete, attach: 0 }
    }

    pub fn complete_with_outlink(n_complete: usize) -> Self {
        Self { kind: StructureKind::CompleteWithOutLink, n_line: 0, n_complete, attach: 0 }
    }

    pub fn complete_to_line(n_line: usize, n_complete: usize, attach: usize) -> Self {
        Self { kind: StructureKind::CompleteToLine, n_line, n_complete, attach }
    }

    pub fn line_to_complete(n_line: usize, n_complete: usize, attach: usize) -> Self {
        Self { kind: StructureKind::LineToComplete, n_line, n_complete, attach }
    }

    pub fn share(n_line: usize, n_complete: usize, attach: usize) -> Self {
        Self { kind: StructureKind::LineSharingNodeWithComplete, n_line, n_complete, attach }
    }

    /// Total node count of the generated graph.
    pub fn node_count(&self) -> usize {
        use StructureKind::*;
        match self.kind {
            Line | LineWithBacklink | LineSplit => self.n_line,
            LineWithAttachedNode => self.n_line + 1,
            Complete => self.n_complete,
            CompleteWithOutLink => self.n_complete + 1,
            CompleteToLine | LineToComplete => self.n_line + self.n_complete,
            LineSharingNodeWithComplete => self.n_line + self.n_complete - 1,
        }
    }

    /// Checks the size constraints for this kind.
    pub fn validate(&self) -> Result<(), GraphError> {
        use StructureKind::*;
        let bad = |msg: String| Err(GraphError::InvalidSpec(msg));
        match self.kind {
            Line => {
                if self.n_line < 1 {
                    return bad("line needs at least 1 node".into());
                }
            }
            LineWithBacklink => {
                if self.n_line < 2 {
                    return bad("backlink needs a line of at least 2 nodes".into());
                }
            }
            LineWithAttachedNode => {
                if self.n_line < 1 {
                    return bad("line needs at least 1 node".into());
                }
                if self.attach < 1 || self.attach > self.n_line {
                    return bad(format!(
                        "attach position {} outside line 1..={}",
                        self.attach, self.n_line
                    ));
                }
            }
            LineSplit => {
                if self.n_line < 2 {
                    return bad("split needs a line of at least 2 nodes".into());
                }
                if self.attach < 1 || self.attach > self.n_line - 1 {
                    return bad(format!(
                        "split position {} outside 1..={}",
                        self.attach,
                        self.n_line - 1
                    ));
                }
            }
            Complete | CompleteWithOutLink => {
                if self.n_complete < 2 {
                    return bad("complete graph needs at least 2 nodes".into());
                }
            }
            CompleteToLine | LineToComplete | LineSharingNodeWithComplete => {
                if self.n_line < 1 {
                    return bad("line needs at least 1 node".into());
                }
                if self.n_complete < 2 {
                    return bad("complete graph needs at least 2 nodes".into());
                }
                if self.attach < 1 || self.attach > self.n_line {
                    return bad(format!(
                        "attach position {} outside line 1..={}",
                        self.attach, self.n_line
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Builds the graph described by `spec`.
///
/// Numbering conventions, all 1-based here (subtract one for the API):
/// line nodes are `1..=n_line` with node `k+1` linking to node `k`; extra or
/// complete-graph nodes follow the line block. `CompleteWithOutLink` places
/// the sink at `n_complete + 1`. `LineSharingNodeWithComplete` reuses line
/// node `j` as a complete-graph member, so only `n_complete - 1` extra nodes
/// are added.
pub fn generate(spec: &StructureSpec) -> Result<DirectedGraph, GraphError> {
    use StructureKind::*;
    spec.validate()?;
    let nl = spec.n_line;
    let ng = spec.n_complete;
    let j = spec.attach; // 1-based line position

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let line_edges = |edges: &mut Vec<(NodeId, NodeId)>| {
        for k in 1..nl {
            edges.push((k, k - 1)); // node k+1 -> node k, 0-based
        }
    };

    match spec.kind {
        Line => line_edges(&mut edges),
        LineWithBacklink => {
            edges.push((0, 1));
            line_edges(&mut edges);
        }
        LineWithAttachedNode => {
            line_edges(&mut edges);
            edges.push((nl, j - 1));
        }
        LineSplit => {
            for k in 1..nl {
                if k != j {
                    edges.push((k, k - 1));
                }
            }
        }
        Complete => {
            for a in 0..ng {
                for b in 0..ng {
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
        }
        CompleteWithOutLink => {
            for b in 1..ng {
                edges.push((0, b));
            }
            edges.push((0, ng)); // the out-link to the external sink
            for a in 1..ng {
                for b in 0..ng {
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
        }
        CompleteToLine | LineToComplete => {
            line_edges(&mut edges);
            for a in 0..ng {
                for b in 0..ng {
                    if a != b {
                        edges.push((nl + a, nl + b));
                    }
                }
            }
            if spec.kind == CompleteToLine {
                edges.push((nl, j - 1));
            } else {
                edges.push((j - 1, nl));
            }
        }
        LineSharingNodeWithComplete => {
            line_edges(&mut edges);
            // Line node j joins the complete graph; the other members are
            // nl..nl+ng-1 (0-based). Every member links to every other.
            let shared = j - 1;
            for a in 0..ng - 1 {
                edges.push((shared, nl + a));
            }
            for a in 0..ng - 1 {
                edges.push((nl + a, shared));
                for b in 0..ng - 1 {
                    if a != b {
                        edges.push((nl + a, nl + b));
                    }
                }
            }
        }
    }

    // Canonical order: out-links ascending per node.
    edges.sort_unstable();
    DirectedGraph::from_edges(spec.node_count(), &edges)
}

/// Reads the plain edge-list format:
///
/// ```text
/// # comment
/// n <node count>
/// <src> <dst>      (1-based, one edge per line)
/// ```
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<DirectedGraph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| GraphError::Parse { line: lineno, message: e.to_string() })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match n {
            None => {
                if tokens.len() != 2 || tokens[0] != "n" {
                    return Err(GraphError::Parse {
                        line: lineno,
                        message: format!("expected `n <count>`, got `{content}`"),
                    });
                }
                let count: usize = tokens[1].parse().map_err(|_| GraphError::Parse {
                    line: lineno,
                    message: format!("invalid node count `{}`", tokens[1]),
                })?;
                if count == 0 {
                    return Err(GraphError::Parse {
                        line: lineno,
                        message: "node count must be positive".into(),
                    });
                }
                n = Some(count);
            }
            Some(count) => {
                if tokens.len() != 2 {
                    return Err(GraphError::Parse {
                        line: lineno,
                        message: format!("expected `<src> <dst>`, got `{content}`"),
                    });
                }
                let parse_id = |tok: &str| -> Result<usize, GraphError> {
                    tok.parse().map_err(|_| GraphError::Parse {
                        line: lineno,
                        message: format!("invalid node id `{tok}`"),
                    })
                };
                let src = parse_id(tokens[0])?;
                let dst = parse_id(tokens[1])?;
                if src < 1 || src > count || dst < 1 || dst > count {
                    return Err(GraphError::TargetOutOfRange(src, dst));
                }
                edges.push((src - 1, dst - 1));
            }
        }
    }

    let n = n.ok_or(GraphError::Parse { line: 0, message: "empty input".into() })?;
    DirectedGraph::from_edges(n, &edges)
}

/// Writes the edge-list format read by [`read_edge_list`]; the two round-trip
/// exactly, including edge order.
pub fn write_edge_list(g: &DirectedGraph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (src, dst) in g.edges() {
        out.push_str(&format!("{} {}\n", src + 1, dst + 1));
    }
    out
}

/// Non-negative per-node weights with at least one positive entry.
///
/// `raw` keeps the weights as given; `normalized` is the probability vector
/// `v / ||v||_1` used by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    v: Vec<f64>,
}

impl WeightVector {
    pub fn new(v: Vec<f64>) -> Result<Self, GraphError> {
        if v.is_empty() {
            return Err(GraphError::InvalidWeight("empty weight vector".into()));
        }
        for (i, &x) in v.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(GraphError::InvalidWeight(format!(
                    "weight {} at node {} must be finite and non-negative",
                    x,
                    i + 1
                )));
            }
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(GraphError::InvalidWeight("all weights are zero".into()));
        }
        Ok(WeightVector { v })
    }

    /// The uniform probability vector: every entry `1/n`.
    pub fn uniform(n: usize) -> Self {
        WeightVector { v: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn raw(&self) -> &[f64] {
        &self.v
    }

    pub fn sum(&self) -> f64 {
        self.v.iter().sum()
    }

    /// `v / ||v||_1`; sums to 1 up to rounding.
    pub fn normalized(&self) -> Vec<f64> {
        let s = self.sum();
        self.v.iter().map(|x| x / s).collect()
    }
}
