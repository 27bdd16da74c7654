//! Original graphs, their bunkbed doubling, probability vectors and
//! configurations.
//!
//! Vertex layout of a bunkbed graph over an original graph with `n` vertices:
//! bottom copies are `0..n`, top copies are `n..2n`, so the symmetric vertex
//! of `v` is `(v + n) mod 2n`. Edge layout: every bottom edge in input order,
//! then every top edge in the same order, then one vertical edge per column.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{check_probability, Rational};

/// Anything the percolation engines can run on: vertices `0..vertex_count()`
/// and an indexed list of undirected edges.
pub trait Network {
    fn vertex_count(&self) -> usize;
    fn edges(&self) -> &[(usize, usize)];

    fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginalGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl OriginalGraph {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) has an endpoint >= {n_vertices}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(Self { n_vertices, edges })
    }

    /// The complete graph K_n, edges in lexicographic order.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::new(n, edges)
    }

    /// The line segment 0 - 1 - ... - (n-1).
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// Parses the plain-text edge list format: a header line `n m`, then `m`
    /// lines `a b` with 0-based endpoints. Blank lines and `#` comments are
    /// skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(Error::Parse(format!("header announces {m} edges but {} were listed", edges.len())));
        }
        Self::new(n, edges)
    }

    /// Resolves `complete:n`, `path:n`, or a path to an edge-list file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Some(n) = spec.strip_prefix("complete:") {
            return Self::complete(parse_count(n)?);
        }
        if let Some(n) = spec.strip_prefix("path:") {
            return Self::path(parse_count(n)?);
        }
        let path = Path::new(spec);
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read graph file `{spec}`: {e}")))?;
        Self::parse_edge_list(&text)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
}

impl Network for OriginalGraph {
    fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse(format!("expected a vertex count, got `{s}`")))
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let bad = || Error::Parse(format!("expected two integers, got `{line}`"));
    let a = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let b = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if it.next().is_some() {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Bottom,
    Top,
}

impl Level {
    pub fn flip(self) -> Self {
        match self {
            Level::Bottom => Level::Top,
            Level::Top => Level::Bottom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Copy of original edge `i` on the bottom level.
    Bottom(usize),
    /// Copy of original edge `i` on the top level.
    Top(usize),
    /// Vertical edge joining the two copies of column `c`.
    Vertical(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BunkbedGraph {
    original: OriginalGraph,
    edges: Vec<(usize, usize)>,
}

impl BunkbedGraph {
    pub fn build(original: OriginalGraph) -> Self {
        let n = original.n_vertices;
        let m = original.edges.len();
        let mut edges = Vec::with_capacity(2 * m + n);
        edges.extend(original.edges.iter().copied());
        edges.extend(original.edges.iter().map(|&(a, b)| (a + n, b + n)));
        edges.extend((0..n).map(|c| (c, c + n)));
        Self { original, edges }
    }

    /// Bunkbed graph of K_n.
    pub fn complete(n: usize) -> Result<Self> {
        Ok(Self::build(OriginalGraph::complete(n)?))
    }

    /// Bunkbed graph of the line segment with `n` vertices.
    pub fn path(n: usize) -> Result<Self> {
        Ok(Self::build(OriginalGraph::path(n)?))
    }

    pub fn original(&self) -> &OriginalGraph {
        &self.original
    }

    pub fn columns(&self) -> usize {
        self.original.n_vertices
    }

    pub fn vertex(&self, column: usize, level: Level) -> usize {
        match level {
            Level::Bottom => column,
            Level::Top => column + self.columns(),
        }
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= 2 * self.columns() {
            return Err(Error::InvalidVertex { index: v, count: 2 * self.columns() });
        }
        Ok(())
    }

    fn check_edge(&self, e: usize) -> Result<()> {
        if e >= self.edges.len() {
            return Err(Error::InvalidEdge { index: e, count: self.edges.len() });
        }
        Ok(())
    }

    pub fn level(&self, v: usize) -> Result<Level> {
        self.check_vertex(v)?;
        Ok(if v < self.columns() { Level::Bottom } else { Level::Top })
    }

    pub fn column(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(v % self.columns())
    }

    pub fn symmetric_vertex(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        let n = self.columns();
        Ok((v + n) % (2 * n))
    }

    pub fn edge_kind(&self, e: usize) -> Result<EdgeKind> {
        self.check_edge(e)?;
        let m = self.original.edges.len();
        Ok(if e < m {
            EdgeKind::Bottom(e)
        } else if e < 2 * m {
            EdgeKind::Top(e - m)
        } else {
            EdgeKind::Vertical(e - 2 * m)
        })
    }

    pub fn symmetric_edge(&self, e: usize) -> Result<usize> {
        let m = self.original.edges.len();
        Ok(match self.edge_kind(e)? {
            EdgeKind::Bottom(i) => i + m,
            EdgeKind::Top(i) => i,
            EdgeKind::Vertical(_) => e,
        })
    }

    pub fn vertical_edge(&self, column: usize) -> usize {
        2 * self.original.edges.len() + column
    }

    /// Whether `p` is invariant under the level swap, compared exactly.
    pub fn validate_constrained(&self, p: &EdgeProbabilityVector) -> Result<bool> {
        if p.len() != self.edges.len() {
            return Err(Error::SizeMismatch { expected: self.edges.len(), got: p.len() });
        }
        let m = self.original.edges.len();
        Ok((0..m).all(|i| p.values[i] == p.values[i + m]))
    }
}

impl Network for BunkbedGraph {
    fn vertex_count(&self) -> usize {
        2 * self.columns()
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Per-edge retention probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeProbabilityVector {
    values: Vec<Rational>,
    constrained: bool,
}

impl EdgeProbabilityVector {
    /// An unconstrained vector; values must lie in [0, 1].
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        for v in &values {
            check_probability(v)?;
        }
        Ok(Self { values, constrained: false })
    }

    /// The same probability on every edge. Constant vectors are constrained.
    pub fn constant(edge_count: usize, p: Rational) -> Result<Self> {
        check_probability(&p)?;
        Ok(Self { values: vec![p; edge_count], constrained: true })
    }

    /// A vector that must satisfy `p_e = p_e'` on `g`.
    pub fn constrained(g: &BunkbedGraph, values: Vec<Rational>) -> Result<Self> {
        let mut v = Self::new(values)?;
        if !g.validate_constrained(&v)? {
            return Err(Error::Unconstrained);
        }
        v.constrained = true;
        Ok(v)
    }

    /// Builds a constrained vector from one value per original edge (shared
    /// by its two horizontal copies) and one value per vertical edge.
    pub fn from_levels(g: &BunkbedGraph, horizontal: &[Rational], vertical: &[Rational]) -> Result<Self> {
        let m = g.original().edge_count();
        if horizontal.len() != m {
            return Err(Error::SizeMismatch { expected: m, got: horizontal.len() });
        }
        if vertical.len() != g.columns() {
            return Err(Error::SizeMismatch { expected: g.columns(), got: vertical.len() });
        }
        let mut values = Vec::with_capacity(g.edge_count());
        values.extend_from_slice(horizontal);
        values.extend_from_slice(horizontal);
        values.extend_from_slice(vertical);
        Self::constrained(g, values)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, e: usize) -> &Rational {
        &self.values[e]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constrained(&self) -> bool {
        self.constrained
    }

    pub fn check_size(&self, net: &impl Network) -> Result<()> {
        if self.values.len() != net.edge_count() {
            return Err(Error::SizeMismatch { expected: net.edge_count(), got: self.values.len() });
        }
        Ok(())
    }

    /// The common value if every edge carries the same probability.
    pub fn as_constant(&self) -> Option<&Rational> {
        let first = self.values.first()?;
        self.values.iter().all(|v| v == first).then_some(first)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.values.iter().all(One::is_one)
    }
}

/// One open/closed assignment; bit `e` set means edge `e` is open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    open: u64,
    width: usize,
}

impl Configuration {
    pub const MAX_WIDTH: usize = 64;

    pub fn new(open: u64, width: usize) -> Result<Self> {
        if width > Self::MAX_WIDTH {
            return Err(Error::Capacity { what: "configuration width", size: width, limit: Self::MAX_WIDTH });
        }
        if width < 64 && open >> width != 0 {
            return Err(Error::InvalidParameter(format!("configuration mask {open:#x} has bits beyond width {width}")));
        }
        Ok(Self { open, width })
    }

    pub fn all_closed(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    pub fn all_open(width: usize) -> Result<Self> {
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Self::new(mask, width)
    }

    pub fn from_open_edges(width: usize, open: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = 0u64;
        for e in open {
            if e >= width {
                return Err(Error::InvalidEdge { index: e, count: width });
            }
            mask |= 1 << e;
        }
        Self::new(mask, width)
    }

    pub(crate) fn from_mask_unchecked(open: u64, width: usize) -> Self {
        Self { open, width }
    }

    pub fn mask(&self) -> u64 {
        self.open
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_open(&self, e: usize) -> bool {
        e < self.width && self.open >> e & 1 == 1
    }

    pub fn open_count(&self) -> u32 {
        self.open.count_ones()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&e| self.is_open(e))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in 0..self.width {
            f.write_str(if self.is_open(e) { "1" } else { "0" })?;
        }
        Ok(())
    }
}
