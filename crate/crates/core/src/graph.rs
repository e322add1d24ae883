//! Finite polymorphisms (bipartite edge systems `V -> W`), directed graphs,
//! and their nonnegative integer adjacency matrices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
}

/// A finite polymorphism from `source` to `target`. Edges are kept sorted by
/// id; vertices keep their declared order.
#[derive(Debug, Clone)]
pub struct Polymorphism {
    source: Vec<String>,
    target: Vec<String>,
    edges: Vec<Edge>,
    source_index: HashMap<String, usize>,
    target_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl PartialEq for Polymorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.edges == other.edges
    }
}

impl Eq for Polymorphism {}

fn index_vertices(names: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, v) in names.iter().enumerate() {
        if index.insert(v.clone(), i).is_some() {
            return Err(Error::DuplicateVertex(v.clone()));
        }
    }
    Ok(index)
}

impl Polymorphism {
    /// Builds a polymorphism from named endpoints.
    pub fn new<S: AsRef<str>>(source: Vec<String>, target: Vec<String>, edges: &[(S, S, S)]) -> Result<Self> {
        let source_index = index_vertices(&source)?;
        let target_index = index_vertices(&target)?;
        let mut indexed = Vec::with_capacity(edges.len());
        for (name, s, t) in edges {
            let src = *source_index
                .get(s.as_ref())
                .ok_or_else(|| Error::UnknownVertex(s.as_ref().to_string()))?;
            let tgt = *target_index
                .get(t.as_ref())
                .ok_or_else(|| Error::UnknownVertex(t.as_ref().to_string()))?;
            indexed.push(Edge {
                name: name.as_ref().to_string(),
                src,
                tgt,
            });
        }
        Self::from_indexed(source, target, indexed)
    }

    /// Builds a polymorphism from edges whose endpoints are vertex indices.
    pub fn from_indexed(source: Vec<String>, target: Vec<String>, mut edges: Vec<Edge>) -> Result<Self> {
        let source_index = index_vertices(&source)?;
        let target_index = index_vertices(&target)?;
        edges.sort_by(|a, b| a.name.cmp(&b.name));
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.src >= source.len() || e.tgt >= target.len() {
                return Err(Error::UnknownVertex(format!("endpoint of edge `{}`", e.name)));
            }
            if edge_index.insert(e.name.clone(), i).is_some() {
                return Err(Error::DuplicateEdge(e.name.clone()));
            }
        }
        Ok(Polymorphism {
            source,
            target,
            edges,
            source_index,
            target_index,
            edge_index,
        })
    }

    /// The identity polymorphism on `vertices`: one edge `v` from `v` to `v`.
    pub fn identity(vertices: Vec<String>) -> Result<Self> {
        let edges = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| Edge {
                name: v.clone(),
                src: i,
                tgt: i,
            })
            .collect();
        Self::from_indexed(vertices.clone(), vertices, edges)
    }

    pub fn source_vertices(&self) -> &[String] {
        &self.source
    }

    pub fn target_vertices(&self) -> &[String] {
        &self.target
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source_vertex(&self, name: &str) -> Option<usize> {
        self.source_index.get(name).copied()
    }

    pub fn target_vertex(&self, name: &str) -> Option<usize> {
        self.target_index.get(name).copied()
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.edge_index.get(name).copied()
    }

    pub fn adjacency(&self) -> NonNegMatrix {
        let mut counts = vec![vec![0u64; self.target.len()]; self.source.len()];
        for e in &self.edges {
            counts[e.src][e.tgt] += 1;
        }
        NonNegMatrix::from_u64(self.source.clone(), self.target.clone(), &counts)
            .expect("shape matches by construction")
    }
}

/// A directed graph: a polymorphism whose source and target vertex lists
/// coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph(Polymorphism);

impl Graph {
    pub fn new<S: AsRef<str>>(vertices: Vec<String>, edges: &[(S, S, S)]) -> Result<Self> {
        Ok(Graph(Polymorphism::new(vertices.clone(), vertices, edges)?))
    }

    pub fn from_polymorphism(p: Polymorphism) -> Result<Self> {
        if p.source != p.target {
            return Err(Error::VertexSetMismatch(format!(
                "source {:?} differs from target {:?}",
                p.source, p.target
            )));
        }
        Ok(Graph(p))
    }

    pub fn as_polymorphism(&self) -> &Polymorphism {
        &self.0
    }

    pub fn into_polymorphism(self) -> Polymorphism {
        self.0
    }

    pub fn vertices(&self) -> &[String] {
        &self.0.source
    }

    pub fn edges(&self) -> &[Edge] {
        &self.0.edges
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.0.source_vertex(name)
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.0.edge(name)
    }

    pub fn adjacency(&self) -> NonNegMatrix {
        self.0.adjacency()
    }

    /// Edge indices leaving `v`, in id order.
    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.0.edges.len()).filter(|&i| self.0.edges[i].src == v).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.vertices().len()];
        for e in self.edges() {
            has_out[e.src] = true;
        }
        (0..has_out.len()).filter(|&v| !has_out[v]).collect()
    }

    pub fn is_sink_free(&self) -> bool {
        self.sinks().is_empty()
    }

    /// Errors with the first sink, if any.
    pub fn require_sink_free(&self) -> Result<()> {
        match self.sinks().first() {
            Some(&v) => Err(Error::SinkPresent(self.vertices()[v].clone())),
            None => Ok(()),
        }
    }

    /// Rejects names shared between a vertex and an edge, which would make
    /// path notation ambiguous.
    pub fn require_unambiguous_names(&self) -> Result<()> {
        for e in self.edges() {
            if self.vertex(&e.name).is_some() {
                return Err(Error::AmbiguousName(e.name.clone()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polymorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}: ", self.source, self.target)?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}→{}", e.name, self.source[e.src], self.target[e.tgt])?;
        }
        Ok(())
    }
}

/// A nonnegative integer matrix with labelled rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonNegMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    entries: Vec<Vec<BigUint>>,
}

impl NonNegMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>, entries: Vec<Vec<BigUint>>) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} entries",
                rows.len(),
                cols.len()
            )));
        }
        Ok(NonNegMatrix { rows, cols, entries })
    }

    pub fn from_u64(rows: Vec<String>, cols: Vec<String>, entries: &[Vec<u64>]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries
                .iter()
                .map(|r| r.iter().map(|&x| BigUint::from(x)).collect())
                .collect(),
        )
    }

    /// A matrix with rows and columns labelled `0, 1, ...`.
    pub fn unlabeled(entries: &[Vec<u64>]) -> Self {
        let r = entries.len();
        let c = entries.first().map_or(0, Vec::len);
        Self::from_u64(default_labels(r), default_labels(c), entries).expect("rectangular entries")
    }

    pub fn zeros(rows: Vec<String>, cols: Vec<String>) -> Self {
        let entries = vec![vec![BigUint::zero(); cols.len()]; rows.len()];
        NonNegMatrix { rows, cols, entries }
    }

    pub fn identity(labels: Vec<String>) -> Self {
        let mut m = Self::zeros(labels.clone(), labels);
        for i in 0..m.rows.len() {
            m.entries[i][i] = BigUint::from(1u8);
        }
        m
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn entries(&self) -> &[Vec<BigUint>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i][j]
    }

    /// Entries as `u64`, if they all fit.
    pub fn to_u64(&self) -> Option<Vec<Vec<u64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.to_u64()).collect())
            .collect()
    }

    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self> {
        if rows.len() != self.nrows() || cols.len() != self.ncols() {
            return Err(Error::DimensionMismatch("relabelling changes shape".into()));
        }
        self.rows = rows;
        self.cols = cols;
        Ok(self)
    }

    /// Matrix product. Only shapes must agree; labels are taken from the
    /// outer factors.
    pub fn mul(&self, other: &NonNegMatrix) -> Result<NonNegMatrix> {
        if self.ncols() != other.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let mut out = Self::zeros(self.rows.clone(), other.cols.clone());
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.ncols() {
                    out.entries[i][j] += a * &other.entries[k][j];
                }
            }
        }
        Ok(out)
    }

    /// `self^n` for a square matrix; `n = 0` gives the identity.
    pub fn pow(&self, n: u32) -> Result<NonNegMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.rows.clone()).with_labels(self.rows.clone(), self.cols.clone())?;
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Entrywise equality, ignoring labels.
    pub fn same_entries(&self, other: &NonNegMatrix) -> bool {
        self.entries == other.entries
    }

    /// The first entry where the two matrices differ, ignoring labels.
    pub fn first_difference(&self, other: &NonNegMatrix) -> Option<(usize, usize)> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Some((0, 0));
        }
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if self.entries[i][j] != other.entries[i][j] {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl fmt::Display for NonNegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        write!(f, "]")
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Canonical id of the `index`-th edge from `v` to `w`.
pub fn canonical_edge_id(v: &str, w: &str, index: u64) -> String {
    format!("{v}→{w}#{index}")
}

/// Draws one edge per unit of each entry, with canonical ids.
pub fn polymorphism_from_matrix(a: &NonNegMatrix) -> Result<Polymorphism> {
    let mut edges = Vec::new();
    for (i, row) in a.entries.iter().enumerate() {
        for (j, count) in row.iter().enumerate() {
            let count = count
                .to_u64()
                .ok_or_else(|| Error::InvalidArgument(format!("entry {count} is too large")))?;
            for k in 0..count {
                edges.push(Edge {
                    name: canonical_edge_id(&a.rows[i], &a.cols[j], k),
                    src: i,
                    tgt: j,
                });
            }
        }
    }
    Polymorphism::from_indexed(a.rows.clone(), a.cols.clone(), edges)
}

/// Edge id of a product edge.
pub fn pair_edge_id(e: &str, f: &str) -> String {
    format!("({e},{f})")
}

/// The product polymorphism: edges are pairs `(e, f)` with `tgt(e) = src(f)`.
pub fn product(p: &Polymorphism, q: &Polymorphism) -> Result<Polymorphism> {
    if p.target != q.source {
        return Err(Error::VertexSetMismatch(format!(
            "middle sets {:?} and {:?} differ",
            p.target, q.source
        )));
    }
    let mut edges = Vec::new();
    for e in &p.edges {
        for f in &q.edges {
            if e.tgt == f.src {
                edges.push(Edge {
                    name: pair_edge_id(&e.name, &f.name),
                    src: e.src,
                    tgt: f.tgt,
                });
            }
        }
    }
    Polymorphism::from_indexed(p.source.clone(), q.target.clone(), edges)
}

/// The `n`-fold product of a graph with itself, `n >= 1`.
pub fn power(g: &Graph, n: u32) -> Result<Polymorphism> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let mut acc = g.0.clone();
    for _ in 1..n {
        acc = product(&acc, &g.0)?;
    }
    Ok(acc)
}

/// Whether two polymorphisms over the same vertex sets are isomorphic, that
/// is, have equal adjacency matrices. Vertex sets are compared as sets and
/// matrices are aligned by vertex name.
pub fn iso_check(p: &Polymorphism, q: &Polymorphism) -> Result<bool> {
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    if set(&p.source) != set(&q.source) || set(&p.target) != set(&q.target) {
        return Err(Error::VertexSetMismatch(
            "polymorphisms have different vertex sets".into(),
        ));
    }
    let mut counts: HashMap<(&str, &str), i64> = HashMap::new();
    for e in &p.edges {
        *counts.entry((&p.source[e.src], &p.target[e.tgt])).or_default() += 1;
    }
    for e in &q.edges {
        *counts.entry((&q.source[e.src], &q.target[e.tgt])).or_default() -= 1;
    }
    Ok(counts.values().all(|&c| c == 0))
}
