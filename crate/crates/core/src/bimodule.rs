//! Finite-dimensional bimodules over vertex algebras `kV`, given by a basis
//! of edges `src -> tgt`, and the block-structured linear maps between them.
//!
//! Tensor products keep their bracketing in the basis labels. Nothing is
//! identified silently: moving between `(X⊗Y)⊗Z` and `X⊗(Y⊗Z)` always goes
//! through an explicit [`rebracket`] map.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{polymorphism_from_matrix, Edge, Graph, NonNegMatrix, Polymorphism};
use crate::linalg::DenseMatrix;
use crate::scalar::{Field, Scalar};
use crate::shift_equiv::{se_failure, SeWitness};

/// A basis label: an atomic id or a bracketed pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Atom(String),
    Pair(Box<Label>, Box<Label>),
}

impl Label {
    pub fn atom(s: impl Into<String>) -> Self {
        Label::Atom(s.into())
    }

    pub fn pair(a: Label, b: Label) -> Self {
        Label::Pair(Box::new(a), Box::new(b))
    }

    /// Atomic ids from left to right, forgetting the bracketing.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Label::Atom(s) => out.push(s),
            Label::Pair(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(s) => write!(f, "{s}"),
            Label::Pair(a, b) => write!(f, "({a}⊗{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisElem {
    pub label: Label,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Debug, Clone)]
struct PairInfo {
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

/// A `kV`–`kW` bimodule with a distinguished basis of elements `v·b·w`.
#[derive(Debug, Clone)]
pub struct PolyBimodule {
    left: Vec<String>,
    right: Vec<String>,
    basis: Vec<BasisElem>,
    index: HashMap<Label, usize>,
    pairs: Option<PairInfo>,
}

pub type Bimod = Arc<PolyBimodule>;

impl PartialEq for PolyBimodule {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left && self.right == other.right && self.basis == other.basis
    }
}

impl Eq for PolyBimodule {}

fn same_bimod(a: &Bimod, b: &Bimod) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PolyBimodule {
    fn build(left: Vec<String>, right: Vec<String>, basis: Vec<BasisElem>, pairs: Option<PairInfo>) -> Result<Self> {
        let mut index = HashMap::with_capacity(basis.len());
        for (i, b) in basis.iter().enumerate() {
            if b.src >= left.len() || b.tgt >= right.len() {
                return Err(Error::UnknownVertex(format!("endpoint of basis element `{}`", b.label)));
            }
            if index.insert(b.label.clone(), i).is_some() {
                return Err(Error::DuplicateEdge(b.label.to_string()));
            }
        }
        Ok(PolyBimodule {
            left,
            right,
            basis,
            index,
            pairs,
        })
    }

    /// A bimodule from named basis elements `(id, src, tgt)`; the basis is
    /// sorted by id.
    pub fn new<S: AsRef<str>>(left: Vec<String>, right: Vec<String>, basis: &[(S, S, S)]) -> Result<Self> {
        let p = Polymorphism::new(left, right, basis)?;
        Ok(Self::from_polymorphism(&p))
    }

    /// A bimodule with the basis in the given order; labels may be nested.
    pub fn from_basis(left: Vec<String>, right: Vec<String>, basis: Vec<BasisElem>) -> Result<Self> {
        Self::build(left, right, basis, None)
    }

    /// The bimodule spanned by the edges of `p`.
    pub fn from_polymorphism(p: &Polymorphism) -> Self {
        let basis = p
            .edges()
            .iter()
            .map(|e| BasisElem {
                label: Label::atom(e.name.clone()),
                src: e.src,
                tgt: e.tgt,
            })
            .collect();
        Self::build(p.source_vertices().to_vec(), p.target_vertices().to_vec(), basis, None)
            .expect("polymorphism edges are valid")
    }

    /// The bimodule `kV` with basis the vertices.
    pub fn vertex_bimodule(vertices: &[String]) -> Self {
        let basis = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| BasisElem {
                label: Label::atom(v.clone()),
                src: i,
                tgt: i,
            })
            .collect();
        Self::build(vertices.to_vec(), vertices.to_vec(), basis, None).expect("vertices are distinct")
    }

    /// The polymorphism with one edge per basis element.
    pub fn to_polymorphism(&self) -> Result<Polymorphism> {
        let edges = self
            .basis
            .iter()
            .map(|b| Edge {
                name: b.label.to_string(),
                src: b.src,
                tgt: b.tgt,
            })
            .collect();
        Polymorphism::from_indexed(self.left.clone(), self.right.clone(), edges)
    }

    pub fn left(&self) -> &[String] {
        &self.left
    }

    pub fn right(&self) -> &[String] {
        &self.right
    }

    pub fn basis(&self) -> &[BasisElem] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.basis[i].label
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// For a tensor product, the basis index of `(i, j)`.
    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pairs.as_ref()?.index.get(&(i, j)).copied()
    }

    /// For a tensor product, the factor indices of basis element `k`.
    pub fn pair(&self, k: usize) -> Option<(usize, usize)> {
        self.pairs.as_ref().map(|p| p.pairs[k])
    }

    /// Basis indices grouped by `(src, tgt)`.
    pub fn block_indices(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, b) in self.basis.iter().enumerate() {
            out.entry((b.src, b.tgt)).or_default().push(i);
        }
        out
    }

    /// Number of basis elements in each `(src, tgt)` block.
    pub fn dims(&self) -> NonNegMatrix {
        let mut counts = vec![vec![0u64; self.right.len()]; self.left.len()];
        for b in &self.basis {
            counts[b.src][b.tgt] += 1;
        }
        NonNegMatrix::from_u64(self.left.clone(), self.right.clone(), &counts).expect("shape matches")
    }

    pub fn block_name(&self, src: usize, tgt: usize) -> String {
        format!("({},{})", self.left[src], self.right[tgt])
    }
}

/// `M ⊗ N` with basis the pairs `(m, n)` with `tgt(m) = src(n)`, ordered
/// by `m` then `n`.
pub fn tensor(m: &PolyBimodule, n: &PolyBimodule) -> Result<PolyBimodule> {
    if m.right != n.left {
        return Err(Error::VertexSetMismatch(format!(
            "cannot tensor over {:?} and {:?}",
            m.right, n.left
        )));
    }
    let mut by_src: Vec<Vec<usize>> = vec![Vec::new(); n.left.len()];
    for (j, b) in n.basis.iter().enumerate() {
        by_src[b.src].push(j);
    }
    let mut basis = Vec::new();
    let mut pairs = Vec::new();
    let mut index = HashMap::new();
    for (i, a) in m.basis.iter().enumerate() {
        for &j in &by_src[a.tgt] {
            let b = &n.basis[j];
            index.insert((i, j), basis.len());
            pairs.push((i, j));
            basis.push(BasisElem {
                label: Label::pair(a.label.clone(), b.label.clone()),
                src: a.src,
                tgt: b.tgt,
            });
        }
    }
    PolyBimodule::build(m.left.clone(), n.right.clone(), basis, Some(PairInfo { pairs, index }))
}

/// The left-associated tensor power `(kE^1)^{⊗n}`, `n >= 1`.
pub fn tensor_power(base: &PolyBimodule, n: u32) -> Result<PolyBimodule> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power must be at least 1".into()));
    }
    let mut acc = base.clone();
    for _ in 1..n {
        acc = tensor(&acc, base)?;
    }
    Ok(acc)
}

/// The edge bimodule of a graph.
pub fn edge_bimodule(g: &Graph) -> PolyBimodule {
    PolyBimodule::from_polymorphism(g.as_polymorphism())
}

/// Where two maps disagree: the domain basis element and the codomain
/// coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDifference {
    pub column: usize,
    pub row: usize,
    pub lhs: Scalar,
    pub rhs: Scalar,
}

pub type SparseVec = Vec<(usize, Scalar)>;

type Block = (Vec<usize>, Vec<usize>, DenseMatrix);

/// A bimodule map, stored as sparse columns indexed by the domain basis.
#[derive(Debug, Clone)]
pub struct BlockMap {
    domain: Bimod,
    codomain: Bimod,
    field: Field,
    cols: Vec<SparseVec>,
}

impl PartialEq for BlockMap {
    fn eq(&self, other: &Self) -> bool {
        same_bimod(&self.domain, &other.domain)
            && same_bimod(&self.codomain, &other.codomain)
            && self.field == other.field
            && self.cols == other.cols
    }
}

fn tidy(mut v: SparseVec) -> SparseVec {
    v.sort_by_key(|(i, _)| *i);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, c) in v {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc = &*acc + &c,
            _ => out.push((i, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

fn require_same(a: &Bimod, b: &Bimod, what: &str) -> Result<()> {
    if same_bimod(a, b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(what.to_string()))
    }
}

impl BlockMap {
    /// Validates indices, fields and the block structure.
    pub fn new(domain: Bimod, codomain: Bimod, field: Field, cols: Vec<SparseVec>) -> Result<Self> {
        if domain.left != codomain.left || domain.right != codomain.right {
            return Err(Error::ShapeMismatch(
                "domain and codomain are over different vertex sets".into(),
            ));
        }
        if cols.len() != domain.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns for a domain of dimension {}",
                cols.len(),
                domain.len()
            )));
        }
        let mut tidied = Vec::with_capacity(cols.len());
        for (j, col) in cols.into_iter().enumerate() {
            let col = tidy(col);
            for (i, c) in &col {
                if *i >= codomain.len() {
                    return Err(Error::ShapeMismatch(format!("row {i} out of range")));
                }
                if c.field() != field {
                    return Err(Error::FieldMismatch(format!("entry over {}", c.field())));
                }
                let (a, b) = (&domain.basis[j], &codomain.basis[*i]);
                if a.src != b.src || a.tgt != b.tgt {
                    return Err(Error::NotBlockStructured(format!(
                        "`{}` in block {} is sent to `{}` in block {}",
                        a.label,
                        domain.block_name(a.src, a.tgt),
                        b.label,
                        codomain.block_name(b.src, b.tgt)
                    )));
                }
            }
            tidied.push(col);
        }
        Ok(BlockMap {
            domain,
            codomain,
            field,
            cols: tidied,
        })
    }

    pub fn zero(domain: Bimod, codomain: Bimod, field: Field) -> Result<Self> {
        let cols = vec![Vec::new(); domain.len()];
        Self::new(domain, codomain, field, cols)
    }

    pub fn identity(m: &Bimod, field: Field) -> Self {
        let cols = (0..m.len()).map(|i| vec![(i, field.one())]).collect();
        BlockMap {
            domain: Arc::clone(m),
            codomain: Arc::clone(m),
            field,
            cols,
        }
    }

    /// A 0/1 map sending basis element `j` to `image(j)`.
    pub fn basis_map(
        domain: Bimod,
        codomain: Bimod,
        field: Field,
        image: impl Fn(usize) -> Option<usize>,
    ) -> Result<Self> {
        let cols = (0..domain.len())
            .map(|j| {
                image(j)
                    .map(|i| vec![(i, field.one())])
                    .ok_or_else(|| Error::ShapeMismatch(format!("no image for `{}`", domain.label(j))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, field, cols)
    }

    /// Within every block, sends the `i`-th basis element of the domain to
    /// the `i`-th of the codomain. Fails unless block dimensions agree.
    pub fn canonical_block_bijection(domain: Bimod, codomain: Bimod, field: Field) -> Result<Self> {
        let dom_blocks = domain.block_indices();
        let cod_blocks = codomain.block_indices();
        let mut image = vec![usize::MAX; domain.len()];
        for (key, ds) in &dom_blocks {
            let cs = cod_blocks.get(key).map(Vec::as_slice).unwrap_or(&[]);
            if cs.len() != ds.len() {
                return Err(Error::DimensionMismatch(format!(
                    "block {} has dimension {} in the domain and {} in the codomain",
                    domain.block_name(key.0, key.1),
                    ds.len(),
                    cs.len()
                )));
            }
            for (d, c) in ds.iter().zip(cs) {
                image[*d] = *c;
            }
        }
        if domain.len() != codomain.len() {
            return Err(Error::DimensionMismatch("dimensions differ".into()));
        }
        Self::basis_map(domain, codomain, field, |j| Some(image[j]))
    }

    /// Matches basis elements with equal leaf sequences, forgetting
    /// bracketing.
    pub fn regroup(domain: Bimod, codomain: Bimod, field: Field) -> Result<Self> {
        if domain.len() != codomain.len() {
            return Err(Error::DimensionMismatch("regrouping changes dimension".into()));
        }
        let by_leaves: HashMap<Vec<&str>, usize> = codomain
            .basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.label.leaves(), i))
            .collect();
        let image: Vec<Option<usize>> = domain
            .basis
            .iter()
            .map(|b| by_leaves.get(&b.label.leaves()).copied())
            .collect();
        let map = Self::basis_map(Arc::clone(&domain), codomain, field, |j| image[j])?;
        if !map.is_invertible() {
            return Err(Error::ShapeMismatch("leaf sequences are not unique".into()));
        }
        Ok(map)
    }

    pub fn domain(&self) -> &Bimod {
        &self.domain
    }

    pub fn codomain(&self) -> &Bimod {
        &self.codomain
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn column(&self, j: usize) -> &[(usize, Scalar)] {
        &self.cols[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> Scalar {
        match self.cols[col].binary_search_by_key(&row, |(i, _)| *i) {
            Ok(k) => self.cols[col][k].1.clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn apply(&self, v: &[(usize, Scalar)]) -> SparseVec {
        let mut out = Vec::new();
        for (j, c) in v {
            for (i, a) in &self.cols[*j] {
                out.push((*i, a * c));
            }
        }
        tidy(out)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &BlockMap) -> Result<BlockMap> {
        require_same(&inner.codomain, &self.domain, "composition of incompatible maps")?;
        if self.field != inner.field {
            return Err(Error::FieldMismatch("composition across fields".into()));
        }
        Ok(BlockMap {
            domain: Arc::clone(&inner.domain),
            codomain: Arc::clone(&self.codomain),
            field: self.field,
            cols: inner.cols.iter().map(|c| self.apply(c)).collect(),
        })
    }

    /// `self ⊗ other` on the tensor of the domains.
    pub fn tensor(&self, other: &BlockMap) -> Result<BlockMap> {
        if self.field != other.field {
            return Err(Error::FieldMismatch("tensor across fields".into()));
        }
        let domain = Arc::new(tensor(&self.domain, &other.domain)?);
        let codomain = Arc::new(tensor(&self.codomain, &other.codomain)?);
        let mut cols = Vec::with_capacity(domain.len());
        for k in 0..domain.len() {
            let (i, j) = domain.pair(k).expect("tensor basis");
            let mut col = Vec::new();
            for (a, x) in &self.cols[i] {
                for (b, y) in &other.cols[j] {
                    // Blocks are respected, so tgt(a) = tgt(i) = src(j) = src(b).
                    let idx = codomain.pair_index(*a, *b).expect("compatible images");
                    col.push((idx, x * y));
                }
            }
            cols.push(tidy(col));
        }
        Ok(BlockMap {
            domain,
            codomain,
            field: self.field,
            cols,
        })
    }

    /// `(domain rows, codomain rows, block)` for every block.
    fn block_matrices(&self) -> Result<Vec<Block>> {
        let dom = self.domain.block_indices();
        let cod = self.codomain.block_indices();
        let mut keys: Vec<(usize, usize)> = dom.keys().chain(cod.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let mut out = Vec::new();
        for key in keys {
            let ds = dom.get(&key).cloned().unwrap_or_default();
            let cs = cod.get(&key).cloned().unwrap_or_default();
            let mut m = DenseMatrix::zeros(self.field, cs.len(), ds.len());
            for (c, &j) in ds.iter().enumerate() {
                for (r, &i) in cs.iter().enumerate() {
                    m.set(r, c, self.entry(i, j));
                }
            }
            out.push((ds, cs, m));
        }
        Ok(out)
    }

    /// Blockwise inverse by exact row reduction.
    pub fn inverse(&self) -> Result<BlockMap> {
        let mut cols = vec![Vec::new(); self.codomain.len()];
        for (ds, cs, m) in self.block_matrices()? {
            if ds.len() != cs.len() {
                return Err(Error::NotInvertible);
            }
            let inv = m.inverse().ok_or(Error::NotInvertible)?;
            for (c, &j) in cs.iter().enumerate() {
                cols[j] = tidy(
                    ds.iter()
                        .enumerate()
                        .map(|(r, &i)| (i, inv.get(r, c).clone()))
                        .collect(),
                );
            }
        }
        Ok(BlockMap {
            domain: Arc::clone(&self.codomain),
            codomain: Arc::clone(&self.domain),
            field: self.field,
            cols,
        })
    }

    pub fn is_invertible(&self) -> bool {
        self.block_matrices().is_ok_and(|blocks| {
            blocks
                .iter()
                .all(|(ds, cs, m)| ds.len() == cs.len() && m.rank() == ds.len())
        })
    }

    /// Per-block `(block name, rank, domain dim, codomain dim)` for blocks
    /// that are not invertible.
    pub fn singular_blocks(&self) -> Vec<(String, usize, usize, usize)> {
        let Ok(blocks) = self.block_matrices() else {
            return Vec::new();
        };
        blocks
            .into_iter()
            .filter_map(|(ds, cs, m)| {
                let rank = m.rank();
                if ds.len() == cs.len() && rank == ds.len() {
                    return None;
                }
                let b = ds.first().or(cs.first()).copied()?;
                let elem = if ds.is_empty() {
                    &self.codomain.basis[b]
                } else {
                    &self.domain.basis[b]
                };
                Some((self.domain.block_name(elem.src, elem.tgt), rank, ds.len(), cs.len()))
            })
            .collect()
    }

    /// First entry, in column-major order, where the maps disagree.
    pub fn first_difference(&self, other: &BlockMap) -> Option<MapDifference> {
        for (j, (a, b)) in self.cols.iter().zip(&other.cols).enumerate() {
            if a == b {
                continue;
            }
            let mut rows: Vec<usize> = a.iter().chain(b.iter()).map(|(i, _)| *i).collect();
            rows.sort_unstable();
            rows.dedup();
            for i in rows {
                let (x, y) = (self.entry(i, j), other.entry(i, j));
                if x != y {
                    return Some(MapDifference {
                        column: j,
                        row: i,
                        lhs: x,
                        rhs: y,
                    });
                }
            }
        }
        None
    }

    /// Describes a difference with basis labels.
    pub fn describe_difference(&self, d: &MapDifference) -> String {
        format!(
            "on basis element `{}`, coefficient of `{}` is {} vs {}",
            self.domain.label(d.column),
            self.codomain.label(d.row),
            d.lhs,
            d.rhs
        )
    }

    /// Multiplies every column in block `(src, tgt)` by `c`.
    pub fn scale_block(&self, src: usize, tgt: usize, c: &Scalar) -> BlockMap {
        let mut out = self.clone();
        for (j, col) in out.cols.iter_mut().enumerate() {
            let b = &self.domain.basis[j];
            if b.src == src && b.tgt == tgt {
                *col = tidy(col.iter().map(|(i, x)| (*i, x * c)).collect());
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> BlockMap {
        let mut out = self.clone();
        for col in &mut out.cols {
            *col = tidy(col.iter().map(|(i, x)| (*i, x * c)).collect());
        }
        out
    }

    /// Dense blocks keyed by `(src, tgt)`: rows follow the codomain basis,
    /// columns the domain basis. Empty blocks are omitted.
    pub fn to_blocks(&self) -> BTreeMap<(usize, usize), DenseMatrix> {
        let dom = self.domain.block_indices();
        let cod = self.codomain.block_indices();
        let mut out = BTreeMap::new();
        let mut keys: Vec<(usize, usize)> = dom.keys().chain(cod.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for key in keys {
            let ds = dom.get(&key).cloned().unwrap_or_default();
            let cs = cod.get(&key).cloned().unwrap_or_default();
            let mut m = DenseMatrix::zeros(self.field, cs.len(), ds.len());
            for (c, &j) in ds.iter().enumerate() {
                for (r, &i) in cs.iter().enumerate() {
                    m.set(r, c, self.entry(i, j));
                }
            }
            out.insert(key, m);
        }
        out
    }

    /// Inverse of [`BlockMap::to_blocks`]. Missing blocks are zero.
    pub fn from_blocks(
        domain: Bimod,
        codomain: Bimod,
        field: Field,
        blocks: &BTreeMap<(usize, usize), DenseMatrix>,
    ) -> Result<Self> {
        let dom = domain.block_indices();
        let cod = codomain.block_indices();
        let mut cols = vec![Vec::new(); domain.len()];
        for (key, m) in blocks {
            let ds = dom.get(key).cloned().unwrap_or_default();
            let cs = cod.get(key).cloned().unwrap_or_default();
            if m.rows() != cs.len() || (m.cols() != ds.len() && !(m.rows() == 0 && ds.is_empty())) {
                return Err(Error::ShapeMismatch(format!(
                    "block {} should be {}x{}",
                    domain.block_name(key.0, key.1),
                    cs.len(),
                    ds.len()
                )));
            }
            for (c, &j) in ds.iter().enumerate() {
                for (r, &i) in cs.iter().enumerate() {
                    cols[j].push((i, m.get(r, c).clone()));
                }
            }
        }
        Self::new(domain, codomain, field, cols)
    }
}

fn rebracket_parts(x: &Bimod, y: &Bimod, z: &Bimod) -> Result<(Bimod, Bimod, Vec<usize>)> {
    let xy = tensor(x, y)?;
    let yz = tensor(y, z)?;
    let left = tensor(&xy, z)?;
    let right = tensor(x, &yz)?;
    let image = (0..left.len())
        .map(|k| {
            let (a, c) = left.pair(k).expect("tensor basis");
            let (xi, yi) = xy.pair(a).expect("tensor basis");
            let b = yz.pair_index(yi, c).expect("compatible");
            right.pair_index(xi, b).expect("compatible")
        })
        .collect();
    Ok((Arc::new(left), Arc::new(right), image))
}

/// `((x⊗y)⊗z) ↦ (x⊗(y⊗z))`.
pub fn rebracket(x: &Bimod, y: &Bimod, z: &Bimod, field: Field) -> Result<BlockMap> {
    let (left, right, image) = rebracket_parts(x, y, z)?;
    BlockMap::basis_map(left, right, field, |k| Some(image[k]))
}

/// `(x⊗(y⊗z)) ↦ ((x⊗y)⊗z)`.
pub fn rebracket_inverse(x: &Bimod, y: &Bimod, z: &Bimod, field: Field) -> Result<BlockMap> {
    let (left, right, image) = rebracket_parts(x, y, z)?;
    let mut inverse = vec![0; image.len()];
    for (k, &i) in image.iter().enumerate() {
        inverse[i] = k;
    }
    BlockMap::basis_map(right, left, field, |k| Some(inverse[k]))
}

/// `kV ⊗ M → M`, `v ⊗ m ↦ m`.
pub fn left_unitor(m: &Bimod, field: Field) -> Result<BlockMap> {
    let kv = PolyBimodule::vertex_bimodule(&m.left);
    let domain = Arc::new(tensor(&kv, m)?);
    let image: Vec<usize> = (0..domain.len()).map(|k| domain.pair(k).expect("tensor").1).collect();
    BlockMap::basis_map(domain, Arc::clone(m), field, |k| Some(image[k]))
}

/// `M ⊗ kW → M`, `m ⊗ w ↦ m`.
pub fn right_unitor(m: &Bimod, field: Field) -> Result<BlockMap> {
    let kw = PolyBimodule::vertex_bimodule(&m.right);
    let domain = Arc::new(tensor(m, &kw)?);
    let image: Vec<usize> = (0..domain.len()).map(|k| domain.pair(k).expect("tensor").0).collect();
    BlockMap::basis_map(domain, Arc::clone(m), field, |k| Some(image[k]))
}

/// `kE^1 ⊗ T^m → T^m ⊗ kE^1`, `x⊗(y_1…y_m) ↦ (x y_1…y_{m-1})⊗y_m`, where
/// `T^m` is the left-associated tensor power.
pub fn nu(g: &Graph, m: u32, field: Field) -> Result<BlockMap> {
    let e1 = edge_bimodule(g);
    let t = tensor_power(&e1, m)?;
    let domain = Arc::new(tensor(&e1, &t)?);
    let codomain = Arc::new(tensor(&t, &e1)?);
    BlockMap::regroup(domain, codomain, field)
}

/// A bimodule `M` from `kE^0` to `kF^0` with a chosen isomorphism
/// `σ: kE^1 ⊗ M → M ⊗ kF^1`.
#[derive(Debug, Clone)]
pub struct ConjugacyPair {
    e: Graph,
    f: Graph,
    e1: Bimod,
    f1: Bimod,
    m: Bimod,
    sigma: BlockMap,
}

impl PartialEq for ConjugacyPair {
    fn eq(&self, other: &Self) -> bool {
        self.e == other.e && self.f == other.f && same_bimod(&self.m, &other.m) && self.sigma == other.sigma
    }
}

impl ConjugacyPair {
    /// Checks shapes only; invertibility is [`verify_conjugacy`]'s job.
    pub fn new(e: Graph, f: Graph, m: Bimod, sigma: BlockMap) -> Result<Self> {
        if m.left != e.vertices() || m.right != f.vertices() {
            return Err(Error::VertexSetMismatch(
                "bimodule is not over the vertex sets of the two graphs".into(),
            ));
        }
        let e1 = Arc::new(edge_bimodule(&e));
        let f1 = Arc::new(edge_bimodule(&f));
        let dom = tensor(&e1, &m)?;
        let cod = tensor(&m, &f1)?;
        if **sigma.domain() != dom || **sigma.codomain() != cod {
            return Err(Error::ShapeMismatch("sigma must map kE^1⊗M to M⊗kF^1".into()));
        }
        Ok(ConjugacyPair { e, f, e1, f1, m, sigma })
    }

    pub fn source_graph(&self) -> &Graph {
        &self.e
    }

    pub fn target_graph(&self) -> &Graph {
        &self.f
    }

    pub fn source_edges(&self) -> &Bimod {
        &self.e1
    }

    pub fn target_edges(&self) -> &Bimod {
        &self.f1
    }

    pub fn bimodule(&self) -> &Bimod {
        &self.m
    }

    pub fn sigma(&self) -> &BlockMap {
        &self.sigma
    }

    pub fn field(&self) -> Field {
        self.sigma.field
    }

    /// The same pair with a different map on the same spaces.
    pub fn with_sigma(&self, sigma: BlockMap) -> Result<Self> {
        Self::new(self.e.clone(), self.f.clone(), Arc::clone(&self.m), sigma)
    }
}

/// The pair `(kE^0, ε_E)` with `ε_E(e ⊗ r(e)) = s(e) ⊗ e`.
pub fn epsilon(g: &Graph, field: Field) -> ConjugacyPair {
    let e1 = Arc::new(edge_bimodule(g));
    let m = Arc::new(PolyBimodule::vertex_bimodule(g.vertices()));
    let domain = Arc::new(tensor(&e1, &m).expect("same vertex set"));
    let codomain = Arc::new(tensor(&m, &e1).expect("same vertex set"));
    let edges = g.edges();
    let image: Vec<usize> = (0..domain.len())
        .map(|k| {
            let (e, _) = domain.pair(k).expect("tensor");
            codomain.pair_index(edges[e].src, e).expect("s(e)⊗e is a basis element")
        })
        .collect();
    let sigma = BlockMap::basis_map(domain, codomain, field, |k| Some(image[k])).expect("blocks match");
    ConjugacyPair::new(g.clone(), g.clone(), m, sigma).expect("shapes match")
}

/// `σ#ψ = α_{M,N,kG^1}^{-1} ∘ (id_M⊗ψ) ∘ α_{M,kF^1,N} ∘ (σ⊗id_N) ∘ α_{kE^1,M,N}^{-1}`.
pub fn hash_maps(
    e1: &Bimod,
    m: &Bimod,
    f1: &Bimod,
    n: &Bimod,
    g1: &Bimod,
    sigma: &BlockMap,
    psi: &BlockMap,
) -> Result<BlockMap> {
    let field = sigma.field;
    let a1 = rebracket_inverse(e1, m, n, field)?;
    let s = sigma.tensor(&BlockMap::identity(n, field))?;
    let a2 = rebracket(m, f1, n, field)?;
    let p = BlockMap::identity(m, field).tensor(psi)?;
    let a3 = rebracket_inverse(m, n, g1, field)?;
    a3.compose(&p)?.compose(&a2)?.compose(&s)?.compose(&a1)
}

/// The composite pair `(M⊗N, σ#ψ)` from `E` to `G`.
pub fn hash_compose(p1: &ConjugacyPair, p2: &ConjugacyPair) -> Result<ConjugacyPair> {
    if p1.f != p2.e {
        return Err(Error::GraphMismatch(
            "target graph of the first pair differs from source of the second".into(),
        ));
    }
    let map = hash_maps(&p1.e1, &p1.m, &p1.f1, &p2.m, &p2.f1, &p1.sigma, &p2.sigma)?;
    let mn = Arc::new(tensor(&p1.m, &p2.m)?);
    ConjugacyPair::new(p1.e.clone(), p2.f.clone(), mn, map)
}

/// Describes why a pair is not a specified conjugacy, if it is not.
pub fn conjugacy_failure(p: &ConjugacyPair) -> Option<String> {
    let bad = p.sigma.singular_blocks();
    bad.first().map(|(block, rank, d, c)| {
        format!("sigma is not invertible on block {block}: rank {rank}, domain dim {d}, codomain dim {c}")
    })
}

pub fn verify_conjugacy(p: &ConjugacyPair) -> bool {
    conjugacy_failure(p).is_none()
}

/// `A_E · dim(M) = dim(M) · A_F`.
pub fn dimension_condition(p: &ConjugacyPair) -> bool {
    let d = p.m.dims();
    let lhs = p.e.adjacency().mul(&d).expect("shapes match");
    let rhs = d.mul(&p.f.adjacency()).expect("shapes match");
    lhs.same_entries(&rhs)
}

/// Why `φ` fails to be an equivalence of pairs, if it does.
pub fn pair_equivalence_failure(p1: &ConjugacyPair, p2: &ConjugacyPair, phi: &BlockMap) -> Result<Option<String>> {
    if p1.e != p2.e || p1.f != p2.f {
        return Err(Error::ShapeMismatch("pairs are between different graphs".into()));
    }
    require_same(phi.domain(), &p1.m, "phi must start at the first bimodule")?;
    require_same(phi.codomain(), &p2.m, "phi must end at the second bimodule")?;
    if let Some((block, rank, ..)) = phi.singular_blocks().first() {
        return Ok(Some(format!("phi is not invertible on block {block} (rank {rank})")));
    }
    let field = phi.field;
    let lhs = phi.tensor(&BlockMap::identity(&p1.f1, field))?.compose(&p1.sigma)?;
    let rhs = p2.sigma.compose(&BlockMap::identity(&p1.e1, field).tensor(phi)?)?;
    Ok(lhs
        .first_difference(&rhs)
        .map(|d| format!("square does not commute {}", lhs.describe_difference(&d))))
}

pub fn verify_pair_equivalence(p1: &ConjugacyPair, p2: &ConjugacyPair, phi: &BlockMap) -> Result<bool> {
    Ok(pair_equivalence_failure(p1, p2, phi)?.is_none())
}

/// Bimodule data realizing a shift equivalence.
#[derive(Debug, Clone)]
pub struct MseData {
    pub g: Polymorphism,
    pub h: Polymorphism,
    pub m: Bimod,
    pub n: Bimod,
    pub lag: u32,
    /// `M ⊗ N → (kE^1)^{⊗n}`.
    pub omega_e: BlockMap,
    /// `N ⊗ M → (kF^1)^{⊗n}`.
    pub omega_f: BlockMap,
    /// `kE^1 ⊗ M → M ⊗ kF^1`.
    pub sigma_m: BlockMap,
    /// `kF^1 ⊗ N → N ⊗ kE^1`.
    pub sigma_n: BlockMap,
}

/// Builds `M = kG^1`, `N = kH^1` from the witness matrices and canonical
/// blockwise bijections for the four isomorphisms.
pub fn mse_from_se(e: &Graph, f: &Graph, w: &SeWitness, field: Field) -> Result<MseData> {
    let a = e.adjacency();
    let b = f.adjacency();
    if let Some(why) = se_failure(&a, &b, w)? {
        return Err(Error::InvalidWitness(why));
    }
    let r = w.r.clone().with_labels(e.vertices().to_vec(), f.vertices().to_vec())?;
    let s = w.s.clone().with_labels(f.vertices().to_vec(), e.vertices().to_vec())?;
    let g = polymorphism_from_matrix(&r)?;
    let h = polymorphism_from_matrix(&s)?;
    let m = Arc::new(PolyBimodule::from_polymorphism(&g));
    let n = Arc::new(PolyBimodule::from_polymorphism(&h));
    let e1 = Arc::new(edge_bimodule(e));
    let f1 = Arc::new(edge_bimodule(f));
    let te = Arc::new(tensor_power(&e1, w.lag)?);
    let tf = Arc::new(tensor_power(&f1, w.lag)?);
    let bij = |x: PolyBimodule, y: &Bimod| BlockMap::canonical_block_bijection(Arc::new(x), Arc::clone(y), field);
    let omega_e = bij(tensor(&m, &n)?, &te)?;
    let omega_f = bij(tensor(&n, &m)?, &tf)?;
    let sigma_m = bij(tensor(&e1, &m)?, &Arc::new(tensor(&m, &f1)?))?;
    let sigma_n = bij(tensor(&f1, &n)?, &Arc::new(tensor(&n, &e1)?))?;
    Ok(MseData {
        g,
        h,
        m,
        n,
        lag: w.lag,
        omega_e,
        omega_f,
        sigma_m,
        sigma_n,
    })
}
