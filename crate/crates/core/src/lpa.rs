//! Exact arithmetic in the Leavitt path algebra of a finite graph.
//!
//! Elements are finite combinations of monomials `αβ*` with `r(α) = r(β)`.
//! Products cancel ghost paths against real paths; the relation
//! `v = Σ_{s(e)=v} ee*` is applied as a rewrite rule at the junction of a
//! monomial whose `α` and `β` both end in the designated special edge of
//! that edge's source. Each monomial has at most one such position, and a
//! rewrite either shortens the monomial or lands on irreducible ones, so the
//! system terminates with a unique normal form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::{Field, Scalar};

pub type EdgeVec = SmallVec<[u32; 8]>;

/// A path in the graph. Length-zero paths carry their vertex in `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub start: u32,
    pub edges: EdgeVec,
}

impl Path {
    pub fn vertex(v: u32) -> Self {
        Path {
            start: v,
            edges: EdgeVec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `self` is a prefix of `other`, including the start vertex.
    pub fn is_prefix_of(&self, other: &Path) -> bool {
        self.start == other.start && other.edges.starts_with(&self.edges)
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.edges
            .len()
            .cmp(&other.edges.len())
            .then_with(|| self.edges.cmp(&other.edges))
            .then_with(|| self.start.cmp(&other.start))
    }
}

/// The monomial `αβ*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alpha: Path,
    pub beta: Path,
}

impl Monomial {
    pub fn degree(&self) -> i64 {
        self.alpha.len() as i64 - self.beta.len() as i64
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.alpha.len(), self.beta.len())
            .cmp(&(other.alpha.len(), other.beta.len()))
            .then_with(|| self.alpha.edges.cmp(&other.alpha.edges))
            .then_with(|| self.beta.edges.cmp(&other.beta.edges))
            .then_with(|| self.alpha.start.cmp(&other.alpha.start))
            .then_with(|| self.beta.start.cmp(&other.beta.start))
    }
}

/// Per-vertex designated edge used to orient the rewrite rule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecialEdgeChoice(pub HashMap<String, String>);

/// The algebra `L_k(E)` for a fixed graph, field and special-edge choice.
#[derive(Debug)]
pub struct Leavitt {
    graph: Graph,
    field: Field,
    src: Vec<u32>,
    rng: Vec<u32>,
    out: Vec<Vec<u32>>,
    special: Vec<Option<u32>>,
}

pub type RawTerms = Vec<(Monomial, Scalar)>;

impl Leavitt {
    /// The algebra with the default special edges (smallest id out of each
    /// vertex).
    pub fn new(graph: Graph, field: Field) -> Arc<Self> {
        Self::with_special(graph, field, &SpecialEdgeChoice::default()).expect("the default choice is valid")
    }

    /// Overrides the special edge at the listed vertices.
    pub fn with_special(graph: Graph, field: Field, choice: &SpecialEdgeChoice) -> Result<Arc<Self>> {
        let n = graph.vertices().len();
        let src: Vec<u32> = graph.edges().iter().map(|e| e.src as u32).collect();
        let rng: Vec<u32> = graph.edges().iter().map(|e| e.tgt as u32).collect();
        let mut out = vec![Vec::new(); n];
        for (i, &s) in src.iter().enumerate() {
            out[s as usize].push(i as u32);
        }
        let mut special: Vec<Option<u32>> = out.iter().map(|es| es.first().copied()).collect();
        for (v, e) in &choice.0 {
            let vi = graph.vertex(v).ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            let ei = graph.edge(e).ok_or_else(|| Error::UnknownEdge(e.clone()))?;
            if src[ei] as usize != vi {
                return Err(Error::InvalidArgument(format!(
                    "special edge `{e}` does not start at `{v}`"
                )));
            }
            special[vi] = Some(ei as u32);
        }
        Ok(Arc::new(Leavitt {
            graph,
            field,
            src,
            rng,
            out,
            special,
        }))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn src(&self, e: u32) -> u32 {
        self.src[e as usize]
    }

    pub fn rng(&self, e: u32) -> u32 {
        self.rng[e as usize]
    }

    pub fn out_edges(&self, v: u32) -> &[u32] {
        &self.out[v as usize]
    }

    pub fn special_edge(&self, v: u32) -> Option<u32> {
        self.special[v as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    fn same_algebra(&self, other: &Leavitt) -> bool {
        std::ptr::eq(self, other)
            || (self.graph == other.graph && self.field == other.field && self.special == other.special)
    }

    pub fn end(&self, p: &Path) -> u32 {
        p.edges.last().map_or(p.start, |&e| self.rng(e))
    }

    pub fn path_from_edges(&self, edges: &[u32]) -> Result<Path> {
        let Some(&first) = edges.first() else {
            return Err(Error::InvalidPath("empty edge list".into()));
        };
        let p = Path {
            start: self.src(first),
            edges: edges.iter().copied().collect(),
        };
        self.check_path(&p)?;
        Ok(p)
    }

    pub fn check_path(&self, p: &Path) -> Result<()> {
        if p.start as usize >= self.vertex_count() {
            return Err(Error::InvalidPath(format!("vertex index {} out of range", p.start)));
        }
        let mut at = p.start;
        for &e in &p.edges {
            if e as usize >= self.edge_count() {
                return Err(Error::InvalidPath(format!("edge index {e} out of range")));
            }
            if self.src(e) != at {
                return Err(Error::InvalidPath(format!(
                    "edge `{}` does not start at `{}`",
                    self.edge_name(e),
                    self.vertex_name(at)
                )));
            }
            at = self.rng(e);
        }
        Ok(())
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<()> {
        self.check_path(&m.alpha)?;
        self.check_path(&m.beta)?;
        if self.end(&m.alpha) != self.end(&m.beta) {
            return Err(Error::InvalidPath(format!(
                "ranges differ in {}",
                self.monomial_string(m)
            )));
        }
        Ok(())
    }

    pub fn vertex_name(&self, v: u32) -> &str {
        &self.graph.vertices()[v as usize]
    }

    pub fn edge_name(&self, e: u32) -> &str {
        &self.graph.edges()[e as usize].name
    }

    /// Parses a list of edge names, or a single vertex name, into a path.
    pub fn parse_path<S: AsRef<str>>(&self, names: &[S]) -> Result<Path> {
        if let [only] = names {
            if let Some(v) = self.graph.vertex(only.as_ref()) {
                return Ok(Path::vertex(v as u32));
            }
        }
        let edges = names
            .iter()
            .map(|n| {
                self.graph
                    .edge(n.as_ref())
                    .map(|e| e as u32)
                    .ok_or_else(|| Error::UnknownEdge(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.path_from_edges(&edges)
    }

    /// Parses a monomial; an empty side defaults to the range of the other.
    pub fn parse_monomial<S: AsRef<str>>(&self, alpha: &[S], beta: &[S]) -> Result<Monomial> {
        let (alpha, beta) = match (alpha.is_empty(), beta.is_empty()) {
            (true, true) => return Err(Error::InvalidPath("monomial with no vertex".into())),
            (true, false) => {
                let b = self.parse_path(beta)?;
                (Path::vertex(self.end(&b)), b)
            }
            (false, true) => {
                let a = self.parse_path(alpha)?;
                let b = Path::vertex(self.end(&a));
                (a, b)
            }
            (false, false) => (self.parse_path(alpha)?, self.parse_path(beta)?),
        };
        let m = Monomial { alpha, beta };
        self.check_monomial(&m)?;
        Ok(m)
    }

    pub fn path_names(&self, p: &Path) -> Vec<String> {
        if p.is_empty() {
            vec![self.vertex_name(p.start).to_string()]
        } else {
            p.edges.iter().map(|&e| self.edge_name(e).to_string()).collect()
        }
    }

    pub fn monomial_string(&self, m: &Monomial) -> String {
        let a = &m.alpha;
        let b = &m.beta;
        let names = |p: &Path| p.edges.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>().join(" ");
        match (a.is_empty(), b.is_empty()) {
            (true, true) => self.vertex_name(a.start).to_string(),
            (false, true) => names(a),
            (true, false) => format!("({})*", names(b)),
            (false, false) => format!("{} ({})*", names(a), names(b)),
        }
    }

    /// Whether the monomial admits the junction rewrite.
    pub fn is_reducible(&self, m: &Monomial) -> bool {
        match (m.alpha.edges.last(), m.beta.edges.last()) {
            (Some(&a), Some(&b)) => a == b && self.special_edge(self.src(a)) == Some(a),
            _ => false,
        }
    }

    /// One junction rewrite: `α'e(β'e)*` to `α'β'* − Σ_{f≠e} α'f(β'f)*`.
    fn rewrite(&self, m: &Monomial) -> Vec<(Monomial, bool)> {
        let e = *m.alpha.edges.last().expect("reducible monomial");
        let v = self.src(e);
        let truncate = |p: &Path| {
            let mut q = p.clone();
            q.edges.pop();
            if q.edges.is_empty() {
                q.start = v;
            }
            q
        };
        let a0 = truncate(&m.alpha);
        let b0 = truncate(&m.beta);
        let mut out = vec![(
            Monomial {
                alpha: a0.clone(),
                beta: b0.clone(),
            },
            true,
        )];
        for &f in self.out_edges(v) {
            if f == e {
                continue;
            }
            let mut a = a0.clone();
            a.edges.push(f);
            let mut b = b0.clone();
            b.edges.push(f);
            out.push((Monomial { alpha: a, beta: b }, false));
        }
        out
    }

    /// Reduces raw terms to normal form.
    pub fn normalize(self: &Arc<Self>, raw: RawTerms) -> Result<LpaElement> {
        for (m, c) in &raw {
            self.check_monomial(m)?;
            if c.field() != self.field {
                return Err(Error::FieldMismatch(format!(
                    "coefficient in {} but algebra over {}",
                    c.field(),
                    self.field
                )));
            }
        }
        Ok(self.normalize_unchecked(raw))
    }

    /// Feeds the normal form of `c·m` to `sink`, term by term.
    pub(crate) fn normalize_each(&self, m: Monomial, c: Scalar, mut sink: impl FnMut(Monomial, Scalar)) {
        if !self.is_reducible(&m) {
            sink(m, c);
            return;
        }
        let mut stack = vec![(m, c)];
        while let Some((m, c)) = stack.pop() {
            if self.is_reducible(&m) {
                let neg = -&c;
                for (t, positive) in self.rewrite(&m) {
                    stack.push((t, if positive { c.clone() } else { neg.clone() }));
                }
            } else {
                sink(m, c);
            }
        }
    }

    pub(crate) fn normalize_unchecked(self: &Arc<Self>, raw: RawTerms) -> LpaElement {
        let mut terms: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        let mut stack = raw;
        while let Some((m, c)) = stack.pop() {
            if c.is_zero() {
                continue;
            }
            if self.is_reducible(&m) {
                let neg = -&c;
                for (t, positive) in self.rewrite(&m) {
                    stack.push((t, if positive { c.clone() } else { neg.clone() }));
                }
                continue;
            }
            add_term(&mut terms, m, c);
        }
        LpaElement {
            alg: Arc::clone(self),
            terms,
        }
    }

    pub fn zero(self: &Arc<Self>) -> LpaElement {
        LpaElement {
            alg: Arc::clone(self),
            terms: BTreeMap::new(),
        }
    }

    fn single(self: &Arc<Self>, m: Monomial) -> LpaElement {
        self.normalize_unchecked(vec![(m, self.field.one())])
    }

    pub fn vertex(self: &Arc<Self>, v: u32) -> LpaElement {
        self.single(Monomial {
            alpha: Path::vertex(v),
            beta: Path::vertex(v),
        })
    }

    pub fn edge(self: &Arc<Self>, e: u32) -> LpaElement {
        let mut alpha = Path::vertex(self.src(e));
        alpha.edges.push(e);
        self.single(Monomial {
            alpha,
            beta: Path::vertex(self.rng(e)),
        })
    }

    pub fn ghost(self: &Arc<Self>, e: u32) -> LpaElement {
        let mut beta = Path::vertex(self.src(e));
        beta.edges.push(e);
        self.single(Monomial {
            alpha: Path::vertex(self.rng(e)),
            beta,
        })
    }

    pub fn monomial(self: &Arc<Self>, m: Monomial) -> Result<LpaElement> {
        self.check_monomial(&m)?;
        Ok(self.single(m))
    }

    /// The sum of all vertices.
    pub fn unit(self: &Arc<Self>) -> Result<LpaElement> {
        if self.vertex_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(self.normalize_unchecked(
            (0..self.vertex_count() as u32)
                .map(|v| {
                    (
                        Monomial {
                            alpha: Path::vertex(v),
                            beta: Path::vertex(v),
                        },
                        self.field.one(),
                    )
                })
                .collect(),
        ))
    }

    /// Paths of length exactly `len` starting at `v`, in id order.
    pub fn paths_from(&self, v: u32, len: usize) -> Vec<Path> {
        let mut layer = vec![Path::vertex(v)];
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &layer {
                for &e in self.out_edges(self.end(p)) {
                    let mut q = p.clone();
                    q.edges.push(e);
                    next.push(q);
                }
            }
            layer = next;
        }
        layer
    }

    /// `Σ_{λ ∈ vE^m} λλ*`, left unnormalized.
    pub fn vertex_expansion(&self, v: u32, m: usize) -> Result<RawTerms> {
        self.graph.require_sink_free()?;
        if m == 0 {
            return Err(Error::InvalidArgument("expansion length must be positive".into()));
        }
        Ok(self
            .paths_from(v, m)
            .into_iter()
            .map(|p| {
                (
                    Monomial {
                        alpha: p.clone(),
                        beta: p,
                    },
                    self.field.one(),
                )
            })
            .collect())
    }

    /// `Σ_{e ∈ E^1} ee*`, left unnormalized.
    pub fn edge_expansion(&self) -> RawTerms {
        (0..self.edge_count() as u32)
            .map(|e| {
                let mut p = Path::vertex(self.src(e));
                p.edges.push(e);
                (
                    Monomial {
                        alpha: p.clone(),
                        beta: p,
                    },
                    self.field.one(),
                )
            })
            .collect()
    }

    /// All paths of length at most `bound`, grouped by their range.
    pub fn paths_by_range(&self, bound: usize) -> Vec<Vec<Path>> {
        let mut by_range = vec![Vec::new(); self.vertex_count()];
        for v in 0..self.vertex_count() as u32 {
            for len in 0..=bound {
                for p in self.paths_from(v, len) {
                    by_range[self.end(&p) as usize].push(p);
                }
            }
        }
        by_range
    }

    /// Normal-form monomials with `|α|, |β| <= bound`, sorted.
    pub fn normal_monomials(&self, bound: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for group in self.paths_by_range(bound) {
            for a in &group {
                for b in &group {
                    let m = Monomial {
                        alpha: a.clone(),
                        beta: b.clone(),
                    };
                    if !self.is_reducible(&m) {
                        out.push(m);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// The product of two monomials before normalization, or `None` when the
    /// ghost path and the real path do not cancel.
    pub fn multiply_monomials(&self, x: &Monomial, y: &Monomial) -> Option<Monomial> {
        if x.beta.is_prefix_of(&y.alpha) {
            let mut alpha = x.alpha.clone();
            alpha.edges.extend_from_slice(&y.alpha.edges[x.beta.len()..]);
            Some(Monomial {
                alpha,
                beta: y.beta.clone(),
            })
        } else if y.alpha.is_prefix_of(&x.beta) {
            let mut beta = y.beta.clone();
            beta.edges.extend_from_slice(&x.beta.edges[y.alpha.len()..]);
            Some(Monomial {
                alpha: x.alpha.clone(),
                beta,
            })
        } else {
            None
        }
    }
}

pub(crate) fn add_term<K: Ord>(terms: &mut BTreeMap<K, Scalar>, key: K, c: Scalar) {
    use std::collections::btree_map::Entry;
    match terms.entry(key) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            let sum = slot.get() + &c;
            if sum.is_zero() {
                slot.remove();
            } else {
                *slot.get_mut() = sum;
            }
        }
    }
}

/// An element of `L_k(E)` in normal form.
#[derive(Clone)]
pub struct LpaElement {
    alg: Arc<Leavitt>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl fmt::Debug for LpaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LpaElement({self})")
    }
}

impl PartialEq for LpaElement {
    fn eq(&self, other: &Self) -> bool {
        self.alg.same_algebra(&other.alg) && self.terms == other.terms
    }
}

impl Eq for LpaElement {}

impl LpaElement {
    pub fn algebra(&self) -> &Arc<Leavitt> {
        &self.alg
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn into_raw(self) -> RawTerms {
        self.terms.into_iter().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same(&self, other: &LpaElement) -> Result<()> {
        if self.alg.same_algebra(&other.alg) {
            Ok(())
        } else {
            Err(Error::GraphMismatch("elements of different algebras".into()))
        }
    }

    pub fn add(&self, other: &LpaElement) -> Result<LpaElement> {
        self.check_same(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(LpaElement {
            alg: Arc::clone(&self.alg),
            terms,
        })
    }

    pub fn sub(&self, other: &LpaElement) -> Result<LpaElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LpaElement {
        self.scale(&(-&self.alg.field.one()))
    }

    pub fn scale(&self, c: &Scalar) -> LpaElement {
        if c.is_zero() {
            return self.alg.zero();
        }
        LpaElement {
            alg: Arc::clone(&self.alg),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &LpaElement) -> Result<LpaElement> {
        self.check_same(other)?;
        let mut raw = Vec::new();
        for (x, a) in &self.terms {
            for (y, b) in &other.terms {
                if let Some(m) = self.alg.multiply_monomials(x, y) {
                    raw.push((m, a * b));
                }
            }
        }
        Ok(self.alg.normalize_unchecked(raw))
    }

    /// The common degree of all terms; `None` for zero or mixed degrees.
    pub fn degree(&self) -> Option<i64> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn homogeneous_components(&self) -> BTreeMap<i64, LpaElement> {
        let mut out: BTreeMap<i64, LpaElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| self.alg.zero())
                .terms
                .insert(m.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for LpaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !c.is_one() {
                write!(f, "{c} ")?;
            }
            write!(f, "{}", self.alg.monomial_string(m))?;
        }
        Ok(())
    }
}
