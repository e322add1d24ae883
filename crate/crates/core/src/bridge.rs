//! The bridging bimodule `Y = M ⊗ L_k(F)` of a conjugacy pair `(M, σ)` from
//! `E` to `F`, with the left `L_k(E)`-action determined by `σ`:
//!
//! * `v · (m⊗S) = vm ⊗ S`
//! * `e · (m⊗S) = Σ m_i ⊗ f_i S` where `σ(e⊗m) = Σ m_i ⊗ f_i`
//! * `e* · (m⊗S) = Σ_f Σ_i (e* y_i) m_i ⊗ f* S` where `σ⁻¹(m⊗f) = Σ y_i ⊗ m_i`
//!
//! `Y` is infinite-dimensional, so every check runs over basis elements
//! `m ⊗ αβ*` with bounded path lengths.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bimodule::{conjugacy_failure, edge_bimodule, nu, tensor, tensor_power, BlockMap, ConjugacyPair, Label};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lpa::{add_term, Leavitt, LpaElement, Monomial, Path};
use crate::scalar::{Field, Scalar};

/// A generator of `L_k(E)`: a vertex, an edge or a ghost edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Vertex(u32),
    Edge(u32),
    Ghost(u32),
}

impl Generator {
    /// All generators of the algebra, vertices first.
    pub fn all(alg: &Leavitt) -> Vec<Generator> {
        let v = (0..alg.vertex_count() as u32).map(Generator::Vertex);
        let e = (0..alg.edge_count() as u32).map(Generator::Edge);
        let g = (0..alg.edge_count() as u32).map(Generator::Ghost);
        v.chain(e).chain(g).collect()
    }

    /// Parses `v`, `e` or `e*`.
    pub fn parse(alg: &Leavitt, s: &str) -> Result<Generator> {
        let s = s.trim();
        if let Some(e) = s.strip_suffix('*') {
            let i = alg.graph().edge(e).ok_or_else(|| Error::UnknownEdge(e.to_string()))?;
            return Ok(Generator::Ghost(i as u32));
        }
        if let Some(v) = alg.graph().vertex(s) {
            return Ok(Generator::Vertex(v as u32));
        }
        if let Some(e) = alg.graph().edge(s) {
            return Ok(Generator::Edge(e as u32));
        }
        Err(Error::InvalidArgument(format!("`{s}` is not a vertex or edge")))
    }

    pub fn name(&self, alg: &Leavitt) -> String {
        match *self {
            Generator::Vertex(v) => alg.vertex_name(v).to_string(),
            Generator::Edge(e) => alg.edge_name(e).to_string(),
            Generator::Ghost(e) => format!("{}*", alg.edge_name(e)),
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            Generator::Vertex(_) => 0,
            Generator::Edge(_) => 1,
            Generator::Ghost(_) => -1,
        }
    }

    pub fn element(&self, alg: &Arc<Leavitt>) -> LpaElement {
        match *self {
            Generator::Vertex(v) => alg.vertex(v),
            Generator::Edge(e) => alg.edge(e),
            Generator::Ghost(e) => alg.ghost(e),
        }
    }
}

type Image = Vec<(usize, u32, Scalar)>;

/// The bridging bimodule of a pair, with `σ` and `σ⁻¹` cached per basis
/// element.
#[derive(Debug)]
pub struct Bridge {
    pair: ConjugacyPair,
    source: Arc<Leavitt>,
    target: Arc<Leavitt>,
    /// `σ(e⊗m)` as `(m_i, f_i, c_i)`, indexed by `e·|M| + m`.
    forward: Vec<Image>,
    /// `σ⁻¹(m⊗f)` as `(m_i, y_i, c_i)`, indexed by `m·|F^1| + f`.
    backward: Vec<Image>,
    edge_monos: Vec<Monomial>,
    ghost_monos: Vec<Monomial>,
}

impl Bridge {
    /// Requires a verified pair between sink-free graphs.
    pub fn new(pair: ConjugacyPair) -> Result<Arc<Self>> {
        if let Some(why) = conjugacy_failure(&pair) {
            return Err(Error::InvalidPair(why));
        }
        let inverse = pair.sigma().inverse()?;
        Self::from_parts(pair, inverse)
    }

    /// Uses `sigma_inverse` as given, without checking that it inverts
    /// `σ`. Useful for exercising the relation checks on broken data.
    pub fn from_parts(pair: ConjugacyPair, sigma_inverse: BlockMap) -> Result<Arc<Self>> {
        pair.source_graph().require_sink_free()?;
        pair.target_graph().require_sink_free()?;
        let sigma = pair.sigma();
        if **sigma_inverse.domain() != **sigma.codomain() || **sigma_inverse.codomain() != **sigma.domain() {
            return Err(Error::ShapeMismatch("sigma inverse has the wrong shape".into()));
        }
        let field = sigma.field();
        let source = Leavitt::new(pair.source_graph().clone(), field);
        let target = Leavitt::new(pair.target_graph().clone(), field);
        let nm = pair.bimodule().len();
        let nf = pair.target_graph().edges().len();
        let mut forward = vec![Vec::new(); pair.source_graph().edges().len() * nm];
        for k in 0..sigma.domain().len() {
            let (e, m) = sigma.domain().pair(k).expect("tensor basis");
            let image = sigma
                .column(k)
                .iter()
                .map(|(i, c)| {
                    let (mi, f) = sigma.codomain().pair(*i).expect("tensor basis");
                    (mi, f as u32, c.clone())
                })
                .collect();
            forward[e * nm + m] = image;
        }
        let mut backward = vec![Vec::new(); nm * nf];
        for k in 0..sigma_inverse.domain().len() {
            let (m, f) = sigma_inverse.domain().pair(k).expect("tensor basis");
            let image = sigma_inverse
                .column(k)
                .iter()
                .map(|(i, c)| {
                    let (y, mi) = sigma_inverse.codomain().pair(*i).expect("tensor basis");
                    (mi, y as u32, c.clone())
                })
                .collect();
            backward[m * nf + f] = image;
        }
        let edge_monos = (0..target.edge_count() as u32)
            .map(|f| target.edge(f).terms().keys().next().cloned().expect("edge monomial"))
            .collect();
        let ghost_monos = (0..target.edge_count() as u32)
            .map(|f| target.ghost(f).terms().keys().next().cloned().expect("ghost monomial"))
            .collect();
        Ok(Arc::new(Bridge {
            pair,
            source,
            target,
            forward,
            backward,
            edge_monos,
            ghost_monos,
        }))
    }

    pub fn pair(&self) -> &ConjugacyPair {
        &self.pair
    }

    pub fn source(&self) -> &Arc<Leavitt> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Leavitt> {
        &self.target
    }

    pub fn field(&self) -> Field {
        self.source.field()
    }

    fn module_src(&self, m: usize) -> u32 {
        self.pair.bimodule().basis()[m].src as u32
    }

    fn module_tgt(&self, m: usize) -> u32 {
        self.pair.bimodule().basis()[m].tgt as u32
    }

    pub fn zero(self: &Arc<Self>) -> BridgeElement {
        BridgeElement {
            bridge: Arc::clone(self),
            terms: BTreeMap::new(),
        }
    }

    /// `Σ c · m ⊗ S` for raw (possibly unnormalized) monomials `S`; terms
    /// with `tgt(m) ≠ s(S)` vanish.
    pub fn element(self: &Arc<Self>, raw: Vec<(usize, Monomial, Scalar)>) -> Result<BridgeElement> {
        let mut terms = BTreeMap::new();
        for (m, s, c) in raw {
            if m >= self.pair.bimodule().len() {
                return Err(Error::InvalidArgument(format!("no basis element {m}")));
            }
            let normal = self.target.normalize(vec![(s, c)])?;
            self.push_lpa(&mut terms, m, normal);
        }
        Ok(BridgeElement {
            bridge: Arc::clone(self),
            terms,
        })
    }

    /// The basis element `m ⊗ S` for a normal-form `S` starting at `tgt(m)`.
    pub fn basis_element(self: &Arc<Self>, m: usize, s: Monomial) -> BridgeElement {
        let mut terms = BTreeMap::new();
        if self.module_tgt(m) == s.alpha.start {
            terms.insert((m, s), self.field().one());
        }
        BridgeElement {
            bridge: Arc::clone(self),
            terms,
        }
    }

    /// `m ⊗ 1`.
    pub fn unit_element(self: &Arc<Self>, m: usize) -> BridgeElement {
        let v = self.module_tgt(m);
        self.basis_element(
            m,
            Monomial {
                alpha: Path::vertex(v),
                beta: Path::vertex(v),
            },
        )
    }

    fn push_lpa(&self, out: &mut BTreeMap<(usize, Monomial), Scalar>, m: usize, x: LpaElement) {
        let tgt = self.module_tgt(m);
        for (mono, c) in x.into_raw() {
            if mono.alpha.start == tgt {
                add_term(out, (m, mono), c);
            }
        }
    }

    /// Adds `c · m ⊗ (prefix·S)` for an edge or ghost monomial `prefix`.
    fn push_product(
        &self,
        out: &mut BTreeMap<(usize, Monomial), Scalar>,
        m: usize,
        prefix: &Monomial,
        s: &Monomial,
        c: Scalar,
    ) {
        let Some(t) = self.target.multiply_monomials(prefix, s) else {
            return;
        };
        let tgt = self.module_tgt(m);
        self.target.normalize_each(t, c, |mono, x| {
            if mono.alpha.start == tgt {
                add_term(out, (m, mono), x);
            }
        });
    }

    fn forward(&self, e: u32, m: usize) -> &Image {
        &self.forward[e as usize * self.pair.bimodule().len() + m]
    }

    fn backward(&self, m: usize, f: u32) -> &Image {
        &self.backward[m * self.target.edge_count() + f as usize]
    }

    fn act_term(
        &self,
        g: Generator,
        m: usize,
        s: &Monomial,
        c: &Scalar,
        out: &mut BTreeMap<(usize, Monomial), Scalar>,
    ) {
        match g {
            Generator::Vertex(v) => {
                if self.module_src(m) == v {
                    add_term(out, (m, s.clone()), c.clone());
                }
            }
            Generator::Edge(e) => {
                for (mi, f, ci) in self.forward(e, m) {
                    self.push_product(out, *mi, &self.edge_monos[*f as usize], s, c * ci);
                }
            }
            Generator::Ghost(e) => {
                for &f in self.target.out_edges(self.module_tgt(m)) {
                    for (mi, y, ci) in self.backward(m, f) {
                        if *y == e {
                            self.push_product(out, *mi, &self.ghost_monos[f as usize], s, c * ci);
                        }
                    }
                }
            }
        }
    }

    /// `e* · y` for every edge `e` of the source graph in one pass over
    /// `σ⁻¹`.
    fn act_all_ghosts(&self, terms: &BTreeMap<(usize, Monomial), Scalar>) -> Vec<BTreeMap<(usize, Monomial), Scalar>> {
        let mut out = vec![BTreeMap::new(); self.source.edge_count()];
        for ((m, s), c) in terms {
            for &f in self.target.out_edges(self.module_tgt(*m)) {
                for (mi, y, ci) in self.backward(*m, f) {
                    self.push_product(&mut out[*y as usize], *mi, &self.ghost_monos[f as usize], s, c * ci);
                }
            }
        }
        out
    }

    /// Basis elements `m ⊗ αβ*` with `|α|, |β| <= bound`, ordered by `m`
    /// then monomial.
    pub fn basis(self: &Arc<Self>, bound: usize) -> Vec<BridgeElement> {
        let monos = self.target.normal_monomials(bound);
        let mut out = Vec::new();
        for m in 0..self.pair.bimodule().len() {
            let tgt = self.module_tgt(m);
            for s in monos.iter().filter(|s| s.alpha.start == tgt) {
                out.push(self.basis_element(m, s.clone()));
            }
        }
        out
    }
}

/// An element of the bridging bimodule.
#[derive(Clone)]
pub struct BridgeElement {
    bridge: Arc<Bridge>,
    terms: BTreeMap<(usize, Monomial), Scalar>,
}

impl PartialEq for BridgeElement {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.bridge, &other.bridge) && self.terms == other.terms
    }
}

impl fmt::Debug for BridgeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BridgeElement({self})")
    }
}

impl fmt::Display for BridgeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let module = self.bridge.pair.bimodule();
        for (i, ((m, s), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !c.is_one() {
                write!(f, "{c} ")?;
            }
            write!(f, "{} ⊗ {}", module.label(*m), self.bridge.target.monomial_string(s))?;
        }
        Ok(())
    }
}

impl BridgeElement {
    pub fn bridge(&self) -> &Arc<Bridge> {
        &self.bridge
    }

    pub fn terms(&self) -> &BTreeMap<(usize, Monomial), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn with_terms(&self, terms: BTreeMap<(usize, Monomial), Scalar>) -> BridgeElement {
        BridgeElement {
            bridge: Arc::clone(&self.bridge),
            terms,
        }
    }

    pub fn add(&self, other: &BridgeElement) -> Result<BridgeElement> {
        self.check_same(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            add_term(&mut terms, k.clone(), c.clone());
        }
        Ok(self.with_terms(terms))
    }

    pub fn sub(&self, other: &BridgeElement) -> Result<BridgeElement> {
        self.add(&other.scale(&(-&self.bridge.field().one())))
    }

    pub fn scale(&self, c: &Scalar) -> BridgeElement {
        let terms = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(k, x)| (k.clone(), x * c)).collect()
        };
        self.with_terms(terms)
    }

    fn check_same(&self, other: &BridgeElement) -> Result<()> {
        if Arc::ptr_eq(&self.bridge, &other.bridge) {
            Ok(())
        } else {
            Err(Error::GraphMismatch("elements of different bridging bimodules".into()))
        }
    }

    /// The action of one generator of `L_k(E)`.
    pub fn left_act(&self, g: Generator) -> BridgeElement {
        let mut out = BTreeMap::new();
        for ((m, s), c) in &self.terms {
            self.bridge.act_term(g, *m, s, c, &mut out);
        }
        self.with_terms(out)
    }

    /// The action of an arbitrary element: each monomial `e_1…e_k (f_1…f_l)*`
    /// acts as `f_1*` first and `e_1` last.
    pub fn left_act_element(&self, a: &LpaElement) -> Result<BridgeElement> {
        if a.algebra().graph() != self.bridge.source.graph() || a.algebra().field() != self.bridge.field() {
            return Err(Error::GraphMismatch("element is not over the source graph".into()));
        }
        let mut total = BTreeMap::new();
        for (mono, c) in a.terms() {
            let mut y = self.scale(c);
            if mono.alpha.is_empty() && mono.beta.is_empty() {
                y = y.left_act(Generator::Vertex(mono.alpha.start));
            }
            for &f in &mono.beta.edges {
                y = y.left_act(Generator::Ghost(f));
            }
            for &e in mono.alpha.edges.iter().rev() {
                y = y.left_act(Generator::Edge(e));
            }
            for (k, x) in y.terms {
                add_term(&mut total, k, x);
            }
        }
        Ok(self.with_terms(total))
    }

    /// `(m⊗S)·T = m ⊗ ST`.
    pub fn right_act(&self, t: &LpaElement) -> Result<BridgeElement> {
        let target = &self.bridge.target;
        if t.algebra().graph() != target.graph() || t.algebra().field() != target.field() {
            return Err(Error::GraphMismatch("element is not over the target graph".into()));
        }
        let mut out = BTreeMap::new();
        for ((m, s), c) in &self.terms {
            let mut raw = Vec::new();
            for (u, d) in t.terms() {
                if let Some(p) = target.multiply_monomials(s, u) {
                    raw.push((p, c * d));
                }
            }
            let x = target.normalize_unchecked(raw);
            self.bridge.push_lpa(&mut out, *m, x);
        }
        Ok(self.with_terms(out))
    }

    /// Common degree of all terms, `None` for zero or mixed degrees.
    pub fn degree(&self) -> Option<i64> {
        let mut degrees = self.terms.keys().map(|(_, s)| s.degree());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }
}

pub fn degree_of(y: &BridgeElement) -> Option<i64> {
    y.degree()
}

/// A failed relation on one basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkViolation {
    pub relation: usize,
    pub generators: String,
    pub element: String,
    pub lhs: String,
    pub rhs: String,
}

impl fmt::Display for CkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "relation {} ({}) fails on {}: {} != {}",
            self.relation, self.generators, self.element, self.lhs, self.rhs
        )
    }
}

pub const RELATION_NAMES: [&str; 5] = [
    "P_v P_w = δ P_v",
    "S_e P_r(e) = P_s(e) S_e = S_e",
    "P_r(e) S_e* = S_e* P_s(e) = S_e*",
    "S_e* S_f = δ P_r(e)",
    "Σ S_e S_e* = P_v",
];

/// Outcome of checking the five Cuntz–Krieger relations on a bounded basis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CkReport {
    pub basis_size: usize,
    pub checks: [usize; 5],
    pub failures: [usize; 5],
    /// First violation of each relation, in basis order.
    pub violations: Vec<CkViolation>,
}

impl CkReport {
    pub fn passed(&self) -> bool {
        self.failures.iter().all(|&f| f == 0)
    }

    pub fn relation_passed(&self, relation: usize) -> bool {
        self.failures[relation - 1] == 0
    }
}

#[derive(Default)]
struct Partial {
    checks: [usize; 5],
    failures: [usize; 5],
    first: [Option<CkViolation>; 5],
}

impl Partial {
    fn record(&mut self, relation: usize, ok: bool, violation: impl FnOnce() -> CkViolation) {
        self.checks[relation - 1] += 1;
        if !ok {
            self.failures[relation - 1] += 1;
            if self.first[relation - 1].is_none() {
                self.first[relation - 1] = Some(violation());
            }
        }
    }
}

fn check_element(bridge: &Arc<Bridge>, z: &BridgeElement) -> Partial {
    let alg = &bridge.source;
    let nv = alg.vertex_count() as u32;
    let ne = alg.edge_count() as u32;
    let mut p = Partial::default();
    let wrap = |terms| z.with_terms(terms);
    let ghosts = |y: &BridgeElement| -> Vec<BridgeElement> {
        if y.is_zero() {
            vec![bridge.zero(); ne as usize]
        } else {
            bridge.act_all_ghosts(&y.terms).into_iter().map(wrap).collect()
        }
    };
    let pv: Vec<BridgeElement> = (0..nv).map(|v| z.left_act(Generator::Vertex(v))).collect();
    let se: Vec<BridgeElement> = (0..ne).map(|e| z.left_act(Generator::Edge(e))).collect();
    let sg = ghosts(z);
    let pv_ghosts: Vec<Vec<BridgeElement>> = pv.iter().map(ghosts).collect();
    let zero = bridge.zero();
    let violation = |relation: usize, generators: String, lhs: &BridgeElement, rhs: &BridgeElement| CkViolation {
        relation,
        generators,
        element: z.to_string(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    };
    for v in 0..nv {
        for w in 0..nv {
            let lhs = pv[w as usize].left_act(Generator::Vertex(v));
            let rhs = if v == w { &pv[v as usize] } else { &zero };
            p.record(1, lhs == *rhs, || {
                violation(
                    1,
                    format!("v={}, w={}", alg.vertex_name(v), alg.vertex_name(w)),
                    &lhs,
                    rhs,
                )
            });
        }
    }
    for e in 0..ne {
        let name = alg.edge_name(e).to_string();
        let (s, r) = (alg.src(e), alg.rng(e));
        let a = pv[r as usize].left_act(Generator::Edge(e));
        let b = se[e as usize].left_act(Generator::Vertex(s));
        let target = &se[e as usize];
        p.record(2, a == *target && b == *target, || {
            let lhs = if a != *target { &a } else { &b };
            violation(2, format!("e={name}"), lhs, target)
        });
        let a = sg[e as usize].left_act(Generator::Vertex(r));
        let b = &pv_ghosts[s as usize][e as usize];
        let target = &sg[e as usize];
        p.record(3, a == *target && b == target, || {
            let lhs = if a != *target { &a } else { b };
            violation(3, format!("e={name}"), lhs, target)
        });
    }
    for f in 0..ne {
        let row = ghosts(&se[f as usize]);
        for e in 0..ne {
            let lhs = &row[e as usize];
            let rhs = if e == f { &pv[alg.rng(e) as usize] } else { &zero };
            p.record(4, lhs == rhs, || {
                violation(4, format!("e={}, f={}", alg.edge_name(e), alg.edge_name(f)), lhs, rhs)
            });
        }
    }
    for v in 0..nv {
        let mut sum = BTreeMap::new();
        for &e in alg.out_edges(v) {
            for ((m, s), c) in &sg[e as usize].terms {
                bridge.act_term(Generator::Edge(e), *m, s, c, &mut sum);
            }
        }
        let sum = z.with_terms(sum);
        let rhs = &pv[v as usize];
        p.record(5, sum == *rhs, || {
            violation(5, format!("v={}", alg.vertex_name(v)), &sum, rhs)
        });
    }
    p
}

/// Checks the five relations for the generator actions on every basis
/// element with path lengths at most `length_bound` and, if given,
/// `|degree| <= degree_bound`.
pub fn verify_ck_on_bridge(bridge: &Arc<Bridge>, length_bound: usize, degree_bound: Option<i64>) -> CkReport {
    let basis: Vec<BridgeElement> = bridge
        .basis(length_bound)
        .into_iter()
        .filter(|z| degree_bound.is_none_or(|d| z.degree().is_some_and(|k| k.abs() <= d)))
        .collect();
    let parts: Vec<Partial> = basis.par_iter().map(|z| check_element(bridge, z)).collect();
    let mut report = CkReport {
        basis_size: basis.len(),
        ..CkReport::default()
    };
    let mut first: [Option<CkViolation>; 5] = Default::default();
    for part in parts {
        for (r, slot) in first.iter_mut().enumerate() {
            report.checks[r] += part.checks[r];
            report.failures[r] += part.failures[r];
            if slot.is_none() {
                *slot = part.first[r].clone();
            }
        }
    }
    report.violations = first.into_iter().flatten().collect();
    report
}

/// The pair `((kE^1)^{⊗m}, ν_m)` from `E` to itself.
pub fn nu_pair(g: &Graph, m: u32, field: Field) -> Result<ConjugacyPair> {
    let map = nu(g, m, field)?;
    let t = Arc::new(tensor_power(&edge_bimodule(g), m)?);
    ConjugacyPair::new(g.clone(), g.clone(), t, map)
}

fn label_path(alg: &Leavitt, label: &Label) -> Result<Path> {
    alg.parse_path(&label.leaves())
}

/// `ρ((x_1⊗…⊗x_m) ⊗ S) = x_1…x_m S` for an element over `nu_pair(E, m)`.
pub fn rho(z: &BridgeElement) -> Result<LpaElement> {
    let bridge = &z.bridge;
    let pair = bridge.pair();
    if pair.source_graph() != pair.target_graph() {
        return Err(Error::GraphMismatch("not a bridge from a graph to itself".into()));
    }
    let alg = &bridge.target;
    let mut raw = Vec::new();
    for ((m, s), c) in &z.terms {
        let path = label_path(alg, pair.bimodule().label(*m))?;
        let prefix = Monomial {
            beta: Path::vertex(alg.end(&path)),
            alpha: path,
        };
        if let Some(t) = alg.multiply_monomials(&prefix, s) {
            raw.push((t, c.clone()));
        }
    }
    Ok(alg.normalize_unchecked(raw))
}

/// `Ψ(w⊗S) = wS` for an element over `epsilon(E)`.
pub fn psi_identity(z: &BridgeElement) -> Result<LpaElement> {
    let bridge = &z.bridge;
    let pair = bridge.pair();
    let vertices = pair.source_graph().vertices();
    let module = pair.bimodule();
    let is_vertex_module = pair.source_graph() == pair.target_graph()
        && module.len() == vertices.len()
        && module
            .basis()
            .iter()
            .all(|b| b.src == b.tgt && b.label == Label::atom(vertices[b.src].clone()));
    if !is_vertex_module {
        return Err(Error::InvalidPair("not the identity pair".into()));
    }
    let alg = &bridge.target;
    let mut raw = Vec::new();
    for ((m, s), c) in &z.terms {
        let w = pair.bimodule().basis()[*m].src as u32;
        if s.alpha.start == w {
            raw.push((s.clone(), c.clone()));
        }
    }
    Ok(alg.normalize_unchecked(raw))
}

/// An element of `Y_σ ⊗_{L_k(F)} Y_ψ` written as `Σ c (m⊗1) ⊗ (n⊗T)`.
#[derive(Clone)]
pub struct PairTensorElement {
    first: Arc<Bridge>,
    second: Arc<Bridge>,
    terms: BTreeMap<(usize, usize, Monomial), Scalar>,
}

impl PartialEq for PairTensorElement {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.first, &other.first) && Arc::ptr_eq(&self.second, &other.second) && self.terms == other.terms
    }
}

impl fmt::Debug for PairTensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PairTensorElement({self})")
    }
}

impl fmt::Display for PairTensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let (mm, nn) = (self.first.pair.bimodule(), self.second.pair.bimodule());
        for (i, ((m, n, t), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !c.is_one() {
                write!(f, "{c} ")?;
            }
            write!(
                f,
                "({}⊗1) ⊗ ({} ⊗ {})",
                mm.label(*m),
                nn.label(*n),
                self.second.target.monomial_string(t)
            )?;
        }
        Ok(())
    }
}

fn check_composable(first: &Arc<Bridge>, second: &Arc<Bridge>) -> Result<()> {
    if first.pair.target_graph() != second.pair.source_graph() || first.field() != second.field() {
        return Err(Error::GraphMismatch("bridges are not composable".into()));
    }
    Ok(())
}

impl PairTensorElement {
    pub fn zero(first: &Arc<Bridge>, second: &Arc<Bridge>) -> Result<Self> {
        check_composable(first, second)?;
        Ok(PairTensorElement {
            first: Arc::clone(first),
            second: Arc::clone(second),
            terms: BTreeMap::new(),
        })
    }

    pub fn terms(&self) -> &BTreeMap<(usize, usize, Monomial), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The normal-form element `(m⊗1) ⊗ (n⊗T)`.
    pub fn basis_element(first: &Arc<Bridge>, second: &Arc<Bridge>, m: usize, n: usize, t: Monomial) -> Result<Self> {
        let mut out = Self::zero(first, second)?;
        let y = second.basis_element(n, t);
        out.absorb(m, &first.field().one(), &y);
        Ok(out)
    }

    /// Adds `c (m⊗1) ⊗ y`, dropping terms where `tgt(m) ≠ src(n)`.
    fn absorb(&mut self, m: usize, c: &Scalar, y: &BridgeElement) {
        let tgt = self.first.module_tgt(m);
        for ((n, t), d) in &y.terms {
            if self.second.module_src(*n) == tgt {
                add_term(&mut self.terms, (m, *n, t.clone()), c * d);
            }
        }
    }

    /// Reduces `x ⊗ y` to normal form by moving each `S` in `x = Σ m⊗S`
    /// across the tensor sign.
    pub fn from_elementary(x: &BridgeElement, y: &BridgeElement) -> Result<Self> {
        let mut out = Self::zero(&x.bridge, &y.bridge)?;
        for ((m, s), c) in &x.terms {
            let mono = x.bridge.target.monomial(s.clone())?;
            let moved = y.left_act_element(&mono)?;
            out.absorb(*m, c, &moved);
        }
        Ok(out)
    }

    /// The left action of a generator of `L_k(E)`.
    pub fn left_act(&self, g: Generator) -> Result<Self> {
        let mut out = Self::zero(&self.first, &self.second)?;
        for ((m, n, t), c) in &self.terms {
            let x = self.first.unit_element(*m).left_act(g).scale(c);
            let y = self.second.basis_element(*n, t.clone());
            let part = Self::from_elementary(&x, &y)?;
            for (k, d) in part.terms {
                add_term(&mut out.terms, k, d);
            }
        }
        Ok(out)
    }
}

/// `η((m⊗n)⊗T) = (m⊗1)⊗(n⊗T)` for an element over the composite pair.
pub fn eta(composite: &BridgeElement, first: &Arc<Bridge>, second: &Arc<Bridge>) -> Result<PairTensorElement> {
    let mn = tensor(first.pair.bimodule(), second.pair.bimodule())?;
    if **composite.bridge.pair.bimodule() != mn {
        return Err(Error::ShapeMismatch(
            "element is not over the composite bimodule".into(),
        ));
    }
    let mut out = PairTensorElement::zero(first, second)?;
    for ((k, t), c) in &composite.terms {
        let (m, n) = mn.pair(*k).expect("tensor basis");
        add_term(&mut out.terms, (m, n, t.clone()), c.clone());
    }
    Ok(out)
}

/// The inverse of [`eta`]: `(m⊗1)⊗(n⊗T) ↦ (m⊗n)⊗T`.
pub fn tau(w: &PairTensorElement, composite: &Arc<Bridge>) -> Result<BridgeElement> {
    let mn = tensor(w.first.pair.bimodule(), w.second.pair.bimodule())?;
    if **composite.pair.bimodule() != mn {
        return Err(Error::ShapeMismatch("composite bridge does not match".into()));
    }
    let mut terms = BTreeMap::new();
    for ((m, n, t), c) in &w.terms {
        let k = mn.pair_index(*m, *n).expect("compatible pair");
        add_term(&mut terms, (k, t.clone()), c.clone());
    }
    Ok(BridgeElement {
        bridge: Arc::clone(composite),
        terms,
    })
}

/// Normal-form basis of `Y_σ ⊗ Y_ψ` with `|α|, |β| <= bound` in `T`.
pub fn pair_tensor_basis(first: &Arc<Bridge>, second: &Arc<Bridge>, bound: usize) -> Result<Vec<PairTensorElement>> {
    check_composable(first, second)?;
    let mut out = Vec::new();
    for m in 0..first.pair.bimodule().len() {
        for y in second.basis(bound) {
            let (n, _) = y.terms.keys().next().expect("basis element").clone();
            if second.module_src(n) != first.module_tgt(m) {
                continue;
            }
            let mut w = PairTensorElement::zero(first, second)?;
            w.absorb(m, &first.field().one(), &y);
            out.push(w);
        }
    }
    Ok(out)
}
