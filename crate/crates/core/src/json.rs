//! JSON wire formats. Each wire type converts to and from the library type;
//! scalars are written as `"p/q"` strings and read from strings or
//! integers.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bimodule::{edge_bimodule, tensor, tensor_power, BasisElem, BlockMap, ConjugacyPair, Label, PolyBimodule};
use crate::bridge::{Bridge, BridgeElement};
use crate::com::ComWitness;
use crate::error::{Error, Result};
use crate::graph::{default_labels, Graph, NonNegMatrix, Polymorphism};
use crate::linalg::DenseMatrix;
use crate::lpa::{Leavitt, LpaElement};
use crate::scalar::{Field, Scalar};
use crate::shift_equiv::{SeWitness, SseChain, SseStep};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vertices: Option<Vec<String>>,
    pub edges: Vec<EdgeJson>,
}

impl GraphJson {
    pub fn from_polymorphism(p: &Polymorphism) -> Self {
        let (src, tgt) = (p.source_vertices(), p.target_vertices());
        GraphJson {
            vertices: src.to_vec(),
            target_vertices: (src != tgt).then(|| tgt.to_vec()),
            edges: p
                .edges()
                .iter()
                .map(|e| EdgeJson {
                    name: e.name.clone(),
                    src: src[e.src].clone(),
                    tgt: tgt[e.tgt].clone(),
                })
                .collect(),
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        Self::from_polymorphism(g.as_polymorphism())
    }

    pub fn to_polymorphism(&self) -> Result<Polymorphism> {
        let target = self.target_vertices.clone().unwrap_or_else(|| self.vertices.clone());
        let edges: Vec<(&str, &str, &str)> = self
            .edges
            .iter()
            .map(|e| (e.name.as_str(), e.src.as_str(), e.tgt.as_str()))
            .collect();
        Polymorphism::new(self.vertices.clone(), target, &edges)
    }

    pub fn to_graph(&self) -> Result<Graph> {
        if self.target_vertices.as_ref().is_some_and(|t| *t != self.vertices) {
            return Err(Error::VertexSetMismatch("a graph has one vertex set".into()));
        }
        Graph::from_polymorphism(self.to_polymorphism()?)
    }
}

/// A matrix entry, given as a JSON number or a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountJson {
    Int(u64),
    Text(String),
}

impl CountJson {
    fn value(&self) -> Result<BigUint> {
        match self {
            CountJson::Int(n) => Ok(BigUint::from(*n)),
            CountJson::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("`{s}` is not a nonnegative integer"))),
        }
    }

    fn from_value(x: &BigUint) -> Self {
        match u64::try_from(x) {
            Ok(n) => CountJson::Int(n),
            Err(_) => CountJson::Text(x.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<Vec<String>>,
    pub entries: Vec<Vec<CountJson>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &NonNegMatrix) -> Self {
        MatrixJson {
            rows: Some(m.rows().to_vec()),
            cols: Some(m.cols().to_vec()),
            entries: m
                .entries()
                .iter()
                .map(|r| r.iter().map(CountJson::from_value).collect())
                .collect(),
        }
    }

    /// Missing labels default to `0, 1, …`.
    pub fn to_matrix(&self) -> Result<NonNegMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(CountJson::value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let nrows = entries.len();
        let ncols = match (&self.cols, entries.first()) {
            (Some(c), _) => c.len(),
            (None, Some(r)) => r.len(),
            (None, None) => 0,
        };
        let rows = self.rows.clone().unwrap_or_else(|| default_labels(nrows));
        let cols = self.cols.clone().unwrap_or_else(|| default_labels(ncols));
        NonNegMatrix::new(rows, cols, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    #[serde(rename = "R")]
    pub r: MatrixJson,
    #[serde(rename = "S")]
    pub s: MatrixJson,
    #[serde(default = "unit_lag")]
    pub n: u32,
}

fn unit_lag() -> u32 {
    1
}

impl WitnessJson {
    pub fn from_witness(w: &SeWitness) -> Self {
        WitnessJson {
            r: MatrixJson::from_matrix(&w.r),
            s: MatrixJson::from_matrix(&w.s),
            n: w.lag,
        }
    }

    pub fn to_witness(&self) -> Result<SeWitness> {
        Ok(SeWitness {
            r: self.r.to_matrix()?,
            s: self.s.to_matrix()?,
            lag: self.n,
        })
    }
}

/// One step of a chain: `A = RS`, next matrix `SR`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "R")]
    pub r: MatrixJson,
    #[serde(rename = "S")]
    pub s: MatrixJson,
}

pub fn chain_to_json(c: &SseChain) -> Vec<StepJson> {
    c.steps
        .iter()
        .map(|st| StepJson {
            a: MatrixJson::from_matrix(&st.a),
            r: MatrixJson::from_matrix(&st.r),
            s: MatrixJson::from_matrix(&st.s),
        })
        .collect()
}

pub fn chain_from_json(steps: &[StepJson]) -> Result<SseChain> {
    let steps = steps
        .iter()
        .map(|st| {
            Ok(SseStep {
                a: st.a.to_matrix()?,
                r: st.r.to_matrix()?,
                s: st.s.to_matrix()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SseChain { steps })
}

/// A scalar given as `"p/q"`, `"n"` or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Int(i64),
    Text(String),
}

impl ScalarJson {
    pub fn from_scalar(c: &Scalar) -> Self {
        ScalarJson::Text(c.to_string())
    }

    pub fn to_scalar(&self, field: Field) -> Result<Scalar> {
        match self {
            ScalarJson::Int(n) => Ok(field.from_i64(*n)),
            ScalarJson::Text(s) => field.parse(s),
        }
    }
}

fn one() -> ScalarJson {
    ScalarJson::Int(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    #[serde(default = "one")]
    pub coeff: ScalarJson,
}

pub fn element_to_json(x: &LpaElement) -> Vec<TermJson> {
    let alg = x.algebra();
    x.terms()
        .iter()
        .map(|(m, c)| TermJson {
            alpha: alg.path_names(&m.alpha),
            beta: alg.path_names(&m.beta),
            coeff: ScalarJson::from_scalar(c),
        })
        .collect()
}

/// Reads raw terms and normalizes them.
pub fn element_from_json(alg: &Arc<Leavitt>, terms: &[TermJson]) -> Result<LpaElement> {
    let raw = terms
        .iter()
        .map(|t| Ok((alg.parse_monomial(&t.alpha, &t.beta)?, t.coeff.to_scalar(alg.field())?)))
        .collect::<Result<Vec<_>>>()?;
    alg.normalize(raw)
}

/// A basis label: a string, or a two-element array for a tensor pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelJson {
    Atom(String),
    Pair(Box<LabelJson>, Box<LabelJson>),
}

impl LabelJson {
    pub fn from_label(l: &Label) -> Self {
        match l {
            Label::Atom(s) => LabelJson::Atom(s.clone()),
            Label::Pair(a, b) => LabelJson::Pair(Box::new(Self::from_label(a)), Box::new(Self::from_label(b))),
        }
    }

    pub fn to_label(&self) -> Label {
        match self {
            LabelJson::Atom(s) => Label::atom(s.clone()),
            LabelJson::Pair(a, b) => Label::pair(a.to_label(), b.to_label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisJson {
    pub id: LabelJson,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimoduleJson {
    pub left_vertices: Vec<String>,
    pub right_vertices: Vec<String>,
    pub basis: Vec<BasisJson>,
}

impl BimoduleJson {
    pub fn from_bimodule(m: &PolyBimodule) -> Self {
        BimoduleJson {
            left_vertices: m.left().to_vec(),
            right_vertices: m.right().to_vec(),
            basis: m
                .basis()
                .iter()
                .map(|b| BasisJson {
                    id: LabelJson::from_label(&b.label),
                    src: m.left()[b.src].clone(),
                    tgt: m.right()[b.tgt].clone(),
                })
                .collect(),
        }
    }

    /// Keeps the listed basis order.
    pub fn to_bimodule(&self) -> Result<PolyBimodule> {
        let find = |vs: &[String], name: &str| {
            vs.iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };
        let basis = self
            .basis
            .iter()
            .map(|b| {
                Ok(BasisElem {
                    label: b.id.to_label(),
                    src: find(&self.left_vertices, &b.src)?,
                    tgt: find(&self.right_vertices, &b.tgt)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PolyBimodule::from_basis(self.left_vertices.clone(), self.right_vertices.clone(), basis)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMapJson {
    /// Keyed by `"(v,w)"`; rows follow the codomain basis, columns the
    /// domain basis.
    pub blocks: BTreeMap<String, Vec<Vec<ScalarJson>>>,
}

impl BlockMapJson {
    pub fn from_map(f: &BlockMap) -> Self {
        let dom = f.domain();
        let blocks = f
            .to_blocks()
            .into_iter()
            .map(|((s, t), m)| {
                let rows = (0..m.rows())
                    .map(|i| (0..m.cols()).map(|j| ScalarJson::from_scalar(m.get(i, j))).collect())
                    .collect();
                (dom.block_name(s, t), rows)
            })
            .collect();
        BlockMapJson { blocks }
    }

    pub fn to_map(&self, domain: Arc<PolyBimodule>, codomain: Arc<PolyBimodule>, field: Field) -> Result<BlockMap> {
        let mut keys = HashMap::new();
        for s in 0..domain.left().len() {
            for t in 0..domain.right().len() {
                keys.insert(domain.block_name(s, t), (s, t));
            }
        }
        let mut blocks = BTreeMap::new();
        for (name, rows) in &self.blocks {
            let key = *keys
                .get(name.replace(' ', "").as_str())
                .ok_or_else(|| Error::Parse(format!("unknown block `{name}`")))?;
            let rows = rows
                .iter()
                .map(|r| r.iter().map(|c| c.to_scalar(field)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
                return Err(Error::ShapeMismatch(format!("block {name} is ragged")));
            }
            let cols = rows.first().map_or(0, Vec::len);
            let mut m = DenseMatrix::zeros(field, rows.len(), cols);
            for (i, r) in rows.into_iter().enumerate() {
                for (j, c) in r.into_iter().enumerate() {
                    m.set(i, j, c);
                }
            }
            blocks.insert(key, m);
        }
        BlockMap::from_blocks(domain, codomain, field, &blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJson {
    #[serde(rename = "E")]
    pub e: GraphJson,
    #[serde(rename = "F")]
    pub f: GraphJson,
    #[serde(rename = "M")]
    pub m: BimoduleJson,
    pub sigma: BlockMapJson,
}

impl PairJson {
    pub fn from_pair(p: &ConjugacyPair) -> Self {
        PairJson {
            e: GraphJson::from_graph(p.source_graph()),
            f: GraphJson::from_graph(p.target_graph()),
            m: BimoduleJson::from_bimodule(p.bimodule()),
            sigma: BlockMapJson::from_map(p.sigma()),
        }
    }

    pub fn to_pair(&self, field: Field) -> Result<ConjugacyPair> {
        let e = self.e.to_graph()?;
        let f = self.f.to_graph()?;
        let m = Arc::new(self.m.to_bimodule()?);
        let e1 = edge_bimodule(&e);
        let f1 = edge_bimodule(&f);
        let dom = Arc::new(tensor(&e1, &m)?);
        let cod = Arc::new(tensor(&m, &f1)?);
        let sigma = self.sigma.to_map(dom, cod, field)?;
        ConjugacyPair::new(e, f, m, sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComJson {
    #[serde(rename = "E")]
    pub e: GraphJson,
    #[serde(rename = "F")]
    pub f: GraphJson,
    #[serde(rename = "M")]
    pub m: BimoduleJson,
    #[serde(rename = "N")]
    pub n: BimoduleJson,
    #[serde(rename = "n")]
    pub lag: u32,
    #[serde(rename = "omega_E")]
    pub omega_e: BlockMapJson,
    #[serde(rename = "omega_F")]
    pub omega_f: BlockMapJson,
    #[serde(rename = "sigma_M")]
    pub sigma_m: BlockMapJson,
    #[serde(rename = "sigma_N")]
    pub sigma_n: BlockMapJson,
}

impl ComJson {
    pub fn from_witness(w: &ComWitness) -> Self {
        ComJson {
            e: GraphJson::from_graph(&w.e),
            f: GraphJson::from_graph(&w.f),
            m: BimoduleJson::from_bimodule(&w.m),
            n: BimoduleJson::from_bimodule(&w.n),
            lag: w.lag,
            omega_e: BlockMapJson::from_map(&w.omega_e),
            omega_f: BlockMapJson::from_map(&w.omega_f),
            sigma_m: BlockMapJson::from_map(&w.sigma_m),
            sigma_n: BlockMapJson::from_map(&w.sigma_n),
        }
    }

    pub fn to_witness(&self, field: Field) -> Result<ComWitness> {
        if self.lag == 0 {
            return Err(Error::InvalidWitness("lag must be positive".into()));
        }
        let e = self.e.to_graph()?;
        let f = self.f.to_graph()?;
        let m = Arc::new(self.m.to_bimodule()?);
        let n = Arc::new(self.n.to_bimodule()?);
        let e1 = edge_bimodule(&e);
        let f1 = edge_bimodule(&f);
        let a = |x| Arc::new(x);
        let omega_e = self
            .omega_e
            .to_map(a(tensor(&m, &n)?), a(tensor_power(&e1, self.lag)?), field)?;
        let omega_f = self
            .omega_f
            .to_map(a(tensor(&n, &m)?), a(tensor_power(&f1, self.lag)?), field)?;
        let sigma_m = self.sigma_m.to_map(a(tensor(&e1, &m)?), a(tensor(&m, &f1)?), field)?;
        let sigma_n = self.sigma_n.to_map(a(tensor(&f1, &n)?), a(tensor(&n, &e1)?), field)?;
        Ok(ComWitness {
            e,
            f,
            m,
            n,
            lag: self.lag,
            omega_e,
            omega_f,
            sigma_m,
            sigma_n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeTermJson {
    pub m: LabelJson,
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    #[serde(default = "one")]
    pub coeff: ScalarJson,
}

pub fn bridge_element_to_json(y: &BridgeElement) -> Vec<BridgeTermJson> {
    let bridge = y.bridge();
    let alg = bridge.target();
    let module = bridge.pair().bimodule();
    y.terms()
        .iter()
        .map(|((m, s), c)| BridgeTermJson {
            m: LabelJson::from_label(module.label(*m)),
            alpha: alg.path_names(&s.alpha),
            beta: alg.path_names(&s.beta),
            coeff: ScalarJson::from_scalar(c),
        })
        .collect()
}

pub fn bridge_element_from_json(bridge: &Arc<Bridge>, terms: &[BridgeTermJson]) -> Result<BridgeElement> {
    let alg = bridge.target();
    let module = bridge.pair().bimodule();
    let raw = terms
        .iter()
        .map(|t| {
            let label = t.m.to_label();
            let m = module
                .index_of(&label)
                .ok_or_else(|| Error::InvalidArgument(format!("no basis element `{label}`")))?;
            Ok((
                m,
                alg.parse_monomial(&t.alpha, &t.beta)?,
                t.coeff.to_scalar(alg.field())?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    bridge.element(raw)
}
