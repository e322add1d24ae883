//! Command-line front end: argument parsing, input loading and run reports.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bimodule::{
    conjugacy_failure, dimension_condition, epsilon, hash_compose, pair_equivalence_failure, ConjugacyPair,
};
use crate::bridge::{verify_ck_on_bridge, Bridge, Generator};
use crate::com::{
    chain_com, com_failure, com_from_elementary_sse, factorization_failure, search_com_candidates, CandidateSearch,
};
use crate::error::{Error, Result};
use crate::graph::{iso_check, polymorphism_from_matrix, power, product, Graph, NonNegMatrix};
use crate::json::{
    bridge_element_from_json, bridge_element_to_json, chain_from_json, chain_to_json, element_from_json,
    element_to_json, BlockMapJson, BridgeTermJson, ComJson, GraphJson, MatrixJson, PairJson, StepJson, TermJson,
    WitnessJson,
};
use crate::lpa::Leavitt;
use crate::scalar::Field;
use crate::shift_equiv::{
    elementary_sse_failure, se_failure, search_elementary_sse, search_se, search_sse_chain, SeWitness,
};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Environment variable that overrides `--field`.
pub const FIELD_ENV: &str = "LPA_FIELD";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    UnknownWithinBounds,
    InputError,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::UnknownWithinBounds => 2,
            Verdict::InputError => 3,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::UnknownWithinBounds => "unknown-within-bounds",
            Verdict::InputError => "input-error",
        }
    }
}

/// Machine-readable outcome of one invocation. Deterministic for fixed
/// inputs and flags unless `--timing` is given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    /// SHA-256 over the input files in the order they were read.
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub counterexamples: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command.join(" "));
        let _ = writeln!(s, "inputs: {}", self.inputs_digest);
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        for c in &self.counterexamples {
            let _ = writeln!(s, "counterexample: {c}");
        }
        if let Some(err) = &self.error {
            let _ = writeln!(s, "error: {err}");
        }
        if let Some(result) = &self.result {
            let pretty = serde_json::to_string_pretty(result).expect("values serialize");
            let _ = writeln!(s, "result: {pretty}");
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(s, "timing: {ms:.3} ms");
        }
        s
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Exit code plus everything the process would print.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "lpa-bridge",
    version,
    about = "Exact checks for shift equivalence, conjugacy pairs and bridging bimodules"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
    /// Scalar field: `rational` or `gfp:<p>`. LPA_FIELD overrides it.
    #[arg(long, global = true, default_value = "rational")]
    field: String,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Graphs, polymorphisms and adjacency matrices.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Shift equivalence witnesses.
    #[command(subcommand)]
    Se(SeCmd),
    /// Elementary strong shift equivalence and chains.
    #[command(subcommand)]
    Sse(SseCmd),
    /// Leavitt path algebra arithmetic.
    #[command(subcommand)]
    Lpa(LpaCmd),
    /// Specified conjugacy pairs.
    #[command(subcommand)]
    Conj(ConjCmd),
    /// Bridging bimodules.
    #[command(subcommand)]
    Bridge(BridgeCmd),
    /// Commuting-diagram witnesses.
    #[command(subcommand)]
    Com(ComCmd),
}

#[derive(Debug, Subcommand)]
enum GraphCmd {
    /// Adjacency matrix of a graph or polymorphism.
    Adjacency {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Polymorphism with canonical edge ids realizing a matrix.
    FromMatrix {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Product polymorphism of two composable polymorphisms.
    Product {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// n-th path polymorphism of a graph.
    Power {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Whether two polymorphisms have equal adjacency matrices.
    Iso {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Random sink-free graph drawn from `--seed`.
    Random {
        #[arg(long, default_value_t = 2)]
        vertices: usize,
        #[arg(long, default_value_t = 2)]
        max_multiplicity: u64,
    },
}

#[derive(Debug, Args)]
struct MatrixPair {
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long = "B")]
    b: PathBuf,
}

#[derive(Debug, Subcommand)]
enum SeCmd {
    /// Check a witness `{"R", "S", "n"}`.
    Verify {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Smallest witness within bounds.
    Search {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long, default_value_t = 3)]
        max_lag: u32,
        #[arg(long, default_value_t = 3)]
        max_entry: u64,
    },
}

#[derive(Debug, Subcommand)]
enum SseCmd {
    /// Check `A = RS`, `B = SR` for a witness `{"R", "S"}`.
    Verify {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Smallest elementary witness within bounds.
    Search {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long, default_value_t = 3)]
        max_inner_dim: usize,
        #[arg(long, default_value_t = 3)]
        max_entry: u64,
    },
    /// Chain of elementary steps from A to B within bounds.
    Chain {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long, default_value_t = 1)]
        depth: u32,
        #[arg(long, default_value_t = 3)]
        max_inner_dim: usize,
        #[arg(long, default_value_t = 3)]
        max_entry: u64,
    },
    /// Check a chain given as a list of steps `{"A", "R", "S"}`.
    VerifyChain {
        #[command(flatten)]
        mats: MatrixPair,
        #[arg(long)]
        chain: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum LpaCmd {
    /// Normal form of an element.
    Normalize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Product of two elements.
    Mul {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Degree of an element and its homogeneous components.
    Degree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ConjCmd {
    /// Check that σ is an invertible block map.
    Verify {
        #[arg(long)]
        pair: PathBuf,
    },
    /// Composite pair of two composable pairs.
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Check that φ is an equivalence of pairs.
    Equiv {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long)]
        phi: PathBuf,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("bridge_source").required(true).args(["pair", "graph"])))]
struct BridgeSource {
    /// Conjugacy pair file.
    #[arg(long)]
    pair: Option<PathBuf>,
    /// Graph file; uses its identity pair.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum BridgeCmd {
    /// Basis sizes by degree up to a monomial length bound.
    Build {
        #[command(flatten)]
        source: BridgeSource,
        #[arg(long, default_value_t = 2)]
        length_bound: usize,
        /// Also list the basis elements.
        #[arg(long)]
        list: bool,
    },
    /// Left action of a generator (`v`, `e` or `e*`) on an element.
    Act {
        #[command(flatten)]
        source: BridgeSource,
        #[arg(long)]
        generator: String,
        #[arg(long)]
        element: PathBuf,
    },
    /// Check the Cuntz–Krieger relations on a bounded basis.
    VerifyCk {
        #[command(flatten)]
        source: BridgeSource,
        #[arg(long, default_value_t = 2)]
        length_bound: usize,
        #[arg(long)]
        degree_bound: Option<i64>,
    },
}

#[derive(Debug, Args)]
struct GraphPair {
    #[arg(long = "E")]
    e: PathBuf,
    #[arg(long = "F")]
    f: PathBuf,
}

#[derive(Debug, Subcommand)]
enum ComCmd {
    /// Check both commuting diagrams.
    Verify {
        #[arg(long)]
        witness: PathBuf,
    },
    /// Witness built from an elementary strong shift equivalence.
    FromSse {
        #[command(flatten)]
        graphs: GraphPair,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Composite witness of E → F and F → G.
    Chain {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Heuristic search over blockwise permutation σ for an SE witness.
    Search {
        #[command(flatten)]
        graphs: GraphPair,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        limit: u64,
    },
}

/// Verdict, counterexamples and payload of one subcommand.
struct Finding {
    verdict: Verdict,
    counterexamples: Vec<String>,
    result: Option<Value>,
}

impl Finding {
    fn pass(result: Value) -> Self {
        Finding {
            verdict: Verdict::Pass,
            counterexamples: Vec::new(),
            result: Some(result),
        }
    }

    fn unknown(result: Value) -> Self {
        Finding {
            verdict: Verdict::UnknownWithinBounds,
            counterexamples: Vec::new(),
            result: Some(result),
        }
    }

    fn check(failures: Vec<String>, result: Option<Value>) -> Self {
        let verdict = if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Finding {
            verdict,
            counterexamples: failures,
            result,
        }
    }
}

/// Reads inputs and accumulates their digest.
struct Inputs {
    field: Field,
    hasher: Sha256,
}

impl Inputs {
    fn read<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        let bad = |e: serde_json::Error| Error::Parse(format!("{}: {e}", path.display()));
        let mut value: Value = serde_json::from_slice(&bytes).map_err(bad)?;
        // A previous run report stands for its result.
        if let Some(obj) = value.as_object_mut() {
            if obj.contains_key("verdict") {
                if let Some(result) = obj.remove("result") {
                    value = result;
                }
            }
        }
        serde_json::from_value(value).map_err(bad)
    }

    fn matrix(&mut self, path: &Path) -> Result<NonNegMatrix> {
        self.read::<MatrixJson>(path)?.to_matrix()
    }

    fn graph(&mut self, path: &Path) -> Result<Graph> {
        self.read::<GraphJson>(path)?.to_graph()
    }

    fn pair(&mut self, path: &Path) -> Result<ConjugacyPair> {
        self.read::<PairJson>(path)?.to_pair(self.field)
    }

    fn bridge(&mut self, source: &BridgeSource) -> Result<Arc<Bridge>> {
        let pair = match (&source.pair, &source.graph) {
            (Some(p), _) => self.pair(p)?,
            (None, Some(g)) => epsilon(&self.graph(g)?, self.field),
            (None, None) => return Err(Error::InvalidArgument("give --pair or --graph".into())),
        };
        Bridge::new(pair)
    }

    fn digest(&self) -> String {
        let bytes = self.hasher.clone().finalize();
        let mut s = String::from("sha256:");
        for b in bytes {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("wire types serialize")
}

fn dispatch(cmd: &Command, inputs: &mut Inputs, seed: u64) -> Result<Finding> {
    match cmd {
        Command::Graph(c) => run_graph(c, inputs, seed),
        Command::Se(c) => run_se(c, inputs),
        Command::Sse(c) => run_sse(c, inputs),
        Command::Lpa(c) => run_lpa(c, inputs),
        Command::Conj(c) => run_conj(c, inputs),
        Command::Bridge(c) => run_bridge(c, inputs),
        Command::Com(c) => run_com(c, inputs),
    }
}

fn run_graph(cmd: &GraphCmd, inputs: &mut Inputs, seed: u64) -> Result<Finding> {
    match cmd {
        GraphCmd::Adjacency { graph } => {
            let p = inputs.read::<GraphJson>(graph)?.to_polymorphism()?;
            Ok(Finding::pass(to_value(&MatrixJson::from_matrix(&p.adjacency()))))
        }
        GraphCmd::FromMatrix { matrix } => {
            let p = polymorphism_from_matrix(&inputs.matrix(matrix)?)?;
            Ok(Finding::pass(to_value(&GraphJson::from_polymorphism(&p))))
        }
        GraphCmd::Product { first, second } => {
            let p = inputs.read::<GraphJson>(first)?.to_polymorphism()?;
            let q = inputs.read::<GraphJson>(second)?.to_polymorphism()?;
            Ok(Finding::pass(to_value(&GraphJson::from_polymorphism(&product(
                &p, &q,
            )?))))
        }
        GraphCmd::Power { graph, n } => {
            let g = inputs.graph(graph)?;
            Ok(Finding::pass(to_value(&GraphJson::from_polymorphism(&power(&g, *n)?))))
        }
        GraphCmd::Iso { first, second } => {
            let p = inputs.read::<GraphJson>(first)?.to_polymorphism()?;
            let q = inputs.read::<GraphJson>(second)?.to_polymorphism()?;
            let mut failures = Vec::new();
            if !iso_check(&p, &q)? {
                let (a, b) = (p.adjacency(), q.adjacency());
                let (i, j) = a.first_difference(&b).expect("matrices differ");
                failures.push(format!(
                    "entry ({}, {}) is {} in the first and {} in the second",
                    a.rows()[i],
                    a.cols()[j],
                    a.get(i, j),
                    b.get(i, j)
                ));
            }
            Ok(Finding::check(failures, None))
        }
        GraphCmd::Random {
            vertices,
            max_multiplicity,
        } => {
            let g = random_graph(*vertices, *max_multiplicity, seed)?;
            Ok(Finding::pass(to_value(&GraphJson::from_graph(&g))))
        }
    }
}

/// Random sink-free graph: entries uniform in `0..=max_multiplicity`, zero
/// rows redrawn.
pub fn random_graph(vertices: usize, max_multiplicity: u64, seed: u64) -> Result<Graph> {
    if vertices == 0 {
        return Err(Error::EmptyGraph);
    }
    if max_multiplicity == 0 {
        return Err(Error::InvalidArgument("max multiplicity must be positive".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let rows: Vec<Vec<u64>> = (0..vertices)
        .map(|_| loop {
            let row: Vec<u64> = (0..vertices).map(|_| rng.random_range(0..=max_multiplicity)).collect();
            if row.iter().any(|&x| x > 0) {
                break row;
            }
        })
        .collect();
    let names: Vec<String> = (0..vertices).map(|i| format!("v{i}")).collect();
    let a = NonNegMatrix::from_u64(names.clone(), names, &rows)?;
    Graph::from_polymorphism(polymorphism_from_matrix(&a)?)
}

fn run_se(cmd: &SeCmd, inputs: &mut Inputs) -> Result<Finding> {
    match cmd {
        SeCmd::Verify { mats, witness } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            let w = inputs.read::<WitnessJson>(witness)?.to_witness()?;
            Ok(Finding::check(se_failure(&a, &b, &w)?.into_iter().collect(), None))
        }
        SeCmd::Search {
            mats,
            max_lag,
            max_entry,
        } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            Ok(match search_se(&a, &b, *max_lag, *max_entry)? {
                Some(w) => Finding::pass(to_value(&WitnessJson::from_witness(&w))),
                None => Finding::unknown(json!({"max_lag": max_lag, "max_entry": max_entry})),
            })
        }
    }
}

fn run_sse(cmd: &SseCmd, inputs: &mut Inputs) -> Result<Finding> {
    match cmd {
        SseCmd::Verify { mats, witness } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            let w = inputs.read::<WitnessJson>(witness)?.to_witness()?;
            Ok(Finding::check(
                elementary_sse_failure(&a, &b, &w.r, &w.s)?.into_iter().collect(),
                None,
            ))
        }
        SseCmd::Search {
            mats,
            max_inner_dim,
            max_entry,
        } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            Ok(match search_elementary_sse(&a, &b, *max_inner_dim, *max_entry)? {
                Some((r, s)) => Finding::pass(to_value(&WitnessJson::from_witness(&SeWitness { r, s, lag: 1 }))),
                None => Finding::unknown(json!({"max_inner_dim": max_inner_dim, "max_entry": max_entry})),
            })
        }
        SseCmd::Chain {
            mats,
            depth,
            max_inner_dim,
            max_entry,
        } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            Ok(match search_sse_chain(&a, &b, *depth, *max_inner_dim, *max_entry)? {
                Some(chain) => Finding::pass(to_value(&chain_to_json(&chain))),
                None => Finding::unknown(json!({
                    "depth": depth,
                    "max_inner_dim": max_inner_dim,
                    "max_entry": max_entry,
                })),
            })
        }
        SseCmd::VerifyChain { mats, chain } => {
            let a = inputs.matrix(&mats.a)?;
            let b = inputs.matrix(&mats.b)?;
            let chain = chain_from_json(&inputs.read::<Vec<StepJson>>(chain)?)?;
            Ok(Finding::check(chain_failures(&a, &b, &chain.steps)?, None))
        }
    }
}

fn chain_failures(a: &NonNegMatrix, b: &NonNegMatrix, steps: &[crate::shift_equiv::SseStep]) -> Result<Vec<String>> {
    let mut current = a.clone();
    for (i, st) in steps.iter().enumerate() {
        if current.nrows() != st.a.nrows() || !current.same_entries(&st.a) {
            return Ok(vec![format!(
                "step {i} starts at {} but the chain is at {}",
                st.a, current
            )]);
        }
        let next = st.s.mul(&st.r)?;
        if let Some(why) = elementary_sse_failure(&st.a, &next, &st.r, &st.s)? {
            return Ok(vec![format!("step {i}: {why}")]);
        }
        current = next;
    }
    if current.nrows() != b.nrows() || !current.same_entries(b) {
        return Ok(vec![format!("chain ends at {current}, not at B = {b}")]);
    }
    Ok(Vec::new())
}

fn run_lpa(cmd: &LpaCmd, inputs: &mut Inputs) -> Result<Finding> {
    let field = inputs.field;
    match cmd {
        LpaCmd::Normalize { graph, element } => {
            let alg = Leavitt::new(inputs.graph(graph)?, field);
            let x = element_from_json(&alg, &inputs.read::<Vec<TermJson>>(element)?)?;
            Ok(Finding::pass(to_value(&element_to_json(&x))))
        }
        LpaCmd::Mul { graph, left, right } => {
            let alg = Leavitt::new(inputs.graph(graph)?, field);
            let x = element_from_json(&alg, &inputs.read::<Vec<TermJson>>(left)?)?;
            let y = element_from_json(&alg, &inputs.read::<Vec<TermJson>>(right)?)?;
            Ok(Finding::pass(to_value(&element_to_json(&x.mul(&y)?))))
        }
        LpaCmd::Degree { graph, element } => {
            let alg = Leavitt::new(inputs.graph(graph)?, field);
            let x = element_from_json(&alg, &inputs.read::<Vec<TermJson>>(element)?)?;
            let components: BTreeMap<String, Value> = x
                .homogeneous_components()
                .iter()
                .map(|(d, c)| (d.to_string(), to_value(&element_to_json(c))))
                .collect();
            Ok(Finding::pass(json!({"degree": x.degree(), "components": components})))
        }
    }
}

fn pair_failures(p: &ConjugacyPair) -> Vec<String> {
    let mut out: Vec<String> = conjugacy_failure(p).into_iter().collect();
    if !dimension_condition(p) {
        out.push("dimension matrix does not intertwine the adjacency matrices".into());
    }
    out
}

fn run_conj(cmd: &ConjCmd, inputs: &mut Inputs) -> Result<Finding> {
    match cmd {
        ConjCmd::Verify { pair } => {
            let p = inputs.pair(pair)?;
            Ok(Finding::check(pair_failures(&p), None))
        }
        ConjCmd::Compose { first, second } => {
            let p1 = inputs.pair(first)?;
            let p2 = inputs.pair(second)?;
            let composite = hash_compose(&p1, &p2)?;
            Ok(Finding::check(
                pair_failures(&composite),
                Some(to_value(&PairJson::from_pair(&composite))),
            ))
        }
        ConjCmd::Equiv { first, second, phi } => {
            let p1 = inputs.pair(first)?;
            let p2 = inputs.pair(second)?;
            let phi =
                inputs
                    .read::<BlockMapJson>(phi)?
                    .to_map(p1.bimodule().clone(), p2.bimodule().clone(), inputs.field)?;
            Ok(Finding::check(
                pair_equivalence_failure(&p1, &p2, &phi)?.into_iter().collect(),
                None,
            ))
        }
    }
}

fn run_bridge(cmd: &BridgeCmd, inputs: &mut Inputs) -> Result<Finding> {
    match cmd {
        BridgeCmd::Build {
            source,
            length_bound,
            list,
        } => {
            let bridge = inputs.bridge(source)?;
            let basis = bridge.basis(*length_bound);
            let mut by_degree: BTreeMap<i64, usize> = BTreeMap::new();
            for y in &basis {
                *by_degree
                    .entry(y.degree().expect("basis elements are homogeneous"))
                    .or_default() += 1;
            }
            let by_degree: BTreeMap<String, usize> = by_degree.into_iter().map(|(d, n)| (d.to_string(), n)).collect();
            let mut result = json!({
                "module_dimension": bridge.pair().bimodule().len(),
                "length_bound": length_bound,
                "basis_size": basis.len(),
                "basis_size_by_degree": by_degree,
            });
            if *list {
                let elems: Vec<Vec<BridgeTermJson>> = basis.iter().map(bridge_element_to_json).collect();
                result["basis"] = to_value(&elems);
            }
            Ok(Finding::pass(result))
        }
        BridgeCmd::Act {
            source,
            generator,
            element,
        } => {
            let bridge = inputs.bridge(source)?;
            let g = Generator::parse(bridge.source(), generator)?;
            let y = bridge_element_from_json(&bridge, &inputs.read::<Vec<BridgeTermJson>>(element)?)?;
            let z = y.left_act(g);
            Ok(Finding::pass(json!({
                "element": to_value(&bridge_element_to_json(&z)),
                "degree": z.degree(),
            })))
        }
        BridgeCmd::VerifyCk {
            source,
            length_bound,
            degree_bound,
        } => {
            let bridge = inputs.bridge(source)?;
            let report = verify_ck_on_bridge(&bridge, *length_bound, *degree_bound);
            let failures = report.violations.iter().map(ToString::to_string).collect();
            Ok(Finding::check(
                failures,
                Some(json!({
                    "length_bound": length_bound,
                    "degree_bound": degree_bound,
                    "basis_size": report.basis_size,
                    "checks": report.checks,
                    "failures": report.failures,
                })),
            ))
        }
    }
}

fn run_com(cmd: &ComCmd, inputs: &mut Inputs) -> Result<Finding> {
    let field = inputs.field;
    match cmd {
        ComCmd::Verify { witness } => {
            let w = inputs.read::<ComJson>(witness)?.to_witness(field)?;
            Ok(Finding::check(com_failure(&w)?.into_iter().collect(), None))
        }
        ComCmd::FromSse { graphs, witness } => {
            let e = inputs.graph(&graphs.e)?;
            let f = inputs.graph(&graphs.f)?;
            let sse = inputs.read::<WitnessJson>(witness)?.to_witness()?;
            let w = com_from_elementary_sse(&e, &f, &sse.r, &sse.s, field)?;
            let mut failures: Vec<String> = com_failure(&w)?.into_iter().collect();
            failures.extend(factorization_failure(&w)?);
            Ok(Finding::check(failures, Some(to_value(&ComJson::from_witness(&w)))))
        }
        ComCmd::Chain { first, second } => {
            let w1 = inputs.read::<ComJson>(first)?.to_witness(field)?;
            let w2 = inputs.read::<ComJson>(second)?.to_witness(field)?;
            let w = chain_com(&w1, &w2)?;
            Ok(Finding::check(
                com_failure(&w)?.into_iter().collect(),
                Some(to_value(&ComJson::from_witness(&w))),
            ))
        }
        ComCmd::Search { graphs, witness, limit } => {
            let e = inputs.graph(&graphs.e)?;
            let f = inputs.graph(&graphs.f)?;
            let se = inputs.read::<WitnessJson>(witness)?.to_witness()?;
            Ok(match search_com_candidates(&e, &f, &se, field, *limit)? {
                CandidateSearch::Found(w) => Finding::pass(to_value(&ComJson::from_witness(&w))),
                CandidateSearch::Exhausted { tried } => Finding::unknown(json!({"tried": tried, "exhausted": true})),
                CandidateSearch::LimitReached { tried } => {
                    Finding::unknown(json!({"tried": tried, "exhausted": false}))
                }
            })
        }
    }
}

fn input_error(command: Vec<String>, digest: String, err: &Error) -> RunReport {
    RunReport {
        command,
        inputs_digest: digest,
        verdict: Verdict::InputError,
        counterexamples: Vec::new(),
        result: None,
        error: Some(err.to_string()),
        timing_ms: None,
    }
}

/// Parses `argv` (program name first), runs the subcommand and renders the
/// report. Never exits the process.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                    report: None,
                },
                _ => Outcome {
                    code: Verdict::InputError.exit_code(),
                    stdout: String::new(),
                    stderr: text,
                    report: None,
                },
            };
        }
    };
    let command: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let field_spec = std::env::var(FIELD_ENV).unwrap_or_else(|_| cli.global.field.clone());
    let started = Instant::now();
    let report = match field_spec.parse::<Field>() {
        Err(err) => input_error(
            command,
            Inputs {
                field: Field::Rational,
                hasher: Sha256::new(),
            }
            .digest(),
            &err,
        ),
        Ok(field) => {
            let mut inputs = Inputs {
                field,
                hasher: Sha256::new(),
            };
            let finding = match cli.global.threads {
                None => dispatch(&cli.command, &mut inputs, cli.global.seed),
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                    Ok(pool) => pool.install(|| dispatch(&cli.command, &mut inputs, cli.global.seed)),
                    Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
                },
            };
            match finding {
                Ok(f) => RunReport {
                    command,
                    inputs_digest: inputs.digest(),
                    verdict: f.verdict,
                    counterexamples: f.counterexamples,
                    result: f.result,
                    error: None,
                    timing_ms: None,
                },
                Err(err) => input_error(command, inputs.digest(), &err),
            }
        }
    };
    let mut report = report;
    if cli.global.timing {
        report.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let stdout = match cli.global.output {
        OutputFormat::Json => report.render_json(),
        OutputFormat::Text => report.render_text(),
    };
    let stderr = match (&report.error, cli.global.output) {
        (Some(e), OutputFormat::Json) => format!("error: {e}\n"),
        _ => String::new(),
    };
    Outcome {
        code: report.verdict.exit_code(),
        stdout,
        stderr,
        report: Some(report),
    }
}
