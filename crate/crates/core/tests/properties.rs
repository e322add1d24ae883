//! Randomized invariants, run with a fixed seed so failures reproduce.

use std::sync::{Arc, OnceLock};

use lpa_bridge::bimodule::{
    dimension_condition, edge_bimodule, hash_compose, rebracket, tensor, verify_conjugacy, verify_pair_equivalence,
    BlockMap, ConjugacyPair, PolyBimodule,
};
use lpa_bridge::bridge::{Bridge, BridgeElement, Generator};
use lpa_bridge::com::{com_from_elementary_sse, factorization_failure, verify_com, ComWitness};
use lpa_bridge::families::sink_free_family;
use lpa_bridge::fixtures::example_pairs;
use lpa_bridge::graph::{
    default_labels, iso_check, polymorphism_from_matrix, product, Graph, NonNegMatrix, Polymorphism,
};
use lpa_bridge::lpa::{Leavitt, LpaElement, RawTerms};
use lpa_bridge::scalar::{Field, Scalar};
use lpa_bridge::shift_equiv::{
    factorizations, search_elementary_sse, search_se, verify_elementary_sse, verify_se, SeWitness,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::RngSeed;

const Q: Field = Field::Rational;
const SEED: u64 = 0x5eed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Sink-free graphs on at most two vertices, multiplicities at most 2.
fn family() -> &'static [Graph] {
    static FAMILY: OnceLock<Vec<Graph>> = OnceLock::new();
    FAMILY.get_or_init(|| sink_free_family(2, 2))
}

fn any_graph() -> impl Strategy<Value = Graph> {
    select(family().to_vec())
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn entries(rows: usize, cols: usize, max: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    vec(vec(0..=max, cols), rows)
}

fn poly(src: &str, tgt: &str, m: &[Vec<u64>]) -> Polymorphism {
    let cols = m.first().map_or(0, Vec::len);
    let a = NonNegMatrix::from_u64(labels(src, m.len()), labels(tgt, cols), m).unwrap();
    polymorphism_from_matrix(&a).unwrap()
}

/// Three composable matrices `a×b`, `b×c`, `c×d` with sides at most 4.
fn composable_triple() -> impl Strategy<Value = [Vec<Vec<u64>>; 3]> {
    (1..=4usize, 1..=4usize, 1..=4usize, 1..=4usize)
        .prop_flat_map(|(a, b, c, d)| (entries(a, b, 3), entries(b, c, 3), entries(c, d, 3)))
        .prop_map(|(x, y, z)| [x, y, z])
}

fn square(max_dim: usize, max_entry: u64) -> impl Strategy<Value = NonNegMatrix> {
    (1..=max_dim)
        .prop_flat_map(move |n| entries(n, n, max_entry))
        .prop_map(|m| NonNegMatrix::unlabeled(&m))
}

fn graph_of(a: &NonNegMatrix) -> Option<Graph> {
    let names = labels("w", a.nrows());
    let a = a.clone().with_labels(names.clone(), names).ok()?;
    let g = Graph::from_polymorphism(polymorphism_from_matrix(&a).ok()?).ok()?;
    g.is_sink_free().then_some(g)
}

/// Elementary strong shift equivalences `A_E = RS`, `SR = A_F` between
/// sink-free graphs, from all small factorizations over the family.
fn elementary_witnesses() -> &'static [(Graph, Graph, NonNegMatrix, NonNegMatrix)] {
    static WITNESSES: OnceLock<Vec<(Graph, Graph, NonNegMatrix, NonNegMatrix)>> = OnceLock::new();
    WITNESSES.get_or_init(|| {
        let mut out = Vec::new();
        for e in family() {
            for (r, s) in factorizations(&e.adjacency(), 2, 2).unwrap() {
                if let Some(f) = graph_of(&s.mul(&r).unwrap()) {
                    out.push((e.clone(), f, r, s));
                }
            }
        }
        out
    })
}

fn any_com_witness() -> impl Strategy<Value = ComWitness> {
    (0..elementary_witnesses().len()).prop_map(|i| {
        let (e, f, r, s) = &elementary_witnesses()[i];
        com_from_elementary_sse(e, f, r, s, Q).unwrap()
    })
}

/// A scalar in `{±1, …, ±5}`.
fn unit_scalar() -> impl Strategy<Value = i64> {
    (1..=5i64, any::<bool>()).prop_map(|(n, neg)| if neg { -n } else { n })
}

type Words = Vec<(i64, Vec<usize>)>;

/// Linear combinations of at most three products of at most three
/// generators, as indices into [`Generator::all`].
fn words() -> impl Strategy<Value = Words> {
    vec((-3..=3i64, vec(any::<usize>(), 1..=3)), 1..=3)
}

fn word_element(alg: &Arc<Leavitt>, words: &Words) -> LpaElement {
    let gens = Generator::all(alg);
    let mut x = alg.zero();
    for (c, word) in words {
        let mut t = alg.unit().unwrap();
        for &g in word {
            t = t.mul(&gens[g % gens.len()].element(alg)).unwrap();
        }
        x = x.add(&t.scale(&Q.from_i64(*c))).unwrap();
    }
    x
}

fn scaled(raw: RawTerms, c: &Scalar) -> RawTerms {
    raw.into_iter().map(|(m, d)| (m, &d * c)).collect()
}

/// `φ` scaled by a nonzero constant on every block.
fn block_scaling(m: &Arc<PolyBimodule>, scalars: &[i64]) -> BlockMap {
    let mut phi = BlockMap::identity(m, Q);
    for (k, &(src, tgt)) in m.block_indices().keys().enumerate() {
        phi = phi.scale_block(src, tgt, &Q.from_i64(scalars[k % scalars.len()]));
    }
    phi
}

/// The pair `(M, σ')` with `σ' = (φ ⊗ 1)σ(1 ⊗ φ)^{-1}`, equivalent to `p`
/// through `φ`.
fn transported(p: &ConjugacyPair, phi: &BlockMap) -> ConjugacyPair {
    let left = phi.tensor(&BlockMap::identity(p.target_edges(), Q)).unwrap();
    let right = BlockMap::identity(p.source_edges(), Q)
        .tensor(phi)
        .unwrap()
        .inverse()
        .unwrap();
    p.with_sigma(left.compose(p.sigma()).unwrap().compose(&right).unwrap())
        .unwrap()
}

/// `φ ⊗ 1` from `Y_(M,σ)` to `Y_(M,σ')`.
fn apply_transport(phi: &BlockMap, target: &Arc<Bridge>, y: &BridgeElement) -> BridgeElement {
    let raw = y
        .terms()
        .iter()
        .flat_map(|((m, s), c)| phi.column(*m).iter().map(move |(i, d)| (*i, s.clone(), c * d)))
        .collect();
    target.element(raw).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn adjacency_of_product_is_matrix_product([x, y, _] in composable_triple()) {
        let (p, q) = (poly("a", "b", &x), poly("b", "c", &y));
        let pq = product(&p, &q).unwrap();
        prop_assert!(pq.adjacency().same_entries(&p.adjacency().mul(&q.adjacency()).unwrap()));
    }

    #[test]
    fn matrix_and_adjacency_are_inverse([x, y, _] in composable_triple()) {
        let p = poly("a", "b", &x);
        prop_assert!(polymorphism_from_matrix(&p.adjacency()).unwrap().adjacency().same_entries(&p.adjacency()));
        let pq = product(&p, &poly("b", "c", &y)).unwrap();
        prop_assert!(iso_check(&polymorphism_from_matrix(&pq.adjacency()).unwrap(), &pq).unwrap());
    }

    #[test]
    fn product_is_associative_up_to_iso([x, y, z] in composable_triple()) {
        let (p, q, r) = (poly("a", "b", &x), poly("b", "c", &y), poly("c", "d", &z));
        let left = product(&product(&p, &q).unwrap(), &r).unwrap();
        let right = product(&p, &product(&q, &r).unwrap()).unwrap();
        prop_assert!(iso_check(&left, &right).unwrap());
    }

    #[test]
    fn identity_and_power_is_a_shift_equivalence(a in square(3, 2), lag in 1..=3u32) {
        let w = SeWitness { r: NonNegMatrix::identity(default_labels(a.nrows())), s: a.pow(lag).unwrap(), lag };
        prop_assert!(verify_se(&a, &a, &w).unwrap());
    }

    #[test]
    fn search_results_verify(a in square(2, 2), b in square(2, 2)) {
        if let Some(w) = search_se(&a, &b, 2, 2).unwrap() {
            prop_assert!(verify_se(&a, &b, &w).unwrap());
        }
        if let Some((r, s)) = search_elementary_sse(&a, &b, 2, 2).unwrap() {
            prop_assert!(verify_elementary_sse(&a, &b, &r, &s).unwrap());
            let w = SeWitness { r, s, lag: 1 };
            prop_assert!(verify_se(&a, &b, &w).unwrap());
        }
    }

    #[test]
    fn factorizations_are_found_by_search(a in square(2, 2), pick in any::<usize>()) {
        let fs = factorizations(&a, 2, 2).unwrap();
        prop_assume!(!fs.is_empty());
        let (r, s) = &fs[pick % fs.len()];
        let b = s.mul(r).unwrap();
        let (r, s) = search_elementary_sse(&a, &b, 2, 2).unwrap().expect("a factorization exists");
        prop_assert!(verify_elementary_sse(&a, &b, &r, &s).unwrap());
        let w = search_se(&a, &b, 1, 2).unwrap().expect("lag 1 witness exists");
        prop_assert!(verify_se(&a, &b, &w).unwrap());
    }

    #[test]
    fn search_is_independent_of_thread_count(a in square(2, 2), b in square(2, 2)) {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| (search_se(&a, &b, 2, 2).unwrap(), search_elementary_sse(&a, &b, 2, 2).unwrap()))
        };
        prop_assert_eq!(run(1), run(3));
    }

    #[test]
    fn normalize_is_idempotent_linear_and_order_free(
        g in any_graph(), v in any::<u32>(), m in 1..=3usize, y in words(), c in -3..=3i64,
    ) {
        let alg = Leavitt::new(g, Q);
        let v = v % alg.vertex_count() as u32;
        let mut raw = alg.vertex_expansion(v, m).unwrap();
        raw.extend(alg.edge_expansion());
        let x = alg.normalize(raw.clone()).unwrap();
        prop_assert_eq!(&alg.normalize(x.clone().into_raw()).unwrap(), &x);

        let y = word_element(&alg, &y);
        let c = Q.from_i64(c);
        let mut both = raw.clone();
        both.extend(scaled(y.clone().into_raw(), &c));
        let sum = alg.normalize(both.clone()).unwrap();
        prop_assert_eq!(&sum, &x.add(&y.scale(&c)).unwrap());
        both.reverse();
        prop_assert_eq!(&alg.normalize(both).unwrap(), &sum);
    }

    #[test]
    fn multiplication_is_a_unital_ring(g in any_graph(), x in words(), y in words(), z in words()) {
        let alg = Leavitt::new(g, Q);
        let (x, y, z) = (word_element(&alg, &x), word_element(&alg, &y), word_element(&alg, &z));
        let one = alg.unit().unwrap();
        prop_assert_eq!(&x.mul(&one).unwrap(), &x);
        prop_assert_eq!(&one.mul(&x).unwrap(), &x);
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().mul(&z).unwrap(), x.mul(&z).unwrap().add(&y.mul(&z).unwrap()).unwrap());
    }

    #[test]
    fn grading_is_multiplicative(g in any_graph(), x in words(), y in words()) {
        let alg = Leavitt::new(g, Q);
        let (x, y) = (word_element(&alg, &x), word_element(&alg, &y));
        for (dx, xs) in x.homogeneous_components() {
            for (dy, ys) in y.homogeneous_components() {
                let p = xs.mul(&ys).unwrap();
                prop_assert!(p.is_zero() || p.degree() == Some(dx + dy));
            }
        }
    }

    #[test]
    fn ghost_edge_relation(g in any_graph()) {
        let alg = Leavitt::new(g, Q);
        for e in 0..alg.edge_count() as u32 {
            for f in 0..alg.edge_count() as u32 {
                let lhs = alg.ghost(e).mul(&alg.edge(f)).unwrap();
                let rhs = if e == f { alg.vertex(alg.rng(e)) } else { alg.zero() };
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn vertex_expansions_collapse(g in any_graph()) {
        let alg = Leavitt::new(g, Q);
        prop_assert_eq!(alg.normalize(alg.edge_expansion()).unwrap(), alg.unit().unwrap());
        for v in 0..alg.vertex_count() as u32 {
            for m in 1..=3 {
                prop_assert_eq!(alg.normalize(alg.vertex_expansion(v, m).unwrap()).unwrap(), alg.vertex(v));
            }
        }
    }

    #[test]
    fn tensor_dimensions_multiply([x, y, _] in composable_triple()) {
        let m = PolyBimodule::from_polymorphism(&poly("a", "b", &x));
        let n = PolyBimodule::from_polymorphism(&poly("b", "c", &y));
        prop_assert!(tensor(&m, &n).unwrap().dims().same_entries(&m.dims().mul(&n.dims()).unwrap()));
    }

    #[test]
    fn conjugacy_requires_the_dimension_condition(e in any_graph(), f in any_graph(), seed in entries(2, 2, 2)) {
        let d: Vec<Vec<u64>> =
            (0..e.vertices().len()).map(|i| seed[i][..f.vertices().len()].to_vec()).collect();
        let dims = NonNegMatrix::from_u64(e.vertices().to_vec(), f.vertices().to_vec(), &d).unwrap();
        let m = Arc::new(PolyBimodule::from_polymorphism(&polymorphism_from_matrix(&dims).unwrap()));
        let e1 = Arc::new(edge_bimodule(&e));
        let f1 = Arc::new(edge_bimodule(&f));
        let domain = Arc::new(tensor(&e1, &m).unwrap());
        let codomain = Arc::new(tensor(&m, &f1).unwrap());
        let holds = e.adjacency().mul(&dims).unwrap().same_entries(&dims.mul(&f.adjacency()).unwrap());
        match BlockMap::canonical_block_bijection(Arc::clone(&domain), Arc::clone(&codomain), Q) {
            Ok(sigma) => {
                prop_assert!(holds);
                let p = ConjugacyPair::new(e, f, m, sigma).unwrap();
                prop_assert!(verify_conjugacy(&p) && dimension_condition(&p));
            }
            Err(_) => {
                prop_assert!(!holds);
                let zero = BlockMap::zero(domain, codomain, Q).unwrap();
                if let Ok(p) = ConjugacyPair::new(e, f, m, zero) {
                    prop_assert!(!verify_conjugacy(&p) && !dimension_condition(&p));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn composition_is_associative_up_to_rebracketing(w in any_com_witness()) {
        let (p, q) = (w.pair_m().unwrap(), w.pair_n().unwrap());
        let left = hash_compose(&hash_compose(&p, &q).unwrap(), &p).unwrap();
        let right = hash_compose(&p, &hash_compose(&q, &p).unwrap()).unwrap();
        let phi = rebracket(p.bimodule(), q.bimodule(), p.bimodule(), Q).unwrap();
        prop_assert!(verify_pair_equivalence(&left, &right, &phi).unwrap());
    }

    #[test]
    fn composition_respects_equivalence(w in any_com_witness(), s in vec(unit_scalar(), 1..=4), t in vec(unit_scalar(), 1..=4)) {
        let (p, q) = (w.pair_m().unwrap(), w.pair_n().unwrap());
        let (phi, psi) = (block_scaling(p.bimodule(), &s), block_scaling(q.bimodule(), &t));
        let (p2, q2) = (transported(&p, &phi), transported(&q, &psi));
        prop_assert!(verify_pair_equivalence(&p, &p2, &phi).unwrap());
        prop_assert!(verify_pair_equivalence(&q, &q2, &psi).unwrap());
        let composite = hash_compose(&p, &q).unwrap();
        let composite2 = hash_compose(&p2, &q2).unwrap();
        prop_assert!(verify_pair_equivalence(&composite, &composite2, &phi.tensor(&psi).unwrap()).unwrap());
    }

    #[test]
    fn bridge_actions_are_graded_and_commute(
        w in any_com_witness(), y in any::<usize>(), g in any::<usize>(), s in any::<usize>(),
    ) {
        let bridge = Bridge::new(w.pair_m().unwrap()).unwrap();
        let basis = bridge.basis(1);
        let y = &basis[y % basis.len()];
        let gens = Generator::all(bridge.source());
        let g = gens[g % gens.len()];
        let monomials = bridge.target().normal_monomials(1);
        let s = bridge.target().monomial(monomials[s % monomials.len()].clone()).unwrap();

        let gy = y.left_act(g);
        prop_assert!(gy.is_zero() || gy.degree() == Some(y.degree().unwrap() + g.degree()));
        prop_assert_eq!(y.right_act(&s).unwrap().left_act(g), gy.right_act(&s).unwrap());
    }

    #[test]
    fn equivalent_pairs_have_isomorphic_bridges(
        w in any_com_witness(), scalars in vec(unit_scalar(), 1..=4), y in any::<usize>(),
    ) {
        let p = w.pair_m().unwrap();
        let phi = block_scaling(p.bimodule(), &scalars);
        let first = Bridge::new(p.clone()).unwrap();
        let second = Bridge::new(transported(&p, &phi)).unwrap();
        let basis = first.basis(1);
        let y = &basis[y % basis.len()];
        for g in Generator::all(first.source()) {
            prop_assert_eq!(
                apply_transport(&phi, &second, &y.left_act(g)),
                apply_transport(&phi, &second, y).left_act(g)
            );
        }
    }

    #[test]
    fn elementary_witnesses_satisfy_com(w in any_com_witness()) {
        prop_assert!(verify_com(&w).unwrap());
        prop_assert!(factorization_failure(&w).unwrap().is_none());
        prop_assert!(verify_conjugacy(&w.pair_m().unwrap()) && verify_conjugacy(&w.pair_n().unwrap()));
        prop_assert!(verify_se(&w.e.adjacency(), &w.f.adjacency(), &w.se_witness()).unwrap());
    }
}

#[test]
fn example_pairs_transport() {
    let (p, _) = example_pairs();
    let phi = block_scaling(p.bimodule(), &[2, -3]);
    let p2 = transported(&p, &phi);
    assert!(verify_pair_equivalence(&p, &p2, &phi).unwrap());
    assert!(!verify_pair_equivalence(&p, &p2, &BlockMap::identity(p.bimodule(), Q)).unwrap());
}
