//! Acceptance criteria 1 to 9, one line each. Runs as a plain binary so the
//! lines are always printed. `--full-ck` runs criterion 2 on the whole graph
//! family at length bound 3 instead of the default scope.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lpa_bridge::bimodule::{hash_compose, mse_from_se, verify_conjugacy, BlockMap, ConjugacyPair};
use lpa_bridge::bridge::{
    eta, nu_pair, pair_tensor_basis, psi_identity, rho, tau, verify_ck_on_bridge, Bridge, Generator,
};
use lpa_bridge::com::{com_from_elementary_sse, factorization_failure, verify_com};
use lpa_bridge::families::sink_free_family;
use lpa_bridge::fixtures::{column_factor, example_pairs, full_two_vertex, row_factor, two_loops};
use lpa_bridge::graph::{polymorphism_from_matrix, Graph, NonNegMatrix};
use lpa_bridge::linalg::sparse_rank;
use lpa_bridge::lpa::Leavitt;
use lpa_bridge::scalar::Field;
use lpa_bridge::shift_equiv::{factorizations, search_elementary_sse, search_se, verify_se, SeWitness};
use rayon::prelude::*;

const Q: Field = Field::Rational;

/// Wall-clock budgets. All comparisons are exact, so there is no numeric
/// tolerance.
const GOLDEN_BUDGET: Duration = Duration::from_secs(1);
const CK_BUDGET: Duration = Duration::from_secs(60);

/// Criterion 2 default scope: graphs with at most this many vertices use
/// the full length bound, larger ones use `CK_REDUCED_BOUND`.
const CK_BOUND: usize = 3;
const CK_FULL_BOUND_MAX_VERTICES: usize = 2;
const CK_REDUCED_BOUND: usize = 2;

/// Length bounds for the family-wide Ψ and grading suites.
const PSI_BOUND: usize = 2;
const GRADING_BOUND: usize = 2;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn family() -> &'static [Graph] {
    static FAMILY: std::sync::OnceLock<Vec<Graph>> = std::sync::OnceLock::new();
    FAMILY.get_or_init(|| sink_free_family(3, 2))
}

fn small_family() -> Vec<Graph> {
    family().iter().filter(|g| g.vertices().len() <= 2).cloned().collect()
}

fn image_label(map: &BlockMap, label: &str) -> std::result::Result<String, String> {
    let j = (0..map.domain().len())
        .find(|&j| map.domain().label(j).to_string() == label)
        .ok_or_else(|| format!("no basis element {label}"))?;
    match map.column(j) {
        [(i, c)] if c.is_one() => Ok(map.codomain().label(*i).to_string()),
        col => Err(format!("{label} maps to a combination of {} basis elements", col.len())),
    }
}

fn criterion_1() -> Check {
    let (e, f) = (two_loops(), full_two_vertex());
    let w = SeWitness {
        r: row_factor(),
        s: column_factor(),
        lag: 1,
    };
    let se = verify_se(&e.adjacency(), &f.adjacency(), &w).map_err(|x| x.to_string())?;
    ensure(se, || "verify_se rejects the worked witness".into())?;
    let d = mse_from_se(&e, &f, &w, Q).map_err(|x| x.to_string())?;
    let tables = [
        (&d.omega_e, "(v→x#0⊗x→v#0)", "e1"),
        (&d.omega_e, "(v→y#0⊗y→v#0)", "e2"),
        (&d.omega_f, "(x→v#0⊗v→x#0)", "f1"),
        (&d.omega_f, "(y→v#0⊗v→y#0)", "f2"),
        (&d.omega_f, "(x→v#0⊗v→y#0)", "g1"),
        (&d.omega_f, "(y→v#0⊗v→x#0)", "g2"),
    ];
    for (map, from, to) in tables {
        let got = image_label(map, from)?;
        ensure(got == to, || format!("{from} maps to {got}, expected {to}"))?;
    }
    ensure(d.omega_e.domain().len() == 2 && d.omega_f.domain().len() == 4, || {
        "unexpected table sizes".into()
    })?;
    let p_r =
        ConjugacyPair::new(e.clone(), f.clone(), Arc::clone(&d.m), d.sigma_m.clone()).map_err(|x| x.to_string())?;
    let p_s = ConjugacyPair::new(f, e, Arc::clone(&d.n), d.sigma_n.clone()).map_err(|x| x.to_string())?;
    ensure(verify_conjugacy(&p_r), || "(kG^1, σ_R) is not a conjugacy".into())?;
    ensure(verify_conjugacy(&p_s), || "(kH^1, σ_S) is not a conjugacy".into())?;
    Ok("SE witness, 6 identification table entries, both conjugacy pairs".into())
}

fn ck_on(pair: ConjugacyPair, bound: usize) -> std::result::Result<usize, String> {
    let bridge = Bridge::new(pair).map_err(|x| x.to_string())?;
    let report = verify_ck_on_bridge(&bridge, bound, None);
    match report.violations.first() {
        None => Ok(report.basis_size),
        Some(v) => Err(format!(
            "{} on graph {}",
            v,
            bridge.pair().source_graph().as_polymorphism()
        )),
    }
}

fn criterion_2(full: bool) -> Check {
    let graphs = family();
    let bound_for = |g: &Graph| {
        if full || g.vertices().len() <= CK_FULL_BOUND_MAX_VERTICES {
            CK_BOUND
        } else {
            CK_REDUCED_BOUND
        }
    };
    let sizes: Vec<usize> = graphs
        .par_iter()
        .map(|g| ck_on(lpa_bridge::bimodule::epsilon(g, Q), bound_for(g)))
        .collect::<std::result::Result<_, _>>()?;
    let (p, q) = example_pairs();
    let examples = ck_on(p, CK_BOUND)? + ck_on(q, CK_BOUND)?;
    let total: usize = sizes.iter().sum::<usize>() + examples;
    let small = graphs
        .iter()
        .filter(|g| g.vertices().len() <= CK_FULL_BOUND_MAX_VERTICES)
        .count();
    let scope = if full {
        format!("all {} graphs at length bound {CK_BOUND}", graphs.len())
    } else {
        format!(
            "reduced scope: {small} graphs with <= {CK_FULL_BOUND_MAX_VERTICES} vertices at length bound {CK_BOUND}, \
             {} graphs with 3 vertices at length bound {CK_REDUCED_BOUND}; --full-ck runs all at bound {CK_BOUND}",
            graphs.len() - small
        )
    };
    Ok(format!(
        "{scope}; worked pairs at bound {CK_BOUND}; {total} basis elements, 0 violations"
    ))
}

fn criterion_3() -> Check {
    let graphs = family();
    graphs.par_iter().try_for_each(|g| {
        let alg = Leavitt::new(g.clone(), Q);
        let sum = alg.normalize(alg.edge_expansion()).map_err(|x| x.to_string())?;
        ensure(sum == alg.unit().map_err(|x| x.to_string())?, || {
            format!("Σ ee* != 1 on {}", g.as_polymorphism())
        })?;
        for v in 0..g.vertices().len() as u32 {
            for m in 1..=3 {
                let raw = alg.vertex_expansion(v, m).map_err(|x| x.to_string())?;
                let x = alg.normalize(raw).map_err(|x| x.to_string())?;
                ensure(x == alg.vertex(v), || {
                    format!(
                        "vertex expansion of {} at depth {m} is {x} on {}",
                        g.vertices()[v as usize],
                        g.as_polymorphism()
                    )
                })?;
            }
        }
        Ok::<(), String>(())
    })?;
    Ok(format!("{} graphs, depths 1..=3", graphs.len()))
}

fn rho_suite(g: &Graph, m: u32, bound: usize) -> std::result::Result<usize, String> {
    let bridge = Bridge::new(nu_pair(g, m, Q).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
    let alg = Arc::clone(bridge.source());
    let basis = bridge.basis(bound);
    let mut images = Vec::with_capacity(basis.len());
    for z in &basis {
        let image = rho(z).map_err(|x| x.to_string())?;
        for a in Generator::all(&alg) {
            let lhs = rho(&z.left_act(a)).map_err(|x| x.to_string())?;
            let rhs = a.element(&alg).mul(&image).map_err(|x| x.to_string())?;
            ensure(lhs == rhs, || {
                format!("ρ(a·z) != aρ(z) for a = {}, z = {z}", a.name(&alg))
            })?;
        }
        images.push(image.terms().clone());
    }
    let rank = sparse_rank(&images);
    ensure(rank == basis.len(), || {
        format!(
            "images of {} basis elements have rank {rank} on {}",
            basis.len(),
            g.as_polymorphism()
        )
    })?;
    Ok(basis.len())
}

fn criterion_4() -> Check {
    let mut graphs = small_family();
    graphs.push(two_loops());
    graphs.push(full_two_vertex());
    let mut total = 0;
    for g in &graphs {
        for m in 1..=2 {
            total += rho_suite(g, m, 2)?;
        }
    }
    Ok(format!(
        "{} graphs, m in {{1, 2}}, length bound 2, {total} basis elements, full rank",
        graphs.len()
    ))
}

fn eta_suite(p1: &ConjugacyPair, p2: &ConjugacyPair, bound: usize) -> std::result::Result<usize, String> {
    let err = |x: lpa_bridge::Error| x.to_string();
    let (b1, b2) = (
        Bridge::new(p1.clone()).map_err(err)?,
        Bridge::new(p2.clone()).map_err(err)?,
    );
    let composite = Bridge::new(hash_compose(p1, p2).map_err(err)?).map_err(err)?;
    let mut checked = 0;
    for z in composite.basis(bound) {
        let w = eta(&z, &b1, &b2).map_err(err)?;
        ensure(tau(&w, &composite).map_err(err)? == z, || {
            format!("τη(z) != z for z = {z}")
        })?;
        for g in Generator::all(composite.source()) {
            let lhs = eta(&z.left_act(g), &b1, &b2).map_err(err)?;
            let rhs = w.left_act(g).map_err(err)?;
            ensure(lhs == rhs, || {
                format!("η(a·z) != a·η(z) for a = {}, z = {z}", g.name(composite.source()))
            })?;
        }
        checked += 1;
    }
    for w in pair_tensor_basis(&b1, &b2, bound).map_err(err)? {
        ensure(
            eta(&tau(&w, &composite).map_err(err)?, &b1, &b2).map_err(err)? == w,
            || "ητ(w) != w".into(),
        )?;
        checked += 1;
    }
    Ok(checked)
}

fn criterion_5() -> Check {
    let (p, q) = example_pairs();
    let total = eta_suite(&p, &q, 2)? + eta_suite(&q, &p, 2)?;
    Ok(format!(
        "both composites of the worked pairs, length bound 2, {total} elements"
    ))
}

fn com_check(e: &Graph, f: &Graph, r: &NonNegMatrix, s: &NonNegMatrix) -> std::result::Result<(), String> {
    let w = com_from_elementary_sse(e, f, r, s, Q).map_err(|x| x.to_string())?;
    ensure(verify_com(&w).map_err(|x| x.to_string())?, || {
        format!("(Com) fails for R = {r}, S = {s}")
    })?;
    if let Some(why) = factorization_failure(&w).map_err(|x| x.to_string())? {
        return Err(format!("factorization identity fails for R = {r}, S = {s}: {why}"));
    }
    Ok(())
}

fn graph_of(a: &NonNegMatrix) -> Option<Graph> {
    let names: Vec<String> = (0..a.nrows()).map(|i| format!("w{i}")).collect();
    let a = a.clone().with_labels(names.clone(), names).ok()?;
    let g = Graph::from_polymorphism(polymorphism_from_matrix(&a).ok()?).ok()?;
    g.is_sink_free().then_some(g)
}

fn criterion_6() -> Check {
    let graphs = small_family();
    let pairs: Vec<(usize, usize)> = (0..graphs.len())
        .flat_map(|i| (0..graphs.len()).map(move |j| (i, j)))
        .collect();
    let found: Vec<usize> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (e, f) = (&graphs[i], &graphs[j]);
            match search_elementary_sse(&e.adjacency(), &f.adjacency(), 3, 2).map_err(|x| x.to_string())? {
                Some((r, s)) => com_check(e, f, &r, &s).map(|_| 1),
                None => Ok(0),
            }
        })
        .collect::<std::result::Result<_, String>>()?;
    let searched: usize = found.iter().sum();
    let factored: Vec<usize> = graphs
        .par_iter()
        .map(|e| {
            let mut n = 0;
            for (r, s) in factorizations(&e.adjacency(), 3, 2).map_err(|x| x.to_string())? {
                let Some(f) = graph_of(&s.mul(&r).map_err(|x| x.to_string())?) else {
                    continue;
                };
                com_check(e, &f, &r, &s)?;
                n += 1;
            }
            Ok(n)
        })
        .collect::<std::result::Result<_, String>>()?;
    let factored: usize = factored.iter().sum();
    Ok(format!(
        "{searched} witnesses from search over {} ordered pairs, {factored} from all factorizations with sink-free SR",
        pairs.len()
    ))
}

fn psi_suite(g: &Graph, bound: usize) -> std::result::Result<usize, String> {
    let bridge = Bridge::new(lpa_bridge::bimodule::epsilon(g, Q)).map_err(|x| x.to_string())?;
    let alg = Arc::clone(bridge.source());
    let gens = Generator::all(&alg);
    let basis = bridge.basis(bound);
    let mut images = BTreeSet::new();
    for z in &basis {
        let image = psi_identity(z).map_err(|x| x.to_string())?;
        let terms: Vec<_> = image.terms().iter().collect();
        let [(mono, c)] = terms.as_slice() else {
            return Err(format!("Ψ({z}) = {image} is not a basis monomial"));
        };
        ensure(c.is_one(), || format!("Ψ({z}) = {image}"))?;
        ensure(z.degree() == Some(mono.degree()), || {
            format!("Ψ changes the degree of {z}")
        })?;
        ensure(images.insert((*mono).clone()), || format!("Ψ is not injective at {z}"))?;
        for a in &gens {
            let lhs = psi_identity(&z.left_act(*a)).map_err(|x| x.to_string())?;
            let rhs = a.element(&alg).mul(&image).map_err(|x| x.to_string())?;
            ensure(lhs == rhs, || {
                format!("Ψ(a·z) != aΨ(z) for a = {}, z = {z}", a.name(&alg))
            })?;
        }
    }
    let expected: BTreeSet<_> = alg.normal_monomials(bound).into_iter().collect();
    ensure(images == expected, || {
        format!("Ψ misses normal monomials on {}", g.as_polymorphism())
    })?;
    Ok(basis.len())
}

fn criterion_7() -> Check {
    let graphs = family();
    let sizes: Vec<usize> = graphs
        .par_iter()
        .map(|g| psi_suite(g, PSI_BOUND))
        .collect::<std::result::Result<_, _>>()?;
    Ok(format!(
        "{} graphs, length bound {PSI_BOUND}, {} basis elements",
        graphs.len(),
        sizes.iter().sum::<usize>()
    ))
}

fn grading_suite(bridge: &Arc<Bridge>, bound: usize) -> std::result::Result<usize, String> {
    let alg = bridge.source();
    let gens = Generator::all(alg);
    let basis = bridge.basis(bound);
    for y in &basis {
        let d = y
            .degree()
            .ok_or_else(|| format!("basis element {y} is not homogeneous"))?;
        for g in &gens {
            let z = y.left_act(*g);
            ensure(z.is_zero() || z.degree() == Some(d + g.degree()), || {
                format!(
                    "deg({}·{y}) is {:?}, expected {}",
                    g.name(alg),
                    z.degree(),
                    d + g.degree()
                )
            })?;
        }
    }
    Ok(basis.len())
}

fn criterion_8() -> Check {
    let mut bridges: Vec<Arc<Bridge>> = Vec::new();
    let (p, q) = example_pairs();
    let err = |x: lpa_bridge::Error| x.to_string();
    for pair in [
        p.clone(),
        q.clone(),
        hash_compose(&p, &q).map_err(err)?,
        hash_compose(&q, &p).map_err(err)?,
    ] {
        bridges.push(Bridge::new(pair).map_err(err)?);
    }
    for g in [two_loops(), full_two_vertex()] {
        for m in 1..=2 {
            bridges.push(Bridge::new(nu_pair(&g, m, Q).map_err(err)?).map_err(err)?);
        }
    }
    let mut total = 0;
    for b in &bridges {
        total += grading_suite(b, 3)?;
    }
    let family_sizes: Vec<usize> = family()
        .par_iter()
        .map(|g| {
            grading_suite(
                &Bridge::new(lpa_bridge::bimodule::epsilon(g, Q)).map_err(err)?,
                GRADING_BOUND,
            )
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(format!(
        "{} pair bridges at length bound 3 ({total} elements), {} identity bridges at length bound {GRADING_BOUND} ({} elements)",
        bridges.len(),
        family().len(),
        family_sizes.iter().sum::<usize>()
    ))
}

fn criterion_9() -> Check {
    let graphs = small_family();
    let mut cases: Vec<(NonNegMatrix, NonNegMatrix)> = Vec::new();
    for e in &graphs {
        for f in &graphs {
            cases.push((e.adjacency(), f.adjacency()));
        }
    }
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            cases
                .iter()
                .map(|(a, b)| {
                    let se = search_se(a, b, 2, 2).map_err(|x| x.to_string())?;
                    let sse = search_elementary_sse(a, b, 3, 2).map_err(|x| x.to_string())?;
                    Ok((se, sse))
                })
                .collect::<std::result::Result<Vec<_>, String>>()
        })
    };
    let one = run(1)?;
    let eight = run(8)?;
    if let Some(i) = (0..cases.len()).find(|&i| one[i] != eight[i]) {
        return Err(format!("searches differ for A = {}, B = {}", cases[i].0, cases[i].1));
    }
    let found = one.iter().filter(|(se, _)| se.is_some()).count();
    Ok(format!(
        "{} ordered pairs, {found} SE witnesses, identical with 1 and 8 threads",
        cases.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: Box<dyn Fn() -> Check>,
}

fn main() {
    let full_ck = std::env::args().any(|a| a == "--full-ck");
    let criteria = vec![
        Criterion {
            id: 1,
            name: "worked example golden suite",
            budget: Some(GOLDEN_BUDGET),
            run: Box::new(criterion_1),
        },
        Criterion {
            id: 2,
            name: "Cuntz–Krieger suite",
            budget: Some(CK_BUDGET),
            run: Box::new(move || criterion_2(full_ck)),
        },
        Criterion {
            id: 3,
            name: "vertex and edge expansions",
            budget: None,
            run: Box::new(criterion_3),
        },
        Criterion {
            id: 4,
            name: "ρ intertwining and independence",
            budget: None,
            run: Box::new(criterion_4),
        },
        Criterion {
            id: 5,
            name: "η and τ",
            budget: None,
            run: Box::new(criterion_5),
        },
        Criterion {
            id: 6,
            name: "(Com) from elementary SSE",
            budget: None,
            run: Box::new(criterion_6),
        },
        Criterion {
            id: 7,
            name: "Ψ on identity bridges",
            budget: None,
            run: Box::new(criterion_7),
        },
        Criterion {
            id: 8,
            name: "grading of bridge actions",
            budget: None,
            run: Box::new(criterion_8),
        },
        Criterion {
            id: 9,
            name: "search determinism",
            budget: None,
            run: Box::new(criterion_9),
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(detail), Some(budget)) if elapsed > budget => {
                Err(format!("{detail}; took {elapsed:.2?}, over the {budget:?} budget"))
            }
            (other, _) => other,
        };
        let budget = c.budget.map(|b| format!(", budget {b:?}")).unwrap_or_default();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {} ({detail}) [{elapsed:.2?}{budget}]", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {} ({detail}) [{elapsed:.2?}{budget}]", c.id, c.name);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
