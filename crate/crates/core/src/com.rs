//! Condition (Com): a shift equivalence at the bimodule level whose
//! isomorphisms make the two ν-squares commute
//!
//! ```text
//! ν_n^E ∘ (id ⊗ ω_E) = (ω_E ⊗ id) ∘ (σ_M # σ_N)
//! ν_n^F ∘ (id ⊗ ω_F) = (ω_F ⊗ id) ∘ (σ_N # σ_M)
//! ```

use std::sync::Arc;

use crate::bimodule::{
    edge_bimodule, hash_maps, mse_from_se, nu, rebracket, rebracket_inverse, tensor, tensor_power, Bimod, BlockMap,
    ConjugacyPair, PolyBimodule,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NonNegMatrix};
use crate::scalar::{Field, Scalar};
use crate::shift_equiv::{elementary_sse_failure, se_failure, SeWitness};

/// Bimodule data `(M, N, n, ω_E, ω_F, σ_M, σ_N)` between two graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComWitness {
    pub e: Graph,
    pub f: Graph,
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

impl ComWitness {
    pub fn field(&self) -> Field {
        self.omega_e.field()
    }

    pub fn pair_m(&self) -> Result<ConjugacyPair> {
        ConjugacyPair::new(
            self.e.clone(),
            self.f.clone(),
            Arc::clone(&self.m),
            self.sigma_m.clone(),
        )
    }

    pub fn pair_n(&self) -> Result<ConjugacyPair> {
        ConjugacyPair::new(
            self.f.clone(),
            self.e.clone(),
            Arc::clone(&self.n),
            self.sigma_n.clone(),
        )
    }

    /// `(dim M, dim N, n)`.
    pub fn se_witness(&self) -> SeWitness {
        SeWitness {
            r: self.m.dims(),
            s: self.n.dims(),
            lag: self.lag,
        }
    }

    fn check_shapes(&self) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::InvalidWitness("lag must be positive".into()));
        }
        let field = self.field();
        for map in [&self.omega_f, &self.sigma_m, &self.sigma_n] {
            if map.field() != field {
                return Err(Error::FieldMismatch("witness maps are over different fields".into()));
            }
        }
        let e1 = edge_bimodule(&self.e);
        let f1 = edge_bimodule(&self.f);
        let expect = |map: &BlockMap, dom: PolyBimodule, cod: PolyBimodule, what: &str| {
            if **map.domain() == dom && **map.codomain() == cod {
                Ok(())
            } else {
                Err(Error::ShapeMismatch(format!("{what} has the wrong domain or codomain")))
            }
        };
        expect(
            &self.omega_e,
            tensor(&self.m, &self.n)?,
            tensor_power(&e1, self.lag)?,
            "omega_E",
        )?;
        expect(
            &self.omega_f,
            tensor(&self.n, &self.m)?,
            tensor_power(&f1, self.lag)?,
            "omega_F",
        )?;
        expect(&self.sigma_m, tensor(&e1, &self.m)?, tensor(&self.m, &f1)?, "sigma_M")?;
        expect(&self.sigma_n, tensor(&f1, &self.n)?, tensor(&self.n, &e1)?, "sigma_N")?;
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn one_square(
    g: &Graph,
    x: &Bimod,
    y: &Bimod,
    lag: u32,
    omega: &BlockMap,
    sigma_x: &BlockMap,
    sigma_y: &BlockMap,
    h1: &Bimod,
    what: &str,
) -> Result<Option<String>> {
    let field = omega.field();
    let g1 = Arc::new(edge_bimodule(g));
    let hash = hash_maps(&g1, x, h1, y, &g1, sigma_x, sigma_y)?;
    let lhs = nu(g, lag, field)?.compose(&BlockMap::identity(&g1, field).tensor(omega)?)?;
    let rhs = omega.tensor(&BlockMap::identity(&g1, field))?.compose(&hash)?;
    Ok(lhs
        .first_difference(&rhs)
        .map(|d| format!("{what} square does not commute {}", lhs.describe_difference(&d))))
}

/// Why the witness fails condition (Com), if it does. Errors on sinks and
/// shape problems; non-invertible maps are reported as failures.
pub fn com_failure(w: &ComWitness) -> Result<Option<String>> {
    w.e.require_sink_free()?;
    w.f.require_sink_free()?;
    w.check_shapes()?;
    for (map, name) in [
        (&w.omega_e, "omega_E"),
        (&w.omega_f, "omega_F"),
        (&w.sigma_m, "sigma_M"),
        (&w.sigma_n, "sigma_N"),
    ] {
        if let Some((block, rank, d, c)) = map.singular_blocks().first() {
            return Ok(Some(format!(
                "{name} is not invertible on block {block}: rank {rank}, domain dim {d}, codomain dim {c}"
            )));
        }
    }
    let e1 = Arc::new(edge_bimodule(&w.e));
    let f1 = Arc::new(edge_bimodule(&w.f));
    if let Some(why) = one_square(&w.e, &w.m, &w.n, w.lag, &w.omega_e, &w.sigma_m, &w.sigma_n, &f1, "E")? {
        return Ok(Some(why));
    }
    one_square(&w.f, &w.n, &w.m, w.lag, &w.omega_f, &w.sigma_n, &w.sigma_m, &e1, "F")
}

pub fn verify_com(w: &ComWitness) -> Result<bool> {
    Ok(com_failure(w)?.is_none())
}

/// `σ_M = (id_M⊗ω_F) ∘ α_{M,N,M} ∘ (ω_E^{-1}⊗id_M)` and symmetrically
/// `σ_N`, for lag-1 isomorphisms `ω_E: M⊗N → kE^1`, `ω_F: N⊗M → kF^1`.
pub fn induced_sigmas(m: &Bimod, n: &Bimod, omega_e: &BlockMap, omega_f: &BlockMap) -> Result<(BlockMap, BlockMap)> {
    let field = omega_e.field();
    let build = |x: &Bimod, y: &Bimod, first: &BlockMap, second: &BlockMap| -> Result<BlockMap> {
        let undo = first.inverse()?.tensor(&BlockMap::identity(x, field))?;
        let shift = rebracket(x, y, x, field)?;
        let redo = BlockMap::identity(x, field).tensor(second)?;
        redo.compose(&shift)?.compose(&undo)
    };
    Ok((build(m, n, omega_e, omega_f)?, build(n, m, omega_f, omega_e)?))
}

/// The lag-1 witness of an elementary strong shift equivalence
/// `A_E = RS`, `A_F = SR`, with `ω` the canonical product-basis bijections
/// and `σ` induced from them.
pub fn com_from_elementary_sse(
    e: &Graph,
    f: &Graph,
    r: &NonNegMatrix,
    s: &NonNegMatrix,
    field: Field,
) -> Result<ComWitness> {
    e.require_sink_free()?;
    f.require_sink_free()?;
    if let Some(why) = elementary_sse_failure(&e.adjacency(), &f.adjacency(), r, s)? {
        return Err(Error::InvalidWitness(why));
    }
    let w = SeWitness {
        r: r.clone(),
        s: s.clone(),
        lag: 1,
    };
    let d = mse_from_se(e, f, &w, field)?;
    let (sigma_m, sigma_n) = induced_sigmas(&d.m, &d.n, &d.omega_e, &d.omega_f)?;
    Ok(ComWitness {
        e: e.clone(),
        f: f.clone(),
        m: d.m,
        n: d.n,
        lag: 1,
        omega_e: d.omega_e,
        omega_f: d.omega_f,
        sigma_m,
        sigma_n,
    })
}

fn tensor_vec(space: &PolyBimodule, u: &[(usize, Scalar)], v: &[(usize, Scalar)]) -> Vec<(usize, Scalar)> {
    let mut out = Vec::new();
    for (i, a) in u {
        for (j, b) in v {
            if let Some(k) = space.pair_index(*i, *j) {
                out.push((k, a * b));
            }
        }
    }
    out.sort_by_key(|(k, _)| *k);
    out
}

/// For a lag-1 witness, checks `(σ_M#σ_N)(x⊗(m⊗n)) = ω_E^{-1}(x) ⊗ ω_E(m⊗n)`
/// on every basis vector and names the first one where it fails.
pub fn factorization_failure(w: &ComWitness) -> Result<Option<String>> {
    if w.lag != 1 {
        return Err(Error::InvalidArgument("the factorization identity needs lag 1".into()));
    }
    w.check_shapes()?;
    let e1 = Arc::new(edge_bimodule(&w.e));
    let f1 = Arc::new(edge_bimodule(&w.f));
    let hash = hash_maps(&e1, &w.m, &f1, &w.n, &e1, &w.sigma_m, &w.sigma_n)?;
    let inverse = w.omega_e.inverse()?;
    let domain = hash.domain();
    let codomain = hash.codomain();
    for k in 0..domain.len() {
        let (x, mn) = domain.pair(k).expect("tensor basis");
        let left = inverse.column(x);
        let right = w.omega_e.column(mn);
        let expected = tensor_vec(codomain, left, right);
        if hash.column(k) != expected.as_slice() {
            return Ok(Some(format!("factorization fails on {}", domain.label(k))));
        }
    }
    Ok(None)
}

/// `T^k ⊗ N → N ⊗ U^k` obtained by pushing each factor through
/// `σ: T ⊗ N → N ⊗ U`.
fn push_through(t1: &Bimod, n: &Bimod, u1: &Bimod, sigma: &BlockMap, k: u32) -> Result<BlockMap> {
    let field = sigma.field();
    if k == 1 {
        return Ok(sigma.clone());
    }
    let tk1 = Arc::new(tensor_power(t1, k - 1)?);
    let uk1 = Arc::new(tensor_power(u1, k - 1)?);
    let a = rebracket(&tk1, t1, n, field)?;
    let b = BlockMap::identity(&tk1, field).tensor(sigma)?;
    let c = rebracket_inverse(&tk1, n, u1, field)?;
    let d = push_through(t1, n, u1, sigma, k - 1)?.tensor(&BlockMap::identity(u1, field))?;
    let e = rebracket(n, &uk1, u1, field)?;
    e.compose(&d)?.compose(&c)?.compose(&b)?.compose(&a)
}

/// `(X1⊗X2)⊗(Y2⊗Y1) → T^{a+b}` from `ω_1: X1⊗Y1 → T^a`,
/// `ω_2: X2⊗Y2 → U^b` and `σ: U⊗Y1 → Y1⊗T`.
#[allow(clippy::too_many_arguments)]
fn composite_omega(
    x1: &Bimod,
    x2: &Bimod,
    y2: &Bimod,
    y1: &Bimod,
    omega1: &BlockMap,
    omega2: &BlockMap,
    sigma_y1: &BlockMap,
    t1: &Bimod,
    u1: &Bimod,
    a: u32,
    b: u32,
) -> Result<BlockMap> {
    let field = omega1.field();
    let y = Arc::new(tensor(y2, y1)?);
    let s1 = rebracket(x1, x2, &y, field)?;
    let s2 = BlockMap::identity(x1, field).tensor(&rebracket_inverse(x2, y2, y1, field)?)?;
    let s3 = BlockMap::identity(x1, field).tensor(&omega2.tensor(&BlockMap::identity(y1, field))?)?;
    let s4 = BlockMap::identity(x1, field).tensor(&push_through(u1, y1, t1, sigma_y1, b)?)?;
    let tb = Arc::new(tensor_power(t1, b)?);
    let s5 = rebracket_inverse(x1, y1, &tb, field)?;
    let s6 = omega1.tensor(&BlockMap::identity(&tb, field))?;
    let total = Arc::new(tensor_power(t1, a + b)?);
    let s7 = BlockMap::regroup(Arc::clone(s6.codomain()), total, field)?;
    s7.compose(&s6)?
        .compose(&s5)?
        .compose(&s4)?
        .compose(&s3)?
        .compose(&s2)?
        .compose(&s1)
}

/// Composes witnesses `E → F` and `F → G` into one `E → G` with
/// `M = M_1⊗M_2`, `N = N_2⊗N_1` and lag `n_1 + n_2`.
pub fn chain_com(w1: &ComWitness, w2: &ComWitness) -> Result<ComWitness> {
    if w1.f != w2.e {
        return Err(Error::GraphMismatch("middle graphs differ".into()));
    }
    if w1.field() != w2.field() {
        return Err(Error::FieldMismatch("witnesses are over different fields".into()));
    }
    w1.check_shapes()?;
    w2.check_shapes()?;
    let e1 = Arc::new(edge_bimodule(&w1.e));
    let f1 = Arc::new(edge_bimodule(&w1.f));
    let g1 = Arc::new(edge_bimodule(&w2.f));
    let m = Arc::new(tensor(&w1.m, &w2.m)?);
    let n = Arc::new(tensor(&w2.n, &w1.n)?);
    let omega_e = composite_omega(
        &w1.m,
        &w2.m,
        &w2.n,
        &w1.n,
        &w1.omega_e,
        &w2.omega_e,
        &w1.sigma_n,
        &e1,
        &f1,
        w1.lag,
        w2.lag,
    )?;
    let omega_g = composite_omega(
        &w2.n,
        &w1.n,
        &w1.m,
        &w2.m,
        &w2.omega_f,
        &w1.omega_f,
        &w2.sigma_m,
        &g1,
        &f1,
        w2.lag,
        w1.lag,
    )?;
    let sigma_m = hash_maps(&e1, &w1.m, &f1, &w2.m, &g1, &w1.sigma_m, &w2.sigma_m)?;
    let sigma_n = hash_maps(&g1, &w2.n, &f1, &w1.n, &e1, &w2.sigma_n, &w1.sigma_n)?;
    Ok(ComWitness {
        e: w1.e.clone(),
        f: w2.f.clone(),
        m,
        n,
        lag: w1.lag + w2.lag,
        omega_e,
        omega_f: omega_g,
        sigma_m,
        sigma_n,
    })
}

/// Outcome of the exploratory candidate search.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSearch {
    Found(Box<ComWitness>),
    Exhausted { tried: u64 },
    LimitReached { tried: u64 },
}

/// Permutations of each block, enumerated in mixed radix.
struct BlockPermutations {
    blocks: Vec<Vec<usize>>,
    sizes: Vec<usize>,
}

impl BlockPermutations {
    fn new(domain: &PolyBimodule) -> Self {
        let blocks: Vec<Vec<usize>> = domain.block_indices().into_values().collect();
        let sizes = blocks.iter().map(Vec::len).collect();
        BlockPermutations { blocks, sizes }
    }

    fn count(&self) -> Option<u64> {
        self.sizes.iter().try_fold(1u64, |acc, &d| {
            let f = (1..=d as u64).try_fold(1u64, |x, y| x.checked_mul(y))?;
            acc.checked_mul(f)
        })
    }

    /// The `index`-th assignment: domain position → codomain position
    /// within each block.
    fn nth(&self, mut index: u64, codomain_blocks: &[Vec<usize>]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let mut pool: Vec<usize> = codomain_blocks[b].clone();
            for &d in block {
                let k = pool.len() as u64;
                let pick = (index % k) as usize;
                index /= k;
                out.push((d, pool.remove(pick)));
            }
        }
        out
    }
}

fn permutation_maps(domain: &Bimod, codomain: &Bimod) -> Result<(BlockPermutations, Vec<Vec<usize>>)> {
    let perms = BlockPermutations::new(domain);
    let cod = codomain.block_indices();
    let mut blocks = Vec::new();
    for (key, ds) in domain.block_indices() {
        let cs = cod.get(&key).cloned().unwrap_or_default();
        if cs.len() != ds.len() {
            return Err(Error::DimensionMismatch(format!(
                "block {} cannot be matched",
                domain.block_name(key.0, key.1)
            )));
        }
        blocks.push(cs);
    }
    Ok((perms, blocks))
}

/// Heuristic: keeps the canonical `ω` isomorphisms for the witness and
/// tries blockwise permutation matrices for `σ_M`, `σ_N` until (Com)
/// holds or `limit` candidates have been tried. A negative answer says
/// nothing about other choices of `ω` or non-permutation `σ`.
pub fn search_com_candidates(e: &Graph, f: &Graph, w: &SeWitness, field: Field, limit: u64) -> Result<CandidateSearch> {
    e.require_sink_free()?;
    f.require_sink_free()?;
    if let Some(why) = se_failure(&e.adjacency(), &f.adjacency(), w)? {
        return Err(Error::InvalidWitness(why));
    }
    let d = mse_from_se(e, f, w, field)?;
    let (pm, cm) = permutation_maps(d.sigma_m.domain(), d.sigma_m.codomain())?;
    let (pn, cn) = permutation_maps(d.sigma_n.domain(), d.sigma_n.codomain())?;
    let (count_m, count_n) = (pm.count(), pn.count());
    let mut tried = 0u64;
    let total = count_m.zip(count_n).and_then(|(a, b)| a.checked_mul(b));
    let bound = total.map_or(limit, |t| t.min(limit));
    let nm = count_m.unwrap_or(u64::MAX);
    while tried < bound {
        let (i, j) = (tried % nm, tried / nm);
        tried += 1;
        let build = |perms: &BlockPermutations, cods: &[Vec<usize>], idx: u64, base: &BlockMap| {
            let mut image = vec![0; base.domain().len()];
            for (a, b) in perms.nth(idx, cods) {
                image[a] = b;
            }
            BlockMap::basis_map(Arc::clone(base.domain()), Arc::clone(base.codomain()), field, |k| {
                Some(image[k])
            })
        };
        let candidate = ComWitness {
            e: e.clone(),
            f: f.clone(),
            m: Arc::clone(&d.m),
            n: Arc::clone(&d.n),
            lag: w.lag,
            omega_e: d.omega_e.clone(),
            omega_f: d.omega_f.clone(),
            sigma_m: build(&pm, &cm, i, &d.sigma_m)?,
            sigma_n: build(&pn, &cn, j, &d.sigma_n)?,
        };
        if verify_com(&candidate)? {
            return Ok(CandidateSearch::Found(Box::new(candidate)));
        }
    }
    if total.is_some_and(|t| t <= limit) {
        Ok(CandidateSearch::Exhausted { tried })
    } else {
        Ok(CandidateSearch::LimitReached { tried })
    }
}
