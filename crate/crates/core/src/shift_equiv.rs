//! Shift equivalence and elementary strong shift equivalence of square
//! nonnegative integer matrices: exact verification and bounded search.
//!
//! Searches enumerate candidates in a fixed order (lag ascending, then the
//! row-major flattening of `R` lexicographically, then `S`) and return the
//! first hit, so results do not depend on how the `R` candidates are split
//! across worker threads.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::NonNegMatrix;

/// Data `(R, S, n)` with `A^n = RS`, `B^n = SR`, `AR = RB`, `BS = SA`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeWitness {
    pub r: NonNegMatrix,
    pub s: NonNegMatrix,
    pub lag: u32,
}

/// One elementary step `A = RS`, `SR` = next matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SseStep {
    pub a: NonNegMatrix,
    pub r: NonNegMatrix,
    pub s: NonNegMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SseChain {
    pub steps: Vec<SseStep>,
}

impl SseChain {
    /// The matrix reached after the last step.
    pub fn end(&self) -> Option<NonNegMatrix> {
        self.steps.last().map(|st| st.s.mul(&st.r).expect("shapes checked"))
    }
}

fn require_square(m: &NonNegMatrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )))
    }
}

fn require_shape(m: &NonNegMatrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.nrows() == rows && m.ncols() == cols {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )))
    }
}

fn compare(lhs: &NonNegMatrix, rhs: &NonNegMatrix, equation: &str) -> Option<String> {
    lhs.first_difference(rhs).map(|(i, j)| {
        format!(
            "{equation} fails at entry ({i},{j}): {} != {}",
            lhs.get(i, j),
            rhs.get(i, j)
        )
    })
}

/// Describes the first failing shift-equivalence equation, or `None` when
/// the witness is valid.
pub fn se_failure(a: &NonNegMatrix, b: &NonNegMatrix, w: &SeWitness) -> Result<Option<String>> {
    require_square(a, "A")?;
    require_square(b, "B")?;
    require_shape(&w.r, a.nrows(), b.nrows(), "R")?;
    require_shape(&w.s, b.nrows(), a.nrows(), "S")?;
    if w.lag == 0 {
        return Err(Error::InvalidWitness("lag must be positive".into()));
    }
    let an = a.pow(w.lag)?;
    let bn = b.pow(w.lag)?;
    let checks = [
        (an, w.r.mul(&w.s)?, "A^n = RS"),
        (bn, w.s.mul(&w.r)?, "B^n = SR"),
        (a.mul(&w.r)?, w.r.mul(b)?, "AR = RB"),
        (b.mul(&w.s)?, w.s.mul(a)?, "BS = SA"),
    ];
    Ok(checks.iter().find_map(|(l, r, eq)| compare(l, r, eq)))
}

pub fn verify_se(a: &NonNegMatrix, b: &NonNegMatrix, w: &SeWitness) -> Result<bool> {
    Ok(se_failure(a, b, w)?.is_none())
}

pub fn elementary_sse_failure(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    r: &NonNegMatrix,
    s: &NonNegMatrix,
) -> Result<Option<String>> {
    require_square(a, "A")?;
    require_square(b, "B")?;
    require_shape(r, a.nrows(), b.nrows(), "R")?;
    require_shape(s, b.nrows(), a.nrows(), "S")?;
    let rs = r.mul(s)?;
    let sr = s.mul(r)?;
    Ok(compare(a, &rs, "A = RS").or_else(|| compare(b, &sr, "B = SR")))
}

pub fn verify_elementary_sse(a: &NonNegMatrix, b: &NonNegMatrix, r: &NonNegMatrix, s: &NonNegMatrix) -> Result<bool> {
    Ok(elementary_sse_failure(a, b, r, s)?.is_none())
}

type Mat = Vec<Vec<u128>>;

fn small(m: &NonNegMatrix) -> Option<Mat> {
    m.entries()
        .iter()
        .map(|row| row.iter().map(|x| x.to_u128()).collect())
        .collect()
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0u128; cols]; a.len()];
    for (i, row) in a.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for j in 0..cols {
                out[i][j] += x * b[k][j];
            }
        }
    }
    out
}

fn to_matrix(rows: &[String], cols: &[String], m: &Mat) -> NonNegMatrix {
    NonNegMatrix::new(
        rows.to_vec(),
        cols.to_vec(),
        m.iter()
            .map(|r| r.iter().map(|&x| BigUint::from(x)).collect())
            .collect(),
    )
    .expect("shape matches labels")
}

/// The equations a candidate `(R, S)` must satisfy: `RS = target_a`,
/// `SR = target_b`, and optionally `AR = RB`, `BS = SA`.
struct Problem {
    a: Mat,
    b: Mat,
    target_a: Mat,
    target_b: Mat,
    intertwine: bool,
    max_entry: u128,
}

impl Problem {
    fn n(&self) -> usize {
        self.a.len()
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    /// Decodes the `idx`-th `R` in lexicographic row-major order.
    fn decode_r(&self, mut idx: u128) -> Mat {
        let (n, m) = (self.n(), self.m());
        let base = self.max_entry + 1;
        let mut flat = vec![0u128; n * m];
        for slot in flat.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        flat.chunks(m.max(1)).take(n).map(<[u128]>::to_vec).collect()
    }

    fn r_count(&self) -> Option<u128> {
        let cells = u32::try_from(self.n() * self.m()).ok()?;
        (self.max_entry + 1).checked_pow(cells)
    }

    fn accepts_r(&self, r: &Mat) -> bool {
        !self.intertwine || mat_mul(&self.a, r) == mat_mul(r, &self.b)
    }

    /// Lexicographically smallest `S` completing `r`, by backtracking in
    /// row-major order with partial-sum pruning.
    fn find_s(&self, r: &Mat) -> Option<Mat> {
        let mut state = SState {
            s: vec![vec![0; self.n()]; self.m()],
            rs: vec![vec![0; self.n()]; self.n()],
            sr: vec![vec![0; self.m()]; self.m()],
        };
        let mut found = None;
        self.each_s(r, 0, &mut state, &mut |s| {
            found = Some(s.clone());
            true
        });
        found
    }

    /// Calls `visit` on every completing `S` in lexicographic order until it
    /// returns `true`. Returns whether the walk was stopped.
    #[allow(clippy::needless_range_loop)]
    fn each_s(&self, r: &Mat, pos: usize, st: &mut SState, visit: &mut dyn FnMut(&Mat) -> bool) -> bool {
        let (n, m) = (self.n(), self.m());
        if pos == n * m {
            if st.rs != self.target_a || st.sr != self.target_b {
                return false;
            }
            if self.intertwine && mat_mul(&self.b, &st.s) != mat_mul(&st.s, &self.a) {
                return false;
            }
            return visit(&st.s);
        }
        let (k, l) = (pos / n, pos % n);
        for x in 0..=self.max_entry {
            let mut ok = true;
            for i in 0..n {
                st.rs[i][l] += r[i][k] * x;
                ok &= st.rs[i][l] <= self.target_a[i][l];
            }
            for j in 0..m {
                st.sr[k][j] += x * r[l][j];
                ok &= st.sr[k][j] <= self.target_b[k][j];
            }
            st.s[k][l] = x;
            if ok && l == n - 1 {
                ok = st.sr[k] == self.target_b[k];
            }
            if ok && k == m - 1 {
                ok = (0..n).all(|i| st.rs[i][l] == self.target_a[i][l]);
            }
            let stop = ok && self.each_s(r, pos + 1, st, visit);
            for i in 0..n {
                st.rs[i][l] -= r[i][k] * x;
            }
            for j in 0..m {
                st.sr[k][j] -= x * r[l][j];
            }
            st.s[k][l] = 0;
            if stop {
                return true;
            }
            // Every constraint is monotone in x, so a violation persists.
            let violated = (0..n).any(|i| st.rs[i][l] + r[i][k] * x > self.target_a[i][l])
                || (0..m).any(|j| st.sr[k][j] + x * r[l][j] > self.target_b[k][j]);
            if violated {
                break;
            }
        }
        false
    }

    /// Smallest `(R, S)` solving the problem.
    fn solve(&self) -> Result<Option<(Mat, Mat)>> {
        let (n, m) = (self.n(), self.m());
        if n == 0 || m == 0 {
            let r = vec![vec![0; m]; n];
            let s = vec![vec![0; n]; m];
            let ok = mat_mul(&r, &s) == self.target_a && mat_mul(&s, &r) == self.target_b;
            return Ok(ok.then_some((r, s)));
        }
        let total = self
            .r_count()
            .and_then(|t| usize::try_from(t).ok())
            .ok_or_else(|| Error::InvalidArgument("search space exceeds the address range".into()))?;
        let hit = (0..total).into_par_iter().find_first(|&idx| {
            let r = self.decode_r(idx as u128);
            self.accepts_r(&r) && self.find_s(&r).is_some()
        });
        Ok(hit.map(|idx| {
            let r = self.decode_r(idx as u128);
            let s = self.find_s(&r).expect("candidate accepted above");
            (r, s)
        }))
    }
}

struct SState {
    s: Mat,
    rs: Mat,
    sr: Mat,
}

fn entry_bound(max_entry: u64) -> Result<u128> {
    if max_entry > u64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!("max_entry {max_entry} is too large")));
    }
    Ok(u128::from(max_entry))
}

/// Whether every entry of `target` is at most `inner * max_entry^2`, the
/// largest value a product of bounded factors can reach.
fn reachable(target: &NonNegMatrix, inner: usize, max_entry: u64) -> Option<Mat> {
    let cap = BigUint::from(inner) * BigUint::from(max_entry) * BigUint::from(max_entry);
    if target.entries().iter().flatten().any(|x| *x > cap) {
        return None;
    }
    small(target)
}

/// Smallest shift-equivalence witness with lag at most `max_lag` and all
/// entries of `R`, `S` at most `max_entry`.
pub fn search_se(a: &NonNegMatrix, b: &NonNegMatrix, max_lag: u32, max_entry: u64) -> Result<Option<SeWitness>> {
    require_square(a, "A")?;
    require_square(b, "B")?;
    let bound = entry_bound(max_entry)?;
    let (Some(a_small), Some(b_small)) = (small(a), small(b)) else {
        return Ok(None);
    };
    for lag in 1..=max_lag {
        let an = a.pow(lag)?;
        let bn = b.pow(lag)?;
        let (Some(target_a), Some(target_b)) = (
            reachable(&an, b.nrows(), max_entry),
            reachable(&bn, a.nrows(), max_entry),
        ) else {
            continue;
        };
        let problem = Problem {
            a: a_small.clone(),
            b: b_small.clone(),
            target_a,
            target_b,
            intertwine: true,
            max_entry: bound,
        };
        if let Some((r, s)) = problem.solve()? {
            return Ok(Some(SeWitness {
                r: to_matrix(a.rows(), b.rows(), &r),
                s: to_matrix(b.rows(), a.rows(), &s),
                lag,
            }));
        }
    }
    Ok(None)
}

/// Smallest `(R, S)` with `A = RS`, `B = SR` and entries at most
/// `max_entry`. The inner dimension is forced to `dim B`; when that exceeds
/// `max_inner_dim` nothing is searched.
pub fn search_elementary_sse(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    max_inner_dim: usize,
    max_entry: u64,
) -> Result<Option<(NonNegMatrix, NonNegMatrix)>> {
    require_square(a, "A")?;
    require_square(b, "B")?;
    let bound = entry_bound(max_entry)?;
    if b.nrows() > max_inner_dim {
        return Ok(None);
    }
    let (Some(target_a), Some(target_b)) = (reachable(a, b.nrows(), max_entry), reachable(b, a.nrows(), max_entry))
    else {
        return Ok(None);
    };
    let problem = Problem {
        a: target_a.clone(),
        b: target_b.clone(),
        target_a,
        target_b,
        intertwine: false,
        max_entry: bound,
    };
    Ok(problem
        .solve()?
        .map(|(r, s)| (to_matrix(a.rows(), b.rows(), &r), to_matrix(b.rows(), a.rows(), &s))))
}

/// Every factorization `A = RS` with inner dimension `1..=max_inner_dim`
/// and entries at most `max_entry`, ordered by inner dimension, then `R`,
/// then `S`. Inner vertices are labelled `0, 1, ...`.
pub fn factorizations(
    a: &NonNegMatrix,
    max_inner_dim: usize,
    max_entry: u64,
) -> Result<Vec<(NonNegMatrix, NonNegMatrix)>> {
    require_square(a, "A")?;
    let bound = entry_bound(max_entry)?;
    let n = a.nrows();
    let mut out = Vec::new();
    for d in 1..=max_inner_dim {
        let Some(target_a) = reachable(a, d, max_entry) else {
            continue;
        };
        let labels = crate::graph::default_labels(d);
        // SR is unconstrained: give it a ceiling no partial sum can reach.
        let ceiling = u128::from(u32::MAX) * u128::from(u32::MAX) * (n as u128 + 1);
        let problem = Problem {
            a: target_a.clone(),
            b: vec![vec![0; d]; d],
            target_a,
            target_b: vec![vec![ceiling; d]; d],
            intertwine: false,
            max_entry: bound,
        };
        let total = problem
            .r_count()
            .and_then(|t| usize::try_from(t).ok())
            .ok_or_else(|| Error::InvalidArgument("search space exceeds the address range".into()))?;
        let per_r: Vec<Vec<(Mat, Mat)>> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let r = problem.decode_r(idx as u128);
                let mut found = Vec::new();
                let mut st = SState {
                    s: vec![vec![0; n]; d],
                    rs: vec![vec![0; n]; n],
                    sr: vec![vec![0; d]; d],
                };
                problem.each_s_free(&r, 0, &mut st, &mut |s| found.push((r.clone(), s.clone())));
                found
            })
            .collect();
        for (r, s) in per_r.into_iter().flatten() {
            out.push((to_matrix(a.rows(), &labels, &r), to_matrix(&labels, a.rows(), &s)));
        }
    }
    Ok(out)
}

impl Problem {
    /// Like `each_s` but ignores the `SR` target; visits every `S` with
    /// `RS = target_a`.
    #[allow(clippy::needless_range_loop)]
    fn each_s_free(&self, r: &Mat, pos: usize, st: &mut SState, visit: &mut dyn FnMut(&Mat)) {
        let (n, m) = (self.n(), self.m());
        if pos == n * m {
            if st.rs == self.target_a {
                visit(&st.s);
            }
            return;
        }
        let (k, l) = (pos / n, pos % n);
        for x in 0..=self.max_entry {
            let mut ok = true;
            for i in 0..n {
                st.rs[i][l] += r[i][k] * x;
                ok &= st.rs[i][l] <= self.target_a[i][l];
            }
            if ok && k == m - 1 {
                ok = (0..n).all(|i| st.rs[i][l] == self.target_a[i][l]);
            }
            st.s[k][l] = x;
            if ok {
                self.each_s_free(r, pos + 1, st, visit);
            }
            let violated = (0..n).any(|i| st.rs[i][l] > self.target_a[i][l]);
            for i in 0..n {
                st.rs[i][l] -= r[i][k] * x;
            }
            st.s[k][l] = 0;
            if violated {
                break;
            }
        }
    }
}

/// Checks every step of a chain and that it runs from `a` to `b`.
pub fn verify_sse_chain(a: &NonNegMatrix, b: &NonNegMatrix, chain: &SseChain) -> Result<bool> {
    let Some(first) = chain.steps.first() else {
        return Ok(a.same_entries(b) && a.nrows() == b.nrows());
    };
    if !first.a.same_entries(a) || first.a.nrows() != a.nrows() {
        return Ok(false);
    }
    for (i, step) in chain.steps.iter().enumerate() {
        let next = match chain.steps.get(i + 1) {
            Some(nx) => nx.a.clone(),
            None => b.clone(),
        };
        if next.nrows() != step.s.nrows() {
            return Ok(false);
        }
        if !verify_elementary_sse(&step.a, &next, &step.r, &step.s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Breadth-first search for a chain of at most `depth` elementary steps from
/// `a` to `b`, through intermediate matrices of dimension at most
/// `max_inner_dim`.
pub fn search_sse_chain(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    depth: u32,
    max_inner_dim: usize,
    max_entry: u64,
) -> Result<Option<SseChain>> {
    require_square(a, "A")?;
    require_square(b, "B")?;
    if a.nrows() == b.nrows() && a.same_entries(b) {
        return Ok(Some(SseChain { steps: Vec::new() }));
    }
    let mut seen: HashSet<Vec<Vec<BigUint>>> = HashSet::new();
    seen.insert(a.entries().to_vec());
    let mut queue: VecDeque<(NonNegMatrix, Vec<SseStep>)> = VecDeque::new();
    queue.push_back((a.clone(), Vec::new()));
    while let Some((current, path)) = queue.pop_front() {
        if path.len() as u32 >= depth {
            continue;
        }
        if let Some((r, s)) = search_elementary_sse(&current, b, max_inner_dim, max_entry)? {
            let mut steps = path.clone();
            steps.push(SseStep { a: current, r, s });
            return Ok(Some(SseChain { steps }));
        }
        if path.len() as u32 + 1 >= depth {
            continue;
        }
        for (r, s) in factorizations(&current, max_inner_dim, max_entry)? {
            let next = s.mul(&r)?;
            if seen.insert(next.entries().to_vec()) {
                let mut steps = path.clone();
                steps.push(SseStep {
                    a: current.clone(),
                    r,
                    s,
                });
                queue.push_back((next, steps));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<u64>]) -> NonNegMatrix {
        NonNegMatrix::unlabeled(rows)
    }

    fn witness(r: &[Vec<u64>], s: &[Vec<u64>], lag: u32) -> SeWitness {
        SeWitness { r: m(r), s: m(s), lag }
    }

    /// Exhaustive oracle over all `R, S` with entries in `0..=bound`.
    fn brute_force_se(a: &[Vec<u64>], b: &[Vec<u64>], lag: u32, bound: u64) -> bool {
        let (n, k) = (a.len(), b.len());
        let cells = 2 * n * k;
        let total = (bound + 1).pow(cells as u32);
        (0..total).any(|mut idx| {
            let mut flat = vec![0u64; cells];
            for slot in flat.iter_mut() {
                *slot = idx % (bound + 1);
                idx /= bound + 1;
            }
            let r: Vec<Vec<u64>> = flat[..n * k].chunks(k).map(<[u64]>::to_vec).collect();
            let s: Vec<Vec<u64>> = flat[n * k..].chunks(n).map(<[u64]>::to_vec).collect();
            verify_se(&m(a), &m(b), &witness(&r, &s, lag)).unwrap()
        })
    }

    #[test]
    fn verifies_example_witness() {
        let a = m(&[vec![2]]);
        let b = m(&[vec![1, 1], vec![1, 1]]);
        assert!(verify_se(&a, &b, &witness(&[vec![1, 1]], &[vec![1], vec![1]], 1)).unwrap());
        assert!(verify_elementary_sse(&a, &b, &m(&[vec![1, 1]]), &m(&[vec![1], vec![1]])).unwrap());
        let bad = witness(&[vec![1]], &[vec![1]], 1);
        assert!(verify_se(&a, &b, &bad).is_err());
    }

    #[test]
    fn trivial_witnesses() {
        let a = m(&[vec![1, 2], vec![0, 3]]);
        assert!(verify_se(
            &a,
            &a,
            &SeWitness {
                r: NonNegMatrix::identity(crate::graph::default_labels(2)),
                s: a.clone(),
                lag: 1
            }
        )
        .unwrap());
        let z = m(&[vec![0]]);
        assert!(verify_elementary_sse(&z, &z, &z, &z).unwrap());
        let two = m(&[vec![2]]);
        let one = m(&[vec![1]]);
        assert!(!verify_elementary_sse(&two, &two, &one, &one).unwrap());
    }

    #[test]
    fn two_and_three_are_not_se() {
        for bound in 0..=3 {
            assert!(!brute_force_se(&[vec![2]], &[vec![3]], 1, bound));
        }
        assert_eq!(search_se(&m(&[vec![2]]), &m(&[vec![3]]), 3, 3).unwrap(), None);
    }

    #[test]
    fn search_finds_example() {
        let a = m(&[vec![2]]);
        let b = m(&[vec![1, 1], vec![1, 1]]);
        let w = search_se(&a, &b, 1, 2).unwrap().unwrap();
        assert_eq!(w.r.to_u64().unwrap(), vec![vec![1, 1]]);
        assert_eq!(w.s.to_u64().unwrap(), vec![vec![1], vec![1]]);
        let (r, s) = search_elementary_sse(&a, &b, 3, 2).unwrap().unwrap();
        assert_eq!((r, s), (w.r, w.s));
        assert_eq!(
            search_elementary_sse(&m(&[vec![4]]), &m(&[vec![2]]), 3, 4).unwrap(),
            None
        );
        assert_eq!(search_se(&a, &b, 1, 0).unwrap(), None);
    }

    #[test]
    fn search_matches_brute_force_order() {
        // Smallest witness by (lag, R, S) computed independently.
        let a = vec![vec![1, 1], vec![1, 0]];
        let b = vec![vec![1, 1], vec![1, 0]];
        let w = search_se(&m(&a), &m(&b), 2, 1).unwrap().unwrap();
        assert!(verify_se(&m(&a), &m(&b), &w).unwrap());
        let mut best: Option<(Vec<u64>, Vec<u64>)> = None;
        let bound = 1u64;
        for idx in 0..(bound + 1).pow(8) {
            let digits: Vec<u64> = (0..8).rev().map(|p| (idx / (bound + 1).pow(p)) % (bound + 1)).collect();
            let r: Vec<Vec<u64>> = digits[..4].chunks(2).map(<[u64]>::to_vec).collect();
            let s: Vec<Vec<u64>> = digits[4..].chunks(2).map(<[u64]>::to_vec).collect();
            if verify_se(&m(&a), &m(&b), &witness(&r, &s, 1)).unwrap() {
                best = Some((digits[..4].to_vec(), digits[4..].to_vec()));
                break;
            }
        }
        let (r, s) = best.unwrap();
        assert_eq!(w.lag, 1);
        assert_eq!(w.r.to_u64().unwrap().concat(), r);
        assert_eq!(w.s.to_u64().unwrap().concat(), s);
    }

    #[test]
    fn factorizations_are_exhaustive() {
        let a = m(&[vec![2]]);
        let f = factorizations(&a, 2, 2).unwrap();
        for (r, s) in &f {
            assert!(r.mul(s).unwrap().same_entries(&a));
        }
        // d=1: (1,2),(2,1). d=2: r·s over {0,1,2}^2 summing to 2.
        let d1 = f.iter().filter(|(r, _)| r.ncols() == 1).count();
        assert_eq!(d1, 2);
        let mut d2 = 0;
        for r in 0..9u64 {
            for s in 0..9u64 {
                let (r0, r1, s0, s1) = (r / 3, r % 3, s / 3, s % 3);
                if r0 * s0 + r1 * s1 == 2 {
                    d2 += 1;
                }
            }
        }
        assert_eq!(f.len() - d1, d2);
    }

    #[test]
    fn chain_search() {
        let a = m(&[vec![2]]);
        let b = m(&[vec![1, 1], vec![1, 1]]);
        let chain = search_sse_chain(&a, &b, 1, 3, 2).unwrap().unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert!(verify_sse_chain(&a, &b, &chain).unwrap());
        let c = m(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 1]]);
        let chain = search_sse_chain(&a, &c, 2, 3, 2).unwrap().unwrap();
        assert!(verify_sse_chain(&a, &c, &chain).unwrap());
        assert!(chain.end().unwrap().same_entries(&c));
    }

    #[test]
    fn deterministic_across_pools() {
        let a = m(&[vec![1, 2], vec![1, 1]]);
        let b = m(&[vec![1, 1], vec![2, 1]]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| search_se(&a, &b, 2, 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
