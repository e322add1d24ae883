//! Exhaustive enumeration of small sink-free graphs up to isomorphism.

use crate::graph::{polymorphism_from_matrix, Graph, NonNegMatrix};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical(m: &[u64], n: usize, perms: &[Vec<usize>]) -> Vec<u64> {
    perms
        .iter()
        .map(|p| {
            let mut v = vec![0; n * n];
            for i in 0..n {
                for j in 0..n {
                    v[p[i] * n + p[j]] = m[i * n + j];
                }
            }
            v
        })
        .min()
        .expect("at least one permutation")
}

/// Adjacency matrices on exactly `n` vertices with entries in
/// `0..=max_multiplicity` and no zero row, one per isomorphism class, in
/// increasing order of their canonical form.
pub fn sink_free_matrices(n: usize, max_multiplicity: u64) -> Vec<Vec<Vec<u64>>> {
    let perms = permutations(n);
    let base = max_multiplicity + 1;
    let cells = n * n;
    let total = base.checked_pow(cells as u32).expect("family is small");
    let mut out = Vec::new();
    let mut m = vec![0u64; cells];
    for code in 0..total {
        let mut c = code;
        for cell in m.iter_mut().rev() {
            *cell = c % base;
            c /= base;
        }
        if (0..n).any(|i| m[i * n..(i + 1) * n].iter().all(|&x| x == 0)) {
            continue;
        }
        if canonical(&m, n, &perms) == m {
            out.push(m.chunks(n).map(<[u64]>::to_vec).collect());
        }
    }
    out
}

/// Graphs with vertices `v0, v1, …` built from [`sink_free_matrices`] for
/// every size from 1 to `max_vertices`.
pub fn sink_free_family(max_vertices: usize, max_multiplicity: u64) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        for rows in sink_free_matrices(n, max_multiplicity) {
            let a = NonNegMatrix::from_u64(names.clone(), names.clone(), &rows).expect("square");
            let p = polymorphism_from_matrix(&a).expect("valid matrix");
            out.push(Graph::from_polymorphism(p).expect("same vertex sets"));
        }
    }
    out
}
