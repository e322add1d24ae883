//! Small dense matrices over a [`Field`], with exact Gauss-Jordan
//! elimination for rank and inversion, and exact rank of sparse vector
//! families.

use std::collections::BTreeMap;

use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        DenseMatrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        DenseMatrix {
            field,
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        self.data[i * self.cols + j] = value;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&i| !self.get(i, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self.get(row, col).inv().expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = self.get(row, j) * &inv;
                self.set(row, j, v);
            }
            for i in 0..self.rows {
                if i == row || self.get(i, col).is_zero() {
                    continue;
                }
                let factor = self.get(i, col).clone();
                for j in 0..self.cols {
                    let v = self.get(i, j) - &(&factor * self.get(row, j));
                    self.set(i, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn inverse(&self) -> Option<DenseMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = DenseMatrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, self.field.one());
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        let mut inv = DenseMatrix::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + &(a * other.get(k, j));
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Rank of a family of sparse vectors keyed by coordinate. Each pivot row
/// is kept monic with its smallest key as pivot, so every reduction step
/// strictly raises the smallest key of the vector being reduced.
pub fn sparse_rank<K: Ord + Clone>(vectors: &[BTreeMap<K, Scalar>]) -> usize {
    let mut pivots: BTreeMap<K, BTreeMap<K, Scalar>> = BTreeMap::new();
    for v in vectors {
        let mut v: BTreeMap<K, Scalar> = v
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        while let Some((k, c)) = v.first_key_value().map(|(k, c)| (k.clone(), c.clone())) {
            let Some(row) = pivots.get(&k) else {
                let inv = c.inv().expect("nonzero entries are invertible");
                let row = v.into_iter().map(|(key, x)| (key, &x * &inv)).collect();
                pivots.insert(k, row);
                break;
            };
            for (key, x) in row {
                let delta = &c * x;
                let entry = v.entry(key.clone()).or_insert_with(|| delta.field().zero());
                *entry = &*entry - &delta;
                if entry.is_zero() {
                    v.remove(key);
                }
            }
        }
    }
    pivots.len()
}
