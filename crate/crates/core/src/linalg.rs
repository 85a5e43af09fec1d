//! Square sparse complex matrices stored by column.

use std::collections::BTreeMap;

use crate::qarith::C64;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseMatrix {
    n: usize,
    cols: Vec<BTreeMap<usize, C64>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            cols: vec![BTreeMap::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal((0..n).map(|_| C64::new(1.0, 0.0)))
    }

    /// Diagonal matrix; zero diagonal values are kept as stored entries.
    pub fn diagonal(values: impl IntoIterator<Item = C64>) -> Self {
        let cols: Vec<BTreeMap<usize, C64>> = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let mut c = BTreeMap::new();
                c.insert(i, v);
                c
            })
            .collect();
        Self {
            n: cols.len(),
            cols,
        }
    }

    pub fn from_columns(cols: Vec<BTreeMap<usize, C64>>) -> Self {
        Self {
            n: cols.len(),
            cols,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.cols[col].get(&row).copied().unwrap_or_default()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.cols[col].contains_key(&row)
    }

    /// Adds `v` at `(row, col)`, removing the entry if it becomes exactly zero.
    pub fn add_at(&mut self, row: usize, col: usize, v: C64) {
        let e = self.cols[col].entry(row).or_default();
        *e += v;
        if *e == C64::new(0.0, 0.0) {
            self.cols[col].remove(&row);
        }
    }

    pub fn set(&mut self, row: usize, col: usize, v: C64) {
        if v == C64::new(0.0, 0.0) {
            self.cols[col].remove(&row);
        } else {
            self.cols[col].insert(row, v);
        }
    }

    pub fn column(&self, col: usize) -> &BTreeMap<usize, C64> {
        &self.cols[col]
    }

    /// Stored entries as `(row, col, value)`, sorted by row then column.
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out: Vec<_> = self
            .cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(&r, &v)| (r, c, v)))
            .collect();
        out.sort_by_key(|&(r, c, _)| (r, c));
        out
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matmul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n);
        let cols = rhs
            .cols
            .iter()
            .map(|rc| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for (&k, &b) in rc {
                    for (&i, &a) in &self.cols[k] {
                        *acc.entry(i).or_default() += a * b;
                    }
                }
                acc
            })
            .collect();
        SparseMatrix { n: self.n, cols }
    }

    pub fn scale(&self, c: C64) -> SparseMatrix {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|(&r, &v)| (r, v * c)).collect())
            .collect();
        SparseMatrix { n: self.n, cols }
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.axpy(C64::new(1.0, 0.0), rhs)
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.axpy(C64::new(-1.0, 0.0), rhs)
    }

    /// `self + a * rhs`.
    pub fn axpy(&self, a: C64, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (c, col) in rhs.cols.iter().enumerate() {
            for (&r, &v) in col {
                *out.cols[c].entry(r).or_default() += a * v;
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn pow(&self, k: u32) -> SparseMatrix {
        let mut out = SparseMatrix::identity(self.n);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|c| c.values())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.cols
            .iter()
            .flat_map(|c| c.values())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Principal submatrix on `indices`, renumbered in the given order.
    pub fn restrict(&self, indices: &[usize]) -> SparseMatrix {
        let pos: BTreeMap<usize, usize> =
            indices.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let cols = indices
            .iter()
            .map(|&c| {
                self.cols[c]
                    .iter()
                    .filter_map(|(r, &v)| pos.get(r).map(|&i| (i, v)))
                    .collect()
            })
            .collect();
        SparseMatrix {
            n: indices.len(),
            cols,
        }
    }
}
