//! Symmetric sparse matrices stored as a canonical lower triangle.

use nalgebra::{DMatrix, DVector};

/// A symmetric `n x n` matrix kept as sorted lower-triangle triplets `(i, j, v)`
/// with `i >= j`. Duplicate coordinates are summed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

/// Reasons a triplet list cannot be turned into a [`SymmetricMatrix`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TripletError {
    #[error("entry ({row}, {col}) outside a {n}x{n} matrix")]
    OutOfRange { row: usize, col: usize, n: usize },
    #[error("entry ({row}, {col}) lies above the diagonal")]
    UpperTriangle { row: usize, col: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    /// Builds from lower-triangle triplets. Entries above the diagonal are rejected.
    pub fn from_lower_triplets<I>(n: usize, triplets: I) -> Result<Self, TripletError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries = Vec::new();
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(TripletError::OutOfRange { row: i, col: j, n });
            }
            if j > i {
                return Err(TripletError::UpperTriangle { row: i, col: j });
            }
            if !v.is_finite() {
                return Err(TripletError::NonFinite { row: i, col: j });
            }
            entries.push((i, j, v));
        }
        Ok(Self::canonicalize(n, entries))
    }

    fn canonicalize(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Self { n, entries: merged }
    }

    /// Lower-triangle part of a dense matrix; the strict upper part is ignored.
    pub fn from_dense_lower(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = m[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Canonical lower-triangle triplets, sorted by `(row, col)`.
    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz_lower(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i >= j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] = v;
            }
        }
        d
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// True when every row is strictly diagonally dominant with a positive diagonal,
    /// which certifies positive definiteness.
    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        let mut off = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            if i != j {
                off[i] += v.abs();
                off[j] += v.abs();
            }
        }
        let d = self.diagonal();
        (0..self.n).all(|i| d[i] > off[i])
    }
}
