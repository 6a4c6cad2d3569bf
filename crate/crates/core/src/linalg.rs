//! Sparse symmetric positive definite solves with a fixed pattern.

use std::collections::HashMap;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{MatMut, Side};

use crate::{Error, Result};

/// Lower-triangular sparsity pattern assembled once and refactored per
/// Newton step.
pub(crate) struct SpdPattern {
    n: usize,
    pairs: Vec<Pair<usize, usize>>,
    slots: HashMap<(usize, usize), usize>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: faer::sparse::Argsort<usize>,
    llt: SymbolicLlt<usize>,
    diag: Vec<usize>,
}

impl SpdPattern {
    /// `entries` are `(i, j)` index pairs in either order; the diagonal is
    /// always included.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut slots = HashMap::new();
        let mut pairs = Vec::new();
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            diag.push(pairs.len());
            slots.insert((i, i), pairs.len());
            pairs.push(Pair { row: i, col: i });
        }
        for (i, j) in entries {
            let key = (i.max(j), i.min(j));
            if let std::collections::hash_map::Entry::Vacant(e) = slots.entry(key) {
                e.insert(pairs.len());
                pairs.push(Pair { row: key.0, col: key.1 });
            }
        }
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let llt = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        Ok(Self { n, pairs, slots, symbolic, argsort, llt, diag })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Value slot of entry `(i, j)`; panics if it is not in the pattern.
    pub fn slot(&self, i: usize, j: usize) -> usize {
        self.slots[&(i.max(j), i.min(j))]
    }

    /// Solves `(A + shift I) x = b` for `A` given by `values` in slot order.
    /// Returns `None` if the factorization hits a non-positive pivot.
    pub fn solve(&self, values: &[f64], shift: f64, b: &[f64]) -> Result<Option<Vec<f64>>> {
        if self.n == 0 {
            return Ok(Some(Vec::new()));
        }
        let mut vals = values.to_vec();
        if shift != 0.0 {
            for &d in &self.diag {
                vals[d] += shift;
            }
        }
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &vals)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let llt = match Llt::try_new_with_symbolic(self.llt.clone(), mat.as_ref(), Side::Lower) {
            Ok(f) => f,
            Err(faer::sparse::linalg::LltError::Numeric(_)) => return Ok(None),
            Err(e) => return Err(Error::LinearAlgebra(format!("{e:?}"))),
        };
        let mut x = b.to_vec();
        llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, self.n, 1));
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        Ok(Some(x))
    }

    /// Solves with increasing diagonal shifts until the factorization
    /// succeeds. `scale` sets the size of the first shift.
    pub fn solve_regularized(&self, values: &[f64], scale: f64, b: &[f64]) -> Result<Vec<f64>> {
        if let Some(x) = self.solve(values, 0.0, b)? {
            return Ok(x);
        }
        let mut shift = 1e-12 * scale.max(f64::MIN_POSITIVE);
        for _ in 0..30 {
            if let Some(x) = self.solve(values, shift, b)? {
                return Ok(x);
            }
            shift *= 10.0;
        }
        Err(Error::LinearAlgebra("matrix is not positive definite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        // 1D Laplacian with Dirichlet ends, exact solution x_i = i + 1
        let n = 5;
        let pat = SpdPattern::new(n, (1..n).map(|i| (i, i - 1))).unwrap();
        let mut vals = vec![0.0; pat.len()];
        for i in 0..n {
            vals[pat.slot(i, i)] = 2.0;
            if i > 0 {
                vals[pat.slot(i, i - 1)] = -1.0;
            }
        }
        let mut b = vec![0.0; n];
        b[0] = 0.0;
        b[n - 1] = (n + 1) as f64;
        let x = pat.solve(&vals, 0.0, &b).unwrap().unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_needs_shift() {
        let pat = SpdPattern::new(2, [(0, 1)]).unwrap();
        let mut vals = vec![0.0; pat.len()];
        vals[pat.slot(0, 0)] = 1.0;
        vals[pat.slot(1, 1)] = 0.0;
        assert!(pat.solve(&vals, 0.0, &[1.0, 1.0]).unwrap().is_none());
        let x = pat.solve_regularized(&vals, 1.0, &[1.0, 1.0]).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
