//! Sparse LU factorization of a simplex basis with partial pivoting, plus
//! forward/backward transformations through the factors and a product-form
//! eta file for cheap basis updates between refactorizations.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const UNASSIGNED: usize = usize::MAX;

/// One product-form update: the entering column in basis coordinates,
/// replacing basis position `r`.
pub struct Eta<F: Scalar> {
    pub r: usize,
    pub diag: F,
    /// Off-pivot nonzeros (basis position, value).
    pub col: Vec<(usize, F)>,
}

impl<F: Scalar> Eta<F> {
    /// Builds an eta from a dense entering column `alpha = B^-1 a_j`.
    pub fn from_dense(r: usize, alpha: &[F]) -> Self {
        let diag = alpha[r];
        let col = alpha
            .iter()
            .enumerate()
            .filter(|&(k, &v)| k != r && v != F::zero())
            .map(|(k, &v)| (k, v))
            .collect();
        Eta { r, diag, col }
    }

    /// Same, but walks a precomputed nonzero index list instead of the
    /// whole vector.
    pub fn from_sparse(r: usize, alpha: &[F], nonzeros: &[usize]) -> Self {
        let diag = alpha[r];
        let col = nonzeros
            .iter()
            .filter(|&&k| k != r)
            .map(|&k| (k, alpha[k]))
            .collect();
        Eta { r, diag, col }
    }

    /// x <- E^-1 x where E is the identity with column r replaced by alpha.
    pub fn apply_ftran(&self, x: &mut [F]) {
        let xr = x[self.r] / self.diag;
        x[self.r] = xr;
        if xr != F::zero() {
            for &(k, v) in &self.col {
                x[k] = x[k] - v * xr;
            }
        }
    }

    /// y <- E^-T y.
    pub fn apply_btran(&self, y: &mut [F]) {
        let mut acc = y[self.r];
        for &(k, v) in &self.col {
            acc = acc - v * y[k];
        }
        y[self.r] = acc / self.diag;
    }
}

/// LU factors of an m x m basis matrix whose columns are given in original
/// row coordinates. `prow[k]` is the original row pivoting factor column k.
pub struct LuFactors<F: Scalar> {
    pub m: usize,
    /// Column processing order: position t factors basis column cq[t].
    /// Sparsest-first ordering keeps the fill of combinatorial bases low.
    cq: Vec<usize>,
    prow: Vec<usize>,
    pinv: Vec<usize>,
    /// L columns: unit diagonal implicit, entries (original row, value).
    lcols: Vec<Vec<(usize, F)>>,
    /// U columns: strictly-upper entries (basis position, value).
    ucols: Vec<Vec<(usize, F)>>,
    udiag: Vec<F>,
}

impl<F: Scalar> LuFactors<F> {
    /// Number of stored nonzeros across both factors.
    pub fn nnz(&self) -> usize {
        self.lcols.iter().map(Vec::len).sum::<usize>()
            + self.ucols.iter().map(Vec::len).sum::<usize>()
            + self.m
    }

    /// Left-looking factorization with symbolic reachability (only the
    /// L-columns that can touch the current column are applied); `column(k)`
    /// yields the k-th basis column as sparse (original row, value) entries.
    pub fn factor<'a>(m: usize, column: impl Fn(usize) -> &'a [(usize, F)]) -> Result<Self>
    where
        F: 'a,
    {
        let mut cq: Vec<usize> = (0..m).collect();
        cq.sort_by_key(|&k| (column(k).len(), k));
        let mut lu = LuFactors {
            m,
            cq,
            prow: vec![UNASSIGNED; m],
            pinv: vec![UNASSIGNED; m],
            lcols: Vec::with_capacity(m),
            ucols: Vec::with_capacity(m),
            udiag: Vec::with_capacity(m),
        };
        let mut w = vec![F::zero(); m];
        let mut touched = Vec::with_capacity(m);
        let mut is_touched = vec![false; m];
        let mut visited = vec![false; m];
        let mut order: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for t in 0..m {
            let k = lu.cq[t];
            for &(i, v) in column(k) {
                w[i] = v;
                if !is_touched[i] {
                    is_touched[i] = true;
                    touched.push(i);
                }
            }
            // Symbolic pass: depth-first search through the L dependency
            // graph from the column's pattern; reverse postorder is a
            // topological elimination order.
            order.clear();
            for &(i, _) in column(k) {
                let j0 = lu.pinv[i];
                if j0 == UNASSIGNED || visited[j0] {
                    continue;
                }
                visited[j0] = true;
                stack.push((j0, 0));
                while let Some(top) = stack.last_mut() {
                    let (j, pos) = *top;
                    if pos < lu.lcols[j].len() {
                        top.1 += 1;
                        let (i2, _) = lu.lcols[j][pos];
                        let j2 = lu.pinv[i2];
                        if j2 != UNASSIGNED && !visited[j2] {
                            visited[j2] = true;
                            stack.push((j2, 0));
                        }
                    } else {
                        stack.pop();
                        order.push(j);
                    }
                }
            }
            // Numeric pass over the reach only.
            for idx in (0..order.len()).rev() {
                let j = order[idx];
                visited[j] = false;
                let val = w[lu.prow[j]];
                if val == F::zero() {
                    continue;
                }
                for &(i, lv) in &lu.lcols[j] {
                    w[i] = w[i] - lv * val;
                    if !is_touched[i] {
                        is_touched[i] = true;
                        touched.push(i);
                    }
                }
            }
            // Partial pivoting over the not-yet-assigned rows.
            let mut pivot_row = UNASSIGNED;
            let mut pivot_abs = F::zero();
            for &i in &touched {
                if lu.pinv[i] == UNASSIGNED && w[i].abs() > pivot_abs {
                    pivot_abs = w[i].abs();
                    pivot_row = i;
                }
            }
            if pivot_row == UNASSIGNED || pivot_abs <= F::pivot_floor() {
                return Err(Error::Solver(format!("singular basis at column {k}")));
            }
            debug_assert_eq!(lu.lcols.len(), t);
            let pivot = w[pivot_row];
            let mut ucol = Vec::new();
            let mut lcol = Vec::new();
            for &i in &touched {
                let v = w[i];
                if v != F::zero() {
                    if lu.pinv[i] != UNASSIGNED {
                        ucol.push((lu.pinv[i], v));
                    } else if i != pivot_row {
                        lcol.push((i, v / pivot));
                    }
                }
                w[i] = F::zero();
                is_touched[i] = false;
            }
            touched.clear();
            lu.prow[t] = pivot_row;
            lu.pinv[pivot_row] = t;
            lu.lcols.push(lcol);
            lu.ucols.push(ucol);
            lu.udiag.push(pivot);
        }
        Ok(lu)
    }

    /// Solves B x = b. Input `w` in original row coordinates, output in
    /// basis coordinates (x[k] multiplies basis column k).
    pub fn ftran(&self, w: &mut Vec<F>) {
        for k in 0..self.m {
            let val = w[self.prow[k]];
            if val != F::zero() {
                for &(i, lv) in &self.lcols[k] {
                    w[i] = w[i] - lv * val;
                }
            }
        }
        let mut x = vec![F::zero(); self.m];
        for k in (0..self.m).rev() {
            let val = w[self.prow[k]] / self.udiag[k];
            x[self.cq[k]] = val;
            if val != F::zero() {
                for &(j, uv) in &self.ucols[k] {
                    let row = self.prow[j];
                    w[row] = w[row] - uv * val;
                }
            }
        }
        *w = x;
    }

    /// Solves B^T y = c. Input `w` in basis coordinates (c[k] is the cost of
    /// the k-th basic variable), output in original row coordinates.
    pub fn btran(&self, w: &mut Vec<F>) {
        let permuted: Vec<F> = self.cq.iter().map(|&k| w[k]).collect();
        *w = permuted;
        for k in 0..self.m {
            let mut acc = w[k];
            for &(j, uv) in &self.ucols[k] {
                acc = acc - uv * w[j];
            }
            w[k] = acc / self.udiag[k];
        }
        for k in (0..self.m).rev() {
            let mut acc = w[k];
            for &(i, lv) in &self.lcols[k] {
                acc = acc - lv * w[self.pinv[i]];
            }
            w[k] = acc;
        }
        let mut y = vec![F::zero(); self.m];
        for k in 0..self.m {
            y[self.prow[k]] = w[k];
        }
        *w = y;
    }
}
