//! Exact sparse Gaussian elimination over rationals.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::model::Rational;

/// A linear system `Σ_j a_ij x_j = b_i` with sparse rows.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    rows: Vec<BTreeMap<usize, Rational>>,
    rhs: Vec<Rational>,
}

impl SparseSystem {
    pub fn new(n: usize) -> SparseSystem {
        SparseSystem { rows: vec![BTreeMap::new(); n], rhs: vec![Rational::zero(); n] }
    }

    pub fn add(&mut self, row: usize, col: usize, value: &Rational) {
        let e = self.rows[row].entry(col).or_insert_with(Rational::zero);
        *e += value;
        if e.is_zero() {
            self.rows[row].remove(&col);
        }
    }

    pub fn set_rhs(&mut self, row: usize, value: Rational) {
        self.rhs[row] = value;
    }

    /// Solves the square system by Gauss-Jordan elimination. Returns `None`
    /// when the matrix is singular.
    pub fn solve(mut self) -> Option<Vec<Rational>> {
        let n = self.rows.len();
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row.keys() {
                col_rows[j].insert(i);
            }
        }
        let mut pivot_of_col = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for k in 0..n {
            // prefer the sparsest available row as pivot
            let pivot = col_rows[k]
                .iter()
                .copied()
                .filter(|&i| !used[i])
                .min_by_key(|&i| self.rows[i].len())?;
            used[pivot] = true;
            pivot_of_col[k] = pivot;
            let pv = self.rows[pivot][&k].clone();
            let prow: Vec<(usize, Rational)> = self.rows[pivot].iter().map(|(&j, v)| (j, v / &pv)).collect();
            let prhs = &self.rhs[pivot] / &pv;
            self.rows[pivot] = prow.iter().cloned().collect();
            self.rhs[pivot] = prhs.clone();
            let targets: Vec<usize> = col_rows[k].iter().copied().filter(|&i| i != pivot).collect();
            for i in targets {
                let factor = match self.rows[i].get(&k) {
                    Some(f) => f.clone(),
                    None => continue,
                };
                for (j, v) in &prow {
                    let e = self.rows[i].entry(*j).or_insert_with(Rational::zero);
                    let was_zero = e.is_zero();
                    *e -= &factor * v;
                    if e.is_zero() {
                        self.rows[i].remove(j);
                        col_rows[*j].remove(&i);
                    } else if was_zero {
                        col_rows[*j].insert(i);
                    }
                }
                let delta = &factor * &prhs;
                self.rhs[i] -= delta;
            }
        }
        let mut x = vec![Rational::zero(); n];
        for k in 0..n {
            let p = pivot_of_col[k];
            debug_assert!(self.rows[p].len() == 1);
            x[k] = self.rhs[p].clone();
        }
        Some(x)
    }
}
