//! Sparse symmetric matrices: CSR storage, reverse Cuthill–McKee ordering
//! and a skyline (profile) `LDLᵀ` factorization with inertia counting.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetric matrix in CSR form with both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Structure from sorted, deduplicated column lists; values zero.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in rows {
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self { n: rows.len(), row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Position of entry `(i, j)` in `values`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).expect("entry in pattern");
        self.values[k] += v;
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`, reduced in fixed-size chunks so the result does not
    /// depend on the thread count.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        const CHUNK: usize = 4096;
        let starts: Vec<usize> = (0..self.n).step_by(CHUNK).collect();
        let partial: Vec<f64> = starts
            .par_iter()
            .map(|&s| {
                (s..(s + CHUNK).min(self.n))
                    .map(|i| {
                        let (cols, vals) = self.row(i);
                        x[i] * cols.iter().zip(vals).map(|(&j, &v)| v * y[j]).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .collect();
        partial.iter().sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// `self + alpha·other` on the same pattern.
    pub fn axpy_same_pattern(&self, alpha: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::Assembly("matrices do not share a sparsity pattern".into()));
        }
        let mut out = self.clone();
        for (v, &w) in out.values.iter_mut().zip(&other.values) {
            *v += alpha * w;
        }
        Ok(out)
    }
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, mark: &mut Vec<bool>| -> (Vec<usize>, usize) {
        // Returns the last level and the eccentricity.
        let mut level = vec![start];
        mark[start] = true;
        let mut touched = vec![start];
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &v in &level {
                for &w in a.row(v).0 {
                    if !mark[w] {
                        mark[w] = true;
                        touched.push(w);
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                for t in touched {
                    mark[t] = false;
                }
                return (level, depth);
            }
            depth += 1;
            level = next;
        }
    };
    let mut scratch = vec![false; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start (George–Liu).
        let mut start = seed;
        let (mut last, mut ecc) = bfs_levels(start, &mut scratch);
        loop {
            let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).expect("nonempty level");
            let (l2, e2) = bfs_levels(cand, &mut scratch);
            if e2 > ecc {
                start = cand;
                last = l2;
                ecc = e2;
            } else {
                break;
            }
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Profile `LDLᵀ` factorization of a symmetric matrix in a given ordering.
#[derive(Clone, Debug)]
pub struct SkylineLdlt {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// Row `i` stores `L[i, first[i]..i]` followed by `d[i]`.
    data: Vec<f64>,
    negative_pivots: usize,
}

impl SkylineLdlt {
    /// Factorizes `a` (no pivoting; inertia is exact by Sylvester's law).
    pub fn factor(a: &CsrMatrix, perm: &[usize]) -> Result<Self> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        for new in 0..n {
            let old = perm[new];
            first[new] = a.row(old).0.iter().map(|&j| inv[j]).filter(|&j| j <= new).min().unwrap_or(new);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for new in 0..n {
            let old = perm[new];
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + (jn - first[new])] = v;
                }
            }
        }
        let mut negative_pivots = 0;
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            // g_j = a_ij − Σ_k g_k L_jk, stored in place, then L_ij = g_j/d_j.
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let mut acc = 0.0;
                if k0 < j {
                    let row_i = &data[si + (k0 - fi)..si + (j - fi)];
                    let row_j = &data[sj + (k0 - fj)..sj + (j - fj)];
                    acc = dot(row_i, row_j);
                }
                data[si + (j - fi)] -= acc;
            }
            let mut d = data[si + (i - fi)];
            for j in fi..i {
                let g = data[si + (j - fi)];
                let l = g / diag[j];
                data[si + (j - fi)] = l;
                d -= g * l;
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::numeric("sparse LDLᵀ", format!("zero or non-finite pivot at row {i} of {n}")));
            }
            if d < 0.0 {
                negative_pivots += 1;
            }
            diag[i] = d;
            data[si + (i - fi)] = d;
        }
        Ok(Self { n, perm: perm.to_vec(), first, start, data, negative_pivots })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.negative_pivots
    }

    pub fn profile_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.data[si..si + (i - fi)];
            y[i] -= dot(row, &y[fi..i]);
        }
        for i in 0..n {
            y[i] /= self.data[self.start[i] + (i - self.first[i])];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = y[i];
            let row = &self.data[si..si + (i - fi)];
            for (yj, &l) in y[fi..i].iter_mut().zip(row) {
                *yj -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators; fixed order keeps results reproducible.
    let mut s = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            s[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}
