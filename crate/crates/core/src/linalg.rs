//! Sparse symmetric linear algebra: CSR storage, reverse Cuthill-McKee
//! ordering, envelope (skyline) Cholesky and preconditioned conjugate
//! gradients.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("conjugate gradients did not reach {tol:e} in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Csr {
        let mut pattern = Csr::pattern(n_rows, n_cols, triplets.iter().map(|&(r, c, _)| (r, c)));
        for &(r, c, v) in triplets {
            let k = pattern.find(r, c).expect("entry in pattern");
            pattern.values[k] += v;
        }
        pattern
    }

    /// Zero-valued matrix with the given sparsity pattern.
    pub fn pattern(n_rows: usize, n_cols: usize, entries: impl Iterator<Item = (usize, usize)>) -> Csr {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
        for (r, c) in entries {
            assert!(r < n_rows && c < n_cols, "entry ({r}, {c}) out of bounds");
            rows[r].push(c);
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Csr { n_rows, n_cols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// Storage index of entry `(r, c)`, if present in the pattern.
    #[inline]
    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[a..b].binary_search(&c).ok().map(|k| a + k)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.find(r, c).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        for (r, yr) in y.iter_mut().enumerate().take(self.n_rows) {
            let (cols, vals) = self.row(r);
            *yr = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] += v;
            }
        }
        d
    }
}

/// Reverse Cuthill-McKee permutation of a structurally symmetric matrix:
/// `perm[new] = old`.
pub fn rcm_ordering(a: &Csr) -> Vec<usize> {
    let n = a.n_rows;
    let degree: Vec<usize> = (0..n).map(|r| a.row_ptr[r + 1] - a.row_ptr[r]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        // start each component from a pseudo-peripheral node
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).expect("unvisited node");
        let start = pseudo_peripheral(a, seed, &visited);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> =
                a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
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

fn pseudo_peripheral(a: &Csr, seed: usize, blocked: &[bool]) -> usize {
    let mut root = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(a, root, blocked);
        let depth = *levels.iter().flatten().max().unwrap_or(&0);
        if depth <= ecc && root != seed {
            break;
        }
        ecc = depth;
        let last = (0..a.n_rows)
            .filter(|&i| levels[i] == Some(depth))
            .min_by_key(|&i| a.row_ptr[i + 1] - a.row_ptr[i])
            .unwrap_or(root);
        if last == root {
            break;
        }
        root = last;
    }
    root
}

fn bfs_levels(a: &Csr, root: usize, blocked: &[bool]) -> Vec<Option<usize>> {
    let mut level = vec![None; a.n_rows];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for &w in a.row(v).0 {
            if !blocked[w] && level[w].is_none() {
                level[w] = Some(lv + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Envelope Cholesky factor `P A P^T = L L^T` of a symmetric positive
/// definite matrix, rows of `L` stored contiguously from their first
/// structural nonzero to the diagonal.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors `a` using a reverse Cuthill-McKee ordering.
    pub fn factor(a: &Csr) -> Result<Self, LinalgError> {
        let perm = rcm_ordering(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &Csr, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.n_rows;
        if a.n_cols != n || perm.len() != n {
            return Err(LinalgError::Dimension { expected: n, got: perm.len() });
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old, &i) in inv.iter().enumerate() {
            for &c in a.row(old).0 {
                let j = inv[c];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for (old, &i) in inv.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }
        let mut f = SkylineCholesky { n, perm, first, start, data };
        f.factor_in_place()?;
        Ok(f)
    }

    fn factor_in_place(&mut self) -> Result<(), LinalgError> {
        let n = self.n;
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            for j in fi..i {
                let fj = self.first[j];
                let sj = self.start[j];
                let k0 = fi.max(fj);
                let len = j - k0;
                let (row_i, row_j) = if k0 < j {
                    let (lo, hi) = self.data.split_at(si);
                    (&hi[k0 - fi..k0 - fi + len], &lo[sj + k0 - fj..sj + k0 - fj + len])
                } else {
                    (&[][..], &[][..])
                };
                let dot = dot(row_i, row_j);
                let diag_j = self.data[sj + j - fj];
                let idx = si + j - fi;
                self.data[idx] = (self.data[idx] - dot) / diag_j;
            }
            let row = &self.data[si..si + i - fi];
            let d = self.data[si + i - fi] - dot(row, row);
            if !(d > 0.0) {
                return Err(LinalgError::NotPositiveDefinite { row: self.perm[i], pivot: d });
            }
            self.data[si + i - fi] = d.sqrt();
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let s = dot(&self.data[si..si + i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / self.data[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            y[i] /= self.data[si + i - fi];
            let yi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&self.data[si..si + i - fi]) {
                *yk -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators keep the loop vectorizable
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for SPD `a`, starting from `x`.
/// Stops when `|b - A x| <= rtol |b|`.
pub fn pcg<P>(a: &Csr, b: &[f64], x: &mut [f64], precond: P, rtol: f64, max_iter: usize) -> Result<CgStats, LinalgError>
where
    P: Fn(&[f64], &mut [f64]),
{
    let n = a.n_rows;
    if b.len() != n || x.len() != n {
        return Err(LinalgError::Dimension { expected: n, got: b.len().min(x.len()) });
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm2(&r) / b_norm;
    for it in 0..max_iter {
        if res <= rtol {
            return Ok(CgStats { iterations: it, relative_residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r) / b_norm;
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= rtol {
        return Ok(CgStats { iterations: max_iter, relative_residual: res });
    }
    Err(LinalgError::NoConvergence { iterations: max_iter, residual: res, tol: rtol })
}

/// Jacobi-preconditioned CG.
pub fn cg_jacobi(a: &Csr, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<CgStats, LinalgError> {
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    pcg(
        a,
        b,
        x,
        |r, z| {
            for i in 0..r.len() {
                z[i] = inv_diag[i] * r[i];
            }
        },
        rtol,
        max_iter,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplace_2d(m: usize) -> Csr {
        let idx = |i: usize, j: usize| j * m + i;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -1.0));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                }
            }
        }
        Csr::from_triplets(m * m, m * m, &t)
    }

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn rcm_is_a_permutation_and_reduces_envelope() {
        let a = laplace_2d(12);
        let mut p = rcm_ordering(&a);
        let natural = SkylineCholesky::factor_with(&a, (0..a.n_rows).collect()).unwrap();
        let rcm = SkylineCholesky::factor(&a).unwrap();
        assert!(rcm.envelope_size() <= natural.envelope_size());
        p.sort_unstable();
        assert_eq!(p, (0..a.n_rows).collect::<Vec<_>>());
    }

    #[test]
    fn cholesky_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = laplace_2d(7);
        let b: Vec<f64> = (0..a.n_rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = SkylineCholesky::factor(&a).unwrap().solve(&b);
        let oracle = dense_solve(a.to_dense(), b.clone());
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SkylineCholesky::factor(&a), Err(LinalgError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn cg_converges_to_direct_solution() {
        let a = laplace_2d(10);
        let b: Vec<f64> = (0..a.n_rows).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; a.n_rows];
        let stats = cg_jacobi(&a, &b, &mut x, 1e-12, 1000).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        let direct = SkylineCholesky::factor(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-9);
        }
        let chol = SkylineCholesky::factor(&a).unwrap();
        let mut y = vec![0.0; a.n_rows];
        let stats = pcg(&a, &b, &mut y, |r, z| chol.solve_into(r, z), 1e-12, 10).unwrap();
        assert!(stats.iterations <= 2);
    }
}
