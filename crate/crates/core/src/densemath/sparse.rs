use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{inner, norm, symmetric_tridiagonal_eig, ComplexMatrix};
use crate::error::{Error, Result};
use crate::C64;

/// Hermitian matrix stored by columns; only used for the large sector blocks.
#[derive(Clone, Debug)]
pub struct SparseHermitian {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseHermitian {
    /// Builds from per-column `(row, value)` lists. Duplicate rows are summed.
    pub fn from_columns(columns: Vec<Vec<(usize, C64)>>) -> Self {
        let n = columns.len();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let mut last: Option<usize> = None;
            for (r, v) in col {
                if last == Some(r) {
                    *values.last_mut().expect("pushed with last") += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                    last = Some(r);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (j, &xj) in x.iter().enumerate() {
            if xj.re == 0.0 && xj.im == 0.0 {
                continue;
            }
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[k]] += self.values[k] * xj;
            }
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                m[(self.row_idx[k], j)] += self.values[k];
            }
        }
        m
    }

    /// Upper bound on the spectral norm (largest column 1-norm).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Largest eigenpair of a sparse Hermitian matrix by Lanczos with full
/// reorthogonalization and explicit restarts. Returns `(λ, v, ‖Hv − λv‖)`;
/// the residual is at most `rel_tol·‖H‖`.
pub fn lanczos_max(h: &SparseHermitian, rel_tol: f64, seed: u64) -> Result<(f64, Vec<C64>, f64)> {
    let n = h.side();
    if n == 0 {
        return Err(Error::arg("empty operator"));
    }
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let target = rel_tol * scale;
    let krylov_max = n.min(240);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    let mut hv = vec![C64::new(0.0, 0.0); n];
    let mut best = (f64::NAN, Vec::new(), f64::INFINITY);

    for _restart in 0..40 {
        let s = norm(&start);
        let mut basis: Vec<Vec<C64>> = vec![start.iter().map(|z| z / s).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let k = basis.len() - 1;
            h.matvec(&basis[k], &mut hv);
            let a = inner(&basis[k], &hv).re;
            alpha.push(a);
            let mut w = hv.clone();
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = inner(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= y * c);
                }
            }
            let b = norm(&w);
            let exhausted = b <= 1e-13 * scale;
            if exhausted || basis.len() == krylov_max || basis.len().is_multiple_of(8) {
                let (theta, s_vecs) = symmetric_tridiagonal_eig(&alpha, &beta)?;
                let top = theta.len() - 1;
                let s_top = &s_vecs[top];
                let estimate = b * s_top[top].abs();
                if exhausted || estimate <= 0.1 * target || basis.len() == krylov_max {
                    let mut y = vec![C64::new(0.0, 0.0); n];
                    for (coef, q) in s_top.iter().zip(&basis) {
                        y.iter_mut().zip(q).for_each(|(x, z)| *x += z * *coef);
                    }
                    let ny = norm(&y);
                    y.iter_mut().for_each(|z| *z /= ny);
                    h.matvec(&y, &mut hv);
                    let lambda = inner(&y, &hv).re;
                    let residual = hv
                        .iter()
                        .zip(&y)
                        .map(|(a, b)| (a - b * lambda).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if residual <= target {
                        return Ok((lambda, y, residual));
                    }
                    if residual < best.2 {
                        best = (lambda, y.clone(), residual);
                    }
                    if exhausted || basis.len() == krylov_max {
                        start = y;
                        break;
                    }
                }
            }
            if exhausted {
                break;
            }
            beta.push(b);
            basis.push(w.into_iter().map(|z| z / b).collect());
        }
    }
    Err(Error::numerical("Lanczos did not converge", best.2))
}
