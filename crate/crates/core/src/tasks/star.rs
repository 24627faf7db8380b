use crate::densemath::{
    ComplexMatrix, HermitianOperator, SparseHermitian, SIZE_CAP,
};
use crate::error::{Error, Result};
use crate::C64;

/// `c·𝟙 + Σ_n w_n T_{0,n}`: one two-site operator `T` repeated between the
/// input (factor 0) and every clone factor `n = 1..=N`.
///
/// All cloning operators in this crate have this star shape, which lets
/// matrix-vector products and sector blocks be formed without the dense
/// matrix.
#[derive(Clone, Debug)]
pub struct StarOperator {
    dims: Vec<usize>,
    identity: f64,
    local: ComplexMatrix,
    weights: Vec<f64>,
    // Nonzero entries of `local` by column: (row, value).
    local_columns: Vec<Vec<(usize, C64)>>,
    strides: Vec<usize>,
    side: usize,
}

impl StarOperator {
    /// `dims[0]` is the input dimension; every other factor has dimension
    /// `dims[1]`. `local` acts on `dims[0]·dims[1]` with the input as the
    /// most significant digit.
    pub fn new(dims: Vec<usize>, identity: f64, local: ComplexMatrix, weights: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.len() != weights.len() + 1 {
            return Err(Error::arg("star operator needs an input and one weight per clone"));
        }
        if dims[1..].iter().any(|&d| d != dims[1]) || dims.contains(&0) {
            return Err(Error::arg("clone factors must share one positive dimension"));
        }
        let pair = dims[0] * dims[1];
        if local.rows() != pair || local.cols() != pair {
            return Err(Error::arg(format!("local operator must be {pair}x{pair}")));
        }
        if local.hermiticity_defect() > 1e-12 * local.max_abs().max(1.0) {
            return Err(Error::Validation("local operator is not Hermitian".into()));
        }
        let mut side: usize = 1;
        for &d in &dims {
            side = side
                .checked_mul(d)
                .filter(|&s| s <= SIZE_CAP)
                .ok_or(Error::Size { side: usize::MAX, cap: SIZE_CAP })?;
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let local_columns = (0..pair)
            .map(|c| {
                (0..pair)
                    .filter(|&r| local[(r, c)].norm() > 0.0)
                    .map(|r| (r, local[(r, c)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            dims,
            identity,
            local,
            weights,
            local_columns,
            strides,
            side,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.identity
    }

    pub fn local(&self) -> &ComplexMatrix {
        &self.local
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same operator with the clone weights replaced.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(Error::arg("weight count mismatch"));
        }
        Ok(Self { weights, ..self.clone() })
    }

    /// Calls `f(row, value)` for every nonzero entry in column `col`.
    /// Rows may repeat; their values add.
    pub fn for_each_in_column(&self, col: usize, mut f: impl FnMut(usize, C64)) {
        if self.identity != 0.0 {
            f(col, C64::new(self.identity, 0.0));
        }
        let (d0, dc) = (self.dims[0], self.dims[1]);
        let a0 = col / self.strides[0];
        for (k, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let site = k + 1;
            let an = (col / self.strides[site]) % dc;
            let base = col - a0 * self.strides[0] - an * self.strides[site];
            for &(r, v) in &self.local_columns[a0 * dc + an] {
                let (r0, rn) = (r / dc, r % dc);
                debug_assert!(r0 < d0);
                f(base + r0 * self.strides[0] + rn * self.strides[site], v * w);
            }
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.side {
            return Err(Error::arg(format!("vector length {} != side {}", v.len(), self.side)));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.side];
        for (col, &x) in v.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            self.for_each_in_column(col, |r, a| out[r] += a * x);
        }
        Ok(out)
    }

    /// `⟨v|O|v⟩` for a normalized `v`.
    pub fn expectation(&self, v: &[C64]) -> Result<f64> {
        let ov = self.apply(v)?;
        Ok(crate::densemath::inner(v, &ov).re)
    }

    pub fn to_dense(&self, cap: usize) -> Result<HermitianOperator> {
        if self.side > cap {
            return Err(Error::Size { side: self.side, cap });
        }
        let mut m = ComplexMatrix::zeros(self.side, self.side);
        for col in 0..self.side {
            self.for_each_in_column(col, |r, a| m[(r, col)] += a);
        }
        HermitianOperator::new(m, self.dims.clone())
    }

    /// Restriction to the span of the given basis indices, which must be
    /// closed under the operator (a conserved sector).
    pub fn block_dense(&self, indices: &[usize]) -> Result<ComplexMatrix> {
        let position = self.positions(indices)?;
        let n = indices.len();
        let mut m = ComplexMatrix::zeros(n, n);
        let mut leaked = false;
        for (j, &col) in indices.iter().enumerate() {
            self.for_each_in_column(col, |r, a| match position(r) {
                Some(i) => m[(i, j)] += a,
                None => leaked = true,
            });
        }
        if leaked {
            return Err(Error::Validation("index set is not an invariant sector".into()));
        }
        Ok(m)
    }

    pub fn block_sparse(&self, indices: &[usize]) -> Result<SparseHermitian> {
        let position = self.positions(indices)?;
        let mut leaked = false;
        let columns = indices
            .iter()
            .map(|&col| {
                let mut entries = Vec::new();
                self.for_each_in_column(col, |r, a| match position(r) {
                    Some(i) => entries.push((i, a)),
                    None => leaked = true,
                });
                entries
            })
            .collect();
        if leaked {
            return Err(Error::Validation("index set is not an invariant sector".into()));
        }
        Ok(SparseHermitian::from_columns(columns))
    }

    fn positions<'a>(&self, indices: &'a [usize]) -> Result<impl Fn(usize) -> Option<usize> + 'a> {
        if indices.iter().any(|&i| i >= self.side) {
            return Err(Error::arg("basis index out of range"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("sector indices must be strictly increasing"));
        }
        Ok(move |r: usize| indices.binary_search(&r).ok())
    }
}
