//! Dense complex linear algebra on tensor-product spaces.
//!
//! Basis convention: factor 0 is the most significant digit of the
//! mixed-radix index, so `|a_0 a_1 … a_k⟩` sits at
//! `((a_0·d_1 + a_1)·d_2 + …)`.

mod eig;
mod sparse;

pub use eig::{hermitian_eig, hermitian_eig_with, symmetric_tridiagonal_eig, QL_ITERATION_BUDGET};
pub use sparse::{lanczos_max, SparseHermitian};

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::C64;

/// Largest side length any dense or structured operator may take.
pub const SIZE_CAP: usize = 1 << 20;

/// Relative tolerance used to group degenerate top eigenvalues.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::arg(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::arg("columns have different lengths"));
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::arg(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::arg(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::arg(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from another matrix of the same shape.
    pub fn max_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Commutator norm `‖AB − BA‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.max_diff(&ba))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Square Hermitian matrix on a labeled tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::arg("Hermitian operator must be square"));
        }
        if dims.iter().product::<usize>() != matrix.rows() {
            return Err(Error::arg(format!(
                "factor dims {:?} do not multiply to side {}",
                dims,
                matrix.rows()
            )));
        }
        let scale = matrix.max_abs();
        let defect = matrix.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Single-factor operator.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let side = matrix.rows();
        Self::new(matrix, vec![side])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `⟨v|H|v⟩` for an arbitrary (not necessarily normalized) vector.
    pub fn expectation(&self, v: &[C64]) -> Result<f64> {
        let hv = self.matrix.matvec(v)?;
        Ok(v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum())
    }
}

/// Normalized pure state on a labeled tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized within 1e-12.
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_layout(amplitudes.len(), &dims)?;
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "state norm² is {norm_sqr}, expected 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes the amplitudes; rejects the zero vector.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_layout(amplitudes.len(), &dims)?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes, dims })
    }

    /// Computational basis state with the given digits.
    pub fn basis(digits: &[usize], dims: Vec<usize>) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(&a, &d)| a >= d) {
            return Err(Error::arg("basis digits out of range"));
        }
        let dim = dims.iter().product();
        let mut amps = vec![ZERO; dim];
        amps[index_of(digits, &dims)] = ONE;
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            dims: self.dims.clone(),
        }
    }

    /// Reduced density matrix on the `keep` factors without forming `|ψ⟩⟨ψ|`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<HermitianOperator> {
        let layout = TraceLayout::new(&self.dims, keep)?;
        let (dk, dt) = (layout.kept_dim, layout.traced_dim);
        let mut rho = ComplexMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in r..dk {
                let mut acc = ZERO;
                for t in 0..dt {
                    acc += self.amplitudes[layout.full(r, t)]
                        * self.amplitudes[layout.full(c, t)].conj();
                }
                rho[(r, c)] = acc;
                rho[(c, r)] = acc.conj();
            }
        }
        Ok(HermitianOperator {
            matrix: rho,
            dims: layout.kept_dims,
        })
    }
}

fn check_layout(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::arg("factor dims must be nonempty and positive"));
    }
    if dims.iter().product::<usize>() != len {
        return Err(Error::arg(format!(
            "dims {dims:?} do not match {len} amplitudes"
        )));
    }
    Ok(())
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Multiplies `v` by a unit phase so that its first entry of largest
/// magnitude is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() >= peak * (1.0 - 1e-12)) {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Mixed-radix digits of a basis index.
pub fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&a, &d)| acc * d + a)
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, SIZE_CAP)
}

pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => Ok(ComplexMatrix::from_fn(r, c, |i, j| {
            a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
        })),
        (r, c) => Err(Error::Size {
            side: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
            cap,
        }),
    }
}

/// Index bookkeeping for tracing out the complement of `keep`.
struct TraceLayout {
    kept_dims: Vec<usize>,
    kept_dim: usize,
    traced_dim: usize,
    table: Vec<usize>,
}

impl TraceLayout {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::arg(format!(
                "factor {bad} out of range for {} factors",
                dims.len()
            )));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        let kept_dim: usize = kept_dims.iter().product();
        let traced_dim: usize = traced_dims.iter().product();

        let mut table = vec![0; kept_dim * traced_dim];
        let mut digits = vec![0; dims.len()];
        for r in 0..kept_dim {
            for (pos, &k) in keep.iter().zip(digits_of(r, &kept_dims).iter()) {
                digits[*pos] = k;
            }
            for t in 0..traced_dim {
                for (pos, &k) in traced.iter().zip(digits_of(t, &traced_dims).iter()) {
                    digits[*pos] = k;
                }
                table[r * traced_dim + t] = index_of(&digits, dims);
            }
        }
        Ok(Self {
            kept_dims: if kept_dims.is_empty() { vec![1] } else { kept_dims },
            kept_dim,
            traced_dim,
            table,
        })
    }

    #[inline]
    fn full(&self, kept: usize, traced: usize) -> usize {
        self.table[kept * self.traced_dim + traced]
    }
}

/// Traces out every factor not listed in `keep`. An empty `keep` yields the
/// 1×1 matrix holding the full trace.
pub fn partial_trace(op: &HermitianOperator, keep: &[usize]) -> Result<HermitianOperator> {
    let layout = TraceLayout::new(&op.dims, keep)?;
    let (dk, dt) = (layout.kept_dim, layout.traced_dim);
    let m = &op.matrix;
    let mut out = ComplexMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            out[(r, c)] = (0..dt)
                .map(|t| m[(layout.full(r, t), layout.full(c, t))])
                .sum();
        }
    }
    Ok(HermitianOperator {
        matrix: out,
        dims: layout.kept_dims,
    })
}

/// Schmidt coefficients of `psi` across the cut separating the factors in
/// `cut` from the rest, in descending order.
pub fn schmidt_coefficients(psi: &PureState, cut: &[usize]) -> Result<Vec<f64>> {
    let n = psi.dims.len();
    let mut left: Vec<usize> = cut.to_vec();
    left.sort_unstable();
    left.dedup();
    if left.is_empty() || left.len() >= n || left.iter().any(|&k| k >= n) {
        return Err(Error::arg(format!(
            "cut {cut:?} must split {n} factors into two nonempty groups"
        )));
    }
    let right: Vec<usize> = (0..n).filter(|i| !left.contains(i)).collect();
    let dl: usize = left.iter().map(|&k| psi.dims[k]).product();
    let dr: usize = right.iter().map(|&k| psi.dims[k]).product();
    let side = if dl <= dr { &left } else { &right };
    let rho = psi.reduced_density(side)?;
    let spec = hermitian_eig(&rho, DEFAULT_DEGENERACY_TOL)?;
    let mut coeffs: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&p| p.max(0.0).sqrt())
        .collect();
    coeffs.sort_by(|a, b| b.total_cmp(a));
    Ok(coeffs)
}

/// Full eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
    pub max_value: f64,
    /// Orthonormal basis of the top eigenspace, one vector per column.
    pub max_space: ComplexMatrix,
    pub degeneracy_tol: f64,
}

impl Spectrum {
    pub fn degeneracy(&self) -> usize {
        self.max_space.cols()
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.column(j)
    }

    pub fn top_vectors(&self) -> Vec<Vec<C64>> {
        (0..self.max_space.cols())
            .map(|j| self.max_space.column(j))
            .collect()
    }

    /// Largest `‖Hv − λv‖₂` over all reported pairs.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        (0..self.eigenvalues.len())
            .map(|j| {
                let v = self.vector(j);
                let hv = h.matrix().matvec(&v).expect("shape checked at construction");
                hv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * self.eigenvalues[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Dominant real eigenpair of a square (possibly non-Hermitian) matrix.
///
/// Real matrices that are diagonally similar to a symmetric one (including
/// every weighted reduced cloning matrix) are symmetrized and solved exactly;
/// for those the largest eigenvalue is returned. Anything else falls back to
/// power iteration, which reports a numerical failure when no single real
/// eigenvalue dominates.
pub fn general_max_real_eigenpair(m: &ComplexMatrix) -> Result<(f64, Vec<C64>)> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::arg("dominant eigenpair needs a nonempty square matrix"));
    }
    let n = m.rows();
    let (value, mut vector) = match symmetrizer(m) {
        Some(scale) => {
            let sym = ComplexMatrix::from_fn(n, n, |i, j| {
                C64::new(m[(i, j)].re * scale[j] / scale[i], 0.0)
            });
            // Average away the rounding asymmetry left by the scaling.
            let sym = ComplexMatrix::from_fn(n, n, |i, j| (sym[(i, j)] + sym[(j, i)]) * 0.5);
            let spec = hermitian_eig(&HermitianOperator::from_matrix(sym)?, DEFAULT_DEGENERACY_TOL)?;
            let w = spec.vector(n - 1);
            let v: Vec<C64> = w.iter().zip(&scale).map(|(z, s)| z * s).collect();
            (spec.max_value, v)
        }
        None => power_iteration(m)?,
    };
    let nv = norm(&vector);
    vector.iter_mut().for_each(|z| *z /= nv);
    if let Some(first) = vector.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        vector.iter_mut().for_each(|z| *z *= phase);
    }
    Ok((value, vector))
}

/// Diagonal `D` with `D⁻¹ M D` symmetric, when one exists for a real `M`.
fn symmetrizer(m: &ComplexMatrix) -> Option<Vec<f64>> {
    let n = m.rows();
    let scale_ref = m.max_abs().max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale_ref;
    if m.as_slice().iter().any(|z| z.im.abs() > tiny) {
        return None;
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (m[(i, j)].re, m[(j, i)].re);
            let (za, zb) = (a.abs() <= tiny, b.abs() <= tiny);
            if za != zb || (!za && a.signum() != b.signum()) {
                return None;
            }
        }
    }
    let mut scale = vec![f64::NAN; n];
    for root in 0..n {
        if !scale[root].is_nan() {
            continue;
        }
        scale[root] = 1.0;
        let mut queue = vec![root];
        while let Some(i) = queue.pop() {
            for j in 0..n {
                let a = m[(i, j)].re;
                if j == i || a.abs() <= tiny || !scale[j].is_nan() {
                    continue;
                }
                scale[j] = scale[i] * (m[(j, i)].re / a).sqrt();
                queue.push(j);
            }
        }
    }
    // Cycles in the coupling graph must be consistent.
    for i in 0..n {
        for j in 0..n {
            let s_ij = m[(i, j)].re * scale[j] / scale[i];
            let s_ji = m[(j, i)].re * scale[i] / scale[j];
            if (s_ij - s_ji).abs() > 1e-12 * scale_ref {
                return None;
            }
        }
    }
    Some(scale)
}

fn power_iteration(m: &ComplexMatrix) -> Result<(f64, Vec<C64>)> {
    let n = m.rows();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.1 / (i + 1) as f64, 0.0)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut residual = f64::INFINITY;
    for _ in 0..20_000 {
        let w = m.matvec(&v)?;
        let lambda = inner(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= 1e-13 * scale * (n as f64) {
            if lambda.im.abs() > 1e-10 * scale {
                return Err(Error::numerical("dominant eigenvalue is not real", residual));
            }
            return Ok((lambda.re, v));
        }
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok((0.0, v));
        }
        v = w.into_iter().map(|z| z / nw).collect();
    }
    Err(Error::numerical(
        "power iteration did not converge (complex or tied dominant eigenvalues)",
        residual,
    ))
}

#[cfg(test)]
mod tests;
