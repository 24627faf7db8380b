//! Spin operators, permutation-symmetric ladder states and the conserved
//! `J_Z` grading that block-diagonalizes every cloning operator.
//!
//! The spin matrices are twice the conventional spin-(d−1)/2 operators, so
//! `d = 2` gives the Pauli matrices.

use crate::densemath::{digits_of, ComplexMatrix, HermitianOperator, PureState, SIZE_CAP};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct SpinOps {
    pub d: usize,
    pub sx: HermitianOperator,
    pub sy: HermitianOperator,
    pub sz: HermitianOperator,
}

/// Ladder amplitude `√((n+1)(d−n−1))` between levels `n` and `n+1`.
fn ladder(n: usize, d: usize) -> f64 {
    (((n + 1) * (d - n - 1)) as f64).sqrt()
}

/// Eigenvalue of the single-site `S^Z` on level `n`.
pub fn sz_value(n: usize, d: usize) -> i64 {
    d as i64 - 1 - 2 * n as i64
}

pub fn spin_operators(d: usize) -> Result<SpinOps> {
    if d < 2 {
        return Err(Error::arg(format!("spin dimension must be ≥ 2, got {d}")));
    }
    let mut sx = ComplexMatrix::zeros(d, d);
    let mut sy = ComplexMatrix::zeros(d, d);
    for n in 0..d - 1 {
        let c = ladder(n, d);
        sx[(n, n + 1)] = C64::new(c, 0.0);
        sx[(n + 1, n)] = C64::new(c, 0.0);
        sy[(n, n + 1)] = C64::new(0.0, -c);
        sy[(n + 1, n)] = C64::new(0.0, c);
    }
    let sz: Vec<f64> = (0..d).map(|n| sz_value(n, d) as f64).collect();
    Ok(SpinOps {
        d,
        sx: HermitianOperator::from_matrix(sx)?,
        sy: HermitianOperator::from_matrix(sy)?,
        sz: HermitianOperator::from_matrix(ComplexMatrix::diagonal(&sz))?,
    })
}

/// Collective `½Σ(S^X ∓ iS^Y)` on `m` sites of dimension `d`. `raise_level`
/// moves every site from level `n` to `n+1` (lowering `S^Z`).
pub fn apply_collective_ladder(v: &[C64], m: usize, d: usize, raise_level: bool) -> Vec<C64> {
    let dims = vec![d; m];
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (idx, &amp) in v.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let digits = digits_of(idx, &dims);
        for (site, &level) in digits.iter().enumerate() {
            let stride = d.pow((m - 1 - site) as u32);
            if raise_level && level + 1 < d {
                out[idx + stride] += amp * ladder(level, d);
            } else if !raise_level && level > 0 {
                out[idx - stride] += amp * ladder(level - 1, d);
            }
        }
    }
    out
}

/// Ladder state `|Φ^m_k⟩`: `k` applications of the collective level-raising
/// operator to `|0⟩^{⊗m}`, renormalized by `√((j+1)(m(d−1)−j))` at step `j`.
pub fn dicke_state(m: usize, d: usize, k: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::arg(format!("site dimension must be ≥ 2, got {d}")));
    }
    let top = m * (d - 1);
    if k > top {
        return Err(Error::arg(format!("excitation {k} outside 0..={top}")));
    }
    if m == 0 {
        return PureState::new(vec![C64::new(1.0, 0.0)], vec![1]);
    }
    let dim = checked_pow(d, m)?;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(1.0, 0.0);
    for j in 0..k {
        let norm = (((j + 1) * (top - j)) as f64).sqrt();
        v = apply_collective_ladder(&v, m, d, true);
        v.iter_mut().for_each(|z| *z /= norm);
    }
    PureState::normalized(v, vec![d; m])
}

pub(crate) fn checked_pow(d: usize, m: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..m {
        acc = acc
            .checked_mul(d)
            .filter(|&x| x <= SIZE_CAP)
            .ok_or(Error::Size { side: usize::MAX, cap: SIZE_CAP })?;
    }
    Ok(acc)
}

/// Basis indices grouped by `J_Z` eigenvalue (in units where a qubit has
/// `S^Z = ±1`). With `flipped` the first factor enters with a minus sign.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorPartition {
    /// Descending.
    pub sector_labels: Vec<i64>,
    pub index_groups: Vec<Vec<usize>>,
    pub input_sign: bool,
}

impl SectorPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.index_groups.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.index_groups.iter().map(Vec::len).sum()
    }
}

/// `J_Z` eigenvalue of one basis index.
pub fn jz_label(index: usize, dims: &[usize], flipped: bool) -> i64 {
    digits_of(index, dims)
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(site, (&n, &d))| {
            let v = sz_value(n, d);
            if flipped && site == 0 {
                -v
            } else {
                v
            }
        })
        .sum()
}

pub fn sector_partition(dims: &[usize], flipped: bool) -> Result<SectorPartition> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::arg("dims must be nonempty and positive"));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(Error::Size { side: usize::MAX, cap: SIZE_CAP })?;
    let mut groups: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    for idx in 0..total {
        groups.entry(jz_label(idx, dims, flipped)).or_default().push(idx);
    }
    let (sector_labels, index_groups) = groups.into_iter().rev().unzip();
    Ok(SectorPartition {
        sector_labels,
        index_groups,
        input_sign: flipped,
    })
}
