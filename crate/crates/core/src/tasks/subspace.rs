use crate::densemath::{digits_of, hermitian_eig, index_of, ComplexMatrix, HermitianOperator, PureState};
use crate::error::{Error, Result};
use crate::spinsym::{checked_pow, dicke_state};
use crate::C64;

use super::Weights;

/// Largest reduced basis the subspace route will build.
pub const SUBSPACE_CAP: usize = 4096;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// `|B⟩_{0,n}|Φ⟩` for clone `n` (0-based).
    Clone(usize),
    /// Weight-`M` bit string; entry `k` is clone `k`.
    Bits(Vec<bool>),
}

/// A reduced eigenproblem on the span of a non-orthogonal family of states.
///
/// `coeff_matrix` is the reduced matrix in its usual orientation and `gram`
/// holds the overlaps of the spanning states. Neither depends on the sector
/// index of the states.
#[derive(Clone, Debug)]
pub struct SubspaceProblem {
    pub coeff_matrix: ComplexMatrix,
    pub gram: ComplexMatrix,
    pub labels: Vec<BasisLabel>,
    /// Number of clones of the full task.
    pub clones: usize,
    // The matrix acting on coefficient vectors is `coeff_matrix` (1→N) or
    // its transpose (M→N).
    transposed: bool,
}

impl SubspaceProblem {
    /// Matrix `A` with `R Σβ_a|a⟩ = Σ(Aβ)_a|a⟩`.
    pub fn action(&self) -> ComplexMatrix {
        if self.transposed {
            self.coeff_matrix.transpose()
        } else {
            self.coeff_matrix.clone()
        }
    }

    /// Largest eigenvalue of the action and its eigenvector, normalized so
    /// that `βᵀGβ = 1` and `Σβ ≥ 0`.
    ///
    /// Solved as the symmetric pencil `(GA, G)` after Cholesky whitening, so
    /// zero weights need no special treatment.
    pub fn dominant(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.gram.rows();
        let g = real_entries(&self.gram);
        let a = real_entries(&self.action());
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let gik = g[i * n + k];
                if gik != 0.0 {
                    for j in 0..n {
                        h[i * n + j] += gik * a[k * n + j];
                    }
                }
            }
        }
        let scale = h.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (h[i * n + j] - h[j * n + i]).abs() > 1e-10 * scale {
                    return Err(Error::numerical(
                        "reduced matrix is not self-adjoint in the Gram metric",
                        (h[i * n + j] - h[j * n + i]).abs(),
                    ));
                }
            }
        }
        let l = cholesky(&g, n)?;
        // W = L⁻¹ H L⁻ᵀ, column by column.
        let mut tmp = vec![0.0; n * n];
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| h[i * n + j]).collect();
            let y = forward(&l, n, &col);
            for i in 0..n {
                tmp[i * n + j] = y[i];
            }
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            let y = forward(&l, n, &tmp[i * n..(i + 1) * n]);
            for j in 0..n {
                w[i * n + j] = y[j];
            }
        }
        let sym = ComplexMatrix::from_fn(n, n, |i, j| C64::new(0.5 * (w[i * n + j] + w[j * n + i]), 0.0));
        let spec = hermitian_eig(&HermitianOperator::from_matrix(sym)?, crate::densemath::DEFAULT_DEGENERACY_TOL)?;
        let top: Vec<f64> = spec.vector(n - 1).iter().map(|z| z.re).collect();
        let mut beta = backward_transposed(&l, n, &top);
        let norm2 = quad_form(&g, n, &beta);
        let sign = if beta.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        beta.iter_mut().for_each(|b| *b *= sign / norm2.sqrt());
        Ok((spec.max_value, beta))
    }

    /// Reduced coefficients spread over all `N` clones (1→N only); dropped
    /// clones get 0.
    pub fn expand_clone_beta(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.clones];
        for (label, &b) in self.labels.iter().zip(beta) {
            match label {
                BasisLabel::Clone(k) => out[*k] = b,
                BasisLabel::Bits(_) => return Err(Error::arg("expansion applies to 1→N problems")),
            }
        }
        Ok(out)
    }
}

fn real_entries(m: &ComplexMatrix) -> Vec<f64> {
    m.as_slice().iter().map(|z| z.re).collect()
}

fn quad_form(g: &[f64], n: usize, v: &[f64]) -> f64 {
    (0..n)
        .map(|i| v[i] * (0..n).map(|j| g[i * n + j] * v[j]).sum::<f64>())
        .sum()
}

fn cholesky(g: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = g[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 1e-14 {
            return Err(Error::numerical("Gram matrix is not positive definite", d));
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L y = b`.
fn forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    y
}

/// Solves `Lᵀ x = b`.
fn backward_transposed(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (b[i] - s) / l[i * n + i];
    }
    x
}

/// Reduced `1 → N` matrix `α_n(1 + (d−1)δ_{nm})` over clones with `α_n > 0`.
pub fn subspace_matrix_1n(d: usize, n: usize, alpha: &Weights) -> Result<SubspaceProblem> {
    if d < 2 || n < 1 || alpha.len() != n {
        return Err(Error::arg(format!("need d ≥ 2 and {n} weights")));
    }
    let kept: Vec<usize> = (0..n).filter(|&k| alpha.as_slice()[k] > 0.0).collect();
    if kept.is_empty() {
        return Err(Error::arg("all weights are zero"));
    }
    let r = kept.len();
    let extra = (d - 1) as f64;
    let coeff = ComplexMatrix::from_fn(r, r, |i, j| {
        let delta = if i == j { extra } else { 0.0 };
        C64::new(alpha.as_slice()[kept[i]] * (1.0 + delta), 0.0)
    });
    let gram = ComplexMatrix::from_fn(r, r, |i, j| {
        let delta = if i == j { extra } else { 0.0 };
        C64::new((1.0 + delta) / d as f64, 0.0)
    });
    Ok(SubspaceProblem {
        coeff_matrix: coeff,
        gram,
        labels: kept.into_iter().map(BasisLabel::Clone).collect(),
        clones: n,
        transposed: false,
    })
}

/// Weight-`m` strings of length `n` in increasing integer order, clone 0 as
/// the most significant bit.
pub(crate) fn weight_strings(m: usize, n: usize) -> Vec<Vec<bool>> {
    (0u64..1 << n)
        .filter(|x| x.count_ones() as usize == m)
        .map(|x| (0..n).map(|k| (x >> (n - 1 - k)) & 1 == 1).collect())
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Reduced `M → N` matrix over weight-`M` bit strings.
pub fn subspace_matrix_mn(m: usize, n: usize, alpha: &Weights) -> Result<SubspaceProblem> {
    if m < 1 || m >= n || alpha.len() != n {
        return Err(Error::arg(format!("need 1 ≤ M < N and N weights, got M={m}, N={n}")));
    }
    let size = binomial(n, m);
    if n > 63 || size > SUBSPACE_CAP {
        return Err(Error::Size { side: size, cap: SUBSPACE_CAP });
    }
    let strings = weight_strings(m, n);
    let a = alpha.as_slice();
    let mf = m as f64;
    let overlap = |x: &[bool], y: &[bool]| x.iter().zip(y).filter(|(p, q)| **p && **q).count();
    let coeff = ComplexMatrix::from_fn(size, size, |i, j| {
        let (x, y) = (&strings[i], &strings[j]);
        let v = if i == j {
            let present: f64 = (0..n).filter(|&k| x[k]).map(|k| a[k]).sum();
            1.0 / (mf + 2.0) + (mf + 1.0) / (mf + 2.0) * present
        } else if overlap(x, y) == m - 1 {
            let k = (0..n).find(|&k| !x[k] && y[k]).expect("strings differ in two places");
            a[k] / (mf + 2.0)
        } else {
            0.0
        };
        C64::new(v, 0.0)
    });
    let gram = ComplexMatrix::from_fn(size, size, |i, j| {
        C64::new(1.0 / (m + 1 - overlap(&strings[i], &strings[j])) as f64, 0.0)
    });
    Ok(SubspaceProblem {
        coeff_matrix: coeff,
        gram,
        labels: strings.into_iter().map(BasisLabel::Bits).collect(),
        clones: n,
        transposed: true,
    })
}

/// Symmetric state `|Φ⟩` on the `N − 1` clones not paired with the input.
#[derive(Clone, Debug)]
pub enum PhiChoice {
    /// `(1/√d) Σ_j |j⟩^{⊗(N−1)}`.
    GhzType,
    /// The ladder state with the sector's excitation count.
    DickeLadder,
    Custom(PureState),
}

/// Scales `β` so that `(Σβ)² + (d−1)Σβ² = d`.
pub fn rescale_beta_1n(d: usize, beta: &[f64]) -> Result<Vec<f64>> {
    let s: f64 = beta.iter().sum();
    let q: f64 = beta.iter().map(|b| b * b).sum();
    let norm = s * s + (d as f64 - 1.0) * q;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::arg("β must be finite and nonzero"));
    }
    let c = (d as f64 / norm).sqrt();
    Ok(beta.iter().map(|b| b * c).collect())
}

/// Largest deviation of a state from invariance under adjacent site swaps.
pub(crate) fn permutation_defect(psi: &PureState) -> f64 {
    let dims = psi.dims();
    let amps = psi.amplitudes();
    let mut worst = 0.0f64;
    for site in 0..dims.len().saturating_sub(1) {
        if dims[site] != dims[site + 1] {
            return f64::INFINITY;
        }
        for (idx, a) in amps.iter().enumerate() {
            let mut digits = digits_of(idx, dims);
            digits.swap(site, site + 1);
            worst = worst.max((a - amps[index_of(&digits, dims)]).norm());
        }
    }
    worst
}

/// `Σ_n β_n |B⟩_{0,n}|Φ⟩_{others}` on `d^{N+1}` amplitudes; `i` selects the
/// excitation of the ladder `Φ`.
pub fn embed_state_1n(d: usize, n: usize, beta: &[f64], i: usize, phi: &PhiChoice) -> Result<PureState> {
    if d < 2 || n < 1 || beta.len() != n {
        return Err(Error::arg(format!("need d ≥ 2 and {n} coefficients")));
    }
    let rest = n - 1;
    let phi_state = match phi {
        PhiChoice::GhzType => {
            let size = checked_pow(d, rest)?;
            let mut v = vec![C64::new(0.0, 0.0); size];
            if rest == 0 {
                v[0] = C64::new(1.0, 0.0);
            } else {
                let step = (size - 1) / (d - 1);
                let amp = 1.0 / (d as f64).sqrt();
                for j in 0..d {
                    v[j * step] = C64::new(amp, 0.0);
                }
            }
            PureState::new(v, if rest == 0 { vec![1] } else { vec![d; rest] })?
        }
        PhiChoice::DickeLadder => {
            let top = (d - 1) * rest;
            if i > top {
                return Err(Error::arg(format!("sector index {i} outside 0..={top}")));
            }
            dicke_state(rest, d, i)?
        }
        PhiChoice::Custom(state) => {
            let expected: Vec<usize> = if rest == 0 { vec![1] } else { vec![d; rest] };
            if state.dims() != expected.as_slice() {
                return Err(Error::Validation(format!(
                    "custom Φ has dims {:?}, expected {:?}",
                    state.dims(),
                    expected
                )));
            }
            let defect = permutation_defect(state);
            if defect > SYMMETRY_TOL {
                return Err(Error::Validation(format!("custom Φ is not permutation symmetric (defect {defect:e})")));
            }
            state.clone()
        }
    };
    let beta = rescale_beta_1n(d, beta)?;
    let dims = vec![d; n + 1];
    let size = checked_pow(d, n + 1)?;
    let mut out = vec![C64::new(0.0, 0.0); size];
    let amp_b = 1.0 / (d as f64).sqrt();
    let phi_dims = vec![d; rest];
    let mut digits = vec![0usize; n + 1];
    for (k, &b) in beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        for (p_idx, &p) in phi_state.amplitudes().iter().enumerate() {
            if p.norm_sqr() == 0.0 {
                continue;
            }
            let pd = digits_of(p_idx, &phi_dims);
            let mut others = pd.iter();
            for (site, slot) in digits.iter_mut().enumerate().skip(1) {
                if site != k + 1 {
                    *slot = *others.next().expect("N − 1 digits");
                }
            }
            for a in 0..d {
                digits[0] = a;
                digits[k + 1] = a;
                out[index_of(&digits, &dims)] += p * (b * amp_b);
            }
        }
    }
    PureState::normalized(out, dims)
}

/// `Σ_x β_x |ψ_{x,i}⟩` on the `(M+1)·2^N` space, normalized through the
/// Gram matrix.
pub fn embed_state_mn(m: usize, n: usize, beta: &[f64], i: usize) -> Result<PureState> {
    if m < 1 || m >= n {
        return Err(Error::arg(format!("need 1 ≤ M < N, got M={m}, N={n}")));
    }
    if i > n - m {
        return Err(Error::arg(format!("sector index {i} outside 0..={}", n - m)));
    }
    let strings = weight_strings(m, n);
    if beta.len() != strings.len() {
        return Err(Error::arg(format!("expected {} coefficients, got {}", strings.len(), beta.len())));
    }
    let mut dims = vec![m + 1];
    dims.extend(std::iter::repeat_n(2, n));
    let size = (m + 1) * checked_pow(2, n)?;
    let rest = dicke_state(n - m, 2, i)?;
    let ladders: Vec<PureState> = (0..=m).map(|k| dicke_state(m, 2, k)).collect::<Result<_>>()?;
    let amp = 1.0 / ((m + 1) as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); size];
    let mut digits = vec![0usize; n + 1];
    for (x, &b) in strings.iter().zip(beta) {
        if b == 0.0 {
            continue;
        }
        let on: Vec<usize> = (0..n).filter(|&k| x[k]).collect();
        let off: Vec<usize> = (0..n).filter(|&k| !x[k]).collect();
        for (k, ladder) in ladders.iter().enumerate() {
            digits[0] = k;
            for (li, &la) in ladder.amplitudes().iter().enumerate() {
                if la.norm_sqr() == 0.0 {
                    continue;
                }
                for (slot, bit) in on.iter().zip(digits_of(li, &vec![2; m])) {
                    digits[slot + 1] = bit;
                }
                for (ri, &ra) in rest.amplitudes().iter().enumerate() {
                    if ra.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (slot, bit) in off.iter().zip(digits_of(ri, &vec![2; n - m])) {
                        digits[slot + 1] = bit;
                    }
                    out[index_of(&digits, &dims)] += la * ra * (amp * b);
                }
            }
        }
    }
    let problem_gram = |a: &[bool], c: &[bool]| {
        1.0 / (m + 1 - a.iter().zip(c).filter(|(p, q)| **p && **q).count()) as f64
    };
    let norm2: f64 = strings
        .iter()
        .zip(beta)
        .flat_map(|(x, bx)| strings.iter().zip(beta).map(move |(z, bz)| (x, z, bx * bz)))
        .map(|(x, z, w)| w * problem_gram(x, z))
        .sum();
    if !(norm2 > 0.0) {
        return Err(Error::arg("β must be nonzero"));
    }
    let s = norm2.sqrt();
    out.iter_mut().for_each(|z| *z /= s);
    PureState::new(out, dims)
}
