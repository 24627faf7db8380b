//! Hermitian eigensolver: Householder reduction to real tridiagonal form
//! followed by implicit QL with Wilkinson-style shifts.
//!
//! Real symmetric input takes an all-`f64` path; complex Hermitian input
//! carries complex reflectors and a diagonal phase that makes the
//! tridiagonal real.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::{fix_phase, ComplexMatrix, HermitianOperator, Spectrum, SIZE_CAP};
use crate::error::{Error, Result};
use crate::C64;

/// Maximum QL sweeps spent on any single eigenvalue.
pub const QL_ITERATION_BUDGET: usize = 60;

pub(crate) trait Scalar:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn to_c64(self) -> C64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        C64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_c64(self) -> C64 {
        self
    }
}

/// Unit-modulus phase of `x`, or 1 for zero.
fn phase_of<S: Scalar>(x: S) -> S {
    let r = x.norm_sqr().sqrt();
    if r == 0.0 {
        S::from_re(1.0)
    } else {
        x.scale(1.0 / r)
    }
}

struct Reflector<S> {
    v: Vec<S>,
    tau: f64,
}

/// Reduces the Hermitian matrix `a` (row-major, overwritten) to tridiagonal
/// form `Q T Q†`. Returns the diagonal, the (complex) subdiagonal and the
/// reflectors whose product is `Q`.
fn tridiagonalize<S: Scalar>(a: &mut [S], n: usize) -> (Vec<f64>, Vec<S>, Vec<Reflector<S>>) {
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![S::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // x = column k below the diagonal, read from row k.
        let mut v: Vec<S> = (k + 1..n).map(|j| a[k * n + j].conj()).collect();
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            sub.push(v[0]);
            reflectors.push(Reflector { v, tau: 0.0 });
            continue;
        }
        let x0 = v[0];
        let norm = (x0.norm_sqr() + tail).sqrt();
        let ph = phase_of(x0);
        let alpha = -ph.scale(norm);
        v[0] = x0 - alpha;
        let tau = 2.0 / (v[0].norm_sqr() + tail);
        sub.push(alpha);

        // p = τ B v on the trailing block B = a[k+1.., k+1..].
        let off = k + 1;
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            let mut acc = S::zero();
            for (b, &vj) in row.iter().zip(&v) {
                acc += *b * vj;
            }
            p[i] = acc.scale(tau);
        }
        let vp: f64 = v
            .iter()
            .zip(&p[..m])
            .map(|(&vi, &pi)| (vi.conj() * pi).to_c64().re)
            .sum();
        let half = 0.5 * tau * vp;
        let w: Vec<S> = (0..m).map(|i| p[i] - v[i].scale(half)).collect();
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for ((b, &vj), &wj) in row.iter_mut().zip(&v).zip(&w) {
                *b -= vi * wj.conj() + wi * vj.conj();
            }
        }
        reflectors.push(Reflector { v, tau });
    }
    let diag = (0..n).map(|i| a[i * n + i].to_c64().re).collect();
    (diag, sub, reflectors)
}

/// Builds `Q = H_0 H_1 ⋯` explicitly (row-major).
fn accumulate<S: Scalar>(n: usize, reflectors: &[Reflector<S>]) -> Vec<S> {
    let mut q = vec![S::zero(); n * n];
    for i in 0..n {
        q[i * n + i] = S::from_re(1.0);
    }
    let mut s = vec![S::zero(); n];
    for (k, r) in reflectors.iter().enumerate().rev() {
        if r.tau == 0.0 {
            continue;
        }
        let off = k + 1;
        let cols = off..n;
        s[off..n].iter_mut().for_each(|z| *z = S::zero());
        for (i, &vi) in r.v.iter().enumerate() {
            let vc = vi.conj();
            let row = &q[(off + i) * n..(off + i + 1) * n];
            for c in cols.clone() {
                s[c] += vc * row[c];
            }
        }
        for c in cols.clone() {
            s[c] = s[c].scale(r.tau);
        }
        for (i, &vi) in r.v.iter().enumerate() {
            let row = &mut q[(off + i) * n..(off + i + 1) * n];
            for c in cols.clone() {
                row[c] -= vi * s[c];
            }
        }
    }
    q
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[i]` couples `i`
/// and `i+1`. When `rows` is given, each rotation is applied to pairs of its
/// rows, which therefore end up holding the eigenvectors (one per row).
fn tql<S: Scalar>(d: &mut [f64], e: &mut [f64], mut rows: Option<&mut [S]>, budget: usize) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let width = rows.as_ref().map_or(0, |r| r.len() / n);
    let mut e_full = vec![0.0; n];
    e_full[..n - 1].copy_from_slice(&e[..n - 1]);
    let e = &mut e_full;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > budget {
                return Err(Error::numerical(
                    format!("QL iteration budget exhausted at index {l}"),
                    e[l].abs(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * width);
                    let zi = &mut lo[i * width..];
                    let zi1 = &mut hi[..width];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *b = x.scale(s) + y.scale(c);
                        *a = x.scale(c) - y.scale(s);
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix: returns the
/// ascending eigenvalues and, per eigenvalue, its eigenvector.
pub fn symmetric_tridiagonal_eig(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if off.len() + 1 != n && !(n == 0 && off.is_empty()) {
        return Err(Error::arg("off-diagonal must have length n-1"));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut z), QL_ITERATION_BUDGET)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect();
    Ok((values, vectors))
}

fn eig_generic<S: Scalar>(mut a: Vec<S>, n: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    let (mut d, sub, reflectors) = tridiagonalize(&mut a, n);
    drop(a);
    let q = accumulate(n, &reflectors);
    drop(reflectors);

    // Phases that turn the complex subdiagonal real.
    let mut phase = vec![S::from_re(1.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let mag = sub[k].norm_sqr().sqrt();
        e[k] = mag;
        phase[k + 1] = if mag == 0.0 {
            phase[k]
        } else {
            phase[k] * sub[k].scale(1.0 / mag)
        };
    }
    // Rows of zt are eigenvector candidates: zt[j][i] = Q[i][j]·φ_j.
    let mut zt = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            zt[j * n + i] = q[i * n + j] * phase[j];
        }
    }
    drop(q);
    tql(&mut d, &mut e, Some(&mut zt), QL_ITERATION_BUDGET)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let mut vecs = vec![C64::new(0.0, 0.0); n * n];
    for (col, &j) in order.iter().enumerate() {
        let mut v: Vec<C64> = zt[j * n..(j + 1) * n].iter().map(|z| z.to_c64()).collect();
        fix_phase(&mut v);
        for (i, z) in v.into_iter().enumerate() {
            vecs[i * n + col] = z;
        }
    }
    Ok((values, vecs))
}

/// Full spectrum with the default size cap.
pub fn hermitian_eig(h: &HermitianOperator, degeneracy_tol: f64) -> Result<Spectrum> {
    hermitian_eig_with(h, degeneracy_tol, SIZE_CAP)
}

/// Full spectrum of `h`, ascending, with phase-fixed orthonormal
/// eigenvectors. The top eigenspace groups every eigenvalue within
/// `degeneracy_tol·max(1, |λ_max|)` of the maximum.
pub fn hermitian_eig_with(h: &HermitianOperator, degeneracy_tol: f64, cap: usize) -> Result<Spectrum> {
    let n = h.side();
    if n > cap {
        return Err(Error::Size { side: n, cap });
    }
    if n == 0 {
        return Err(Error::arg("empty operator"));
    }
    let m = h.matrix();
    let (values, vecs) = if m.is_real() {
        let a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
        eig_generic(a, n)?
    } else {
        eig_generic(m.as_slice().to_vec(), n)?
    };
    let eigenvectors = ComplexMatrix::new(n, n, vecs)?;
    let max_value = values[n - 1];
    let cutoff = max_value - degeneracy_tol * max_value.abs().max(1.0);
    let top: Vec<usize> = (0..n).filter(|&j| values[j] >= cutoff).collect();
    let max_space = ComplexMatrix::from_fn(n, top.len(), |i, c| eigenvectors[(i, top[c])]);
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors,
        max_value,
        max_space,
        degeneracy_tol,
    })
}
