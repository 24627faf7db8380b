//! Least-squares search for top-eigenspace mixtures with a maximally mixed
//! input marginal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::densemath::ComplexMatrix;
use crate::C64;

const MAX_ITERATIONS: usize = 400;
const COST_FLOOR: f64 = 1e-30;

/// `M_ab = Tr_out |q_a⟩⟨q_b|` for the columns `q_a` of an orthonormal basis,
/// with the input as the most significant factor.
pub(crate) struct MarginalMap {
    k: usize,
    din: usize,
    blocks: Vec<C64>,
}

impl MarginalMap {
    pub(crate) fn new(space: &ComplexMatrix, din: usize) -> Self {
        let (side, k) = (space.rows(), space.cols());
        let rest = side / din;
        let mut blocks = vec![C64::new(0.0, 0.0); k * k * din * din];
        for a in 0..k {
            for b in 0..k {
                let off = (a * k + b) * din * din;
                for r in 0..din {
                    for s in 0..din {
                        let mut acc = C64::new(0.0, 0.0);
                        for t in 0..rest {
                            acc += space[(r * rest + t, a)] * space[(s * rest + t, b)].conj();
                        }
                        blocks[off + r * din + s] = acc;
                    }
                }
            }
        }
        Self { k, din, blocks }
    }

    fn block(&self, a: usize, b: usize) -> &[C64] {
        let sz = self.din * self.din;
        let off = (a * self.k + b) * sz;
        &self.blocks[off..off + sz]
    }

    /// `Σ_j Σ_ab c_ja c̄_jb M_ab − 𝟙/d_in`.
    fn defect(&self, comps: &[Vec<C64>]) -> Vec<C64> {
        let din = self.din;
        let mut rho = vec![C64::new(0.0, 0.0); din * din];
        for c in comps {
            for a in 0..self.k {
                for b in 0..self.k {
                    let w = c[a] * c[b].conj();
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (x, m) in rho.iter_mut().zip(self.block(a, b)) {
                        *x += w * m;
                    }
                }
            }
        }
        for r in 0..din {
            rho[r * din + r] -= 1.0 / din as f64;
        }
        rho
    }
}

/// Best mixture found: coefficient vectors whose squared norms are the
/// mixture weights, and the largest entry of the marginal defect.
pub(crate) struct Fit {
    pub components: Vec<Vec<C64>>,
    pub residual: f64,
}

/// Levenberg-Marquardt on the real and imaginary parts of the marginal
/// defect, over `rank` coefficient vectors, from `restarts` seeded starts.
/// Stops early once the defect drops below `target`.
pub(crate) fn fit_marginal(map: &MarginalMap, rank: usize, restarts: usize, seed: u64, target: f64) -> Fit {
    let mut best = Fit {
        components: Vec::new(),
        residual: f64::INFINITY,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..2 * rank * map.k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= s);
        let x = levenberg_marquardt(map, rank, x);
        let comps = unpack(&x, rank, map.k);
        let residual = map.defect(&comps).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual < best.residual {
            best = Fit {
                components: comps,
                residual,
            };
        }
        if best.residual < target {
            break;
        }
    }
    best
}

fn unpack(x: &[f64], rank: usize, k: usize) -> Vec<Vec<C64>> {
    (0..rank)
        .map(|j| (0..k).map(|a| C64::new(x[2 * (j * k + a)], x[2 * (j * k + a) + 1])).collect())
        .collect()
}

fn residuals(defect: &[C64]) -> Vec<f64> {
    defect.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn cost(map: &MarginalMap, rank: usize, x: &[f64]) -> f64 {
    0.5 * residuals(&map.defect(&unpack(x, rank, map.k))).iter().map(|r| r * r).sum::<f64>()
}

/// Columns are `∂ρ/∂Re c_ja = Σ_b (c̄_jb M_ab + c_jb M_ba)` and
/// `∂ρ/∂Im c_ja = i Σ_b (c̄_jb M_ab − c_jb M_ba)`.
fn jacobian(map: &MarginalMap, comps: &[Vec<C64>]) -> Vec<Vec<f64>> {
    let sz = map.din * map.din;
    let mut cols = Vec::with_capacity(2 * comps.len() * map.k);
    for c in comps {
        for a in 0..map.k {
            let mut p = vec![C64::new(0.0, 0.0); sz];
            let mut q = vec![C64::new(0.0, 0.0); sz];
            for b in 0..map.k {
                let (mab, mba) = (map.block(a, b), map.block(b, a));
                for e in 0..sz {
                    p[e] += c[b].conj() * mab[e];
                    q[e] += c[b] * mba[e];
                }
            }
            let re: Vec<C64> = p.iter().zip(&q).map(|(u, v)| u + v).collect();
            let im: Vec<C64> = p.iter().zip(&q).map(|(u, v)| (u - v) * C64::new(0.0, 1.0)).collect();
            cols.push(residuals(&re));
            cols.push(residuals(&im));
        }
    }
    cols
}

fn levenberg_marquardt(map: &MarginalMap, rank: usize, mut x: Vec<f64>) -> Vec<f64> {
    let n = x.len();
    let mut mu = 1e-3;
    let mut f = cost(map, rank, &x);
    for _ in 0..MAX_ITERATIONS {
        if f < COST_FLOOR {
            break;
        }
        let comps = unpack(&x, rank, map.k);
        let r = residuals(&map.defect(&comps));
        let jac = jacobian(map, &comps);
        let mut jtj = vec![0.0; n * n];
        let mut g = vec![0.0; n];
        for i in 0..n {
            g[i] = jac[i].iter().zip(&r).map(|(a, b)| a * b).sum();
            for j in i..n {
                let v: f64 = jac[i].iter().zip(&jac[j]).map(|(a, b)| a * b).sum();
                jtj[i * n + j] = v;
                jtj[j * n + i] = v;
            }
        }
        let mut improved = false;
        while mu < 1e12 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[i * n + i] += mu * (1.0 + jtj[i * n + i]);
            }
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            if let Some(step) = cholesky_solve(&mut a, n, rhs) {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                let ft = cost(map, rank, &trial);
                if ft < f {
                    x = trial;
                    f = ft;
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Solves `A y = b` for symmetric positive definite `A` (overwritten).
fn cholesky_solve(a: &mut [f64], n: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k * n + i] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Some(b)
}
