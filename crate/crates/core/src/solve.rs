//! Optimal fidelities by dense diagonalization, by `J_Z` sector blocks, by
//! the reduced subspace matrices, and from closed forms.

use rayon::prelude::*;

use crate::densemath::{
    hermitian_eig, lanczos_max, ComplexMatrix, HermitianOperator, PureState, DEFAULT_DEGENERACY_TOL,
};
use crate::error::{Error, Result};
use crate::spinsym::{jz_label, sector_partition};
use crate::tasks::{
    build_r_capped, embed_state_1n, embed_state_mn, subspace_matrix_1n, subspace_matrix_mn, CloningTask,
    PhiChoice, Variant,
};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Dense,
    Blocked,
    Subspace,
    ClosedForm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Blocked => "blocked",
            Method::Subspace => "subspace",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Largest side for the dense route.
    pub dense_cap: usize,
    /// Largest side for the blocked route.
    pub blocked_cap: usize,
    /// Sector blocks above this size use Lanczos instead of a dense solve.
    pub dense_block_limit: usize,
    /// Relative tolerance for grouping the top eigenvalues.
    pub degeneracy_tol: f64,
    /// Relative residual target for Lanczos.
    pub lanczos_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_cap: 4096,
            blocked_cap: 1 << 17,
            dense_block_limit: 1024,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            lanczos_tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FidelityReport {
    pub task: CloningTask,
    pub fidelity: f64,
    pub per_clone: Vec<f64>,
    /// Dominant eigenvalue of the reduced matrix (subspace route).
    pub lambda_sub: Option<f64>,
    /// Dimension of the top eigenspace, when the route can count it.
    pub degeneracy: Option<usize>,
    pub method: Method,
    /// `‖Rψ − Fψ‖₂` of the reported state, or of the reduced problem.
    pub residual: f64,
    /// `J_Z` label of the reported state.
    pub sector: Option<i64>,
    pub state: Option<PureState>,
}

pub fn optimal_fidelity(task: &CloningTask, method: Method) -> Result<FidelityReport> {
    optimal_fidelity_with(task, method, &SolverConfig::default())
}

pub fn optimal_fidelity_with(task: &CloningTask, method: Method, config: &SolverConfig) -> Result<FidelityReport> {
    match method {
        Method::Dense => dense(task, config),
        Method::Blocked => blocked(task, config),
        Method::Subspace => subspace(task, config),
        Method::ClosedForm => closed(task),
    }
}

fn per_clone_on(task: &CloningTask, psi: &[C64]) -> Result<Vec<f64>> {
    (0..task.variant.clones())
        .map(|k| task.clone_operator(k)?.expectation(psi))
        .collect()
}

fn residual_of(task: &CloningTask, psi: &[C64], value: f64) -> Result<f64> {
    let rv = task.operator()?.apply(psi)?;
    Ok(rv.iter().zip(psi).map(|(a, b)| (a - b * value).norm_sqr()).sum::<f64>().sqrt())
}

fn dense(task: &CloningTask, config: &SolverConfig) -> Result<FidelityReport> {
    let r = build_r_capped(task, config.dense_cap)?;
    let spec = hermitian_eig(&r, config.degeneracy_tol)?;
    let (vector, label) = sector_pure_top(&spec.max_space, &task.dims());
    let fidelity = spec.max_value;
    let residual = residual_of(task, &vector, fidelity)?;
    Ok(FidelityReport {
        task: task.clone(),
        fidelity,
        per_clone: per_clone_on(task, &vector)?,
        lambda_sub: None,
        degeneracy: Some(spec.degeneracy()),
        method: Method::Dense,
        residual,
        sector: Some(label),
        state: Some(PureState::normalized(vector, task.dims())?),
    })
}

/// A vector of the top eigenspace with definite `J_Z`, choosing the
/// smallest `|J_Z|` (positive on ties).
fn sector_pure_top(space: &ComplexMatrix, dims: &[usize]) -> (Vec<C64>, i64) {
    let (side, k) = (space.rows(), space.cols());
    let labels: Vec<f64> = (0..side).map(|i| jz_label(i, dims, true) as f64).collect();
    let jz = ComplexMatrix::from_fn(k, k, |a, b| {
        (0..side).map(|i| space[(i, a)].conj() * space[(i, b)] * labels[i]).sum()
    });
    let jz = ComplexMatrix::from_fn(k, k, |a, b| (jz[(a, b)] + jz[(b, a)].conj()) * 0.5);
    let spec = hermitian_eig(&HermitianOperator::from_matrix(jz).expect("Hermitian by construction"), 1e-9)
        .expect("small Hermitian eigenproblem");
    let pick = (0..k)
        .min_by(|&a, &b| {
            let (x, y) = (spec.eigenvalues[a], spec.eigenvalues[b]);
            x.abs().total_cmp(&y.abs()).then(y.total_cmp(&x))
        })
        .expect("nonempty top space");
    let u = spec.vector(pick);
    let mut v: Vec<C64> = (0..side).map(|i| (0..k).map(|a| space[(i, a)] * u[a]).sum()).collect();
    crate::densemath::fix_phase(&mut v);
    (v, spec.eigenvalues[pick].round() as i64)
}

/// Dominant eigenpair of one `J_Z` sector.
#[derive(Clone, Debug)]
pub struct SectorResult {
    pub label: i64,
    pub indices: Vec<usize>,
    pub max_value: f64,
    /// Block-local dominant eigenvector, phase-fixed.
    pub vector: Vec<C64>,
    /// Top multiplicity inside the block (1 when solved by Lanczos).
    pub degeneracy: usize,
    pub residual: f64,
    pub lanczos: bool,
}

/// Diagonalizes every sector block of `R`, in label order.
pub fn sector_spectra(task: &CloningTask, config: &SolverConfig) -> Result<Vec<SectorResult>> {
    let side = task.side().unwrap_or(usize::MAX);
    if side > config.blocked_cap {
        return Err(Error::Size { side, cap: config.blocked_cap });
    }
    let op = task.operator()?;
    let part = sector_partition(&task.dims(), true)?;
    let jobs: Vec<(usize, i64, Vec<usize>)> = part
        .sector_labels
        .into_iter()
        .zip(part.index_groups)
        .enumerate()
        .map(|(k, (l, g))| (k, l, g))
        .collect();
    jobs.into_par_iter()
        .map(|(k, label, indices)| {
            if indices.len() <= config.dense_block_limit {
                let block = op.block_dense(&indices)?;
                let spec = hermitian_eig(&HermitianOperator::from_matrix(block)?, config.degeneracy_tol)?;
                let mut vector = spec.max_space.column(0);
                crate::densemath::fix_phase(&mut vector);
                let residual = block_residual(&op.block_dense(&indices)?, &vector, spec.max_value);
                Ok(SectorResult {
                    label,
                    indices,
                    max_value: spec.max_value,
                    vector,
                    degeneracy: spec.degeneracy(),
                    residual,
                    lanczos: false,
                })
            } else {
                let block = op.block_sparse(&indices)?;
                let (value, mut vector, residual) =
                    lanczos_max(&block, config.lanczos_tol, config.seed ^ (k as u64).wrapping_mul(0x9e37_79b9))?;
                crate::densemath::fix_phase(&mut vector);
                Ok(SectorResult {
                    label,
                    indices,
                    max_value: value,
                    vector,
                    degeneracy: 1,
                    residual,
                    lanczos: true,
                })
            }
        })
        .collect()
}

fn block_residual(block: &ComplexMatrix, v: &[C64], value: f64) -> f64 {
    let bv = block.matvec(v).expect("square block");
    bv.iter().zip(v).map(|(a, b)| (a - b * value).norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of `R` over all sectors, its full-space eigenvector,
/// and the sector label it was taken from (smallest `|J_Z|` among the
/// maximizing sectors, positive on ties).
pub fn blocked_max_eigenpair(task: &CloningTask) -> Result<(f64, Vec<C64>, i64)> {
    let (best, _, _) = blocked_top(task, &SolverConfig::default())?;
    let side = task.side().expect("checked by sector_spectra");
    Ok((best.max_value, expand(&best, side), best.label))
}

fn expand(s: &SectorResult, side: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); side];
    for (&i, &a) in s.indices.iter().zip(&s.vector) {
        v[i] = a;
    }
    v
}

fn blocked_top(task: &CloningTask, config: &SolverConfig) -> Result<(SectorResult, usize, bool)> {
    let sectors = sector_spectra(task, config)?;
    let top = sectors.iter().map(|s| s.max_value).fold(f64::NEG_INFINITY, f64::max);
    let cut = top - config.degeneracy_tol * top.abs().max(1.0);
    let winners: Vec<&SectorResult> = sectors.iter().filter(|s| s.max_value >= cut).collect();
    let degeneracy = winners.iter().map(|s| s.degeneracy).sum();
    let any_lanczos = winners.iter().any(|s| s.lanczos);
    let best = winners
        .iter()
        .min_by(|a, b| a.label.abs().cmp(&b.label.abs()).then(b.label.cmp(&a.label)))
        .expect("at least one sector");
    Ok(((*best).clone(), degeneracy, any_lanczos))
}

fn blocked(task: &CloningTask, config: &SolverConfig) -> Result<FidelityReport> {
    let (best, degeneracy, _) = blocked_top(task, config)?;
    let side = task.side().expect("checked by sector_spectra");
    let vector = expand(&best, side);
    Ok(FidelityReport {
        task: task.clone(),
        fidelity: best.max_value,
        per_clone: per_clone_on(task, &vector)?,
        lambda_sub: None,
        degeneracy: Some(degeneracy),
        method: Method::Blocked,
        residual: best.residual,
        sector: Some(best.label),
        state: Some(PureState::normalized(vector, task.dims())?),
    })
}

/// `F_n = 1/(d+1) + ((d−1)β_n + Σβ)²/(d(d+1))` for `β` normalized by
/// `(Σβ)² + (d−1)Σβ² = d`.
pub fn per_clone_from_beta_1n(d: usize, beta: &[f64]) -> Vec<f64> {
    let df = d as f64;
    let s: f64 = beta.iter().sum();
    beta.iter()
        .map(|b| 1.0 / (df + 1.0) + ((df - 1.0) * b + s).powi(2) / (df * (df + 1.0)))
        .collect()
}

fn subspace(task: &CloningTask, config: &SolverConfig) -> Result<FidelityReport> {
    let side = task.side().unwrap_or(usize::MAX);
    let embed = side <= config.blocked_cap;
    match task.variant {
        Variant::UniversalQudit { d, n } => {
            let p = subspace_matrix_1n(d, n, &task.weights)?;
            let (lambda, beta) = p.dominant()?;
            let beta = p.expand_clone_beta(&beta)?;
            let fidelity = (1.0 + lambda) / (d as f64 + 1.0);
            let reduced_residual = reduced_residual(&p.action(), &beta_on_labels(&p, &beta), lambda);
            let (per_clone, residual, state, sector) = if embed {
                let psi = embed_state_1n(d, n, &beta, 0, &PhiChoice::DickeLadder)?;
                let r = residual_of(task, psi.amplitudes(), fidelity)?;
                let label = ((d - 1) * (n - 1)) as i64;
                (per_clone_on(task, psi.amplitudes())?, r, Some(psi), Some(label))
            } else {
                (per_clone_from_beta_1n(d, &beta), reduced_residual, None, None)
            };
            Ok(FidelityReport {
                task: task.clone(),
                fidelity,
                per_clone,
                lambda_sub: Some(lambda),
                degeneracy: None,
                method: Method::Subspace,
                residual,
                sector,
                state,
            })
        }
        Variant::ManyToN { m, n } => {
            let p = subspace_matrix_mn(m, n, &task.weights)?;
            let (lambda, beta) = p.dominant()?;
            if !embed {
                return Err(Error::Size { side, cap: config.blocked_cap });
            }
            let psi = embed_state_mn(m, n, &beta, 0)?;
            let residual = residual_of(task, psi.amplitudes(), lambda)?;
            Ok(FidelityReport {
                task: task.clone(),
                fidelity: lambda,
                per_clone: per_clone_on(task, psi.amplitudes())?,
                lambda_sub: Some(lambda),
                degeneracy: None,
                method: Method::Subspace,
                residual,
                sector: Some(jz_label(first_support(psi.amplitudes()), &task.dims(), true)),
                state: Some(psi),
            })
        }
        _ => Err(Error::Unavailable(format!(
            "no reduced subspace matrix for the {} task",
            task.variant.name()
        ))),
    }
}

fn first_support(v: &[C64]) -> usize {
    v.iter().position(|z| z.norm() > 1e-12).unwrap_or(0)
}

fn beta_on_labels(p: &crate::tasks::SubspaceProblem, full: &[f64]) -> Vec<f64> {
    p.labels
        .iter()
        .map(|l| match l {
            crate::tasks::BasisLabel::Clone(k) => full[*k],
            crate::tasks::BasisLabel::Bits(_) => 0.0,
        })
        .collect()
}

fn reduced_residual(a: &ComplexMatrix, beta: &[f64], lambda: f64) -> f64 {
    let v: Vec<C64> = beta.iter().map(|&b| C64::new(b, 0.0)).collect();
    block_residual(a, &v, lambda)
}

fn closed(task: &CloningTask) -> Result<FidelityReport> {
    let fidelity = closed_form_fidelity(task)
        .ok_or_else(|| Error::Unavailable(format!("no closed form for this {} task", task.variant.name())))?;
    let per_clone = match task.variant {
        Variant::ChshPair => chsh_per_clone(task.weights.as_slice()),
        _ => vec![fidelity; task.variant.clones()],
    };
    Ok(FidelityReport {
        task: task.clone(),
        fidelity,
        per_clone,
        lambda_sub: None,
        degeneracy: None,
        method: Method::ClosedForm,
        residual: 0.0,
        sector: None,
        state: None,
    })
}

/// `F_n = ½ + α_n / (2√(α₁² + α₂²))` for the optimal `1 → 2` equatorial
/// state in the one-excitation sector.
fn chsh_per_clone(alpha: &[f64]) -> Vec<f64> {
    let r = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    alpha.iter().map(|a| 0.5 + a / (2.0 * r)).collect()
}

/// Symmetric `1 → N` qubit fidelity for `Γ ∈ [0, ¼]`, from the regime
/// formulas: `i ∈ {0, N−1}` for `Γ ≤ 1/6`, `i = ⌊N/2⌋` above.
pub fn symmetric_star_fidelity(gamma: f64, n: usize) -> f64 {
    let i = if gamma <= 1.0 / 6.0 { 0 } else { n / 2 };
    star_branch(gamma, n, i)
}

/// `½ + c/N + (1/N)√(4Γ²(i+1)(N−i) + c²(N−2i−1)²)` with `c = (1−4Γ)/2`.
pub fn star_branch(gamma: f64, n: usize, i: usize) -> f64 {
    let nf = n as f64;
    let c = (1.0 - 4.0 * gamma) / 2.0;
    let k = (n as f64) - 2.0 * i as f64 - 1.0;
    let root = (4.0 * gamma * gamma * (i as f64 + 1.0) * (nf - i as f64) + c * c * k * k).sqrt();
    0.5 + c / nf + root / nf
}

/// Analytic optimum when the task has one: symmetric weights for the
/// universal, state-dependent and `(N−1) → N` tasks, and any weights for
/// the CHSH pair.
pub fn closed_form_fidelity(task: &CloningTask) -> Option<f64> {
    let symmetric = task.weights.is_uniform();
    match task.variant {
        Variant::UniversalQudit { d, n } if symmetric => {
            let (df, nf) = (d as f64, n as f64);
            Some(1.0 / nf + 2.0 * (nf - 1.0) / (nf * (df + 1.0)))
        }
        Variant::StateDependentQubit { gamma, n } if symmetric => Some(symmetric_star_fidelity(gamma, n)),
        Variant::Equatorial { n } if symmetric => Some(symmetric_star_fidelity(0.25, n)),
        Variant::ManyToN { m, n } if symmetric && m + 1 == n => {
            let nf = n as f64;
            Some((nf * nf + nf - 1.0) / (nf * nf + nf))
        }
        Variant::ChshPair => {
            let a = task.weights.as_slice();
            Some(0.5 * (1.0 + (a[0] * a[0] + a[1] * a[1]).sqrt()))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{build_r, Weights};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn task(variant: Variant, alpha: &[f64]) -> CloningTask {
        CloningTask::new(variant, Weights::new(alpha.to_vec()).unwrap()).unwrap()
    }

    fn dense_top(t: &CloningTask) -> f64 {
        hermitian_eig(&build_r(t).unwrap(), 1e-9).unwrap().max_value
    }

    #[test]
    fn universal_examples() {
        let r = optimal_fidelity(&CloningTask::symmetric(Variant::UniversalQudit { d: 2, n: 2 }).unwrap(), Method::Dense).unwrap();
        assert!((r.fidelity - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.degeneracy, Some(2));
        let r = optimal_fidelity(&CloningTask::symmetric(Variant::UniversalQudit { d: 3, n: 2 }).unwrap(), Method::Dense).unwrap();
        assert!((r.fidelity - 0.75).abs() < 1e-12);

        let t = task(Variant::UniversalQudit { d: 2, n: 2 }, &[0.8, 0.2]);
        let exact = (2.0 + 0.52f64.sqrt()) / 3.0;
        for m in [Method::Dense, Method::Blocked, Method::Subspace] {
            let r = optimal_fidelity(&t, m).unwrap();
            assert!((r.fidelity - exact).abs() < 1e-12, "{m:?}");
            assert!((r.fidelity - 0.9070368).abs() < 1e-7);
            assert!((r.per_clone[0] - 0.99024).abs() < 1e-5, "{:?}", r.per_clone);
            assert!((r.per_clone[1] - 0.57422).abs() < 1e-5);
            let weighted: f64 = r.per_clone.iter().zip(t.weights.as_slice()).map(|(f, a)| f * a).sum();
            assert!((weighted - r.fidelity).abs() < 1e-9);
        }
        assert!(optimal_fidelity(&t, Method::ClosedForm).is_err());
    }

    #[test]
    fn star_formula_examples() {
        assert!((symmetric_star_fidelity(1.0 / 6.0, 3) - 7.0 / 9.0).abs() < 1e-14);
        assert!((symmetric_star_fidelity(0.25, 2) - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-14);
        assert!((symmetric_star_fidelity(0.25, 2) - 0.8535534).abs() < 1e-7);
        for n in 1..8 {
            assert!((symmetric_star_fidelity(0.0, n) - 1.0).abs() < 1e-14);
        }
        // Odd-N equatorial value is (3N+1)/(4N).
        for n in [1, 3, 5, 7] {
            let nf = n as f64;
            assert!((symmetric_star_fidelity(0.25, n) - (3.0 * nf + 1.0) / (4.0 * nf)).abs() < 1e-14);
        }
    }

    #[test]
    fn star_regimes_pick_the_maximum_branch() {
        for n in 1..12 {
            for k in 0..=250 {
                let g = k as f64 * 1e-3;
                let brute = (0..n).map(|i| star_branch(g, n, i)).fold(f64::NEG_INFINITY, f64::max);
                assert!((symmetric_star_fidelity(g, n) - brute).abs() < 1e-12, "Γ={g} N={n}");
            }
        }
    }

    #[test]
    fn star_formula_matches_dense() {
        for n in 2..=5 {
            for k in 0..=25 {
                let g = k as f64 * 0.01;
                let t = CloningTask::symmetric(Variant::StateDependentQubit { gamma: g, n }).unwrap();
                assert!((symmetric_star_fidelity(g, n) - dense_top(&t)).abs() < 1e-9, "Γ={g} N={n}");
            }
        }
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn star_fidelity_dips_at_universal_point() {
        // Nonincreasing up to Γ = 1/6, nondecreasing after it.
        for n in 1..8 {
            let grid: Vec<f64> = (0..=250).map(|k| symmetric_star_fidelity(k as f64 * 1e-3, n)).collect();
            for k in 1..grid.len() {
                if k <= 166 {
                    assert!(grid[k] <= grid[k - 1] + 1e-14, "N={n} k={k}");
                } else if k >= 168 {
                    assert!(grid[k] >= grid[k - 1] - 1e-14, "N={n} k={k}");
                }
            }
        }
        // Equatorial beats universal for N ≥ 2.
        assert!(symmetric_star_fidelity(0.25, 2) > symmetric_star_fidelity(1.0 / 6.0, 2));
    }

    #[test]
    fn closed_forms() {
        let t = CloningTask::symmetric(Variant::UniversalQudit { d: 5, n: 3 }).unwrap();
        assert!((closed_form_fidelity(&t).unwrap() - 5.0 / 9.0).abs() < 1e-14);
        let t = CloningTask::symmetric(Variant::ManyToN { m: 2, n: 3 }).unwrap();
        assert!((closed_form_fidelity(&t).unwrap() - 11.0 / 12.0).abs() < 1e-14);
        assert!((dense_top(&t) - 11.0 / 12.0).abs() < 1e-12);
        let t = CloningTask::symmetric(Variant::Equatorial { n: 3 }).unwrap();
        assert!((closed_form_fidelity(&t).unwrap() - 5.0 / 6.0).abs() < 1e-14);
        assert!((dense_top(&t) - 5.0 / 6.0).abs() < 1e-12);
        let t = CloningTask::symmetric(Variant::ManyToN { m: 1, n: 3 }).unwrap();
        assert!(closed_form_fidelity(&t).is_none());
        let t = task(Variant::ChshPair, &[0.6, 0.4]);
        let r = optimal_fidelity(&t, Method::ClosedForm).unwrap();
        let d = optimal_fidelity(&t, Method::Dense).unwrap();
        assert!((r.fidelity - d.fidelity).abs() < 1e-12);
        for (a, b) in r.per_clone.iter().zip(&d.per_clone) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn blocked_examples() {
        let (v, vec, label) = blocked_max_eigenpair(&CloningTask::symmetric(Variant::UniversalQudit { d: 2, n: 3 }).unwrap()).unwrap();
        assert!((v - 7.0 / 9.0).abs() < 1e-12);
        assert!(label.abs() <= 1);
        assert_eq!(vec.len(), 16);

        let t = CloningTask::symmetric(Variant::Equatorial { n: 2 }).unwrap();
        let (v, _, _) = blocked_max_eigenpair(&t).unwrap();
        assert!((v - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-12);

        let t = CloningTask::symmetric(Variant::UniversalQudit { d: 2, n: 10 }).unwrap();
        let b = optimal_fidelity(&t, Method::Blocked).unwrap();
        assert!((b.fidelity - 0.7).abs() < 1e-10);
        assert_eq!(b.degeneracy, Some(10));
    }

    #[test]
    fn lanczos_blocks_agree_with_dense_blocks() {
        let t = task(Variant::UniversalQudit { d: 2, n: 7 }, &[0.3, 0.2, 0.15, 0.1, 0.1, 0.1, 0.05]);
        let small = SolverConfig { dense_block_limit: 8, ..SolverConfig::default() };
        let a = optimal_fidelity_with(&t, Method::Blocked, &small).unwrap();
        let b = optimal_fidelity_with(&t, Method::Blocked, &SolverConfig::default()).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-10);
        for (x, y) in a.per_clone.iter().zip(&b.per_clone) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn methods_agree_and_degeneracy_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n) in [(2, 3), (3, 2), (3, 3), (2, 4)] {
            for _ in 0..5 {
                let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = raw.iter().sum();
                let alpha = Weights::renormalized(raw.iter().map(|x| x / s).collect(), 1e-9).unwrap();
                let t = CloningTask::new(Variant::UniversalQudit { d, n }, alpha).unwrap();
                let dn = optimal_fidelity(&t, Method::Dense).unwrap();
                let bl = optimal_fidelity(&t, Method::Blocked).unwrap();
                let sb = optimal_fidelity(&t, Method::Subspace).unwrap();
                assert!((dn.fidelity - bl.fidelity).abs() < 1e-10);
                assert!((dn.fidelity - sb.fidelity).abs() < 1e-9);
                // One top vector per symmetric state of the N − 1 spare
                // clones; this exceeds (d−1)(N−1)+1 once d > 2 and N > 2.
                let sym_dim = binomial(n + d - 2, d - 1);
                assert!(sym_dim > (d - 1) * (n - 1));
                assert_eq!(dn.degeneracy, Some(sym_dim));
                assert_eq!(bl.degeneracy, Some(sym_dim));
                for ((a, b), c) in dn.per_clone.iter().zip(&bl.per_clone).zip(&sb.per_clone) {
                    assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
                }
                let beta = per_clone_from_beta_1n(d, &{
                    let p = subspace_matrix_1n(d, n, &t.weights).unwrap();
                    let (_, b) = p.dominant().unwrap();
                    p.expand_clone_beta(&b).unwrap()
                });
                for (a, b) in beta.iter().zip(&sb.per_clone) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_weight_clones_reinserted() {
        let t = task(Variant::UniversalQudit { d: 3, n: 3 }, &[0.0, 0.7, 0.3]);
        let dn = optimal_fidelity(&t, Method::Dense).unwrap();
        let sb = optimal_fidelity(&t, Method::Subspace).unwrap();
        assert!((dn.fidelity - sb.fidelity).abs() < 1e-9);
        assert_eq!(sb.per_clone.len(), 3);
        assert!(sb.per_clone.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn many_to_n_routes() {
        for n in 2..=4 {
            let t = CloningTask::symmetric(Variant::ManyToN { m: n - 1, n }).unwrap();
            let nf = n as f64;
            let exact = (nf * nf + nf - 1.0) / (nf * nf + nf);
            for m in [Method::Dense, Method::Blocked, Method::Subspace, Method::ClosedForm] {
                let r = optimal_fidelity(&t, m).unwrap();
                assert!((r.fidelity - exact).abs() < 1e-9, "{m:?} N={n}");
                assert!(r.per_clone.iter().all(|f| (f - exact).abs() < 1e-9));
            }
        }
        let t = task(Variant::ManyToN { m: 2, n: 4 }, &[0.4, 0.3, 0.2, 0.1]);
        let a = optimal_fidelity(&t, Method::Dense).unwrap();
        let b = optimal_fidelity(&t, Method::Subspace).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-9);
        assert!(b.residual < 1e-10);
    }

    #[test]
    fn perron_frobenius_sectors() {
        let t = task(Variant::UniversalQudit { d: 3, n: 3 }, &[0.5, 0.3, 0.2]);
        for s in sector_spectra(&t, &SolverConfig::default()).unwrap() {
            assert!(s.vector.iter().all(|z| z.re >= -1e-10 && z.im.abs() < 1e-10));
        }
    }

    #[test]
    fn subspace_unavailable_for_qubit_tasks() {
        let t = CloningTask::symmetric(Variant::Equatorial { n: 2 }).unwrap();
        assert!(matches!(optimal_fidelity(&t, Method::Subspace), Err(Error::Unavailable(_))));
    }

    #[test]
    fn dense_cap_enforced() {
        let t = CloningTask::symmetric(Variant::UniversalQudit { d: 2, n: 12 }).unwrap();
        assert!(matches!(optimal_fidelity(&t, Method::Dense), Err(Error::Size { .. })));
    }

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-3).then(|| Weights::renormalized(v.iter().map(|x| x / s).collect(), 1e-9).ok()).flatten()
                .map(|w| w.as_slice().to_vec())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prop_methods_agree(alpha in simplex(3), d in 2usize..4) {
            let t = task(Variant::UniversalQudit { d, n: 3 }, &alpha);
            let a = optimal_fidelity(&t, Method::Dense).unwrap();
            let b = optimal_fidelity(&t, Method::Blocked).unwrap();
            let c = optimal_fidelity(&t, Method::Subspace).unwrap();
            prop_assert!((a.fidelity - b.fidelity).abs() < 1e-10);
            prop_assert!((a.fidelity - c.fidelity).abs() < 1e-9);
            prop_assert!(a.fidelity >= 1.0 / (d as f64 + 1.0) && a.fidelity <= 1.0 + 1e-12);
        }

        #[test]
        fn prop_lipschitz_in_weights(a in simplex(3), b in simplex(3)) {
            let fa = optimal_fidelity(&task(Variant::UniversalQudit { d: 2, n: 3 }, &a), Method::Subspace).unwrap().fidelity;
            let fb = optimal_fidelity(&task(Variant::UniversalQudit { d: 2, n: 3 }, &b), Method::Subspace).unwrap().fidelity;
            let l1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
            prop_assert!((fa - fb).abs() <= l1 + 1e-12);
        }

        #[test]
        fn prop_qubit_blocked_matches_dense(alpha in simplex(3), g in 0.0f64..0.25) {
            let t = task(Variant::StateDependentQubit { gamma: g, n: 3 }, &alpha);
            let a = optimal_fidelity(&t, Method::Dense).unwrap();
            let b = optimal_fidelity(&t, Method::Blocked).unwrap();
            prop_assert!((a.fidelity - b.fidelity).abs() < 1e-10);
            let weighted: f64 = b.per_clone.iter().zip(&alpha).map(|(f, a)| f * a).sum();
            prop_assert!((weighted - b.fidelity).abs() < 1e-9);
        }
    }
}
