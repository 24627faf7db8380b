//! Per-clone fidelities, singlet fractions, the monogamy and trade-off
//! relations, CHSH monogamy, economy of implementation and weight sweeps.

mod economy;
mod fit;

pub use economy::{
    economy_report, economy_report_with, Classification, Construction, EconomyConfig, EconomyReport, Witness,
};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::densemath::{hermitian_eig, PureState};
use crate::error::{Error, Result};
use crate::solve::{optimal_fidelity_with, FidelityReport, Method, SolverConfig};
use crate::tasks::{build_r, CloningTask, Variant, Weights};
use crate::C64;

/// `⟨Ψ|R_n|Ψ⟩` for every clone.
pub fn per_clone_fidelities(psi: &PureState, task: &CloningTask) -> Result<Vec<f64>> {
    let dims = task.dims();
    if psi.dims() != dims.as_slice() {
        return Err(Error::arg(format!("state dims {:?} do not match task dims {dims:?}", psi.dims())));
    }
    (0..task.variant.clones())
        .map(|k| task.clone_operator(k)?.expectation(psi.amplitudes()))
        .collect()
}

/// `p = (F(d+1) − 1)/d`. Inputs below `1/(d+1)` give negative values.
pub fn singlet_fraction(f: f64, d: usize) -> f64 {
    let df = d as f64;
    (f * (df + 1.0) - 1.0) / df
}

pub fn fidelity_of_singlet_fraction(p: f64, d: usize) -> f64 {
    let df = d as f64;
    (p * df + 1.0) / (df + 1.0)
}

/// `(d−1)/d + (Σ√p)²/(N+d−1) − Σp`; nonnegative for every achievable
/// `1 → N` cloner and zero on the optimal frontier.
pub fn monogamy_slack_1n(p: &[f64], d: usize) -> f64 {
    let df = d as f64;
    let root: f64 = p.iter().map(|x| x.max(0.0).sqrt()).sum();
    (df - 1.0) / df + root * root / (p.len() as f64 + df - 1.0) - p.iter().sum::<f64>()
}

/// `1 − F` below this counts as zero in the trade-off slack, where the
/// square root would turn round-off into an `O(1e-8)` error.
pub const TRADEOFF_FLOOR: f64 = 1e-14;

/// `ΣF − (Σ√(1−F))² − (N−1)` for `(N−1) → N` qubit cloning.
pub fn tradeoff_slack_n_minus_one(f: &[f64]) -> f64 {
    let root: f64 = f
        .iter()
        .map(|x| 1.0 - x)
        .map(|e| if e <= TRADEOFF_FLOOR { 0.0 } else { e.sqrt() })
        .sum();
    f.iter().sum::<f64>() - root * root - (f.len() as f64 - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshMonogamy {
    /// `½(1 + √(α₁² + α₂²))`.
    pub lambda: f64,
    /// `4√2(λ − ½)`, the bound on `α₁⟨B₀₁⟩ + α₂⟨B₀₂⟩`.
    pub weighted_bound: f64,
    /// Largest eigenvalue of the dense CHSH-pair `R`.
    pub dense_lambda: f64,
}

pub fn chsh_monogamy(alpha1: f64, alpha2: f64) -> Result<ChshMonogamy> {
    let task = CloningTask::new(Variant::ChshPair, Weights::new(vec![alpha1, alpha2])?)?;
    let lambda = 0.5 * (1.0 + (alpha1 * alpha1 + alpha2 * alpha2).sqrt());
    let dense_lambda = hermitian_eig(&build_r(&task)?, 1e-9)?.max_value;
    Ok(ChshMonogamy {
        lambda,
        weighted_bound: 4.0 * 2f64.sqrt() * (lambda - 0.5),
        dense_lambda,
    })
}

/// A Haar-random pure state: normalized complex Gaussian amplitudes.
pub fn haar_random_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let side = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::arg("dimension overflow"))?;
    let amps = (0..side)
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    PureState::normalized(amps, dims.to_vec())
}

/// One point on a fidelity trade-off curve.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffRecord {
    pub alpha: Weights,
    pub fidelity: f64,
    pub fidelities: Vec<f64>,
    /// Present for universal `1 → N` tasks.
    pub singlet_fractions: Option<Vec<f64>>,
    /// Singlet monogamy slack for universal `1 → N`, the fidelity trade-off
    /// slack for `(N−1) → N`, absent otherwise.
    pub slack: Option<f64>,
}

impl TradeoffRecord {
    pub fn from_report(report: &FidelityReport) -> Self {
        let f = report.per_clone.clone();
        let (singlet_fractions, slack) = match report.task.variant {
            Variant::UniversalQudit { d, .. } => {
                let p: Vec<f64> = f.iter().map(|&x| singlet_fraction(x, d)).collect();
                let s = monogamy_slack_1n(&p, d);
                (Some(p), Some(s))
            }
            Variant::ManyToN { m, n } if m + 1 == n => (None, Some(tradeoff_slack_n_minus_one(&f))),
            _ => (None, None),
        };
        Self {
            alpha: report.task.weights.clone(),
            fidelity: report.fidelity,
            fidelities: f,
            singlet_fractions,
            slack,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepConfig {
    /// `None` picks the subspace route where one exists and the blocked
    /// route otherwise.
    pub method: Option<Method>,
    pub solver: SolverConfig,
}

pub fn default_method(variant: &Variant) -> Method {
    match variant {
        Variant::UniversalQudit { .. } | Variant::ManyToN { .. } => Method::Subspace,
        _ => Method::Blocked,
    }
}

/// Solves `variant` at every weight vector of `grid`. Points are independent
/// and evaluated in parallel; the output follows the grid order and a failed
/// point does not abort the others.
pub fn pareto_sweep(variant: &Variant, grid: &[Vec<f64>], config: &SweepConfig) -> Vec<Result<TradeoffRecord>> {
    let method = config.method.unwrap_or_else(|| default_method(variant));
    grid.par_iter()
        .enumerate()
        .map(|(index, alpha)| {
            let mut solver = config.solver.clone();
            solver.seed = point_seed(config.solver.seed, index);
            let task = CloningTask::new(variant.clone(), Weights::new(alpha.clone())?)?;
            let report = optimal_fidelity_with(&task, method, &solver)?;
            Ok(TradeoffRecord::from_report(&report))
        })
        .collect()
}

/// SplitMix64 of the root seed and the point index.
pub fn point_seed(root: u64, index: usize) -> u64 {
    let mut z = root.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
