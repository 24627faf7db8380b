//! Cloning tasks: weights, variants, the operator `R` whose top eigenvalue
//! bounds the weighted fidelity, the reduced subspace problems and the
//! embeddings of their solutions back into the full space.

mod distribution;
mod star;
mod subspace;

pub use distribution::{gamma_of, validate_phase_covariance, Distribution, Preset};
pub use star::StarOperator;
pub use subspace::{
    embed_state_1n, embed_state_mn, rescale_beta_1n, subspace_matrix_1n, subspace_matrix_mn, BasisLabel,
    PhiChoice, SubspaceProblem,
};

use crate::densemath::{ComplexMatrix, HermitianOperator, PureState};
use crate::error::{Error, Result};
use crate::spinsym::spin_operators;
use crate::C64;

/// Default largest side length for a dense `R`.
pub const DENSE_BUILD_CAP: usize = 4096;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Convex clone weights `α_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    alpha: Vec<f64>,
}

impl Weights {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::arg("weights must be nonempty"));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::arg("weights must be finite and nonnegative"));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::arg(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { alpha })
    }

    /// Scales nonnegative weights to unit sum when they are already within
    /// `tol` of it. Weights that pass [`Weights::new`] come back unchanged.
    pub fn renormalized(alpha: Vec<f64>, tol: f64) -> Result<Self> {
        if let Ok(w) = Self::new(alpha.clone()) {
            return Ok(w);
        }
        let sum: f64 = alpha.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > tol {
            return Err(Error::arg(format!("weights sum to {sum}, not 1")));
        }
        Self::new(alpha.iter().map(|a| a / sum).collect()).or_else(|_| {
            // Division can leave the sum one ulp-pair away; nudge the largest.
            let mut v: Vec<f64> = alpha.iter().map(|a| a / sum).collect();
            let rest: f64 = v.iter().sum::<f64>() - 1.0;
            if let Some(m) = v.iter_mut().max_by(|a, b| a.total_cmp(b)) {
                *m -= rest;
            }
            Self::new(v)
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            alpha: vec![1.0 / n.max(1) as f64; n.max(1)],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.alpha.len() as f64;
        self.alpha.iter().all(|a| (a - u).abs() <= 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    /// Haar-random inputs of dimension `d`, `1 → n`.
    UniversalQudit { d: usize, n: usize },
    /// φ-independent qubit inputs summarized by `Γ ∈ [0, ¼]`.
    StateDependentQubit { gamma: f64, n: usize },
    /// The `Γ = ¼` case.
    Equatorial { n: usize },
    /// Universal qubit cloning from `m` copies to `n`.
    ManyToN { m: usize, n: usize },
    /// `1 → 2` equatorial cloning written through the CHSH operators.
    ChshPair,
}

impl Variant {
    pub fn clones(&self) -> usize {
        match *self {
            Variant::UniversalQudit { n, .. }
            | Variant::StateDependentQubit { n, .. }
            | Variant::Equatorial { n }
            | Variant::ManyToN { n, .. } => n,
            Variant::ChshPair => 2,
        }
    }

    /// Dimension of one clone.
    pub fn site_dim(&self) -> usize {
        match *self {
            Variant::UniversalQudit { d, .. } => d,
            _ => 2,
        }
    }

    /// Dimension of the input factor (the symmetric space for `m` copies).
    pub fn input_dim(&self) -> usize {
        match *self {
            Variant::ManyToN { m, .. } => m + 1,
            _ => self.site_dim(),
        }
    }

    /// Factor dimensions, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(std::iter::repeat_n(self.site_dim(), self.clones()));
        dims
    }

    /// `Γ` for qubit variants.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Variant::StateDependentQubit { gamma, .. } => Some(gamma),
            Variant::Equatorial { .. } | Variant::ChshPair => Some(0.25),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::UniversalQudit { .. } => "universal",
            Variant::StateDependentQubit { .. } => "state-dependent",
            Variant::Equatorial { .. } => "equatorial",
            Variant::ManyToN { .. } => "many-to-n",
            Variant::ChshPair => "chsh",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Variant::UniversalQudit { d, n } if d < 2 || n < 1 => {
                Err(Error::arg(format!("universal task needs d ≥ 2 and N ≥ 1, got d={d}, N={n}")))
            }
            Variant::StateDependentQubit { gamma, n } if !(0.0..=0.25).contains(&gamma) || n < 1 => {
                Err(Error::arg(format!("state-dependent task needs 0 ≤ Γ ≤ 1/4 and N ≥ 1, got Γ={gamma}, N={n}")))
            }
            Variant::Equatorial { n } if n < 1 => Err(Error::arg("equatorial task needs N ≥ 1")),
            Variant::ManyToN { m, n } if m < 1 || m >= n => {
                Err(Error::arg(format!("many-to-N task needs 1 ≤ M < N, got M={m}, N={n}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CloningTask {
    pub variant: Variant,
    pub weights: Weights,
}

impl CloningTask {
    pub fn new(variant: Variant, weights: Weights) -> Result<Self> {
        variant.validate()?;
        if weights.len() != variant.clones() {
            return Err(Error::arg(format!(
                "{} weights given for {} clones",
                weights.len(),
                variant.clones()
            )));
        }
        Ok(Self { variant, weights })
    }

    pub fn symmetric(variant: Variant) -> Result<Self> {
        let n = variant.clones();
        Self::new(variant, Weights::uniform(n))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.variant.dims()
    }

    pub fn side(&self) -> Option<usize> {
        self.dims().iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }

    /// `R` in star form.
    pub fn operator(&self) -> Result<StarOperator> {
        let (identity, local) = single_clone_term(&self.variant)?;
        StarOperator::new(self.dims(), identity, local, self.weights.as_slice().to_vec())
    }

    /// `R_n`, the single-clone operator with `⟨Ψ|R_n|Ψ⟩ = F_n`.
    pub fn clone_operator(&self, clone: usize) -> Result<StarOperator> {
        let n = self.variant.clones();
        if clone >= n {
            return Err(Error::arg(format!("clone index {clone} out of range 0..{n}")));
        }
        let mut w = vec![0.0; n];
        w[clone] = 1.0;
        self.operator()?.with_weights(w)
    }
}

/// `(c, T)` with `R_n = c·𝟙 + T_{0,n}`.
fn single_clone_term(variant: &Variant) -> Result<(f64, ComplexMatrix)> {
    Ok(match *variant {
        Variant::UniversalQudit { d, .. } => {
            let b = bell_state(d)?;
            let scale = d as f64 / (d as f64 + 1.0);
            let local = ComplexMatrix::outer(b.amplitudes(), b.amplitudes()).scale(C64::new(scale, 0.0));
            (1.0 / (d as f64 + 1.0), local)
        }
        Variant::StateDependentQubit { gamma, .. } => (0.5, qubit_term(gamma)?),
        Variant::Equatorial { .. } => (0.5, qubit_term(0.25)?),
        Variant::ManyToN { m, .. } => {
            let s = spin_operators(m + 1)?;
            let p = spin_operators(2)?;
            let xx = crate::densemath::kron(s.sx.matrix(), p.sx.matrix())?;
            let yy = crate::densemath::kron(s.sy.matrix(), p.sy.matrix())?;
            let zz = crate::densemath::kron(s.sz.matrix(), p.sz.matrix())?;
            let sum = xx.sub(&yy)?.add(&zz)?;
            (0.5, sum.scale(C64::new(0.5 / (m as f64 + 2.0), 0.0)))
        }
        Variant::ChshPair => {
            let b = bell_operator()?;
            (0.5, b.scale(C64::new(1.0 / (4.0 * 2f64.sqrt()), 0.0)))
        }
    })
}

/// `Γ(XX − YY) + ((1 − 4Γ)/2)ZZ`.
fn qubit_term(gamma: f64) -> Result<ComplexMatrix> {
    let p = spin_operators(2)?;
    let xx = crate::densemath::kron(p.sx.matrix(), p.sx.matrix())?;
    let yy = crate::densemath::kron(p.sy.matrix(), p.sy.matrix())?;
    let zz = crate::densemath::kron(p.sz.matrix(), p.sz.matrix())?;
    xx.sub(&yy)?
        .scale(C64::new(gamma, 0.0))
        .add(&zz.scale(C64::new((1.0 - 4.0 * gamma) / 2.0, 0.0)))
}

/// `√2(XX − YY)`.
pub fn bell_operator() -> Result<ComplexMatrix> {
    let p = spin_operators(2)?;
    let xx = crate::densemath::kron(p.sx.matrix(), p.sx.matrix())?;
    let yy = crate::densemath::kron(p.sy.matrix(), p.sy.matrix())?;
    Ok(xx.sub(&yy)?.scale(C64::new(2f64.sqrt(), 0.0)))
}

/// `(1/√d) Σ_i |ii⟩`.
pub fn bell_state(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::arg(format!("Bell state needs d ≥ 2, got {d}")));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(amp, 0.0);
    }
    PureState::new(v, vec![d, d])
}

/// Dense `R` with the default cap.
pub fn build_r(task: &CloningTask) -> Result<HermitianOperator> {
    build_r_capped(task, DENSE_BUILD_CAP)
}

pub fn build_r_capped(task: &CloningTask, cap: usize) -> Result<HermitianOperator> {
    let side = task.side().unwrap_or(usize::MAX);
    if side > cap {
        return Err(Error::Size { side, cap });
    }
    task.operator()?.to_dense(cap)
}
