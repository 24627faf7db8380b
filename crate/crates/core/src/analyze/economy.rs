//! Whether an optimal cloner runs as a unitary on input and blank clones,
//! and how large an ancilla it needs otherwise.

use super::fit::{fit_marginal, MarginalMap};
use crate::densemath::{hermitian_eig, ComplexMatrix, HermitianOperator, PureState};
use crate::error::{Error, Result};
use crate::solve::{sector_spectra, SectorResult, SolverConfig};
use crate::tasks::{
    build_r_capped, embed_state_1n, embed_state_mn, subspace_matrix_1n, subspace_matrix_mn, CloningTask, PhiChoice,
    Variant, Weights,
};
use crate::C64;

/// Largest Schmidt-coefficient deviation accepted as maximal entanglement.
pub const SCHMIDT_TOL: f64 = 1e-8;
/// Largest marginal defect accepted for a mixture witness.
pub const MARGINAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Economical,
    /// Realizable with an ancilla of this dimension.
    AncillaDim(usize),
    /// Neither a maximally entangled top vector nor a feasible mixture was
    /// found.
    Unresolved,
}

#[derive(Clone, Debug)]
pub enum Witness {
    Pure(PureState),
    /// `(probability, top eigenvector)` pairs.
    Mixture(Vec<(f64, PureState)>),
}

impl Witness {
    pub fn components(&self) -> Vec<(f64, &PureState)> {
        match self {
            Witness::Pure(p) => vec![(1.0, p)],
            Witness::Mixture(m) => m.iter().map(|(w, p)| (*w, p)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Sector-pure top vector of an equatorial task.
    Z0Sector,
    /// `Φ = (1/√d) Σ_j |j⟩^{⊗(N−1)}` in the universal optimal state.
    GhzEmbedding,
    /// `(1/d) Σ_i |Ψ_i⟩⟨Ψ_i|` with `Φ = |i⟩`, universal `N = 2`.
    PhiMixture,
    /// `v ± X^{⊗(N+1)} v` from a sector top vector `v`.
    XSymmetrized,
    /// Optimal state for one more clone of zero weight, extra clone traced out.
    ExtendedTask,
    /// One `M → N` ladder state.
    LadderState,
    /// Equal mixture of the `M → N` ladder states.
    LadderMixture,
    /// Numerical search over the top eigenspace.
    Search,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Z0Sector => "z0-sector",
            Construction::GhzEmbedding => "ghz-embedding",
            Construction::PhiMixture => "phi-mixture",
            Construction::XSymmetrized => "x-symmetrized",
            Construction::ExtendedTask => "extended-task",
            Construction::LadderState => "ladder-state",
            Construction::LadderMixture => "ladder-mixture",
            Construction::Search => "search",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EconomyReport {
    pub task: CloningTask,
    pub fidelity: f64,
    pub classification: Classification,
    pub witness: Witness,
    /// Square roots of the eigenvalues of the witness's input marginal,
    /// descending: the Schmidt coefficients across input and outputs (plus
    /// purifying ancilla for a mixture).
    pub schmidt_spectrum: Vec<f64>,
    /// `‖Tr_O ρ − 𝟙/d_in‖_max`.
    pub input_marginal_residual: f64,
    /// Largest `‖Rψ − Fψ‖₂` over the witness components.
    pub eigen_residual: f64,
    pub construction: Construction,
    /// The classification rests on the numerical search.
    pub heuristic: bool,
    /// Smallest Schmidt deviation the pure search reached, when it ran.
    pub heuristic_deviation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct EconomyConfig {
    pub solver: SolverConfig,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EconomyConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            restarts: 32,
            seed: 0xec0,
        }
    }
}

pub fn economy_report(task: &CloningTask) -> Result<EconomyReport> {
    economy_report_with(task, &EconomyConfig::default())
}

pub fn economy_report_with(task: &CloningTask, config: &EconomyConfig) -> Result<EconomyReport> {
    let side = task.side().unwrap_or(usize::MAX);
    if side > config.solver.blocked_cap {
        return Err(Error::Size {
            side,
            cap: config.solver.blocked_cap,
        });
    }
    match task.variant {
        Variant::Equatorial { .. } | Variant::ChshPair => sector_route(task, config, false, false),
        Variant::StateDependentQubit { .. } => sector_route(task, config, true, true),
        Variant::UniversalQudit { d, n } => universal_route(task, config, d, n),
        Variant::ManyToN { m, n } => ladder_route(task, config, m, n),
    }
}

struct Assessment {
    spectrum: Vec<f64>,
    marginal: f64,
    eigen: f64,
}

impl Assessment {
    fn deviation(&self, din: usize) -> f64 {
        schmidt_deviation(&self.spectrum, din)
    }
}

fn schmidt_deviation(spectrum: &[f64], din: usize) -> f64 {
    let u = 1.0 / (din as f64).sqrt();
    let mut dev = spectrum.iter().map(|s| (s - u).abs()).fold(0.0, f64::max);
    if spectrum.len() < din {
        dev = dev.max(u);
    }
    dev
}

fn assess(task: &CloningTask, comps: &[(f64, &PureState)], fidelity: f64) -> Result<Assessment> {
    let op = task.operator()?;
    let din = task.variant.input_dim();
    let mut rho = ComplexMatrix::zeros(din, din);
    let mut eigen = 0.0f64;
    for (w, psi) in comps {
        let part = psi.reduced_density(&[0])?;
        rho = rho.add(&part.matrix().scale(C64::new(*w, 0.0)))?;
        let rv = op.apply(psi.amplitudes())?;
        let res = rv
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - b * fidelity).norm_sqr())
            .sum::<f64>()
            .sqrt();
        eigen = eigen.max(res);
    }
    let target = ComplexMatrix::identity(din).scale(C64::new(1.0 / din as f64, 0.0));
    let marginal = rho.max_diff(&target);
    let herm = ComplexMatrix::from_fn(din, din, |a, b| (rho[(a, b)] + rho[(b, a)].conj()) * 0.5);
    let spec = hermitian_eig(&HermitianOperator::from_matrix(herm)?, 1e-12)?;
    let mut spectrum: Vec<f64> = spec.eigenvalues.iter().map(|p| p.max(0.0).sqrt()).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    Ok(Assessment {
        spectrum,
        marginal,
        eigen,
    })
}

struct Outcome {
    classification: Classification,
    witness: Witness,
    construction: Construction,
    heuristic: bool,
    heuristic_deviation: Option<f64>,
}

fn finish(task: &CloningTask, fidelity: f64, o: Outcome) -> Result<EconomyReport> {
    let a = assess(task, &o.witness.components(), fidelity)?;
    Ok(EconomyReport {
        task: task.clone(),
        fidelity,
        classification: o.classification,
        witness: o.witness,
        schmidt_spectrum: a.spectrum,
        input_marginal_residual: a.marginal,
        eigen_residual: a.eigen,
        construction: o.construction,
        heuristic: o.heuristic,
        heuristic_deviation: o.heuristic_deviation,
    })
}

fn is_maximally_entangled(task: &CloningTask, psi: &PureState, fidelity: f64) -> Result<bool> {
    let a = assess(task, &[(1.0, psi)], fidelity)?;
    Ok(a.deviation(task.variant.input_dim()) < SCHMIDT_TOL)
}

/// Winning sectors of the blocked solve, smallest `|J_Z|` first.
fn top_sectors(task: &CloningTask, config: &SolverConfig) -> Result<(f64, Vec<SectorResult>)> {
    let sectors = sector_spectra(task, config)?;
    let top = sectors.iter().map(|s| s.max_value).fold(f64::NEG_INFINITY, f64::max);
    let cut = top - config.degeneracy_tol * top.abs().max(1.0);
    let mut winners: Vec<SectorResult> = sectors.into_iter().filter(|s| s.max_value >= cut).collect();
    winners.sort_by(|a, b| a.label.abs().cmp(&b.label.abs()).then(b.label.cmp(&a.label)));
    Ok((top, winners))
}

fn expand(s: &SectorResult, side: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); side];
    for (&i, &a) in s.indices.iter().zip(&s.vector) {
        v[i] = a;
    }
    v
}

/// Equatorial tasks use the sector top vectors directly; state-dependent
/// qubit tasks combine each with its image under `X^{⊗(N+1)}`.
fn sector_route(task: &CloningTask, config: &EconomyConfig, symmetrize: bool, extend: bool) -> Result<EconomyReport> {
    let dims = task.dims();
    let side = task.side().expect("capped");
    let (fidelity, winners) = top_sectors(task, &config.solver)?;
    for s in &winners {
        let v = expand(s, side);
        let candidates: Vec<Vec<C64>> = if symmetrize {
            // Flipping every qubit reverses the index.
            let xv: Vec<C64> = v.iter().rev().copied().collect();
            vec![
                v.iter().zip(&xv).map(|(a, b)| a + b).collect(),
                v.iter().zip(&xv).map(|(a, b)| a - b).collect(),
            ]
        } else {
            vec![v]
        };
        for c in candidates {
            if crate::densemath::norm(&c) < 1e-6 {
                continue;
            }
            let psi = PureState::normalized(c, dims.clone())?;
            if is_maximally_entangled(task, &psi, fidelity)? {
                let construction = if symmetrize {
                    Construction::XSymmetrized
                } else {
                    Construction::Z0Sector
                };
                return finish(
                    task,
                    fidelity,
                    Outcome {
                        classification: Classification::Economical,
                        witness: Witness::Pure(psi),
                        construction,
                        heuristic: false,
                        heuristic_deviation: None,
                    },
                );
            }
        }
    }
    let (found, deviation) = search_pure(task, config, fidelity)?;
    if let Some(o) = found {
        return finish(task, fidelity, o);
    }
    if let (true, Variant::StateDependentQubit { gamma, n }) = (extend, &task.variant) {
        let (gamma, n) = (*gamma, *n);
        if let Some(o) = extended_task(task, config, gamma, n, deviation)? {
            return finish(task, fidelity, o);
        }
    }
    search_fallback(task, config, fidelity, deviation)
}

/// Solves the task with one more clone of zero weight and traces that clone
/// out of the economical witness, leaving a rank-two mixture.
fn extended_task(
    task: &CloningTask,
    config: &EconomyConfig,
    gamma: f64,
    n: usize,
    deviation: Option<f64>,
) -> Result<Option<Outcome>> {
    let mut alpha = task.weights.as_slice().to_vec();
    alpha.push(0.0);
    let bigger = CloningTask::new(Variant::StateDependentQubit { gamma, n: n + 1 }, Weights::new(alpha)?)?;
    let big = sector_route(&bigger, config, true, false)?;
    let Witness::Pure(psi) = big.witness else {
        return Ok(None);
    };
    if big.classification != Classification::Economical {
        return Ok(None);
    }
    let dims = task.dims();
    let halves: Vec<Vec<C64>> = (0..2)
        .map(|bit| psi.amplitudes().iter().skip(bit).step_by(2).copied().collect())
        .collect();
    let mut comps = Vec::new();
    for h in halves {
        let w: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        if w > 1e-14 {
            comps.push((w, PureState::normalized(h, dims.clone())?));
        }
    }
    let classification = if comps.len() == 1 {
        Classification::Economical
    } else {
        Classification::AncillaDim(2)
    };
    Ok(Some(Outcome {
        classification,
        witness: if comps.len() == 1 {
            Witness::Pure(comps.pop().expect("one component").1)
        } else {
            Witness::Mixture(comps)
        },
        construction: Construction::ExtendedTask,
        heuristic: false,
        heuristic_deviation: deviation,
    }))
}

fn universal_route(task: &CloningTask, config: &EconomyConfig, d: usize, n: usize) -> Result<EconomyReport> {
    let p = subspace_matrix_1n(d, n, &task.weights)?;
    let (lambda, beta) = p.dominant()?;
    let beta = p.expand_clone_beta(&beta)?;
    let fidelity = (1.0 + lambda) / (d as f64 + 1.0);
    let ghz = embed_state_1n(d, n, &beta, 0, &PhiChoice::GhzType)?;
    if is_maximally_entangled(task, &ghz, fidelity)? {
        return finish(
            task,
            fidelity,
            Outcome {
                classification: Classification::Economical,
                witness: Witness::Pure(ghz),
                construction: Construction::GhzEmbedding,
                heuristic: false,
                heuristic_deviation: None,
            },
        );
    }
    let (found, deviation) = search_pure(task, config, fidelity)?;
    if let Some(o) = found {
        return finish(task, fidelity, o);
    }
    if n == 2 {
        let comps = (0..d)
            .map(|i| {
                let phi = PureState::basis(&[i], vec![d])?;
                Ok((1.0 / d as f64, embed_state_1n(d, n, &beta, 0, &PhiChoice::Custom(phi))?))
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(f64, &PureState)> = comps.iter().map(|(w, s)| (*w, s)).collect();
        if assess(task, &refs, fidelity)?.marginal <= MARGINAL_TOL {
            return finish(
                task,
                fidelity,
                Outcome {
                    classification: Classification::AncillaDim(d),
                    witness: Witness::Mixture(comps),
                    construction: Construction::PhiMixture,
                    heuristic: false,
                    heuristic_deviation: deviation,
                },
            );
        }
    }
    search_fallback(task, config, fidelity, deviation)
}

fn ladder_route(task: &CloningTask, config: &EconomyConfig, m: usize, n: usize) -> Result<EconomyReport> {
    let p = subspace_matrix_mn(m, n, &task.weights)?;
    let (fidelity, beta) = p.dominant()?;
    let states = (0..=n - m).map(|i| embed_state_mn(m, n, &beta, i)).collect::<Result<Vec<_>>>()?;
    for psi in &states {
        if is_maximally_entangled(task, psi, fidelity)? {
            return finish(
                task,
                fidelity,
                Outcome {
                    classification: Classification::Economical,
                    witness: Witness::Pure(psi.clone()),
                    construction: Construction::LadderState,
                    heuristic: false,
                    heuristic_deviation: None,
                },
            );
        }
    }
    let (found, deviation) = search_pure(task, config, fidelity)?;
    if let Some(o) = found {
        return finish(task, fidelity, o);
    }
    let w = 1.0 / states.len() as f64;
    let comps: Vec<(f64, PureState)> = states.into_iter().map(|s| (w, s)).collect();
    let refs: Vec<(f64, &PureState)> = comps.iter().map(|(w, s)| (*w, s)).collect();
    if assess(task, &refs, fidelity)?.marginal <= MARGINAL_TOL {
        let k = comps.len();
        return finish(
            task,
            fidelity,
            Outcome {
                classification: Classification::AncillaDim(k),
                witness: Witness::Mixture(comps),
                construction: Construction::LadderMixture,
                heuristic: false,
                heuristic_deviation: deviation,
            },
        );
    }
    search_fallback(task, config, fidelity, deviation)
}

/// Orthonormal basis of the dense top eigenspace, when `R` fits.
fn top_space(task: &CloningTask, config: &EconomyConfig) -> Result<Option<ComplexMatrix>> {
    match build_r_capped(task, config.solver.dense_cap) {
        Ok(r) => Ok(Some(hermitian_eig(&r, config.solver.degeneracy_tol)?.max_space)),
        Err(Error::Size { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn states_from_fit(space: &ComplexMatrix, comps: &[Vec<C64>], dims: &[usize]) -> Result<Vec<(f64, PureState)>> {
    let total: f64 = comps.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
    let mut out = Vec::new();
    for c in comps {
        let w: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>() / total;
        if w < 1e-14 {
            continue;
        }
        let v = space.matvec(c)?;
        out.push((w, PureState::normalized(v, dims.to_vec())?));
    }
    Ok(out)
}

/// Searches the top eigenspace for a maximally entangled vector. Returns the
/// economical outcome if found and the best Schmidt deviation reached.
fn search_pure(task: &CloningTask, config: &EconomyConfig, fidelity: f64) -> Result<(Option<Outcome>, Option<f64>)> {
    let Some(space) = top_space(task, config)? else {
        return Ok((None, None));
    };
    let din = task.variant.input_dim();
    let map = MarginalMap::new(&space, din);
    let fit = fit_marginal(&map, 1, config.restarts, config.seed, SCHMIDT_TOL * 1e-3);
    let mut states = states_from_fit(&space, &fit.components, &task.dims())?;
    let Some((_, psi)) = states.pop() else {
        return Ok((None, None));
    };
    let deviation = assess(task, &[(1.0, &psi)], fidelity)?.deviation(din);
    if deviation < SCHMIDT_TOL {
        return Ok((
            Some(Outcome {
                classification: Classification::Economical,
                witness: Witness::Pure(psi),
                construction: Construction::Search,
                heuristic: true,
                heuristic_deviation: Some(deviation),
            }),
            Some(deviation),
        ));
    }
    Ok((None, Some(deviation)))
}

/// Mixtures of increasing rank over the top eigenspace; the first rank whose
/// marginal fits sets the ancilla dimension.
fn search_fallback(
    task: &CloningTask,
    config: &EconomyConfig,
    fidelity: f64,
    deviation: Option<f64>,
) -> Result<EconomyReport> {
    let dims = task.dims();
    let din = task.variant.input_dim();
    let Some(space) = top_space(task, config)? else {
        return Err(Error::Unavailable(
            "no constructive witness and the top eigenspace is too large to search".into(),
        ));
    };
    let map = MarginalMap::new(&space, din);
    let k = space.cols();
    for rank in 2..=k.min(din * din) {
        let fit = fit_marginal(&map, rank, config.restarts, config.seed ^ rank as u64, MARGINAL_TOL * 1e-2);
        if fit.residual <= MARGINAL_TOL {
            let comps = states_from_fit(&space, &fit.components, &dims)?;
            return finish(
                task,
                fidelity,
                Outcome {
                    classification: Classification::AncillaDim(comps.len()),
                    witness: Witness::Mixture(comps),
                    construction: Construction::Search,
                    heuristic: true,
                    heuristic_deviation: deviation,
                },
            );
        }
    }
    let fit = fit_marginal(&map, 1, config.restarts, config.seed, 0.0);
    let mut states = states_from_fit(&space, &fit.components, &dims)?;
    let psi = states.pop().ok_or_else(|| Error::numerical("empty search result", fit.residual))?.1;
    finish(
        task,
        fidelity,
        Outcome {
            classification: Classification::Unresolved,
            witness: Witness::Pure(psi),
            construction: Construction::Search,
            heuristic: true,
            heuristic_deviation: deviation,
        },
    )
}

