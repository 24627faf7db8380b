//! Seeded invariant suites behind `asymclone verify`.

use asymclone::analyze::{
    chsh_monogamy, haar_random_state, monogamy_slack_1n, per_clone_fidelities, singlet_fraction, TradeoffRecord,
};
use asymclone::solve::{optimal_fidelity, Method};
use asymclone::tasks::{CloningTask, Variant, Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{Suite, VerifyArgs};
use crate::emit::Num;
use crate::{input, weight_grid, CliError};

#[derive(Serialize)]
struct VerifyJson {
    suite: &'static str,
    d: usize,
    n: usize,
    samples: usize,
    seed: u64,
    worst: Num,
    tolerance: Num,
    passed: bool,
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Monogamy => "monogamy",
        Suite::Frontier => "frontier",
        Suite::Methods => "methods",
        Suite::Chsh => "chsh",
        Suite::Tradeoff => "tradeoff",
    }
}

/// Random interior weights: Dirichlet samples from the sweep grid.
fn samples(n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    let grid = weight_grid(n, count.max(1), seed)?;
    Ok(match n {
        1 => vec![vec![1.0]; count],
        2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let a: f64 = rng.random();
                    vec![a, 1.0 - a]
                })
                .collect()
        }
        _ => grid[n + 1..].to_vec(),
    })
}

fn weights(alpha: Vec<f64>) -> Result<Weights, CliError> {
    Ok(Weights::renormalized(alpha, 1e-9)?)
}

/// Worst value of the suite's statistic and whether it meets the tolerance.
pub fn run_suite(a: &VerifyArgs) -> Result<String, CliError> {
    if a.samples == 0 {
        return Err(input("--samples must be positive"));
    }
    let (worst, tolerance, passed) = match a.suite {
        Suite::Monogamy => {
            let task = CloningTask::symmetric(Variant::UniversalQudit { d: a.d, n: a.n })?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut worst = f64::INFINITY;
            for _ in 0..a.samples {
                let psi = haar_random_state(&task.dims(), &mut rng)?;
                let p: Vec<f64> = per_clone_fidelities(&psi, &task)?
                    .iter()
                    .map(|&f| singlet_fraction(f, a.d))
                    .collect();
                worst = worst.min(monogamy_slack_1n(&p, a.d));
            }
            (worst, -1e-8, worst >= -1e-8)
        }
        Suite::Frontier | Suite::Tradeoff => {
            let variant = if a.suite == Suite::Frontier {
                Variant::UniversalQudit { d: a.d, n: a.n }
            } else {
                if a.n < 2 {
                    return Err(input("tradeoff suite needs --n ≥ 2"));
                }
                Variant::ManyToN { m: a.n - 1, n: a.n }
            };
            let mut worst = 0.0f64;
            for alpha in samples(a.n, a.samples, a.seed)? {
                let task = CloningTask::new(variant.clone(), weights(alpha)?)?;
                let rec = TradeoffRecord::from_report(&optimal_fidelity(&task, Method::Subspace)?);
                worst = worst.max(rec.slack.unwrap_or(f64::INFINITY).abs());
            }
            (worst, 1e-8, worst <= 1e-8)
        }
        Suite::Methods => {
            let mut worst = 0.0f64;
            for alpha in samples(a.n, a.samples, a.seed)? {
                let task = CloningTask::new(Variant::UniversalQudit { d: a.d, n: a.n }, weights(alpha)?)?;
                let dense = optimal_fidelity(&task, Method::Dense)?.fidelity;
                let blocked = optimal_fidelity(&task, Method::Blocked)?.fidelity;
                let sub = optimal_fidelity(&task, Method::Subspace)?.fidelity;
                worst = worst.max((dense - blocked).abs()).max((dense - sub).abs());
            }
            (worst, 1e-9, worst <= 1e-9)
        }
        Suite::Chsh => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut worst = 0.0f64;
            for _ in 0..a.samples {
                let x: f64 = rng.random();
                let c = chsh_monogamy(x, 1.0 - x)?;
                worst = worst.max((c.lambda - c.dense_lambda).abs());
            }
            (worst, 1e-10, worst <= 1e-10)
        }
    };
    let p = a.precision;
    let doc = VerifyJson {
        suite: suite_name(a.suite),
        d: a.d,
        n: a.n,
        samples: a.samples,
        seed: a.seed,
        worst: Num::new(worst, p.max(16)),
        tolerance: Num::new(tolerance, p.max(16)),
        passed,
    };
    let text = format!("{}\n", serde_json::to_string_pretty(&doc).expect("plain data"));
    if passed {
        Ok(text)
    } else {
        Err(CliError::Numerical(format!(
            "{} suite failed: worst {worst:e} against tolerance {tolerance:e}",
            suite_name(a.suite)
        )))
    }
}
