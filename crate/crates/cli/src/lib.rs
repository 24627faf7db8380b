//! Command-line front end for `asymclone`: task parsing, solver dispatch and
//! JSON/CSV output. [`run`] is the whole program; `main` only forwards the
//! process arguments and exit code.

pub mod args;
pub mod emit;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use asymclone::analyze::{economy_report_with, pareto_sweep, EconomyConfig, SweepConfig};
use asymclone::solve::{optimal_fidelity_with, Method, SolverConfig};
use asymclone::tasks::{gamma_of, validate_phase_covariance, CloningTask, Distribution, Variant, Weights};
use clap::Parser;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use thiserror::Error;

use args::{Cli, Command, DistArgs, DistFormat, MethodArg, TaskArgs, TaskKind};
use emit::{emit, format_float, Output, TaskBlock};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ASYMCLONE_THREADS";

/// Tolerance for renormalizing user weights.
pub const ALPHA_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<asymclone::Error> for CliError {
    fn from(e: asymclone::Error) -> Self {
        match e {
            asymclone::Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Parses `argv` (program name first), runs the command and writes to the
/// process streams. Returns the exit code: 0 on success, 1 on invalid
/// input, 2 on numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let _ = writeln!(err, "{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return 1;
        }
    };
    let result = with_threads(|| dispatch(cli.command));
    match result {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn with_threads<R: Send>(f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| input(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            if n == 0 {
                return Err(input(format!("{THREADS_ENV} must be positive")));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| input(e.to_string()))?;
            pool.install(f)
        }
        Err(_) => f(),
    }
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Solve(a) => {
            let task = build_task(&a.task)?;
            let method = resolve_method(a.method, &task, false);
            let report = optimal_fidelity_with(&task, method, &SolverConfig::default())?;
            Ok(emit(&Output::Fidelity(&report), a.output.format, a.output.precision))
        }
        Command::Sweep(a) => {
            if a.task.alpha.is_some() {
                return Err(input("sweep takes weights from --grid, not --alpha"));
            }
            let task = build_task(&a.task)?;
            let n = task.variant.clones();
            let grid = weight_grid(n, a.grid, a.seed)?;
            let method = resolve_method(a.method, &task, true);
            let config = SweepConfig {
                method: Some(method),
                solver: SolverConfig {
                    seed: a.seed,
                    ..SolverConfig::default()
                },
            };
            let records = pareto_sweep(&task.variant, &grid, &config);
            let text = emit(
                &Output::Sweep {
                    task: &task,
                    method: method.name(),
                    grid: &grid,
                    records: &records,
                },
                a.output.format,
                a.output.precision,
            );
            if let Some(Err(e)) = records.iter().find(|r| r.is_err()) {
                if matches!(e, asymclone::Error::Numerical { .. }) {
                    return Err(CliError::Numerical(format!("sweep point failed: {e}")));
                }
            }
            Ok(text)
        }
        Command::Economy(a) => {
            let task = build_task(&a.task)?;
            let config = EconomyConfig {
                seed: a.seed,
                restarts: a.restarts,
                ..EconomyConfig::default()
            };
            let report = economy_report_with(&task, &config)?;
            Ok(emit(&Output::Economy(&report), a.output.format, a.output.precision))
        }
        Command::Verify(a) => verify::run_suite(&a),
        Command::Gamma(a) => gamma_command(&a),
        Command::ValidateDist(a) => validate_command(&a),
    }
}

fn resolve_method(m: MethodArg, task: &CloningTask, sweep: bool) -> Method {
    match m {
        MethodArg::Dense => Method::Dense,
        MethodArg::Blocked => Method::Blocked,
        MethodArg::Subspace => Method::Subspace,
        MethodArg::ClosedForm => Method::ClosedForm,
        MethodArg::Auto if sweep => asymclone::analyze::default_method(&task.variant),
        MethodArg::Auto => {
            let side = task.side().unwrap_or(usize::MAX);
            if side <= SolverConfig::default().dense_cap {
                Method::Dense
            } else {
                Method::Blocked
            }
        }
    }
}

/// The task described by the flags or by `--task-file`.
pub fn build_task(a: &TaskArgs) -> Result<CloningTask, CliError> {
    let block = match &a.task_file {
        Some(path) => read_task_file(path)?,
        None => block_from_flags(a)?,
    };
    task_from_block(&block)
}

fn read_task_file(path: &Path) -> Result<TaskBlock, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let block = match value.get("task") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(block).map_err(|e| input(format!("{}: bad task block: {e}", path.display())))
}

fn block_from_flags(a: &TaskArgs) -> Result<TaskBlock, CliError> {
    let kind = a.task.ok_or_else(|| input("--task is required"))?;
    let gamma = match (&a.gamma, &a.dist) {
        (Some(g), _) => Some(*g),
        (None, Some(spec)) => {
            let dist = parse_distribution(spec)?;
            let [cos_moment, ..] = validate_phase_covariance(&dist);
            if cos_moment > 1e-8 {
                return Err(input(format!(
                    "distribution is not symmetric about the equator (|∫f cosθ| = {cos_moment:e})"
                )));
            }
            Some(gamma_of(&dist)?)
        }
        (None, None) => None,
    };
    let variant = match kind {
        TaskKind::Universal => "universal",
        TaskKind::StateDependent => "state-dependent",
        TaskKind::Equatorial => "equatorial",
        TaskKind::ManyToN => "many-to-n",
        TaskKind::Chsh => "chsh",
    };
    Ok(TaskBlock {
        variant: variant.into(),
        d: a.d,
        m: a.m,
        n: a.n,
        gamma,
        alpha: a.alpha.clone(),
    })
}

fn task_from_block(b: &TaskBlock) -> Result<CloningTask, CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| input(format!("{} task needs --{flag}", b.variant)));
    let reject = |present: bool, flag: &str| {
        if present {
            Err(input(format!("--{flag} does not apply to the {} task", b.variant)))
        } else {
            Ok(())
        }
    };
    let variant = match b.variant.as_str() {
        "universal" => {
            reject(b.m.is_some(), "m")?;
            reject(b.gamma.is_some(), "gamma")?;
            Variant::UniversalQudit {
                d: need(b.d, "d")?,
                n: need(b.n, "n")?,
            }
        }
        "state-dependent" => {
            reject(b.d.is_some(), "d")?;
            reject(b.m.is_some(), "m")?;
            let gamma = b
                .gamma
                .ok_or_else(|| input("state-dependent task needs --gamma or --dist"))?;
            Variant::StateDependentQubit {
                gamma,
                n: need(b.n, "n")?,
            }
        }
        "equatorial" => {
            reject(b.d.is_some(), "d")?;
            reject(b.m.is_some(), "m")?;
            reject(b.gamma.is_some(), "gamma")?;
            Variant::Equatorial { n: need(b.n, "n")? }
        }
        "many-to-n" => {
            reject(b.d.is_some(), "d")?;
            reject(b.gamma.is_some(), "gamma")?;
            Variant::ManyToN {
                m: need(b.m, "m")?,
                n: need(b.n, "n")?,
            }
        }
        "chsh" => {
            reject(b.d.is_some(), "d")?;
            reject(b.m.is_some(), "m")?;
            reject(b.gamma.is_some(), "gamma")?;
            if b.n.is_some_and(|n| n != 2) {
                return Err(input("chsh task has exactly 2 clones"));
            }
            Variant::ChshPair
        }
        other => return Err(input(format!("unknown task variant {other:?}"))),
    };
    let weights = match &b.alpha {
        Some(alpha) => {
            if alpha.len() != variant.clones() {
                return Err(input(format!("{} weights given for {} clones", alpha.len(), variant.clones())));
            }
            Weights::renormalized(alpha.clone(), ALPHA_SUM_TOL)?
        }
        None => Weights::uniform(variant.clones()),
    };
    Ok(CloningTask::new(variant, weights)?)
}

fn preset(name: &str, theta0: Option<f64>, theta1: Option<f64>) -> Result<Distribution, CliError> {
    let plain = |d: Distribution| {
        if theta0.is_some() || theta1.is_some() {
            Err(input(format!("preset {name} takes no angles")))
        } else {
            Ok(d)
        }
    };
    match name {
        "uniform-sphere" => plain(Distribution::uniform_sphere()),
        "equator" => plain(Distribution::equator()),
        "poles" => plain(Distribution::poles()),
        "belt" => match (theta0, theta1) {
            (Some(a), Some(b)) => Ok(Distribution::belt(a, b)?),
            _ => Err(input("belt preset needs theta0 and theta1")),
        },
        other => Err(input(format!(
            "unknown preset {other:?} (uniform-sphere, equator, poles, belt)"
        ))),
    }
}

/// `preset:NAME`, `preset:belt:θ0:θ1`, or a path to a JSON file holding
/// `{"preset": …}` or `{"knots": [[θ, f], …]}`.
pub fn parse_distribution(spec: &str) -> Result<Distribution, CliError> {
    if let Some(rest) = spec.strip_prefix("preset:") {
        let mut parts = rest.split(':');
        let name = parts.next().unwrap_or_default();
        let angles: Vec<f64> = parts
            .map(|p| p.parse::<f64>().map_err(|_| input(format!("bad angle {p:?} in {spec:?}"))))
            .collect::<Result<_, _>>()?;
        return match angles.as_slice() {
            [] => preset(name, None, None),
            [a, b] => preset(name, Some(*a), Some(*b)),
            _ => Err(input(format!("expected preset:NAME or preset:belt:θ0:θ1, got {spec:?}"))),
        };
    }
    let text = std::fs::read_to_string(spec).map_err(|e| input(format!("{spec}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| input(format!("{spec}: {e}")))?;
    let bad = || input(format!("{spec}: expected {{\"preset\": …}} or {{\"knots\": [[θ, f], …]}}"));
    let obj = value.as_object().ok_or_else(bad)?;
    let angle = |key: &str| -> Result<Option<f64>, CliError> {
        obj.get(key).map(|v| v.as_f64().ok_or_else(bad)).transpose()
    };
    match (obj.get("preset"), obj.get("knots")) {
        (Some(name), None) if obj.keys().all(|k| ["preset", "theta0", "theta1"].contains(&k.as_str())) => {
            preset(name.as_str().ok_or_else(bad)?, angle("theta0")?, angle("theta1")?)
        }
        (None, Some(knots)) if obj.len() == 1 => {
            let pairs: Vec<(f64, f64)> = serde_json::from_value(knots.clone()).map_err(|_| bad())?;
            Ok(Distribution::knots(pairs)?)
        }
        _ => Err(bad()),
    }
}

fn gamma_command(a: &DistArgs) -> Result<String, CliError> {
    let dist = parse_distribution(&a.dist)?;
    let gamma = gamma_of(&dist)?;
    Ok(match a.format {
        DistFormat::Text => format!("{}\n", format_float(gamma, a.precision)),
        DistFormat::Json => {
            let v = serde_json::json!({ "gamma": emit::Num::new(gamma, a.precision) });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("plain data"))
        }
    })
}

fn validate_command(a: &DistArgs) -> Result<String, CliError> {
    let dist = parse_distribution(&a.dist)?;
    let mass = dist.total_mass();
    let normalized = dist.is_normalized();
    let moments = validate_phase_covariance(&dist);
    let covariant = moments.iter().all(|m| *m <= 1e-8);
    let gamma = if normalized { Some(gamma_of(&dist)?) } else { None };
    if !normalized {
        return Err(input(format!("distribution integrates to {}, not 1", format_float(mass, a.precision))));
    }
    if !covariant {
        return Err(input(format!(
            "distribution is not symmetric about the equator (|∫f cosθ| = {})",
            format_float(moments[0], a.precision)
        )));
    }
    let p = a.precision;
    Ok(match a.format {
        DistFormat::Text => format!(
            "mass {}\ngamma {}\nphase_moments {}\nvalid true\n",
            format_float(mass, p),
            gamma.map(|g| format_float(g, p)).unwrap_or_default(),
            moments.iter().map(|m| format_float(*m, p)).collect::<Vec<_>>().join(","),
        ),
        DistFormat::Json => {
            let v = serde_json::json!({
                "mass": emit::Num::new(mass, p),
                "gamma": gamma.map(|g| emit::Num::new(g, p)),
                "phase_moments": moments.iter().map(|m| emit::Num::new(*m, p)).collect::<Vec<_>>(),
                "valid": true,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("plain data"))
        }
    })
}

/// Sweep weights: evenly spaced `α₁` for two clones; for more, the simplex
/// vertices, the centroid, then `size` seeded Dirichlet(1, …, 1) samples.
pub fn weight_grid(n: usize, size: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    if size == 0 {
        return Err(input("--grid must be positive"));
    }
    Ok(match n {
        0 => return Err(input("task has no clones")),
        1 => vec![vec![1.0]],
        2 if size == 1 => vec![vec![0.5, 0.5]],
        2 => (0..size)
            .map(|k| {
                let a = k as f64 / (size - 1) as f64;
                vec![a, 1.0 - a]
            })
            .collect(),
        _ => {
            let mut grid: Vec<Vec<f64>> = (0..n)
                .map(|k| (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
                .collect();
            grid.push(vec![1.0 / n as f64; n]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..size {
                let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                let s: f64 = raw.iter().sum();
                let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
                let rest: f64 = w[..n - 1].iter().sum();
                w[n - 1] = (1.0 - rest).max(0.0);
                grid.push(w);
            }
            grid
        }
    })
}
