//! JSON and CSV rendering with fixed-precision numbers and stable key order.

use std::str::FromStr;

use asymclone::analyze::{Classification, EconomyReport, TradeoffRecord, Witness};
use asymclone::solve::FidelityReport;
use asymclone::tasks::{CloningTask, Variant};
use serde::{Deserialize, Serialize, Serializer};

use crate::args::Format;

/// `value` with `precision` decimals, trailing zeros trimmed.
pub fn format_float(value: f64, precision: usize) -> String {
    let mut s = format!("{value:.precision$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// A computed number written verbatim into JSON; non-finite values become null.
#[derive(Clone, Debug)]
pub struct Num(Option<String>);

impl Num {
    pub fn new(value: f64, precision: usize) -> Self {
        Num(value.is_finite().then(|| format_float(value, precision)))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Some(text) => serde_json::Number::from_str(text)
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            None => s.serialize_none(),
        }
    }
}

fn nums(values: &[f64], precision: usize) -> Vec<Num> {
    values.iter().map(|&v| Num::new(v, precision)).collect()
}

/// The task part of every JSON document; inputs are echoed at full
/// precision so that the block can be read back with `--task-file`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaskBlock {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

impl TaskBlock {
    pub fn of(task: &CloningTask, with_alpha: bool) -> Self {
        let (d, m, n, gamma) = match task.variant {
            Variant::UniversalQudit { d, n } => (Some(d), None, Some(n), None),
            Variant::StateDependentQubit { gamma, n } => (None, None, Some(n), Some(gamma)),
            Variant::Equatorial { n } => (None, None, Some(n), None),
            Variant::ManyToN { m, n } => (None, Some(m), Some(n), None),
            Variant::ChshPair => (None, None, None, None),
        };
        Self {
            variant: task.variant.name().into(),
            d,
            m,
            n,
            gamma,
            alpha: with_alpha.then(|| task.weights.as_slice().to_vec()),
        }
    }
}

#[derive(Serialize)]
struct FidelityJson {
    task: TaskBlock,
    method: &'static str,
    fidelity: Num,
    per_clone: Vec<Num>,
    singlet_fractions: Option<Vec<Num>>,
    slack: Option<Num>,
    lambda_sub: Option<Num>,
    degeneracy: Option<usize>,
    sector: Option<i64>,
    residual: Num,
}

#[derive(Serialize)]
struct EconomyJson {
    task: TaskBlock,
    fidelity: Num,
    classification: &'static str,
    ancilla_dim: Option<usize>,
    construction: &'static str,
    heuristic: bool,
    heuristic_deviation: Option<Num>,
    witness: &'static str,
    mixture_weights: Vec<Num>,
    schmidt_spectrum: Vec<Num>,
    input_marginal_residual: Num,
    eigen_residual: Num,
}

#[derive(Serialize)]
struct PointJson {
    alpha: Vec<Num>,
    fidelity: Option<Num>,
    fidelities: Option<Vec<Num>>,
    singlet_fractions: Option<Vec<Num>>,
    slack: Option<Num>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepJson {
    task: TaskBlock,
    method: &'static str,
    points: Vec<PointJson>,
}

/// Anything the CLI prints.
pub enum Output<'a> {
    Fidelity(&'a FidelityReport),
    Economy(&'a EconomyReport),
    /// Task family, method name, grid and per-point outcomes.
    Sweep {
        task: &'a CloningTask,
        method: &'static str,
        grid: &'a [Vec<f64>],
        records: &'a [asymclone::Result<TradeoffRecord>],
    },
}

pub fn emit(output: &Output, format: Format, precision: usize) -> String {
    match format {
        Format::Json => emit_json(output, precision),
        Format::Csv => emit_csv(output, precision),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn classification_fields(c: Classification) -> (&'static str, Option<usize>) {
    match c {
        Classification::Economical => ("economical", None),
        Classification::AncillaDim(k) => ("ancilla", Some(k)),
        Classification::Unresolved => ("unresolved", None),
    }
}

fn emit_json(output: &Output, p: usize) -> String {
    match output {
        Output::Fidelity(r) => {
            let rec = TradeoffRecord::from_report(r);
            to_json(&FidelityJson {
                task: TaskBlock::of(&r.task, true),
                method: r.method.name(),
                fidelity: Num::new(r.fidelity, p),
                per_clone: nums(&r.per_clone, p),
                singlet_fractions: rec.singlet_fractions.as_deref().map(|v| nums(v, p)),
                slack: rec.slack.map(|v| Num::new(v, p)),
                lambda_sub: r.lambda_sub.map(|v| Num::new(v, p)),
                degeneracy: r.degeneracy,
                sector: r.sector,
                residual: Num::new(r.residual, p),
            })
        }
        Output::Economy(e) => {
            let (classification, ancilla_dim) = classification_fields(e.classification);
            let (witness, weights) = match &e.witness {
                Witness::Pure(_) => ("pure", vec![1.0]),
                Witness::Mixture(m) => ("mixture", m.iter().map(|(w, _)| *w).collect()),
            };
            to_json(&EconomyJson {
                task: TaskBlock::of(&e.task, true),
                fidelity: Num::new(e.fidelity, p),
                classification,
                ancilla_dim,
                construction: e.construction.name(),
                heuristic: e.heuristic,
                heuristic_deviation: e.heuristic_deviation.map(|v| Num::new(v, p)),
                witness,
                mixture_weights: nums(&weights, p),
                schmidt_spectrum: nums(&e.schmidt_spectrum, p),
                input_marginal_residual: Num::new(e.input_marginal_residual, p),
                eigen_residual: Num::new(e.eigen_residual, p),
            })
        }
        Output::Sweep {
            task,
            method,
            grid,
            records,
        } => {
            let points = grid
                .iter()
                .zip(records.iter())
                .map(|(alpha, r)| match r {
                    Ok(rec) => PointJson {
                        alpha: nums(rec.alpha.as_slice(), p),
                        fidelity: Some(Num::new(rec.fidelity, p)),
                        fidelities: Some(nums(&rec.fidelities, p)),
                        singlet_fractions: rec.singlet_fractions.as_deref().map(|v| nums(v, p)),
                        slack: rec.slack.map(|v| Num::new(v, p)),
                        error: None,
                    },
                    Err(e) => PointJson {
                        alpha: nums(alpha, p),
                        fidelity: None,
                        fidelities: None,
                        singlet_fractions: None,
                        slack: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            to_json(&SweepJson {
                task: TaskBlock::of(task, false),
                method,
                points,
            })
        }
    }
}

fn csv_text(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// `alpha_1..alpha_N,F_1..F_N,p_1..p_N,slack`.
fn tradeoff_header(n: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(3 * n + 1);
    for prefix in ["alpha", "F", "p"] {
        h.extend((1..=n).map(|k| format!("{prefix}_{k}")));
    }
    h.push("slack".into());
    h
}

fn tradeoff_row(alpha: &[f64], rec: Option<&TradeoffRecord>, n: usize, p: usize) -> Vec<String> {
    let fmt = |v: f64| format_float(v, p);
    let mut row: Vec<String> = alpha.iter().map(|&v| fmt(v)).collect();
    match rec {
        Some(r) => {
            row.extend(r.fidelities.iter().map(|&v| fmt(v)));
            match &r.singlet_fractions {
                Some(ps) => row.extend(ps.iter().map(|&v| fmt(v))),
                None => row.extend(std::iter::repeat_n(String::new(), n)),
            }
            row.push(r.slack.map(fmt).unwrap_or_default());
        }
        None => row.extend(std::iter::repeat_n(String::new(), 2 * n + 1)),
    }
    row
}

fn emit_csv(output: &Output, p: usize) -> String {
    match output {
        Output::Fidelity(r) => {
            let n = r.task.variant.clones();
            let rec = TradeoffRecord::from_report(r);
            csv_text(tradeoff_header(n), vec![tradeoff_row(r.task.weights.as_slice(), Some(&rec), n, p)])
        }
        Output::Sweep { task, grid, records, .. } => {
            let n = task.variant.clones();
            let rows = grid
                .iter()
                .zip(records.iter())
                .map(|(alpha, r)| tradeoff_row(alpha, r.as_ref().ok(), n, p))
                .collect();
            csv_text(tradeoff_header(n), rows)
        }
        Output::Economy(e) => {
            let (classification, ancilla_dim) = classification_fields(e.classification);
            let k = e.schmidt_spectrum.len();
            let mut header: Vec<String> = [
                "classification",
                "ancilla_dim",
                "construction",
                "heuristic",
                "heuristic_deviation",
                "fidelity",
                "input_marginal_residual",
                "eigen_residual",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            header.extend((1..=k).map(|j| format!("schmidt_{j}")));
            let mut row = vec![
                classification.to_string(),
                ancilla_dim.map(|a| a.to_string()).unwrap_or_default(),
                e.construction.name().to_string(),
                e.heuristic.to_string(),
                e.heuristic_deviation.map(|v| format_float(v, p)).unwrap_or_default(),
                format_float(e.fidelity, p),
                format_float(e.input_marginal_residual, p),
                format_float(e.eigen_residual, p),
            ];
            row.extend(e.schmidt_spectrum.iter().map(|&v| format_float(v, p)));
            csv_text(header, vec![row])
        }
    }
}
