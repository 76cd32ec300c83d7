//! Monte Carlo traces of the quantum process and of its classical
//! ε-transducer, and an empirical comparison of the two.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64`. Outcomes are
//! drawn by comparing a 128-bit uniform fraction against exact rational
//! cumulative probabilities.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::measurement::Outcome;
use crate::ray::CanonicalRay;
use crate::reachability::StateDistribution;
use crate::sets::QsicSet;
use crate::transducer::{Edge, Transducer};

/// Generator identifier written to trace headers.
pub const GENERATOR: &str = "chacha20/seed_from_u64/u128-fraction";
pub const TRACE_CSV_SCHEMA: &str = "# qsic-trace v1";
pub const DEFAULT_N_MIN: u64 = 1000;
pub const DEFAULT_THRESHOLD: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Quantum,
    Classical,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Quantum => "quantum",
            Source::Classical => "classical",
        })
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quantum" => Ok(Source::Quantum),
            "classical" => Ok(Source::Classical),
            other => Err(Error::parse(
                "source",
                format!("unknown trace source `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub set: String,
    pub seed: u64,
    pub source: Source,
    pub steps: Vec<(String, Outcome)>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Every label belongs to `set` and every outcome suits its measurement.
    pub fn validate(&self, set: &QsicSet) -> Result<()> {
        for (label, outcome) in &self.steps {
            let m = set
                .index_of(label)
                .ok_or_else(|| Error::UnknownMeasurement(label.clone()))?;
            set.measurements()[m].check_outcome(*outcome)?;
        }
        Ok(())
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Index `k` such that the cumulative mass before `k` is at most
/// `u / 2^128` and the cumulative mass through `k` exceeds it.
fn pick<'a>(weights: impl IntoIterator<Item = &'a BigRational>, u: u128) -> usize {
    let u = BigRational::new(BigInt::from(u), BigInt::one() << 128u32);
    let mut cumulative = BigRational::default();
    let mut last = 0;
    for (k, w) in weights.into_iter().enumerate() {
        cumulative += w;
        last = k;
        if u < cumulative {
            return k;
        }
    }
    last
}

fn draw_state<'a>(
    init: &'a StateDistribution<BigRational>,
    rng: &mut ChaCha20Rng,
) -> Result<&'a CanonicalRay> {
    if init.is_empty() {
        return Err(Error::Validation("initial distribution is empty".into()));
    }
    let k = pick(init.iter().map(|(_, p)| p), rng.gen());
    Ok(&init.entries()[k].0)
}

/// A quantum trajectory: initial state from `init`, then uniform measurement
/// choice, Born-rule outcome and Lüders update at every step.
pub fn sample_quantum(
    set: &QsicSet,
    init: &StateDistribution<BigRational>,
    length: usize,
    seed: u64,
) -> Result<Trace> {
    if init.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: init.dim(),
        });
    }
    let mut rng = rng(seed);
    let mut state = draw_state(init, &mut rng)?.clone();
    let mut steps = Vec::with_capacity(length);
    for _ in 0..length {
        let m = &set.measurements()[rng.gen_range(0..set.len())];
        let branches = m.branches(&state)?;
        let k = pick(branches.iter().map(|b| &b.probability), rng.gen());
        let b = branches
            .into_iter()
            .nth(k)
            .expect("a branch with positive mass");
        steps.push((m.label().to_owned(), b.outcome));
        state = b.state;
    }
    Ok(Trace {
        set: set.name().to_owned(),
        seed,
        source: Source::Quantum,
        steps,
    })
}

/// `length` labels drawn uniformly from the set.
pub fn uniform_inputs(set: &QsicSet, length: usize, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    (0..length)
        .map(|_| {
            set.measurements()[rng.gen_range(0..set.len())]
                .label()
                .to_owned()
        })
        .collect()
}

/// One machine step. It sees the current state index, the input and the
/// random draw, nothing else.
fn machine_step(
    t: &Transducer,
    state: usize,
    input: usize,
    draw: u128,
) -> (Outcome, Option<usize>) {
    let row: &[Edge] = t.row(state, input);
    let e = &row[pick(row.iter().map(|e| &e.probability), draw)];
    (e.outcome, e.next)
}

fn input_indices(set: &QsicSet, inputs: &[impl AsRef<str>]) -> Result<Vec<usize>> {
    inputs
        .iter()
        .map(|l| {
            set.index_of(l.as_ref())
                .ok_or_else(|| Error::UnknownMeasurement(l.as_ref().to_owned()))
        })
        .collect()
}

/// Drives the transducer with `inputs`, starting from a state drawn from its
/// initial distribution.
pub fn run_classical(t: &Transducer, inputs: &[impl AsRef<str>], seed: u64) -> Result<Trace> {
    let xs = input_indices(t.set(), inputs)?;
    let mut rng = rng(seed);
    if t.initial().is_empty() {
        return Err(Error::Validation(
            "transducer has no initial distribution".into(),
        ));
    }
    let mut state = t.initial()[pick(t.initial().iter().map(|(_, p)| p), rng.gen())].0;
    let mut steps = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let (outcome, next) = machine_step(t, state, x, rng.gen());
        steps.push((t.set().measurements()[x].label().to_owned(), outcome));
        state = next.ok_or(Error::TruncationExceeded { step: k + 1 })?;
    }
    Ok(Trace {
        set: t.set().name().to_owned(),
        seed,
        source: Source::Classical,
        steps,
    })
}

/// Memoryless model answering each input with a fair coin over its outcomes.
pub fn fair_coin_trace(set: &QsicSet, inputs: &[impl AsRef<str>], seed: u64) -> Result<Trace> {
    let xs = input_indices(set, inputs)?;
    let mut rng = rng(seed);
    let steps = xs
        .iter()
        .map(|&x| {
            let m = &set.measurements()[x];
            (
                m.label().to_owned(),
                m.outcomes()[usize::from(rng.gen::<bool>())],
            )
        })
        .collect();
    Ok(Trace {
        set: set.name().to_owned(),
        seed,
        source: Source::Classical,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub window_length: usize,
    pub n_min: u64,
    pub contexts_compared: usize,
    pub max_total_variation: f64,
    /// The context attaining the maximum, as `x:y x:y | x`.
    pub worst_context: Option<String>,
    pub threshold: f64,
    pub pass: bool,
}

type Symbol = (u32, Outcome);

/// Outcome counts per (previous `window - 1` steps, next input).
fn context_counts(
    trace: &Trace,
    window: usize,
    ids: &mut FxHashMap<String, u32>,
) -> FxHashMap<(Vec<Symbol>, u32), BTreeMap<Outcome, u64>> {
    let symbols: Vec<Symbol> = trace
        .steps
        .iter()
        .map(|(l, y)| {
            let next = ids.len() as u32;
            (*ids.entry(l.clone()).or_insert(next), *y)
        })
        .collect();
    let mut counts: FxHashMap<(Vec<Symbol>, u32), BTreeMap<Outcome, u64>> = FxHashMap::default();
    for w in symbols.windows(window) {
        let (past, last) = w.split_at(window - 1);
        *counts
            .entry((past.to_vec(), last[0].0))
            .or_default()
            .entry(last[0].1)
            .or_default() += 1;
    }
    counts
}

fn total_variation(a: &BTreeMap<Outcome, u64>, b: &BTreeMap<Outcome, u64>) -> f64 {
    let na = a.values().sum::<u64>() as f64;
    let nb = b.values().sum::<u64>() as f64;
    let outcomes: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    outcomes
        .into_iter()
        .map(|o| {
            let pa = a.get(o).copied().unwrap_or(0) as f64 / na;
            let pb = b.get(o).copied().unwrap_or(0) as f64 / nb;
            (pa - pb).abs()
        })
        .sum::<f64>()
        / 2.0
}

/// Compares next-outcome distributions of two traces over every context seen
/// at least `n_min` times in both.
pub fn compare_statistics(
    a: &Trace,
    b: &Trace,
    window: usize,
    n_min: u64,
    threshold: f64,
) -> Result<EquivalenceReport> {
    if window == 0 {
        return Err(Error::Validation("window must be at least 1".into()));
    }
    if a.set != b.set {
        return Err(Error::Validation(format!(
            "traces come from different sets: `{}` and `{}`",
            a.set, b.set
        )));
    }
    let mut ids = FxHashMap::default();
    let ca = context_counts(a, window, &mut ids);
    let cb = context_counts(b, window, &mut ids);
    let mut names = vec![String::new(); ids.len()];
    for (l, k) in ids {
        names[k as usize] = l;
    }
    let mut compared = 0;
    let mut worst: Option<(f64, &(Vec<Symbol>, u32))> = None;
    let mut keys: Vec<_> = ca.keys().collect();
    keys.sort();
    for key in keys {
        let (Some(x), Some(y)) = (ca.get(key), cb.get(key)) else {
            continue;
        };
        if x.values().sum::<u64>() < n_min || y.values().sum::<u64>() < n_min {
            continue;
        }
        compared += 1;
        let tv = total_variation(x, y);
        if worst.is_none_or(|(w, _)| tv > w) {
            worst = Some((tv, key));
        }
    }
    let Some((max_tv, key)) = worst else {
        return Err(Error::InsufficientData { n_min });
    };
    let mut context: Vec<String> = key
        .0
        .iter()
        .map(|(x, y)| format!("{}:{y}", names[*x as usize]))
        .collect();
    context.push(format!("| {}", names[key.1 as usize]));
    Ok(EquivalenceReport {
        window_length: window,
        n_min,
        contexts_compared: compared,
        max_total_variation: max_tv,
        worst_context: Some(context.join(" ")),
        threshold,
        pass: max_tv <= threshold,
    })
}

/// Largest number of occurrences of any context in `trace`, a quick check of
/// whether a given `n_min` can be met at all.
pub fn max_context_occurrences(trace: &Trace, window: usize) -> u64 {
    if window == 0 {
        return 0;
    }
    context_counts(trace, window, &mut FxHashMap::default())
        .values()
        .map(|c| c.values().sum::<u64>())
        .max()
        .unwrap_or(0)
}

pub fn write_trace_csv<W: Write>(out: W, trace: &Trace) -> Result<()> {
    let mut out = out;
    writeln!(out, "{TRACE_CSV_SCHEMA}")?;
    writeln!(out, "# set: {}", trace.set)?;
    writeln!(out, "# seed: {}", trace.seed)?;
    writeln!(out, "# generator: {GENERATOR}")?;
    writeln!(out, "# source: {}", trace.source)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "measurement_label", "outcome"])
        .map_err(csv_error)?;
    for (k, (label, outcome)) in trace.steps.iter().enumerate() {
        w.write_record([k.to_string().as_str(), label, &outcome.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::parse("trace csv", format!("{other:?}")),
    }
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Trace> {
    let mut header: FxHashMap<String, String> = FxHashMap::default();
    let mut body = String::new();
    let mut schema = false;
    for line in input.lines() {
        let line = line?;
        if let Some(comment) = line.strip_prefix('#') {
            if line == TRACE_CSV_SCHEMA {
                schema = true;
            } else if let Some((k, v)) = comment.split_once(':') {
                header.insert(k.trim().to_owned(), v.trim().to_owned());
            }
            continue;
        }
        body.push_str(&line);
        body.push('\n');
    }
    if !schema {
        return Err(Error::parse(
            "line 1",
            format!("missing `{TRACE_CSV_SCHEMA}` header"),
        ));
    }
    let field = |k: &str| {
        header
            .get(k)
            .ok_or_else(|| Error::parse("header", format!("missing `# {k}:` line")))
    };
    let seed = field("seed")?
        .parse::<u64>()
        .map_err(|e| Error::parse("header seed", e.to_string()))?;
    let trace_set = field("set")?.clone();
    let source = Source::from_str(field("source")?)?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "measurement_label", "outcome"] {
        return Err(Error::parse(
            "header row",
            "expected columns index,measurement_label,outcome",
        ));
    }
    let mut steps = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let loc = || format!("row {}", k + 1);
        if record.get(0) != Some(k.to_string().as_str()) {
            return Err(Error::parse(loc(), "indices must run 0, 1, 2, ..."));
        }
        let label = record
            .get(1)
            .ok_or_else(|| Error::parse(loc(), "missing label"))?;
        let outcome = Outcome::from_str(record.get(2).unwrap_or_default())
            .map_err(|e| Error::parse(loc(), e.to_string()))?;
        steps.push((label.to_owned(), outcome));
    }
    Ok(Trace {
        set: trace_set,
        seed,
        source,
        steps,
    })
}
