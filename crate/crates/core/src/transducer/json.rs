//! JSON form of a transducer. Probabilities are exact `"a/b"` strings and
//! `next` is `null` on edges leaving a truncated machine.

use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Edge, Transducer};
use crate::error::{Error, Result};
use crate::measurement::Outcome;
use crate::ray::CanonicalRay;
use crate::set_file::SetFile;

pub const TRANSDUCER_FORMAT: &str = "qsic-transducer";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    outcome: String,
    probability: String,
    next: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransducerFile {
    format: String,
    version: u32,
    set: SetFile,
    depth: Option<usize>,
    truncated: bool,
    states: Vec<String>,
    initial: Vec<(usize, String)>,
    transitions: Vec<Vec<Vec<EdgeFile>>>,
}

pub fn transducer_to_json(t: &Transducer) -> String {
    let file = TransducerFile {
        format: TRANSDUCER_FORMAT.to_owned(),
        version: VERSION,
        set: SetFile::from_set(t.set()),
        depth: t.depth(),
        truncated: t.is_truncated(),
        states: t.states().iter().map(ToString::to_string).collect(),
        initial: t
            .initial()
            .iter()
            .map(|(s, p)| (*s, p.to_string()))
            .collect(),
        transitions: t
            .transitions()
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| EdgeFile {
                                outcome: e.outcome.to_string(),
                                probability: e.probability.to_string(),
                                next: e.next,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("transducers serialize")
}

fn probability(text: &str, location: impl FnOnce() -> String) -> Result<BigRational> {
    BigRational::from_str(text)
        .map_err(|e| Error::parse(location(), format!("bad probability `{text}`: {e}")))
}

/// Reads a machine written by [`transducer_to_json`]. Structure is checked;
/// the unifilarity and stochasticity audits are left to the caller.
pub fn transducer_from_json(text: &str) -> Result<Transducer> {
    let file: TransducerFile = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if file.format != TRANSDUCER_FORMAT || file.version != VERSION {
        return Err(Error::parse(
            "format",
            format!(
                "expected {TRANSDUCER_FORMAT} v{VERSION}, found {} v{}",
                file.format, file.version
            ),
        ));
    }
    let set = file.set.into_set()?;
    let states = file
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let ray = CanonicalRay::from_str(s)
                .map_err(|e| Error::parse(format!("states[{k}]"), e.to_string()))?;
            if ray.dim() != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    found: ray.dim(),
                });
            }
            Ok(ray)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = states.len();
    let index = |k: usize, location: &dyn Fn() -> String| {
        if k < n {
            Ok(k)
        } else {
            Err(Error::parse(
                location(),
                format!("state index {k} out of range"),
            ))
        }
    };
    let initial = file
        .initial
        .iter()
        .enumerate()
        .map(|(k, (s, p))| {
            let loc = || format!("initial[{k}]");
            Ok((index(*s, &loc)?, probability(p, loc)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if file.transitions.len() != n {
        return Err(Error::parse(
            "transitions",
            format!("{} rows for {n} states", file.transitions.len()),
        ));
    }
    let transitions = file
        .transitions
        .into_iter()
        .enumerate()
        .map(|(i, rows)| {
            if rows.len() != set.len() {
                return Err(Error::parse(
                    format!("transitions[{i}]"),
                    format!("{} inputs for a set of {}", rows.len(), set.len()),
                ));
            }
            rows.into_iter()
                .enumerate()
                .map(|(x, row)| {
                    row.into_iter()
                        .enumerate()
                        .map(|(k, e)| {
                            let loc = || format!("transitions[{i}][{x}][{k}]");
                            let outcome = Outcome::from_str(&e.outcome)
                                .map_err(|m| Error::parse(loc(), m.to_string()))?;
                            let next = e.next.map(|j| index(j, &loc)).transpose()?;
                            Ok(Edge {
                                outcome,
                                probability: probability(&e.probability, loc)?,
                                next,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Transducer::from_parts(
        set,
        states,
        transitions,
        initial,
        file.depth,
        file.truncated,
    ))
}
