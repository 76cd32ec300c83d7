//! JSON set-definition files.
//!
//! ```json
//! { "name": "yu-oh", "dim": 3, "kind": "rank1",
//!   "vectors": [["1", "0", "0"], ["0", "1", "-1"], ...],
//!   "contexts": [[0, 1, 2], ...] }
//! ```
//!
//! Observable sets use `"kind": "observable"` and `"matrices"` instead of
//! `"vectors"`. Entries are strings such as `"1/2"` or `"1/2+3/4i"` (bare
//! integers are also accepted). Context indices are 0-based and optional;
//! when absent, contexts are the maximal compatible subsets. An optional
//! `"labels"` array names the measurements.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianRational};
use crate::linalg::Matrix;
use crate::measurement::{Measurement, MeasurementKind};
use crate::ray::canonicalize;
use crate::sets::QsicSet;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Rank1,
    Observable,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub name: String,
    pub dim: usize,
    pub kind: SetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<Entry>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contexts: Option<Vec<Vec<usize>>>,
}

fn entry(e: &Entry, location: impl FnOnce() -> String) -> Result<GaussianRational> {
    match e {
        Entry::Int(v) => Ok(gaussian::real(*v)),
        Entry::Text(t) => gaussian::parse(t).map_err(|m| Error::parse(location(), m)),
    }
}

impl SetFile {
    pub fn into_set(self) -> Result<QsicSet> {
        let dim = self.dim;
        let count = match self.kind {
            SetKind::Rank1 => self.vectors.as_ref().map_or(0, Vec::len),
            SetKind::Observable => self.matrices.as_ref().map_or(0, Vec::len),
        };
        let labels = match self.labels {
            Some(l) if l.len() != count => {
                return Err(Error::Validation(format!(
                    "{} labels given for {count} measurements",
                    l.len()
                )))
            }
            Some(l) => l,
            None => {
                let prefix = if self.kind == SetKind::Rank1 {
                    "P"
                } else {
                    "O"
                };
                (1..=count).map(|k| format!("{prefix}{k}")).collect()
            }
        };

        let measurements = match self.kind {
            SetKind::Rank1 => {
                if self.matrices.is_some() {
                    return Err(Error::Validation(
                        "rank1 sets take `vectors`, not `matrices`".into(),
                    ));
                }
                let vectors = self
                    .vectors
                    .ok_or_else(|| Error::Validation("rank1 set has no `vectors` field".into()))?;
                vectors
                    .iter()
                    .zip(labels)
                    .enumerate()
                    .map(|(k, (v, label))| {
                        if v.len() != dim {
                            return Err(Error::Validation(format!(
                                "vector {k} (`{label}`) has {} entries, expected {dim}",
                                v.len()
                            )));
                        }
                        let entries = v
                            .iter()
                            .enumerate()
                            .map(|(j, e)| entry(e, || format!("vectors[{k}][{j}]")))
                            .collect::<Result<Vec<_>>>()?;
                        let target = canonicalize(&entries, dim).map_err(|_| {
                            Error::Validation(format!("vector {k} (`{label}`) is zero"))
                        })?;
                        Ok(Measurement::projector(label, target))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SetKind::Observable => {
                if self.vectors.is_some() {
                    return Err(Error::Validation(
                        "observable sets take `matrices`, not `vectors`".into(),
                    ));
                }
                let matrices = self.matrices.ok_or_else(|| {
                    Error::Validation("observable set has no `matrices` field".into())
                })?;
                matrices
                    .iter()
                    .zip(labels)
                    .enumerate()
                    .map(|(k, (rows, label))| {
                        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                            return Err(Error::Validation(format!(
                                "matrix {k} (`{label}`) is not {dim}x{dim}"
                            )));
                        }
                        let rows = rows
                            .iter()
                            .enumerate()
                            .map(|(i, r)| {
                                r.iter()
                                    .enumerate()
                                    .map(|(j, e)| entry(e, || format!("matrices[{k}][{i}][{j}]")))
                                    .collect::<Result<Vec<_>>>()
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Measurement::observable(label, Matrix::from_rows(rows)?)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        QsicSet::new(self.name, measurements, self.contexts)
    }

    pub fn from_set(set: &QsicSet) -> Self {
        let kind = if set.is_rank_one() {
            SetKind::Rank1
        } else {
            SetKind::Observable
        };
        let text = |z: &GaussianRational| Entry::Text(gaussian::format(z));
        let (vectors, matrices) = match kind {
            SetKind::Rank1 => (
                Some(
                    set.projector_targets()
                        .iter()
                        .map(|t| t.to_rationals().iter().map(text).collect())
                        .collect(),
                ),
                None,
            ),
            SetKind::Observable => (
                None,
                Some(
                    set.measurements()
                        .iter()
                        .map(|m| match m.kind() {
                            MeasurementKind::DichotomicObservable { matrix } => matrix
                                .rows()
                                .map(|r| r.iter().map(text).collect())
                                .collect(),
                            MeasurementKind::RankOneProjector { .. } => unreachable!(),
                        })
                        .collect(),
                ),
            ),
        };
        SetFile {
            name: set.name().to_owned(),
            dim: set.dim(),
            kind,
            labels: Some(
                set.measurements()
                    .iter()
                    .map(|m| m.label().to_owned())
                    .collect(),
            ),
            vectors,
            matrices,
            contexts: Some(set.contexts().to_vec()),
        }
    }
}

pub fn parse_set(text: &str) -> Result<QsicSet> {
    let file: SetFile = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    file.into_set()
}

pub fn load_set(path: impl AsRef<Path>) -> Result<QsicSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_set(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn set_to_json(set: &QsicSet) -> String {
    serde_json::to_string_pretty(&SetFile::from_set(set)).expect("set files serialize")
}
