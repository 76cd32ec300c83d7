//! Measurement sets with their context (compatibility) structure, and the
//! two built-in sets: the Peres-Mermin square and the Yu-Oh qutrit set.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Matrix};
use crate::measurement::{commute, gaussian_matrix, outcome_probability, Measurement, Outcome};
use crate::ray::{canonicalize, CanonicalRay};

pub const PERES_MERMIN: &str = "peres-mermin";
pub const YU_OH: &str = "yu-oh";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QsicSet {
    name: String,
    dim: usize,
    measurements: Vec<Measurement>,
    contexts: Vec<Vec<usize>>,
}

impl QsicSet {
    /// Validates and builds a set. When `contexts` is `None` they are the
    /// maximal sets of pairwise-commuting measurements.
    pub fn new(
        name: impl Into<String>,
        measurements: Vec<Measurement>,
        contexts: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let name = name.into();
        let dim = measurements
            .first()
            .map(Measurement::dim)
            .ok_or_else(|| Error::Validation(format!("set `{name}` has no measurements")))?;
        if dim == 0 {
            return Err(Error::Validation(format!("set `{name}` has dimension 0")));
        }
        if let Some(m) = measurements.iter().find(|m| m.dim() != dim) {
            return Err(Error::Validation(format!(
                "measurement `{}` has dimension {}, expected {dim}",
                m.label(),
                m.dim()
            )));
        }
        let mut labels = HashSet::new();
        if let Some(m) = measurements.iter().find(|m| !labels.insert(m.label())) {
            return Err(Error::Validation(format!(
                "duplicate measurement label `{}`",
                m.label()
            )));
        }

        let n = measurements.len();
        let compatible: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| commute(&measurements[i], &measurements[j]))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;

        let contexts = match contexts {
            Some(contexts) => {
                for (c, ctx) in contexts.iter().enumerate() {
                    if let Some(&bad) = ctx.iter().find(|&&k| k >= n) {
                        return Err(Error::Validation(format!(
                            "context {c} refers to measurement index {bad}, but the set has {n}"
                        )));
                    }
                    for (a, &i) in ctx.iter().enumerate() {
                        for &j in &ctx[a + 1..] {
                            if !compatible[i][j] {
                                return Err(Error::Validation(format!(
                                    "context {c}: `{}` and `{}` do not commute",
                                    measurements[i].label(),
                                    measurements[j].label()
                                )));
                            }
                        }
                    }
                }
                contexts
            }
            None => maximal_cliques(&compatible),
        };

        Ok(QsicSet {
            name,
            dim,
            measurements,
            contexts,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.label() == label)
    }

    pub fn is_rank_one(&self) -> bool {
        self.measurements.iter().all(|m| m.target().is_some())
    }

    pub fn projector_targets(&self) -> Vec<&CanonicalRay> {
        self.measurements
            .iter()
            .filter_map(Measurement::target)
            .collect()
    }

    /// Same measurement operators and contexts, ignoring name and labels.
    pub fn equivalent(&self, other: &QsicSet) -> bool {
        self.dim == other.dim
            && self.contexts == other.contexts
            && self.measurements.len() == other.measurements.len()
            && self
                .measurements
                .iter()
                .zip(&other.measurements)
                .all(|(a, b)| a.kind() == b.kind())
    }

    /// The default initial ensemble: the projector rays of a rank-one set, or
    /// the joint eigenstates of every context of an observable set.
    pub fn canonical_ensemble(&self) -> Result<Vec<CanonicalRay>> {
        let mut seen = HashSet::new();
        let states: Vec<CanonicalRay> = if self.is_rank_one() {
            self.projector_targets().into_iter().cloned().collect()
        } else {
            context_eigenstates(self)?
                .into_iter()
                .map(|e| e.state)
                .collect()
        };
        Ok(states
            .into_iter()
            .filter(|s| seen.insert(s.clone()))
            .collect())
    }
}

/// Maximal cliques of a compatibility graph, each sorted, in lexicographic order.
fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn expand(
        adj: &[Vec<bool>],
        r: &mut Vec<usize>,
        p: Vec<usize>,
        mut x: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let mut p_rest = p.clone();
        for v in p {
            let np = p_rest
                .iter()
                .copied()
                .filter(|&u| u != v && adj[v][u])
                .collect();
            let nx = x.iter().copied().filter(|&u| u != v && adj[v][u]).collect();
            r.push(v);
            expand(adj, r, np, nx, out);
            r.pop();
            p_rest.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    expand(
        adj,
        &mut Vec::new(),
        (0..adj.len()).collect(),
        Vec::new(),
        &mut out,
    );
    out.sort();
    out
}

/// A joint eigenstate of one context, keyed by its outcome signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextEigenstate {
    pub context: usize,
    pub outcomes: Vec<Outcome>,
    pub state: CanonicalRay,
}

impl ContextEigenstate {
    /// e.g. `c0:+1,-1,-1`
    pub fn signature(&self) -> String {
        let o: Vec<String> = self.outcomes.iter().map(Outcome::to_string).collect();
        format!("c{}:{}", self.context, o.join(","))
    }
}

/// Joint eigenstates of the observables in each context. Every nonzero joint
/// eigenspace must be one-dimensional.
pub fn context_eigenstates(set: &QsicSet) -> Result<Vec<ContextEigenstate>> {
    let n = set.dim();
    let half = Complex::new(
        BigRational::new(BigInt::one(), BigInt::from(2)),
        BigRational::zero(),
    );
    let id: ComplexMatrix<BigRational> = Matrix::identity(n);
    let mut out = Vec::new();
    for (c, ctx) in set.contexts().iter().enumerate() {
        let ops: Vec<ComplexMatrix<BigRational>> = ctx
            .iter()
            .map(|&k| match set.measurements()[k].kind() {
                crate::measurement::MeasurementKind::DichotomicObservable { matrix } => {
                    Ok(matrix.clone())
                }
                _ => Err(Error::Validation(format!(
                    "context {c} mixes projectors into an observable eigenbasis"
                ))),
            })
            .collect::<Result<_>>()?;
        for signs in 0u32..(1 << ops.len()) {
            let mut proj = id.clone();
            let mut outcomes = Vec::with_capacity(ops.len());
            for (b, op) in ops.iter().enumerate() {
                let minus = signs >> (ops.len() - 1 - b) & 1 == 1;
                let factor = if minus { &id - op } else { &id + op };
                proj = &proj * &factor.scale(&half);
                outcomes.push(if minus { Outcome::Minus } else { Outcome::Plus });
            }
            if proj.is_zero() {
                continue;
            }
            let columns: Vec<CanonicalRay> = (0..n)
                .filter_map(|j| {
                    let col: Vec<_> = (0..n).map(|i| proj.get(i, j).clone()).collect();
                    canonicalize(&col, n).ok()
                })
                .collect();
            if columns.iter().any(|r| *r != columns[0]) {
                return Err(Error::Validation(format!(
                    "context {c} has a joint eigenspace of rank > 1; supply an explicit initial ensemble"
                )));
            }
            out.push(ContextEigenstate {
                context: c,
                outcomes,
                state: columns[0].clone(),
            });
        }
    }
    Ok(out)
}

fn pauli(name: char) -> ComplexMatrix<BigRational> {
    let rows: [&[(i64, i64)]; 2] = match name {
        'x' => [&[(0, 0), (1, 0)], &[(1, 0), (0, 0)]],
        'y' => [&[(0, 0), (0, -1)], &[(0, 1), (0, 0)]],
        'z' => [&[(1, 0), (0, 0)], &[(0, 0), (-1, 0)]],
        _ => [&[(1, 0), (0, 0)], &[(0, 0), (1, 0)]],
    };
    gaussian_matrix(&rows).expect("2x2 literal")
}

/// The nine two-qubit observables of the Peres-Mermin square. Rows are
/// `z1 z2 zz`, `x2 x1 xx`, `zx xz yy`; the six contexts are the three rows
/// followed by the three columns.
pub fn peres_mermin() -> QsicSet {
    const SQUARE: [(&str, char, char); 9] = [
        ("z1", 'z', '1'),
        ("z2", '1', 'z'),
        ("zz", 'z', 'z'),
        ("x2", '1', 'x'),
        ("x1", 'x', '1'),
        ("xx", 'x', 'x'),
        ("zx", 'z', 'x'),
        ("xz", 'x', 'z'),
        ("yy", 'y', 'y'),
    ];
    let measurements = SQUARE
        .iter()
        .map(|&(label, a, b)| {
            Measurement::observable(label, pauli(a).kron(&pauli(b)))
                .expect("Pauli products are valid")
        })
        .collect();
    let contexts = vec![
        vec![0, 1, 2],
        vec![3, 4, 5],
        vec![6, 7, 8],
        vec![0, 3, 6],
        vec![1, 4, 7],
        vec![2, 5, 8],
    ];
    QsicSet::new(PERES_MERMIN, measurements, Some(contexts)).expect("Peres-Mermin square is valid")
}

/// The 24 joint eigenstates of the Peres-Mermin contexts, four per context,
/// in context order.
pub fn pm_eigenstates() -> Vec<ContextEigenstate> {
    context_eigenstates(&peres_mermin()).expect("Peres-Mermin contexts are complete")
}

pub const YU_OH_RAYS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [0, 1, -1],
    [1, 0, -1],
    [1, -1, 0],
    [0, 1, 1],
    [1, 0, 1],
    [1, 1, 0],
    [-1, 1, 1],
    [1, -1, 1],
    [1, 1, -1],
    [1, 1, 1],
];

/// The 13 rank-one qutrit projectors of Yu and Oh, labelled `YO-1` to `YO-13`.
pub fn yu_oh() -> QsicSet {
    let measurements = YU_OH_RAYS
        .iter()
        .enumerate()
        .map(|(k, v)| {
            Measurement::projector(
                format!("YO-{}", k + 1),
                CanonicalRay::from_integers(v).expect("nonzero"),
            )
        })
        .collect();
    QsicSet::new(YU_OH, measurements, None).expect("Yu-Oh set is valid")
}

/// Built-in set by name.
pub fn builtin(name: &str) -> Option<QsicSet> {
    match name {
        PERES_MERMIN | "pm" => Some(peres_mermin()),
        YU_OH | "yo" => Some(yu_oh()),
        _ => None,
    }
}

/// `true` when the measurement is an eigen-measurement of `state`.
pub fn is_eigenstate(state: &CanonicalRay, m: &Measurement) -> Result<bool> {
    let p = outcome_probability(state, m, m.outcomes()[0])?;
    Ok(p.is_zero() || p.is_one())
}
