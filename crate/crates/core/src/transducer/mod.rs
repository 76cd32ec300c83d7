//! The ε-transducer of a sequential-measurement process.
//!
//! Causal states are identified with the reachable post-measurement rays.
//! That identification needs two properties of the concrete set, both of
//! which are audited here rather than assumed: the machine is unifilar
//! (state, input and output fix the next state) and every pair of states is
//! separated by the outcome statistics of a single measurement.

mod json;

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::measurement::{Branch, Outcome};
use crate::ray::CanonicalRay;
use crate::reachability::{Limits, StateDistribution};
use crate::scalar::Scalar;
use crate::sets::QsicSet;

pub use self::json::{transducer_from_json, transducer_to_json, TRANSDUCER_FORMAT};

/// One labelled edge: outcome, its probability and the successor state.
/// `next` is `None` when the successor lies beyond a truncated machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub outcome: Outcome,
    pub probability: BigRational,
    pub next: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Transducer {
    set: QsicSet,
    states: Vec<CanonicalRay>,
    shells: Vec<usize>,
    transitions: Vec<Vec<Vec<Edge>>>,
    initial: Vec<(usize, BigRational)>,
    depth: Option<usize>,
    truncated: bool,
}

impl Transducer {
    /// Assembles a machine without any checks; see [`verify_unifilar`] and
    /// [`Transducer::is_stochastic`] for the audits.
    pub fn from_parts(
        set: QsicSet,
        states: Vec<CanonicalRay>,
        transitions: Vec<Vec<Vec<Edge>>>,
        initial: Vec<(usize, BigRational)>,
        depth: Option<usize>,
        truncated: bool,
    ) -> Self {
        let shells = vec![0; states.len()];
        Transducer {
            set,
            states,
            shells,
            transitions,
            initial,
            depth,
            truncated,
        }
    }

    pub fn set(&self) -> &QsicSet {
        &self.set
    }

    pub fn states(&self) -> &[CanonicalRay] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of measurements needed to first reach each state.
    pub fn shells(&self) -> &[usize] {
        &self.shells
    }

    /// Edges leaving `state` under measurement `input`.
    pub fn row(&self, state: usize, input: usize) -> &[Edge] {
        &self.transitions[state][input]
    }

    pub fn transitions(&self) -> &[Vec<Vec<Edge>>] {
        &self.transitions
    }

    pub fn initial(&self) -> &[(usize, BigRational)] {
        &self.initial
    }

    /// Build depth, `None` when built to closure.
    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn edge_count(&self) -> usize {
        self.transitions.iter().flatten().map(Vec::len).sum()
    }

    /// Every (state, input) row sums to exactly one and lists positive masses.
    pub fn is_stochastic(&self) -> bool {
        self.transitions.iter().flatten().all(|row| {
            row.iter().all(|e| e.probability > BigRational::zero())
                && row.iter().map(|e| &e.probability).sum::<BigRational>() == BigRational::one()
        })
    }

    /// Uniform-input transition matrix over causal states. Only meaningful for
    /// closed machines.
    pub fn markov_matrix<T: Scalar>(&self) -> Matrix<T> {
        let n = self.states.len();
        let w = BigRational::new(BigInt::one(), BigInt::from(self.set.len().max(1)));
        let mut exact: Matrix<BigRational> = Matrix::zeros(n);
        for (i, rows) in self.transitions.iter().enumerate() {
            for edge in rows.iter().flatten() {
                if let Some(j) = edge.next {
                    let v = exact.get(i, j) + &edge.probability * &w;
                    exact.set(i, j, v);
                }
            }
        }
        exact.map(T::from_rational)
    }

    /// One uniform-input step of a distribution over state indices.
    pub fn step_weights(&self, weights: &[(usize, BigRational)]) -> Vec<(usize, BigRational)> {
        let w = BigRational::new(BigInt::one(), BigInt::from(self.set.len().max(1)));
        let mut acc: FxHashMap<usize, BigRational> = FxHashMap::default();
        for (s, p) in weights {
            for edge in self.transitions[*s].iter().flatten() {
                if let Some(j) = edge.next {
                    *acc.entry(j).or_insert_with(BigRational::zero) += p * &edge.probability * &w;
                }
            }
        }
        let mut out: Vec<_> = acc.into_iter().collect();
        out.sort_by_key(|(s, _)| *s);
        out
    }

    pub fn distribution_of(
        &self,
        weights: &[(usize, BigRational)],
    ) -> Result<StateDistribution<BigRational>> {
        StateDistribution::from_weights(
            self.set.dim(),
            weights
                .iter()
                .map(|(s, p)| (self.states[*s].clone(), p.clone())),
        )
    }
}

fn row_edges(branches: Vec<Branch>, index: &FxHashMap<CanonicalRay, usize>) -> Vec<Edge> {
    branches
        .into_iter()
        .map(|b| Edge {
            outcome: b.outcome,
            probability: b.probability,
            next: index.get(&b.state).copied(),
        })
        .collect()
}

/// Builds the machine over all rays reachable from `init` within `max_depth`
/// measurements, or until the reachable set closes when `max_depth` is `None`.
pub fn build_transducer(
    set: &QsicSet,
    init: &StateDistribution<BigRational>,
    max_depth: Option<usize>,
    limits: Limits,
) -> Result<Transducer> {
    if init.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: init.dim(),
        });
    }
    let mut states: Vec<CanonicalRay> = init.support().cloned().collect();
    let mut shells = vec![0usize; states.len()];
    let mut index: FxHashMap<CanonicalRay, usize> = states
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, s)| (s, k))
        .collect();
    let mut branches: Vec<Vec<Vec<Branch>>> = Vec::with_capacity(states.len());
    let mut frontier = 0..states.len();
    let mut depth = 0usize;
    let mut truncated = false;

    loop {
        let computed: Vec<Vec<Vec<Branch>>> = states[frontier.clone()]
            .par_iter()
            .map(|s| {
                set.measurements()
                    .iter()
                    .map(|m| m.branches(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let at_limit = max_depth.is_some_and(|d| depth >= d);
        let start = states.len();
        for rows in &computed {
            for b in rows.iter().flatten() {
                if index.contains_key(&b.state) {
                    continue;
                }
                if at_limit {
                    truncated = true;
                    continue;
                }
                index.insert(b.state.clone(), states.len());
                states.push(b.state.clone());
                shells.push(depth + 1);
                if states.len() > limits.max_support {
                    return Err(Error::ResourceLimit {
                        what: "transducer states",
                        value: states.len(),
                        limit: limits.max_support,
                    });
                }
            }
        }
        branches.extend(computed);
        if at_limit || states.len() == start {
            break;
        }
        frontier = start..states.len();
        depth += 1;
    }

    let transitions = branches
        .into_iter()
        .map(|rows| rows.into_iter().map(|b| row_edges(b, &index)).collect())
        .collect();
    let initial = init.iter().map(|(s, p)| (index[s], p.clone())).collect();
    Ok(Transducer {
        set: set.clone(),
        states,
        shells,
        transitions,
        initial,
        depth: max_depth,
        truncated,
    })
}

/// Audits unifilarity: no (state, input, outcome) triple has two edges, and
/// every edge has a valid outcome and positive probability.
pub fn verify_unifilar(t: &Transducer) -> bool {
    t.transitions.iter().all(|rows| {
        rows.len() == t.set.len()
            && rows.iter().zip(t.set.measurements()).all(|(row, m)| {
                let mut seen = Vec::with_capacity(2);
                row.iter().all(|e| {
                    m.check_outcome(e.outcome).is_ok()
                        && e.probability > BigRational::zero()
                        && e.next.is_none_or(|j| j < t.states.len())
                        && !seen.contains(&e.outcome)
                        && {
                            seen.push(e.outcome);
                            true
                        }
                })
            })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishabilityReport {
    pub pairs_checked: u64,
    /// Pairs of distinct states with identical single-measurement statistics.
    pub failures: Vec<(CanonicalRay, CanonicalRay)>,
}

impl DistinguishabilityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outcome statistics of every measurement in the set: `P(first outcome | x)`.
pub fn statistics_signature(state: &CanonicalRay, set: &QsicSet) -> Result<Vec<BigRational>> {
    set.measurements()
        .iter()
        .map(|m| crate::measurement::outcome_probability(state, m, m.outcomes()[0]))
        .collect()
}

/// Checks every unordered pair of distinct states for a single measurement
/// whose outcome distribution differs between them.
///
/// Two states are separated iff their statistics signatures differ, so
/// pairs are resolved by grouping equal signatures instead of comparing each
/// pair separately; `pair_cap` bounds the number of pairs accepted.
pub fn verify_distinguishability(
    states: &[CanonicalRay],
    set: &QsicSet,
    pair_cap: u64,
) -> Result<DistinguishabilityReport> {
    let mut distinct = states.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if let Some(s) = distinct.iter().find(|s| s.dim() != set.dim()) {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: s.dim(),
        });
    }
    let n = distinct.len() as u64;
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > pair_cap {
        return Err(Error::ResourceLimit {
            what: "state pairs",
            value: pairs.min(usize::MAX as u64) as usize,
            limit: pair_cap.min(usize::MAX as u64) as usize,
        });
    }
    let signatures: Vec<Vec<BigRational>> = distinct
        .par_iter()
        .map(|s| statistics_signature(s, set))
        .collect::<Result<_>>()?;
    let mut groups: FxHashMap<&[BigRational], Vec<usize>> = FxHashMap::default();
    for (k, sig) in signatures.iter().enumerate() {
        groups.entry(sig.as_slice()).or_default().push(k);
    }
    let mut failures = Vec::new();
    let mut members: Vec<&Vec<usize>> = groups.values().filter(|g| g.len() > 1).collect();
    members.sort();
    for group in members {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                failures.push((distinct[i].clone(), distinct[j].clone()));
            }
        }
    }
    Ok(DistinguishabilityReport {
        pairs_checked: pairs,
        failures,
    })
}

/// Closed communicating classes of the uniform-input chain.
fn closed_classes(t: &Transducer) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(t.len(), t.edge_count());
    let nodes: Vec<_> = (0..t.len()).map(|_| g.add_node(())).collect();
    for (i, rows) in t.transitions.iter().enumerate() {
        for e in rows.iter().flatten() {
            if let Some(j) = e.next {
                g.update_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| {
            c.iter().all(|&i| {
                t.transitions[i]
                    .iter()
                    .flatten()
                    .all(|e| e.next.is_some_and(|j| c.binary_search(&j).is_ok()))
            })
        })
        .collect();
    classes.sort();
    classes
}

fn solve_class<T: Scalar>(t: &Transducer, class: &[usize]) -> Result<Vec<(usize, T)>> {
    let full = t.markov_matrix::<BigRational>();
    let m = class.len();
    let mut sub: Matrix<T> = Matrix::zeros(m);
    for (a, &i) in class.iter().enumerate() {
        for (b, &j) in class.iter().enumerate() {
            sub.set(a, b, T::from_rational(full.get(i, j)));
        }
    }
    let pi = linalg::stationary(&sub)
        .ok_or_else(|| Error::Validation("stationary system is singular".into()))?;
    Ok(class.iter().copied().zip(pi).collect())
}

/// Stationary distribution of the causal states of a closed machine under
/// uniform measurement choice, solved exactly by Gaussian elimination.
pub fn stationary_distribution(t: &Transducer) -> Result<StateDistribution<BigRational>> {
    stationary_distribution_as::<BigRational>(t)
}

/// [`stationary_distribution`] computed in scalar type `T`.
pub fn stationary_distribution_as<T: Scalar>(t: &Transducer) -> Result<StateDistribution<T>> {
    if t.truncated
        || t.transitions
            .iter()
            .flatten()
            .flatten()
            .any(|e| e.next.is_none())
    {
        return Err(Error::Truncated);
    }
    let classes = closed_classes(t);
    match classes.as_slice() {
        [class] => {
            let pi = solve_class::<T>(t, class)?;
            StateDistribution::from_weights(
                t.set.dim(),
                pi.into_iter().map(|(s, p)| (t.states[s].clone(), p)),
            )
        }
        _ => Err(Error::NonUniqueStationary {
            classes: classes
                .iter()
                .map(|c| solve_class::<BigRational>(t, c))
                .collect::<Result<_>>()?,
        }),
    }
}

/// For each past length `0..=n`, the probability of input-output pasts after
/// which the current state is not determined by the past alone.
///
/// Pasts are enumerated exhaustively (uniform inputs, Born-rule outputs,
/// initial state drawn from `prior`). A past that has pinned the state keeps
/// it pinned, so such branches are not expanded further. `node_cap` bounds
/// the number of expanded pasts.
pub fn past_sufficiency(
    set: &QsicSet,
    prior: &StateDistribution<BigRational>,
    n: usize,
    node_cap: usize,
) -> Result<Vec<BigRational>> {
    if prior.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: prior.dim(),
        });
    }
    let w = BigRational::new(BigInt::one(), BigInt::from(set.len()));
    let mut insufficient = vec![BigRational::zero(); n + 1];
    let mut queue: VecDeque<(usize, Vec<(CanonicalRay, BigRational)>)> = VecDeque::new();
    queue.push_back((0, prior.entries().to_vec()));
    let mut expanded = 0usize;

    while let Some((len, particles)) = queue.pop_front() {
        if particles.len() < 2 {
            continue;
        }
        insufficient[len] += particles.iter().map(|(_, p)| p).sum::<BigRational>();
        if len == n {
            continue;
        }
        expanded += 1;
        if expanded > node_cap {
            return Err(Error::ResourceLimit {
                what: "past enumeration nodes",
                value: expanded,
                limit: node_cap,
            });
        }
        for m in set.measurements() {
            let mut children: [FxHashMap<CanonicalRay, BigRational>; 2] = Default::default();
            for (s, p) in &particles {
                for b in m.branches(s)? {
                    let slot = usize::from(b.outcome != m.outcomes()[0]);
                    *children[slot]
                        .entry(b.state)
                        .or_insert_with(BigRational::zero) += p * &w * &b.probability;
                }
            }
            for child in children {
                if child.len() >= 2 {
                    let mut child: Vec<_> = child.into_iter().collect();
                    child.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                    queue.push_back((len + 1, child));
                }
            }
        }
    }
    Ok(insufficient)
}

/// Graphviz text for the first `max_states` states; edges are labelled
/// `input / outcome : probability`.
pub fn export_dot(t: &Transducer, max_states: usize) -> String {
    let shown = t.len().min(max_states);
    let mut out = String::from("digraph transducer {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (k, s) in t.states[..shown].iter().enumerate() {
        let _ = writeln!(out, "  s{k} [label=\"{k}\\n{s}\"];");
    }
    for (i, rows) in t.transitions.iter().enumerate().take(shown) {
        for (m, row) in t.set.measurements().iter().zip(rows) {
            for e in row {
                if let Some(j) = e.next.filter(|&j| j < shown) {
                    let _ = writeln!(
                        out,
                        "  s{i} -> s{j} [label=\"{} / {} : {}\"];",
                        m.label(),
                        e.outcome,
                        e.probability
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
