//! Exact evolution of the state distribution under randomly chosen measurements.
//!
//! One step maps a distribution over rays to the distribution after one
//! more measurement: every (state, measurement, outcome) branch carries mass
//! `p(state) · w(measurement) · P(outcome)` to its post-measurement ray, and
//! branches landing on the same canonical ray are merged by exact addition.

mod csv;

use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHasher};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational;
use crate::ray::CanonicalRay;
use crate::scalar::Scalar;
use crate::sets::QsicSet;

pub use self::csv::{read_distribution_csv, write_distribution_csv, DISTRIBUTION_CSV_SCHEMA};

/// Probability distribution over canonical rays, sorted by ray.
///
/// Every stored probability is positive; exact distributions sum to exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDistribution<P> {
    dim: usize,
    entries: Vec<(CanonicalRay, P)>,
}

impl<P: Scalar> StateDistribution<P> {
    /// Builds a distribution from unnormalized weights; duplicates are merged,
    /// zero weights dropped and the rest normalized to total mass 1.
    pub fn from_weights(
        dim: usize,
        weights: impl IntoIterator<Item = (CanonicalRay, P)>,
    ) -> Result<Self> {
        let mut merged: FxHashMap<CanonicalRay, P> = FxHashMap::default();
        for (ray, w) in weights {
            if ray.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: ray.dim(),
                });
            }
            *merged.entry(ray).or_insert_with(P::zero) += w;
        }
        let total = merged.values().fold(P::zero(), |acc, w| acc + w.clone());
        if total.is_negligible() {
            return Err(Error::Validation("distribution has zero total mass".into()));
        }
        let mut entries: Vec<_> = merged
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(r, w)| (r, w / total.clone()))
            .collect();
        if entries.iter().any(|(_, w)| w.to_f64() < 0.0) {
            return Err(Error::Validation("distribution has negative mass".into()));
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Ok(StateDistribution { dim, entries })
    }

    pub fn uniform(states: impl IntoIterator<Item = CanonicalRay>) -> Result<Self> {
        let states: Vec<_> = states.into_iter().collect();
        let dim = states.first().map(CanonicalRay::dim).ok_or_else(|| {
            Error::Validation("uniform distribution over an empty state list".into())
        })?;
        Self::from_weights(dim, states.into_iter().map(|s| (s, P::one())))
    }

    pub fn point(state: CanonicalRay) -> Self {
        StateDistribution {
            dim: state.dim(),
            entries: vec![(state, P::one())],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support size.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalRay, &P)> {
        self.entries.iter().map(|(r, p)| (r, p))
    }

    pub fn entries(&self) -> &[(CanonicalRay, P)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &CanonicalRay> {
        self.entries.iter().map(|(r, _)| r)
    }

    pub fn probability(&self, state: &CanonicalRay) -> Option<&P> {
        self.entries
            .binary_search_by(|(r, _)| r.cmp(state))
            .ok()
            .map(|k| &self.entries[k].1)
    }

    pub fn total(&self) -> P {
        self.entries
            .iter()
            .fold(P::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn max_probability(&self) -> Option<&P> {
        self.entries.iter().map(|(_, p)| p).max_by(|a, b| {
            a.to_f64()
                .partial_cmp(&b.to_f64())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// SHA-256 over the sorted `ray;probability` lines, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (r, p) in &self.entries {
            h.update(format!("{r};{p}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn map_probabilities<Q: Scalar>(&self, f: impl Fn(&P) -> Q) -> StateDistribution<Q> {
        StateDistribution {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(r, p)| (r.clone(), f(p)))
                .collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(dim: usize, entries: Vec<(CanonicalRay, P)>) -> Self {
        StateDistribution { dim, entries }
    }
}

/// Shannon entropy in bits, converted to `f64` term by term.
pub fn entropy_of<P: Scalar>(d: &StateDistribution<P>) -> f64 {
    -d.entries
        .iter()
        .map(|(_, p)| {
            let x = p.to_f64();
            if x > 0.0 {
                x * x.log2()
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

/// `log₂ d`: memory sufficient for any subset of mutually compatible measurements.
pub fn noncontextual_baseline(set: &QsicSet) -> f64 {
    (set.dim() as f64).log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_support: usize,
    pub max_steps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_support: 50_000_000,
            max_steps: 10_000,
        }
    }
}

/// One row of an entropy curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub step: usize,
    pub reachable_count: usize,
    pub entropy_bits: f64,
    pub digest: String,
}

pub type EntropyCurve = Vec<CurveRecord>;

const SHARDS: usize = 64;
const CHUNK: usize = 4096;

fn shard_of(ray: &CanonicalRay) -> usize {
    let mut h = FxHasher::default();
    ray.hash(&mut h);
    (h.finish() >> 40) as usize % SHARDS
}

/// Distribution evolution for one measurement set and choice policy.
///
/// Results do not depend on the number of rayon workers: contributions are
/// merged in a fixed chunk order, so even the `f64` path is reproducible.
#[derive(Clone, Debug)]
pub struct Engine<'a> {
    set: &'a QsicSet,
    weights: Vec<BigRational>,
    limits: Limits,
}

impl<'a> Engine<'a> {
    /// Uniform measurement choice.
    pub fn new(set: &'a QsicSet) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(set.len()));
        Engine {
            set,
            weights: vec![w; set.len()],
            limits: Limits::default(),
        }
    }

    /// Per-measurement choice weights, normalized to sum 1.
    pub fn with_weights(mut self, weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != self.set.len() {
            return Err(Error::DimensionMismatch {
                expected: self.set.len(),
                found: weights.len(),
            });
        }
        let total: BigRational = weights.iter().sum();
        if weights.iter().any(|w| w < &BigRational::zero()) || total.is_zero() {
            return Err(Error::Validation(
                "measurement weights must be nonnegative with positive sum".into(),
            ));
        }
        self.weights = weights.into_iter().map(|w| w / &total).collect();
        Ok(self)
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn set(&self) -> &QsicSet {
        self.set
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    fn expand_chunk<P: Scalar>(
        &self,
        chunk: &[(CanonicalRay, P)],
    ) -> Result<Vec<FxHashMap<CanonicalRay, P>>> {
        let mut shards: Vec<FxHashMap<CanonicalRay, P>> =
            (0..SHARDS).map(|_| FxHashMap::default()).collect();
        for (state, p) in chunk {
            for (m, w) in self.set.measurements().iter().zip(&self.weights) {
                if w.is_zero() {
                    continue;
                }
                for b in m.branches(state)? {
                    let mass = p.scaled(&rational::mul(&b.probability, w));
                    let shard = &mut shards[shard_of(&b.state)];
                    match shard.get_mut(&b.state) {
                        Some(acc) => acc.accumulate(&mass),
                        None => {
                            shard.insert(b.state, mass);
                        }
                    }
                }
            }
        }
        Ok(shards)
    }

    /// Distribution after one more measurement.
    pub fn evolve_step<P: Scalar>(&self, d: &StateDistribution<P>) -> Result<StateDistribution<P>> {
        if d.dim() != self.set.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                found: d.dim(),
            });
        }
        let mut shards: Vec<FxHashMap<CanonicalRay, P>> =
            (0..SHARDS).map(|_| FxHashMap::default()).collect();
        let wave = 2 * rayon::current_num_threads().max(1);
        let chunks: Vec<&[(CanonicalRay, P)]> = d.entries().chunks(CHUNK).collect();
        for group in chunks.chunks(wave) {
            let locals = group
                .par_iter()
                .map(|c| self.expand_chunk(c))
                .collect::<Result<Vec<_>>>()?;
            let mut by_shard: Vec<Vec<FxHashMap<CanonicalRay, P>>> =
                (0..SHARDS).map(|_| Vec::new()).collect();
            for local in locals {
                for (s, m) in local.into_iter().enumerate() {
                    by_shard[s].push(m);
                }
            }
            shards
                .par_iter_mut()
                .zip(by_shard.into_par_iter())
                .for_each(|(shard, maps)| {
                    for m in maps {
                        for (k, v) in m {
                            match shard.get_mut(&k) {
                                Some(acc) => acc.accumulate(&v),
                                None => {
                                    shard.insert(k, v);
                                }
                            }
                        }
                    }
                });
            let size: usize = shards.iter().map(FxHashMap::len).sum();
            if size > self.limits.max_support {
                return Err(Error::ResourceLimit {
                    what: "support size",
                    value: size,
                    limit: self.limits.max_support,
                });
            }
        }
        let mut entries: Vec<(CanonicalRay, P)> =
            Vec::with_capacity(shards.iter().map(FxHashMap::len).sum());
        for shard in shards {
            entries.extend(shard.into_iter().filter(|(_, p)| !p.is_zero()));
        }
        entries.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Ok(StateDistribution::from_sorted_unchecked(d.dim(), entries))
    }

    fn check_steps(&self, n: usize) -> Result<()> {
        if n > self.limits.max_steps {
            return Err(Error::ResourceLimit {
                what: "step count",
                value: n,
                limit: self.limits.max_steps,
            });
        }
        Ok(())
    }

    /// Evolves `n` steps, calling `observe` on the distribution at steps `0..=n`.
    /// Returns the final distribution.
    pub fn run<P, F>(
        &self,
        init: &StateDistribution<P>,
        n: usize,
        mut observe: F,
    ) -> Result<StateDistribution<P>>
    where
        P: Scalar,
        F: FnMut(usize, &StateDistribution<P>),
    {
        self.check_steps(n)?;
        if init.dim() != self.set.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                found: init.dim(),
            });
        }
        if init.len() > self.limits.max_support {
            return Err(Error::ResourceLimit {
                what: "support size",
                value: init.len(),
                limit: self.limits.max_support,
            });
        }
        observe(0, init);
        let mut d = init.clone();
        for step in 1..=n {
            d = self.evolve_step(&d)?;
            observe(step, &d);
        }
        Ok(d)
    }

    pub fn reachable_counts<P: Scalar>(
        &self,
        init: &StateDistribution<P>,
        n: usize,
    ) -> Result<Vec<usize>> {
        let mut counts = Vec::with_capacity(n + 1);
        self.run(init, n, |_, d| counts.push(d.len()))?;
        Ok(counts)
    }

    pub fn entropy_curve<P: Scalar>(
        &self,
        init: &StateDistribution<P>,
        n: usize,
    ) -> Result<EntropyCurve> {
        let mut curve = Vec::with_capacity(n + 1);
        self.run(init, n, |step, d| curve.push(record(step, d)))?;
        Ok(curve)
    }
}

pub fn record<P: Scalar>(step: usize, d: &StateDistribution<P>) -> CurveRecord {
    CurveRecord {
        step,
        reachable_count: d.len(),
        entropy_bits: entropy_of(d),
        digest: d.digest(),
    }
}

/// One step under uniform measurement choice.
pub fn evolve_step<P: Scalar>(
    d: &StateDistribution<P>,
    set: &QsicSet,
) -> Result<StateDistribution<P>> {
    Engine::new(set).evolve_step(d)
}

/// Support sizes after `0..=n` uniform steps.
pub fn reachable_counts<P: Scalar>(
    set: &QsicSet,
    init: &StateDistribution<P>,
    n: usize,
) -> Result<Vec<usize>> {
    Engine::new(set).reachable_counts(init, n)
}

pub fn entropy_curve<P: Scalar>(
    set: &QsicSet,
    init: &StateDistribution<P>,
    n: usize,
) -> Result<EntropyCurve> {
    Engine::new(set).entropy_curve(init, n)
}

/// Number of support states orthogonal to none of the set's projector rays.
pub fn count_off_semicircles<P>(d: &StateDistribution<P>, set: &QsicSet) -> usize
where
    P: Scalar,
{
    let rays = set.projector_targets();
    d.entries()
        .par_iter()
        .filter(|(s, _)| !rays.iter().any(|r| r.is_orthogonal(s)))
        .count()
}
