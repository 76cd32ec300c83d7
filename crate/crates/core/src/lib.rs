//! Exact simulation and memory analysis of sequential projective measurements
//! drawn from state-independent contextuality sets.
//!
//! A single system is measured over and over with measurements picked at
//! random from a finite set. This crate enumerates the post-measurement states
//! that can occur (as exact canonical rays), evolves their probabilities
//! exactly, builds the machine whose states are those rays (the process's
//! ε-transducer) and reports the Shannon entropy of the state distribution,
//! i.e. the classical memory a predictive simulator has to carry.
//!
//! Scalar-dependent code (the distribution engine, the stationary solver) is
//! generic over [`Scalar`]; the aliases below fix the usual choices.

pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod measurement;
mod rational;
pub mod ray;
pub mod reachability;
pub mod scalar;
pub mod set_file;
pub mod sets;
pub mod simulator;
pub mod transducer;

pub use error::{Error, Result};
pub use gaussian::{GaussianInteger, GaussianRational};
pub use linalg::{ComplexMatrix, Matrix};
pub use measurement::{
    commute, outcome_probability, post_measurement_state, Branch, Measurement, Outcome,
};
pub use ray::{canonicalize, rays_equal, CanonicalRay};
pub use reachability::{
    entropy_curve, entropy_of, evolve_step, noncontextual_baseline, reachable_counts, CurveRecord,
    Engine, EntropyCurve, Limits, StateDistribution,
};
pub use scalar::Scalar;
pub use set_file::{load_set, parse_set, set_to_json};
pub use sets::{peres_mermin, pm_eigenstates, yu_oh, QsicSet};
pub use simulator::{
    compare_statistics, run_classical, sample_quantum, EquivalenceReport, Source, Trace,
};
pub use transducer::{
    build_transducer, past_sufficiency, stationary_distribution, verify_distinguishability,
    verify_unifilar, Transducer,
};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub type ExactDistribution = StateDistribution<BigRational>;
pub type FloatDistribution = StateDistribution<f64>;
pub type ExactMatrix = ComplexMatrix<BigRational>;
pub type FloatMatrix = ComplexMatrix<f64>;
