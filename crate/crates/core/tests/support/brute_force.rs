//! Brute-force distribution after n steps: enumerate every measurement word
//! and outcome string, apply the projectors directly as rational matrices and
//! collect the exact mass of each final ray.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use qsic_core::measurement::MeasurementKind;
use qsic_core::{canonicalize, CanonicalRay, ExactDistribution, GaussianRational, QsicSet};

type Vector = Vec<GaussianRational>;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn dot(a: &Vector, b: &Vector) -> GaussianRational {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The two orthogonal projections of `psi` for measurement `m`.
fn projections(set: &QsicSet, m: usize, psi: &Vector) -> [Vector; 2] {
    let half = BigRational::new(1.into(), 2.into());
    match set.measurements()[m].kind() {
        MeasurementKind::RankOneProjector { target } => {
            let v = target.to_rationals();
            let c = dot(&v, psi) / Complex::new(dot(&v, &v).re, BigRational::zero());
            let on: Vector = v.iter().map(|x| x * &c).collect();
            let off: Vector = psi.iter().zip(&on).map(|(a, b)| a - b).collect();
            [on, off]
        }
        MeasurementKind::DichotomicObservable { matrix } => {
            let n = psi.len();
            let a_psi: Vector = (0..n)
                .map(|i| (0..n).map(|j| matrix.get(i, j) * &psi[j]).sum())
                .collect();
            let plus = psi
                .iter()
                .zip(&a_psi)
                .map(|(p, a)| (p + a).scale(half.clone()))
                .collect();
            let minus = psi
                .iter()
                .zip(&a_psi)
                .map(|(p, a)| (p - a).scale(half.clone()))
                .collect();
            [plus, minus]
        }
    }
}

pub fn brute_force(
    set: &QsicSet,
    init: &ExactDistribution,
    n: usize,
) -> BTreeMap<CanonicalRay, BigRational> {
    let pick = BigRational::new(1.into(), set.len().into());
    // (unnormalized vector, mass of the history so far)
    let mut paths: Vec<(Vector, BigRational)> = init
        .iter()
        .map(|(s, p)| (s.to_rationals(), p.clone()))
        .collect();
    for _ in 0..n {
        let mut next = Vec::new();
        for (psi, mass) in &paths {
            let norm = dot(psi, psi).re;
            for m in 0..set.len() {
                for part in projections(set, m, psi) {
                    let p = dot(&part, &part).re / &norm;
                    if !p.is_zero() {
                        next.push((part, mass * &pick * p));
                    }
                }
            }
        }
        paths = next;
    }
    let mut out: BTreeMap<CanonicalRay, BigRational> = BTreeMap::new();
    for (psi, mass) in paths {
        *out.entry(canonicalize(&psi, set.dim()).unwrap())
            .or_insert_with(BigRational::zero) += mass;
    }
    out
}
