//! Two-outcome projective measurements on unnormalized pure states.
//!
//! States are canonical rays, so every formula divides by `⟨ψ|ψ⟩` (and
//! `⟨v|v⟩` for projectors) explicitly; no square roots ever appear.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianInteger, GaussianRational};
use crate::linalg::{ComplexMatrix, Matrix};
use crate::rational;
use crate::ray::{self, CanonicalRay};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// Rank-one projector did not click.
    Zero,
    /// Rank-one projector clicked.
    One,
    Minus,
    Plus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One | Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Zero => "0",
            Outcome::One => "1",
            Outcome::Minus => "-1",
            Outcome::Plus => "+1",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Outcome::Zero),
            "1" => Ok(Outcome::One),
            "-1" => Ok(Outcome::Minus),
            "+1" => Ok(Outcome::Plus),
            other => Err(Error::parse(other, "outcome must be one of 0, 1, +1, -1")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    RankOneProjector { target: CanonicalRay },
    DichotomicObservable { matrix: ComplexMatrix<BigRational> },
}

/// `A = M / D` with `M` a Gaussian-integer matrix and `D > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct IntegralObservable {
    numerators: Matrix<GaussianInteger>,
    denominator: BigInt,
}

impl IntegralObservable {
    fn new(matrix: &ComplexMatrix<BigRational>) -> Self {
        let n = matrix.dim();
        let mut denominator = BigInt::one();
        for i in 0..n {
            for j in 0..n {
                let z = matrix.get(i, j);
                denominator = denominator.lcm(z.re.denom()).lcm(z.im.denom());
            }
        }
        let scale = BigRational::from_integer(denominator.clone());
        let numerators = matrix
            .map(|z| Complex::new((&z.re * &scale).to_integer(), (&z.im * &scale).to_integer()));
        IntegralObservable {
            numerators,
            denominator,
        }
    }
}

/// A branch of a measurement: outcome, its probability, and the post-measurement ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: BigRational,
    pub state: CanonicalRay,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    label: String,
    dim: usize,
    kind: MeasurementKind,
    integral: Option<IntegralObservable>,
}

impl Measurement {
    pub fn projector(label: impl Into<String>, target: CanonicalRay) -> Self {
        Measurement {
            label: label.into(),
            dim: target.dim(),
            kind: MeasurementKind::RankOneProjector { target },
            integral: None,
        }
    }

    /// A `±1`-valued observable; the matrix must be Hermitian and square to `I`.
    pub fn observable(
        label: impl Into<String>,
        matrix: ComplexMatrix<BigRational>,
    ) -> Result<Self> {
        let label = label.into();
        if !matrix.is_hermitian() {
            return Err(Error::Validation(format!(
                "observable `{label}` is not Hermitian"
            )));
        }
        if !matrix.is_involution() {
            return Err(Error::Validation(format!(
                "observable `{label}` does not square to the identity"
            )));
        }
        Ok(Measurement {
            label,
            dim: matrix.dim(),
            integral: Some(IntegralObservable::new(&matrix)),
            kind: MeasurementKind::DichotomicObservable { matrix },
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MeasurementKind {
        &self.kind
    }

    pub fn target(&self) -> Option<&CanonicalRay> {
        match &self.kind {
            MeasurementKind::RankOneProjector { target } => Some(target),
            MeasurementKind::DichotomicObservable { .. } => None,
        }
    }

    /// The two outcomes, "positive" outcome first.
    pub fn outcomes(&self) -> [Outcome; 2] {
        match self.kind {
            MeasurementKind::RankOneProjector { .. } => [Outcome::One, Outcome::Zero],
            MeasurementKind::DichotomicObservable { .. } => [Outcome::Plus, Outcome::Minus],
        }
    }

    pub fn check_outcome(&self, o: Outcome) -> Result<()> {
        if self.outcomes().contains(&o) {
            Ok(())
        } else {
            Err(Error::InvalidOutcome {
                measurement: self.label.clone(),
                outcome: o.to_string(),
            })
        }
    }

    /// Operator matrix: the projector `|v⟩⟨v|/⟨v|v⟩` or the observable itself.
    pub fn operator(&self) -> ComplexMatrix<BigRational> {
        match &self.kind {
            MeasurementKind::RankOneProjector { target } => {
                ComplexMatrix::projector(&target.to_rationals())
            }
            MeasurementKind::DichotomicObservable { matrix } => matrix.clone(),
        }
    }

    fn check_dim(&self, state: &CanonicalRay) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: state.dim(),
            });
        }
        Ok(())
    }

    /// Probability of the first entry of [`Measurement::outcomes`] as a
    /// fraction `num / den`, plus the data needed for the updates.
    fn split(&self, state: &CanonicalRay) -> Split {
        let ss = state.norm_sqr();
        match &self.kind {
            MeasurementKind::RankOneProjector { target } => {
                let overlap = target.inner(state);
                let vv = target.norm_sqr();
                Split::Projector {
                    num: overlap.norm_sqr(),
                    den: &vv * &ss,
                    overlap,
                    vv,
                }
            }
            MeasurementKind::DichotomicObservable { .. } => {
                let obs = self
                    .integral
                    .as_ref()
                    .expect("observables carry an integral form");
                let m_psi = obs.numerators.mul_vec(state.entries());
                let expectation = ray::inner(state.entries(), &m_psi).re;
                let d_ss = &obs.denominator * &ss;
                Split::Observable {
                    plus: &d_ss + &expectation,
                    minus: &d_ss - &expectation,
                    den: d_ss << 1u32,
                    m_psi,
                }
            }
        }
    }

    /// All branches with positive probability, in [`Measurement::outcomes`] order.
    pub fn branches(&self, state: &CanonicalRay) -> Result<Vec<Branch>> {
        self.check_dim(state)?;
        let mut out = Vec::with_capacity(2);
        match self.split(state) {
            Split::Projector {
                num,
                den,
                overlap,
                vv,
            } => {
                let target = self.target().expect("projector");
                if !num.is_zero() {
                    out.push(Branch {
                        outcome: Outcome::One,
                        probability: rational::ratio(num.clone(), den.clone()),
                        state: target.clone(),
                    });
                }
                if num != den {
                    let post = if overlap.is_zero() {
                        state.clone()
                    } else {
                        let v: Vec<GaussianInteger> = state
                            .entries()
                            .iter()
                            .zip(target.entries())
                            .map(|(p, t)| scale_int(p, &vv) - &overlap * t)
                            .collect();
                        CanonicalRay::from_gaussian_integers(v)?
                    };
                    out.push(Branch {
                        outcome: Outcome::Zero,
                        probability: rational::ratio(den - num, vv * state.norm_sqr()),
                        state: post,
                    });
                }
            }
            Split::Observable {
                plus,
                minus,
                den,
                m_psi,
            } => {
                let d = &self.integral.as_ref().expect("observable").denominator;
                for (outcome, num, sign) in [(Outcome::Plus, plus, 1), (Outcome::Minus, minus, -1)]
                {
                    if num.is_zero() {
                        continue;
                    }
                    let v: Vec<GaussianInteger> = state
                        .entries()
                        .iter()
                        .zip(&m_psi)
                        .map(|(p, mp)| {
                            if sign > 0 {
                                scale_int(p, d) + mp
                            } else {
                                scale_int(p, d) - mp
                            }
                        })
                        .collect();
                    out.push(Branch {
                        outcome,
                        probability: rational::ratio(num, den.clone()),
                        state: CanonicalRay::from_gaussian_integers(v)?,
                    });
                }
            }
        }
        Ok(out)
    }
}

enum Split {
    Projector {
        num: BigInt,
        den: BigInt,
        overlap: GaussianInteger,
        vv: BigInt,
    },
    Observable {
        plus: BigInt,
        minus: BigInt,
        den: BigInt,
        m_psi: Vec<GaussianInteger>,
    },
}

fn scale_int(z: &GaussianInteger, k: &BigInt) -> GaussianInteger {
    Complex::new(&z.re * k, &z.im * k)
}

/// Born-rule probability of outcome `o`.
pub fn outcome_probability(
    state: &CanonicalRay,
    m: &Measurement,
    o: Outcome,
) -> Result<BigRational> {
    m.check_dim(state)?;
    m.check_outcome(o)?;
    let p = match m.split(state) {
        Split::Projector { num, den, .. } => {
            let p1 = BigRational::new(num, den);
            if o == Outcome::One {
                p1
            } else {
                BigRational::one() - p1
            }
        }
        Split::Observable {
            plus, minus, den, ..
        } => BigRational::new(if o == Outcome::Plus { plus } else { minus }, den),
    };
    debug_assert!(!p.is_negative() && p <= BigRational::one());
    Ok(p)
}

/// Lüders update: the canonical ray of `P_o ψ`.
pub fn post_measurement_state(
    state: &CanonicalRay,
    m: &Measurement,
    o: Outcome,
) -> Result<CanonicalRay> {
    m.check_outcome(o)?;
    m.branches(state)?
        .into_iter()
        .find(|b| b.outcome == o)
        .map(|b| b.state)
        .ok_or_else(|| Error::ZeroProbabilityBranch {
            measurement: m.label().to_owned(),
            outcome: o.to_string(),
        })
}

/// Whether the two measurement operators commute.
pub fn commute(a: &Measurement, b: &Measurement) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if let (Some(u), Some(v)) = (a.target(), b.target()) {
        return Ok(u == v || u.is_orthogonal(v));
    }
    Ok(a.operator().commutes_with(&b.operator()))
}

/// Convenience for building operator matrices from small integer tables.
pub fn gaussian_matrix(rows: &[&[(i64, i64)]]) -> Result<ComplexMatrix<BigRational>> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&(re, im)| -> GaussianRational {
                        Complex::new(
                            BigRational::from_integer(re.into()),
                            BigRational::from_integer(im.into()),
                        )
                    })
                    .collect()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ray(v: &[i64]) -> CanonicalRay {
        CanonicalRay::from_integers(v).unwrap()
    }

    fn pauli(name: char) -> ComplexMatrix<BigRational> {
        match name {
            'i' => gaussian_matrix(&[&[(1, 0), (0, 0)], &[(0, 0), (1, 0)]]),
            'x' => gaussian_matrix(&[&[(0, 0), (1, 0)], &[(1, 0), (0, 0)]]),
            'y' => gaussian_matrix(&[&[(0, 0), (0, -1)], &[(0, 1), (0, 0)]]),
            _ => gaussian_matrix(&[&[(1, 0), (0, 0)], &[(0, 0), (-1, 0)]]),
        }
        .unwrap()
    }

    fn two_qubit(label: &str, a: char, b: char) -> Measurement {
        Measurement::observable(label, pauli(a).kron(&pauli(b))).unwrap()
    }

    #[test]
    fn eigenstate_projector() {
        let m = Measurement::projector("e1", ray(&[1, 0, 0]));
        assert_eq!(
            outcome_probability(&ray(&[1, 0, 0]), &m, Outcome::One).unwrap(),
            q(1, 1)
        );
        assert_eq!(
            post_measurement_state(&ray(&[1, 0, 0]), &m, Outcome::One).unwrap(),
            ray(&[1, 0, 0])
        );
        assert!(matches!(
            post_measurement_state(&ray(&[1, 0, 0]), &m, Outcome::Zero),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
    }

    #[test]
    fn born_rule_one_third() {
        let m = Measurement::projector("e1", ray(&[1, 0, 0]));
        let psi = ray(&[1, 1, 1]);
        assert_eq!(
            outcome_probability(&psi, &m, Outcome::One).unwrap(),
            q(1, 3)
        );
        assert_eq!(
            outcome_probability(&psi, &m, Outcome::Zero).unwrap(),
            q(2, 3)
        );
        assert_eq!(
            post_measurement_state(&psi, &m, Outcome::Zero).unwrap(),
            ray(&[0, 1, 1])
        );
    }

    #[test]
    fn xx_on_ket_01() {
        let xx = two_qubit("xx", 'x', 'x');
        let psi = ray(&[0, 1, 0, 0]);
        assert_eq!(
            outcome_probability(&psi, &xx, Outcome::Plus).unwrap(),
            q(1, 2)
        );
        assert_eq!(
            outcome_probability(&psi, &xx, Outcome::Minus).unwrap(),
            q(1, 2)
        );
        assert_eq!(
            post_measurement_state(&psi, &xx, Outcome::Plus).unwrap(),
            ray(&[0, 1, 1, 0])
        );
        assert_eq!(
            post_measurement_state(&psi, &xx, Outcome::Minus).unwrap(),
            ray(&[0, 1, -1, 0])
        );
    }

    #[test]
    fn invalid_outcome_and_dimension() {
        let xx = two_qubit("xx", 'x', 'x');
        assert!(matches!(
            outcome_probability(&ray(&[0, 1, 0, 0]), &xx, Outcome::One),
            Err(Error::InvalidOutcome { .. })
        ));
        assert!(matches!(
            outcome_probability(&ray(&[0, 1, 0]), &xx, Outcome::Plus),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutation_examples() {
        let z1 = two_qubit("z1", 'z', 'i');
        let z2 = two_qubit("z2", 'i', 'z');
        let x2 = two_qubit("x2", 'i', 'x');
        let xx = two_qubit("xx", 'x', 'x');
        assert!(commute(&z1, &z2).unwrap());
        assert!(commute(&x2, &z1).unwrap());
        assert!(!commute(&z1, &xx).unwrap());
        assert!(commute(&xx, &xx).unwrap());
        let p = Measurement::projector("p", ray(&[1, 0, 0]));
        let r = Measurement::projector("r", ray(&[1, 1, 0]));
        let s = Measurement::projector("s", ray(&[0, 1, 1]));
        assert!(!commute(&p, &r).unwrap());
        assert!(commute(&p, &s).unwrap());
        assert!(commute(&p, &p).unwrap());
        assert!(commute(&z1, &p).is_err());
    }

    #[test]
    fn projector_commutation_agrees_with_matrices() {
        let rays = [
            ray(&[1, 0, 0]),
            ray(&[1, 1, 0]),
            ray(&[0, 1, 1]),
            ray(&[1, -1, 1]),
        ];
        for a in &rays {
            for b in &rays {
                let ma = Measurement::projector("a", a.clone());
                let mb = Measurement::projector("b", b.clone());
                assert_eq!(
                    commute(&ma, &mb).unwrap(),
                    ma.operator().commutes_with(&mb.operator())
                );
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_involution() {
        let bad = gaussian_matrix(&[&[(0, 0), (1, 0)], &[(0, 0), (0, 0)]]).unwrap();
        assert!(matches!(
            Measurement::observable("bad", bad),
            Err(Error::Validation(_))
        ));
        let twice = pauli('z').scale(&Complex::new(q(2, 1), q(0, 1)));
        assert!(matches!(
            Measurement::observable("2z", twice),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn rational_observable_entries() {
        // A = [[3/5, 4/5], [4/5, -3/5]] is a reflection
        let a = Matrix::from_rows(vec![
            vec![
                Complex::new(q(3, 5), q(0, 1)),
                Complex::new(q(4, 5), q(0, 1)),
            ],
            vec![
                Complex::new(q(4, 5), q(0, 1)),
                Complex::new(q(-3, 5), q(0, 1)),
            ],
        ])
        .unwrap();
        let m = Measurement::observable("refl", a).unwrap();
        let psi = ray(&[1, 0]);
        assert_eq!(
            outcome_probability(&psi, &m, Outcome::Plus).unwrap(),
            q(4, 5)
        );
        assert_eq!(
            post_measurement_state(&psi, &m, Outcome::Plus).unwrap(),
            ray(&[2, 1])
        );
        assert_eq!(
            post_measurement_state(&psi, &m, Outcome::Minus).unwrap(),
            ray(&[1, -2])
        );
    }
}
