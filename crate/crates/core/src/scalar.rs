//! Scalar abstraction shared by the distribution engine and the linear solver.
//!
//! Exact work uses [`BigRational`]; `f64`/`f32` give a fast approximate path
//! with the same code.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Num, NumAssign, Signed, ToPrimitive, Zero};

use crate::rational;

pub trait Scalar:
    Num + NumAssign + Clone + Debug + Display + PartialEq + Neg<Output = Self> + Send + Sync + 'static
{
    /// `true` when the type represents values exactly.
    const EXACT: bool;

    fn from_rational(value: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test used for pivoting and mass pruning; exact types test `== 0`.
    fn is_negligible(&self) -> bool;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// `self * factor`.
    fn scaled(&self, factor: &BigRational) -> Self {
        Self::from_rational(factor) * self.clone()
    }

    /// `self += other`.
    fn accumulate(&mut self, other: &Self) {
        *self += other.clone();
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(value: &BigRational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn magnitude(&self) -> f64 {
        Scalar::to_f64(&self.abs())
    }

    fn scaled(&self, factor: &BigRational) -> Self {
        rational::mul(self, factor)
    }

    fn accumulate(&mut self, other: &Self) {
        rational::add_assign(self, other);
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(value: &BigRational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-12
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(value: &BigRational) -> Self {
        ToPrimitive::to_f32(value).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-6
    }
}
