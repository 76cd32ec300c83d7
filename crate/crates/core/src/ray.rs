//! Canonical representatives of quantum rays.
//!
//! A ray is stored as a primitive Gaussian-integer vector whose first nonzero
//! entry lies in the quadrant `re > 0, im >= 0`. If two primitive vectors span
//! the same ray their ratio is a unit of ℤ\[i\] (one of 1, i, -1, -i), and
//! exactly one of those four multiples satisfies the quadrant rule, so equal
//! rays have equal representatives and structural equality is ray equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianInteger, GaussianRational};
use crate::rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CanonicalRay {
    entries: Box<[GaussianInteger]>,
}

impl CanonicalRay {
    /// Canonical form of the ray through a Gaussian-integer vector.
    pub fn from_gaussian_integers(mut v: Vec<GaussianInteger>) -> Result<Self> {
        let first = v
            .iter()
            .position(|z| !z.is_zero())
            .ok_or(Error::ZeroVector)?;

        if v.iter().all(|z| z.im.is_zero()) {
            let content = rational::content(v.iter().map(|z| &z.re));
            let content = if v[first].re.is_negative() {
                -content
            } else {
                content
            };
            if !content.is_one() {
                for z in &mut v {
                    z.re /= &content;
                }
            }
            return Ok(CanonicalRay {
                entries: v.into_boxed_slice(),
            });
        }

        let content = v
            .iter()
            .filter(|z| !z.is_zero())
            .fold(GaussianInteger::zero(), |g, z| gaussian::gcd(&g, z));
        if !(content.im.is_zero() && content.re.abs().is_one()) {
            for z in &mut v {
                *z = gaussian::div_exact(z, &content);
            }
        }
        let lead = &v[first];
        let turn = (0..4u8)
            .find(|&k| {
                let r = gaussian::rotate(lead.clone(), k);
                r.re.is_positive() && !r.im.is_negative()
            })
            .expect("one unit multiple of a nonzero Gaussian integer lies in the first quadrant");
        if turn != 0 {
            v = v.into_iter().map(|z| gaussian::rotate(z, turn)).collect();
        }
        Ok(CanonicalRay {
            entries: v.into_boxed_slice(),
        })
    }

    pub fn from_integers(v: &[i64]) -> Result<Self> {
        Self::from_gaussian_integers(
            v.iter()
                .map(|&x| Complex::new(BigInt::from(x), BigInt::zero()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[GaussianInteger] {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im.is_zero())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CanonicalRay) -> GaussianInteger {
        inner(&self.entries, &other.entries)
    }

    /// `⟨self|self⟩`.
    pub fn norm_sqr(&self) -> BigInt {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_orthogonal(&self, other: &CanonicalRay) -> bool {
        self.inner(other).is_zero()
    }

    pub fn to_rationals(&self) -> Vec<GaussianRational> {
        self.entries.iter().map(gaussian::from_integer).collect()
    }

    fn check_dim(&self, other: &CanonicalRay) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn inner(a: &[GaussianInteger], b: &[GaussianInteger]) -> GaussianInteger {
    let mut acc = GaussianInteger::zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        if x.im.is_zero() && y.im.is_zero() {
            acc.re += &x.re * &y.re;
        } else {
            acc += x.conj() * y;
        }
    }
    acc
}

/// Canonical representative of the ray through `v`.
pub fn canonicalize(v: &[GaussianRational], dim: usize) -> Result<CanonicalRay> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let scale = v
        .iter()
        .flat_map(|z| [z.re.denom(), z.im.denom()])
        .fold(BigInt::one(), |l, d| l.lcm(d));
    let ints = v
        .iter()
        .map(|z| Complex::new((&z.re * &scale).to_integer(), (&z.im * &scale).to_integer()))
        .collect();
    CanonicalRay::from_gaussian_integers(ints)
}

pub fn rays_equal(a: &CanonicalRay, b: &CanonicalRay) -> Result<bool> {
    a.check_dim(b)?;
    Ok(a == b)
}

impl Ord for CanonicalRay {
    fn cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.entries.iter().zip(other.entries.iter()) {
            let o = x.re.cmp(&y.re).then_with(|| x.im.cmp(&y.im));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl PartialOrd for CanonicalRay {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Serialized as `re:im` pairs joined by commas, e.g. `1:0,0:-1`.
impl fmt::Display for CanonicalRay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, z) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", z.re, z.im)?;
        }
        Ok(())
    }
}

impl fmt::Debug for CanonicalRay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ray({self})")
    }
}

impl FromStr for CanonicalRay {
    type Err = Error;

    /// Parses the serialized form and re-canonicalizes it.
    fn from_str(s: &str) -> Result<Self> {
        let entries =
            s.split(',')
                .map(|pair| {
                    let (re, im) = pair.trim().split_once(':').ok_or_else(|| {
                        Error::parse(s, format!("expected `re:im`, got `{pair}`"))
                    })?;
                    let re: BigInt = re
                        .parse()
                        .map_err(|_| Error::parse(s, format!("invalid integer `{re}`")))?;
                    let im: BigInt = im
                        .parse()
                        .map_err(|_| Error::parse(s, format!("invalid integer `{im}`")))?;
                    Ok(Complex::new(re, im))
                })
                .collect::<Result<Vec<_>>>()?;
        CanonicalRay::from_gaussian_integers(entries)
    }
}
