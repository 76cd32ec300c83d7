//! Gaussian integers and Gaussian rationals.
//!
//! Both are thin aliases over [`num_complex::Complex`]; this module adds the
//! Euclidean structure of ℤ\[i\] (rounded division, gcd) and the text format
//! used in set and transducer files.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type GaussianInteger = Complex<BigInt>;
pub type GaussianRational = Complex<BigRational>;

/// Rounds `num / den` (with `den > 0`) to the nearest integer, halves toward zero.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let (q, r) = num.div_mod_floor(den);
    let twice = &r << 1u32;
    match twice.cmp(den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_negative() {
                q + 1
            } else {
                q
            }
        }
    }
}

/// Nearest-Gaussian-integer quotient `a / b`.
pub fn div_round(a: &GaussianInteger, b: &GaussianInteger) -> GaussianInteger {
    let norm = b.norm_sqr();
    let num = a * b.conj();
    Complex::new(round_div(&num.re, &norm), round_div(&num.im, &norm))
}

/// Greatest common divisor in ℤ\[i\], defined up to a unit.
pub fn gcd(a: &GaussianInteger, b: &GaussianInteger) -> GaussianInteger {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let q = div_round(&a, &b);
        let r = &a - &q * &b;
        a = b;
        b = r;
    }
    a
}

/// Exact division; the caller guarantees `b` divides `a`.
pub(crate) fn div_exact(a: &GaussianInteger, b: &GaussianInteger) -> GaussianInteger {
    if b.im.is_zero() {
        return Complex::new(&a.re / &b.re, &a.im / &b.re);
    }
    let norm = b.norm_sqr();
    let num = a * b.conj();
    debug_assert!((&num.re % &norm).is_zero() && (&num.im % &norm).is_zero());
    Complex::new(num.re / &norm, num.im / norm)
}

/// Multiplies by `i^k`.
pub(crate) fn rotate(z: GaussianInteger, k: u8) -> GaussianInteger {
    match k % 4 {
        0 => z,
        1 => Complex::new(-z.im, z.re),
        2 => Complex::new(-z.re, -z.im),
        _ => Complex::new(z.im, -z.re),
    }
}

pub fn from_integer(z: &GaussianInteger) -> GaussianRational {
    Complex::new(
        BigRational::from_integer(z.re.clone()),
        BigRational::from_integer(z.im.clone()),
    )
}

pub fn real(value: i64) -> GaussianRational {
    Complex::new(BigRational::from_integer(value.into()), BigRational::zero())
}

fn parse_rational(text: &str) -> Result<BigRational, String> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("invalid integer `{num}` in `{text}`"))?;
    let den: BigInt = match den {
        Some(d) if d.starts_with(['+', '-']) => {
            return Err(format!("denominator must be unsigned in `{text}`"))
        }
        Some(d) => d
            .parse()
            .map_err(|_| format!("invalid denominator `{d}` in `{text}`"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(format!("zero denominator in `{text}`"));
    }
    Ok(BigRational::new(num, den))
}

/// Parses entries such as `"3"`, `"-1/2"`, `"1/2+3/4i"`, `"0-i"` or `"2i"`.
pub fn parse(text: &str) -> Result<GaussianRational, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty entry".into());
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(parse_rational(&s)?, BigRational::zero()));
    };
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(_, c)| c == '+' || c == '-')
        .map(|(k, _)| k)
        .last();
    let (re, im) = match split {
        Some(k) => (parse_rational(&body[..k])?, &body[k..]),
        None => (BigRational::zero(), body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        other => parse_rational(other)?,
    };
    Ok(Complex::new(re, im))
}

/// Formats an entry in the grammar accepted by [`parse`].
pub fn format(z: &GaussianRational) -> String {
    if z.im.is_zero() {
        return z.re.to_string();
    }
    let sign = if z.im.is_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}
