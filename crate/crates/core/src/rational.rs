//! Rational helpers with machine-word fast paths. Values in the hot loops
//! mostly fit in 128 bits, where num-bigint's generic gcd is slow.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if let (Ok(x), Ok(y)) = (u64::try_from(a), u64::try_from(b)) {
            return u128::from(gcd_u64(x, y)) << shift;
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Non-negative gcd.
pub(crate) fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    if a.bits() <= 128 && b.bits() <= 128 {
        let x = a.magnitude().to_u128().expect("fits");
        let y = b.magnitude().to_u128().expect("fits");
        return BigInt::from(gcd_u128(x, y));
    }
    a.gcd(b)
}

/// `num / den` in lowest terms with a positive denominator. `den` must be nonzero.
pub(crate) fn ratio(mut num: BigInt, mut den: BigInt) -> BigRational {
    debug_assert!(!den.is_zero());
    if num.is_zero() {
        return BigRational::zero();
    }
    let g = gcd(&num, &den);
    if !g.is_one() {
        num /= &g;
        den /= &g;
    }
    if den.sign() == Sign::Minus {
        num = -num;
        den = -den;
    }
    BigRational::new_raw(num, den)
}

pub(crate) fn mul(a: &BigRational, b: &BigRational) -> BigRational {
    ratio(a.numer() * b.numer(), a.denom() * b.denom())
}

pub(crate) fn add_assign(acc: &mut BigRational, b: &BigRational) {
    let sum = if acc.denom() == b.denom() {
        ratio(acc.numer() + b.numer(), b.denom().clone())
    } else {
        ratio(
            acc.numer() * b.denom() + b.numer() * acc.denom(),
            acc.denom() * b.denom(),
        )
    };
    *acc = sum;
}

/// gcd of all values, non-negative.
pub(crate) fn content<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    let mut g = BigInt::zero();
    for v in values {
        if g.is_one() {
            break;
        }
        if !v.is_zero() {
            g = if g.is_zero() { v.abs() } else { gcd(&g, v) };
        }
    }
    g
}
