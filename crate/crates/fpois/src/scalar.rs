//! Exact scalar arithmetic.
//!
//! The coefficient field is the rationals with arbitrary-precision numerator
//! and denominator, always reduced to lowest terms with positive denominator.
//! `BigRational` maintains exactly these invariants, so it is the scalar type;
//! this module adds the small constructors the rest of the crate uses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Integer scalar.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fraction `n/d`, reduced on construction. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `k!` as an exact scalar.
pub fn factorial(k: usize) -> Rat {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    Rat::from_integer(acc)
}

/// Render `num/den`, or just `num` for integers.
pub fn render(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `num` or `num/den`.
pub fn parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

pub fn is_negative(r: &Rat) -> bool {
    r.is_negative()
}
