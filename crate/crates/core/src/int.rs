//! Integer coefficients that stay in `i128` until an operation overflows.
//!
//! Almost every coefficient produced by the evaluators fits in 128 bits, so the
//! hot convolution and binomial loops run on machine integers and promote to
//! `BigInt` only on overflow. A `Big` value never holds something that fits in
//! `i128`, which keeps structural equality sound.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub enum Int {
    Small(i128),
    Big(BigInt),
}

use Int::{Big, Small};

impl Int {
    pub const ZERO: Int = Small(0);
    pub const ONE: Int = Small(1);

    pub fn from_big(b: BigInt) -> Int {
        match b.to_i128() {
            Some(v) => Small(v),
            None => Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Small(v) => BigInt::from(*v),
            Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Small(v) => *v < 0,
            Big(b) => b.sign() == num_bigint::Sign::Minus,
        }
    }

    pub fn neg(&self) -> Int {
        match self {
            Small(v) => match v.checked_neg() {
                Some(n) => Small(n),
                None => Int::from_big(-BigInt::from(*v)),
            },
            Big(b) => Int::from_big(-b),
        }
    }

    pub fn add_assign(&mut self, o: &Int) {
        if let (Small(a), Small(b)) = (&*self, o) {
            if let Some(s) = a.checked_add(*b) {
                *self = Small(s);
                return;
            }
        }
        *self = Int::from_big(self.to_big() + o.to_big());
    }

    pub fn sub_assign(&mut self, o: &Int) {
        if let (Small(a), Small(b)) = (&*self, o) {
            if let Some(s) = a.checked_sub(*b) {
                *self = Small(s);
                return;
            }
        }
        *self = Int::from_big(self.to_big() - o.to_big());
    }

    /// `self += sign * o` for `sign = ±1`.
    pub fn add_signed(&mut self, o: &Int, sign: i8) {
        if sign > 0 {
            self.add_assign(o)
        } else {
            self.sub_assign(o)
        }
    }

    pub fn mul(&self, o: &Int) -> Int {
        if let (Small(a), Small(b)) = (self, o) {
            if let Some(p) = a.checked_mul(*b) {
                return Small(p);
            }
        }
        Int::from_big(self.to_big() * o.to_big())
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &Int, b: &Int) {
        if let (Small(x), Small(y), Small(s)) = (a, b, &*self) {
            if let Some(p) = x.checked_mul(*y) {
                if let Some(t) = s.checked_add(p) {
                    *self = Small(t);
                    return;
                }
            }
        }
        *self = Int::from_big(self.to_big() + a.to_big() * b.to_big());
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Int {
        Small(v as i128)
    }
}

impl From<i128> for Int {
    fn from(v: i128) -> Int {
        Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Int {
        Int::from_big(v)
    }
}

impl From<&BigInt> for Int {
    fn from(v: &BigInt) -> Int {
        Int::from_big(v.clone())
    }
}

impl PartialEq for Int {
    fn eq(&self, o: &Int) -> bool {
        match (self, o) {
            (Small(a), Small(b)) => a == b,
            (Big(a), Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Int {}

impl PartialOrd for Int {
    fn partial_cmp(&self, o: &Int) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Int {
    fn cmp(&self, o: &Int) -> Ordering {
        match (self, o) {
            (Small(a), Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl Default for Int {
    fn default() -> Int {
        Int::ZERO
    }
}

impl std::fmt::Display for Int {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Small(v) => write!(f, "{v}"),
            Big(b) => write!(f, "{b}"),
        }
    }
}

/// Gcd of a slice of coefficients together with `start`.
pub fn gcd_with(start: &BigInt, values: &[Int]) -> BigInt {
    use num_integer::Integer;
    let mut g = start.clone();
    for v in values {
        if g == BigInt::from(1) {
            break;
        }
        if !v.is_zero() {
            g = g.gcd(&v.to_big());
        }
    }
    if g.is_zero() {
        BigInt::from(1)
    } else {
        g
    }
}
