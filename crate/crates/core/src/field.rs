//! Exact coefficient fields: prime fields F_p (p odd) and the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{MflabError, Result};

/// Field descriptor. Serializes as `{"Fp": 101}` or `"Q"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Fp(u64),
    Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Fp(u64),
    Q(BigRational),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

impl Field {
    /// Prime field with validation. Only odd primes below 2^31 are accepted.
    pub fn fp(p: u64) -> Result<Field> {
        if !is_prime(p) {
            return Err(MflabError::InvalidField(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(MflabError::CharTwo);
        }
        if p >= 1 << 31 {
            return Err(MflabError::InvalidField(format!("{p} exceeds 2^31")));
        }
        Ok(Field::Fp(p))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Field::Fp(p) => Field::fp(*p).map(|_| ()),
            Field::Q => Ok(()),
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Fp(p) => *p,
            Field::Q => 0,
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            Field::Fp(p) => Some(*p),
            Field::Q => None,
        }
    }

    pub fn zero(&self) -> FieldElem {
        match self {
            Field::Fp(_) => FieldElem::Fp(0),
            Field::Q => FieldElem::Q(BigRational::zero()),
        }
    }

    pub fn one(&self) -> FieldElem {
        match self {
            Field::Fp(_) => FieldElem::Fp(1),
            Field::Q => FieldElem::Q(BigRational::one()),
        }
    }

    pub fn from_i64(&self, v: i64) -> FieldElem {
        match self {
            Field::Fp(p) => FieldElem::Fp(v.rem_euclid(*p as i64) as u64),
            Field::Q => FieldElem::Q(BigRational::from_integer(BigInt::from(v))),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> FieldElem {
        match self {
            Field::Fp(p) => {
                let m = BigInt::from(*p);
                let r = ((v % &m) + &m) % &m;
                FieldElem::Fp(r.try_into().unwrap_or(0))
            }
            Field::Q => FieldElem::Q(BigRational::from_integer(v.clone())),
        }
    }

    /// `num/den` in this field; fails when the denominator vanishes.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<FieldElem> {
        let d = self.from_bigint(den);
        if self.is_zero(&d) {
            return Err(MflabError::InvalidInput(format!("denominator {den} is zero in {self}")));
        }
        Ok(self.mul(&self.from_bigint(num), &self.inv(&d)?))
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        match a {
            FieldElem::Fp(v) => *v == 0,
            FieldElem::Q(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        match a {
            FieldElem::Fp(v) => *v == 1,
            FieldElem::Q(q) => q.is_one(),
        }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (self, a, b) {
            (Field::Fp(p), FieldElem::Fp(x), FieldElem::Fp(y)) => FieldElem::Fp((x + y) % p),
            (Field::Q, FieldElem::Q(x), FieldElem::Q(y)) => FieldElem::Q(x + y),
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        match (self, a) {
            (Field::Fp(p), FieldElem::Fp(x)) => FieldElem::Fp((p - x) % p),
            (Field::Q, FieldElem::Q(x)) => FieldElem::Q(-x),
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (self, a, b) {
            (Field::Fp(p), FieldElem::Fp(x), FieldElem::Fp(y)) => FieldElem::Fp(x * y % p),
            (Field::Q, FieldElem::Q(x), FieldElem::Q(y)) => FieldElem::Q(x * y),
            _ => panic!("field element does not belong to {self}"),
        }
    }

    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if self.is_zero(a) {
            return Err(MflabError::NotAUnit);
        }
        Ok(match (self, a) {
            (Field::Fp(p), FieldElem::Fp(x)) => FieldElem::Fp(pow_mod(*x, p - 2, *p)),
            (Field::Q, FieldElem::Q(x)) => FieldElem::Q(x.recip()),
            _ => panic!("field element does not belong to {self}"),
        })
    }

    /// Residue of an element of F_p; panics over Q.
    pub fn residue(&self, a: &FieldElem) -> u64 {
        match a {
            FieldElem::Fp(v) => *v,
            FieldElem::Q(_) => panic!("residue requested over Q"),
        }
    }

    /// Printable form; F_p residues use the symmetric range so that `-1` prints as `-1`.
    pub fn signed_repr(&self, a: &FieldElem) -> (bool, String) {
        match (self, a) {
            (Field::Fp(p), FieldElem::Fp(v)) => {
                if *v > p / 2 {
                    (true, (p - v).to_string())
                } else {
                    (false, v.to_string())
                }
            }
            (_, FieldElem::Q(q)) => {
                let neg = q.is_negative();
                let a = q.abs();
                if a.denom().is_one() {
                    (neg, a.numer().to_string())
                } else {
                    (neg, format!("{}/{}", a.numer(), a.denom()))
                }
            }
            _ => panic!("field element does not belong to {self}"),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Fp(p) => write!(f, "F_{p}"),
            Field::Q => write!(f, "Q"),
        }
    }
}
