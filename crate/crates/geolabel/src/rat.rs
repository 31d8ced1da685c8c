//! Exact rational scalars and points. All geometric predicates in this crate
//! run over `Q`; no floating point is involved in any adjacency decision.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn sign(v: &Q) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// Wire form of a rational: a `[numerator, denominator]` integer pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSer(pub Q);

impl Serialize for QSer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let numer: i64 = self
            .0
            .numer()
            .try_into()
            .map_err(|_| serde::ser::Error::custom("rational numerator exceeds i64"))?;
        let denom: i64 = self
            .0
            .denom()
            .try_into()
            .map_err(|_| serde::ser::Error::custom("rational denominator exceeds i64"))?;
        (numer, denom).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (n, den): (i64, i64) = Deserialize::deserialize(d)?;
        if den == 0 {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(QSer(Q::new(BigInt::from(n), BigInt::from(den))))
    }
}

pub fn ser_vec(v: &[Q]) -> Vec<QSer> {
    v.iter().cloned().map(QSer).collect()
}

pub fn de_vec(v: Vec<QSer>) -> Vec<Q> {
    v.into_iter().map(|x| x.0).collect()
}

/// 2D point with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pt {
    pub x: Q,
    pub y: Q,
}

impl Pt {
    pub fn new(x: Q, y: Q) -> Self {
        Pt { x, y }
    }

    pub fn dist2(&self, other: &Pt) -> Q {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }
}

pub fn qone() -> Q {
    Q::one()
}

pub fn qzero() -> Q {
    Q::zero()
}
