//! Exact scalars: arbitrary-precision rationals or a prime field GF(p).
//!
//! A [`Field`] is the runtime choice of coefficient field; [`Scalar`] values
//! remember which field they live in. Mixing values from different fields is
//! a programming error and panics.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest modulus accepted for GF(p). Keeps trial-division primality
/// checks instant.
pub const MAX_PRIME: u64 = u32::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Field {
    #[default]
    Rational,
    Prime(u64),
}

/// An element of a [`Field`]. Rationals whose numerator and denominator
/// fit in an `i64` are kept unboxed; the representation is canonical, so
/// derived equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar(Repr);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Reduced, positive denominator.
    Small {
        num: i64,
        den: i64,
    },
    Big(BigRational),
    Prime {
        value: u64,
        modulus: u64,
    },
}

fn rational(q: BigRational) -> Scalar {
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(num), Some(den)) => Scalar(Repr::Small { num, den }),
        _ => Scalar(Repr::Big(q)),
    }
}

/// `num/den` with `den != 0`, reduced.
fn small(num: i128, den: i128) -> Scalar {
    let g = num.gcd(&den);
    let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
    if d < 0 {
        n = -n;
        d = -d;
    }
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(num), Ok(den)) => Scalar(Repr::Small { num, den }),
        _ => Scalar(Repr::Big(BigRational::new(BigInt::from(n), BigInt::from(d)))),
    }
}

fn big(r: &Repr) -> BigRational {
    match r {
        Repr::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
        Repr::Big(q) => q.clone(),
        Repr::Prime { .. } => unreachable!("prime-field value used as a rational"),
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u128;
    let m = modulus as u128;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn reduce_bigint(n: &BigInt, p: u64) -> u64 {
    let r = n % BigInt::from(p);
    let r = if r.is_negative() { r + BigInt::from(p) } else { r };
    r.to_u64().expect("residue fits in u64")
}

impl Field {
    /// Builds GF(p), rejecting composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::InvalidArgument(format!("modulus {p} is too large")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match *self {
            Field::Rational => Scalar(Repr::Small { num: n, den: 1 }),
            Field::Prime(p) => Scalar(Repr::Prime {
                value: reduce_bigint(&BigInt::from(n), p),
                modulus: p,
            }),
        }
    }

    /// Maps a rational number into this field. Fails in GF(p) when the
    /// denominator is divisible by `p`.
    pub fn from_rational(&self, q: &BigRational) -> Result<Scalar> {
        match *self {
            Field::Rational => Ok(rational(q.clone())),
            Field::Prime(p) => {
                let num = reduce_bigint(q.numer(), p);
                let den = reduce_bigint(q.denom(), p);
                if den == 0 {
                    return Err(Error::Parse(format!("denominator of {q} vanishes modulo {p}")));
                }
                let inv = mod_pow(den, p - 2, p);
                Ok(Scalar(Repr::Prime {
                    value: ((num as u128 * inv as u128) % p as u128) as u64,
                    modulus: p,
                }))
            }
        }
    }

    /// Parses `"a"` or `"a/b"` into this field.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        let q = parse_rational(s)?;
        self.from_rational(&q)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "rational"),
            Field::Prime(p) => write!(f, "gfp:{p}"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rational" || s == "q" || s == "Q" {
            return Ok(Field::Rational);
        }
        if let Some(p) = s.strip_prefix("gfp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad modulus in field `{s}`")))?;
            return Field::prime(p);
        }
        Err(Error::Parse(format!(
            "unknown field `{s}` (expected `rational` or `gfp:<p>`)"
        )))
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad scalar `{s}`"));
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(n, d))
        }
    }
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self.0 {
            Repr::Small { .. } | Repr::Big(_) => Field::Rational,
            Repr::Prime { modulus, .. } => Field::Prime(modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num == 0,
            Repr::Big(_) => false,
            Repr::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Small { num, den } => *num == 1 && *den == 1,
            Repr::Big(_) => false,
            Repr::Prime { value, .. } => *value == 1,
        }
    }

    /// The value as a rational number; `None` in GF(p).
    pub fn to_rational(&self) -> Option<BigRational> {
        match &self.0 {
            Repr::Prime { .. } => None,
            r => Some(big(r)),
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            Repr::Small { num, den } => small(*den as i128, *num as i128),
            Repr::Big(q) => rational(q.recip()),
            Repr::Prime { value, modulus } => Scalar(Repr::Prime {
                value: mod_pow(*value, modulus - 2, *modulus),
                modulus: *modulus,
            }),
        })
    }

    fn check_same_field(&self, other: &Scalar) {
        assert_eq!(
            self.field(),
            other.field(),
            "arithmetic between scalars of different fields"
        );
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Repr::Big(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Repr::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        self.check_same_field(rhs);
        match (&self.0, &rhs.0) {
            (Repr::Small { num: a, den: 1 }, Repr::Small { num: b, den: 1 }) => small(*a as i128 + *b as i128, 1),
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                small(a * d + c * b, b * d)
            }
            (Repr::Prime { value: a, modulus }, Repr::Prime { value: b, .. }) => Scalar(Repr::Prime {
                value: ((*a as u128 + *b as u128) % *modulus as u128) as u64,
                modulus: *modulus,
            }),
            (x, y) => rational(big(x) + big(y)),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match &self.0 {
            Repr::Small { num, den } => small(-(*num as i128), *den as i128),
            Repr::Big(q) => rational(-q),
            Repr::Prime { value, modulus } => Scalar(Repr::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            }),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &Scalar) -> Scalar {
        self.check_same_field(rhs);
        match (&self.0, &rhs.0) {
            (_, _) if rhs.is_one() => self.clone(),
            (_, _) if self.is_one() => rhs.clone(),
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                small(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            (Repr::Prime { value: a, modulus }, Repr::Prime { value: b, .. }) => Scalar(Repr::Prime {
                value: ((*a as u128 * *b as u128) % *modulus as u128) as u64,
                modulus: *modulus,
            }),
            (x, y) => rational(big(x) * big(y)),
        }
    }
}
