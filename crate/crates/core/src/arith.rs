//! Exact rationals, scaled exponents and generalized binomial coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Result<Rat> {
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn int(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Integer value, if this is an integer that fits in an `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    /// Denominator as `i64`, if it fits.
    pub fn denom_i64(&self) -> Option<i64> {
        self.denom().to_i64()
    }

    /// `self * den` as an integer; fails when `den` does not clear the denominator.
    pub fn scaled(&self, den: i64) -> Result<i64> {
        let v = self * &Rat::int(den);
        v.to_i64().ok_or_else(|| Error::Denominator(format!("{self} is not a multiple of 1/{den}")))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        Rat::from_big(n, d).map_err(|_| bad())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat((&self.0).$m(&o.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat(self.0.$m(o.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat(self.0.$m(&o.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat((&self.0).$m(o.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, o: &Rat) {
        self.0 += &o.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, o: &Rat) {
        self.0 -= &o.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, o: &Rat) {
        self.0 *= &o.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// `x(x-1)...(x-j+1)/j!`
pub fn gen_binom(x: &Rat, j: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..j {
        acc = acc * (x - &Rat::int(i64::from(i))) / Rat::int(i64::from(i) + 1);
    }
    acc
}

/// Exact rational exponent stored as `value / denom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaledExponent {
    pub value: i64,
    pub denom: i64,
}

impl ScaledExponent {
    pub fn new(value: i64, denom: i64) -> ScaledExponent {
        assert!(denom > 0, "denominator must be positive");
        ScaledExponent { value, denom }
    }

    pub fn from_rat(r: &Rat, denom: i64) -> Result<ScaledExponent> {
        Ok(ScaledExponent::new(r.scaled(denom)?, denom))
    }

    pub fn to_rat(self) -> Rat {
        Rat::new(self.value, self.denom)
    }

    /// Re-express over `denom`, which must be a multiple of the current one.
    pub fn rescale(self, denom: i64) -> Result<ScaledExponent> {
        if denom <= 0 || denom % self.denom != 0 {
            return Err(Error::Denominator(format!("cannot rescale 1/{} to 1/{denom}", self.denom)));
        }
        let v = self.value.checked_mul(denom / self.denom).ok_or(Error::Overflow)?;
        Ok(ScaledExponent::new(v, denom))
    }

    pub fn checked_add(self, o: ScaledExponent) -> Result<ScaledExponent> {
        let d = lcm(self.denom, o.denom)?;
        let a = self.rescale(d)?;
        let b = o.rescale(d)?;
        Ok(ScaledExponent::new(a.value.checked_add(b.value).ok_or(Error::Overflow)?, d))
    }
}

impl PartialOrd for ScaledExponent {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ScaledExponent {
    fn cmp(&self, o: &Self) -> Ordering {
        (i128::from(self.value) * i128::from(o.denom)).cmp(&(i128::from(o.value) * i128::from(self.denom)))
    }
}

impl fmt::Display for ScaledExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rat())
    }
}

pub fn lcm(a: i64, b: i64) -> Result<i64> {
    let g = a.gcd(&b);
    if g == 0 {
        return Ok(0);
    }
    (a / g).checked_mul(b).map(i64::abs).ok_or(Error::Overflow)
}

/// Least common multiple of the denominators of `xs` (at least 1).
pub fn common_denom<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> Result<i64> {
    let mut d = 1i64;
    for x in xs {
        let xd = x.denom_i64().ok_or(Error::Overflow)?;
        d = lcm(d, xd)?;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binom(&Rat::int(-2), 2), Rat::int(3));
        assert_eq!(gen_binom(&r("-1/2"), 2), r("3/8"));
        assert_eq!(gen_binom(&r("7/3"), 0), Rat::one());
        assert_eq!(gen_binom(&Rat::int(5), 2), Rat::int(10));
        assert_eq!(gen_binom(&Rat::int(3), 4), Rat::zero());
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(r("-6/4").to_string(), "-3/2");
        assert_eq!(r(" 4 / 2 ").to_string(), "2");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn scaled_exponents() {
        let a = ScaledExponent::new(1, 2);
        let b = ScaledExponent::new(2, 3);
        assert_eq!(a.checked_add(b).unwrap(), ScaledExponent::new(7, 6));
        assert!(a < b);
        assert_eq!(a.rescale(4).unwrap(), ScaledExponent::new(2, 4));
        assert!(a.rescale(3).is_err());
        assert_eq!(ScaledExponent::from_rat(&r("3/2"), 4).unwrap().value, 6);
        assert!(ScaledExponent::from_rat(&r("1/3"), 4).is_err());
    }
}
