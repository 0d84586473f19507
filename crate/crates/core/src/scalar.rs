//! Exact scalars: the rationals `Q` and the Gaussian rationals `Q(i)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element `re + im*i` of `Q(i)`. Both parts are kept in lowest terms by
/// `BigRational`, so derived equality is exact structural equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub type Q = BigRational;
pub type Qi = GaussianRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl GaussianRational {
    pub fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(q(n, 1), Q::zero())
    }

    pub fn from_q(re: Q) -> Self {
        Self::new(re, Q::zero())
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::new(q(n, d), Q::zero())
    }

    /// `re_n/re_d + (im_n/im_d) i`
    pub fn complex(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> Self {
        Self::new(q(re_n, re_d), q(im_n, im_d))
    }

    pub fn i() -> Self {
        Self::new(Q::zero(), Q::one())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    /// `|x|^2`
    pub fn norm_sqr(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero in Q(i)");
        let n = self.norm_sqr();
        Self::new(&self.re / &n, -&self.im / &n)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(&self.re * c, &self.im * c)
    }

    pub fn mul_i(&self) -> Self {
        Self::new(-&self.im, self.re.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Largest numerator or denominator magnitude, in bits.
    pub fn height_bits(&self) -> u64 {
        [self.re.numer(), self.re.denom(), self.im.numer(), self.im.denom()]
            .iter()
            .map(|b| b.bits())
            .max()
            .unwrap_or(0)
    }
}

fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.re)),
            (true, false) => write!(f, "{}*i", fmt_q(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}*i", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse Gaussian rational from {0:?}")]
pub struct ParseScalarError(pub String);

fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Parses the rendering produced by `Display` (`a/b`, `c/d*i`, `a/b+c/d*i`).
impl FromStr for GaussianRational {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let t = s.trim();
        let Some(body) = t.strip_suffix("*i") else {
            return parse_q(t).map(Self::from_q).ok_or_else(err);
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(k, _)| k)
            .last();
        match split {
            Some(k) => {
                let re = parse_q(&body[..k]).ok_or_else(err)?;
                let sign = &body[k..k + 1];
                let mut im = parse_q(&body[k + 1..]).ok_or_else(err)?;
                if sign == "-" {
                    im = -im;
                }
                Ok(Self::new(re, im))
            }
            None => Ok(Self::new(Q::zero(), parse_q(body).ok_or_else(err)?)),
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::from_q(&self.re * &o.re);
        }
        GaussianRational::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self * &o.inv()
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                $tr::$m(&self, &o)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: &GaussianRational) -> GaussianRational {
                $tr::$m(&self, o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<Q> for GaussianRational {
    fn from(x: Q) -> Self {
        Self::from_q(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_in_lowest_terms() {
        let a = Qi::complex(1, 2, 1, 3);
        let b = Qi::complex(2, 4, 2, 6);
        assert_eq!(a, b);
        assert_eq!(&a * &a.inv(), Qi::one());
        // i^2 = -1
        assert_eq!(&Qi::i() * &Qi::i(), Qi::from_int(-1));
        // 1/(2i) = -i/2
        assert_eq!(Qi::from_int(2).mul_i().inv(), Qi::complex(0, 1, -1, 2));
    }

    #[test]
    fn display_and_parse() {
        for (x, s) in [
            (Qi::complex(1, 2, 3, 4), "1/2+3/4*i"),
            (Qi::complex(-1, 2, -3, 1), "-1/2-3*i"),
            (Qi::complex(0, 1, -1, 2), "-1/2*i"),
            (Qi::from_int(7), "7"),
            (Qi::zero(), "0"),
        ] {
            assert_eq!(x.to_string(), s);
            assert_eq!(s.parse::<Qi>().unwrap(), x);
        }
        assert!("1/0".parse::<Qi>().is_err());
        assert!("abc".parse::<Qi>().is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let x = Qi::complex(2, 3, -1, 5);
        let mut acc = Qi::one();
        for e in 0..9 {
            assert_eq!(x.pow(e), acc);
            acc = &acc * &x;
        }
    }
}
