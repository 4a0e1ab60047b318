use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::{Fixed192, FRAC_BITS};
use crate::error::{Error, Result};

/// Exact real number `(p + q*sqrt(d)) / r`.
///
/// Canonical form: `r > 0`, `gcd(p, q, r) = 1`, `d` squarefree and different
/// from 1, and `d = 0` exactly when `q = 0`. Because the form is canonical,
/// structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadraticReal {
    p: BigInt,
    q: BigInt,
    d: u64,
    r: BigInt,
}

/// Fixed-point approximation `significand / 2^fraction_bits`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FixedPointReal {
    pub significand: BigInt,
    pub fraction_bits: u32,
}

/// Splits `d` into `(s, f)` with `d = s^2 * f` and `f` squarefree.
fn squarefree_split(mut d: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = 1u64;
    let mut f = 2u64;
    while f.saturating_mul(f) <= d {
        let mut e = 0;
        while d.is_multiple_of(f) {
            d /= f;
            e += 1;
        }
        square *= f.pow(e / 2);
        if e % 2 == 1 {
            free *= f;
        }
        f += if f == 2 { 1 } else { 2 };
    }
    (square, free * d)
}

/// `floor((p + s*sqrt(n)) / r)` for `r > 0`, `n >= 0`, `s` in {-1, 0, 1}.
pub(crate) fn floor_surd(p: &BigInt, s: i8, n: &BigInt, r: &BigInt) -> BigInt {
    debug_assert!(r.is_positive());
    let root = n.sqrt();
    let radical_floor = match s {
        0 => BigInt::zero(),
        1 => root,
        _ => {
            if &(&root * &root) == n {
                -root
            } else {
                -root - 1
            }
        }
    };
    // p + s*sqrt(n) lies in [A, A+1) with A an integer, so the quotient by a
    // positive integer r has the same floor as A / r.
    (p + radical_floor).div_floor(r)
}

impl QuadraticReal {
    pub fn new(
        p: impl Into<BigInt>,
        q: impl Into<BigInt>,
        d: u64,
        r: impl Into<BigInt>,
    ) -> Result<Self> {
        let (p, q, r) = (p.into(), q.into(), r.into());
        if r.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (s, free) = squarefree_split(d);
        Ok(Self::canonical(p, q * BigInt::from(s), free, r))
    }

    fn canonical(mut p: BigInt, mut q: BigInt, mut d: u64, mut r: BigInt) -> Self {
        if d == 1 {
            p += &q;
            q = BigInt::zero();
        }
        if d == 0 {
            q = BigInt::zero();
        }
        if q.is_zero() {
            d = 0;
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        if p.is_zero() && q.is_zero() {
            r = BigInt::one();
        }
        QuadraticReal { p, q, d, r }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        QuadraticReal {
            p: n.into(),
            q: BigInt::zero(),
            d: 0,
            r: BigInt::one(),
        }
    }

    pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        Self::new(num, 0, 0, den)
    }

    pub fn sqrt(d: u64) -> Self {
        Self::new(0, 1, d, 1).expect("unit denominator")
    }

    /// `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        Self::new(1, 1, 5, 2).expect("non-zero denominator")
    }

    /// The exact binary rational held by a finite double.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("{x} is not finite")));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mantissa) * sign;
        if e >= 0 {
            Ok(Self::from_int(m << e as usize))
        } else {
            Self::rational(m, BigInt::one() << (-e) as usize)
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn r(&self) -> &BigInt {
        &self.r
    }

    /// Squarefree radicand; 0 for rationals.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.q.is_zero() && self.r.is_one()
    }

    /// Radicand shared by two values, treating rationals as compatible with
    /// every field.
    pub fn common_radicand(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::MixedRadicands(a, b)),
        }
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.p, &self.q, self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn floor(&self) -> BigInt {
        let n = &self.q * &self.q * BigInt::from(self.d);
        let s = match self.q.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        };
        floor_surd(&self.p, s, &n, &self.r)
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn frac(&self) -> Self {
        let fl = Self::from_int(self.floor());
        self.checked_sub(&fl).expect("integers are in every field")
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::canonical(
            &self.p * &other.r + &other.p * &self.r,
            &self.q * &other.r + &other.q * &self.r,
            d,
            &self.r * &other.r,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        let dd = BigInt::from(d);
        Ok(Self::canonical(
            &self.p * &other.p + &self.q * &other.q * &dd,
            &self.p * &other.q + &self.q * &other.p,
            d,
            &self.r * &other.r,
        ))
    }

    pub fn mul_int(&self, n: impl Into<BigInt>) -> Self {
        let n = n.into();
        Self::canonical(&self.p * &n, &self.q * &n, self.d, self.r.clone())
    }

    /// Exact reciprocal by multiplying through with the conjugate.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // r / (p + q√d) = r (p - q√d) / (p² - q² d)
        let norm = &self.p * &self.p - &self.q * &self.q * BigInt::from(self.d);
        Ok(Self::canonical(
            &self.r * &self.p,
            -(&self.r * &self.q),
            self.d,
            norm,
        ))
    }

    /// `a * self + b`.
    pub fn affine(&self, a: &Self, b: &Self) -> Result<Self> {
        a.checked_mul(self)?.checked_add(b)
    }

    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering> {
        Ok(self.checked_sub(other)?.signum())
    }

    /// `floor(self * 2^bits)`.
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        let scale = BigInt::one() << bits as usize;
        let q = &self.q * &scale;
        let n = &q * &q * BigInt::from(self.d);
        floor_surd(&(&self.p * &scale), q_sign(&q), &n, &self.r)
    }

    /// Nearest fixed-point value, error at most `2^-(fraction_bits + 1)`.
    pub fn to_fixed(&self, fraction_bits: u32) -> FixedPointReal {
        // floor(x * 2^b + 1/2) = floor((2 p 2^b + r + 2 q 2^b √d) / 2r)
        let scale = BigInt::one() << (fraction_bits as usize + 1);
        let q = &self.q * &scale;
        let n = &q * &q * BigInt::from(self.d);
        let significand = floor_surd(
            &(&self.p * &scale + &self.r),
            q_sign(&q),
            &n,
            &(&self.r * 2),
        );
        FixedPointReal {
            significand,
            fraction_bits,
        }
    }

    /// Nearest 192-bit wide fixed-point value, or `None` when the integer
    /// part needs more than 127 bits.
    pub fn to_fixed192(&self) -> Option<Fixed192> {
        Fixed192::from_scaled(&self.to_fixed(FRAC_BITS).significand)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_fixed(128).to_f64()
    }
}

fn q_sign(q: &BigInt) -> i8 {
    match q.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Sign of `p + q*sqrt(d)` using one squaring and integer comparisons.
fn sign_of(p: &BigInt, q: &BigInt, d: u64) -> Ordering {
    let sp = p.sign();
    let sq = if d == 0 { num_bigint::Sign::NoSign } else { q.sign() };
    use num_bigint::Sign::*;
    match (sp, sq) {
        (NoSign, NoSign) => Ordering::Equal,
        (Plus | NoSign, Plus | NoSign) => Ordering::Greater,
        (Minus | NoSign, Minus | NoSign) => Ordering::Less,
        (Plus, Minus) => (p * p).cmp(&(q * q * BigInt::from(d))),
        (Minus, Plus) => (q * q * BigInt::from(d)).cmp(&(p * p)),
    }
}

impl std::ops::Neg for &QuadraticReal {
    type Output = QuadraticReal;
    fn neg(self) -> QuadraticReal {
        QuadraticReal {
            p: -&self.p,
            q: -&self.q,
            d: self.d,
            r: self.r.clone(),
        }
    }
}

impl std::ops::Neg for QuadraticReal {
    type Output = QuadraticReal;
    fn neg(self) -> QuadraticReal {
        -&self
    }
}

impl fmt::Display for QuadraticReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = if self.q.is_zero() {
            self.p.to_string()
        } else {
            let rad = if self.q.is_one() {
                format!("√{}", self.d)
            } else if self.q == -BigInt::one() {
                format!("-√{}", self.d)
            } else {
                format!("{}√{}", self.q, self.d)
            };
            if self.p.is_zero() {
                rad
            } else if self.q.is_negative() {
                format!("{} - {}", self.p, rad.trim_start_matches('-'))
            } else {
                format!("{} + {}", self.p, rad)
            }
        };
        if self.r.is_one() {
            f.write_str(&num)
        } else if self.q.is_zero() || self.p.is_zero() {
            write!(f, "{num}/{}", self.r)
        } else {
            write!(f, "({num})/{}", self.r)
        }
    }
}

impl FixedPointReal {
    pub fn to_f64(&self) -> f64 {
        // Shift down first so the conversion does not overflow for wide
        // significands.
        let keep = 120u32.min(self.fraction_bits);
        let shifted: BigInt = &self.significand >> (self.fraction_bits - keep) as usize;
        shifted.to_f64().unwrap_or(f64::NAN) * (-(keep as f64)).exp2()
    }

    pub fn floor(&self) -> BigInt {
        &self.significand >> self.fraction_bits as usize
    }

    /// The same value on the 192-bit grid (truncating extra bits).
    pub fn to_fixed192(&self) -> Option<Fixed192> {
        let scaled = if self.fraction_bits >= FRAC_BITS {
            &self.significand >> (self.fraction_bits - FRAC_BITS) as usize
        } else {
            &self.significand << (FRAC_BITS - self.fraction_bits) as usize
        };
        Fixed192::from_scaled(&scaled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qr(p: i64, q: i64, d: u64, r: i64) -> QuadraticReal {
        QuadraticReal::new(p, q, d, r).unwrap()
    }

    #[test]
    fn canonical_form_extracts_squares() {
        // √8 / 2 = √2
        assert_eq!(qr(0, 1, 8, 2), QuadraticReal::sqrt(2));
        // √4 is rational
        assert_eq!(qr(1, 1, 4, 1), QuadraticReal::from_int(3));
        assert_eq!(qr(2, 4, 3, -6), qr(-1, -2, 3, 3));
    }

    #[test]
    fn floor_examples() {
        assert_eq!(qr(0, 3, 2, 1).floor(), BigInt::from(4));
        assert_eq!(QuadraticReal::from_int(5).floor(), BigInt::from(5));
        assert_eq!(QuadraticReal::golden().floor(), BigInt::from(1));
        assert_eq!(qr(0, -1, 2, 1).floor(), BigInt::from(-2));
        assert_eq!(qr(-7, 0, 0, 2).floor(), BigInt::from(-4));
    }

    #[test]
    fn frac_examples() {
        // 4/√2 = 2√2
        let x = QuadraticReal::from_int(4)
            .checked_mul(&QuadraticReal::sqrt(2).inverse().unwrap())
            .unwrap();
        assert_eq!(x, qr(0, 2, 2, 1));
        assert_eq!(x.frac(), qr(-2, 2, 2, 1));
        assert!((x.frac().to_f64() - 0.828_427_124_746_190_1).abs() < 1e-15);
        assert_eq!(QuadraticReal::from_int(7).frac(), QuadraticReal::zero());
        assert_eq!(QuadraticReal::sqrt(2).frac(), qr(-1, 1, 2, 1));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(QuadraticReal::sqrt(2).inverse().unwrap(), qr(0, 1, 2, 2));
        assert_eq!(
            QuadraticReal::rational(2, 3).unwrap().inverse().unwrap(),
            QuadraticReal::rational(3, 2).unwrap()
        );
        assert_eq!(QuadraticReal::golden().inverse().unwrap(), qr(-1, 1, 5, 2));
        assert!(matches!(
            QuadraticReal::zero().inverse(),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn affine_examples() {
        let s2 = QuadraticReal::sqrt(2);
        let three = QuadraticReal::from_int(3);
        assert_eq!(
            s2.affine(&three, &QuadraticReal::zero()).unwrap(),
            qr(0, 3, 2, 1)
        );
        let half = QuadraticReal::rational(1, 2).unwrap();
        assert_eq!(
            s2.affine(&QuadraticReal::one(), &half).unwrap(),
            qr(1, 2, 2, 2)
        );
        let g = qr(0, 1, 2, 2);
        assert_eq!(
            g.affine(&QuadraticReal::from_int(4), &g).unwrap(),
            qr(0, 5, 2, 2)
        );
        assert!(matches!(
            s2.affine(&three, &QuadraticReal::sqrt(3)),
            Err(Error::MixedRadicands(2, 3))
        ));
    }

    #[test]
    fn to_fixed_examples() {
        let half = QuadraticReal::rational(1, 2).unwrap();
        assert_eq!(half.to_fixed(64).significand, BigInt::one() << 63);
        assert!(QuadraticReal::zero().to_fixed(64).significand.is_zero());

        // s^2 brackets 2 * 2^384 within the rounding slack of 2^-190
        let s = QuadraticReal::sqrt(2).to_fixed(192).significand;
        let two = BigInt::from(2) << 384;
        let slack = BigInt::one() << (384 - 190);
        let diff: BigInt = &s * &s - &two;
        assert!(diff.abs() < slack);
    }

    #[test]
    fn from_f64_is_exact() {
        let x = QuadraticReal::from_f64(0.1).unwrap();
        assert_eq!(x.to_f64(), 0.1);
        assert_eq!(
            QuadraticReal::from_f64(-2.5).unwrap(),
            QuadraticReal::rational(-5, 2).unwrap()
        );
    }

    #[test]
    fn display() {
        assert_eq!(QuadraticReal::golden().to_string(), "(1 + √5)/2");
        assert_eq!(qr(-1, -1, 2, 1).to_string(), "-1 - √2");
        assert_eq!(QuadraticReal::rational(3, 4).unwrap().to_string(), "3/4");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_qr() -> impl Strategy<Value = QuadraticReal> {
            (-1000i64..1000, -50i64..50, prop::sample::select(vec![0u64, 2, 3, 5, 6, 7, 10, 13]), 1i64..200)
                .prop_map(|(p, q, d, r)| QuadraticReal::new(p, q, d, r).unwrap())
        }

        fn dyadic(n: BigInt, bits: u32) -> QuadraticReal {
            QuadraticReal::rational(n, BigInt::one() << bits as usize).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]

            #[test]
            fn to_fixed_within_one_ulp(x in any_qr(), bits in prop::sample::select(vec![32u32, 64, 192])) {
                let s = x.to_fixed(bits).significand;
                let below = dyadic(&s - 1, bits);
                let above = dyadic(&s + 1, bits);
                prop_assert_eq!(below.cmp_exact(&x).unwrap(), Ordering::Less);
                prop_assert_eq!(above.cmp_exact(&x).unwrap(), Ordering::Greater);
            }

            #[test]
            fn floor_brackets(x in any_qr()) {
                let f = QuadraticReal::from_int(x.floor());
                prop_assert_ne!(f.cmp_exact(&x).unwrap(), Ordering::Greater);
                let g = QuadraticReal::from_int(x.floor() + 1);
                prop_assert_eq!(g.cmp_exact(&x).unwrap(), Ordering::Greater);
                prop_assert_eq!(x.ceil() - x.floor(), BigInt::from(u8::from(!x.is_integer())));
            }

            #[test]
            fn inverse_and_affine_are_exact(x in any_qr(), a in -20i64..20, b in -20i64..20) {
                prop_assume!(!x.is_zero());
                prop_assert_eq!(x.checked_mul(&x.inverse().unwrap()).unwrap(), QuadraticReal::one());
                let y = x.affine(&QuadraticReal::from_int(a), &QuadraticReal::from_int(b)).unwrap();
                let back = y.checked_sub(&QuadraticReal::from_int(b)).unwrap();
                prop_assert_eq!(back, x.mul_int(a));
            }
        }

        #[test]
        fn floor_agrees_with_wide_fixed_point() {
            let beta = QuadraticReal::rational(1, 3).unwrap();
            for alpha in [QuadraticReal::sqrt(2), QuadraticReal::golden(), QuadraticReal::sqrt(3)] {
                let a = alpha.to_fixed(256).significand;
                let b = beta.to_fixed(256).significand;
                let near = BigInt::one() << 128;
                let mut n = 1i64;
                while n <= 1_000_000 {
                    let v = &a * n + &b;
                    let (f, rem) = v.div_mod_floor(&(BigInt::one() << 256));
                    if rem > near && (BigInt::one() << 256) - &rem > near {
                        let exact = alpha.mul_int(n).checked_add(&beta).unwrap().floor();
                        assert_eq!(exact, f, "n = {n}");
                    }
                    n += 997;
                }
            }
        }
    }
}
