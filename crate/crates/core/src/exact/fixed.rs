//! Wide fixed-point arithmetic used for fast, error-bounded evaluation of
//! `a*n + b` and of phases `t*m mod 1`.
//!
//! [`Fixed192`] is a 320-bit two's-complement number with 192 fractional
//! bits. [`Phase`] is the fractional part alone, i.e. an element of the
//! circle group R/Z sampled on a grid of 2^-192.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

pub const FRAC_BITS: u32 = 192;
const LIMBS: usize = 5;
const FRAC_LIMBS: usize = 3;

/// `value = limbs / 2^192`, limbs little-endian, two's complement.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Fixed192 {
    limbs: [u64; LIMBS],
}

impl Fixed192 {
    pub const ZERO: Fixed192 = Fixed192 { limbs: [0; LIMBS] };

    pub fn from_int(i: i128) -> Self {
        let u = i as u128;
        Fixed192 {
            limbs: [0, 0, 0, u as u64, (u >> 64) as u64],
        }
    }

    /// Builds a value from `floor(x * 2^192)`. Returns `None` when the
    /// integer part does not fit in 128 signed bits.
    pub fn from_scaled(scaled: &BigInt) -> Option<Self> {
        let bits = scaled.bits();
        if bits >= 319 {
            return None;
        }
        let (sign, mag) = scaled.to_u64_digits();
        let mut limbs = [0u64; LIMBS];
        for (dst, src) in limbs.iter_mut().zip(mag.iter()) {
            *dst = *src;
        }
        let v = Fixed192 { limbs };
        Some(if sign == Sign::Minus { v.wrapping_neg() } else { v })
    }

    pub fn to_scaled(&self) -> BigInt {
        let negative = self.is_negative();
        let mag = if negative { self.wrapping_neg() } else { *self };
        let v = BigInt::from_slice(
            Sign::Plus,
            &mag.limbs
                .iter()
                .flat_map(|l| [*l as u32, (*l >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        if negative {
            -v
        } else {
            v
        }
    }

    pub fn is_negative(&self) -> bool {
        (self.limbs[LIMBS - 1] as i64) < 0
    }

    pub fn wrapping_add(self, other: Self) -> Self {
        let mut out = [0u64; LIMBS];
        let mut carry = false;
        for (i, o) in out.iter_mut().enumerate() {
            let (s1, c1) = self.limbs[i].overflowing_add(other.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *o = s2;
            carry = c1 || c2;
        }
        Fixed192 { limbs: out }
    }

    pub fn wrapping_neg(self) -> Self {
        let mut out = [0u64; LIMBS];
        let mut carry = true;
        for (i, o) in out.iter_mut().enumerate() {
            let (s, c) = (!self.limbs[i]).overflowing_add(carry as u64);
            *o = s;
            carry = c;
        }
        Fixed192 { limbs: out }
    }

    pub fn wrapping_sub(self, other: Self) -> Self {
        self.wrapping_add(other.wrapping_neg())
    }

    pub fn wrapping_mul_int(self, m: i64) -> Self {
        let u = m.unsigned_abs() as u128;
        let mut out = [0u64; LIMBS];
        let mut carry: u128 = 0;
        for (i, o) in out.iter_mut().enumerate() {
            let prod = self.limbs[i] as u128 * u + carry;
            *o = prod as u64;
            carry = prod >> 64;
        }
        let v = Fixed192 { limbs: out };
        if m < 0 {
            v.wrapping_neg()
        } else {
            v
        }
    }

    /// Integer part, rounded toward negative infinity.
    pub fn floor(&self) -> i128 {
        ((self.limbs[4] as u128) << 64 | self.limbs[3] as u128) as i128
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac(&self) -> Phase {
        Phase([self.limbs[2], self.limbs[1], self.limbs[0]])
    }

    /// True when `|self| <= ulps * 2^-192`.
    pub fn abs_within_ulps(&self, ulps: u128) -> bool {
        let mag = if self.is_negative() {
            self.wrapping_neg()
        } else {
            *self
        };
        if mag.limbs[2] != 0 || mag.limbs[3] != 0 || mag.limbs[4] != 0 {
            return false;
        }
        ((mag.limbs[1] as u128) << 64 | mag.limbs[0] as u128) <= ulps
    }

    pub fn to_f64(&self) -> f64 {
        let scaled = self.to_scaled();
        scaled.to_f64().unwrap_or(f64::NAN) * (-(FRAC_BITS as f64)).exp2()
    }
}

impl PartialOrd for Fixed192 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed192 {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.limbs[LIMBS - 1] as i64;
        let b = other.limbs[LIMBS - 1] as i64;
        a.cmp(&b).then_with(|| {
            (0..LIMBS - 1)
                .rev()
                .map(|i| self.limbs[i].cmp(&other.limbs[i]))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// A point of R/Z with 192 bits of resolution, limbs most significant first
/// so the derived ordering is the numeric ordering on `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Phase(pub [u64; FRAC_LIMBS]);

impl Phase {
    pub const ZERO: Phase = Phase([0; FRAC_LIMBS]);

    pub fn wrapping_add(self, other: Phase) -> Phase {
        let mut out = [0u64; FRAC_LIMBS];
        let mut carry = false;
        for i in (0..FRAC_LIMBS).rev() {
            let (s1, c1) = self.0[i].overflowing_add(other.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 || c2;
        }
        Phase(out)
    }

    pub fn wrapping_neg(self) -> Phase {
        let mut out = [0u64; FRAC_LIMBS];
        let mut carry = true;
        for i in (0..FRAC_LIMBS).rev() {
            let (s, c) = (!self.0[i]).overflowing_add(carry as u64);
            out[i] = s;
            carry = c;
        }
        Phase(out)
    }

    /// `self * m mod 1`.
    pub fn wrapping_mul_int(self, m: i64) -> Phase {
        let u = m.unsigned_abs() as u128;
        let mut out = [0u64; FRAC_LIMBS];
        let mut carry: u128 = 0;
        for i in (0..FRAC_LIMBS).rev() {
            let prod = self.0[i] as u128 * u + carry;
            out[i] = prod as u64;
            carry = prod >> 64;
        }
        let p = Phase(out);
        if m < 0 {
            p.wrapping_neg()
        } else {
            p
        }
    }

    /// The phase as a fraction of a full turn, in `[0, 1)`.
    pub fn turns(&self) -> f64 {
        // Top 64 bits carry all the precision a double can hold.
        let t = (self.0[0] as f64 + self.0[1] as f64 * 2f64.powi(-64)) * 2f64.powi(-64);
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }

    pub fn to_fixed(self) -> Fixed192 {
        Fixed192 {
            limbs: [self.0[2], self.0[1], self.0[0], 0, 0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Phase nearest to the rational `num/den`, `den > 0`.
    pub fn from_ratio(num: i64, den: u64) -> Phase {
        let den = den as i128;
        let reduced = (num as i128).rem_euclid(den);
        let scaled = (BigInt::from(reduced) << FRAC_BITS) + BigInt::from(den / 2);
        let q = scaled / BigInt::from(den);
        Fixed192::from_scaled(&q)
            .map(|f| f.frac())
            .unwrap_or(Phase::ZERO)
    }
}
