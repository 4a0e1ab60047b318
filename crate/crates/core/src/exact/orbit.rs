//! Fast exact evaluation along an arithmetic progression `x(n) = slope*n + offset`.
//!
//! Every decision (floor, comparison of the fractional part with a threshold)
//! is first attempted on a 192-bit fixed-point approximation with a rigorous
//! error bound, and falls back to exact quadratic arithmetic only when the
//! approximation cannot separate the two sides.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::fixed::{Fixed192, Phase};
use super::quadratic::QuadraticReal;
use crate::error::{Error, Result};

/// An exact threshold in `[0, 1]` together with its nearest 192-bit value.
#[derive(Clone, Debug)]
pub struct Threshold {
    exact: QuadraticReal,
    approx: Fixed192,
}

impl Threshold {
    pub fn new(exact: QuadraticReal) -> Result<Self> {
        let approx = exact
            .to_fixed192()
            .ok_or_else(|| Error::invalid("threshold out of range"))?;
        Ok(Threshold { exact, approx })
    }

    pub fn exact(&self) -> &QuadraticReal {
        &self.exact
    }
}

#[derive(Clone, Debug)]
pub struct LinearOrbit {
    slope: QuadraticReal,
    offset: QuadraticReal,
    slope_fx: Fixed192,
    offset_fx: Fixed192,
    same_field: bool,
}

impl LinearOrbit {
    /// `slope` and `offset` may come from different quadratic fields; in that
    /// case only [`LinearOrbit::floor`] is available, and it relies on the
    /// value never being an integer.
    pub fn new(slope: QuadraticReal, offset: QuadraticReal) -> Result<Self> {
        let same_field = slope.common_radicand(&offset).is_ok();
        let slope_fx = slope
            .to_fixed192()
            .ok_or_else(|| Error::invalid("slope out of range"))?;
        let offset_fx = offset
            .to_fixed192()
            .ok_or_else(|| Error::invalid("offset out of range"))?;
        Ok(LinearOrbit {
            slope,
            offset,
            slope_fx,
            offset_fx,
            same_field,
        })
    }

    pub fn slope(&self) -> &QuadraticReal {
        &self.slope
    }

    pub fn offset(&self) -> &QuadraticReal {
        &self.offset
    }

    pub fn is_single_field(&self) -> bool {
        self.same_field
    }

    /// Exact `slope*n + offset`.
    pub fn exact(&self, n: i64) -> Result<QuadraticReal> {
        self.slope.mul_int(n).checked_add(&self.offset)
    }

    /// Approximation and its error bound in units of 2^-192.
    #[inline]
    pub fn approx(&self, n: i64) -> (Fixed192, u128) {
        let v = self.slope_fx.wrapping_mul_int(n).wrapping_add(self.offset_fx);
        // each constant is within half an ulp of its exact value
        (v, n.unsigned_abs() as u128 / 2 + 2)
    }

    pub fn floor(&self, n: i64) -> i64 {
        let (v, err) = self.approx(n);
        let f = v.frac().to_fixed();
        let one = Fixed192::from_int(1);
        if !f.abs_within_ulps(err) && !f.wrapping_sub(one).abs_within_ulps(err) {
            return v.floor() as i64;
        }
        self.floor_slow(n)
    }

    fn floor_slow(&self, n: i64) -> i64 {
        let fl: BigInt = if self.same_field {
            self.exact(n).expect("single field").floor()
        } else {
            self.floor_refined(n)
        };
        fl.to_i64().expect("orbit value fits in 64 bits")
    }

    /// Floor of a value with two distinct radicals. Such a value is never an
    /// integer, so doubling the precision eventually separates it from every
    /// integer.
    fn floor_refined(&self, n: i64) -> BigInt {
        let mut bits = 384u32;
        loop {
            let a = self.slope.to_fixed(bits).significand * n;
            let b = self.offset.to_fixed(bits).significand;
            let v = a + b;
            let err = BigInt::from(n.unsigned_abs()) + 2;
            let lo = (&v - &err) >> bits as usize;
            let hi = (&v + &err) >> bits as usize;
            if lo == hi {
                return lo;
            }
            bits *= 2;
        }
    }

    /// Fractional part of `x(n)` as a 192-bit phase (error bounded as in
    /// [`LinearOrbit::approx`]).
    #[inline]
    pub fn frac_phase(&self, n: i64) -> Phase {
        self.approx(n).0.frac()
    }

    /// Fractional part as a 192-bit phase whose integer part is decided
    /// exactly, so values just above an integer never wrap to just below 1.
    pub fn frac_phase_exact(&self, n: i64) -> Phase {
        let (v, _) = self.approx(n);
        let f = v.wrapping_sub(Fixed192::from_int(self.floor(n) as i128));
        if f.is_negative() {
            Phase::ZERO
        } else if f >= Fixed192::from_int(1) {
            Phase([u64::MAX; 3])
        } else {
            f.frac()
        }
    }

    pub fn frac_f64(&self, n: i64) -> f64 {
        self.frac_phase(n).turns()
    }

    /// Exact comparison of `{x(n)}` with `threshold`.
    pub fn cmp_frac(&self, n: i64, threshold: &Threshold) -> Result<Ordering> {
        let (v, err) = self.approx(n);
        let f = v.frac().to_fixed();
        let one = Fixed192::from_int(1);
        let near_integer = f.abs_within_ulps(err) || f.wrapping_sub(one).abs_within_ulps(err);
        if !near_integer {
            let diff = f.wrapping_sub(threshold.approx);
            if !diff.abs_within_ulps(err + 1) {
                return Ok(if diff.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                });
            }
        }
        if !self.same_field {
            return Err(Error::MixedRadicands(
                self.slope.radicand(),
                self.offset.radicand(),
            ));
        }
        self.exact(n)?.frac().cmp_exact(&threshold.exact)
    }

    /// True when `{x(n)} == 0`, decided exactly.
    pub fn frac_is_zero(&self, n: i64) -> Result<bool> {
        let (v, err) = self.approx(n);
        let f = v.frac().to_fixed();
        let one = Fixed192::from_int(1);
        if !f.abs_within_ulps(err) && !f.wrapping_sub(one).abs_within_ulps(err) {
            return Ok(false);
        }
        if !self.same_field {
            return Ok(false);
        }
        Ok(self.exact(n)?.frac().is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_matches_exact_along_orbit() {
        let orbit = LinearOrbit::new(
            QuadraticReal::sqrt(2),
            QuadraticReal::rational(1, 3).unwrap(),
        )
        .unwrap();
        for n in -200..200 {
            let exact = orbit.exact(n).unwrap().floor();
            assert_eq!(BigInt::from(orbit.floor(n)), exact, "n = {n}");
        }
    }

    #[test]
    fn exact_integer_values_take_slow_path() {
        // 1/2 * n + 1/2 hits integers at odd n
        let orbit = LinearOrbit::new(
            QuadraticReal::rational(1, 2).unwrap(),
            QuadraticReal::rational(1, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(orbit.floor(3), 2);
        assert_eq!(orbit.floor(-3), -1);
        assert!(orbit.frac_is_zero(5).unwrap());
        assert!(!orbit.frac_is_zero(4).unwrap());
    }

    #[test]
    fn threshold_equality_is_exact() {
        let g = QuadraticReal::sqrt(2).inverse().unwrap();
        let orbit = LinearOrbit::new(g.clone(), QuadraticReal::zero()).unwrap();
        let t = Threshold::new(g.clone()).unwrap();
        assert_eq!(orbit.cmp_frac(1, &t).unwrap(), Ordering::Equal);
        assert_eq!(orbit.cmp_frac(2, &t).unwrap(), Ordering::Less); // {√2} ≈ 0.414
    }

    #[test]
    fn mixed_fields_floor_by_refinement() {
        let orbit = LinearOrbit::new(
            QuadraticReal::sqrt(2),
            QuadraticReal::golden().checked_sub(&QuadraticReal::one()).unwrap(),
        )
        .unwrap();
        assert!(!orbit.is_single_field());
        for n in 1..500 {
            let expect = (n as f64 * 2f64.sqrt() + 0.618_033_988_749_894_8).floor() as i64;
            assert_eq!(orbit.floor(n), expect);
            assert_eq!(orbit.floor_refined(n), BigInt::from(expect));
        }
    }
}
