//! Exact arithmetic in real quadratic fields and its fixed-point export.

mod fixed;
mod orbit;
mod quadratic;

pub use fixed::{Fixed192, Phase, FRAC_BITS};
pub use orbit::{LinearOrbit, Threshold};
pub use quadratic::{FixedPointReal, QuadraticReal};
pub(crate) use quadratic::floor_surd;

use num_bigint::BigInt;

use crate::error::Result;

/// Default number of fractional bits for exported values.
pub const DEFAULT_FRACTION_BITS: u32 = 192;

pub fn qr_floor(x: &QuadraticReal) -> BigInt {
    x.floor()
}

pub fn qr_frac(x: &QuadraticReal) -> QuadraticReal {
    x.frac()
}

pub fn qr_inverse(x: &QuadraticReal) -> Result<QuadraticReal> {
    x.inverse()
}

/// `a*x + b`; `a` is expected to be rational and `b` to share the field of `x`.
pub fn qr_affine(x: &QuadraticReal, a: &QuadraticReal, b: &QuadraticReal) -> Result<QuadraticReal> {
    x.affine(a, b)
}

pub fn to_fixed(x: &QuadraticReal, fraction_bits: u32) -> Result<FixedPointReal> {
    if fraction_bits < 64 {
        return Err(crate::Error::pre(format!(
            "fraction_bits must be at least 64, got {fraction_bits}"
        )));
    }
    Ok(x.to_fixed(fraction_bits))
}
