use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::ComplexAccumulator;
use crate::characters::CharTable;
use crate::error::{Error, Result};
use crate::exact::{FixedPointReal, Phase, QuadraticReal};

/// `e(x) = exp(2πi x)` on a 192-bit phase.
#[inline]
pub fn e(phase: Phase) -> Complex64 {
    let (s, c) = (TAU * phase.turns()).sin_cos();
    Complex64::new(c, s)
}

fn check_range(m0: i64, m: i64) -> Result<()> {
    if m0 > m {
        return Err(Error::pre(format!("empty range needs M0 <= M, got ({m0}, {m})")));
    }
    Ok(())
}

/// `Σ_{M₀ < m ≤ M} χ(m) e(tm)` with `t` given as a phase mod 1.
pub fn expsum_u_phase(chi: &CharTable, t: Phase, m0: i64, m: i64) -> Result<Complex64> {
    check_range(m0, m)?;
    let mut acc = ComplexAccumulator::default();
    let mut phase = t.wrapping_mul_int(m0 + 1);
    for x in m0 + 1..=m {
        if let Some(ex) = chi.exponent(x) {
            acc.add(chi.root(ex) * e(phase));
        }
        phase = phase.wrapping_add(t);
    }
    Ok(acc.value())
}

pub fn expsum_u(chi: &CharTable, t: &FixedPointReal, m0: i64, m: i64) -> Result<Complex64> {
    let phase = t
        .to_fixed192()
        .ok_or_else(|| Error::invalid("t out of fixed-point range"))?
        .frac();
    expsum_u_phase(chi, phase, m0, m)
}

/// Same sum with `t = a/k`, phases tracked exactly as `m·a mod k`.
pub fn expsum_u_rational(chi: &CharTable, a: i64, k: u64, m0: i64, m: i64) -> Result<Complex64> {
    check_range(m0, m)?;
    if k == 0 {
        return Err(Error::ZeroDenominator);
    }
    let roots: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / k as f64))
        .collect();
    let ki = k as i128;
    let step = (a as i128).rem_euclid(ki) as u64;
    let mut idx = ((a as i128) * (m0 as i128 + 1)).rem_euclid(ki) as u64;
    let mut acc = ComplexAccumulator::default();
    for x in m0 + 1..=m {
        if let Some(ex) = chi.exponent(x) {
            acc.add(chi.root(ex) * roots[idx as usize]);
        }
        idx += step;
        if idx >= k {
            idx -= k;
        }
    }
    Ok(acc.value())
}

#[derive(Clone, Debug, Serialize)]
pub struct SubstitutionGap {
    /// `r = ⌊γk⌋`.
    pub r: i64,
    pub j: i64,
    pub exact: Complex64,
    pub rational: Complex64,
    pub gap: f64,
    /// Effective length `N = max(M - M₀, ⌈max|m|/2⌉)`.
    pub n_eff: u64,
    /// `N²|j|/k`.
    pub bound_term: f64,
    /// `4π·N²|j|/k`.
    pub bound: f64,
    pub holds: bool,
}

/// Compares `U_k(γj)` with `U_k(rj/k)` for `r = ⌊γk⌋`.
///
/// Each phase moves by `|m||j|(γ - r/k) < |m||j|/k` and `|e(x) - e(y)| ≤ 2π|x - y|`;
/// with at most `N` terms of index at most `2N` the gap is below `4πN²|j|/k`.
pub fn rational_substitution_gap(
    chi: &CharTable,
    gamma: &QuadraticReal,
    j: i64,
    k: u64,
    m0: i64,
    m: i64,
) -> Result<SubstitutionGap> {
    if j == 0 {
        return Err(Error::pre("rational substitution needs j != 0"));
    }
    check_range(m0, m)?;
    let r = gamma
        .mul_int(k)
        .floor()
        .to_i64()
        .ok_or_else(|| Error::invalid("gamma*k out of range"))?;
    let t = gamma.mul_int(j).to_fixed(crate::exact::DEFAULT_FRACTION_BITS);
    let exact = expsum_u(chi, &t, m0, m)?;
    let rational = expsum_u_rational(chi, r * j, k, m0, m)?;
    let gap = (exact - rational).norm();
    let len = (m - m0) as u64;
    let reach = (m0 + 1).unsigned_abs().max(m.unsigned_abs());
    let n_eff = len.max(reach.div_ceil(2));
    let bound_term = (n_eff as f64).powi(2) * j.unsigned_abs() as f64 / k as f64;
    let bound = 4.0 * std::f64::consts::PI * bound_term;
    Ok(SubstitutionGap {
        r,
        j,
        exact,
        rational,
        gap,
        n_eff,
        bound_term,
        bound,
        holds: gap <= bound + 1e-9,
    })
}
