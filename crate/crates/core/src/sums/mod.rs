//! Character sums over Beatty sequences, hybrid exponential sums, the
//! smoothed interval indicator and the Fourier-side approximation.

mod charsum;
mod expsum;
mod sieve;
mod smoothing;

pub use charsum::{
    boundary_count_v, charsum_s, charsum_s_exact, charsum_via_membership,
    charsum_via_membership_exact, smoothed_charsum, ApproxReport, Substitution,
};
pub use expsum::{
    e, expsum_u, expsum_u_phase, expsum_u_rational, rational_substitution_gap, SubstitutionGap,
};
pub use sieve::{genfunc_sum_v, ArithmeticIndicator, IndicatorTable};
pub use smoothing::{build_psi_delta, psi_delta_eval, EvalMode, PiecewiseIndicator, SmoothedIndicator};

use num_complex::Complex64;

/// Neumaier-compensated summation on both components.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexAccumulator {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn two_sum(s: f64, c: &mut f64, x: f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *c += (s - t) + x;
    } else {
        *c += (x - t) + s;
    }
    t
}

impl ComplexAccumulator {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.sum.re = two_sum(self.sum.re, &mut self.comp.re, z.re);
        self.sum.im = two_sum(self.sum.im, &mut self.comp.im, z.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = ComplexAccumulator::default();
        acc.add(Complex64::new(1e16, 0.0));
        for _ in 0..1000 {
            acc.add(Complex64::new(1.0, -1.0));
        }
        acc.add(Complex64::new(-1e16, 0.0));
        assert_eq!(acc.value(), Complex64::new(1000.0, -1000.0));
    }
}
