//! Segmented sieves for the arithmetic weights in `V(t, f; M₀, M)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expsum::e;
use super::ComplexAccumulator;
use crate::error::{Error, Result};
use crate::exact::Phase;

const BLOCK: i64 = 1 << 16;
const MAX_RANGE: i64 = 100_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithmeticIndicator {
    Prime,
    /// Positive integers whose prime factors are all at most `y`.
    Smooth(u64),
    Unit,
}

/// Indicator values on `lo..=hi`.
#[derive(Clone, Debug)]
pub struct IndicatorTable {
    pub lo: i64,
    pub values: Vec<bool>,
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

impl IndicatorTable {
    pub fn build(f: ArithmeticIndicator, lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize;
        let values = match f {
            ArithmeticIndicator::Unit => vec![true; len],
            ArithmeticIndicator::Prime => {
                let mut v: Vec<bool> = (lo..=hi).map(|m| m >= 2).collect();
                let root = (hi.max(0) as f64).sqrt() as u64 + 1;
                for p in small_primes(root) {
                    let p = p as i64;
                    let start = (p * p).max((lo + p - 1).div_euclid(p) * p);
                    let mut x = start;
                    while x <= hi {
                        v[(x - lo) as usize] = false;
                        x += p;
                    }
                }
                v
            }
            ArithmeticIndicator::Smooth(y) => {
                let mut rest: Vec<u64> = (lo..=hi).map(|m| m.max(0) as u64).collect();
                for p in small_primes(y.min(hi.max(1) as u64)) {
                    let mut pk = p as i64;
                    while pk <= hi {
                        let mut x = (lo.max(1) + pk - 1).div_euclid(pk) * pk;
                        while x <= hi {
                            rest[(x - lo) as usize] /= p;
                            x += pk;
                        }
                        pk = match pk.checked_mul(p as i64) {
                            Some(v) => v,
                            None => break,
                        };
                    }
                }
                rest.iter().map(|&r| r == 1).collect()
            }
        };
        IndicatorTable { lo, values }
    }

    pub fn get(&self, m: i64) -> bool {
        self.values[(m - self.lo) as usize]
    }
}

/// `Σ_{M₀ < m ≤ M} f(m) e(tm)`.
pub fn genfunc_sum_v(f: ArithmeticIndicator, t: Phase, m0: i64, m: i64) -> Result<Complex64> {
    if m0 > m {
        return Err(Error::pre(format!("empty range needs M0 <= M, got ({m0}, {m})")));
    }
    if m > MAX_RANGE || m0 < -MAX_RANGE {
        return Err(Error::pre(format!("range ({m0}, {m}] exceeds |m| <= 10^8")));
    }
    let mut acc = ComplexAccumulator::default();
    let mut lo = m0 + 1;
    while lo <= m {
        let hi = (lo + BLOCK - 1).min(m);
        let table = IndicatorTable::build(f, lo, hi);
        let mut phase = t.wrapping_mul_int(lo);
        for &hit in &table.values {
            if hit {
                acc.add(e(phase));
            }
            phase = phase.wrapping_add(t);
        }
        lo = hi + 1;
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(f: ArithmeticIndicator, m0: i64, m: i64) -> f64 {
        genfunc_sum_v(f, Phase::ZERO, m0, m).unwrap().re
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(ArithmeticIndicator::Prime, 0, 10), 4.0);
        // 1, 2, 3, 4, 5, 6, 8, 9, 10
        assert_eq!(count(ArithmeticIndicator::Smooth(5), 0, 10), 9.0);
        assert_eq!(count(ArithmeticIndicator::Unit, -3, 17), 20.0);
    }

    #[test]
    fn sieve_matches_trial_division_across_blocks() {
        let lo = 60_000;
        let hi = 140_000;
        let primes = IndicatorTable::build(ArithmeticIndicator::Prime, lo, hi);
        let smooth = IndicatorTable::build(ArithmeticIndicator::Smooth(13), lo, hi);
        for m in lo..=hi {
            let f = crate::characters::factorize(m as u64);
            assert_eq!(primes.get(m), f == [(m as u64, 1)], "m = {m}");
            assert_eq!(smooth.get(m), f.iter().all(|&(p, _)| p <= 13), "m = {m}");
        }
        assert_eq!(
            count(ArithmeticIndicator::Prime, 0, 200_000),
            17_984.0 // π(200000)
        );
    }

    #[test]
    fn prime_exponential_sum_at_half() {
        // e(m/2) = -1 for odd m, +1 for m = 2
        let v = genfunc_sum_v(ArithmeticIndicator::Prime, Phase::from_ratio(1, 2), 0, 10).unwrap();
        assert!((v.re - (1.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn range_limits() {
        assert!(genfunc_sum_v(ArithmeticIndicator::Unit, Phase::ZERO, 3, 2).is_err());
        assert!(genfunc_sum_v(ArithmeticIndicator::Unit, Phase::ZERO, 0, 200_000_000).is_err());
    }
}
