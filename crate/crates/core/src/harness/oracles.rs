//! Slow reference implementations used to cross-check the fast paths.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::QuadraticReal;

/// Terms `⌊αn + β⌋ ≤ m_max` keyed by value, with their index `n`.
#[derive(Clone, Debug, Default)]
pub struct MembershipTable {
    pub m_max: i64,
    pub members: BTreeMap<i64, i64>,
}

impl MembershipTable {
    pub fn index_of(&self, m: i64) -> Option<i64> {
        self.members.get(&m).copied()
    }
}

/// `⌊αn + β⌋` from wide fixed-point values, widening until the bracket is
/// decided (exactly, when both values share a field).
struct BracketingTerms<'a> {
    alpha: &'a QuadraticReal,
    beta: &'a QuadraticReal,
    bits: u32,
    a: BigInt,
    b: BigInt,
}

impl<'a> BracketingTerms<'a> {
    fn new(alpha: &'a QuadraticReal, beta: &'a QuadraticReal) -> Self {
        let bits = 256;
        BracketingTerms {
            alpha,
            beta,
            bits,
            a: alpha.to_fixed(bits).significand,
            b: beta.to_fixed(bits).significand,
        }
    }

    fn term(&self, n: i64) -> i64 {
        let (mut bits, mut a, mut b) = (self.bits, self.a.clone(), self.b.clone());
        loop {
            let v = &a * n + &b;
            // each significand is within half a unit
            let err = BigInt::from(n.unsigned_abs() / 2 + 1);
            let lo: BigInt = (&v - &err) >> bits as usize;
            let hi: BigInt = (&v + &err) >> bits as usize;
            if lo == hi {
                return lo.to_i64().expect("term fits in 64 bits");
            }
            if let Ok(x) = self.alpha.mul_int(n).checked_add(self.beta) {
                return x.floor().to_i64().expect("term fits in 64 bits");
            }
            bits *= 2;
            a = self.alpha.to_fixed(bits).significand;
            b = self.beta.to_fixed(bits).significand;
        }
    }
}

/// Scans `n = 1, 2, …` until the terms pass `m_max`.
pub fn brute_force_membership(
    alpha: &QuadraticReal,
    beta: &QuadraticReal,
    m_max: i64,
) -> Result<MembershipTable> {
    if alpha.cmp_exact(&QuadraticReal::one())? != std::cmp::Ordering::Greater {
        return Err(Error::pre(format!("membership needs alpha > 1, got {alpha}")));
    }
    let terms = BracketingTerms::new(alpha, beta);
    let mut members = BTreeMap::new();
    let mut n = 1;
    loop {
        let t = terms.term(n);
        if t > m_max {
            break;
        }
        members.insert(t, n);
        n += 1;
    }
    Ok(MembershipTable { m_max, members })
}

/// Largest `|count/M - |I||` over every interval whose endpoints are sample
/// points, 0 or 1, each endpoint either included or excluded. O(M²) intervals.
pub fn brute_force_discrepancy(points: &[f64]) -> Result<f64> {
    let m = points.len();
    if m == 0 {
        return Err(Error::pre("discrepancy of an empty point set"));
    }
    if m > 500 {
        return Err(Error::pre(format!("brute-force discrepancy limited to M <= 500, got {m}")));
    }
    if let Some(&x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::PointOutOfRange(x));
    }
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut ends = xs.clone();
    ends.push(0.0);
    ends.push(1.0);
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    // number of points < t and <= t
    let below = |t: f64| xs.partition_point(|&x| x < t);
    let upto = |t: f64| xs.partition_point(|&x| x <= t);
    let mf = m as f64;
    let mut best: f64 = 0.0;
    for (i, &u) in ends.iter().enumerate() {
        for &v in &ends[i..] {
            let len = v - u;
            for count in [
                upto(v) - below(u),                    // [u, v]
                below(v).saturating_sub(below(u)),     // [u, v)
                upto(v).saturating_sub(upto(u)),       // (u, v]
                below(v).saturating_sub(upto(u)),      // (u, v)
            ] {
                best = best.max((count as f64 / mf - len).abs());
            }
        }
    }
    Ok(best)
}

/// Jacobi symbol `(m | k)` for odd positive `k`.
pub fn jacobi_symbol(m: i64, k: i64) -> Result<i8> {
    if k <= 0 || k % 2 == 0 {
        return Err(Error::EvenModulus(k));
    }
    let mut a = m.rem_euclid(k);
    let mut n = k;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let t = brute_force_membership(&QuadraticReal::sqrt(2), &QuadraticReal::zero(), 7).unwrap();
        assert_eq!(t.members.keys().copied().collect::<Vec<_>>(), vec![1, 2, 4, 5, 7]);
        assert_eq!(t.index_of(4), Some(3));
        let empty = brute_force_membership(&QuadraticReal::sqrt(2), &QuadraticReal::zero(), 0).unwrap();
        assert!(empty.members.is_empty());
        assert!(brute_force_membership(&QuadraticReal::rational(1, 2).unwrap(), &QuadraticReal::zero(), 5)
            .is_err());
    }

    #[test]
    fn rational_terms_land_on_integers() {
        // 3n/2 + 1/2 is an integer for odd n
        let t = brute_force_membership(
            &QuadraticReal::rational(3, 2).unwrap(),
            &QuadraticReal::rational(1, 2).unwrap(),
            10,
        )
        .unwrap();
        assert_eq!(t.members.keys().copied().collect::<Vec<_>>(), vec![2, 3, 5, 6, 8, 9]);
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(brute_force_discrepancy(&[0.5]).unwrap(), 1.0);
        assert_eq!(brute_force_discrepancy(&[0.25, 0.75]).unwrap(), 0.5);
        let m = 40;
        let grid: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        assert!((brute_force_discrepancy(&grid).unwrap() - 1.0 / m as f64).abs() < 1e-12);
        assert!(brute_force_discrepancy(&vec![0.1; 501]).is_err());
        assert!(brute_force_discrepancy(&[1.0]).is_err());
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi_symbol(2, 15).unwrap(), 1);
        assert_eq!(jacobi_symbol(3, 9).unwrap(), 0);
        assert_eq!(jacobi_symbol(12345, 1).unwrap(), 1);
        assert_eq!(jacobi_symbol(-1, 7).unwrap(), -1);
        assert_eq!(jacobi_symbol(2, 7).unwrap(), 1);
        assert!(matches!(jacobi_symbol(3, 10), Err(Error::EvenModulus(10))));
        assert!(jacobi_symbol(3, -3).is_err());
    }

    #[test]
    fn jacobi_matches_euler_criterion_for_primes() {
        for p in [3i64, 5, 7, 11, 13, 101] {
            for m in -30i64..30 {
                let r = m.rem_euclid(p);
                let e = crate::characters::pow_mod(r as u64, (p as u64 - 1) / 2, p as u64);
                let want = match e {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(jacobi_symbol(m, p).unwrap(), want, "({m} | {p})");
            }
        }
    }
}
