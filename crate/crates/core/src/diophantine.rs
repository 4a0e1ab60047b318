//! Continued fractions of quadratic irrationals, empirical irrationality type,
//! and the extreme discrepancy of one-dimensional point sets.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{floor_surd, LinearOrbit, Phase, QuadraticReal};

#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    pub p: Vec<BigInt>,
    pub q: Vec<BigInt>,
    /// `(pre-period, period)` of the quotient sequence, when a repeated
    /// surd state was seen.
    pub period: Option<(usize, usize)>,
    /// True when the expansion ended (rational input).
    pub terminated: bool,
    source: Option<QuadraticReal>,
}

impl ContinuedFraction {
    pub fn from_partial_quotients(quotients: Vec<BigInt>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::invalid("no partial quotients"));
        }
        if quotients[1..].iter().any(|a| !a.is_positive()) {
            return Err(Error::invalid("partial quotients after a0 must be positive"));
        }
        Ok(Self::build(quotients, None, false, None))
    }

    fn build(
        quotients: Vec<BigInt>,
        period: Option<(usize, usize)>,
        terminated: bool,
        source: Option<QuadraticReal>,
    ) -> Self {
        let mut p = Vec::with_capacity(quotients.len());
        let mut q = Vec::with_capacity(quotients.len());
        let (mut p1, mut p2) = (BigInt::one(), BigInt::zero());
        let (mut q1, mut q2) = (BigInt::zero(), BigInt::one());
        for a in &quotients {
            let pn = a * &p1 + &p2;
            let qn = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, pn.clone());
            q2 = std::mem::replace(&mut q1, qn.clone());
            p.push(pn);
            q.push(qn);
        }
        ContinuedFraction {
            quotients,
            p,
            q,
            period,
            terminated,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn source(&self) -> Option<&QuadraticReal> {
        self.source.as_ref()
    }

    /// `p_i q_{i-1} - p_{i-1} q_i = (-1)^(i-1)` at every level.
    pub fn determinant_holds(&self) -> bool {
        (1..self.len()).all(|i| {
            let det = &self.p[i] * &self.q[i - 1] - &self.p[i - 1] * &self.q[i];
            let expected = if i % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            det == expected
        })
    }

    /// `|α q_i - p_i| < 1/q_{i+1}` at every level with a successor, decided
    /// exactly. Needs the expanded value.
    pub fn best_approximation_holds(&self) -> Result<bool> {
        let alpha = self
            .source
            .as_ref()
            .ok_or_else(|| Error::pre("best-approximation check needs the expanded value"))?;
        for i in 0..self.len().saturating_sub(1) {
            let err = alpha
                .mul_int(self.q[i].clone())
                .checked_sub(&QuadraticReal::from_int(self.p[i].clone()))?;
            let scaled = err.mul_int(self.q[i + 1].clone());
            let abs = if scaled.is_negative() { -scaled } else { scaled };
            if abs.cmp_exact(&QuadraticReal::one())? != std::cmp::Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Expands `x` to at most `levels` partial quotients.
///
/// Irrationals go through the surd recurrence on `(P + √D)/Q`; rationals
/// through Euclid's algorithm and stop early.
pub fn cfrac_expand(x: &QuadraticReal, levels: usize) -> ContinuedFraction {
    if x.is_rational() {
        return expand_rational(x, levels);
    }
    // (p + q√d)/r = (P + √D)/Q with D = q²d r², Q | D - P²
    let (p, q, r) = (x.p(), x.q(), x.r());
    let big_d = q * q * BigInt::from(x.radicand()) * r * r;
    let (mut pp, mut qq) = if q.is_positive() {
        (p * r, r * r)
    } else {
        (-(p * r), -(r * r))
    };
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut quotients = Vec::with_capacity(levels);
    let mut period = None;
    for i in 0..levels {
        if period.is_none() {
            if let Some(&j) = seen.get(&(pp.clone(), qq.clone())) {
                period = Some((j, i - j));
            } else {
                seen.insert((pp.clone(), qq.clone()), i);
            }
        }
        let a = if qq.is_positive() {
            floor_surd(&pp, 1, &big_d, &qq)
        } else {
            floor_surd(&-&pp, -1, &big_d, &-&qq)
        };
        let next_p = &a * &qq - &pp;
        let next_q = (&big_d - &next_p * &next_p) / &qq;
        quotients.push(a);
        pp = next_p;
        qq = next_q;
    }
    ContinuedFraction::build(quotients, period, false, Some(x.clone()))
}

fn expand_rational(x: &QuadraticReal, levels: usize) -> ContinuedFraction {
    let (mut num, mut den) = (x.p().clone(), x.r().clone());
    let mut quotients = Vec::new();
    let mut terminated = false;
    while quotients.len() < levels {
        let (a, rem) = num.div_mod_floor(&den);
        quotients.push(a);
        if rem.is_zero() {
            terminated = true;
            break;
        }
        num = std::mem::replace(&mut den, rem);
    }
    ContinuedFraction::build(quotients, None, terminated, Some(x.clone()))
}

/// Natural logarithm of a positive integer of any size.
fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift as usize;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeLevel {
    pub i: usize,
    pub q: f64,
    /// `‖α q_i‖`, when the expanded value is known.
    pub norm: Option<f64>,
    /// `log q_{i+1} / log q_i`.
    pub growth: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeEstimate {
    pub tau_est: f64,
    pub levels: Vec<TypeLevel>,
    /// First level entering the maximum.
    pub from_level: usize,
    pub method: &'static str,
}

/// Lower-bound proxy for the type `τ`: the largest `log q_{i+1}/log q_i` over
/// the last quarter of the available levels (never before level 5 unless the
/// expansion is that short).
pub fn estimate_type(cf: &ContinuedFraction) -> Result<TypeEstimate> {
    let len = cf.len();
    if len < 5 {
        return Err(Error::TooFewLevels { need: 5, have: len });
    }
    let tail = (3 * (len - 1)).div_ceil(4);
    let from_level = 5.max(tail).min(len - 2);
    let mut levels = Vec::with_capacity(len);
    let mut tau_est = f64::NEG_INFINITY;
    for i in 0..len {
        let norm = match cf.source() {
            Some(alpha) => Some(
                alpha
                    .mul_int(cf.q[i].clone())
                    .checked_sub(&QuadraticReal::from_int(cf.p[i].clone()))?
                    .to_f64()
                    .abs(),
            ),
            None => None,
        };
        let growth = (i + 1 < len && cf.q[i] > BigInt::one())
            .then(|| ln_big(&cf.q[i + 1]) / ln_big(&cf.q[i]));
        if i >= from_level {
            if let Some(g) = growth {
                tau_est = tau_est.max(g);
            }
        }
        levels.push(TypeLevel {
            i,
            q: cf.q[i].to_f64().unwrap_or(f64::INFINITY),
            norm,
            growth,
        });
    }
    if !tau_est.is_finite() {
        return Err(Error::TooFewLevels { need: 5, have: len });
    }
    Ok(TypeEstimate {
        tau_est,
        levels,
        from_level,
        method: "max log q(i+1)/log q(i), last quarter of levels",
    })
}

/// A point of `[0, 1)` held at 192 bits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FracPoint(pub Phase);

impl FracPoint {
    pub fn to_f64(self) -> f64 {
        self.0.turns()
    }
}

/// `{αm + β}` for `m = 1..=M`, in index order.
pub fn beatty_frac_points(
    alpha: &QuadraticReal,
    beta: &QuadraticReal,
    m: usize,
) -> Result<Vec<FracPoint>> {
    let orbit = LinearOrbit::new(alpha.clone(), beta.clone())?;
    Ok((1..=m as i64)
        .map(|i| FracPoint(orbit.frac_phase_exact(i)))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub m: usize,
    pub d: f64,
    pub witness_lo: f64,
    pub witness_hi: f64,
    /// Closed witnesses hold too many points, open ones too few.
    pub witness_closed: bool,
}

/// Extreme discrepancy of points in `[0, 1)`.
pub fn discrepancy(points: &[f64]) -> Result<DiscrepancyReport> {
    if points.is_empty() {
        return Err(Error::pre("discrepancy of an empty point set"));
    }
    if let Some(&x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::PointOutOfRange(x));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_discrepancy(&sorted))
}

/// Same as [`discrepancy`], with the points ordered by their exact 192-bit
/// values before rounding.
pub fn frac_points_discrepancy(points: &[FracPoint]) -> Result<DiscrepancyReport> {
    if points.is_empty() {
        return Err(Error::pre("discrepancy of an empty point set"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    let xs: Vec<f64> = sorted.into_iter().map(FracPoint::to_f64).collect();
    Ok(sorted_discrepancy(&xs))
}

fn sorted_discrepancy(xs: &[f64]) -> DiscrepancyReport {
    let m = xs.len();
    let mf = m as f64;
    let (mut hi_i, mut lo_i) = (0, 0);
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let a = (i + 1) as f64 / mf - x;
        if a > hi {
            hi = a;
            hi_i = i;
        }
        if a < lo {
            lo = a;
            lo_i = i;
        }
    }
    // i ≥ j: [x_j, x_i] has an excess; i < j: (x_i, x_j) has a deficit
    let (witness_lo, witness_hi, witness_closed) = if hi_i >= lo_i {
        (xs[lo_i], xs[hi_i], true)
    } else {
        (xs[hi_i], xs[lo_i], false)
    };
    DiscrepancyReport {
        m,
        d: 1.0 / mf + hi - lo,
        witness_lo,
        witness_hi,
        witness_closed,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftRow {
    pub m: usize,
    pub d_ab: f64,
    pub d_a0: f64,
    pub ratio: f64,
    /// `M^(1/τ_est) · D_{α,β}(M)`.
    pub scaled: f64,
    /// `D_{α,β} > 2 D_{α,0} + 1e-9`.
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub tau_est: f64,
    pub rows: Vec<ShiftRow>,
}

impl ShiftReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| !r.violation)
    }
}

pub fn check_discrepancy_lemmas(
    alpha: &QuadraticReal,
    beta: &QuadraticReal,
    m_grid: &[usize],
) -> Result<ShiftReport> {
    if alpha.is_rational() {
        return Err(Error::pre(format!("alpha must be irrational, got {alpha}")));
    }
    let tau_est = estimate_type(&cfrac_expand(alpha, 30))?.tau_est;
    let zero = QuadraticReal::zero();
    let mut rows = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let d_ab = frac_points_discrepancy(&beatty_frac_points(alpha, beta, m)?)?.d;
        let d_a0 = frac_points_discrepancy(&beatty_frac_points(alpha, &zero, m)?)?.d;
        rows.push(ShiftRow {
            m,
            d_ab,
            d_a0,
            ratio: d_ab / d_a0,
            scaled: (m as f64).powf(1.0 / tau_est) * d_ab,
            violation: d_ab > 2.0 * d_a0 + 1e-9,
        });
    }
    Ok(ShiftReport { tau_est, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn sqrt2_expansion() {
        let cf = cfrac_expand(&QuadraticReal::sqrt(2), 6);
        assert_eq!(cf.quotients, ints(&[1, 2, 2, 2, 2, 2]));
        assert_eq!(cf.p[..4], ints(&[1, 3, 7, 17])[..]);
        assert_eq!(cf.q[..4], ints(&[1, 2, 5, 12])[..]);
        assert_eq!(cf.period, Some((1, 1)));
        assert!(cf.determinant_holds());
        assert!(cf.best_approximation_holds().unwrap());
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let cf = cfrac_expand(&QuadraticReal::golden(), 20);
        assert!(cf.quotients.iter().all(|a| a.is_one()));
        let mut fib = vec![1i64, 1];
        while fib.len() < 20 {
            let n = fib.len();
            fib.push(fib[n - 1] + fib[n - 2]);
        }
        assert_eq!(cf.q, ints(&fib));
    }

    #[test]
    fn negative_radical_and_rational_offset() {
        // (3 - √7)/2 = 0.177…, 1/x = 3 + √7 = [5; 1, 1, 1, 4, …]
        let x = QuadraticReal::new(3, -1, 7, 2).unwrap();
        let cf = cfrac_expand(&x, 8);
        assert_eq!(cf.quotients, ints(&[0, 5, 1, 1, 1, 4, 1, 1]));
        assert!(cf.determinant_holds());
        assert!(cf.best_approximation_holds().unwrap());
        let neg = cfrac_expand(&-QuadraticReal::sqrt(3), 4);
        assert_eq!(neg.quotients, ints(&[-2, 3, 1, 2]));
    }

    #[test]
    fn rational_terminates() {
        let cf = cfrac_expand(&QuadraticReal::rational(7, 3).unwrap(), 10);
        assert_eq!(cf.quotients, ints(&[2, 3]));
        assert!(cf.terminated);
        assert_eq!((cf.p[1].clone(), cf.q[1].clone()), (BigInt::from(7), BigInt::from(3)));
        let neg = cfrac_expand(&QuadraticReal::rational(-7, 3).unwrap(), 10);
        assert_eq!(neg.quotients, ints(&[-3, 1, 2]));
    }

    #[test]
    fn type_of_quadratic_irrationals() {
        for x in [QuadraticReal::sqrt(2), QuadraticReal::golden()] {
            let t = estimate_type(&cfrac_expand(&x, 30)).unwrap();
            assert!((t.tau_est - 1.0).abs() < 0.05, "{x}: {}", t.tau_est);
        }
        assert!(matches!(
            estimate_type(&cfrac_expand(&QuadraticReal::rational(7, 3).unwrap(), 10)),
            Err(Error::TooFewLevels { .. })
        ));
    }

    #[test]
    fn liouville_like_has_type_at_least_two() {
        // a_{i+1} = q_i
        let mut quotients = vec![BigInt::zero(), BigInt::one()];
        for _ in 0..10 {
            let cf = ContinuedFraction::from_partial_quotients(quotients.clone()).unwrap();
            quotients.push(cf.q.last().unwrap().clone());
        }
        let cf = ContinuedFraction::from_partial_quotients(quotients).unwrap();
        assert!(cf.determinant_holds());
        assert!(estimate_type(&cf).unwrap().tau_est >= 2.0);
    }

    #[test]
    fn frac_points_examples() {
        let pts = beatty_frac_points(&QuadraticReal::sqrt(2), &QuadraticReal::zero(), 3).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.to_f64()).collect();
        for (x, want) in xs.iter().zip([0.41421356, 0.82842712, 0.24264069]) {
            assert!((x - want).abs() < 1e-8);
        }
        let half = beatty_frac_points(
            &QuadraticReal::rational(1, 2).unwrap(),
            &QuadraticReal::zero(),
            4,
        )
        .unwrap();
        let xs: Vec<f64> = half.iter().map(|p| p.to_f64()).collect();
        assert_eq!(xs, vec![0.5, 0.0, 0.5, 0.0]);
        // thirds are not exact at 192 bits but still land on 0 exactly
        let third = beatty_frac_points(
            &QuadraticReal::rational(1, 3).unwrap(),
            &QuadraticReal::rational(2, 3).unwrap(),
            6,
        )
        .unwrap();
        assert!(third[0].0.is_zero() && third[3].0.is_zero());
    }

    #[test]
    fn beta_shift_is_rotation() {
        let a = QuadraticReal::sqrt(2);
        let third = QuadraticReal::rational(1, 3).unwrap();
        let p0 = beatty_frac_points(&a, &QuadraticReal::zero(), 50).unwrap();
        let p1 = beatty_frac_points(&a, &third, 50).unwrap();
        for (x, y) in p0.iter().zip(&p1) {
            let shifted = (x.to_f64() + 1.0 / 3.0).fract();
            assert!((shifted - y.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(discrepancy(&[0.5]).unwrap().d, 1.0);
        assert_eq!(discrepancy(&[0.25, 0.75]).unwrap().d, 0.5);
        let r = discrepancy(&[0.41421356237, 0.82842712475, 0.24264068712]).unwrap();
        assert!((r.d - 0.4951).abs() < 1e-4);
        assert!(r.d >= 1.0 / 3.0);
        assert!(matches!(discrepancy(&[0.2, 1.0]), Err(Error::PointOutOfRange(_))));
        assert!(discrepancy(&[-0.1]).is_err());
    }

    #[test]
    fn witness_realizes_the_value() {
        let xs = [0.1, 0.15, 0.2, 0.9];
        let r = discrepancy(&xs).unwrap();
        let inside = xs
            .iter()
            .filter(|&&x| {
                if r.witness_closed {
                    r.witness_lo <= x && x <= r.witness_hi
                } else {
                    r.witness_lo < x && x < r.witness_hi
                }
            })
            .count();
        let dev = (inside as f64 / 4.0 - (r.witness_hi - r.witness_lo)).abs();
        assert!((dev - r.d).abs() < 1e-12);
    }

    #[test]
    fn shifted_rows_against_unshifted() {
        let rep = check_discrepancy_lemmas(
            &QuadraticReal::sqrt(2),
            &QuadraticReal::rational(1, 3).unwrap(),
            &[1000, 10_000],
        )
        .unwrap();
        assert!(rep.all_hold());
        assert!(rep.rows.iter().all(|r| r.ratio <= 2.0));
        let same = check_discrepancy_lemmas(&QuadraticReal::sqrt(2), &QuadraticReal::zero(), &[500])
            .unwrap();
        assert_eq!(same.rows[0].ratio, 1.0);
        assert!(check_discrepancy_lemmas(
            &QuadraticReal::rational(1, 2).unwrap(),
            &QuadraticReal::zero(),
            &[10]
        )
        .is_err());
    }

    #[test]
    fn golden_discrepancy_is_logarithmic() {
        let rep = check_discrepancy_lemmas(
            &QuadraticReal::golden(),
            &QuadraticReal::zero(),
            &[1000, 10_000, 100_000],
        )
        .unwrap();
        for r in &rep.rows {
            let v = r.m as f64 * r.d_a0 / (r.m as f64).ln();
            assert!(v < 1.0, "M = {}: {v}", r.m);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]

            #[test]
            fn convergent_identities(
                p in -100i64..100,
                q in prop::sample::select(vec![-3i64, -1, 1, 2, 5]),
                d in prop::sample::select(vec![2u64, 3, 5, 6, 7, 13, 19, 31]),
                r in 1i64..30,
                levels in 2usize..25,
            ) {
                let x = QuadraticReal::new(p, q, d, r).unwrap();
                let cf = cfrac_expand(&x, levels);
                prop_assert_eq!(cf.len(), levels);
                prop_assert!(cf.determinant_holds());
                prop_assert!(cf.best_approximation_holds().unwrap());
            }

            #[test]
            fn discrepancy_bounds(mut pts in prop::collection::vec(0.0f64..1.0, 1..300), seed in any::<u64>()) {
                let m = pts.len() as f64;
                let d = discrepancy(&pts).unwrap().d;
                prop_assert!(d >= 1.0 / m - 1e-12 && d <= 1.0 + 1e-12);
                // order of the sample does not matter
                let k = (seed as usize) % pts.len();
                pts.rotate_left(k);
                pts.reverse();
                prop_assert_eq!(discrepancy(&pts).unwrap().d, d);
            }
        }

        #[test]
        fn discrepancy_decays_along_decades() {
            for alpha in [QuadraticReal::sqrt(2), QuadraticReal::sqrt(3), QuadraticReal::golden()] {
                let d: Vec<f64> = [100, 1_000, 10_000, 100_000]
                    .iter()
                    .map(|&m| {
                        let pts = beatty_frac_points(&alpha, &QuadraticReal::zero(), m).unwrap();
                        frac_points_discrepancy(&pts).unwrap().d
                    })
                    .collect();
                assert!(d.windows(2).all(|w| w[1] < w[0]), "{alpha}: {d:?}");
            }
        }
    }
}
