//! Beatty sequences `⌊αn + β⌋`, exact membership, and the two index-range
//! decompositions (slope below one, long ranges).

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::{LinearOrbit, QuadraticReal, Threshold};

#[derive(Clone, Debug)]
pub struct BeattyParams {
    alpha: QuadraticReal,
    beta: QuadraticReal,
    orbit: LinearOrbit,
}

impl BeattyParams {
    pub fn new(alpha: QuadraticReal, beta: QuadraticReal) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        let orbit = LinearOrbit::new(alpha.clone(), beta.clone())?;
        Ok(BeattyParams { alpha, beta, orbit })
    }

    pub fn alpha(&self) -> &QuadraticReal {
        &self.alpha
    }

    pub fn beta(&self) -> &QuadraticReal {
        &self.beta
    }

    /// `γ = 1/α`.
    pub fn gamma(&self) -> QuadraticReal {
        self.alpha.inverse().expect("alpha is positive")
    }

    /// `δ = (1 - β)/α`.
    pub fn delta(&self) -> Result<QuadraticReal> {
        self.gamma()
            .checked_mul(&QuadraticReal::one().checked_sub(&self.beta)?)
    }

    /// `⌈1/α⌉`.
    pub fn ceil_gamma(&self) -> i64 {
        self.gamma().ceil().to_i64().expect("1/alpha fits in 64 bits")
    }

    pub fn alpha_exceeds_one(&self) -> bool {
        matches!(self.alpha.cmp_exact(&QuadraticReal::one()), Ok(Ordering::Greater))
    }

    #[inline]
    pub fn term(&self, n: i64) -> i64 {
        self.orbit.floor(n)
    }

    /// `M₀ = ⌊α + β - 1⌋`.
    pub fn lower_index(&self) -> i64 {
        self.term(1) - 1
    }

    /// `M = ⌊αN + β⌋`.
    pub fn upper_index(&self, n: u64) -> i64 {
        self.term(n as i64)
    }

    /// The parameters of the shifted sum `Σ_{n ≤ N} χ(⌊α(n + shift) + β⌋)`,
    /// i.e. `(α, β + α·shift)`.
    pub fn shifted(&self, shift: i64) -> Result<Self> {
        Self::new(
            self.alpha.clone(),
            self.alpha.mul_int(shift).checked_add(&self.beta)?,
        )
    }

    /// Sub-sequence `n = stride·i + offset`: parameters `(stride·α, β + α·offset)`.
    pub fn subsequence(&self, stride: u64, offset: i64) -> Result<Self> {
        Self::new(
            self.alpha.mul_int(stride),
            self.alpha.mul_int(offset).checked_add(&self.beta)?,
        )
    }
}

pub fn beatty_term(params: &BeattyParams, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::pre("Beatty terms are indexed from n = 1"));
    }
    Ok(params.term(n as i64))
}

/// Decides `m ∈ {⌊αn + β⌋ : n ≥ 1}` for `α > 1` through the criterion
/// `0 < {(m - β + 1)/α} ≤ 1/α`; the index is `⌊(m - β + 1)/α⌋`.
///
/// When `α` and `β` lie in different quadratic fields the criterion's offset
/// leaves every single quadratic field, and membership is decided instead by
/// locating the first term `≥ m` with exact floors.
#[derive(Clone, Debug)]
pub struct MembershipTest {
    mode: Mode,
}

#[derive(Clone, Debug)]
enum Mode {
    Orbit { orbit: LinearOrbit, gamma: Threshold },
    Search { params: BeattyParams, slope: f64, shift: f64 },
}

impl MembershipTest {
    pub fn new(params: &BeattyParams) -> Result<Self> {
        if !params.alpha_exceeds_one() {
            return Err(Error::pre(format!(
                "membership needs alpha > 1, got {}",
                params.alpha
            )));
        }
        let mode = if params.alpha.common_radicand(&params.beta).is_ok() {
            let gamma = params.gamma();
            Mode::Orbit {
                orbit: LinearOrbit::new(gamma.clone(), params.delta()?)?,
                gamma: Threshold::new(gamma)?,
            }
        } else {
            Mode::Search {
                params: params.clone(),
                slope: params.alpha.to_f64(),
                shift: params.beta.to_f64(),
            }
        };
        Ok(MembershipTest { mode })
    }

    /// `{γm + δ}`, the argument of the periodic indicator; unavailable for
    /// mixed fields.
    pub fn orbit(&self) -> Result<&LinearOrbit> {
        match &self.mode {
            Mode::Orbit { orbit, .. } => Ok(orbit),
            Mode::Search { params, .. } => Err(Error::MixedRadicands(
                params.alpha.radicand(),
                params.beta.radicand(),
            )),
        }
    }

    pub fn gamma(&self) -> Option<&Threshold> {
        match &self.mode {
            Mode::Orbit { gamma, .. } => Some(gamma),
            Mode::Search { .. } => None,
        }
    }

    /// True when `0 < {γm + δ} ≤ γ`, i.e. `m` is a term for some integer `n`.
    #[inline]
    pub fn indicator(&self, m: i64) -> bool {
        match &self.mode {
            Mode::Orbit { orbit, gamma } => {
                let above = orbit.cmp_frac(m, gamma).expect("single-field orbit")
                    == Ordering::Greater;
                !above && !orbit.frac_is_zero(m).expect("single-field orbit")
            }
            Mode::Search { params, .. } => params.term(self.first_at_least(m)) == m,
        }
    }

    /// Smallest integer `n` with `⌊αn + β⌋ ≥ m`.
    fn first_at_least(&self, m: i64) -> i64 {
        let Mode::Search { params, slope, shift } = &self.mode else {
            unreachable!("search mode only")
        };
        let mut n = ((m as f64 - shift) / slope).ceil() as i64;
        while params.term(n) < m {
            n += 1;
        }
        while params.term(n - 1) >= m {
            n -= 1;
        }
        n
    }

    pub fn index_of(&self, m: i64) -> Option<i64> {
        if !self.indicator(m) {
            return None;
        }
        let n = match &self.mode {
            Mode::Orbit { orbit, .. } => orbit.floor(m),
            Mode::Search { .. } => self.first_at_least(m),
        };
        (n >= 1).then_some(n)
    }
}

pub fn is_member(params: &BeattyParams, m: i64) -> Result<Option<i64>> {
    Ok(MembershipTest::new(params)?.index_of(m))
}

/// Indices `n = stride·i + offset` for `i = 1..=count`, summed with the
/// parameters `(stride·α, β + α·offset)`.
#[derive(Clone, Debug)]
pub struct SubRange {
    pub params: BeattyParams,
    pub count: u64,
    pub stride: u64,
    pub offset: i64,
}

impl SubRange {
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (1..=self.count as i64).map(move |i| self.stride as i64 * i + self.offset)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RangeSplit {
    pub parts: Vec<SubRange>,
}

impl RangeSplit {
    pub fn total(&self) -> u64 {
        self.parts.iter().map(|p| p.count).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.parts.iter().flat_map(SubRange::indices)
    }
}

/// For `α < 1` and `a = ⌈1/α⌉`, writes `n = a·m + j` (`0 ≤ j < a`, `m ≥ 0`,
/// `n ≥ 1`) so each part has slope `aα > 1`.
pub fn split_small_alpha(params: &BeattyParams, n: u64) -> Result<RangeSplit> {
    if params.alpha.cmp_exact(&QuadraticReal::one())? != Ordering::Less {
        return Err(Error::pre(format!(
            "split_small_alpha needs alpha < 1, got {}",
            params.alpha
        )));
    }
    let a = params.ceil_gamma();
    let mut parts = Vec::new();
    for j in 0..a {
        // m starts at 1 for j = 0 (n = 0 excluded) and at 0 otherwise
        let (offset, count) = if j == 0 {
            (0, n / a as u64)
        } else if (j as u64) <= n {
            (j - a, (n - j as u64) / a as u64 + 1)
        } else {
            (j - a, 0)
        };
        if count > 0 {
            parts.push(SubRange {
                params: params.subsequence(a as u64, offset)?,
                count,
                stride: a as u64,
                offset,
            });
        }
    }
    Ok(RangeSplit { parts })
}

/// `⌊k^(9/20)⌋`, computed exactly.
pub fn block_length(k: u64) -> u64 {
    let target = BigInt::from(k).pow(9);
    let mut x = (k as f64).powf(0.45).floor() as u64;
    while BigInt::from(x + 1).pow(20) <= target {
        x += 1;
    }
    while x > 0 && BigInt::from(x).pow(20) > target {
        x -= 1;
    }
    x
}

/// `t = ⌊N/N₀⌋` blocks of length `N₀ = ⌊k^(9/20)⌋` with shifted offsets
/// `β + α·j·N₀`, plus the tail `tN₀ < n ≤ N`.
pub fn split_long_range(params: &BeattyParams, n: u64, k: u64) -> Result<RangeSplit> {
    if k < 2 {
        return Err(Error::ModulusTooSmall(k));
    }
    let block = block_length(k);
    if n < block {
        return Err(Error::pre(format!(
            "range length {n} shorter than the block length {block} for k = {k}"
        )));
    }
    let t = n / block;
    let mut parts = Vec::with_capacity(t as usize + 1);
    for j in 0..=t {
        let offset = (j * block) as i64;
        let count = if j < t { block } else { n - t * block };
        if count > 0 {
            parts.push(SubRange {
                params: params.shifted(offset)?,
                count,
                stride: 1,
                offset,
            });
        }
    }
    Ok(RangeSplit { parts })
}
