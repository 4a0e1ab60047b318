use std::cmp::Ordering;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::expsum::{e, expsum_u_phase, expsum_u_rational};
use super::smoothing::{build_psi_delta, SmoothedIndicator};
use super::ComplexAccumulator;
use crate::beatty::{BeattyParams, MembershipTest};
use crate::characters::{CharTable, ExactCharSum};
use crate::error::{Error, Result};
use crate::exact::{LinearOrbit, QuadraticReal, Threshold};

/// `S_k(α, β, χ; N) = Σ_{n ≤ N} χ(⌊αn + β⌋)`, exactly.
pub fn charsum_s_exact(params: &BeattyParams, chi: &CharTable, n: u64) -> ExactCharSum {
    let mut sum = ExactCharSum::new(chi.order());
    for i in 1..=n as i64 {
        if let Some(ex) = chi.exponent(params.term(i)) {
            sum.add_exponent(ex);
        }
    }
    sum
}

pub fn charsum_s(params: &BeattyParams, chi: &CharTable, n: u64) -> Complex64 {
    charsum_s_exact(params, chi, n).to_complex()
}

/// `Σ_{M₀ < m ≤ M} χ(m) ψ(γm + δ)`, membership decided exactly.
pub fn charsum_via_membership_exact(
    params: &BeattyParams,
    chi: &CharTable,
    n: u64,
) -> Result<ExactCharSum> {
    let test = MembershipTest::new(params)?;
    let mut sum = ExactCharSum::new(chi.order());
    for m in params.lower_index() + 1..=params.upper_index(n) {
        if let Some(ex) = chi.exponent(m) {
            if test.indicator(m) {
                sum.add_exponent(ex);
            }
        }
    }
    Ok(sum)
}

pub fn charsum_via_membership(params: &BeattyParams, chi: &CharTable, n: u64) -> Result<Complex64> {
    Ok(charsum_via_membership_exact(params, chi, n)?.to_complex())
}

/// Exact test of `{γm + δ} ∈ [0, Δ) ∪ (γ - Δ, γ + Δ) ∪ (1 - Δ, 1)`.
struct BoundaryZone {
    low: Threshold,
    mid_lo: Threshold,
    mid_hi: Threshold,
    high: Threshold,
}

impl BoundaryZone {
    fn new(gamma: &QuadraticReal, delta: f64) -> Result<Self> {
        let d = QuadraticReal::from_f64(delta)?;
        Ok(BoundaryZone {
            low: Threshold::new(d.clone())?,
            mid_lo: Threshold::new(gamma.checked_sub(&d)?)?,
            mid_hi: Threshold::new(gamma.checked_add(&d)?)?,
            high: Threshold::new(QuadraticReal::one().checked_sub(&d)?)?,
        })
    }

    fn contains(&self, orbit: &LinearOrbit, m: i64) -> Result<bool> {
        Ok(orbit.cmp_frac(m, &self.low)? == Ordering::Less
            || orbit.cmp_frac(m, &self.high)? == Ordering::Greater
            || (orbit.cmp_frac(m, &self.mid_lo)? == Ordering::Greater
                && orbit.cmp_frac(m, &self.mid_hi)? == Ordering::Less))
    }
}

/// `V(I, M₀, M)`: the number of `M₀ < m ≤ M` with `{γm + δ} ∈ I`.
pub fn boundary_count_v(params: &BeattyParams, n: u64, delta: f64) -> Result<u64> {
    let test = MembershipTest::new(params)?;
    let zone = BoundaryZone::new(&params.gamma(), delta)?;
    let mut count = 0;
    for m in params.lower_index() + 1..=params.upper_index(n) {
        if zone.contains(test.orbit()?, m)? {
            count += 1;
        }
    }
    Ok(count)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Substitution {
    /// Phases `γj` used as they are.
    ExactGamma,
    /// `γj` replaced by `rj/k` with `r = ⌊γk⌋`.
    RationalR,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxReport {
    pub k: u64,
    pub n: u64,
    pub m0: i64,
    pub m: i64,
    pub delta: f64,
    pub truncation: usize,
    pub substitution: Substitution,
    pub r: Option<i64>,
    /// `S_k(α, β, χ; N)` from the Beatty terms.
    pub direct: Complex64,
    /// `Σ χ(m) ψ_Δ(γm + δ)` from the closed form.
    pub smoothed: Complex64,
    /// The same sum from the truncated Fourier expansion.
    pub fourier: Complex64,
    /// `|direct - smoothed|`.
    pub direct_minus_smoothed: f64,
    pub boundary_count: u64,
    /// Bound on `|fourier - smoothed|` from truncating at `J`.
    pub truncation_bound: f64,
    /// Bound on the extra error from the rational substitution (0 when the
    /// exact phases are used).
    pub substitution_bound: f64,
    /// Accumulated fixed-point phase error, `(M - M₀)·2π·2^-190` per frequency.
    pub phase_error_bound: f64,
    pub fitted_coefficient_constant: f64,
}

impl ApproxReport {
    /// `|S - Σ χ ψ_Δ| ≤ V(I, M₀, M)` (with a 1e-9 allowance for the
    /// floating-point part of the boundary terms).
    pub fn sandwich_holds(&self) -> bool {
        self.direct_minus_smoothed <= self.boundary_count as f64 + 1e-9
    }

    pub fn fourier_gap(&self) -> f64 {
        (self.fourier - self.smoothed).norm()
    }
}

/// Evaluates the smoothed decomposition of `S_k(α, β, χ; N)` for `α > 1`.
pub fn smoothed_charsum(
    params: &BeattyParams,
    chi: &CharTable,
    n: u64,
    delta: f64,
    truncation: usize,
    substitution: Substitution,
) -> Result<ApproxReport> {
    let test = MembershipTest::new(params)?;
    let gamma = params.gamma();
    let delta_q = params.delta()?;
    let gamma_phase = gamma
        .to_fixed192()
        .ok_or_else(|| Error::invalid("gamma out of range"))?
        .frac();
    let psi = build_psi_delta(gamma_phase, delta, truncation)?;
    let zone = BoundaryZone::new(&gamma, delta)?;
    let orbit = test.orbit()?;
    let (m0, m) = (params.lower_index(), params.upper_index(n));

    let direct = charsum_s_exact(params, chi, n);
    let mut plateau = ExactCharSum::new(chi.order());
    let mut boundary = ComplexAccumulator::default();
    let mut boundary_count = 0u64;
    for x in m0 + 1..=m {
        let inside = zone.contains(orbit, x)?;
        if inside {
            boundary_count += 1;
        }
        let Some(ex) = chi.exponent(x) else { continue };
        if inside {
            let v = psi.closed_form_frac(orbit.frac_f64(x));
            boundary.add(chi.root(ex) * v);
        } else if test.indicator(x) {
            plateau.add_exponent(ex);
        }
    }
    let smoothed = plateau.to_complex() + boundary.value();
    // S minus the plateau terms leaves exactly the members inside the zone
    let direct_minus_smoothed = (direct.minus(&plateau).to_complex() - boundary.value()).norm();

    let k = chi.modulus();
    let delta_phase = delta_q
        .to_fixed192()
        .ok_or_else(|| Error::invalid("delta out of range"))?
        .frac();
    let r = match substitution {
        Substitution::ExactGamma => None,
        Substitution::RationalR => Some(
            gamma
                .mul_int(k)
                .floor()
                .to_i64()
                .ok_or_else(|| Error::invalid("gamma*k out of range"))?,
        ),
    };
    let fourier = fourier_side(chi, &psi, gamma_phase, delta_phase, r, m0, m)?;

    let len = (m - m0) as f64;
    let substitution_bound = match r {
        None => 0.0,
        Some(_) => {
            let reach = (m0 + 1).unsigned_abs().max(m.unsigned_abs());
            let n_eff = len.max(reach.div_ceil(2) as f64);
            psi.g
                .iter()
                .zip(&psi.h)
                .enumerate()
                .map(|(i, (g, h))| {
                    (g.norm() + h.norm()) * 4.0 * std::f64::consts::PI * n_eff * n_eff
                        * (i + 1) as f64
                        / k as f64
                })
                .sum()
        }
    };
    Ok(ApproxReport {
        k,
        n,
        m0,
        m,
        delta,
        truncation,
        substitution,
        r,
        direct: direct.to_complex(),
        smoothed,
        fourier,
        direct_minus_smoothed,
        boundary_count,
        truncation_bound: len * psi.truncation_bound(),
        substitution_bound,
        phase_error_bound: len * std::f64::consts::TAU * (-190f64).exp2(),
        fitted_coefficient_constant: psi.fitted_constant(),
    })
}

/// `γ U(0) + Σ_{j ≤ J} [g_j e(δj) U(γj) + h_j e(-δj) U(-γj)]`.
fn fourier_side(
    chi: &CharTable,
    psi: &SmoothedIndicator,
    gamma_phase: crate::exact::Phase,
    delta_phase: crate::exact::Phase,
    r: Option<i64>,
    m0: i64,
    m: i64,
) -> Result<Complex64> {
    let k = chi.modulus();
    let u = |j: i64| -> Result<Complex64> {
        match r {
            None => expsum_u_phase(chi, gamma_phase.wrapping_mul_int(j), m0, m),
            Some(r) => expsum_u_rational(chi, r * j, k, m0, m),
        }
    };
    let mut acc = ComplexAccumulator::default();
    acc.add(u(0)? * psi.gamma);
    for (i, (g, h)) in psi.g.iter().zip(&psi.h).enumerate() {
        let j = (i + 1) as i64;
        let shift = e(delta_phase.wrapping_mul_int(j));
        acc.add(g * shift * u(j)?);
        acc.add(h * shift.conj() * u(-j)?);
    }
    Ok(acc.value())
}
