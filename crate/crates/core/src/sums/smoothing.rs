//! The periodic indicator ψ of `(0, γ]` and its smoothing ψ_Δ, realized as
//! the convolution of ψ with the triangle kernel of half-width Δ.
//!
//! With that kernel, ψ_Δ has a closed form: it follows the kernel's CDF on
//! `|x| < Δ` (rising edge), one minus the CDF on `|x - γ| < Δ` (falling edge),
//! and equals ψ everywhere else. Its Fourier coefficients are those of ψ
//! multiplied by `sinc²(πjΔ)`:
//!
//! ```text
//! g_j = (1 - e(-jγ)) / (2πij) · sinc²(πjΔ),   h_j = conj(g_j).
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Phase;

#[derive(Clone, Copy, Debug)]
pub struct PiecewiseIndicator {
    pub gamma: f64,
}

impl PiecewiseIndicator {
    /// 1 on `(0, γ]`, 0 on `(γ, 1]`, period one.
    pub fn eval(&self, x: f64) -> f64 {
        let f = x - x.floor();
        if f > 0.0 && f <= self.gamma {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothedIndicator {
    pub gamma: f64,
    pub delta: f64,
    pub truncation: usize,
    /// `g[j-1]` is the coefficient of `e(jx)`.
    pub g: Vec<Complex64>,
    /// `h[j-1]` is the coefficient of `e(-jx)`.
    pub h: Vec<Complex64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EvalMode {
    ClosedForm,
    TruncatedFourier,
}

/// CDF of the unit-mass triangle kernel of half-width Δ, for `|u| ≤ Δ`.
#[inline]
fn triangle_cdf(u: f64, delta: f64) -> f64 {
    if u <= -delta {
        0.0
    } else if u <= 0.0 {
        let s = (u + delta) / delta;
        0.5 * s * s
    } else if u < delta {
        let s = (delta - u) / delta;
        1.0 - 0.5 * s * s
    } else {
        1.0
    }
}

impl SmoothedIndicator {
    pub fn constant_term(&self) -> f64 {
        self.gamma
    }

    /// Closed-form value at `x` (any real, reduced mod 1).
    pub fn closed_form(&self, x: f64) -> f64 {
        let f = x - x.floor();
        self.closed_form_frac(f)
    }

    /// Closed-form value at a fractional part `f ∈ [0, 1)`.
    pub fn closed_form_frac(&self, f: f64) -> f64 {
        let (g, d) = (self.gamma, self.delta);
        let v = if f < d {
            triangle_cdf(f, d)
        } else if f > 1.0 - d {
            triangle_cdf(f - 1.0, d)
        } else if f > g - d && f < g + d {
            1.0 - triangle_cdf(f - g, d)
        } else if f <= g {
            1.0
        } else {
            0.0
        };
        v.clamp(0.0, 1.0)
    }

    /// `γ + Σ_{j ≤ J} (g_j e(jx) + h_j e(-jx))`.
    pub fn truncated(&self, x: f64) -> f64 {
        let f = x - x.floor();
        let step = Complex64::from_polar(1.0, 2.0 * PI * f);
        let mut w = step;
        let mut acc = self.gamma;
        for (j, (g, h)) in self.g.iter().zip(&self.h).enumerate() {
            if j % 64 == 63 {
                // resynchronize the rotation to keep the error flat in j
                w = Complex64::from_polar(1.0, 2.0 * PI * (f * (j + 1) as f64).fract());
            }
            acc += (g * w + h * w.conj()).re;
            w *= step;
        }
        acc
    }

    /// Sup-norm bound on `ψ_Δ - truncated` from `|g_j| ≤ 1/(π j² Δ)`.
    pub fn truncation_bound(&self) -> f64 {
        2.0 / (PI * self.truncation as f64 * self.delta)
    }

    /// Smallest `C` with `max(|g_j|, |h_j|) ≤ C·min(1/j, 1/(j²Δ))` over the
    /// stored coefficients.
    pub fn fitted_constant(&self) -> f64 {
        self.g
            .iter()
            .zip(&self.h)
            .enumerate()
            .map(|(i, (g, h))| {
                let j = (i + 1) as f64;
                let envelope = (1.0 / j).min(1.0 / (j * j * self.delta));
                g.norm().max(h.norm()) / envelope
            })
            .fold(0.0, f64::max)
    }
}

/// Builds ψ_Δ for `0 < Δ < 1/8`, `Δ ≤ min(γ, 1 - γ)/2`, with `J ≥ 1`
/// Fourier coefficients. `gamma_phase` is γ on the 192-bit grid and is used
/// for the phases `e(-jγ)`.
pub fn build_psi_delta(gamma_phase: Phase, delta: f64, truncation: usize) -> Result<SmoothedIndicator> {
    let gamma = gamma_phase.turns();
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(delta > 0.0 && delta < 0.125) {
        return Err(Error::invalid(format!("delta must lie in (0, 1/8), got {delta}")));
    }
    if delta > 0.5 * gamma.min(1.0 - gamma) {
        return Err(Error::invalid(format!(
            "delta = {delta} exceeds min(gamma, 1 - gamma)/2 for gamma = {gamma}"
        )));
    }
    if truncation == 0 {
        return Err(Error::invalid("truncation level must be at least 1"));
    }
    let mut g = Vec::with_capacity(truncation);
    let mut h = Vec::with_capacity(truncation);
    let neg_gamma = gamma_phase.wrapping_neg();
    for j in 1..=truncation {
        let jf = j as f64;
        let rot = super::expsum::e(neg_gamma.wrapping_mul_int(j as i64));
        let indicator = (Complex64::new(1.0, 0.0) - rot) / Complex64::new(0.0, 2.0 * PI * jf);
        let arg = PI * jf * delta;
        let sinc = arg.sin() / arg;
        let c = indicator * (sinc * sinc);
        g.push(c);
        h.push(c.conj());
    }
    Ok(SmoothedIndicator {
        gamma,
        delta,
        truncation,
        g,
        h,
    })
}

pub fn psi_delta_eval(s: &SmoothedIndicator, x: f64, mode: EvalMode) -> f64 {
    match mode {
        EvalMode::ClosedForm => s.closed_form(x),
        EvalMode::TruncatedFourier => s.truncated(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QuadraticReal;

    fn gamma_sqrt2() -> Phase {
        QuadraticReal::sqrt(2)
            .inverse()
            .unwrap()
            .to_fixed192()
            .unwrap()
            .frac()
    }

    /// ψ_Δ by direct numerical convolution (midpoint rule on the kernel).
    fn convolve(gamma: f64, delta: f64, x: f64) -> f64 {
        let steps = 20_000;
        let psi = PiecewiseIndicator { gamma };
        let w = 2.0 * delta / steps as f64;
        (0..steps)
            .map(|i| {
                let u = -delta + (i as f64 + 0.5) * w;
                let kernel = (delta - u.abs()) / (delta * delta);
                psi.eval(x - u) * kernel * w
            })
            .sum()
    }

    #[test]
    fn closed_form_matches_numerical_convolution() {
        let s = build_psi_delta(gamma_sqrt2(), 0.05, 1).unwrap();
        for i in 0..200 {
            let x = i as f64 / 200.0 + 0.0013;
            assert!((s.closed_form(x) - convolve(s.gamma, 0.05, x)).abs() < 1e-3, "x = {x}");
        }
    }

    #[test]
    fn examples() {
        let s = build_psi_delta(gamma_sqrt2(), 0.01, 10).unwrap();
        assert_eq!(s.closed_form(s.gamma / 2.0), 1.0);
        assert_eq!(s.constant_term(), s.gamma);
        assert_eq!(s.closed_form(0.0), 0.5);
        let v = s.closed_form(s.gamma + 0.005);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(s.closed_form(s.gamma + 0.01), 0.0);
        assert_eq!(s.closed_form(0.01), 1.0);
    }

    #[test]
    fn constraint_violations() {
        let g = gamma_sqrt2();
        assert!(build_psi_delta(g, 0.0, 5).is_err());
        assert!(build_psi_delta(g, 0.13, 5).is_err());
        assert!(build_psi_delta(g, 0.01, 0).is_err());
        // 1 - γ ≈ 0.293, so Δ = 0.15 > 0.146 is rejected
        let g_small = Phase::from_ratio(9, 10);
        assert!(build_psi_delta(g_small, 0.06, 5).is_err());
    }

    #[test]
    fn truncated_series_converges() {
        let s = build_psi_delta(gamma_sqrt2(), 0.05, 2000).unwrap();
        for i in 0..100 {
            let x = i as f64 / 100.0 + 0.003;
            let d = (s.truncated(x) - s.closed_form(x)).abs();
            assert!(d <= s.truncation_bound(), "x = {x}: {d}");
        }
    }

    #[test]
    fn coefficient_envelope() {
        for delta in [0.1f64, 0.01] {
            let s = build_psi_delta(gamma_sqrt2(), delta.min(0.1), 1000).unwrap();
            assert!(s.fitted_constant() <= 2.0);
        }
    }
}
