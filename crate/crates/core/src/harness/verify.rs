//! A quick oracle and identity suite for the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracles::{brute_force_discrepancy, brute_force_membership, jacobi_symbol};
use crate::beatty::{split_long_range, split_small_alpha, BeattyParams, MembershipTest};
use crate::characters::{build_group, enumerate_characters, quadratic_character};
use crate::diophantine::{cfrac_expand, discrepancy, estimate_type};
use crate::error::Result;
use crate::exact::{Phase, QuadraticReal};
use crate::sums::{
    build_psi_delta, charsum_s_exact, charsum_via_membership_exact, expsum_u_phase,
    smoothed_charsum, PiecewiseIndicator, Substitution,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match run() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn alphas() -> Vec<QuadraticReal> {
    vec![QuadraticReal::sqrt(2), QuadraticReal::sqrt(3), QuadraticReal::golden()]
}

fn betas() -> Result<Vec<QuadraticReal>> {
    Ok(vec![
        QuadraticReal::zero(),
        QuadraticReal::rational(1, 3)?,
        QuadraticReal::new(0, 1, 2, 2)?,
    ])
}

pub fn run_verify_suite(seed: u64) -> Vec<Check> {
    vec![
        check("membership", || {
            let mut bad = 0;
            for a in alphas() {
                for b in betas()? {
                    let params = BeattyParams::new(a.clone(), b.clone())?;
                    let test = MembershipTest::new(&params)?;
                    let table = brute_force_membership(&a, &b, 10_000)?;
                    bad += (-2..=10_000).filter(|&m| test.index_of(m) != table.index_of(m)).count();
                }
            }
            Ok((bad == 0, format!("{bad} disagreements for m <= 10^4")))
        }),
        check("characteristic-function identity", || {
            let mut bad = 0;
            let mut count = 0;
            for k in [7u64, 12, 25, 101] {
                let g = build_group(k)?;
                for chi in enumerate_characters(&g).iter().take(6) {
                    let t = chi.table();
                    for a in alphas() {
                        for b in [QuadraticReal::zero(), QuadraticReal::rational(1, 3)?] {
                            let p = BeattyParams::new(a.clone(), b)?;
                            let lhs = charsum_s_exact(&p, &t, 500);
                            let rhs = charsum_via_membership_exact(&p, &t, 500)?;
                            bad += usize::from(!lhs.value_eq(&rhs));
                            count += 1;
                        }
                    }
                }
            }
            Ok((bad == 0, format!("{count} instances, {bad} mismatches")))
        }),
        check("range splits", || {
            let chi = quadratic_character(101)?.table();
            let mut bad = 0;
            for small in [QuadraticReal::sqrt(2).inverse()?, QuadraticReal::new(-1, 1, 5, 2)?] {
                let p = BeattyParams::new(small, QuadraticReal::rational(1, 7)?)?;
                let split = split_small_alpha(&p, 300)?;
                let mut parts = crate::characters::ExactCharSum::new(chi.order());
                for part in &split.parts {
                    parts.merge(&charsum_s_exact(&part.params, &chi, part.count));
                }
                bad += usize::from(!parts.value_eq(&charsum_s_exact(&p, &chi, 300)));
            }
            let p = BeattyParams::new(QuadraticReal::sqrt(2), QuadraticReal::zero())?;
            let split = split_long_range(&p, 300, 101)?;
            let mut parts = crate::characters::ExactCharSum::new(chi.order());
            for part in &split.parts {
                parts.merge(&charsum_s_exact(&part.params, &chi, part.count));
            }
            bad += usize::from(!parts.value_eq(&charsum_s_exact(&p, &chi, 300)));
            Ok((bad == 0, format!("{bad} mismatches")))
        }),
        check("smoothed indicator", || {
            let gamma = QuadraticReal::sqrt(2).inverse()?;
            let phase = gamma.to_fixed192().expect("gamma < 1").frac();
            let s = build_psi_delta(phase, 0.01, 1_000)?;
            let psi = PiecewiseIndicator { gamma: s.gamma };
            let mut worst_plateau: f64 = 0.0;
            let mut worst_trunc: f64 = 0.0;
            for i in 0..2_000 {
                let x = (i as f64 + 0.5) / 2_000.0;
                let v = s.closed_form(x);
                let on_plateau = (x >= 0.01 && x <= s.gamma - 0.01) || (x >= s.gamma + 0.01 && x <= 0.99);
                if on_plateau {
                    worst_plateau = worst_plateau.max((v - psi.eval(x)).abs());
                }
                worst_trunc = worst_trunc.max((v - s.truncated(x)).abs());
            }
            let ok = worst_plateau == 0.0 && worst_trunc <= s.truncation_bound() && s.fitted_constant() <= 2.0;
            Ok((
                ok,
                format!(
                    "plateau error {worst_plateau}, truncation error {worst_trunc:.3e} (bound {:.3e}), C = {:.3}",
                    s.truncation_bound(),
                    s.fitted_constant()
                ),
            ))
        }),
        check("sandwich", || {
            let chi = quadratic_character(1009)?.table();
            let mut bad = 0;
            for b in betas()? {
                let p = BeattyParams::new(QuadraticReal::sqrt(2), b)?;
                if p.alpha().common_radicand(p.beta()).is_err() {
                    continue;
                }
                let r = smoothed_charsum(&p, &chi, 2_000, 0.01, 200, Substitution::ExactGamma)?;
                bad += usize::from(!r.sandwich_holds());
            }
            Ok((bad == 0, format!("{bad} violations")))
        }),
        check("Gauss sums", || {
            let mut worst: f64 = 0.0;
            for p in [7u64, 11, 101, 1009] {
                let chi = quadratic_character(p)?.table();
                let u = expsum_u_phase(&chi, Phase::from_ratio(1, p), 0, p as i64)?;
                worst = worst.max((u.norm() - (p as f64).sqrt()).abs());
            }
            Ok((worst < 1e-6, format!("max | |U| - sqrt p | = {worst:.2e}")))
        }),
        check("Jacobi character", || {
            let chi = quadratic_character(1009)?;
            let bad = (0..1009i64)
                .filter(|&m| {
                    let want = jacobi_symbol(m, 1009).expect("odd modulus") as f64;
                    (chi.eval(m).to_complex().re - want).abs() > 1e-12
                })
                .count();
            Ok((bad == 0, format!("{bad} mismatches mod 1009")))
        }),
        check("discrepancy oracle", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let m = rng.gen_range(1..=200);
                let pts: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
                worst = worst.max((discrepancy(&pts)?.d - brute_force_discrepancy(&pts)?).abs());
            }
            Ok((worst <= 1e-12, format!("max gap {worst:.2e} over 20 sets")))
        }),
        check("irrationality type", || {
            let mut taus = Vec::new();
            for a in [QuadraticReal::sqrt(2), QuadraticReal::golden()] {
                taus.push(estimate_type(&cfrac_expand(&a, 30))?.tau_est);
            }
            let ok = taus.iter().all(|t| (0.95..=1.1).contains(t));
            Ok((ok, format!("tau_est = {taus:?}")))
        }),
    ]
}
