use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use beatty_core::beatty::{BeattyParams, MembershipTest};
use beatty_core::characters::{build_group, burgess_length, DirichletCharacter};
use beatty_core::diophantine::{
    beatty_frac_points, cfrac_expand, check_discrepancy_lemmas, estimate_type,
    frac_points_discrepancy,
};
use beatty_core::exact::QuadraticReal;
use beatty_core::harness::{
    parse_real, real_character, run_experiment, run_verify_suite, ExperimentConfig, OutputFormat,
};
use beatty_core::sums::{
    build_psi_delta, charsum_s, expsum_u, expsum_u_rational, smoothed_charsum, Substitution,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "beatty", version, about = "Character sums over Beatty sequences")]
struct Cli {
    /// Write the JSON result here instead of stdout; for `experiment run`,
    /// the path of the result file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// S_k(α, β, χ; N), optionally with the smoothed decomposition.
    Charsum {
        #[arg(long, default_value = "sqrt:2")]
        alpha: String,
        #[arg(long, default_value = "0")]
        beta: String,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value = "quadratic")]
        chi: String,
        /// Defaults to ⌈B_ε(k)⌉.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Smoothing half-width; enables the smoothed report.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 100)]
        fourier_j: usize,
        /// Replace γj by rj/k with r = ⌊γk⌋ on the Fourier side.
        #[arg(long)]
        rational: bool,
    },
    /// U_k(t, χ; M₀, M) for t = a/k or a quadratic real t.
    Expsum {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value = "quadratic")]
        chi: String,
        #[arg(long, conflicts_with = "t")]
        a: Option<i64>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long, default_value_t = 0)]
        m0: i64,
        #[arg(long)]
        m: i64,
    },
    /// Is m = ⌊αn + β⌋ for some n ≥ 1?
    Membership {
        #[arg(long, default_value = "sqrt:2")]
        alpha: String,
        #[arg(long, default_value = "0")]
        beta: String,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        m: Vec<i64>,
    },
    /// Extreme discrepancy of {αm + β}, m ≤ M, or the comparison table over a grid.
    Discrepancy {
        #[arg(long, default_value = "sqrt:2")]
        alpha: String,
        #[arg(long, default_value = "0")]
        beta: String,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        m: Vec<usize>,
    },
    /// Continued fraction and type estimate.
    Cfrac {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 30)]
        levels: usize,
    },
    /// ψ_Δ at the given points, closed form and truncated series.
    Psi {
        /// γ, the length of the indicator's support.
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        fourier_j: usize,
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
    },
    /// Experiment runs from a JSON config.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Runs the oracle and identity suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    Run {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        format: Option<Format>,
    },
}

fn real(s: &str) -> Result<QuadraticReal> {
    Ok(parse_real(s)?)
}

fn character(k: u64, spec: &str) -> Result<DirichletCharacter> {
    let group = build_group(k)?;
    if spec == "quadratic" {
        return real_character(&group)
            .with_context(|| format!("no quadratic character is defined for even k = {k}"));
    }
    let Some(i) = spec.strip_prefix("index:") else {
        bail!("--chi must be `quadratic` or `index:<i>`, got {spec:?}");
    };
    Ok(DirichletCharacter::from_index(group, i.parse().context("character index")?)?)
}

fn complex(z: beatty_core::num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im, "abs": z.norm() })
}

fn run(command: Command, out: &mut Option<PathBuf>) -> Result<Value> {
    Ok(match command {
        Command::Charsum { alpha, beta, k, chi, n, eps, delta, fourier_j, rational } => {
            let n = match n {
                Some(n) => n,
                None => burgess_length(k, eps)?,
            };
            let params = BeattyParams::new(real(&alpha)?, real(&beta)?)?;
            let chi = character(k, &chi)?;
            let table = chi.table();
            let s = charsum_s(&params, &table, n);
            let mut out = json!({
                "k": k, "chi": chi.to_string(), "alpha": alpha, "beta": beta, "N": n,
                "S": complex(s), "abs_S_over_N": s.norm() / n as f64,
            });
            if let Some(delta) = delta {
                let sub = if rational { Substitution::RationalR } else { Substitution::ExactGamma };
                let report = smoothed_charsum(&params, &table, n, delta, fourier_j, sub)?;
                out["smoothed"] = serde_json::to_value(&report)?;
                out["sandwich_holds"] = json!(report.sandwich_holds());
            }
            out
        }
        Command::Expsum { k, chi, a, t, m0, m } => {
            let chi = character(k, &chi)?;
            let table = chi.table();
            let u = match (a, t) {
                (Some(a), _) => expsum_u_rational(&table, a, k, m0, m)?,
                (None, Some(t)) => expsum_u(&table, &real(&t)?.to_fixed(192), m0, m)?,
                (None, None) => bail!("give --a or --t"),
            };
            json!({ "k": k, "chi": chi.to_string(), "M0": m0, "M": m, "U": complex(u) })
        }
        Command::Membership { alpha, beta, m } => {
            let params = BeattyParams::new(real(&alpha)?, real(&beta)?)?;
            let test = MembershipTest::new(&params)?;
            let rows: Vec<Value> = m
                .iter()
                .map(|&m| json!({ "m": m, "member": test.index_of(m).is_some(), "n": test.index_of(m) }))
                .collect();
            Value::Array(rows)
        }
        Command::Discrepancy { alpha, beta, m } => {
            let (a, b) = (real(&alpha)?, real(&beta)?);
            match m.as_slice() {
                [] => bail!("give --m"),
                [single] => serde_json::to_value(frac_points_discrepancy(&beatty_frac_points(&a, &b, *single)?)?)?,
                grid => serde_json::to_value(check_discrepancy_lemmas(&a, &b, grid)?)?,
            }
        }
        Command::Cfrac { alpha, levels } => {
            let x = real(&alpha)?;
            let cf = cfrac_expand(&x, levels);
            let strs = |v: &[beatty_core::num_bigint::BigInt]| -> Vec<String> {
                v.iter().map(ToString::to_string).collect()
            };
            let tau = estimate_type(&cf).ok();
            json!({
                "x": x.to_string(),
                "quotients": strs(&cf.quotients),
                "p": strs(&cf.p),
                "q": strs(&cf.q),
                "period": cf.period,
                "terminated": cf.terminated,
                "determinant_holds": cf.determinant_holds(),
                "tau_est": tau.map(|t| t.tau_est),
            })
        }
        Command::Psi { gamma, delta, fourier_j, x } => {
            let g = real(&gamma)?;
            let phase = g.to_fixed192().context("gamma out of range")?.frac();
            let s = build_psi_delta(phase, delta, fourier_j)?;
            let rows: Vec<Value> = x
                .iter()
                .map(|&x| json!({ "x": x, "closed_form": s.closed_form(x), "truncated": s.truncated(x) }))
                .collect();
            json!({
                "gamma": s.gamma, "delta": delta, "J": fourier_j,
                "truncation_bound": s.truncation_bound(),
                "coefficient_constant": s.fitted_constant(),
                "values": rows,
            })
        }
        Command::Experiment { action: ExperimentAction::Run { config, threads, seed, format } } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(t) = threads {
                c.threads = t;
            }
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(f) = format {
                c.format = match f {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                };
            }
            if let Some(o) = out.take() {
                c.output_path = o;
            }
            c.validate()?;
            let out = run_experiment(&c)?;
            json!({
                "rows": out.rows.len(),
                "output": c.output_path,
                "report": out.report,
            })
        }
        Command::Verify { seed } => {
            let checks = run_verify_suite(seed);
            for c in &checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} verification checks failed");
            }
            serde_json::to_value(checks)?
        }
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut out = cli.out;
    let value = run(cli.command, &mut out)?;
    let text = serde_json::to_string_pretty(&value)? + "\n";
    match out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
