use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CharacterPolicy, ExperimentConfig, ExperimentKind, NPolicy, OutputFormat};
use crate::beatty::BeattyParams;
use crate::characters::{
    build_group, burgess_length, CharTable, DirichletCharacter, GroupStructure, ModulusClass,
};
use crate::error::{Error, Result};
use crate::sums::{charsum_s, expsum_u_rational, smoothed_charsum, Substitution};

/// One computed quantity. Column order is fixed by the field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k: u64,
    pub class: ModulusClass,
    pub chi_id: String,
    pub beta: String,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "abs_S_over_N")]
    pub abs_s_over_n: Option<f64>,
    #[serde(rename = "abs_U_over_N")]
    pub abs_u_over_n: Option<f64>,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub residual_std: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; needs 4 points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::invalid("fit inputs differ in length"));
    }
    if n < 4 {
        return Err(Error::pre(format!("a fit needs at least 4 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::pre("all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        points: n,
        residual_std: (sse / (nf - 2.0)).sqrt(),
        r_squared: if syy == 0.0 { 1.0 } else { 1.0 - sse / syy },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerModulus {
    pub k: u64,
    pub n: u64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecadeMean {
    /// Moduli in `[10^decade, 10^(decade+1))`.
    pub decade: u32,
    pub mean: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendCheck {
    /// Each decade mean is at most 1.1 times the previous one.
    pub non_increasing_within_slack: bool,
    /// `1 - last/first`.
    pub first_to_last_drop: f64,
    pub drop_at_least_20_percent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFitReport {
    pub experiment: ExperimentKind,
    pub grid: String,
    pub per_modulus: Vec<PerModulus>,
    pub fit: Option<LinearFit>,
    pub fit_refused: Option<String>,
    /// `-slope` of `log max|S|/N` against `log k`.
    pub rho_est: Option<f64>,
    /// `-slope` of `log max|U|/N` against `log N`.
    pub eta_est: Option<f64>,
    pub decade_means: Vec<DecadeMean>,
    pub trend: Option<TrendCheck>,
    pub sandwich_checked: usize,
    pub sandwich_violations: usize,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub report: DecayFitReport,
}

/// Runs `f` over `items` on `threads` workers. Workers pull indices from a
/// shared counter and send `(index, result)` to the collecting thread, so the
/// output order never depends on scheduling.
pub fn run_pool<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut out: Vec<(usize, R)> = std::thread::scope(|s| {
        for _ in 0..threads.max(1).min(items.len().max(1)) {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, f(&items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        rx.iter().collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

/// The real character `Π (m | p)` over the distinct odd primes of odd `k`,
/// non-principal whenever `k > 1`.
pub fn real_character(group: &Arc<GroupStructure>) -> Option<DirichletCharacter> {
    if group.modulus().is_multiple_of(2) || group.modulus() < 3 {
        return None;
    }
    let exps = group.components().iter().map(|c| c.order / 2).collect();
    DirichletCharacter::from_exponents(group.clone(), exps).ok()
}

fn mix_seed(seed: u64, k: u64, salt: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt.rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Non-principal characters chosen by `policy`, in a deterministic order.
pub fn select_characters(
    group: &Arc<GroupStructure>,
    policy: CharacterPolicy,
    seed: u64,
) -> Result<Vec<DirichletCharacter>> {
    let k = group.modulus();
    let phi = group.phi();
    let chars = match policy {
        CharacterPolicy::All => (1..phi)
            .map(|i| DirichletCharacter::from_index(group.clone(), i))
            .collect::<Result<Vec<_>>>()?,
        CharacterPolicy::Quadratic => real_character(group).into_iter().collect(),
        CharacterPolicy::Random(s) => {
            let mut chosen: Vec<DirichletCharacter> = real_character(group).into_iter().collect();
            let skip = chosen.first().map(|c| c.index());
            let pool: Vec<u64> = (1..phi).filter(|&i| Some(i) != skip).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, k, 0));
            let mut picks: Vec<u64> = sample(&mut rng, pool.len(), s.min(pool.len()))
                .into_iter()
                .map(|j| pool[j])
                .collect();
            picks.sort_unstable();
            for i in picks {
                chosen.push(DirichletCharacter::from_index(group.clone(), i)?);
            }
            chosen
        }
    };
    if chars.is_empty() {
        return Err(Error::invalid(format!(
            "character selection {policy:?} leaves only the principal character mod {k}"
        )));
    }
    Ok(chars)
}

struct Job {
    k: u64,
    n: u64,
    chi: DirichletCharacter,
    table: Arc<CharTable>,
}

fn prepare_jobs(config: &ExperimentConfig) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for k in config.moduli_grid()? {
        let n = match config.n_policy {
            NPolicy::Burgess => burgess_length(k, config.eps)?,
            NPolicy::Explicit(n) => n,
        };
        let group = build_group(k)?;
        for chi in select_characters(&group, config.character_policy, config.seed)? {
            // one table per character, shared read-only by the workers
            let table = Arc::new(chi.table());
            jobs.push(Job { k, n, chi, table });
        }
    }
    Ok(jobs)
}

fn grid_description(config: &ExperimentConfig, ks: &[u64]) -> String {
    format!(
        "{} moduli in [{}, {}], eps = {}, alpha = {}, {} beta values, characters = {:?}, N = {:?}",
        ks.len(),
        ks.first().copied().unwrap_or(0),
        ks.last().copied().unwrap_or(0),
        config.eps,
        config.alpha,
        config.beta_grid.len(),
        config.character_policy,
        config.n_policy,
    )
}

fn decade_means(per: &[PerModulus]) -> Vec<DecadeMean> {
    let mut by: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for p in per {
        let d = (p.k as f64).log10().floor() as u32;
        let e = by.entry(d).or_default();
        e.0 += p.max_ratio;
        e.1 += 1;
    }
    by.into_iter()
        .map(|(decade, (sum, count))| DecadeMean {
            decade,
            mean: sum / count as f64,
            count,
        })
        .collect()
}

fn trend(means: &[DecadeMean]) -> Option<TrendCheck> {
    if means.len() < 2 {
        return None;
    }
    let first = means[0].mean;
    let last = means[means.len() - 1].mean;
    let drop = 1.0 - last / first;
    Some(TrendCheck {
        non_increasing_within_slack: means.windows(2).all(|w| w[1].mean <= 1.1 * w[0].mean),
        first_to_last_drop: drop,
        drop_at_least_20_percent: drop >= 0.2,
    })
}

fn per_modulus_max(rows: &[ResultRow], pick: impl Fn(&ResultRow) -> Option<f64>) -> Vec<PerModulus> {
    let mut by: BTreeMap<u64, PerModulus> = BTreeMap::new();
    for r in rows {
        let v = pick(r).unwrap_or(0.0);
        let e = by.entry(r.k).or_insert(PerModulus {
            k: r.k,
            n: r.n,
            max_ratio: 0.0,
        });
        e.max_ratio = e.max_ratio.max(v);
    }
    by.into_values().collect()
}

/// `(x, ln max_ratio)` over the moduli with a non-zero maximum.
fn fit_points(per: &[PerModulus], x: impl Fn(&PerModulus) -> f64) -> (Vec<f64>, Vec<f64>) {
    per.iter()
        .filter(|p| p.max_ratio > 0.0)
        .map(|p| (x(p), p.max_ratio.ln()))
        .unzip()
}

const TREND_NOTE: &str = "The decade grouping is a reporting choice; the fitted \
exponent is a measured quantity and is not compared with any theoretical value.";

/// For every modulus `k`, `N` from the policy and each selected character and
/// β, the row `|S_k(α, β, χ; N)|/N`; then a fit of `log max|S|/N` against
/// `log k`.
pub fn run_burgess_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let alpha = config.alpha()?;
    let params: Vec<BeattyParams> = config
        .betas()?
        .into_iter()
        .map(|b| BeattyParams::new(alpha.clone(), b))
        .collect::<Result<_>>()?;
    let jobs = prepare_jobs(config)?;
    let smoothing = config.smoothing;
    let timings = config.timings;
    let results = run_pool(&jobs, config.threads, |job| -> (Vec<ResultRow>, usize, usize) {
        let mut rows = Vec::with_capacity(params.len());
        let (mut checked, mut violations) = (0, 0);
        for (p, label) in params.iter().zip(&config.beta_grid) {
            let start = Instant::now();
            let s = charsum_s(p, &job.table, job.n);
            let wall = start.elapsed().as_secs_f64() * 1e3;
            if let Some(sm) = smoothing {
                let report = smoothed_charsum(p, &job.table, job.n, sm.delta, sm.fourier_j, Substitution::ExactGamma);
                if let Ok(r) = report {
                    checked += 1;
                    if !r.sandwich_holds() {
                        violations += 1;
                    }
                }
            }
            rows.push(ResultRow {
                k: job.k,
                class: ModulusClass::of(job.k),
                chi_id: job.chi.to_string(),
                beta: label.clone(),
                n: job.n,
                abs_s_over_n: Some(s.norm() / job.n as f64),
                abs_u_over_n: None,
                wall_ms: timings.then_some(wall),
            });
        }
        (rows, checked, violations)
    });
    let mut rows = Vec::new();
    let (mut checked, mut violations) = (0, 0);
    for (r, c, v) in results {
        rows.extend(r);
        checked += c;
        violations += v;
    }
    let per = per_modulus_max(&rows, |r| r.abs_s_over_n);
    let (xs, ys) = fit_points(&per, |p| (p.k as f64).ln());
    let fit = fit_line(&xs, &ys);
    let means = decade_means(&per);
    let ks: Vec<u64> = per.iter().map(|p| p.k).collect();
    let report = DecayFitReport {
        experiment: ExperimentKind::Burgess,
        grid: grid_description(config, &ks),
        per_modulus: per,
        rho_est: fit.as_ref().ok().map(|f| -f.slope),
        eta_est: None,
        fit_refused: fit.as_ref().err().map(ToString::to_string),
        fit: fit.ok(),
        trend: trend(&means),
        decade_means: means,
        sandwich_checked: checked,
        sandwich_violations: violations,
        note: TREND_NOTE.into(),
    };
    Ok(ExperimentOutput { rows, report })
}

/// For every modulus and selected character, `max |U_k(a/k, χ; 0, N)|/N` over
/// seeded random `a ∈ [1, k)`; then a fit of `log max|U|/N` against `log N`.
pub fn run_expsum_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let jobs = prepare_jobs(config)?;
    let timings = config.timings;
    let rows = run_pool(&jobs, config.threads, |job| -> Result<ResultRow> {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, job.k, 1 + job.chi.index()));
        let mut best: f64 = 0.0;
        for _ in 0..config.a_samples {
            let a = rng.gen_range(1..job.k) as i64;
            let u = expsum_u_rational(&job.table, a, job.k, 0, job.n as i64)?;
            best = best.max(u.norm() / job.n as f64);
        }
        Ok(ResultRow {
            k: job.k,
            class: ModulusClass::of(job.k),
            chi_id: job.chi.to_string(),
            beta: String::new(),
            n: job.n,
            abs_s_over_n: None,
            abs_u_over_n: Some(best),
            wall_ms: timings.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let per = per_modulus_max(&rows, |r| r.abs_u_over_n);
    let (xs, ys) = fit_points(&per, |p| (p.n as f64).ln());
    let fit = fit_line(&xs, &ys);
    let means = decade_means(&per);
    let ks: Vec<u64> = per.iter().map(|p| p.k).collect();
    let report = DecayFitReport {
        experiment: ExperimentKind::Expsum,
        grid: grid_description(config, &ks),
        per_modulus: per,
        rho_est: None,
        eta_est: fit.as_ref().ok().map(|f| -f.slope),
        fit_refused: fit.as_ref().err().map(ToString::to_string),
        fit: fit.ok(),
        trend: trend(&means),
        decade_means: means,
        sandwich_checked: 0,
        sandwich_violations: 0,
        note: TREND_NOTE.into(),
    };
    Ok(ExperimentOutput { rows, report })
}

/// Path of the fit report written next to `output`.
pub fn report_path(output: &Path) -> PathBuf {
    output.with_extension("report.json")
}

/// Runs the configured experiment and writes the rows and the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let out = match config.experiment {
        ExperimentKind::Burgess => run_burgess_experiment(config)?,
        ExperimentKind::Expsum => run_expsum_experiment(config)?,
    };
    write_results(&out.rows, config.format, &config.output_path)?;
    let path = report_path(&config.output_path);
    let text = serde_json::to_string_pretty(&out.report)?;
    std::fs::write(&path, text + "\n").map_err(|source| Error::Io { path, source })?;
    Ok(out)
}

const COLUMNS: [&str; 8] = ["k", "class", "chi_id", "beta", "N", "abs_S_over_N", "abs_U_over_N", "wall_ms"];

pub fn write_results(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    match format {
        OutputFormat::Csv => {
            let file = std::fs::File::create(path).map_err(io)?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
            w.write_record(COLUMNS).map_err(csv_err)?;
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(rows)?;
            std::fs::write(path, text + "\n").map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ModulusGrid;

    fn small_config(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_burgess(dir.join("out.csv"));
        c.prime_range = Some(ModulusGrid { lo: 100, hi: 2_000, count: 5, class: ModulusClass::Prime });
        c
    }

    #[test]
    fn legendre_mod_7_example() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small_config(dir.path());
        c.prime_range = None;
        c.moduli = vec![7];
        c.beta_grid = vec!["0".into()];
        let out = run_burgess_experiment(&c).unwrap();
        assert_eq!(out.rows.len(), 1);
        let row = &out.rows[0];
        // N = ⌈7^0.30⌉ = 2; χ(1) + χ(2) = 2
        assert_eq!(row.n, 2);
        assert_eq!(row.abs_s_over_n, Some(1.0));
        assert!(out.report.fit.is_none());
        assert!(out.report.fit_refused.is_some());
    }

    #[test]
    fn fit_line_recovers_slope() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert!(f.residual_std < 1e-12);
        assert!(fit_line(&xs[..3], &ys[..3]).is_err());
    }

    #[test]
    fn pool_preserves_order() {
        let items: Vec<u64> = (0..100).collect();
        let out = run_pool(&items, 7, |x| x * x);
        assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(run_pool(&Vec::<u64>::new(), 4, |x| *x).is_empty());
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small_config(dir.path());
        let one = run_burgess_experiment(&c).unwrap();
        c.threads = 4;
        let four = run_burgess_experiment(&c).unwrap();
        assert_eq!(one.rows, four.rows);
        assert_eq!(one.rows.len(), 5 * 8);
        assert!(one.rows.iter().all(|r| (0.0..=1.0).contains(&r.abs_s_over_n.unwrap())));
    }

    #[test]
    fn character_selection() {
        let g = build_group(15).unwrap();
        let q = select_characters(&g, CharacterPolicy::Quadratic, 0).unwrap();
        assert_eq!(q.len(), 1);
        for m in 1..15i64 {
            let want = crate::harness::oracles::jacobi_symbol(m, 15).unwrap();
            let got = q[0].eval(m).to_complex().re.round() as i8;
            assert_eq!(got, want, "m = {m}");
        }
        let r = select_characters(&g, CharacterPolicy::Random(3), 9).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|c| !c.is_principal()));
        let again = select_characters(&g, CharacterPolicy::Random(3), 9).unwrap();
        assert_eq!(
            r.iter().map(|c| c.index()).collect::<Vec<_>>(),
            again.iter().map(|c| c.index()).collect::<Vec<_>>()
        );
        assert_eq!(select_characters(&g, CharacterPolicy::All, 0).unwrap().len(), 7);
        let even = build_group(16).unwrap();
        assert!(select_characters(&even, CharacterPolicy::Quadratic, 0).is_err());
        assert_eq!(select_characters(&even, CharacterPolicy::Random(2), 0).unwrap().len(), 2);
    }

    #[test]
    fn expsum_gauss_control() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small_config(dir.path());
        c.experiment = ExperimentKind::Expsum;
        c.prime_range = None;
        c.moduli = vec![101, 103, 107, 109, 113];
        c.n_policy = NPolicy::Explicit(0);
        assert!(run_expsum_experiment(&c).is_err());
        // full period: |U| = √p for every a
        for k in [101u64, 103] {
            c.moduli = vec![k];
            c.n_policy = NPolicy::Explicit(k);
            let out = run_expsum_experiment(&c).unwrap();
            let u = out.rows[0].abs_u_over_n.unwrap() * k as f64;
            assert!((u - (k as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_results(&[], OutputFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "k,class,chi_id,beta,N,abs_S_over_N,abs_U_over_N,wall_ms\n");

        let row = ResultRow {
            k: 7,
            class: ModulusClass::Prime,
            chi_id: "index:3".into(),
            beta: "rat:1/3".into(),
            n: 2,
            abs_s_over_n: Some(0.5),
            abs_u_over_n: None,
            wall_ms: None,
        };
        let rows = vec![row.clone(); 10_000];
        write_results(&rows, OutputFormat::Csv, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 10_001);
        assert_eq!(read_results_csv(&path).unwrap()[0], row);

        let jpath = dir.path().join("rows.json");
        write_results(&rows[..1], OutputFormat::Json, &jpath).unwrap();
        let back: Vec<ResultRow> =
            serde_json::from_str(&std::fs::read_to_string(&jpath).unwrap()).unwrap();
        assert_eq!(back, vec![row]);

        let err = write_results(&[], OutputFormat::Csv, &dir.path().join("no/such/dir.csv")).unwrap_err();
        assert!(err.to_string().contains("no/such/dir.csv"));
    }

    #[test]
    fn run_experiment_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let c = small_config(dir.path());
        run_experiment(&c).unwrap();
        let a = std::fs::read(&c.output_path).unwrap();
        run_experiment(&c).unwrap();
        assert_eq!(a, std::fs::read(&c.output_path).unwrap());
        assert!(report_path(&c.output_path).exists());
    }
}
