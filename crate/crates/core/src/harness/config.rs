use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::expr::parse_real;
use crate::characters::{is_prime, ModulusClass};
use crate::error::{Error, Result};
use crate::exact::QuadraticReal;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `max |S_k|/N` against `k`.
    #[default]
    Burgess,
    /// `max |U_k(a/k)|/N` against `N`.
    Expsum,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterPolicy {
    /// Every non-principal character.
    All,
    /// The real character `m -> Π (m | p)` over the odd primes `p | k`;
    /// defined for odd `k`.
    Quadratic,
    /// The quadratic character where defined plus this many seeded random
    /// non-principal characters.
    Random(usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NPolicy {
    /// `N = ⌈B_ε(k)⌉`.
    Burgess,
    Explicit(u64),
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct SmoothingPolicy {
    pub delta: f64,
    pub fourier_j: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// `count` log-spaced moduli of one class in `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ModulusGrid {
    pub lo: u64,
    pub hi: u64,
    pub count: usize,
    #[serde(default = "prime_class")]
    pub class: ModulusClass,
}

fn prime_class() -> ModulusClass {
    ModulusClass::Prime
}

fn next_prime(mut n: u64) -> u64 {
    n = n.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}

fn prev_prime(mut n: u64) -> Option<u64> {
    while n >= 2 {
        if is_prime(n) {
            return Some(n);
        }
        n -= 1;
    }
    None
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl ModulusGrid {
    /// Targets `lo·(hi/lo)^(i/(count-1))`; each is moved to the nearest
    /// member of the class at or above it, or the largest one below `hi`.
    pub fn moduli(&self) -> Result<Vec<u64>> {
        if self.lo < 3 || self.hi < self.lo || self.count == 0 {
            return Err(Error::invalid(format!(
                "modulus grid needs 3 <= lo <= hi and count >= 1, got {self:?}"
            )));
        }
        let (lo, hi) = (self.lo as f64, self.hi as f64);
        let mut out = Vec::with_capacity(self.count);
        for i in 0..self.count {
            let t = if self.count == 1 {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (self.count - 1) as f64)
            };
            let target = (t.round() as u64).clamp(self.lo, self.hi);
            if let Some(k) = self.snap(target) {
                out.push(k);
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::invalid(format!("no {} moduli in [{}, {}]", self.class, self.lo, self.hi)));
        }
        Ok(out)
    }

    fn snap(&self, target: u64) -> Option<u64> {
        let k = match self.class {
            ModulusClass::Prime => {
                let p = next_prime(target);
                if p <= self.hi {
                    p
                } else {
                    prev_prime(self.hi)?
                }
            }
            ModulusClass::PrimePower => {
                let p = next_prime(isqrt(target - 1) + 1);
                if p * p <= self.hi {
                    p * p
                } else {
                    let p = prev_prime(isqrt(self.hi))?;
                    p * p
                }
            }
            ModulusClass::Other => {
                // p·q with p the largest odd prime ≤ √target and q > p
                let p = prev_prime(isqrt(target)).filter(|&p| p > 2).unwrap_or(3);
                let q = next_prime((target.div_ceil(p)).max(p + 1));
                if p * q <= self.hi {
                    p * q
                } else {
                    let q = prev_prime(self.hi / p).filter(|&q| q > p)?;
                    p * q
                }
            }
        };
        (k >= self.lo && k <= self.hi).then_some(k)
    }
}

/// JSON keys match the field names.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub moduli: Vec<u64>,
    #[serde(default)]
    pub prime_range: Option<ModulusGrid>,
    pub eps: f64,
    pub alpha: String,
    pub beta_grid: Vec<String>,
    pub character_policy: CharacterPolicy,
    pub n_policy: NPolicy,
    #[serde(default)]
    pub smoothing: Option<SmoothingPolicy>,
    pub seed: u64,
    pub output_path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "one")]
    pub threads: usize,
    /// Random `a` per character in the `U_k` experiment.
    #[serde(default = "four")]
    pub a_samples: usize,
    /// Record wall-clock time per row; off by default since it makes the
    /// output differ between runs.
    #[serde(default)]
    pub timings: bool,
}

fn one() -> usize {
    1
}

fn four() -> usize {
    4
}

/// The fixed β grid `{0, 1/7, 1/3, √2/2, φ - 1, 0.9, 2.5, -1.2}`.
pub fn default_beta_grid() -> Vec<String> {
    ["0", "rat:1/7", "rat:1/3", "quad:0,1,2,2", "quad:-1,1,5,2", "rat:9/10", "rat:5/2", "rat:-6/5"]
        .map(String::from)
        .to_vec()
}

impl ExperimentConfig {
    /// 12 log-spaced primes in `[10³, 10⁵]`, `N = ⌈B_0.05(k)⌉`, the quadratic
    /// character, `α = √2` and the default β grid.
    pub fn default_burgess(output_path: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Burgess,
            moduli: Vec::new(),
            prime_range: Some(ModulusGrid {
                lo: 1_000,
                hi: 100_000,
                count: 12,
                class: ModulusClass::Prime,
            }),
            eps: 0.05,
            alpha: "sqrt:2".into(),
            beta_grid: default_beta_grid(),
            character_policy: CharacterPolicy::Quadratic,
            n_policy: NPolicy::Burgess,
            smoothing: None,
            seed: 0,
            output_path: output_path.into(),
            format: OutputFormat::Csv,
            threads: 1,
            a_samples: 4,
            timings: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if self.beta_grid.is_empty() {
            return Err(Error::invalid("beta_grid is empty"));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be at least 1"));
        }
        if let Some(&k) = self.moduli.iter().find(|&&k| k < 3) {
            return Err(Error::invalid(format!("moduli must be at least 3, got {k}")));
        }
        if self.experiment == ExperimentKind::Expsum && self.a_samples == 0 {
            return Err(Error::invalid("a_samples must be at least 1"));
        }
        if let NPolicy::Explicit(0) = self.n_policy {
            return Err(Error::invalid("explicit N must be at least 1"));
        }
        self.alpha()?;
        self.betas()?;
        self.moduli_grid()?;
        Ok(())
    }

    pub fn alpha(&self) -> Result<QuadraticReal> {
        let a = parse_real(&self.alpha)?;
        if !a.is_positive() {
            return Err(Error::invalid(format!("alpha must be positive, got {a}")));
        }
        Ok(a)
    }

    pub fn betas(&self) -> Result<Vec<QuadraticReal>> {
        self.beta_grid.iter().map(|b| parse_real(b)).collect()
    }

    /// The explicit moduli followed by the generated grid, sorted and
    /// deduplicated.
    pub fn moduli_grid(&self) -> Result<Vec<u64>> {
        let mut ks = self.moduli.clone();
        if let Some(grid) = &self.prime_range {
            ks.extend(grid.moduli()?);
        }
        ks.sort_unstable();
        ks.dedup();
        if ks.is_empty() {
            return Err(Error::invalid("modulus grid is empty"));
        }
        Ok(ks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prime_grid() {
        let c = ExperimentConfig::default_burgess("out.csv");
        let ks = c.moduli_grid().unwrap();
        assert_eq!(ks.len(), 12);
        assert_eq!(ks[0], 1009);
        assert_eq!(*ks.last().unwrap(), 99_991);
        assert!(ks.iter().all(|&k| is_prime(k)));
        assert_eq!(c.betas().unwrap().len(), 8);
        c.validate().unwrap();
    }

    #[test]
    fn class_grids() {
        let squares = ModulusGrid { lo: 1_000, hi: 100_000, count: 6, class: ModulusClass::PrimePower }
            .moduli()
            .unwrap();
        assert!(squares.iter().all(|&k| ModulusClass::of(k) == ModulusClass::PrimePower && k <= 100_000));
        let semi = ModulusGrid { lo: 1_000, hi: 100_000, count: 6, class: ModulusClass::Other }
            .moduli()
            .unwrap();
        for k in semi {
            let f = crate::characters::factorize(k);
            assert!(f.len() == 2 && f.iter().all(|&(p, e)| e == 1 && p > 2), "{k}");
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let c = ExperimentConfig::default_burgess("x.csv");
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"character_policy\":\"quadratic\""));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.moduli_grid().unwrap(), c.moduli_grid().unwrap());

        let minimal = r#"{"moduli": [7], "eps": 0.05, "alpha": "sqrt:2", "beta_grid": ["0"],
            "character_policy": {"random": 2}, "n_policy": {"explicit": 10}, "seed": 1,
            "output_path": "o.csv"}"#;
        let m: ExperimentConfig = serde_json::from_str(minimal).unwrap();
        m.validate().unwrap();
        assert_eq!(m.threads, 1);
        assert_eq!(m.character_policy, CharacterPolicy::Random(2));

        let mut bad = m.clone();
        bad.eps = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = m.clone();
        bad.moduli = vec![2];
        assert!(bad.validate().is_err());
        let mut bad = m.clone();
        bad.beta_grid.clear();
        assert!(bad.validate().is_err());
        let mut bad = m;
        bad.moduli.clear();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
