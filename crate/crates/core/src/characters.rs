//! Dirichlet characters modulo arbitrary `k`.
//!
//! The unit group `(Z/kZ)^*` is decomposed into cyclic components, one per odd
//! prime power and one or two for the power of two. Every component carries
//! a full discrete-log table, so evaluating a character costs one table
//! lookup per component. Values are kept as exponents of a root of unity.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NO_LOG: u32 = u32::MAX;

/// One cyclic factor of the unit group, living on residues mod `modulus`.
#[derive(Clone, Debug)]
pub struct Component {
    pub modulus: u64,
    pub generator: u64,
    pub order: u64,
    log: Vec<u32>,
}

impl Component {
    /// Index of `m` with respect to the generator, `None` for non-units.
    pub fn log(&self, m: u64) -> Option<u64> {
        match self.log[(m % self.modulus) as usize] {
            NO_LOG => None,
            l => Some(l as u64),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupStructure {
    k: u64,
    factors: Vec<(u64, u32)>,
    components: Vec<Component>,
    phi: u64,
    exponent: u64,
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128 % m as u128;
    let mut base = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

fn cyclic_component(modulus: u64, generator: u64, order: u64) -> Component {
    let mut log = vec![NO_LOG; modulus as usize];
    let mut v = 1u64 % modulus;
    for i in 0..order {
        log[v as usize] = i as u32;
        v = (v as u128 * generator as u128 % modulus as u128) as u64;
    }
    Component {
        modulus,
        generator,
        order,
        log,
    }
}

impl GroupStructure {
    pub fn new(k: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::ModulusTooSmall(k));
        }
        if k > u32::MAX as u64 {
            return Err(Error::invalid(format!("modulus {k} too large for log tables")));
        }
        let factors = factorize(k);
        let mut components = Vec::new();
        for &(p, e) in &factors {
            let q = p.pow(e);
            if p == 2 {
                match e {
                    1 => components.push(cyclic_component(2, 1, 1)),
                    2 => components.push(cyclic_component(4, 3, 2)),
                    _ => {
                        // u ≡ (-1)^a 5^b mod 2^e
                        let half = q / 4;
                        let mut sign_log = vec![NO_LOG; q as usize];
                        let mut five_log = vec![NO_LOG; q as usize];
                        let mut v = 1u64;
                        for b in 0..half {
                            sign_log[v as usize] = 0;
                            five_log[v as usize] = b as u32;
                            sign_log[(q - v) as usize] = 1;
                            five_log[(q - v) as usize] = b as u32;
                            v = v * 5 % q;
                        }
                        components.push(Component {
                            modulus: q,
                            generator: q - 1,
                            order: 2,
                            log: sign_log,
                        });
                        components.push(Component {
                            modulus: q,
                            generator: 5,
                            order: half,
                            log: five_log,
                        });
                    }
                }
            } else {
                let mut g = primitive_root_mod_prime(p);
                if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                    g += p;
                }
                components.push(cyclic_component(q, g, (p - 1) * p.pow(e - 1)));
            }
        }
        let phi = components.iter().map(|c| c.order).product();
        let exponent = components.iter().fold(1, |acc, c| acc.lcm(&c.order));
        Ok(GroupStructure {
            k,
            factors,
            components,
            phi,
            exponent,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Least common multiple of the component orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Per-component logs of `m`, `None` when `gcd(m, k) > 1`.
    pub fn logs(&self, m: i64) -> Option<Vec<u64>> {
        let r = m.rem_euclid(self.k as i64) as u64;
        self.components.iter().map(|c| c.log(r)).collect()
    }
}

pub fn build_group(k: u64) -> Result<Arc<GroupStructure>> {
    GroupStructure::new(k).map(Arc::new)
}

/// A value of a character: zero, or `e(num/den)` with `0 <= num < den`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum CharValue {
    Zero,
    Root { num: u64, den: u64 },
}

impl CharValue {
    pub fn one() -> Self {
        CharValue::Root { num: 0, den: 1 }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::Root { num, den } => {
                Complex64::from_polar(1.0, std::f64::consts::TAU * num as f64 / den as f64)
            }
        }
    }

    /// Reduced fraction `num/den` of a full turn; `None` for zero.
    pub fn turns(self) -> Option<(u64, u64)> {
        match self {
            CharValue::Zero => None,
            CharValue::Root { num, den } => {
                let g = num.gcd(&den);
                Some((num / g, den / g))
            }
        }
    }

    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (CharValue::Root { num: a, den: b }, CharValue::Root { num: c, den: d }) => {
                let den = b.lcm(&d);
                let num = (a * (den / b) + c * (den / d)) % den;
                let g = num.gcd(&den);
                CharValue::Root {
                    num: num / g,
                    den: den / g,
                }
            }
            _ => CharValue::Zero,
        }
    }

    /// Equality as complex numbers (roots compared in lowest terms).
    pub fn same_value(self, other: Self) -> bool {
        self.turns() == other.turns()
    }
}

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<GroupStructure>,
    exps: Vec<u64>,
    order: u64,
    index: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.k == other.group.k && self.exps == other.exps
    }
}

impl DirichletCharacter {
    /// The character with the given exponent on each component.
    pub fn from_exponents(group: Arc<GroupStructure>, exps: Vec<u64>) -> Result<Self> {
        if exps.len() != group.components.len() {
            return Err(Error::invalid(format!(
                "expected {} exponents, got {}",
                group.components.len(),
                exps.len()
            )));
        }
        let exps: Vec<u64> = exps
            .iter()
            .zip(&group.components)
            .map(|(e, c)| e % c.order)
            .collect();
        let order = exps
            .iter()
            .zip(&group.components)
            .fold(1u64, |acc, (e, c)| acc.lcm(&(c.order / e.gcd(&c.order))));
        let mut index = 0u64;
        for (e, c) in exps.iter().zip(&group.components).rev() {
            index = index * c.order + e;
        }
        Ok(DirichletCharacter {
            group,
            exps,
            order,
            index,
        })
    }

    /// Character number `index` in mixed-radix order (first component least
    /// significant). Index 0 is the principal character.
    pub fn from_index(group: Arc<GroupStructure>, index: u64) -> Result<Self> {
        if index >= group.phi {
            return Err(Error::invalid(format!(
                "character index {index} out of range for modulus {} (phi = {})",
                group.k, group.phi
            )));
        }
        let mut rest = index;
        let exps = group
            .components
            .iter()
            .map(|c| {
                let e = rest % c.order;
                rest /= c.order;
                e
            })
            .collect();
        Self::from_exponents(group, exps)
    }

    pub fn principal(group: Arc<GroupStructure>) -> Self {
        let n = group.components.len();
        Self::from_exponents(group, vec![0; n]).expect("matching length")
    }

    pub fn modulus(&self) -> u64 {
        self.group.k
    }

    pub fn group(&self) -> &Arc<GroupStructure> {
        &self.group
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// `χ(m) = e(exponent(m) / order)`, `None` for non-units.
    pub fn exponent_of(&self, m: i64) -> Option<u64> {
        let r = m.rem_euclid(self.group.k as i64) as u64;
        let big = self.group.exponent;
        let mut acc = 0u64;
        for (c, &e) in self.group.components.iter().zip(&self.exps) {
            let l = c.log(r)?;
            let term = (e as u128 * l as u128 % c.order as u128) as u64 * (big / c.order);
            acc = (acc + term) % big;
        }
        Some(acc / (big / self.order))
    }

    pub fn eval(&self, m: i64) -> CharValue {
        match self.exponent_of(m) {
            None => CharValue::Zero,
            Some(num) => CharValue::Root {
                num,
                den: self.order,
            },
        }
    }

    /// Precomputed values on a full period.
    pub fn table(&self) -> CharTable {
        let k = self.group.k;
        let exps = (0..k as i64)
            .map(|m| self.exponent_of(m).map_or(NO_LOG, |e| e as u32))
            .collect();
        let roots = (0..self.order)
            .map(|j| {
                CharValue::Root {
                    num: j,
                    den: self.order,
                }
                .to_complex()
            })
            .collect();
        CharTable {
            k,
            order: self.order,
            exps,
            roots,
        }
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index:{}", self.index)
    }
}

pub fn enumerate_characters(group: &Arc<GroupStructure>) -> Vec<DirichletCharacter> {
    (0..group.phi)
        .map(|i| DirichletCharacter::from_index(group.clone(), i).expect("index below phi"))
        .collect()
}

pub fn char_eval(chi: &DirichletCharacter, m: i64) -> CharValue {
    chi.eval(m)
}

/// The real character of order two modulo an odd prime.
pub fn quadratic_character(k: u64) -> Result<DirichletCharacter> {
    if k.is_multiple_of(2) || !is_prime(k) {
        return Err(Error::NotOddPrime(k));
    }
    let group = build_group(k)?;
    let half = group.components[0].order / 2;
    DirichletCharacter::from_exponents(group, vec![half])
}

/// The Jacobi-symbol character `m -> (m | k)` for odd `k`; principal when `k`
/// is a perfect square.
pub fn jacobi_character(group: Arc<GroupStructure>) -> Result<DirichletCharacter> {
    if group.k.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Jacobi character needs an odd modulus, got {}",
            group.k
        )));
    }
    let exps = group
        .factors
        .iter()
        .zip(&group.components)
        .map(|(&(_, e), c)| if e % 2 == 1 { c.order / 2 } else { 0 })
        .collect();
    DirichletCharacter::from_exponents(group, exps)
}

/// Character values on `0..k` with a root-of-unity lookup table.
#[derive(Clone, Debug)]
pub struct CharTable {
    k: u64,
    order: u64,
    exps: Vec<u32>,
    roots: Vec<Complex64>,
}

impl CharTable {
    pub fn modulus(&self) -> u64 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    #[inline]
    pub fn exponent(&self, m: i64) -> Option<u32> {
        match self.exps[m.rem_euclid(self.k as i64) as usize] {
            NO_LOG => None,
            e => Some(e),
        }
    }

    #[inline]
    pub fn value(&self, m: i64) -> Complex64 {
        self.exponent(m)
            .map_or(Complex64::new(0.0, 0.0), |e| self.roots[e as usize])
    }

    #[inline]
    pub fn root(&self, e: u32) -> Complex64 {
        self.roots[e as usize]
    }
}

/// An exact sum of character values, stored as the number of times each
/// root `e(j/order)` occurs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactCharSum {
    order: u64,
    counts: Vec<i64>,
}

impl ExactCharSum {
    pub fn new(order: u64) -> Self {
        ExactCharSum {
            order,
            counts: vec![0; order as usize],
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    #[inline]
    pub fn add_exponent(&mut self, e: u32) {
        self.counts[e as usize] += 1;
    }

    pub fn add_value(&mut self, v: CharValue) -> Result<()> {
        match v {
            CharValue::Zero => Ok(()),
            CharValue::Root { num, den } if self.order.is_multiple_of(den) => {
                self.counts[(num * (self.order / den)) as usize] += 1;
                Ok(())
            }
            CharValue::Root { den, .. } => Err(Error::invalid(format!(
                "root of order {den} does not fit a sum of order {}",
                self.order
            ))),
        }
    }

    pub fn merge(&mut self, other: &ExactCharSum) {
        assert_eq!(self.order, other.order, "sums of different characters");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn minus(&self, other: &ExactCharSum) -> ExactCharSum {
        assert_eq!(self.order, other.order, "sums of different characters");
        ExactCharSum {
            order: self.order,
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Number of non-zero terms accumulated (net count).
    pub fn terms(&self) -> i64 {
        self.counts.iter().sum()
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut acc = crate::sums::ComplexAccumulator::default();
        for (j, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                let root = CharValue::Root {
                    num: j as u64,
                    den: self.order,
                }
                .to_complex();
                acc.add(root * c as f64);
            }
        }
        acc.value()
    }

    /// Canonical representative in `Z[x] / Φ_order(x)`; two sums of the same
    /// order are equal as complex numbers iff their reductions agree.
    pub fn reduced(&self) -> Vec<i128> {
        let phi = cyclotomic::polynomial(self.order);
        let poly: Vec<i128> = self.counts.iter().map(|&c| c as i128).collect();
        cyclotomic::remainder(poly, &phi)
    }

    /// Exact zero test of the accumulated sum.
    pub fn is_zero(&self) -> bool {
        self.reduced().iter().all(|&c| c == 0)
    }

    pub fn value_eq(&self, other: &ExactCharSum) -> bool {
        self.order == other.order && self.reduced() == other.reduced()
    }
}

mod cyclotomic {
    /// Coefficients of Φ_n, lowest degree first, via
    /// Φ_n = Π_{d | n} (x^d - 1)^{μ(n/d)}.
    pub fn polynomial(n: u64) -> Vec<i128> {
        let divisors: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
        let mut poly = vec![1i128];
        for &d in &divisors {
            if mobius(n / d) == 1 {
                poly = mul_xd_minus_one(&poly, d as usize);
            }
        }
        for &d in &divisors {
            if mobius(n / d) == -1 {
                poly = div_xd_minus_one(&poly, d as usize);
            }
        }
        // (x^d - 1) factors carry sign (-1); normalize to a monic polynomial
        if poly.last().copied().unwrap_or(1) < 0 {
            poly.iter_mut().for_each(|c| *c = -*c);
        }
        poly
    }

    fn mobius(mut n: u64) -> i32 {
        let mut sign = 1;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                sign = -sign;
            }
            p += 1;
        }
        if n > 1 {
            sign = -sign;
        }
        sign
    }

    fn mul_xd_minus_one(poly: &[i128], d: usize) -> Vec<i128> {
        let mut out = vec![0i128; poly.len() + d];
        for (i, &c) in poly.iter().enumerate() {
            out[i + d] += c;
            out[i] -= c;
        }
        out
    }

    fn div_xd_minus_one(poly: &[i128], d: usize) -> Vec<i128> {
        // q(x)(x^d - 1) = poly, solved from the top degree down
        let n = poly.len() - 1;
        let mut rem = poly.to_vec();
        let mut q = vec![0i128; n + 1 - d];
        for i in (d..=n).rev() {
            let c = rem[i];
            q[i - d] = c;
            rem[i] -= c;
            rem[i - d] += c;
        }
        debug_assert!(rem.iter().all(|&c| c == 0), "inexact division");
        q
    }

    /// Remainder of `poly` modulo the monic polynomial `m`, padded to
    /// `deg m` coefficients.
    pub fn remainder(mut poly: Vec<i128>, m: &[i128]) -> Vec<i128> {
        let dm = m.len() - 1;
        for i in (dm..poly.len()).rev() {
            let c = poly[i];
            if c != 0 {
                for (j, &mc) in m.iter().enumerate() {
                    poly[i - dm + j] -= c * mc;
                }
            }
        }
        poly.resize(dm, 0);
        poly
    }

}

/// The three classes that determine the exponent of the Burgess range.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusClass {
    Prime,
    PrimePower,
    Other,
}

impl ModulusClass {
    pub fn of(k: u64) -> Self {
        let f = factorize(k);
        match f.as_slice() {
            [(_, 1)] => ModulusClass::Prime,
            [(_, _)] => ModulusClass::PrimePower,
            _ => ModulusClass::Other,
        }
    }

    pub fn base_exponent(self) -> f64 {
        match self {
            ModulusClass::Prime => 0.25,
            ModulusClass::PrimePower => 1.0 / 3.0,
            ModulusClass::Other => 0.375,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModulusClass::Prime => "prime",
            ModulusClass::PrimePower => "prime-power",
            ModulusClass::Other => "other",
        }
    }
}

impl fmt::Display for ModulusClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `k^(1/4+ε)`, `k^(1/3+ε)` or `k^(3/8+ε)` for prime, prime-power and other
/// moduli respectively.
pub fn burgess_threshold(k: u64, eps: f64) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be positive, got {eps}")));
    }
    Ok((k as f64).powf(ModulusClass::of(k).base_exponent() + eps))
}

/// `⌈B_ε(k)⌉`.
pub fn burgess_length(k: u64, eps: f64) -> Result<u64> {
    Ok(burgess_threshold(k, eps)?.ceil() as u64)
}
