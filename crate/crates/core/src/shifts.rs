//! Shift families `γ(t) = α t^a (log t)^b`, the admissibility rules on
//! `(a, b)`, and the exact arithmetic of `α = 2π u / (v log r)` with `r`
//! rational: when is `exp(2π m / α)` rational, and how does it factor.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::approx::{CompactRect, EulerAdjustment, TargetFunction};
use crate::arith::factorize;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::lfunc::EvalParams;

/// Tolerance for deciding that a float exponent is an integer.
pub const INTEGER_TOL: f64 = 1e-12;

pub fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_TOL
}

/// The scale `α` of a shift family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ExactAlpha {
    /// `α = 2π u / (v log(r_num / r_den))`, stored canonically: `gcd(u, v) = 1`,
    /// `gcd(r_num, r_den) = 1`, `r != 1`.
    Exact { u: i64, v: u64, r_num: u64, r_den: u64 },
    /// A float with no declared structure.
    Generic(f64),
}

impl ExactAlpha {
    pub fn exact(u: i64, v: u64, r_num: u64, r_den: u64) -> Result<Self> {
        if u == 0 || v == 0 {
            return Err(Error::domain("exact alpha needs u != 0 and v > 0"));
        }
        if r_num == 0 || r_den == 0 {
            return Err(Error::domain("exact alpha needs a positive rational r"));
        }
        let g = r_num.gcd(&r_den);
        let (r_num, r_den) = (r_num / g, r_den / g);
        if r_num == r_den {
            return Err(Error::domain("exact alpha needs r != 1"));
        }
        let h = (u.unsigned_abs()).gcd(&v);
        Ok(ExactAlpha::Exact {
            u: u / h as i64,
            v: v / h,
            r_num,
            r_den,
        })
    }

    pub fn generic(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::domain(format!(
                "alpha must be finite and nonzero, got {alpha}"
            )));
        }
        Ok(ExactAlpha::Generic(alpha))
    }

    pub fn value(&self) -> f64 {
        match *self {
            ExactAlpha::Exact { u, v, r_num, r_den } => {
                TAU * u as f64 / (v as f64 * ((r_num as f64).ln() - (r_den as f64).ln()))
            }
            ExactAlpha::Generic(a) => a,
        }
    }

    /// `α log p / 2π`, exact when `r` is a power of `p`.
    pub fn coefficient(&self, p: u64) -> Coefficient {
        if let ExactAlpha::Exact { u, v, r_num, r_den } = *self {
            let (base, sign) = if r_den == 1 {
                (r_num, 1)
            } else if r_num == 1 {
                (r_den, -1)
            } else {
                (0, 0)
            };
            if sign != 0 {
                if let Some(e) = power_of(base, p) {
                    // u log p / (v · sign · e log p)
                    let den = v as i64 * e as i64 * sign;
                    return Coefficient::rational(u, den);
                }
            }
        }
        Coefficient::Real(self.value() * (p as f64).ln() / TAU)
    }
}

/// `Some(e)` when `n = p^e` with `e >= 1`.
fn power_of(mut n: u64, p: u64) -> Option<u32> {
    if p < 2 || n < p {
        return None;
    }
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    (n == 1).then_some(e)
}

/// A real coefficient that is either an exact rational or a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    /// `num / den` with `den > 0`, reduced.
    Rational {
        num: i64,
        den: i64,
    },
    Real(f64),
}

impl Coefficient {
    pub fn rational(num: i64, den: i64) -> Self {
        let g = num.gcd(&den).max(1);
        let s = den.signum();
        Coefficient::Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Coefficient::Rational { num, den } => num as f64 / den as f64,
            Coefficient::Real(x) => x,
        }
    }
}

impl fmt::Display for ExactAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExactAlpha::Exact { u, v, r_num, r_den } => {
                write!(f, "2pi*{u}/({v}*log({r_num}/{r_den}))")
            }
            ExactAlpha::Generic(a) => write!(f, "{a:?}"),
        }
    }
}

impl From<ExactAlpha> for String {
    fn from(a: ExactAlpha) -> Self {
        a.to_string()
    }
}

impl TryFrom<String> for ExactAlpha {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parses `"<c>pi[*u]/([v*]log(num[/den]))"` (parentheses around the
/// denominator optional) or a plain float.
impl FromStr for ExactAlpha {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(x) = s.parse::<f64>() {
            return ExactAlpha::generic(x);
        }
        let bad = || Error::Config(format!("cannot parse alpha {input:?}"));
        let int = |t: &str| t.parse::<i64>().map_err(|_| bad());
        let uint = |t: &str| t.parse::<u64>().map_err(|_| bad());

        let (numer, denom) = s.split_once('/').ok_or_else(bad)?;
        // numerator: [c]pi[*u]
        let (before_pi, after_pi) = numer.split_once("pi").ok_or_else(bad)?;
        let c = match before_pi {
            "" | "+" => 1,
            "-" => -1,
            t => int(t.trim_end_matches('*'))?,
        };
        let u = match after_pi {
            "" => 1,
            t => int(t.strip_prefix('*').ok_or_else(bad)?)?,
        };
        // denominator: ([v*]log(num[/den])) or [v*]log(...)
        let d = denom
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .filter(|t| t.contains("log(") && t.ends_with(')'))
            .unwrap_or(denom);
        let (v_part, log_part) = d.split_once("log(").ok_or_else(bad)?;
        let v = match v_part {
            "" => 1,
            t => uint(t.strip_suffix('*').ok_or_else(bad)?)?,
        };
        let arg = log_part.strip_suffix(')').ok_or_else(bad)?;
        let (rn, rd) = match arg.split_once('/') {
            Some((a, b)) => (uint(a)?, uint(b)?),
            None => (uint(arg)?, 1),
        };
        // c·π·u / (v log r) = 2π (c u) / (2 v log r)
        ExactAlpha::exact(c * u, 2 * v, rn, rd)
    }
}

/// `γ(t) = α t^a (log t)^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftFamily {
    pub alpha: ExactAlpha,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub label: String,
}

impl ShiftFamily {
    pub fn new(alpha: ExactAlpha, a: f64, b: f64, label: impl Into<String>) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!("invalid exponents a = {a}, b = {b}")));
        }
        if alpha.value() == 0.0 || !alpha.value().is_finite() {
            return Err(Error::domain("alpha must be nonzero"));
        }
        Ok(Self {
            alpha,
            a,
            b,
            label: label.into(),
        })
    }

    /// `γ(t)` for `t > 1`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 1.0) {
            return Err(Error::domain(format!("shift families need t > 1, got {t}")));
        }
        Ok(self.alpha.value() * self.shape(t))
    }

    /// `t^a (log t)^b`.
    pub fn shape(&self, t: f64) -> f64 {
        let a = if is_integral(self.a) {
            self.a.round()
        } else {
            self.a
        };
        let b = if is_integral(self.b) {
            self.b.round()
        } else {
            self.b
        };
        let tp = if a == 0.0 { 1.0 } else { t.powf(a) };
        let lp = if b == 0.0 { 1.0 } else { t.ln().powf(b) };
        tp * lp
    }

    /// `γ'(t) = α t^{a-1} (log t)^{b-1} (a log t + b)`.
    pub fn derivative(&self, t: f64) -> f64 {
        let l = t.ln();
        self.alpha.value() * t.powf(self.a - 1.0) * l.powf(self.b - 1.0) * (self.a * l + self.b)
    }

    /// `a ∈ N` and `b = 0`: the case where discrete shifts can be
    /// commensurable with `log p / 2π`.
    pub fn is_polynomial(&self) -> bool {
        is_integral(self.a) && self.a.round() >= 1.0 && self.b == 0.0
    }
}

pub fn eval_shift(family: &ShiftFamily, t: f64) -> Result<f64> {
    family.eval(t)
}

/// Which branch of the equidistribution argument covers an admissible
/// family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyCase {
    /// `a ∉ Z`: the `⌈a⌉`-th derivative decays monotonically like
    /// `x^{a-⌈a⌉} log^b x`.
    NonIntegerPower,
    /// `a ∈ N`, `b < 0`: same monotone-derivative branch.
    IntegerPowerNegativeLog,
    /// `a ∈ N`, `b > 1`: the `(a+1)`-th derivative behaves like
    /// `log^{b-1} x / x`.
    IntegerPowerLogAboveOne,
    /// `a ∈ N`, `b = 0`: the `a`-th derivative has a limit that is irrational
    /// for almost every dilation.
    IntegerPowerPure,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// Two families share `(a, b)`.
    DuplicatePair { first: String, second: String },
    /// Integer `a` with `b ∈ (0, 1]`.
    IntegerPowerLogInUnitInterval { family: String },
    /// `a = 0, b = 0`: the shift is constant.
    ConstantShift { family: String },
    /// `a = 0, b < 0`: the shift tends to 0.
    VanishingShift { family: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FamilyVerdict {
    Accepted { cases: Vec<(String, FamilyCase)> },
    Rejected { violations: Vec<Violation> },
}

impl FamilyVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, FamilyVerdict::Accepted { .. })
    }
}

fn family_key(f: &ShiftFamily, i: usize) -> String {
    if f.label.is_empty() {
        format!("#{i}(a={},b={})", f.a, f.b)
    } else {
        f.label.clone()
    }
}

/// Checks the admissibility conditions on the `(a_j, b_j)`. The verdict is
/// sorted, so it does not depend on the input order.
pub fn classify_family_set(families: &[ShiftFamily]) -> Result<FamilyVerdict> {
    if families.is_empty() {
        return Err(Error::domain("empty family list"));
    }
    let mut violations = Vec::new();
    let mut cases = Vec::new();
    for (i, f) in families.iter().enumerate() {
        let name = family_key(f, i);
        if is_integral(f.a) {
            let a = f.a.round();
            if f.b > 0.0 && f.b <= 1.0 {
                violations.push(Violation::IntegerPowerLogInUnitInterval { family: name });
            } else if a == 0.0 && f.b == 0.0 {
                violations.push(Violation::ConstantShift { family: name });
            } else if a == 0.0 && f.b < 0.0 {
                violations.push(Violation::VanishingShift { family: name });
            } else if f.b < 0.0 {
                cases.push((name, FamilyCase::IntegerPowerNegativeLog));
            } else if f.b > 1.0 {
                cases.push((name, FamilyCase::IntegerPowerLogAboveOne));
            } else {
                cases.push((name, FamilyCase::IntegerPowerPure));
            }
        } else {
            cases.push((name, FamilyCase::NonIntegerPower));
        }
    }
    for i in 0..families.len() {
        for j in i + 1..families.len() {
            let (x, y) = (&families[i], &families[j]);
            if (x.a - y.a).abs() < INTEGER_TOL && (x.b - y.b).abs() < INTEGER_TOL {
                let (mut p, mut q) = (family_key(x, i), family_key(y, j));
                if p > q {
                    std::mem::swap(&mut p, &mut q);
                }
                violations.push(Violation::DuplicatePair { first: p, second: q });
            }
        }
    }
    if violations.is_empty() {
        cases.sort();
        Ok(FamilyVerdict::Accepted { cases })
    } else {
        violations.sort();
        Ok(FamilyVerdict::Rejected { violations })
    }
}

/// Exponents `e_p` of `r = Π p^{e_p}` (negative for the denominator).
fn rational_exponents(r_num: u64, r_den: u64) -> Result<BTreeMap<u64, i64>> {
    let mut out = BTreeMap::new();
    for (p, e) in factorize(r_num)? {
        out.insert(p, e as i64);
    }
    for (p, e) in factorize(r_den)? {
        out.insert(p, -(e as i64));
    }
    Ok(out)
}

/// Least `m >= 1` with `exp(2π m / α) = r^{m v / u}` rational; `None` for a
/// generic float.
pub fn minimal_rational_exponent(alpha: &ExactAlpha) -> Result<Option<u64>> {
    match *alpha {
        ExactAlpha::Generic(_) => Ok(None),
        ExactAlpha::Exact { u, v, r_num, r_den } => {
            let g = rational_exponents(r_num, r_den)?
                .values()
                .fold(0u64, |acc, e| acc.gcd(&e.unsigned_abs()));
            let u = u.unsigned_abs();
            Ok(Some(u / u.gcd(&(v * g))))
        }
    }
}

/// `exp(2π m*/α) = Π_{p ∈ A} p^{k_p}` together with the least prime of `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathologyData {
    pub m_star: u64,
    pub support: Vec<u64>,
    pub exponents: BTreeMap<u64, i64>,
    pub p_star: u64,
    pub k_pstar: i64,
}

pub fn pathology_summary(alpha: &ExactAlpha) -> Result<Option<PathologyData>> {
    let Some(m_star) = minimal_rational_exponent(alpha)? else {
        return Ok(None);
    };
    let ExactAlpha::Exact { u, v, r_num, r_den } = *alpha else {
        unreachable!("generic alpha has no m*");
    };
    let scale = m_star as i64 * v as i64;
    let exponents: BTreeMap<u64, i64> = rational_exponents(r_num, r_den)?
        .into_iter()
        .map(|(p, e)| {
            let k = e * scale;
            debug_assert_eq!(k % u, 0);
            (p, k / u)
        })
        .collect();
    let support: Vec<u64> = exponents.keys().copied().collect();
    let p_star = support[0];
    Ok(Some(PathologyData {
        m_star,
        k_pstar: exponents[&p_star],
        support,
        exponents,
        p_star,
    }))
}

/// `lcm |k_{p*}|` over the supplied pathologies; 1 for none.
pub fn q_star(pathologies: &[PathologyData]) -> u64 {
    pathologies
        .iter()
        .fold(1u64, |acc, p| acc.lcm(&p.k_pstar.unsigned_abs()))
}

/// `f*(s) = Π_{p ∈ A} (1 − χ(p) p^{-s}) f(s)`, checked to be non-vanishing on
/// the grid of `rect`.
pub fn adjust_target(
    f: &TargetFunction,
    chi: &DirichletCharacter,
    primes: &[u64],
    rect: &CompactRect,
    params: &EvalParams,
) -> Result<TargetFunction> {
    if primes.is_empty() {
        return Ok(f.clone());
    }
    let extra = EulerAdjustment {
        chi: chi.clone(),
        primes: primes.to_vec(),
    };
    for s in rect.points() {
        for &p in primes {
            let single = EulerAdjustment {
                chi: chi.clone(),
                primes: vec![p],
            };
            if single.factor(s).norm() < 1e-12 {
                return Err(Error::DegenerateTarget(format!(
                    "factor at p = {p} vanishes at s = {s}"
                )));
            }
        }
    }
    let mut out = f.clone();
    out.adjustment = match out.adjustment.take() {
        None => Some(extra),
        Some(mut adj) if adj.chi == *chi => {
            adj.primes.extend_from_slice(primes);
            Some(adj)
        }
        Some(_) => {
            return Err(Error::domain(
                "target is already adjusted for a different character",
            ))
        }
    };
    out.check_nonvanishing(rect, params)?;
    Ok(out)
}
