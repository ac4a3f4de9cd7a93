//! Uniform distribution mod 1 of `ω(t) = (γ_j(t) log p / 2π)_{j,p}`: Weyl
//! sums, continuous Weyl averages, and the one-dimensional star discrepancy.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, pow_mod};
use crate::error::{Error, Result};
use crate::parallel::map_ordered;
use crate::shifts::{pathology_summary, Coefficient, ExactAlpha, PathologyData, ShiftFamily};

/// Default pass threshold on `|S|`.
pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Largest phase change (in cycles) allowed per quadrature sub-step.
const PHASE_PER_STEP: f64 = 0.05;
/// Node budget for a continuous Weyl average.
pub const MAX_QUAD_NODES: u64 = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceComponent {
    pub family: ShiftFamily,
    pub prime: u64,
}

/// The components of `ω`, together with primes excluded per family label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    components: Vec<SequenceComponent>,
    mode: Mode,
    exclusions: BTreeMap<String, Vec<u64>>,
}

impl SequenceSpec {
    pub fn new(
        components: Vec<SequenceComponent>,
        mode: Mode,
        exclusions: BTreeMap<String, Vec<u64>>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("sequence needs at least one component"));
        }
        for c in &components {
            if !is_prime(c.prime) {
                return Err(Error::domain(format!("{} is not prime", c.prime)));
            }
            if mode == Mode::Discrete
                && exclusions
                    .get(&c.family.label)
                    .is_some_and(|ex| ex.contains(&c.prime))
            {
                return Err(Error::domain(format!(
                    "prime {} is excluded for family {:?}",
                    c.prime, c.family.label
                )));
            }
        }
        Ok(Self {
            components,
            mode,
            exclusions,
        })
    }

    /// Every (family, prime) pair, family-major.
    pub fn grid(families: &[ShiftFamily], primes: &[u64], mode: Mode) -> Result<Self> {
        let components = families
            .iter()
            .flat_map(|f| {
                primes.iter().map(move |&p| SequenceComponent {
                    family: f.clone(),
                    prime: p,
                })
            })
            .collect();
        Self::new(components, mode, BTreeMap::new())
    }

    /// Like [`grid`](Self::grid), but in discrete mode drops `p*` for every
    /// polynomial family with an exact `α` and records it as excluded.
    pub fn grid_excluding_pathologies(families: &[ShiftFamily], primes: &[u64], mode: Mode) -> Result<Self> {
        let mut exclusions = BTreeMap::new();
        if mode == Mode::Discrete {
            for f in families.iter().filter(|f| f.is_polynomial()) {
                if let Some(p) = pathology_summary(&f.alpha)? {
                    exclusions.insert(f.label.clone(), vec![p.p_star]);
                }
            }
        }
        let components = families
            .iter()
            .flat_map(|f| {
                let ex = exclusions.get(&f.label).cloned().unwrap_or_default();
                primes
                    .iter()
                    .filter(move |p| !ex.contains(p))
                    .map(move |&p| SequenceComponent {
                        family: f.clone(),
                        prime: p,
                    })
            })
            .collect();
        Self::new(components, mode, exclusions)
    }

    pub fn components(&self) -> &[SequenceComponent] {
        &self.components
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn exclusions(&self) -> &BTreeMap<String, Vec<u64>> {
        &self.exclusions
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    fn check_harmonic(&self, h: &[i64]) -> Result<()> {
        if h.len() != self.dim() {
            return Err(Error::domain(format!(
                "harmonic has {} entries, sequence has {} components",
                h.len(),
                self.dim()
            )));
        }
        if h.iter().all(|&x| x == 0) {
            return Err(Error::domain("the zero harmonic is trivial"));
        }
        Ok(())
    }
}

/// `⟨h, ω(t)⟩` split into exactly rational terms and float terms.
struct Phase<'a> {
    /// `(num, den, a)`: contributes `num · k^a / den` mod 1 at integer `k`.
    exact: Vec<(u64, u64, u64)>,
    /// `(h · α log p / 2π, family)` for every term, used off the integers.
    real: Vec<(f64, &'a ShiftFamily)>,
    /// Indices into `real` that have no exact counterpart.
    inexact: Vec<usize>,
}

impl<'a> Phase<'a> {
    fn new(spec: &'a SequenceSpec, h: &[i64]) -> Self {
        let mut exact = Vec::new();
        let mut real = Vec::new();
        let mut inexact = Vec::new();
        for (c, &hc) in spec.components.iter().zip(h) {
            if hc == 0 {
                continue;
            }
            let coef = c.family.alpha.coefficient(c.prime);
            let idx = real.len();
            real.push((hc as f64 * coef.as_f64(), &c.family));
            match coef {
                Coefficient::Rational { num, den } if c.family.is_polynomial() => {
                    let den_i = den as i128;
                    let n = ((hc as i128 * num as i128) % den_i + den_i) % den_i;
                    exact.push((n as u64, den as u64, c.family.a.round() as u64));
                }
                _ => inexact.push(idx),
            }
        }
        Self { exact, real, inexact }
    }

    /// Fractional part of the phase at an integer point.
    fn at_integer(&self, k: u64) -> f64 {
        let mut acc = 0.0;
        for &(num, den, a) in &self.exact {
            let r = crate::arith::mul_mod(num, pow_mod(k % den, a, den), den);
            acc += r as f64 / den as f64;
        }
        for &i in &self.inexact {
            let (c, f) = self.real[i];
            acc += frac(c * f.shape(k as f64));
        }
        frac(acc)
    }

    /// Fractional part of the phase at a real point.
    fn at_real(&self, t: f64) -> f64 {
        frac(self.real.iter().map(|&(c, f)| frac(c * f.shape(t))).sum())
    }

    /// Phase derivative in cycles per unit time.
    fn derivative(&self, t: f64) -> f64 {
        self.real
            .iter()
            .map(|&(c, f)| c * f.derivative(t) / f.alpha.value())
            .sum()
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `e(x) = exp(2πi x)` for `x ∈ [0, 1)`, exact at `x = 0`.
fn e(x: f64) -> Complex64 {
    if x == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, TAU * x)
    }
}

/// `(1/(N-1)) Σ_{k=2}^{N} e(⟨h, ω(k)⟩)`.
pub fn weyl_sum_discrete(spec: &SequenceSpec, h: &[i64], n: u64) -> Result<Complex64> {
    spec.check_harmonic(h)?;
    if n < 2 {
        return Err(Error::domain("Weyl sums need N >= 2"));
    }
    let phase = Phase::new(spec, h);
    let sum: Complex64 = (2..=n).map(|k| e(phase.at_integer(k))).sum();
    Ok(sum / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylIntegral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes: u64,
}

/// `(1/(T-2)) ∫_2^T e(⟨h, ω(t)⟩) dt` by panelwise Simpson with Richardson
/// correction. Panels shrink so the phase moves at most 0.05 cycles per panel.
pub fn weyl_integral_continuous(
    spec: &SequenceSpec,
    h: &[i64],
    t_max: f64,
    quad_step: f64,
) -> Result<WeylIntegral> {
    spec.check_harmonic(h)?;
    if !(t_max >= 10.0) {
        return Err(Error::domain("continuous Weyl averages need T >= 10"));
    }
    if !(quad_step > 0.0 && quad_step <= 0.1) {
        return Err(Error::domain("quad_step must lie in (0, 0.1]"));
    }
    let phase = Phase::new(spec, h);
    let f = |t: f64| e(phase.at_real(t));

    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut nodes = 0u64;
    let mut t0 = 2.0;
    let mut f0 = f(t0);
    while t0 < t_max {
        let probe = (t0 + quad_step).min(t_max);
        let d = phase.derivative(t0).abs().max(phase.derivative(probe).abs());
        let mut width = quad_step;
        if d * width > PHASE_PER_STEP {
            width = PHASE_PER_STEP / d;
        }
        let remaining_nodes = 4.0 * (t_max - t0) / width;
        if nodes as f64 + remaining_nodes > MAX_QUAD_NODES as f64 {
            return Err(Error::Accuracy {
                at: t0,
                phase_change: d * quad_step,
                suggested: PHASE_PER_STEP / d,
            });
        }
        let t1 = (t0 + width).min(t_max);
        let w = t1 - t0;
        let fq1 = f(t0 + 0.25 * w);
        let fm = f(t0 + 0.5 * w);
        let fq3 = f(t0 + 0.75 * w);
        let f1 = f(t1);
        let coarse = (f0 + fm * 4.0 + f1) * (w / 6.0);
        let fine = (f0 + fq1 * 4.0 + fm * 2.0 + fq3 * 4.0 + f1) * (w / 12.0);
        total += fine + (fine - coarse) / 15.0;
        err += (fine - coarse).norm() / 15.0;
        nodes += 4;
        t0 = t1;
        f0 = f1;
    }
    let len = t_max - 2.0;
    Ok(WeylIntegral {
        value: total / len,
        error_estimate: err / len,
        nodes,
    })
}

/// Star discrepancy of points reduced mod 1, by the sorted-points formula.
pub fn discrepancy_star_1d(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain("discrepancy of an empty point set"));
    }
    let mut xs: Vec<f64> = points.iter().map(|&x| frac(x)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            // residuals with a single rounding each
            (-n.mul_add(x, -(i + 1.0))).max(n.mul_add(x, -i))
        })
        .fold(0.0, f64::max);
    Ok(worst / n)
}

/// Star discrepancy of the rational points `a_i / den` reduced mod 1, in
/// exact integer arithmetic. The result is the exact value rounded once
/// whenever its reduced numerator and denominator are below 2^53.
pub fn discrepancy_star_rational(numerators: &[u64], den: u64) -> Result<f64> {
    if numerators.is_empty() {
        return Err(Error::domain("discrepancy of an empty point set"));
    }
    if den == 0 {
        return Err(Error::domain("zero denominator"));
    }
    let mut xs: Vec<i128> = numerators.iter().map(|&a| (a % den) as i128).collect();
    xs.sort_unstable();
    let (n, d) = (xs.len() as i128, den as i128);
    // every term shares the denominator n·d
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let i = i as i128;
            ((i + 1) * d - a * n).max(a * n - i * d)
        })
        .max()
        .unwrap_or(0);
    let whole = n * d;
    let g = num_integer::gcd(worst, whole).max(1);
    Ok((worst / g) as f64 / (whole / g) as f64)
}

/// Nonzero harmonics in `[-m, m]^dim` whose first nonzero entry is positive
/// (`|S(-h)| = |S(h)|`), in lexicographic order.
pub fn harmonics_up_to(dim: usize, max_abs: i64) -> Vec<Vec<i64>> {
    let side = (2 * max_abs + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut h = vec![0i64; dim];
        for slot in h.iter_mut().rev() {
            *slot = (code % side) as i64 - max_abs;
            code /= side;
        }
        if h.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) {
            out.push(h);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extent {
    /// Sum over `k = 2..=N`.
    Discrete(u64),
    /// Average over `[2, T]` with the given quadrature step.
    Continuous { t: f64, quad_step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylEntry {
    pub h: Vec<i64>,
    pub modulus: f64,
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdVerdict {
    pub pass: bool,
    pub threshold: f64,
    pub failing: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPathology {
    pub label: String,
    pub data: PathologyData,
}

/// Exact-arithmetic view of the independence conditions for linear
/// families with exact `α`. `None` means undecided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    /// `{α_j log p / 2π} ∪ {1}` independent over `Q`.
    pub with_one: Option<bool>,
    /// `{α_j log p / 2π}` independent over `Q`.
    pub without_one: Option<bool>,
    pub pathologies: Vec<LabeledPathology>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UDReport {
    pub weyl: Vec<WeylEntry>,
    pub discrepancy_1d: Option<f64>,
    pub verdict: UdVerdict,
    pub hypothesis_check: Option<HypothesisCheck>,
}

pub fn ud_report(
    spec: &SequenceSpec,
    harmonics: &[Vec<i64>],
    extent: Extent,
    threshold: f64,
) -> Result<UDReport> {
    if harmonics.is_empty() {
        return Err(Error::domain("no harmonics to test"));
    }
    for h in harmonics {
        spec.check_harmonic(h)?;
    }
    let (moduli, ext): (Vec<Result<f64>>, f64) = match (extent, spec.mode) {
        (Extent::Discrete(n), Mode::Discrete) => (
            map_ordered(harmonics, |h| weyl_sum_discrete(spec, h, n).map(|s| s.norm())),
            n as f64,
        ),
        (Extent::Continuous { t, quad_step }, Mode::Continuous) => (
            map_ordered(harmonics, |h| {
                weyl_integral_continuous(spec, h, t, quad_step).map(|w| w.value.norm())
            }),
            t,
        ),
        _ => return Err(Error::domain("extent does not match the sequence mode")),
    };
    let mut weyl = Vec::with_capacity(harmonics.len());
    let mut failing = Vec::new();
    for (h, m) in harmonics.iter().zip(moduli) {
        let modulus = m?.min(1.0);
        if !(modulus < threshold) {
            failing.push(h.clone());
        }
        weyl.push(WeylEntry {
            h: h.clone(),
            modulus,
            extent: ext,
        });
    }
    let discrepancy_1d = match (extent, spec.dim()) {
        (Extent::Discrete(n), 1) => {
            let phase = Phase::new(spec, &[1]);
            let pts: Vec<f64> = (2..=n).map(|k| phase.at_integer(k)).collect();
            Some(discrepancy_star_1d(&pts)?)
        }
        _ => None,
    };
    Ok(UDReport {
        weyl,
        discrepancy_1d,
        verdict: UdVerdict {
            pass: failing.is_empty(),
            threshold,
            failing,
        },
        hypothesis_check: hypothesis_check(spec)?,
    })
}

/// Applies only when every family is linear (`a = 1, b = 0`) with exact `α`.
/// With exact `α = 2πu/(v log r)`, `Σ_p e_p (α log p/2π) = u/v`, so the
/// condition with 1 always fails. Without 1 it fails when two families have
/// multiplicatively dependent `r`; a single family is always independent.
pub fn hypothesis_check(spec: &SequenceSpec) -> Result<Option<HypothesisCheck>> {
    let mut families: Vec<&ShiftFamily> = Vec::new();
    for c in &spec.components {
        if !families.contains(&&c.family) {
            families.push(&c.family);
        }
    }
    let linear = families
        .iter()
        .all(|f| (f.a - 1.0).abs() < crate::shifts::INTEGER_TOL && f.b == 0.0);
    let exact = families
        .iter()
        .all(|f| matches!(f.alpha, ExactAlpha::Exact { .. }));
    if !linear || !exact {
        return Ok(None);
    }
    let mut pathologies = Vec::new();
    let mut vectors = Vec::new();
    for f in &families {
        let data = pathology_summary(&f.alpha)?.expect("exact alpha has m*");
        vectors.push(data.exponents.clone());
        pathologies.push(LabeledPathology {
            label: f.label.clone(),
            data,
        });
    }
    let without_one = if families.len() == 1 {
        Some(true)
    } else {
        let dependent = (0..vectors.len())
            .any(|i| (i + 1..vectors.len()).any(|j| proportional(&vectors[i], &vectors[j])));
        if dependent {
            Some(false)
        } else {
            None
        }
    };
    Ok(Some(HypothesisCheck {
        with_one: Some(false),
        without_one,
        pathologies,
    }))
}

/// Rational proportionality of two exponent vectors (multiplicative
/// dependence of the underlying rationals).
fn proportional(x: &BTreeMap<u64, i64>, y: &BTreeMap<u64, i64>) -> bool {
    if x.keys().ne(y.keys()) {
        return false;
    }
    let (&p, &x0) = x.iter().next().expect("r != 1");
    let y0 = y[&p];
    x.iter()
        .all(|(q, &xq)| xq as i128 * y0 as i128 == y[q] as i128 * x0 as i128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shifts::ExactAlpha;
    use rand::{Rng, SeedableRng};

    fn linear_with_coefficient(c: f64, p: u64, a: f64) -> ShiftFamily {
        // α log p / 2π = c
        let alpha = ExactAlpha::generic(c * TAU / (p as f64).ln()).unwrap();
        ShiftFamily::new(alpha, a, 0.0, format!("c{c}")).unwrap()
    }

    fn single(f: ShiftFamily, p: u64, mode: Mode) -> SequenceSpec {
        SequenceSpec::grid(&[f], &[p], mode).unwrap()
    }

    fn geometric(beta: f64, n: u64) -> f64 {
        // |Σ_{k=2}^{N} e(kβ)| / (N-1)
        let m = (n - 1) as f64;
        ((std::f64::consts::PI * m * beta).sin() / (std::f64::consts::PI * beta).sin()).abs() / m
    }

    #[test]
    fn weyl_sum_matches_geometric_series() {
        let beta = 2f64.sqrt();
        let spec = single(linear_with_coefficient(beta, 3, 1.0), 3, Mode::Discrete);
        let s = weyl_sum_discrete(&spec, &[1], 10_000).unwrap();
        assert!((s.norm() - geometric(beta, 10_000)).abs() < 1e-6);
        assert!(s.norm() < 3e-3);
        let s3 = weyl_sum_discrete(&spec, &[3], 5000).unwrap();
        assert!((s3.norm() - geometric(3.0 * beta, 5000)).abs() < 1e-6);
    }

    #[test]
    fn trivial_sums() {
        let spec = single(linear_with_coefficient(0.5, 2, 1.0), 2, Mode::Discrete);
        let s = weyl_sum_discrete(&spec, &[2], 1000).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(weyl_sum_discrete(&spec, &[0], 10).is_err());
        assert!(weyl_sum_discrete(&spec, &[1, 1], 10).is_err());
    }

    #[test]
    fn pathological_sum_is_exactly_one() {
        let alpha = ExactAlpha::exact(1, 1, 2, 1).unwrap();
        let f = ShiftFamily::new(alpha, 2.0, 0.0, "sq").unwrap();
        let spec = single(f, 2, Mode::Discrete);
        assert_eq!(
            weyl_sum_discrete(&spec, &[1], 100_000).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let report = ud_report(&spec, &[vec![1]], Extent::Discrete(1000), DEFAULT_THRESHOLD).unwrap();
        assert!(!report.verdict.pass);
        assert_eq!(report.verdict.failing, vec![vec![1]]);
    }

    #[test]
    fn exclusions_drop_the_least_prime() {
        let alpha = ExactAlpha::exact(1, 1, 2, 1).unwrap();
        let f = ShiftFamily::new(alpha, 1.0, 0.0, "lin").unwrap();
        let spec =
            SequenceSpec::grid_excluding_pathologies(std::slice::from_ref(&f), &[2, 3, 5], Mode::Discrete)
                .unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(spec.exclusions()["lin"], vec![2]);
        let bad = SequenceSpec::new(
            vec![SequenceComponent { family: f, prime: 2 }],
            Mode::Discrete,
            spec.exclusions().clone(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn continuous_matches_closed_form() {
        let c = 0.3;
        let spec = single(linear_with_coefficient(c, 5, 1.0), 5, Mode::Continuous);
        let t = 1000.0;
        let w = weyl_integral_continuous(&spec, &[1], t, 0.1).unwrap();
        let e = |x: f64| Complex64::from_polar(1.0, TAU * x);
        let exact = (e(c * t) - e(2.0 * c)) / (Complex64::new(0.0, TAU * c) * (t - 2.0));
        assert!((w.value - exact).norm() < 1e-6, "{} vs {}", w.value, exact);
        assert!(w.error_estimate < 1e-6);
    }

    #[test]
    fn cancelling_components_give_one() {
        let f = linear_with_coefficient(0.37, 2, 1.5);
        let spec = SequenceSpec::new(
            vec![
                SequenceComponent {
                    family: f.clone(),
                    prime: 2,
                },
                SequenceComponent { family: f, prime: 2 },
            ],
            Mode::Continuous,
            BTreeMap::new(),
        )
        .unwrap();
        let w = weyl_integral_continuous(&spec, &[1, -1], 50.0, 0.1).unwrap();
        assert!((w.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn square_root_curve_decays() {
        let f = ShiftFamily::new(ExactAlpha::generic(1.0).unwrap(), 0.5, 0.0, "sqrt").unwrap();
        let spec = single(f, 2, Mode::Continuous);
        let mut last = f64::INFINITY;
        for t in [1e3, 1e4, 1e5] {
            let w = weyl_integral_continuous(&spec, &[1], t, 0.1).unwrap();
            assert!(w.value.norm() < last);
            last = w.value.norm();
        }
        assert!(last < 0.02);
    }

    #[test]
    fn fast_phase_refines_or_reports() {
        let f = ShiftFamily::new(ExactAlpha::generic(1.0).unwrap(), 2.0, 0.0, "sq").unwrap();
        let spec = single(f.clone(), 2, Mode::Continuous);
        let w = weyl_integral_continuous(&spec, &[1], 300.0, 0.1).unwrap();
        assert!(w.value.norm() < 0.05);
        let huge = single(
            ShiftFamily::new(ExactAlpha::generic(1e6).unwrap(), 2.0, 0.0, "sq").unwrap(),
            2,
            Mode::Continuous,
        );
        assert!(matches!(
            weyl_integral_continuous(&huge, &[1], 1e4, 0.1),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn discrepancy_examples() {
        // k/N is representable for N = 2^j, so equality is exact there
        for j in 0..=17 {
            let n = 1usize << j;
            let pts: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            assert_eq!(discrepancy_star_1d(&pts).unwrap(), 1.0 / n as f64, "N = {n}");
        }
        // otherwise the inputs carry one rounding each
        for n in [3usize, 7, 10, 100, 997, 1000, 100_000] {
            let pts: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            let d = discrepancy_star_1d(&pts).unwrap();
            assert!((d * n as f64 - 1.0).abs() < 1e-15 * n as f64, "N = {n}: {d}");
        }
        assert_eq!(discrepancy_star_1d(&[0.5; 10]).unwrap(), 0.5);
        for n in [1u64, 3, 7, 10, 100, 997, 1000, 100_000] {
            let ks: Vec<u64> = (0..n).collect();
            assert_eq!(
                discrepancy_star_rational(&ks, n).unwrap(),
                1.0 / n as f64,
                "N = {n}"
            );
        }
        // {1/4, 3/4}: worst gap 1/4 at both ends
        assert_eq!(discrepancy_star_rational(&[1, 3], 4).unwrap(), 0.25);
        assert_eq!(discrepancy_star_rational(&[7, 7], 7).unwrap(), 1.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let pts: Vec<f64> = (1..=1000).map(|k| k as f64 * phi).collect();
        assert!(discrepancy_star_1d(&pts).unwrap() < 0.01);
        assert!(discrepancy_star_1d(&[]).is_err());
    }

    #[test]
    fn harmonic_enumeration() {
        let hs = harmonics_up_to(2, 2);
        assert_eq!(hs.len(), (25 - 1) / 2);
        assert!(hs.contains(&vec![0, 1]) && hs.contains(&vec![1, -2]));
        assert!(!hs.contains(&vec![-1, 0]));
    }

    #[test]
    fn square_root_family_passes() {
        let f = ShiftFamily::new(ExactAlpha::generic(1.0).unwrap(), 0.5, 0.0, "sqrt").unwrap();
        let spec = SequenceSpec::grid(&[f], &[2, 3], Mode::Discrete).unwrap();
        let hs = harmonics_up_to(2, 2);
        let report = ud_report(&spec, &hs, Extent::Discrete(100_000), DEFAULT_THRESHOLD).unwrap();
        assert!(report.verdict.pass, "{:?}", report.weyl);
        assert!(report.weyl.iter().all(|w| w.modulus <= 1.0));
        assert!(report.hypothesis_check.is_none());
        assert!(ud_report(&spec, &[], Extent::Discrete(10), 0.05).is_err());
    }

    #[test]
    fn hypothesis_check_for_linear_exact_families() {
        let lin = |u, r, label: &str| {
            ShiftFamily::new(ExactAlpha::exact(u, 1, r, 1).unwrap(), 1.0, 0.0, label).unwrap()
        };
        let spec = SequenceSpec::grid(&[lin(1, 2, "a")], &[3], Mode::Discrete).unwrap();
        let hc = hypothesis_check(&spec).unwrap().unwrap();
        assert_eq!((hc.with_one, hc.without_one), (Some(false), Some(true)));
        let spec = SequenceSpec::grid(&[lin(1, 2, "a"), lin(3, 8, "b")], &[3], Mode::Discrete).unwrap();
        let hc = hypothesis_check(&spec).unwrap().unwrap();
        assert_eq!(hc.without_one, Some(false));
        let spec = SequenceSpec::grid(&[lin(1, 2, "a"), lin(1, 3, "b")], &[5], Mode::Discrete).unwrap();
        assert_eq!(hypothesis_check(&spec).unwrap().unwrap().without_one, None);
    }

    #[test]
    fn koksma_cross_check() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let c: f64 = rng.gen_range(0.01..10.0);
            let a: f64 = rng.gen_range(0.2..1.8);
            let spec = single(linear_with_coefficient(c, 2, a), 2, Mode::Discrete);
            let n = 20_000;
            let s = weyl_sum_discrete(&spec, &[1], n).unwrap().norm();
            let report = ud_report(&spec, &[vec![1]], Extent::Discrete(n), 0.05).unwrap();
            let d = report.discrepancy_1d.unwrap();
            assert!(d >= 1.0 / (2.0 * (n - 1) as f64) && d <= 1.0);
            if d < 0.01 {
                assert!(s < TAU * 0.01 + 2.0 / n as f64);
            }
            assert!(s <= TAU * d + 1e-12);
        }
    }

    #[test]
    fn doubling_n_is_stable() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..5 {
            let a: f64 = rng.gen_range(0.3..0.9);
            let alpha = ExactAlpha::generic(rng.gen_range(0.5..3.0)).unwrap();
            let f = ShiftFamily::new(alpha, a, 0.0, "f").unwrap();
            let spec = SequenceSpec::grid(&[f], &[2, 3], Mode::Discrete).unwrap();
            let hs = harmonics_up_to(2, 1);
            let r1 = ud_report(&spec, &hs, Extent::Discrete(20_000), 0.05).unwrap();
            if !r1.verdict.pass {
                continue;
            }
            let r2 = ud_report(&spec, &hs, Extent::Discrete(40_000), 0.05).unwrap();
            let max = |r: &UDReport| r.weyl.iter().map(|w| w.modulus).fold(0.0, f64::max);
            assert!(max(&r2) <= 2.0 * max(&r1));
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn discrepancy_is_permutation_invariant(
            (xs, shuffled) in proptest::collection::vec(0.0f64..1.0, 1..200)
                .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
        ) {
            let d = discrepancy_star_1d(&xs).unwrap();
            let n = xs.len();
            prop_assert_eq!(discrepancy_star_1d(&shuffled).unwrap(), d);
            prop_assert!(d >= 1.0 / (2.0 * n as f64) - 1e-15 && d <= 1.0);
        }

        #[test]
        fn rational_discrepancy_agrees_with_float(
            nums in proptest::collection::vec(0u64..1000, 1..100),
        ) {
            let exact = discrepancy_star_rational(&nums, 1000).unwrap();
            let pts: Vec<f64> = nums.iter().map(|&a| a as f64 / 1000.0).collect();
            let float = discrepancy_star_1d(&pts).unwrap();
            prop_assert!((exact - float).abs() < 1e-12);
        }
    }
}
