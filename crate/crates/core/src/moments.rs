//! Mean squares of `L − L_{p≤y}`: Carlson tails from a sieve, empirical
//! averages along vertical lines and shift curves, and Gallagher's
//! inequality.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::euler_product::{truncated_euler_product, PrimeSet, Twist};
use crate::lfunc::{l_on_grid, EvalParams, HEIGHT_CAP};
use crate::parallel::map_ordered;
use crate::primes::SpfTable;
use crate::shifts::ShiftFamily;

/// Largest range accepted by the empirical mean squares.
pub const MAX_RANGE: f64 = 5000.0;
/// Default cutoff for predicted tails.
pub const DEFAULT_CUTOFF: u64 = 1_000_000;
/// Node budget for the shifted mean square.
pub const MAX_NODES: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlsonTail {
    pub value: f64,
    /// Bound on `Σ_{n > cutoff} n^{-2σ}`.
    pub remainder_bound: f64,
}

/// `Σ_{y ≤ n ≤ cutoff} c_n |χ(n)|² n^{-2σ}` where `c_n = 1` iff `n` has a prime
/// factor `≥ y`, plus an integral bound for `n > cutoff`.
pub fn carlson_tail(sigma: f64, chi: &DirichletCharacter, y: u64, cutoff: u64) -> Result<CarlsonTail> {
    if !(sigma > 0.5) {
        return Err(Error::domain(format!(
            "the mean square diverges for sigma = {sigma} <= 1/2"
        )));
    }
    let remainder_bound = (cutoff as f64).powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0);
    if y > cutoff {
        return Ok(CarlsonTail {
            value: 0.0,
            remainder_bound,
        });
    }
    if cutoff < 10 * y {
        return Err(Error::domain(format!(
            "cutoff {cutoff} must be at least 10·y = {}",
            10 * y
        )));
    }
    let spf = SpfTable::new(cutoff)?;
    let q = chi.modulus();
    let mut value = 0.0;
    for n in y.max(2)..=cutoff {
        if q > 1 && num_integer::gcd(n, q) != 1 {
            continue;
        }
        if spf.largest_factor(n) >= y {
            value += (n as f64).powf(-2.0 * sigma);
        }
    }
    Ok(CarlsonTail {
        value,
        remainder_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareReport {
    pub sigma: f64,
    pub t: f64,
    pub y: u64,
    /// `T` for vertical lines, `X` for shift curves.
    pub range: f64,
    pub nodes: usize,
    pub empirical: f64,
    pub predicted_tail: f64,
    pub ratio: f64,
    /// `X^{1-a} (log X)^{-b}` for shift curves, 1 for vertical lines.
    pub substitution_factor: f64,
}

/// `|L(s_k) − L_{p≤y}(s_k)|²` at the points `σ + i heights[k]`.
fn squared_gaps(
    sigma: f64,
    heights: &[f64],
    chi: &DirichletCharacter,
    y: u64,
    params: &EvalParams,
) -> Result<Vec<f64>> {
    let primes = PrimeSet::up_to(y)?;
    let l = l_on_grid(chi, &[sigma], heights, params)?;
    let twist = Twist::zero();
    let pairs: Vec<(f64, Complex64)> = heights.iter().copied().zip(l.iter().map(|e| e.value)).collect();
    map_ordered(&pairs, |&(t, lv)| {
        truncated_euler_product(Complex64::new(sigma, t), chi, &primes, &twist).map(|p| (lv - p).norm_sqr())
    })
    .into_iter()
    .collect()
}

/// Predicted tail for `L − L_{p≤y}`: the coefficients that survive have a
/// prime factor `> y`, i.e. `≥ y + 1`.
fn predicted_tail(sigma: f64, chi: &DirichletCharacter, y: u64) -> Result<f64> {
    let cutoff = DEFAULT_CUTOFF.max(10 * (y + 1));
    let tail = carlson_tail(sigma, chi, y + 1, cutoff)?;
    Ok(tail.value + tail.remainder_bound)
}

fn ratio(empirical: f64, predicted: f64) -> f64 {
    if predicted > 0.0 {
        empirical / predicted
    } else {
        f64::INFINITY
    }
}

/// `(1/T) ∫_1^T |L(s0+iτ) − L_{p≤y}(s0+iτ)|² dτ` by the trapezoid rule.
pub fn empirical_mean_square_vertical(
    s0: Complex64,
    chi: &DirichletCharacter,
    y: u64,
    t_max: f64,
    step: f64,
    params: &EvalParams,
) -> Result<MeanSquareReport> {
    if !(s0.re > 0.6) {
        return Err(Error::domain("vertical mean squares need Re(s0) > 0.6"));
    }
    if !(t_max > 1.0 && t_max <= MAX_RANGE) {
        return Err(Error::domain(format!("T must lie in (1, {MAX_RANGE}]")));
    }
    if !(step > 0.0 && step <= 0.25) {
        return Err(Error::domain("step must lie in (0, 0.25]"));
    }
    let n = ((t_max - 1.0) / step).ceil() as usize;
    let h = (t_max - 1.0) / n as f64;
    let heights: Vec<f64> = (0..=n).map(|k| s0.im + 1.0 + k as f64 * h).collect();
    let gaps = squared_gaps(s0.re, &heights, chi, y, params)?;
    let empirical = trapezoid(&gaps, h) / t_max;
    let predicted = predicted_tail(s0.re, chi, y)?;
    Ok(MeanSquareReport {
        sigma: s0.re,
        t: s0.im,
        y,
        range: t_max,
        nodes: gaps.len(),
        empirical,
        predicted_tail: predicted,
        ratio: ratio(empirical, predicted),
        substitution_factor: 1.0,
    })
}

/// `(1/X) ∫_X^{2X} |L(s0+iγ(τ)) − L_{p≤y}(s0+iγ(τ))|² dτ`, with the τ-step
/// chosen so that `γ` moves at most 0.25 between nodes.
pub fn empirical_mean_square_shifted(
    s0: Complex64,
    chi: &DirichletCharacter,
    y: u64,
    family: &ShiftFamily,
    x: f64,
    params: &EvalParams,
) -> Result<MeanSquareReport> {
    if !(family.a > 0.0) {
        return Err(Error::domain("shifted mean squares need a > 0"));
    }
    if !(2.0..=MAX_RANGE).contains(&x) {
        return Err(Error::domain(format!("X must lie in [2, {MAX_RANGE}]")));
    }
    if !(s0.re > 0.6) {
        return Err(Error::domain("shifted mean squares need Re(s0) > 0.6"));
    }
    let top = (s0.im + family.eval(2.0 * x)?)
        .abs()
        .max((s0.im + family.eval(x)?).abs());
    if top > HEIGHT_CAP {
        return Err(Error::HeightCap {
            height: top,
            cap: HEIGHT_CAP,
        });
    }
    let slope = family.derivative(x).abs().max(family.derivative(2.0 * x).abs());
    let h_max = if slope > 0.0 {
        (0.25 / slope).min(0.25)
    } else {
        0.25
    };
    let n = (x / h_max).ceil() as usize;
    if n > MAX_NODES {
        return Err(Error::domain(format!(
            "shift curve needs {n} nodes, more than {MAX_NODES}"
        )));
    }
    let h = x / n as f64;
    let heights: Vec<f64> = (0..=n)
        .map(|k| family.eval(x + k as f64 * h).map(|g| s0.im + g))
        .collect::<Result<_>>()?;
    let gaps = squared_gaps(s0.re, &heights, chi, y, params)?;
    let empirical = trapezoid(&gaps, h) / x;
    let predicted = predicted_tail(s0.re, chi, y)?;
    Ok(MeanSquareReport {
        sigma: s0.re,
        t: s0.im,
        y,
        range: x,
        nodes: gaps.len(),
        empirical,
        predicted_tail: predicted,
        ratio: ratio(empirical, predicted),
        substitution_factor: x.powf(1.0 - family.a) * x.ln().powf(-family.b),
    })
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1]))
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagherReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `lhs / rhs`, 0 when both vanish.
    pub slack_ratio: f64,
}

/// Relative slack allowed for quadrature error.
pub const GALLAGHER_SLACK: f64 = 1e-6;

/// Checks `Σ_{t∈A} N_δ(t)^{-1} |f(t)|² ≤ (1/δ)∫|f|² + (∫|f|² ∫|f'|²)^{1/2}` on
/// `[t0, t0 + len]`, where `N_δ(x) = #{t ∈ A : |t − x| < δ}`. Without `df`
/// the derivative is taken by central differences.
pub fn gallagher_check(
    f: &dyn Fn(f64) -> Complex64,
    df: Option<&dyn Fn(f64) -> Complex64>,
    t0: f64,
    len: f64,
    points: &[f64],
    delta: f64,
) -> Result<GallagherReport> {
    if !(delta > 0.0 && len >= delta) {
        return Err(Error::domain("Gallagher's inequality needs T >= δ > 0"));
    }
    let (lo, hi) = (t0 + delta / 2.0, t0 + len - delta / 2.0);
    if let Some(&bad) = points.iter().find(|&&t| !(t >= lo && t <= hi)) {
        return Err(Error::domain(format!("point {bad} outside [{lo}, {hi}]")));
    }
    let lhs: f64 = points
        .iter()
        .map(|&t| {
            let count = points.iter().filter(|&&u| (u - t).abs() < delta).count();
            f(t).norm_sqr() / count as f64
        })
        .sum();
    let fd = |t: f64| {
        let h = 1e-6 * t.abs().max(1.0);
        (f(t + h) - f(t - h)) / (2.0 * h)
    };
    let deriv = |t: f64| match df {
        Some(d) => d(t),
        None => fd(t),
    };
    let n = ((len / 0.002).ceil() as usize).max(2000);
    let int_f = simpson(|t| f(t).norm_sqr(), t0, t0 + len, n);
    let int_df = simpson(|t| deriv(t).norm_sqr(), t0, t0 + len, n);
    let rhs = int_f / delta + (int_f * int_df).sqrt();
    Ok(GallagherReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + GALLAGHER_SLACK),
        slack_ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}
