//! Dirichlet L-values in the right half-plane via the Hurwitz decomposition
//! `L(s, chi) = q^{-s} Σ_a chi(a) ζ(s, a/q)` with an Euler–Maclaurin tail.
//!
//! The truncated part of all Hurwitz sums together is just the Dirichlet
//! series `Σ_{n <= Nq} chi(n) n^{-s}`, so a whole rectangular grid of points
//! can share the per-`n` work: `n^{-σ}` per column and `n^{-it}` per row.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

/// Largest `|Im(s)|` accepted by the evaluators. Cost grows linearly in it.
pub const HEIGHT_CAP: f64 = 1.0e5;

/// Bernoulli numbers `B_2, B_4, ..., B_32` as `(numerator, denominator)`.
const BERNOULLI: [(f64, f64); 16] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
    (-7709321041217.0, 510.0),
];

/// `B_{2j} / (2j)!` for `j = 1..=15`.
fn bernoulli_over_factorial(j: usize) -> f64 {
    let (num, den) = BERNOULLI[j - 1];
    let fact: f64 = (1..=2 * j).map(|k| k as f64).product();
    num / den / fact
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    /// Target absolute error.
    pub abs_tol: f64,
    /// Cap on the length of the Dirichlet-series part.
    pub max_terms: usize,
    /// Euler–Maclaurin order (even, `2..=30`).
    pub em_order: u32,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 20_000_000,
            em_order: 24,
        }
    }
}

impl EvalParams {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 1e-14) || !self.abs_tol.is_finite() {
            return Err(Error::domain(format!(
                "abs_tol must be >= 1e-14, got {}",
                self.abs_tol
            )));
        }
        if self.em_order < 2 || self.em_order > 30 || !self.em_order.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "em_order must be even in 2..=30, got {}",
                self.em_order
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::domain("max_terms must be positive"));
        }
        Ok(())
    }
}

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: Complex64,
    pub error_bound: f64,
}

fn rising_abs_ln(s: Complex64, count: usize) -> f64 {
    (0..count).map(|k| (s + k as f64).norm().ln()).sum()
}

/// Bound on the Euler–Maclaurin remainder after `m` Bernoulli terms for
/// `ζ(s, x)` truncated at `x`:
/// `4 |(s)_{2m}| / (2π)^{2m} · x^{1-σ-2m} / (σ + 2m - 1)`.
fn em_remainder_bound(s: Complex64, x: f64, m: usize) -> f64 {
    let two_m = 2 * m as i32;
    let ln = 4f64.ln() + rising_abs_ln(s, 2 * m) - two_m as f64 * std::f64::consts::TAU.ln()
        + (1.0 - s.re - two_m as f64) * x.ln()
        - (s.re + two_m as f64 - 1.0).ln();
    ln.exp()
}

/// Smallest truncation `N` (in units of full periods) meeting `tol` at every
/// point; `points` are `(σ_min, |s|_max)`-style worst cases.
fn choose_truncation(worst: Complex64, x_offset: f64, m: usize, tol: f64, max_n: usize) -> Result<usize> {
    let bound = |n: usize| em_remainder_bound(worst, n as f64 + x_offset, m);
    // terms only decrease once x > |s + 2m| / 2π
    let mut n = (((worst.norm() + 2.0 * m as f64) / std::f64::consts::TAU).ceil() as usize).max(4);
    if n > max_n {
        return Err(Error::Precision {
            achieved: f64::INFINITY,
            requested: tol,
        });
    }
    while bound(n) > tol {
        if n >= max_n {
            return Err(Error::Precision {
                achieved: bound(max_n),
                requested: tol,
            });
        }
        n = (n + n / 4 + 1).min(max_n);
    }
    Ok(n)
}

/// `(e^z - 1) / z`, stable near 0.
fn expm1_over(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Euler–Maclaurin correction beyond the `x^{1-s}/(s-1)` term:
/// `x^{-s}/2 + Σ_j B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1}`.
fn em_correction(s: Complex64, x: f64, m: usize) -> Complex64 {
    let x_pow = (-s * x.ln()).exp();
    let mut acc = x_pow / 2.0;
    let mut poch = s;
    let mut xp = x_pow / x;
    let inv_x2 = 1.0 / (x * x);
    for j in 1..=m {
        acc += poch * xp * bernoulli_over_factorial(j);
        let k = 2.0 * j as f64;
        poch *= (s + (k - 1.0)) * (s + k);
        xp *= inv_x2;
    }
    acc
}

fn check_height(t: f64) -> Result<()> {
    if !(t.abs() <= HEIGHT_CAP) {
        return Err(Error::HeightCap {
            height: t,
            cap: HEIGHT_CAP,
        });
    }
    Ok(())
}

/// Hurwitz zeta `ζ(s, a)` for `Re(s) > 0`, `s != 1`, `a ∈ (0, 1]`.
pub fn hurwitz_zeta(s: Complex64, a: f64, params: &EvalParams) -> Result<Evaluated> {
    params.validate()?;
    if !(s.re > 0.0) {
        return Err(Error::domain("hurwitz_zeta needs Re(s) > 0"));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::domain(format!("Hurwitz parameter a = {a} outside (0, 1]")));
    }
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { re: 1.0, im: 0.0 });
    }
    check_height(s.im)?;
    let m = params.em_order as usize / 2;
    let n = choose_truncation(s, a, m, params.abs_tol, params.max_terms)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += (-s * (k as f64 + a).ln()).exp();
    }
    let x = n as f64 + a;
    acc += (-s * x.ln()).exp() * x / (s - 1.0);
    acc += em_correction(s, x, m);
    Ok(Evaluated {
        value: acc,
        error_bound: em_remainder_bound(s, x, m) + (n as f64).sqrt() * f64::EPSILON,
    })
}

/// `L(s, chi)` at every point `σ_i + i t_j` of a grid; output is row-major in
/// `σ` (`out[i * heights.len() + j]`).
pub fn l_on_grid(
    chi: &DirichletCharacter,
    sigmas: &[f64],
    heights: &[f64],
    params: &EvalParams,
) -> Result<Vec<Evaluated>> {
    params.validate()?;
    if sigmas.is_empty() || heights.is_empty() {
        return Ok(Vec::new());
    }
    let sigma_min = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(sigma_min > 0.0) {
        return Err(Error::domain("L evaluation needs Re(s) > 0"));
    }
    let t_abs_max = heights.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    check_height(t_abs_max)?;
    let sigma_max = sigmas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let q = chi.modulus();
    let principal = chi.is_principal();
    if principal {
        for &sg in sigmas {
            for &t in heights {
                if sg == 1.0 && t == 0.0 {
                    return Err(Error::Pole { re: 1.0, im: 0.0 });
                }
            }
        }
    }
    let m = params.em_order as usize / 2;
    // Worst case for the remainder bound: smallest σ with the largest |s|.
    let worst = Complex64::new(
        sigma_min,
        (sigma_max.powi(2) + t_abs_max.powi(2)).sqrt().max(t_abs_max),
    );
    let per_residue_tol = params.abs_tol / q as f64;
    let n_periods = choose_truncation(
        worst,
        1.0 / q as f64,
        m,
        per_residue_tol,
        (params.max_terms / q as usize).max(1),
    )?;

    let chi_table: Vec<Complex64> = (0..q as i64).map(|r| chi.value(r)).collect();
    let units: Vec<u64> = (1..=q)
        .filter(|&a| chi_table[(a % q) as usize].norm() > 0.0)
        .collect();

    let (nx, ny) = (sigmas.len(), heights.len());
    let mut acc = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut amp = vec![0.0f64; nx];
    let mut phase = vec![Complex64::new(0.0, 0.0); ny];
    let last = n_periods as u64 * q;
    for n in 1..=last {
        let c = chi_table[(n % q) as usize];
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let ln_n = (n as f64).ln();
        for (a, &sg) in amp.iter_mut().zip(sigmas) {
            *a = (-sg * ln_n).exp();
        }
        for (p, &t) in phase.iter_mut().zip(heights) {
            let (sin, cos) = (t * ln_n).sin_cos();
            *p = c * Complex64::new(cos, -sin);
        }
        for (row, &a) in acc.chunks_exact_mut(ny).zip(&amp) {
            for (cell, &p) in row.iter_mut().zip(&phase) {
                *cell += p * a;
            }
        }
    }

    let big_n = n_periods as f64;
    let ln_q = (q as f64).ln();
    let mut out = Vec::with_capacity(nx * ny);
    for (i, &sg) in sigmas.iter().enumerate() {
        for (j, &t) in heights.iter().enumerate() {
            let s = Complex64::new(sg, t);
            let mut tail = Complex64::new(0.0, 0.0);
            let mut pole_part = Complex64::new(0.0, 0.0);
            for &a in &units {
                let c = chi_table[(a % q) as usize];
                let x = big_n + a as f64 / q as f64;
                tail += c * em_correction(s, x, m);
                if principal {
                    pole_part += c * (-s * x.ln()).exp() * x / (s - 1.0);
                } else {
                    // Σ chi(a) = 0 lets the 1/(s-1) terms be written without
                    // the removable singularity at s = 1.
                    let ell = (a as f64 / (q as f64 * big_n)).ln_1p();
                    pole_part -= c * ell * expm1_over((1.0 - s) * ell);
                }
            }
            if !principal {
                pole_part *= ((1.0 - s) * big_n.ln()).exp();
            }
            let q_pow = (-s * ln_q).exp();
            let value = acc[i * ny + j] + q_pow * (tail + pole_part);
            let bound = q_pow.norm() * units.len() as f64 * em_remainder_bound(s, big_n + 1.0 / q as f64, m);
            out.push(Evaluated {
                value,
                error_bound: bound + ((last as f64).sqrt() * f64::EPSILON),
            });
        }
    }
    Ok(out)
}

/// `L(s, chi)` for `Re(s) > 1/2`.
pub fn l_value(s: Complex64, chi: &DirichletCharacter, params: &EvalParams) -> Result<Evaluated> {
    if !(s.re > 0.5) {
        return Err(Error::domain(format!("l_value needs Re(s) > 1/2, got {}", s.re)));
    }
    l_value_unchecked(s, chi, params)
}

/// As [`l_value`] but only requiring `Re(s) > 0`.
pub(crate) fn l_value_unchecked(
    s: Complex64,
    chi: &DirichletCharacter,
    params: &EvalParams,
) -> Result<Evaluated> {
    l_on_grid(chi, &[s.re], &[s.im], params).map(|v| v[0])
}

/// Radius of the Cauchy contour used by [`l_derivative`].
pub const DERIVATIVE_RADIUS: f64 = 0.01;
/// Trapezoid nodes on the contour.
pub const DERIVATIVE_NODES: usize = 64;

/// `f'(s)` from the Cauchy integral over `|z - s| = radius`, trapezoid rule
/// with `nodes` points. Converges geometrically for analytic `f`.
pub fn cauchy_derivative<F>(f: F, s: Complex64, radius: f64, nodes: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / nodes as f64);
        acc += f(s + w * radius)? / w;
    }
    Ok(acc / (nodes as f64 * radius))
}

/// `L'(s, chi)` via the Cauchy formula on a circle of radius 0.01.
pub fn l_derivative(s: Complex64, chi: &DirichletCharacter, params: &EvalParams) -> Result<Evaluated> {
    params.validate()?;
    if !(s.re - DERIVATIVE_RADIUS > 0.5) {
        return Err(Error::domain("derivative contour must stay in Re(s) > 1/2"));
    }
    if chi.is_principal() && (s - 1.0).norm() <= 2.0 * DERIVATIVE_RADIUS {
        return Err(Error::domain(format!(
            "pole at s = 1 lies within {} of the derivative contour",
            DERIVATIVE_RADIUS
        )));
    }
    // contour values are divided by the radius, so tighten accordingly
    let inner = EvalParams {
        abs_tol: (params.abs_tol * DERIVATIVE_RADIUS).max(1e-14),
        ..*params
    };
    let value = cauchy_derivative(
        |z| l_value_unchecked(z, chi, &inner).map(|e| e.value),
        s,
        DERIVATIVE_RADIUS,
        DERIVATIVE_NODES,
    )?;
    Ok(Evaluated {
        value,
        error_bound: inner.abs_tol / DERIVATIVE_RADIUS,
    })
}
