//! Browser demo: `|L(s, χ)|` heatmaps, the distance of shifted `L` from a
//! target along `τ`, and Weyl sums of shift sequences. The plain functions are
//! the tested API; the `wasm_bindgen` exports wrap them for `www/index.html`
//! and take `u32` integers so JavaScript can pass plain numbers.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use univlab::approx::{sup_distance, CompactRect, TargetFunction};
use univlab::characters::{CharacterGroup, DirichletCharacter};
use univlab::equidist::{weyl_sum_discrete, Mode, SequenceSpec};
use univlab::lfunc::{l_on_grid, EvalParams};
use univlab::shifts::{pathology_summary, ExactAlpha, ShiftFamily};

/// Upper limits that keep one call interactive.
pub const MAX_CELLS: usize = 200 * 200;
pub const MAX_CURVE_SAMPLES: usize = 4000;
pub const MAX_WEYL_N: u64 = 200_000;

fn character(modulus: u64, index: u64) -> Result<DirichletCharacter, String> {
    let group = CharacterGroup::new(modulus).map_err(|e| e.to_string())?;
    group.character(index).map_err(|e| e.to_string())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `|L(σ + it, χ)|` on an `nx × ny` grid, row-major in `t` from the top
/// (`out[row * nx + col]`, row 0 at `t_hi`).
#[allow(clippy::too_many_arguments)]
pub fn l_abs_grid(
    modulus: u64,
    index: u64,
    sigma_lo: f64,
    sigma_hi: f64,
    t_lo: f64,
    t_hi: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, String> {
    if nx == 0 || ny == 0 || nx * ny > MAX_CELLS {
        return Err(format!("grid must have between 1 and {MAX_CELLS} cells"));
    }
    let chi = character(modulus, index)?;
    let sigmas = linspace(sigma_lo, sigma_hi, nx);
    let heights = linspace(t_hi, t_lo, ny);
    let values =
        l_on_grid(&chi, &sigmas, &heights, &EvalParams::with_tol(1e-8)).map_err(|e| e.to_string())?;
    // l_on_grid is row-major in σ
    let mut out = vec![0.0; nx * ny];
    for (i, _) in sigmas.iter().enumerate() {
        for (j, _) in heights.iter().enumerate() {
            out[j * nx + i] = values[i * ny + j].value.norm();
        }
    }
    Ok(out)
}

/// `max_K |L(s + iτ, χ) − 1|` for `τ = 2, 2 + step, …, ≤ tau_max`, with `K` the
/// rectangle `[0.75, 0.85] × [−0.1, 0.1]` on a `grid × grid` lattice.
/// Returns interleaved `(τ, distance)` pairs.
pub fn distance_curve(
    modulus: u64,
    index: u64,
    tau_max: f64,
    step: f64,
    grid: usize,
) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && tau_max >= 2.0) {
        return Err("need step > 0 and tau_max >= 2".into());
    }
    let samples = ((tau_max - 2.0) / step).floor() as usize + 1;
    if samples > MAX_CURVE_SAMPLES {
        return Err(format!("at most {MAX_CURVE_SAMPLES} samples"));
    }
    let chi = character(modulus, index)?;
    let rect = CompactRect::new([0.75, 0.85], [-0.1, 0.1], [grid, grid]).map_err(|e| e.to_string())?;
    let target = TargetFunction::constant(Complex64::new(1.0, 0.0));
    let params = EvalParams::with_tol(1e-8);
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let tau = 2.0 + k as f64 * step;
        let d = sup_distance(&chi, tau, &rect, &target, &params).map_err(|e| e.to_string())?;
        out.push(tau);
        out.push(d.value);
    }
    Ok(out)
}

/// `|S_N|` for the discrete Weyl sum of `{α k^a (log k)^b log p / 2π}` at
/// `points` values of `N` spaced geometrically in `[10, n_max]`. Returns
/// interleaved `(N, |S_N|)` pairs.
pub fn weyl_curve(
    alpha: &str,
    a: f64,
    b: f64,
    p: u64,
    n_max: u64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(10..=MAX_WEYL_N).contains(&n_max) || points < 2 {
        return Err(format!("need 10 <= N <= {MAX_WEYL_N} and at least 2 points"));
    }
    let alpha: ExactAlpha = alpha.parse().map_err(|e: univlab::error::Error| e.to_string())?;
    let family = ShiftFamily::new(alpha, a, b, "f").map_err(|e| e.to_string())?;
    let spec = SequenceSpec::grid(&[family], &[p], Mode::Discrete).map_err(|e| e.to_string())?;
    let ratio = (n_max as f64 / 10.0).ln();
    let mut ns: Vec<u64> = (0..points)
        .map(|i| (10.0 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as u64)
        .collect();
    ns.dedup();
    let mut out = Vec::with_capacity(2 * ns.len());
    for n in ns {
        let s = weyl_sum_discrete(&spec, &[1], n).map_err(|e| e.to_string())?;
        out.push(n as f64);
        out.push(s.norm());
    }
    Ok(out)
}

/// One-line pathology summary of `α`.
pub fn pathology_text(alpha: &str) -> Result<String, String> {
    let alpha: ExactAlpha = alpha.parse().map_err(|e: univlab::error::Error| e.to_string())?;
    let data = pathology_summary(&alpha).map_err(|e| e.to_string())?;
    Ok(match data {
        None => format!(
            "alpha = {:.6}: no rational power, not pathological",
            alpha.value()
        ),
        Some(d) => {
            let exps: Vec<String> = d.exponents.iter().map(|(p, k)| format!("{p}^{k}")).collect();
            format!(
                "alpha = {:.6}: m* = {}, A = {:?}, exponents {}, p* = {}, k_p* = {}",
                alpha.value(),
                d.m_star,
                d.support,
                exps.join(" "),
                d.p_star,
                d.k_pstar
            )
        }
    })
}

#[wasm_bindgen(js_name = lAbsGrid)]
#[allow(clippy::too_many_arguments)]
pub fn l_abs_grid_js(
    modulus: u32,
    index: u32,
    sigma_lo: f64,
    sigma_hi: f64,
    t_lo: f64,
    t_hi: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, JsValue> {
    l_abs_grid(
        modulus.into(),
        index.into(),
        sigma_lo,
        sigma_hi,
        t_lo,
        t_hi,
        nx,
        ny,
    )
    .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = distanceCurve)]
pub fn distance_curve_js(
    modulus: u32,
    index: u32,
    tau_max: f64,
    step: f64,
    grid: usize,
) -> Result<Vec<f64>, JsValue> {
    distance_curve(modulus.into(), index.into(), tau_max, step, grid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = weylCurve)]
pub fn weyl_curve_js(
    alpha: &str,
    a: f64,
    b: f64,
    p: u32,
    n_max: u32,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    weyl_curve(alpha, a, b, p.into(), n_max.into(), points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = pathologyText)]
pub fn pathology_text_js(alpha: &str) -> Result<String, JsValue> {
    pathology_text(alpha).map_err(|e| JsValue::from_str(&e))
}
