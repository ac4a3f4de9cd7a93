//! Sup-norm distances on rectangles, constructive fitting of twisted Euler
//! products, and density scans over continuous and discrete shifts.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::characters::DirichletCharacter;
use crate::equidist::{LabeledPathology, Mode};
use crate::error::{Error, Result};
use crate::euler_product::{log_one_minus, reduce_unit, truncated_euler_product, PrimeSet, Twist};
use crate::lfunc::{l_on_grid, EvalParams, HEIGHT_CAP};
use crate::parallel::{map_ordered, with_workers};
use crate::shifts::{adjust_target, classify_family_set, pathology_summary, q_star, ShiftFamily};

/// Default samples per side of the rectangle.
pub const DEFAULT_GRID: usize = 32;
/// Largest prime set accepted by [`fit_finite_product`].
pub const MAX_FIT_PRIMES: usize = 500;
/// Largest number of simultaneous families in a scan.
pub const MAX_SCAN_FAMILIES: usize = 4;
/// Samples handed to one parallel task.
const CHUNK: usize = 64;

/// A closed rectangle `[σ1, σ2] × [t1, t2]` with `1/2 < σ1 ≤ σ2 < 1`, sampled
/// on an `nx × ny` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactRect {
    pub sigma_range: [f64; 2],
    pub t_range: [f64; 2],
    pub grid: [usize; 2],
}

impl CompactRect {
    pub fn new(sigma_range: [f64; 2], t_range: [f64; 2], grid: [usize; 2]) -> Result<Self> {
        let rect = Self {
            sigma_range,
            t_range,
            grid,
        };
        rect.validate()?;
        Ok(rect)
    }

    pub fn validate(&self) -> Result<()> {
        let [s1, s2] = self.sigma_range;
        let [t1, t2] = self.t_range;
        if !(0.5 < s1 && s1 <= s2 && s2 < 1.0) {
            return Err(Error::domain(format!(
                "sigma range [{s1}, {s2}] must satisfy 1/2 < s1 <= s2 < 1"
            )));
        }
        if !(t1.is_finite() && t2.is_finite() && t1 <= t2) {
            return Err(Error::domain(format!("invalid t range [{t1}, {t2}]")));
        }
        if self.grid[0] < 2 || self.grid[1] < 2 {
            return Err(Error::domain("grid needs at least 2 samples per side"));
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        linspace(self.sigma_range[0], self.sigma_range[1], self.grid[0])
    }

    pub fn heights(&self) -> Vec<f64> {
        linspace(self.t_range[0], self.t_range[1], self.grid[1])
    }

    /// Grid points, row-major in `σ`.
    pub fn points(&self) -> Vec<Complex64> {
        let hs = self.heights();
        self.sigmas()
            .iter()
            .flat_map(|&s| hs.iter().map(move |&t| Complex64::new(s, t)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.grid[0] * self.grid[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn max_abs_height(&self) -> f64 {
        self.t_range[0].abs().max(self.t_range[1].abs())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub enum TargetBase {
    /// `Σ c_k s^k`.
    Polynomial(Vec<Complex64>),
    /// `L(s + i·shift, χ)`.
    ShiftedL { chi: DirichletCharacter, shift: f64 },
    /// `L_M(s, θ; χ)`.
    EulerProduct {
        chi: DirichletCharacter,
        primes: PrimeSet,
        twist: Twist,
    },
}

/// Multiplier `Π_{p} (1 − χ(p) p^{-s})`.
#[derive(Debug, Clone)]
pub struct EulerAdjustment {
    pub chi: DirichletCharacter,
    pub primes: Vec<u64>,
}

impl EulerAdjustment {
    pub fn factor(&self, s: Complex64) -> Complex64 {
        removed_factors(&self.chi, &self.primes, s)
    }
}

/// `Π_{p} (1 − χ(p) p^{-s})`.
fn removed_factors(chi: &DirichletCharacter, primes: &[u64], s: Complex64) -> Complex64 {
    primes
        .iter()
        .map(|&p| 1.0 - chi.value(p as i64) * (-s * (p as f64).ln()).exp())
        .product()
}

#[derive(Debug, Clone)]
pub struct TargetFunction {
    pub base: TargetBase,
    pub adjustment: Option<EulerAdjustment>,
}

impl TargetFunction {
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        Self {
            base: TargetBase::Polynomial(coeffs),
            adjustment: None,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn shifted_l(chi: DirichletCharacter, shift: f64) -> Self {
        Self {
            base: TargetBase::ShiftedL { chi, shift },
            adjustment: None,
        }
    }

    pub fn euler_product(chi: DirichletCharacter, primes: PrimeSet, twist: Twist) -> Self {
        Self {
            base: TargetBase::EulerProduct { chi, primes, twist },
            adjustment: None,
        }
    }

    /// Values on `sigmas × heights`, row-major in `σ`.
    pub fn eval_grid(&self, sigmas: &[f64], heights: &[f64], params: &EvalParams) -> Result<Vec<Complex64>> {
        let points = || {
            sigmas
                .iter()
                .flat_map(|&s| heights.iter().map(move |&t| Complex64::new(s, t)))
        };
        let mut values: Vec<Complex64> = match &self.base {
            TargetBase::Polynomial(c) => points().map(|s| horner(c, s)).collect(),
            TargetBase::ShiftedL { chi, shift } => {
                let hs: Vec<f64> = heights.iter().map(|t| t + shift).collect();
                l_on_grid(chi, sigmas, &hs, params)?
                    .into_iter()
                    .map(|e| e.value)
                    .collect()
            }
            TargetBase::EulerProduct { chi, primes, twist } => points()
                .map(|s| truncated_euler_product(s, chi, primes, twist))
                .collect::<Result<_>>()?,
        };
        if let Some(adj) = &self.adjustment {
            for (v, s) in values.iter_mut().zip(points()) {
                *v *= adj.factor(s);
            }
        }
        Ok(values)
    }

    pub fn eval(&self, s: Complex64, params: &EvalParams) -> Result<Complex64> {
        Ok(self.eval_grid(&[s.re], &[s.im], params)?[0])
    }

    /// `min |f|` over the grid of `rect`.
    pub fn nonvanishing_margin(&self, rect: &CompactRect, params: &EvalParams) -> Result<f64> {
        Ok(self
            .eval_grid(&rect.sigmas(), &rect.heights(), params)?
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min))
    }

    /// Fails unless `f` stays away from 0 on the grid.
    pub fn check_nonvanishing(&self, rect: &CompactRect, params: &EvalParams) -> Result<f64> {
        let margin = self.nonvanishing_margin(rect, params)?;
        if !(margin > 1e-12) {
            return Err(Error::DegenerateTarget(format!(
                "target vanishes on the grid (min |f| = {margin:e})"
            )));
        }
        Ok(margin)
    }
}

fn horner(coeffs: &[Complex64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupDistance {
    /// Maximum over the grid and the refinement pass.
    pub value: f64,
    pub grid_max: f64,
    pub argmax: Complex64,
}

/// What is compared against the target: `L(s + i·shift)` times
/// `Π_{p ∈ removed} (1 − χ(p) p^{-s-i·shift})`.
struct Side<'a> {
    chi: &'a DirichletCharacter,
    removed: &'a [u64],
}

impl Side<'_> {
    fn values(
        &self,
        sigmas: &[f64],
        heights: &[f64],
        shift: f64,
        params: &EvalParams,
    ) -> Result<Vec<Complex64>> {
        let hs: Vec<f64> = heights.iter().map(|t| t + shift).collect();
        let mut out: Vec<Complex64> = l_on_grid(self.chi, sigmas, &hs, params)?
            .into_iter()
            .map(|e| e.value)
            .collect();
        if !self.removed.is_empty() {
            let ny = hs.len();
            for (k, v) in out.iter_mut().enumerate() {
                let w = Complex64::new(sigmas[k / ny], hs[k % ny]);
                *v *= removed_factors(self.chi, self.removed, w);
            }
        }
        Ok(out)
    }
}

fn check_shift_height(rect: &CompactRect, shift: f64) -> Result<()> {
    let top = rect.max_abs_height() + shift.abs();
    if !(top <= HEIGHT_CAP) {
        return Err(Error::HeightCap {
            height: top,
            cap: HEIGHT_CAP,
        });
    }
    Ok(())
}

/// `max_{s ∈ grid} |L(s + i·shift; χ) − f(s)|`, followed by a 3× subdivision
/// of the cells around the grid argmax.
pub fn sup_distance(
    chi: &DirichletCharacter,
    shift: f64,
    rect: &CompactRect,
    f: &TargetFunction,
    params: &EvalParams,
) -> Result<SupDistance> {
    rect.validate()?;
    check_shift_height(rect, shift)?;
    let fv = f.eval_grid(&rect.sigmas(), &rect.heights(), params)?;
    full_distance(&Side { chi, removed: &[] }, shift, rect, f, &fv, params)
}

fn full_distance(
    side: &Side,
    shift: f64,
    rect: &CompactRect,
    f: &TargetFunction,
    fv: &[Complex64],
    params: &EvalParams,
) -> Result<SupDistance> {
    let sig = rect.sigmas();
    let hts = rect.heights();
    let lv = side.values(&sig, &hts, shift, params)?;
    let ny = hts.len();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (k, (l, t)) in lv.iter().zip(fv).enumerate() {
        let d = (l - t).norm();
        if d > best {
            best = d;
            arg = k;
        }
    }
    let (i, j) = (arg / ny, arg % ny);
    let grid_max = best;
    let mut argmax = Complex64::new(sig[i], hts[j]);

    let window = |xs: &[f64], c: usize| {
        let lo = c.saturating_sub(1);
        let hi = (c + 1).min(xs.len() - 1);
        linspace(xs[lo], xs[hi], 3 * (hi - lo) + 1)
    };
    let (rs, rt) = (window(&sig, i), window(&hts, j));
    let lr = side.values(&rs, &rt, shift, params)?;
    let fr = f.eval_grid(&rs, &rt, params)?;
    for (k, (l, t)) in lr.iter().zip(&fr).enumerate() {
        let d = (l - t).norm();
        if d > best {
            best = d;
            argmax = Complex64::new(rs[k / rt.len()], rt[k % rt.len()]);
        }
    }
    Ok(SupDistance {
        value: best,
        grid_max,
        argmax,
    })
}

/// Either the exact distance, or a lower bound already at or above `eps`.
enum Probe {
    Exact(SupDistance),
    Above(f64),
}

/// Centre point, then a 3 × 3 subgrid, then the full grid; stops as soon as
/// a sampled value reaches `eps`.
fn probe(
    side: &Side,
    shift: f64,
    rect: &CompactRect,
    f: &TargetFunction,
    fv: &[Complex64],
    eps: f64,
    params: &EvalParams,
) -> Result<Probe> {
    let sig = rect.sigmas();
    let hts = rect.heights();
    let (nx, ny) = (sig.len(), hts.len());
    // a little headroom so rounding in partial evaluations never decides a hit
    let cut = eps * (1.0 + 1e-9) + 1e-12;
    let stages: [Vec<usize>; 2] = [vec![nx / 2], vec![0, nx / 2, nx - 1]];
    let stages_t: [Vec<usize>; 2] = [vec![ny / 2], vec![0, ny / 2, ny - 1]];
    let mut lower = 0.0f64;
    for (is, js) in stages.iter().zip(&stages_t) {
        let ss: Vec<f64> = is.iter().map(|&i| sig[i]).collect();
        let ts: Vec<f64> = js.iter().map(|&j| hts[j]).collect();
        let lv = side.values(&ss, &ts, shift, params)?;
        for (a, &i) in is.iter().enumerate() {
            for (b, &j) in js.iter().enumerate() {
                lower = lower.max((lv[a * js.len() + b] - fv[i * ny + j]).norm());
            }
        }
        if lower >= cut {
            return Ok(Probe::Above(lower));
        }
    }
    full_distance(side, shift, rect, f, fv, params).map(Probe::Exact)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitResult {
    pub twist: Twist,
    pub distance: f64,
    pub initial_distance: f64,
    /// Objective after each completed sweep.
    pub history: Vec<f64>,
    pub sweeps: usize,
    pub stagnated: bool,
}

/// Points per coordinate in the coarse scan before golden-section search.
const COARSE_SCAN: usize = 24;
const GOLDEN_TOL: f64 = 1e-13;
/// Levenberg-Marquardt iterations per sweep.
const LM_ITERS: usize = 25;
/// Phases of the first `START_LEAD_PRIMES` primes are seeded on a lattice of
/// `START_LATTICE` points each.
const START_LEAD_PRIMES: usize = 2;
const START_LATTICE: usize = 4;
/// Seed and cycled half-widths of the random phase jitter used after a
/// stalled sweep.
const RESTART_SEED: u64 = 0x5eed;
const RESTART_SPREADS: [f64; 3] = [0.1, 0.25, 0.5];

/// Coordinate descent over `θ_p ∈ [0, 1)` minimizing the grid sup of
/// `|L_M(s, θ; χ) − f(s)|`. Each coordinate gets a coarse scan followed by
/// golden-section search, and each sweep ends with a Levenberg-Marquardt
/// polish of the log-space least-squares residual. The descent is seeded
/// from several least-squares starts, and a sweep that makes no progress
/// sends the next one from a perturbed copy of the best twist. The best sup
/// objective is kept throughout, so the history never increases.
pub fn fit_finite_product(
    chi: &DirichletCharacter,
    primes: &PrimeSet,
    rect: &CompactRect,
    f: &TargetFunction,
    sweeps: usize,
    params: &EvalParams,
) -> Result<FitResult> {
    rect.validate()?;
    if primes.len() > MAX_FIT_PRIMES {
        return Err(Error::domain(format!(
            "at most {MAX_FIT_PRIMES} primes can be fitted"
        )));
    }
    f.check_nonvanishing(rect, params)?;
    let pts = rect.points();
    let fv = f.eval_grid(&rect.sigmas(), &rect.heights(), params)?;
    // z_p(s) = χ(p) p^{-s} on the grid
    let z: Vec<Vec<Complex64>> = primes
        .primes()
        .iter()
        .map(|&p| {
            let c = chi.value(p as i64);
            pts.iter().map(|&s| c * (-s * (p as f64).ln()).exp()).collect()
        })
        .collect();
    let mut theta = vec![0.0; primes.len()];
    let log_factor =
        |k: usize, th: f64, g: usize| -log_one_minus(z[k][g] * Complex64::from_polar(1.0, -TAU * th));
    let total_log = |theta: &[f64]| -> Vec<Complex64> {
        (0..pts.len())
            .map(|g| (0..theta.len()).map(|k| log_factor(k, theta[k], g)).sum())
            .collect()
    };
    let sup = |logs: &[Complex64]| {
        logs.iter()
            .zip(&fv)
            .map(|(l, t)| (l.exp() - t).norm())
            .fold(0.0, f64::max)
    };

    let log_f = unwrapped_log(&fv, rect.grid[0], rect.grid[1]);
    // residual in log space, up to one global multiple of 2πi
    let log_residual = |logs: &[Complex64]| -> Vec<Complex64> {
        let raw: Vec<Complex64> = logs.iter().zip(&log_f).map(|(l, t)| l - t).collect();
        let mean_im = raw.iter().map(|r| r.im).sum::<f64>() / raw.len() as f64;
        let shift = Complex64::new(0.0, TAU * (mean_im / TAU).round());
        raw.into_iter().map(|r| r - shift).collect()
    };
    let l2 = |logs: &[Complex64]| -> f64 { log_residual(logs).iter().map(|r| r.norm_sqr()).sum() };
    // Levenberg-Marquardt on the grid least-squares residual of log L_M
    // against log f; the result is
    // offered to the caller, who keeps it only if the sup objective drops.
    let least_squares = |start: &[f64]| -> (Vec<f64>, Vec<Complex64>) {
        let n = start.len();
        let mut theta = start.to_vec();
        let mut logs = total_log(&theta);
        let mut err = l2(&logs);
        if n == 0 {
            return (theta, logs);
        }
        let mut lambda = 1e-6;
        for _ in 0..LM_ITERS {
            // real-stacked Jacobian: rows (Re, Im) per grid point
            let mut jac = DMatrix::<f64>::zeros(2 * pts.len(), n);
            let mut res = DVector::<f64>::zeros(2 * pts.len());
            let r = log_residual(&logs);
            for g in 0..pts.len() {
                res[2 * g] = r[g].re;
                res[2 * g + 1] = r[g].im;
                for k in 0..n {
                    let w = z[k][g] * Complex64::from_polar(1.0, -TAU * theta[k]);
                    let d = Complex64::new(0.0, -TAU) * w / (1.0 - w);
                    jac[(2 * g, k)] = d.re;
                    jac[(2 * g + 1, k)] = d.im;
                }
            }
            let svd = jac.svd(true, true);
            let (Some(u), Some(vt)) = (&svd.u, &svd.v_t) else {
                break;
            };
            let smax = svd.singular_values.max();
            let ur = u.transpose() * &res;
            let mut improved = false;
            for _ in 0..12 {
                let damp = lambda * smax * smax;
                let scaled = DVector::from_iterator(
                    ur.len(),
                    ur.iter()
                        .zip(svd.singular_values.iter())
                        .map(|(c, &sv)| c * sv / (sv * sv + damp)),
                );
                let step = -(vt.transpose() * scaled);
                let cand: Vec<f64> = theta
                    .iter()
                    .zip(step.iter())
                    .map(|(t, d)| reduce_unit(t + d))
                    .collect();
                let cand_logs = total_log(&cand);
                let e = l2(&cand_logs);
                if e < err {
                    theta = cand;
                    logs = cand_logs;
                    err = e;
                    lambda = (lambda / 10.0).max(1e-18);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved || err == 0.0 {
                break;
            }
        }
        (theta, logs)
    };

    let mut logs = total_log(&theta);
    let initial = sup(&logs);
    let mut current = initial;
    // Seed the descent with the best least-squares polish among the
    // linearised solve and a lattice of phases for the smallest primes.
    let mut starts: Vec<Vec<f64>> = linearised_start(&z, &log_f).into_iter().collect();
    let lead = theta.len().min(START_LEAD_PRIMES);
    for cell in 0..START_LATTICE.pow(lead as u32) {
        let mut w = vec![0.0; theta.len()];
        let mut c = cell;
        for slot in w.iter_mut().take(lead) {
            *slot = (c % START_LATTICE) as f64 / START_LATTICE as f64;
            c /= START_LATTICE;
        }
        starts.push(w);
    }
    for start in starts {
        let (t, l) = least_squares(&start);
        let v = sup(&l);
        if v < current {
            theta = t;
            logs = l;
            current = v;
        }
    }
    let mut history = Vec::new();
    let mut stalled = false;
    let mut done = 0;
    let mut rng = StdRng::seed_from_u64(RESTART_SEED);
    let mut restarts = 0;
    for _ in 0..sweeps {
        if stalled && theta.is_empty() {
            break;
        }
        let before = current;
        // a stalled sweep restarts the next one from a perturbed best point
        // (a half-turn of one phase, cycling through the primes, alternating
        // with random jitter of every phase)
        let (mut work, mut wlogs, mut wval) = if stalled {
            let w: Vec<f64> = if restarts % 2 == 0 {
                let k = (restarts / 2) % theta.len();
                let mut w = theta.clone();
                w[k] = reduce_unit(w[k] + 0.5);
                w
            } else {
                let spread = RESTART_SPREADS[(restarts / 2) % RESTART_SPREADS.len()];
                theta
                    .iter()
                    .map(|t| reduce_unit(t + rng.gen_range(-spread..spread)))
                    .collect()
            };
            restarts += 1;
            let l = total_log(&w);
            let v = sup(&l);
            (w, l, v)
        } else {
            (theta.clone(), logs.clone(), current)
        };
        for k in 0..work.len() {
            // E(s) = exp(Σ_{q≠p} ℓ_q(s))
            let rest: Vec<Complex64> = (0..pts.len())
                .map(|g| (wlogs[g] - log_factor(k, work[k], g)).exp())
                .collect();
            let objective = |th: f64| {
                let w = Complex64::from_polar(1.0, -TAU * th);
                rest.iter()
                    .zip(&z[k])
                    .zip(&fv)
                    .map(|((e, zk), t)| (e / (1.0 - zk * w) - t).norm())
                    .fold(0.0, f64::max)
            };
            let (cand, val) = line_search(&objective, work[k]);
            if val < wval {
                work[k] = cand;
                for (g, l) in wlogs.iter_mut().enumerate() {
                    *l = rest[g].ln() + log_factor(k, cand, g);
                }
                wval = val;
            }
        }
        // re-accumulate so rounding cannot drift across sweeps
        wlogs = total_log(&work);
        wval = sup(&wlogs);
        let (t, l) = least_squares(&work);
        let v = sup(&l);
        if v < wval {
            work = t;
            wlogs = l;
            wval = v;
        }
        if wval < current {
            theta = work;
            logs = wlogs;
            current = wval;
        }
        history.push(current);
        done += 1;
        stalled = before - current <= 1e-15 * before;
        if current == 0.0 {
            break;
        }
    }
    let stagnated = stalled && current > 0.0;
    let twist = Twist::from_pairs(primes.primes().iter().copied().zip(theta));
    Ok(FitResult {
        twist,
        distance: current,
        initial_distance: initial,
        history,
        sweeps: done,
        stagnated,
    })
}

/// Initial phases from `Σ_p c_p z_p + Σ_p h(c_p z_p) ≈ log f` with
/// `h(w) = -log(1-w) - w`, solved for unconstrained `c_p` by fixed-point
/// iteration on the higher-order part; each global branch of `log f` within
/// a few turns is tried and the best residual wins.
fn linearised_start(z: &[Vec<Complex64>], log_f: &[Complex64]) -> Option<Vec<f64>> {
    let n = z.len();
    let g = log_f.len();
    if n == 0 {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(2 * g, 2 * n);
    for (k, zk) in z.iter().enumerate() {
        for (i, w) in zk.iter().enumerate() {
            a[(2 * i, 2 * k)] = w.re;
            a[(2 * i, 2 * k + 1)] = -w.im;
            a[(2 * i + 1, 2 * k)] = w.im;
            a[(2 * i + 1, 2 * k + 1)] = w.re;
        }
    }
    let svd = a.svd(true, true);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for m in -3i32..=3 {
        let target: Vec<Complex64> = log_f
            .iter()
            .map(|l| l + Complex64::new(0.0, TAU * m as f64))
            .collect();
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..30 {
            let mut rhs = DVector::<f64>::zeros(2 * g);
            for i in 0..g {
                let h: Complex64 = (0..n)
                    .map(|k| {
                        let w = c[k] * z[k][i];
                        -log_one_minus(w) - w
                    })
                    .sum();
                let r = target[i] - h;
                rhs[2 * i] = r.re;
                rhs[2 * i + 1] = r.im;
            }
            let x = svd.solve(&rhs, 1e-14).ok()?;
            // keep |c_p| below 1 so the logarithms stay defined on the grid
            c = (0..n)
                .map(|k| {
                    let v = Complex64::new(x[2 * k], x[2 * k + 1]);
                    if v.norm() > 1.0 {
                        v / v.norm()
                    } else {
                        v
                    }
                })
                .collect();
        }
        let phases: Vec<f64> = c.iter().map(|v| reduce_unit(-v.arg() / TAU)).collect();
        let resid: f64 = (0..g)
            .map(|i| {
                let model: Complex64 = (0..n)
                    .map(|k| -log_one_minus(z[k][i] * Complex64::from_polar(1.0, -TAU * phases[k])))
                    .sum();
                (model - target[i]).norm_sqr()
            })
            .sum();
        if best.as_ref().is_none_or(|(b, _)| resid < *b) {
            best = Some((resid, phases));
        }
    }
    best.map(|(_, p)| p)
}

/// `log f` on a row-major grid, with the imaginary part made continuous
/// along the first column and then along every row.
fn unwrapped_log(values: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = values.iter().map(|v| v.ln()).collect();
    let nearest =
        |prev: f64, cur: Complex64| Complex64::new(cur.re, cur.im - TAU * ((cur.im - prev) / TAU).round());
    for i in 1..nx {
        out[i * ny] = nearest(out[(i - 1) * ny].im, out[i * ny]);
    }
    for i in 0..nx {
        for j in 1..ny {
            out[i * ny + j] = nearest(out[i * ny + j - 1].im, out[i * ny + j]);
        }
    }
    out
}

/// Coarse scan of `[0, 1)` (plus the current point) followed by
/// golden-section search around the best sample.
fn line_search(objective: &dyn Fn(f64) -> f64, current: f64) -> (f64, f64) {
    let mut best = (current, objective(current));
    for i in 0..COARSE_SCAN {
        let th = i as f64 / COARSE_SCAN as f64;
        let v = objective(th);
        if v < best.1 {
            best = (th, v);
        }
    }
    let h = 1.0 / COARSE_SCAN as f64;
    let (x, v) = golden_section(objective, best.0 - h, best.0 + h);
    if v < best.1 {
        best = (x.rem_euclid(1.0), v);
    }
    best
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// One (family, character, target) triple of a scan.
#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub family: ShiftFamily,
    pub chi: DirichletCharacter,
    pub target: TargetFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub epsilon: f64,
    pub params: EvalParams,
    /// Polish each continuous hit by golden-section search in `τ`.
    pub refine_hits: bool,
    /// Keep `(shift, distance)` for every sample.
    pub record_samples: bool,
    /// Scan even if the family set is not admissible.
    pub allow_rejected: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl ScanOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            params: EvalParams::with_tol(1e-10),
            refine_hits: false,
            record_samples: false,
            allow_rejected: false,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedHit {
    pub shift: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    /// `τ` (continuous) or `k` (discrete).
    pub shift: f64,
    pub distances: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refined: Option<RefinedHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub shift: f64,
    /// Max over families; a lower bound when `exact` is false.
    pub distance: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathologyRecord {
    pub families: Vec<LabeledPathology>,
    pub q_star: u64,
    /// Number of `k ∈ [2, N/q*]` scanned at `τ = q*·k`.
    pub adjusted_considered: u64,
    /// The `k` with `τ = q*·k` that hit against the adjusted targets.
    pub adjusted_hits: Vec<u64>,
    pub adjusted_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub mode: Mode,
    pub epsilon: f64,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub samples: usize,
    pub labels: Vec<String>,
    pub hits: Vec<Hit>,
    pub hit_measure: f64,
    pub density: f64,
    /// Largest distance among hits, per family.
    pub worst_hit_distances: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pathology: Option<PathologyRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sample_log: Vec<Sample>,
}

/// Prepared per-entry data: what `L` is compared to, and the target grid.
struct Prepared<'a> {
    entry: &'a ScanEntry,
    target: TargetFunction,
    removed: Vec<u64>,
    fv: Vec<Complex64>,
}

enum Outcome {
    Hit(Vec<f64>),
    Miss(f64),
}

fn evaluate(
    prepared: &[Prepared],
    tau: f64,
    rect: &CompactRect,
    eps: f64,
    params: &EvalParams,
) -> Result<Outcome> {
    let mut distances = Vec::with_capacity(prepared.len());
    for p in prepared {
        let shift = p.entry.family.eval(tau)?;
        let side = Side {
            chi: &p.entry.chi,
            removed: &p.removed,
        };
        match probe(&side, shift, rect, &p.target, &p.fv, eps, params)? {
            Probe::Above(lb) => return Ok(Outcome::Miss(lb)),
            Probe::Exact(d) if d.value >= eps => return Ok(Outcome::Miss(d.value)),
            Probe::Exact(d) => distances.push(d.value),
        }
    }
    Ok(Outcome::Hit(distances))
}

fn prepare<'a>(
    entries: &'a [ScanEntry],
    rect: &CompactRect,
    params: &EvalParams,
    adjusted: Option<&[Option<Vec<u64>>]>,
) -> Result<Vec<Prepared<'a>>> {
    entries
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let removed = adjusted.and_then(|a| a[j].clone()).unwrap_or_default();
            let target = if removed.is_empty() {
                e.target.clone()
            } else {
                adjust_target(&e.target, &e.chi, &removed, rect, params)?
            };
            let fv = target.eval_grid(&rect.sigmas(), &rect.heights(), params)?;
            Ok(Prepared {
                entry: e,
                target,
                removed,
                fv,
            })
        })
        .collect()
}

fn check_entries(entries: &[ScanEntry], rect: &CompactRect, opts: &ScanOptions, tau_max: f64) -> Result<()> {
    rect.validate()?;
    opts.params.validate()?;
    if entries.is_empty() {
        return Err(Error::domain("scan needs at least one family"));
    }
    if entries.len() > MAX_SCAN_FAMILIES {
        return Err(Error::domain(format!(
            "at most {MAX_SCAN_FAMILIES} families per scan"
        )));
    }
    if !(opts.epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let families: Vec<ShiftFamily> = entries.iter().map(|e| e.family.clone()).collect();
    let verdict = classify_family_set(&families)?;
    if !verdict.is_accepted() && !opts.allow_rejected {
        return Err(Error::Rejected(
            serde_json::to_string(&verdict).unwrap_or_default(),
        ));
    }
    for e in entries {
        for tau in [2.0, tau_max] {
            check_shift_height(rect, e.family.eval(tau)?)?;
        }
    }
    Ok(())
}

/// Evaluates every sample in parallel chunks; results come back in order.
fn run_samples(
    prepared: &[Prepared],
    taus: &[f64],
    rect: &CompactRect,
    opts: &ScanOptions,
) -> Result<Vec<Outcome>> {
    let chunks: Vec<&[f64]> = taus.chunks(CHUNK).collect();
    let results = with_workers(opts.workers, || {
        map_ordered(&chunks, |chunk| {
            chunk
                .iter()
                .map(|&tau| evaluate(prepared, tau, rect, opts.epsilon, &opts.params))
                .collect::<Result<Vec<_>>>()
        })
    });
    let mut out = Vec::with_capacity(taus.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn collect_hits(taus: &[f64], outcomes: &[Outcome], record: bool) -> (Vec<Hit>, Vec<Sample>) {
    let mut hits = Vec::new();
    let mut samples = Vec::new();
    for (&tau, o) in taus.iter().zip(outcomes) {
        match o {
            Outcome::Hit(d) => {
                if record {
                    samples.push(Sample {
                        shift: tau,
                        distance: d.iter().cloned().fold(0.0, f64::max),
                        exact: true,
                    });
                }
                hits.push(Hit {
                    shift: tau,
                    distances: d.clone(),
                    refined: None,
                });
            }
            Outcome::Miss(lb) => {
                if record {
                    samples.push(Sample {
                        shift: tau,
                        distance: *lb,
                        exact: false,
                    });
                }
            }
        }
    }
    (hits, samples)
}

fn worst(hits: &[Hit], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| hits.iter().map(|h| h.distances[j]).fold(0.0, f64::max))
        .collect()
}

/// Samples `τ_i = 2 + i·step` for `i < round((T − 2)/step)`; a sample is a hit
/// when every family is within `ε` of its target on `K`.
pub fn scan_continuous(
    entries: &[ScanEntry],
    rect: &CompactRect,
    opts: &ScanOptions,
    t_max: f64,
    step: f64,
) -> Result<ScanReport> {
    if !(step > 0.0 && t_max > 2.0) {
        return Err(Error::domain("continuous scans need T > 2 and step > 0"));
    }
    check_entries(entries, rect, opts, t_max)?;
    let n = ((t_max - 2.0) / step).round().max(1.0) as usize;
    let taus: Vec<f64> = (0..n).map(|i| 2.0 + i as f64 * step).collect();
    let prepared = prepare(entries, rect, &opts.params, None)?;
    let outcomes = run_samples(&prepared, &taus, rect, opts)?;
    let (mut hits, sample_log) = collect_hits(&taus, &outcomes, opts.record_samples);
    if opts.refine_hits {
        let refined: Vec<Result<RefinedHit>> = with_workers(opts.workers, || {
            map_ordered(&hits, |h| refine_hit(&prepared, h, rect, step, &opts.params))
        });
        for (h, r) in hits.iter_mut().zip(refined) {
            h.refined = Some(r?);
        }
    }
    Ok(ScanReport {
        mode: Mode::Continuous,
        epsilon: opts.epsilon,
        start: 2.0,
        end: t_max,
        step,
        samples: n,
        labels: entries.iter().map(|e| e.family.label.clone()).collect(),
        hit_measure: step * hits.len() as f64,
        density: hits.len() as f64 / n as f64,
        worst_hit_distances: worst(&hits, entries.len()),
        hits,
        pathology: None,
        sample_log,
    })
}

/// Golden-section search of `max_j` distance over `[τ − step/2, τ + step/2]`.
fn refine_hit(
    prepared: &[Prepared],
    hit: &Hit,
    rect: &CompactRect,
    step: f64,
    params: &EvalParams,
) -> Result<RefinedHit> {
    let objective = |tau: f64| -> f64 {
        let mut m = 0.0f64;
        for p in prepared {
            let side = Side {
                chi: &p.entry.chi,
                removed: &p.removed,
            };
            let d = p
                .entry
                .family
                .eval(tau)
                .and_then(|shift| full_distance(&side, shift, rect, &p.target, &p.fv, params));
            match d {
                Ok(d) => m = m.max(d.value),
                Err(_) => return f64::INFINITY,
            }
        }
        m
    };
    let start = hit.distances.iter().cloned().fold(0.0, f64::max);
    let lo = (hit.shift - step / 2.0).max(2.0 + f64::EPSILON);
    let (mut a, mut b) = (lo, hit.shift + step / 2.0);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..30 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = objective(d);
        }
    }
    let (x, v) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(if v < start {
        RefinedHit {
            shift: x,
            distance: v,
        }
    } else {
        RefinedHit {
            shift: hit.shift,
            distance: start,
        }
    })
}

/// Integer shifts `k = 2..=N`. Families with `a ∈ N`, `b = 0` and exact `α`
/// additionally get a pathology record: the scan over `τ = q*·k` with the
/// Euler factors at `A` removed from `L` and from the target.
pub fn scan_discrete(
    entries: &[ScanEntry],
    rect: &CompactRect,
    opts: &ScanOptions,
    n: u64,
) -> Result<ScanReport> {
    if n < 2 {
        return Err(Error::domain("discrete scans need N >= 2"));
    }
    check_entries(entries, rect, opts, n as f64)?;
    let taus: Vec<f64> = (2..=n).map(|k| k as f64).collect();
    let prepared = prepare(entries, rect, &opts.params, None)?;
    let outcomes = run_samples(&prepared, &taus, rect, opts)?;
    let (hits, sample_log) = collect_hits(&taus, &outcomes, opts.record_samples);

    let mut labeled = Vec::new();
    let mut removed: Vec<Option<Vec<u64>>> = Vec::new();
    for e in entries {
        let data = if e.family.is_polynomial() {
            pathology_summary(&e.family.alpha)?
        } else {
            None
        };
        removed.push(data.as_ref().map(|d| d.support.clone()));
        if let Some(data) = data {
            labeled.push(LabeledPathology {
                label: e.family.label.clone(),
                data,
            });
        }
    }
    let pathology = if labeled.is_empty() {
        None
    } else {
        let datas: Vec<_> = labeled.iter().map(|l| l.data.clone()).collect();
        let qs = q_star(&datas);
        let adj_prepared = prepare(entries, rect, &opts.params, Some(&removed))?;
        let ks: Vec<u64> = (2..=n / qs).collect();
        let adj_taus: Vec<f64> = ks.iter().map(|&k| (qs * k) as f64).collect();
        let adj_out = run_samples(&adj_prepared, &adj_taus, rect, opts)?;
        let adjusted_hits: Vec<u64> = ks
            .iter()
            .zip(&adj_out)
            .filter(|(_, o)| matches!(o, Outcome::Hit(_)))
            .map(|(&k, _)| k)
            .collect();
        let considered = ks.len() as u64;
        Some(PathologyRecord {
            families: labeled,
            q_star: qs,
            adjusted_considered: considered,
            adjusted_density: if considered > 0 {
                adjusted_hits.len() as f64 / considered as f64
            } else {
                0.0
            },
            adjusted_hits,
        })
    };

    Ok(ScanReport {
        mode: Mode::Discrete,
        epsilon: opts.epsilon,
        start: 2.0,
        end: n as f64,
        step: 1.0,
        samples: taus.len(),
        labels: entries.iter().map(|e| e.family.label.clone()).collect(),
        hit_measure: hits.len() as f64,
        density: hits.len() as f64 / taus.len() as f64,
        worst_hit_distances: worst(&hits, entries.len()),
        hits,
        pathology,
        sample_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::l_value;
    use crate::shifts::ExactAlpha;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn baseline_rect(n: usize) -> CompactRect {
        CompactRect::new([0.75, 0.85], [-0.1, 0.1], [n, n]).unwrap()
    }

    fn identity_family() -> ShiftFamily {
        ShiftFamily::new(ExactAlpha::generic(1.0).unwrap(), 1.0, 0.0, "id").unwrap()
    }

    #[test]
    fn rect_validation() {
        assert!(CompactRect::new([0.5, 0.7], [0.0, 1.0], [4, 4]).is_err());
        assert!(CompactRect::new([0.6, 1.0], [0.0, 1.0], [4, 4]).is_err());
        assert!(CompactRect::new([0.7, 0.6], [0.0, 1.0], [4, 4]).is_err());
        assert!(CompactRect::new([0.6, 0.7], [0.0, 1.0], [1, 4]).is_err());
        let r = baseline_rect(5);
        assert_eq!(r.sigmas(), vec![0.75, 0.775, 0.8, 0.825, 0.85]);
        assert_eq!(r.points().len(), 25);
    }

    #[test]
    fn self_distance_is_zero() {
        let chi = DirichletCharacter::new(5, 2).unwrap();
        let rect = CompactRect::new([0.6, 0.9], [10.0, 11.0], [8, 8]).unwrap();
        let f = TargetFunction::shifted_l(chi.clone(), 0.0);
        let d = sup_distance(&chi, 0.0, &rect, &f, &EvalParams::default()).unwrap();
        assert!(d.value < 1e-10);
    }

    #[test]
    fn grid_max_matches_brute_force() {
        let zeta = DirichletCharacter::trivial();
        let rect = baseline_rect(6);
        let f = TargetFunction::constant(c(1.0, 0.0));
        let p = EvalParams::default();
        let d = sup_distance(&zeta, 0.0, &rect, &f, &p).unwrap();
        let brute = rect
            .points()
            .iter()
            .map(|&s| (l_value(s, &zeta, &p).unwrap().value - 1.0).norm())
            .fold(0.0, f64::max);
        assert!(d.grid_max > 0.0);
        assert!((d.grid_max - brute).abs() < 1e-10);
        assert!(d.value >= d.grid_max);
    }

    #[test]
    fn translation_consistency() {
        let chi = DirichletCharacter::new(7, 3).unwrap();
        let p = EvalParams::default();
        let rect = CompactRect::new([0.6, 0.8], [0.0, 0.5], [6, 6]).unwrap();
        let moved = CompactRect::new([0.6, 0.8], [3.0, 3.5], [6, 6]).unwrap();
        let f = TargetFunction::shifted_l(chi.clone(), 40.0);
        let g = TargetFunction::shifted_l(chi.clone(), 37.0);
        let a = sup_distance(&chi, 50.0, &rect, &f, &p).unwrap();
        let b = sup_distance(&chi, 47.0, &moved, &g, &p).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn height_cap_is_enforced() {
        let zeta = DirichletCharacter::trivial();
        let f = TargetFunction::constant(c(1.0, 0.0));
        let r = sup_distance(&zeta, 2e5, &baseline_rect(4), &f, &EvalParams::default());
        assert!(matches!(r, Err(Error::HeightCap { .. })));
    }

    #[test]
    fn empty_product_fit() {
        let zeta = DirichletCharacter::trivial();
        let rect = baseline_rect(6);
        let f = TargetFunction::polynomial(vec![c(0.5, 0.1), c(0.2, 0.0)]);
        let p = EvalParams::default();
        let fit = fit_finite_product(&zeta, &PrimeSet::empty(), &rect, &f, 3, &p).unwrap();
        let expected = rect
            .points()
            .iter()
            .map(|&s| (1.0 - f.eval(s, &p).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!((fit.distance - expected).abs() < 1e-14);
    }

    #[test]
    fn planted_twist_is_recovered() {
        let zeta = DirichletCharacter::trivial();
        let primes = PrimeSet::up_to(31).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
        let planted = Twist::from_pairs(primes.primes().iter().map(|&p| (p, rng.gen::<f64>())));
        let rect = CompactRect::new([0.7, 0.9], [-0.1, 0.1], [8, 8]).unwrap();
        let f = TargetFunction::euler_product(zeta.clone(), primes.clone(), planted);
        let fit = fit_finite_product(&zeta, &primes, &rect, &f, 50, &EvalParams::default()).unwrap();
        assert!(fit.distance < 1e-4, "{:?}", fit.history);
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fit_improves_constant_target() {
        let zeta = DirichletCharacter::trivial();
        let primes = PrimeSet::up_to(97).unwrap();
        let rect = CompactRect::new([0.8, 0.9], [-0.05, 0.05], [8, 8]).unwrap();
        let f = TargetFunction::constant(c(1.0, 0.0));
        let fit = fit_finite_product(&zeta, &primes, &rect, &f, 4, &EvalParams::default()).unwrap();
        assert!(fit.distance < fit.initial_distance);
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn planted_continuous_shift_is_a_hit() {
        let zeta = DirichletCharacter::trivial();
        let rect = baseline_rect(6);
        let tau0 = 2.0 + 37.0 * 0.5;
        let entry = ScanEntry {
            family: identity_family(),
            chi: zeta.clone(),
            target: TargetFunction::shifted_l(zeta.clone(), tau0),
        };
        let opts = ScanOptions::new(1e-3);
        let report = scan_continuous(std::slice::from_ref(&entry), &rect, &opts, 40.0, 0.5).unwrap();
        assert!(report.hits.iter().any(|h| h.shift == tau0), "{:?}", report.hits);
        for h in &report.hits {
            let d = sup_distance(&zeta, h.shift, &rect, &entry.target, &opts.params).unwrap();
            assert!(d.value < opts.epsilon);
            assert_eq!(d.value, h.distances[0]);
        }
    }

    #[test]
    fn huge_epsilon_gives_full_density() {
        let zeta = DirichletCharacter::trivial();
        let entry = ScanEntry {
            family: identity_family(),
            chi: zeta,
            target: TargetFunction::constant(c(1.0, 0.0)),
        };
        let report = scan_continuous(&[entry], &baseline_rect(4), &ScanOptions::new(1e3), 12.0, 0.5).unwrap();
        assert_eq!(report.density, 1.0);
        assert_eq!(report.samples, 20);
    }

    #[test]
    fn density_is_monotone_in_epsilon() {
        let zeta = DirichletCharacter::trivial();
        let entry = ScanEntry {
            family: identity_family(),
            chi: zeta,
            target: TargetFunction::constant(c(1.0, 0.0)),
        };
        let rect = baseline_rect(6);
        let mut last = 0.0;
        for eps in [0.2, 0.4, 0.8, 1.6] {
            let r = scan_continuous(
                std::slice::from_ref(&entry),
                &rect,
                &ScanOptions::new(eps),
                200.0,
                0.25,
            )
            .unwrap();
            assert!(r.density >= last);
            last = r.density;
        }
    }

    #[test]
    fn workers_do_not_change_reports() {
        let zeta = DirichletCharacter::trivial();
        let entry = ScanEntry {
            family: identity_family(),
            chi: zeta,
            target: TargetFunction::constant(c(1.0, 0.0)),
        };
        let rect = baseline_rect(6);
        let mut opts = ScanOptions::new(0.4);
        opts.record_samples = true;
        let one = scan_continuous(
            std::slice::from_ref(&entry),
            &rect,
            &ScanOptions { workers: 1, ..opts },
            150.0,
            0.25,
        )
        .unwrap();
        let three =
            scan_continuous(&[entry], &rect, &ScanOptions { workers: 3, ..opts }, 150.0, 0.25).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn rejected_family_sets_need_override() {
        let zeta = DirichletCharacter::trivial();
        let bad = ShiftFamily::new(ExactAlpha::generic(1.0).unwrap(), 1.0, 0.5, "bad").unwrap();
        let entry = ScanEntry {
            family: bad,
            chi: zeta,
            target: TargetFunction::constant(c(1.0, 0.0)),
        };
        let rect = baseline_rect(4);
        let opts = ScanOptions::new(0.5);
        assert!(matches!(
            scan_continuous(std::slice::from_ref(&entry), &rect, &opts, 10.0, 0.5),
            Err(Error::Rejected(_))
        ));
        let opts = ScanOptions {
            allow_rejected: true,
            ..opts
        };
        assert!(scan_continuous(&[entry], &rect, &opts, 10.0, 0.5).is_ok());
    }

    #[test]
    fn planted_discrete_shift_and_pathology() {
        let zeta = DirichletCharacter::trivial();
        let rect = baseline_rect(5);
        let alpha = ExactAlpha::exact(1, 1, 2, 1).unwrap();
        let fam = ShiftFamily::new(alpha, 1.0, 0.0, "log2").unwrap();
        let k0 = 17;
        let entry = ScanEntry {
            family: fam.clone(),
            chi: zeta.clone(),
            target: TargetFunction::shifted_l(zeta.clone(), fam.eval(k0 as f64).unwrap()),
        };
        let report = scan_discrete(&[entry], &rect, &ScanOptions::new(1e-3), 30).unwrap();
        assert!(report.hits.iter().any(|h| h.shift == k0 as f64));
        assert_eq!(report.samples, 29);
        let path = report.pathology.unwrap();
        assert_eq!(path.q_star, 1);
        assert_eq!(path.families[0].data.m_star, 1);
        assert_eq!(path.families[0].data.support, vec![2]);
        assert_eq!(path.adjusted_considered, 29);
        // removing the factor at 2 on both sides keeps the planted hit
        assert!(path.adjusted_hits.contains(&k0));
    }

    #[test]
    fn non_integer_families_match_continuous_on_integers() {
        let zeta = DirichletCharacter::trivial();
        let fam = ShiftFamily::new(ExactAlpha::generic(3.0).unwrap(), 1.5, 0.0, "f").unwrap();
        let entry = ScanEntry {
            family: fam,
            chi: zeta,
            target: TargetFunction::constant(c(1.0, 0.0)),
        };
        let rect = baseline_rect(4);
        let opts = ScanOptions::new(0.6);
        let disc = scan_discrete(std::slice::from_ref(&entry), &rect, &opts, 60).unwrap();
        let cont = scan_continuous(&[entry], &rect, &opts, 61.0, 1.0).unwrap();
        let a: Vec<f64> = disc.hits.iter().map(|h| h.shift).collect();
        let b: Vec<f64> = cont.hits.iter().map(|h| h.shift).collect();
        assert_eq!(a, b);
        assert!(disc.pathology.is_none());
    }
}
