//! Execution of each subcommand from its effective configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use crate::approx::{fit_finite_product, scan_continuous, scan_discrete, ScanEntry, ScanOptions};
use crate::characters::{CharacterGroup, DirichletCharacter};
use crate::equidist::{harmonics_up_to, ud_report, Extent, Mode, SequenceSpec};
use crate::error::{Error, Result};
use crate::euler_product::PrimeSet;
use crate::lfunc::{l_derivative, l_value};
use crate::moments::{
    carlson_tail, empirical_mean_square_shifted, empirical_mean_square_vertical, gallagher_check,
    DEFAULT_CUTOFF,
};
use crate::shifts::{classify_family_set, pathology_summary, q_star, ExactAlpha, ShiftFamily};

/// Listing every character is limited to moduli up to this size.
pub const MAX_LISTED_MODULUS: u64 = 500;
/// Cap on the number of harmonics in a `ud-test`.
pub const MAX_HARMONICS: usize = 10_000;

/// A fully resolved command, ready to run or to digest.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Effective {
    Characters(CharactersConfig),
    Lvalue(LvalueConfig),
    Pathology(PathologyConfig),
    UdTest(UdConfig),
    Moments(MomentsConfig),
    Scan(ScanConfig),
    Fit(FitConfig),
}

/// JSON payload plus an optional CSV plot table.
pub struct Output {
    pub payload: Value,
    pub csv: Option<String>,
}

impl Effective {
    pub fn name(&self) -> &'static str {
        match self {
            Effective::Characters(_) => "characters",
            Effective::Lvalue(_) => "lvalue",
            Effective::Pathology(_) => "pathology",
            Effective::UdTest(_) => "ud-test",
            Effective::Moments(_) => "moments",
            Effective::Scan(_) => "scan",
            Effective::Fit(_) => "fit",
        }
    }

    /// `workers` only affects scheduling, never the payload.
    pub fn execute(&self, workers: usize) -> Result<Output> {
        let (result, csv) = match self {
            Effective::Characters(c) => (characters(c)?, None),
            Effective::Lvalue(c) => (lvalue(c)?, None),
            Effective::Pathology(c) => (pathology(c)?, None),
            Effective::UdTest(c) => ud_test(c)?,
            Effective::Moments(c) => (moments(c)?, None),
            Effective::Scan(c) => scan(c, workers)?,
            Effective::Fit(c) => (fit(c)?, None),
        };
        Ok(Output {
            payload: json!({
                "schema": format!("univlab.{}/{}", self.name(), SCHEMA_VERSION),
                "result": result,
            }),
            csv,
        })
    }
}

pub const SCHEMA_VERSION: u32 = 1;

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(format!("cannot serialize result: {e}")))
}

fn characters(c: &CharactersConfig) -> Result<Value> {
    let q = required(c.modulus, "modulus")?;
    let group = CharacterGroup::new(q)?;
    let list: Vec<DirichletCharacter> = match c.index {
        Some(i) => vec![group.character(i)?],
        None => {
            if q > MAX_LISTED_MODULUS {
                return Err(Error::Domain(format!(
                    "listing all characters needs modulus <= {MAX_LISTED_MODULUS}; pass an index"
                )));
            }
            group.iter().collect()
        }
    };
    let summaries: Vec<_> = list.iter().map(|chi| chi.summary()).collect();
    Ok(json!({
        "modulus": q,
        "group_order": group.len(),
        "count": summaries.len(),
        "characters": summaries,
    }))
}

fn lvalue(c: &LvalueConfig) -> Result<Value> {
    let chi = DirichletCharacter::new(c.modulus, c.index)?;
    let s = Complex64::new(required(c.sigma, "sigma")?, c.t);
    let params = eval_params(c.tol)?;
    let value = l_value(s, &chi, &params)?;
    let derivative = if c.derivative {
        Some(l_derivative(s, &chi, &params)?)
    } else {
        None
    };
    Ok(json!({
        "modulus": c.modulus,
        "index": c.index,
        "s": s,
        "value": value.value,
        "error_bound": value.error_bound,
        "derivative": derivative.map(|d| json!({"value": d.value, "error_bound": d.error_bound})),
    }))
}

fn pathology(c: &PathologyConfig) -> Result<Value> {
    let text = required(c.alpha.as_deref(), "alpha")?;
    let alpha: ExactAlpha = text.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
    let data = pathology_summary(&alpha)?;
    let q = q_star(data.as_slice());
    Ok(json!({
        "alpha": alpha.to_string(),
        "alpha_value": alpha.value(),
        "exact": matches!(alpha, ExactAlpha::Exact { .. }),
        "m_star": data.as_ref().map(|d| d.m_star),
        "support": data.as_ref().map(|d| d.support.clone()).unwrap_or_default(),
        "exponents": data.as_ref().map(|d| d.exponents.clone()).unwrap_or_default(),
        "p_star": data.as_ref().map(|d| d.p_star),
        "k_pstar": data.as_ref().map(|d| d.k_pstar),
        "q_star": q,
    }))
}

fn families(list: &[FamilyConfig]) -> Result<Vec<ShiftFamily>> {
    if list.is_empty() {
        return Err(Error::Config("at least one family is required".into()));
    }
    list.iter().enumerate().map(|(i, f)| f.build(i)).collect()
}

fn ud_test(c: &UdConfig) -> Result<(Value, Option<String>)> {
    let fams = families(&c.families)?;
    let mode = match c.mode {
        ModeConfig::Continuous => Mode::Continuous,
        ModeConfig::Discrete => Mode::Discrete,
    };
    let spec = if c.exclude_pathologies {
        SequenceSpec::grid_excluding_pathologies(&fams, &c.primes, mode)?
    } else {
        SequenceSpec::grid(&fams, &c.primes, mode)?
    };
    let count = (2 * c.max_harmonic.max(0) as u128 + 1).checked_pow(spec.dim() as u32);
    if !count.is_some_and(|n| n <= MAX_HARMONICS as u128 + 1) {
        return Err(Error::Domain(format!(
            "more than {MAX_HARMONICS} harmonics; lower max_harmonic or the dimension"
        )));
    }
    let harmonics = harmonics_up_to(spec.dim(), c.max_harmonic);
    let extent = match mode {
        Mode::Discrete => Extent::Discrete(c.n),
        Mode::Continuous => Extent::Continuous {
            t: c.t,
            quad_step: c.quad_step,
        },
    };
    let report = ud_report(&spec, &harmonics, extent, c.threshold)?;
    let mut csv = String::from("h,modulus\n");
    for w in &report.weyl {
        let h: Vec<String> = w.h.iter().map(i64::to_string).collect();
        let _ = writeln!(csv, "{},{:e}", h.join(" "), w.modulus);
    }
    let value = json!({
        "classification": classify_family_set(&fams)?,
        "components": spec.components(),
        "exclusions": spec.exclusions(),
        "report": report,
    });
    Ok((value, Some(csv)))
}

fn moments(c: &MomentsConfig) -> Result<Value> {
    let kind = required(c.kind, "kind")?;
    let chi = DirichletCharacter::new(c.modulus, c.index)?;
    let params = eval_params(c.tol)?;
    let s0 = Complex64::new(c.sigma, c.t);
    match kind {
        MomentKind::Carlson => {
            let cutoff = c.cutoff.unwrap_or(DEFAULT_CUTOFF.max(10 * c.y));
            to_value(&carlson_tail(c.sigma, &chi, c.y, cutoff)?)
        }
        MomentKind::Vertical => to_value(&empirical_mean_square_vertical(
            s0, &chi, c.y, c.t_max, c.step, &params,
        )?),
        MomentKind::Shifted => {
            let family = c.family.build(0)?;
            to_value(&empirical_mean_square_shifted(
                s0, &chi, c.y, &family, c.x, &params,
            )?)
        }
        MomentKind::Gallagher => gallagher(c),
    }
}

/// Gallagher's inequality for a seeded random trigonometric polynomial
/// `Σ c_j e^{i λ_j t}` sampled at seeded random points.
fn gallagher(c: &MomentsConfig) -> Result<Value> {
    if c.terms == 0 || c.points == 0 {
        return Err(Error::Config("terms and points must be positive".into()));
    }
    if !(c.delta > 0.0 && c.len >= c.delta) {
        return Err(Error::Domain(
            "Gallagher's inequality needs len >= delta > 0".into(),
        ));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(c.seed);
    let freqs: Vec<f64> = (0..c.terms)
        .map(|_| rng.gen_range(-c.max_freq..=c.max_freq))
        .collect();
    let coeffs: Vec<Complex64> = (0..c.terms)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let (lo, hi) = (c.t0 + c.delta / 2.0, c.t0 + c.len - c.delta / 2.0);
    let mut points: Vec<f64> = (0..c.points).map(|_| rng.gen_range(lo..=hi)).collect();
    points.sort_by(f64::total_cmp);
    let f = |t: f64| -> Complex64 {
        freqs
            .iter()
            .zip(&coeffs)
            .map(|(l, a)| a * Complex64::new(0.0, l * t).exp())
            .sum()
    };
    let df = |t: f64| -> Complex64 {
        freqs
            .iter()
            .zip(&coeffs)
            .map(|(l, a)| a * Complex64::new(0.0, *l) * Complex64::new(0.0, l * t).exp())
            .sum()
    };
    let report = gallagher_check(&f, Some(&df), c.t0, c.len, &points, c.delta)?;
    Ok(json!({
        "report": report,
        "frequencies": freqs,
        "coefficients": coeffs,
        "points": points,
    }))
}

fn scan(c: &ScanConfig, workers: usize) -> Result<(Value, Option<String>)> {
    if c.entries.is_empty() {
        return Err(Error::Config("at least one scan entry is required".into()));
    }
    let rect = c.rect.build()?;
    let entries = c
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let chi = DirichletCharacter::new(e.modulus, e.index)?;
            Ok(ScanEntry {
                family: e.family.build(i)?,
                target: e.target.build(&chi)?,
                chi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = ScanOptions {
        refine_hits: c.refine,
        record_samples: c.record_samples,
        allow_rejected: c.allow_rejected,
        workers,
        ..ScanOptions::new(c.epsilon)
    };
    let opts = ScanOptions {
        params: eval_params(Some(c.tol))?,
        ..opts
    };
    let families: Vec<ShiftFamily> = entries.iter().map(|e| e.family.clone()).collect();
    let report = match c.mode {
        ModeConfig::Continuous => scan_continuous(&entries, &rect, &opts, c.t, c.step)?,
        ModeConfig::Discrete => scan_discrete(&entries, &rect, &opts, c.n)?,
    };
    let csv = c.record_samples.then(|| {
        let mut out = String::from("shift,distance,exact\n");
        for s in &report.sample_log {
            let _ = writeln!(out, "{},{:e},{}", s.shift, s.distance, s.exact);
        }
        out
    });
    let value = json!({
        "classification": classify_family_set(&families)?,
        "report": report,
    });
    Ok((value, csv))
}

fn fit(c: &FitConfig) -> Result<Value> {
    let chi = DirichletCharacter::new(c.modulus, c.index)?;
    let primes = PrimeSet::up_to(c.y)?;
    let rect = c.rect.build()?;
    let target = c.target.build(&chi)?;
    let params = eval_params(c.tol)?;
    let result = fit_finite_product(&chi, &primes, &rect, &target, c.sweeps, &params)?;
    let twist: BTreeMap<String, f64> = result.twist.iter().map(|(p, t)| (p.to_string(), t)).collect();
    Ok(json!({
        "primes": primes.primes(),
        "twist": twist,
        "distance": result.distance,
        "initial_distance": result.initial_distance,
        "history": result.history,
        "sweeps": result.sweeps,
        "stagnated": result.stagnated,
    }))
}
