//! Per-command configuration. A config file is TOML with one flat section per
//! subcommand (`[scan]`, `[fit]`, ...); command-line flags override it.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::approx::{CompactRect, TargetFunction, DEFAULT_GRID};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::euler_product::{PrimeSet, Twist};
use crate::lfunc::EvalParams;
use crate::shifts::{ExactAlpha, ShiftFamily};

/// Reads section `name` of the TOML file at `path`; defaults when there is no
/// file or no such section.
pub fn load_section<T: DeserializeOwned + Default>(path: Option<&Path>, name: &str) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match table.remove(name) {
        None => Ok(T::default()),
        Some(section) => section
            .try_into()
            .map_err(|e| Error::Config(format!("{} [{name}]: {e}", path.display()))),
    }
}

pub(crate) fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

pub(crate) fn eval_params(tol: Option<f64>) -> Result<EvalParams> {
    let params = tol.map_or_else(EvalParams::default, EvalParams::with_tol);
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(params)
}

fn complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharactersConfig {
    pub modulus: Option<u64>,
    pub index: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LvalueConfig {
    pub modulus: u64,
    pub index: u64,
    pub sigma: Option<f64>,
    pub t: f64,
    pub derivative: bool,
    pub tol: Option<f64>,
}

impl Default for LvalueConfig {
    fn default() -> Self {
        Self {
            modulus: 1,
            index: 0,
            sigma: None,
            t: 0.0,
            derivative: false,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathologyConfig {
    pub alpha: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub alpha: String,
    pub a: f64,
    pub b: f64,
    pub label: Option<String>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            alpha: "1".into(),
            a: 1.0,
            b: 0.0,
            label: None,
        }
    }
}

impl FamilyConfig {
    pub fn build(&self, position: usize) -> Result<ShiftFamily> {
        let alpha: ExactAlpha = self
            .alpha
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        let label = self.label.clone().unwrap_or_else(|| format!("f{position}"));
        ShiftFamily::new(alpha, self.a, self.b, label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    #[default]
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UdConfig {
    pub mode: ModeConfig,
    pub families: Vec<FamilyConfig>,
    pub primes: Vec<u64>,
    /// `N` for discrete sums.
    pub n: u64,
    /// `T` and quadrature step for continuous averages.
    pub t: f64,
    pub quad_step: f64,
    pub max_harmonic: i64,
    pub threshold: f64,
    /// Drop `p*` for pathological families (discrete mode).
    pub exclude_pathologies: bool,
}

impl Default for UdConfig {
    fn default() -> Self {
        Self {
            mode: ModeConfig::Discrete,
            families: vec![FamilyConfig::default()],
            primes: vec![2],
            n: 10_000,
            t: 1000.0,
            quad_step: 0.05,
            max_harmonic: 1,
            threshold: crate::equidist::DEFAULT_THRESHOLD,
            exclude_pathologies: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    Carlson,
    Vertical,
    Shifted,
    Gallagher,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub kind: Option<MomentKind>,
    pub modulus: u64,
    pub index: u64,
    pub sigma: f64,
    pub t: f64,
    pub y: u64,
    pub cutoff: Option<u64>,
    pub t_max: f64,
    pub step: f64,
    pub family: FamilyConfig,
    pub x: f64,
    pub tol: Option<f64>,
    /// Random trigonometric polynomial for the Gallagher check.
    pub seed: u64,
    pub terms: usize,
    pub max_freq: f64,
    pub t0: f64,
    pub len: f64,
    pub points: usize,
    pub delta: f64,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            kind: None,
            modulus: 1,
            index: 0,
            sigma: 2.0,
            t: 0.0,
            y: 100,
            cutoff: None,
            t_max: 500.0,
            step: 0.1,
            family: FamilyConfig::default(),
            x: 100.0,
            tol: None,
            seed: 1,
            terms: 8,
            max_freq: 5.0,
            t0: 0.0,
            len: 20.0,
            points: 40,
            delta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RectConfig {
    pub sigma: [f64; 2],
    pub t: [f64; 2],
    pub grid: [usize; 2],
}

impl Default for RectConfig {
    fn default() -> Self {
        Self {
            sigma: [0.75, 0.85],
            t: [-0.1, 0.1],
            grid: [DEFAULT_GRID, DEFAULT_GRID],
        }
    }
}

impl RectConfig {
    pub fn build(&self) -> Result<CompactRect> {
        CompactRect::new(self.sigma, self.t, self.grid)
    }
}

/// Target `f` on `K`. `shifted` samples `L(s + i·shift, χ)` of the owning
/// character; `planted` is `L_M` over `p ≤ y` with a seeded random twist.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetConfig {
    #[default]
    One,
    Constant {
        value: [f64; 2],
    },
    Polynomial {
        coeffs: Vec<[f64; 2]>,
    },
    Shifted {
        shift: f64,
    },
    Planted {
        seed: u64,
        y: u64,
    },
}

impl TargetConfig {
    pub fn build(&self, chi: &DirichletCharacter) -> Result<TargetFunction> {
        Ok(match self {
            TargetConfig::One => TargetFunction::constant(Complex64::new(1.0, 0.0)),
            TargetConfig::Constant { value } => TargetFunction::constant(complex(*value)),
            TargetConfig::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Config("polynomial target needs coefficients".into()));
                }
                TargetFunction::polynomial(coeffs.iter().copied().map(complex).collect())
            }
            TargetConfig::Shifted { shift } => TargetFunction::shifted_l(chi.clone(), *shift),
            TargetConfig::Planted { seed, y } => {
                let primes = PrimeSet::up_to(*y)?;
                let twist = planted_twist(&primes, *seed);
                TargetFunction::euler_product(chi.clone(), primes, twist)
            }
        })
    }
}

/// Uniform random phases for every prime of `primes`, from a fixed seed.
pub fn planted_twist(primes: &PrimeSet, seed: u64) -> Twist {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    Twist::from_pairs(primes.primes().iter().map(|&p| (p, rng.gen::<f64>())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntryConfig {
    pub family: FamilyConfig,
    pub modulus: u64,
    pub index: u64,
    pub target: TargetConfig,
}

impl Default for EntryConfig {
    fn default() -> Self {
        Self {
            family: FamilyConfig::default(),
            modulus: 1,
            index: 0,
            target: TargetConfig::One,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub mode: ModeConfig,
    pub epsilon: f64,
    pub t: f64,
    pub step: f64,
    pub n: u64,
    pub refine: bool,
    pub record_samples: bool,
    pub allow_rejected: bool,
    pub tol: f64,
    pub rect: RectConfig,
    pub entries: Vec<EntryConfig>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            mode: ModeConfig::Continuous,
            epsilon: 0.4,
            t: 10_000.0,
            step: 0.05,
            n: 1000,
            refine: false,
            record_samples: false,
            allow_rejected: false,
            tol: 1e-10,
            rect: RectConfig::default(),
            entries: vec![EntryConfig::default()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub modulus: u64,
    pub index: u64,
    /// Fit the primes `p ≤ y`.
    pub y: u64,
    pub sweeps: usize,
    pub tol: Option<f64>,
    pub rect: RectConfig,
    pub target: TargetConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            modulus: 1,
            index: 0,
            y: 31,
            sweeps: 50,
            tol: None,
            rect: RectConfig {
                grid: [16, 16],
                ..RectConfig::default()
            },
            target: TargetConfig::One,
        }
    }
}
