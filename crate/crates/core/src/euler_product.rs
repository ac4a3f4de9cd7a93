//! Twisted truncated Euler products
//! `L_M(s, (θ_p); chi) = Π_{p ∈ M} (1 - chi(p) e(-θ_p) p^{-s})^{-1}`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::primes::primes_up_to;

/// Factors with `|1 - z|` below this are treated as singular.
pub const SINGULAR_FACTOR_TOL: f64 = 1e-14;

/// A finite, strictly increasing set of primes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrimeSet {
    primes: Vec<u64>,
}

impl PrimeSet {
    /// From an explicit list; sorts, and rejects duplicates and non-primes.
    pub fn new(mut primes: Vec<u64>) -> Result<Self> {
        primes.sort_unstable();
        if let Some(w) = primes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate prime {}", w[0])));
        }
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        Ok(Self { primes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `{p <= y}`.
    pub fn up_to(y: u64) -> Result<Self> {
        Ok(Self {
            primes: primes_up_to(y)?,
        })
    }

    /// `{p <= y} \ excluded`.
    pub fn up_to_excluding(y: u64, excluded: &[u64]) -> Result<Self> {
        let mut primes = primes_up_to(y)?;
        primes.retain(|p| !excluded.contains(p));
        Ok(Self { primes })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// Twist angles `θ_p`, stored reduced into `[0, 1)`; absent primes carry 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    theta: BTreeMap<u64, f64>,
}

impl Twist {
    /// The constant zero sequence.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut t = Self::zero();
        for (p, th) in pairs {
            t.set(p, th);
        }
        t
    }

    pub fn set(&mut self, p: u64, theta: f64) {
        self.theta.insert(p, reduce_unit(theta));
    }

    pub fn get(&self, p: u64) -> f64 {
        self.theta.get(&p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.theta.iter().map(|(&p, &t)| (p, t))
    }
}

/// `x mod 1` in `[0, 1)`.
pub fn reduce_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `log(1 - z)` on the principal branch, accurate for small `|z|`.
pub(crate) fn log_one_minus(z: Complex64) -> Complex64 {
    let re = 0.5 * (-2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = (-z.im).atan2(1.0 - z.re);
    Complex64::new(re, im)
}

/// `z_p = chi(p) e(-θ_p) p^{-s}`.
fn factor_arg(s: Complex64, chi: &DirichletCharacter, p: u64, theta: f64) -> Complex64 {
    let ln_p = (p as f64).ln();
    chi.value(p as i64) * Complex64::from_polar((-s.re * ln_p).exp(), -s.im * ln_p - TAU * theta)
}

/// `log L_M(s, θ; chi) = Σ_p -log(1 - z_p)`, principal branch per factor.
pub fn log_truncated_euler_product(
    s: Complex64,
    chi: &DirichletCharacter,
    primes: &PrimeSet,
    twist: &Twist,
) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::domain("Euler product needs Re(s) > 0"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &p in primes.primes() {
        let z = factor_arg(s, chi, p, twist.get(p));
        if (Complex64::new(1.0, 0.0) - z).norm() < SINGULAR_FACTOR_TOL {
            return Err(Error::SingularFactor { prime: p });
        }
        acc -= log_one_minus(z);
    }
    Ok(acc)
}

pub fn truncated_euler_product(
    s: Complex64,
    chi: &DirichletCharacter,
    primes: &PrimeSet,
    twist: &Twist,
) -> Result<Complex64> {
    log_truncated_euler_product(s, chi, primes, twist).map(Complex64::exp)
}

/// `d/ds L_M = L_M · Σ_p -log(p) z_p / (1 - z_p)`.
pub fn truncated_euler_product_derivative(
    s: Complex64,
    chi: &DirichletCharacter,
    primes: &PrimeSet,
    twist: &Twist,
) -> Result<Complex64> {
    let value = truncated_euler_product(s, chi, primes, twist)?;
    let log_deriv: Complex64 = primes
        .primes()
        .iter()
        .map(|&p| {
            let z = factor_arg(s, chi, p, twist.get(p));
            -(p as f64).ln() * z / (1.0 - z)
        })
        .sum();
    Ok(value * log_deriv)
}

/// The twist obtained by folding a vertical shift `τ` into `θ`:
/// `θ'_p = θ_p + τ log p / 2π (mod 1)`.
pub fn fold_shift(tau: f64, primes: &PrimeSet, twist: &Twist) -> Twist {
    Twist::from_pairs(
        primes
            .primes()
            .iter()
            .map(|&p| (p, twist.get(p) + tau * (p as f64).ln() / TAU)),
    )
}

/// `L_M(s + iτ, θ; chi)` computed as `L_M(s, θ'; chi)` with the shift folded
/// into the twist.
pub fn shifted_product(
    s: Complex64,
    tau: f64,
    chi: &DirichletCharacter,
    primes: &PrimeSet,
    twist: &Twist,
) -> Result<Complex64> {
    truncated_euler_product(s, chi, primes, &fold_shift(tau, primes, twist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CharacterGroup;
    use crate::lfunc::{cauchy_derivative, l_value, EvalParams};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_prime() {
        let zeta = DirichletCharacter::trivial();
        let m = PrimeSet::new(vec![2]).unwrap();
        let v = truncated_euler_product(c(2.0, 0.0), &zeta, &m, &Twist::zero()).unwrap();
        assert!((v - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
        let ones = Twist::from_pairs([(2, 1.0)]);
        assert_eq!(ones.get(2), 0.0);
        let v1 = truncated_euler_product(c(2.0, 0.0), &zeta, &m, &ones).unwrap();
        assert_eq!(v, v1);
        assert_eq!(
            truncated_euler_product(c(0.7, 1.0), &zeta, &PrimeSet::empty(), &Twist::zero()).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn prime_set_validation() {
        assert!(PrimeSet::new(vec![2, 4]).is_err());
        assert!(PrimeSet::new(vec![3, 3]).is_err());
        let m = PrimeSet::new(vec![7, 2, 5]).unwrap();
        assert_eq!(m.primes(), &[2, 5, 7]);
        let ex = PrimeSet::up_to_excluding(20, &[2, 11]).unwrap();
        assert_eq!(ex.primes(), &[3, 5, 7, 13, 17, 19]);
    }

    #[test]
    fn converges_to_zeta_two() {
        let zeta = DirichletCharacter::trivial();
        let m = PrimeSet::up_to(10_000).unwrap();
        let v = truncated_euler_product(c(2.0, 0.0), &zeta, &m, &Twist::zero()).unwrap();
        let tail_bound = 1.0 / 10_000.0; // Σ_{n > 10^4} n^{-2} < 10^{-4}
        assert!((v.re - std::f64::consts::PI.powi(2) / 6.0).abs() < tail_bound);
    }

    #[test]
    fn shift_examples() {
        let zeta = DirichletCharacter::trivial();
        let m = PrimeSet::new(vec![2]).unwrap();
        let s = c(0.7, 0.3);
        let base = truncated_euler_product(s, &zeta, &m, &Twist::zero()).unwrap();
        let period = TAU / 2f64.ln();
        let shifted = shifted_product(s, period, &zeta, &m, &Twist::zero()).unwrap();
        assert!((base - shifted).norm() < 1e-14 * base.norm());
        let s0 = shifted_product(s, 0.0, &zeta, &m, &Twist::zero()).unwrap();
        assert_eq!(s0, base);
    }

    #[test]
    fn fold_matches_direct_shift() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let pool = primes_up_to(400).unwrap();
        for _ in 0..100 {
            let q = [1u64, 3, 4, 5, 8][rng.gen_range(0..5)];
            let group = CharacterGroup::new(q).unwrap();
            let chi = group.character(rng.gen_range(0..group.len())).unwrap();
            let mut chosen: Vec<u64> = Vec::new();
            while chosen.len() < 25 {
                let p = pool[rng.gen_range(0..pool.len())];
                if !chosen.contains(&p) {
                    chosen.push(p);
                }
            }
            let m = PrimeSet::new(chosen).unwrap();
            let twist = Twist::from_pairs(m.primes().iter().map(|&p| (p, rng.gen::<f64>())));
            let s = c(rng.gen_range(0.55..1.5), rng.gen_range(-50.0..50.0));
            let tau = rng.gen_range(-100.0..100.0);
            let direct = truncated_euler_product(s + c(0.0, tau), &chi, &m, &twist).unwrap();
            let folded = shifted_product(s, tau, &chi, &m, &twist).unwrap();
            assert!((direct - folded).norm() <= 1e-12 * direct.norm());
        }
    }

    #[test]
    fn analytic_derivative_matches_cauchy() {
        let chi = CharacterGroup::new(5).unwrap().character(1).unwrap();
        let m = PrimeSet::up_to(50).unwrap();
        let twist = Twist::from_pairs([(3, 0.25), (7, 0.6)]);
        let s = c(2.0, 1.5);
        let exact = truncated_euler_product_derivative(s, &chi, &m, &twist).unwrap();
        let cauchy =
            cauchy_derivative(|z| truncated_euler_product(z, &chi, &m, &twist), s, 0.01, 64).unwrap();
        assert!((exact - cauchy).norm() < 1e-8);
    }

    #[test]
    fn adding_large_prime_is_stable() {
        let zeta = DirichletCharacter::trivial();
        let base = PrimeSet::up_to(1000).unwrap();
        for &p in &[1009u64, 4001, 7919] {
            let mut with = base.primes().to_vec();
            with.push(p);
            let with = PrimeSet::new(with).unwrap();
            for &s in &[c(0.6, 3.0), c(0.8, -20.0)] {
                let a = log_truncated_euler_product(s, &zeta, &base, &Twist::zero()).unwrap();
                let b = log_truncated_euler_product(s, &zeta, &with, &Twist::zero()).unwrap();
                assert!((a - b).norm() <= 2.0 * (p as f64).powf(-0.6));
            }
        }
    }

    #[test]
    fn sigma_two_matches_l_value() {
        for chi in CharacterGroup::new(5).unwrap().iter() {
            let m = PrimeSet::up_to(100_000).unwrap();
            let prod = truncated_euler_product(c(2.0, 4.0), &chi, &m, &Twist::zero()).unwrap();
            let l = l_value(c(2.0, 4.0), &chi, &EvalParams::default()).unwrap().value;
            assert!((prod - l).norm() < 1e-5);
        }
    }
}
