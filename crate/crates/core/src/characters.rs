//! Dirichlet characters modulo `q`.
//!
//! The unit group `(Z/q)^*` is split by CRT into prime-power parts. Odd parts
//! are cyclic with a primitive root as generator; the 2-adic part is
//! `{±1} × <5>` for `2^e, e >= 3`. A character is fixed by one digit per
//! cyclic component and its values are kept as exact rational exponents
//! `chi(n) = e(r)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, primitive_root_mod_prime_power};
use crate::error::{Error, Result};

/// Largest modulus accepted by [`CharacterGroup::new`].
pub const MAX_MODULUS: u64 = 1_000_000;

/// Reduced rational `num/den` in `[0, 1)`; the character value is `e(num/den)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponent {
    pub num: u64,
    pub den: u64,
}

impl Exponent {
    fn reduced(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `e(num/den)`, exact for the real and purely imaginary roots of unity.
    pub fn to_complex(self) -> Complex64 {
        match (self.num, self.den) {
            (0, _) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, std::f64::consts::TAU * self.as_f64()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug)]
struct Component {
    order: u64,
    /// Generator as a residue modulo the full modulus (CRT lift, 1 elsewhere).
    generator: u64,
}

#[derive(Debug)]
enum PartKind {
    /// `2^1`: trivial unit group.
    Trivial,
    /// Cyclic with discrete-log table (`u32::MAX` on non-units).
    Cyclic { dlog: Vec<u32> },
    /// `2^e, e >= 3`: `n = ±5^k`; table holds `k` for `n ≡ 1 mod 4`.
    TwoAdic { dlog5: Vec<u32> },
}

#[derive(Debug)]
struct Part {
    prime: u64,
    exp: u32,
    prime_power: u64,
    kind: PartKind,
}

#[derive(Debug)]
struct GroupData {
    modulus: u64,
    parts: Vec<Part>,
    components: Vec<Component>,
    /// Group exponent: lcm of component orders.
    exponent: u64,
    size: u64,
}

impl GroupData {
    fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        if q > MAX_MODULUS {
            return Err(Error::domain(format!("modulus {q} exceeds {MAX_MODULUS}")));
        }
        let mut parts = Vec::new();
        let mut components = Vec::new();
        for (p, e) in factorize(q)? {
            let m = p.pow(e);
            let lift = |g: u64| crt_lift(g, m, q);
            let kind = if p == 2 && e == 1 {
                PartKind::Trivial
            } else if p == 2 && e == 2 {
                components.push(Component {
                    order: 2,
                    generator: lift(3),
                });
                PartKind::Cyclic {
                    dlog: vec![u32::MAX, 0, u32::MAX, 1],
                }
            } else if p == 2 {
                let order5 = m / 4;
                let mut dlog5 = vec![u32::MAX; m as usize];
                let mut x = 1u64;
                for k in 0..order5 {
                    dlog5[x as usize] = k as u32;
                    x = x * 5 % m;
                }
                components.push(Component {
                    order: 2,
                    generator: lift(m - 1),
                });
                components.push(Component {
                    order: order5,
                    generator: lift(5),
                });
                PartKind::TwoAdic { dlog5 }
            } else {
                let g = primitive_root_mod_prime_power(p, e);
                let order = m / p * (p - 1);
                let mut dlog = vec![u32::MAX; m as usize];
                let mut x = 1u64;
                for k in 0..order {
                    dlog[x as usize] = k as u32;
                    x = x * g % m;
                }
                components.push(Component {
                    order,
                    generator: lift(g),
                });
                PartKind::Cyclic { dlog }
            };
            parts.push(Part {
                prime: p,
                exp: e,
                prime_power: m,
                kind,
            });
        }
        let exponent = components.iter().fold(1u64, |acc, c| acc.lcm(&c.order));
        let size = components.iter().map(|c| c.order).product();
        Ok(Self {
            modulus: q,
            parts,
            components,
            exponent,
            size,
        })
    }

    /// Discrete logs of `n` with respect to each component generator, or
    /// `None` when `gcd(n, q) > 1`.
    fn logs(&self, n: u64, out: &mut Vec<u64>) -> bool {
        out.clear();
        for part in &self.parts {
            let r = n % part.prime_power;
            match &part.kind {
                PartKind::Trivial => {
                    if r.is_multiple_of(2) {
                        return false;
                    }
                }
                PartKind::Cyclic { dlog } => {
                    let k = dlog[r as usize];
                    if k == u32::MAX {
                        return false;
                    }
                    out.push(k as u64);
                }
                PartKind::TwoAdic { dlog5 } => {
                    if r.is_multiple_of(2) {
                        return false;
                    }
                    let (sign, x) = if r % 4 == 1 {
                        (0, r)
                    } else {
                        (1, part.prime_power - r)
                    };
                    out.push(sign);
                    out.push(dlog5[x as usize] as u64);
                }
            }
        }
        true
    }
}

fn crt_lift(g: u64, m: u64, q: u64) -> u64 {
    // x ≡ g (mod m), x ≡ 1 (mod q/m) with gcd(m, q/m) = 1.
    let rest = q / m;
    if rest == 1 {
        return g % m;
    }
    let inv = mod_inverse(rest % m, m).expect("coprime parts");
    // x = 1 + rest * t, rest * t ≡ g - 1 (mod m)
    let t = ((g + m - 1) % m) as u128 * inv as u128 % m as u128;
    (1 + rest as u128 * t) as u64 % q
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// The full character group modulo `q`.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    data: Arc<GroupData>,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self {
            data: Arc::new(GroupData::new(q)?),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.data.modulus
    }

    /// `phi(q)`.
    pub fn len(&self) -> u64 {
        self.data.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Character with mixed-radix label `index` (component 0 least
    /// significant); index 0 is principal.
    pub fn character(&self, index: u64) -> Result<DirichletCharacter> {
        if index >= self.len() {
            return Err(Error::domain(format!(
                "character index {index} out of range for modulus {} ({} characters)",
                self.modulus(),
                self.len()
            )));
        }
        let mut rest = index;
        let digits = self
            .data
            .components
            .iter()
            .map(|c| {
                let d = rest % c.order;
                rest /= c.order;
                d
            })
            .collect();
        Ok(DirichletCharacter {
            group: Arc::clone(&self.data),
            index,
            digits,
        })
    }

    pub fn principal(&self) -> DirichletCharacter {
        self.character(0).expect("principal character exists")
    }

    pub fn iter(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.len()).map(move |i| self.character(i).expect("index in range"))
    }

    fn character_from_digits(&self, digits: &[u64]) -> DirichletCharacter {
        let mut index = 0u64;
        for (c, &d) in self.data.components.iter().zip(digits).rev() {
            index = index * c.order + d;
        }
        self.character(index).expect("digits in range")
    }
}

/// All `phi(q)` characters modulo `q`, principal first.
pub fn build_character_group(q: u64) -> Result<Vec<DirichletCharacter>> {
    let group = CharacterGroup::new(q)?;
    Ok(group.iter().collect())
}

/// A Dirichlet character. Cheap to clone; the group tables are shared.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<GroupData>,
    index: u64,
    digits: Vec<u64>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.modulus())
            .field("index", &self.index)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.index == other.index
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    /// The trivial character modulo 1 (`chi(n) = 1` for all `n`).
    pub fn trivial() -> Self {
        CharacterGroup::new(1).expect("q = 1").principal()
    }

    pub fn new(modulus: u64, index: u64) -> Result<Self> {
        CharacterGroup::new(modulus)?.character(index)
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_principal(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn group(&self) -> CharacterGroup {
        CharacterGroup {
            data: Arc::clone(&self.group),
        }
    }

    /// Exponent `r` with `chi(n) = e(r)`, or `None` when `gcd(n, q) > 1`.
    pub fn value_exponent(&self, n: i64) -> Option<Exponent> {
        let q = self.group.modulus;
        let r = n.rem_euclid(q as i64) as u64;
        let mut logs = Vec::with_capacity(self.digits.len());
        if !self.group.logs(r, &mut logs) {
            return None;
        }
        let den = self.group.exponent;
        let mut num: u128 = 0;
        for ((c, &d), &l) in self.group.components.iter().zip(&self.digits).zip(&logs) {
            num += d as u128 * l as u128 % c.order as u128 * (den / c.order) as u128;
        }
        Some(Exponent::reduced((num % den as u128) as u64, den))
    }

    /// `chi(n)` as a complex number (0 off the units).
    pub fn value(&self, n: i64) -> Complex64 {
        self.value_exponent(n)
            .map_or(Complex64::new(0.0, 0.0), Exponent::to_complex)
    }

    /// Values at residues `0..q`.
    pub fn value_table(&self) -> Vec<Option<Exponent>> {
        (0..self.modulus() as i64)
            .map(|n| self.value_exponent(n))
            .collect()
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.group
            .components
            .iter()
            .zip(&self.digits)
            .fold(1u64, |acc, (c, &d)| acc.lcm(&(c.order / d.gcd(&c.order))))
    }

    pub fn conj(&self) -> Self {
        let digits: Vec<u64> = self
            .group
            .components
            .iter()
            .zip(&self.digits)
            .map(|(c, &d)| (c.order - d) % c.order)
            .collect();
        self.group().character_from_digits(&digits)
    }

    /// Modulus of the primitive character inducing this one.
    pub fn conductor(&self) -> u64 {
        let mut f = 1u64;
        let mut comp = 0;
        for part in &self.group.parts {
            let (p, e) = (part.prime, part.exp);
            match part.kind {
                PartKind::Trivial => {}
                PartKind::Cyclic { .. } => {
                    let j = self.digits[comp];
                    comp += 1;
                    if j != 0 {
                        let k = (1..=e).find(|&k| j.is_multiple_of(p.pow(e - k))).unwrap_or(e);
                        f *= p.pow(k);
                    }
                }
                PartKind::TwoAdic { .. } => {
                    let (sign, five) = (self.digits[comp], self.digits[comp + 1]);
                    comp += 2;
                    if five != 0 {
                        let k = (3..=e).find(|&k| five % 2u64.pow(e - k) == 0).unwrap_or(e);
                        f *= 2u64.pow(k);
                    } else if sign != 0 {
                        f *= 4;
                    }
                }
            }
        }
        f
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// The primitive character modulo the conductor that induces `self`.
    pub fn inducing_primitive(&self) -> Self {
        let f = self.conductor();
        if f == self.modulus() {
            return self.clone();
        }
        let group = CharacterGroup::new(f).expect("conductor divides a valid modulus");
        let q = self.modulus();
        let digits: Vec<u64> = group
            .data
            .components
            .iter()
            .map(|c| {
                // any lift of the generator that is a unit mod q
                let lifted = (0..)
                    .map(|t| c.generator + t * f)
                    .find(|n| n.gcd(&q) == 1)
                    .expect("units exist in every residue class coprime to f");
                let r = self.value_exponent(lifted as i64).expect("lift is a unit");
                r.num * c.order / r.den
            })
            .collect();
        group.character_from_digits(&digits)
    }

    /// `(conductor, inducing primitive character)`.
    pub fn conductor_and_primitive(&self) -> (u64, Self) {
        let prim = self.inducing_primitive();
        (prim.modulus(), prim)
    }

    pub fn summary(&self) -> CharacterSummary {
        CharacterSummary {
            modulus: self.modulus(),
            index: self.index,
            order: self.order(),
            conductor: self.conductor(),
            primitive: self.is_primitive(),
            values: self
                .value_table()
                .into_iter()
                .map(|v| v.map_or_else(|| "0".to_string(), |e| e.to_string()))
                .collect(),
        }
    }
}

/// Two characters are equivalent when they are induced by the same primitive
/// character.
pub fn are_equivalent(a: &DirichletCharacter, b: &DirichletCharacter) -> bool {
    a.inducing_primitive() == b.inducing_primitive()
}

/// Serializable view of a character; `values[n]` is the exponent `r` of
/// `chi(n) = e(r)` written as `"num/den"`, or `"0"` off the units.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CharacterSummary {
    pub modulus: u64,
    pub index: u64,
    pub order: u64,
    pub conductor: u64,
    pub primitive: bool,
    pub values: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        let q = chi.modulus();
        (1..=q)
            .filter(|f| q.is_multiple_of(*f))
            .find(|&f| {
                (1..q)
                    .filter(|n| n.gcd(&q) == 1 && n % f == 1 % f)
                    .all(|n| chi.value_exponent(n as i64).unwrap().num == 0)
            })
            .unwrap()
    }

    #[test]
    fn trivial_group_mod_one() {
        let g = build_character_group(1).unwrap();
        assert_eq!(g.len(), 1);
        for n in -5..20 {
            assert_eq!(g[0].value(n), Complex64::new(1.0, 0.0));
        }
        assert_eq!(g[0].conductor(), 1);
        assert!(g[0].is_primitive());
    }

    #[test]
    fn mod_four() {
        let g = build_character_group(4).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g[0].is_principal());
        assert_eq!(g[1].value(3), Complex64::new(-1.0, 0.0));
        assert_eq!(g[1].value(1), Complex64::new(1.0, 0.0));
        assert_eq!(g[1].value(2), Complex64::new(0.0, 0.0));
        assert_eq!(g[1].conductor(), 4);
    }

    #[test]
    fn mod_five_values_at_two_are_fourth_roots() {
        let g = build_character_group(5).unwrap();
        let mut at_two: Vec<Exponent> = g.iter().map(|c| c.value_exponent(2).unwrap()).collect();
        at_two.sort_by_key(|e| e.num * 4 / e.den);
        let quarters: Vec<u64> = at_two.iter().map(|e| e.num * 4 / e.den).collect();
        assert_eq!(quarters, vec![0, 1, 2, 3]);
    }

    #[test]
    fn zero_modulus_is_domain_error() {
        assert!(matches!(build_character_group(0), Err(Error::Domain(_))));
    }

    #[test]
    fn char_value_examples() {
        let principal6 = CharacterGroup::new(6).unwrap().principal();
        assert_eq!(principal6.value(3), Complex64::new(0.0, 0.0));
        for q in 1..40u64 {
            for chi in CharacterGroup::new(q).unwrap().iter() {
                assert_eq!(chi.value(q as i64 + 1), Complex64::new(1.0, 0.0));
                assert_eq!(chi.value(-1), chi.value(q as i64 - 1));
            }
        }
    }

    #[test]
    fn group_sizes_and_distinct_tables() {
        for q in 1..=60 {
            let g = build_character_group(q).unwrap();
            assert_eq!(g.len() as u64, euler_phi(q));
            let mut tables: Vec<_> = g.iter().map(|c| c.value_table()).collect();
            tables.sort_by_key(|t| format!("{t:?}"));
            tables.dedup();
            assert_eq!(tables.len() as u64, euler_phi(q), "q = {q}");
        }
    }

    #[test]
    fn conductor_matches_brute_force() {
        for q in 1..=48 {
            for chi in CharacterGroup::new(q).unwrap().iter() {
                assert_eq!(chi.conductor(), brute_conductor(&chi), "q = {q}, {chi:?}");
                let prim = chi.inducing_primitive();
                assert!(prim.is_primitive());
                for n in 1..q as i64 {
                    if (n as u64).gcd(&q) == 1 {
                        assert_eq!(chi.value_exponent(n), prim.value_exponent(n));
                    }
                }
            }
        }
    }

    #[test]
    fn lift_of_mod_four_to_twelve() {
        let chi4 = CharacterGroup::new(4).unwrap().character(1).unwrap();
        let lift = CharacterGroup::new(12)
            .unwrap()
            .iter()
            .find(|c| (1..12).all(|n| (n as u64).gcd(&12) != 1 || c.value(n) == chi4.value(n)))
            .unwrap();
        let (f, prim) = lift.conductor_and_primitive();
        assert_eq!(f, 4);
        assert_eq!(prim, chi4);
        assert!(are_equivalent(&lift, &chi4));
    }

    #[test]
    fn equivalence_examples() {
        let p3 = CharacterGroup::new(3).unwrap().principal();
        let p6 = CharacterGroup::new(6).unwrap().principal();
        assert!(are_equivalent(&p3, &p6));
        let order4: Vec<_> = CharacterGroup::new(5)
            .unwrap()
            .iter()
            .filter(|c| c.order() == 4)
            .collect();
        assert_eq!(order4.len(), 2);
        assert!(!are_equivalent(&order4[0], &order4[1]));
        assert_eq!(order4[0].conj(), order4[1]);
    }

    #[test]
    fn large_modulus_builds() {
        let g = CharacterGroup::new(720_720).unwrap();
        assert_eq!(g.len(), euler_phi(720_720));
        let chi = g.character(g.len() - 1).unwrap();
        assert_eq!(chi.value(1), Complex64::new(1.0, 0.0));
        assert!(chi.conductor() <= 720_720);
    }
}
