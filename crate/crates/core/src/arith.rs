//! Exact integer helpers: modular powers, Miller–Rabin, trial-division
//! factorization and primitive roots.

use crate::error::{Error, Result};

/// Trial division bound used by [`factorize`].
pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization `n = Π p^e` with primes ascending.
///
/// Trial division runs up to [`TRIAL_DIVISION_LIMIT`]; a leftover cofactor is
/// accepted only when it is itself prime.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let original = n;
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    let mut d = 3u64;
    while d <= TRIAL_DIVISION_LIMIT && d.saturating_mul(d) <= n {
        push(d, &mut n);
        d += 2;
    }
    if n > 1 {
        if d.saturating_mul(d) > n || is_prime(n) {
            out.push((n, 1));
        } else {
            return Err(Error::Factorization(original));
        }
    }
    Ok(out)
}

pub fn euler_phi(n: u64) -> u64 {
    let factors = factorize(n).expect("n > 0");
    factors.iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Smallest primitive root modulo an odd prime `p`.
pub fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order_factors = factorize(p - 1).expect("p - 1 > 0");
    (2..p)
        .find(|&g| {
            order_factors
                .iter()
                .all(|&(f, _)| pow_mod(g, (p - 1) / f, p) != 1)
        })
        .expect("every prime has a primitive root")
}

/// A generator of the cyclic group `(Z/p^e)^*`, `p` odd.
pub fn primitive_root_mod_prime_power(p: u64, e: u32) -> u64 {
    let g = primitive_root_mod_prime(p);
    if e == 1 {
        return g;
    }
    // g generates mod p^e for all e >= 2 iff it does mod p^2.
    if pow_mod(g, p - 1, p * p) != 1 {
        g
    } else {
        g + p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn miller_rabin_matches_trial_division() {
        let naive = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), naive(n), "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn factorize_small_and_large() {
        assert_eq!(factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(1).unwrap(), vec![]);
        assert_eq!(factorize(1_000_003 * 97).unwrap(), vec![(97, 1), (1_000_003, 1)]);
        // product of two primes just above the trial-division limit
        assert_eq!(
            factorize(1_000_003 * 1_000_033),
            Err(Error::Factorization(1_000_003 * 1_000_033))
        );
    }

    #[test]
    fn primitive_roots_generate() {
        for &(p, e) in &[(3u64, 1u32), (3, 4), (5, 2), (7, 3), (29, 2), (40487, 2)] {
            let m = p.pow(e);
            let g = primitive_root_mod_prime_power(p, e);
            let order = euler_phi(m);
            for (f, _) in factorize(order).unwrap() {
                assert_ne!(pow_mod(g, order / f, m), 1, "p = {p}, e = {e}");
            }
            assert_eq!(pow_mod(g, order, m), 1);
        }
    }
}
