//! Prime enumeration (segmented Eratosthenes) and a smallest-prime-factor
//! table.

use crate::error::{Error, Result};

/// Largest bound accepted by [`primes_up_to`].
pub const SIEVE_LIMIT: u64 = 100_000_000;

const SEGMENT: usize = 1 << 16;

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_LIMIT {
        return Err(Error::domain(format!(
            "sieve bound {limit} exceeds {SIEVE_LIMIT}"
        )));
    }
    Ok(primes_in_range(2, limit))
}

/// Primes in `[lo, hi]` by a segmented sieve. Base primes up to `sqrt(hi)` are
/// found with a small plain sieve.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let root = (hi as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root);
    let mut out = Vec::new();
    let mut seg = vec![true; SEGMENT];
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT as u64 - 1).min(hi);
        let len = (end - start + 1) as usize;
        seg[..len].fill(true);
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut m = first;
            while m <= end {
                seg[(m - start) as usize] = false;
                m += p;
            }
        }
        out.extend(
            seg[..len]
                .iter()
                .enumerate()
                .filter(|(_, &is_p)| is_p)
                .map(|(i, _)| start + i as u64),
        );
        start = end + 1;
    }
    out
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut is_p = vec![true; n + 1];
    is_p[0] = false;
    if n >= 1 {
        is_p[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is_p[i] {
            (i * i..=n).step_by(i).for_each(|j| is_p[j] = false);
        }
        i += 1;
    }
    is_p.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Smallest prime factor for every `n <= limit` (`spf[0] = spf[1] = 0`).
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub const MAX_LIMIT: u64 = 10_000_000;

    pub fn new(limit: u64) -> Result<Self> {
        if limit > Self::MAX_LIMIT {
            return Err(Error::domain(format!(
                "smallest-prime-factor table limited to {}",
                Self::MAX_LIMIT
            )));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn largest_factor(&self, mut n: u64) -> u64 {
        let mut largest = 1;
        while n > 1 {
            let p = self.smallest_factor(n);
            largest = p;
            n /= p;
        }
        largest
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    #[test]
    fn sieve_matches_miller_rabin() {
        let ps = primes_up_to(200_000).unwrap();
        let expected: Vec<u64> = (0..=200_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, expected);
        assert_eq!(primes_up_to(1).unwrap(), Vec::<u64>::new());
        assert_eq!(primes_up_to(2).unwrap(), vec![2]);
    }

    #[test]
    fn segment_window() {
        let ps = primes_in_range(999_900, 1_000_100);
        let expected: Vec<u64> = (999_900..=1_000_100).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, expected);
        assert_eq!(primes_up_to(10_000).unwrap().len(), 1229);
    }

    #[test]
    fn sieve_rejects_huge_bound() {
        assert!(primes_up_to(SIEVE_LIMIT + 1).is_err());
    }

    #[test]
    fn spf_table() {
        let t = SpfTable::new(1000).unwrap();
        assert_eq!(t.smallest_factor(2), 2);
        assert_eq!(t.smallest_factor(91), 7);
        assert_eq!(t.smallest_factor(997), 997);
        assert_eq!(t.largest_factor(360), 5);
        assert_eq!(t.largest_factor(1), 1);
    }
}
