//! Exact modular arithmetic substrate: prime modulus selection, centered
//! representatives, inverses.
//!
//! The ambient interval [N] = {0, …, N−1} is embedded in Z_m for a prime m
//! with 4N < m < 8N. Any modulus in that range keeps length-3 progressions
//! wrap-free; the smallest prime is chosen so runs are reproducible.

use serde::Serialize;

use crate::{Error, Result};

/// Ambient interval length N together with its prime modulus m, 4N < m < 8N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModContext {
    n: u64,
    m: u64,
}

impl ModContext {
    /// Interval length N.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Prime modulus m.
    pub fn m(&self) -> u64 {
        self.m
    }
}

/// Returns the smallest prime m with 4N < m < 8N.
///
/// Bertrand's postulate guarantees such a prime exists for every N ≥ 1.
pub fn choose_modulus(n: u64) -> Result<ModContext> {
    if n == 0 {
        return Err(Error::InvalidInput("interval length must be positive".into()));
    }
    let lo = 4 * n + 1;
    let hi = 8 * n; // exclusive
    for m in lo..hi {
        if is_prime_u64(m) {
            return Ok(ModContext { n, m });
        }
    }
    Err(Error::Internal(format!("no prime in (4*{n}, 8*{n})")))
}

/// The unique integer s ≡ x (mod m) with −m/2 < s ≤ m/2.
pub fn centered_rep(x: u64, m: u64) -> i64 {
    debug_assert!(m >= 1 && x < m);
    if 2 * x <= m {
        x as i64
    } else {
        x as i64 - m as i64
    }
}

/// Multiplicative inverse of a modulo a prime m. Rejects a ≡ 0.
pub fn mod_inverse(a: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("modulus {m} too small")));
    }
    let a = a % m;
    if a == 0 {
        return Err(Error::InvalidInput("zero has no inverse".into()));
    }
    // Extended Euclid over signed 128-bit; m < 2^63 so nothing overflows.
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::InvalidInput(format!("{a} not invertible mod {m}")));
    }
    Ok(t0.rem_euclid(m as i128) as u64)
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
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

/// Deterministic Miller–Rabin, exact for every u64.
///
/// The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to
/// be sound for all n < 3.3·10²⁴, which covers the full u64 range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let trailing = (n - 1).trailing_zeros();
    let odd = (n - 1) >> trailing;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, odd, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..trailing {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(choose_modulus(1).unwrap().m(), 5);
        // trial-division scan of 21, 22, 23
        assert_eq!(choose_modulus(5).unwrap().m(), 23);
        // trial-division scan of 41..79
        assert_eq!(choose_modulus(10).unwrap().m(), 41);
    }

    #[test]
    fn modulus_prime_and_in_range_up_to_1e4() {
        for n in 1..=10_000u64 {
            let ctx = choose_modulus(n).unwrap();
            assert!(is_prime_u64(ctx.m()));
            assert!(4 * n < ctx.m() && ctx.m() < 8 * n, "n={n} m={}", ctx.m());
        }
    }

    #[test]
    fn modulus_is_smallest() {
        for n in [1u64, 2, 3, 5, 10, 100, 991] {
            let ctx = choose_modulus(n).unwrap();
            for m in 4 * n + 1..ctx.m() {
                assert!(!is_prime_trial(m), "missed smaller prime {m} for n={n}");
            }
        }
    }

    #[test]
    fn centered_examples() {
        assert_eq!(centered_rep(7, 23), 7);
        assert_eq!(centered_rep(21, 23), -2);
        assert_eq!(centered_rep(12, 23), -11); // 12 > 23/2
        assert_eq!(centered_rep(0, 23), 0);
        assert_eq!(centered_rep(2, 4), 2); // s = m/2 kept positive
        assert_eq!(centered_rep(3, 4), -1);
    }

    #[test]
    fn centered_congruent_and_small() {
        for m in 1..200u64 {
            for x in 0..m {
                let s = centered_rep(x, m);
                assert_eq!(s.rem_euclid(m as i64) as u64, x);
                assert!(2 * s.abs() as u64 <= m);
                assert!(2 * s > -(m as i64));
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 23).unwrap(), 1);
        assert_eq!(mod_inverse(2, 23).unwrap(), 12);
        assert_eq!(mod_inverse(7, 23).unwrap(), 10); // 70 = 3·23 + 1
        assert!(mod_inverse(0, 23).is_err());
        assert!(mod_inverse(23, 23).is_err());
    }

    #[test]
    fn inverse_round_trip_small_primes() {
        for m in (2..=1000u64).filter(|&m| is_prime_trial(m)) {
            for a in 1..m {
                let b = mod_inverse(a, m).unwrap();
                assert_eq!(mul_mod(a, b, m), 1, "a={a} m={m}");
            }
        }
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), is_prime_trial(n), "n={n}");
        }
        assert!(is_prime_u64(2_147_483_647)); // 2^31 − 1
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }
}
