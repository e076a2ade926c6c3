//! Independent brute-force reference implementations used by tests.
//!
//! Everything here evaluates defining sums directly, with no sliding windows,
//! no support restriction, no identities, and no code shared with the
//! optimized kernels. Slow on purpose.

use crate::correlation::{BalancedProfile, ScaledFn};
use crate::rat::{rat_frac, Rat};
use crate::sets::DenseSet;
use crate::{Error, Result};

/// Enumeration-based extremal search is refused above this length.
pub const ENUMERATE_MAX_N: u64 = 24;

/// Progression-search oracle budget.
pub const PROGRESSION_MAX_N: u64 = 600;

/// Counts pairs (x, r), r any integer including 0 and negatives, with
/// x, x+r, x+2r all in A.
pub fn count_3aps_integer(set: &DenseSet) -> u64 {
    let elems = set.elements();
    let mut count = 0u64;
    for &first in elems {
        for &last in elems {
            if (first + last) % 2 != 0 {
                continue;
            }
            let middle = (first + last) / 2;
            if elems.binary_search(&middle).is_ok() {
                count += 1;
            }
        }
    }
    count
}

/// R̃(t) by the full definitional loop over Z_m.
pub fn r_naive(profile: &BalancedProfile, t: u64) -> i128 {
    let m = profile.ctx().m();
    let v = profile.values();
    let mut acc = 0i128;
    for x in 0..m {
        acc += v[x as usize] as i128 * v[((x + t) % m) as usize] as i128;
    }
    acc
}

/// Ṽ_d by recomputing every window sum from scratch.
pub fn v_naive(profile: &BalancedProfile, d: u64, ell: u64) -> i128 {
    let m = profile.ctx().m();
    let v = profile.values();
    let mut total = 0i128;
    for x in 0..m {
        let mut s = 0i128;
        for i in 0..ell {
            s += v[((x + i * d) % m) as usize] as i128;
        }
        total += s * s;
    }
    total
}

/// Λ(g₁,g₂,g₃) by the full double loop over (x, r) ∈ Z_m².
pub fn trilinear_naive(g1: &ScaledFn, g2: &ScaledFn, g3: &ScaledFn) -> Rat {
    assert_eq!(g1.m(), g2.m());
    assert_eq!(g2.m(), g3.m());
    let m = g1.m();
    let mut acc = 0i128;
    for x in 0..m {
        for r in 0..m {
            acc += g1.values()[x as usize] as i128
                * g2.values()[((x + r) % m) as usize] as i128
                * g3.values()[((x + 2 * r) % m) as usize] as i128;
        }
    }
    rat_frac(acc, g1.denom() as i128 * g2.denom() as i128 * g3.denom() as i128)
}

/// An integer arithmetic progression a, a+s, …, a+(L−1)s inside [n].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progression {
    pub start: u64,
    pub step: i64,
    pub len: u64,
}

/// Maximizes |A ∩ P| / |P| over all progressions P ⊆ [n] with |P| ≥ min_len.
/// Ties prefer longer P, then smaller start, then smaller step.
pub fn best_progression_exhaustive(
    set: &DenseSet,
    min_len: u64,
) -> Result<(Progression, Rat)> {
    let n = set.n();
    if n > PROGRESSION_MAX_N {
        return Err(Error::Budget(format!(
            "progression oracle supports n <= {PROGRESSION_MAX_N}, got {n}"
        )));
    }
    if min_len == 0 || min_len > n {
        return Err(Error::InvalidInput(format!("min_len {min_len} outside [1, {n}]")));
    }
    let member: Vec<bool> = {
        let mut v = vec![false; n as usize];
        for &x in set.elements() {
            v[x as usize] = true;
        }
        v
    };
    // (hits, len, start, step): better means strictly larger density, else
    // longer, else smaller start, else smaller step.
    let mut best: Option<(u64, u64, u64, u64)> = None;
    let mut consider = |hits: u64, len: u64, start: u64, step: u64| {
        let better = match best {
            None => true,
            Some((bh, bl, bs, bstep)) => {
                let lhs = hits as u128 * bl as u128;
                let rhs = bh as u128 * len as u128;
                lhs > rhs
                    || (lhs == rhs
                        && (len > bl || (len == bl && (start < bs || (start == bs && step < bstep)))))
            }
        };
        if better {
            best = Some((hits, len, start, step));
        }
    };
    for start in 0..n {
        for step in 1..=(n - 1).max(1) {
            if min_len >= 2 && start + (min_len - 1) * step >= n {
                break; // longer steps cannot reach min_len either
            }
            let mut hits = 0u64;
            let mut len = 0u64;
            let mut x = start;
            loop {
                if member[x as usize] {
                    hits += 1;
                }
                len += 1;
                if len >= min_len {
                    consider(hits, len, start, step);
                }
                match x.checked_add(step) {
                    Some(next) if next < n => x = next,
                    _ => break,
                }
            }
        }
    }
    let (hits, len, start, step) = best.ok_or(Error::Internal("no progression considered".into()))?;
    Ok((
        Progression { start, step: step as i64, len },
        rat_frac(hits as i128, len as i128),
    ))
}

/// Maximum 3AP-free subset of [n] by exhaustive subset enumeration, as an
/// independent cross-check of the branch-and-bound search. O(2ⁿ·n).
pub fn r3_enumerate(n: u64) -> Result<(u64, DenseSet)> {
    if n == 0 {
        return Err(Error::InvalidInput("length must be positive".into()));
    }
    if n > ENUMERATE_MAX_N {
        return Err(Error::Budget(format!(
            "enumeration supports n <= {ENUMERATE_MAX_N}, got {n}"
        )));
    }
    let n = n as u32;
    let total = 1usize << n;
    let mut free = vec![false; total];
    free[0] = true;
    let mut best_mask = 0usize;
    let mut best_count = 0u32;
    for mask in 1..total {
        let x = usize::BITS - 1 - mask.leading_zeros(); // highest element
        let rest = mask & !(1 << x);
        free[mask] = free[rest] && !completes_dp(rest, x);
        if free[mask] {
            let count = mask.count_ones();
            if count > best_count {
                best_count = count;
                best_mask = mask;
            }
        }
    }
    let elements: Vec<u64> = (0..n as u64).filter(|&i| best_mask >> i & 1 == 1).collect();
    Ok((best_count as u64, DenseSet::new(n as u64, elements)?))
}

fn completes_dp(rest: usize, x: u32) -> bool {
    let lo = x.div_ceil(2);
    (lo..x).any(|b| rest >> b & 1 == 1 && rest >> (2 * b - x) & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{balanced_profile, trilinear};
    use crate::modring::choose_modulus;
    use crate::rat::rat_int;
    use crate::sets::{is_3ap_free, r3_exact};

    #[test]
    fn count_examples() {
        let a = DenseSet::new(5, vec![0, 1, 3, 4]).unwrap();
        assert_eq!(count_3aps_integer(&a), 4); // only r = 0 terms

        let interval = DenseSet::new(5, (0..5).collect()).unwrap();
        assert_eq!(count_3aps_integer(&interval), 13); // 5 + 2·(3+1)

        let empty = DenseSet::new(5, vec![]).unwrap();
        assert_eq!(count_3aps_integer(&empty), 0);
    }

    #[test]
    fn naive_kernels_match_example() {
        let set = DenseSet::new(5, vec![0, 1, 3, 4]).unwrap();
        let ctx = choose_modulus(5).unwrap();
        let p = balanced_profile(&set, ctx).unwrap();
        assert_eq!(r_naive(&p, 1), -6);
        assert_eq!(v_naive(&p, 1, 2), 28);
        let interval = DenseSet::new(5, (0..5).collect()).unwrap();
        let ind = ScaledFn::indicator(&interval, ctx.m()).unwrap();
        assert_eq!(trilinear_naive(&ind, &ind, &ind), rat_int(13));
        assert_eq!(
            trilinear_naive(&ind, &ind, &ind),
            trilinear(&ind, &ind, &ind).unwrap()
        );
    }

    #[test]
    fn progression_oracle_examples() {
        let set = DenseSet::new(5, vec![0, 1, 3, 4]).unwrap();
        let (_, density) = best_progression_exhaustive(&set, 2).unwrap();
        assert_eq!(density, rat_int(1)); // e.g. {0, 1}

        let full = DenseSet::new(7, (0..7).collect()).unwrap();
        let (_, density) = best_progression_exhaustive(&full, 3).unwrap();
        assert_eq!(density, rat_int(1));

        let empty = DenseSet::new(4, vec![]).unwrap();
        let (_, density) = best_progression_exhaustive(&empty, 1).unwrap();
        assert_eq!(density, rat_int(0));

        let big = DenseSet::new(PROGRESSION_MAX_N + 1, vec![0]).unwrap();
        assert!(best_progression_exhaustive(&big, 1).is_err());
    }

    #[test]
    fn progression_tie_breaking() {
        // Density 1 comes from many singletons/pairs; the longest wins.
        let set = DenseSet::new(9, vec![0, 2, 4, 6]).unwrap();
        let (p, density) = best_progression_exhaustive(&set, 2).unwrap();
        assert_eq!(density, rat_int(1));
        assert_eq!((p.start, p.step, p.len), (0, 2, 4));
    }

    #[test]
    fn enumeration_matches_branch_and_bound() {
        for n in 1..=16u64 {
            let (enum_size, enum_witness) = r3_enumerate(n).unwrap();
            let (bb_size, _) = r3_exact(n).unwrap();
            assert_eq!(enum_size, bb_size, "n={n}");
            assert!(is_3ap_free(&enum_witness).free);
        }
        assert!(r3_enumerate(ENUMERATE_MAX_N + 1).is_err());
    }
}
