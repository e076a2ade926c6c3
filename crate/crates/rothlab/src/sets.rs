//! Construction, validation, and exact extremal analysis of 3AP-free subsets
//! of [N] = {0, …, N−1}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rat::Rat;
use crate::{Error, Result};

/// Exhaustive extremal search is refused above this length.
pub const R3_MAX_N: u64 = 40;

/// A subset of [n] with exact rational density.
///
/// Serializes to the set file format `{"n": <int>, "elements": [<sorted ints>]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSet {
    n: u64,
    elements: Vec<u64>,
}

impl DenseSet {
    /// Builds a set over [n], validating that `elements` is strictly
    /// increasing and contained in [0, n).
    pub fn new(n: u64, elements: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("ambient length must be positive".into()));
        }
        for pair in elements.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidInput(format!(
                    "elements not strictly increasing at {} >= {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&last) = elements.last() {
            if last >= n {
                return Err(Error::InvalidInput(format!("element {last} outside [0, {n})")));
            }
        }
        Ok(DenseSet { n, elements })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DenseSet = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed set JSON: {e}")))?;
        DenseSet::new(raw.n, raw.elements)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn size(&self) -> u64 {
        self.elements.len() as u64
    }

    /// Exact density |A| / n.
    pub fn density(&self) -> Rat {
        Rat::new(self.size().into(), self.n.into())
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

/// Outcome of an exhaustive 3AP scan. `witness` is the lexicographically
/// first progression (x, x+r, x+2r), r ≠ 0, contained in the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreenessReport {
    pub free: bool,
    pub witness: Option<(u64, u64, u64)>,
}

/// Exhaustive freeness check over (first, middle) pairs; O(|A|²).
pub fn is_3ap_free(set: &DenseSet) -> FreenessReport {
    let elems = set.elements();
    for (i, &a) in elems.iter().enumerate() {
        for &b in &elems[i + 1..] {
            let c = 2 * b - a;
            if c >= set.n() {
                break;
            }
            if set.contains(c) {
                return FreenessReport { free: false, witness: Some((a, b, c)) };
            }
        }
    }
    FreenessReport { free: true, witness: None }
}

/// The lexicographically greedy 3AP-free subset of [n]: scan 0..n−1 and keep
/// an element iff it completes no progression with two kept elements.
pub fn greedy_free(n: u64) -> Result<DenseSet> {
    if n == 0 {
        return Err(Error::InvalidInput("length must be positive".into()));
    }
    let mut kept: Vec<u64> = Vec::new();
    let mut member = vec![false; n as usize];
    'candidates: for x in 0..n {
        // x > b > a, so x can only be the last term: need 2b − x kept.
        for &b in kept.iter().rev() {
            if 2 * b < x {
                break;
            }
            if member[(2 * b - x) as usize] {
                continue 'candidates;
            }
        }
        member[x as usize] = true;
        kept.push(x);
    }
    DenseSet::new(n, kept)
}

/// A 3AP-free subset built from a digit/sphere construction: integers whose
/// base-b digits satisfy a_i < b/2, restricted to the most popular sphere
/// Σ a_i² = r², with dimension k = round(√log₂ n) and b maximal with bᵏ ≤ n.
///
/// The output is re-verified 3AP-free before returning. When the construction
/// is not viable at this size (it needs very large n to produce anything
/// competitive), the greedy set is returned instead.
pub fn behrend(n: u64) -> Result<DenseSet> {
    if n < 2 {
        return Err(Error::InvalidInput("behrend requires n >= 2".into()));
    }
    let greedy = greedy_free(n)?;
    let constructed = behrend_sphere(n);
    let chosen = match constructed {
        Some(set) if set.size() > greedy.size() => set,
        _ => greedy,
    };
    let report = is_3ap_free(&chosen);
    if !report.free {
        return Err(Error::Internal(format!(
            "generator produced a 3AP: {:?}",
            report.witness
        )));
    }
    Ok(chosen)
}

fn behrend_sphere(n: u64) -> Option<DenseSet> {
    let k = ((n as f64).log2().sqrt().round() as u32).max(1);
    let base = integer_kth_root(n, k);
    // Digits must allow at least 0 and 1, so b/2 > 1.
    if base < 3 || k < 2 {
        return None;
    }
    let digit_max = (base - 1) / 2;
    let mut by_radius: Vec<Vec<u64>> = vec![Vec::new(); (k as u64 * digit_max * digit_max + 1) as usize];
    let mut digits = vec![0u64; k as usize];
    loop {
        let value: u64 = digits.iter().rev().fold(0, |acc, &d| acc * base + d);
        let radius: u64 = digits.iter().map(|&d| d * d).sum();
        if value < n {
            by_radius[radius as usize].push(value);
        }
        // Odometer increment over [0, digit_max]^k.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                let mut best: Vec<u64> = by_radius
                    .into_iter()
                    .max_by_key(|v| v.len())
                    .unwrap_or_default();
                best.sort_unstable();
                return DenseSet::new(n, best).ok();
            }
            if digits[pos] < digit_max {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn integer_kth_root(n: u64, k: u32) -> u64 {
    if k == 1 {
        return n;
    }
    let mut b = (n as f64).powf(1.0 / k as f64).round() as u64 + 1;
    while b > 1 && b.checked_pow(k).is_none_or(|p| p > n) {
        b -= 1;
    }
    b
}

/// Seeded Bernoulli subset: each element of [n] kept independently with
/// probability `alpha`. Same seed, same set.
pub fn random_subset(n: u64, alpha: f64, seed: u64) -> Result<DenseSet> {
    if n == 0 {
        return Err(Error::InvalidInput("length must be positive".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("density {alpha} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = (0..n).filter(|_| rng.gen::<f64>() < alpha).collect();
    DenseSet::new(n, elements)
}

/// Maximum size of a 3AP-free subset of [n], with one witness, by depth-first
/// branch and bound. Refuses n above [`R3_MAX_N`].
pub fn r3_exact(n: u64) -> Result<(u64, DenseSet)> {
    if n == 0 {
        return Err(Error::InvalidInput("length must be positive".into()));
    }
    if n > R3_MAX_N {
        return Err(Error::Budget(format!("r3_exact supports n <= {R3_MAX_N}, got {n}")));
    }
    // The greedy set seeds the incumbent so pruning bites immediately.
    let greedy = greedy_free(n)?;
    let mut best: Vec<u64> = greedy.elements().to_vec();
    let mut chosen: Vec<u64> = Vec::new();
    let mut member = vec![false; n as usize];
    branch(0, n, &mut chosen, &mut member, &mut best);
    let size = best.len() as u64;
    Ok((size, DenseSet::new(n, best)?))
}

fn branch(next: u64, n: u64, chosen: &mut Vec<u64>, member: &mut [bool], best: &mut Vec<u64>) {
    if chosen.len() + (n - next) as usize <= best.len() {
        return; // cannot beat the incumbent
    }
    if next == n {
        if chosen.len() > best.len() {
            *best = chosen.clone();
        }
        return;
    }
    // Take-first ordering makes the first optimum found the lexicographically
    // greedy one, which keeps witnesses reproducible.
    if !would_complete(next, member) {
        chosen.push(next);
        member[next as usize] = true;
        branch(next + 1, n, chosen, member, best);
        member[next as usize] = false;
        chosen.pop();
    }
    branch(next + 1, n, chosen, member, best);
}

fn would_complete(x: u64, member: &[bool]) -> bool {
    // x is larger than everything chosen, so x = a + 2r: need a = 2b − x with
    // b the middle term.
    let lo = x.div_ceil(2);
    (lo..x).any(|b| member[b as usize] && member[(2 * b - x) as usize])
}
