//! One full density-increment step: find a modular progression window where
//! the balanced function has large positive mass, pass to a subblock whose
//! step is represented by a small integer, and intersect with [N] to obtain a
//! genuine integer progression on which the set is denser.
//!
//! Certified mode follows the pigeonhole chain and asserts an exact integer
//! certificate at every link. Greedy mode searches the same candidate space
//! (all steps d, all blocks) for the best rectified density directly; it is
//! the default for experiments because the certified constants are
//! pessimistic at desk scale.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::InequalityReport;
use crate::correlation::{
    autocorrelation, balanced_profile, energy, v_profile, window_sums, BalancedProfile,
    EnergyValue,
};
use crate::modring::{centered_rep, ModContext};
use crate::rat::{rat_frac, rat_int, serde_ratio, Rat};
use crate::sets::DenseSet;
use crate::{Error, Result};

/// Above this modulus the greedy search samples steps instead of scanning
/// all of Z_m^×.
const GREEDY_STEP_EXHAUSTIVE_LIMIT: u64 = 8192;
const GREEDY_STEP_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Certified,
    Greedy,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certified" => Ok(Mode::Certified),
            "greedy" => Ok(Mode::Greedy),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IncrementConfig {
    pub mode: Mode,
    /// Window-length constant in ℓ = ⌊c_ell·β̂·m/α²⌋; 0 < c_ell ≤ 1.
    pub c_ell: Rat,
    /// Block-length constant in K = ⌊c_block·⌊√ℓ⌋⌋; 0 < c_block ≤ 1/10 so
    /// block travel stays under m/10.
    pub c_block: Rat,
    /// Fixed window length; wins over the measured choice when set.
    pub ell_override: Option<u64>,
    /// Minimum acceptable rectified progression length.
    pub min_len: u64,
    /// Seed for the greedy step sample on large moduli.
    pub seed: u64,
}

impl Default for IncrementConfig {
    fn default() -> Self {
        IncrementConfig {
            mode: Mode::Greedy,
            c_ell: rat_frac(1, 64),
            c_block: rat_frac(1, 20),
            ell_override: None,
            min_len: 8,
            seed: 0,
        }
    }
}

impl IncrementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_ell <= rat_int(0) || self.c_ell > rat_int(1) {
            return Err(Error::InvalidInput("c_ell must lie in (0, 1]".into()));
        }
        if self.c_block <= rat_int(0) || self.c_block > rat_frac(1, 10) {
            return Err(Error::InvalidInput("c_block must lie in (0, 1/10]".into()));
        }
        if self.min_len == 0 {
            return Err(Error::InvalidInput("min_len must be positive".into()));
        }
        Ok(())
    }
}

/// A modular subprogression: residues start, start+s, …, start+(len−1)s.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Block {
    pub start: u64,
    pub step: i64,
    pub len: u64,
    /// Σ Ñf over the block's terms.
    #[serde(skip)]
    pub sum: i128,
}

/// A genuine integer progression a, a+s, …, a+(L−1)s inside [N].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntProgression {
    pub a: u64,
    pub s: i64,
    #[serde(rename = "L")]
    pub len: u64,
}

impl IntProgression {
    pub fn terms(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| (self.a as i64 + i as i64 * self.s) as u64)
    }
}

/// The outcome of one increment step, with the chain certificates attached.
#[derive(Debug, Clone, Serialize)]
pub struct IncrementResult {
    pub d: u64,
    pub x: u64,
    pub ell: u64,
    pub q: u64,
    pub s: i64,
    pub block: Block,
    #[serde(rename = "P")]
    pub progression: IntProgression,
    #[serde(with = "serde_ratio")]
    pub eta: Rat,
    #[serde(with = "serde_ratio")]
    pub new_density: Rat,
    pub mode: Mode,
    pub certificates: Vec<InequalityReport>,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

fn floor_to_u64(r: &Rat) -> u64 {
    use num_traits::ToPrimitive;
    r.floor().numer().to_u64().unwrap_or(u64::MAX)
}

/// ℓ = clamp(⌊c_ell·β̂·m/α²⌋, 1, ⌈m/2⌉−1) with β̂ = E(f)/m³ measured.
pub fn choose_window(
    profile: &BalancedProfile,
    energy: EnergyValue,
    cfg: &IncrementConfig,
) -> Result<u64> {
    let ctx = profile.ctx();
    let m = ctx.m();
    let max_ell = m.div_ceil(2) - 1;
    if let Some(ell) = cfg.ell_override {
        if ell < 1 || ell > max_ell {
            return Err(Error::InvalidInput(format!(
                "ell override {ell} outside [1, {max_ell}]"
            )));
        }
        return Ok(ell);
    }
    if energy.value() == 0 {
        return Err(Error::ZeroEnergy);
    }
    // β̂·m/α² = Ẽ / (N²·|A|²·m²)
    let raw = &cfg.c_ell
        * Rat::new(
            BigInt::from(energy.value()),
            BigInt::from(ctx.n()).pow(2)
                * BigInt::from(profile.set_size()).pow(2)
                * BigInt::from(m).pow(2),
        );
    Ok(floor_to_u64(&raw).clamp(1, max_ell))
}

/// The nonzero step maximizing Ṽ_d (smallest d on ties), with the exact
/// pigeonhole certificate Σ_{d'≠0} Ṽ_{d'}² ≤ Ṽ_d·Σ_{d'} Ṽ_{d'}.
pub fn best_step(v_values: &[i128]) -> Result<(u64, i128, InequalityReport)> {
    let mut best_d = 0u64;
    let mut best_v = i128::MIN;
    for (d, &v) in v_values.iter().enumerate().skip(1) {
        if v > best_v {
            best_v = v;
            best_d = d as u64;
        }
    }
    if best_d == 0 || best_v <= 0 {
        return Err(Error::ZeroEnergy);
    }
    let total: BigInt = v_values.iter().map(|&v| BigInt::from(v)).sum();
    let sq_nonzero: BigInt = v_values[1..].iter().map(|&v| BigInt::from(v) * v).sum();
    let cert = InequalityReport::check(
        "pigeonhole_chain",
        Rat::from_integer(sq_nonzero),
        Rat::from_integer(BigInt::from(best_v) * total),
    );
    Ok((best_d, best_v, cert))
}

/// The start maximizing S̃_d(x) (smallest x on ties), with the positive-mass
/// certificate Ṽ_d ≤ 2·ℓ·N·m·max_x S̃_d(x).
pub fn best_start(
    profile: &BalancedProfile,
    d: u64,
    ell: u64,
    v_d: i128,
) -> Result<(u64, i64, InequalityReport)> {
    if d == 0 {
        return Err(Error::InvalidInput("step must be nonzero".into()));
    }
    let w = window_sums(profile, d, ell)?;
    let (x, smax) = argmax_sval(w.svals());
    let ctx = profile.ctx();
    let bound = BigInt::from(2)
        * BigInt::from(ell)
        * BigInt::from(ctx.n())
        * BigInt::from(ctx.m())
        * BigInt::from(smax);
    let cert = InequalityReport::check(
        "start_mass",
        Rat::from_integer(BigInt::from(v_d)),
        Rat::from_integer(bound),
    );
    Ok((x, smax, cert))
}

fn argmax_sval(svals: &[i64]) -> (u64, i64) {
    let mut best_x = 0usize;
    for (x, &s) in svals.iter().enumerate().skip(1) {
        if s > svals[best_x] {
            best_x = x;
        }
    }
    (best_x as u64, svals[best_x])
}

/// The multiplier q ∈ [1, ⌊√ℓ⌋] minimizing |centered_rep(q·d)| (smallest q on
/// ties), with the pigeonhole certificate |s|·⌊√ℓ⌋ ≤ m.
pub fn small_step(d: u64, ctx: ModContext, ell: u64) -> Result<(u64, i64, InequalityReport)> {
    if d == 0 || ell == 0 {
        return Err(Error::InvalidInput("small_step needs d ≠ 0 and ℓ ≥ 1".into()));
    }
    let m = ctx.m();
    let root = isqrt(ell).max(1);
    let mut best_q = 1u64;
    let mut best_s = centered_rep(d % m, m);
    let mut residue = d % m;
    for q in 2..=root {
        residue += d;
        if residue >= m {
            residue -= m;
        }
        let s = centered_rep(residue, m);
        if s.unsigned_abs() < best_s.unsigned_abs() {
            best_q = q;
            best_s = s;
        }
    }
    if best_s == 0 {
        return Err(Error::Internal("q·d ≡ 0 with q < m and d ≠ 0".into()));
    }
    let cert = InequalityReport::check(
        "small_step_bound",
        rat_int(best_s.unsigned_abs() as i128 * root as i128),
        rat_int(m as i128),
    );
    Ok((best_q, best_s, cert))
}

/// Block length K = max(1, ⌊c_block·⌊√ℓ⌋⌋), shrunk until even a merged
/// block (up to 2K−1 terms) travels < m/10.
fn certified_block_len(cfg: &IncrementConfig, ell: u64, s: i64, m: u64) -> u64 {
    let root = isqrt(ell).max(1);
    let mut k = floor_to_u64(&(&cfg.c_block * rat_int(root as i128))).max(1);
    while k > 1 && 10 * (2 * k - 2) * s.unsigned_abs() >= m {
        k -= 1;
    }
    k
}

/// The largest block length whose merged blocks still travel < m/10.
fn travel_budget_block_len(s: i64, m: u64) -> u64 {
    (m / (20 * s.unsigned_abs())).max(1)
}

/// Splits the window x, x+d, …, x+(ℓ−1)d into q interleaved progressions of
/// step s ≡ q·d, then into consecutive blocks of K terms. A final chunk
/// shorter than K merges into its predecessor.
fn block_partition(
    profile: &BalancedProfile,
    x: u64,
    d: u64,
    ell: u64,
    q: u64,
    s: i64,
    k: u64,
) -> Vec<Block> {
    let ctx = profile.ctx();
    let m = ctx.m();
    let v = profile.values();
    let mut blocks = Vec::new();
    let step_mod = (q as u128 * d as u128 % m as u128) as u64;
    for j in 0..q.min(ell) {
        let terms = (ell - j).div_ceil(q);
        let nblocks = (terms / k).max(1);
        let mut residue = ((x as u128 + j as u128 * d as u128) % m as u128) as u64;
        let mut pos = 0u64;
        for b in 0..nblocks {
            let end = if b + 1 == nblocks { terms } else { (b + 1) * k };
            let start_residue = residue;
            let start_pos = pos;
            let mut sum = 0i128;
            while pos < end {
                sum += v[residue as usize] as i128;
                residue += step_mod;
                if residue >= m {
                    residue -= m;
                }
                pos += 1;
            }
            blocks.push(Block { start: start_residue, step: s, len: end - start_pos, sum });
        }
    }
    blocks
}

/// Chooses the partition block with the largest exact mean (earliest on
/// ties). The mediant inequality guarantees its mean is at least the window
/// mean, which is the certificate emitted alongside.
pub fn extract_block(
    profile: &BalancedProfile,
    x: u64,
    d: u64,
    ell: u64,
    q: u64,
    s: i64,
    cfg: &IncrementConfig,
) -> Result<(Block, Vec<InequalityReport>)> {
    let k = certified_block_len(cfg, ell, s, profile.ctx().m());
    let blocks = block_partition(profile, x, d, ell, q, s, k);
    if blocks.is_empty() {
        return Err(Error::Internal("window produced no blocks".into()));
    }
    let window_sum: i128 = blocks.iter().map(|b| b.sum).sum();
    let total_len: u64 = blocks.iter().map(|b| b.len).sum();
    if total_len != ell {
        return Err(Error::Internal(format!(
            "blocks cover {total_len} of {ell} window terms"
        )));
    }
    let mut best = &blocks[0];
    for b in &blocks[1..] {
        // mean(b) > mean(best) ⟺ sum_b·len_best > sum_best·len_b
        if b.sum * best.len as i128 > best.sum * b.len as i128 {
            best = b;
        }
    }
    let m = profile.ctx().m();
    let certs = vec![
        InequalityReport::check(
            "block_mean",
            rat_int(window_sum * best.len as i128),
            rat_int(best.sum * ell as i128),
        ),
        InequalityReport::check(
            "block_travel",
            rat_int(10 * (best.len as i128 - 1) * s.unsigned_abs() as i128),
            rat_int(m as i128 - 1),
        ),
    ];
    Ok((*best, certs))
}

/// Intersects a small-step block with [N]. The terms landing in [N] must
/// form one consecutive run (copies of [N] on the integer line are separated
/// by gaps > 3m/4 while the block travels < m/10); the run is returned as a
/// genuine integer progression.
pub fn rectify(
    block: &Block,
    profile: &BalancedProfile,
) -> Result<(IntProgression, Vec<InequalityReport>)> {
    let ctx = profile.ctx();
    let m = ctx.m() as i64;
    let n = ctx.n();
    let mut run_start: Option<u64> = None;
    let mut run_len = 0u64;
    let mut run_closed = false;
    let mut first_value = 0u64;
    for i in 0..block.len {
        let residue = (block.start as i64 + i as i64 * block.step).rem_euclid(m) as u64;
        if residue < n {
            if run_closed {
                return Err(Error::Internal("block meets [N] in two separate runs".into()));
            }
            if run_start.is_none() {
                run_start = Some(i);
                first_value = residue;
            }
            run_len += 1;
        } else if run_start.is_some() {
            run_closed = true;
        }
    }
    if run_start.is_none() {
        return Err(Error::NoIncrement);
    }
    let progression = IntProgression { a: first_value, s: block.step, len: run_len };
    for t in progression.terms() {
        if t >= n {
            return Err(Error::Internal(format!("rectified term {t} outside [0, {n})")));
        }
    }
    // f vanishes off [N], so the run carries the whole block sum.
    let run_sum: i128 = progression
        .terms()
        .map(|t| profile.values()[t as usize] as i128)
        .sum();
    let certs = vec![
        InequalityReport::identity("sum_preserved", rat_int((run_sum - block.sum).abs())),
        // Scaled form of Σ_P f ≤ |P|: each term contributes at most N.
        InequalityReport::check(
            "length_bound",
            rat_int(block.sum),
            rat_int(run_len as i128 * n as i128),
        ),
    ];
    Ok((progression, certs))
}

struct Pipeline<'a> {
    profile: &'a BalancedProfile,
    set: &'a DenseSet,
    ctx: ModContext,
    /// Window length from the measured energy ratio.
    ell: u64,
    /// Widest feasible window, used by the greedy search.
    ell_wide: u64,
}

impl Pipeline<'_> {
    /// eta, new_density, and the density-accounting certificate for one
    /// rectified progression.
    fn accounting(&self, progression: &IntProgression, sum: i128) -> (Rat, Rat, InequalityReport) {
        let n = self.ctx.n();
        let eta = rat_frac(sum, progression.len as i128 * n as i128);
        let new_density = self.set.density() + &eta;
        let hits = progression.terms().filter(|&t| self.set.contains(t)).count() as i128;
        let direct = rat_frac(hits, progression.len as i128);
        let diff = &direct - &new_density;
        let abs = if diff < rat_int(0) { -diff } else { diff };
        let cert = InequalityReport::identity("density_accounting", abs);
        (eta, new_density, cert)
    }
}

fn certified_increment(p: &Pipeline, cfg: &IncrementConfig, vp: &[i128]) -> Result<IncrementResult> {
    let (d, v_d, cert_a) = best_step(vp)?;
    let (x, _smax, cert_b) = best_start(p.profile, d, p.ell, v_d)?;
    let (q, s, cert_d) = small_step(d, p.ctx, p.ell)?;
    let (block, block_certs) = extract_block(p.profile, x, d, p.ell, q, s, cfg)?;
    let (progression, rect_certs) = rectify(&block, p.profile)?;
    let (eta, new_density, cert_e) = p.accounting(&progression, block.sum);

    let mut certificates = vec![cert_a, cert_b];
    certificates.extend(block_certs);
    certificates.push(cert_d);
    certificates.extend(rect_certs);
    certificates.push(cert_e);
    if let Some(bad) = certificates.iter().find(|c| !c.holds) {
        return Err(Error::Internal(format!("chain certificate failed: {bad}")));
    }
    if eta <= rat_int(0) {
        return Err(Error::NoIncrement);
    }
    if progression.len < cfg.min_len {
        return Err(Error::TooShort { len: progression.len, min_len: cfg.min_len });
    }
    Ok(IncrementResult {
        d,
        x,
        ell: p.ell,
        q,
        s,
        block,
        progression,
        eta,
        new_density,
        mode: Mode::Certified,
        certificates,
    })
}

#[derive(Clone, Copy)]
struct Candidate {
    d: u64,
    x: u64,
    ell: u64,
    q: u64,
    s: i64,
    block: Block,
    progression: IntProgression,
}

impl Candidate {
    /// Orders by rectified mean Σ/L, cross-multiplied (lengths positive).
    fn better_than(&self, other: &Candidate) -> bool {
        self.block.sum * other.progression.len as i128
            > other.block.sum * self.progression.len as i128
    }
}

/// All blocks for one step d: both window lengths (measured and widest) and
/// both block sizings (certified and travel-budget). The certified partition
/// is always included, so the greedy optimum can never fall below the
/// certified one.
fn greedy_candidate_for_step(
    p: &Pipeline,
    cfg: &IncrementConfig,
    d: u64,
) -> Result<Option<Candidate>> {
    let mut best: Option<Candidate> = None;
    let mut ells = vec![p.ell, p.ell_wide];
    ells.dedup();
    for ell in ells {
        let w = window_sums(p.profile, d, ell)?;
        let (x, _) = argmax_sval(w.svals());
        let (q, s, _) = small_step(d, p.ctx, ell)?;
        let m = p.ctx.m();
        let mut ks = vec![certified_block_len(cfg, ell, s, m), travel_budget_block_len(s, m)];
        ks.sort_unstable();
        ks.dedup();
        for k in ks {
            for block in block_partition(p.profile, x, d, ell, q, s, k) {
                let (progression, _) = match rectify(&block, p.profile) {
                    Ok(v) => v,
                    Err(Error::NoIncrement) => continue,
                    Err(e) => return Err(e),
                };
                if progression.len < cfg.min_len {
                    continue;
                }
                let candidate = Candidate { d, x, ell, q, s, block, progression };
                if best.as_ref().is_none_or(|b| candidate.better_than(b)) {
                    best = Some(candidate);
                }
            }
        }
    }
    Ok(best)
}

fn greedy_increment(p: &Pipeline, cfg: &IncrementConfig, vp: &[i128]) -> Result<IncrementResult> {
    let m = p.ctx.m();
    let steps: Vec<u64> = if m - 1 <= GREEDY_STEP_EXHAUSTIVE_LIMIT {
        (1..m).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut sample: Vec<u64> =
            (0..GREEDY_STEP_SAMPLES).map(|_| rng.gen_range(1..m)).collect();
        // Keep the certified choice in the pool so greedy never does worse.
        if let Ok((d_star, _, _)) = best_step(vp) {
            sample.push(d_star);
        }
        sample.sort_unstable();
        sample.dedup();
        sample
    };

    let candidates: Vec<Option<Candidate>> = steps
        .par_iter()
        .with_min_len(16)
        .map(|&d| greedy_candidate_for_step(p, cfg, d))
        .collect::<Result<_>>()?;
    // Sequential reduction in ascending d keeps ties deterministic.
    let mut best: Option<Candidate> = None;
    let mut saw_candidate = false;
    for candidate in candidates.into_iter().flatten() {
        saw_candidate = true;
        if best.as_ref().is_none_or(|b| candidate.better_than(b)) {
            best = Some(candidate);
        }
    }
    let Some(win) = best else {
        return if saw_candidate {
            Err(Error::NoIncrement)
        } else {
            Err(Error::TooShort { len: 0, min_len: cfg.min_len })
        };
    };
    if win.block.sum <= 0 {
        return Err(Error::NoIncrement);
    }
    let (eta, new_density, cert_e) = p.accounting(&win.progression, win.block.sum);
    let (_, _, cert_d) = small_step(win.d, p.ctx, win.ell)?;
    let (_, rect_certs) = rectify(&win.block, p.profile)?;
    let mut certificates = vec![cert_d];
    certificates.extend(rect_certs);
    certificates.push(cert_e);
    if let Some(bad) = certificates.iter().find(|c| !c.holds) {
        return Err(Error::Internal(format!("greedy certificate failed: {bad}")));
    }
    Ok(IncrementResult {
        d: win.d,
        x: win.x,
        ell: win.ell,
        q: win.q,
        s: win.s,
        block: win.block,
        progression: win.progression,
        eta,
        new_density,
        mode: Mode::Greedy,
        certificates,
    })
}

/// Runs one density-increment step on A inside its modular context.
pub fn density_increment(
    set: &DenseSet,
    ctx: ModContext,
    cfg: &IncrementConfig,
) -> Result<IncrementResult> {
    cfg.validate()?;
    if set.size() == 0 || set.size() == set.n() {
        return Err(Error::ZeroEnergy); // f ≡ 0
    }
    let profile = balanced_profile(set, ctx)?;
    let corr = autocorrelation(&profile)?;
    let en = energy(&corr)?;
    if en.value() == 0 {
        return Err(Error::ZeroEnergy);
    }
    let ell = choose_window(&profile, en, cfg)?;
    let vp = v_profile(&corr, ell)?;
    // An explicit override pins the greedy search to that window too.
    let ell_wide = if cfg.ell_override.is_some() { ell } else { ctx.m().div_ceil(2) - 1 };
    let pipeline = Pipeline { profile: &profile, set, ctx, ell, ell_wide };
    match cfg.mode {
        Mode::Certified => certified_increment(&pipeline, cfg, &vp),
        Mode::Greedy => greedy_increment(&pipeline, cfg, &vp),
    }
}

/// Pulls A back along P: the rescaled set A' ⊆ [L] with i ∈ A' iff the i-th
/// term of P lies in A. Affine maps preserve 3APs in both directions, so A'
/// is 3AP-free whenever A is.
pub fn rescale(set: &DenseSet, progression: &IntProgression) -> Result<DenseSet> {
    let n = set.n() as i64;
    let mut elements = Vec::new();
    for i in 0..progression.len {
        let term = progression.a as i64 + i as i64 * progression.s;
        if term < 0 || term >= n {
            return Err(Error::InvalidInput(format!(
                "progression term {term} outside [0, {n})"
            )));
        }
        if set.contains(term as u64) {
            elements.push(i);
        }
    }
    DenseSet::new(progression.len, elements)
}
