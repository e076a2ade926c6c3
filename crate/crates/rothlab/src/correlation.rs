//! Exact computation of the core correlation quantities in scaled integer
//! arithmetic.
//!
//! For a set A ⊆ [N] with |A| = a, the balanced function f = 1_A − α·1_[N]
//! is stored as Ñf(x) = N·f(x), an integer. Derived quantities carry the
//! matching powers of N:
//!
//! - autocorrelation  R̃(t) = N²·R(t) = Σ_x Ñf(x)·Ñf(x+t)
//! - energy           Ẽ    = N⁴·E(f) = Σ_t R̃(t)²
//! - window sums      S̃_d(x) = N·S_d(x),  Ṽ_d = N²·V_d = Σ_x S̃_d(x)²
//!
//! Every identity downstream is checked with integer equality, never a
//! tolerance. Kernels run in fixed-width integers (i64/i128) with an a-priori
//! capacity check derived from the bounds |Ñf| ≤ N, |R̃| ≤ N³, Ẽ ≤ 8N⁷;
//! the certification layer escalates to arbitrary precision where products
//! of these quantities appear.

use rayon::prelude::*;

use crate::modring::ModContext;
use crate::rat::Rat;
use crate::sets::DenseSet;
use crate::{Error, Result};

/// Largest ambient length the fixed-width kernels accept. With N ≤ 10⁵ every
/// intermediate above fits i128 with at least a 2× margin.
pub const N_MAX: u64 = 100_000;

fn check_capacity(n: u64) -> Result<()> {
    if n > N_MAX {
        return Err(Error::Capacity(format!(
            "ambient length {n} exceeds the fixed-width kernel bound {N_MAX}"
        )));
    }
    Ok(())
}

/// Scaled balanced function Ñf(x) = N·f(x) on Z_m.
#[derive(Debug, Clone)]
pub struct BalancedProfile {
    ctx: ModContext,
    values: Vec<i64>,
    set_size: u64,
}

impl BalancedProfile {
    pub fn ctx(&self) -> ModContext {
        self.ctx
    }

    /// Values indexed by x ∈ Z_m; scale factor N.
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn set_size(&self) -> u64 {
        self.set_size
    }
}

/// Builds Ñf for A inside its modular context: N−|A| on A, −|A| on [N]\A,
/// zero off [N].
pub fn balanced_profile(set: &DenseSet, ctx: ModContext) -> Result<BalancedProfile> {
    if set.n() != ctx.n() {
        return Err(Error::InvalidInput(format!(
            "set over [{}] does not match context N={}",
            set.n(),
            ctx.n()
        )));
    }
    check_capacity(ctx.n())?;
    let n = ctx.n();
    let size = set.size();
    let mut values = vec![0i64; ctx.m() as usize];
    for x in 0..n {
        values[x as usize] = -(size as i64);
    }
    for &x in set.elements() {
        values[x as usize] = (n - size) as i64;
    }
    debug_assert_eq!(values.iter().map(|&v| v as i128).sum::<i128>(), 0);
    Ok(BalancedProfile { ctx, values, set_size: size })
}

/// Scaled autocorrelation R̃(t) = N²·R(t) for every t ∈ Z_m.
#[derive(Debug, Clone)]
pub struct CorrelationProfile {
    ctx: ModContext,
    rvals: Vec<i64>,
}

impl CorrelationProfile {
    pub fn ctx(&self) -> ModContext {
        self.ctx
    }

    /// R̃(t) indexed by t; scale factor N².
    pub fn rvals(&self) -> &[i64] {
        &self.rvals
    }

    pub fn r0(&self) -> i64 {
        self.rvals[0]
    }
}

/// Exact autocorrelation by the definitional double loop, restricted to the
/// support [N]. The t-scan is data-parallel; every slot is written once, so
/// the result is bit-identical under any thread count.
pub fn autocorrelation(profile: &BalancedProfile) -> Result<CorrelationProfile> {
    let ctx = profile.ctx();
    check_capacity(ctx.n())?;
    let m = ctx.m() as usize;
    let n = ctx.n() as usize;
    let v = profile.values();
    let rvals: Vec<i64> = (0..m)
        .into_par_iter()
        .with_min_len(64)
        .map(|t| {
            let mut acc = 0i64; // |acc| ≤ N·N² = N³ < 2^63 for N ≤ N_MAX
            for x in 0..n {
                let mut y = x + t;
                if y >= m {
                    y -= m;
                }
                acc += v[x] * v[y];
            }
            acc
        })
        .collect();
    Ok(CorrelationProfile { ctx, rvals })
}

/// Scaled energy Ẽ = N⁴·E(f) = Σ_t R̃(t)².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyValue {
    value: i128,
}

impl EnergyValue {
    /// Scale factor N⁴.
    pub fn value(&self) -> i128 {
        self.value
    }
}

pub fn energy(corr: &CorrelationProfile) -> Result<EnergyValue> {
    check_capacity(corr.ctx().n())?;
    let value = corr
        .rvals()
        .iter()
        .map(|&r| (r as i128) * (r as i128))
        .sum();
    Ok(EnergyValue { value })
}

/// A rational-valued function on Z_m stored as integers over one denominator:
/// g(x) = values[x] / denom.
#[derive(Debug, Clone)]
pub struct ScaledFn {
    m: u64,
    values: Vec<i64>,
    denom: i64,
}

impl ScaledFn {
    pub fn new(m: u64, values: Vec<i64>, denom: i64) -> Result<Self> {
        if denom <= 0 {
            return Err(Error::InvalidInput("denominator must be positive".into()));
        }
        if values.len() as u64 != m {
            return Err(Error::InvalidInput(format!(
                "expected {m} values, got {}",
                values.len()
            )));
        }
        Ok(ScaledFn { m, values, denom })
    }

    /// 1_A on Z_m.
    pub fn indicator(set: &DenseSet, m: u64) -> Result<Self> {
        if set.n() > m {
            return Err(Error::InvalidInput("set does not embed in Z_m".into()));
        }
        let mut values = vec![0i64; m as usize];
        for &x in set.elements() {
            values[x as usize] = 1;
        }
        ScaledFn::new(m, values, 1)
    }

    /// α·1_[N] where α = |A|/N: the model the balanced function is measured
    /// against.
    pub fn uniform_model(set: &DenseSet, ctx: ModContext) -> Result<Self> {
        if set.n() != ctx.n() {
            return Err(Error::InvalidInput("set/context mismatch".into()));
        }
        let mut values = vec![0i64; ctx.m() as usize];
        for x in 0..ctx.n() {
            values[x as usize] = set.size() as i64;
        }
        ScaledFn::new(ctx.m(), values, ctx.n() as i64)
    }

    /// The balanced function f itself, as values Ñf(x) over denominator N.
    pub fn from_balanced(profile: &BalancedProfile) -> Self {
        ScaledFn {
            m: profile.ctx().m(),
            values: profile.values().to_vec(),
            denom: profile.ctx().n() as i64,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// True when |g(x)| ≤ 1 for all x.
    pub fn bounded_by_one(&self) -> bool {
        self.max_abs() <= self.denom
    }

    fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&x| self.values[x] != 0).collect()
    }
}

const I128_BUDGET: i128 = i128::MAX / 4;

/// Exact trilinear form Λ(g₁,g₂,g₃) = Σ_{x,r} g₁(x)·g₂(x+r)·g₃(x+2r).
pub fn trilinear(g1: &ScaledFn, g2: &ScaledFn, g3: &ScaledFn) -> Result<Rat> {
    if g1.m() != g2.m() || g2.m() != g3.m() {
        return Err(Error::InvalidInput("trilinear arguments on different Z_m".into()));
    }
    let m = g1.m() as usize;
    let prod_bound = (m as i128)
        * (m as i128)
        * (g1.max_abs() as i128).max(1)
        * (g2.max_abs() as i128).max(1)
        * (g3.max_abs() as i128).max(1);
    if prod_bound > I128_BUDGET {
        return Err(Error::Capacity("trilinear accumulator would overflow".into()));
    }
    let support = g1.support();
    let v2 = g2.values();
    let v3 = g3.values();
    let numer: i128 = support
        .par_iter()
        .with_min_len(8)
        .map(|&x| {
            let gx = g1.values()[x] as i128;
            let mut acc = 0i128;
            // y = x + r and z = x + 2r advance by 1 and 2 as r scans Z_m.
            let mut y = x;
            let mut z = x;
            for _ in 0..m {
                acc += v2[y] as i128 * v3[z] as i128;
                y += 1;
                if y == m {
                    y = 0;
                }
                z += 2;
                if z >= m {
                    z -= m;
                }
            }
            gx * acc
        })
        .sum();
    let denom = g1.denom() as i128 * g2.denom() as i128 * g3.denom() as i128;
    Ok(crate::rat::rat_frac(numer, denom))
}

/// Exact energy E(g) = Σ_t (Σ_x g(x)g(x+t))² as a rational.
pub fn scaled_energy(g: &ScaledFn) -> Result<Rat> {
    let m = g.m() as usize;
    let vmax = (g.max_abs() as i128).max(1);
    let support = g.support();
    let corr_bound = support.len() as i128 * vmax * vmax;
    if corr_bound.checked_pow(2).is_none_or(|sq| sq.checked_mul(m as i128).is_none_or(|b| b > I128_BUDGET)) {
        return Err(Error::Capacity("energy accumulator would overflow".into()));
    }
    let v = g.values();
    let total: i128 = (0..m)
        .into_par_iter()
        .with_min_len(64)
        .map(|t| {
            let mut corr = 0i128;
            for &x in &support {
                let mut y = x + t;
                if y >= m {
                    y -= m;
                }
                corr += v[x] as i128 * v[y] as i128;
            }
            corr * corr
        })
        .sum();
    let d = g.denom() as i128;
    Ok(crate::rat::rat_frac(total, d * d * d * d))
}

/// Window sums S̃_d(x) for one step d, plus the second moment Ṽ_d.
#[derive(Debug, Clone)]
pub struct WindowProfile {
    d: u64,
    ell: u64,
    svals: Vec<i64>,
    vvalue: i128,
}

impl WindowProfile {
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// S̃_d(x) indexed by x; scale factor N.
    pub fn svals(&self) -> &[i64] {
        &self.svals
    }

    /// Ṽ_d = Σ_x S̃_d(x)²; scale factor N².
    pub fn vvalue(&self) -> i128 {
        self.vvalue
    }
}

fn check_ell(ell: u64, m: u64) -> Result<()> {
    if ell < 1 || 2 * ell >= m {
        return Err(Error::InvalidInput(format!(
            "window length {ell} outside [1, m/2) for m={m}"
        )));
    }
    Ok(())
}

/// Sliding computation of S̃_d(x) = Σ_{i<ℓ} Ñf(x+id) for all x.
///
/// For d ≠ 0 the orbit x → x+d is a single m-cycle (m prime), so one pass
/// with a sliding window costs O(m + ℓ).
pub fn window_sums(profile: &BalancedProfile, d: u64, ell: u64) -> Result<WindowProfile> {
    let ctx = profile.ctx();
    let m = ctx.m();
    check_ell(ell, m)?;
    check_capacity(ctx.n())?;
    if d >= m {
        return Err(Error::InvalidInput(format!("step {d} outside Z_{m}")));
    }
    let v = profile.values();
    let mut svals = vec![0i64; m as usize];
    if d == 0 {
        for (s, &fx) in svals.iter_mut().zip(v) {
            *s = ell as i64 * fx; // S_0(x) = ℓ·f(x)
        }
    } else {
        let mut window = 0i64;
        let mut trailing = 0u64; // current x
        let mut leading = (ell * d) % m; // x + ℓd
        for i in 0..ell {
            window += v[((i * d) % m) as usize];
        }
        for _ in 0..m {
            svals[trailing as usize] = window;
            window -= v[trailing as usize];
            window += v[leading as usize];
            trailing += d;
            if trailing >= m {
                trailing -= m;
            }
            leading += d;
            if leading >= m {
                leading -= m;
            }
        }
    }
    debug_assert_eq!(svals.iter().map(|&s| s as i128).sum::<i128>(), 0);
    let vvalue = svals.iter().map(|&s| (s as i128) * (s as i128)).sum();
    Ok(WindowProfile { d, ell, svals, vvalue })
}

/// All second moments Ṽ_d at once via the exact identity
/// Ṽ_d = Σ_{|h|<ℓ} (ℓ−|h|)·R̃(hd), given a precomputed correlation profile.
pub fn v_profile(corr: &CorrelationProfile, ell: u64) -> Result<Vec<i128>> {
    let m = corr.ctx().m();
    check_ell(ell, m)?;
    let rvals = corr.rvals();
    let values: Vec<i128> = (0..m as usize)
        .into_par_iter()
        .with_min_len(16)
        .map(|d| {
            let d = d as u64;
            let mut acc = ell as i128 * rvals[0] as i128;
            let mut fwd = 0u64; // h·d mod m
            for h in 1..ell {
                fwd += d;
                if fwd >= m {
                    fwd -= m;
                }
                let weight = (ell - h) as i128;
                let back = if fwd == 0 { 0 } else { m - fwd };
                acc += weight * (rvals[fwd as usize] as i128 + rvals[back as usize] as i128);
            }
            acc
        })
        .collect();
    Ok(values)
}
