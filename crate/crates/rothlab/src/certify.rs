//! Machine-checkable verification of the correlation inequalities and
//! identities, with exact arithmetic and explicit constants.
//!
//! Every check produces an [`InequalityReport`] asserting lhs ≤ rhs in exact
//! rationals; identities are asserted as |difference| ≤ 0. The asymptotic
//! constants of the underlying estimates are replaced by the explicit values
//! the proofs deliver for functions bounded by 1: constant 1 for the fourth
//! power trilinear bound and 81 = 3⁴ for the telescoped discrepancy bound.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::correlation::{
    autocorrelation, balanced_profile, energy, scaled_energy, trilinear, v_profile, window_sums,
    BalancedProfile, CorrelationProfile, EnergyValue, ScaledFn,
};
use crate::modring::{choose_modulus, mod_inverse, ModContext};
use crate::rat::{rat_int, ratio_string, serde_ratio, Rat};
use crate::sets::{is_3ap_free, DenseSet, FreenessReport};
use crate::{Error, Result};

/// One exact comparison lhs ≤ rhs.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    #[serde(with = "serde_ratio")]
    pub lhs: Rat,
    #[serde(with = "serde_ratio")]
    pub rhs: Rat,
    pub holds: bool,
    #[serde(with = "serde_ratio")]
    pub margin: Rat,
}

impl InequalityReport {
    pub fn check(name: impl Into<String>, lhs: Rat, rhs: Rat) -> Self {
        let margin = &rhs - &lhs;
        InequalityReport { name: name.into(), holds: lhs <= rhs, lhs, rhs, margin }
    }

    /// Identity |value| = 0 stated as |value| ≤ 0.
    pub fn identity(name: impl Into<String>, abs_difference: Rat) -> Self {
        Self::check(name, abs_difference, rat_int(0))
    }
}

impl std::fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} [lhs={} rhs={} margin={}]",
            self.name,
            if self.holds { "holds" } else { "VIOLATED" },
            ratio_string(&self.lhs),
            ratio_string(&self.rhs),
            ratio_string(&self.margin),
        )
    }
}

/// Measured gap between the 3AP count of A and of its density model.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    /// Λ(1_A, 1_A, 1_A), an integer.
    #[serde(with = "serde_ratio")]
    pub lambda_set: Rat,
    /// Λ(α·1_[N], …) = α³·Λ(1_[N], …).
    #[serde(with = "serde_ratio")]
    pub lambda_model: Rat,
    /// |lambda_set − lambda_model|.
    #[serde(with = "serde_ratio")]
    pub delta: Rat,
    /// Scaled energy Ẽ = N⁴·E(f), serialized as a decimal string.
    pub energy_scaled: String,
    /// β̂ = E(f)/m³ = Ẽ/(N⁴m³), the measured energy ratio.
    #[serde(with = "serde_ratio")]
    pub beta_hat: Rat,
}

/// Everything the checks need about one set, computed once.
pub struct Analysis {
    set: DenseSet,
    ctx: ModContext,
    profile: BalancedProfile,
    corr: CorrelationProfile,
    energy: EnergyValue,
}

impl Analysis {
    pub fn new(set: DenseSet) -> Result<Self> {
        let ctx = choose_modulus(set.n())?;
        let profile = balanced_profile(&set, ctx)?;
        let corr = autocorrelation(&profile)?;
        let energy = energy(&corr)?;
        Ok(Analysis { set, ctx, profile, corr, energy })
    }

    pub fn set(&self) -> &DenseSet {
        &self.set
    }

    pub fn ctx(&self) -> ModContext {
        self.ctx
    }

    pub fn profile(&self) -> &BalancedProfile {
        &self.profile
    }

    pub fn corr(&self) -> &CorrelationProfile {
        &self.corr
    }

    pub fn energy(&self) -> EnergyValue {
        self.energy
    }

    /// β̂ = Ẽ/(N⁴m³).
    pub fn beta_hat(&self) -> Rat {
        let n = BigInt::from(self.ctx.n());
        let m = BigInt::from(self.ctx.m());
        Rat::new(BigInt::from(self.energy.value()), n.pow(4) * m.pow(3))
    }
}

/// Σ_d R̃(hd)·R̃(kd) computed directly.
fn positivity_direct(corr: &CorrelationProfile, h: u64, k: u64) -> i128 {
    let m = corr.ctx().m();
    let rvals = corr.rvals();
    let mut acc = 0i128;
    let mut hd = 0u64;
    let mut kd = 0u64;
    for _ in 0..m {
        acc += rvals[hd as usize] as i128 * rvals[kd as usize] as i128;
        hd += h;
        if hd >= m {
            hd -= m;
        }
        kd += k;
        if kd >= m {
            kd -= m;
        }
    }
    acc
}

/// The same sum rewritten as Σ_u (Σ_a Ñf(a)·Ñf(u+λa))² with λ = k·h⁻¹, the
/// manifestly non-negative form produced by the bijective change of
/// variables.
fn positivity_witness(profile: &BalancedProfile, lambda: u64) -> i128 {
    let m = profile.ctx().m();
    let n = profile.ctx().n();
    let v = profile.values();
    // f is supported on [N]; precompute λ·a mod m on the support.
    let offsets: Vec<u64> = (0..n)
        .map(|a| (lambda as u128 * a as u128 % m as u128) as u64)
        .collect();
    let mut total = 0i128;
    for u in 0..m {
        let mut inner = 0i128;
        for (a, &offset) in offsets.iter().enumerate() {
            let mut idx = u + offset;
            if idx >= m {
                idx -= m;
            }
            inner += v[a] as i128 * v[idx as usize] as i128;
        }
        total += inner * inner;
    }
    total
}

/// Non-negativity of Σ_d R̃(hd)·R̃(kd) for h, k ∈ Z_m^×.
///
/// The direct sum is recomputed in sum-of-squares form and the two values
/// must agree exactly; a mismatch is an internal failure, not a report.
pub fn check_positivity(analysis: &Analysis, h: u64, k: u64) -> Result<InequalityReport> {
    let m = analysis.ctx().m();
    if h == 0 || h >= m || k == 0 || k >= m {
        return Err(Error::InvalidInput(format!(
            "h={h}, k={k} must be nonzero residues mod {m}"
        )));
    }
    let direct = positivity_direct(analysis.corr(), h, k);
    let lambda = (k as u128 * mod_inverse(h, m)? as u128 % m as u128) as u64;
    let witness = positivity_witness(analysis.profile(), lambda);
    if direct != witness {
        return Err(Error::Internal(format!(
            "positivity witness mismatch for (h={h}, k={k}): direct={direct}, witness={witness}"
        )));
    }
    Ok(InequalityReport::check(
        format!("positivity(h={h},k={k})"),
        rat_int(0),
        rat_int(direct),
    ))
}

/// Λ(g₁,g₂,g₃)⁴ ≤ m⁵·min_i E(g_i) for functions bounded by 1.
///
/// The two Cauchy–Schwarz steps in the underlying estimate give this with
/// constant exactly 1 when |g_i| ≤ 1, so the comparison is exact.
pub fn check_lambda_energy(g1: &ScaledFn, g2: &ScaledFn, g3: &ScaledFn) -> Result<InequalityReport> {
    for (i, g) in [g1, g2, g3].iter().enumerate() {
        if !g.bounded_by_one() {
            return Err(Error::InvalidInput(format!("g{} exceeds 1 in absolute value", i + 1)));
        }
    }
    let lambda = trilinear(g1, g2, g3)?;
    let min_energy = [g1, g2, g3]
        .iter()
        .map(|g| scaled_energy(g))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("three energies");
    let m5 = Rat::from_integer(BigInt::from(g1.m()).pow(5));
    let lhs = {
        let sq = &lambda * &lambda;
        &sq * &sq
    };
    Ok(InequalityReport::check("lambda_energy", lhs, m5 * min_energy))
}

/// |Λ(u,u,u) − Λ(v,v,v)|⁴ ≤ 81·m⁵·E(f) for u = 1_A, v = α·1_[N], f = u − v:
/// the telescoped three-term bound raised to the fourth power.
pub fn check_discrepancy(analysis: &Analysis) -> Result<(InequalityReport, DiscrepancyReport)> {
    let ctx = analysis.ctx();
    let u = ScaledFn::indicator(analysis.set(), ctx.m())?;
    let v = ScaledFn::uniform_model(analysis.set(), ctx)?;
    let lambda_set = trilinear(&u, &u, &u)?;
    let lambda_model = trilinear(&v, &v, &v)?;
    let diff = &lambda_set - &lambda_model;
    let delta = if diff < rat_int(0) { -diff } else { diff };
    let delta4 = {
        let sq = &delta * &delta;
        &sq * &sq
    };
    // E(f) = Ẽ/N⁴ exactly.
    let e_f = Rat::new(
        BigInt::from(analysis.energy().value()),
        BigInt::from(ctx.n()).pow(4),
    );
    let rhs = Rat::from_integer(BigInt::from(81) * BigInt::from(ctx.m()).pow(5)) * &e_f;
    let report = InequalityReport::check("trilinear_discrepancy", delta4, rhs);
    let discrepancy = DiscrepancyReport {
        lambda_set,
        lambda_model,
        delta,
        energy_scaled: analysis.energy().value().to_string(),
        beta_hat: analysis.beta_hat(),
    };
    Ok((report, discrepancy))
}

fn sum_of_squares_up_to(k: u64) -> BigInt {
    // Σ_{j=1}^{k} j² = k(k+1)(2k+1)/6
    let k = BigInt::from(k);
    &k * (&k + 1) * (2 * &k + 1) / 6
}

fn abs_big(b: BigInt) -> Rat {
    Rat::from_integer(BigInt::from(b.magnitude().clone()))
}

/// The window-sum identities and moment bounds for one window length ℓ:
///
/// 1. Ṽ_d = Σ_{|h|<ℓ}(ℓ−|h|)·R̃(hd) for every d (identity path vs direct path)
/// 2. Σ_d Ṽ_d = ℓ·m·R̃(0), bounded by N|A|ℓm² (scaled form of αℓm²)
/// 3. Ṽ_0 = ℓ²·R̃(0), bounded by N|A|ℓ²m
/// 4. Σ_{d≠0} Ṽ_d² ≥ 2(Σ_{j<ℓ} j²)·Ẽ − Ṽ_0²
pub fn check_window_identities(analysis: &Analysis, ell: u64) -> Result<Vec<InequalityReport>> {
    let ctx = analysis.ctx();
    let m = ctx.m();
    let n = ctx.n();
    let size = analysis.set().size();
    let via_identity = v_profile(analysis.corr(), ell)?;

    let mut max_diff = 0i128;
    let mut sum = BigInt::from(0);
    let mut sum_sq_nonzero = BigInt::from(0);
    for d in 0..m {
        let direct = window_sums(analysis.profile(), d, ell)?.vvalue();
        max_diff = max_diff.max((via_identity[d as usize] - direct).abs());
        sum += BigInt::from(direct);
        if d != 0 {
            sum_sq_nonzero += BigInt::from(direct) * BigInt::from(direct);
        }
    }

    let r0 = BigInt::from(analysis.corr().r0());
    let v0 = BigInt::from(via_identity[0]);
    let ell_big = BigInt::from(ell);
    let expected_sum = &ell_big * BigInt::from(m) * &r0;
    let expected_v0 = &ell_big * &ell_big * &r0;
    let sum_bound = BigInt::from(n) * BigInt::from(size) * &ell_big * BigInt::from(m).pow(2);
    let v0_bound = BigInt::from(n) * BigInt::from(size) * &ell_big * &ell_big * BigInt::from(m);
    let diag = BigInt::from(2)
        * sum_of_squares_up_to(ell - 1)
        * BigInt::from(analysis.energy().value())
        - &v0 * &v0;

    let int = Rat::from_integer;
    Ok(vec![
        InequalityReport::identity(format!("v_identity(ell={ell})"), rat_int(max_diff)),
        InequalityReport::identity(format!("v_sum_identity(ell={ell})"), abs_big(&sum - expected_sum)),
        InequalityReport::check(format!("v_sum_bound(ell={ell})"), int(sum), int(sum_bound)),
        InequalityReport::identity(format!("v0_identity(ell={ell})"), abs_big(&v0 - expected_v0)),
        InequalityReport::check(format!("v0_bound(ell={ell})"), int(v0), int(v0_bound)),
        InequalityReport::check(
            format!("v_second_moment(ell={ell})"),
            int(diag),
            int(sum_sq_nonzero),
        ),
    ])
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Window lengths to check; values with 2ℓ ≥ m are skipped.
    pub ells: Vec<u64>,
    /// Below this modulus the positivity scan covers every λ = k·h⁻¹ class.
    pub exhaustive_modulus_limit: u64,
    /// Sample size used above the limit.
    pub sample_pairs: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            ells: vec![1, 2, 3, 8],
            exhaustive_modulus_limit: 300,
            sample_pairs: 32,
            seed: 0,
        }
    }
}

/// Aggregate of every check on one set. `all_hold` covers the inequality
/// reports only; freeness is recorded but does not gate (the inequalities
/// are unconditional).
#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub n: u64,
    pub set_size: u64,
    #[serde(with = "serde_ratio")]
    pub density: Rat,
    pub m: u64,
    pub free: bool,
    pub witness: Option<(u64, u64, u64)>,
    #[serde(with = "serde_ratio")]
    pub beta_hat: Rat,
    pub reports: Vec<InequalityReport>,
    pub discrepancy: DiscrepancyReport,
    pub all_hold: bool,
}

/// Runs every check in a fixed order and aggregates the reports.
pub fn verify_all(set: &DenseSet, config: &VerifyConfig) -> Result<CertificateReport> {
    let analysis = Analysis::new(set.clone())?;
    let ctx = analysis.ctx();
    let m = ctx.m();
    let n = ctx.n();
    let size = set.size();
    let freeness: FreenessReport = is_3ap_free(set);
    let mut reports = Vec::new();

    // Balanced-function invariants.
    let values = analysis.profile().values();
    let value_sum: i128 = values.iter().map(|&v| v as i128).sum();
    reports.push(InequalityReport::identity("balanced_zero_sum", rat_int(value_sum.abs())));
    let out_of_range = values
        .iter()
        .filter(|&&v| v < -(size as i64) || v > (n - size) as i64)
        .count();
    reports.push(InequalityReport::identity("balanced_range", rat_int(out_of_range as i128)));

    // Correlation invariants.
    let rvals = analysis.corr().rvals();
    let max_asym = (1..m)
        .map(|t| (rvals[t as usize] as i128 - rvals[(m - t) as usize] as i128).abs())
        .max()
        .unwrap_or(0);
    reports.push(InequalityReport::identity("r_symmetry", rat_int(max_asym)));
    let r_sum: i128 = rvals.iter().map(|&r| r as i128).sum();
    reports.push(InequalityReport::identity("r_zero_sum", rat_int(r_sum.abs())));
    let expected_r0 = n as i128 * (n as i128 * size as i128 - (size as i128).pow(2));
    reports.push(InequalityReport::identity(
        "r0_formula",
        rat_int((analysis.corr().r0() as i128 - expected_r0).abs()),
    ));
    reports.push(InequalityReport::check(
        "energy_lower_bound",
        rat_int((analysis.corr().r0() as i128).pow(2)),
        rat_int(analysis.energy().value()),
    ));

    // Positivity scan.
    let pairs: Vec<(u64, u64)> = if m <= config.exhaustive_modulus_limit {
        // h = 1 sweeps every λ class with k = λ.
        (1..m).map(|k| (1, k)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.sample_pairs)
            .map(|_| (rng.gen_range(1..m), rng.gen_range(1..m)))
            .collect()
    };
    let mut min_value = i128::MAX;
    for &(h, k) in &pairs {
        let report = check_positivity(&analysis, h, k)?;
        let value: i128 = report
            .rhs
            .numer()
            .try_into()
            .map_err(|_| Error::Internal("positivity value exceeds i128".into()))?;
        min_value = min_value.min(value);
    }
    reports.push(InequalityReport::check(
        format!("positivity_min({} pairs)", pairs.len()),
        rat_int(0),
        rat_int(if pairs.is_empty() { 0 } else { min_value }),
    ));

    // Trilinear bounds.
    let u = ScaledFn::indicator(set, m)?;
    let f = ScaledFn::from_balanced(analysis.profile());
    let le_u = check_lambda_energy(&u, &u, &u)?;
    reports.push(InequalityReport { name: "lambda_energy_indicator".into(), ..le_u });
    let le_f = check_lambda_energy(&f, &f, &f)?;
    reports.push(InequalityReport { name: "lambda_energy_balanced".into(), ..le_f });
    let (discrepancy_report, discrepancy) = check_discrepancy(&analysis)?;
    reports.push(discrepancy_report);

    // Window identities for each feasible ℓ.
    for &ell in &config.ells {
        if ell >= 1 && 2 * ell < m {
            reports.extend(check_window_identities(&analysis, ell)?);
        }
    }

    // For a 3AP-free set, Λ(1_A,1_A,1_A) counts exactly the |A| trivial
    // progressions.
    if freeness.free {
        let diff = &discrepancy.lambda_set - rat_int(size as i128);
        let abs = if diff < rat_int(0) { -diff } else { diff };
        reports.push(InequalityReport::identity("lambda_counts_free_set", abs));
    }

    let all_hold = reports.iter().all(|r| r.holds);
    Ok(CertificateReport {
        n,
        set_size: size,
        density: set.density(),
        m,
        free: freeness.free,
        witness: freeness.witness,
        beta_hat: analysis.beta_hat(),
        reports,
        discrepancy,
        all_hold,
    })
}
