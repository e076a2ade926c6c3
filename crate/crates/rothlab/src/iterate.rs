//! The density-increment iteration: repeatedly increment, rescale the found
//! progression back to an interval, and record every stage.

use serde::Serialize;

use crate::increment::{density_increment, rescale, IncrementConfig, IncrementResult};
use crate::modring::choose_modulus;
use crate::rat::{serde_ratio, Rat};
use crate::sets::{is_3ap_free, DenseSet};
use crate::{Error, Result};

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// The running density reached 1.
    DensityCap,
    /// The ambient interval shrank below min_n.
    NTooSmall,
    /// No subprogression with positive mean exists.
    NoIncrement,
    /// The rectified progression fell below the configured minimum length.
    TooShort,
    /// The balanced function vanished (empty or full set).
    ZeroEnergy,
    /// Step budget exhausted.
    MaxSteps,
    /// A progression appeared in an iterate; never fires on 3AP-free input.
    FoundAP,
}

/// One stage of the iteration: the ambient length and density seen at stage
/// j, plus the increment found there (absent on the final stage).
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub j: usize,
    pub n: u64,
    #[serde(with = "serde_ratio")]
    pub alpha: Rat,
    pub size: u64,
    pub increment: Option<IncrementResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub stages: Vec<Stage>,
    pub stop_reason: StopReason,
    /// Witness progression when stop_reason is FoundAP.
    pub witness: Option<(u64, u64, u64)>,
}

impl Trajectory {
    /// Stages that successfully produced an increment.
    pub fn successful_steps(&self) -> usize {
        self.stages.iter().filter(|s| s.increment.is_some()).count()
    }

    /// CSV summary, one row per stage.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,N_j,alpha_num,alpha_den,eta_num,eta_den,P_len,stop_reason\n");
        let last = self.stages.len().saturating_sub(1);
        for (i, stage) in self.stages.iter().enumerate() {
            let (eta_num, eta_den, p_len) = match &stage.increment {
                Some(inc) => (
                    inc.eta.numer().to_string(),
                    inc.eta.denom().to_string(),
                    inc.progression.len.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            let reason = if i == last { format!("{:?}", self.stop_reason) } else { String::new() };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                stage.j,
                stage.n,
                stage.alpha.numer(),
                stage.alpha.denom(),
                eta_num,
                eta_den,
                p_len,
                reason
            ));
        }
        out
    }
}

/// Runs the iteration from A until a stop condition fires.
///
/// Every stage re-checks 3AP-freeness (FoundAP must never fire for free
/// inputs; rescaling preserves freeness), then applies one increment and
/// rescales its progression to the next ambient interval.
pub fn run(set: &DenseSet, cfg: &IncrementConfig, max_steps: usize, min_n: u64) -> Trajectory {
    let mut stages = Vec::new();
    let mut current = set.clone();
    let mut j = 0usize;
    loop {
        let stage = Stage {
            j,
            n: current.n(),
            alpha: current.density(),
            size: current.size(),
            increment: None,
        };
        // A full interval dominates the freeness check: its progressions are
        // the trivial consequence of density 1, not a failed iterate. Capped
        // density stops the run; at stage 0 the attempted increment reports
        // the degenerate input as ZeroEnergy instead.
        let full = current.size() == current.n();
        if full && j > 0 {
            stages.push(stage);
            return Trajectory { stages, stop_reason: StopReason::DensityCap, witness: None };
        }
        if !full {
            let freeness = is_3ap_free(&current);
            if !freeness.free {
                stages.push(stage);
                return Trajectory {
                    stages,
                    stop_reason: StopReason::FoundAP,
                    witness: freeness.witness,
                };
            }
        }
        if current.n() < min_n {
            stages.push(stage);
            return Trajectory { stages, stop_reason: StopReason::NTooSmall, witness: None };
        }
        if j >= max_steps {
            stages.push(stage);
            return Trajectory { stages, stop_reason: StopReason::MaxSteps, witness: None };
        }
        let ctx = match choose_modulus(current.n()) {
            Ok(ctx) => ctx,
            Err(_) => {
                stages.push(stage);
                return Trajectory { stages, stop_reason: StopReason::NTooSmall, witness: None };
            }
        };
        match density_increment(&current, ctx, cfg) {
            Ok(result) => {
                let next = match rescale(&current, &result.progression) {
                    Ok(next) => next,
                    Err(_) => {
                        stages.push(stage);
                        return Trajectory {
                            stages,
                            stop_reason: StopReason::NoIncrement,
                            witness: None,
                        };
                    }
                };
                stages.push(Stage { increment: Some(result), ..stage });
                current = next;
                j += 1;
            }
            Err(err) => {
                stages.push(stage);
                let stop_reason = match err {
                    Error::ZeroEnergy => StopReason::ZeroEnergy,
                    Error::TooShort { .. } => StopReason::TooShort,
                    _ => StopReason::NoIncrement,
                };
                return Trajectory { stages, stop_reason, witness: None };
            }
        }
    }
}

/// Floating-point report of the double-log density bound and the length
/// recursion table. Display only, never a correctness gate.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub alpha: f64,
    pub c: f64,
    pub c0: f64,
    pub log_log_n: f64,
    /// C·(log log N)^(−1/11)
    pub bound_value: f64,
    /// alpha ≤ bound_value
    pub within_bound: bool,
    /// Steps the recursion is tabulated for: min(⌊c0·α^(−11)⌋, row cap).
    pub steps: u64,
    /// Row j: guaranteed lower bound 2^(−j)·log N − C·log(e/α) on log N_j.
    pub recursion: Vec<RecursionRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionRow {
    pub j: u64,
    pub log_n_lower_bound: f64,
}

const RECURSION_ROW_CAP: u64 = 32;

/// Evaluates α against C·(log log N)^(−1/11) and tabulates the length
/// recursion log N_j ≥ 2^(−j)·log N − C·log(e/α).
pub fn bound_report(n: u64, alpha: f64, c: f64, c0: f64) -> Result<BoundReport> {
    if n < 16 {
        return Err(Error::InvalidInput(format!("bound report needs N ≥ 16, got {n}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("density {alpha} outside (0, 1]")));
    }
    let log_n = (n as f64).ln();
    let log_log_n = log_n.ln();
    let bound_value = c * log_log_n.powf(-1.0 / 11.0);
    let steps = (c0 * alpha.powi(-11)).floor().min(RECURSION_ROW_CAP as f64).max(0.0) as u64;
    let penalty = c * (std::f64::consts::E / alpha).ln();
    let recursion = (0..=steps)
        .map(|j| RecursionRow {
            j,
            log_n_lower_bound: log_n / (1u64 << j.min(62)) as f64 - penalty,
        })
        .collect();
    Ok(BoundReport {
        n,
        alpha,
        c,
        c0,
        log_log_n,
        bound_value,
        within_bound: alpha <= bound_value,
        steps,
        recursion,
    })
}
