//! Cost-estimate composition, affordability and viability metrics, and the
//! arithmetic behind the audit rules.
//!
//! Money is a unit-agnostic scalar throughout. Intermediates are carried at
//! full precision; only display code rounds.

use serde::{Deserialize, Serialize};

use crate::audit::{AuditFinding, Verdict};
use crate::error::{check_nonneg, check_positive, Error, Result};
use crate::qra::{risk_allowance, SimulationResult};
use crate::reference_class::ReferenceClass;

/// Residual optimism-bias uplift expected on top of the mean QRA at the final
/// business case stage.
pub const DEFAULT_RESIDUAL_UPLIFT: f64 = 0.06;

/// Inside-view allowances below this share of the outside-view uplift are flagged.
pub const DEFAULT_GAP_THRESHOLD: f64 = 0.5;

/// What the optimism-bias uplift is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObBasis {
    /// Base cost excluding the QRA adjustment (development levels 1-3).
    BaseOnly,
    /// Base cost plus the mean QRA adjustment (levels 4-5).
    RiskAdjusted,
}

impl ObBasis {
    pub fn for_stage(stage: u8) -> Result<Self> {
        match stage {
            1..=3 => Ok(ObBasis::BaseOnly),
            4 | 5 => Ok(ObBasis::RiskAdjusted),
            other => Err(Error::StageOutOfRange(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub base_cost: f64,
    pub risk_adjustment: f64,
    pub ob_adjustment: f64,
    pub total: f64,
    pub ob_basis: ObBasis,
    pub price_basis: String,
}

impl CostEstimate {
    pub fn with_price_basis(mut self, price_basis: impl Into<String>) -> Self {
        self.price_basis = price_basis.into();
        self
    }
}

/// Base cost plus mean risk plus an optimism-bias uplift on the chosen basis.
pub fn compose_estimate(base: f64, mean_risk: f64, ob_uplift: f64, ob_basis: ObBasis) -> Result<CostEstimate> {
    check_nonneg("base", base)?;
    check_nonneg("mean_risk", mean_risk)?;
    check_nonneg("ob_uplift", ob_uplift)?;
    let ob_adjustment = match ob_basis {
        ObBasis::BaseOnly => ob_uplift * base,
        ObBasis::RiskAdjusted => ob_uplift * (base + mean_risk),
    };
    Ok(CostEstimate {
        base_cost: base,
        risk_adjustment: mean_risk,
        ob_adjustment,
        total: base + mean_risk + ob_adjustment,
        ob_basis,
        price_basis: String::new(),
    })
}

/// Checks a project's P-level risk provision against the mean QRA plus a
/// residual uplift on the risk-adjusted cost. The base cost is inferred as
/// `total - p_level_risk`. Fails when the provision is below the benchmark.
pub fn mean_plus_uplift_check(total: f64, p_level_risk: f64, mean_risk: f64, uplift: f64) -> Result<AuditFinding> {
    check_nonneg("p_risk", p_level_risk)?;
    check_nonneg("mean_risk", mean_risk)?;
    check_nonneg("uplift", uplift)?;
    if !(total.is_finite() && total > p_level_risk) {
        return Err(Error::InvalidArgument {
            name: "total".into(),
            reason: format!("total estimate {total} must exceed the P-level risk {p_level_risk}"),
        });
    }
    let base = total - p_level_risk;
    let risk_adjusted = base + mean_risk;
    let residual = uplift * risk_adjusted;
    let benchmark = mean_risk + residual;
    let verdict = if p_level_risk < benchmark { Verdict::Fail } else { Verdict::Pass };
    let message = match verdict {
        Verdict::Fail => format!(
            "P-level risk provision {p_level_risk:.1} is below mean risk + {:.0}% uplift ({benchmark:.1}); relying on the QRA alone under-provides by {:.1}",
            uplift * 100.0,
            benchmark - p_level_risk
        ),
        _ => format!(
            "P-level risk provision {p_level_risk:.1} covers mean risk + {:.0}% uplift ({benchmark:.1})",
            uplift * 100.0
        ),
    };
    let mut finding = AuditFinding::new("mean-plus-six")
        .input("total", total)
        .input("p_risk", p_level_risk)
        .input("mean_risk", mean_risk)
        .input("uplift", uplift)
        .computed("base", base)
        .computed("risk_adjusted", risk_adjusted)
        .computed("residual_uplift", residual)
        .computed("benchmark", benchmark)
        .computed("p_risk_share_of_base", p_level_risk / base)
        .computed("benchmark_share_of_base", benchmark / base);
    finding.verdict = verdict;
    finding.message = message;
    Ok(finding)
}

/// [`mean_plus_uplift_check`] with the 6% residual uplift.
pub fn mean_plus_six_check(total: f64, p_level_risk: f64, mean_risk: f64) -> Result<AuditFinding> {
    mean_plus_uplift_check(total, p_level_risk, mean_risk, DEFAULT_RESIDUAL_UPLIFT)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppraisalInput {
    pub funding_envelope: f64,
    pub pv_costs: f64,
    pub pv_benefits: f64,
}

pub fn bcr(input: &AppraisalInput) -> Result<f64> {
    check_positive("costs", input.pv_costs)?;
    check_nonneg("benefits", input.pv_benefits)?;
    Ok(input.pv_benefits / input.pv_costs)
}

pub fn round_to(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale).round() / scale
}

/// Benefit-cost ratio finding; flags ratios below 1.
pub fn bcr_finding(input: &AppraisalInput, precision: u32) -> Result<AuditFinding> {
    let ratio = bcr(input)?;
    let rounded = round_to(ratio, precision);
    let mut finding = AuditFinding::new("bcr")
        .input("benefits", input.pv_benefits)
        .input("costs", input.pv_costs)
        .input("precision", precision as f64)
        .computed("bcr", ratio)
        .computed("bcr_rounded", rounded);
    if ratio < 1.0 {
        finding.verdict = Verdict::Flag;
        finding.message = format!("benefit-cost ratio {rounded:.*} is below 1", precision as usize);
    } else {
        finding.message = format!("benefit-cost ratio {rounded:.*}", precision as usize);
    }
    Ok(finding)
}

/// `(funding - estimate) / estimate`; negative when funding falls short.
pub fn headroom(funding: f64, estimate: f64) -> Result<f64> {
    check_positive("estimate", estimate)?;
    check_nonneg("funding", funding)?;
    Ok((funding - estimate) / estimate)
}

pub fn headroom_finding(funding: f64, estimate: f64) -> Result<AuditFinding> {
    let h = headroom(funding, estimate)?;
    let mut finding = AuditFinding::new("headroom")
        .input("funding", funding)
        .input("estimate", estimate)
        .computed("headroom", h)
        .computed("margin", funding - estimate);
    let basis = "headroom is measured against the estimate; headroom figures quoted on other, unstated bases are not reproducible from these inputs";
    if h < 0.0 {
        finding.verdict = Verdict::Flag;
        finding.message = format!("funding falls {:.1}% short of the estimate; {basis}", -h * 100.0);
    } else {
        finding.message = format!("headroom {:.1}% of the estimate; {basis}", h * 100.0);
    }
    Ok(finding)
}

/// `(actual - estimated) / estimated`.
pub fn overrun(actual: f64, estimated: f64) -> Result<f64> {
    check_positive("estimated", estimated)?;
    check_nonneg("actual", actual)?;
    Ok((actual - estimated) / estimated)
}

/// Flags any positive overrun.
pub fn overrun_finding(actual: f64, estimated: f64) -> Result<AuditFinding> {
    let o = overrun(actual, estimated)?;
    let mut finding = AuditFinding::new("overrun")
        .input("actual", actual)
        .input("estimated", estimated)
        .computed("overrun", o);
    if o > 0.0 {
        finding.verdict = Verdict::Flag;
        finding.message = format!("outturn exceeds the estimate by {:.1}%", o * 100.0);
    } else {
        finding.message = format!("outturn within the estimate ({:.1}%)", o * 100.0);
    }
    Ok(finding)
}

/// Compares an inside-view allowance with the outside-view uplift at the same
/// P-level. Flags when `inside < threshold * outside`.
pub fn gap_finding(inside: f64, outside: f64, threshold: f64, p: f64) -> Result<AuditFinding> {
    check_nonneg("inside", inside)?;
    check_nonneg("outside", outside)?;
    check_nonneg("threshold", threshold)?;
    crate::quantile::check_probability(p)?;
    let mut finding = AuditFinding::new("gap")
        .input("inside", inside)
        .input("outside", outside)
        .input("threshold", threshold)
        .input("p", p)
        .computed("difference", outside - inside);
    if inside > 0.0 {
        finding = finding.computed("outside_over_inside", outside / inside);
    }
    if outside > 0.0 {
        finding = finding.computed("inside_over_outside", inside / outside);
    }
    let level = (p * 100.0).round();
    if inside < threshold * outside {
        finding.verdict = Verdict::Flag;
        finding.message = format!(
            "inside-view allowance {:.1}% at P{level} is below {:.0}% of the outside-view uplift {:.1}%",
            inside * 100.0,
            threshold * 100.0,
            outside * 100.0
        );
    } else {
        finding.message = format!(
            "inside-view allowance {:.1}% at P{level} is consistent with the outside-view uplift {:.1}%",
            inside * 100.0,
            outside * 100.0
        );
    }
    Ok(finding)
}

/// Inside view from a simulated register against the outside view from a
/// reference class, both read at P-level `p`.
pub fn inside_outside_gap(
    result: &SimulationResult,
    base_cost: f64,
    class: &ReferenceClass,
    p: f64,
    threshold: f64,
) -> Result<AuditFinding> {
    let inside = risk_allowance(result, p, base_cost)?.max(0.0);
    let outside = class.required_uplift(p)?;
    let mut finding = gap_finding(inside, outside, threshold, p)?;
    finding.inputs.insert("base_cost".into(), base_cost);
    finding.inputs.insert("reference_class_size".into(), class.len() as f64);
    Ok(finding)
}
