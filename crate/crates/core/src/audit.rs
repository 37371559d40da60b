//! Audit findings and the registry of named audit rules.
//!
//! Each rule is a [`AuditRule`] trait object registered under a stable id, so
//! callers (the CLI included) pick a rule by name and hand it named numeric
//! arguments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::appraisal::{self, AppraisalInput};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Flag,
    Fail,
}

impl Verdict {
    /// Process exit status for a finding with this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Flag => 2,
            Verdict::Fail => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Flag => "flag",
            Verdict::Fail => "fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict of one audit rule with its inputs echoed and intermediates exposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub rule_id: String,
    pub verdict: Verdict,
    pub inputs: BTreeMap<String, f64>,
    pub computed: BTreeMap<String, f64>,
    pub message: String,
}

impl AuditFinding {
    pub(crate) fn new(rule_id: &str) -> Self {
        AuditFinding {
            rule_id: rule_id.to_string(),
            verdict: Verdict::Pass,
            inputs: BTreeMap::new(),
            computed: BTreeMap::new(),
            message: String::new(),
        }
    }

    pub(crate) fn input(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    pub(crate) fn computed(mut self, name: &str, value: f64) -> Self {
        self.computed.insert(name.to_string(), value);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.computed.get(name).copied()
    }
}

/// Named numeric arguments for a rule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleArgs(BTreeMap<String, f64>);

impl RuleArgs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.0.get(name).copied().ok_or_else(|| Error::InvalidArgument {
            name: name.to_string(),
            reason: "missing required argument".into(),
        })
    }

    pub fn get_or(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

pub trait AuditRule: Send + Sync {
    fn id(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Accepted argument names; required ones first.
    fn parameters(&self) -> &'static [&'static str];
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding>;
}

struct MeanPlusUplift;

impl AuditRule for MeanPlusUplift {
    fn id(&self) -> &'static str {
        "mean-plus-six"
    }
    fn description(&self) -> &'static str {
        "P-level risk provision versus mean QRA plus uplift on the risk-adjusted cost"
    }
    fn parameters(&self) -> &'static [&'static str] {
        &["total", "p_risk", "mean_risk", "uplift"]
    }
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding> {
        appraisal::mean_plus_uplift_check(
            args.require("total")?,
            args.require("p_risk")?,
            args.require("mean_risk")?,
            args.get_or("uplift", appraisal::DEFAULT_RESIDUAL_UPLIFT),
        )
    }
}

struct BenefitCostRatio;

impl AuditRule for BenefitCostRatio {
    fn id(&self) -> &'static str {
        "bcr"
    }
    fn description(&self) -> &'static str {
        "present-value benefits over present-value costs"
    }
    fn parameters(&self) -> &'static [&'static str] {
        &["benefits", "costs", "precision"]
    }
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding> {
        let input = AppraisalInput {
            funding_envelope: 0.0,
            pv_costs: args.require("costs")?,
            pv_benefits: args.require("benefits")?,
        };
        let precision = args.get_or("precision", 2.0);
        if !(0.0..=15.0).contains(&precision) || precision.fract() != 0.0 {
            return Err(Error::InvalidArgument {
                name: "precision".into(),
                reason: format!("expected an integer number of decimals in 0..=15, got {precision}"),
            });
        }
        appraisal::bcr_finding(&input, precision as u32)
    }
}

struct Headroom;

impl AuditRule for Headroom {
    fn id(&self) -> &'static str {
        "headroom"
    }
    fn description(&self) -> &'static str {
        "funding envelope margin over the estimate, as a fraction of the estimate"
    }
    fn parameters(&self) -> &'static [&'static str] {
        &["funding", "estimate"]
    }
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding> {
        appraisal::headroom_finding(args.require("funding")?, args.require("estimate")?)
    }
}

struct Overrun;

impl AuditRule for Overrun {
    fn id(&self) -> &'static str {
        "overrun"
    }
    fn description(&self) -> &'static str {
        "outturn cost against the estimate"
    }
    fn parameters(&self) -> &'static [&'static str] {
        &["actual", "estimated"]
    }
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding> {
        appraisal::overrun_finding(args.require("actual")?, args.require("estimated")?)
    }
}

struct InsideOutsideGap;

impl AuditRule for InsideOutsideGap {
    fn id(&self) -> &'static str {
        "gap"
    }
    fn description(&self) -> &'static str {
        "inside-view risk allowance against the outside-view required uplift"
    }
    fn parameters(&self) -> &'static [&'static str] {
        &["inside", "outside", "threshold", "p"]
    }
    fn evaluate(&self, args: &RuleArgs) -> Result<AuditFinding> {
        appraisal::gap_finding(
            args.require("inside")?,
            args.require("outside")?,
            args.get_or("threshold", appraisal::DEFAULT_GAP_THRESHOLD),
            args.get_or("p", 0.9),
        )
    }
}

/// Audit rules keyed by id.
pub struct RuleRegistry {
    rules: BTreeMap<&'static str, Box<dyn AuditRule>>,
}

impl RuleRegistry {
    pub fn empty() -> Self {
        RuleRegistry { rules: BTreeMap::new() }
    }

    /// Registry holding every built-in rule.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(MeanPlusUplift));
        reg.register(Box::new(BenefitCostRatio));
        reg.register(Box::new(Headroom));
        reg.register(Box::new(Overrun));
        reg.register(Box::new(InsideOutsideGap));
        reg
    }

    /// Adds a rule, replacing any rule with the same id.
    pub fn register(&mut self, rule: Box<dyn AuditRule>) {
        self.rules.insert(rule.id(), rule);
    }

    pub fn get(&self, id: &str) -> Result<&dyn AuditRule> {
        self.rules
            .get(id)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::UnknownRule(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.rules.keys().copied()
    }

    pub fn evaluate(&self, id: &str, args: &RuleArgs) -> Result<AuditFinding> {
        let rule = self.get(id)?;
        if let Some(unknown) = args.names().find(|n| !rule.parameters().contains(n)) {
            return Err(Error::InvalidArgument {
                name: unknown.to_string(),
                reason: format!("not a parameter of rule `{id}`"),
            });
        }
        rule.evaluate(args)
    }
}

impl Default for RuleRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rules_registered() {
        let reg = RuleRegistry::builtin();
        assert_eq!(
            reg.ids().collect::<Vec<_>>(),
            vec!["bcr", "gap", "headroom", "mean-plus-six", "overrun"]
        );
        assert!(matches!(reg.get("npv"), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn dispatch_by_name() {
        let reg = RuleRegistry::builtin();
        let f = reg
            .evaluate("mean-plus-six", &RuleArgs::new().with("total", 580.0).with("p_risk", 51.6).with("mean_risk", 38.6))
            .unwrap();
        assert_eq!(f.verdict, Verdict::Fail);
        assert_eq!(f.verdict.exit_code(), 3);

        let f = reg.evaluate("bcr", &RuleArgs::new().with("benefits", 592.0).with("costs", 335.0)).unwrap();
        assert_eq!(f.value("bcr_rounded"), Some(1.77));
        assert_eq!(f.verdict.exit_code(), 0);
    }

    #[test]
    fn argument_errors() {
        let reg = RuleRegistry::builtin();
        let err = reg.evaluate("overrun", &RuleArgs::new().with("actual", 1.0)).unwrap_err();
        assert!(err.to_string().contains("estimated"));
        let err = reg
            .evaluate("overrun", &RuleArgs::new().with("actual", 1.0).with("estimated", 1.0).with("x", 2.0))
            .unwrap_err();
        assert!(err.to_string().contains("`x`"));
        let err = reg
            .evaluate("bcr", &RuleArgs::new().with("benefits", 1.0).with("costs", 1.0).with("precision", 2.5))
            .unwrap_err();
        assert!(err.to_string().contains("precision"));
    }

    struct AlwaysFlag;

    impl AuditRule for AlwaysFlag {
        fn id(&self) -> &'static str {
            "always-flag"
        }
        fn description(&self) -> &'static str {
            "test rule"
        }
        fn parameters(&self) -> &'static [&'static str] {
            &[]
        }
        fn evaluate(&self, _: &RuleArgs) -> Result<AuditFinding> {
            let mut f = AuditFinding::new(self.id());
            f.verdict = Verdict::Flag;
            Ok(f)
        }
    }

    #[test]
    fn custom_rules_can_be_registered() {
        let mut reg = RuleRegistry::builtin();
        reg.register(Box::new(AlwaysFlag));
        let f = reg.evaluate("always-flag", &RuleArgs::new()).unwrap();
        assert_eq!(f.verdict.exit_code(), 2);
    }
}
