//! Inside-view quantitative risk analysis: risk registers, expected value,
//! correlated Monte Carlo simulation and an exact enumeration oracle.

mod correlation;
mod enumerate;
mod rng;
mod simulate;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::quantile::{check_probability, hazen_sorted};

pub use correlation::{CorrelationEntry, CorrelationSpec, ResolvedCorrelation};
pub use enumerate::{brute_force_enumerate, ExactDistribution, MAX_ENUMERATED_RISKS};
pub use rng::{Stream, StreamFactory};
pub use simulate::{simulate, simulate_contributions, Contributions, SimulationConfig};

/// Impact of a risk if it occurs, in money units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImpactDistribution {
    Fixed { value: f64 },
    /// Triangular on `[low, high]` peaking at `mode`.
    ThreePoint { low: f64, mode: f64, high: f64 },
}

impl ImpactDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            ImpactDistribution::Fixed { value } => value,
            ImpactDistribution::ThreePoint { low, mode, high } => (low + mode + high) / 3.0,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            ImpactDistribution::Fixed { value } => value,
            ImpactDistribution::ThreePoint { high, .. } => high,
        }
    }

    /// Inverse CDF at `u` in `[0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            ImpactDistribution::Fixed { value } => value,
            ImpactDistribution::ThreePoint { low, mode, high } => {
                let range = high - low;
                if range == 0.0 {
                    return low;
                }
                let u = u.clamp(0.0, 1.0);
                let split = (mode - low) / range;
                if u < split {
                    low + (u * range * (mode - low)).sqrt()
                } else {
                    high - ((1.0 - u) * range * (high - mode)).sqrt()
                }
            }
        }
    }

    fn validate(&self, id: &str, opportunity: bool) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidRisk { id: id.to_string(), reason });
        let values: Vec<(&str, f64)> = match *self {
            ImpactDistribution::Fixed { value } => vec![("impact.value", value)],
            ImpactDistribution::ThreePoint { low, mode, high } => {
                if !(low <= mode && mode <= high) {
                    return bad(format!(
                        "field `impact`: three_point needs low <= mode <= high, got ({low}, {mode}, {high})"
                    ));
                }
                vec![("impact.low", low), ("impact.mode", mode), ("impact.high", high)]
            }
        };
        for (field, v) in values {
            if !v.is_finite() {
                return bad(format!("field `{field}` must be finite, got {v}"));
            }
            if v < 0.0 && !opportunity {
                return bad(format!(
                    "field `{field}` is negative ({v}); set `opportunity: true` for upside risks"
                ));
            }
        }
        Ok(())
    }
}

/// One identified risk: chance of occurring and impact if it does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskItem {
    pub id: String,
    pub name: String,
    pub probability: f64,
    pub impact: ImpactDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Catastrophic risks are listed in reports but never simulated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub catastrophic: bool,
    /// Permits negative impact values (cost savings).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub opportunity: bool,
}

impl RiskItem {
    pub fn new(id: impl Into<String>, probability: f64, impact: ImpactDistribution) -> Self {
        let id = id.into();
        RiskItem {
            name: id.clone(),
            id,
            probability,
            impact,
            group: None,
            catastrophic: false,
            opportunity: false,
        }
    }

    pub fn fixed(id: impl Into<String>, probability: f64, value: f64) -> Self {
        Self::new(id, probability, ImpactDistribution::Fixed { value })
    }

    pub fn three_point(id: impl Into<String>, probability: f64, low: f64, mode: f64, high: f64) -> Self {
        Self::new(id, probability, ImpactDistribution::ThreePoint { low, mode, high })
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidRisk {
                id: self.name.clone(),
                reason: "field `id` must not be empty".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::InvalidRisk {
                id: self.id.clone(),
                reason: format!("field `probability` must be in [0, 1], got {}", self.probability),
            });
        }
        self.impact.validate(&self.id, self.opportunity)
    }

    /// Contribution to a trial total given the trial's uniform draw for this
    /// risk. The risk occurs when `u >= 1 - p`; the remaining mass is mapped
    /// onto the impact distribution, so the contribution is a single function
    /// of `u` and reordering draws across trials preserves the marginal.
    pub fn contribution(&self, u: f64) -> f64 {
        let miss = 1.0 - self.probability;
        if self.probability <= 0.0 || u < miss {
            return 0.0;
        }
        self.impact.inverse_cdf(((u - miss) / self.probability).min(1.0))
    }
}

/// A catalogue of identified risks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRegister {
    pub risks: Vec<RiskItem>,
}

impl RiskRegister {
    pub fn new(risks: Vec<RiskItem>) -> Result<Self> {
        let register = RiskRegister { risks };
        register.validate()?;
        Ok(register)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for risk in &self.risks {
            risk.validate()?;
            if !seen.insert(risk.id.as_str()) {
                return Err(Error::InvalidRisk {
                    id: risk.id.clone(),
                    reason: "field `id` is duplicated".into(),
                });
            }
        }
        Ok(())
    }

    /// Parses the `{"risks": [...]}` register format and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let register: RiskRegister = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        register.validate()?;
        Ok(register)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { line, reason } => Error::Parse {
                line,
                reason: format!("{}: {reason}", path.display()),
            },
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.risks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.risks.is_empty()
    }

    /// Risks that take part in simulation (everything not catastrophic).
    pub fn simulated(&self) -> impl Iterator<Item = &RiskItem> {
        self.risks.iter().filter(|r| !r.catastrophic)
    }

    pub fn catastrophic_ids(&self) -> Vec<String> {
        self.risks
            .iter()
            .filter(|r| r.catastrophic)
            .map(|r| r.id.clone())
            .collect()
    }
}

/// Probability-weighted sum of mean impacts over the simulated risks.
pub fn expected_value(register: &RiskRegister) -> Result<f64> {
    if register.is_empty() {
        return Err(Error::EmptyRegister);
    }
    register.validate()?;
    Ok(register
        .simulated()
        .map(|r| r.probability * r.impact.mean())
        .sum())
}

/// Sorted Monte Carlo trial totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    totals: Vec<f64>,
    mean: f64,
    excluded_catastrophic: Vec<String>,
}

impl SimulationResult {
    pub(crate) fn from_totals(mut totals: Vec<f64>, excluded_catastrophic: Vec<String>) -> Self {
        totals.sort_by(f64::total_cmp);
        let mean = if totals.is_empty() {
            0.0
        } else {
            totals.iter().sum::<f64>() / totals.len() as f64
        };
        SimulationResult { totals, mean, excluded_catastrophic }
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn count(&self) -> usize {
        self.totals.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation of the totals.
    pub fn std_dev(&self) -> f64 {
        let n = self.totals.len();
        if n < 2 {
            return 0.0;
        }
        let ss: f64 = self.totals.iter().map(|x| (x - self.mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if self.totals.is_empty() {
            return Err(Error::InvalidArgument {
                name: "result".into(),
                reason: "no trials".into(),
            });
        }
        Ok(hazen_sorted(&self.totals, p))
    }

    /// Ids of catastrophic risks left out of the simulation.
    pub fn excluded_catastrophic(&self) -> &[String] {
        &self.excluded_catastrophic
    }
}

/// P-level risk provision as a fraction of base cost.
pub fn risk_allowance(result: &SimulationResult, p: f64, base_cost: f64) -> Result<f64> {
    check_positive("base_cost", base_cost)?;
    Ok(result.quantile(p)? / base_cost)
}
