//! Exact outcome distribution of a small register of independent,
//! fixed-impact risks, by enumerating every occurrence pattern.

use serde::Serialize;

use super::{ImpactDistribution, RiskRegister};
use crate::error::{Error, Result};
use crate::quantile::check_probability;

pub const MAX_ENUMERATED_RISKS: usize = 20;

/// Distinct outcomes in ascending order with their exact probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    pub outcomes: Vec<(f64, f64)>,
}

impl ExactDistribution {
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(v, p)| v * p).sum()
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .map(|(v, p)| p * (v - mean).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Index of the lowest outcome whose cumulative probability reaches `p`.
    pub fn quantile_index(&self, p: f64) -> Result<usize> {
        check_probability(p)?;
        let mut cum = 0.0;
        for (i, (_, prob)) in self.outcomes.iter().enumerate() {
            cum += prob;
            if cum >= p - 1e-12 {
                return Ok(i);
            }
        }
        Ok(self.outcomes.len() - 1)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.outcomes[self.quantile_index(p)?].0)
    }
}

/// Enumerates all `2^n` occurrence patterns of the simulated risks.
pub fn brute_force_enumerate(register: &RiskRegister) -> Result<ExactDistribution> {
    register.validate()?;
    let risks: Vec<_> = register.simulated().collect();
    if risks.len() > MAX_ENUMERATED_RISKS {
        return Err(Error::NotEnumerable(format!(
            "{} risks exceed the limit of {MAX_ENUMERATED_RISKS}",
            risks.len()
        )));
    }
    let mut values = Vec::with_capacity(risks.len());
    for r in &risks {
        match r.impact {
            ImpactDistribution::Fixed { value } => values.push((r.probability, value)),
            ImpactDistribution::ThreePoint { .. } => {
                return Err(Error::NotEnumerable(format!(
                    "risk `{}` has a three_point impact; only fixed impacts can be enumerated",
                    r.id
                )))
            }
        }
    }

    let mut patterns: Vec<(f64, f64)> = (0u32..1 << values.len())
        .map(|mask| {
            let mut total = 0.0;
            let mut prob = 1.0;
            for (i, &(p, v)) in values.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    total += v;
                    prob *= p;
                } else {
                    prob *= 1.0 - p;
                }
            }
            (total, prob)
        })
        .filter(|&(_, prob)| prob > 0.0)
        .collect();
    patterns.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut outcomes: Vec<(f64, f64)> = Vec::new();
    for (v, p) in patterns {
        match outcomes.last_mut() {
            Some(last) if (v - last.0).abs() <= 1e-9 * v.abs().max(1.0) => last.1 += p,
            _ => outcomes.push((v, p)),
        }
    }
    Ok(ExactDistribution { outcomes })
}
