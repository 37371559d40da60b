//! Published optimism-bias uplift schedules and the procedure for reducing an
//! upper-bound uplift by the share of risk that is demonstrably managed.
//!
//! The schedules ship as an embedded CSV (`type,metric,anchor,value`) and can
//! be replaced wholesale by a file of the same shape.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, Error, Result};
use crate::project::ProjectType;

/// Embedded schedule file.
pub const EMBEDDED_SCHEDULE: &str = include_str!("../data/uplift_schedules.csv");

/// Version tag of the embedded schedule, echoed into reports.
pub const EMBEDDED_SCHEDULE_VERSION: &str = "embedded-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Capex,
    Opex,
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "capex" => Ok(CostKind::Capex),
            "opex" => Ok(CostKind::Opex),
            other => Err(Error::InvalidArgument {
                name: "cost_kind".into(),
                reason: format!("expected capex or opex, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpliftUnit {
    PercentOfPresentValue,
    PercentPerAnnum,
}

/// One cell of the staged risk-treatment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageUplift {
    pub cost_kind: CostKind,
    pub stage: u8,
    pub uplift: f64,
    pub unit: UpliftUnit,
    pub qra_required: bool,
}

/// The ten staged uplifts: CAPEX and OPEX across development levels 1..=5.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageUpliftTable {
    rows: BTreeMap<(CostKind, u8), StageUplift>,
}

impl StageUpliftTable {
    pub fn lookup(&self, cost_kind: CostKind, stage: u8) -> Result<StageUplift> {
        if !(1..=5).contains(&stage) {
            return Err(Error::StageOutOfRange(stage));
        }
        Ok(self.rows[&(cost_kind, stage)])
    }

    pub fn rows(&self) -> impl Iterator<Item = &StageUplift> {
        self.rows.values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMetric {
    Capex,
    WorksDuration,
}

impl BoundsMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundsMetric::Capex => "capex",
            BoundsMetric::WorksDuration => "works_duration",
        }
    }
}

impl fmt::Display for BoundsMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundsMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "capex" => Ok(BoundsMetric::Capex),
            "works_duration" => Ok(BoundsMetric::WorksDuration),
            other => Err(Error::InvalidArgument {
                name: "metric".into(),
                reason: format!("expected capex or works_duration, got `{other}`"),
            }),
        }
    }
}

/// Upper and lower optimism-bias uplifts for a project type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpliftBounds {
    pub project_type: ProjectType,
    pub metric: BoundsMetric,
    pub upper: f64,
    pub lower: f64,
}

impl UpliftBounds {
    pub fn new(project_type: ProjectType, metric: BoundsMetric, upper: f64, lower: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && 0.0 <= lower && lower <= upper) {
            return Err(Error::InvalidArgument {
                name: "bounds".into(),
                reason: format!("need 0 <= lower <= upper, got lower={lower} upper={upper}"),
            });
        }
        Ok(UpliftBounds { project_type, metric, upper, lower })
    }
}

/// All shipped schedules: staged table, confidence curves and bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpliftSchedules {
    pub version: String,
    pub stages: StageUpliftTable,
    confidence: BTreeMap<ProjectType, Vec<(f64, f64)>>,
    bounds: BTreeMap<(ProjectType, BoundsMetric), UpliftBounds>,
}

impl UpliftSchedules {
    pub fn embedded() -> Self {
        Self::from_csv_reader(EMBEDDED_SCHEDULE_VERSION, EMBEDDED_SCHEDULE.as_bytes())
            .expect("embedded schedule is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(path.display().to_string(), file)
    }

    pub fn from_csv_reader<R: Read>(version: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?;
        if headers.iter().ne(["type", "metric", "anchor", "value"]) {
            return Err(Error::Parse {
                line: 1,
                reason: "expected header `type,metric,anchor,value`".into(),
            });
        }

        let mut capex = BTreeMap::new();
        let mut opex = BTreeMap::new();
        let mut qra = BTreeMap::new();
        let mut confidence: BTreeMap<ProjectType, Vec<(f64, f64)>> = BTreeMap::new();
        let mut raw_bounds: BTreeMap<(ProjectType, BoundsMetric), (Option<f64>, Option<f64>)> =
            BTreeMap::new();

        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let err = |reason: String| Error::Parse { line, reason };
            let (kind, metric, anchor) = (&record[0], &record[1], &record[2]);
            let value: f64 = record[3]
                .parse()
                .map_err(|_| err(format!("value `{}` is not a number", &record[3])))?;
            if !value.is_finite() || value < 0.0 {
                return Err(err(format!("value must be finite and non-negative, got {value}")));
            }

            if kind == "stage" {
                let stage: u8 = anchor
                    .parse()
                    .ok()
                    .filter(|s| (1..=5).contains(s))
                    .ok_or_else(|| err(format!("stage anchor `{anchor}` not in 1..=5")))?;
                let slot = match metric {
                    "capex" => capex.insert(stage, value),
                    "opex_pv" => opex.insert(stage, (value, UpliftUnit::PercentOfPresentValue)).map(|v| v.0),
                    "opex_pa" => opex.insert(stage, (value, UpliftUnit::PercentPerAnnum)).map(|v| v.0),
                    "qra_required" => qra.insert(stage, value != 0.0).map(|_| 0.0),
                    other => return Err(err(format!("unknown stage metric `{other}`"))),
                };
                if slot.is_some() {
                    return Err(err(format!("duplicate stage {stage} {metric} row")));
                }
                continue;
            }

            let project_type: ProjectType = kind.parse().map_err(|e: Error| err(e.to_string()))?;
            if metric == "confidence" {
                let p: f64 = anchor
                    .parse()
                    .ok()
                    .filter(|p: &f64| *p > 0.0 && *p < 1.0)
                    .ok_or_else(|| err(format!("confidence anchor `{anchor}` not in (0, 1)")))?;
                confidence.entry(project_type).or_default().push((p, value));
            } else {
                let metric: BoundsMetric = metric.parse().map_err(|e: Error| err(e.to_string()))?;
                let entry = raw_bounds.entry((project_type, metric)).or_default();
                let slot = match anchor {
                    "upper" => &mut entry.0,
                    "lower" => &mut entry.1,
                    other => return Err(err(format!("bound anchor must be upper or lower, got `{other}`"))),
                };
                if slot.replace(value).is_some() {
                    return Err(err(format!("duplicate {anchor} bound for {project_type} {metric}")));
                }
            }
        }

        let mut rows = BTreeMap::new();
        for stage in 1..=5u8 {
            let c = *capex
                .get(&stage)
                .ok_or_else(|| Error::InvalidSchedule(format!("missing capex uplift for stage {stage}")))?;
            let (o, unit) = *opex
                .get(&stage)
                .ok_or_else(|| Error::InvalidSchedule(format!("missing opex uplift for stage {stage}")))?;
            let q = *qra
                .get(&stage)
                .ok_or_else(|| Error::InvalidSchedule(format!("missing qra_required for stage {stage}")))?;
            rows.insert(
                (CostKind::Capex, stage),
                StageUplift {
                    cost_kind: CostKind::Capex,
                    stage,
                    uplift: c,
                    unit: UpliftUnit::PercentOfPresentValue,
                    qra_required: q,
                },
            );
            rows.insert(
                (CostKind::Opex, stage),
                StageUplift { cost_kind: CostKind::Opex, stage, uplift: o, unit, qra_required: q },
            );
        }
        for stage in 2..=5u8 {
            if capex[&stage] >= capex[&(stage - 1)] {
                return Err(Error::InvalidSchedule(format!(
                    "capex uplifts must strictly decrease across stages; stage {stage} is not below stage {}",
                    stage - 1
                )));
            }
        }

        for (ty, anchors) in confidence.iter_mut() {
            anchors.sort_by(|a, b| a.0.total_cmp(&b.0));
            if anchors.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidSchedule(format!("duplicate confidence anchor for {ty}")));
            }
        }

        let mut bounds = BTreeMap::new();
        for ((ty, metric), (upper, lower)) in raw_bounds {
            let (Some(upper), Some(lower)) = (upper, lower) else {
                return Err(Error::InvalidSchedule(format!(
                    "{ty} {metric} needs both upper and lower bounds"
                )));
            };
            let b = UpliftBounds::new(ty, metric, upper, lower)
                .map_err(|e| Error::InvalidSchedule(format!("{ty} {metric}: {e}")))?;
            bounds.insert((ty, metric), b);
        }

        Ok(UpliftSchedules {
            version: version.into(),
            stages: StageUpliftTable { rows },
            confidence,
            bounds,
        })
    }

    pub fn lookup_stage_uplift(&self, cost_kind: CostKind, stage: u8) -> Result<StageUplift> {
        self.stages.lookup(cost_kind, stage)
    }

    /// Uplift at a confidence level, read from the published anchors with
    /// linear interpolation between them.
    pub fn lookup_confidence_uplift(&self, project_type: ProjectType, confidence: f64) -> Result<f64> {
        let anchors = self
            .confidence
            .get(&project_type)
            .ok_or_else(|| Error::UnknownProjectType(project_type.to_string()))?;
        let (min, max) = (anchors[0].0, anchors[anchors.len() - 1].0);
        if !(confidence >= min && confidence <= max) {
            return Err(Error::ConfidenceOutsideAnchors { confidence, min, max });
        }
        if let Some(&(_, v)) = anchors.iter().find(|(p, _)| *p == confidence) {
            return Ok(v);
        }
        let hi = anchors.partition_point(|(p, _)| *p < confidence);
        let (p0, v0) = anchors[hi - 1];
        let (p1, v1) = anchors[hi];
        Ok(v0 + (confidence - p0) / (p1 - p0) * (v1 - v0))
    }

    pub fn confidence_anchors(&self, project_type: ProjectType) -> Option<&[(f64, f64)]> {
        self.confidence.get(&project_type).map(Vec::as_slice)
    }

    pub fn bounds(&self, project_type: ProjectType, metric: BoundsMetric) -> Result<UpliftBounds> {
        self.bounds
            .get(&(project_type, metric))
            .copied()
            .ok_or_else(|| Error::MissingBounds {
                project_type: project_type.to_string(),
                metric: metric.to_string(),
            })
    }
}

impl Default for UpliftSchedules {
    fn default() -> Self {
        Self::embedded()
    }
}

/// Contribution of each causal factor to the total optimism-bias uplift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorBreakdown {
    factors: Vec<(String, f64)>,
}

impl FactorBreakdown {
    pub fn new(factors: Vec<(String, f64)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidBreakdown("no factors".into()));
        }
        for (name, share) in &factors {
            if !(share.is_finite() && *share >= 0.0) {
                return Err(Error::InvalidBreakdown(format!("factor `{name}` has share {share}")));
            }
        }
        for (i, (name, _)) in factors.iter().enumerate() {
            if factors[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidBreakdown(format!("duplicate factor `{name}`")));
            }
        }
        let total: f64 = factors.iter().map(|(_, s)| s).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBreakdown(format!("shares sum to {total}, expected 1")));
        }
        Ok(FactorBreakdown { factors })
    }

    /// CAPEX breakdown for non-standard civil engineering projects.
    pub fn nonstandard_civils_capex() -> Self {
        let factors = [
            ("procurement", 0.02),
            ("design_complexity", 0.08),
            ("innovation", 0.09),
            ("environmental_impact", 0.05),
            ("inadequacy_of_business_case", 0.35),
            ("funding_availability", 0.05),
            ("project_management_team", 0.02),
            ("poor_project_intelligence", 0.09),
            ("site_characteristics", 0.05),
            ("economic_influences", 0.03),
            ("legislation_and_regulation", 0.08),
            ("technology", 0.08),
            ("other_external_influences", 0.01),
        ];
        Self::new(factors.iter().map(|&(n, s)| (n.to_string(), s)).collect())
            .expect("shipped breakdown sums to one")
    }

    pub fn factors(&self) -> &[(String, f64)] {
        &self.factors
    }

    pub fn total_share(&self) -> f64 {
        self.factors.iter().map(|(_, s)| s).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Objective,
    Subjective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorMitigation {
    pub factor: String,
    pub managed: f64,
    pub evidence: Evidence,
}

/// How much of each factor's risk the project claims to manage, and on what
/// evidence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationAssessment {
    pub factors: Vec<FactorMitigation>,
}

impl MitigationAssessment {
    /// Same `managed` level and evidence for every factor of a breakdown.
    pub fn uniform(breakdown: &FactorBreakdown, managed: f64, evidence: Evidence) -> Self {
        MitigationAssessment {
            factors: breakdown
                .factors()
                .iter()
                .map(|(name, _)| FactorMitigation { factor: name.clone(), managed, evidence })
                .collect(),
        }
    }

    pub fn set(&mut self, factor: &str, managed: f64, evidence: Evidence) {
        match self.factors.iter_mut().find(|f| f.factor == factor) {
            Some(f) => {
                f.managed = managed;
                f.evidence = evidence;
            }
            None => self.factors.push(FactorMitigation {
                factor: factor.to_string(),
                managed,
                evidence,
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

/// Reduces the upper-bound uplift by the managed share of each factor:
/// `max(lower, upper * (1 - sum(share * managed)))`. With `require_objective`
/// set, subjectively evidenced mitigation counts for nothing.
pub fn mitigated_uplift(
    bounds: &UpliftBounds,
    breakdown: &FactorBreakdown,
    assessment: &MitigationAssessment,
    require_objective: bool,
) -> Result<f64> {
    for entry in &assessment.factors {
        if !breakdown.factors.iter().any(|(n, _)| *n == entry.factor) {
            return Err(Error::UnknownFactor(entry.factor.clone()));
        }
        if !(0.0..=1.0).contains(&entry.managed) {
            return Err(Error::InvalidArgument {
                name: entry.factor.clone(),
                reason: format!("managed must be in [0, 1], got {}", entry.managed),
            });
        }
    }
    let mut reduction = 0.0;
    for (name, share) in &breakdown.factors {
        let mut matching = assessment.factors.iter().filter(|f| f.factor == *name);
        let entry = matching.next().ok_or_else(|| Error::MissingFactor(name.clone()))?;
        if matching.next().is_some() {
            return Err(Error::InvalidArgument {
                name: name.clone(),
                reason: "factor assessed more than once".into(),
            });
        }
        let managed = if require_objective && entry.evidence == Evidence::Subjective {
            0.0
        } else {
            entry.managed
        };
        reduction += share * managed;
    }
    Ok((bounds.upper * (1.0 - reduction)).max(bounds.lower))
}

/// `base_cost * (1 + uplift)`.
pub fn green_book_adjust(base_cost: f64, uplift: f64) -> Result<f64> {
    check_nonneg("base_cost", base_cost)?;
    check_nonneg("uplift", uplift)?;
    Ok(base_cost * (1.0 + uplift))
}

/// Low, central and high adjusted costs for sensitivity testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityScenarios {
    pub low: f64,
    pub central: f64,
    pub high: f64,
}

pub fn sensitivity_scenarios(base_cost: f64, bounds: &UpliftBounds, central: f64) -> Result<SensitivityScenarios> {
    if !(central >= bounds.lower && central <= bounds.upper) {
        return Err(Error::InvalidArgument {
            name: "central".into(),
            reason: format!(
                "central uplift {central} outside bounds [{}, {}]",
                bounds.lower, bounds.upper
            ),
        });
    }
    Ok(SensitivityScenarios {
        low: green_book_adjust(base_cost, bounds.lower)?,
        central: green_book_adjust(base_cost, central)?,
        high: green_book_adjust(base_cost, bounds.upper)?,
    })
}
