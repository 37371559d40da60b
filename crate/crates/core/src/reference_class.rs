//! The outside view: empirical overrun distributions built from completed
//! comparable projects.
//!
//! Every P-level query goes through the Hazen estimator in
//! [`crate::quantile`], including the quartiles behind the outlier fence.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::project::ProjectType;
use crate::quantile::{check_probability, ecdf_sorted, hazen_sorted};

/// Classes smaller than this still answer queries but carry a warning.
pub const RECOMMENDED_MIN_CLASS_SIZE: usize = 20;

/// Which business case an overrun was measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    OutlineBusinessCase,
    FinalBusinessCase,
    Unknown,
}

impl Baseline {
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::OutlineBusinessCase => "outline_business_case",
            Baseline::FinalBusinessCase => "final_business_case",
            Baseline::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "outline_business_case" | "obc" => Ok(Baseline::OutlineBusinessCase),
            "final_business_case" | "fbc" => Ok(Baseline::FinalBusinessCase),
            "unknown" | "" => Ok(Baseline::Unknown),
            other => Err(Error::InvalidArgument {
                name: "baseline".into(),
                reason: format!("unknown baseline `{other}`"),
            }),
        }
    }
}

/// One completed project's cost overrun in real terms, as a fraction
/// (`0.52` is +52%).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrunObservation {
    pub project_id: String,
    pub category: ProjectType,
    pub overrun: f64,
    pub baseline: Baseline,
}

impl OverrunObservation {
    pub fn new(
        project_id: impl Into<String>,
        category: ProjectType,
        overrun: f64,
        baseline: Baseline,
    ) -> Result<Self> {
        let project_id = project_id.into();
        if !overrun.is_finite() || overrun <= -1.0 {
            return Err(Error::InvalidObservation {
                id: project_id,
                reason: format!("overrun must be finite and > -1.0, got {overrun}"),
            });
        }
        Ok(OverrunObservation {
            project_id,
            category,
            overrun,
            baseline,
        })
    }
}

/// A point on the cumulative cost-risk curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCurvePoint {
    pub uplift: f64,
    pub cumulative_probability: f64,
}

/// Result of the upper-fence outlier rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub threshold: f64,
    pub outlier_ids: BTreeSet<String>,
    pub outlier_share: f64,
}

/// A labelled set of historic overruns, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceClass {
    label: String,
    observations: Vec<OverrunObservation>,
    sorted: Vec<f64>,
}

impl ReferenceClass {
    pub fn new(label: impl Into<String>, mut observations: Vec<OverrunObservation>) -> Self {
        // ties broken by id so the stored order never depends on input order
        observations.sort_by(|a, b| {
            a.overrun
                .total_cmp(&b.overrun)
                .then_with(|| a.project_id.cmp(&b.project_id))
        });
        let sorted = observations.iter().map(|o| o.overrun).collect();
        ReferenceClass {
            label: label.into(),
            observations,
            sorted,
        }
    }

    /// Builds an anonymous class straight from overrun fractions.
    pub fn from_overruns(label: impl Into<String>, overruns: &[f64]) -> Result<Self> {
        let observations = overruns
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                OverrunObservation::new(format!("p{i}"), ProjectType::Other, x, Baseline::Unknown)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(label, observations))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observations(&self) -> &[OverrunObservation] {
        &self.observations
    }

    pub fn overruns(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Restricts the class to one category, e.g. the rail projects of a mixed file.
    pub fn filter_category(&self, category: ProjectType) -> ReferenceClass {
        let obs = self
            .observations
            .iter()
            .filter(|o| o.category == category)
            .cloned()
            .collect();
        ReferenceClass::new(format!("{}/{}", self.label, category), obs)
    }

    /// Advisory message when the class is smaller than a credible reference class.
    pub fn size_warning(&self) -> Option<String> {
        (self.len() < RECOMMENDED_MIN_CLASS_SIZE).then(|| {
            format!(
                "reference class `{}` has {} observations; at least {} are recommended",
                self.label,
                self.len(),
                RECOMMENDED_MIN_CLASS_SIZE
            )
        })
    }

    fn nonempty(&self) -> Result<&[f64]> {
        if self.sorted.is_empty() {
            Err(Error::EmptyReferenceClass)
        } else {
            Ok(&self.sorted)
        }
    }

    /// Share of observations with overrun `<= x`.
    pub fn empirical_cdf(&self, x: f64) -> Result<f64> {
        Ok(ecdf_sorted(self.nonempty()?, x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let sorted = self.nonempty()?;
        check_probability(p)?;
        Ok(hazen_sorted(sorted, p))
    }

    /// Uplift that leaves at most `1 - confidence` chance of exceedance under
    /// the reference distribution. Never negative.
    pub fn required_uplift(&self, confidence: f64) -> Result<f64> {
        Ok(self.quantile(confidence)?.max(0.0))
    }

    /// Flags observations at or above `Q3 + 1.5 * IQR`.
    pub fn detect_outliers(&self) -> Result<OutlierReport> {
        if self.len() < 4 {
            return Err(Error::TooFewForQuartiles(self.len()));
        }
        let q1 = self.quantile(0.25)?;
        let q3 = self.quantile(0.75)?;
        let iqr = q3 - q1;
        let threshold = q3 + 1.5 * iqr;
        let outlier_ids: BTreeSet<String> = self
            .observations
            .iter()
            .filter(|o| o.overrun >= threshold)
            .map(|o| o.project_id.clone())
            .collect();
        Ok(OutlierReport {
            q1,
            q3,
            iqr,
            threshold,
            outlier_share: outlier_ids.len() as f64 / self.len() as f64,
            outlier_ids,
        })
    }

    /// Samples the cost-risk curve at `resolution` evenly spaced probabilities
    /// `i / (resolution + 1)`.
    pub fn s_curve(&self, resolution: usize) -> Result<Vec<SCurvePoint>> {
        let sorted = self.nonempty()?;
        if resolution < 2 {
            return Err(Error::Resolution(resolution));
        }
        let denom = (resolution + 1) as f64;
        Ok((1..=resolution)
            .map(|i| {
                let p = i as f64 / denom;
                SCurvePoint {
                    uplift: hazen_sorted(sorted, p),
                    cumulative_probability: p,
                }
            })
            .collect())
    }

    /// Reads the `project_id,category,overrun,baseline` CSV format. Lines
    /// starting with `#` are comments.
    pub fn from_csv_reader<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?
            .clone();
        let expected = ["project_id", "category", "overrun", "baseline"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                reason: format!(
                    "expected header `{}`, found `{}`",
                    expected.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut observations = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let parse_err = |reason: String| Error::Parse { line, reason };
            let id = record[0].to_string();
            let category: ProjectType =
                record[1].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            let overrun: f64 = record[2]
                .parse()
                .map_err(|_| parse_err(format!("overrun `{}` is not a number", &record[2])))?;
            let baseline: Baseline =
                record[3].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            let obs = OverrunObservation::new(id, category, overrun, baseline)
                .map_err(|e| parse_err(e.to_string()))?;
            observations.push(obs);
        }
        Ok(ReferenceClass::new(label, observations))
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_csv_reader(label, file)
    }
}
